//! Eigenvalues of a dense real nonsymmetric matrix.
//!
//! Householder reduction to upper Hessenberg form followed by the Francis
//! double-shift QR iteration, after the EISPACK routines `orthes` and `hqr`
//! (Martin, Wilkinson, Peters; Handbook for Automatic Computation, vol. II).
//! Only eigenvalues are produced; Schur vectors are not accumulated.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exceptional shifts are applied every this many sweeps without deflation.
const EXCEPTIONAL_EVERY: usize = 10;

/// All `n` eigenvalues of the square matrix `a`, complex pairs included.
///
/// The order is the deflation order of the QR iteration; callers that need a
/// canonical order should sort.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite matrix entry".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let (re, im) = hqr(&mut h)?;
    Ok(re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect())
}

fn hessenberg(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // H = (I - u u'/h) H (I - u u'/h)
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
        for i in (m + 1)..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

#[allow(clippy::many_single_char_names)]
fn hqr(h: &mut DMatrix<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = h.nrows();
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let eps = f64::EPSILON;
    let low: isize = 0;
    let mut n: isize = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut s, mut z): (f64, f64);
    let (mut w, mut x, mut y): (f64, f64, f64);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        return Ok((d, e));
    }

    let at = |i: isize, j: isize| (i as usize, j as usize);
    let max_sweeps = 30 * nn.max(10);
    let mut iter = 0usize;
    while n >= low {
        // look for a single small subdiagonal element
        let mut l = n;
        while l > low {
            s = h[at(l - 1, l - 1)].abs() + h[at(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[at(l, l - 1)].abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // one root
            h[at(n, n)] += exshift;
            d[n as usize] = h[at(n, n)];
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // two roots
            w = h[at(n, n - 1)] * h[at(n - 1, n)];
            p = (h[at(n - 1, n - 1)] - h[at(n, n)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[at(n, n)] += exshift;
            h[at(n - 1, n - 1)] += exshift;
            x = h[at(n, n)];
            let (nu, nm1) = (n as usize, (n - 1) as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nm1] = x + z;
                d[nu] = d[nm1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nm1] = 0.0;
                e[nu] = 0.0;
                x = h[at(n, n - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nm1..nn {
                    z = h[(nm1, j)];
                    h[(nm1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nm1)];
                    h[(i, nm1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
            } else {
                d[nm1] = x + p;
                d[nu] = x + p;
                e[nm1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // no convergence yet: form shift
            x = h[at(n, n)];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[at(n - 1, n - 1)];
                w = h[at(n, n - 1)] * h[at(n - 1, n)];
            }
            // Wilkinson's exceptional shift, alternating with the second kind
            let exceptional = iter > 0 && iter % EXCEPTIONAL_EVERY == 0;
            if exceptional && (iter / EXCEPTIONAL_EVERY) % 2 == 1 {
                exshift += x;
                for i in low..=n {
                    h[at(i, i)] -= x;
                }
                s = h[at(n, n - 1)].abs() + h[at(n - 1, n - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if exceptional && (iter / EXCEPTIONAL_EVERY) % 2 == 0 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        h[at(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > max_sweeps {
                return Err(Error::NumericalFailure(format!(
                    "QR iteration did not converge for eigenvalue index {n}"
                )));
            }

            // look for two consecutive small subdiagonal elements
            let mut m = n - 2;
            while m >= l {
                z = h[at(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[at(m + 1, m)] + h[at(m, m + 1)];
                q = h[at(m + 1, m + 1)] - z - r - s;
                r = h[at(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[at(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[at(m - 1, m - 1)].abs() + z.abs() + h[at(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                h[at(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[at(i, i - 3)] = 0.0;
                }
            }

            // double QR step on rows l..=n and columns m..=n
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[at(k, k - 1)];
                    q = h[at(k + 1, k - 1)];
                    r = if notlast { h[at(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[at(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[at(k, k - 1)] = -h[at(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    let ku = k as usize;
                    for j in ku..nn {
                        p = h[(ku, j)] + q * h[(ku + 1, j)];
                        if notlast {
                            p += r * h[(ku + 2, j)];
                            h[(ku + 2, j)] -= p * z;
                        }
                        h[(ku, j)] -= p * x;
                        h[(ku + 1, j)] -= p * y;
                    }
                    let imax = (n.min(k + 3)) as usize;
                    for i in 0..=imax {
                        p = x * h[(i, ku)] + y * h[(i, ku + 1)];
                        if notlast {
                            p += z * h[(i, ku + 2)];
                            h[(i, ku + 2)] -= p * r;
                        }
                        h[(i, ku)] -= p;
                        h[(i, ku + 1)] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((d, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = sorted(eigenvalues(&a).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn triangular_matrix_returns_diagonal() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 5.0, -1.0, 0.0, -3.0, 4.0, 0.0, 0.0, 7.0]);
        let ev = sorted(eigenvalues(&a).unwrap());
        let re: Vec<f64> = ev.iter().map(|c| c.re).collect();
        assert!((re[0] + 3.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12 && (re[2] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_and_empty() {
        assert!(eigenvalues(&DMatrix::zeros(4, 4)).unwrap().iter().all(|c| c.norm() == 0.0));
        assert!(eigenvalues(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let a = DMatrix::from_row_slice(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ev = sorted(eigenvalues(&a).unwrap());
        for (c, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((c.re - want).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            eigenvalues(&DMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
