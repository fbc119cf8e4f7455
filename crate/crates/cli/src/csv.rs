//! Trajectory CSV: `t,x_1_1,...,x_N_m,v_1_1,...,v_N_m,error,cost`, one row per
//! recorded sample, every number with 17 significant digits.

use std::fmt::Write;

use lsqflow_core::Trajectory;

pub fn header(n: usize, m: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for block in ["x", "v"] {
        for i in 1..=n {
            for c in 1..=m {
                cols.push(format!("{block}_{i}_{c}"));
            }
        }
    }
    cols.push("error".into());
    cols.push("cost".into());
    cols.join(",")
}

pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(traj: &Trajectory) -> String {
    let mut out = header(traj.n, traj.m);
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&number(s.t));
        for x in s.x.iter().chain(s.v.iter()).chain([s.error, s.cost].iter()) {
            out.push(',');
            out.push_str(&number(*x));
        }
        out.push('\n');
    }
    out
}

/// Reads back the numeric table written by `to_csv`.
pub fn parse(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let head: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("row {}: {e}", k + 1))?;
        if row.len() != head.len() {
            let mut msg = String::new();
            let _ = write!(msg, "row {} has {} fields, header has {}", k + 1, row.len(), head.len());
            return Err(msg);
        }
        rows.push(row);
    }
    Ok((head, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(header(2, 1), "t,x_1_1,x_2_1,v_1_1,v_2_1,error,cost");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 7.0, 1e-300, 6.02214076e23, 0.0] {
            let s = number(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
