use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = lsqflow_tool::app::cli_main(std::env::args_os());
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", out.stderr);
    ExitCode::from(out.code)
}
