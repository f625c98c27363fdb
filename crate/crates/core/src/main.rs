use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, report) = ivopt::cli::run(std::env::args_os());
    let written = if code == ivopt::cli::EXIT_INPUT {
        std::io::stderr().write_all(report.as_bytes())
    } else {
        std::io::stdout().write_all(report.as_bytes())
    };
    if written.is_err() {
        return ExitCode::from(ivopt::cli::EXIT_INPUT as u8);
    }
    ExitCode::from(code as u8)
}
