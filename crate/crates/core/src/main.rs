use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let report =
        ptt_ldp::cli::run_command(std::env::args_os(), &mut stdin.lock(), &mut stdout.lock());
    if !report.config.is_empty() {
        eprintln!("config: {}", report.config);
    }
    if let Some(err) = &report.error {
        eprintln!("error: {}", err.trim_end());
    }
    ExitCode::from(report.exit_code as u8)
}
