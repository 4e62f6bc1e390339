use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = apdb_cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match apdb_cli::run(cli, &mut stdout) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
