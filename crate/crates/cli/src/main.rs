use std::process::ExitCode;

use clap::Parser;
use idfsim_cli::{init_thread_pool, run, Cli, CliResult};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("idfsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    init_thread_pool()?;
    let config = cli.run_config()?;
    for path in run(&config)? {
        println!("{}", path.display());
    }
    Ok(())
}
