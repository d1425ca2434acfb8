use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use planepart_cli::args::Cli;
use planepart_cli::error::{CliError, EXIT_OUTPUT};
use planepart_cli::run::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.into())
            .build_global();
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut err = io::stderr();
    let result = run(&cli, &mut out, &mut err).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "planepart: {e}");
            let code = e.exit_code();
            ExitCode::from(u8::try_from(code).unwrap_or(EXIT_OUTPUT as u8))
        }
    }
}
