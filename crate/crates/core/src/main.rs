use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use cyclopair::cli::{run, Cli};

fn main() -> ExitCode {
    let config = Cli::parse().into_config();
    let mut out = BufWriter::new(io::stdout());
    let code = run(&config, &mut out, &mut io::stderr());
    ExitCode::from(code as u8)
}
