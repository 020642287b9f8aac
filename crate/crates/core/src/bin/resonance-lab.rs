use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use resonance_lab::cli::{run, Cli};
use resonance_lab::sampling::configured_threads;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = configured_threads() {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let out = run(&cli);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
