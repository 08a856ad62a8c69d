use std::process::ExitCode;

use clap::Parser;
use synthdp::cli::{run, thread_cap, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_cap().and_then(|cap| {
        if let Some(n) = cap {
            // only fails if a global pool already exists, which it cannot here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        run(&cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
