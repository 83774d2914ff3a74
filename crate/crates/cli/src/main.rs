//! Command-line harness: operator evaluation, product-rule verification,
//! and batch residual suites with machine-readable reports.
//!
//! Exit codes: 0 all checks within tolerance, 1 at least one residual above
//! tolerance (report still written), 2 usage or parse error, 3 numerical
//! non-convergence flagged.

mod config;
mod report;
mod run;

use clap::Parser;

fn main() {
    let cli = config::Cli::parse();
    let code = match config::lower(cli).and_then(run::run) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    };
    std::process::exit(code);
}
