use clap::Parser;

use lambda_omega::cli::{run, Cli, ErrorReport};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let report = ErrorReport::from(&e);
        eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
        std::process::exit(report.exit_code);
    }
}
