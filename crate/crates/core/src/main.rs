use clap::Parser;

use cvgraph::cli::{run, Cli, USAGE_EXIT_CODE};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = match run(&cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            USAGE_EXIT_CODE
        }
    };
    std::process::exit(code);
}
