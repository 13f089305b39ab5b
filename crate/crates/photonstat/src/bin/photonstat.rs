use clap::Parser;

use photonstat::cli;

fn main() {
    let args = cli::Cli::parse();
    match cli::run(args) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(cli::exit_code(&err));
        }
    }
}
