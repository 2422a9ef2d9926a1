use clap::Parser;

fn main() {
    let cli = qbsim_cli::Cli::parse();
    match qbsim_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
