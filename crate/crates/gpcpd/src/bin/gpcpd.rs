use clap::Parser;

fn main() {
    let cli = gpcpd::cli::Cli::parse();
    if let Err(err) = gpcpd::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(gpcpd::cli::exit_code(&err));
    }
}
