use clap::Parser;

fn main() {
    let cli = qexp::cli::Cli::parse();
    std::process::exit(qexp::cli::run(&cli));
}
