use clap::Parser;

fn main() {
    let cli = blab::cli::Cli::parse();
    std::process::exit(blab::cli::run(&cli));
}
