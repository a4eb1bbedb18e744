use clap::Parser;

fn main() {
    let cli = qgenus::cli::Cli::parse();
    std::process::exit(qgenus::cli::run(cli));
}
