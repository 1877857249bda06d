use clap::Parser;

fn main() {
    let cli = memfhn_cli::Cli::parse();
    std::process::exit(memfhn_cli::run(cli));
}
