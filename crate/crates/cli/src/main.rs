use clap::Parser;

fn main() {
    let cli = malcev_tool::Cli::parse();
    std::process::exit(malcev_tool::run(&cli));
}
