use clap::Parser;

fn main() {
    let cli = pam_cli::Cli::parse();
    std::process::exit(pam_cli::run(&cli));
}
