use clap::Parser;

fn main() {
    std::process::exit(acx::cli::main_with(acx::cli::Cli::parse()));
}
