use clap::Parser;

fn main() -> std::process::ExitCode {
    subsys::cli::run(subsys::cli::Cli::parse())
}
