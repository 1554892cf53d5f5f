use clap::Parser;
use selfsim_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.log_level).init();
    std::process::exit(run(&cli));
}
