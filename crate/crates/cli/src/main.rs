use clap::Parser;

fn main() {
    let cli = radwave_cli::Cli::parse();
    if let Err(e) = radwave_cli::run(&cli) {
        eprintln!("radwave: {e}");
        std::process::exit(e.exit_code());
    }
}
