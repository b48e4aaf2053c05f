use clap::Parser;

fn main() {
    let cli = onetarget::cli::Cli::parse();
    if let Err(err) = onetarget::cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
