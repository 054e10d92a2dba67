use clap::Parser;

fn main() {
    let cli = qtp::cli::Cli::parse();
    let code = qtp::cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
