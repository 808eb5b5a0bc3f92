use clap::Parser;

fn main() {
    let cli = dirac_fem::cli::Cli::parse();
    std::process::exit(dirac_fem::cli::execute(cli));
}
