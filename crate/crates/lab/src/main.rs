use clap::Parser;
use nodal_lab::{emit, run, Cli, LabError};

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    let result: Result<(), LabError> = run(&cli).and_then(|out| emit(&out, cli.global.out.as_deref()));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
