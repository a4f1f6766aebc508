use clap::Parser;
use hetspec::{run, Cli, EXIT_VALIDATION};

fn main() {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("HETSPEC_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                // only fails if a pool already exists, which cannot happen here
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("hetspec: HETSPEC_THREADS must be a positive integer, got {v:?}");
                std::process::exit(EXIT_VALIDATION);
            }
        }
    }
    if let Err(e) = run(&cli) {
        eprintln!("hetspec: {e}");
        std::process::exit(e.exit_code());
    }
}
