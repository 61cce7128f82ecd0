use clap::Parser;
use ldcap_cli::app::{run, Cli};

/// Worker-count override; unset or 0 means one thread per core.
const WORKERS_VAR: &str = "LDCAP_WORKERS";

fn main() {
    // clap exits 2 on parse failure by default; the contract here is 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Ok(v) = std::env::var(WORKERS_VAR) {
        match v.parse::<usize>() {
            Ok(n) => {
                // n = 0 keeps rayon's default sizing
                if n > 0 {
                    if let Err(e) = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global()
                    {
                        eprintln!("ldcap: could not size the worker pool: {e}");
                        std::process::exit(1);
                    }
                }
            }
            Err(_) => {
                eprintln!("ldcap: {WORKERS_VAR} must be a non-negative integer, got {v:?}");
                std::process::exit(1);
            }
        }
    }

    if let Err(e) = run(cli) {
        eprintln!("ldcap: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
