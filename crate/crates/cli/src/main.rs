use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use resdiv_cli::{builtins, run_text, RunError};

/// Runs a problem file and reports pass/fail.
#[derive(Parser, Debug)]
#[command(name = "resdiv", version)]
struct Args {
    /// Problem file (JSON).
    #[arg(required_unless_present_any = ["builtin", "list_builtins"])]
    input: Option<PathBuf>,
    /// Run a bundled problem instead of a file.
    #[arg(long, conflicts_with = "input")]
    builtin: Option<String>,
    /// List bundled problems and exit.
    #[arg(long)]
    list_builtins: bool,
    /// Print a bundled problem file and exit.
    #[arg(long)]
    show_builtin: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the quadrature nodes of the first integral here.
    #[arg(long)]
    debug_nodes: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_builtins {
        for b in builtins::catalog() {
            println!("{:<40} {}", b.name, b.tag);
        }
        return ExitCode::SUCCESS;
    }
    if let Some(name) = &args.show_builtin {
        return match builtins::find(name) {
            Some(b) => {
                print!("{}", b.text);
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown builtin {name:?}");
                ExitCode::from(2)
            }
        };
    }
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let text = match (&args.builtin, &args.input) {
        (Some(name), _) => match builtins::find(name) {
            Some(b) => b.text.to_string(),
            None => {
                eprintln!("unknown builtin {name:?}; see --list-builtins");
                return ExitCode::from(2);
            }
        },
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        (None, None) => unreachable!("clap requires an input"),
    };
    match run_text(&text, args.debug_nodes.as_deref()) {
        Ok(report) => {
            print!("{}", report.summary());
            if let Some(path) = &args.report {
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Err(e) = std::fs::write(path, json + "\n") {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            match &e {
                RunError::Input(i) => eprintln!("input error at {}: {}", i.pointer, i.message),
                RunError::Numeric { .. } => eprintln!("{e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
