use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gunlay_cli::{
    csv_document, exit_code, expand_rows, export_polyline, load_scenario, run_rows, summary_line,
    trace_document,
};

#[derive(Parser)]
#[command(name = "gunlay", about = "Barrel-direction scenario solver", version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Solve every (target, cone, eps0) combination of a scenario file.
    Solve {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Write the result table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-iteration traces into this directory.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Export the solution arc of every converged row with this many
        /// samples.
        #[arg(long)]
        polyline: Option<usize>,
        /// Replace a multi-point planar target set by the center of its
        /// smallest enclosing circle.
        #[arg(long)]
        chebyshev: bool,
    },
}

fn main() -> ExitCode {
    // Worker thread count; the default uses all cores.
    if let Ok(threads) = std::env::var("GUNLAY_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        } else {
            eprintln!("warning: GUNLAY_THREADS is not a number, ignoring");
        }
    }

    let cli = Cli::parse();
    match cli.command {
        Commands::Solve { scenario, out, trace, polyline, chebyshev } => {
            match run_solve(&scenario, out, trace, polyline, chebyshev) {
                Ok(code) => ExitCode::from(code as u8),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn run_solve(
    scenario_path: &PathBuf,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    polyline: Option<usize>,
    chebyshev: bool,
) -> Result<i32, String> {
    let loaded = load_scenario(scenario_path)?;
    for (name, _, dropped_z) in &loaded.targets {
        if *dropped_z {
            eprintln!("warning: target \"{name}\": planar task ignores the third coordinate");
        }
    }
    if let Some(n) = polyline {
        if n < 2 {
            return Err("polyline needs at least 2 samples".into());
        }
    }

    let rows = expand_rows(&loaded, chebyshev)?;
    let results = run_rows(&loaded, rows)?;

    for row in &results {
        eprintln!("{}", summary_line(row));
    }

    let csv = csv_document(&results, loaded.task);
    match &out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{csv}"),
    }

    if let Some(dir) = &trace {
        std::fs::create_dir_all(dir)
            .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        for row in &results {
            for (name, content) in trace_document(row) {
                std::fs::write(dir.join(&name), content)
                    .map_err(|e| format!("cannot write trace {name}: {e}"))?;
            }
        }
    }

    if let Some(n) = polyline {
        let dir = out
            .as_ref()
            .and_then(|p| p.parent().map(|d| d.to_path_buf()))
            .unwrap_or_else(|| PathBuf::from("."));
        for row in &results {
            if !row.converged() {
                eprintln!("warning: row {} not converged, skipping polyline", row.spec.index);
                continue;
            }
            let mut scenario = loaded.scenario.clone();
            scenario.cone = loaded.cones[row.spec.cone_index].1.clone();
            let doc = export_polyline(&scenario, row, n)?;
            let path = dir.join(format!("polyline_row{}.csv", row.spec.index));
            std::fs::write(&path, doc)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
    }

    Ok(exit_code(&results))
}
