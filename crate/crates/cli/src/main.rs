//! `rewb`: command-line front end for the resilient estimation simulator.
//!
//! Exit codes: 0 success, 2 invalid input or failed validation, 3 the run
//! diverged, 4 I/O failure.

mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rewb_core::config::ConfigFile;
use rewb_core::graph::{balance_weights, default_max_iter, generate_random_digraph, normalize_max};
use rewb_core::protocol::{validate_params, Severity};
use rewb_core::{engine, Digraph, Error};

#[derive(Parser)]
#[command(
    name = "rewb",
    version,
    about = "Resilient distributed estimation over weight-balanced digraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a strongly connected G(n, p) digraph and write it as JSON.
    GenGraph {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output graph file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Balance node weights on a graph; writes weights.json and residuals.csv.
    Balance {
        /// Graph JSON file.
        #[arg(long)]
        graph: PathBuf,
        /// Stop once one balancing step moves no weight by more than this.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Iteration cap; defaults to 10 * n * diameter.
        #[arg(long)]
        max_iter: Option<usize>,
        /// Initial weight of every node.
        #[arg(long, default_value_t = 0.1)]
        initial_weight: f64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check a configuration against the protocol's parameter constraints.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Run one experiment; writes the results CSV, summary JSON and optional SVG.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory; the config's output paths are relative to it.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run two configurations and write them side by side.
    Compare {
        /// Second configuration (the first is --config).
        #[arg(long = "against")]
        against: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Flags shared by the config-driven commands. Each one overrides the file.
#[derive(Args, Clone, Default)]
struct Common {
    /// Config JSON; every field defaults to the reference setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed. Also replaces any explicit graph or attack seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Treat the sufficient parameter conditions as errors.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
}

impl Common {
    fn load(&self, path: Option<&Path>) -> Result<(ConfigFile, PathBuf), Error> {
        let (mut cfg, base) = match path {
            Some(p) => (
                ConfigFile::load(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (ConfigFile::default(), PathBuf::from(".")),
        };
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
            cfg.graph.seed = None;
            cfg.attack.seed = None;
        }
        if self.strict {
            cfg.run.strict = true;
        }
        if let Some(s) = self.stride {
            cfg.run.stride = s;
        }
        if let Some(h) = self.horizon {
            cfg.run.horizon = h;
        }
        Ok((cfg, base))
    }

    fn experiment(
        &self,
        path: Option<&Path>,
    ) -> Result<(ConfigFile, rewb_core::Experiment), Error> {
        let (cfg, base) = self.load(path)?;
        let mut exp = cfg.resolve(&base)?;
        exp.workers = capped_workers(exp.workers);
        Ok((cfg, exp))
    }
}

/// `REWB_THREADS` caps the worker count. Results never depend on it.
fn capped_workers(requested: usize) -> usize {
    let cap = std::env::var("REWB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0);
    match cap {
        Some(c) => requested.min(c).max(1),
        None => requested.max(1),
    }
}

enum Failure {
    Core(Error),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Core(e) if e.is_divergence() => 3,
            Failure::Core(Error::Io { .. }) => 4,
            Failure::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Validation(m) => write!(f, "{m}"),
        }
    }
}

fn gen_graph(n: usize, p: f64, seed: u64, out: &Path) -> Result<(), Failure> {
    let g = generate_random_digraph(n, p, seed)?;
    output::write_atomic(out, format!("{}\n", g.to_json()).as_bytes())?;
    println!(
        "wrote {} ({} vertices, {} edges)",
        out.display(),
        g.n(),
        g.edge_count()
    );
    Ok(())
}

fn balance(
    graph: &Path,
    tol: f64,
    max_iter: Option<usize>,
    w0: f64,
    out: &Path,
) -> Result<(), Failure> {
    let (g, _) = Digraph::load(graph)?;
    let max_iter = match max_iter {
        Some(m) => m,
        None => default_max_iter(&g)?,
    };
    let b = balance_weights(&g, &vec![w0; g.n()], tol, max_iter)?;
    let normalized = normalize_max(&b.weights);
    let doc = json!({
        "graph_hash": g.fingerprint(),
        "iterations": b.iterations,
        "tolerance": tol,
        "final_residual": b.residual_history.last(),
        "weights": normalized,
        "raw_weights": b.weights,
    });
    output::write_atomic(
        &out.join("weights.json"),
        format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).map_err(Error::from)?
        )
        .as_bytes(),
    )?;
    let mut csv = format!(
        "# rewb-balance-v1 graph={}\niteration,residual\n",
        g.fingerprint()
    );
    for (t, r) in b.residual_history.iter().enumerate() {
        csv.push_str(&format!("{t},{r:.16e}\n"));
    }
    output::write_atomic(&out.join("residuals.csv"), csv.as_bytes())?;
    println!(
        "balanced in {} iterations; normalized weights:",
        b.iterations
    );
    for (i, w) in normalized.iter().enumerate() {
        println!("  {i}: {w:.12}");
    }
    Ok(())
}

fn validate(common: &Common) -> Result<(), Failure> {
    let (_, exp) = common.experiment(common.config.as_deref())?;
    let w0 = exp.params.initial_weights(exp.graph.n());
    let report = validate_params(&exp.params, &exp.graph, &w0, exp.strict)?;
    if let Some(v) = report.psi {
        println!("psi                  = {v:e}");
    }
    if let Some(v) = report.diameter {
        println!("diameter             = {v}");
    }
    if let Some(v) = report.initial_weight_bound {
        println!("initial weight bound = {v:e}");
    }
    if let Some(v) = report.mu0_bound {
        println!("mu0 bound            = {v:e}");
    }
    if let Some(s) = &report.spectral {
        println!("lambda_m             = {:e}", s.lambda2_sym);
        println!("lambda_M             = {:e}", s.lambda_max_gram);
        println!("||J - beta0 L||      = {:.12}", s.contraction_norm);
    }
    for v in exp.trajectory.validate(exp.horizon).iter().take(5) {
        println!("warning[trajectory]: {v:?}");
    }
    for d in &report.diagnostics {
        println!("{d}");
    }
    let errors = report
        .diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count();
    if errors > 0 {
        return Err(Failure::Validation(format!("{errors} validation error(s)")));
    }
    println!("ok");
    Ok(())
}

fn run(common: &Common, out: &Path) -> Result<(), Failure> {
    let (cfg, exp) = common.experiment(common.config.as_deref())?;
    let record = engine::run(&exp)?;
    let outputs = &cfg.run.outputs;
    output::write_atomic(&out.join(&outputs.csv), record.to_csv_string().as_bytes())?;
    output::write_atomic(
        &out.join(&outputs.summary),
        format!("{}\n", record.summary_json()?).as_bytes(),
    )?;
    if let Some(path) = &outputs.svg {
        output::write_atomic(
            &out.join(path),
            svg::error_bound_chart(&record.rows).as_bytes(),
        )?;
    }
    let s = &record.summary;
    println!("config {}", s.config_hash);
    println!(
        "final error {:.6e} (initial {:.6e})",
        s.final_error, s.initial_error
    );
    println!("final bound {:.6e}", s.final_bound);
    println!("envelope violations {}", s.envelope_violations);
    println!("wall time {:.2}s", s.wall_time_secs);
    Ok(())
}

fn compare(common: &Common, against: &Path, out: &Path) -> Result<(), Failure> {
    let (_, a) = common.experiment(common.config.as_deref())?;
    let (_, b) = common.experiment(Some(against))?;
    let cmp = engine::compare(&a, &b)?;
    let mut buf = Vec::new();
    cmp.write_csv(&mut buf)
        .map_err(|e| Error::io(out.join("compare.csv"), e))?;
    output::write_atomic(&out.join("compare.csv"), &buf)?;
    let doc = json!({
        "final_error_ratio": cmp.final_error_ratio,
        "final_disagreement_ratio": cmp.final_disagreement_ratio,
        "a": cmp.a.summary,
        "b": cmp.b.summary,
    });
    output::write_atomic(
        &out.join("compare.json"),
        format!(
            "{}\n",
            serde_json::to_string_pretty(&doc).map_err(Error::from)?
        )
        .as_bytes(),
    )?;
    println!(
        "final error ratio (b/a)        {:.6e}",
        cmp.final_error_ratio
    );
    println!(
        "final disagreement ratio (b/a) {:.6e}",
        cmp.final_disagreement_ratio
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenGraph { n, p, seed, out } => gen_graph(*n, *p, *seed, out),
        Command::Balance {
            graph,
            tol,
            max_iter,
            initial_weight,
            out,
        } => balance(graph, *tol, *max_iter, *initial_weight, out),
        Command::Validate { common } => validate(common),
        Command::Run { common, out } => run(common, out),
        Command::Compare {
            against,
            common,
            out,
        } => compare(common, against, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
