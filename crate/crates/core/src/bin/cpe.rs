use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cpe_core::bench::{
    compute_lb_report, load_instance, run_experiment, write_lb_csv, Algorithm, ExperimentConfig, InstanceDoc,
};
use cpe_core::bench::instance::BallSpec;
use cpe_core::hard::{disj_paths_instance, disj_sets_instance, nw_design, or_instance};
use cpe_core::run::DEFAULT_PULL_CAP;
use cpe_core::Result;

#[derive(Parser)]
#[command(name = "cpe", version, about = "Combinatorial pure-exploration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower-bound rows (Low, H_C, gap, ratio) as CSV, one per instance file.
    Lb { files: Vec<PathBuf> },
    /// Seeded trial batch; writes one CSV row per trial.
    Run {
        file: PathBuf,
        /// naive, efficient, lpsample, uniform, ball, or wrapped-<naive|efficient|lpsample|uniform>
        #[arg(long)]
        alg: String,
        #[arg(long, default_value_t = 0.005)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PULL_CAP)]
        pull_cap: u64,
        /// Write 0 in the wall_ms column so reruns are byte-identical.
        #[arg(long)]
        no_wall: bool,
    },
    /// Emit an instance document on stdout.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Two disjoint k-sets, means eps on the first.
    DisjSets {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        /// Encode the family as two parallel s-t paths.
        #[arg(long)]
        paths: bool,
    },
    /// One arm at `gap` (or none) among n zero arms.
    Or {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gap: f64,
        #[arg(long)]
        special: Option<usize>,
    },
    /// Design family as an explicit Best-Set instance, means eps on the first set.
    Nw {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Ball-case instance centred at zero; `--spike` puts mass r on one arm.
    Ball {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long)]
        spike: Option<usize>,
    },
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn generate(kind: &GenKind) -> Result<InstanceDoc> {
    match *kind {
        GenKind::DisjSets { k, eps, paths } => {
            let inst = if paths { disj_paths_instance(k, eps)? } else { disj_sets_instance(k, eps)? };
            InstanceDoc::from_best_set(&inst)
        }
        GenKind::Or { n, gap, special } => Ok(InstanceDoc::from_general(&or_instance(n, gap, special)?)),
        GenKind::Nw { n, m, seed, eps } => {
            let d = nw_design(n, m, seed)?;
            let mut means = vec![0.0; n];
            for &i in &d.sets[0] {
                means[i] = eps;
            }
            Ok(InstanceDoc::explicit(means, d.sets))
        }
        GenKind::Ball { n, r, spike } => {
            let mut means = vec![0.0; n];
            if let Some(i) = spike {
                *means.get_mut(i).ok_or(cpe_core::Error::IndexOutOfRange { index: i, n })? = r;
            }
            let doc = InstanceDoc {
                means,
                family: None,
                regions: None,
                ball: Some(BallSpec { u: vec![0.0; n], r, c1: None, c2: None }),
            };
            doc.build()?;
            Ok(doc)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Lb { files } => {
            let rows = files.iter().map(|f| compute_lb_report(&load_instance(f)?)).collect::<Result<Vec<_>>>()?;
            write_lb_csv(&rows, io::stdout().lock())
        }
        Command::Run { file, alg, delta, trials, seed, out, pull_cap, no_wall } => {
            let algorithm: Algorithm = alg.parse()?;
            let mut cfg = ExperimentConfig::new(load_instance(&file)?, algorithm, delta, trials, seed);
            cfg.pull_cap = pull_cap;
            let report = run_experiment(&cfg)?;
            report.write_csv(sink(&out)?, !no_wall)?;
            eprintln!("{}", report.summary());
            Ok(())
        }
        Command::Gen { kind, out } => {
            let doc = generate(&kind)?;
            let mut w = sink(&out)?;
            writeln!(w, "{}", doc.to_json())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
