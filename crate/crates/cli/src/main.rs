use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stopout::cohort::Cohort;
use stopout::config::RunConfig;
use stopout::eval::{CellStatus, EvaluationGrid};
use stopout::pipeline::{self, Outputs};
use stopout::{Error, Result};

/// Weekly stopout prediction pipeline. Every stage reads the previous
/// stages' artifacts from the output directory.
#[derive(Debug, Parser)]
#[command(name = "stopout", version)]
struct Cli {
    /// Print a config file holding every default and exit.
    #[arg(long)]
    defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse event files and the calendar into the dataset tables.
    Ingest(Common),
    /// Compute weekly feature vectors and stopout weeks.
    Featurize(Common),
    /// Assign learners to collaboration cohorts.
    Cohorts(Common),
    /// Write the flattened design matrix of each selected problem.
    Build(Common),
    /// Train and evaluate every selected (cohort, lag, lead) cell.
    TrainEval(Common),
    /// Render AUC matrices and SVG heatmaps from the evaluated grid.
    Heatmap(Common),
    /// Rank features by stability selection per cohort.
    Importance(Common),
    /// Generate a synthetic course with a planted stopout mechanism.
    Synth(Common),
    /// Run ingest through importance and write the manifest.
    RunAll(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Worker threads for parallel stages.
    #[arg(long)]
    jobs: Option<usize>,

    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Problem filter such as `lead=1,lag=1|2;cohort=passive`; overrides the config.
    #[arg(long)]
    filter: Option<String>,

    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let cwd = PathBuf::from(".");
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set {kv:?}: expected key=value")))?;
            cfg.set(k.trim(), v, &cwd)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(f) = &self.filter {
            cfg.filter = f.parse()?;
        }
        if let Some(j) = self.jobs {
            cfg.jobs = Some(j);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize_grids(grids: &[EvaluationGrid]) {
    for g in grids {
        let mut counts = [0usize; 3];
        for c in &g.cells {
            counts[c.status as usize] += 1;
        }
        println!(
            "{}: {} cells ({} ok, {} insufficient_data, {} degenerate_labels)",
            g.cohort,
            g.cells.len(),
            counts[0],
            counts[1],
            counts[2]
        );
    }
}

/// A filter that selects exactly one cell turns a non-ok outcome into an
/// error, so scripted single-problem runs can detect it.
fn check_single_cell(cfg: &RunConfig, grids: &[EvaluationGrid]) -> Result<()> {
    if cfg.filter.is_empty() {
        return Ok(());
    }
    let cells: Vec<_> = grids.iter().flat_map(|g| &g.cells).collect();
    let [c] = cells.as_slice() else {
        return Ok(());
    };
    let what = format!("{} {}", c.cohort, c.spec);
    match c.status {
        CellStatus::Ok => Ok(()),
        CellStatus::InsufficientData => Err(Error::InsufficientData(what)),
        CellStatus::DegenerateLabels => Err(Error::DegenerateLabels(what)),
    }
}

fn run(command: Command) -> Result<()> {
    let common = match &command {
        Command::Ingest(c)
        | Command::Featurize(c)
        | Command::Cohorts(c)
        | Command::Build(c)
        | Command::TrainEval(c)
        | Command::Heatmap(c)
        | Command::Importance(c)
        | Command::Synth(c)
        | Command::RunAll(c) => c,
    };
    let cfg = common.config()?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    }
    let mut out = Outputs::default();
    match command {
        Command::Ingest(_) => {
            let r = pipeline::ingest_stage(&cfg, &mut out)?;
            println!(
                "accepted {} of {} lines ({} observed, {} submissions, {} collaborations); \
                 skipped {} malformed and {} before course start",
                r.accepted(),
                r.lines,
                r.observed,
                r.submissions,
                r.collaborations,
                r.malformed,
                r.before_start
            );
        }
        Command::Featurize(_) => {
            let r = pipeline::featurize_stage(&cfg, &mut out)?;
            println!(
                "{} participating learners over {} weeks",
                r.matrix.learners.len(),
                r.matrix.num_weeks
            );
        }
        Command::Cohorts(_) => {
            let t = pipeline::cohorts_stage(&cfg, &mut out)?;
            let sizes = t.sizes();
            for c in Cohort::ALL {
                println!("{c}: {} learners", sizes[c.index()]);
            }
        }
        Command::Build(_) => {
            let n = pipeline::build_stage(&cfg, &mut out)?;
            println!("wrote {n} problem matrices");
        }
        Command::TrainEval(_) => {
            let grids = pipeline::train_eval_stage(&cfg, &mut out)?;
            summarize_grids(&grids);
            check_single_cell(&cfg, &grids)?;
        }
        Command::Heatmap(_) => {
            pipeline::heatmap_stage(&cfg, &mut out)?;
        }
        Command::Importance(_) => {
            let r = pipeline::importance_stage(&cfg, &mut out)?;
            for c in &r.cohorts {
                let top: Vec<String> = c.ranking().iter().take(3).map(|(f, v)| format!("{f} {v:.2}")).collect();
                if c.status == CellStatus::Ok {
                    println!("{}: {}", c.cohort, top.join(", "));
                } else {
                    println!("{}: {}", c.cohort, c.status);
                }
            }
        }
        Command::Synth(_) => {
            let s = pipeline::synth_stage(&cfg, &mut out)?;
            println!("generated {} learners", s.ground_truth.len());
        }
        Command::RunAll(_) => {
            let summary = pipeline::run_all(&cfg)?;
            summarize_grids(&summary.grids);
            out.files = summary.files.clone();
            check_single_cell(&cfg, &summary.grids)?;
        }
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.defaults {
        print!("{}", RunConfig::defaults_text());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no subcommand given; see --help");
        return ExitCode::from(2);
    };
    match run(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
