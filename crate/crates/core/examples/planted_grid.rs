//! Generates a synthetic course, evaluates the passive cohort's full
//! lead/lag grid and prints the test-AUC matrix.
//!
//! ```text
//! cargo run --release --example planted_grid -- [synth.key=value ...] [shuffle]
//! ```
//!
//! Keys are the `synth.*` settings of the run config; `seed=N` sets the seed.

use std::path::Path;
use std::time::Instant;

use stopout::cohort::{Cohort, CohortTable};
use stopout::config::{ProblemFilter, RunConfig};
use stopout::eval::{run_grid, GridConfig, Metric};
use stopout::event_store::ingest;
use stopout::features::build_feature_matrix;
use stopout::logistic::LogisticRegression;
use stopout::synth::{generate, SynthConfig};


fn main() -> stopout::Result<()> {
    let mut run = RunConfig::default();
    run.synth.num_learners = 5_000;
    let mut shuffle = false;
    for arg in std::env::args().skip(1) {
        if arg == "shuffle" {
            shuffle = true;
        } else if let Some((k, v)) = arg.split_once('=') {
            run.set(k, v, Path::new("."))?;
        }
    }
    let seed = run.seed.unwrap_or(1);
    let cfg = SynthConfig { seed, ..run.synth };

    let t = Instant::now();
    let out = generate(&cfg)?;
    let dir = std::env::temp_dir().join(format!("planted_grid_{seed}"));
    out.write(&dir)?;
    let dataset = ingest(&[dir.join("events.tsv")], &dir.join("calendar.tsv"))?;
    let report = build_feature_matrix(&dataset);
    let cohorts = CohortTable::build(&dataset, &report);
    eprintln!("prepared in {:.1?}; histogram {:?}", t.elapsed(), report.histogram);

    let t = Instant::now();
    let grids = run_grid(
        &report.matrix,
        &cohorts,
        &[Cohort::PassiveCollaborator],
        cfg.num_weeks,
        &LogisticRegression::default(),
        &GridConfig {
            seed,
            shuffle_labels: shuffle,
            ..GridConfig::default()
        },
        &ProblemFilter::default(),
    );
    eprintln!("grid in {:.1?}", t.elapsed());
    let values = stopout::eval::heatmap::value_matrix(&grids[0], Metric::Test);
    for (i, row) in values.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .map(|v| v.map_or("  -  ".to_string(), |a| format!("{a:.3}")))
            .collect();
        println!("lag {:>2}: {}", i + 1, cells.join(" "));
    }
    for c in grids[0].cells.iter().filter(|c| c.spec.lead == 1) {
        eprintln!(
            "{}: rows {} train {} cv {:?} ridge {:?} {}",
            c.spec, c.n_rows, c.n_train, c.cv_mean_auc, c.ridge_used, c.note
        );
    }
    let diagonal: Vec<f64> = (0..values.len()).filter_map(|i| values[i][i]).collect();
    println!(
        "lead-1 mean {:.4}",
        diagonal.iter().sum::<f64>() / diagonal.len().max(1) as f64
    );
    // Least-squares trend of AUC against lag for each predicted week.
    for week in 8..=cfg.num_weeks {
        let pts: Vec<(f64, f64)> = (1..week)
            .filter_map(|lag| values[lag as usize - 1][week as usize - 2].map(|a| (lag as f64, a)))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let span = pts.last().unwrap().0 - pts[0].0;
        println!("week {week}: fitted change over lags {:+.4}", sxy / sxx * span);
    }
    let all: Vec<f64> = values.iter().flatten().flatten().copied().collect();
    println!("grid mean {:.4}", all.iter().sum::<f64>() / all.len() as f64);
    Ok(())
}
