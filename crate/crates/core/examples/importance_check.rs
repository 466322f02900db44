//! Stability-selection ranking for the passive cohort of synthetic courses
//! over a range of seeds.
//!
//! ```text
//! cargo run --release --example importance_check -- [key=value ...]
//! ```
//!
//! Keys are run config settings (`synth.*`, `importance.*`, `importance.filter`)
//! plus `seeds=N`.

use std::path::Path;
use std::time::Instant;

use stopout::cohort::{Cohort, CohortTable};
use stopout::config::RunConfig;
use stopout::dataset::enumerate_problems;
use stopout::event_store::ingest;
use stopout::features::build_feature_matrix;
use stopout::importance::rank_features;
use stopout::synth::generate;

fn main() -> stopout::Result<()> {
    let mut run = RunConfig::default();
    run.synth.num_learners = 5_000;
    run.importance_filter = "lag=1,lead=1".parse()?;
    let mut seeds = 10;
    for arg in std::env::args().skip(1) {
        if let Some((k, v)) = arg.split_once('=') {
            if k == "seeds" {
                seeds = v.parse().expect("seeds");
            } else {
                run.set(k, v, Path::new("."))?;
            }
        }
    }
    let total = Instant::now();
    for seed in 1..=seeds {
        let t = Instant::now();
        let cfg = stopout::synth::SynthConfig { seed, ..run.synth.clone() };
        let out = generate(&cfg)?;
        let dir = std::env::temp_dir().join(format!("importance_check_{seed}"));
        out.write(&dir)?;
        let dataset = ingest(&[dir.join("events.tsv")], &dir.join("calendar.tsv"))?;
        let report = build_feature_matrix(&dataset);
        let cohorts = CohortTable::build(&dataset, &report);
        let cohort = Cohort::PassiveCollaborator;
        let problems: Vec<_> = enumerate_problems(cfg.num_weeks)
            .into_iter()
            .filter(|p| run.importance_filter.matches(*p, cohort))
            .collect();
        let imp = rank_features(&report.matrix, &cohorts, cohort, &problems, &run.importance, seed)?;
        let top: Vec<String> = imp
            .ranking()
            .iter()
            .take(6)
            .map(|(f, v)| format!("{f}:{v:.2}"))
            .collect();
        println!("seed {seed:>2} [{:.1?}] unconverged {} {}", t.elapsed(), imp.unconverged, top.join(" "));
    }
    println!("total {:.1?}", total.elapsed());
    Ok(())
}
