use serde_json::json;

use super::{candidate_integrals, echo, family_of, jitter_of, orbit_distances, positive, sorted_times, MEASURE_STREAMS};
use crate::config::{LabConfig, MeasureSpec};
use crate::parallel::run_parallel;
use crate::report::{wilson_interval, ExperimentReport, Table};
use crate::setup::{build_measures, build_system, measure_specs};
use crate::{LabError, RunOptions};

/// Measures named in `names`, looked up among the configured (or default)
/// measure specs.
pub(crate) fn select(specs: &[MeasureSpec], names: &[String]) -> Result<Vec<MeasureSpec>, LabError> {
    names
        .iter()
        .map(|n| {
            specs
                .iter()
                .find(|s| s.display_name() == *n)
                .cloned()
                .ok_or_else(|| LabError::Config(format!("unknown measure {n:?}")))
        })
        .collect()
}

pub fn run(cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    let sys = build_system(cfg)?;
    let e = &cfg.experiment;
    let m_points = positive("n_points", e.n_points.unwrap_or(10_000))?;
    let times = sorted_times("times", e.times.clone().unwrap_or_else(|| vec![100, 1000, 10_000]))?;
    let mut eps = e.epsilons.clone().unwrap_or_else(|| vec![0.01, 0.05, 0.1]);
    if eps.is_empty() || eps.iter().any(|x| *x <= 0.0 || !x.is_finite()) {
        return Err(LabError::Config("experiment.epsilons must be a nonempty list of positive numbers".into()));
    }
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let jitter = jitter_of(cfg)?;
    let specs = measure_specs(cfg, &sys);
    let specs = match &e.candidates {
        Some(names) => select(&specs, names)?,
        None => specs,
    };
    if specs.is_empty() {
        return Err(LabError::Config("basin-scan needs at least one candidate measure".into()));
    }
    let candidates = build_measures(&sys, &specs, opts.seed, MEASURE_STREAMS)?;
    let fam = family_of(cfg, &sys.map)?;
    let mut targets = Vec::new();
    let mut cand_table = Table::new("candidates", &["candidate", "integration_error", "tail_bound"]);
    for (name, m) in &candidates {
        let (v, err) = candidate_integrals(&fam, m)?;
        cand_table.push(vec![name.clone().into(), err.into(), fam.tail_bound().into()]);
        targets.push(v);
    }

    let dists = run_parallel(m_points, opts.seed, 0, opts.workers, |_, rng| {
        orbit_distances(&fam, &targets, &times, jitter, rng)
    })?;

    let mut rep = ExperimentReport::new(
        "basin-scan",
        opts.seed,
        echo(
            cfg,
            opts.seed,
            json!({
                "n_points": m_points,
                "times": times,
                "epsilons": eps,
                "jitter": jitter,
                "n_terms": fam.n_terms,
                "candidates": candidates.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            }),
        ),
    );
    rep.warn("fractions are finite-time proxies for the asymptotic basins; read them as trends across n");
    rep.warn(format!("orbits are pseudo-orbits with kicks of size {jitter:?}"));
    let mut main = Table::new("fractions", &["n", "epsilon", "candidate", "hits", "fraction", "ci_lo", "ci_hi"]);
    let mut summary = Table::new("distances", &["n", "candidate", "median", "mean", "min", "max"]);
    let n_c = candidates.len();
    for (ti, t) in times.iter().enumerate() {
        for (ci, (name, _)) in candidates.iter().enumerate() {
            let col = ti * n_c + ci;
            let mut d: Vec<f64> = dists.iter().map(|row| row[col]).collect();
            for &ep in &eps {
                let hits = d.iter().filter(|x| **x < ep).count() as u64;
                let (lo, hi) = wilson_interval(hits, m_points as u64);
                main.push(vec![
                    (*t).into(),
                    ep.into(),
                    name.clone().into(),
                    hits.into(),
                    (hits as f64 / m_points as f64).into(),
                    lo.into(),
                    hi.into(),
                ]);
            }
            d.sort_by(f64::total_cmp);
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            summary.push(vec![
                (*t).into(),
                name.clone().into(),
                d[d.len() / 2].into(),
                mean.into(),
                d[0].into(),
                d[d.len() - 1].into(),
            ]);
        }
    }
    rep.tables.push(main);
    rep.tables.push(summary);
    rep.tables.push(cand_table);
    Ok(rep)
}
