use serde_json::json;

use super::basin::select;
use super::pesin::{pesin_options, pesin_report};
use super::{candidate_integrals, echo, family_of, jitter_of, orbit_distances, positive, sorted_times, AUX_STREAMS, MEASURE_STREAMS};
use crate::config::{LabConfig, MeasureSpec};
use crate::parallel::run_parallel;
use crate::report::{wilson_interval, Cell, ExperimentReport, Table};
use crate::setup::{build_measures, build_system};
use crate::{LabError, RunOptions};

/// Rows with fewer hits are censored from the fit.
pub const MIN_HITS: u64 = 10;

/// Weighted least-squares line through `(x, ln p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows: usize,
}

/// Fit `ln p = a + b x` with weights `w` (inverse variances).
/// Needs at least two distinct abscissae.
pub fn weighted_log_fit(x: &[f64], p: &[f64], w: &[f64]) -> Option<LogFit> {
    let n = x.len();
    if n < 2 || p.len() != n || w.len() != n {
        return None;
    }
    let y: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).zip(w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    if sxx.is_nan() || sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().zip(w).map(|(c, b)| b * (c - my) * (c - my)).sum();
    let ss_res: f64 = x.iter().zip(&y).zip(w).map(|((a, c), b)| b * (c - intercept - slope * a).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LogFit { slope, intercept, r_squared, rows: n })
}

/// Fit over the rows with at least [`MIN_HITS`] hits, weighting each row
/// by `hits / (1 − p̂)`, the inverse of the delta-method variance of `ln p̂`.
fn fit_rows(ns: &[usize], hits: &[u64], m: usize) -> Option<LogFit> {
    let mut x = Vec::new();
    let mut p = Vec::new();
    let mut w = Vec::new();
    for (n, h) in ns.iter().zip(hits) {
        if *h >= MIN_HITS {
            let ph = *h as f64 / m as f64;
            x.push(*n as f64);
            p.push(ph);
            w.push(*h as f64 / (1.0 - ph).max(1.0 / m as f64));
        }
    }
    weighted_log_fit(&x, &p, &w)
}

fn target_spec(cfg: &LabConfig, name: Option<&String>, fallback: &str) -> Result<MeasureSpec, LabError> {
    match name {
        Some(n) => {
            let mut specs = cfg.measures.clone();
            if specs.iter().all(|s| s.display_name() != *n) && (n == "lebesgue" || n == "dirac") {
                specs.push(MeasureSpec::kind(n));
            }
            Ok(select(&specs, std::slice::from_ref(n))?.remove(0))
        }
        None => Ok(MeasureSpec::kind(fallback)),
    }
}

pub fn run(cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    let sys = build_system(cfg)?;
    let e = &cfg.experiment;
    let m_points = positive("n_points", e.n_points.unwrap_or(1_000_000))?;
    let ns = sorted_times("n_schedule", e.n_schedule.clone().unwrap_or_else(|| (4..=20).step_by(2).collect()))?;
    if ns.len() > 32 {
        return Err(LabError::Config("experiment.n_schedule holds at most 32 entries".into()));
    }
    let eps = e.epsilon_star.unwrap_or(0.05);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LabError::Config("experiment.epsilon_star must be positive".into()));
    }
    let jitter = jitter_of(cfg)?;
    // default target: the point mass at a fixed point; default control: Lebesgue
    let specs = [target_spec(cfg, e.target.as_ref(), "dirac")?, target_spec(cfg, e.control.as_ref(), "lebesgue")?];
    let built = build_measures(&sys, &specs, opts.seed, MEASURE_STREAMS)?;
    let fam = family_of(cfg, &sys.map)?;
    let mut targets = Vec::new();
    let mut int_err = Vec::new();
    for (_, m) in &built {
        let (v, err) = candidate_integrals(&fam, m)?;
        targets.push(v);
        int_err.push(err);
    }

    let popts = pesin_options(cfg)?;
    let pr = pesin_report(&sys, &built[0].1, &popts, opts, AUX_STREAMS)?;
    let r = pr.defect;

    let masks = run_parallel(m_points, opts.seed, 0, opts.workers, |_, rng| {
        let d = orbit_distances(&fam, &targets, &ns, jitter, rng);
        let mut mask = 0u64;
        for (i, pair) in d.chunks_exact(2).enumerate() {
            if pair[0] < eps {
                mask |= 1 << i;
            }
            if pair[1] < eps {
                mask |= 1 << (32 + i);
            }
        }
        mask
    })?;
    let count = |bit: usize| masks.iter().filter(|m| *m & (1u64 << bit) != 0).count() as u64;
    let hits: Vec<u64> = (0..ns.len()).map(count).collect();
    let control_hits: Vec<u64> = (0..ns.len()).map(|i| count(32 + i)).collect();

    let mut rep = ExperimentReport::new(
        "decay-rate",
        opts.seed,
        echo(
            cfg,
            opts.seed,
            json!({
                "n_points": m_points,
                "n_schedule": ns,
                "epsilon_star": eps,
                "jitter": jitter,
                "n_terms": fam.n_terms,
                "target": built[0].0,
                "control": built[1].0,
                "min_hits": MIN_HITS,
            }),
        ),
    );
    let mf = m_points as f64;
    let mut main = Table::new(
        "fractions",
        &["n", "hits", "fraction", "ci_lo", "ci_hi", "censored", "control_hits", "control_fraction"],
    );
    for (i, n) in ns.iter().enumerate() {
        let (lo, hi) = wilson_interval(hits[i], m_points as u64);
        let censored = hits[i] < MIN_HITS;
        if censored {
            rep.warn(format!("n = {n}: {} hits, below {MIN_HITS}; row censored from the fit", hits[i]));
        }
        main.push(vec![
            (*n).into(),
            hits[i].into(),
            (hits[i] as f64 / mf).into(),
            lo.into(),
            hi.into(),
            censored.into(),
            control_hits[i].into(),
            (control_hits[i] as f64 / mf).into(),
        ]);
    }
    let strictly_decreasing = hits.windows(2).all(|w| w[1] < w[0]);
    let control_fit = fit_rows(&ns, &control_hits, m_points);
    let control_non_decaying = control_hits.last() >= control_hits.first();
    let fit = fit_rows(&ns, &hits, m_points);
    let ceiling = r / 2.0;
    let mut fit_table = Table::new(
        "fit",
        &[
            "target",
            "epsilon_star",
            "rate",
            "intercept",
            "r_squared",
            "rows_used",
            "r",
            "ceiling",
            "ratio",
            "ratio_in_range",
            "strictly_decreasing",
            "control",
            "control_rate",
            "control_non_decaying",
            "target_integration_error",
        ],
    );
    let (rate, intercept, r2, rows) = match fit {
        Some(f) => (Cell::Float(-f.slope), Cell::Float(f.intercept), Cell::Float(f.r_squared), f.rows),
        None => (Cell::Null, Cell::Null, Cell::Null, 0),
    };
    let ratio = match (&rate, ceiling > 0.0) {
        (Cell::Float(v), true) => Some(v / ceiling),
        _ => None,
    };
    if let Some(q) = ratio {
        if q > 1.0 {
            rep.warn(format!("fitted rate exceeds the ceiling r/2 by a factor {q:?}; the bound is one-sided"));
        }
    }
    if r.is_nan() || r <= 0.0 {
        rep.warn(format!("target defect r = {r:?} is not positive; no decay is predicted"));
    }
    fit_table.push(vec![
        built[0].0.clone().into(),
        eps.into(),
        rate,
        intercept,
        r2,
        rows.into(),
        r.into(),
        ceiling.into(),
        ratio.into(),
        ratio.map(|q| q > 0.0 && q <= 1.5).into(),
        strictly_decreasing.into(),
        built[1].0.clone().into(),
        control_fit.map(|f| -f.slope).into(),
        control_non_decaying.into(),
        int_err[0].into(),
    ]);
    rep.tables.push(main);
    rep.tables.push(fit_table);
    if fit.is_none() {
        let msg = "fewer than two rows reach the minimum hit count; fit skipped".to_string();
        rep.warn(msg.clone());
        rep.infeasible = Some(msg);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_is_recovered() {
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let p: Vec<f64> = x.iter().map(|v| 0.3 * (-0.7 * v).exp()).collect();
        let f = weighted_log_fit(&x, &p, &[1.0; 8]).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-12);
        assert!((f.intercept - 0.3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(weighted_log_fit(&[1.0], &[0.5], &[1.0]).is_none());
    }
}
