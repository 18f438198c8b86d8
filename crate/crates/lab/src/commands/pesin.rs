use pesinlab_core::entropy::{lyapunov_integral, orbit_statistics, pesin_defect, pesin_from_orbits, OrbitStats, PesinOptions, PesinReport};
use pesinlab_core::numeric::unit_f64;
use pesinlab_core::{BuiltSystem, Measure};
use serde_json::json;

use super::{echo, jitter_of, positive, AUX_STREAMS, MEASURE_STREAMS};
use crate::config::LabConfig;
use crate::parallel::{run_parallel, sample_rng};
use crate::report::{ExperimentReport, Table};
use crate::setup::{build_measures, build_system, measure_specs};
use crate::{LabError, RunOptions};

fn lebesgue_like(m: &Measure) -> bool {
    match m {
        Measure::LebesgueUniform(_) => true,
        Measure::Product(a, b) => lebesgue_like(a) && lebesgue_like(b),
        _ => false,
    }
}

/// Pesin report for one measure. Lebesgue-type measures are sampled by
/// `n_orbits` pseudo-orbits, one stream each, merged in orbit order.
pub(crate) fn pesin_report(
    sys: &BuiltSystem,
    m: &Measure,
    opts: &PesinOptions,
    run: &RunOptions,
    stream: u64,
) -> Result<PesinReport, LabError> {
    if !lebesgue_like(m) {
        let mut rng = sample_rng(run.seed, stream, 0);
        return Ok(pesin_defect(sys, m, opts, &mut rng)?);
    }
    let dim = sys.map.dim();
    let per_orbit = run_parallel(opts.n_orbits, run.seed, stream, run.workers, |_, rng| {
        let x0 = [2.0 * unit_f64(rng) - 1.0, 2.0 * unit_f64(rng) - 1.0];
        orbit_statistics(&sys.map, &x0[..dim], opts.orbit_len, opts.n_max, opts.jitter, rng)
    })?;
    let mut total = OrbitStats::new(sys.map.alphabet(), opts.n_max)?;
    for s in per_orbit {
        total.merge(&s?);
    }
    let q = lyapunov_integral(&sys.map, m).ok().map(|i| i.value);
    Ok(pesin_from_orbits(&total, q))
}

pub(crate) fn pesin_options(cfg: &LabConfig) -> Result<PesinOptions, LabError> {
    let d = PesinOptions::default();
    let e = &cfg.experiment;
    let n_max = positive("n_max", e.n_max.unwrap_or(d.n_max))?;
    if n_max > 20 {
        return Err(LabError::Config("experiment.n_max must be at most 20".into()));
    }
    Ok(PesinOptions {
        n_max,
        orbit_len: positive("orbit_len", e.orbit_len.unwrap_or(d.orbit_len))?,
        n_orbits: positive("n_orbits", e.n_orbits.unwrap_or(d.n_orbits))?,
        jitter: jitter_of(cfg)?,
    })
}

pub fn run(cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    let sys = build_system(cfg)?;
    let popts = pesin_options(cfg)?;
    let specs = measure_specs(cfg, &sys);
    let measures = build_measures(&sys, &specs, opts.seed, MEASURE_STREAMS)?;
    let mut rep = ExperimentReport::new(
        "pesin-check",
        opts.seed,
        echo(
            cfg,
            opts.seed,
            json!({
                "n_max": popts.n_max,
                "orbit_len": popts.orbit_len,
                "n_orbits": popts.n_orbits,
                "jitter": popts.jitter,
                "measures": measures.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
            }),
        ),
    );
    rep.warn(
        "entropy is estimated from itinerary cylinders of the branch partition, which generates for expanding maps",
    );
    let mut main = Table::new(
        "pesin",
        &[
            "system",
            "measure",
            "method",
            "h_final",
            "h_increment",
            "lyap",
            "lyap_error",
            "defect",
            "pressure",
            "invariance_residual",
            "ruelle_ok",
        ],
    );
    let mut seq = Table::new("entropy", &["measure", "n", "h_n"]);
    for (i, (name, m)) in measures.iter().enumerate() {
        // each measure owns a block of streams
        let r = pesin_report(&sys, m, &popts, opts, AUX_STREAMS + ((i as u64) << 32))?;
        main.push(vec![
            sys.name().into(),
            name.clone().into(),
            r.method.name().into(),
            r.h_final.into(),
            r.h_increment.into(),
            r.lyap.into(),
            r.lyap_error.into(),
            r.defect.into(),
            r.pressure.into(),
            r.invariance_residual.into(),
            r.ruelle_ok.into(),
        ]);
        for (n, h) in r.h_sequence.iter().enumerate() {
            seq.push(vec![name.clone().into(), (n + 1).into(), (*h).into()]);
        }
        for w in &r.warnings {
            rep.warn(format!("{name}: {w}"));
        }
    }
    rep.tables.push(main);
    rep.tables.push(seq);
    Ok(rep)
}
