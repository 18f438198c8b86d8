//! The six subcommands.

mod basin;
mod cantor;
mod decay;
mod distortion;
mod pesin;
mod validate;

use pesinlab_core::measures::dist_from_integrals;
use pesinlab_core::numeric::{kick, unit_f64};
use pesinlab_core::{Measure, ObservableFamily};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::LabConfig;
use crate::report::ExperimentReport;
use crate::{LabError, RunOptions};

pub use decay::{weighted_log_fit, LogFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    CantorReport,
    PesinCheck,
    BasinScan,
    DecayRate,
    Distortion,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Validate,
        Command::CantorReport,
        Command::PesinCheck,
        Command::BasinScan,
        Command::DecayRate,
        Command::Distortion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::CantorReport => "cantor-report",
            Command::PesinCheck => "pesin-check",
            Command::BasinScan => "basin-scan",
            Command::DecayRate => "decay-rate",
            Command::Distortion => "distortion",
        }
    }
}

pub fn run_command(cmd: Command, cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    cfg.check()?;
    match cmd {
        Command::Validate => validate::run(cfg, opts),
        Command::CantorReport => cantor::run(cfg, opts),
        Command::PesinCheck => pesin::run(cfg, opts),
        Command::BasinScan => basin::run(cfg, opts),
        Command::DecayRate => decay::run(cfg, opts),
        Command::Distortion => distortion::run(cfg, opts),
    }
}

// Stream layout: sample points use streams from 0, measure construction
// and auxiliary draws sit far above any sample count.
const MEASURE_STREAMS: u64 = 1 << 48;
const AUX_STREAMS: u64 = 1 << 49;

/// Config echo for reports. Worker count and output location are left out
/// so that outputs do not depend on them.
fn echo(cfg: &LabConfig, seed: u64, resolved: Value) -> Value {
    json!({
        "map": cfg.map,
        "torus": cfg.torus,
        "measures": cfg.measures,
        "experiment": cfg.experiment,
        "seed": seed,
        "resolved": resolved,
    })
}

fn positive(name: &str, v: usize) -> Result<usize, LabError> {
    if v == 0 {
        return Err(LabError::Config(format!("experiment.{name} must be positive")));
    }
    Ok(v)
}

fn jitter_of(cfg: &LabConfig) -> Result<f64, LabError> {
    let j = cfg.experiment.jitter.unwrap_or(crate::setup::DEFAULT_JITTER);
    if !(0.0..0.5).contains(&j) {
        return Err(LabError::Config("experiment.jitter must be in [0, 0.5)".into()));
    }
    Ok(j)
}

fn family_of<'a>(cfg: &LabConfig, map: &'a pesinlab_core::SystemMap) -> Result<ObservableFamily<'a>, LabError> {
    let n = cfg.experiment.n_terms.unwrap_or(pesinlab_core::measures::DEFAULT_N_TERMS);
    if !(2..=60).contains(&n) {
        return Err(LabError::Config("experiment.n_terms must be in 2..=60".into()));
    }
    Ok(ObservableFamily::with_terms(map, n))
}

/// Family integrals of a candidate measure and the summed integration error.
fn candidate_integrals(fam: &ObservableFamily<'_>, m: &Measure) -> Result<(Vec<f64>, f64), LabError> {
    let ints = fam.integrals(m)?;
    let values = ints.iter().map(|i| i.value).collect();
    let errs: Vec<f64> = ints.iter().map(|i| i.error_bound).collect();
    let zeros = vec![0.0; errs.len()];
    Ok((values, dist_from_integrals(&errs, &zeros)))
}

/// Follow a pseudo-orbit from a uniform random start and return
/// `dist*(σ_t(x), ν_j)` for every scheduled time `t` (ascending) and every
/// target `j`, time-major.
fn orbit_distances(
    fam: &ObservableFamily<'_>,
    targets: &[Vec<f64>],
    times: &[usize],
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let map = fam.map;
    let dim = map.dim();
    let mut p = [0.0f64; 2];
    for c in p.iter_mut().take(dim) {
        *c = 2.0 * unit_f64(rng) - 1.0;
    }
    let mut sums = vec![0.0; fam.n_terms];
    let mut avg = vec![0.0; fam.n_terms];
    let mut scratch = vec![0.0; fam.scratch_len()];
    let mut out = Vec::with_capacity(times.len() * targets.len());
    let t_max = times.last().copied().unwrap_or(0);
    let mut next = 0;
    for t in 1..=t_max {
        let mut q = p;
        let (ld, _) = map.step(&mut q[..dim]);
        fam.accumulate_with_log_det(&p[..dim], ld, 1.0, &mut scratch, &mut sums);
        p = q;
        kick(&mut p[..dim], jitter, rng);
        while next < times.len() && times[next] == t {
            let inv = 1.0 / t as f64;
            for (a, s) in avg.iter_mut().zip(&sums) {
                *a = s * inv;
            }
            out.extend(targets.iter().map(|tg| dist_from_integrals(&avg, tg)));
            next += 1;
        }
    }
    out
}

fn sorted_times(name: &str, mut v: Vec<usize>) -> Result<Vec<usize>, LabError> {
    if v.is_empty() || v.contains(&0) {
        return Err(LabError::Config(format!("experiment.{name} must be a nonempty list of positive integers")));
    }
    v.sort_unstable();
    v.dedup();
    Ok(v)
}
