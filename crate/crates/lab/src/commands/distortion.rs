use pesinlab_core::cantor_skeleton::cantor_total_measure;
use pesinlab_core::entropy::{atom_mass_decay, distortion_ratio};
use pesinlab_core::map_builder::build_reference_affine;
use pesinlab_core::{BuiltSystem, Word};
use serde_json::json;

use super::echo;
use crate::config::LabConfig;
use crate::report::{Cell, ExperimentReport, Table};
use crate::setup::build_system;
use crate::{LabError, RunOptions};

fn rows(main: &mut Table, summary: &mut Table, sys: &BuiltSystem, gens: &[usize]) -> Result<(), LabError> {
    let n_top = *gens.last().expect("nonempty");
    for c in &sys.carriers {
        if n_top > c.skeleton.max_generation() {
            return Err(LabError::Config(format!(
                "generation {n_top} exceeds the resolution {} of carrier {}",
                c.skeleton.max_generation(),
                c.label
            )));
        }
        let masses = atom_mass_decay(sys, c, n_top)?;
        let mut first_past_2 = None;
        let mut max_ratio: f64 = 0.0;
        for &n in gens {
            let d = distortion_ratio(sys, c, &Word::new(0, n)?)?;
            if d.ratio > 2.0 && first_past_2.is_none() {
                first_past_2 = Some(n);
            }
            max_ratio = max_ratio.max(d.ratio);
            main.push(vec![
                sys.name().into(),
                c.label.clone().into(),
                n.into(),
                d.inf.into(),
                d.sup.into(),
                d.ratio.into(),
                masses[n - 1].into(),
            ]);
        }
        let limit = match c.skeleton.params() {
            Some(p) => Cell::Float(cantor_total_measure(p)?.value),
            None => Cell::Float(0.0),
        };
        summary.push(vec![
            sys.name().into(),
            c.label.clone().into(),
            max_ratio.into(),
            first_past_2.into(),
            masses[n_top - 1].into(),
            limit,
        ]);
    }
    Ok(())
}

pub fn run(cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    let sys = build_system(cfg)?;
    let mut gens = cfg.experiment.generations.clone().unwrap_or_else(|| (1..=12).collect());
    gens.sort_unstable();
    gens.dedup();
    if gens.is_empty() || gens[0] == 0 || *gens.last().unwrap() > 62 {
        return Err(LabError::Config("experiment.generations must be a nonempty list in 1..=62".into()));
    }
    let mut rep = ExperimentReport::new("distortion", opts.seed, echo(cfg, opts.seed, json!({ "generations": gens, "word": "0^n" })));
    let mut main = Table::new("distortion", &["system", "carrier", "n", "inf_deriv", "sup_deriv", "ratio", "m_A_n"]);
    let mut summary = Table::new("dichotomy", &["system", "carrier", "max_ratio", "first_n_ratio_above_2", "m_A_last", "limit_mass"]);
    let systems: Vec<&BuiltSystem> = match &sys.factors {
        Some(f) => vec![&f.0, &f.1],
        None => vec![&sys],
    };
    for s in &systems {
        if s.carriers.is_empty() {
            rep.warn(format!("{} carries no Cantor set; no rows", s.name()));
        }
        rows(&mut main, &mut summary, s, &gens)?;
    }
    if !systems.iter().any(|s| s.name() == "affine3") {
        rows(&mut main, &mut summary, &build_reference_affine(), &gens)?;
    }
    rep.tables.push(main);
    rep.tables.push(summary);
    Ok(rep)
}
