use pesinlab_core::map_builder::{example2_glue_ratios, gap_image_check_skeleton};
use pesinlab_core::BuiltSystem;
use serde_json::json;

use super::{echo, MEASURE_STREAMS};
use crate::config::LabConfig;
use crate::report::{ExperimentReport, Table};
use crate::setup::{build_circle, build_measures, build_system, circle_specs, example2_spec};
use crate::{LabError, RunOptions};

const TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-12;

fn components(sys: &BuiltSystem) -> Vec<(String, &BuiltSystem)> {
    match &sys.factors {
        Some(f) => vec![("left".to_string(), &f.0), ("right".to_string(), &f.1)],
        None => vec![("map".to_string(), sys)],
    }
}

pub fn run(cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    let max_gen = cfg.experiment.max_gen.unwrap_or(10);
    if !(1..=20).contains(&max_gen) {
        return Err(LabError::Config("experiment.max_gen must be in 1..=20".into()));
    }
    // glue ratios are checked first so that a failure names the segment
    let mut glue = Table::new("glue", &["component", "segment", "ratio", "ok"]);
    for (comp, spec) in circle_specs(cfg) {
        if spec.kind == "example2" {
            for (seg, r) in example2_glue_ratios(&example2_spec(spec)) {
                glue.push(vec![comp.into(), seg.into(), r.into(), (r > 2.0).into()]);
            }
        }
        build_circle(spec).map_err(|e| match e {
            LabError::Validation(m) => LabError::Validation(format!("{comp}: {m}")),
            other => other,
        })?;
    }
    let sys = build_system(cfg)?;
    build_measures(&sys, &cfg.measures, opts.seed, MEASURE_STREAMS)?;

    let mut rep = ExperimentReport::new(
        "validate",
        opts.seed,
        echo(cfg, opts.seed, json!({ "tolerance": TOL, "gap_tolerance": GAP_TOL, "max_gen": max_gen })),
    );
    let mut main = Table::new("validate", &["component", "system", "c0_residual", "c1_residual", "lambda", "degree", "winding"]);
    let mut gaps = Table::new(
        "gaps",
        &["component", "carrier", "max_gap_residual", "max_atom_residual", "gaps_checked", "atoms_checked"],
    );
    for (comp, s) in components(&sys) {
        let f = s.map.as_circle().expect("torus factors are circle maps");
        let v = f.validate(TOL).map_err(|e| LabError::Validation(format!("{comp} ({}): {e}", s.name())))?;
        main.push(vec![
            comp.clone().into(),
            s.name().into(),
            v.c0_residual.into(),
            v.c1_residual.into(),
            v.lambda.into(),
            v.degree.into(),
            v.winding.into(),
        ]);
        if s.carriers.is_empty() {
            rep.warn(format!("{comp}: {} has no Cantor carrier; gap check is vacuous", s.name()));
        }
        for c in &s.carriers {
            let g = gap_image_check_skeleton(f, &c.skeleton, max_gen, GAP_TOL)
                .map_err(|e| LabError::Validation(format!("{comp} carrier {}: {e}", c.label)))?;
            gaps.push(vec![
                comp.clone().into(),
                c.label.clone().into(),
                g.max_gap_residual.into(),
                g.max_atom_residual.into(),
                g.gaps_checked.into(),
                g.atoms_checked.into(),
            ]);
        }
    }
    if let Some(f) = &sys.factors {
        rep.warn(format!(
            "torus expansion constant is min of the factors: {:?}",
            f.0.map.expansion().min(f.1.map.expansion())
        ));
    }
    rep.tables.push(main);
    rep.tables.push(gaps);
    if !glue.rows.is_empty() {
        rep.tables.push(glue);
    }
    Ok(rep)
}
