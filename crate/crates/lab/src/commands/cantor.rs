use pesinlab_core::cantor_skeleton::cantor_total_measure;
use pesinlab_core::CantorCarrier;
use serde_json::json;

use super::echo;
use crate::config::LabConfig;
use crate::report::{Cell, ExperimentReport, Table};
use crate::setup::build_system;
use crate::{LabError, RunOptions};

fn carrier_rows(main: &mut Table, totals: &mut Table, name: &str, c: &CantorCarrier) -> Result<(), LabError> {
    let s = &c.skeleton;
    let n_max = s.max_generation();
    for n in 1..=n_max {
        let (alpha, gap) = if n < n_max { (Cell::Float(s.alpha(n)), Cell::Float(s.gap_len(n))) } else { (Cell::Null, Cell::Null) };
        main.push(vec![name.into(), n.into(), s.atom_len(n).into(), s.atom_mass(n).into(), alpha, gap]);
    }
    let (total, tail) = match s.params() {
        Some(p) => {
            let m = cantor_total_measure(p)?;
            (m.value, Cell::Float(m.tail_bound))
        }
        // middle-thirds sets are Lebesgue null
        None => (0.0, Cell::Null),
    };
    let last = s.atom_mass(n_max);
    totals.push(vec![
        name.into(),
        n_max.into(),
        s.central_gap().len().into(),
        last.into(),
        total.into(),
        tail,
        (last - total).into(),
    ]);
    Ok(())
}

pub fn run(cfg: &LabConfig, opts: &RunOptions) -> Result<ExperimentReport, LabError> {
    let sys = build_system(cfg)?;
    let mut rep = ExperimentReport::new("cantor-report", opts.seed, echo(cfg, opts.seed, json!({})));
    let mut main = Table::new("cantor", &["carrier", "generation", "L_n", "m_A_n", "alpha_n", "gap_len"]);
    let mut totals = Table::new(
        "totals",
        &["carrier", "N", "central_gap", "m_A_N", "total_measure", "tail_bound", "m_A_N_minus_total"],
    );
    let carriers: Vec<(String, &CantorCarrier)> = match &sys.factors {
        Some(f) => {
            let left = f.0.carriers.iter().map(|c| (format!("left:{}", c.label), c));
            left.chain(f.1.carriers.iter().map(|c| (format!("right:{}", c.label), c))).collect()
        }
        None => sys.carriers.iter().map(|c| (c.label.clone(), c)).collect(),
    };
    if carriers.is_empty() {
        rep.warn(format!("{} carries no Cantor set", sys.name()));
    }
    for (name, c) in carriers {
        carrier_rows(&mut main, &mut totals, &name, c)?;
    }
    let mut products = Table::new("products", &["label", "left", "right", "mass"]);
    for p in &sys.products {
        products.push(vec![p.label.clone().into(), p.left.label.clone().into(), p.right.label.clone().into(), p.mass().into()]);
    }
    rep.tables.push(main);
    rep.tables.push(totals);
    if !products.rows.is_empty() {
        rep.tables.push(products);
    }
    Ok(rep)
}
