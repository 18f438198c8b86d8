//! Turning config specs into systems and measures.

use pesinlab_core::map_builder::{
    build_doubling, build_example1, build_example2, build_reference_affine_with, build_torus,
};
use pesinlab_core::measures::{empirical_from_pseudo_orbit, product_measure};
use pesinlab_core::{BuiltSystem, Example1Spec, Example2Spec, Measure};
use rand_chacha::ChaCha8Rng;

use crate::config::{LabConfig, MapSpec, MeasureSpec, Point};
use crate::LabError;

/// Default resolution depth of μ_K on a circle carrier.
pub const MU_K_DEPTH: usize = 16;
/// Default depth of each factor of a product μ_K.
pub const PRODUCT_DEPTH: usize = 10;
pub const DEFAULT_JITTER: f64 = 1e-12;

fn reject_unused(spec: &MapSpec, allowed: &[&str]) -> Result<(), LabError> {
    let given = [
        ("b0", spec.b0.is_some()),
        ("k", spec.k.is_some()),
        ("N", spec.n.is_some()),
        ("c1", spec.c1.is_some()),
        ("b1", spec.b1.is_some()),
        ("k2", spec.k2.is_some()),
        ("N2", spec.n2.is_some()),
    ];
    for (key, set) in given {
        if set && !allowed.contains(&key) {
            return Err(LabError::Config(format!("map key {key} is not used by map kind {}", spec.kind)));
        }
    }
    Ok(())
}

/// Build a circle system from its spec.
pub fn build_circle(spec: &MapSpec) -> Result<BuiltSystem, LabError> {
    match spec.kind.as_str() {
        "doubling" => {
            reject_unused(spec, &[])?;
            Ok(build_doubling())
        }
        "affine3" => {
            reject_unused(spec, &["N"])?;
            Ok(build_reference_affine_with(spec.n.unwrap_or(24)))
        }
        "example1" => {
            reject_unused(spec, &["b0", "k", "N"])?;
            let d = Example1Spec::default();
            let s = Example1Spec { b0: spec.b0.unwrap_or(d.b0), k: spec.k.unwrap_or(d.k), n: spec.n.unwrap_or(d.n) };
            Ok(build_example1(&s)?)
        }
        "example2" => {
            reject_unused(spec, &["b0", "k", "N", "c1", "b1", "k2", "N2"])?;
            Ok(build_example2(&example2_spec(spec))?)
        }
        "torus" => Err(LabError::Config("torus factors must be circle maps".into())),
        other => Err(LabError::Config(format!(
            "unknown map kind {other:?} (expected doubling, affine3, example1, example2 or torus)"
        ))),
    }
}

/// Example-2 parameters with defaults filled in.
pub fn example2_spec(spec: &MapSpec) -> Example2Spec {
    let d = Example2Spec::default();
    Example2Spec {
        b0: spec.b0.unwrap_or(d.b0),
        k: spec.k.unwrap_or(d.k),
        n: spec.n.unwrap_or(d.n),
        c1: spec.c1.unwrap_or(d.c1),
        b1: spec.b1.unwrap_or(d.b1),
        k2: spec.k2.unwrap_or(d.k2),
        n2: spec.n2.unwrap_or(d.n2),
    }
}

/// The circle specs making up the configured map, with component names.
pub fn circle_specs(cfg: &LabConfig) -> Vec<(&'static str, &MapSpec)> {
    match &cfg.torus {
        Some(t) if cfg.map.kind == "torus" => vec![("left", &t.left), ("right", &t.right)],
        _ => vec![("map", &cfg.map)],
    }
}

pub fn build_system(cfg: &LabConfig) -> Result<BuiltSystem, LabError> {
    if cfg.map.kind == "torus" {
        reject_unused(&cfg.map, &[])?;
        let t = cfg.torus.as_ref().ok_or_else(|| LabError::Config("map.kind = torus needs a torus block".into()))?;
        Ok(build_torus(build_circle(&t.left)?, build_circle(&t.right)?)?)
    } else {
        if cfg.torus.is_some() {
            return Err(LabError::Config("torus block given but map.kind is not torus".into()));
        }
        build_circle(&cfg.map)
    }
}

/// A fixed point of the system: 0 for the doubling map, the wrap point -1
/// for the examples (componentwise on the torus).
pub fn fixed_point(sys: &BuiltSystem) -> Option<Vec<f64>> {
    let dim = sys.map.dim();
    [0.0, -1.0].into_iter().find_map(|c| {
        let p = vec![c; dim];
        let mut q = p.clone();
        sys.map.step(&mut q);
        (q == p).then_some(p)
    })
}

fn point_for(sys: &BuiltSystem, p: &Point, what: &str) -> Result<Vec<f64>, LabError> {
    let c = p.coords();
    if c.len() != sys.map.dim() {
        return Err(LabError::Config(format!("{what} has dimension {} but the map has dimension {}", c.len(), sys.map.dim())));
    }
    if c.iter().any(|x| !(-1.0..=1.0).contains(x)) {
        return Err(LabError::Config(format!("{what} must lie in [-1, 1]")));
    }
    Ok(c)
}

fn depth_ok(depth: usize, max: usize, label: &str) -> Result<usize, LabError> {
    if depth == 0 || depth > max {
        return Err(LabError::Config(format!("depth {depth} for carrier {label} must be in 1..={max}")));
    }
    Ok(depth)
}

fn mu_k(sys: &BuiltSystem, label: &str, depth: Option<usize>) -> Result<Measure, LabError> {
    if let Some(c) = sys.carrier(label) {
        let d = depth_ok(depth.unwrap_or(MU_K_DEPTH), c.skeleton.max_generation(), label)?;
        return Ok(Measure::mu_k(c, d)?);
    }
    if let Some(p) = sys.product(label) {
        let d = depth.unwrap_or(PRODUCT_DEPTH);
        let l = Measure::mu_k(&p.left, depth_ok(d, p.left.skeleton.max_generation(), label)?)?;
        let r = Measure::mu_k(&p.right, depth_ok(d, p.right.skeleton.max_generation(), label)?)?;
        return Ok(product_measure(l, r)?);
    }
    Err(LabError::Config(format!(
        "unknown skeleton label {label:?}; {} has labels {:?}",
        sys.name(),
        sys.labels()
    )))
}

/// Build one configured measure. `rng` feeds the pseudo-orbit kicks of
/// empirical measures.
pub fn build_measure(sys: &BuiltSystem, spec: &MeasureSpec, rng: &mut ChaCha8Rng) -> Result<Measure, LabError> {
    let name = spec.display_name();
    let m = match spec.kind.as_str() {
        "lebesgue" => {
            if sys.map.dim() == 1 {
                Measure::lebesgue()
            } else {
                Measure::lebesgue_torus()
            }
        }
        "dirac" => {
            let p = match &spec.point {
                Some(p) => point_for(sys, p, "dirac point")?,
                None => fixed_point(sys).ok_or_else(|| LabError::Config(format!("measure {name}: dirac needs a point")))?,
            };
            match p.as_slice() {
                [x] => Measure::Dirac(*x),
                [x, y] => product_measure(Measure::Dirac(*x), Measure::Dirac(*y))?,
                _ => unreachable!("dimension checked"),
            }
        }
        "mu_K" => {
            let label = spec
                .skeleton_label
                .as_deref()
                .ok_or_else(|| LabError::Config(format!("measure {name}: mu_K needs skeleton_label")))?;
            mu_k(sys, label, spec.depth)?
        }
        "product" => match (&spec.label, &spec.left, &spec.right) {
            (Some(label), None, None) => mu_k(sys, label, spec.depth)?,
            (None, Some(a), Some(b)) => {
                let f = sys
                    .factors
                    .as_ref()
                    .ok_or_else(|| LabError::Config(format!("measure {name}: product measures need a torus map")))?;
                let l = build_measure(&f.0, a, rng)?;
                let r = build_measure(&f.1, b, rng)?;
                product_measure(l, r)?
            }
            _ => return Err(LabError::Config(format!("measure {name}: product needs either label or left and right"))),
        },
        "empirical" => {
            let x0 = spec.x0.as_ref().ok_or_else(|| LabError::Config(format!("measure {name}: empirical needs x0")))?;
            let x0 = point_for(sys, x0, "empirical x0")?;
            let n = spec.n.ok_or_else(|| LabError::Config(format!("measure {name}: empirical needs n")))?;
            if n == 0 {
                return Err(LabError::Config(format!("measure {name}: n must be positive")));
            }
            let jitter = spec.jitter.unwrap_or(DEFAULT_JITTER);
            if !(0.0..0.5).contains(&jitter) {
                return Err(LabError::Config(format!("measure {name}: jitter must be in [0, 0.5)")));
            }
            empirical_from_pseudo_orbit(&sys.map, &x0, n, jitter, rng)?
        }
        other => {
            return Err(LabError::Config(format!(
                "measure {name}: unknown kind {other:?} (expected lebesgue, dirac, mu_K, empirical or product)"
            )))
        }
    };
    if m.dim() != sys.map.dim() {
        return Err(LabError::Config(format!(
            "measure {name} has dimension {} but the map has dimension {}",
            m.dim(),
            sys.map.dim()
        )));
    }
    m.validate()?;
    Ok(m)
}

/// Lebesgue, μ_K on every circle carrier and every product carrier.
pub fn default_measures(sys: &BuiltSystem) -> Vec<MeasureSpec> {
    let mut out = vec![MeasureSpec::kind("lebesgue")];
    for c in &sys.carriers {
        let mut m = MeasureSpec::kind("mu_K");
        m.skeleton_label = Some(c.label.clone());
        out.push(m);
    }
    for p in &sys.products {
        let mut m = MeasureSpec::kind("product");
        m.label = Some(p.label.clone());
        out.push(m);
    }
    out
}

/// The configured measures, or the defaults when none are configured.
pub fn measure_specs(cfg: &LabConfig, sys: &BuiltSystem) -> Vec<MeasureSpec> {
    if cfg.measures.is_empty() {
        default_measures(sys)
    } else {
        cfg.measures.clone()
    }
}

/// Build every spec, each empirical measure on its own stream.
pub fn build_measures(
    sys: &BuiltSystem,
    specs: &[MeasureSpec],
    seed: u64,
    stream_base: u64,
) -> Result<Vec<(String, Measure)>, LabError> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = crate::parallel::sample_rng(seed, stream_base, i);
            Ok((s.display_name(), build_measure(sys, s, &mut rng)?))
        })
        .collect()
}
