//! Concrete systems: the doubling map, the tripling reference map with its
//! middle-thirds set, the two Bowen examples and torus products.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cantor_skeleton::{BowenParams, BowenSkeleton, Word};
use crate::numeric::circle_dist;
use crate::piecewise_map::{Branch, CircleMap, MonotonePiece, Tie, TorusMap};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Spec {
    pub b0: f64,
    pub k: f64,
    pub n: usize,
}

impl Default for Example1Spec {
    fn default() -> Self {
        Example1Spec { b0: 0.25, k: 4.0, n: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2Spec {
    pub b0: f64,
    pub k: f64,
    pub n: usize,
    pub c1: f64,
    pub b1: f64,
    pub k2: f64,
    pub n2: usize,
}

impl Default for Example2Spec {
    fn default() -> Self {
        Example2Spec { b0: 0.4, k: 4.0, n: 24, c1: 0.2, b1: 0.1, k2: 12.0, n2: 24 }
    }
}

/// A Cantor set carried by a system, with the data μ_K needs.
#[derive(Debug, Clone)]
pub struct CantorCarrier {
    pub label: String,
    pub skeleton: Arc<BowenSkeleton>,
    /// Itinerary symbols of the two generation-1 atoms.
    pub symbols: [u16; 2],
    /// Constant value of `log f'` on the Cantor set, when known exactly.
    pub log_deriv_on_k: Option<f64>,
}

/// Product of an outer carrier of the first factor with a carrier of the
/// second.
#[derive(Debug, Clone)]
pub struct ProductCarrier {
    pub label: String,
    pub left: CantorCarrier,
    pub right: CantorCarrier,
}

impl ProductCarrier {
    /// Lebesgue mass of the product set, from the closed-form factor masses
    /// when available.
    pub fn mass(&self) -> Option<f64> {
        let m = |c: &CantorCarrier| {
            c.skeleton.params().and_then(|p| crate::cantor_skeleton::cantor_total_measure(p).ok()).map(|m| m.value)
        };
        Some(m(&self.left)? * m(&self.right)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Doubling,
    Affine3,
    Example1,
    Example2,
    Torus,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Doubling => "doubling",
            SystemKind::Affine3 => "affine3",
            SystemKind::Example1 => "example1",
            SystemKind::Example2 => "example2",
            SystemKind::Torus => "torus",
        }
    }
}

#[derive(Debug, Clone)]
pub enum SystemMap {
    Circle(CircleMap),
    Torus(TorusMap),
}

impl SystemMap {
    pub fn dim(&self) -> usize {
        match self {
            SystemMap::Circle(_) => 1,
            SystemMap::Torus(_) => 2,
        }
    }

    pub fn as_circle(&self) -> Option<&CircleMap> {
        match self {
            SystemMap::Circle(f) => Some(f),
            SystemMap::Torus(_) => None,
        }
    }

    /// Expansion constant (λ, or γ on the torus).
    pub fn expansion(&self) -> f64 {
        match self {
            SystemMap::Circle(f) => f.lambda(),
            SystemMap::Torus(t) => t.gamma(),
        }
    }

    /// Number of itinerary symbols; torus symbols are `s1 * alphabet2 + s2`.
    pub fn alphabet(&self) -> usize {
        match self {
            SystemMap::Circle(f) => f.alphabet(),
            SystemMap::Torus(t) => t.f1.alphabet() * t.f2.alphabet(),
        }
    }

    /// Apply the map to a point given as 1 or 2 coordinates, in place.
    /// Returns `(log|det Df|, symbol)` at the input point.
    #[inline]
    pub fn step(&self, p: &mut [f64]) -> (f64, u32) {
        match self {
            SystemMap::Circle(f) => {
                let s = f.symbol(p[0]) as u32;
                let (y, d) = f.eval_deriv(p[0]);
                p[0] = y;
                (libm::log(d), s)
            }
            SystemMap::Torus(t) => {
                let s = t.f1.symbol(p[0]) as u32 * t.f2.alphabet() as u32 + t.f2.symbol(p[1]) as u32;
                let (y0, d0) = t.f1.eval_deriv(p[0]);
                let (y1, d1) = t.f2.eval_deriv(p[1]);
                p[0] = y0;
                p[1] = y1;
                (libm::log(d0) + libm::log(d1), s)
            }
        }
    }

    /// `log|det Df|` at a point.
    #[inline]
    pub fn log_det(&self, p: &[f64]) -> f64 {
        match self {
            SystemMap::Circle(f) => libm::log(f.deriv(p[0])),
            SystemMap::Torus(t) => t.log_det((p[0], p[1])),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuiltSystem {
    pub kind: SystemKind,
    pub map: SystemMap,
    pub carriers: Vec<CantorCarrier>,
    pub products: Vec<ProductCarrier>,
    /// Factor systems of a torus product.
    pub factors: Option<Box<(BuiltSystem, BuiltSystem)>>,
}

impl BuiltSystem {
    pub fn name(&self) -> String {
        match &self.factors {
            Some(f) => format!("torus({}x{})", f.0.name(), f.1.name()),
            None => self.kind.name().to_string(),
        }
    }

    pub fn carrier(&self, label: &str) -> Option<&CantorCarrier> {
        self.carriers.iter().find(|c| c.label == label)
    }

    pub fn product(&self, label: &str) -> Option<&ProductCarrier> {
        self.products.iter().find(|c| c.label == label)
    }

    /// Labels of every Cantor carrier (circle or product).
    pub fn labels(&self) -> Vec<String> {
        self.carriers.iter().map(|c| c.label.clone()).chain(self.products.iter().map(|p| p.label.clone())).collect()
    }
}

/// The doubling map `x ↦ 2x`.
pub fn build_doubling() -> BuiltSystem {
    BuiltSystem {
        kind: SystemKind::Doubling,
        map: SystemMap::Circle(CircleMap::doubling()),
        carriers: Vec::new(),
        products: Vec::new(),
        factors: None,
    }
}

/// Tripling map: three affine slope-3 pieces, carrying the middle-thirds set
/// `C` on which it acts as the full 2-shift.
pub fn build_reference_affine() -> BuiltSystem {
    build_reference_affine_with(24)
}

pub fn build_reference_affine_with(n: usize) -> BuiltSystem {
    let third = 1.0 / 3.0;
    let pieces = [
        Branch::piece(0, MonotonePiece::linear(-1.0, -third, -1.0, 3.0).expect("slope 3")),
        Branch::piece(2, MonotonePiece::linear(-third, third, -1.0, 3.0).expect("slope 3")),
        Branch::piece(1, MonotonePiece::linear(third, 1.0, -1.0, 3.0).expect("slope 3")),
    ];
    let map = CircleMap::new(pieces.to_vec()).expect("tripling tiles the circle");
    let skeleton = Arc::new(BowenSkeleton::middle_thirds(-1.0, 1.0, n.max(1)).expect("middle thirds"));
    BuiltSystem {
        kind: SystemKind::Affine3,
        map: SystemMap::Circle(map),
        carriers: alloc::vec![CantorCarrier {
            label: "C".into(),
            skeleton,
            symbols: [0, 1],
            log_deriv_on_k: Some(libm::log(3.0)),
        }],
        products: Vec::new(),
        factors: None,
    }
}

fn check_gap_ratios(skel: &BowenSkeleton) -> Result<(), Error> {
    for g in 1..skel.max_generation() {
        let ratio = skel.gap_len(g - 1) / skel.gap_len(g);
        if !(ratio > 2.0) {
            return Err(Error::GapRatioError { generation: g, ratio });
        }
    }
    Ok(())
}

fn bowen_carrier(label: &str, skeleton: Arc<BowenSkeleton>, symbols: [u16; 2]) -> CantorCarrier {
    CantorCarrier { label: label.into(), skeleton, symbols, log_deriv_on_k: Some(core::f64::consts::LN_2) }
}

/// Degree-3 map: Bowen branches on `I_0`, `I_1` and a central piece mapping
/// the central gap onto the whole circle.
pub fn build_example1(spec: &Example1Spec) -> Result<BuiltSystem, Error> {
    if !(spec.b0 > 0.0 && spec.b0 < 0.5) {
        return Err(Error::GlueRatioError { segment: "central", ratio: 1.0 / spec.b0 });
    }
    let skel = Arc::new(BowenSkeleton::build(&BowenParams::circle(spec.b0, spec.k, spec.n))?);
    check_gap_ratios(&skel)?;
    let cg = skel.central_gap();
    let central = MonotonePiece::new(cg.lo, cg.hi, -1.0, 1.0, 2.0, 2.0)?;
    let map = CircleMap::new(alloc::vec![
        Branch::bowen(0, skel.clone(), 0),
        Branch::piece(2, central),
        Branch::bowen(1, skel.clone(), 1),
    ])?;
    Ok(BuiltSystem {
        kind: SystemKind::Example1,
        map: SystemMap::Circle(map),
        carriers: alloc::vec![bowen_carrier("K", skel, [0, 1])],
        products: Vec::new(),
        factors: None,
    })
}

/// Ratios of the four glue segments of example 2, in the order
/// `[-b0,-c1]`, `[-b1,0]`, `[0,b1]`, `[c1,b0]`.
pub fn example2_glue_ratios(spec: &Example2Spec) -> [(&'static str, f64); 4] {
    let Example2Spec { b0, c1, b1, .. } = *spec;
    [
        ("[-b0,-c1]->[-1,-c1]", (1.0 - c1) / (b0 - c1)),
        ("[-b1,0]->[c1,1]", (1.0 - c1) / b1),
        ("[0,b1]->[-1,-c1]", (1.0 - c1) / b1),
        ("[c1,b0]->[c1,1]", (1.0 - c1) / (b0 - c1)),
    ]
}

/// Degree-4 map with an outer Bowen set `K1` and an inner one `K2` on
/// `[-c1, c1]`.
pub fn build_example2(spec: &Example2Spec) -> Result<BuiltSystem, Error> {
    let Example2Spec { b0, k, n, c1, b1, k2, n2 } = *spec;
    if !(0.0 < b1 && b1 < c1 && c1 < b0 && b0 < 1.0) {
        return Err(Error::InvalidSpec("0 < b1 < c1 < b0 < 1 violated"));
    }
    for (segment, ratio) in example2_glue_ratios(spec) {
        if !(ratio > 2.0) {
            return Err(Error::GlueRatioError { segment, ratio });
        }
    }
    let outer = Arc::new(BowenSkeleton::build(&BowenParams::circle(b0, k, n))?);
    check_gap_ratios(&outer)?;
    let inner_params = BowenParams {
        lo: -c1,
        hi: c1,
        half_gap: b1,
        alpha: crate::AlphaSchedule::Closed { k: k2 },
        max_generation: n2,
    };
    let inner = Arc::new(BowenSkeleton::build(&inner_params)?);
    check_gap_ratios(&inner)?;
    let og = outer.central_gap();
    let ig = inner.central_gap();
    let glue = |x0: f64, x1: f64, y0: f64, y1: f64| MonotonePiece::new(x0, x1, y0, y1, 2.0, 2.0);
    let map = CircleMap::new(alloc::vec![
        Branch::bowen(0, outer.clone(), 0),
        Branch::piece(2, glue(og.lo, -c1, -1.0, -c1)?),
        Branch::bowen(2, inner.clone(), 0),
        Branch::piece(2, glue(ig.lo, 0.0, c1, 1.0)?),
        Branch::piece(3, glue(0.0, ig.hi, -1.0, -c1)?),
        Branch::bowen(3, inner.clone(), 1),
        Branch::piece(3, glue(c1, og.hi, c1, 1.0)?),
        Branch::bowen(1, outer.clone(), 1),
    ])?;
    Ok(BuiltSystem {
        kind: SystemKind::Example2,
        map: SystemMap::Circle(map),
        carriers: alloc::vec![bowen_carrier("K1", outer, [0, 1]), bowen_carrier("K2", inner, [2, 3])],
        products: Vec::new(),
        factors: None,
    })
}

/// Product system. Product carriers pair the first carrier of `sys1` with
/// every carrier of `sys2`.
pub fn build_torus(sys1: BuiltSystem, sys2: BuiltSystem) -> Result<BuiltSystem, Error> {
    let (f1, f2) = match (&sys1.map, &sys2.map) {
        (SystemMap::Circle(a), SystemMap::Circle(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::InvalidSpec("torus factors must be circle systems")),
    };
    let mut products = Vec::new();
    if let Some(outer) = sys1.carriers.first() {
        for c in &sys2.carriers {
            products.push(ProductCarrier {
                label: format!("{}x{}", outer.label, c.label),
                left: outer.clone(),
                right: c.clone(),
            });
        }
    }
    Ok(BuiltSystem {
        kind: SystemKind::Torus,
        map: SystemMap::Torus(TorusMap::new(f1, f2)),
        carriers: Vec::new(),
        products,
        factors: Some(Box::new((sys1, sys2))),
    })
}

/// Outcome of a successful [`gap_image_check`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GapImageReport {
    pub max_gap_residual: f64,
    pub max_atom_residual: f64,
    pub gaps_checked: usize,
    pub atoms_checked: usize,
}

/// Check that `map` sends gap `I*_{a w}` onto `I*_w` and atom `I_{a w}` onto
/// `I_w` for all words up to `max_gen`, comparing one-sided endpoint images.
pub fn gap_image_check_skeleton(
    map: &CircleMap,
    skel: &BowenSkeleton,
    max_gen: usize,
    tol: f64,
) -> Result<GapImageReport, Error> {
    let mut rep = GapImageReport::default();
    let mut bad: Vec<String> = Vec::new();
    let mut worst: f64 = 0.0;
    let mut record = |res: f64, w: &Word, kind: &str, rep_max: &mut f64| {
        *rep_max = rep_max.max(res);
        if !(res <= tol) {
            worst = worst.max(res);
            if bad.len() < 16 {
                bad.push(format!("{kind}:{}", w.to_string()));
            }
        }
    };
    let image = |x: f64, tie: Tie| crate::numeric::circle_reduce(map.lift_deriv_with(x, tie).0);
    let gmax = max_gen.min(skel.max_generation() - 1);
    for n in 1..=gmax {
        for bits in 0..(1u64 << n) {
            let w = Word::new(bits, n)?;
            let g = skel.gap_interval(&w)?;
            let t = skel.gap_interval(&w.shift())?;
            let res = circle_dist(image(g.lo, Tie::Right), t.lo).max(circle_dist(image(g.hi, Tie::Left), t.hi));
            record(res, &w, "gap", &mut rep.max_gap_residual);
            rep.gaps_checked += 1;
        }
    }
    let amax = max_gen.min(skel.max_generation());
    for n in 1..=amax {
        for bits in 0..(1u64 << n) {
            let w = Word::new(bits, n)?;
            let a = skel.atom_interval(&w)?;
            let t = skel.atom_interval(&w.shift())?;
            let res = circle_dist(image(a.lo, Tie::Right), t.lo).max(circle_dist(image(a.hi, Tie::Left), t.hi));
            record(res, &w, "atom", &mut rep.max_atom_residual);
            rep.atoms_checked += 1;
        }
    }
    if bad.is_empty() {
        Ok(rep)
    } else {
        Err(Error::ConjugacyViolation { max_residual: worst, words: bad })
    }
}

/// [`gap_image_check_skeleton`] over every carrier of a circle system.
/// Systems without carriers pass vacuously.
pub fn gap_image_check(sys: &BuiltSystem, max_gen: usize, tol: f64) -> Result<GapImageReport, Error> {
    let mut total = GapImageReport::default();
    match &sys.map {
        SystemMap::Circle(f) => {
            for c in &sys.carriers {
                let r = gap_image_check_skeleton(f, &c.skeleton, max_gen, tol)?;
                total.max_gap_residual = total.max_gap_residual.max(r.max_gap_residual);
                total.max_atom_residual = total.max_atom_residual.max(r.max_atom_residual);
                total.gaps_checked += r.gaps_checked;
                total.atoms_checked += r.atoms_checked;
            }
        }
        SystemMap::Torus(_) => {
            if let Some(f) = &sys.factors {
                for s in [&f.0, &f.1] {
                    let r = gap_image_check(s, max_gen, tol)?;
                    total.max_gap_residual = total.max_gap_residual.max(r.max_gap_residual);
                    total.max_atom_residual = total.max_atom_residual.max(r.max_atom_residual);
                    total.gaps_checked += r.gaps_checked;
                    total.atoms_checked += r.atoms_checked;
                }
            }
        }
    }
    Ok(total)
}
