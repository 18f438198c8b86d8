//! Measures on the circle and torus, integration of observables, the
//! weak* distance, pushforwards and products.
//!
//! Integration returns a value together with an error bound. Empirical and
//! Dirac integrals are exact weighted sums. Lebesgue integrals use composite
//! Gauss–Legendre rules and report the coarse/fine difference. Cantor–
//! Bernoulli integrals sum over atom left endpoints at the measure's depth,
//! except for observables known to be constant on the Cantor set, which are
//! returned exactly.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use crate::cantor_skeleton::{BowenSkeleton, Word};
use crate::map_builder::{CantorCarrier, SystemMap};
use crate::numeric::{circle_dist, compensated_sum, gauss_legendre_nodes, Interval, KahanSum};
use crate::piecewise_map::{profile_coeff, BowenBranch, BranchKind, CircleMap};
use crate::Error;

/// Default truncation of the weak* series.
pub const DEFAULT_N_TERMS: usize = 33;

#[derive(Debug, Clone)]
pub enum Measure {
    /// Weighted points; `coords` holds `dim` values per point.
    Empirical { dim: usize, coords: Vec<f64>, weights: Vec<f64> },
    /// μ_K resolved to atoms of generation `depth`, each of mass `2^-depth`.
    CantorBernoulli { skeleton: Arc<BowenSkeleton>, symbols: [u16; 2], depth: usize },
    Dirac(f64),
    /// Normalized Lebesgue measure on an interval of the circle.
    LebesgueUniform(Interval),
    /// Product of two circle measures.
    Product(Box<Measure>, Box<Measure>),
}

impl Measure {
    pub fn lebesgue() -> Self {
        Measure::LebesgueUniform(Interval::new(-1.0, 1.0))
    }

    pub fn lebesgue_torus() -> Self {
        Measure::Product(Box::new(Self::lebesgue()), Box::new(Self::lebesgue()))
    }

    pub fn mu_k(carrier: &CantorCarrier, depth: usize) -> Result<Self, Error> {
        if depth > carrier.skeleton.max_generation() {
            return Err(Error::DepthExceeded { requested: depth, available: carrier.skeleton.max_generation() });
        }
        Ok(Measure::CantorBernoulli { skeleton: carrier.skeleton.clone(), symbols: carrier.symbols, depth })
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Empirical { dim, .. } => *dim,
            Measure::Product(..) => 2,
            _ => 1,
        }
    }

    /// Check weights and depths.
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            Measure::Empirical { dim, coords, weights } => {
                if *dim == 0 || *dim > 2 || coords.len() != dim * weights.len() || weights.is_empty() {
                    return Err(Error::InvalidMeasure("empirical shape mismatch"));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(Error::InvalidMeasure("negative weight"));
                }
                if libm::fabs(compensated_sum(weights.iter().copied()) - 1.0) > 1e-12 {
                    return Err(Error::InvalidMeasure("weights do not sum to 1"));
                }
                Ok(())
            }
            Measure::CantorBernoulli { skeleton, depth, .. } => {
                if *depth > skeleton.max_generation() {
                    Err(Error::DepthExceeded { requested: *depth, available: skeleton.max_generation() })
                } else {
                    Ok(())
                }
            }
            Measure::Dirac(x) if !x.is_finite() => Err(Error::InvalidMeasure("non-finite point")),
            Measure::LebesgueUniform(iv) if !(iv.lo < iv.hi) => Err(Error::DegenerateInterval),
            Measure::Product(a, b) => {
                if a.dim() != 1 || b.dim() != 1 {
                    return Err(Error::InvalidMeasure("product factors must be circle measures"));
                }
                a.validate()?;
                b.validate()
            }
            _ => Ok(()),
        }
    }
}

/// `σ_n(x0)`: equal weights on `x0, f(x0), …, f^{n−1}(x0)`.
pub fn empirical_from_orbit(map: &SystemMap, x0: &[f64], n: usize) -> Result<Measure, Error> {
    let dim = map.dim();
    if n == 0 || x0.len() != dim {
        return Err(Error::InvalidMeasure("orbit needs n >= 1 and a point of the right dimension"));
    }
    let mut coords = Vec::with_capacity(n * dim);
    let mut p = [0.0; 2];
    p[..dim].copy_from_slice(x0);
    for _ in 0..n {
        coords.extend_from_slice(&p[..dim]);
        map.step(&mut p[..dim]);
    }
    Ok(Measure::Empirical { dim, coords, weights: vec![1.0 / n as f64; n] })
}

/// `σ_n` along a pseudo-orbit: every iterate receives a uniform kick of
/// size `jitter` before the next step. Floating-point orbits of maps such as
/// `x ↦ 2x` lose one mantissa bit per step; the kicks keep them generic.
pub fn empirical_from_pseudo_orbit<R: rand_core::RngCore + ?Sized>(
    map: &SystemMap,
    x0: &[f64],
    n: usize,
    jitter: f64,
    rng: &mut R,
) -> Result<Measure, Error> {
    let dim = map.dim();
    if n == 0 || x0.len() != dim {
        return Err(Error::InvalidMeasure("orbit needs n >= 1 and a point of the right dimension"));
    }
    let mut coords = Vec::with_capacity(n * dim);
    let mut p = [0.0; 2];
    p[..dim].copy_from_slice(x0);
    for _ in 0..n {
        coords.extend_from_slice(&p[..dim]);
        map.step(&mut p[..dim]);
        crate::numeric::kick(&mut p[..dim], jitter, rng);
    }
    Ok(Measure::Empirical { dim, coords, weights: vec![1.0 / n as f64; n] })
}

/// Convex combination of empirical measures by weight concatenation.
pub fn mixture(parts: &[(f64, &Measure)]) -> Result<Measure, Error> {
    let mut out_dim = None;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (lam, m) in parts {
        match m {
            Measure::Empirical { dim, coords: c, weights: w } => {
                if *out_dim.get_or_insert(*dim) != *dim {
                    return Err(Error::DomainMismatch);
                }
                coords.extend_from_slice(c);
                weights.extend(w.iter().map(|x| x * lam));
            }
            _ => return Err(Error::UnsupportedVariant("mixtures are formed from empirical measures")),
        }
    }
    Ok(Measure::Empirical { dim: out_dim.unwrap_or(1), coords, weights })
}

pub fn product_measure(mu1: Measure, mu2: Measure) -> Result<Measure, Error> {
    let m = Measure::Product(Box::new(mu1), Box::new(mu2));
    m.validate()?;
    Ok(m)
}

/// Observables on the circle (`dim = 1`) or torus (`dim = 2`).
#[derive(Clone, Copy)]
pub enum Observable<'a> {
    Const(f64),
    /// A coordinate function (0 = x, 1 = y).
    Coord(usize),
    /// Circle harmonic `φ_i`, i ≥ 1.
    Harmonic(usize),
    /// `φ_a(x) φ_b(y)`, index 0 standing for the constant 1.
    TorusHarmonic(usize, usize),
    /// `log f'` of a circle map.
    LogDeriv(&'a CircleMap),
    /// `log |det Df|`.
    LogDet(&'a SystemMap),
    /// `ψ = −log |det Df|`.
    Potential(&'a SystemMap),
    /// Arbitrary continuous function with a Lipschitz bound.
    Func { f: &'a (dyn Fn(&[f64]) -> f64 + Sync), lip: f64, dim: usize },
}

impl core::fmt::Debug for Observable<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Observable::Const(c) => write!(f, "Const({c})"),
            Observable::Coord(i) => write!(f, "Coord({i})"),
            Observable::Harmonic(i) => write!(f, "Harmonic({i})"),
            Observable::TorusHarmonic(a, b) => write!(f, "TorusHarmonic({a}, {b})"),
            Observable::LogDeriv(_) => f.write_str("LogDeriv"),
            Observable::LogDet(_) => f.write_str("LogDet"),
            Observable::Potential(_) => f.write_str("Potential"),
            Observable::Func { lip, dim, .. } => write!(f, "Func(lip = {lip}, dim = {dim})"),
        }
    }
}

/// Circle harmonic `φ_i(x)`: `(1 + cos πmx)/2` for odd i, `(1 + sin πmx)/2`
/// for even i, where `m = ⌈i/2⌉`.
#[inline]
pub fn harmonic(i: usize, x: f64) -> f64 {
    if i == 0 {
        return 1.0;
    }
    let m = i.div_ceil(2) as f64;
    let a = PI * m * x;
    if i % 2 == 1 {
        0.5 * (1.0 + libm::cos(a))
    } else {
        0.5 * (1.0 + libm::sin(a))
    }
}

/// `out[i] = φ_i(x)` for i = 0..out.len() (with `φ_0 = 1`), by the angle
/// addition recurrence.
pub fn harmonics_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    let (s1, c1) = (libm::sin(PI * x), libm::cos(PI * x));
    let (mut s, mut c) = (s1, c1);
    let mut i = 1;
    while i < out.len() {
        out[i] = 0.5 * (1.0 + c);
        if i + 1 < out.len() {
            out[i + 1] = 0.5 * (1.0 + s);
        }
        let cn = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = cn;
        i += 2;
    }
}

/// Lipschitz constant of `φ_i`.
#[inline]
pub fn harmonic_lip(i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        PI * i.div_ceil(2) as f64 / 2.0
    }
}

/// Integral value with an error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
}

impl Integral {
    fn exact(value: f64) -> Self {
        Integral { value, error_bound: 0.0 }
    }
}

impl Observable<'_> {
    /// Required dimension, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Observable::Const(_) => None,
            Observable::Coord(i) => Some(if *i == 0 { 1 } else { 2 }),
            Observable::Harmonic(_) | Observable::LogDeriv(_) => Some(1),
            Observable::TorusHarmonic(..) => Some(2),
            Observable::LogDet(m) | Observable::Potential(m) => Some(m.dim()),
            Observable::Func { dim, .. } => Some(*dim),
        }
    }

    #[inline]
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Observable::Const(c) => *c,
            Observable::Coord(i) => p[*i],
            Observable::Harmonic(i) => harmonic(*i, p[0]),
            Observable::TorusHarmonic(a, b) => harmonic(*a, p[0]) * harmonic(*b, p[1]),
            Observable::LogDeriv(f) => libm::log(f.deriv(p[0])),
            Observable::LogDet(m) => m.log_det(p),
            Observable::Potential(m) => -m.log_det(p),
            Observable::Func { f, .. } => f(p),
        }
    }

    fn lip(&self) -> f64 {
        match self {
            Observable::Const(_) => 0.0,
            Observable::Coord(_) => 1.0,
            Observable::Harmonic(i) => harmonic_lip(*i),
            Observable::TorusHarmonic(a, b) => harmonic_lip(*a) + harmonic_lip(*b),
            Observable::LogDeriv(f) => sampled_lip(|x| libm::log(f.deriv(x))),
            Observable::LogDet(m) | Observable::Potential(m) => match m {
                SystemMap::Circle(f) => sampled_lip(|x| libm::log(f.deriv(x))),
                SystemMap::Torus(t) => {
                    sampled_lip(|x| libm::log(t.f1.deriv(x))) + sampled_lip(|x| libm::log(t.f2.deriv(x)))
                }
            },
            Observable::Func { lip, .. } => *lip,
        }
    }

    /// Exact constant value of the observable on the Cantor set `skel`, when
    /// one is known.
    fn constant_on(&self, skel: &Arc<BowenSkeleton>) -> Option<f64> {
        let log_deriv = |f: &CircleMap| {
            if f.wires_skeleton(skel) {
                Some(LN_2)
            } else {
                f.constant_derivative().map(libm::log)
            }
        };
        match self {
            Observable::Const(c) => Some(*c),
            Observable::Harmonic(0) => Some(1.0),
            Observable::LogDeriv(f) => log_deriv(f),
            Observable::LogDet(SystemMap::Circle(f)) => log_deriv(f),
            Observable::Potential(SystemMap::Circle(f)) => log_deriv(f).map(|v| -v),
            _ => None,
        }
    }
}

/// Lipschitz estimate from finite differences on a 4096-cell grid.
fn sampled_lip<F: Fn(f64) -> f64>(g: F) -> f64 {
    let n = 4096;
    let h = 2.0 / n as f64;
    let mut prev = g(-1.0);
    let mut best: f64 = 0.0;
    for i in 1..=n {
        let x = -1.0 + h * i as f64;
        let v = g(x.min(1.0));
        best = best.max(libm::fabs(v - prev) / h);
        prev = v;
    }
    best
}

/// Panels for the coarse rule; the fine rule doubles them.
const GL_PANELS: usize = 8;

/// Subintervals on which the observable is smooth (branch domains for
/// map-derived observables), clipped to `iv`, with their length fraction.
fn smooth_cells(obs: &Observable<'_>, iv: Interval) -> Vec<Interval> {
    let f = match obs {
        Observable::LogDeriv(f) => Some(*f),
        Observable::LogDet(SystemMap::Circle(f)) | Observable::Potential(SystemMap::Circle(f)) => Some(f),
        _ => None,
    };
    match f {
        Some(f) => f
            .branches()
            .iter()
            .filter_map(|b| {
                let d = b.domain();
                let lo = d.lo.max(iv.lo);
                let hi = d.hi.min(iv.hi);
                (lo < hi).then(|| Interval::new(lo, hi))
            })
            .collect(),
        None => vec![iv],
    }
}

/// `∫ sign · log f'` over one Bowen branch, summed generation by
/// generation: every gap of one generation carries the same symmetric
/// profile, and so do the resolution atoms.
fn bowen_log_integral(bb: &BowenBranch, panels: usize) -> f64 {
    let s = &bb.skeleton;
    let n_max = s.max_generation();
    let unit = Interval::new(0.0, 1.0);
    let nodes = gauss_legendre_nodes(unit, panels);
    let mean_log = |rho: f64| {
        let e = profile_coeff(rho, 2.0, 2.0);
        let mut acc = KahanSum::new();
        for (t, w) in &nodes {
            acc.add(w * libm::log(2.0 + e * t * (1.0 - t)));
        }
        acc.value()
    };
    let ratios = bb.ratios();
    let mut acc = KahanSum::new();
    for g in 1..n_max {
        acc.add(libm::ldexp(s.gap_len(g), g as i32 - 1) * mean_log(ratios[g - 1]));
    }
    acc.add(libm::ldexp(s.atom_len(n_max), n_max as i32 - 1) * mean_log(ratios[n_max - 1]));
    acc.value()
}

fn lebesgue_integral(iv: Interval, obs: &Observable<'_>) -> Integral {
    let (map, sign) = match obs {
        Observable::LogDeriv(f) => (Some(*f), 1.0),
        Observable::LogDet(SystemMap::Circle(f)) => (Some(f), 1.0),
        Observable::Potential(SystemMap::Circle(f)) => (Some(f), -1.0),
        _ => (None, 1.0),
    };
    let cells = smooth_cells(obs, iv);
    let rule = |panels: usize| {
        let mut acc = KahanSum::new();
        for c in &cells {
            if let Some(f) = map {
                let bowen = f.branches().iter().find_map(|b| match &b.kind {
                    BranchKind::Bowen(bb) if b.domain() == *c => Some(bb),
                    _ => None,
                });
                if let Some(bb) = bowen {
                    acc.add(sign * bowen_log_integral(bb, panels) / iv.len());
                    continue;
                }
            }
            let frac = c.len() / iv.len();
            for (x, w) in gauss_legendre_nodes(*c, panels) {
                acc.add(frac * w * obs.eval(&[x]));
            }
        }
        acc.value()
    };
    let coarse = rule(GL_PANELS);
    let fine = rule(2 * GL_PANELS);
    Integral { value: fine, error_bound: libm::fabs(fine - coarse) }
}

fn cantor_integral(skel: &Arc<BowenSkeleton>, depth: usize, obs: &Observable<'_>) -> Result<Integral, Error> {
    if let Some(c) = obs.constant_on(skel) {
        return Ok(Integral::exact(c));
    }
    let w = libm::ldexp(1.0, -(depth as i32));
    let mut acc = KahanSum::new();
    skel.for_each_left_endpoint(depth, |x| acc.add(obs.eval(&[x])))?;
    Ok(Integral { value: w * acc.value(), error_bound: obs.lip() * skel.atom_len(depth) })
}

/// `(point, weight)` nodes of a circle measure, with a resolution proxy.
fn circle_nodes(m: &Measure, cap_depth: usize) -> Result<(Vec<(f64, f64)>, f64), Error> {
    Ok(match m {
        Measure::Empirical { dim: 1, coords, weights } => {
            (coords.iter().copied().zip(weights.iter().copied()).collect(), 0.0)
        }
        Measure::Dirac(x) => (vec![(*x, 1.0)], 0.0),
        Measure::LebesgueUniform(iv) => {
            let panels = 2 * GL_PANELS;
            (gauss_legendre_nodes(*iv, panels), iv.len() / (8 * panels) as f64)
        }
        Measure::CantorBernoulli { skeleton, depth, .. } => {
            let d = (*depth).min(cap_depth);
            let w = libm::ldexp(1.0, -(d as i32));
            let mut v = Vec::with_capacity(1 << d);
            skeleton.for_each_left_endpoint(d, |x| v.push((x, w)))?;
            (v, skeleton.atom_len(d))
        }
        _ => return Err(Error::DomainMismatch),
    })
}

fn check_dims(m: &Measure, obs: &Observable<'_>) -> Result<(), Error> {
    match obs.dim() {
        Some(d) if d != m.dim() => Err(Error::DomainMismatch),
        _ => Ok(()),
    }
}

/// `∫ φ dμ` with an error bound.
pub fn integrate(m: &Measure, obs: &Observable<'_>) -> Result<Integral, Error> {
    check_dims(m, obs)?;
    if let Observable::Const(c) = obs {
        return Ok(Integral::exact(*c));
    }
    match m {
        Measure::Empirical { dim, coords, weights } => {
            let mut acc = KahanSum::new();
            for (p, w) in coords.chunks_exact(*dim).zip(weights) {
                acc.add(w * obs.eval(p));
            }
            Ok(Integral::exact(acc.value()))
        }
        Measure::Dirac(x) => Ok(Integral::exact(obs.eval(&[*x]))),
        Measure::LebesgueUniform(iv) => Ok(lebesgue_integral(*iv, obs)),
        Measure::CantorBernoulli { skeleton, depth, .. } => cantor_integral(skeleton, *depth, obs),
        Measure::Product(a, b) => product_integral(a, b, obs),
    }
}

fn product_integral(a: &Measure, b: &Measure, obs: &Observable<'_>) -> Result<Integral, Error> {
    let mul = |x: Integral, y: Integral| Integral {
        value: x.value * y.value,
        error_bound: libm::fabs(x.value) * y.error_bound
            + libm::fabs(y.value) * x.error_bound
            + x.error_bound * y.error_bound,
    };
    let add = |x: Integral, y: Integral, sign: f64| Integral {
        value: sign * (x.value + y.value),
        error_bound: x.error_bound + y.error_bound,
    };
    match obs {
        Observable::Const(c) => Ok(Integral::exact(*c)),
        Observable::Coord(0) => integrate(a, &Observable::Coord(0)),
        Observable::Coord(_) => integrate(b, &Observable::Coord(0)),
        Observable::TorusHarmonic(i, j) => {
            Ok(mul(integrate(a, &Observable::Harmonic(*i))?, integrate(b, &Observable::Harmonic(*j))?))
        }
        Observable::LogDet(SystemMap::Torus(t)) | Observable::Potential(SystemMap::Torus(t)) => {
            let sign = if matches!(obs, Observable::Potential(_)) { -1.0 } else { 1.0 };
            Ok(add(integrate(a, &Observable::LogDeriv(&t.f1))?, integrate(b, &Observable::LogDeriv(&t.f2))?, sign))
        }
        _ => {
            let (na, ra) = circle_nodes(a, 12)?;
            let (nb, rb) = circle_nodes(b, 12)?;
            let mut acc = KahanSum::new();
            for (x, wx) in &na {
                for (y, wy) in &nb {
                    acc.add(wx * wy * obs.eval(&[*x, *y]));
                }
            }
            Ok(Integral { value: acc.value(), error_bound: obs.lip() * (ra + rb) })
        }
    }
}

/// The weak* test family bound to a system: `φ_0 = ψ`, then harmonics.
#[derive(Clone, Copy)]
pub struct ObservableFamily<'a> {
    pub map: &'a SystemMap,
    pub n_terms: usize,
}

/// Diagonal enumeration of index pairs `(a, b) ≠ (0, 0)`.
pub fn torus_pairs(count: usize) -> Vec<(usize, usize)> {
    torus_pairs_iter().take(count).collect()
}

fn torus_pairs_iter() -> impl Iterator<Item = (usize, usize)> {
    (1usize..).flat_map(|s| (0..=s).map(move |a| (a, s - a)))
}

impl<'a> ObservableFamily<'a> {
    pub fn new(map: &'a SystemMap) -> Self {
        ObservableFamily { map, n_terms: DEFAULT_N_TERMS }
    }

    pub fn with_terms(map: &'a SystemMap, n_terms: usize) -> Self {
        ObservableFamily { map, n_terms: n_terms.max(1) }
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// `2^{−(n_terms−1)}`: bound on the omitted terms.
    pub fn tail_bound(&self) -> f64 {
        libm::ldexp(1.0, -(self.n_terms as i32 - 1))
    }

    pub fn get(&self, i: usize) -> Observable<'a> {
        if i == 0 {
            return Observable::Potential(self.map);
        }
        match self.map {
            SystemMap::Circle(_) => Observable::Harmonic(i),
            SystemMap::Torus(_) => {
                let (a, b) = torus_pairs(i)[i - 1];
                Observable::TorusHarmonic(a, b)
            }
        }
    }

    /// Number of circle harmonics needed to evaluate every member.
    fn circle_len(&self) -> usize {
        match self.map {
            SystemMap::Circle(_) => self.n_terms,
            SystemMap::Torus(_) => {
                let p = torus_pairs(self.n_terms.saturating_sub(1));
                p.iter().map(|(a, b)| (*a).max(*b)).max().unwrap_or(0) + 1
            }
        }
    }

    /// Accumulate `φ_1..φ_{n−1}` and `ψ` along a stream of points; used for
    /// empirical measures built on the fly. `out` has `n_terms` entries and
    /// receives unnormalized sums.
    pub fn accumulate(&self, p: &[f64], weight: f64, scratch: &mut [f64], out: &mut [f64]) {
        out[0] -= weight * self.map.log_det(p);
        self.accumulate_harmonics(p, weight, scratch, out);
    }

    /// Like [`accumulate`](Self::accumulate) but with a known `log|det Df|`.
    #[inline]
    pub fn accumulate_with_log_det(&self, p: &[f64], log_det: f64, weight: f64, scratch: &mut [f64], out: &mut [f64]) {
        out[0] -= weight * log_det;
        self.accumulate_harmonics(p, weight, scratch, out);
    }

    #[inline]
    fn accumulate_harmonics(&self, p: &[f64], weight: f64, scratch: &mut [f64], out: &mut [f64]) {
        match self.map {
            SystemMap::Circle(_) => {
                harmonics_into(p[0], &mut scratch[..self.n_terms]);
                for i in 1..self.n_terms {
                    out[i] += weight * scratch[i];
                }
            }
            SystemMap::Torus(_) => {
                let k = self.circle_len();
                let (hx, hy) = scratch.split_at_mut(k);
                harmonics_into(p[0], hx);
                harmonics_into(p[1], &mut hy[..k]);
                for (i, (a, b)) in torus_pairs_iter().take(self.n_terms - 1).enumerate() {
                    out[i + 1] += weight * hx[a] * hy[b];
                }
            }
        }
    }

    /// Scratch length needed by [`accumulate`](Self::accumulate).
    pub fn scratch_len(&self) -> usize {
        2 * self.circle_len().max(self.n_terms)
    }

    /// `∫ φ_i dμ` for every member.
    pub fn integrals(&self, m: &Measure) -> Result<Vec<Integral>, Error> {
        if m.dim() != self.dim() {
            return Err(Error::DomainMismatch);
        }
        let mut out = Vec::with_capacity(self.n_terms);
        out.push(integrate(m, &Observable::Potential(self.map))?);
        match (self.map, m) {
            (SystemMap::Circle(_), _) => {
                let h = circle_harmonic_integrals(m, self.n_terms)?;
                out.extend_from_slice(&h[1..]);
            }
            (SystemMap::Torus(_), Measure::Product(a, b)) => {
                let k = self.circle_len();
                let ha = circle_harmonic_integrals(a, k)?;
                let hb = circle_harmonic_integrals(b, k)?;
                for (i, j) in torus_pairs(self.n_terms - 1) {
                    let (x, y) = (ha[i], hb[j]);
                    out.push(Integral {
                        value: x.value * y.value,
                        error_bound: x.value.abs() * y.error_bound
                            + y.value.abs() * x.error_bound
                            + x.error_bound * y.error_bound,
                    });
                }
            }
            (SystemMap::Torus(_), _) => {
                for i in 1..self.n_terms {
                    out.push(integrate(m, &self.get(i))?);
                }
            }
        }
        Ok(out)
    }
}

/// Harmonic sums `Σ w φ_i(x)` over the nodes produced by `visit`.
fn harmonic_sums<V>(k: usize, visit: V) -> Result<Vec<KahanSum>, Error>
where
    V: FnOnce(&mut dyn FnMut(f64, f64)) -> Result<(), Error>,
{
    let mut h = vec![0.0; k];
    let mut sums = vec![KahanSum::new(); k];
    visit(&mut |x, w| {
        harmonics_into(x, &mut h);
        for (s, v) in sums.iter_mut().zip(h.iter()) {
            s.add(w * v);
        }
    })?;
    Ok(sums)
}

/// `∫ φ_i dμ`, i = 0..k, for a circle measure in one pass over its nodes.
fn circle_harmonic_integrals(m: &Measure, k: usize) -> Result<Vec<Integral>, Error> {
    let k = k.max(1);
    let gl = |panels: usize, iv: Interval| {
        move |g: &mut dyn FnMut(f64, f64)| {
            for (x, w) in gauss_legendre_nodes(iv, panels) {
                g(x, w);
            }
            Ok(())
        }
    };
    match m {
        Measure::LebesgueUniform(iv) => {
            let coarse = harmonic_sums(k, gl(GL_PANELS, *iv))?;
            let fine = harmonic_sums(k, gl(2 * GL_PANELS, *iv))?;
            Ok(fine
                .iter()
                .zip(coarse.iter())
                .map(|(f, c)| Integral { value: f.value(), error_bound: libm::fabs(f.value() - c.value()) })
                .collect())
        }
        Measure::CantorBernoulli { skeleton, depth, .. } => {
            let w = libm::ldexp(1.0, -(*depth as i32));
            let sums = harmonic_sums(k, |g| skeleton.for_each_left_endpoint(*depth, |x| g(x, 1.0)))?;
            let res = skeleton.atom_len(*depth);
            Ok(sums
                .iter()
                .enumerate()
                .map(|(i, s)| Integral { value: w * s.value(), error_bound: harmonic_lip(i) * res })
                .collect())
        }
        Measure::Empirical { dim: 1, coords, weights } => {
            let sums = harmonic_sums(k, |g| {
                for (x, w) in coords.iter().zip(weights) {
                    g(*x, *w);
                }
                Ok(())
            })?;
            Ok(sums.iter().map(|s| Integral::exact(s.value())).collect())
        }
        Measure::Dirac(x) => {
            let mut h = vec![0.0; k];
            harmonics_into(*x, &mut h);
            Ok(h.iter().map(|v| Integral::exact(*v)).collect())
        }
        _ => Err(Error::DomainMismatch),
    }
}

/// Value of the truncated weak* series with its bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistStar {
    pub value: f64,
    /// Bound on the omitted terms.
    pub tail_bound: f64,
    /// Bound from the integration errors of the retained terms.
    pub integration_error: f64,
}

/// `Σ 2^{-i} |a_i − b_i|` over precomputed family integrals.
#[inline]
pub fn dist_from_integrals(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    let mut scale = 1.0;
    for (x, y) in a.iter().zip(b) {
        acc.add(scale * libm::fabs(x - y));
        scale *= 0.5;
    }
    acc.value()
}

/// Bring Cantor–Bernoulli measures on the same skeleton to a common depth.
fn align(mu: &Measure, nu: &Measure) -> (Measure, Measure) {
    match (mu, nu) {
        (
            Measure::CantorBernoulli { skeleton: s1, symbols: y1, depth: d1 },
            Measure::CantorBernoulli { skeleton: s2, symbols: y2, depth: d2 },
        ) if Arc::ptr_eq(s1, s2) => {
            let d = (*d1).min(*d2);
            (
                Measure::CantorBernoulli { skeleton: s1.clone(), symbols: *y1, depth: d },
                Measure::CantorBernoulli { skeleton: s2.clone(), symbols: *y2, depth: d },
            )
        }
        (Measure::Product(a1, b1), Measure::Product(a2, b2)) => {
            let (a1, a2) = align(a1, a2);
            let (b1, b2) = align(b1, b2);
            (Measure::Product(Box::new(a1), Box::new(b1)), Measure::Product(Box::new(a2), Box::new(b2)))
        }
        _ => (mu.clone(), nu.clone()),
    }
}

/// Truncated weak* distance between two measures.
pub fn weak_star_dist(mu: &Measure, nu: &Measure, family: &ObservableFamily<'_>) -> Result<DistStar, Error> {
    let (mu, nu) = align(mu, nu);
    let a = family.integrals(&mu)?;
    let b = family.integrals(&nu)?;
    let av: Vec<f64> = a.iter().map(|i| i.value).collect();
    let bv: Vec<f64> = b.iter().map(|i| i.value).collect();
    let mut err = 0.0;
    let mut scale = 1.0;
    for (x, y) in a.iter().zip(&b) {
        err += scale * (x.error_bound + y.error_bound);
        scale *= 0.5;
    }
    Ok(DistStar { value: dist_from_integrals(&av, &bv), tail_bound: family.tail_bound(), integration_error: err })
}

/// Forward image `f_* μ`.
pub fn pushforward(map: &SystemMap, m: &Measure) -> Result<Measure, Error> {
    match (map, m) {
        (_, Measure::Empirical { dim, coords, weights }) => {
            if *dim != map.dim() {
                return Err(Error::DomainMismatch);
            }
            let mut out = coords.clone();
            for p in out.chunks_exact_mut(*dim) {
                map.step(p);
            }
            Ok(Measure::Empirical { dim: *dim, coords: out, weights: weights.clone() })
        }
        (SystemMap::Circle(f), Measure::Dirac(x)) => Ok(Measure::Dirac(f.eval(*x))),
        (SystemMap::Circle(f), Measure::CantorBernoulli { skeleton, symbols, depth }) => {
            if *depth >= 1 && shift_bookkeeping_holds(f, skeleton, *depth) {
                Ok(Measure::CantorBernoulli { skeleton: skeleton.clone(), symbols: *symbols, depth: depth - 1 })
            } else {
                if *depth > 20 {
                    return Err(Error::UnsupportedVariant("pushforward of a non-invariant deep Cantor measure"));
                }
                let (nodes, _) = circle_nodes(m, *depth)?;
                Ok(Measure::Empirical {
                    dim: 1,
                    coords: nodes.iter().map(|(x, _)| f.eval(*x)).collect(),
                    weights: nodes.iter().map(|(_, w)| *w).collect(),
                })
            }
        }
        (SystemMap::Torus(t), Measure::Product(a, b)) => {
            let fa = pushforward(&SystemMap::Circle(t.f1.clone()), a)?;
            let fb = pushforward(&SystemMap::Circle(t.f2.clone()), b)?;
            Ok(Measure::Product(Box::new(fa), Box::new(fb)))
        }
        (_, Measure::LebesgueUniform(_)) => Err(Error::UnsupportedVariant("pushforward of Lebesgue")),
        _ => Err(Error::DomainMismatch),
    }
}

/// `f(lo_{a w}) = lo_w` for all words `a w` up to length `min(depth, 10)`.
fn shift_bookkeeping_holds(f: &CircleMap, skel: &BowenSkeleton, depth: usize) -> bool {
    let n = depth.min(10).min(skel.max_generation());
    for bits in 0..(1u64 << n) {
        let Ok(w) = Word::new(bits, n) else { return false };
        let (Ok(src), Ok(dst)) = (skel.atom_interval(&w), skel.atom_interval(&w.shift())) else {
            return false;
        };
        if circle_dist(f.eval(src.lo), dst.lo) > 1e-12 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_builder::{build_doubling, build_example1, Example1Spec};

    #[test]
    fn harmonic_recurrence_matches_direct() {
        let mut h = [0.0; 33];
        for &x in &[-1.0, -0.3, 0.0, 0.41, 0.999] {
            harmonics_into(x, &mut h);
            for (i, v) in h.iter().enumerate() {
                assert!((v - harmonic(i, x)).abs() < 1e-13, "i={i} x={x}");
            }
        }
    }

    #[test]
    fn unit_mass_everywhere() {
        let sys = build_example1(&Example1Spec::default()).unwrap();
        let ms = [
            Measure::lebesgue(),
            Measure::Dirac(0.3),
            Measure::mu_k(&sys.carriers[0], 10).unwrap(),
            empirical_from_orbit(&sys.map, &[0.1], 7).unwrap(),
            Measure::lebesgue_torus(),
        ];
        for m in &ms {
            assert_eq!(integrate(m, &Observable::Const(1.0)).unwrap().value, 1.0);
        }
    }

    #[test]
    fn lebesgue_symmetry() {
        let r = integrate(&Measure::lebesgue(), &Observable::Coord(0)).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn potential_on_k_is_exact() {
        let sys = build_example1(&Example1Spec::default()).unwrap();
        let mu = Measure::mu_k(&sys.carriers[0], 16).unwrap();
        let r = integrate(&mu, &Observable::Potential(&sys.map)).unwrap();
        assert_eq!(r, Integral { value: -LN_2, error_bound: 0.0 });
    }

    #[test]
    fn dirac_pushforward_at_fixed_point() {
        let sys = build_doubling();
        match pushforward(&sys.map, &Measure::Dirac(0.0)).unwrap() {
            Measure::Dirac(x) => assert_eq!(x, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let sys = build_doubling();
        let e = integrate(&Measure::lebesgue_torus(), &Observable::Harmonic(1)).unwrap_err();
        assert_eq!(e, Error::DomainMismatch);
        let fam = ObservableFamily::new(&sys.map);
        assert!(fam.integrals(&Measure::lebesgue_torus()).is_err());
    }

    #[test]
    fn torus_pairs_diagonal() {
        assert_eq!(torus_pairs(5), vec![(0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
    }
}
