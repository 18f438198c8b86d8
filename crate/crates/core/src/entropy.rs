//! Partition entropy, cylinder tables, entropy rates, Lyapunov integrals,
//! the Pesin defect and distortion diagnostics.
//!
//! Cylinder words are packed into a `u64` in base `alphabet`, first symbol
//! most significant. Counts are stored densely while `alphabet^n ≤ 2^20` and
//! in a `BTreeMap` beyond that.
//!
//! The natural partition by map branches is used as the generating
//! partition: cylinder diameters shrink like `λ^{-n}`, so no explicit
//! expansivity constant is needed.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use rand_core::RngCore;

use crate::cantor_skeleton::Word;
use crate::map_builder::{BuiltSystem, CantorCarrier, SystemKind, SystemMap};
use crate::measures::{integrate, pushforward, weak_star_dist, Measure, Observable, ObservableFamily};
use crate::numeric::KahanSum;
use crate::piecewise_map::{BranchKind, CircleMap};
use crate::Error;

const DENSE_LIMIT: u64 = 1 << 20;

/// `−Σ p ln p` with `0 ln 0 = 0`.
pub fn partition_entropy<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    let mut acc = KahanSum::new();
    for p in masses {
        if p > 0.0 {
            acc.add(-p * libm::log(p));
        }
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq)]
enum Store {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u64, u64>),
}

/// Sliding-window word counts of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderCounter {
    n: usize,
    alphabet: u64,
    total: u64,
    store: Store,
}

fn checked_pow(base: u64, n: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

impl CylinderCounter {
    pub fn new(alphabet: usize, n: usize) -> Result<Self, Error> {
        let alphabet = alphabet.max(1) as u64;
        let size = checked_pow(alphabet, n).ok_or(Error::WordTooLong { len: n, max: 0 })?;
        let store = if size <= DENSE_LIMIT { Store::Dense(vec![0; size as usize]) } else { Store::Sparse(BTreeMap::new()) };
        Ok(CylinderCounter { n, alphabet, total: 0, store })
    }

    #[inline]
    pub fn add(&mut self, code: u64, count: u64) {
        self.total += count;
        match &mut self.store {
            Store::Dense(v) => v[code as usize] += count,
            Store::Sparse(m) => *m.entry(code).or_insert(0) += count,
        }
    }

    /// Merge counts of another counter of the same shape.
    pub fn merge(&mut self, other: &CylinderCounter) {
        match &other.store {
            Store::Dense(v) => {
                for (code, &c) in v.iter().enumerate() {
                    if c > 0 {
                        self.add(code as u64, c);
                    }
                }
            }
            Store::Sparse(m) => {
                for (&code, &c) in m {
                    self.add(code, c);
                }
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn finish(&self) -> CylinderTable {
        let t = self.total.max(1) as f64;
        let masses = match &self.store {
            Store::Dense(v) => v.iter().enumerate().filter(|(_, c)| **c > 0).map(|(k, c)| (k as u64, *c as f64 / t)).collect(),
            Store::Sparse(m) => m.iter().map(|(k, c)| (*k, *c as f64 / t)).collect(),
        };
        CylinderTable { n: self.n, alphabet: self.alphabet as usize, samples: self.total, masses }
    }
}

/// Word masses for one word length. Only positive masses are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderTable {
    pub n: usize,
    pub alphabet: usize,
    /// Number of windows behind an empirical table (0 for exact tables).
    pub samples: u64,
    pub masses: Vec<(u64, f64)>,
}

impl CylinderTable {
    pub fn entropy(&self) -> f64 {
        partition_entropy(self.masses.iter().map(|m| m.1))
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.masses.iter().map(|m| m.1))
    }

    pub fn distinct(&self) -> usize {
        self.masses.len()
    }

    /// Distinct words exceed a tenth of the sample count.
    pub fn undersampled(&self) -> bool {
        self.samples > 0 && self.distinct() as u64 * 10 > self.samples
    }

    /// Decode a packed word into symbols.
    pub fn decode(&self, code: u64) -> Vec<u16> {
        let mut out = vec![0u16; self.n];
        let mut c = code;
        for slot in out.iter_mut().rev() {
            *slot = (c % self.alphabet as u64) as u16;
            c /= self.alphabet as u64;
        }
        out
    }
}

/// μ_K cylinder table: the `2^n` words over the carrier's two symbols, each
/// of mass `2^{-n}`.
pub fn cylinder_table_symbolic(measure: &Measure, n: usize, alphabet: usize) -> Result<CylinderTable, Error> {
    let (symbols, depth) = match measure {
        Measure::CantorBernoulli { symbols, depth, .. } => (*symbols, *depth),
        _ => return Err(Error::UnsupportedVariant("symbolic tables need a Cantor-Bernoulli measure")),
    };
    if n > depth || n > 30 {
        return Err(Error::DepthExceeded { requested: n, available: depth.min(30) });
    }
    let a = alphabet.max(symbols[0].max(symbols[1]) as usize + 1) as u64;
    let mass = libm::ldexp(1.0, -(n as i32));
    let mut masses: Vec<(u64, f64)> = (0..(1u64 << n))
        .map(|bits| {
            let mut code = 0u64;
            for j in (0..n).rev() {
                code = code * a + symbols[((bits >> j) & 1) as usize] as u64;
            }
            (code, mass)
        })
        .collect();
    masses.sort_by_key(|m| m.0);
    Ok(CylinderTable { n, alphabet: a as usize, samples: 0, masses })
}

/// Product of two symbolic tables over the joint alphabet `a1 * a2`.
pub fn cylinder_table_product(t1: &CylinderTable, t2: &CylinderTable) -> CylinderTable {
    let a2 = t2.alphabet as u64;
    let a = (t1.alphabet * t2.alphabet) as u64;
    let mut masses = Vec::with_capacity(t1.masses.len() * t2.masses.len());
    for (c1, m1) in &t1.masses {
        let w1 = t1.decode(*c1);
        for (c2, m2) in &t2.masses {
            let w2 = t2.decode(*c2);
            let code = w1.iter().zip(&w2).fold(0u64, |acc, (s1, s2)| acc * a + *s1 as u64 * a2 + *s2 as u64);
            masses.push((code, m1 * m2));
        }
    }
    masses.sort_by_key(|m| m.0);
    CylinderTable { n: t1.n, alphabet: a as usize, samples: 0, masses }
}

/// Word counts of lengths `1..=n_max` along itineraries, plus Birkhoff sums
/// of `log|det Df|` over the same points.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitStats {
    pub counters: Vec<CylinderCounter>,
    pub log_det_sum: f64,
    pub steps: u64,
}

impl OrbitStats {
    pub fn new(alphabet: usize, n_max: usize) -> Result<Self, Error> {
        let counters = (1..=n_max).map(|n| CylinderCounter::new(alphabet, n)).collect::<Result<_, _>>()?;
        Ok(OrbitStats { counters, log_det_sum: 0.0, steps: 0 })
    }

    /// Merge in a fixed order so that results do not depend on scheduling.
    pub fn merge(&mut self, other: &OrbitStats) {
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            a.merge(b);
        }
        let mut s = KahanSum::new();
        s.add(self.log_det_sum);
        s.add(other.log_det_sum);
        self.log_det_sum = s.value();
        self.steps += other.steps;
    }

    pub fn birkhoff_mean(&self) -> f64 {
        self.log_det_sum / self.steps.max(1) as f64
    }

    pub fn tables(&self) -> Vec<CylinderTable> {
        self.counters.iter().map(CylinderCounter::finish).collect()
    }

    /// Feed one itinerary.
    pub fn add_itinerary(&mut self, symbols: &[u32]) {
        let n_max = self.counters.len();
        let Some(first) = self.counters.first() else { return };
        let a = first.alphabet;
        // highest place value kept in a window of length n is a^(n-1)
        let keep: Vec<u64> = (1..=n_max).map(|n| checked_pow(a, n - 1).unwrap_or(u64::MAX)).collect();
        let mut codes = vec![0u64; n_max];
        for (t, &s) in symbols.iter().enumerate() {
            for (k, c) in self.counters.iter_mut().enumerate() {
                codes[k] = (codes[k] % keep[k]) * a + s as u64;
                if t >= k {
                    c.add(codes[k], 1);
                }
            }
        }
    }
}

pub use crate::numeric::unit_f64;

/// Run a pseudo-orbit of length `len` from `x0`, perturbing every iterate by
/// a uniform kick of size `jitter` (no kick when `jitter == 0`), and collect
/// cylinder counts and the Birkhoff sum.
pub fn orbit_statistics<R: RngCore + ?Sized>(
    map: &SystemMap,
    x0: &[f64],
    len: usize,
    n_max: usize,
    jitter: f64,
    rng: &mut R,
) -> Result<OrbitStats, Error> {
    let mut stats = OrbitStats::new(map.alphabet(), n_max)?;
    let dim = map.dim();
    let mut p = [0.0; 2];
    p[..dim].copy_from_slice(x0);
    let mut symbols = Vec::with_capacity(len);
    let mut acc = KahanSum::new();
    for _ in 0..len {
        let (ld, s) = map.step(&mut p[..dim]);
        acc.add(ld);
        symbols.push(s);
        crate::numeric::kick(&mut p[..dim], jitter, rng);
    }
    stats.add_itinerary(&symbols);
    stats.log_det_sum = acc.value();
    stats.steps = len as u64;
    Ok(stats)
}

/// `(1/n) Σ log|det Df(f^j x0)|` along the exact orbit.
pub fn birkhoff_lyapunov(map: &SystemMap, x0: &[f64], n: usize) -> f64 {
    let dim = map.dim();
    let mut p = [0.0; 2];
    p[..dim].copy_from_slice(x0);
    let mut acc = KahanSum::new();
    for _ in 0..n {
        acc.add(map.step(&mut p[..dim]).0);
    }
    acc.value() / n.max(1) as f64
}

/// Entropy-rate estimate from tables of lengths `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRate {
    /// `H(n)` for n = 1..=n_max.
    pub block_entropy: Vec<f64>,
    /// `H(n)/n`.
    pub h_sequence: Vec<f64>,
    /// `H(n_max) − H(n_max − 1)`, for empirical tables.
    pub h_increment: Option<f64>,
    pub h_final: f64,
}

pub fn entropy_rate(tables: &[CylinderTable], empirical: bool) -> EntropyRate {
    let block: Vec<f64> = tables.iter().map(CylinderTable::entropy).collect();
    let seq: Vec<f64> = block.iter().zip(tables).map(|(h, t)| h / t.n.max(1) as f64).collect();
    let plug_in = seq.iter().copied().fold(f64::INFINITY, f64::min);
    let inc = if empirical && block.len() >= 2 { Some(block[block.len() - 1] - block[block.len() - 2]) } else { None };
    let h_final = match inc {
        Some(d) => plug_in.min(d),
        None => plug_in,
    };
    let h_final = if h_final.is_finite() { h_final } else { 0.0 };
    EntropyRate { block_entropy: block, h_sequence: seq, h_increment: inc, h_final }
}

/// `∫ log|det Df| dμ`.
pub fn lyapunov_integral(map: &SystemMap, measure: &Measure) -> Result<crate::measures::Integral, Error> {
    integrate(measure, &Observable::LogDet(map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    /// Exact dyadic cylinder masses of μ_K.
    Symbolic,
    /// Cylinder frequencies along (pseudo-)orbits.
    Empirical,
    /// Point mass at a fixed point.
    Dirac,
}

impl EntropyMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EntropyMethod::Symbolic => "symbolic",
            EntropyMethod::Empirical => "empirical",
            EntropyMethod::Dirac => "dirac",
        }
    }

    /// Tolerance for the Ruelle check `defect ≥ −tol`.
    pub fn ruelle_tol(&self) -> f64 {
        match self {
            EntropyMethod::Empirical => 0.02,
            _ => 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PesinOptions {
    pub n_max: usize,
    pub orbit_len: usize,
    pub n_orbits: usize,
    pub jitter: f64,
}

impl Default for PesinOptions {
    fn default() -> Self {
        PesinOptions { n_max: 12, orbit_len: 100_000, n_orbits: 10, jitter: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PesinReport {
    pub method: EntropyMethod,
    pub h_sequence: Vec<f64>,
    pub h_increment: Option<f64>,
    pub h_final: f64,
    pub lyap: f64,
    pub lyap_error: f64,
    /// `lyap − h_final`; Pesin's formula holds when it vanishes.
    pub defect: f64,
    /// `h + ∫ψ dμ = −defect`.
    pub pressure: f64,
    /// `dist*(f_* μ, μ)` when computable.
    pub invariance_residual: Option<f64>,
    pub ruelle_ok: bool,
    pub warnings: Vec<String>,
}

impl PesinReport {
    fn assemble(
        method: EntropyMethod,
        rate: EntropyRate,
        lyap: f64,
        lyap_error: f64,
        invariance_residual: Option<f64>,
        mut warnings: Vec<String>,
    ) -> Self {
        let defect = lyap - rate.h_final;
        let ruelle_ok = defect >= -method.ruelle_tol();
        if !ruelle_ok {
            warnings.push(alloc::format!("Ruelle inequality violated beyond tolerance: defect = {defect}"));
        }
        PesinReport {
            method,
            h_sequence: rate.h_sequence,
            h_increment: rate.h_increment,
            h_final: rate.h_final,
            lyap,
            lyap_error,
            defect,
            pressure: -defect,
            invariance_residual,
            ruelle_ok,
            warnings,
        }
    }
}

fn note(w: &mut Vec<String>, s: &str) {
    w.push(String::from(s));
}

fn invariance(sys: &BuiltSystem, m: &Measure) -> Option<f64> {
    let family = ObservableFamily::new(&sys.map);
    let pushed = pushforward(&sys.map, m).ok()?;
    weak_star_dist(&pushed, m, &family).ok().map(|d| d.value)
}

/// Pesin report for μ_K or a product of μ_K's, using exact cylinder masses.
pub fn pesin_symbolic(sys: &BuiltSystem, measure: &Measure, n_max: usize) -> Result<PesinReport, Error> {
    let tables: Vec<CylinderTable> = match measure {
        Measure::CantorBernoulli { depth, .. } => {
            let n_max = n_max.min(*depth).max(1);
            (1..=n_max).map(|n| cylinder_table_symbolic(measure, n, sys.map.alphabet())).collect::<Result<_, _>>()?
        }
        Measure::Product(a, b) => {
            let (a1, a2) = match &sys.map {
                SystemMap::Torus(t) => (t.f1.alphabet(), t.f2.alphabet()),
                _ => return Err(Error::DomainMismatch),
            };
            let n_max = n_max.min(6).max(1);
            (1..=n_max)
                .map(|n| Ok(cylinder_table_product(&cylinder_table_symbolic(a, n, a1)?, &cylinder_table_symbolic(b, n, a2)?)))
                .collect::<Result<_, Error>>()?
        }
        _ => return Err(Error::UnsupportedVariant("symbolic entropy needs Cantor-Bernoulli measures")),
    };
    let rate = entropy_rate(&tables, false);
    let ly = lyapunov_integral(&sys.map, measure)?;
    let mut warnings = Vec::new();
    if ly.error_bound > 0.0 {
        note(&mut warnings, "log-derivative is not known to be constant on the Cantor set; integral is approximate");
    }
    Ok(PesinReport::assemble(EntropyMethod::Symbolic, rate, ly.value, ly.error_bound, invariance(sys, measure), warnings))
}

fn on_breakpoint(f: &CircleMap, x: f64) -> bool {
    x == -1.0 || x == 1.0 || f.branches().iter().any(|b| b.domain().lo == x)
}

/// Pesin report for a point mass; entropy is zero.
pub fn pesin_dirac(sys: &BuiltSystem, point: &[f64]) -> Result<PesinReport, Error> {
    let mut warnings = Vec::new();
    let mut p = [0.0; 2];
    let dim = sys.map.dim();
    if point.len() != dim {
        return Err(Error::DomainMismatch);
    }
    p[..dim].copy_from_slice(point);
    let ld = sys.map.log_det(&p[..dim]);
    let mut img = p;
    sys.map.step(&mut img[..dim]);
    if img[..dim] != p[..dim] {
        note(&mut warnings, "point is not fixed; the Dirac measure is not invariant");
    }
    let boundary = match &sys.map {
        SystemMap::Circle(f) => on_breakpoint(f, p[0]),
        SystemMap::Torus(t) => on_breakpoint(&t.f1, p[0]) || on_breakpoint(&t.f2, p[1]),
    };
    if boundary {
        note(&mut warnings, "point lies on a partition boundary; excluded from continuity tests");
    }
    let residual = if dim == 1 {
        let family = ObservableFamily::new(&sys.map);
        weak_star_dist(&Measure::Dirac(img[0]), &Measure::Dirac(p[0]), &family).ok().map(|d| d.value)
    } else {
        let family = ObservableFamily::new(&sys.map);
        let a = Measure::Product(alloc::boxed::Box::new(Measure::Dirac(img[0])), alloc::boxed::Box::new(Measure::Dirac(img[1])));
        let b = Measure::Product(alloc::boxed::Box::new(Measure::Dirac(p[0])), alloc::boxed::Box::new(Measure::Dirac(p[1])));
        weak_star_dist(&a, &b, &family).ok().map(|d| d.value)
    };
    let rate = EntropyRate { block_entropy: vec![0.0], h_sequence: vec![0.0], h_increment: None, h_final: 0.0 };
    Ok(PesinReport::assemble(EntropyMethod::Dirac, rate, ld, 0.0, residual, warnings))
}

/// Pesin report from merged orbit statistics. `diagnostic` carries a
/// quadrature value of the Lyapunov integral, reported as a warning only.
pub fn pesin_from_orbits(stats: &OrbitStats, diagnostic: Option<f64>) -> PesinReport {
    let mut tables = stats.tables();
    let mut warnings = Vec::new();
    // long words the orbit cannot resolve would drag the estimate down
    let usable = tables.iter().take_while(|t| !t.undersampled()).count().max(1);
    if usable < tables.len() {
        warnings.push(alloc::format!(
            "undersampled beyond word length {usable} (distinct words exceed a tenth of the windows); rate uses n <= {usable}"
        ));
        tables.truncate(usable);
    }
    let rate = entropy_rate(&tables, true);
    note(&mut warnings, "pseudo-orbit statistics: every iterate carries a small uniform kick");
    if let Some(q) = diagnostic {
        warnings.push(alloc::format!("quadrature of log|det Df| against the start measure: {q:?}"));
    }
    PesinReport::assemble(EntropyMethod::Empirical, rate, stats.birkhoff_mean(), 0.0, None, warnings)
}

/// Sequential dispatcher over measure variants. Lebesgue measures are
/// handled through `opts.n_orbits` jittered orbits from uniform starts drawn
/// from `rng`.
pub fn pesin_defect<R: RngCore + ?Sized>(
    sys: &BuiltSystem,
    measure: &Measure,
    opts: &PesinOptions,
    rng: &mut R,
) -> Result<PesinReport, Error> {
    match measure {
        Measure::CantorBernoulli { .. } => pesin_symbolic(sys, measure, opts.n_max),
        Measure::Product(a, b) if matches!(**a, Measure::CantorBernoulli { .. }) && matches!(**b, Measure::CantorBernoulli { .. }) => {
            pesin_symbolic(sys, measure, opts.n_max)
        }
        Measure::Dirac(x) => pesin_dirac(sys, &[*x]),
        Measure::Product(a, b) if matches!((&**a, &**b), (Measure::Dirac(_), Measure::Dirac(_))) => {
            let (Measure::Dirac(x), Measure::Dirac(y)) = (&**a, &**b) else { unreachable!() };
            pesin_dirac(sys, &[*x, *y])
        }
        Measure::Empirical { dim, coords, weights } => {
            if *dim != sys.map.dim() {
                return Err(Error::DomainMismatch);
            }
            let mut stats = OrbitStats::new(sys.map.alphabet(), opts.n_max)?;
            let mut syms = Vec::with_capacity(weights.len());
            for p in coords.chunks_exact(*dim) {
                let mut q = [0.0; 2];
                q[..*dim].copy_from_slice(p);
                syms.push(sys.map.step(&mut q[..*dim]).1);
            }
            stats.add_itinerary(&syms);
            let ly = lyapunov_integral(&sys.map, measure)?;
            stats.log_det_sum = ly.value * weights.len() as f64;
            stats.steps = weights.len() as u64;
            let mut r = pesin_from_orbits(&stats, None);
            r.invariance_residual = invariance(sys, measure);
            Ok(r)
        }
        Measure::LebesgueUniform(_) | Measure::Product(..) => {
            let dim = measure.dim();
            if dim != sys.map.dim() {
                return Err(Error::DomainMismatch);
            }
            let mut total = OrbitStats::new(sys.map.alphabet(), opts.n_max)?;
            for _ in 0..opts.n_orbits {
                let x0 = [2.0 * unit_f64(rng) - 1.0, 2.0 * unit_f64(rng) - 1.0];
                let s = orbit_statistics(&sys.map, &x0[..dim], opts.orbit_len, opts.n_max, opts.jitter, rng)?;
                total.merge(&s);
            }
            let q = lyapunov_integral(&sys.map, measure).ok().map(|i| i.value);
            Ok(pesin_from_orbits(&total, q))
        }
    }
}

/// `m(A_n)` for n = 1..=n_max: closed form for the middle-thirds set, the
/// skeleton tables (extended analytically past the resolution) for Bowen
/// sets.
pub fn atom_mass_decay(sys: &BuiltSystem, carrier: &CantorCarrier, n_max: usize) -> Result<Vec<f64>, Error> {
    let skel = &carrier.skeleton;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let v = if sys.kind == SystemKind::Affine3 {
            // one rounding: 2^{n+1} and 3^n are exact for n ≤ 33
            libm::ldexp(1.0, n as i32 + 1) / libm::pow(3.0, n as f64)
        } else if n <= skel.max_generation() {
            skel.atom_mass(n)
        } else if let Some(p) = skel.params() {
            let base = skel.atom_mass(1);
            base - crate::numeric::compensated_sum((1..n).map(|j| p.alpha.alpha(j)))
        } else {
            return Err(Error::DepthExceeded { requested: n, available: skel.max_generation() });
        };
        out.push(v);
    }
    Ok(out)
}

/// Extremes of `(G^n)'` over an atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    pub inf: f64,
    pub sup: f64,
    pub ratio: f64,
}

/// Largest derivative of each gap generation's profile (1..N−1), then of
/// the resolution profile.
fn bowen_peak_slopes(f: &CircleMap, carrier: &CantorCarrier) -> Option<Vec<f64>> {
    f.branches().iter().find_map(|b| match &b.kind {
        BranchKind::Bowen(bb) if alloc::sync::Arc::ptr_eq(&bb.skeleton, &carrier.skeleton) => Some(
            bb.ratios()
                .iter()
                .map(|&r| crate::piecewise_map::profile_extrema(2.0, 2.0, crate::piecewise_map::profile_coeff(r, 2.0, 2.0)).1)
                .collect(),
        ),
        _ => None,
    })
}

/// `sup / inf` of `(G^n)'` over the atom `I_word`.
///
/// For Bowen-wired carriers the infimum is the product of derivatives along
/// the orbit of the atom's left endpoint and the supremum is the largest
/// product of peak slopes over `n` consecutive gap generations (symmetric
/// profiles send midpoints to midpoints, so the peaks line up). Other
/// systems are sampled on a 1025-point grid.
pub fn distortion_ratio(sys: &BuiltSystem, carrier: &CantorCarrier, word: &Word) -> Result<Distortion, Error> {
    let f = sys.map.as_circle().ok_or(Error::DomainMismatch)?;
    let skel = &carrier.skeleton;
    let n = word.len();
    let atom = skel.atom_interval(word)?;
    let compose = |x0: f64| {
        let mut x = x0;
        let mut d = 1.0;
        for _ in 0..n {
            let (y, dd) = f.eval_deriv(x);
            d *= dd;
            x = y;
        }
        d
    };
    if f.wires_skeleton(skel) {
        let peaks = bowen_peak_slopes(f, carrier).ok_or(Error::DomainMismatch)?;
        let big_n = skel.max_generation();
        let inf = compose(atom.lo);
        let mut sup: f64 = inf;
        // peaks[g-1] belongs to gap generation g; peaks[big_n-1] is the resolution.
        for j in n..big_n {
            let prod: f64 = (j + 1 - n..=j).map(|g| peaks[g - 1]).product();
            sup = sup.max(prod);
        }
        if n >= 1 {
            let prod: f64 = peaks[big_n - 1] * (big_n + 1 - n..big_n).map(|g| peaks[g - 1]).product::<f64>();
            sup = sup.max(prod);
        }
        return Ok(Distortion { inf, sup, ratio: sup / inf });
    }
    let samples = 1025;
    let mut inf = f64::INFINITY;
    let mut sup: f64 = 0.0;
    for i in 0..samples {
        let x = atom.lo + atom.len() * i as f64 / (samples - 1) as f64;
        let d = compose(x);
        inf = inf.min(d);
        sup = sup.max(d);
    }
    Ok(Distortion { inf, sup, ratio: sup / inf })
}

/// `log 2` as used for exact μ_K integrals.
pub const LOG2: f64 = LN_2;
