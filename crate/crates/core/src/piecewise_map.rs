//! Piecewise-monotone C¹ expanding maps of the circle `[-1, 1]/(-1 ~ 1)` and
//! their products on the torus.
//!
//! A [`CircleMap`] is an ordered list of branches tiling `[-1, 1]`. A branch
//! is either a single [`MonotonePiece`] or a lazily evaluated Bowen branch,
//! which maps one generation-1 atom of a [`BowenSkeleton`] onto the whole
//! ambient interval of that skeleton, gap onto gap.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cantor_skeleton::BowenSkeleton;
use crate::numeric::{circle_reduce, Interval};
use crate::Error;

/// Derivative profile `p(t) = d_lo + (d_hi − d_lo) t + e t(1 − t)` on a
/// normalized coordinate `t ∈ [0, 1]`, with `e` chosen so that `∫p = ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonePiece {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    e: f64,
}

/// `e = 6(ρ − (d_lo + d_hi)/2)`.
#[inline]
pub fn profile_coeff(rho: f64, d_lo: f64, d_hi: f64) -> f64 {
    6.0 * (rho - 0.5 * (d_lo + d_hi))
}

/// Exact `(min, max)` of the quadratic profile over `[0, 1]`.
pub fn profile_extrema(d_lo: f64, d_hi: f64, e: f64) -> (f64, f64) {
    let p = |t: f64| d_lo + (d_hi - d_lo) * t + e * t * (1.0 - t);
    let mut lo = d_lo.min(d_hi);
    let mut hi = d_lo.max(d_hi);
    if e != 0.0 {
        let t = (d_hi - d_lo + e) / (2.0 * e);
        if (0.0..=1.0).contains(&t) {
            let v = p(t);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

impl MonotonePiece {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64, d_lo: f64, d_hi: f64) -> Result<Self, Error> {
        if !(x_lo < x_hi && y_lo < y_hi) || !(x_hi - x_lo).is_finite() || !(y_hi - y_lo).is_finite() {
            return Err(Error::DegenerateInterval);
        }
        if !(d_lo > 1.0 && d_hi > 1.0) || !d_lo.is_finite() || !d_hi.is_finite() {
            return Err(Error::RatioInfeasible { min_slope: d_lo.min(d_hi) });
        }
        let rho = (y_hi - y_lo) / (x_hi - x_lo);
        let e = profile_coeff(rho, d_lo, d_hi);
        let (min_slope, _) = profile_extrema(d_lo, d_hi, e);
        if min_slope <= 1.0 {
            return Err(Error::RatioInfeasible { min_slope });
        }
        Ok(MonotonePiece { x_lo, x_hi, y_lo, y_hi, d_lo, d_hi, e })
    }

    /// Affine piece, derivative equal to the average slope.
    pub fn affine(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self, Error> {
        let rho = (y_hi - y_lo) / (x_hi - x_lo);
        Self::new(x_lo, x_hi, y_lo, y_hi, rho, rho)
    }

    /// Exactly affine piece of the given slope starting at `(x_lo, y_lo)`.
    pub fn linear(x_lo: f64, x_hi: f64, y_lo: f64, slope: f64) -> Result<Self, Error> {
        if !(x_lo < x_hi) {
            return Err(Error::DegenerateInterval);
        }
        if !(slope > 1.0 && slope.is_finite()) {
            return Err(Error::RatioInfeasible { min_slope: slope });
        }
        let y_hi = y_lo + slope * (x_hi - x_lo);
        Ok(MonotonePiece { x_lo, x_hi, y_lo, y_hi, d_lo: slope, d_hi: slope, e: 0.0 })
    }

    pub fn e_coeff(&self) -> f64 {
        self.e
    }

    pub fn ratio(&self) -> f64 {
        (self.y_hi - self.y_lo) / (self.x_hi - self.x_lo)
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.x_lo, self.x_hi)
    }

    pub fn min_slope(&self) -> f64 {
        profile_extrema(self.d_lo, self.d_hi, self.e).0
    }

    pub fn max_slope(&self) -> f64 {
        profile_extrema(self.d_lo, self.d_hi, self.e).1
    }

    pub fn is_affine(&self) -> bool {
        self.e == 0.0 && self.d_lo == self.d_hi
    }

    /// `p(t)`.
    #[inline]
    pub fn profile(&self, t: f64) -> f64 {
        self.d_lo + (self.d_hi - self.d_lo) * t + self.e * t * (1.0 - t)
    }

    pub fn eval(&self, x: f64) -> Result<f64, Error> {
        if !self.domain().contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        Ok(self.eval_clamped(x))
    }

    pub fn deriv(&self, x: f64) -> Result<f64, Error> {
        if !self.domain().contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        Ok(self.deriv_clamped(x))
    }

    /// Evaluate with `x` clamped into the domain; endpoints are returned
    /// exactly.
    #[inline]
    pub fn eval_clamped(&self, x: f64) -> f64 {
        if x <= self.x_lo {
            return self.y_lo;
        }
        if x >= self.x_hi {
            return self.y_hi;
        }
        let w = self.x_hi - self.x_lo;
        let t = (x - self.x_lo) / w;
        let b = self.d_hi - self.d_lo + self.e;
        self.y_lo + w * t * (self.d_lo + t * (0.5 * b - self.e * t / 3.0))
    }

    #[inline]
    pub fn deriv_clamped(&self, x: f64) -> f64 {
        if x <= self.x_lo {
            return self.d_lo;
        }
        if x >= self.x_hi {
            return self.d_hi;
        }
        self.profile((x - self.x_lo) / (self.x_hi - self.x_lo))
    }

    #[inline]
    fn eval_deriv_clamped(&self, x: f64) -> (f64, f64) {
        (self.eval_clamped(x), self.deriv_clamped(x))
    }
}

/// Symmetric profile with endpoint derivatives 2 mapping `[x0, x1]` onto
/// `[y0, y1]`; only used on pairs whose ratio was checked at build time.
#[inline]
fn slope2_eval(x: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> (f64, f64) {
    if x <= x0 {
        return (y0, 2.0);
    }
    if x >= x1 {
        return (y1, 2.0);
    }
    let w = x1 - x0;
    let rho = (y1 - y0) / w;
    let e = profile_coeff(rho, 2.0, 2.0);
    let t = (x - x0) / w;
    let y = y0 + w * t * (2.0 + t * (0.5 * e - e * t / 3.0));
    (y, 2.0 + e * t * (1.0 - t))
}

/// How points exactly on a boundary are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tie {
    /// Boundary belongs to the piece on its right (default).
    #[default]
    Right,
    /// Boundary belongs to the piece on its left; gives left-hand limits.
    Left,
}

/// One generation-1 atom of a skeleton mapped onto the skeleton's ambient
/// interval. Gaps of generation `n` go onto gaps of generation `n − 1` (the
/// generation-1 gap onto the central gap) and atoms at the resolution go onto
/// their parent atoms, all with endpoint derivative 2.
#[derive(Debug, Clone)]
pub struct BowenBranch {
    pub skeleton: Arc<BowenSkeleton>,
    pub letter: u8,
}

impl BowenBranch {
    pub fn domain(&self) -> Interval {
        let s = &self.skeleton;
        let w = crate::Word::new(self.letter as u64, 1).unwrap_or(crate::Word::EMPTY);
        s.atom_interval(&w).unwrap_or(s.ambient())
    }

    /// Ratio (target length / source length) of each gap generation
    /// 1..N−1, followed by the resolution ratio.
    pub fn ratios(&self) -> Vec<f64> {
        let s = &self.skeleton;
        let n = s.max_generation();
        let mut out: Vec<f64> = (1..n).map(|g| s.gap_len(g - 1) / s.gap_len(g)).collect();
        out.push(s.atom_len(n - 1) / s.atom_len(n));
        out
    }

    pub fn min_slope(&self) -> f64 {
        self.ratios()
            .iter()
            .map(|&r| profile_extrema(2.0, 2.0, profile_coeff(r, 2.0, 2.0)).0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_slope(&self) -> f64 {
        self.ratios()
            .iter()
            .map(|&r| profile_extrema(2.0, 2.0, profile_coeff(r, 2.0, 2.0)).1)
            .fold(0.0, f64::max)
    }

    /// Value (inside the skeleton's ambient interval) and derivative.
    pub fn eval_deriv(&self, x: f64, tie: Tie) -> (f64, f64) {
        let s = &*self.skeleton;
        let dom = self.domain();
        if x <= dom.lo {
            return (s.ambient().lo, 2.0);
        }
        if x >= dom.hi {
            return (s.ambient().hi, 2.0);
        }
        let n_max = s.max_generation();
        let amb_lo = s.ambient().lo;
        let mut lo_v = if self.letter == 1 { amb_lo + s.right_offset(0) } else { amb_lo };
        let mut lo_u = amb_lo;
        // right ends are inherited rather than recomputed so that atom
        // endpoints land on endpoints at every depth
        let mut hi_v = dom.hi;
        let mut hi_u = s.ambient().hi;
        for n in 1..n_max {
            let a = lo_v + s.atom_len(n + 1);
            let b = lo_v + s.right_offset(n);
            let (left, right) = match tie {
                Tie::Right => (x < a, x >= b),
                Tie::Left => (x <= a, x > b),
            };
            if left {
                hi_v = a;
                hi_u = lo_u + s.atom_len(n);
                continue;
            }
            if right {
                lo_v = b;
                lo_u += s.right_offset(n - 1);
                continue;
            }
            return slope2_eval(x, a, b, lo_u + s.atom_len(n), lo_u + s.right_offset(n - 1));
        }
        slope2_eval(x, lo_v, hi_v, lo_u, hi_u)
    }
}

#[derive(Debug, Clone)]
pub enum BranchKind {
    Piece(MonotonePiece),
    Bowen(BowenBranch),
}

/// A branch together with its itinerary symbol.
#[derive(Debug, Clone)]
pub struct Branch {
    pub symbol: u16,
    pub kind: BranchKind,
}

impl Branch {
    pub fn piece(symbol: u16, piece: MonotonePiece) -> Self {
        Branch { symbol, kind: BranchKind::Piece(piece) }
    }

    pub fn bowen(symbol: u16, skeleton: Arc<BowenSkeleton>, letter: u8) -> Self {
        Branch { symbol, kind: BranchKind::Bowen(BowenBranch { skeleton, letter }) }
    }

    pub fn domain(&self) -> Interval {
        match &self.kind {
            BranchKind::Piece(p) => p.domain(),
            BranchKind::Bowen(b) => b.domain(),
        }
    }

    /// Lift target interval.
    pub fn target(&self) -> Interval {
        match &self.kind {
            BranchKind::Piece(p) => Interval::new(p.y_lo, p.y_hi),
            BranchKind::Bowen(b) => b.skeleton.ambient(),
        }
    }

    pub fn min_slope(&self) -> f64 {
        match &self.kind {
            BranchKind::Piece(p) => p.min_slope(),
            BranchKind::Bowen(b) => b.min_slope(),
        }
    }

    pub fn max_slope(&self) -> f64 {
        match &self.kind {
            BranchKind::Piece(p) => p.max_slope(),
            BranchKind::Bowen(b) => b.max_slope(),
        }
    }

    /// Lift value and derivative.
    #[inline]
    pub fn eval_deriv(&self, x: f64, tie: Tie) -> (f64, f64) {
        match &self.kind {
            BranchKind::Piece(p) => p.eval_deriv_clamped(x),
            BranchKind::Bowen(b) => b.eval_deriv(x, tie),
        }
    }
}

/// Residuals and constants reported by [`CircleMap::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub c0_residual: f64,
    pub c1_residual: f64,
    pub lambda: f64,
    pub degree: i64,
    /// `Σ (y_hi − y_lo) / 2` before rounding to `degree`.
    pub winding: f64,
}

#[derive(Debug, Clone)]
pub struct CircleMap {
    branches: Vec<Branch>,
    /// Left endpoints of branches 1.. (interior breakpoints).
    breaks: Vec<f64>,
    lambda: f64,
    winding: f64,
}

impl CircleMap {
    /// Assemble branches; they must tile `[-1, 1]` exactly.
    pub fn new(branches: Vec<Branch>) -> Result<Self, Error> {
        if branches.is_empty() {
            return Err(Error::Tiling { at: -1.0, mismatch: 2.0 });
        }
        let doms: Vec<Interval> = branches.iter().map(Branch::domain).collect();
        if doms[0].lo != -1.0 {
            return Err(Error::Tiling { at: -1.0, mismatch: doms[0].lo + 1.0 });
        }
        for w in doms.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::Tiling { at: w[0].hi, mismatch: w[1].lo - w[0].hi });
            }
        }
        let last = doms[doms.len() - 1].hi;
        if last != 1.0 {
            return Err(Error::Tiling { at: 1.0, mismatch: last - 1.0 });
        }
        let breaks = doms[1..].iter().map(|d| d.lo).collect();
        let lambda = branches.iter().map(Branch::min_slope).fold(f64::INFINITY, f64::min);
        let winding = crate::numeric::compensated_sum(branches.iter().map(|b| b.target().len())) / 2.0;
        Ok(CircleMap { branches, breaks, lambda, winding })
    }

    /// `x ↦ 2x`.
    pub fn doubling() -> Self {
        let pieces = [
            Branch::piece(0, MonotonePiece::new(-1.0, 0.0, -2.0, 0.0, 2.0, 2.0).expect("slope 2")),
            Branch::piece(1, MonotonePiece::new(0.0, 1.0, 0.0, 2.0, 2.0, 2.0).expect("slope 2")),
        ];
        CircleMap::new(pieces.to_vec()).expect("doubling tiles the circle")
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Exact minimum derivative over the circle.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn max_slope(&self) -> f64 {
        self.branches.iter().map(Branch::max_slope).fold(0.0, f64::max)
    }

    pub fn winding(&self) -> f64 {
        self.winding
    }

    pub fn degree(&self) -> i64 {
        libm::round(self.winding) as i64
    }

    /// Number of distinct itinerary symbols (max symbol + 1).
    pub fn alphabet(&self) -> usize {
        self.branches.iter().map(|b| b.symbol as usize + 1).max().unwrap_or(0)
    }

    /// Index of the branch containing `x`.
    #[inline]
    pub fn branch_index(&self, x: f64, tie: Tie) -> usize {
        match tie {
            Tie::Right => self.breaks.partition_point(|&b| b <= x),
            Tie::Left => self.breaks.partition_point(|&b| b < x),
        }
    }

    #[inline]
    fn normalize(x: f64) -> f64 {
        if (-1.0..=1.0).contains(&x) {
            x
        } else {
            circle_reduce(x)
        }
    }

    /// Lift value and derivative with explicit tie mode.
    #[inline]
    pub fn lift_deriv_with(&self, x: f64, tie: Tie) -> (f64, f64) {
        let x = Self::normalize(x);
        self.branches[self.branch_index(x, tie)].eval_deriv(x, tie)
    }

    /// `(f(x), f'(x))` with `f(x)` reduced into `[-1, 1)`.
    #[inline]
    pub fn eval_deriv(&self, x: f64) -> (f64, f64) {
        let (y, d) = self.lift_deriv_with(x, Tie::Right);
        (circle_reduce(y), d)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_deriv(x).0
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        self.eval_deriv(x).1
    }

    #[inline]
    pub fn symbol(&self, x: f64) -> u16 {
        self.branches[self.branch_index(Self::normalize(x), Tie::Right)].symbol
    }

    /// `[x0, f(x0), …, f^{n−1}(x0)]`.
    pub fn orbit(&self, x0: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut x = Self::normalize(x0);
        for _ in 0..n {
            out.push(x);
            x = self.eval(x);
        }
        out
    }

    /// Branch symbols along the orbit of `x0`.
    pub fn itinerary(&self, x0: f64, n: usize) -> Vec<u16> {
        self.orbit(x0, n).into_iter().map(|x| self.symbol(x)).collect()
    }

    /// C⁰/C¹ residuals at every breakpoint including the wrap `-1 ~ 1`.
    pub fn residuals(&self) -> (f64, f64) {
        let nb = self.branches.len();
        let mut c0: f64 = 0.0;
        let mut c1: f64 = 0.0;
        for i in 0..nb {
            let left = &self.branches[i];
            let right = &self.branches[(i + 1) % nb];
            let (yl, dl) = left.eval_deriv(left.domain().hi, Tie::Left);
            let (yr, dr) = right.eval_deriv(right.domain().lo, Tie::Right);
            c0 = c0.max(crate::numeric::circle_dist(yl, yr));
            c1 = c1.max(libm::fabs(dl - dr));
        }
        (c0, c1)
    }

    /// Full validation against `tol`.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport, Error> {
        let (c0, c1) = self.residuals();
        if !(c0 <= tol) {
            return Err(Error::NotC0 { at: self.worst_break(true), residual: c0 });
        }
        if !(c1 <= tol) {
            return Err(Error::NotC1 { at: self.worst_break(false), residual: c1 });
        }
        if !(self.lambda > 1.0) {
            return Err(Error::NotExpanding { lambda: self.lambda });
        }
        let degree = self.degree();
        if libm::fabs(self.winding - degree as f64) > tol.max(1e-9) {
            return Err(Error::NotC0 { at: 1.0, residual: libm::fabs(self.winding - degree as f64) });
        }
        Ok(ValidationReport { c0_residual: c0, c1_residual: c1, lambda: self.lambda, degree, winding: self.winding })
    }

    fn worst_break(&self, value: bool) -> f64 {
        let nb = self.branches.len();
        let mut best = (0.0, 1.0);
        for i in 0..nb {
            let left = &self.branches[i];
            let right = &self.branches[(i + 1) % nb];
            let (yl, dl) = left.eval_deriv(left.domain().hi, Tie::Left);
            let (yr, dr) = right.eval_deriv(right.domain().lo, Tie::Right);
            let r = if value { crate::numeric::circle_dist(yl, yr) } else { libm::fabs(dl - dr) };
            if r > best.0 {
                best = (r, left.domain().hi);
            }
        }
        best.1
    }

    /// True when every branch is an affine piece of one common slope.
    pub fn constant_derivative(&self) -> Option<f64> {
        let mut slope = None;
        for b in &self.branches {
            match &b.kind {
                BranchKind::Piece(p) if p.is_affine() => match slope {
                    None => slope = Some(p.d_lo),
                    Some(s) if s == p.d_lo => {}
                    _ => return None,
                },
                _ => return None,
            }
        }
        slope
    }

    /// Whether `skel` is wired into this map through Bowen branches covering
    /// both of its generation-1 atoms, so the derivative is 2 on its
    /// Cantor set.
    pub fn wires_skeleton(&self, skel: &Arc<BowenSkeleton>) -> bool {
        let mut seen = [false; 2];
        for b in &self.branches {
            if let BranchKind::Bowen(bb) = &b.kind {
                if Arc::ptr_eq(&bb.skeleton, skel) {
                    seen[bb.letter as usize & 1] = true;
                }
            }
        }
        seen[0] && seen[1]
    }
}

/// `(x, y) ↦ (f1(x), f2(y))`.
#[derive(Debug, Clone)]
pub struct TorusMap {
    pub f1: CircleMap,
    pub f2: CircleMap,
}

impl TorusMap {
    pub fn new(f1: CircleMap, f2: CircleMap) -> Self {
        TorusMap { f1, f2 }
    }

    #[inline]
    pub fn eval(&self, p: (f64, f64)) -> (f64, f64) {
        (self.f1.eval(p.0), self.f2.eval(p.1))
    }

    /// `log f1'(x) + log f2'(y)`.
    #[inline]
    pub fn log_det(&self, p: (f64, f64)) -> f64 {
        libm::log(self.f1.deriv(p.0)) + libm::log(self.f2.deriv(p.1))
    }

    /// Expansion constant `min(λ1, λ2)`.
    pub fn gamma(&self) -> f64 {
        self.f1.lambda().min(self.f2.lambda())
    }

    pub fn orbit(&self, p0: (f64, f64), n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n);
        let mut p = p0;
        for _ in 0..n {
            out.push(p);
            p = self.eval(p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_piece() {
        let p = MonotonePiece::new(0.0, 1.0, 0.0, 2.0, 2.0, 2.0).unwrap();
        assert_eq!(p.e_coeff(), 0.0);
        assert_eq!(p.eval(0.5).unwrap(), 1.0);
        assert_eq!(p.deriv(0.0).unwrap(), 2.0);
    }

    #[test]
    fn bulging_piece() {
        let p = MonotonePiece::new(0.0, 1.0, 0.0, 4.0, 2.0, 2.0).unwrap();
        assert_eq!(p.e_coeff(), 12.0);
        assert_eq!(p.deriv(0.5).unwrap(), 5.0);
        assert_eq!(p.max_slope(), 5.0);
        assert_eq!(p.min_slope(), 2.0);
        assert_eq!(p.eval(0.5).unwrap(), 2.0);
        assert_eq!(p.eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn sagging_piece_feasibility() {
        let p = MonotonePiece::new(0.0, 1.0, 0.0, 1.5, 2.0, 2.0).unwrap();
        assert_eq!(p.e_coeff(), -3.0);
        assert_eq!(p.min_slope(), 1.25);
        let e = MonotonePiece::new(0.0, 1.0, 0.0, 1.2, 2.0, 2.0).unwrap_err();
        match e {
            Error::RatioInfeasible { min_slope } => assert!((min_slope - 0.8).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_and_out_of_domain() {
        assert_eq!(MonotonePiece::new(1.0, 1.0, 0.0, 1.0, 2.0, 2.0), Err(Error::DegenerateInterval));
        let p = MonotonePiece::new(0.0, 1.0, 0.0, 2.0, 2.0, 2.0).unwrap();
        assert!(matches!(p.eval(1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn doubling_map() {
        let f = CircleMap::doubling();
        assert_eq!(f.eval(0.25), 0.5);
        assert_eq!(f.eval(0.75), -0.5);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(-0.5), -1.0);
        let r = f.validate(0.0).unwrap();
        assert_eq!((r.c0_residual, r.c1_residual, r.lambda, r.degree), (0.0, 0.0, 2.0, 2));
        assert_eq!(f.orbit(0.0, 5), alloc::vec![0.0; 5]);
        assert_eq!(f.itinerary(0.0, 5), alloc::vec![1; 5]);
        assert_eq!(f.constant_derivative(), Some(2.0));
    }

    #[test]
    fn tiling_is_checked() {
        let a = Branch::piece(0, MonotonePiece::new(-1.0, 0.1, -2.0, 0.0, 2.0, 2.0).unwrap());
        let b = Branch::piece(1, MonotonePiece::new(0.0, 1.0, 0.0, 2.0, 2.0, 2.0).unwrap());
        assert!(matches!(CircleMap::new(alloc::vec![a, b]), Err(Error::Tiling { .. })));
    }

    #[test]
    fn c1_violation_is_named() {
        let a = Branch::piece(0, MonotonePiece::new(-1.0, 0.0, -2.0, 0.0, 2.0, 2.0).unwrap());
        let b = Branch::piece(1, MonotonePiece::new(0.0, 1.0, 0.0, 2.0, 3.0, 3.0).unwrap());
        let f = CircleMap::new(alloc::vec![a, b]).unwrap();
        assert!(matches!(f.validate(1e-9), Err(Error::NotC1 { .. })));
    }

    #[test]
    fn torus_log_det() {
        let t = TorusMap::new(CircleMap::doubling(), CircleMap::doubling());
        assert_eq!(t.log_det((0.3, -0.7)), 2.0 * core::f64::consts::LN_2);
        assert_eq!(t.gamma(), 2.0);
        assert_eq!(t.eval((0.25, 0.75)), (0.5, -0.5));
    }
}
