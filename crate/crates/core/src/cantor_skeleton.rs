//! Bowen-style dynamically defined Cantor sets.
//!
//! A skeleton lives on an ambient interval `[lo, hi]` with a generation-0 gap
//! of half-width `g` centered in it. Each atom of generation `n` (length
//! `L_n`) has a centered gap of length `α_n / 2^n`, and its two children have
//! length `L_{n+1} = (L_n − α_n/2^n) / 2`.
//!
//! Atoms are never materialized. Only the per-generation tables `L_n`,
//! gap lengths and the right-child offsets are stored; an atom's endpoints are
//! recovered from its word in O(n). Every consumer that needs an atom or gap
//! endpoint goes through the same summation order, which keeps images of
//! endpoints bit-exact across modules.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::numeric::{Interval, ZETA2};
use crate::{Error, Inequality};

/// Longest word a [`Word`] can hold.
pub const MAX_WORD_LEN: usize = 62;

/// Binary word, first letter in the most significant of the `len` low bits.
///
/// Numeric order of `bits` matches the left-to-right order of atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    bits: u64,
    len: u8,
}

impl Word {
    pub const EMPTY: Word = Word { bits: 0, len: 0 };

    pub fn new(bits: u64, len: usize) -> Result<Self, Error> {
        if len > MAX_WORD_LEN {
            return Err(Error::WordTooLong { len, max: MAX_WORD_LEN });
        }
        Ok(Word { bits: bits & mask(len), len: len as u8 })
    }

    pub fn from_letters(letters: &[u8]) -> Result<Self, Error> {
        let mut w = Word::new(0, 0)?;
        for &b in letters {
            if b > 1 {
                return Err(Error::InvalidSpec("word letters must be 0 or 1"));
            }
            w = w.push(b)?;
        }
        Ok(w)
    }

    /// Parse a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let mut w = Word::EMPTY;
        for c in s.chars() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::InvalidSpec("word letters must be 0 or 1")),
            };
            w = w.push(b)?;
        }
        Ok(w)
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Letter at position `i` (0 = first).
    #[inline]
    pub fn letter(&self, i: usize) -> u8 {
        debug_assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn push(&self, b: u8) -> Result<Self, Error> {
        if self.len() >= MAX_WORD_LEN {
            return Err(Error::WordTooLong { len: self.len() + 1, max: MAX_WORD_LEN });
        }
        Ok(Word { bits: (self.bits << 1) | (b as u64 & 1), len: self.len + 1 })
    }

    /// Drop the first letter (the symbolic shift).
    pub fn shift(&self) -> Word {
        if self.len == 0 {
            return *self;
        }
        let len = self.len() - 1;
        Word { bits: self.bits & mask(len), len: len as u8 }
    }

    /// First `n` letters.
    pub fn prefix(&self, n: usize) -> Word {
        let n = n.min(self.len());
        Word { bits: self.bits >> (self.len() - n), len: n as u8 }
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.letter(i))
    }

    pub fn to_string(&self) -> alloc::string::String {
        self.letters().map(|b| if b == 0 { '0' } else { '1' }).collect()
    }
}

#[inline]
fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Gap-length schedule `α_n`, n ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSchedule {
    /// α_n = 1/(k n²).
    Closed { k: f64 },
    /// α_1, α_2, … given explicitly.
    Explicit(Vec<f64>),
}

impl AlphaSchedule {
    /// α_n for n ≥ 1.
    pub fn alpha(&self, n: usize) -> f64 {
        match self {
            AlphaSchedule::Closed { k } => 1.0 / (k * (n as f64) * (n as f64)),
            AlphaSchedule::Explicit(v) => v[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BowenParams {
    pub lo: f64,
    pub hi: f64,
    /// Half-width of the generation-0 gap.
    pub half_gap: f64,
    pub alpha: AlphaSchedule,
    pub max_generation: usize,
}

impl BowenParams {
    /// Ambient `[-1, 1]`, generation-0 gap `(-b0, b0)`, α_n = 1/(k n²).
    pub fn circle(b0: f64, k: f64, max_generation: usize) -> Self {
        BowenParams { lo: -1.0, hi: 1.0, half_gap: b0, alpha: AlphaSchedule::Closed { k }, max_generation }
    }

    pub fn ambient(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    fn atom1_len(&self) -> f64 {
        (self.hi - self.lo - 2.0 * self.half_gap) / 2.0
    }

    /// Check the constraints on the gap schedule.
    pub fn check(&self) -> Result<(), Error> {
        let len = self.hi - self.lo;
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::DegenerateInterval);
        }
        if !(self.half_gap > 0.0 && 2.0 * self.half_gap < len) {
            return Err(Error::ParamsInfeasible(Inequality::CentralGap));
        }
        if self.max_generation == 0 || self.max_generation > MAX_WORD_LEN {
            return Err(Error::InvalidSpec("max_generation must be in 1..=62"));
        }
        let bound = 2.0 * self.atom1_len();
        let (sum, alpha1) = match &self.alpha {
            AlphaSchedule::Closed { k } => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(Error::ParamsInfeasible(Inequality::NonPositive));
                }
                (ZETA2 / k, 1.0 / k)
            }
            AlphaSchedule::Explicit(v) => {
                if v.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return Err(Error::ParamsInfeasible(Inequality::NonPositive));
                }
                if let Some(i) = v.windows(2).position(|w| w[1] >= w[0]) {
                    return Err(Error::ParamsInfeasible(Inequality::NotDecreasing { generation: i + 1 }));
                }
                let needed = self.max_generation - 1;
                if v.len() < needed {
                    return Err(Error::ParamsInfeasible(Inequality::ScheduleTooShort {
                        needed,
                        given: v.len(),
                    }));
                }
                (crate::numeric::compensated_sum(v.iter().copied()), v.first().copied().unwrap_or(0.0))
            }
        };
        if sum >= bound {
            return Err(Error::ParamsInfeasible(Inequality::SumTooLarge { sum, bound }));
        }
        if alpha1 >= 2.0 * self.half_gap {
            return Err(Error::ParamsInfeasible(Inequality::FirstGapTooWide {
                alpha1,
                central_gap: 2.0 * self.half_gap,
            }));
        }
        Ok(())
    }

    /// Consecutive ratios α_{n+1}/α_n over the last (up to) ten entries of an
    /// explicit list. Closed-form schedules return an empty list.
    pub fn tail_ratios(&self) -> Vec<f64> {
        match &self.alpha {
            AlphaSchedule::Closed { .. } => Vec::new(),
            AlphaSchedule::Explicit(v) => {
                let start = v.len().saturating_sub(11);
                v[start..].windows(2).map(|w| w[1] / w[0]).collect()
            }
        }
    }
}

/// Lebesgue measure of the limiting Cantor set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantorMass {
    pub value: f64,
    pub tail_bound: f64,
}

/// `m(K) = len − 2g − Σ α_n`, with `Σ α_n = ζ(2)/k` for closed schedules.
pub fn cantor_total_measure(params: &BowenParams) -> Result<CantorMass, Error> {
    params.check()?;
    let base = 2.0 * params.atom1_len();
    let value = match &params.alpha {
        AlphaSchedule::Closed { k } => base - ZETA2 / k,
        AlphaSchedule::Explicit(v) => base - crate::numeric::compensated_sum(v.iter().copied()),
    };
    Ok(CantorMass { value, tail_bound: 0.0 })
}

/// μ_K of any cylinder of the given length.
#[inline]
pub fn mu_k_cylinder(word: &Word) -> f64 {
    libm::ldexp(1.0, -(word.len() as i32))
}

/// Result of [`BowenSkeleton::locate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// In the closed atom of maximal generation with this word.
    InAtom(Word),
    /// In the open gap of atom `word`, which has generation `word.len()`.
    InGap(Word, usize),
    InCentralGap,
    Outside,
}

/// Tables describing the skeleton down to generation `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BowenSkeleton {
    params: Option<BowenParams>,
    lo: f64,
    hi: f64,
    /// `atom_len[n] = L_n` for n = 0..=N, with `L_0` the ambient length.
    atom_len: Vec<f64>,
    /// `gap_len[n]` for n = 0..N; `gap_len[0]` is the central gap.
    gap_len: Vec<f64>,
    /// Offset of the right child's left endpoint from the parent's.
    off1: Vec<f64>,
}

impl BowenSkeleton {
    /// Build from validated parameters.
    pub fn build(params: &BowenParams) -> Result<Self, Error> {
        params.check()?;
        let n_max = params.max_generation;
        let mut gaps = Vec::with_capacity(n_max);
        gaps.push(2.0 * params.half_gap);
        for n in 1..n_max {
            gaps.push(libm::ldexp(params.alpha.alpha(n), -(n as i32)));
        }
        let mut s = Self::from_gap_lengths(params.lo, params.hi, &gaps)?;
        s.params = Some(params.clone());
        Ok(s)
    }

    /// Build from raw gap lengths `gaps[n]` (n = 0..N), skipping the schedule
    /// constraints. Used for reference sets such as the middle-thirds set,
    /// whose total gap length exhausts the ambient interval.
    pub fn from_gap_lengths(lo: f64, hi: f64, gaps: &[f64]) -> Result<Self, Error> {
        if !(lo < hi) {
            return Err(Error::DegenerateInterval);
        }
        let n_max = gaps.len();
        if n_max == 0 || n_max > MAX_WORD_LEN {
            return Err(Error::InvalidSpec("skeleton needs 1..=62 generations"));
        }
        let mut atom_len = Vec::with_capacity(n_max + 1);
        atom_len.push(hi - lo);
        for (n, &gap) in gaps.iter().enumerate() {
            let parent = atom_len[n];
            if !(gap > 0.0) || gap >= parent {
                return Err(Error::GapOverflow { generation: n });
            }
            atom_len.push((parent - gap) / 2.0);
        }
        let off1 = (0..n_max).map(|n| atom_len[n + 1] + gaps[n]).collect();
        Ok(BowenSkeleton { params: None, lo, hi, atom_len, gap_len: gaps.to_vec(), off1 })
    }

    /// Middle-thirds style set: every gap is a third of its atom.
    pub fn middle_thirds(lo: f64, hi: f64, max_generation: usize) -> Result<Self, Error> {
        let mut gaps = Vec::with_capacity(max_generation);
        let mut len = hi - lo;
        for _ in 0..max_generation {
            gaps.push(len / 3.0);
            len /= 3.0;
        }
        Self::from_gap_lengths(lo, hi, &gaps)
    }

    pub fn params(&self) -> Option<&BowenParams> {
        self.params.as_ref()
    }

    pub fn ambient(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    /// Resolution `N`.
    #[inline]
    pub fn max_generation(&self) -> usize {
        self.gap_len.len()
    }

    /// `L_n`, n = 0..=N (with `L_0` the ambient length).
    #[inline]
    pub fn atom_len(&self, n: usize) -> f64 {
        self.atom_len[n]
    }

    /// Gap length of generation `n` (n = 0..N).
    #[inline]
    pub fn gap_len(&self, n: usize) -> f64 {
        self.gap_len[n]
    }

    #[inline]
    pub(crate) fn right_offset(&self, n: usize) -> f64 {
        self.off1[n]
    }

    /// α_n recovered from the gap table, n = 1..N−1.
    pub fn alpha(&self, n: usize) -> f64 {
        libm::ldexp(self.gap_len[n], n as i32)
    }

    /// `m(A_n) = 2^n L_n`.
    pub fn atom_mass(&self, n: usize) -> f64 {
        libm::ldexp(self.atom_len[n], n as i32)
    }

    /// Closed generation-0 gap endpoints `(lo + L_1, lo + L_1 + 2g)`.
    pub fn central_gap(&self) -> Interval {
        Interval::new(self.lo + self.atom_len[1], self.lo + self.off1[0])
    }

    /// Left endpoint of `I_w` (no length check).
    #[inline]
    pub(crate) fn left_endpoint(&self, word: &Word) -> f64 {
        let mut x = self.lo;
        for j in 0..word.len() {
            if word.letter(j) == 1 {
                x += self.off1[j];
            }
        }
        x
    }

    fn check_len(&self, word: &Word, max: usize) -> Result<(), Error> {
        if word.len() > max {
            Err(Error::WordTooLong { len: word.len(), max })
        } else {
            Ok(())
        }
    }

    /// Atom `I_w`. The rightmost atom of every generation ends exactly at `hi`.
    pub fn atom_interval(&self, word: &Word) -> Result<Interval, Error> {
        self.check_len(word, self.max_generation())?;
        let lo = self.left_endpoint(word);
        // An atom ending in 1^r shares its right end with its last 0-ancestor,
        // which keeps nesting exact in floating point.
        let n = word.len();
        let ones = (!word.bits() & mask(n)).trailing_zeros() as usize;
        let hi = if ones >= n {
            self.hi
        } else if ones == 0 {
            lo + self.atom_len[n]
        } else {
            let m = n - ones;
            self.left_endpoint(&word.prefix(m)) + self.atom_len[m]
        };
        Ok(Interval::new(lo, hi))
    }

    /// Open gap `I*_w` (endpoints returned; the gap excludes them).
    /// The empty word gives the central gap.
    pub fn gap_interval(&self, word: &Word) -> Result<Interval, Error> {
        if word.len() >= self.max_generation() {
            return Err(Error::WordTooLong { len: word.len(), max: self.max_generation() - 1 });
        }
        let lo = self.left_endpoint(word);
        let n = word.len();
        Ok(Interval::new(lo + self.atom_len[n + 1], lo + self.off1[n]))
    }

    /// Binary descent; closed atoms win ties against open gaps.
    pub fn locate(&self, x: f64) -> Location {
        if !(self.lo <= x && x <= self.hi) {
            return Location::Outside;
        }
        let mut lo = self.lo;
        let mut w = Word::EMPTY;
        for n in 0..self.max_generation() {
            let a = lo + self.atom_len[n + 1];
            let b = lo + self.off1[n];
            if x <= a {
                w = Word { bits: w.bits << 1, len: w.len + 1 };
            } else if x >= b {
                w = Word { bits: (w.bits << 1) | 1, len: w.len + 1 };
                lo = b;
            } else if n == 0 {
                return Location::InCentralGap;
            } else {
                return Location::InGap(w, n);
            }
        }
        Location::InAtom(w)
    }

    /// Draw `depth` fair bits and return the word with the left endpoint of
    /// its atom. Left endpoints lie in K at every generation.
    pub fn sample_mu_k<R: RngCore + ?Sized>(&self, rng: &mut R, depth: usize) -> Result<(Word, f64), Error> {
        self.check_len(&Word { bits: 0, len: depth.min(255) as u8 }, self.max_generation())?;
        let bits = if depth == 0 { 0 } else { rng.next_u64() >> (64 - depth) };
        let w = Word { bits, len: depth as u8 };
        Ok((w, self.left_endpoint(&w)))
    }

    /// Left endpoints of all atoms of generation `depth`, in order.
    pub fn left_endpoints(&self, depth: usize) -> Result<Vec<f64>, Error> {
        self.check_len(&Word { bits: 0, len: depth.min(255) as u8 }, self.max_generation())?;
        let mut pts = Vec::with_capacity(1usize << depth);
        pts.push(self.lo);
        for j in 0..depth {
            let off = self.off1[j];
            let cur = pts.len();
            // Each step doubles the list, interleaving children in order.
            let mut next = Vec::with_capacity(cur * 2);
            for &p in &pts {
                next.push(p);
                next.push(p + off);
            }
            pts = next;
        }
        Ok(pts)
    }

    /// Visit the left endpoints of all atoms of generation `depth` in order,
    /// without materializing them.
    pub fn for_each_left_endpoint<F: FnMut(f64)>(&self, depth: usize, mut f: F) -> Result<(), Error> {
        self.check_len(&Word { bits: 0, len: depth.min(255) as u8 }, self.max_generation())?;
        fn rec<F: FnMut(f64)>(s: &BowenSkeleton, x: f64, j: usize, depth: usize, f: &mut F) {
            if j == depth {
                f(x);
                return;
            }
            rec(s, x, j + 1, depth, f);
            rec(s, x + s.off1[j], j + 1, depth, f);
        }
        rec(self, self.lo, 0, depth, &mut f);
        Ok(())
    }

    /// `m(A_n)` for n = 1..=N.
    pub fn mass_sequence(&self) -> Vec<f64> {
        (1..=self.max_generation()).map(|n| self.atom_mass(n)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn defaults(n: usize) -> BowenSkeleton {
        BowenSkeleton::build(&BowenParams::circle(0.25, 4.0, n)).unwrap()
    }

    #[test]
    fn word_round_trip() {
        let w = Word::parse("0110").unwrap();
        assert_eq!(w.bits(), 0b0110);
        assert_eq!(w.to_string(), "0110");
        assert_eq!(w.shift().to_string(), "110");
        assert_eq!(w.prefix(2).to_string(), "01");
        assert_eq!(mu_k_cylinder(&w), 1.0 / 16.0);
    }

    #[test]
    fn atom_lengths_small_n() {
        let s = defaults(3);
        assert_eq!(s.atom_len(1), 0.75);
        assert_eq!(s.atom_len(2), 0.3125);
        assert_eq!(s.atom_len(3), 0.1484375);
    }

    #[test]
    fn infeasible_schedules() {
        let e = BowenSkeleton::build(&BowenParams::circle(0.25, 1.0, 8)).unwrap_err();
        assert!(matches!(e, Error::ParamsInfeasible(Inequality::SumTooLarge { .. })));
        let mut p = BowenParams::circle(0.25, 4.0, 3);
        p.alpha = AlphaSchedule::Explicit(alloc::vec![0.3, 0.4]);
        let e = BowenSkeleton::build(&p).unwrap_err();
        assert!(matches!(e, Error::ParamsInfeasible(Inequality::NotDecreasing { generation: 1 })));
    }

    #[test]
    fn named_atoms_and_gaps() {
        let s = defaults(24);
        assert_eq!(s.atom_interval(&Word::parse("0").unwrap()).unwrap(), Interval::new(-1.0, -0.25));
        assert_eq!(s.atom_interval(&Word::parse("01").unwrap()).unwrap(), Interval::new(-0.5625, -0.25));
        assert_eq!(s.gap_interval(&Word::parse("0").unwrap()).unwrap(), Interval::new(-0.6875, -0.5625));
        assert_eq!(s.central_gap(), Interval::new(-0.25, 0.25));
    }

    #[test]
    fn locate_examples() {
        let s = defaults(24);
        assert_eq!(s.locate(0.0), Location::InCentralGap);
        assert_eq!(s.locate(-1.0), Location::InAtom(Word::new(0, 24).unwrap()));
        assert_eq!(s.locate(-0.6), Location::InGap(Word::parse("0").unwrap(), 1));
        assert_eq!(s.locate(1.5), Location::Outside);
    }

    #[test]
    fn sample_and_locate_round_trip() {
        let s = defaults(24);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (w, x) = s.sample_mu_k(&mut rng, 24).unwrap();
            assert_eq!(s.locate(x), Location::InAtom(w));
        }
    }

    #[test]
    fn left_endpoint_table_matches_words() {
        let s = defaults(10);
        let pts = s.left_endpoints(6).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let w = Word::new(i as u64, 6).unwrap();
            assert_eq!(*p, s.atom_interval(&w).unwrap().lo);
        }
    }

    #[test]
    fn rightmost_atom_ends_at_hi() {
        let s = BowenSkeleton::build(&BowenParams::circle(0.4, 4.0, 24)).unwrap();
        for n in 1..=24 {
            let w = Word::new(u64::MAX, n).unwrap();
            assert_eq!(s.atom_interval(&w).unwrap().hi, 1.0);
        }
    }

    #[test]
    fn middle_thirds_masses() {
        let s = BowenSkeleton::middle_thirds(-1.0, 1.0, 12).unwrap();
        for n in 1..=12 {
            let expect = 2.0 * libm::pow(2.0 / 3.0, n as f64);
            assert!((s.atom_mass(n) - expect).abs() < 1e-14);
        }
    }
}
