//! Small numeric helpers shared across modules.

use core::f64::consts::PI;

/// ζ(2) = π²/6.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Closed interval `[lo, hi]` (open or closed is decided by the caller).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `self ⊆ other` with slack `tol` on both ends.
    pub fn is_within(&self, other: &Interval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }
}

/// Reduce a lift coordinate into `[-1, 1)` by the identification `x ~ x + 2`.
#[inline]
pub fn circle_reduce(y: f64) -> f64 {
    if (-1.0..1.0).contains(&y) {
        return y;
    }
    let r = y - 2.0 * libm::floor((y + 1.0) * 0.5);
    // rounding can land exactly on 1.0
    if r >= 1.0 {
        r - 2.0
    } else {
        r
    }
}

/// Uniform draw in `[0, 1)` from 53 random bits.
#[inline]
pub fn unit_f64<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Add an independent uniform kick in `[-jitter, jitter)` to each
/// coordinate and reduce back onto the circle. No-op when `jitter == 0`.
#[inline]
pub fn kick<R: rand_core::RngCore + ?Sized>(p: &mut [f64], jitter: f64, rng: &mut R) {
    if jitter > 0.0 {
        for c in p.iter_mut() {
            *c = circle_reduce(*c + jitter * (2.0 * unit_f64(rng) - 1.0));
        }
    }
}

/// Distance between two points of the circle of circumference 2.
#[inline]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = libm::fabs(circle_reduce(a - b));
    d.min(2.0 - d)
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Gauss–Legendre 8-point nodes and weights on `[-1, 1]`.
pub(crate) const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
pub(crate) const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss–Legendre nodes for the normalized uniform
/// probability on `iv`, split into `panels` equal panels. Weights sum to 1.
pub fn gauss_legendre_nodes(iv: Interval, panels: usize) -> alloc::vec::Vec<(f64, f64)> {
    let mut out = alloc::vec::Vec::with_capacity(panels * 8);
    let h = iv.len() / panels as f64;
    for p in 0..panels {
        let a = iv.lo + h * p as f64;
        let c = a + 0.5 * h;
        for (t, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            out.push((c + 0.5 * h * t, 0.5 * w / panels as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_identifies_endpoints() {
        assert_eq!(circle_reduce(1.5), -0.5);
        assert_eq!(circle_reduce(1.0), -1.0);
        assert_eq!(circle_reduce(-1.0), -1.0);
        assert_eq!(circle_reduce(-2.0), 0.0);
        assert_eq!(circle_reduce(3.25), -0.75);
    }

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_dist(-0.99, 0.99) - 0.02).abs() < 1e-15);
        assert_eq!(circle_dist(0.25, 0.25), 0.0);
    }

    #[test]
    fn gl_weights_sum_to_one_and_integrate_cubics() {
        let nodes = gauss_legendre_nodes(Interval::new(-1.0, 1.0), 3);
        let w: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((w - 1.0).abs() < 1e-14);
        let m3: f64 = nodes.iter().map(|(x, w)| w * x * x).sum();
        assert!((m3 - 1.0 / 3.0).abs() < 1e-14);
    }
}
