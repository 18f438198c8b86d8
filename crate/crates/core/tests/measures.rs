use pesinlab_core::map_builder::{build_doubling, build_example1, build_example2, build_reference_affine, build_torus};
use pesinlab_core::measures::{
    empirical_from_orbit, empirical_from_pseudo_orbit, harmonic, harmonics_into, integrate, mixture, product_measure, pushforward, torus_pairs,
    weak_star_dist,
};
use pesinlab_core::{Example1Spec, Example2Spec, Measure, Observable, ObservableFamily};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_empirical(rng: &mut ChaCha8Rng, dim: usize) -> Measure {
    let n = rng.random_range(1..40usize);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Measure::Empirical { dim, coords, weights: raw.iter().map(|w| w / total).collect() }
}

#[test]
fn metric_axioms_on_random_triples() {
    let sys = build_example1(&Example1Spec::default()).unwrap();
    let fam = ObservableFamily::new(&sys.map);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let a = random_empirical(&mut rng, 1);
        let b = random_empirical(&mut rng, 1);
        let c = random_empirical(&mut rng, 1);
        let ab = weak_star_dist(&a, &b, &fam).unwrap().value;
        let ba = weak_star_dist(&b, &a, &fam).unwrap().value;
        let bc = weak_star_dist(&b, &c, &fam).unwrap().value;
        let ac = weak_star_dist(&a, &c, &fam).unwrap().value;
        assert!(ab >= 0.0);
        assert_eq!(ab.to_bits(), ba.to_bits());
        assert!(ac <= ab + bc + 1e-12);
        assert_eq!(weak_star_dist(&a, &a, &fam).unwrap().value, 0.0);
    }
}

#[test]
fn balls_are_convex() {
    let sys = build_doubling();
    let fam = ObservableFamily::new(&sys.map);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..100 {
        let mu = random_empirical(&mut rng, 1);
        let n1 = random_empirical(&mut rng, 1);
        let n2 = random_empirical(&mut rng, 1);
        let d1 = weak_star_dist(&n1, &mu, &fam).unwrap().value;
        let d2 = weak_star_dist(&n2, &mu, &fam).unwrap().value;
        let eps = d1.max(d2) * (1.0 + 1e-9) + 1e-15;
        let lam: f64 = rng.random();
        let mix = mixture(&[(lam, &n1), (1.0 - lam, &n2)]).unwrap();
        mix.validate().unwrap();
        let dm = weak_star_dist(&mix, &mu, &fam).unwrap().value;
        assert!(dm < eps, "{dm} >= {eps}");
        assert!(dm <= lam * d1 + (1.0 - lam) * d2 + 1e-12);
    }
}

#[test]
fn cantor_measures_are_invariant() {
    let e1 = build_example1(&Example1Spec::default()).unwrap();
    let e2 = build_example2(&Example2Spec::default()).unwrap();
    let aff = build_reference_affine();
    for sys in [&e1, &e2, &aff] {
        let fam = ObservableFamily::new(&sys.map);
        for c in &sys.carriers {
            let mu = Measure::mu_k(c, 14).unwrap();
            let pushed = pushforward(&sys.map, &mu).unwrap();
            let d = weak_star_dist(&pushed, &mu, &fam).unwrap();
            assert!(d.value <= d.tail_bound + 1e-9, "{} {}: {}", sys.name(), c.label, d.value);
        }
    }
    let t = build_torus(e1.clone(), e2.clone()).unwrap();
    let fam = ObservableFamily::new(&t.map);
    let p = &t.products[0];
    let mu = product_measure(Measure::mu_k(&p.left, 10).unwrap(), Measure::mu_k(&p.right, 10).unwrap()).unwrap();
    let d = weak_star_dist(&pushforward(&t.map, &mu).unwrap(), &mu, &fam).unwrap();
    assert!(d.value <= d.tail_bound + 1e-9);
}

#[test]
fn dirac_at_non_fixed_point_is_not_invariant() {
    let sys = build_doubling();
    let fam = ObservableFamily::new(&sys.map);
    let m = Measure::Dirac(0.3);
    let d = weak_star_dist(&pushforward(&sys.map, &m).unwrap(), &m, &fam).unwrap();
    assert!(d.value > 0.01);
    let fixed = Measure::Dirac(0.0);
    assert_eq!(weak_star_dist(&pushforward(&sys.map, &fixed).unwrap(), &fixed, &fam).unwrap().value, 0.0);
}

#[test]
fn cantor_integration_refines_within_bound() {
    let sys = build_example1(&Example1Spec::default()).unwrap();
    let c = &sys.carriers[0];
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let amps: Vec<(f64, f64, f64)> = (1..=4)
            .map(|j| (rng.random_range(-1.0..1.0), j as f64 * std::f64::consts::PI, rng.random_range(0.0..6.3)))
            .collect();
        let lip: f64 = amps.iter().map(|(a, w, _)| a.abs() * w).sum();
        let f = move |p: &[f64]| amps.iter().map(|(a, w, ph)| a * (w * p[0] + ph).sin()).sum::<f64>();
        let obs = Observable::Func { f: &f, lip, dim: 1 };
        for d in [6, 10, 14] {
            let coarse = integrate(&Measure::mu_k(c, d).unwrap(), &obs).unwrap();
            let fine = integrate(&Measure::mu_k(c, d + 1).unwrap(), &obs).unwrap();
            assert!((coarse.value - fine.value).abs() <= coarse.error_bound, "depth {d}");
        }
    }
}

#[test]
fn constant_observables_are_exact_on_cantor_sets() {
    let sys = build_example1(&Example1Spec::default()).unwrap();
    let mu = Measure::mu_k(&sys.carriers[0], 20).unwrap();
    let i = integrate(&mu, &Observable::LogDet(&sys.map)).unwrap();
    assert_eq!(i.value, std::f64::consts::LN_2);
    assert_eq!(i.error_bound, 0.0);
    let aff = build_reference_affine();
    let mu = Measure::mu_k(&aff.carriers[0], 20).unwrap();
    assert!((integrate(&mu, &Observable::LogDet(&aff.map)).unwrap().value - 3f64.ln()).abs() < 1e-15);
}

#[test]
fn lebesgue_integrals_against_closed_forms() {
    let leb = Measure::lebesgue();
    // ∫ (1 + cos πm x)/2 dx / 2 = 1/2
    for i in 1..12 {
        let v = integrate(&leb, &Observable::Harmonic(i)).unwrap();
        assert!((v.value - 0.5).abs() < 1e-13, "i={i}: {}", v.value);
    }
    let sq = |p: &[f64]| p[0] * p[0];
    let v = integrate(&leb, &Observable::Func { f: &sq, lip: 2.0, dim: 1 }).unwrap();
    assert!((v.value - 1.0 / 3.0).abs() < 1e-14);
    let d = build_doubling();
    assert!((integrate(&leb, &Observable::LogDet(&d.map)).unwrap().value - std::f64::consts::LN_2).abs() < 1e-14);
    let torus = build_torus(build_doubling(), build_doubling()).unwrap();
    let v = integrate(&Measure::lebesgue_torus(), &Observable::LogDet(&torus.map)).unwrap();
    assert!((v.value - 2.0 * std::f64::consts::LN_2).abs() < 1e-14);
}

#[test]
fn example1_log_derivative_against_simpson() {
    let sys = build_example1(&Example1Spec::default()).unwrap();
    let f = sys.map.as_circle().unwrap();
    // fine Simpson rule on each branch, the derivative being smooth on
    // gaps and piecewise smooth overall
    let mut oracle = 0.0;
    for b in f.branches() {
        let d = b.domain();
        let n = 200_000;
        let h = d.len() / n as f64;
        let g = |x: f64| f.deriv(x).ln();
        let mut s = g(d.lo) + g(d.hi - 1e-15);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(d.lo + h * i as f64);
        }
        oracle += s * h / 3.0;
    }
    oracle /= 2.0;
    let v = integrate(&Measure::lebesgue(), &Observable::LogDeriv(f)).unwrap();
    assert!((v.value - oracle).abs() < 1e-4, "{} vs {oracle}", v.value);
    assert!(v.value > std::f64::consts::LN_2);
}

#[test]
fn recurrence_matches_direct_harmonics() {
    let mut out = [0.0; 33];
    for k in 0..=200 {
        let x = -1.0 + k as f64 / 100.0;
        harmonics_into(x, &mut out);
        for (i, v) in out.iter().enumerate() {
            assert!((v - harmonic(i, x)).abs() < 1e-12);
        }
    }
    let pairs = torus_pairs(32);
    assert_eq!(pairs.len(), 32);
    assert_eq!(pairs[0], (0, 1));
    let mut sorted = pairs.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 32);
}

#[test]
fn empirical_measures_of_orbits() {
    let sys = build_doubling();
    let m = empirical_from_orbit(&sys.map, &[0.1], 50).unwrap();
    m.validate().unwrap();
    let pushed = pushforward(&sys.map, &m).unwrap();
    let Measure::Empirical { coords, .. } = &pushed else { panic!() };
    assert_eq!(coords[0], sys.map.as_circle().unwrap().eval(0.1));
    assert!(pushforward(&sys.map, &Measure::lebesgue()).is_err());
}

#[test]
fn empirical_measures_approach_lebesgue_in_median() {
    let sys = build_doubling();
    let fam = ObservableFamily::new(&sys.map);
    let leb = Measure::lebesgue();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut medians = Vec::new();
    for n in [10, 100, 1000] {
        let mut ds: Vec<f64> = (0..100)
            .map(|_| {
                let x0: f64 = rng.random_range(-1.0..1.0);
                let m = empirical_from_pseudo_orbit(&sys.map, &[x0], n, 1e-12, &mut rng).unwrap();
                weak_star_dist(&m, &leb, &fam).unwrap().value
            })
            .collect();
        ds.sort_by(f64::total_cmp);
        medians.push(ds[50]);
    }
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

proptest! {
    #[test]
    fn prop_triangle_inequality(seed in any::<u64>()) {
        let sys = build_doubling();
        let fam = ObservableFamily::new(&sys.map);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_empirical(&mut rng, 1);
        let b = random_empirical(&mut rng, 1);
        let c = random_empirical(&mut rng, 1);
        let ab = weak_star_dist(&a, &b, &fam).unwrap().value;
        let bc = weak_star_dist(&b, &c, &fam).unwrap().value;
        let ac = weak_star_dist(&a, &c, &fam).unwrap().value;
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn prop_torus_distance_symmetric(seed in any::<u64>()) {
        let t = build_torus(build_doubling(), build_doubling()).unwrap();
        let fam = ObservableFamily::new(&t.map);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_empirical(&mut rng, 2);
        let b = random_empirical(&mut rng, 2);
        prop_assert_eq!(
            weak_star_dist(&a, &b, &fam).unwrap().value.to_bits(),
            weak_star_dist(&b, &a, &fam).unwrap().value.to_bits()
        );
    }
}
