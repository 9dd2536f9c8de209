use proptest::prelude::*;
use sphere_energy::energy::{
    kernel_energy, kernel_energy_offdiag, riesz_energy, v_d, v_d_closed_form, v_d_gauss_kronrod,
    KernelSpec, Normalization, RieszExpansion,
};
use sphere_energy::geometry::{dist_sq, random_orthogonal, uniform_sphere, PointSet};
use sphere_energy::pointsets::{fibonacci_sphere, fixture, Fixture};

fn naive_riesz(points: &PointSet, s: f64) -> f64 {
    // plain double loop over ordered pairs, halved
    let mut total = 0.0;
    let mut comp = 0.0;
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i != j {
                let y = dist_sq(points.point(i), points.point(j)).powf(-0.5 * s) - comp;
                let t = total + y;
                comp = (t - total) - y;
                total = t;
            }
        }
    }
    0.5 * total
}

#[test]
fn pair_sum_matches_naive_loop() {
    for (d, s) in [(2, 1.0), (2, 1.5), (3, 2.5), (4, 1.0)] {
        let ps = uniform_sphere(d, 300, 11).unwrap();
        let e = riesz_energy(&ps, s).unwrap();
        let naive = naive_riesz(&ps, s);
        assert!((e.value - naive).abs() <= 1e-12 * naive, "d={d} s={s}");
        assert_eq!(e.normalization, Normalization::PairwiseHalf);
    }
}

#[test]
fn large_sum_is_order_stable() {
    let ps = fibonacci_sphere(10_000).unwrap();
    let e = riesz_energy(&ps, 1.0).unwrap();
    // reversed order gives the same value to rounding
    let rev: Vec<usize> = (0..ps.len()).rev().collect();
    let e_rev = riesz_energy(&ps.permuted(&rev), 1.0).unwrap();
    assert!((e.value - e_rev.value).abs() <= 1e-12 * e.value);
    let lead = 0.5 * v_d(1.0, 2).unwrap() * 1e8;
    assert!((e.leading_term - lead).abs() <= 1e-12 * lead);
    assert!(e.remainder < 0.0);
}

#[test]
fn offdiag_mean_is_scaled_pair_sum() {
    let ps = uniform_sphere(3, 200, 2).unwrap();
    let s = 1.7;
    let half = riesz_energy(&ps, s).unwrap().value;
    let off = kernel_energy_offdiag(&ps, &KernelSpec::riesz(3, s).unwrap()).unwrap();
    let n = ps.len() as f64;
    assert!((off.value * n * n - 2.0 * half).abs() <= 1e-12 * half);
    assert_eq!(off.normalization, Normalization::OffdiagMean);
}

#[test]
fn energy_integral_quadratures_agree() {
    for d in 2..=5 {
        for &frac in &[0.1, 0.4, 0.8, 0.97] {
            let s = frac * d as f64;
            let a = v_d(s, d).unwrap();
            let b = v_d_gauss_kronrod(s, d).unwrap();
            let c = v_d_closed_form(s, d).unwrap();
            assert!((a - c).abs() <= 1e-10 * c, "d={d} s={s}: {a} vs {c}");
            assert!((b - c).abs() <= 1e-10 * c, "d={d} s={s}: {b} vs {c}");
        }
    }
}

#[test]
fn radial_kernel_matches_coefficient_kernel() {
    // coefficients multiply Legendre polynomials normalized to P(1) = 1
    let ps = uniform_sphere(2, 150, 9).unwrap();
    let a = KernelSpec::coefficients(2, vec![1.0, 1.0]).unwrap();
    let b = KernelSpec::radial(2, |t: f64| 1.0 + t, false, Some(1.0));
    let ea = kernel_energy(&ps, &a).unwrap();
    let eb = kernel_energy(&ps, &b).unwrap();
    assert!((ea.value - eb.value).abs() < 1e-12);
    assert!(ea.value >= 1.0 - 1e-12);
    assert_eq!(ea.leading_term, 1.0);
}

#[test]
fn singular_kernels_need_offdiag() {
    let ps = uniform_sphere(2, 10, 1).unwrap();
    assert!(kernel_energy(&ps, &KernelSpec::riesz(2, 1.0).unwrap()).is_err());
}

#[test]
fn expansion_tail_completes_partial_sum() {
    for (d, s) in [(2, 1.0), (3, 0.5), (3, 2.0)] {
        let e = RieszExpansion::with_default_order(d, s).unwrap();
        for &x in &[-0.9, -0.3, 0.0, 0.45, 0.8] {
            for t in [0, 5, 40] {
                let sum = e.h_t(t, x).unwrap() + e.r_t(t, x).unwrap();
                let target = e.target(x);
                assert!((sum - target).abs() < 1e-8, "d={d} s={s} t={t} x={x}");
            }
        }
    }
}

#[test]
fn partial_sums_grow_at_the_pole() {
    let e = RieszExpansion::with_default_order(2, 1.0).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for t in [1, 4, 16, 64, 256] {
        let h = e.h_t(t, 1.0).unwrap();
        assert!(h > prev);
        prev = h;
    }
    assert!(e.r_t(3, 1.0).is_err());
}

fn rotate_case(d: usize, n: usize, seed: u64) -> (PointSet, PointSet) {
    let ps = uniform_sphere(d, n, seed).unwrap();
    let q = random_orthogonal(d + 1, seed ^ 0xabcdef);
    let rotated = ps.transformed(&q).unwrap();
    (ps, rotated)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn riesz_energy_is_rotation_and_permutation_invariant(
        d in 2usize..=4,
        n in 2usize..120,
        seed in any::<u64>(),
        frac in 0.05f64..0.95,
    ) {
        let s = frac * d as f64;
        let (ps, rotated) = rotate_case(d, n, seed);
        let e = riesz_energy(&ps, s).unwrap().value;
        let er = riesz_energy(&rotated, s).unwrap().value;
        prop_assert!((e - er).abs() <= 1e-10 * e);
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        if (0..n).all(|i| perm.iter().filter(|&&p| p == i).count() == 1) {
            let ep = riesz_energy(&ps.permuted(&perm), s).unwrap().value;
            prop_assert!((e - ep).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn kernel_energy_of_positive_coefficients_is_at_least_mean(
        d in 2usize..=4,
        n in 1usize..80,
        seed in any::<u64>(),
        a in proptest::collection::vec(0.0f64..2.0, 1..6),
    ) {
        let ps = uniform_sphere(d, n, seed).unwrap();
        let k = KernelSpec::coefficients(d, a.clone()).unwrap();
        let e = kernel_energy(&ps, &k).unwrap();
        prop_assert!(e.value >= a[0] - 1e-10);
        prop_assert!(e.remainder >= -1e-10);
    }
}

#[test]
fn platonic_solids_minimize_among_nearby_configurations() {
    let ico = fixture(&Fixture::Icosahedron).unwrap();
    let base = riesz_energy(&ico, 1.0).unwrap().value;
    for seed in 0..5u64 {
        let noise = uniform_sphere(2, 12, seed).unwrap();
        let rows: Vec<Vec<f64>> = ico
            .iter()
            .zip(noise.iter())
            .map(|(x, e)| x.iter().zip(e).map(|(a, b)| a + 1e-3 * b).collect())
            .collect();
        let moved = PointSet::normalized(2, rows, "perturbed").unwrap();
        assert!(riesz_energy(&moved, 1.0).unwrap().value > base);
    }
}
