use proptest::prelude::*;
use sphere_energy::energy::riesz_energy;
use sphere_energy::geometry::{dist_sq, random_orthogonal, uniform_sphere, PointSet};
use sphere_energy::pointsets::{
    fibonacci_sphere, fixture, load_points, riesz_minimize_traced, save_points, separation, Fixture,
};

fn brute_min_distance(points: &PointSet) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i != j {
                best = best.min(dist_sq(points.point(i), points.point(j)));
            }
        }
    }
    best.sqrt()
}

#[test]
fn fibonacci_separation_constant() {
    let ps = fibonacci_sphere(1000).unwrap();
    let rep = separation(&ps).unwrap();
    assert_eq!(rep.min_distance, brute_min_distance(&ps));
    assert!((2.0..=4.0).contains(&rep.c1_hat), "{}", rep.c1_hat);
    let (i, j) = rep.argmin_pair;
    assert_eq!(dist_sq(ps.point(i), ps.point(j)).sqrt(), rep.min_distance);
}

#[test]
fn duplicated_point_is_flagged() {
    let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]];
    let ps = PointSet::new(2, rows, "dup").unwrap();
    let rep = separation(&ps).unwrap();
    assert_eq!(rep.min_distance, 0.0);
    assert!(rep.coincident);
    assert!(riesz_energy(&ps, 1.0).is_err());
}

#[test]
fn file_round_trip_is_exact() {
    let dir = std::env::temp_dir().join(format!("sphere-energy-pointsets-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (d, ps) in [
        (2, uniform_sphere(2, 257, 3).unwrap()),
        (3, uniform_sphere(3, 100, 4).unwrap()),
        (3, fixture(&Fixture::CrossPolytope(3)).unwrap()),
    ] {
        let path = dir.join(format!("pts-{d}-{}.txt", ps.len()));
        save_points(&ps, &path).unwrap();
        let back = load_points(&path, d).unwrap();
        assert_eq!(back.coords(), ps.coords());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn loading_rejects_wrong_width() {
    let dir = std::env::temp_dir().join(format!("sphere-energy-width-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.txt");
    std::fs::write(&path, "# two columns\n1 0\n0 1\n").unwrap();
    assert!(load_points(&path, 2).is_err());
    assert!(load_points(dir.join("missing.txt"), 2).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn minimizer_never_increases_energy() {
    let start = uniform_sphere(2, 20, 21).unwrap();
    let trace = riesz_minimize_traced(&start, 1.0, 500, 0.05).unwrap();
    for w in trace.energies.windows(2) {
        assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
    }
    let e0 = riesz_energy(&start, 1.0).unwrap().value;
    let e1 = riesz_energy(&trace.points, 1.0).unwrap().value;
    assert!(e1 <= e0);
    assert_eq!(trace.energies[0], e0);
}

#[test]
fn fixtures_are_unit_and_sized() {
    for (f, n, d) in [
        (Fixture::Octahedron, 6, 2),
        (Fixture::Cube, 8, 2),
        (Fixture::Icosahedron, 12, 2),
        (Fixture::CrossPolytope(3), 8, 3),
        (Fixture::Simplex(4), 6, 4),
    ] {
        let ps = fixture(&f).unwrap();
        assert_eq!((ps.len(), ps.dim()), (n, d));
        for x in ps.iter() {
            assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn separation_is_rotation_and_permutation_invariant(
        d in 2usize..=4,
        n in 2usize..150,
        seed in any::<u64>(),
    ) {
        let ps = uniform_sphere(d, n, seed).unwrap();
        let base = separation(&ps).unwrap();
        let rotated = ps.transformed(&random_orthogonal(d + 1, seed.wrapping_add(1))).unwrap();
        let r = separation(&rotated).unwrap();
        prop_assert!((r.min_distance - base.min_distance).abs() <= 1e-12);
        let perm: Vec<usize> = (0..n).rev().collect();
        let p = separation(&ps.permuted(&perm)).unwrap();
        prop_assert_eq!(p.min_distance, base.min_distance);
        prop_assert_eq!(base.min_distance, brute_min_distance(&ps));
    }
}
