use approx::assert_relative_eq;
use proptest::prelude::*;
use pv_vacuum::field::io::{read_scalar, read_vector, write_scalar, write_slice_csv, write_vector};
use pv_vacuum::field::{
    coulomb_solve, divergence, gradient, leray_project, neg_laplacian, FourPotential, Grid3, ScalarField,
    SourceDensities, VectorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise_scalar(g: Grid3, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScalarField::new(g, v).unwrap()
}

fn noise_vector(g: Grid3, seed: u64) -> VectorField {
    VectorField::new([0, 1, 2].map(|c| noise_scalar(g, seed.wrapping_mul(3).wrapping_add(c)))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn leray_projection_is_idempotent_and_divergence_free(seed in any::<u64>(), n in 3usize..9) {
        let g = Grid3::new(n, 4.0).unwrap();
        let a = noise_vector(g, seed);
        let p = leray_project(&a);
        prop_assert!(divergence(&p).max_abs() <= 1e-10 * (1.0 + a.max_abs()));
        let pp = leray_project(&p);
        prop_assert!(pp.axpy(-1.0, &p).max_abs() <= 1e-12 * (1.0 + p.max_abs()));
        // the removed part is orthogonal to the kept one
        let removed = a.axpy(-1.0, &p);
        prop_assert!(removed.inner(&p).abs() <= 1e-10 * a.l2_norm().powi(2));
    }

    #[test]
    fn gradients_are_gauge_trivial(seed in any::<u64>(), n in 3usize..9) {
        let g = Grid3::new(n, 3.0).unwrap();
        let chi = noise_scalar(g, seed);
        prop_assert!(leray_project(&gradient(&chi)).max_abs() <= 1e-12 * (1.0 + chi.max_abs()));
    }

    #[test]
    fn coulomb_solve_inverts_laplacian_on_admissible_modes(seed in any::<u64>(), n in 3usize..8) {
        let g = Grid3::new(n, 5.0).unwrap();
        let src = SourceDensities::ingest(noise_scalar(g, seed), VectorField::zeros(g)).unwrap().0;
        let (v, _) = coulomb_solve(src.rho());
        let back = neg_laplacian(&v).scaled(1.0 / (4.0 * std::f64::consts::PI));
        prop_assert!(back.axpy(-1.0, src.rho()).max_abs() <= 1e-11 * (1.0 + src.rho().max_abs()));
        prop_assert!(v.mean().abs() <= 1e-13);
    }

    #[test]
    fn potentials_are_in_coulomb_gauge(seed in any::<u64>(), n in 3usize..8) {
        let g = Grid3::new(n, 4.0).unwrap();
        let (p, _) = FourPotential::new(noise_scalar(g, seed), noise_vector(g, seed ^ 1)).unwrap();
        prop_assert!(divergence(p.a()).max_abs() <= 1e-10);
        prop_assert!(p.v().mean().abs() <= 1e-13);
        let (gv, ca) = p.sobolev_parts();
        prop_assert!((p.sobolev_norm() - (gv * gv + ca * ca).sqrt()).abs() <= 1e-12 * (1.0 + p.sobolev_norm()));
    }
}

#[test]
fn binary_roundtrip_preserves_samples() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid3::new(5, 2.5).unwrap();
    let s = noise_scalar(g, 7);
    let v = noise_vector(g, 8);
    write_scalar(&dir.path().join("s.bin"), &s).unwrap();
    write_vector(&dir.path().join("v.bin"), &v).unwrap();
    let s2 = read_scalar(&dir.path().join("s.bin")).unwrap();
    let v2 = read_vector(&dir.path().join("v.bin")).unwrap();
    assert_eq!(s.values(), s2.values());
    assert_eq!(s2.grid(), &g);
    for c in 0..3 {
        assert_eq!(v.component(c).values(), v2.component(c).values());
    }
    assert!(dir.path().join("s.bin.json").exists());
}

#[test]
fn slice_csv_has_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid3::new(4, 2.0).unwrap();
    let s = ScalarField::from_fn(g, |x| x[0]);
    let path = dir.path().join("slice.csv");
    write_slice_csv(&path, 0, [0, 1, 2], &[("v", &s)]).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,v");
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(',').map(|t| t.parse().unwrap()).collect();
    assert_relative_eq!(last[0], 1.5, epsilon = 1e-15);
    assert_relative_eq!(last[1], 1.5, epsilon = 1e-15);
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = ScalarField::zeros(Grid3::new(4, 2.0).unwrap());
    let b = VectorField::zeros(Grid3::new(4, 3.0).unwrap());
    assert!(FourPotential::new(a, b).is_err());
}
