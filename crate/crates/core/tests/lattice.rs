use proptest::prelude::*;
use pv_vacuum::field::{FourPotential, Grid3};
use pv_vacuum::lattice::{build_operator, charge_conjugation_check, eigenvalues, pv_energy, vacuum_state};
use pv_vacuum::{derive_scheme, Execution, MassSpectrum, PVScheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scheme() -> PVScheme {
    derive_scheme(MassSpectrum::new(1.0, 2.0, 3.0).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn energy_is_even_in_the_potential(seed in any::<u64>(), amp in 0.05f64..0.5) {
        let s = scheme();
        let g = Grid3::new(4, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = FourPotential::random(g, &mut rng, 1, amp, amp);
        let f = pv_energy(&s, g, &p, 1.0).unwrap();
        let fm = pv_energy(&s, g, &p.scaled(-1.0), 1.0).unwrap();
        prop_assert!((f - fm).abs() <= 1e-9 * (1.0 + f.abs()));
    }

    #[test]
    fn charge_conjugation_maps_a_to_minus_a(seed in any::<u64>()) {
        let g = Grid3::new(4, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = FourPotential::random(g, &mut rng, 1, 0.5, 0.5);
        let op = build_operator(g, 1.0, &p, 1.0).unwrap();
        let r = charge_conjugation_check(&op).unwrap();
        prop_assert!(r.operator_residual <= 1e-12);
        prop_assert!(r.spectral_mismatch <= 1e-10);
    }

    #[test]
    fn operators_are_hermitian(seed in any::<u64>()) {
        let g = Grid3::new(4, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = FourPotential::random(g, &mut rng, 1, 1.0, 1.0);
        prop_assert!(build_operator(g, 2.0, &p, 1.0).unwrap().hermiticity_defect() <= 1e-14);
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let s = scheme();
    let g = Grid3::new(4, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = FourPotential::random(g, &mut rng, 1, 0.3, 0.3);
    Execution::set_global(Execution::Sequential);
    let a = vacuum_state(&s, g, &p, 1.0).unwrap();
    Execution::set_global(Execution::Parallel);
    let b = vacuum_state(&s, g, &p, 1.0).unwrap();
    assert_eq!(a.energy, b.energy);
    assert_eq!(a.rho.values(), b.rho.values());
}

#[test]
fn free_spectrum_has_mass_gap() {
    let g = Grid3::new(5, 4.0).unwrap();
    let spec = eigenvalues(&build_operator(g, 1.5, &FourPotential::zero(g), 1.0).unwrap()).unwrap();
    assert!((spec.gap() - 1.5).abs() <= 1e-12);
}
