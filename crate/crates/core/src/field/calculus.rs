//! Spectral differential operators, gauge projection and the Poisson solve.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ScalarField, VectorField};
use crate::error::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Record of an input that was projected to admissible data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldWarning {
    pub what: String,
    /// ‖input − projected‖ / ‖input‖
    pub relative_change: f64,
}

pub const WARNING_THRESHOLD: f64 = 1e-10;

pub(crate) fn maybe_warn(
    warnings: &mut Vec<FieldWarning>,
    what: &str,
    removed_sq: f64,
    total_sq: f64,
) {
    if total_sq <= 0.0 {
        return;
    }
    let rel = (removed_sq / total_sq).sqrt();
    if rel > WARNING_THRESHOLD {
        warnings.push(FieldWarning {
            what: what.to_string(),
            relative_change: rel,
        });
    }
}

/// ∇v
pub fn gradient(v: &ScalarField) -> VectorField {
    let g = *v.grid();
    let spec = v.spectrum();
    let comps: [Vec<Complex64>; 3] = std::array::from_fn(|c| {
        (0..g.len())
            .map(|idx| I * g.wavevector(idx)[c] * spec[idx])
            .collect()
    });
    VectorField::from_spectra(g, comps)
}

/// −∇v
pub fn electric_field(v: &ScalarField) -> VectorField {
    gradient(v).scaled(-1.0)
}

pub fn curl(a: &VectorField) -> Result<VectorField> {
    let g = *a.grid();
    Ok(a.map_spectrum(|idx, f| {
        let k = g.wavevector(idx);
        [
            I * (k[1] * f[2] - k[2] * f[1]),
            I * (k[2] * f[0] - k[0] * f[2]),
            I * (k[0] * f[1] - k[1] * f[0]),
        ]
    }))
}

pub fn divergence(a: &VectorField) -> ScalarField {
    let g = *a.grid();
    let spec: [&[Complex64]; 3] = std::array::from_fn(|c| a.component(c).spectrum());
    let out = (0..g.len())
        .map(|idx| {
            let k = g.wavevector(idx);
            I * (k[0] * spec[0][idx] + k[1] * spec[1][idx] + k[2] * spec[2][idx])
        })
        .collect();
    ScalarField::from_spectrum(g, out)
}

/// −Δv with symbol |k|² (Nyquist momentum kept).
pub fn neg_laplacian(v: &ScalarField) -> ScalarField {
    let g = *v.grid();
    v.map_spectrum(|idx, c| c * g.laplacian_symbol(idx))
}

pub fn neg_laplacian_vector(a: &VectorField) -> VectorField {
    let g = *a.grid();
    a.map_spectrum(|idx, f| f.map(|c| c * g.laplacian_symbol(idx)))
}

/// Transverse projection â − k(k·â)/|k|² with the derivative symbol; modes with
/// vanishing symbol pass through.
pub fn leray_project(a: &VectorField) -> VectorField {
    let g = *a.grid();
    a.map_spectrum(|idx, f| transverse(g.wavevector(idx), f))
}

pub(crate) fn transverse(k: [f64; 3], f: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return f;
    }
    let kf = (k[0] * f[0] + k[1] * f[1] + k[2] * f[2]) / k2;
    [f[0] - kf * k[0], f[1] - kf * k[1], f[2] - kf * k[2]]
}

/// Keep only admissible modes (no zero mode, no Nyquist component).
pub fn admissible_scalar(v: &ScalarField) -> (ScalarField, f64) {
    let g = *v.grid();
    let spec = v.spectrum();
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let mut removed = 0.0;
    let out: Vec<Complex64> = (0..g.len())
        .map(|idx| {
            if g.is_admissible(idx) {
                spec[idx]
            } else {
                removed += spec[idx].norm_sqr();
                ZERO
            }
        })
        .collect();
    let rel = if total > 0.0 { (removed / total).sqrt() } else { 0.0 };
    (ScalarField::from_spectrum(g, out), rel)
}

/// Leray projection followed by removal of inadmissible modes.
pub fn admissible_transverse(a: &VectorField) -> (VectorField, f64) {
    let g = *a.grid();
    let mut total = 0.0;
    let mut removed = 0.0;
    let out = a.map_spectrum(|idx, f| {
        if g.is_admissible(idx) {
            transverse(g.wavevector(idx), f)
        } else {
            [ZERO; 3]
        }
    });
    for c in 0..3 {
        total += a.component(c).spectrum().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let diff: f64 = a
            .component(c)
            .spectrum()
            .iter()
            .zip(out.component(c).spectrum())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        removed += diff;
    }
    let rel = if total > 0.0 { (removed / total).sqrt() } else { 0.0 };
    (out, rel)
}

/// Solve −ΔV = 4πρ with V̂(0) = 0. A nonzero mean of ρ is subtracted and
/// reported.
pub fn coulomb_solve(rho: &ScalarField) -> (ScalarField, Vec<FieldWarning>) {
    let g = *rho.grid();
    let spec = rho.spectrum();
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let mut warnings = Vec::new();
    maybe_warn(&mut warnings, "charge density mean", spec[0].norm_sqr(), total);
    let out = (0..g.len())
        .map(|idx| {
            if idx == 0 {
                ZERO
            } else {
                spec[idx] * (4.0 * PI / g.laplacian_symbol(idx))
            }
        })
        .collect();
    (ScalarField::from_spectrum(g, out), warnings)
}

/// Vector Poisson solve −ΔA = 4πj with Â(0) = 0.
pub fn coulomb_solve_vector(j: &VectorField) -> VectorField {
    let g = *j.grid();
    j.map_spectrum(|idx, f| {
        if idx == 0 {
            [ZERO; 3]
        } else {
            f.map(|c| c * (4.0 * PI / g.laplacian_symbol(idx)))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_scalar(g: Grid3, rng: &mut ChaCha8Rng) -> ScalarField {
        ScalarField::new(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn random_vector(g: Grid3, rng: &mut ChaCha8Rng) -> VectorField {
        VectorField::new(std::array::from_fn(|_| random_scalar(g, rng))).unwrap()
    }

    #[test]
    fn analytic_derivatives() {
        let g = Grid3::new(8, 2.0 * PI).unwrap();
        let k1 = 2.0;
        let v = ScalarField::from_fn(g, |x| (k1 * x[0]).cos());
        let e = electric_field(&v);
        for idx in 0..g.len() {
            let x = g.position(idx);
            let ex = e.at(idx);
            assert!((ex[0] - k1 * (k1 * x[0]).sin()).abs() < 1e-12);
            assert!(ex[1].abs() < 1e-12 && ex[2].abs() < 1e-12);
        }
        let a = VectorField::from_fn(g, |x| [0.0, (k1 * x[0]).cos(), 0.0]);
        let b = curl(&a).unwrap();
        assert!(divergence(&a).max_abs() < 1e-12);
        for idx in 0..g.len() {
            let x = g.position(idx);
            let bx = b.at(idx);
            assert!((bx[2] + k1 * (k1 * x[0]).sin()).abs() < 1e-12);
            assert!(bx[0].abs() < 1e-12 && bx[1].abs() < 1e-12);
        }
    }

    #[test]
    fn differential_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [4, 5, 6] {
            let g = Grid3::new(n, 3.0).unwrap();
            let v = random_scalar(g, &mut rng);
            let a = random_vector(g, &mut rng);
            assert!(curl(&gradient(&v)).unwrap().max_abs() < 1e-12);
            assert!(divergence(&curl(&a).unwrap()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn leray_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Grid3::new(6, 2.5).unwrap();
        let chi = random_scalar(g, &mut rng);
        assert!(leray_project(&gradient(&chi)).max_abs() < 1e-12);
        let a = random_vector(g, &mut rng);
        let p = leray_project(&a);
        assert!(divergence(&p).max_abs() < 1e-12);
        let pp = leray_project(&p);
        assert!(pp.axpy(-1.0, &p).max_abs() < 1e-12);
        let c = curl(&a).unwrap();
        assert!(leray_project(&c).axpy(-1.0, &c).max_abs() < 1e-12);
    }

    #[test]
    fn coulomb_single_mode_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Grid3::new(6, 4.0).unwrap();
        let rho = random_scalar(g, &mut rng);
        let (v, warnings) = coulomb_solve(&rho);
        assert_eq!(warnings.len(), 1);
        let centred = rho.axpy(-rho.mean(), &ScalarField::new(g, vec![1.0; g.len()]).unwrap());
        let res = neg_laplacian(&v).axpy(-4.0 * PI, &centred);
        assert!(res.l2_norm() <= 1e-12 * centred.l2_norm());

        let (zero, w) = coulomb_solve(&ScalarField::zeros(g));
        assert!(w.is_empty());
        assert_eq!(zero.max_abs(), 0.0);

        let idx = g.index(1, 2, 0);
        let mut spec = vec![ZERO; g.len()];
        spec[idx] = Complex64::new(0.3, 0.1);
        spec[g.negate(idx)] = Complex64::new(0.3, -0.1);
        let (v, _) = coulomb_solve(&ScalarField::from_spectrum(g, spec));
        let expect = Complex64::new(0.3, 0.1) * 4.0 * PI / g.laplacian_symbol(idx);
        assert!((v.spectrum()[idx] - expect).norm() < 1e-12);
    }
}
