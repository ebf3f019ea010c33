//! Numerical certificates: charge conjugation, the quadratic response against
//! an independent second-order perturbation formula, and remainder scaling.

use faer::{c64, Mat, Side};
use num_complex::Complex64;
use serde::Serialize;

use super::matrices::{self, alpha_dot_complex, dirac_matrices, free_symbol, Mat4};
use super::operator::{band_limit, band_modes, build_operator, momentum, LatticeDiracOperator, PotentialModes};
use super::vacuum::{counterterm_coefficient, pv_energy_impl};
use crate::error::{invalid, Result, VacuumError};
use crate::exec::Execution;
use crate::field::{FieldStrength, FourPotential, Grid3};
use crate::kernel::f2_energy;
use crate::pv::PVScheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugationReport {
    /// ‖C D_{eA} C⁻¹ + D_{−eA}‖_F / ‖D_{eA}‖_F
    pub operator_residual: f64,
    /// max_i |λ_i(D_{eA}) − λ_i(−D_{−eA})| over sorted spectra
    pub spectral_mismatch: f64,
}

/// The matrix iβα₂.
pub fn conjugation_matrix() -> Mat4 {
    let m = dirac_matrices();
    matrices::scale(&matrices::mul(&m.beta, &m.alpha[1]), Complex64::new(0.0, 1.0))
}

/// Check C D_{m,eA} C⁻¹ = −D_{m,−eA} with C = iβα₂ ∘ (complex conjugation).
///
/// In the plane-wave basis (Cψ)(q) = iβα₂ conj(ψ(−q)), so the conjugated
/// matrix has entries U conj(D(−q,−q')) U†.
pub fn charge_conjugation_check(op: &LatticeDiracOperator) -> Result<ConjugationReport> {
    let grid = *op.grid();
    let flipped = build_operator(grid, op.mass(), &op.potential().scaled(-1.0), op.coupling())?;
    let d = op.to_dense();
    let dn = flipped.to_dense();
    let modes = band_modes(grid.n());
    let b = band_limit(grid.n());
    let w = 2 * b + 1;
    let pos = |q: [i64; 3]| (((q[0] + b) * w + q[1] + b) * w + q[2] + b) as usize;
    let neg: Vec<usize> = modes.iter().map(|q| pos(q.map(|x| -x))).collect();
    let u = conjugation_matrix();
    let ud = matrices::adjoint(&u);

    let mut resid = 0.0;
    let mut norm = 0.0;
    for i in 0..modes.len() {
        for j in 0..modes.len() {
            let mut blk: Mat4 = [[Complex64::new(0.0, 0.0); 4]; 4];
            for a in 0..4 {
                for c in 0..4 {
                    blk[a][c] = d[(4 * neg[i] + a, 4 * neg[j] + c)].conj();
                }
            }
            let conj = matrices::mul(&matrices::mul(&u, &blk), &ud);
            for a in 0..4 {
                for c in 0..4 {
                    resid += (conj[a][c] + dn[(4 * i + a, 4 * j + c)]).norm_sqr();
                    norm += d[(4 * i + a, 4 * j + c)].norm_sqr();
                }
            }
        }
    }
    let ev = |m: &Mat<c64>| {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| VacuumError::Numeric {
            context: "charge conjugation spectra",
            detail: format!("{e:?}"),
        })
    };
    let l1 = ev(&d)?;
    let mut l2: Vec<f64> = ev(&dn)?.into_iter().map(|x| -x).collect();
    l2.sort_by(f64::total_cmp);
    let mismatch = l1.iter().zip(&l2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ConjugationReport {
        operator_residual: (resid / norm).sqrt(),
        spectral_mismatch: mismatch,
    })
}

/// Exact second derivative of ε ↦ F_PV(εe·direction) at ε = 0.
///
/// Uses the second-order perturbation formula for tr|H + εW| around the free
/// operator, `d²/dε² tr|H+εW| = 4 Σ_{λa>0>λb} |W_ab|²/(λa − λb)`, written with the
/// free spectral projectors P±(q) = (1 ± h(q)/E(q))/2:
/// `4 Σ_{q,q'} tr(P₊(q) W_{qq'} P₋(q') W_{qq'}†) / (E(q) + E(q'))`.
pub fn hessian_oracle(scheme: &PVScheme, grid: Grid3, direction: &FourPotential, e: f64) -> Result<f64> {
    direction.grid().ensure_same(&grid)?;
    let dm = dirac_matrices();
    let pm = PotentialModes::from_potential(direction);
    let n = grid.n() as i64;
    let b = band_limit(grid.n());
    let modes = band_modes(grid.n());
    let norm = e / (grid.len() as f64).sqrt();
    let couplings: Vec<([i64; 3], Mat4)> = pm
        .modes
        .iter()
        .map(|(d, v, a)| {
            let mut w = alpha_dot_complex(&dm, a.map(|z| -z * norm));
            for (k, row) in w.iter_mut().enumerate() {
                row[k] += v * norm;
            }
            (*d, w)
        })
        .collect();
    let terms = scheme.terms();
    let per_mass: Vec<f64> = Execution::global().map(&terms, |(c, m)| {
        let proj = |q: [i64; 3]| {
            let p = momentum(&grid, q);
            let en = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + m * m).sqrt();
            let h = free_symbol(&dm, p, *m);
            let id = matrices::identity();
            let plus = matrices::scale(&matrices::add(&id, &matrices::scale(&h, Complex64::new(1.0 / en, 0.0))), Complex64::new(0.5, 0.0));
            let minus = matrices::scale(&matrices::add(&id, &matrices::scale(&h, Complex64::new(-1.0 / en, 0.0))), Complex64::new(0.5, 0.0));
            (plus, minus, en)
        };
        let mut total = 0.0;
        for q in &modes {
            let (pp, _, eq) = proj(*q);
            for (d, w) in &couplings {
                for ax_shift in shifts(*q, *d, n, b) {
                    let (_, pm_, eqp) = proj(ax_shift);
                    let t = matrices::mul(&matrices::mul(&pp, w), &matrices::mul(&pm_, &matrices::adjoint(w)));
                    total += matrices::trace(&t).re / (eq + eqp);
                }
            }
        }
        -2.0 * c * total
    });
    let a2: f64 = (0..3)
        .map(|c| direction.a().component(c).values().iter().map(|x| x * x).sum::<f64>())
        .sum();
    let ct = -counterterm_coefficient(scheme, &grid) * e * e * a2 / grid.len() as f64;
    Ok(per_mass.iter().sum::<f64>() + ct)
}

/// Band vectors q' with q − q' ≡ d (mod n).
fn shifts(q: [i64; 3], d: [i64; 3], n: i64, b: i64) -> Vec<[i64; 3]> {
    let mut per_axis: [Vec<i64>; 3] = Default::default();
    for ax in 0..3 {
        for t in [-1i64, 0, 1] {
            let x = q[ax] - d[ax] + t * n;
            if x.abs() <= b && !per_axis[ax].contains(&x) {
                per_axis[ax].push(x);
            }
        }
    }
    let mut out = Vec::new();
    for &x in &per_axis[0] {
        for &y in &per_axis[1] {
            for &z in &per_axis[2] {
                out.push([x, y, z]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticResponse {
    /// Richardson-extrapolated second difference of ε ↦ F_PV(εe·δ).
    pub fd_hessian: f64,
    /// Second-order perturbation value, [`hessian_oracle`].
    pub oracle_hessian: f64,
    /// 2e²F₂(δ) from the continuum kernel.
    pub f2_prediction: f64,
    /// Central first difference at the finest step.
    pub first_derivative: f64,
    pub base_step: f64,
    /// Sobolev norm of the direction before normalization.
    pub direction_norm: f64,
}

/// Base finite-difference step in units of √m0 along a Sobolev-normalized direction.
pub const FD_STEP: f64 = 0.25;

fn normalized(direction: &FourPotential) -> Result<(FourPotential, f64)> {
    let s = direction.sobolev_norm();
    if !(s > 0.0) {
        return invalid("direction has zero Sobolev norm");
    }
    Ok((direction.scaled(1.0 / s), s))
}

/// Second-order response of F_PV at zero potential along `direction`.
pub fn quadratic_response(scheme: &PVScheme, grid: Grid3, direction: &FourPotential, e: f64) -> Result<QuadraticResponse> {
    quadratic_response_with_step(scheme, grid, direction, e, FD_STEP * scheme.masses().m0.sqrt())
}

pub fn quadratic_response_with_step(
    scheme: &PVScheme,
    grid: Grid3,
    direction: &FourPotential,
    e: f64,
    step: f64,
) -> Result<QuadraticResponse> {
    let (dir, s) = normalized(direction)?;
    let f = |eps: f64| pv_energy_impl(scheme, &grid, &dir.scaled(eps), e, true);
    let steps = [step, step / 2.0, step / 4.0];
    let mut second = [0.0; 3];
    let mut first = 0.0;
    for (i, h) in steps.iter().enumerate() {
        let fp = f(*h)?;
        let fm = f(-*h)?;
        second[i] = (fp + fm) / (h * h);
        if i == 2 {
            first = (fp - fm) / (2.0 * h);
        }
    }
    let r1 = [(4.0 * second[1] - second[0]) / 3.0, (4.0 * second[2] - second[1]) / 3.0];
    let fd = (16.0 * r1[1] - r1[0]) / 15.0;
    let oracle = hessian_oracle(scheme, grid, &dir, e)?;
    let f2 = 2.0 * e * e * f2_energy(&FieldStrength::from_potential(&dir), scheme)?;
    Ok(QuadraticResponse {
        fd_hessian: fd,
        oracle_hessian: oracle,
        f2_prediction: f2,
        first_derivative: first,
        base_step: step,
        direction_norm: s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderReport {
    pub epsilons: Vec<f64>,
    /// R(ε) = F_PV(εe·δ) − ε²H/2 with H the exact lattice Hessian.
    pub remainders: Vec<f64>,
    /// R(−ε) at the same steps.
    pub mirrored: Vec<f64>,
    pub hessian: f64,
    /// Least-squares slope of log|R| against log ε.
    pub exponent: f64,
}

pub fn remainder_scaling(scheme: &PVScheme, grid: Grid3, direction: &FourPotential, e: f64, eps0: f64) -> Result<RemainderReport> {
    let (dir, _) = normalized(direction)?;
    let h = hessian_oracle(scheme, grid, &dir, e)?;
    let epsilons = vec![eps0, eps0 / 2.0, eps0 / 4.0];
    let mut remainders = Vec::new();
    let mut mirrored = Vec::new();
    for &eps in &epsilons {
        let q = 0.5 * eps * eps * h;
        remainders.push(pv_energy_impl(scheme, &grid, &dir.scaled(eps), e, true)? - q);
        mirrored.push(pv_energy_impl(scheme, &grid, &dir.scaled(-eps), e, true)? - q);
    }
    let xs: Vec<f64> = epsilons.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = remainders.iter().map(|r| r.abs().ln()).collect();
    let exponent = slope(&xs, &ys);
    Ok(RemainderReport {
        epsilons,
        remainders,
        mirrored,
        hessian: h,
        exponent,
    })
}

pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pv::{derive_scheme, MassSpectrum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugation_identity_small_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = Grid3::new(4, 3.5).unwrap();
        let p = FourPotential::random(g, &mut rng, 1, 0.5, 0.5);
        let op = build_operator(g, 1.0, &p, 0.9).unwrap();
        let r = charge_conjugation_check(&op).unwrap();
        assert!(r.operator_residual < 1e-12, "{r:?}");
        assert!(r.spectral_mismatch < 1e-10, "{r:?}");
        let free = build_operator(g, 1.0, &FourPotential::zero(g), 0.9).unwrap();
        assert!(charge_conjugation_check(&free).unwrap().operator_residual < 1e-14);
    }

    #[test]
    fn oracle_matches_finite_differences_on_small_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = derive_scheme(MassSpectrum::new(1.0, 2.0, 3.0).unwrap()).unwrap();
        let g = Grid3::new(4, 4.0).unwrap();
        let p = FourPotential::random(g, &mut rng, 1, 1.0, 1.0);
        let r = quadratic_response(&s, g, &p, 1.0).unwrap();
        assert!(
            (r.fd_hessian - r.oracle_hessian).abs() <= 1e-6 * r.oracle_hessian.abs(),
            "{r:?}"
        );
        assert!(r.first_derivative.abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [1.0f64, 0.5, 0.25].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 0.5, 0.25].iter().map(|x| (3.0 * x.powi(4)).ln()).collect();
        assert!((slope(&xs, &ys) - 4.0).abs() < 1e-12);
    }
}
