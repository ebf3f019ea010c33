use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::calculus::{self, maybe_warn, FieldWarning};
use super::{Grid3, ScalarField, VectorField};
use crate::error::{invalid, Result};

/// Coulomb-gauge four-potential (V, A) restricted to admissible modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FourPotential {
    v: ScalarField,
    a: VectorField,
}

impl FourPotential {
    /// Project (v, a) to admissible Coulomb-gauge data. Changes larger than
    /// 1e-10 relative are reported.
    pub fn new(v: ScalarField, a: VectorField) -> Result<(Self, Vec<FieldWarning>)> {
        v.grid().ensure_same(a.grid())?;
        let mut warnings = Vec::new();
        let (pv, rv) = calculus::admissible_scalar(&v);
        let (pa, ra) = calculus::admissible_transverse(&a);
        maybe_warn(&mut warnings, "scalar potential zero/Nyquist modes", rv * rv, 1.0);
        maybe_warn(&mut warnings, "vector potential gauge/zero/Nyquist part", ra * ra, 1.0);
        Ok((Self { v: pv, a: pa }, warnings))
    }

    /// Caller guarantees admissibility.
    pub(crate) fn from_parts_unchecked(v: ScalarField, a: VectorField) -> Self {
        Self { v, a }
    }

    pub fn zero(grid: Grid3) -> Self {
        Self {
            v: ScalarField::zeros(grid),
            a: VectorField::zeros(grid),
        }
    }

    pub fn electrostatic(v: ScalarField) -> Result<(Self, Vec<FieldWarning>)> {
        let a = VectorField::zeros(*v.grid());
        Self::new(v, a)
    }

    pub fn magnetic(a: VectorField) -> Result<(Self, Vec<FieldWarning>)> {
        let v = ScalarField::zeros(*a.grid());
        Self::new(v, a)
    }

    /// Random smooth potential on admissible modes with |q_i| ≤ `qmax`.
    pub fn random<R: Rng>(grid: Grid3, rng: &mut R, qmax: i64, v_amp: f64, a_amp: f64) -> Self {
        let v = random_scalar_modes(grid, rng, qmax, v_amp);
        let a = VectorField::from_components_unchecked(std::array::from_fn(|_| {
            random_scalar_modes(grid, rng, qmax, a_amp)
        }));
        let (a, _) = calculus::admissible_transverse(&a);
        Self { v, a }
    }

    pub fn grid(&self) -> &Grid3 {
        self.v.grid()
    }

    pub fn v(&self) -> &ScalarField {
        &self.v
    }

    pub fn a(&self) -> &VectorField {
        &self.a
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            v: self.v.scaled(s),
            a: self.a.scaled(s),
        }
    }

    /// self + s·other
    pub fn axpy(&self, s: f64, other: &FourPotential) -> Self {
        Self {
            v: self.v.axpy(s, &other.v),
            a: self.a.axpy(s, &other.a),
        }
    }

    pub fn sobolev_norm(&self) -> f64 {
        field_norms(self).sobolev_norm
    }

    /// Sobolev-norm parts (‖∇V‖, ‖curl A‖).
    pub fn sobolev_parts(&self) -> (f64, f64) {
        let g = *self.grid();
        let h3 = g.cell_volume();
        let gv: f64 = self
            .v
            .spectrum()
            .iter()
            .enumerate()
            .map(|(idx, c)| sym2(&g, idx) * c.norm_sqr())
            .sum();
        let ga: f64 = (0..3)
            .map(|c| {
                self.a
                    .component(c)
                    .spectrum()
                    .iter()
                    .enumerate()
                    .map(|(idx, z)| sym2(&g, idx) * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        // transverse A: |k × Â|² = |k|²|Â|²
        ((h3 * gv).sqrt(), (h3 * ga).sqrt())
    }
}

fn sym2(g: &Grid3, idx: usize) -> f64 {
    g.wavevector(idx).iter().map(|k| k * k).sum()
}

pub(crate) fn random_scalar_modes<R: Rng>(grid: Grid3, rng: &mut R, qmax: i64, amp: f64) -> ScalarField {
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in 0..grid.len() {
        if !grid.is_admissible(idx) {
            continue;
        }
        let q = grid.coords(idx).map(|c| grid.signed(c));
        if q.iter().any(|x| x.abs() > qmax) {
            continue;
        }
        let neg = grid.negate(idx);
        if neg < idx {
            continue;
        }
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp;
        spec[idx] = z;
        spec[neg] = z.conj();
    }
    ScalarField::from_spectrum(grid, spec)
}

/// (E, B) = (−∇V, curl A).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStrength {
    pub e: VectorField,
    pub b: VectorField,
}

impl FieldStrength {
    pub fn from_potential(p: &FourPotential) -> Self {
        Self {
            e: calculus::electric_field(p.v()),
            b: calculus::curl(p.a()).expect("components share a grid"),
        }
    }

    pub fn new(e: VectorField, b: VectorField) -> Result<Self> {
        e.grid().ensure_same(b.grid())?;
        Ok(Self { e, b })
    }

    pub fn grid(&self) -> &Grid3 {
        self.e.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldNorms {
    pub sobolev_norm: f64,
    pub maxwell_action: f64,
}

/// Sobolev norm (‖∇V‖² + ‖curl A‖²)^{1/2} and the Maxwell action
/// (‖∇V‖² − ‖curl A‖²)/8π, both with the discrete L² product h³Σ.
pub fn field_norms(p: &FourPotential) -> FieldNorms {
    let (gv, ca) = p.sobolev_parts();
    FieldNorms {
        sobolev_norm: (gv * gv + ca * ca).sqrt(),
        maxwell_action: (gv * gv - ca * ca) / (8.0 * PI),
    }
}

/// External charge and current densities on admissible modes: zero mean,
/// divergence-free current, no Nyquist content.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDensities {
    rho_ext: ScalarField,
    j_ext: VectorField,
}

impl SourceDensities {
    pub fn ingest(rho: ScalarField, j: VectorField) -> Result<(Self, Vec<FieldWarning>)> {
        rho.grid().ensure_same(j.grid())?;
        let g = *rho.grid();
        let mut warnings = Vec::new();
        let spec = rho.spectrum();
        let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
        maybe_warn(&mut warnings, "charge density mean", spec[0].norm_sqr(), total);
        let nyq: f64 = (1..g.len()).filter(|i| g.has_nyquist(*i)).map(|i| spec[i].norm_sqr()).sum();
        maybe_warn(&mut warnings, "charge density Nyquist modes", nyq, total);
        let rho = rho.map_spectrum(|idx, c| if g.is_admissible(idx) { c } else { Complex64::new(0.0, 0.0) });
        let jt = j.map_spectrum(|idx, f| {
            if g.is_admissible(idx) {
                calculus::transverse(g.wavevector(idx), f)
            } else {
                [Complex64::new(0.0, 0.0); 3]
            }
        });
        let jt_total = j.l2_norm().powi(2);
        maybe_warn(&mut warnings, "longitudinal, constant or Nyquist current", jt.axpy(-1.0, &j).l2_norm().powi(2), jt_total);
        Ok((Self { rho_ext: rho, j_ext: jt }, warnings))
    }

    pub fn none(grid: Grid3) -> Self {
        Self {
            rho_ext: ScalarField::zeros(grid),
            j_ext: VectorField::zeros(grid),
        }
    }

    /// Periodized Gaussian charge `charge·exp(−|x−c|²/2w²)/((2π)^{3/2}w³)`, restricted
    /// to admissible modes.
    pub fn gaussian(grid: Grid3, charge: f64, width: f64, center: [f64; 3]) -> Result<Self> {
        if !(width > 0.0) {
            return invalid(format!("gaussian width must be positive, got {width}"));
        }
        let l = grid.box_length();
        let norm = charge / ((2.0 * PI).powf(1.5) * width.powi(3));
        let rho = ScalarField::from_fn(grid, |x| {
            let mut r2 = 0.0;
            for a in 0..3 {
                let mut d = x[a] - center[a];
                d -= l * (d / l).round();
                r2 += d * d;
            }
            norm * (-r2 / (2.0 * width * width)).exp()
        });
        let (s, _) = Self::ingest(rho, VectorField::zeros(grid))?;
        Ok(s)
    }

    /// ρ = amplitude·cos(q·x) for an integer wave vector q.
    pub fn charge_mode(grid: Grid3, q: [i64; 3], amplitude: f64) -> Result<Self> {
        let p = wave(&grid, q)?;
        let rho = ScalarField::from_fn(grid, |x| amplitude * (p[0] * x[0] + p[1] * x[1] + p[2] * x[2]).cos());
        let (s, _) = Self::ingest(rho, VectorField::zeros(grid))?;
        Ok(s)
    }

    /// j = amplitude·polarization·cos(q·x), projected to its transverse part.
    pub fn current_mode(grid: Grid3, q: [i64; 3], polarization: [f64; 3], amplitude: f64) -> Result<Self> {
        let p = wave(&grid, q)?;
        let j = VectorField::from_fn(grid, |x| {
            let c = amplitude * (p[0] * x[0] + p[1] * x[1] + p[2] * x[2]).cos();
            polarization.map(|e| e * c)
        });
        let (s, _) = Self::ingest(ScalarField::zeros(grid), j)?;
        Ok(s)
    }

    pub fn grid(&self) -> &Grid3 {
        self.rho_ext.grid()
    }

    pub fn rho(&self) -> &ScalarField {
        &self.rho_ext
    }

    pub fn current(&self) -> &VectorField {
        &self.j_ext
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rho_ext: self.rho_ext.scaled(s),
            j_ext: self.j_ext.scaled(s),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rho_ext.max_abs() == 0.0 && self.j_ext.max_abs() == 0.0
    }
}

fn wave(grid: &Grid3, q: [i64; 3]) -> Result<[f64; 3]> {
    let n = grid.n() as i64;
    if q.iter().any(|x| 2 * x.abs() >= n) {
        return invalid(format!("mode {q:?} is not resolved below Nyquist on n={n}"));
    }
    Ok(q.map(|x| 2.0 * PI * x as f64 / grid.box_length()))
}
