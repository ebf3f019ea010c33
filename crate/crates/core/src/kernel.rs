//! Vacuum dielectric response M(k), the Uehling kernel U(k) and the quadratic
//! energy F₂.
//!
//! Fourier convention for [`f2_energy`]: the grid transform is unitary
//! (`f̂(q) = N^{-1/2} Σ_x e^{-iq·x} f(x)`), so `h³ Σ_x |f|² = h³ Σ_q |f̂|²` exactly
//! and `F₂ = (h³/8π) Σ_q M(|q|) (|B̂_q|² − |Ê_q|²)` is the lattice version of
//! `(1/8π)∫M(|B̂|² − |Ê|²)` with the continuum unitary transform.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::field::FieldStrength;
use crate::pv::{phi_unchecked, PVScheme};
use crate::quadrature::{integrate, QuadResult};

pub const M_TOL: f64 = 1e-10;
pub const U_TOL: f64 = 1e-12;
pub const GAP_TOL: f64 = 1e-13;

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0) || !k.is_finite() {
        return invalid(format!("momentum must be finite and non-negative, got {k}"));
    }
    Ok(())
}

/// `M(k)` with its quadrature error estimate, to absolute tolerance `tol`.
pub fn m_kernel_with_tolerance(scheme: &PVScheme, k: f64, tol: f64) -> Result<QuadResult> {
    check_k(k)?;
    let k2 = k * k;
    let f = |u: f64| {
        let w = u * (1.0 - u);
        w * phi_unchecked(scheme, w * k2)
    };
    let r = integrate(f, 0.0, 1.0, &[0.5], tol * PI / 2.0)?;
    Ok(QuadResult {
        value: -2.0 / PI * r.value,
        error: 2.0 / PI * r.error,
        panels: r.panels,
    })
}

/// `M(k) = −(2/π) ∫₀¹ u(1−u) Φ(u(1−u)k²) du`.
pub fn m_kernel(scheme: &PVScheme, k: f64) -> Result<f64> {
    Ok(m_kernel_with_tolerance(scheme, k, M_TOL)?.value)
}

/// `M(0) − M(k) = (2/π) ∫₀¹ u(1−u) Σ_j c_j log(1 + u(1−u)k²/m_j²) du`.
pub fn m_drop(scheme: &PVScheme, k: f64, tol: f64) -> Result<QuadResult> {
    check_k(k)?;
    let k2 = k * k;
    let terms = scheme.terms();
    let f = |u: f64| {
        let w = u * (1.0 - u);
        w * terms
            .iter()
            .map(|(c, m)| c * (w * k2 / (m * m)).ln_1p())
            .sum::<f64>()
    };
    let r = integrate(f, 0.0, 1.0, &[0.5], tol * PI / 2.0)?;
    Ok(QuadResult {
        value: 2.0 / PI * r.value,
        error: 2.0 / PI * r.error,
        panels: r.panels,
    })
}

fn uehling_quad(x: f64, tol: f64) -> Result<QuadResult> {
    let x2 = x * x;
    let pref = x2 / (4.0 * PI);
    if pref == 0.0 {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let f = |z: f64| {
        let z2 = z * z;
        (z2 - z2 * z2 / 3.0) / (1.0 + x2 * (1.0 - z2) / 4.0)
    };
    let r = integrate(f, 0.0, 1.0, &[0.5], tol / pref)?;
    Ok(QuadResult {
        value: pref * r.value,
        error: pref * r.error,
        panels: r.panels,
    })
}

/// `U(k) = (x²/4π) ∫₀¹ (z² − z⁴/3) / (1 + x²(1−z²)/4) dz` with `x = k/m`.
pub fn uehling_kernel(k: f64, m: f64) -> Result<f64> {
    check_k(k)?;
    if !(m > 0.0) || !m.is_finite() {
        return invalid(format!("reference mass must be positive, got {m}"));
    }
    Ok(uehling_quad(k / m, U_TOL)?.value)
}

/// `(2 log Λ/(3π) − M(k)) − U(k/m0)`, evaluated from the cancellation-free form of
/// `M(0) − M(k)`.
pub fn kernel_gap(scheme: &PVScheme, k: f64) -> Result<f64> {
    let drop = m_drop(scheme, k, GAP_TOL)?.value;
    let u = uehling_quad(k / scheme.masses().m0, GAP_TOL)?.value;
    Ok(drop - u)
}

/// Tabulated kernel over a k grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelTable {
    pub scheme: PVScheme,
    pub k_values: Vec<f64>,
    pub m_values: Vec<f64>,
    pub u_values: Vec<f64>,
    pub gap_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelMetadata {
    pub scheme: PVScheme,
    pub points: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub m_tolerance: f64,
    pub u_tolerance: f64,
    pub gap_tolerance: f64,
    pub m_zero_closed_form: f64,
}

impl KernelTable {
    /// `points` equally spaced momenta on `[0, k_max]`.
    pub fn tabulate(scheme: &PVScheme, k_max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return invalid("a kernel table needs at least 2 points");
        }
        check_k(k_max)?;
        if k_max <= 0.0 {
            return invalid("k_max must be positive");
        }
        let ks: Vec<f64> = (0..points)
            .map(|i| k_max * i as f64 / (points - 1) as f64)
            .collect();
        Self::on_grid(scheme, ks)
    }

    pub fn on_grid(scheme: &PVScheme, k_values: Vec<f64>) -> Result<Self> {
        if k_values.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("k values must be strictly increasing");
        }
        let rows: Vec<Result<(f64, f64, f64)>> = Execution::global().map(&k_values, |&k| {
            let m = m_kernel(scheme, k)?;
            let u = uehling_kernel(k, scheme.masses().m0)?;
            let g = kernel_gap(scheme, k)?;
            Ok((m, u, g))
        });
        let mut table = KernelTable {
            scheme: *scheme,
            k_values,
            m_values: Vec::new(),
            u_values: Vec::new(),
            gap_values: Vec::new(),
        };
        for r in rows {
            let (m, u, g) = r?;
            table.m_values.push(m);
            table.u_values.push(u);
            table.gap_values.push(g);
        }
        Ok(table)
    }

    pub fn metadata(&self) -> KernelMetadata {
        KernelMetadata {
            scheme: self.scheme,
            points: self.k_values.len(),
            k_min: self.k_values[0],
            k_max: *self.k_values.last().expect("non-empty"),
            m_tolerance: M_TOL,
            u_tolerance: U_TOL,
            gap_tolerance: GAP_TOL,
            m_zero_closed_form: self.scheme.m_zero(),
        }
    }

    /// CSV with header `k,M,U,gap`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,M,U,gap")?;
        for i in 0..self.k_values.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.k_values[i], self.m_values[i], self.u_values[i], self.gap_values[i]
            )?;
        }
        Ok(())
    }
}

/// Memoized M over the distinct |q|² of a grid.
pub(crate) fn kernel_on_modes(scheme: &PVScheme, k2: &[f64]) -> Result<Vec<f64>> {
    let mut distinct: Vec<u64> = k2.iter().map(|x| x.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let values: Vec<Result<f64>> =
        Execution::global().map(&distinct, |b| m_kernel(scheme, f64::from_bits(*b).sqrt()));
    let mut lookup = HashMap::with_capacity(distinct.len());
    for (b, v) in distinct.iter().zip(values) {
        lookup.insert(*b, v?);
    }
    Ok(k2.iter().map(|x| lookup[&x.to_bits()]).collect())
}

/// Lattice F₂ = (h³/8π) Σ_q M(|q|)(|B̂_q|² − |Ê_q|²).
pub fn f2_energy(field: &FieldStrength, scheme: &PVScheme) -> Result<f64> {
    let g = *field.e.grid();
    field.b.grid().ensure_same(&g)?;
    let k2: Vec<f64> = (0..g.len()).map(|idx| g.laplacian_symbol(idx)).collect();
    let m = kernel_on_modes(scheme, &k2)?;
    let mut total = 0.0;
    for c in 0..3 {
        let be = field.b.component(c).spectrum();
        let ee = field.e.component(c).spectrum();
        for idx in 0..g.len() {
            total += m[idx] * (be[idx].norm_sqr() - ee[idx].norm_sqr());
        }
    }
    Ok(g.cell_volume() * total / (8.0 * PI))
}
