//! Screened linear response and the self-consistent Maxwell equations in the
//! PV-regulated vacuum.
//!
//! The self-consistent potential is the saddle point of
//! `L(A) = −F_PV(eA) + (‖∇V‖² − ‖curl A‖²)/8π − e⟨ρ_ext, V⟩ + e⟨j_ext, A⟩`,
//! whose optimality system is
//! `−ΔV = 4πe(ρ_{eA} + ρ_ext)`, `−ΔA = 4πe P_T(j_{eA} + j_ext)`.
//! Both right-hand sides are projected to the admissible modes that
//! potentials may occupy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{calculus, field_norms, FourPotential, Grid3, ScalarField, SourceDensities, VectorField};
use crate::kernel::kernel_on_modes;
use crate::lattice::vacuum::{pv_energy_impl, vacuum_state};
use crate::pv::PVScheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleConfig {
    pub coupling: f64,
    pub damping: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
    /// Bound on ‖∇V‖.
    pub trust_radius_v: f64,
    /// Bound on ‖curl A‖.
    pub trust_radius_a: f64,
}

pub const DEFAULT_DAMPING: f64 = 0.5;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_TRUST_FACTOR: f64 = 0.1;

impl SaddleConfig {
    /// Defaults with trust radii r√m0/(3e), r = 0.1.
    pub fn with_defaults(scheme: &PVScheme, coupling: f64) -> Self {
        let r = trust_radius(scheme, coupling, DEFAULT_TRUST_FACTOR);
        Self {
            coupling,
            damping: DEFAULT_DAMPING,
            max_iter: DEFAULT_MAX_ITER,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            trust_radius_v: r,
            trust_radius_a: r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return invalid(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if !(self.residual_tol > 0.0) {
            return invalid("residual tolerance must be positive");
        }
        if !(self.coupling >= 0.0) || !self.coupling.is_finite() {
            return invalid(format!("coupling must be finite and non-negative, got {}", self.coupling));
        }
        if !(self.trust_radius_v > 0.0 && self.trust_radius_a > 0.0) {
            return invalid("trust radii must be positive");
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }
        Ok(())
    }
}

/// r√m0/(3e); infinite at e = 0.
pub fn trust_radius(scheme: &PVScheme, coupling: f64, r: f64) -> f64 {
    if coupling == 0.0 {
        f64::INFINITY
    } else {
        r * scheme.masses().m0.sqrt() / (3.0 * coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    BoundaryHit,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub potential: FourPotential,
    /// Normalized SCF residual before each update, then at the returned iterate.
    pub residual_history: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub lagrangian: f64,
    /// Raw (res_v, res_a) at the returned potential.
    pub final_residual: (f64, f64),
    pub clipped_final: bool,
    pub config: SaddleConfig,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    status: SolveStatus,
    iterations: usize,
    residual_history: &'a [f64],
    final_residual_v: f64,
    final_residual_a: f64,
    lagrangian: f64,
    sobolev_norm: f64,
    grad_v_norm: f64,
    curl_a_norm: f64,
    clipped_final: bool,
    config: SaddleConfig,
}

impl SolveReport {
    pub fn final_normalized_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (gv, ca) = self.potential.sobolev_parts();
        serde_json::to_value(ReportJson {
            status: self.status,
            iterations: self.iterations,
            residual_history: &self.residual_history,
            final_residual_v: self.final_residual.0,
            final_residual_a: self.final_residual.1,
            lagrangian: self.lagrangian,
            sobolev_norm: (gv * gv + ca * ca).sqrt(),
            grad_v_norm: gv,
            curl_a_norm: ca,
            clipped_final: self.clipped_final,
            config: self.config,
        })
        .expect("report serializes")
    }
}

fn admissible_k2(grid: &Grid3) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| if grid.is_admissible(idx) { grid.laplacian_symbol(idx) } else { 0.0 })
        .collect()
}

/// Screened solution with the overall factor e dropped:
/// `V̂ = 4πρ̂/(|k|²(1 + e²M(|k|)))`, `Â = 4π P_T ĵ/(|k|²(1 + e²M(|k|)))`.
pub fn screened_potential(scheme: &PVScheme, sources: &SourceDensities, e: f64, grid: Grid3) -> Result<FourPotential> {
    sources.grid().ensure_same(&grid)?;
    if !(e >= 0.0) || !e.is_finite() {
        return invalid(format!("coupling must be finite and non-negative, got {e}"));
    }
    let k2 = admissible_k2(&grid);
    let m = kernel_on_modes(scheme, &k2)?;
    let factor: Vec<f64> = (0..grid.len())
        .map(|idx| {
            if grid.is_admissible(idx) {
                4.0 * PI / (k2[idx] * (1.0 + e * e * m[idx]))
            } else {
                0.0
            }
        })
        .collect();
    let v = sources.rho().map_spectrum(|idx, c| c * factor[idx]);
    let a = sources.current().map_spectrum(|idx, f| {
        calculus::transverse(grid.wavevector(idx), f).map(|c| c * factor[idx])
    });
    Ok(FourPotential::from_parts_unchecked(v, a))
}

/// Linear-response potential `e·screened_potential`.
pub fn solve_linear_response(scheme: &PVScheme, sources: &SourceDensities, e: f64, grid: Grid3) -> Result<FourPotential> {
    Ok(screened_potential(scheme, sources, e, grid)?.scaled(e))
}

/// Φ(A): the potential generated by the vacuum plus external densities.
fn fixed_point_map(
    scheme: &PVScheme,
    sources: &SourceDensities,
    e: f64,
    grid: &Grid3,
    a: &FourPotential,
) -> Result<FourPotential> {
    let st = vacuum_state(scheme, *grid, a, e)?;
    let rho = st.rho.axpy(1.0, sources.rho());
    let j = st.current.axpy(1.0, sources.current());
    let factor = |idx: usize| {
        if grid.is_admissible(idx) {
            4.0 * PI * e / grid.laplacian_symbol(idx)
        } else {
            0.0
        }
    };
    let v = rho.map_spectrum(|idx, c| c * factor(idx));
    let av = j.map_spectrum(|idx, f| calculus::transverse(grid.wavevector(idx), f).map(|c| c * factor(idx)));
    Ok(FourPotential::from_parts_unchecked(v, av))
}

/// Discrete L² norms of the residuals `−ΔV − 4πe(ρ_{eA}+ρ_ext)` and
/// `−ΔA − 4πe P_T(j_{eA}+j_ext)`, on admissible modes.
pub fn scf_residual(
    a: &FourPotential,
    sources: &SourceDensities,
    scheme: &PVScheme,
    e: f64,
    grid: Grid3,
) -> Result<(f64, f64)> {
    let phi = fixed_point_map(scheme, sources, e, &grid, a)?;
    Ok(residual_from_map(a, &phi))
}

/// ‖|k|²(A − Φ(A))‖ per part, which equals the residual of the optimality system.
fn residual_from_map(a: &FourPotential, phi: &FourPotential) -> (f64, f64) {
    let d = a.axpy(-1.0, phi);
    let rv = calculus::neg_laplacian(d.v()).l2_norm();
    let ra = calculus::neg_laplacian_vector(d.a()).l2_norm();
    (rv, ra)
}

fn source_scale(sources: &SourceDensities, e: f64) -> f64 {
    4.0 * PI * e * (sources.rho().l2_norm().powi(2) + sources.current().l2_norm().powi(2)).sqrt()
}

/// Clip to the trust region; returns whether either part was rescaled.
fn clip(p: &FourPotential, cfg: &SaddleConfig) -> (FourPotential, bool) {
    let (gv, ca) = p.sobolev_parts();
    let sv = if gv > cfg.trust_radius_v { cfg.trust_radius_v / gv } else { 1.0 };
    let sa = if ca > cfg.trust_radius_a { cfg.trust_radius_a / ca } else { 1.0 };
    if sv == 1.0 && sa == 1.0 {
        return (p.clone(), false);
    }
    (
        FourPotential::from_parts_unchecked(p.v().scaled(sv), p.a().scaled(sa)),
        true,
    )
}

pub fn solve_self_consistent(
    scheme: &PVScheme,
    sources: &SourceDensities,
    grid: Grid3,
    config: &SaddleConfig,
) -> Result<SolveReport> {
    solve_self_consistent_from(scheme, sources, grid, config, &FourPotential::zero(grid))
}

/// Damped Picard iteration `A ← (1−τ)A + τΦ(A)` from `initial`.
pub fn solve_self_consistent_from(
    scheme: &PVScheme,
    sources: &SourceDensities,
    grid: Grid3,
    config: &SaddleConfig,
    initial: &FourPotential,
) -> Result<SolveReport> {
    config.validate()?;
    sources.grid().ensure_same(&grid)?;
    initial.grid().ensure_same(&grid)?;
    let e = config.coupling;
    let scale = source_scale(sources, e);
    let (mut a, mut clipped) = clip(initial, config);
    let mut history = Vec::new();

    if scale == 0.0 && a.sobolev_norm() == 0.0 {
        return Ok(SolveReport {
            potential: a,
            residual_history: vec![0.0],
            status: SolveStatus::Converged,
            iterations: 0,
            lagrangian: 0.0,
            final_residual: (0.0, 0.0),
            clipped_final: false,
            config: *config,
        });
    }
    // without sources the residual is measured against the initial field
    let scale = if scale > 0.0 {
        scale
    } else {
        let (gv, ca) = a.sobolev_parts();
        gv.max(ca)
    };

    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;
    let mut raw;
    loop {
        let phi = fixed_point_map(scheme, sources, e, &grid, &a)?;
        raw = residual_from_map(&a, &phi);
        let r = raw.0.max(raw.1) / scale;
        history.push(r);
        if r <= config.residual_tol {
            status = if clipped { SolveStatus::BoundaryHit } else { SolveStatus::Converged };
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        let next = a.scaled(1.0 - config.damping).axpy(config.damping, &phi);
        let (c, hit) = clip(&next, config);
        a = c;
        clipped = hit;
        iterations += 1;
    }
    let lagrangian = lagrangian_value(&a, sources, scheme, e, grid)?;
    Ok(SolveReport {
        potential: a,
        residual_history: history,
        status,
        iterations,
        lagrangian,
        final_residual: raw,
        clipped_final: clipped,
        config: *config,
    })
}

/// `−F_PV(eA) + (‖∇V‖² − ‖curl A‖²)/8π − e⟨ρ_ext, V⟩ + e⟨j_ext, A⟩`.
pub fn lagrangian_value(
    a: &FourPotential,
    sources: &SourceDensities,
    scheme: &PVScheme,
    e: f64,
    grid: Grid3,
) -> Result<f64> {
    a.grid().ensure_same(&grid)?;
    sources.grid().ensure_same(&grid)?;
    let f = pv_energy_impl(scheme, &grid, a, e, true)?;
    let maxwell = field_norms(a).maxwell_action;
    Ok(-f + maxwell - e * sources.rho().inner(a.v()) + e * sources.current().inner(a.a()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    /// "V", "A" or "mixed".
    pub kind: String,
    pub second_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleProbeReport {
    pub amplitude: f64,
    pub entries: Vec<ProbeEntry>,
    pub convex_in_v: bool,
    pub concave_in_a: bool,
}

/// Second central differences of the Lagrangian at `center` along each direction,
/// each normalized to unit Sobolev norm and scaled by `amplitude`.
pub fn saddle_probe(
    center: &FourPotential,
    sources: &SourceDensities,
    scheme: &PVScheme,
    e: f64,
    grid: Grid3,
    directions: &[FourPotential],
    amplitude: f64,
) -> Result<SaddleProbeReport> {
    let l0 = lagrangian_value(center, sources, scheme, e, grid)?;
    let mut entries = Vec::new();
    for d in directions {
        let (gv, ca) = d.sobolev_parts();
        let s = (gv * gv + ca * ca).sqrt();
        if s == 0.0 {
            return invalid("probe direction has zero Sobolev norm");
        }
        let kind = match (gv > 0.0, ca > 0.0) {
            (true, false) => "V",
            (false, true) => "A",
            _ => "mixed",
        };
        let step = d.scaled(amplitude / s);
        let lp = lagrangian_value(&center.axpy(1.0, &step), sources, scheme, e, grid)?;
        let lm = lagrangian_value(&center.axpy(-1.0, &step), sources, scheme, e, grid)?;
        entries.push(ProbeEntry {
            kind: kind.into(),
            second_difference: (lp + lm - 2.0 * l0) / (amplitude * amplitude),
        });
    }
    let convex_in_v = entries.iter().filter(|p| p.kind == "V").all(|p| p.second_difference > 0.0);
    let concave_in_a = entries.iter().filter(|p| p.kind == "A").all(|p| p.second_difference < 0.0);
    Ok(SaddleProbeReport {
        amplitude,
        entries,
        convex_in_v,
        concave_in_a,
    })
}

/// Pure-V and pure-A single-mode directions for [`saddle_probe`].
pub fn single_mode_directions(grid: Grid3, modes: &[[i64; 3]]) -> Result<Vec<FourPotential>> {
    let mut out = Vec::new();
    for q in modes {
        let p = q.map(|x| 2.0 * PI * x as f64 / grid.box_length());
        let phase = |x: [f64; 3]| p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
        let v = ScalarField::from_fn(grid, |x| phase(x).cos());
        let (pv, _) = FourPotential::electrostatic(v)?;
        // polarization orthogonal to q
        let pol = if q[0] == 0 && q[1] == 0 { [1.0, 0.0, 0.0] } else { [-(q[1] as f64), q[0] as f64, 0.0] };
        let a = VectorField::from_fn(grid, |x| pol.map(|c| c * phase(x).cos()));
        let (pa, _) = FourPotential::magnetic(a)?;
        if pv.sobolev_norm() == 0.0 || pa.sobolev_norm() == 0.0 {
            return invalid(format!("mode {q:?} is not admissible on this grid"));
        }
        out.push(pv);
        out.push(pa);
    }
    Ok(out)
}

/// Sobolev distance between two potentials.
pub fn sobolev_distance(a: &FourPotential, b: &FourPotential) -> f64 {
    a.axpy(-1.0, b).sobolev_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::coulomb_solve;
    use crate::pv::{derive_scheme, MassSpectrum};

    fn scheme() -> PVScheme {
        derive_scheme(MassSpectrum::new(1.0, 2.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        let s = scheme();
        let mut c = SaddleConfig::with_defaults(&s, 0.3);
        assert!(c.validate().is_ok());
        assert!((c.trust_radius_v - 0.1 / 0.9).abs() < 1e-15);
        c.damping = 0.0;
        assert!(c.validate().is_err());
        c.damping = 1.0;
        c.residual_tol = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unscreened_limit_is_coulomb() {
        let g = Grid3::new(8, 6.0).unwrap();
        let src = SourceDensities::gaussian(g, 1.0, 0.7, [3.0; 3]).unwrap();
        let v = screened_potential(&scheme(), &src, 0.0, g).unwrap();
        let (c, _) = coulomb_solve(src.rho());
        assert!(v.v().axpy(-1.0, &c).max_abs() <= 1e-12 * c.max_abs());
        assert_eq!(v.a().max_abs(), 0.0);
    }

    #[test]
    fn no_sources_no_iterations() {
        let g = Grid3::new(4, 4.0).unwrap();
        let s = scheme();
        let cfg = SaddleConfig::with_defaults(&s, 0.3);
        let r = solve_self_consistent(&s, &SourceDensities::none(g), g, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.potential.sobolev_norm(), 0.0);
        assert_eq!(scf_residual(&r.potential, &SourceDensities::none(g), &s, 0.3, g).unwrap(), (0.0, 0.0));
    }
}
