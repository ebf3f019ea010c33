//! Pauli-Villars coefficient schemes with two auxiliary masses.
//!
//! Units: c = ħ = 1, so masses are inverse lengths and momenta share their unit.
//! Every downstream quantity (kernels, lattice operators, solvers) uses the same
//! convention; no other unit system appears in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Relative tolerance on the two PV sum rules.
pub const PV_IDENTITY_TOL: f64 = 1e-12;

/// Ordered mass triple `0 < m0 < m1 < m2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassSpectrum {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl MassSpectrum {
    pub fn new(m0: f64, m1: f64, m2: f64) -> Result<Self> {
        let masses = MassSpectrum { m0, m1, m2 };
        masses.validate()?;
        Ok(masses)
    }

    pub fn validate(&self) -> Result<()> {
        let MassSpectrum { m0, m1, m2 } = *self;
        if !(m0.is_finite() && m1.is_finite() && m2.is_finite()) {
            return invalid("masses must be finite");
        }
        if m0 <= 0.0 {
            return invalid(format!("m0 must be positive (got {m0})"));
        }
        if m1 <= m0 {
            return invalid(format!("m1 must exceed m0 (got m0 = {m0}, m1 = {m1})"));
        }
        if m2 <= m1 {
            return invalid(format!("m2 must exceed m1 (got m1 = {m1}, m2 = {m2})"));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.m0, self.m1, self.m2]
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        MassSpectrum::new(s * self.m0, s * self.m1, s * self.m2)
    }
}

/// Masses, coefficients and averaged cutoff of a two-auxiliary-field PV scheme.
///
/// Serializes with the flat keys `m0,m1,m2,c0,c1,c2,log_lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeRecord", into = "SchemeRecord")]
pub struct PVScheme {
    masses: MassSpectrum,
    coefficients: [f64; 3],
    log_lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct SchemeRecord {
    m0: f64,
    m1: f64,
    m2: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    log_lambda: f64,
}

impl From<PVScheme> for SchemeRecord {
    fn from(s: PVScheme) -> Self {
        SchemeRecord {
            m0: s.masses.m0,
            m1: s.masses.m1,
            m2: s.masses.m2,
            c0: s.coefficients[0],
            c1: s.coefficients[1],
            c2: s.coefficients[2],
            log_lambda: s.log_lambda,
        }
    }
}

impl TryFrom<SchemeRecord> for PVScheme {
    type Error = crate::error::VacuumError;

    fn try_from(r: SchemeRecord) -> Result<Self> {
        let scheme = derive_scheme(MassSpectrum::new(r.m0, r.m1, r.m2)?)?;
        let stored = [r.c0, r.c1, r.c2];
        for (j, (a, b)) in stored.iter().zip(scheme.coefficients.iter()).enumerate() {
            if (a - b).abs() > 1e-9 * b.abs().max(1.0) {
                return invalid(format!(
                    "coefficient c{j} = {a} is inconsistent with the masses (expected {b})"
                ));
            }
        }
        Ok(scheme)
    }
}

impl PVScheme {
    pub fn masses(&self) -> MassSpectrum {
        self.masses
    }

    pub fn mass_array(&self) -> [f64; 3] {
        self.masses.as_array()
    }

    pub fn coefficients(&self) -> [f64; 3] {
        self.coefficients
    }

    /// `log Λ`, half of `-Σ c_j log m_j²`.
    pub fn log_lambda(&self) -> f64 {
        self.log_lambda
    }

    /// Pairs `(c_j, m_j)` for j = 0, 1, 2.
    pub fn terms(&self) -> [(f64, f64); 3] {
        let m = self.mass_array();
        let c = self.coefficients;
        [(c[0], m[0]), (c[1], m[1]), (c[2], m[2])]
    }

    /// `|Σ c_j|` and `|Σ c_j m_j²| / m2²`.
    pub fn identity_residuals(&self) -> (f64, f64) {
        let sum_c: f64 = self.coefficients.iter().sum();
        let sum_cm2: f64 = self.terms().iter().map(|(c, m)| c * m * m).sum();
        (sum_c.abs(), sum_cm2.abs() / (self.masses.m2 * self.masses.m2))
    }

    /// Response at zero momentum, `2 log Λ / (3π)`.
    pub fn m_zero(&self) -> f64 {
        2.0 * self.log_lambda / (3.0 * std::f64::consts::PI)
    }
}

/// Solve the two PV sum rules for `c1, c2` with `c0 = 1`.
pub fn derive_scheme(masses: MassSpectrum) -> Result<PVScheme> {
    masses.validate()?;
    let [m0, m1, m2] = masses.as_array();
    let (s0, s1, s2) = (m0 * m0, m1 * m1, m2 * m2);
    let denom = s2 - s1;
    let c1 = (s0 - s2) / denom;
    let c2 = (s1 - s0) / denom;
    let coefficients = [1.0, c1, c2];

    // -Σ c_j log m_j² rewritten with mass ratios so it stays scale free in floating point.
    let log_lambda_sq = -(c1 * (s1 / s0).ln() + c2 * (s2 / s0).ln());
    let scheme = PVScheme {
        masses,
        coefficients,
        log_lambda: 0.5 * log_lambda_sq,
    };

    let (r0, r2) = scheme.identity_residuals();
    if r0 > PV_IDENTITY_TOL || r2 > PV_IDENTITY_TOL {
        return Err(crate::error::VacuumError::Numeric {
            context: "derive_scheme",
            detail: format!("PV sum rules violated: |Σc| = {r0:.3e}, |Σcm²|/m2² = {r2:.3e}"),
        });
    }
    if scheme.log_lambda <= 0.0 {
        return Err(crate::error::VacuumError::Numeric {
            context: "derive_scheme",
            detail: format!("non-positive log Λ = {}", scheme.log_lambda),
        });
    }
    Ok(scheme)
}

/// Averaged ultraviolet cutoff Λ = exp(½ log Λ²).
pub fn averaged_cutoff(scheme: &PVScheme) -> f64 {
    scheme.log_lambda.exp()
}

/// `Φ(t) = Σ c_j log(m_j² + t)` for a squared momentum scale `t ≥ 0`.
///
/// Negative, strictly increasing, `Φ(0) = -2 log Λ` and `Φ(t) → 0⁻` as `t → ∞`.
/// For `t ≥ m0²` the sum is evaluated as `Σ c_j log(1 + m_j²/t)`, which is the
/// same quantity because `Σ c_j = 0` and keeps full relative precision in the tail.
pub fn phi(scheme: &PVScheme, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("phi requires a finite t >= 0 (got {t})"));
    }
    Ok(phi_unchecked(scheme, t))
}

pub(crate) fn phi_unchecked(scheme: &PVScheme, t: f64) -> f64 {
    let m0 = scheme.masses.m0;
    if t == 0.0 {
        return -2.0 * scheme.log_lambda;
    }
    if t < m0 * m0 {
        // Shift by log m0² to keep the terms O(1): Σ c_j [log(m_j²+t) - log m0²].
        let s0 = m0 * m0;
        scheme
            .terms()
            .iter()
            .map(|(c, m)| c * ((m * m + t) / s0).ln())
            .sum()
    } else {
        scheme
            .terms()
            .iter()
            .map(|(c, m)| c * (m * m / t).ln_1p())
            .sum()
    }
}

/// Derivative `Φ'(t)` in the factored closed form, positive for every `t ≥ 0`.
pub fn phi_derivative(scheme: &PVScheme, t: f64) -> f64 {
    let [m0, m1, m2] = scheme.mass_array();
    let (s0, s1, s2) = (m0 * m0, m1 * m1, m2 * m2);
    (s1 - s0) * (s2 - s0) / ((s0 + t) * (s1 + t) * (s2 + t))
}
