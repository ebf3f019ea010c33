use std::sync::OnceLock;

use num_complex::Complex64;

use super::{spectral, Grid3};
use crate::error::{invalid, Result};

/// Real samples on a grid with lazily cached Fourier coefficients.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid3,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "field has {} samples, grid needs {}",
                values.len(),
                grid.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field contains non-finite samples");
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: Grid3, values: Vec<f64>) -> Self {
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self::from_values_unchecked(grid, vec![0.0; grid.len()])
    }

    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self::from_values_unchecked(grid, values)
    }

    /// Build from Fourier coefficients, keeping the real part of the inverse.
    pub fn from_spectrum(grid: Grid3, spectrum: Vec<Complex64>) -> Self {
        assert_eq!(spectrum.len(), grid.len(), "spectrum length");
        let values = spectral::inverse_real(&grid, &spectrum);
        let field = Self::from_values_unchecked(grid, values);
        let _ = field.spectrum.set(spectrum);
        field
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| spectral::forward_real(&self.grid, &self.values))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete L² norm, (h³ Σ f²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// h³ Σ f g
    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|v| v * s).collect())
    }

    /// self + s·other
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        Self::from_values_unchecked(self.grid, values)
    }

    pub fn map_spectrum(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let spec = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i, c))
            .collect();
        Self::from_spectrum(self.grid, spec)
    }
}

/// Three real components on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        let g = *components[0].grid();
        components[1].grid().ensure_same(&g)?;
        components[2].grid().ensure_same(&g)?;
        Ok(Self { components })
    }

    pub(crate) fn from_components_unchecked(components: [ScalarField; 3]) -> Self {
        Self { components }
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self::from_components_unchecked(std::array::from_fn(|_| ScalarField::zeros(grid)))
    }

    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let samples: Vec<[f64; 3]> = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self::from_components_unchecked(std::array::from_fn(|c| {
            ScalarField::from_values_unchecked(grid, samples.iter().map(|s| s[c]).collect())
        }))
    }

    pub fn from_spectra(grid: Grid3, spectra: [Vec<Complex64>; 3]) -> Self {
        let [a, b, c] = spectra;
        Self::from_components_unchecked([
            ScalarField::from_spectrum(grid, a),
            ScalarField::from_spectrum(grid, b),
            ScalarField::from_spectrum(grid, c),
        ])
    }

    pub fn grid(&self) -> &Grid3 {
        self.components[0].grid()
    }

    pub fn component(&self, c: usize) -> &ScalarField {
        &self.components[c]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        std::array::from_fn(|c| self.components[c].values()[idx])
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        (0..3)
            .map(|c| self.components[c].inner(&other.components[c]))
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_components_unchecked(std::array::from_fn(|c| self.components[c].scaled(s)))
    }

    pub fn axpy(&self, s: f64, other: &VectorField) -> Self {
        Self::from_components_unchecked(std::array::from_fn(|c| {
            self.components[c].axpy(s, &other.components[c])
        }))
    }

    /// Apply a linear map to the Fourier vector at each mode.
    pub fn map_spectrum(&self, f: impl Fn(usize, [Complex64; 3]) -> [Complex64; 3]) -> Self {
        let grid = *self.grid();
        let specs: [&[Complex64]; 3] = std::array::from_fn(|c| self.components[c].spectrum());
        let mut out: [Vec<Complex64>; 3] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
        for idx in 0..grid.len() {
            let r = f(idx, [specs[0][idx], specs[1][idx], specs[2][idx]]);
            for c in 0..3 {
                out[c].push(r[c]);
            }
        }
        Self::from_spectra(grid, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_inputs() {
        let g = Grid3::new(2, 1.0).unwrap();
        assert!(ScalarField::new(g, vec![0.0; 7]).is_err());
        assert!(ScalarField::new(g, vec![f64::INFINITY; 8]).is_err());
        let other = Grid3::new(3, 1.0).unwrap();
        assert!(VectorField::new([
            ScalarField::zeros(g),
            ScalarField::zeros(other),
            ScalarField::zeros(g)
        ])
        .is_err());
    }

    #[test]
    fn norms_use_cell_volume() {
        let g = Grid3::new(4, 2.0).unwrap();
        let f = ScalarField::new(g, vec![1.0; 64]).unwrap();
        assert!((f.l2_norm() - 8f64.sqrt()).abs() < 1e-14);
        assert!((f.inner(&f) - 8.0).abs() < 1e-14);
    }
}
