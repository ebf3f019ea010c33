use std::io::Write;

use faer::{c64, Mat, Side};

use super::operator::{Block, LatticeDiracOperator};
use crate::error::{Result, VacuumError};
use crate::exec::Execution;

/// Eigenpairs of one operator block, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub modes: Vec<[i64; 3]>,
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors in the block basis (4·mode + spinor).
    pub eigenvectors: Option<Mat<c64>>,
}

#[derive(Debug, Clone)]
pub struct OperatorSpectrum {
    pub mass: f64,
    pub blocks: Vec<SpectralData>,
}

impl OperatorSpectrum {
    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// min |λ|
    pub fn gap(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter())
            .fold(f64::INFINITY, |m, l| m.min(l.abs()))
    }

    /// Eigenvalue of smallest modulus.
    pub fn closest_to_zero(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(f64::INFINITY)
    }

    /// CSV with header `index,eigenvalue`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,eigenvalue")?;
        for (i, l) in self.eigenvalues().iter().enumerate() {
            writeln!(out, "{i},{l:.17e}")?;
        }
        Ok(())
    }
}

fn eig_block(block: &Block, vectors: bool) -> Result<SpectralData> {
    let m = block.matrix.as_ref();
    let (eigenvalues, eigenvectors) = if vectors {
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| VacuumError::Numeric {
            context: "eigendecomposition",
            detail: format!("{e:?}"),
        })?;
        let s = evd.S().column_vector();
        let vals: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
        (vals, Some(evd.U().to_owned()))
    } else {
        let vals = m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| VacuumError::Numeric {
            context: "eigenvalues",
            detail: format!("{e:?}"),
        })?;
        (vals, None)
    };
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(VacuumError::Numeric {
            context: "eigendecomposition",
            detail: "non-finite eigenvalue".into(),
        });
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(VacuumError::Numeric {
            context: "eigendecomposition",
            detail: "eigenvalues not sorted".into(),
        });
    }
    Ok(SpectralData {
        modes: block.modes.clone(),
        eigenvalues,
        eigenvectors,
    })
}

/// Full eigendecomposition, block by block.
pub fn spectrum(op: &LatticeDiracOperator) -> Result<OperatorSpectrum> {
    decompose(op, true)
}

/// Eigenvalues only.
pub fn eigenvalues(op: &LatticeDiracOperator) -> Result<OperatorSpectrum> {
    decompose(op, false)
}

fn decompose(op: &LatticeDiracOperator, vectors: bool) -> Result<OperatorSpectrum> {
    let blocks: Result<Vec<SpectralData>> = Execution::global()
        .map(op.blocks(), |b| eig_block(b, vectors))
        .into_iter()
        .collect();
    Ok(OperatorSpectrum {
        mass: op.mass(),
        blocks: blocks?,
    })
}

/// max over eigenpairs of ‖Mv − λv‖ / ‖M‖ (Frobenius).
pub fn max_residual(op: &LatticeDiracOperator, spec: &OperatorSpectrum) -> f64 {
    let mut worst: f64 = 0.0;
    for (blk, data) in op.blocks().iter().zip(&spec.blocks) {
        let Some(u) = &data.eigenvectors else { continue };
        let m = &blk.matrix;
        let norm = m.norm_l2();
        let mu = m * u;
        for (j, l) in data.eigenvalues.iter().enumerate() {
            let mut r = 0.0;
            for i in 0..u.nrows() {
                r += (mu[(i, j)] - u[(i, j)] * *l).norm_sqr();
            }
            worst = worst.max(r.sqrt() / norm);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FourPotential, Grid3};
    use crate::lattice::operator::{band_modes, build_operator, momentum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn free_spectrum_law() {
        let g = Grid3::new(4, 3.0).unwrap();
        let m = 0.7;
        let op = build_operator(g, m, &FourPotential::zero(g), 1.0).unwrap();
        let spec = spectrum(&op).unwrap();
        let mut expect = Vec::new();
        for q in band_modes(4) {
            let p = momentum(&g, q);
            let e = (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
            expect.extend([e, e, -e, -e]);
        }
        expect.sort_by(f64::total_cmp);
        let got = spec.eigenvalues();
        assert_eq!(got.len(), expect.len());
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((spec.gap() - m).abs() < 1e-12);
        assert!(max_residual(&op, &spec) < 1e-12);
    }

    #[test]
    fn magnetic_gap_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Grid3::new(4, 4.0).unwrap();
        let p = FourPotential::random(g, &mut rng, 1, 0.0, 0.8);
        let op = build_operator(g, 1.3, &p, 1.0).unwrap();
        let spec = spectrum(&op).unwrap();
        assert!(spec.gap() >= 1.3 - 1e-10);
        assert!(max_residual(&op, &spec) < 1e-10);
    }
}
