//! Dense momentum-space assembly of the lattice Dirac operator
//! `D = α·(p − eA) + eV + mβ`.
//!
//! The spinor space is spanned by plane waves with integer wave vectors in the
//! band `|q_i| ≤ (n−1)/2` (odd n) or `|q_i| ≤ n/2 − 1` (even n). Dropping the
//! even-n Nyquist plane keeps the band symmetric under q ↦ −q, which charge
//! conjugation needs. Potentials act as multiplication operators, whose matrix
//! elements between plane waves are `N^{-1/2} f̂(q − q')` in the unitary
//! convention. Axes along which the potential is constant carry conserved
//! momenta and split the matrix into independent blocks.

use faer::{c64, Mat};
use num_complex::Complex64;

use super::matrices::{alpha_dot_complex, dirac_matrices, free_symbol, DiracMatrices};
use crate::error::{invalid, Result, VacuumError};
use crate::exec::Execution;
use crate::field::{FourPotential, Grid3};

pub const DEFAULT_CAPACITY: usize = 4 * 16 * 16 * 16;

/// Largest |q_i| in the spinor band.
pub fn band_limit(n: usize) -> i64 {
    let n = n as i64;
    if n % 2 == 1 {
        (n - 1) / 2
    } else {
        n / 2 - 1
    }
}

/// Wave vectors of the spinor band, lexicographic.
pub fn band_modes(n: usize) -> Vec<[i64; 3]> {
    let b = band_limit(n);
    let mut out = Vec::new();
    for a in -b..=b {
        for c in -b..=b {
            for d in -b..=b {
                out.push([a, c, d]);
            }
        }
    }
    out
}

pub fn momentum(grid: &Grid3, q: [i64; 3]) -> [f64; 3] {
    let s = 2.0 * std::f64::consts::PI / grid.box_length();
    q.map(|x| s * x as f64)
}

/// Sparse list of populated potential modes: (wave vector, V̂, Â).
#[derive(Debug, Clone)]
pub(crate) struct PotentialModes {
    pub modes: Vec<([i64; 3], Complex64, [Complex64; 3])>,
    /// Axes along which every populated mode has zero wave number.
    pub invariant: [bool; 3],
}

impl PotentialModes {
    pub fn from_potential(p: &FourPotential) -> Self {
        let g = *p.grid();
        let v = p.v().spectrum();
        let a: [&[Complex64]; 3] = std::array::from_fn(|c| p.a().component(c).spectrum());
        let scale = v
            .iter()
            .chain(a[0])
            .chain(a[1])
            .chain(a[2])
            .fold(0.0f64, |m, z| m.max(z.norm()));
        let cut = 1e-15 * scale;
        let mut modes = Vec::new();
        let mut invariant = [true; 3];
        for idx in 0..g.len() {
            let av = [a[0][idx], a[1][idx], a[2][idx]];
            let mag = v[idx].norm().max(av.iter().fold(0.0, |m, z| m.max(z.norm())));
            if mag == 0.0 || mag <= cut {
                continue;
            }
            let q = g.coords(idx).map(|c| g.signed(c));
            for ax in 0..3 {
                if q[ax] != 0 {
                    invariant[ax] = false;
                }
            }
            modes.push((q, v[idx], av));
        }
        Self { modes, invariant }
    }
}

/// One invariant subspace of the operator.
#[derive(Debug, Clone)]
pub struct Block {
    /// Band wave vectors spanning the block; basis index is 4·mode + spinor.
    pub modes: Vec<[i64; 3]>,
    pub matrix: Mat<c64>,
}

impl Block {
    pub fn dimension(&self) -> usize {
        4 * self.modes.len()
    }
}

#[derive(Debug, Clone)]
pub struct LatticeDiracOperator {
    grid: Grid3,
    mass: f64,
    coupling: f64,
    potential: FourPotential,
    invariant_axes: [bool; 3],
    blocks: Vec<Block>,
}

pub fn build_operator(grid: Grid3, mass: f64, potential: &FourPotential, e: f64) -> Result<LatticeDiracOperator> {
    build_operator_with_capacity(grid, mass, potential, e, DEFAULT_CAPACITY)
}

pub fn build_operator_with_capacity(
    grid: Grid3,
    mass: f64,
    potential: &FourPotential,
    e: f64,
    capacity: usize,
) -> Result<LatticeDiracOperator> {
    potential.grid().ensure_same(&grid)?;
    if !(mass > 0.0) || !mass.is_finite() {
        return invalid(format!("Dirac mass must be positive, got {mass}"));
    }
    if !e.is_finite() {
        return invalid("coupling must be finite");
    }
    let pm = PotentialModes::from_potential(potential);
    let groups = group_modes(grid.n(), pm.invariant);
    if let Some(big) = groups.iter().map(|g| 4 * g.len()).max() {
        if big > capacity {
            return Err(VacuumError::Capacity { dimension: big, cap: capacity });
        }
    }
    let dm = dirac_matrices();
    let blocks = Execution::global().map(&groups, |modes| Block {
        matrix: assemble(&grid, &dm, mass, e, &pm, modes),
        modes: modes.clone(),
    });
    Ok(LatticeDiracOperator {
        grid,
        mass,
        coupling: e,
        potential: potential.clone(),
        invariant_axes: pm.invariant,
        blocks,
    })
}

/// Partition the band by the wave numbers along invariant axes.
fn group_modes(n: usize, invariant: [bool; 3]) -> Vec<Vec<[i64; 3]>> {
    let all = band_modes(n);
    let b = band_limit(n);
    let width = (2 * b + 1) as usize;
    let key = |q: &[i64; 3]| {
        let mut k = 0usize;
        for ax in 0..3 {
            k *= width;
            if invariant[ax] {
                k += (q[ax] + b) as usize;
            }
        }
        k
    };
    let mut keys: Vec<usize> = all.iter().map(key).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut groups: Vec<Vec<[i64; 3]>> = vec![Vec::new(); keys.len()];
    for q in all {
        let pos = keys.binary_search(&key(&q)).expect("key present");
        groups[pos].push(q);
    }
    groups
}

fn assemble(
    grid: &Grid3,
    dm: &DiracMatrices,
    mass: f64,
    e: f64,
    pm: &PotentialModes,
    modes: &[[i64; 3]],
) -> Mat<c64> {
    let dim = 4 * modes.len();
    let mut h = Mat::<c64>::zeros(dim, dim);
    for (i, q) in modes.iter().enumerate() {
        let s = free_symbol(dm, momentum(grid, *q), mass);
        for a in 0..4 {
            for b in 0..4 {
                h[(4 * i + a, 4 * i + b)] = s[a][b];
            }
        }
    }
    if pm.modes.is_empty() || e == 0.0 {
        return h;
    }
    let n = grid.n() as i64;
    let norm = e / (grid.len() as f64).sqrt();
    // position of each band mode inside this block
    let b = band_limit(grid.n());
    let width = 2 * b + 1;
    let mut lookup = vec![usize::MAX; (width * width * width) as usize];
    let flat = |q: [i64; 3]| -> Option<usize> {
        if q.iter().any(|x| x.abs() > b) {
            None
        } else {
            Some((((q[0] + b) * width + q[1] + b) * width + q[2] + b) as usize)
        }
    };
    for (i, q) in modes.iter().enumerate() {
        lookup[flat(*q).expect("band mode")] = i;
    }
    let couplings: Vec<([i64; 3], [[Complex64; 4]; 4])> = pm
        .modes
        .iter()
        .map(|(d, v, a)| {
            let mut w = alpha_dot_complex(dm, a.map(|z| -z * norm));
            for (k, row) in w.iter_mut().enumerate() {
                row[k] += v * norm;
            }
            (*d, w)
        })
        .collect();
    for (j, qp) in modes.iter().enumerate() {
        for (d, w) in &couplings {
            // q − q' ≡ d (mod n); q must lie in the band
            for shift in candidate_shifts(*qp, *d, n, b) {
                let Some(pos) = flat(shift) else { continue };
                let i = lookup[pos];
                if i == usize::MAX {
                    continue;
                }
                for a in 0..4 {
                    for c in 0..4 {
                        h[(4 * i + a, 4 * j + c)] += w[a][c];
                    }
                }
            }
        }
    }
    h
}

/// Band vectors q with q ≡ q' + d componentwise mod n.
fn candidate_shifts(qp: [i64; 3], d: [i64; 3], n: i64, b: i64) -> Vec<[i64; 3]> {
    let mut per_axis: [Vec<i64>; 3] = Default::default();
    for ax in 0..3 {
        let base = qp[ax] + d[ax];
        for t in [-1i64, 0, 1] {
            let q = base + t * n;
            if q.abs() <= b && !per_axis[ax].contains(&q) {
                per_axis[ax].push(q);
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

impl LatticeDiracOperator {
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn potential(&self) -> &FourPotential {
        &self.potential
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn invariant_axes(&self) -> [bool; 3] {
        self.invariant_axes
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(Block::dimension).sum()
    }

    /// Full matrix in the basis of [`band_modes`] (index 4·mode + spinor).
    pub fn to_dense(&self) -> Mat<c64> {
        let all = band_modes(self.grid.n());
        let dim = 4 * all.len();
        let b = band_limit(self.grid.n());
        let w = 2 * b + 1;
        let pos = |q: [i64; 3]| (((q[0] + b) * w + q[1] + b) * w + q[2] + b) as usize;
        let mut out = Mat::<c64>::zeros(dim, dim);
        for blk in &self.blocks {
            for (i, qi) in blk.modes.iter().enumerate() {
                for (j, qj) in blk.modes.iter().enumerate() {
                    for a in 0..4 {
                        for c in 0..4 {
                            out[(4 * pos(*qi) + a, 4 * pos(*qj) + c)] = blk.matrix[(4 * i + a, 4 * j + c)];
                        }
                    }
                }
            }
        }
        out
    }

    /// Frobenius norm of M − M† relative to ‖M‖.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut diff = 0.0;
        let mut norm = 0.0;
        for blk in &self.blocks {
            let m = &blk.matrix;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    diff += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
                    norm += m[(i, j)].norm_sqr();
                }
            }
        }
        (diff / norm.max(f64::MIN_POSITIVE)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, VectorField};

    #[test]
    fn band_sizes() {
        assert_eq!(band_modes(1).len(), 1);
        assert_eq!(band_modes(4).len(), 27);
        assert_eq!(band_modes(5).len(), 125);
        assert_eq!(band_modes(6).len(), 125);
        assert_eq!(band_limit(16), 7);
    }

    #[test]
    fn single_site_is_mass_beta() {
        let g = Grid3::lattice(1, 1.0).unwrap();
        let op = build_operator(g, 2.0, &FourPotential::zero(g), 1.0).unwrap();
        let d = op.to_dense();
        assert_eq!(d.nrows(), 4);
        let beta = dirac_matrices().beta;
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d[(i, j)], beta[i][j] * 2.0);
            }
        }
    }

    #[test]
    fn slab_potential_splits_into_blocks() {
        let g = Grid3::new(8, 5.0).unwrap();
        let (p, _) = FourPotential::magnetic(VectorField::from_fn(g, |x| {
            [0.0, (2.0 * std::f64::consts::PI * x[0] / 5.0).cos(), 0.0]
        }))
        .unwrap();
        let op = build_operator(g, 1.0, &p, 0.5).unwrap();
        assert_eq!(op.invariant_axes(), [false, true, true]);
        assert_eq!(op.blocks().len(), 49);
        assert!(op.blocks().iter().all(|b| b.dimension() == 28));
        assert!(op.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn capacity_is_enforced() {
        let g = Grid3::new(6, 5.0).unwrap();
        let (p, _) = FourPotential::electrostatic(ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1] - x[2]).sin())).unwrap();
        let err = build_operator_with_capacity(g, 1.0, &p, 1.0, 100).unwrap_err();
        assert!(matches!(err, VacuumError::Capacity { dimension: 500, cap: 100 }));
    }
}
