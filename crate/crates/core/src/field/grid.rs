use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Periodic cubic grid with `n` points per axis and side length `box_length`.
///
/// Mode indices follow the FFT layout: index `i` carries the signed integer
/// `i` for `i < (n+1)/2` and `i - n` above. For even `n` the index `n/2` is the
/// Nyquist mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    n: usize,
    box_length: f64,
}

impl Grid3 {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 2 {
            return invalid(format!("grid needs at least 2 points per axis, got {n}"));
        }
        Self::lattice(n, box_length)
    }

    /// Like [`Grid3::new`] but also accepts the single-site lattice.
    pub fn lattice(n: usize, box_length: f64) -> Result<Self> {
        if n == 0 {
            return invalid("grid needs at least one point per axis");
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return invalid(format!("box length must be positive, got {box_length}"));
        }
        Ok(Self { n, box_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Number of grid points, n³.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        self.coords(idx).map(|c| c as f64 * h)
    }

    pub fn signed(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < (n + 1) / 2 {
            i
        } else {
            i - n
        }
    }

    /// Mode index of a signed integer wave number (taken mod n).
    pub fn wrap(&self, q: i64) -> usize {
        q.rem_euclid(self.n as i64) as usize
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        self.n % 2 == 0 && i == self.n / 2
    }

    pub fn momentum(&self, i: usize) -> f64 {
        2.0 * PI * self.signed(i) as f64 / self.box_length
    }

    /// First-derivative symbol: the momentum with the Nyquist entry zeroed.
    pub fn derivative_symbol(&self, i: usize) -> f64 {
        if self.is_nyquist(i) {
            0.0
        } else {
            self.momentum(i)
        }
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        self.coords(idx).map(|c| self.derivative_symbol(c))
    }

    /// Symbol of −Δ, keeping the Nyquist momentum.
    pub fn laplacian_symbol(&self, idx: usize) -> f64 {
        self.coords(idx).iter().map(|&c| self.momentum(c).powi(2)).sum()
    }

    pub fn has_nyquist(&self, idx: usize) -> bool {
        self.coords(idx).iter().any(|&c| self.is_nyquist(c))
    }

    /// Modes that potentials and sources may populate: no zero mode and no
    /// Nyquist component.
    pub fn is_admissible(&self, idx: usize) -> bool {
        idx != 0 && !self.has_nyquist(idx)
    }

    /// Mode index of −q.
    pub fn negate(&self, idx: usize) -> usize {
        let [i, j, k] = self.coords(idx);
        let n = self.n;
        self.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    pub fn ensure_same(&self, other: &Grid3) -> Result<()> {
        if self != other {
            return invalid(format!(
                "grid mismatch: n={} L={} vs n={} L={}",
                self.n, self.box_length, other.n, other.box_length
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid3::new(1, 1.0).is_err());
        assert!(Grid3::new(4, 0.0).is_err());
        assert!(Grid3::new(4, f64::NAN).is_err());
        assert!(Grid3::lattice(1, 1.0).is_ok());
    }

    #[test]
    fn mode_layout() {
        let g = Grid3::new(4, 2.0 * PI).unwrap();
        let s: Vec<i64> = (0..4).map(|i| g.signed(i)).collect();
        assert_eq!(s, vec![0, 1, -2, -1]);
        assert!(g.is_nyquist(2));
        assert_eq!(g.derivative_symbol(2), 0.0);
        assert_eq!(g.momentum(3), -1.0);
        let g5 = Grid3::new(5, 2.0 * PI).unwrap();
        let s: Vec<i64> = (0..5).map(|i| g5.signed(i)).collect();
        assert_eq!(s, vec![0, 1, 2, -2, -1]);
        assert!((0..5).all(|i| !g5.is_nyquist(i)));
    }

    #[test]
    fn index_roundtrip_and_negation() {
        let g = Grid3::new(6, 1.0).unwrap();
        for idx in 0..g.len() {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
            assert_eq!(g.negate(g.negate(idx)), idx);
        }
        assert!(!g.is_admissible(0));
        assert!(!g.is_admissible(g.index(3, 1, 0)));
        assert!(g.is_admissible(g.index(1, 0, 0)));
    }
}
