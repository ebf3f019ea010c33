//! Unitary three-dimensional DFT on a [`Grid3`].
//!
//! `f̂(q) = N^{-1/2} Σ_x e^{-i q·x} f(x)` with N = n³, so Parseval holds with no
//! extra factors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid3;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

fn transform(grid: &Grid3, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let (fwd, inv) = plans(n);
    let fft = if forward { fwd } else { inv };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // last axis is contiguous
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for stride in [n, n * n] {
        for base in 0..data.len() {
            // visit each line once: base has a zero coordinate along the axis
            if (base / stride) % n != 0 {
                continue;
            }
            for (t, l) in line.iter_mut().enumerate() {
                *l = data[base + t * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (t, l) in line.iter().enumerate() {
                data[base + t * stride] = *l;
            }
        }
    }
    let s = 1.0 / (grid.len() as f64).sqrt();
    for d in data.iter_mut() {
        *d *= s;
    }
}

/// Unnormalized inverse DFT of an `n^d` array (last axis contiguous).
pub(crate) fn inverse_unnormalized_nd(n: usize, d: usize, data: &mut [Complex64]) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    if d == 0 {
        return;
    }
    let (_, inv) = plans(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); inv.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow(axis as u32);
        if stride == 1 {
            for row in data.chunks_exact_mut(n) {
                inv.process_with_scratch(row, &mut scratch);
            }
            continue;
        }
        for base in 0..data.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for (t, l) in line.iter_mut().enumerate() {
                *l = data[base + t * stride];
            }
            inv.process_with_scratch(&mut line, &mut scratch);
            for (t, l) in line.iter().enumerate() {
                data[base + t * stride] = *l;
            }
        }
    }
}

pub fn forward_real(grid: &Grid3, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, true);
    data
}

pub fn forward(grid: &Grid3, values: &[Complex64]) -> Vec<Complex64> {
    let mut data = values.to_vec();
    transform(grid, &mut data, true);
    data
}

pub fn inverse(grid: &Grid3, coefficients: &[Complex64]) -> Vec<Complex64> {
    let mut data = coefficients.to_vec();
    transform(grid, &mut data, false);
    data
}

/// Inverse transform keeping the real part; callers supply Hermitian data.
pub fn inverse_real(grid: &Grid3, coefficients: &[Complex64]) -> Vec<f64> {
    inverse(grid, coefficients).into_iter().map(|c| c.re).collect()
}
