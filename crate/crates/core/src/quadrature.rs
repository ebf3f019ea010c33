//! Adaptive Gauss-Legendre quadrature on finite intervals.
//!
//! Each panel is integrated with a fixed-order Gauss-Legendre rule and with the
//! same rule on its two halves; the difference is the panel error estimate.
//! Panels with the largest error are bisected first until the summed estimate
//! drops below the absolute tolerance.

use std::sync::OnceLock;

use crate::error::{Result, VacuumError};

const ORDER: usize = 15;
const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Summed panel error estimate.
    pub error: f64,
    pub panels: usize,
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w.iter()) {
        s += wi * f(mid + half * xi);
    }
    s * half
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let whole = fixed(f, a, b);
    let m = 0.5 * (a + b);
    let split = fixed(f, a, m) + fixed(f, m, b);
    Panel {
        a,
        b,
        value: split,
        error: (split - whole).abs(),
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// `breakpoints` are interior points where the initial panels are split.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], abs_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut panels: Vec<Panel> = edges.windows(2).map(|w| panel(&f, w[0], w[1])).collect();

    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= abs_tol {
            break;
        }
        if panels.len() >= MAX_PANELS {
            return Err(VacuumError::Quadrature {
                achieved: total_err,
                tolerance: abs_tol,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Interval exhausted at machine resolution; keep what we have.
            return Err(VacuumError::Quadrature {
                achieved: total_err,
                tolerance: abs_tol,
            });
        }
        panels.push(panel(&f, p.a, m));
        panels.push(panel(&f, m, p.b));
    }

    let mut value = 0.0;
    let mut comp = 0.0;
    for p in &panels {
        // Neumaier summation.
        let t = value + p.value;
        if value.abs() >= p.value.abs() {
            comp += (value - t) + p.value;
        } else {
            comp += (p.value - t) + value;
        }
        value = t;
    }
    Ok(QuadResult {
        value: value + comp,
        error: panels.iter().map(|p| p.error).sum(),
        panels: panels.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials() {
        for n in [1, 2, 5, 15, 20] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
            // exact up to degree 2n-1
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "n = {n}: {q} vs {exact}");
        }
    }

    #[test]
    fn smooth_integrals() {
        let r = integrate(|x| x.exp(), 0.0, 1.0, &[], 1e-14).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-14);
        let r = integrate(|u| u * (1.0 - u), 0.0, 1.0, &[0.5], 1e-14).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn peaked_integrand_refines() {
        // Lorentzian of width 1e-3 centred at 1/2.
        let eps = 1e-3;
        let f = |x: f64| eps / ((x - 0.5).powi(2) + eps * eps);
        let r = integrate(f, 0.0, 1.0, &[], 1e-10).unwrap();
        let exact = 2.0 * (0.5 / eps).atan();
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
        assert!(r.panels > 2);
    }

    #[test]
    fn impossible_tolerance_reports_error() {
        let f = |x: f64| 1.0 / x.sqrt();
        let e = integrate(f, 0.0, 1.0, &[], 0.0).unwrap_err();
        assert!(matches!(e, VacuumError::Quadrature { .. }));
    }
}
