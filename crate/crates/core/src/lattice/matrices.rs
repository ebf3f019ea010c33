use num_complex::Complex64;

pub type Mat4 = [[Complex64; 4]; 4];

const O: Complex64 = Complex64::new(0.0, 0.0);
const R: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dirac matrices in the standard representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracMatrices {
    pub alpha: [Mat4; 3],
    pub beta: Mat4,
    /// Σ_k = diag(σ_k, σ_k)
    pub sigma: [Mat4; 3],
}

fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    [[[O, R], [R, O]], [[O, -I], [I, O]], [[R, O], [O, -R]]]
}

pub fn dirac_matrices() -> DiracMatrices {
    let s = pauli();
    let alpha = std::array::from_fn(|k| {
        let mut m = [[O; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j + 2] = s[k][i][j];
                m[i + 2][j] = s[k][i][j];
            }
        }
        m
    });
    let sigma = std::array::from_fn(|k| {
        let mut m = [[O; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = s[k][i][j];
                m[i + 2][j + 2] = s[k][i][j];
            }
        }
        m
    });
    let mut beta = [[O; 4]; 4];
    beta[0][0] = R;
    beta[1][1] = R;
    beta[2][2] = -R;
    beta[3][3] = -R;
    DiracMatrices { alpha, beta, sigma }
}

pub fn identity() -> Mat4 {
    let mut m = [[O; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = R;
    }
    m
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[O; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == O {
                continue;
            }
            for j in 0..4 {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn add(a: &Mat4, b: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]))
}

pub fn scale(a: &Mat4, s: Complex64) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] * s))
}

pub fn adjoint(a: &Mat4) -> Mat4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].conj()))
}

pub fn trace(a: &Mat4) -> Complex64 {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

pub fn anticommutator(a: &Mat4, b: &Mat4) -> Mat4 {
    add(&mul(a, b), &mul(b, a))
}

/// α·x
pub fn alpha_dot(m: &DiracMatrices, x: [f64; 3]) -> Mat4 {
    let mut out = [[O; 4]; 4];
    for (k, xk) in x.iter().enumerate() {
        out = add(&out, &scale(&m.alpha[k], Complex64::new(*xk, 0.0)));
    }
    out
}

/// α·z for complex coefficients.
pub fn alpha_dot_complex(m: &DiracMatrices, z: [Complex64; 3]) -> Mat4 {
    let mut out = [[O; 4]; 4];
    for (k, zk) in z.iter().enumerate() {
        out = add(&out, &scale(&m.alpha[k], *zk));
    }
    out
}

/// Free symbol α·p + mβ.
pub fn free_symbol(m: &DiracMatrices, p: [f64; 3], mass: f64) -> Mat4 {
    add(&alpha_dot(m, p), &scale(&m.beta, Complex64::new(mass, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &Mat4, b: &Mat4) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((a[i][j] - b[i][j]).norm());
            }
        }
        d
    }

    #[test]
    fn clifford_relations_exact() {
        let m = dirac_matrices();
        let id = identity();
        let two = scale(&id, Complex64::new(2.0, 0.0));
        let zero = [[O; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { two } else { zero };
                assert_eq!(anticommutator(&m.alpha[i], &m.alpha[j]), expect);
            }
            assert_eq!(anticommutator(&m.alpha[i], &m.beta), zero);
            assert_eq!(trace(&m.alpha[i]), O);
        }
        assert_eq!(mul(&m.beta, &m.beta), id);
        assert_eq!(trace(&m.beta), O);
    }

    #[test]
    fn product_formula() {
        let m = dirac_matrices();
        let x = [1.0, 2.0, 3.0];
        let sq = mul(&alpha_dot(&m, x), &alpha_dot(&m, x));
        assert_eq!(sq, scale(&identity(), Complex64::new(14.0, 0.0)));
        let y = [-0.5, 0.25, 2.0];
        let lhs = mul(&alpha_dot(&m, x), &alpha_dot(&m, y));
        let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let cross = [
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ];
        let mut rhs = scale(&identity(), Complex64::new(dot, 0.0));
        for k in 0..3 {
            rhs = add(&rhs, &scale(&m.sigma[k], I * cross[k]));
        }
        assert!(max_diff(&lhs, &rhs) < 1e-14);
    }
}
