//! Gauss rules on [-1, 1] built by the Golub-Welsch eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::specfun::gamma;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Integral of `g` over `[lo, hi]` against the rule's own weight
    /// function, mapped affinely from [-1, 1].
    pub fn integrate(&self, lo: f64, hi: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(lo + half * (x + 1.0));
        }
        acc * half
    }
}

/// Gauss-Legendre rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> GaussRule {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss-Jacobi rule for the weight (1 - x)^a (1 + x)^b, a, b > -1.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    assert!(n >= 1, "gauss_jacobi needs at least one node");
    assert!(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");
    let ab = a + b;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jac[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let beta = if m == 1.0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * m + ab;
                4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            let off = beta.sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mass = 2f64.powf(ab + 1.0) * gamma(a + 1.0).unwrap() * gamma(b + 1.0).unwrap()
        / gamma(ab + 2.0).unwrap();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(6);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-11);
    }

    #[test]
    fn jacobi_moments() {
        // int_{-1}^{1} (1-x)^{-1/2} (1+x)^{0.3} dx = 2^{0.8} B(0.5, 1.3)
        let rule = gauss_jacobi(10, -0.5, 0.3);
        let v = rule.integrate(-1.0, 1.0, |_| 1.0);
        let b = gamma(0.5).unwrap() * gamma(1.3).unwrap() / gamma(1.8).unwrap();
        assert!((v - 2f64.powf(0.8) * b).abs() < 1e-13);
        // first moment: int (1-x)^a (1+x)^b (1+x) = 2^{a+b+2} B(a+1, b+2)
        let v1 = rule.integrate(-1.0, 1.0, |x| 1.0 + x);
        let b1 = gamma(0.5).unwrap() * gamma(2.3).unwrap() / gamma(2.8).unwrap();
        assert!((v1 - 2f64.powf(1.8) * b1).abs() < 1e-13);
    }

    #[test]
    fn jacobi_with_exponent_sum_minus_one() {
        let rule = gauss_jacobi(8, -0.5, -0.5);
        let v = rule.integrate(-1.0, 1.0, |_| 1.0);
        assert!((v - std::f64::consts::PI).abs() < 1e-13);
    }
}
