//! Semigroup e^{-tA} and the subordinated solution operators.
//!
//! With M_mu the Mainardi-Wright density,
//!
//! ```text
//! P_mu(t)    = int_0^inf mu theta M_mu(theta) e^{-t^mu theta A} dtheta
//! K_mu(t)    = t^{mu-1} P_mu(t)
//! S_{mu,nu}  = I^{nu(1-mu)} K_mu
//! ```
//!
//! For a scalar generator lambda these reduce to
//! K_mu(t) = t^{mu-1} E_{mu,mu}(-lambda t^mu) and
//! S_{mu,nu}(t) = t^{gamma-1} E_{mu,gamma}(-lambda t^mu).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::frac_ops::Grid;
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::specfun::{mainardi_wright, rgamma, wright_moment, wright_series_theta_max, WrightProfile};

/// Square matrix A; the semigroup is generated by -A.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    matrix: DMatrix<f64>,
}

impl Generator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(domain(format!(
                "generator must be a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(domain("generator has non-finite entries"));
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(domain("generator rows must form a nonempty square matrix"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn scalar(lambda: f64) -> Self {
        Self {
            matrix: DMatrix::from_element(1, 1, lambda),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Truncation and node count for the theta-integral of the subordination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationControl {
    pub theta_max: f64,
    pub theta_nodes: usize,
}

impl Default for SubordinationControl {
    fn default() -> Self {
        Self {
            theta_max: 50.0,
            theta_nodes: 600,
        }
    }
}

const THETA_PANEL_NODES: usize = 12;
const SUPPORT_CUTOFF: f64 = 1e-17;
const MASS_DEFECT_MAX: f64 = 1e-8;

/// e^{-tA}, via scaling and squaring for matrices and `exp` for scalars.
pub fn semigroup(gen: &Generator, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) {
        return Err(domain(format!("semigroup time {t} must be >= 0")));
    }
    let out = if gen.dim() == 1 {
        DMatrix::from_element(1, 1, (-t * gen.matrix[(0, 0)]).exp())
    } else {
        (gen.matrix() * (-t)).exp()
    };
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::Overflow(t));
    }
    Ok(out)
}

pub fn semigroup_apply(gen: &Generator, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(gen, x)?;
    Ok(semigroup(gen, t)? * x)
}

fn check_dim(gen: &Generator, x: &DVector<f64>) -> Result<()> {
    if x.len() != gen.dim() {
        return Err(Error::GridMismatch(format!(
            "state of dimension {} for a {}-dimensional generator",
            x.len(),
            gen.dim()
        )));
    }
    Ok(())
}

/// Quadrature nodes and weights mu theta_j M_mu(theta_j) w_j for the
/// subordination integral.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinationTable {
    mu: f64,
    theta: Vec<f64>,
    weight: Vec<f64>,
}

impl SubordinationTable {
    /// Composite Gauss-Legendre in panels of 12 nodes on `[0, theta_end]`,
    /// where theta_end is the smaller of `theta_max` and the point past the
    /// peak at which theta M_mu(theta) falls below 1e-17. At mu = 1 the density degenerates to a point mass at theta = 1.
    pub fn new(mu: f64, ctl: &SubordinationControl) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(domain(format!("subordination order {mu} not in (0, 1]")));
        }
        if mu == 1.0 {
            return Ok(Self {
                mu,
                theta: vec![1.0],
                weight: vec![1.0],
            });
        }
        if !(ctl.theta_max > 0.0) || ctl.theta_nodes < THETA_PANEL_NODES {
            return Err(domain(format!(
                "subordination control needs theta_max > 0 and at least {THETA_PANEL_NODES} nodes"
            )));
        }
        let panels = ctl.theta_nodes / THETA_PANEL_NODES;
        let rule = gauss_legendre(THETA_PANEL_NODES);
        let profile = WrightProfile::new(mu);
        let switch = wright_series_theta_max(mu);
        let density = |th: f64| -> Result<f64> {
            if th <= switch {
                mainardi_wright(mu, th)
            } else {
                Ok(profile.eval(th))
            }
        };
        let mut theta_end = rgamma(1.0 + mu);
        while theta_end < ctl.theta_max && theta_end * density(theta_end)? >= SUPPORT_CUTOFF {
            theta_end *= 1.05;
        }
        let width = theta_end.min(ctl.theta_max) / panels as f64;
        let mut theta = Vec::with_capacity(panels * THETA_PANEL_NODES);
        let mut weight = Vec::with_capacity(panels * THETA_PANEL_NODES);
        for k in 0..panels {
            let lo = k as f64 * width;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let th = lo + 0.5 * width * (x + 1.0);
                let m = density(th)?;
                theta.push(th);
                weight.push(0.5 * width * w * mu * th * m);
            }
        }
        let table = Self { mu, theta, weight };
        let (m0, m1) = table.tail_mass()?;
        if m0.max(m1) > MASS_DEFECT_MAX {
            return Err(domain(format!(
                "subordination order {mu}: density quadrature misses mass {:e}; orders this close to 1 are unsupported",
                m0.max(m1)
            )));
        }
        Ok(table)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta.iter().copied().zip(self.weight.iter().copied())
    }

    /// Missing mass of the truncated quadrature at delta = 0 and delta = 1,
    /// measured against the closed-form moments.
    pub fn tail_mass(&self) -> Result<(f64, f64)> {
        if self.mu == 1.0 {
            return Ok((0.0, 0.0));
        }
        let mu = self.mu;
        let m0: f64 = self.nodes().map(|(th, w)| w / (mu * th)).sum();
        let m1: f64 = self.nodes().map(|(_, w)| w / mu).sum();
        Ok((
            (wright_moment(mu, 0.0)? - m0).abs(),
            (wright_moment(mu, 1.0)? - m1).abs(),
        ))
    }
}

/// P_mu(t) as a matrix.
pub fn p_matrix(gen: &Generator, t: f64, table: &SubordinationTable) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) {
        return Err(domain(format!("p_operator time {t} must be >= 0")));
    }
    p_matrix_at_z(gen, t.powf(table.mu), table)
}

pub fn p_operator(
    gen: &Generator,
    mu: f64,
    t: f64,
    x: &DVector<f64>,
    ctl: &SubordinationControl,
) -> Result<DVector<f64>> {
    check_dim(gen, x)?;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(domain(format!("p_operator: mu = {mu} not in (0, 1)")));
    }
    let table = SubordinationTable::new(mu, ctl)?;
    Ok(p_matrix(gen, t, &table)? * x)
}

/// K_mu(t) x = t^{mu-1} P_mu(t) x, t > 0.
pub fn k_operator(
    gen: &Generator,
    mu: f64,
    t: f64,
    x: &DVector<f64>,
    ctl: &SubordinationControl,
) -> Result<DVector<f64>> {
    if !(t > 0.0) {
        return Err(domain(format!("k_operator is singular at t = {t}; needs t > 0")));
    }
    Ok(p_operator(gen, mu, t, x, ctl)? * t.powf(mu - 1.0))
}

/// Chebyshev interpolant of z -> P~(z) = int mu theta M_mu(theta) e^{-z theta A} dtheta
/// on `[0, z_max]`, so that P_mu(t) = P~(t^mu). P~ is entire in z, and the
/// degree is doubled until the trailing coefficients are at rounding level.
#[derive(Debug, Clone)]
pub struct SubordinatedFamily {
    mu: f64,
    z_max: f64,
    coeffs: Vec<DMatrix<f64>>,
}

const CHEB_START: usize = 32;
const CHEB_MAX: usize = 512;

impl SubordinatedFamily {
    pub fn new(gen: &Generator, mu: f64, t_max: f64, ctl: &SubordinationControl) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(domain(format!("interpolation horizon {t_max} must be positive")));
        }
        let table = SubordinationTable::new(mu, ctl)?;
        let z_max = t_max.powf(mu);
        let eval = |z: f64| p_matrix_at_z(gen, z, &table);
        let mut degree = CHEB_START;
        loop {
            let coeffs = chebyshev_coefficients(&eval, z_max, degree)?;
            let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let tail = coeffs[degree - 2..].iter().map(|c| c.norm()).fold(0.0, f64::max);
            if tail <= 1e-13 * scale.max(f64::MIN_POSITIVE) || degree >= CHEB_MAX {
                return Ok(Self { mu, z_max, coeffs });
            }
            degree *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// P~(z) for 0 <= z <= z_max (Clenshaw recurrence).
    pub fn at_z(&self, z: f64) -> DMatrix<f64> {
        let x = 2.0 * z / self.z_max - 1.0;
        let d = self.coeffs[0].nrows();
        let mut b1 = DMatrix::zeros(d, d);
        let mut b2 = DMatrix::zeros(d, d);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = &b1 * (2.0 * x) - &b2 + c;
            b2 = b1;
            b1 = b0;
        }
        &b1 * x - b2 + &self.coeffs[0]
    }

    /// P_mu(t).
    pub fn at(&self, t: f64) -> DMatrix<f64> {
        self.at_z(t.powf(self.mu))
    }
}

fn p_matrix_at_z(gen: &Generator, z: f64, table: &SubordinationTable) -> Result<DMatrix<f64>> {
    let d = gen.dim();
    if d == 1 {
        let lambda = gen.matrix[(0, 0)];
        let acc: f64 = table.nodes().map(|(th, w)| w * (-z * th * lambda).exp()).sum();
        if !acc.is_finite() {
            return Err(Error::Overflow(z));
        }
        return Ok(DMatrix::from_element(1, 1, acc));
    }
    let mut acc = DMatrix::zeros(d, d);
    for (th, w) in table.nodes() {
        if w != 0.0 {
            acc += semigroup(gen, z * th)? * w;
        }
    }
    Ok(acc)
}

fn chebyshev_coefficients(
    f: &impl Fn(f64) -> Result<DMatrix<f64>>,
    z_max: f64,
    degree: usize,
) -> Result<Vec<DMatrix<f64>>> {
    let n = degree;
    let samples = (0..=n)
        .map(|k| {
            let x = (std::f64::consts::PI * k as f64 / n as f64).cos();
            f(0.5 * z_max * (x + 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = samples[0].nrows();
    let mut coeffs = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = DMatrix::zeros(d, d);
        for (k, fk) in samples.iter().enumerate() {
            let half = if k == 0 || k == n { 0.5 } else { 1.0 };
            let c = (std::f64::consts::PI * (m * k) as f64 / n as f64).cos();
            acc += fk * (half * c);
        }
        let half = if m == 0 || m == n { 0.5 } else { 1.0 };
        coeffs.push(acc * (2.0 * half / n as f64));
    }
    Ok(coeffs)
}

const S_JACOBI_NODES: usize = 40;

/// Evaluates t^{1-gamma} S_{mu,nu}(t) from a subordinated family.
///
/// With s = t rho^{1/mu} the weighted operator becomes
/// (1 / (mu Gamma(beta))) int_0^1 (1 - rho^{1/mu})^{beta-1} P~(t^mu rho) d rho,
/// beta = nu (1 - mu); the endpoint factor (1 - rho)^{beta-1} is carried by a
/// Gauss-Jacobi rule and the rest is smooth.
#[derive(Debug, Clone)]
struct WeightedS {
    mu: f64,
    beta: f64,
    rho: Vec<f64>,
    weight: Vec<f64>,
}

impl WeightedS {
    fn new(mu: f64, nu: f64) -> Self {
        let beta = nu * (1.0 - mu);
        if beta == 0.0 {
            return Self {
                mu,
                beta,
                rho: Vec::new(),
                weight: Vec::new(),
            };
        }
        let rule = gauss_jacobi(S_JACOBI_NODES, beta - 1.0, 0.0);
        let scale = 0.5f64.powf(beta) * rgamma(beta) / mu;
        let mut rho = Vec::with_capacity(S_JACOBI_NODES);
        let mut weight = Vec::with_capacity(S_JACOBI_NODES);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let r = 0.5 * (x + 1.0);
            // (1 - r^{1/mu}) / (1 - r)
            let q = -(r.ln() / mu).exp_m1() / (1.0 - r);
            rho.push(r);
            weight.push(scale * w * q.powf(beta - 1.0));
        }
        Self {
            mu,
            beta,
            rho,
            weight,
        }
    }

    fn eval(&self, family: &SubordinatedFamily, t: f64) -> DMatrix<f64> {
        if self.beta == 0.0 {
            return family.at(t);
        }
        let tm = t.powf(self.mu);
        let d = family.coeffs[0].nrows();
        let mut acc = DMatrix::zeros(d, d);
        for (r, w) in self.rho.iter().zip(&self.weight) {
            acc += family.at_z(tm * r) * *w;
        }
        acc
    }
}

/// P_mu at every grid lag together with the weighted operators
/// t^{1-gamma} S_{mu,nu}(t) at every node, for one (A, mu, nu, grid).
#[derive(Debug, Clone)]
pub struct SolutionOperators {
    mu: f64,
    nu: f64,
    grid: Grid,
    p_lags: Vec<DMatrix<f64>>,
    s_weighted: Vec<DMatrix<f64>>,
}

impl SolutionOperators {
    /// Lags are measured from the grid start, so `p_lag(k)` is P_mu(k h)
    /// and `s_weighted(i)` is the weighted S_{mu,nu} at `tau_i - t0`.
    pub fn build(
        gen: &Generator,
        mu: f64,
        nu: f64,
        grid: Grid,
        ctl: &SubordinationControl,
    ) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(domain(format!("mu = {mu} not in (0, 1]")));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(domain(format!("nu = {nu} not in [0, 1]")));
        }
        let family = SubordinatedFamily::new(gen, mu, grid.a, ctl)?;
        let local = Grid::new(0.0, grid.a, grid.n)?;
        let p_lags: Vec<_> = (0..=grid.n).map(|k| family.at(local.node(k))).collect();
        let ws = WeightedS::new(mu, nu);
        let mut s_weighted: Vec<_> = if ws.beta == 0.0 {
            p_lags.clone()
        } else {
            (0..=grid.n).map(|i| ws.eval(&family, local.node(i))).collect()
        };
        s_weighted[0] = DMatrix::identity(gen.dim(), gen.dim()) * rgamma(mu + nu * (1.0 - mu));
        for (i, m) in s_weighted.iter().enumerate() {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    node: i,
                    t: grid.node(i),
                });
            }
        }
        Ok(Self {
            mu,
            nu,
            grid,
            p_lags,
            s_weighted,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gamma(&self) -> f64 {
        self.mu + self.nu * (1.0 - self.mu)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p_lag(&self, k: usize) -> &DMatrix<f64> {
        &self.p_lags[k]
    }

    pub fn s_weighted(&self, i: usize) -> &DMatrix<f64> {
        &self.s_weighted[i]
    }

    /// Largest induced 2-norm of the weighted S over the grid.
    pub fn bound(&self) -> f64 {
        self.s_weighted
            .iter()
            .map(|m| {
                if m.nrows() == 1 {
                    m[(0, 0)].abs()
                } else {
                    m.singular_values().max()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// t^{1-gamma} S_{mu,nu}(t) x; at t = 0 this is the limit x / Gamma(gamma).
pub fn weighted_s_operator(
    gen: &Generator,
    mu: f64,
    nu: f64,
    t: f64,
    x: &DVector<f64>,
    ctl: &SubordinationControl,
) -> Result<DVector<f64>> {
    check_dim(gen, x)?;
    if !(mu > 0.0 && mu <= 1.0) || !(0.0..=1.0).contains(&nu) {
        return Err(domain(format!("orders mu = {mu}, nu = {nu} out of range")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("s_operator time {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(x * rgamma(mu + nu * (1.0 - mu)));
    }
    let family = SubordinatedFamily::new(gen, mu, t, ctl)?;
    Ok(WeightedS::new(mu, nu).eval(&family, t) * x)
}

/// S_{mu,nu}(t) x. At t = 0 the weighted limit is returned, which equals x
/// in the Caputo case nu = 1.
pub fn s_operator(
    gen: &Generator,
    mu: f64,
    nu: f64,
    t: f64,
    x: &DVector<f64>,
    ctl: &SubordinationControl,
) -> Result<DVector<f64>> {
    let w = weighted_s_operator(gen, mu, nu, t, x, ctl)?;
    if t == 0.0 {
        return Ok(w);
    }
    let gamma = mu + nu * (1.0 - mu);
    Ok(w * t.powf(gamma - 1.0))
}

/// M = max over the grid of || t^{1-gamma} S_{mu,nu}(t) ||.
pub fn operator_bound_m(
    gen: &Generator,
    mu: f64,
    nu: f64,
    grid: Grid,
    ctl: &SubordinationControl,
) -> Result<f64> {
    Ok(SolutionOperators::build(gen, mu, nu, grid, ctl)?.bound())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mittag_leffler;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn semigroup_examples() {
        let a = Generator::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(semigroup_apply(&a, 0.0, &v(&[1.0, 2.0])).unwrap(), v(&[1.0, 2.0]));
        let s = semigroup_apply(&Generator::scalar(1.0), 1.0, &v(&[1.0])).unwrap();
        assert_relative_eq!(s[0], (-1f64).exp(), max_relative = 1e-15);
        let rot = Generator::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let r = semigroup_apply(&rot, FRAC_PI_2, &v(&[1.0, 0.0])).unwrap();
        // e^{-tA} with A = [[0,-1],[1,0]] is [[cos t, sin t], [-sin t, cos t]]
        assert!((r[0] - 0.0).abs() < 1e-10 && (r[1] + 1.0).abs() < 1e-10, "{r}");
    }

    #[test]
    fn semigroup_rejects_negative_time_and_bad_shapes() {
        assert!(semigroup(&Generator::scalar(1.0), -1.0).is_err());
        assert!(Generator::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(semigroup_apply(&Generator::scalar(1.0), 1.0, &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn subordination_tail_is_negligible() {
        for mu in [0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
            let t = SubordinationTable::new(mu, &SubordinationControl::default()).unwrap();
            let (m0, m1) = t.tail_mass().unwrap();
            assert!(m0 < 1e-10 && m1 < 1e-10, "mu={mu}: {m0:e} {m1:e}");
        }
    }

    #[test]
    fn subordination_refuses_unresolved_orders() {
        let r = SubordinationTable::new(0.9996, &SubordinationControl::default());
        assert!(matches!(r, Err(Error::Domain(_))), "{r:?}");
    }

    #[test]
    fn p_operator_examples() {
        let ctl = SubordinationControl::default();
        let p = p_operator(&Generator::scalar(1.0), 0.5, 1.0, &v(&[1.0]), &ctl).unwrap();
        assert!((p[0] - mittag_leffler(0.5, 0.5, -1.0).unwrap()).abs() < 1e-9);
        let z = p_operator(&Generator::zero(1), 0.5, 0.7, &v(&[2.0]), &ctl).unwrap();
        assert!((z[0] - 2.0 * 0.564_189_583_547_756_3).abs() < 1e-9);
        let small = p_operator(&Generator::scalar(1.0), 0.5, 1e-12, &v(&[1.0]), &ctl).unwrap();
        assert!((small[0] - 0.564_189_583_547_756_3).abs() < 1e-5);
    }

    #[test]
    fn k_operator_examples() {
        let ctl = SubordinationControl::default();
        let k = k_operator(&Generator::zero(1), 0.5, 4.0, &v(&[1.0]), &ctl).unwrap();
        assert!((k[0] - 0.282_094_791_773_878_1).abs() < 1e-9);
        let k2 = k_operator(&Generator::zero(1), 0.5, 9.0, &v(&[1.0]), &ctl).unwrap();
        assert_relative_eq!(k[0] / k2[0], (4.0f64 / 9.0).powf(-0.5), max_relative = 1e-14);
        assert!(k_operator(&Generator::zero(1), 0.5, 0.0, &v(&[1.0]), &ctl).is_err());
    }

    #[test]
    fn s_operator_scalar_oracles() {
        let ctl = SubordinationControl::default();
        let a = Generator::scalar(1.0);
        let caputo = s_operator(&a, 0.5, 1.0, 1.0, &v(&[1.0]), &ctl).unwrap();
        assert!((caputo[0] - mittag_leffler(0.5, 1.0, -1.0).unwrap()).abs() < 5e-4);
        let rl = weighted_s_operator(&a, 0.5, 0.0, 1.0, &v(&[1.0]), &ctl).unwrap();
        assert!((rl[0] - mittag_leffler(0.5, 0.5, -1.0).unwrap()).abs() < 5e-4);
        let origin = s_operator(&a, 0.5, 1.0, 0.0, &v(&[3.0]), &ctl).unwrap();
        assert_eq!(origin[0], 3.0);
    }

    #[test]
    fn grid_operators_match_mittag_leffler() {
        let ctl = SubordinationControl::default();
        let grid = Grid::new(0.0, 1.0, 256).unwrap();
        for (mu, nu) in [(0.5, 0.5), (0.5, 1.0), (0.3, 0.7), (0.8, 0.0)] {
            let gamma = mu + nu * (1.0 - mu);
            for lambda in [0.5, 1.0, 2.0] {
                let ops = SolutionOperators::build(&Generator::scalar(lambda), mu, nu, grid, &ctl)
                    .unwrap();
                for i in (0..=256).step_by(16) {
                    let t: f64 = grid.node(i);
                    let z = -lambda * t.powf(mu);
                    let s = ops.s_weighted(i)[(0, 0)];
                    assert!((s - mittag_leffler(mu, gamma, z).unwrap()).abs() < 5e-4);
                    let p = ops.p_lag(i)[(0, 0)];
                    assert!((p - mittag_leffler(mu, mu, z).unwrap()).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn operator_bound_examples() {
        let ctl = SubordinationControl::default();
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let m0 = operator_bound_m(&Generator::zero(1), 0.5, 1.0, g, &ctl).unwrap();
        assert!((m0 - 1.0).abs() < 1e-6, "{m0}");
        let m1 = operator_bound_m(&Generator::scalar(1.0), 0.5, 1.0, g, &ctl).unwrap();
        assert_eq!(m1, 1.0);
        let grow = operator_bound_m(&Generator::scalar(-1.0), 0.5, 1.0, g, &ctl).unwrap();
        // E_{1/2}(1) = e erfc(-1)
        assert!((grow - 5.008_980_080_762_283).abs() < 1e-8, "{grow}");
    }
}
