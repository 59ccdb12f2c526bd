//! Grid fractional integrals with respect to an increasing function psi,
//! the Hilfer derivative and the weighted sup-norm.
//!
//! Every integral here is a product-integration rule: the integrand is split
//! into a weakly singular part that is integrated exactly (or by a Gauss
//! rule carrying the singular weight) and a regular part interpolated
//! between grid nodes. What is interpolated, and in which variable, is fixed
//! by [`FracQuadrature`]:
//!
//! * `weight_exp == 0` and `interp_power == 1`: the regular part is linear in
//!   `x = psi(s)` and the moments of `(psi(t) - x)^{order-1}` are closed form.
//! * otherwise the integrand is `(s - t0)^{weight_exp} * v(s)` with `v`
//!   linear in `(s - t0)^{interp_power}`; each subinterval is integrated by
//!   Gauss-Jacobi rules that absorb the endpoint singularities.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre, GaussRule};
use crate::specfun::{gamma, rgamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "lowercase")]
pub enum PsiKind {
    Identity,
    /// psi(t) = t^p
    Power(f64),
    /// psi(t) = e^{c t}
    Exponential(f64),
}

/// Increasing kernel generator psi together with its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PsiFunction {
    pub kind: PsiKind,
}

impl Default for PsiFunction {
    fn default() -> Self {
        Self::identity()
    }
}

impl PsiFunction {
    pub fn identity() -> Self {
        Self {
            kind: PsiKind::Identity,
        }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(domain(format!("power psi needs p > 0, got {p}")));
        }
        Ok(Self {
            kind: PsiKind::Power(p),
        })
    }

    pub fn exponential(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(domain(format!("exponential psi needs c > 0, got {c}")));
        }
        Ok(Self {
            kind: PsiKind::Exponential(c),
        })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, PsiKind::Identity)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => t,
            PsiKind::Power(p) => t.powf(p),
            PsiKind::Exponential(c) => (c * t).exp(),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        match self.kind {
            PsiKind::Identity => 1.0,
            PsiKind::Power(p) => p * t.powf(p - 1.0),
            PsiKind::Exponential(c) => c * (c * t).exp(),
        }
    }

    /// Checks that psi' is finite and positive on `(lo, hi]` and that psi is
    /// defined at `lo`.
    pub fn validate_on(&self, lo: f64, hi: f64) -> Result<()> {
        if let PsiKind::Power(_) = self.kind {
            if lo < 0.0 {
                return Err(domain("power psi requires a nonnegative interval"));
            }
        }
        let v = self.eval(lo);
        let d = self.deriv(hi);
        if !v.is_finite() || !(d > 0.0) || !d.is_finite() {
            return Err(domain(format!("psi is not increasing on ({lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Uniform grid t0 = tau_0 < ... < tau_n = t0 + a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t0: f64,
    pub a: f64,
    pub n: usize,
}

impl Grid {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(t0: f64, a: f64, n: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !t0.is_finite() {
            return Err(domain(format!("grid needs finite t0 and a > 0, got t0={t0}, a={a}")));
        }
        if n < Self::MIN_INTERVALS {
            return Err(domain(format!(
                "grid needs at least {} subintervals, got {n}",
                Self::MIN_INTERVALS
            )));
        }
        Ok(Self { t0, a, n })
    }

    pub fn step(&self) -> f64 {
        self.a / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.t0 + self.a
        } else {
            self.t0 + self.a * i as f64 / self.n as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.a
    }

    /// Index of the subinterval containing `t` (clamped to the grid).
    pub fn locate(&self, t: f64) -> usize {
        let x = ((t - self.t0) / self.step()).floor();
        if x < 0.0 {
            0
        } else {
            (x as usize).min(self.n - 1)
        }
    }
}

/// Weight t^{1-gamma} of the space C_{1-gamma}; identically one at gamma = 1.
pub fn weight(gamma: f64, t: f64) -> f64 {
    if gamma == 1.0 {
        1.0
    } else {
        t.powf(1.0 - gamma)
    }
}

/// A sampled state path stored in weighted form w(t) = t^{1-gamma} u(t).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    gamma: f64,
    values: Vec<DVector<f64>>,
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let weighted: Vec<Vec<f64>> = self.values.iter().map(|v| v.iter().copied().collect()).collect();
        let mut st = ser.serialize_struct("Trajectory", 3)?;
        st.serialize_field("grid", &self.grid)?;
        st.serialize_field("gamma", &self.gamma)?;
        st.serialize_field("weighted", &weighted)?;
        st.end()
    }
}

impl Trajectory {
    pub fn new(grid: Grid, gamma: f64, values: Vec<DVector<f64>>) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(domain(format!("trajectory gamma = {gamma} not in (0, 1]")));
        }
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(domain("trajectory state dimension must be at least 1"));
        }
        for (i, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::GridMismatch(format!("node {i} has dimension {}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    node: i,
                    t: grid.node(i),
                });
            }
        }
        Ok(Self {
            grid,
            gamma,
            values,
        })
    }

    /// The path whose weighted values are `w` at every node.
    pub fn constant_weighted(grid: Grid, gamma: f64, w: &DVector<f64>) -> Result<Self> {
        Self::new(grid, gamma, vec![w.clone(); grid.len()])
    }

    /// Samples a weighted path given as a function of t.
    pub fn from_weighted_fn(
        grid: Grid,
        gamma: f64,
        mut w: impl FnMut(f64) -> DVector<f64>,
    ) -> Result<Self> {
        let values = grid.nodes().into_iter().map(&mut w).collect();
        Self::new(grid, gamma, values)
    }

    /// Samples an unweighted scalar-or-vector function (gamma = 1).
    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> DVector<f64>) -> Result<Self> {
        Self::from_weighted_fn(grid, 1.0, f)
    }

    pub fn zeros(grid: Grid, gamma: f64, dim: usize) -> Result<Self> {
        Self::constant_weighted(grid, gamma, &DVector::zeros(dim))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn weighted(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn weighted_at(&self, i: usize) -> &DVector<f64> {
        &self.values[i]
    }

    /// u(tau_i); `None` where the weight vanishes (t = 0 with gamma < 1).
    pub fn unweighted_at(&self, i: usize) -> Option<DVector<f64>> {
        let t = self.grid.node(i);
        let w = weight(self.gamma, t);
        if w == 0.0 {
            None
        } else {
            Some(&self.values[i] / w)
        }
    }

    /// Weighted value at an arbitrary time, linear between nodes.
    pub fn interpolate_weighted(&self, t: f64) -> DVector<f64> {
        let j = self.grid.locate(t);
        let (lo, hi) = (self.grid.node(j), self.grid.node(j + 1));
        let theta = ((t - lo) / (hi - lo)).clamp(0.0, 1.0);
        &self.values[j] * (1.0 - theta) + &self.values[j + 1] * theta
    }

    /// Unweighted value at an arbitrary time t > 0 (or any t when gamma = 1).
    pub fn interpolate(&self, t: f64) -> DVector<f64> {
        self.interpolate_weighted(t) / weight(self.gamma, t)
    }

    pub fn same_layout(&self, other: &Trajectory) -> Result<()> {
        if self.grid != other.grid || self.gamma != other.gamma || self.dim() != other.dim() {
            return Err(Error::GridMismatch(
                "trajectories live on different grids, weights or dimensions".into(),
            ));
        }
        Ok(())
    }

    /// Weighted sup-distance ||self - other||_{C_{1-gamma}}.
    pub fn distance(&self, other: &Trajectory) -> Result<f64> {
        self.same_layout(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, c: f64) -> Trajectory {
        Trajectory {
            grid: self.grid,
            gamma: self.gamma,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Trajectory) -> Result<Trajectory> {
        self.same_layout(other)?;
        Ok(Trajectory {
            grid: self.grid,
            gamma: self.gamma,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }
}

/// ||u||_{C_{1-gamma}}: the largest Euclidean norm of the weighted values.
pub fn weighted_norm(u: &Trajectory) -> f64 {
    u.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

const NEAR_NODES: usize = 14;
const MID_NODES: usize = 10;
const FAR_NODES: usize = 6;
const FAR_DISTANCE: usize = 4;

/// Product-integration rule for (I^{order; psi} g)(tau_i) on a grid.
///
/// The weights already include the factor 1/Gamma(order).
#[derive(Debug, Clone)]
pub struct FracQuadrature {
    order: f64,
    psi: PsiFunction,
    grid: Grid,
    weight_exp: f64,
    interp_power: f64,
    quadratic: bool,
    rules: Option<Rules>,
}

#[derive(Debug, Clone)]
struct Rules {
    far: GaussRule,
    mid: GaussRule,
    near: GaussRule,
    at_t: GaussRule,
    at_0: GaussRule,
    at_0_lifted: GaussRule,
    both: GaussRule,
    both_lifted: GaussRule,
    at_0_lifted2: GaussRule,
    both_lifted2: GaussRule,
}

impl FracQuadrature {
    /// `order >= 0` (zero is the identity), `weight_exp > -1`,
    /// `interp_power > 0`.
    pub fn new(
        order: f64,
        psi: PsiFunction,
        grid: Grid,
        weight_exp: f64,
        interp_power: f64,
    ) -> Result<Self> {
        if !(order >= 0.0) || !order.is_finite() {
            return Err(domain(format!("fractional order {order} must be >= 0")));
        }
        if !(weight_exp > -1.0) {
            return Err(domain(format!("weight exponent {weight_exp} must exceed -1")));
        }
        if !(interp_power > 0.0) {
            return Err(domain(format!("interpolation power {interp_power} must be positive")));
        }
        if (weight_exp != 0.0 || interp_power != 1.0) && grid.t0 < 0.0 {
            return Err(domain("weighted quadrature needs t0 >= 0"));
        }
        psi.validate_on(grid.t0, grid.end())?;
        let closed = weight_exp == 0.0 && interp_power == 1.0;
        let rules = if order == 0.0 || closed {
            None
        } else {
            Some(Rules::new(order, weight_exp, interp_power))
        };
        Ok(Self {
            order,
            psi,
            grid,
            weight_exp,
            interp_power,
            quadratic: false,
            rules,
        })
    }

    /// Switches to piecewise-quadratic interpolation in (s - t0)^p over
    /// three neighbouring nodes.
    pub fn quadratic(mut self) -> Self {
        if self.order > 0.0 {
            self.quadratic = true;
            if self.rules.is_none() {
                self.rules = Some(Rules::new(self.order, self.weight_exp, self.interp_power));
            }
        }
        self
    }

    /// Plain rule: unweighted integrand, linear in psi.
    pub fn plain(order: f64, psi: PsiFunction, grid: Grid) -> Result<Self> {
        Self::new(order, psi, grid, 0.0, 1.0)
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Weights `w_0..=w_i` with (I g)(tau_i) ~ sum_j w_j v_j, where
    /// `v_j` is the regular part of the integrand at node j.
    ///
    /// A quadratic row at i = 1 also weights node 2.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let len = if self.quadratic && i >= 1 { (i + 1).max(3) } else { i + 1 };
        let mut w = vec![0.0; len];
        if self.order == 0.0 {
            w[i] = (self.grid.node(i) - self.grid.t0).powf(self.weight_exp);
            return w;
        }
        match &self.rules {
            None => self.closed_row(i, &mut w),
            Some(rules) => {
                for j in 0..i {
                    self.gauss_interval(rules, i, j, &mut w);
                }
            }
        }
        let scale = rgamma(self.order);
        for x in &mut w {
            *x *= scale;
        }
        w
    }

    /// All rows, for repeated application on the same grid.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..=self.grid.n).map(|i| self.row(i)).collect()
    }

    /// (I g)(tau_i) for vector-valued regular parts.
    pub fn apply(&self, i: usize, values: &[DVector<f64>]) -> DVector<f64> {
        combine(&self.row(i), values)
    }

    fn closed_row(&self, i: usize, w: &mut [f64]) {
        let beta = self.order;
        let big_x = self.psi.eval(self.grid.node(i));
        for j in 0..i {
            let xl = self.psi.eval(self.grid.node(j));
            let xr = self.psi.eval(self.grid.node(j + 1));
            let yl = big_x - xl;
            let yr = (big_x - xr).max(0.0);
            let m0 = (yl.powf(beta) - yr.powf(beta)) / beta;
            let m1 = yl * m0 - (yl.powf(beta + 1.0) - yr.powf(beta + 1.0)) / (beta + 1.0);
            let d = xr - xl;
            w[j + 1] += m1 / d;
            w[j] += m0 - m1 / d;
        }
    }

    fn gauss_interval(&self, rules: &Rules, i: usize, j: usize, w: &mut [f64]) {
        let t0 = self.grid.t0;
        let t = self.grid.node(i);
        let (l, r) = (self.grid.node(j), self.grid.node(j + 1));
        let beta = self.order;
        let c = self.weight_exp;
        let p = self.interp_power;
        let psi = self.psi;
        let psi_t = psi.eval(t);
        let touches_t = j + 1 == i;
        let special_0 = j == 0 && (c != 0.0 || p != 1.0);
        let half = 0.5 * (r - l);
        // quadratic stencil start, kept inside 0..=i
        let quad = if self.quadratic {
            Some(j.min(i.max(2) - 2))
        } else {
            None
        };

        // regular part of the kernel after the Jacobi weights are removed
        let kernel = |s: f64| -> f64 {
            if touches_t {
                let ratio = if psi.is_identity() {
                    1.0
                } else {
                    (psi_t - psi.eval(s)) / (t - s)
                };
                psi.deriv(s) * ratio.powf(beta - 1.0)
            } else {
                psi.deriv(s) * (psi_t - psi.eval(s)).powf(beta - 1.0)
            }
        };
        let a_exp = if touches_t { beta - 1.0 } else { 0.0 };

        if special_0 {
            // on [t0, t0 + h]: v = v_0 (1 - (s/h)^p) + v_1 (s/h)^p
            let hp = (r - t0).powf(p);
            let (r_c, r_cp) = if touches_t {
                (&rules.both, &rules.both_lifted)
            } else {
                (&rules.at_0, &rules.at_0_lifted)
            };
            let i_c = jacobi_integral(r_c, l, r, a_exp, c, &kernel);
            let i_cp = jacobi_integral(r_cp, l, r, a_exp, c + p, &kernel);
            if let Some(k0) = quad {
                let r_c2 = if touches_t {
                    &rules.both_lifted2
                } else {
                    &rules.at_0_lifted2
                };
                let i_c2 = jacobi_integral(r_c2, l, r, a_exp, c + 2.0 * p, &kernel);
                let xs = [0, 1, 2].map(|m| (self.grid.node(k0 + m) - t0).powf(p));
                for (m, coef) in lagrange3(xs).iter().enumerate() {
                    w[k0 + m] += coef[0] * i_c + coef[1] * i_cp + coef[2] * i_c2;
                }
                return;
            }
            w[j + 1] += i_cp / hp;
            w[j] += i_c - i_cp / hp;
            return;
        }

        let dist_t = i - 1 - j;
        let dist_0 = if c != 0.0 || p != 1.0 { j } else { usize::MAX };
        let rule = if touches_t {
            &rules.at_t
        } else {
            let d = dist_t.min(dist_0);
            if d == 0 {
                &rules.near
            } else if d < FAR_DISTANCE {
                &rules.mid
            } else {
                &rules.far
            }
        };
        let hw = half.powf(a_exp);
        if let Some(k0) = quad {
            let xs = [0, 1, 2].map(|m| (self.grid.node(k0 + m) - t0).powf(p));
            let basis = lagrange3(xs);
            let mut acc = [0.0; 3];
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let s = l + half * (x + 1.0);
                let sigma = s - t0;
                let mut g = kernel(s) * wt;
                if c != 0.0 {
                    g *= sigma.powf(c);
                }
                let phi = if p == 1.0 { sigma } else { sigma.powf(p) };
                for (a, b) in acc.iter_mut().zip(&basis) {
                    *a += g * (b[0] + phi * (b[1] + phi * b[2]));
                }
            }
            for (m, a) in acc.iter().enumerate() {
                w[k0 + m] += a * half * hw;
            }
            return;
        }
        let (pl, pr) = ((l - t0).powf(p), (r - t0).powf(p));
        let dp = pr - pl;
        let mut acc0 = 0.0;
        let mut acc1 = 0.0;
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let s = l + half * (x + 1.0);
            let sigma = s - t0;
            let mut g = kernel(s) * wt;
            if c != 0.0 {
                g *= sigma.powf(c);
            }
            let phi = if p == 1.0 { sigma } else { sigma.powf(p) };
            let l1 = (phi - pl) / dp;
            acc1 += g * l1;
            acc0 += g * (1.0 - l1);
        }
        w[j] += acc0 * half * hw;
        w[j + 1] += acc1 * half * hw;
    }
}

impl Rules {
    fn new(order: f64, c: f64, p: f64) -> Self {
        let a = order - 1.0;
        Rules {
            far: gauss_legendre(FAR_NODES),
            mid: gauss_legendre(MID_NODES),
            near: gauss_legendre(NEAR_NODES),
            at_t: gauss_jacobi(NEAR_NODES, a, 0.0),
            at_0: gauss_jacobi(NEAR_NODES, 0.0, c),
            at_0_lifted: gauss_jacobi(NEAR_NODES, 0.0, c + p),
            both: gauss_jacobi(NEAR_NODES, a, c),
            both_lifted: gauss_jacobi(NEAR_NODES, a, c + p),
            at_0_lifted2: gauss_jacobi(NEAR_NODES, 0.0, c + 2.0 * p),
            both_lifted2: gauss_jacobi(NEAR_NODES, a, c + 2.0 * p),
        }
    }
}

/// Lagrange basis over three abscissae, as monomial coefficients
/// [1, x, x^2] per basis polynomial.
fn lagrange3(x: [f64; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for k in 0..3 {
        let (a, b) = match k {
            0 => (x[1], x[2]),
            1 => (x[0], x[2]),
            _ => (x[0], x[1]),
        };
        let d = (x[k] - a) * (x[k] - b);
        out[k] = [a * b / d, -(a + b) / d, 1.0 / d];
    }
    out
}

/// int_l^r (r - s)^a (s - l)^b g(s) ds with a Gauss-Jacobi rule for (a, b).
fn jacobi_integral(rule: &GaussRule, l: f64, r: f64, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (r - l);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * g(l + half * (x + 1.0));
    }
    acc * half.powf(1.0 + a + b)
}

/// sum_j w_j v_j in index order.
pub fn combine(weights: &[f64], values: &[DVector<f64>]) -> DVector<f64> {
    let mut acc = DVector::zeros(values[0].len());
    for (w, v) in weights.iter().zip(values) {
        acc.axpy(*w, v, 1.0);
    }
    acc
}

fn check_order(mu: f64, name: &str) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(domain(format!("{name}: order {mu} not in (0, 1]")));
    }
    Ok(())
}

fn trajectory_rule(order: f64, psi: PsiFunction, f: &Trajectory) -> Result<FracQuadrature> {
    let c = f.gamma() - 1.0;
    if c != 0.0 && f.grid().t0 != 0.0 {
        return Err(domain("weighted trajectories with gamma < 1 must start at t0 = 0"));
    }
    FracQuadrature::new(order, psi, *f.grid(), c, 1.0)
}

/// (I^{mu; psi} f)(tau_i) for a weighted path f.
///
/// For `gamma(f) < 1` the factor t^{gamma-1} is carried exactly by the rule
/// and the weighted values are interpolated linearly.
pub fn psi_frac_integral(
    mu: f64,
    psi: PsiFunction,
    f: &Trajectory,
    t_index: usize,
) -> Result<DVector<f64>> {
    check_order(mu, "psi_frac_integral")?;
    if t_index > f.grid().n {
        return Err(Error::GridMismatch(format!(
            "node index {t_index} outside a grid with {} intervals",
            f.grid().n
        )));
    }
    let rule = trajectory_rule(mu, psi, f)?;
    Ok(rule.apply(t_index, f.weighted()))
}

/// (I^{mu; psi} f) at every node.
pub fn psi_frac_integral_path(mu: f64, psi: PsiFunction, f: &Trajectory) -> Result<Vec<DVector<f64>>> {
    check_order(mu, "psi_frac_integral")?;
    let rule = trajectory_rule(mu, psi, f)?;
    Ok((0..=f.grid().n).map(|i| rule.apply(i, f.weighted())).collect())
}

/// Riemann-Liouville integral of any order >= 0 of a weighted path, with the
/// value at the initial node replaced by its limit.
pub(crate) fn rl_integral_with_limit(order: f64, f: &Trajectory) -> Result<Vec<DVector<f64>>> {
    let c = f.gamma() - 1.0;
    let rule = trajectory_rule(order, PsiFunction::identity(), f)?;
    let mut out: Vec<DVector<f64>> = (1..=f.grid().n).map(|i| rule.apply(i, f.weighted())).collect();
    // I^order [s^c w] ~ w_0 Gamma(c+1)/Gamma(c+1+order) t^{c+order} near 0
    let e = c + order;
    let w0 = f.weighted_at(0);
    let first = if e > 1e-12 {
        DVector::zeros(f.dim())
    } else if e.abs() <= 1e-12 {
        w0 * (gamma(c + 1.0)? * rgamma(c + 1.0 + order))
    } else {
        return Err(domain(
            "fractional integral is unbounded at the initial node; raise the order or the weight",
        ));
    };
    out.insert(0, first);
    Ok(out)
}

fn central_differences(grid: &Grid, f: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let h = grid.step();
    let n = grid.n;
    (0..=n)
        .map(|i| {
            if i == 0 {
                (&f[1] - &f[0]) / h
            } else if i == n {
                (&f[n] - &f[n - 1]) / h
            } else {
                (&f[i + 1] - &f[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Hilfer derivative I^{nu(1-mu)} d/dt I^{(1-nu)(1-mu)} u at every node.
///
/// The inner integral carries the weight of `u`; its derivative uses central
/// differences with the grid step (one-sided at both ends) and the outer
/// integral treats that derivative as a plain grid function. The entry at
/// the initial node comes from the one-sided stencil and is not meaningful
/// when the derivative is singular there.
pub fn hilfer_derivative_path(mu: f64, nu: f64, u: &Trajectory) -> Result<Vec<DVector<f64>>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(domain(format!("hilfer_derivative: mu = {mu} not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(domain(format!("hilfer_derivative: nu = {nu} not in [0, 1]")));
    }
    let grid = *u.grid();
    let inner_order = (1.0 - nu) * (1.0 - mu);
    let outer_order = nu * (1.0 - mu);
    let inner = rl_integral_with_limit(inner_order, u)?;
    let deriv = central_differences(&grid, &inner);
    if outer_order == 0.0 {
        return Ok(deriv);
    }
    let outer = FracQuadrature::plain(outer_order, PsiFunction::identity(), grid)?;
    Ok((0..=grid.n).map(|i| outer.apply(i, &deriv)).collect())
}

/// Hilfer derivative at one node, `t_index >= 1`.
pub fn hilfer_derivative(mu: f64, nu: f64, u: &Trajectory, t_index: usize) -> Result<DVector<f64>> {
    if t_index == 0 || t_index > u.grid().n {
        return Err(Error::GridMismatch(format!(
            "hilfer_derivative needs 1 <= t_index <= {}, got {t_index}",
            u.grid().n
        )));
    }
    Ok(hilfer_derivative_path(mu, nu, u)?.swap_remove(t_index))
}

/// t^{1-gamma} D^{mu,nu} u at every node, for a weighted path u with
/// gamma(u) = mu + nu (1 - mu), through
/// D^{mu,nu} u = d/dt I^{1-mu} u - (I^{1-gamma} u)(0+) t^{beta-1} / Gamma(beta),
/// beta = nu (1 - mu).
///
/// Writing I^{1-mu} u = tau^beta G(x) with x = tau^mu gives
/// t^{1-gamma} D^{mu,nu} u = beta (G(x) - G(0)) / x + mu G'(x). G is smooth in
/// x when w is smooth in tau^mu, so I^{1-mu} is taken with interpolation in
/// tau^mu and G' with three-point differences on the x-nodes. The first
/// interior node is then as accurate as the rest.
pub fn hilfer_derivative_weighted_path(
    mu: f64,
    nu: f64,
    u: &Trajectory,
) -> Result<Vec<DVector<f64>>> {
    check_order(mu, "hilfer_derivative")?;
    if !(0.0..=1.0).contains(&nu) {
        return Err(domain(format!("hilfer_derivative: nu = {nu} not in [0, 1]")));
    }
    let gam = mu + nu * (1.0 - mu);
    if (gam - u.gamma()).abs() > 1e-12 {
        return Err(domain(format!(
            "trajectory weight gamma = {} does not match mu, nu (gamma = {gam})",
            u.gamma()
        )));
    }
    let grid = *u.grid();
    let n = grid.n;
    let beta = nu * (1.0 - mu);
    let rule =
        FracQuadrature::new(1.0 - mu, PsiFunction::identity(), grid, gam - 1.0, mu)?.quadratic();
    let x: Vec<f64> = (0..=n).map(|i| (grid.node(i) - grid.t0).powf(mu)).collect();
    let mut g: Vec<DVector<f64>> = Vec::with_capacity(n + 1);
    g.push(u.weighted_at(0) * (gamma(gam)? * rgamma(1.0 + beta)));
    for i in 1..=n {
        let tau = grid.node(i) - grid.t0;
        g.push(rule.apply(i, u.weighted()) / tau.powf(beta));
    }
    let dg = |i: usize| -> DVector<f64> {
        let (l, m, r) = if i == 0 {
            (0, 1, 2)
        } else if i == n {
            (n - 2, n - 1, n)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (x[l], x[m], x[r]);
        let xi = x[i];
        // derivative of the quadratic through the three points, at xi
        let c0 = (2.0 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let c1 = (2.0 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let c2 = (2.0 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
        &g[l] * c0 + &g[m] * c1 + &g[r] * c2
    };
    Ok((0..=n)
        .map(|i| {
            let d = dg(i);
            if i == 0 {
                d * (beta + mu)
            } else {
                (&g[i] - &g[0]) * (beta / x[i]) + d * mu
            }
        })
        .collect())
}
