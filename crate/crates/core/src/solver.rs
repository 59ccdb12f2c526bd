//! Picard iteration on the mild-solution operator.
//!
//! The problem is
//!
//! ```text
//! D^{mu,nu} u + A u = f(t, u) + (1/Gamma(mu)) int_{t0}^t H^mu(t,s) K(t, s, u(s)) ds
//! I^{1-gamma} u(t0+) + g(u(t_1), ..., u(t_p)) = u0
//! ```
//!
//! and its mild form is the fixed point of
//!
//! ```text
//! F(u)(t) = S(t) [u0 - g(..)] + int K_mu(t - s) [f(s, u(s)) + V(s)] ds,
//! V(s) = (I^{mu; psi} K(s, ., u(.)))(s).
//! ```
//!
//! All arithmetic is carried out on weighted values w = t^{1-gamma} u.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::frac_ops::{
    combine, hilfer_derivative_weighted_path, psi_frac_integral, weight, FracQuadrature, Grid,
    PsiFunction, Trajectory,
};
use crate::operators::{Generator, SolutionOperators, SubordinationControl};

/// f(t, u).
pub type SourceFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
/// K(t, s, u).
pub type KernelFn = Arc<dyn Fn(f64, f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
/// g(u(t_1), ..., u(t_p)).
pub type NonlocalFn = Arc<dyn Fn(&[DVector<f64>]) -> DVector<f64> + Send + Sync>;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

/// One instance of the nonlocal problem. Absent maps are identically zero.
#[derive(Clone)]
pub struct ProblemSpec {
    pub mu: f64,
    pub nu: f64,
    pub t0: f64,
    pub a: f64,
    pub generator: Generator,
    pub u0: DVector<f64>,
    pub f: Option<SourceFn>,
    pub kernel: Option<KernelFn>,
    pub nonlocal_points: Vec<f64>,
    pub g: Option<NonlocalFn>,
    pub psi: PsiFunction,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("mu", &self.mu)
            .field("nu", &self.nu)
            .field("t0", &self.t0)
            .field("a", &self.a)
            .field("generator", &self.generator)
            .field("u0", &self.u0)
            .field("f", &self.f.is_some())
            .field("kernel", &self.kernel.is_some())
            .field("nonlocal_points", &self.nonlocal_points)
            .field("g", &self.g.is_some())
            .field("psi", &self.psi)
            .finish()
    }
}

impl ProblemSpec {
    /// The homogeneous linear problem; add terms with the `with_*` methods.
    pub fn new(mu: f64, nu: f64, t0: f64, a: f64, generator: Generator, u0: DVector<f64>) -> Result<Self> {
        let p = Self {
            mu,
            nu,
            t0,
            a,
            generator,
            u0,
            f: None,
            kernel: None,
            nonlocal_points: Vec::new(),
            g: None,
            psi: PsiFunction::identity(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_source(mut self, f: SourceFn) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_kernel(mut self, k: KernelFn) -> Self {
        self.kernel = Some(k);
        self
    }

    pub fn with_nonlocal(mut self, points: Vec<f64>, g: NonlocalFn) -> Result<Self> {
        self.nonlocal_points = points;
        self.g = Some(g);
        self.validate()?;
        Ok(self)
    }

    pub fn with_psi(mut self, psi: PsiFunction) -> Result<Self> {
        self.psi = psi;
        self.validate()?;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.mu + self.nu * (1.0 - self.mu)
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.f.is_none() && self.kernel.is_none() && self.g.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(domain(format!("mu = {} not in (0, 1]", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return Err(domain(format!("nu = {} not in [0, 1]", self.nu)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(domain(format!("horizon a = {} must be positive", self.a)));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(domain(format!("t0 = {} must be >= 0", self.t0)));
        }
        if self.gamma() < 1.0 && self.t0 != 0.0 {
            return Err(domain("gamma < 1 requires t0 = 0"));
        }
        if self.u0.is_empty() || self.u0.len() != self.generator.dim() {
            return Err(Error::GridMismatch(format!(
                "u0 has dimension {} but the generator is {}x{}",
                self.u0.len(),
                self.generator.dim(),
                self.generator.dim()
            )));
        }
        let end = self.t0 + self.a;
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.nonlocal_points {
            let lower_ok = if self.gamma() < 1.0 { t > self.t0 } else { t >= self.t0 };
            if !(lower_ok && t <= end) {
                return Err(domain(format!("nonlocal point {t} outside the interval")));
            }
            if !(t > prev) {
                return Err(domain("nonlocal points must be strictly increasing"));
            }
            prev = t;
        }
        if self.g.is_some() && self.nonlocal_points.is_empty() {
            return Err(domain("a nonlocal map needs at least one point"));
        }
        self.psi.validate_on(self.t0, end)
    }

    pub fn grid(&self, n: usize) -> Result<Grid> {
        Grid::new(self.t0, self.a, n)
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if (grid.t0 - self.t0).abs() > 1e-14 || (grid.a - self.a).abs() > 1e-14 * self.a {
            return Err(Error::GridMismatch(format!(
                "grid [{}, {}] does not cover the problem interval [{}, {}]",
                grid.t0,
                grid.end(),
                self.t0,
                self.t0 + self.a
            )));
        }
        Ok(())
    }

    fn nonlocal_value(&self, u: &Trajectory) -> Result<DVector<f64>> {
        match &self.g {
            None => Ok(DVector::zeros(self.dim())),
            Some(g) => {
                let vals: Vec<_> = self.nonlocal_points.iter().map(|&t| u.interpolate(t)).collect();
                checked(g(&vals), self.dim(), "nonlocal map")
            }
        }
    }

    fn source(&self, t: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.f {
            None => Ok(DVector::zeros(self.dim())),
            Some(f) => checked(f(t, u), self.dim(), "source term"),
        }
    }
}

fn checked(v: DVector<f64>, dim: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != dim {
        return Err(Error::GridMismatch(format!(
            "{what} returned dimension {}, expected {dim}",
            v.len()
        )));
    }
    Ok(v)
}

/// Outcome of a Picard iteration.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// ||u_{k+1} - u_k|| in the weighted norm, one per iteration
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// max_k residuals[k+1] / residuals[k] over k >= 1; zero with fewer
    /// than three residuals
    pub measured_ratio: f64,
    #[serde(rename = "final")]
    pub final_: Trajectory,
}

fn measured_ratio(res: &[f64]) -> f64 {
    (1..res.len().saturating_sub(1))
        .filter(|&k| res[k] > 0.0)
        .map(|k| res[k + 1] / res[k])
        .fold(0.0, f64::max)
}

/// The mild-solution operator F assembled for one problem and grid.
///
/// Construction precomputes the solution operators and the quadrature
/// weights, so repeated `apply` calls only evaluate the problem maps.
pub struct MildOperator<'p> {
    problem: &'p ProblemSpec,
    grid: Grid,
    ops: SolutionOperators,
    /// weights of int_0^{t_i} (t_i - tau)^{gamma-1} tau^{mu-1} v(tau) dtau
    /// over lag nodes tau_j, scaled by Gamma(gamma)
    conv: Option<Vec<Vec<f64>>>,
    /// weights of I^{mu; psi} over s^{gamma-1} times weighted values
    inner: Option<Vec<Vec<f64>>>,
}

impl<'p> MildOperator<'p> {
    pub fn new(problem: &'p ProblemSpec, grid: Grid, ctl: &SubordinationControl) -> Result<Self> {
        problem.validate()?;
        problem.check_grid(&grid)?;
        let (mu, gamma) = (problem.mu, problem.gamma());
        let ops = SolutionOperators::build(&problem.generator, mu, problem.nu, grid, ctl)?;
        let forced = problem.f.is_some() || problem.kernel.is_some();
        let conv = if forced {
            let local = Grid::new(0.0, grid.a, grid.n)?;
            let id = PsiFunction::identity();
            let quad = FracQuadrature::new(gamma, id, local, mu - 1.0, mu)?.quadratic();
            let lin = FracQuadrature::new(gamma, id, local, mu - 1.0, mu)?;
            let scale = crate::specfun::gamma(gamma)?;
            let rows = (0..=grid.n)
                .map(|i| {
                    // the quadratic stencil of row 1 would reach past the data
                    let row = if i == 1 { lin.row(1) } else { quad.row(i) };
                    row.into_iter().map(|x| x * scale).collect()
                })
                .collect();
            Some(rows)
        } else {
            None
        };
        let inner = if problem.kernel.is_some() {
            Some(FracQuadrature::new(mu, problem.psi, grid, gamma - 1.0, 1.0)?.matrix())
        } else {
            None
        };
        Ok(Self {
            problem,
            grid,
            ops,
            conv,
            inner,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn operators(&self) -> &SolutionOperators {
        &self.ops
    }

    /// The constant weighted extension of u0.
    pub fn initial_iterate(&self) -> Result<Trajectory> {
        Trajectory::constant_weighted(self.grid, self.problem.gamma(), &self.problem.u0)
    }

    fn check_input(&self, u: &Trajectory) -> Result<()> {
        if u.grid() != &self.grid
            || (u.gamma() - self.problem.gamma()).abs() > 1e-12
            || u.dim() != self.problem.dim()
        {
            return Err(Error::GridMismatch(
                "trajectory does not live on the operator's grid and weight".into(),
            ));
        }
        Ok(())
    }

    /// Weighted s^{1-gamma} f at every node, with the value at the
    /// singular initial node extrapolated from nodes 1 and 2.
    fn weighted_source(&self, u: &Trajectory) -> Result<Vec<DVector<f64>>> {
        let p = self.problem;
        let gamma = p.gamma();
        let n = self.grid.n;
        let mut out = vec![DVector::zeros(p.dim()); n + 1];
        for (i, slot) in out.iter_mut().enumerate() {
            if let Some(ui) = u.unweighted_at(i) {
                let t = self.grid.node(i);
                *slot = p.source(t, &ui)? * weight(gamma, t);
            }
        }
        if gamma < 1.0 {
            out[0] = &out[1] * 2.0 - &out[2];
        }
        Ok(out)
    }

    /// Weighted s^{1-gamma} V(s) at every node.
    fn weighted_volterra(&self, u: &Trajectory) -> Result<Vec<DVector<f64>>> {
        let p = self.problem;
        let (Some(kernel), Some(rows)) = (&p.kernel, &self.inner) else {
            return Ok(vec![DVector::zeros(p.dim()); self.grid.n + 1]);
        };
        let gamma = p.gamma();
        let kw = |s: f64, j: usize| -> Result<DVector<f64>> {
            let tau = self.grid.node(j);
            let uj = u.unweighted_at(j).expect("interior node");
            Ok(checked(kernel(s, tau, &uj), p.dim(), "kernel")? * weight(gamma, tau))
        };
        let mut out = Vec::with_capacity(self.grid.n + 1);
        out.push(DVector::zeros(p.dim()));
        for (i, row) in rows.iter().enumerate().skip(1) {
            let s = self.grid.node(i);
            let mut vals = Vec::with_capacity(i + 1);
            vals.push(if gamma < 1.0 {
                kw(s, 1)? * 2.0 - kw(s, 2)?
            } else {
                let u0 = u.unweighted_at(0).expect("gamma = 1");
                checked(kernel(s, self.grid.node(0), &u0), p.dim(), "kernel")?
            });
            for j in 1..=i {
                vals.push(kw(s, j)?);
            }
            out.push(combine(row, &vals) * weight(gamma, s));
        }
        Ok(out)
    }

    /// F(u).
    pub fn apply(&self, u: &Trajectory) -> Result<Trajectory> {
        self.check_input(u)?;
        let p = self.problem;
        let n = self.grid.n;
        let shift = &p.u0 - p.nonlocal_value(u)?;
        let mut out: Vec<DVector<f64>> = (0..=n).map(|i| self.ops.s_weighted(i) * &shift).collect();
        if let Some(conv) = &self.conv {
            let src = self.weighted_source(u)?;
            let vol = self.weighted_volterra(u)?;
            let phi: Vec<DVector<f64>> = src.iter().zip(&vol).map(|(a, b)| a + b).collect();
            for (i, row) in conv.iter().enumerate().skip(1) {
                let mut acc = DVector::zeros(p.dim());
                for (j, wj) in row.iter().enumerate() {
                    if *wj != 0.0 {
                        acc += (self.ops.p_lag(j) * &phi[i - j]) * *wj;
                    }
                }
                out[i] += acc * weight(p.gamma(), self.grid.node(i));
            }
        }
        Trajectory::new(self.grid, p.gamma(), out)
    }

    /// Picard iteration from `initial` until successive weighted
    /// differences drop below `tol`.
    pub fn iterate(&self, initial: Trajectory, tol: f64, max_iter: usize) -> Result<SolveReport> {
        if !(tol > 0.0) {
            return Err(domain(format!("tolerance {tol} must be positive")));
        }
        if max_iter == 0 {
            return Err(domain("max_iter must be at least 1"));
        }
        self.check_input(&initial)?;
        let mut u = initial;
        let mut residuals = Vec::new();
        let mut converged = false;
        for _ in 0..max_iter {
            let next = self.apply(&u)?;
            let diff = next.distance(&u)?;
            residuals.push(diff);
            u = next;
            if diff < tol {
                converged = true;
                break;
            }
        }
        Ok(SolveReport {
            iterations: residuals.len(),
            measured_ratio: measured_ratio(&residuals),
            residuals,
            converged,
            final_: u,
        })
    }
}

/// One application of F on the problem's grid (taken from `u`).
pub fn apply_f(problem: &ProblemSpec, u: &Trajectory) -> Result<Trajectory> {
    MildOperator::new(problem, *u.grid(), &SubordinationControl::default())?.apply(u)
}

/// Picard iteration from the constant weighted extension of u0.
pub fn mild_solve(problem: &ProblemSpec, grid: Grid, tol: f64, max_iter: usize) -> Result<SolveReport> {
    let op = MildOperator::new(problem, grid, &SubordinationControl::default())?;
    let init = op.initial_iterate()?;
    op.iterate(init, tol, max_iter)
}

/// Picard iteration from a caller-supplied initial iterate.
pub fn mild_solve_from(
    problem: &ProblemSpec,
    initial: Trajectory,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let op = MildOperator::new(problem, *initial.grid(), &SubordinationControl::default())?;
    op.iterate(initial, tol, max_iter)
}

/// Weighted strong-form residual t^{1-gamma} r(t) on the interior nodes.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualPath {
    pub t: Vec<f64>,
    pub weighted: Vec<Vec<f64>>,
}

impl ResidualPath {
    pub fn weighted_sup(&self) -> f64 {
        self.weighted
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// r = D^{mu,nu} u + A u - f(t, u) - V(t) at nodes 1..n-1.
///
/// The derivative is the weighted form from
/// [`hilfer_derivative_weighted_path`]; the end nodes are excluded because
/// their stencils are one-sided.
pub fn strong_residual(problem: &ProblemSpec, u: &Trajectory) -> Result<ResidualPath> {
    let op = MildOperator::new(problem, *u.grid(), &SubordinationControl::default())?;
    op.check_input(u)?;
    let d = hilfer_derivative_weighted_path(problem.mu, problem.nu, u)?;
    let src = op.weighted_source(u)?;
    let vol = op.weighted_volterra(u)?;
    let a = problem.generator.matrix();
    let grid = *u.grid();
    let mut t = Vec::new();
    let mut weighted = Vec::new();
    for i in 1..grid.n {
        let r = &d[i] + a * u.weighted_at(i) - &src[i] - &vol[i];
        t.push(grid.node(i));
        weighted.push(r.iter().copied().collect());
    }
    Ok(ResidualPath { t, weighted })
}

/// ||(I^{1-gamma} u)(t0+) + g(u) - u0||.
///
/// For gamma = 1 the integral is the identity and u(t0) is used. Otherwise
/// the integral is evaluated at the first two interior nodes and
/// extrapolated to t0+ linearly in t^mu, because the value at the first
/// node alone is off by O(h^mu).
pub fn initial_condition_check(problem: &ProblemSpec, u: &Trajectory) -> Result<f64> {
    problem.validate()?;
    let gamma = problem.gamma();
    let start = if gamma >= 1.0 {
        u.weighted_at(0).clone()
    } else {
        let grid = u.grid();
        let phi1 = psi_frac_integral(1.0 - gamma, PsiFunction::identity(), u, 1)?;
        let phi2 = psi_frac_integral(1.0 - gamma, PsiFunction::identity(), u, 2)?;
        let x1 = (grid.node(1) - grid.t0).powf(problem.mu);
        let x2 = (grid.node(2) - grid.t0).powf(problem.mu);
        (phi1 * x2 - phi2 * x1) / (x2 - x1)
    };
    let g = problem.nonlocal_value(u)?;
    Ok((start + g - &problem.u0).norm())
}
