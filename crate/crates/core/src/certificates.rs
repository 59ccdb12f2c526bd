//! Well-posedness certificates and Gronwall-type bounds.
//!
//! The contraction constant and the ball-invariance inequality are
//! evaluated from a [`ConditionConstants`] record, which may be supplied by
//! the user or estimated by sampling a [`ProblemSpec`]. Sampled constants
//! are lower bounds, not proofs.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::frac_ops::{FracQuadrature, Grid, PsiFunction};
use crate::operators::{operator_bound_m, SubordinationControl};
use crate::solver::ProblemSpec;
use crate::specfun::{gamma, mittag_leffler};

/// Denominator used with the K0 and K1 terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaFactor {
    /// Gamma(mu)^2
    #[default]
    Printed,
    /// Gamma(mu) Gamma(mu + 1), the factor produced by integrating the
    /// inner kernel exactly; smaller than Gamma(mu)^2 for mu < 1, so q grows
    Standard,
}

impl GammaFactor {
    pub fn value(self, mu: f64) -> Result<f64> {
        let g = gamma(mu)?;
        Ok(match self {
            GammaFactor::Printed => g * g,
            GammaFactor::Standard => g * gamma(mu + 1.0)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionConstants {
    /// max over the grid of ||t^{1-gamma} S(t)||
    #[serde(rename = "M")]
    pub m: f64,
    /// Lipschitz constant of f in the state
    #[serde(rename = "L")]
    pub l: f64,
    /// Lipschitz constant of the kernel in the state
    #[serde(rename = "K0")]
    pub k0: f64,
    /// sup of the weighted ||K(t, s, 0)||
    #[serde(rename = "K1")]
    pub k1: f64,
    /// sup of the weighted ||f(s, 0)||
    #[serde(rename = "H")]
    pub h: f64,
    /// Lipschitz constant of g against the weighted distance; also used where
    /// a separate G0 constant would appear
    #[serde(rename = "Q0")]
    pub q0: f64,
    /// sup of ||g|| over the ball
    #[serde(rename = "G1_tilde")]
    pub g1_tilde: f64,
    pub r: f64,
    pub a: f64,
    pub mu: f64,
    #[serde(default)]
    pub psi: PsiFunction,
    #[serde(default)]
    pub t0: f64,
    pub u0_norm: f64,
    #[serde(default)]
    pub gamma_factor: GammaFactor,
}

impl ConditionConstants {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("M", self.m),
            ("L", self.l),
            ("K0", self.k0),
            ("K1", self.k1),
            ("H", self.h),
            ("Q0", self.q0),
            ("G1_tilde", self.g1_tilde),
            ("u0_norm", self.u0_norm),
            ("t0", self.t0),
        ];
        for (name, x) in named {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(domain(format!("constant {name} = {x} must be finite and >= 0")));
            }
        }
        if !(self.r > 0.0 && self.a > 0.0) {
            return Err(domain("ball radius r and horizon a must be positive"));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(domain(format!("mu = {} not in (0, 1]", self.mu)));
        }
        self.psi.validate_on(self.t0, self.t0 + self.a)
    }

    /// (psi(t0 + a) - psi(t0))^mu / gamma factor.
    fn kernel_scale(&self) -> Result<f64> {
        let span = self.psi.eval(self.t0 + self.a) - self.psi.eval(self.t0);
        Ok(span.powf(self.mu) / self.gamma_factor.value(self.mu)?)
    }
}

/// q = M Q0 + M L a + (M K0 a / Gamma(mu)^2) (psi(t0 + a) - psi(t0))^mu.
pub fn contraction_constant(c: &ConditionConstants) -> Result<f64> {
    c.validate()?;
    Ok(c.m * c.q0 + c.m * c.l * c.a + c.m * c.k0 * c.a * c.kernel_scale()?)
}

/// Left side of the ball-invariance inequality and whether it is <= r.
pub fn ball_invariance(c: &ConditionConstants) -> Result<(f64, bool)> {
    c.validate()?;
    let lhs = c.m
        * (c.u0_norm
            + c.g1_tilde
            + (c.l * c.r + c.h) * c.a
            + (c.k0 * c.r + c.k1) * c.kernel_scale()? * c.a);
    Ok((lhs, lhs <= c.r))
}

/// M (Q0 + L a + (K0 a / Gamma(mu)^2) (psi(t0 + a) - psi(t0))^mu).
pub fn conditions_ii_constant(c: &ConditionConstants) -> Result<f64> {
    c.validate()?;
    Ok(c.m * (c.q0 + c.l * c.a + c.k0 * c.a * c.kernel_scale()?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub q: f64,
    pub ball_lhs: f64,
    pub ball_ok: bool,
    pub contraction_ok: bool,
    #[serde(rename = "conditions_II_q")]
    pub conditions_ii_q: f64,
    pub constants: ConditionConstants,
    pub estimated: bool,
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub fn certified(&self) -> bool {
        self.contraction_ok && self.ball_ok
    }
}

/// Evaluates every inequality and collects the interpretation flags.
pub fn certify(c: &ConditionConstants, estimated: bool) -> Result<CertificateReport> {
    let q = contraction_constant(c)?;
    let (ball_lhs, ball_ok) = ball_invariance(c)?;
    let q2 = conditions_ii_constant(c)?;
    debug_assert!((q - q2).abs() <= 1e-12 * (1.0 + q.abs()));
    let mut notes = vec![
        "M is measured on the weighted operator t^(1-gamma) S(t); the unweighted norm is unbounded when gamma < 1".to_string(),
        "the G0 constant of the strong-solution conditions is aliased to Q0".to_string(),
        "the Lipschitz condition on g is read against the weighted sup-norm distance of trajectories".to_string(),
        "the kernel Lipschitz condition is applied to K(t, s, u)".to_string(),
        "K_mu(t) = t^(mu-1) P_mu(t) is used for the solution kernel".to_string(),
        "u0_norm and G1_tilde are Euclidean norms of state vectors, consistent with the weighted M".to_string(),
    ];
    notes.push(match c.gamma_factor {
        GammaFactor::Printed => "kernel terms use Gamma(mu)^2".to_string(),
        GammaFactor::Standard => "kernel terms use Gamma(mu) Gamma(mu+1)".to_string(),
    });
    if estimated {
        notes.push("constants are sampling estimates (lower bounds), not proofs".to_string());
    }
    Ok(CertificateReport {
        q,
        ball_lhs,
        ball_ok,
        contraction_ok: q < 1.0,
        conditions_ii_q: q2,
        constants: *c,
        estimated,
        notes,
    })
}

/// Settings for [`estimate_constants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub r: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub gamma_factor: GammaFactor,
}

pub const DEFAULT_SEED: u64 = 0x5eed_f4ac;

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            r: 1.0,
            n: 128,
            samples: 10_000,
            seed: DEFAULT_SEED,
            gamma_factor: GammaFactor::Printed,
        }
    }
}

fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
    // a random direction scaled to a uniform fraction of the radius
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..=1.0));
        let norm = v.norm();
        if norm > 1e-12 && norm <= 1.0 {
            return v * (radius * rng.random_range(0.0..=1.0) / norm);
        }
    }
}

fn quotient(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Sampled lower estimates of the Lipschitz constants, grid maxima of the
/// sup constants, and M from the solution operators.
///
/// States are drawn from the ball ||x|| <= r t^{gamma-1}, which is where a
/// trajectory of weighted norm r lives at time t. Half of the pairs are
/// close (relative separation below 1e-3) so that local slopes are seen.
pub fn estimate_constants(problem: &ProblemSpec, opts: &EstimateOptions) -> Result<ConditionConstants> {
    problem.validate()?;
    if opts.samples < 2 {
        return Err(domain("estimate_constants needs at least 2 samples"));
    }
    if !(opts.r > 0.0) {
        return Err(domain("ball radius must be positive"));
    }
    let grid = problem.grid(opts.n)?;
    let gamma_idx = problem.gamma();
    let dim = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let first = if gamma_idx < 1.0 { 1 } else { 0 };
    let zero = DVector::zeros(dim);
    let radius_at = |t: f64| opts.r * if gamma_idx < 1.0 { t.powf(gamma_idx - 1.0) } else { 1.0 };
    let wt = |t: f64| crate::frac_ops::weight(gamma_idx, t);

    let pair = |rng: &mut ChaCha8Rng, radius: f64| -> (DVector<f64>, DVector<f64>) {
        let x = random_in_ball(rng, dim, radius);
        let y = if rng.random_bool(0.5) {
            &x + random_in_ball(rng, dim, 1e-3 * radius.max(1e-300))
        } else {
            random_in_ball(rng, dim, radius)
        };
        (x, y)
    };

    let (mut l, mut h) = (0.0f64, 0.0f64);
    if let Some(f) = &problem.f {
        for _ in 0..opts.samples {
            let i = rng.random_range(first..=grid.n);
            let t = grid.node(i);
            let (x, y) = pair(&mut rng, radius_at(t));
            l = l.max(quotient((f(t, &x) - f(t, &y)).norm(), (&x - &y).norm()));
        }
        for i in first..=grid.n {
            let t = grid.node(i);
            h = h.max(wt(t) * f(t, &zero).norm());
        }
    }

    let (mut k0, mut k1) = (0.0f64, 0.0f64);
    if let Some(k) = &problem.kernel {
        for _ in 0..opts.samples {
            let i = rng.random_range(first.max(1)..=grid.n);
            let j = rng.random_range(first..=i);
            let (t, s) = (grid.node(i), grid.node(j));
            let (x, y) = pair(&mut rng, radius_at(s));
            k0 = k0.max(quotient((k(t, s, &x) - k(t, s, &y)).norm(), (&x - &y).norm()));
        }
        for i in first..=grid.n {
            for j in first..=i {
                let (t, s) = (grid.node(i), grid.node(j));
                k1 = k1.max(wt(s) * k(t, s, &zero).norm());
            }
        }
    }

    // constant weighted paths c with ||c|| <= r: u(t_k) = t_k^{gamma-1} c
    let (mut q0, mut g1) = (0.0f64, 0.0f64);
    if let Some(g) = &problem.g {
        let unweight = |c: &DVector<f64>| -> Vec<DVector<f64>> {
            problem
                .nonlocal_points
                .iter()
                .map(|&t| c * (1.0 / wt(t)))
                .collect()
        };
        for _ in 0..opts.samples {
            let (x, y) = pair(&mut rng, opts.r);
            let (gx, gy) = (g(&unweight(&x)), g(&unweight(&y)));
            q0 = q0.max(quotient((&gx - &gy).norm(), (&x - &y).norm()));
            g1 = g1.max(gx.norm()).max(gy.norm());
        }
    }

    let m = operator_bound_m(
        &problem.generator,
        problem.mu,
        problem.nu,
        grid,
        &SubordinationControl::default(),
    )?;
    Ok(ConditionConstants {
        m,
        l,
        k0,
        k1,
        h,
        q0,
        g1_tilde: g1,
        r: opts.r,
        a: problem.a,
        mu: problem.mu,
        psi: problem.psi,
        t0: problem.t0,
        u0_norm: problem.u0.norm(),
        gamma_factor: opts.gamma_factor,
    })
}

pub const DEFAULT_GRONWALL_TERMS: usize = 30;

/// Truncated series bound with a ratio-test tail estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallBound {
    pub values: Vec<f64>,
    /// per-node estimate of the omitted terms; infinite where the ratio
    /// test does not indicate convergence
    pub tail: Vec<f64>,
}

impl GronwallBound {
    pub fn max_tail(&self) -> f64 {
        self.tail.iter().copied().fold(0.0, f64::max)
    }
}

fn check_grid_fn(name: &str, x: &[f64], grid: &Grid) -> Result<()> {
    if x.len() != grid.len() {
        return Err(crate::Error::GridMismatch(format!(
            "{name} has {} values for a grid of {} nodes",
            x.len(),
            grid.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(domain(format!("{name} has non-finite values")));
    }
    Ok(())
}

fn nondecreasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] >= w[0])
}

/// v(t) + sum_{k=1}^{terms} (g(t) Gamma(alpha))^k (I^{k alpha; psi} v)(t).
///
/// Each term is the series integrand integrated against v by the product
/// rule of order k alpha.
pub fn gronwall_bound(
    v: &[f64],
    g: &[f64],
    alpha: f64,
    psi: PsiFunction,
    grid: &Grid,
    terms: usize,
) -> Result<GronwallBound> {
    check_grid_fn("v", v, grid)?;
    check_grid_fn("g", g, grid)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("alpha = {alpha} not in (0, 1]")));
    }
    if terms == 0 {
        return Err(domain("at least one series term is required"));
    }
    if v.iter().any(|&x| x < 0.0) || g.iter().any(|&x| x < 0.0) {
        return Err(domain("v and g must be nonnegative"));
    }
    if !nondecreasing(g) {
        return Err(domain("g must be nondecreasing"));
    }
    let vals: Vec<DVector<f64>> = v.iter().map(|&x| DVector::from_element(1, x)).collect();
    let ga = gamma(alpha)?;
    let mut values = v.to_vec();
    let mut last = vec![0.0; grid.len()];
    let mut prev = vec![0.0; grid.len()];
    for k in 1..=terms {
        let rule = FracQuadrature::plain(k as f64 * alpha, psi, *grid)?;
        for i in 0..grid.len() {
            let term = (g[i] * ga).powi(k as i32) * rule.apply(i, &vals)[0];
            values[i] += term;
            prev[i] = last[i];
            last[i] = term;
        }
    }
    let tail = (0..grid.len())
        .map(|i| {
            if last[i] == 0.0 {
                0.0
            } else if terms >= 2 && prev[i] > 0.0 && last[i] < prev[i] {
                let rho = last[i] / prev[i];
                last[i] * rho / (1.0 - rho)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Ok(GronwallBound { values, tail })
}

/// v(t) E_alpha(g(t) Gamma(alpha) (psi(t) - psi(t0))^alpha).
pub fn corollary_bound(v: &[f64], g: &[f64], alpha: f64, psi: PsiFunction, grid: &Grid) -> Result<Vec<f64>> {
    check_grid_fn("v", v, grid)?;
    check_grid_fn("g", g, grid)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("alpha = {alpha} not in (0, 1]")));
    }
    if !nondecreasing(v) {
        return Err(domain("v must be nondecreasing"));
    }
    let ga = gamma(alpha)?;
    let p0 = psi.eval(grid.t0);
    (0..grid.len())
        .map(|i| {
            let z = g[i] * ga * (psi.eval(grid.node(i)) - p0).powf(alpha);
            Ok(v[i] * mittag_leffler(alpha, 1.0, z)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallVerdict {
    pub hypothesis: Verdict,
    pub series_bound: Verdict,
    pub corollary_bound: Verdict,
    /// largest hypothesis excess u - rhs over the grid
    pub hypothesis_gap: f64,
}

/// Relative tolerance for node-wise comparisons.
pub const GRONWALL_TOL: f64 = 1e-6;

/// Checks u <= v + g Gamma(alpha) I^{alpha; psi} u node-wise and, when it
/// holds, both conclusions. A failed hypothesis makes the conclusions not
/// applicable rather than violated.
pub fn verify_gronwall(
    u: &[f64],
    v: &[f64],
    g: &[f64],
    alpha: f64,
    psi: PsiFunction,
    grid: &Grid,
) -> Result<GronwallVerdict> {
    check_grid_fn("u", u, grid)?;
    let series = gronwall_bound(v, g, alpha, psi, grid, DEFAULT_GRONWALL_TERMS)?;
    let vals: Vec<DVector<f64>> = u.iter().map(|&x| DVector::from_element(1, x)).collect();
    let rule = FracQuadrature::plain(alpha, psi, *grid)?;
    let ga = gamma(alpha)?;
    let slack = |x: f64| GRONWALL_TOL * (1.0 + x.abs());
    let mut gap = f64::NEG_INFINITY;
    let mut holds = true;
    for i in 0..grid.len() {
        let rhs = v[i] + g[i] * ga * rule.apply(i, &vals)[0];
        gap = gap.max(u[i] - rhs);
        if u[i] > rhs + slack(rhs) {
            holds = false;
        }
    }
    if !holds {
        return Ok(GronwallVerdict {
            hypothesis: Verdict::Violated,
            series_bound: Verdict::NotApplicable,
            corollary_bound: Verdict::NotApplicable,
            hypothesis_gap: gap,
        });
    }
    let series_ok = (0..grid.len())
        .all(|i| u[i] <= series.values[i] + series.tail[i] + slack(series.values[i]));
    let corollary = if nondecreasing(v) {
        let c = corollary_bound(v, g, alpha, psi, grid)?;
        if (0..grid.len()).all(|i| u[i] <= c[i] + slack(c[i])) {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    } else {
        Verdict::NotApplicable
    };
    Ok(GronwallVerdict {
        hypothesis: Verdict::Holds,
        series_bound: if series_ok { Verdict::Holds } else { Verdict::Violated },
        corollary_bound: corollary,
        hypothesis_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Generator;
    use crate::solver::{KernelFn, NonlocalFn, SourceFn};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn base() -> ConditionConstants {
        ConditionConstants {
            m: 1.0,
            l: 0.0,
            k0: 0.0,
            k1: 0.0,
            h: 0.0,
            q0: 0.0,
            g1_tilde: 0.0,
            r: 1.0,
            a: 0.5,
            mu: 0.5,
            psi: PsiFunction::identity(),
            t0: 0.0,
            u0_norm: 0.0,
            gamma_factor: GammaFactor::Printed,
        }
    }

    fn contractive() -> ConditionConstants {
        ConditionConstants {
            q0: 0.1,
            l: 1.0,
            k0: 1.0,
            k1: 0.1,
            h: 0.1,
            g1_tilde: 0.05,
            u0_norm: 0.1,
            ..base()
        }
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(contraction_constant(&base()).unwrap(), 0.0);
        let q = contraction_constant(&contractive()).unwrap();
        let expected = 0.1 + 0.5 + 0.5 / PI * 0.5f64.sqrt();
        assert!((q - expected).abs() < 1e-14);
        assert!((q - 0.7125).abs() < 1e-4);
        let wider = ConditionConstants { a: 1.0, ..contractive() };
        assert!(contraction_constant(&wider).unwrap() > q);
    }

    #[test]
    fn ball_examples() {
        let (lhs, ok) = ball_invariance(&base()).unwrap();
        assert_eq!(lhs, 0.0);
        assert!(ok);
        let (lhs, ok) = ball_invariance(&contractive()).unwrap();
        let expected = 0.15 + 1.1 * 0.5 + 1.1 / PI * 0.5f64.sqrt() * 0.5;
        assert!((lhs - expected).abs() < 1e-14);
        assert!((lhs - 0.8238).abs() < 1e-4 && ok);
        let small = ConditionConstants { r: 0.5, ..contractive() };
        let (lhs_small, ok_small) = ball_invariance(&small).unwrap();
        assert!(lhs_small < lhs && lhs_small > 0.5 && !ok_small);
    }

    #[test]
    fn conditions_ii_examples() {
        let c = contractive();
        assert_eq!(conditions_ii_constant(&c).unwrap(), contraction_constant(&c).unwrap());
        let m2 = ConditionConstants { m: 2.0, q0: 0.1, l: 0.1, ..base() };
        assert!((conditions_ii_constant(&m2).unwrap() - 0.3).abs() < 1e-15);
        let m0 = ConditionConstants { m: 0.0, ..contractive() };
        assert_eq!(conditions_ii_constant(&m0).unwrap(), 0.0);
    }

    #[test]
    fn standard_factor_raises_q() {
        let std = ConditionConstants { gamma_factor: GammaFactor::Standard, ..contractive() };
        let q = contraction_constant(&std).unwrap();
        // 0.6 + 0.5 sqrt(0.5) / (Gamma(0.5) Gamma(1.5)) = 0.6 + sqrt(0.5) / pi
        assert!((q - (0.6 + 0.5f64.sqrt() / PI)).abs() < 1e-14);
        let std1 = ConditionConstants { mu: 1.0, ..std };
        let printed1 = ConditionConstants { mu: 1.0, ..contractive() };
        assert_eq!(contraction_constant(&std1).unwrap(), contraction_constant(&printed1).unwrap());
    }

    #[test]
    fn report_flags() {
        let r = certify(&contractive(), false).unwrap();
        assert!(r.contraction_ok && r.ball_ok && r.certified());
        assert!(r.notes.iter().any(|n| n.contains("G0")));
        let bad = ConditionConstants { l: 3.0, ..contractive() };
        assert!(!certify(&bad, true).unwrap().contraction_ok);
        assert!(ConditionConstants { r: 0.0, ..base() }.validate().is_err());
        assert!(ConditionConstants { l: -1.0, ..base() }.validate().is_err());
    }

    fn scalar_problem() -> ProblemSpec {
        ProblemSpec::new(0.5, 1.0, 0.0, 1.0, Generator::scalar(1.0), DVector::from_element(1, 0.1)).unwrap()
    }

    #[test]
    fn lipschitz_estimates() {
        let opts = EstimateOptions::default();
        let sin: SourceFn = Arc::new(|_, u: &DVector<f64>| u.map(f64::sin));
        let c = estimate_constants(&scalar_problem().with_source(sin), &opts).unwrap();
        assert!(c.l >= 0.9 && c.l <= 1.0, "{}", c.l);
        assert_eq!(c.h, 0.0);
        assert!((c.m - 1.0).abs() < 1e-12);

        let konst: SourceFn = Arc::new(|_, _: &DVector<f64>| DVector::from_element(1, 2.0));
        let c = estimate_constants(&scalar_problem().with_source(konst), &opts).unwrap();
        assert_eq!(c.l, 0.0);
        assert_eq!(c.h, 2.0);

        let lin: SourceFn = Arc::new(|_, u: &DVector<f64>| u * -1.7);
        let c = estimate_constants(&scalar_problem().with_source(lin), &opts).unwrap();
        assert!((c.l - 1.7).abs() < 1e-6);
    }

    #[test]
    fn kernel_and_nonlocal_estimates() {
        let k: KernelFn = Arc::new(|_, _, u: &DVector<f64>| u * 0.2 + DVector::from_element(1, 0.1));
        let g: NonlocalFn = Arc::new(|x: &[DVector<f64>]| x[0].map(|y| 0.05 * (2.0 * y).sin()));
        let p = scalar_problem()
            .with_kernel(k)
            .with_nonlocal(vec![0.25], g)
            .unwrap();
        let c = estimate_constants(&p, &EstimateOptions::default()).unwrap();
        assert!((c.k0 - 0.2).abs() < 1e-6);
        assert!((c.k1 - 0.1).abs() < 1e-15);
        assert!(c.q0 > 0.09 && c.q0 <= 0.1);
        assert!(c.g1_tilde > 0.045 && c.g1_tilde <= 0.05);
    }

    #[test]
    fn estimates_are_reproducible() {
        let sin: SourceFn = Arc::new(|_, u: &DVector<f64>| u.map(f64::sin));
        let p = scalar_problem().with_source(sin);
        let opts = EstimateOptions { samples: 500, ..Default::default() };
        assert_eq!(estimate_constants(&p, &opts).unwrap(), estimate_constants(&p, &opts).unwrap());
        let other = EstimateOptions { seed: 7, ..opts };
        assert_ne!(estimate_constants(&p, &opts).unwrap().l, estimate_constants(&p, &other).unwrap().l);
    }

    fn unit_grid(n: usize) -> Grid {
        Grid::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn classical_gronwall_is_exponential() {
        let grid = unit_grid(32);
        let ones = vec![1.0; 33];
        let b = gronwall_bound(&ones, &ones, 1.0, PsiFunction::identity(), &grid, 30).unwrap();
        for i in 0..=32 {
            assert!((b.values[i] - grid.node(i).exp()).abs() < 1e-8);
        }
        assert!(b.max_tail() < 1e-20);
        let zero = vec![0.0; 33];
        let b = gronwall_bound(&zero, &ones, 0.5, PsiFunction::identity(), &grid, 30).unwrap();
        assert!(b.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fractional_gronwall_matches_corollary() {
        let grid = unit_grid(32);
        let ones = vec![1.0; 33];
        let psi = PsiFunction::identity();
        let b = gronwall_bound(&ones, &ones, 0.5, psi, &grid, 30).unwrap();
        let c = corollary_bound(&ones, &ones, 0.5, psi, &grid).unwrap();
        for i in 0..=32 {
            assert!(c[i] + 1e-8 + b.tail[i] >= b.values[i]);
            assert!((c[i] - b.values[i]).abs() <= 1e-8 * c[i] + 2.0 * b.tail[i]);
        }
        let fewer = gronwall_bound(&ones, &ones, 0.5, psi, &grid, 10).unwrap();
        assert!(fewer.values.iter().zip(&b.values).all(|(x, y)| x <= y));
    }

    #[test]
    fn corollary_examples() {
        let grid = unit_grid(16);
        let ones = vec![1.0; 17];
        let c = corollary_bound(&ones, &ones, 1.0, PsiFunction::identity(), &grid).unwrap();
        assert!((c[16] - std::f64::consts::E).abs() < 1e-13);
        let zero = vec![0.0; 17];
        let v: Vec<f64> = (0..17).map(|i| 1.0 + i as f64).collect();
        assert_eq!(corollary_bound(&v, &zero, 0.5, PsiFunction::identity(), &grid).unwrap(), v);
        let dec: Vec<f64> = (0..17).map(|i| -(i as f64)).collect();
        assert!(corollary_bound(&dec, &ones, 0.5, PsiFunction::identity(), &grid).is_err());
    }

    #[test]
    fn verify_examples() {
        let grid = unit_grid(64);
        let psi = PsiFunction::identity();
        let ones = vec![1.0; 65];
        let exp: Vec<f64> = grid.nodes().iter().map(|t| t.exp()).collect();
        let v = verify_gronwall(&exp, &ones, &ones, 1.0, psi, &grid).unwrap();
        assert_eq!(
            (v.hypothesis, v.series_bound, v.corollary_bound),
            (Verdict::Holds, Verdict::Holds, Verdict::Holds)
        );
        let zero = vec![0.0; 65];
        let v = verify_gronwall(&zero, &ones, &ones, 0.5, psi, &grid).unwrap();
        assert_eq!(v.series_bound, Verdict::Holds);
        assert_eq!(v.corollary_bound, Verdict::Holds);
        let env = corollary_bound(&ones, &ones, 0.5, psi, &grid).unwrap();
        let twice: Vec<f64> = env.iter().map(|x| 2.0 * x).collect();
        let v = verify_gronwall(&twice, &ones, &ones, 0.5, psi, &grid).unwrap();
        assert_eq!(v.hypothesis, Verdict::Violated);
        assert_eq!(v.series_bound, Verdict::NotApplicable);
        assert_eq!(v.corollary_bound, Verdict::NotApplicable);
    }
}
