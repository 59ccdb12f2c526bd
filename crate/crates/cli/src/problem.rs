//! JSON problem files and their translation into solver inputs.

use std::sync::Arc;

use hilfer_core::certificates::{ConditionConstants, EstimateOptions, GammaFactor};
use hilfer_core::frac_ops::{PsiFunction, PsiKind};
use hilfer_core::operators::Generator;
use hilfer_core::solver::{KernelFn, NonlocalFn, ProblemSpec, SourceFn, DEFAULT_MAX_ITER, DEFAULT_TOL};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::expr::{parse_in, Env, Expression, Scope};
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orders {
    pub mu: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    #[serde(default)]
    pub t0: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// One expression for a scalar problem, or one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Components {
    One(String),
    Many(Vec<String>),
}

impl Components {
    fn sources(&self) -> Vec<&str> {
        match self {
            Components::One(s) => vec![s.as_str()],
            Components::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlocal {
    pub points: Vec<f64>,
    pub g_expr: Components,
}

/// Certificate constants supplied by the user. Interval, order, psi and
/// the norm of u0 are taken from the problem itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsInput {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Q0")]
    pub q0: f64,
    #[serde(rename = "G1_tilde")]
    pub g1_tilde: f64,
    pub r: f64,
    #[serde(default)]
    pub gamma_factor: GammaFactor,
}

/// Settings for sampling the certificate constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    #[serde(default = "default_radius")]
    pub r: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_radius() -> f64 {
    EstimateOptions::default().r
}

fn default_samples() -> usize {
    EstimateOptions::default().samples
}

impl Default for EstimateSpec {
    fn default() -> Self {
        Self {
            r: default_radius(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    pub orders: Orders,
    pub interval: Interval,
    pub generator: Vec<Vec<f64>>,
    pub u0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_expr: Option<Components>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_expr: Option<Components>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlocal: Option<Nonlocal>,
    #[serde(default = "identity_psi")]
    pub psi: PsiKind,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsInput>,
    #[serde(default)]
    pub estimate: EstimateSpec,
}

fn identity_psi() -> PsiKind {
    PsiKind::Identity
}

/// A validated problem file.
pub struct Problem {
    pub spec: ProblemSpec,
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub constants: Option<ConstantsInput>,
    pub estimate: EstimateSpec,
}

impl Problem {
    /// The supplied constants completed from the problem data.
    pub fn condition_constants(&self) -> Option<ConditionConstants> {
        self.constants.as_ref().map(|c| ConditionConstants {
            m: c.m,
            l: c.l,
            k0: c.k0,
            k1: c.k1,
            h: c.h,
            q0: c.q0,
            g1_tilde: c.g1_tilde,
            r: c.r,
            a: self.spec.a,
            mu: self.spec.mu,
            psi: self.spec.psi,
            t0: self.spec.t0,
            u0_norm: self.spec.u0.norm(),
            gamma_factor: c.gamma_factor,
        })
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(what: &str, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!("{what}: line {} column {}: {e}", e.line(), e.column()))
    })
}

fn compile(field: &str, c: &Components, dim: usize, scope: &Scope) -> Result<Vec<Expression>, CliError> {
    let sources = c.sources();
    if sources.len() != dim {
        return Err(CliError::Input(format!(
            "{field}: {} expression(s) for a state of dimension {dim}",
            sources.len()
        )));
    }
    sources
        .iter()
        .enumerate()
        .map(|(k, src)| {
            parse_in(src, scope).map_err(|e| {
                let at = if dim == 1 { field.to_string() } else { format!("{field}[{k}]") };
                CliError::Input(format!("{at}: {e}"))
            })
        })
        .collect()
}

/// Evaluates component expressions; an evaluation error yields NaN, which
/// the solver reports as a non-finite value.
fn eval_all(exprs: &[Expression], env: &Env<'_>) -> DVector<f64> {
    DVector::from_iterator(exprs.len(), exprs.iter().map(|e| e.eval(env).unwrap_or(f64::NAN)))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile = parse_json("problem file", text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "schema_version {:?} is not supported (expected {SCHEMA_VERSION:?})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn build(&self) -> Result<Problem, CliError> {
        let dim = self.u0.len();
        let invalid = |e: hilfer_core::Error| CliError::Input(e.to_string());
        let generator = Generator::from_rows(&self.generator).map_err(invalid)?;
        if generator.dim() != dim {
            return Err(CliError::Input(format!(
                "generator is {0}x{0} but u0 has dimension {dim}",
                generator.dim()
            )));
        }
        let psi = match self.psi {
            PsiKind::Identity => PsiFunction::identity(),
            PsiKind::Power(p) => PsiFunction::power(p).map_err(invalid)?,
            PsiKind::Exponential(c) => PsiFunction::exponential(c).map_err(invalid)?,
        };
        let mut spec = ProblemSpec::new(
            self.orders.mu,
            self.orders.nu,
            self.interval.t0,
            self.interval.a,
            generator,
            DVector::from_vec(self.u0.clone()),
        )
        .map_err(invalid)?
        .with_psi(psi)
        .map_err(invalid)?;
        if let Some(c) = &self.f_expr {
            let exprs = compile("f_expr", c, dim, &Scope::source(dim))?;
            let f: SourceFn = Arc::new(move |t, u| {
                let env = Env {
                    t,
                    u: u.as_slice(),
                    ..Env::default()
                };
                eval_all(&exprs, &env)
            });
            spec = spec.with_source(f);
        }
        if let Some(c) = &self.kernel_expr {
            let exprs = compile("kernel_expr", c, dim, &Scope::kernel(dim))?;
            let k: KernelFn = Arc::new(move |t, s, u| {
                let env = Env {
                    t,
                    s,
                    u: u.as_slice(),
                    ..Env::default()
                };
                eval_all(&exprs, &env)
            });
            spec = spec.with_kernel(k);
        }
        if let Some(nl) = &self.nonlocal {
            let exprs = compile("nonlocal.g_expr", &nl.g_expr, dim, &Scope::nonlocal(dim, nl.points.len()))?;
            let g: NonlocalFn = Arc::new(move |vals| {
                let at: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
                let env = Env {
                    at: &at,
                    ..Env::default()
                };
                eval_all(&exprs, &env)
            });
            spec = spec.with_nonlocal(nl.points.clone(), g).map_err(invalid)?;
        }
        if self.grid.n < hilfer_core::Grid::MIN_INTERVALS {
            return Err(CliError::Input(format!(
                "grid.n = {} must be at least {}",
                self.grid.n,
                hilfer_core::Grid::MIN_INTERVALS
            )));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(CliError::Input("solver needs tol > 0 and max_iter >= 1".into()));
        }
        Ok(Problem {
            spec,
            n: self.grid.n,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            constants: self.constants.clone(),
            estimate: self.estimate.clone(),
        })
    }
}

/// Input of the `gronwall` subcommand: u, v and g as functions of t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallFile {
    pub schema_version: String,
    pub alpha: f64,
    pub interval: Interval,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "identity_psi")]
    pub psi: PsiKind,
    pub u_expr: String,
    pub v_expr: String,
    pub g_expr: String,
}

pub struct GronwallInstance {
    pub alpha: f64,
    pub psi: PsiFunction,
    pub grid: hilfer_core::Grid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub g: Vec<f64>,
}

impl GronwallFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: GronwallFile = parse_json("gronwall file", text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "schema_version {:?} is not supported (expected {SCHEMA_VERSION:?})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn build(&self) -> Result<GronwallInstance, CliError> {
        let input = |e: hilfer_core::Error| CliError::Input(e.to_string());
        let psi = match self.psi {
            PsiKind::Identity => PsiFunction::identity(),
            PsiKind::Power(p) => PsiFunction::power(p).map_err(input)?,
            PsiKind::Exponential(c) => PsiFunction::exponential(c).map_err(input)?,
        };
        let grid = hilfer_core::Grid::new(self.interval.t0, self.interval.a, self.grid.n).map_err(input)?;
        let sample = |field: &str, src: &str| -> Result<Vec<f64>, CliError> {
            let e = parse_in(src, &Scope::time()).map_err(|e| CliError::Input(format!("{field}: {e}")))?;
            grid.nodes()
                .into_iter()
                .map(|t| {
                    e.eval(&Env { t, ..Env::default() })
                        .map_err(|err| CliError::Input(format!("{field} at t = {t}: {err}")))
                })
                .collect()
        };
        Ok(GronwallInstance {
            alpha: self.alpha,
            psi,
            grid,
            u: sample("u_expr", &self.u_expr)?,
            v: sample("v_expr", &self.v_expr)?,
            g: sample("g_expr", &self.g_expr)?,
        })
    }
}
