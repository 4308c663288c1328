//! Path recovery: find coefficients whose signature equals a target.
//!
//! The forward map `a -> sig(a)` is polynomial of degree at most `k` in the
//! `d * m` coefficients. Instead of studying the ideal of that system
//! symbolically we minimize the flattened residual `sig(a) - S` with a damped
//! Gauss-Newton (Levenberg-Marquardt) iteration from several seeded starts and
//! certify a solution by its residual norm.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{TensorAlgebraSpace, TensorSequence};
use crate::error::{Error, Result};
use crate::matrix::CoefMatrix;
use crate::signatures::{congruence, core_axis, core_monomial};

const LAMBDA_INITIAL: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e8;
const LAMBDA_FACTOR: f64 = 3.0;
const MIN_STEP_NORM: f64 = 1e-12;

/// Which canonical path the coefficients are applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreKind {
    /// Piecewise-linear paths with `m` segments.
    Axis,
    /// Polynomial paths of degree `m` without constant term.
    Monomial,
}

impl fmt::Display for CoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoreKind::Axis => "axis",
            CoreKind::Monomial => "monomial",
        })
    }
}

impl FromStr for CoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "axis" | "pwln" => Ok(CoreKind::Axis),
            "monomial" | "poly" => Ok(CoreKind::Monomial),
            other => Err(Error::InvalidArgument(format!(
                "unknown core `{other}` (expected axis|monomial)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryOptions {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub restarts: usize,
    pub rng_seed: u64,
    pub initial_guess: Option<CoefMatrix<f64>>,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            residual_tolerance: 1e-10,
            restarts: 20,
            rng_seed: 0,
            initial_guess: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub coef: CoefMatrix<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// 0 for the caller's initial guess, `1..=restarts` for random starts.
    pub restart_index: usize,
    pub seed: u64,
}

impl RecoveryResult {
    pub fn to_json(&self) -> serde_json::Value {
        // Non-finite norms only arise from failed solves; they are written as null.
        json!({
            "coef": self.coef.to_rows(),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "restart_index": self.restart_index,
            "seed": self.seed,
        })
    }
}

/// A target signature plus the family in which to search for a preimage.
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    target: TensorSequence<f64>,
    segments: usize,
    core_kind: CoreKind,
    core: TensorSequence<f64>,
    pub options: RecoveryOptions,
}

impl RecoveryProblem {
    pub fn new(
        target: TensorSequence<f64>,
        segments: usize,
        core_kind: CoreKind,
        options: RecoveryOptions,
    ) -> Result<Self> {
        let c0 = *target.constant_term();
        if (c0 - 1.0).abs() > 1e-12 {
            return Err(Error::NotGroupElement(c0.to_string()));
        }
        if segments == 0 {
            return Err(Error::InvalidArgument("segment count must be positive".into()));
        }
        if options.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(options.residual_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "residual tolerance must be positive".into(),
            ));
        }
        if target.flatten().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target signature".into()));
        }
        let core_space = target.space().with_dimension(segments)?;
        let core = match core_kind {
            CoreKind::Axis => core_axis(core_space)?,
            CoreKind::Monomial => core_monomial(core_space)?,
        };
        Ok(Self {
            target,
            segments,
            core_kind,
            core,
            options,
        })
    }

    pub fn space(&self) -> TensorAlgebraSpace {
        self.target.space()
    }

    pub fn target(&self) -> &TensorSequence<f64> {
        &self.target
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn core_kind(&self) -> CoreKind {
        self.core_kind
    }

    /// Number of unknowns, `d * m`.
    pub fn unknowns(&self) -> usize {
        self.space().dimension * self.segments
    }

    fn check_shape(&self, a: &CoefMatrix<f64>) -> Result<()> {
        if a.rows() != self.space().dimension || a.cols() != self.segments {
            return Err(Error::Shape(format!(
                "expected a {}x{} coefficient matrix, got {}x{}",
                self.space().dimension,
                self.segments,
                a.rows(),
                a.cols()
            )));
        }
        Ok(())
    }

    /// Signature of the candidate coefficients under the problem's core.
    pub fn forward(&self, a: &CoefMatrix<f64>) -> Result<TensorSequence<f64>> {
        self.check_shape(a)?;
        congruence(a, &self.core, self.space())
    }

    /// `flatten(sig(a) - S)`, of length `(d^(k+1) - 1) / (d - 1)`.
    pub fn residual(&self, a: &CoefMatrix<f64>) -> Result<Vec<f64>> {
        if a.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficient matrix".into()));
        }
        Ok(self.forward(a)?.sub(&self.target)?.flatten())
    }

    /// Central-difference Jacobian of [`residual`](Self::residual). Column
    /// `i * m + j` is the derivative with respect to `a[i][j]`.
    pub fn jacobian(&self, a: &CoefMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_shape(a)?;
        let rows = self.space().total_len();
        let mut jac = DMatrix::zeros(rows, self.unknowns());
        let mut probe = a.clone();
        for col in 0..self.unknowns() {
            let x = a.as_slice()[col];
            let h = (1e-7 * (1.0 + x.abs())).max(1e-6);
            probe.as_mut_slice()[col] = x + h;
            let plus = self.residual(&probe)?;
            probe.as_mut_slice()[col] = x - h;
            let minus = self.residual(&probe)?;
            probe.as_mut_slice()[col] = x;
            for (row, (p, m)) in plus.iter().zip(&minus).enumerate() {
                let v = (p - m) / (2.0 * h);
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("jacobian entry ({row}, {col})")));
                }
                jac[(row, col)] = v;
            }
        }
        Ok(jac)
    }

    /// Levenberg-Marquardt from `a0`.
    pub fn solve(&self, a0: &CoefMatrix<f64>) -> Result<RecoveryResult> {
        self.solve_from(a0, 0)
    }

    fn solve_from(&self, a0: &CoefMatrix<f64>, restart_index: usize) -> Result<RecoveryResult> {
        let tol = self.options.residual_tolerance;
        let mut a = a0.clone();
        let mut r = DVector::from_vec(self.residual(&a)?);
        let mut norm = r.norm();
        let mut lambda = LAMBDA_INITIAL;
        let mut iterations = 0;
        let n = self.unknowns();

        let finish = |a: CoefMatrix<f64>, norm: f64, iterations: usize| RecoveryResult {
            coef: a,
            residual_norm: norm,
            iterations,
            converged: norm <= tol,
            restart_index,
            seed: self.options.rng_seed,
        };

        while norm > tol && iterations < self.options.max_iterations {
            iterations += 1;
            let jac = self.jacobian(&a)?;
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &r;
            let step = loop {
                let damped = &jtj + DMatrix::<f64>::identity(n, n) * lambda;
                let candidate = damped.cholesky().map(|c| -c.solve(&grad));
                if let Some(delta) = candidate {
                    let mut trial = a.clone();
                    for (x, dx) in trial.as_mut_slice().iter_mut().zip(delta.iter()) {
                        *x += dx;
                    }
                    if let Ok(res) = self.residual(&trial) {
                        let res = DVector::from_vec(res);
                        let trial_norm = res.norm();
                        if trial_norm.is_finite() && trial_norm < norm {
                            lambda /= LAMBDA_FACTOR;
                            break Some((trial, res, trial_norm, delta.norm()));
                        }
                    }
                }
                lambda *= LAMBDA_FACTOR;
                if lambda > LAMBDA_MAX {
                    break None;
                }
            };
            let Some((trial, res, trial_norm, step_norm)) = step else {
                break;
            };
            a = trial;
            r = res;
            norm = trial_norm;
            if step_norm <= MIN_STEP_NORM {
                break;
            }
        }
        Ok(finish(a, norm, iterations))
    }

    /// Seeded random starting matrices, entries uniform in `[-scale, scale]`
    /// where `scale` is the sup-norm of the target's level 1 (1 if that is zero).
    pub fn initial_guesses(&self) -> Vec<CoefMatrix<f64>> {
        let scale = self
            .target
            .level(1)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let d = self.space().dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(self.options.rng_seed);
        (0..self.options.restarts)
            .map(|_| {
                let data = (0..d * self.segments)
                    .map(|_| rng.random_range(-1.0..=1.0) * scale)
                    .collect();
                CoefMatrix::new(d, self.segments, data).expect("shape is consistent")
            })
            .collect()
    }

    /// Multi-start recovery. The caller's initial guess (if any) is tried
    /// first and returned if it converges; otherwise every random start runs
    /// and the lowest residual wins, ties going to the lowest restart index.
    pub fn recover(&self) -> Result<RecoveryResult> {
        let mut results: Vec<RecoveryResult> = Vec::new();
        let mut first_error = None;
        if let Some(guess) = &self.options.initial_guess {
            match self.solve_from(guess, 0) {
                Ok(res) if res.converged => return Ok(res),
                Ok(res) => results.push(res),
                Err(e) => first_error = Some(e),
            }
        }
        // Restarts are independent; collecting in index order keeps the
        // outcome identical to a sequential run.
        let outcomes: Vec<Result<RecoveryResult>> = self
            .initial_guesses()
            .par_iter()
            .enumerate()
            .map(|(i, a0)| self.solve_from(a0, i + 1))
            .collect();
        for outcome in outcomes {
            match outcome {
                Ok(res) => results.push(res),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        let best = results.into_iter().reduce(|best, next| {
            let better = next.residual_norm < best.residual_norm
                || (next.residual_norm == best.residual_norm
                    && next.restart_index < best.restart_index)
                || best.residual_norm.is_nan();
            if better {
                next
            } else {
                best
            }
        });
        match (best, first_error) {
            (Some(best), _) => Ok(best),
            (None, Some(e)) => Err(e),
            (None, None) => Err(Error::InvalidArgument("no restarts were run".into())),
        }
    }
}

/// Recover coefficients of an `m`-segment (or degree-`m`) path with signature `target`.
pub fn recover(
    target: &TensorSequence<f64>,
    segments: usize,
    core: CoreKind,
    options: RecoveryOptions,
) -> Result<RecoveryResult> {
    RecoveryProblem::new(target.clone(), segments, core, options)?.recover()
}
