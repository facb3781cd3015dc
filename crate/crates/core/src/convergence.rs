//! Finite-horizon limit detection.
//!
//! `lim_n v_n exists` cannot be decided from finitely many terms, so the
//! detector answers with one of three verdicts and keeps the full trace.

use thiserror::Error;

use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Diverged,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceVerdict<S = f64> {
    pub status: Status,
    /// Mean of the final window; present iff `status == Converged`.
    pub limit: Option<S>,
    /// Largest pairwise spread over the final window.
    pub residual: f64,
    pub trace: Vec<(usize, S)>,
    pub diagnostics: Vec<String>,
}

impl<S: Scalar> ConvergenceVerdict<S> {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Converged to a limit of modulus below `zero_tol`.
    pub fn converged_to_zero(&self, zero_tol: f64) -> bool {
        matches!(self.limit, Some(l) if self.is_converged() && l.modulus() < zero_tol)
    }

    pub fn limit_or_nan(&self) -> S {
        self.limit.unwrap_or_else(|| S::from_real(f64::NAN))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectParams {
    pub tol: f64,
    pub window: usize,
    pub horizon: usize,
    pub divergence_bound: f64,
    /// Defaults to `1e3 * tol` when `None`.
    pub oscillation_floor: Option<f64>,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            tol: 1e-8,
            window: 16,
            horizon: 10_000,
            divergence_bound: 1e12,
            oscillation_floor: None,
        }
    }
}

impl DetectParams {
    pub fn new(tol: f64, window: usize, horizon: usize) -> Self {
        DetectParams {
            tol,
            window,
            horizon,
            ..Default::default()
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn oscillation_floor(&self) -> f64 {
        self.oscillation_floor.unwrap_or(1e3 * self.tol)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("empty value stream")]
    Empty,
    #[error("need horizon >= window >= 2 (got window = {window}, horizon = {horizon})")]
    BadWindow { window: usize, horizon: usize },
    #[error("tolerance must be positive and finite (got {0})")]
    BadTolerance(f64),
}

/// Evaluates `values(n)` for `n = 1..=horizon` and classifies the tail.
pub fn detect_limit<S, F>(values: F, params: &DetectParams) -> Result<ConvergenceVerdict<S>, DetectError>
where
    S: Scalar,
    F: Fn(usize) -> S,
{
    if params.horizon == 0 {
        return Err(DetectError::Empty);
    }
    let trace: Vec<(usize, S)> = (1..=params.horizon).map(|n| (n, values(n))).collect();
    classify(trace, params)
}

/// Classifies an already evaluated trace (strictly increasing `n`).
pub fn classify<S: Scalar>(
    trace: Vec<(usize, S)>,
    params: &DetectParams,
) -> Result<ConvergenceVerdict<S>, DetectError> {
    if trace.is_empty() {
        return Err(DetectError::Empty);
    }
    if params.window < 2 || trace.len() < params.window {
        return Err(DetectError::BadWindow {
            window: params.window,
            horizon: trace.len(),
        });
    }
    if !(params.tol > 0.0 && params.tol.is_finite()) {
        return Err(DetectError::BadTolerance(params.tol));
    }
    debug_assert!(trace.windows(2).all(|w| w[0].0 < w[1].0));

    let tail: Vec<S> = trace[trace.len() - params.window..].iter().map(|&(_, v)| v).collect();
    let residual = spread(&tail);
    let mut diagnostics = Vec::new();

    // NaN anywhere is a failed evaluation; large values only count in the
    // final window.
    let final_start = trace.len() - params.window;
    if let Some(&(n, v)) = trace.iter().enumerate().find_map(|(k, e)| {
        let v = e.1;
        let blown = v.modulus().is_nan() || (k >= final_start && v.modulus() > params.divergence_bound);
        blown.then_some(e)
    }) {
        diagnostics.push(format!(
            "|value| at n = {n} is {} (bound {})",
            v.modulus(),
            params.divergence_bound
        ));
        return Ok(ConvergenceVerdict {
            status: Status::Diverged,
            limit: None,
            residual,
            trace,
            diagnostics,
        });
    }

    if residual < params.tol {
        let limit = compensated_sum(tail.iter().copied()) / tail.len() as f64;
        return Ok(ConvergenceVerdict {
            status: Status::Converged,
            limit: Some(limit),
            residual,
            trace,
            diagnostics,
        });
    }

    let half = params.window / 2;
    let early = spread(&tail[..half]);
    let late = spread(&tail[params.window - half..]);
    let status = if residual > params.oscillation_floor() && late >= early {
        diagnostics.push(format!(
            "spread {residual:.3e} above floor {:.3e}, half-window spreads {early:.3e} -> {late:.3e}",
            params.oscillation_floor()
        ));
        Status::Diverged
    } else {
        diagnostics.push(format!(
            "spread {residual:.3e} not below tol {:.3e}; half-window spreads {early:.3e} -> {late:.3e}",
            params.tol
        ));
        Status::Inconclusive
    };
    Ok(ConvergenceVerdict {
        status,
        limit: None,
        residual,
        trace,
        diagnostics,
    })
}

/// Largest pairwise distance among `values`.
fn spread<S: Scalar>(values: &[S]) -> f64 {
    let mut worst = 0.0f64;
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            worst = worst.max((a - b).modulus());
        }
    }
    worst
}
