//! Infinite matrices with row-tail oracles, the transform `Ax`, a catalog of
//! summability methods and domain membership tests for `Y_A`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::convergence::{classify, detect_limit, ConvergenceVerdict, DetectParams, Status};
use crate::scalar::{Compensated, Scalar};
use crate::schedule::{DefermentSchedule, ScheduleError};
use crate::seq::{Seq, Tail, WindowSums};
use crate::spaces::{norm, SpaceId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("unknown matrix '{0}'")]
    UnknownId(String),
    #[error("bad parameters for {id}: {msg}")]
    BadParams { id: String, msg: String },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("no tail oracle for row {i} beyond column {k}")]
    NoTailOracle { i: usize, k: usize },
    #[error("row {i} has an unbounded truncation error")]
    Unbounded { i: usize },
}

/// How rows behave for large `i`, relative to the columns `1..=max_col`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarShape {
    /// Entries `a_ij` and tails `tail(i, k)` for `j, k <= max_col` do not
    /// depend on `i`.
    Frozen,
    /// `a_ij = rho(i) c_j` and `tail(i, k) = 1 - rho(i) b_k` for
    /// `j, k <= max_col`, with `rho > 0` nonincreasing and `rho -> 0`. Any
    /// linear functional of those entries and tails is then monotone in `i`.
    Scaled { rho_summable: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarRows {
    pub start: usize,
    pub shape: FarShape,
}

/// Truncation error of a row evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorBound {
    Exact,
    Bounded(f64),
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowValue<S> {
    pub value: S,
    pub bound: ErrorBound,
}

pub trait InfiniteMatrix: Send + Sync {
    fn descriptor(&self) -> String;

    fn entry(&self, i: usize, j: usize) -> f64;

    /// `sum_{j > k} a_ij`.
    fn row_tail(&self, i: usize, k: usize) -> Result<f64, MatrixError>;

    /// Inclusive column range holding every nonzero entry of row `i`, or
    /// `None` for rows with infinite support. `lo > hi` is an empty row.
    fn row_support(&self, i: usize) -> Result<Option<(usize, usize)>, MatrixError>;

    /// `sum_{k=p+1}^{q} tail(i, k)`.
    fn tail_window_sum(&self, i: usize, p: usize, q: usize) -> Result<f64, MatrixError> {
        let mut acc = Compensated::zero();
        for k in p + 1..=q {
            acc.add(self.row_tail(i, k)?);
        }
        Ok(acc.value())
    }

    /// Bound on `sum_{j > k} |a_ij|`.
    fn abs_tail_bound(&self, _i: usize, _k: usize) -> Option<f64> {
        None
    }

    /// Large-row structure for the columns `1..=max_col`.
    fn far_rows(&self, _max_col: usize) -> Option<FarRows> {
        None
    }

    /// `Some((p, q))` when row `i` is the plain window average of columns
    /// `p+1..=q`; such rows are evaluated from cached window sums.
    fn window_row(&self, _i: usize) -> Option<(usize, usize)> {
        None
    }
}

/// Built-in methods. Every entry has finite rows and a closed-form tail.
#[derive(Clone)]
pub enum CatalogMatrix {
    Identity,
    /// `a_ij = 1/i` for `j <= i`.
    CesaroC1,
    /// `a_ii = 1`, `a_{i,i+1} = -1`.
    Difference,
    /// `a_ii = alpha`, `a_{i,i-1} = 1 - alpha`.
    Zweier(f64),
    /// Row `n` is `1/(q(n)-p(n))` on columns `p(n)+1..=q(n)`.
    DeferredMean(DefermentSchedule),
    /// `a_ij = j^s / W_i` for `j <= i`, `W_i = sum_{j<=i} j^s`, `s >= 0`.
    WeightedMean { s: f64, weights: Arc<WindowSums<f64>> },
    /// `a_{i,i+1} = 1`.
    ShiftLeft,
    /// Explicit finite table; rows past the table are zero.
    UserTable(Arc<Vec<Vec<f64>>>),
    Zero,
}

impl fmt::Debug for CatalogMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl CatalogMatrix {
    pub fn weighted_mean(s: f64) -> Result<Self, MatrixError> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(MatrixError::BadParams {
                id: "weighted-mean".into(),
                msg: format!("exponent must be finite and >= 0 (got {s})"),
            });
        }
        let w = Seq::from_fn(move |j| (j as f64).powf(s));
        Ok(CatalogMatrix::WeightedMean {
            s,
            weights: Arc::new(WindowSums::new(w)),
        })
    }

    pub fn zweier(alpha: f64) -> Result<Self, MatrixError> {
        if !alpha.is_finite() {
            return Err(MatrixError::BadParams {
                id: "zweier".into(),
                msg: format!("alpha must be finite (got {alpha})"),
            });
        }
        Ok(CatalogMatrix::Zweier(alpha))
    }

    pub fn user_table(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MatrixError::BadParams {
                id: "user-table".into(),
                msg: "entries must be finite".into(),
            });
        }
        Ok(CatalogMatrix::UserTable(Arc::new(rows)))
    }

    /// Parses `identity`, `cesaro`, `difference`, `zweier(a)`,
    /// `deferred-mean(<schedule>)`, `weighted-mean(s)`, `shift-left`,
    /// `user-table(a11,a12;a21,...)` and `zero`.
    pub fn parse(spec: &str) -> Result<Self, MatrixError> {
        use crate::parse::{no_args, one, split_call};
        let bad = |id: &str, msg: String| MatrixError::BadParams { id: id.into(), msg };
        let (name, args) = split_call(spec).map_err(|m| bad(spec, m))?;
        let args = args.as_deref();
        let plain = |m: CatalogMatrix| no_args(&name, args).map(|_| m).map_err(|m| bad(&name, m));
        match name.as_str() {
            "identity" => plain(CatalogMatrix::Identity),
            "cesaro" | "cesaro-c1" | "c1" => plain(CatalogMatrix::CesaroC1),
            "difference" | "delta" => plain(CatalogMatrix::Difference),
            "shift-left" => plain(CatalogMatrix::ShiftLeft),
            "zero" => plain(CatalogMatrix::Zero),
            "zweier" => Self::zweier(one(&name, args).map_err(|m| bad(&name, m))?),
            "weighted-mean" => Self::weighted_mean(one(&name, args).map_err(|m| bad(&name, m))?),
            "deferred-mean" => {
                let inner = args.ok_or_else(|| bad(&name, "needs a schedule".into()))?;
                Ok(CatalogMatrix::DeferredMean(DefermentSchedule::parse(inner)?))
            }
            "user-table" => {
                let body = args.ok_or_else(|| bad(&name, "needs rows".into()))?;
                let rows = body
                    .split(';')
                    .map(|r| crate::parse::list::<f64>(r, ','))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|m| bad(&name, m))?;
                Self::user_table(rows)
            }
            _ => Err(MatrixError::UnknownId(spec.trim().to_string())),
        }
    }

    /// One representative of every catalog family.
    pub fn all() -> Vec<CatalogMatrix> {
        vec![
            CatalogMatrix::Identity,
            CatalogMatrix::CesaroC1,
            CatalogMatrix::Difference,
            CatalogMatrix::Zweier(0.5),
            CatalogMatrix::DeferredMean(DefermentSchedule::block()),
            CatalogMatrix::DeferredMean(DefermentSchedule::cesaro()),
            CatalogMatrix::weighted_mean(1.0).expect("valid exponent"),
            CatalogMatrix::ShiftLeft,
            CatalogMatrix::UserTable(Arc::new(vec![vec![1.0, -2.0, 0.5], vec![0.0, 3.0], vec![0.25, 0.25, 0.25, 0.25]])),
            CatalogMatrix::Zero,
        ]
    }

    /// Whether every column `a^j` lies in `y`.
    pub fn columns_in(&self, y: &SpaceId) -> bool {
        let finite_columns = match self {
            CatalogMatrix::CesaroC1 => false,
            CatalogMatrix::WeightedMean { s, .. } => {
                return !matches!(y, SpaceId::L1) || *s > 0.0;
            }
            CatalogMatrix::DeferredMean(d) => d.p_unbounded(),
            _ => true,
        };
        finite_columns || !matches!(y, SpaceId::L1)
    }

    fn weight_sum(&self, i: usize) -> f64 {
        match self {
            CatalogMatrix::WeightedMean { weights, .. } => weights.sum(1, i),
            _ => unreachable!("weight_sum on a non-weighted matrix"),
        }
    }
}

/// Number of integers in `(p, min(q, m)]`.
fn count_upto(p: usize, q: usize, m: usize) -> usize {
    q.min(m).saturating_sub(p)
}

/// `sum_{k=a}^{b} (c - k)` for `a <= b <= c`, exact in integers.
fn descending_sum(a: usize, b: usize, c: usize) -> u128 {
    if a > b {
        return 0;
    }
    let n = (b - a + 1) as u128;
    n * (2 * c as u128 - a as u128 - b as u128) / 2
}

impl InfiniteMatrix for CatalogMatrix {
    fn descriptor(&self) -> String {
        match self {
            CatalogMatrix::Identity => "identity".into(),
            CatalogMatrix::CesaroC1 => "cesaro".into(),
            CatalogMatrix::Difference => "difference".into(),
            CatalogMatrix::Zweier(a) => format!("zweier({a})"),
            CatalogMatrix::DeferredMean(d) => format!("deferred-mean({})", d.describe()),
            CatalogMatrix::WeightedMean { s, .. } => format!("weighted-mean({s})"),
            CatalogMatrix::ShiftLeft => "shift-left".into(),
            CatalogMatrix::UserTable(rows) => format!("user-table({} rows)", rows.len()),
            CatalogMatrix::Zero => "zero".into(),
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            CatalogMatrix::Identity => f64::from(i == j),
            CatalogMatrix::CesaroC1 => {
                if j <= i {
                    1.0 / i as f64
                } else {
                    0.0
                }
            }
            CatalogMatrix::Difference => {
                if j == i {
                    1.0
                } else if j == i + 1 {
                    -1.0
                } else {
                    0.0
                }
            }
            CatalogMatrix::Zweier(a) => {
                if j == i {
                    *a
                } else if j + 1 == i {
                    1.0 - a
                } else {
                    0.0
                }
            }
            CatalogMatrix::DeferredMean(d) => match d.window(i) {
                Ok((p, q)) if j > p && j <= q => 1.0 / (q - p) as f64,
                Ok(_) => 0.0,
                Err(_) => f64::NAN,
            },
            CatalogMatrix::WeightedMean { s, .. } => {
                if j <= i {
                    (j as f64).powf(*s) / self.weight_sum(i)
                } else {
                    0.0
                }
            }
            CatalogMatrix::ShiftLeft => f64::from(j == i + 1),
            CatalogMatrix::UserTable(rows) => rows
                .get(i - 1)
                .and_then(|r| r.get(j - 1))
                .copied()
                .unwrap_or(0.0),
            CatalogMatrix::Zero => 0.0,
        }
    }

    fn row_tail(&self, i: usize, k: usize) -> Result<f64, MatrixError> {
        Ok(match self {
            CatalogMatrix::Identity => f64::from(k < i),
            CatalogMatrix::CesaroC1 => {
                if k < i {
                    (i - k) as f64 / i as f64
                } else {
                    0.0
                }
            }
            CatalogMatrix::Difference => -f64::from(k == i),
            CatalogMatrix::Zweier(a) => {
                if i == 1 {
                    if k == 0 {
                        *a
                    } else {
                        0.0
                    }
                } else if k + 2 <= i {
                    1.0
                } else if k + 1 == i {
                    *a
                } else {
                    0.0
                }
            }
            CatalogMatrix::DeferredMean(d) => {
                let (p, q) = d.window(i)?;
                if k <= p {
                    1.0
                } else if k < q {
                    (q - k) as f64 / (q - p) as f64
                } else {
                    0.0
                }
            }
            CatalogMatrix::WeightedMean { weights, .. } => {
                if k < i {
                    let wi = self.weight_sum(i);
                    weights.sum(k + 1, i) / wi
                } else {
                    0.0
                }
            }
            CatalogMatrix::ShiftLeft => f64::from(k <= i),
            CatalogMatrix::UserTable(rows) => match rows.get(i - 1) {
                Some(r) if k < r.len() => crate::scalar::compensated_sum(r[k..].iter().copied()),
                _ => 0.0,
            },
            CatalogMatrix::Zero => 0.0,
        })
    }

    fn row_support(&self, i: usize) -> Result<Option<(usize, usize)>, MatrixError> {
        Ok(Some(match self {
            CatalogMatrix::Identity => (i, i),
            CatalogMatrix::CesaroC1 | CatalogMatrix::WeightedMean { .. } => (1, i),
            CatalogMatrix::Difference => (i, i + 1),
            CatalogMatrix::Zweier(_) => (i.saturating_sub(1).max(1), i),
            CatalogMatrix::DeferredMean(d) => {
                let (p, q) = d.window(i)?;
                (p + 1, q)
            }
            CatalogMatrix::ShiftLeft => (i + 1, i + 1),
            CatalogMatrix::UserTable(rows) => (1, rows.get(i - 1).map_or(0, Vec::len)),
            CatalogMatrix::Zero => (1, 0),
        }))
    }

    fn tail_window_sum(&self, i: usize, p: usize, q: usize) -> Result<f64, MatrixError> {
        Ok(match self {
            CatalogMatrix::Identity => count_upto(p, q, i.saturating_sub(1)) as f64,
            CatalogMatrix::Difference => -f64::from(p < i && i <= q),
            CatalogMatrix::ShiftLeft => count_upto(p, q, i) as f64,
            CatalogMatrix::Zweier(a) => {
                if i == 1 {
                    0.0
                } else {
                    count_upto(p, q, i - 2) as f64 + if p < i - 1 && i - 1 <= q { *a } else { 0.0 }
                }
            }
            CatalogMatrix::CesaroC1 => {
                let (a, b) = (p + 1, q.min(i.saturating_sub(1)));
                descending_sum(a, b, i) as f64 / i as f64
            }
            CatalogMatrix::DeferredMean(d) => {
                let (pp, qq) = d.window(i)?;
                let w = (qq - pp) as u128;
                let ones = count_upto(p, q, pp) as u128;
                let ramp = descending_sum((p + 1).max(pp + 1), q.min(qq - 1), qq);
                (ones * w + ramp) as f64 / w as f64
            }
            CatalogMatrix::Zero => 0.0,
            CatalogMatrix::WeightedMean { .. } | CatalogMatrix::UserTable(_) => {
                let mut acc = Compensated::zero();
                for k in p + 1..=q {
                    acc.add(self.row_tail(i, k)?);
                }
                acc.value()
            }
        })
    }

    fn abs_tail_bound(&self, i: usize, k: usize) -> Option<f64> {
        let (lo, hi) = self.row_support(i).ok()??;
        let mut acc = Compensated::zero();
        for j in (k + 1).max(lo)..=hi {
            acc.add(self.entry(i, j).abs());
        }
        Some(acc.value())
    }

    fn far_rows(&self, max_col: usize) -> Option<FarRows> {
        let frozen = |start: usize| {
            Some(FarRows {
                start: start.max(1),
                shape: FarShape::Frozen,
            })
        };
        let scaled = |start: usize, rho_summable: bool| {
            Some(FarRows {
                start: start.max(1),
                shape: FarShape::Scaled { rho_summable },
            })
        };
        match self {
            CatalogMatrix::Identity | CatalogMatrix::Difference => frozen(max_col + 1),
            CatalogMatrix::ShiftLeft => frozen(max_col),
            CatalogMatrix::Zweier(_) => frozen(max_col + 2),
            CatalogMatrix::UserTable(rows) => frozen(rows.len() + 1),
            CatalogMatrix::Zero => frozen(1),
            CatalogMatrix::CesaroC1 => scaled(max_col + 1, false),
            CatalogMatrix::WeightedMean { s, .. } => scaled(max_col + 1, *s > 0.0),
            CatalogMatrix::DeferredMean(d) => {
                if d.p_unbounded() {
                    let mut i = 1;
                    while d.p(i) < max_col {
                        i += 1;
                    }
                    frozen(i)
                } else if d.constant_p().is_some() {
                    let mut i = 1;
                    while d.q(i) <= max_col {
                        i += 1;
                    }
                    scaled(i, d.q_growth_exponent().is_some_and(|b| b >= 2))
                } else {
                    None
                }
            }
        }
    }

    fn window_row(&self, i: usize) -> Option<(usize, usize)> {
        match self {
            CatalogMatrix::DeferredMean(d) => d.window(i).ok(),
            _ => None,
        }
    }
}

/// Geometric bound `|a_ij| <= coeff * ratio^j`, uniform in `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricRowBound {
    pub coeff: f64,
    pub ratio: f64,
}

/// A matrix given by an entry rule. Row tails are summed numerically and
/// only when a geometric row bound is declared.
#[derive(Clone)]
pub struct FnMatrix {
    label: String,
    entry: Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>,
    bound: Option<GeometricRowBound>,
}

/// Numeric tails stop once the geometric remainder drops below this.
const NUMERIC_TAIL_EPS: f64 = 1e-16;
const NUMERIC_TAIL_MAX_TERMS: usize = 1 << 20;

impl FnMatrix {
    pub fn new<F>(label: &str, entry: F, bound: Option<GeometricRowBound>) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        FnMatrix {
            label: label.to_string(),
            entry: Arc::new(entry),
            bound,
        }
    }

    /// `sum_{j > k} |a_ij| <= coeff ratio^{k+1} / (1 - ratio)`.
    pub fn uniform_tail_bound(&self, k: usize) -> Option<f64> {
        let b = self.bound?;
        Some(b.coeff * b.ratio.powf((k + 1) as f64) / (1.0 - b.ratio))
    }
}

impl InfiniteMatrix for FnMatrix {
    fn descriptor(&self) -> String {
        format!("fn({})", self.label)
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        (self.entry)(i, j)
    }

    fn row_tail(&self, i: usize, k: usize) -> Result<f64, MatrixError> {
        let b = self
            .bound
            .filter(|b| b.ratio < 1.0 && b.ratio >= 0.0)
            .ok_or(MatrixError::NoTailOracle { i, k })?;
        let mut acc = Compensated::zero();
        let mut j = k + 1;
        loop {
            acc.add(self.entry(i, j));
            let rest = b.coeff * b.ratio.powf((j + 1) as f64) / (1.0 - b.ratio);
            if rest < NUMERIC_TAIL_EPS * acc.value().abs().max(1.0) {
                return Ok(acc.value());
            }
            if j - k > NUMERIC_TAIL_MAX_TERMS {
                return Err(MatrixError::NoTailOracle { i, k });
            }
            j += 1;
        }
    }

    fn row_support(&self, _i: usize) -> Result<Option<(usize, usize)>, MatrixError> {
        Ok(None)
    }

    fn abs_tail_bound(&self, _i: usize, k: usize) -> Option<f64> {
        self.uniform_tail_bound(k)
    }
}

/// Row evaluator for one input sequence; window rows share cached sums.
pub struct RowEval<S: Scalar> {
    x: Seq<S>,
    sums: WindowSums<S>,
}

impl<S: Scalar> RowEval<S> {
    pub fn new(x: &Seq<S>) -> Self {
        RowEval {
            x: x.clone(),
            sums: WindowSums::new(x.clone()),
        }
    }

    /// `(Ax)_i`, summing infinite rows up to column `trunc` and bounding the
    /// remainder from the tail descriptor of `x`.
    pub fn row<M: InfiniteMatrix + ?Sized>(&self, a: &M, i: usize, trunc: usize) -> Result<RowValue<S>, MatrixError> {
        if let Some((p, q)) = a.window_row(i) {
            return Ok(RowValue {
                value: self.sums.sum(p + 1, q) / (q - p) as f64,
                bound: ErrorBound::Exact,
            });
        }
        if let Some((lo, hi)) = a.row_support(i)? {
            let mut acc = Compensated::zero();
            for j in lo..=hi {
                acc.add(self.x.at(j) * a.entry(i, j));
            }
            return Ok(RowValue {
                value: acc.value(),
                bound: ErrorBound::Exact,
            });
        }
        let mut acc = Compensated::zero();
        for j in 1..=trunc {
            acc.add(self.x.at(j) * a.entry(i, j));
        }
        let bound = match *self.x.tail() {
            Tail::EventuallyZero { from } if from <= trunc + 1 => ErrorBound::Exact,
            Tail::EventuallyConstant { from, value } if from <= trunc + 1 => match a.row_tail(i, trunc) {
                Ok(t) => {
                    acc.add(value * t);
                    ErrorBound::Exact
                }
                Err(_) => ErrorBound::Unbounded,
            },
            ref tail => {
                let m = match *tail {
                    Tail::AbsBound { from, ratio, coeff } if from <= trunc + 1 => {
                        Some(coeff * ratio.powf((trunc + 1) as f64))
                    }
                    Tail::EventuallyMonotone { from, limit, .. } if from <= trunc + 1 => {
                        let start = self.x.at(from).modulus();
                        Some(start.max(limit.modulus()))
                    }
                    _ => None,
                };
                match (m, a.abs_tail_bound(i, trunc)) {
                    (Some(m), Some(t)) => ErrorBound::Bounded(m * t),
                    _ => ErrorBound::Unbounded,
                }
            }
        };
        Ok(RowValue {
            value: acc.value(),
            bound,
        })
    }
}

/// `y_i = sum_j a_ij x_j` with its truncation error bound.
pub fn apply_row<M: InfiniteMatrix + ?Sized, S: Scalar>(
    a: &M,
    x: &Seq<S>,
    i: usize,
    trunc: usize,
) -> Result<RowValue<S>, MatrixError> {
    RowEval::new(x).row(a, i, trunc)
}

/// `Ax` on rows `1..=horizon` (evaluated eagerly, failing on any row with
/// an unbounded error) and lazily beyond.
pub fn transform<M, S>(a: &M, x: &Seq<S>, horizon: usize, trunc: usize) -> Result<Seq<S>, MatrixError>
where
    M: InfiniteMatrix + Clone + 'static,
    S: Scalar,
{
    let eval = Arc::new(RowEval::new(x));
    let mut rows = Vec::with_capacity(horizon);
    for i in 1..=horizon {
        let r = eval.row(a, i, trunc)?;
        if r.bound == ErrorBound::Unbounded {
            return Err(MatrixError::Unbounded { i });
        }
        rows.push(r.value);
    }
    let a = a.clone();
    let tail = match a.descriptor().as_str() {
        "identity" => x.tail().clone(),
        "zero" => Tail::EventuallyZero { from: 1 },
        _ => Tail::Unknown,
    };
    Ok(Seq::from_fn(move |i| match rows.get(i - 1) {
        Some(&v) => v,
        None => eval
            .row(&a, i, trunc)
            .map(|r| r.value)
            .unwrap_or_else(|_| S::from_real(f64::NAN)),
    })
    .with_tail(tail))
}

/// `x in Y_A` at truncation: every row on `1..=params.horizon` has a
/// bounded error and `Ax` passes the membership test for `Y`. For `c` and
/// `c0` the detector runs on the coordinates of `Ax`; for the normed
/// sequence spaces it runs on the truncated norms `||Ax||_(m)`, `m <= horizon`.
pub fn domain_member<M, S>(
    y: &SpaceId,
    a: &M,
    x: &Seq<S>,
    params: &DetectParams,
    trunc: usize,
) -> Result<ConvergenceVerdict<S>, MatrixError>
where
    M: InfiniteMatrix + Clone + 'static,
    S: Scalar,
{
    let ax = match transform(a, x, params.horizon, trunc) {
        Ok(ax) => ax,
        Err(MatrixError::Unbounded { i }) => {
            return Ok(ConvergenceVerdict {
                status: Status::Inconclusive,
                limit: None,
                residual: f64::NAN,
                trace: Vec::new(),
                diagnostics: vec![format!("row {i} of Ax has an unbounded truncation error")],
            });
        }
        Err(e) => return Err(e),
    };
    let detect = |f: &dyn Fn(usize) -> S| {
        detect_limit(f, params).map_err(|e| MatrixError::BadParams {
            id: "detect".into(),
            msg: e.to_string(),
        })
    };
    let mut verdict = match y {
        SpaceId::C | SpaceId::C0 => detect(&|n| ax.at(n))?,
        _ => {
            let trace: Vec<(usize, S)> = (1..=params.horizon)
                .map(|m| (m, S::from_real(norm(y, &ax.section(m), m).value)))
                .collect();
            classify(trace, params).map_err(|e| MatrixError::BadParams {
                id: "detect".into(),
                msg: e.to_string(),
            })?
        }
    };
    if matches!(y, SpaceId::C0) && verdict.is_converged() && !verdict.converged_to_zero(params.tol) {
        verdict.status = Status::Diverged;
        verdict
            .diagnostics
            .push(format!("limit {:?} is not zero", verdict.limit));
        verdict.limit = None;
    }
    Ok(verdict)
}

/// Sequence `i -> f(i)` whose tail descriptor comes from the far-row
/// structure of `a` on columns `1..=max_col`. `limit` is the value of the
/// underlying functional on the limit row (tails 1, entries 0); it is used
/// for scaled rows.
pub fn row_profile<M, F>(a: &M, max_col: usize, limit: f64, f: F) -> Seq<f64>
where
    M: InfiniteMatrix + ?Sized,
    F: Fn(usize) -> f64 + Send + Sync + 'static,
{
    let far = a.far_rows(max_col);
    let tail = match far {
        Some(FarRows {
            start,
            shape: FarShape::Frozen,
        }) => Tail::EventuallyConstant {
            from: start,
            value: f(start),
        },
        Some(FarRows {
            start,
            shape: FarShape::Scaled { rho_summable },
        }) => Tail::EventuallyMonotone {
            from: start,
            limit,
            summable: if limit != 0.0 { Some(false) } else if f(start) == 0.0 { Some(true) } else { Some(rho_summable) },
        },
        None => Tail::Unknown,
    };
    Seq::from_fn(f).with_tail(tail)
}

/// `A zeta^n` through the tail identity
/// `(A zeta^n)_i = (1/(q-p)) sum_{k=p+1}^{q} tail(i, k)`.
/// Coordinates whose tail oracle fails evaluate to NaN.
pub fn zeta_image_seq<M>(a: &M, d: &DefermentSchedule, n: usize) -> Result<Seq<f64>, MatrixError>
where
    M: InfiniteMatrix + Clone + 'static,
{
    let (p, q) = d.window(n)?;
    let w = (q - p) as f64;
    let m = a.clone();
    Ok(row_profile(a, q, 1.0, move |i| {
        m.tail_window_sum(i, p, q).map(|s| s / w).unwrap_or(f64::NAN)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::means::{deferred_mean, zeta};

    fn brute_tail(a: &CatalogMatrix, i: usize, k: usize) -> f64 {
        let (lo, hi) = a.row_support(i).unwrap().unwrap();
        (lo.max(k + 1)..=hi).map(|j| a.entry(i, j)).sum()
    }

    #[test]
    fn closed_form_tails_match_entries() {
        for a in CatalogMatrix::all() {
            for i in 1..=60 {
                for k in 0..=70 {
                    let t = a.row_tail(i, k).unwrap();
                    assert!((t - brute_tail(&a, i, k)).abs() < 1e-12, "{a:?} i={i} k={k}");
                }
            }
        }
    }

    #[test]
    fn tail_window_sums_match_loop() {
        for a in CatalogMatrix::all() {
            for i in 1..=50 {
                for (p, q) in [(0, 1), (0, 7), (3, 9), (10, 40), (20, 21), (45, 90)] {
                    let direct: f64 = (p + 1..=q).map(|k| a.row_tail(i, k).unwrap()).sum();
                    let closed = a.tail_window_sum(i, p, q).unwrap();
                    assert!((closed - direct).abs() < 1e-11, "{a:?} i={i} p={p} q={q}");
                }
            }
        }
    }

    #[test]
    fn apply_row_examples() {
        let x = Seq::random(4, 0.0);
        for i in [1, 5, 99] {
            assert_eq!(apply_row(&CatalogMatrix::Identity, &x, i, 10).unwrap().value, x.at(i));
            let c = apply_row(&CatalogMatrix::CesaroC1, &Seq::<f64>::ones(), i, 10).unwrap();
            assert!((c.value - 1.0).abs() < 1e-15);
            let sq: Seq = Seq::from_fn(|k| (k * k) as f64);
            let r = apply_row(&CatalogMatrix::Difference, &sq, i, 10).unwrap();
            assert_eq!(r.value, -((2 * i + 1) as f64));
            assert_eq!(r.bound, ErrorBound::Exact);
        }
    }

    #[test]
    fn fn_matrix_bounds() {
        let g = FnMatrix::new("geo", |i, j| 0.5f64.powi(j as i32) / i as f64, Some(GeometricRowBound { coeff: 1.0, ratio: 0.5 }));
        let t = g.row_tail(2, 3).unwrap();
        assert!((t - 0.0625).abs() < 1e-15);
        let r = apply_row(&g, &Seq::<f64>::ones(), 1, 60).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.bound, ErrorBound::Exact);
        let r = apply_row(&g, &Seq::alternating(), 1, 60).unwrap();
        assert_eq!(r.bound, ErrorBound::Unbounded);
        let decaying: Seq = Seq::from_fn(|j| 1.0 / j as f64).with_tail(Tail::EventuallyMonotone { from: 1, limit: 0.0, summable: Some(false) });
        let r = apply_row(&g, &decaying, 1, 30).unwrap();
        assert!(matches!(r.bound, ErrorBound::Bounded(b) if b < 1e-9));
        let unguarded = FnMatrix::new("raw", |_, _| 1.0, None);
        assert!(matches!(unguarded.row_tail(1, 0), Err(MatrixError::NoTailOracle { .. })));
    }

    #[test]
    fn deferred_mean_matrix_is_bit_exact() {
        for d in [DefermentSchedule::cesaro(), DefermentSchedule::block(), DefermentSchedule::poly(1, 2).unwrap()] {
            let x = Seq::random(11, 0.3);
            let a = CatalogMatrix::DeferredMean(d.clone().with_horizon(50));
            let ax = transform(&a, &x, 50, 10).unwrap();
            let dm = deferred_mean(&x, &d.with_horizon(50)).unwrap();
            for n in 1..=50 {
                assert_eq!(ax.at(n).to_bits(), dm.at(n).to_bits());
            }
        }
    }

    #[test]
    fn domain_examples() {
        let params = DetectParams::new(1e-3, 16, 2000);
        let v = domain_member(&SpaceId::C, &CatalogMatrix::Identity, &Seq::<f64>::ones(), &params, 10).unwrap();
        assert_eq!(v.limit, Some(1.0));
        let v = domain_member(&SpaceId::C, &CatalogMatrix::CesaroC1, &Seq::alternating(), &params, 10).unwrap();
        assert!(v.is_converged());
        assert!(v.limit.unwrap().abs() < 1e-3);
        let v = domain_member(&SpaceId::C, &CatalogMatrix::CesaroC1, &crate::means::partial_sums(&Seq::alternating()), &params, 10).unwrap();
        assert!((v.limit.unwrap() - 0.5).abs() < 1e-3);
        let v = domain_member(&SpaceId::C, &CatalogMatrix::Identity, &Seq::alternating(), &params, 10).unwrap();
        assert!(!v.is_converged());
        let v = domain_member(&SpaceId::C0, &CatalogMatrix::Identity, &Seq::<f64>::ones(), &params, 10).unwrap();
        assert!(!v.is_converged());
        let v = domain_member(&SpaceId::L1, &CatalogMatrix::Difference, &Seq::<f64>::ones(), &params, 10).unwrap();
        assert_eq!(v.limit, Some(0.0));
    }

    #[test]
    fn zeta_image_examples() {
        let d = DefermentSchedule::custom("p3", |_| 3, |n| 7 + n, true);
        let (p, q) = d.window(2).unwrap();
        let w = (q - p) as f64;
        let id = zeta_image_seq(&CatalogMatrix::Identity, &d, 2).unwrap();
        for i in 1..=30 {
            let expected = if i > q {
                1.0
            } else if i <= p + 1 {
                0.0
            } else {
                (i - 1 - p) as f64 / w
            };
            assert_eq!(id.at(i), expected, "i={i}");
        }
        let diff = zeta_image_seq(&CatalogMatrix::Difference, &d, 2).unwrap();
        for i in 1..=30 {
            let expected = if p < i && i <= q { -1.0 / w } else { 0.0 };
            assert_eq!(diff.at(i), expected);
        }
    }

    #[test]
    fn zeta_image_matches_direct_product() {
        for d in [DefermentSchedule::cesaro(), DefermentSchedule::block()] {
            for a in CatalogMatrix::all() {
                for n in [1, 4, 13] {
                    let img = zeta_image_seq(&a, &d, n).unwrap();
                    let z: Seq = zeta(&d, n).unwrap();
                    let direct = transform(&a, &z, 80, 200).unwrap();
                    for i in 1..=80 {
                        assert!((img.at(i) - direct.at(i)).abs() < 1e-10, "{a:?} n={n} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn far_rows_are_consistent() {
        // frozen rows: tails on columns <= max_col equal those of the start row
        for a in CatalogMatrix::all() {
            let max_col = 17;
            if let Some(FarRows { start, shape: FarShape::Frozen }) = a.far_rows(max_col) {
                for i in start..start + 40 {
                    for k in 0..=max_col {
                        assert_eq!(a.row_tail(i, k).unwrap(), a.row_tail(start, k).unwrap(), "{a:?}");
                        if k >= 1 {
                            assert_eq!(a.entry(i, k), a.entry(start, k), "{a:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn parse_catalog() {
        for s in ["identity", "cesaro", "difference", "zweier(0.5)", "deferred-mean(block)", "weighted-mean(1)", "shift-left", "zero"] {
            assert_eq!(CatalogMatrix::parse(s).unwrap().descriptor(), s);
        }
        let t = CatalogMatrix::parse("user-table(1,0;0,1)").unwrap();
        assert_eq!(t.entry(2, 2), 1.0);
        assert!(matches!(CatalogMatrix::parse("nope"), Err(MatrixError::UnknownId(_))));
        assert!(CatalogMatrix::parse("zweier").is_err());
        assert!(CatalogMatrix::parse("weighted-mean(-2)").is_err());
    }
}
