//! Conullity criteria for summability domains `Y_A`, evaluated as traces
//! `T_n` over the schedule index and classified by the limit detector.

use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::convergence::{classify, ConvergenceVerdict, DetectParams, Status};
use crate::error::{Error, Result};
use crate::matrices::{row_profile, zeta_image_seq, ErrorBound, FarShape, InfiniteMatrix, RowEval};
use crate::means::averaged_sections;
use crate::schedule::DefermentSchedule;
use crate::seq::{Seq, Tail};
use crate::spaces::{member_sigma_pq_s, norm, NormReport, SpaceId};

#[derive(Debug, Clone, PartialEq)]
pub enum CriterionId {
    CAStrong,
    L1A,
    BvA,
    LinfABound,
    LinfAMin,
    ZetaImage(String),
    SectionTest(String),
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionId::CAStrong => f.write_str("C_A_STRONG"),
            CriterionId::L1A => f.write_str("L1_A"),
            CriterionId::BvA => f.write_str("BV_A"),
            CriterionId::LinfABound => f.write_str("LINF_A_BOUND"),
            CriterionId::LinfAMin => f.write_str("LINF_A_MIN"),
            CriterionId::ZetaImage(y) => write!(f, "ZETA_IMAGE({y})"),
            CriterionId::SectionTest(y) => write!(f, "SECTION_TEST({y})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Inconclusive => "inconclusive",
        }
    }

    /// Holds when the trace converges to zero, fails when it converges
    /// elsewhere or diverges.
    pub fn from_verdict(v: &ConvergenceVerdict<f64>, zero_tol: f64) -> Self {
        match v.status {
            Status::Converged if v.converged_to_zero(zero_tol) => Outcome::Holds,
            Status::Converged | Status::Diverged => Outcome::Fails,
            Status::Inconclusive => Outcome::Inconclusive,
        }
    }
}

/// Which argument covers the rows `i` beyond the evaluated ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// Catalog far-row structure (frozen or monotone rows).
    Structural(String),
    /// Rows `1..=i_horizon` evaluated; the rest covered only by the declared
    /// uniform bound, if any.
    Horizon { i_horizon: usize, bound: Option<f64> },
    Unavailable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Structural(s) => write!(f, "structural ({s})"),
            Regime::Horizon { i_horizon, bound: Some(b) } => {
                write!(f, "i-horizon {i_horizon}, declared uniform tail bound {b:e}")
            }
            Regime::Horizon { i_horizon, bound: None } => write!(f, "i-horizon {i_horizon}, no uniform tail bound"),
            Regime::Unavailable => f.write_str("unavailable"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: CriterionId,
    pub matrix: String,
    pub schedule: String,
    /// `(n, T_n)`, strictly increasing in `n`.
    pub trace: Vec<(usize, f64)>,
    pub verdict: ConvergenceVerdict<f64>,
    pub outcome: Outcome,
    pub regime: Regime,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CriteriaParams {
    /// Detector settings; `horizon` is the largest schedule index `n`.
    pub detect: DetectParams,
    /// A converged trace counts as tending to zero below this.
    pub zero_tol: f64,
    /// Row horizon for matrices without far-row structure.
    pub i_horizon: Option<usize>,
    /// Declared bound on the criterion contribution of rows past `i_horizon`.
    pub uniform_tail_bound: Option<f64>,
    pub seed: u64,
    /// Sampled subsequences for the second bounded-domain condition.
    pub subsequences: usize,
    pub max_l: usize,
    pub eps: Vec<f64>,
}

impl Default for CriteriaParams {
    fn default() -> Self {
        CriteriaParams {
            detect: DetectParams::new(1e-3, 16, 200),
            zero_tol: 1e-2,
            i_horizon: None,
            uniform_tail_bound: None,
            seed: 0,
            subsequences: 8,
            max_l: 16,
            eps: vec![0.5, 0.1, 0.05],
        }
    }
}

impl CriteriaParams {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.detect.horizon = horizon;
        self
    }
}

fn prepared(d: &DefermentSchedule, params: &CriteriaParams) -> Result<DefermentSchedule> {
    let d = d.clone().with_horizon(params.detect.horizon);
    for n in 1..=d.horizon() {
        d.window(n)?;
    }
    Ok(d)
}

fn structural_note<M: InfiniteMatrix + ?Sized>(a: &M, max_col: usize) -> Option<String> {
    a.far_rows(max_col).map(|f| match f.shape {
        FarShape::Frozen => "rows frozen past the window".to_string(),
        FarShape::Scaled { .. } => "rows monotone past the window".to_string(),
    })
}

/// Truncation index for a row profile: the tail start when known, else
/// the caller's row horizon.
fn row_trunc(s: &Seq<f64>, params: &CriteriaParams, fallback: usize) -> usize {
    match s.tail().from() {
        Some(from) => from.max(1),
        None => params.i_horizon.unwrap_or(fallback),
    }
}

/// Runs `t(n)` for `n <= horizon`, classifies the trace and settles the
/// regime.
fn assemble<F>(
    id: CriterionId,
    matrix: String,
    d: &DefermentSchedule,
    params: &CriteriaParams,
    structural: Option<String>,
    t: F,
) -> Result<CriterionReport>
where
    F: Fn(usize) -> Result<NormReport> + Sync,
{
    let d = prepared(d, params)?;
    let rows: Vec<NormReport> = (1..=d.horizon())
        .into_par_iter()
        .map(&t)
        .collect::<Result<Vec<_>>>()?;
    let trace: Vec<(usize, f64)> = rows.iter().enumerate().map(|(k, r)| (k + 1, r.value)).collect();
    // The verdict reads only the final window, so only it must be exact.
    let tail_start = rows.len().saturating_sub(params.detect.window);
    let all_exact = rows[tail_start..].iter().all(|r| r.exact);
    let mut notes = Vec::new();
    let inexact_early = rows[..tail_start].iter().filter(|r| !r.exact).count();
    if inexact_early > 0 {
        notes.push(format!("{inexact_early} early T_n values are truncated lower bounds"));
    }
    let regime = match (all_exact, structural) {
        (true, Some(s)) => Regime::Structural(s),
        (true, None) => Regime::Structural("finite rows".into()),
        (false, _) => match params.i_horizon {
            Some(i_horizon) => Regime::Horizon {
                i_horizon,
                bound: params.uniform_tail_bound,
            },
            None => Regime::Unavailable,
        },
    };
    let verdict = classify(trace.clone(), &params.detect)?;
    let mut outcome = Outcome::from_verdict(&verdict, params.zero_tol);
    match &regime {
        Regime::Unavailable => {
            notes.push("row regime unavailable: no far-row structure and no i-horizon".into());
            outcome = Outcome::Inconclusive;
        }
        Regime::Horizon { bound, .. } if outcome == Outcome::Holds && !bound.is_some_and(|b| b < params.zero_tol) => {
            notes.push("holds on the row horizon only; rows beyond are not bounded below zero_tol".into());
            outcome = Outcome::Inconclusive;
        }
        _ => {}
    }
    Ok(CriterionReport {
        id,
        matrix,
        schedule: d.describe(),
        trace,
        verdict,
        outcome,
        regime,
        notes,
    })
}

/// `T_n = ||A zeta^n||_Y` with the row sequence `A zeta^n` computed through
/// the tail identity.
pub fn zeta_image_criterion<M>(y: &SpaceId, a: &M, d: &DefermentSchedule, params: &CriteriaParams) -> Result<CriterionReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    zeta_criterion(CriterionId::ZetaImage(y.name()), y, a, d, params)
}

fn zeta_criterion<M>(
    id: CriterionId,
    y: &SpaceId,
    a: &M,
    d: &DefermentSchedule,
    params: &CriteriaParams,
) -> Result<CriterionReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    let dd = prepared(d, params)?;
    let structural = structural_note(a, dd.q(1));
    assemble(id, a.descriptor(), d, params, structural, |n| {
        let v = zeta_image_seq(a, &dd, n)?;
        let trunc = row_trunc(&v, params, dd.q(n) + 1);
        Ok(norm(y, &v, trunc))
    })
}

/// `T_n = sup_i |(1/(q-p)) sum_{k=p+1}^{q} sum_{j>k} a_ij|`.
pub fn criterion_c_a<M>(a: &M, d: &DefermentSchedule, params: &CriteriaParams) -> Result<CriterionReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    zeta_criterion(CriterionId::CAStrong, &SpaceId::C, a, d, params)
}

/// `T_n = sum_i |(1/(q-p)) sum_{k=p+1}^{q} sum_{j>k} a_ij|`.
pub fn criterion_l_a<M>(a: &M, d: &DefermentSchedule, params: &CriteriaParams) -> Result<CriterionReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    zeta_criterion(CriterionId::L1A, &SpaceId::L1, a, d, params)
}

/// `T_n = sum_i |v_i - v_{i+1}| + lim_i |v_i|` for `v = A zeta^n`.
pub fn criterion_bv_a<M>(a: &M, d: &DefermentSchedule, params: &CriteriaParams) -> Result<CriterionReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    zeta_criterion(CriterionId::BvA, &SpaceId::BV, a, d, params)
}

/// Per-subsequence record of the sampled second condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSubsequence {
    pub indices: Vec<usize>,
    /// `V(L) = sup_i min_{s<=L} |(A zeta^{n_s})_i|` for `L = 1..=max_l`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinfReport {
    pub bound: CriterionReport,
    pub min: CriterionReport,
    pub samples: Vec<SampledSubsequence>,
    /// For each `eps`, the smallest `L` with `V(L) < eps` per subsequence.
    pub witnesses: Vec<(f64, Vec<Option<usize>>)>,
}

/// The two-part test for `(l_inf)_A`: (i) the averaged row partial sums
/// are bounded over the `(i, n)` grid; (ii) for every `eps` and every
/// sampled increasing subsequence `n_s` some `L` gives
/// `sup_i min_{s<=L} |(A zeta^{n_s})_i| < eps`. Part (ii) is a seeded
/// sampled falsifier.
pub fn criterion_linf_a<M>(a: &M, d: &DefermentSchedule, params: &CriteriaParams) -> Result<LinfReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    let dd = prepared(d, params)?;
    let structural = structural_note(a, dd.q(1));

    let mut bound = assemble(CriterionId::LinfABound, a.descriptor(), d, params, structural.clone(), |n| {
        let (p, q) = dd.window(n)?;
        let w = (q - p) as f64;
        let m = a.clone();
        let u = row_profile(a, q, 0.0, move |i| {
            let r = m.row_tail(i, 0).and_then(|r0| Ok(r0 - m.tail_window_sum(i, p, q)? / w));
            r.unwrap_or(f64::NAN)
        });
        let trunc = row_trunc(&u, params, q + 1);
        Ok(norm(&SpaceId::LInf, &u, trunc))
    })?;
    let mut running = 0.0f64;
    let running_max: Vec<(usize, f64)> = bound
        .trace
        .iter()
        .map(|&(n, t)| {
            running = if t.is_nan() { f64::NAN } else { running.max(t) };
            (n, running)
        })
        .collect();
    let sup_verdict = classify(running_max, &params.detect)?;
    bound.outcome = match (bound.regime == Regime::Unavailable, sup_verdict.status) {
        (true, _) => Outcome::Inconclusive,
        (false, Status::Converged) => Outcome::Holds,
        (false, Status::Diverged) => Outcome::Fails,
        (false, Status::Inconclusive) => Outcome::Inconclusive,
    };
    bound.notes.push(format!(
        "sup over the grid {}",
        sup_verdict.trace.last().map_or(f64::NAN, |&(_, v)| v)
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let horizon = dd.horizon();
    let max_l = params.max_l.clamp(1, horizon);
    let mut samples = Vec::with_capacity(params.subsequences);
    let mut exact = true;
    for _ in 0..params.subsequences.max(1) {
        let mut indices: Vec<usize> = sample(&mut rng, horizon, max_l).into_iter().map(|k| k + 1).collect();
        indices.sort_unstable();
        let images: Vec<Seq<f64>> = indices
            .iter()
            .map(|&n| zeta_image_seq(a, &dd, n))
            .collect::<std::result::Result<_, _>>()?;
        let mut values = Vec::with_capacity(max_l);
        for l in 1..=max_l {
            let prefix = &images[..l];
            let mut last_row = 0usize;
            let mut limit_min = f64::INFINITY;
            for v in prefix {
                match *v.tail() {
                    Tail::EventuallyConstant { from, value } => {
                        last_row = last_row.max(from);
                        limit_min = limit_min.min(value.abs());
                    }
                    Tail::EventuallyZero { from } => {
                        last_row = last_row.max(from);
                        limit_min = 0.0;
                    }
                    Tail::EventuallyMonotone { from, limit, .. } => {
                        exact = false;
                        last_row = last_row.max(4 * from);
                        limit_min = limit_min.min(limit.abs());
                    }
                    _ => {
                        exact = false;
                        last_row = last_row.max(params.i_horizon.unwrap_or(0));
                        limit_min = 0.0;
                    }
                }
            }
            let mut sup = if limit_min.is_finite() { limit_min } else { 0.0 };
            for i in 1..=last_row {
                let m = prefix.iter().map(|v| v.at(i).abs()).fold(f64::INFINITY, f64::min);
                sup = sup.max(m);
            }
            values.push(sup);
        }
        samples.push(SampledSubsequence { indices, values });
    }
    let witnesses: Vec<(f64, Vec<Option<usize>>)> = params
        .eps
        .iter()
        .map(|&eps| {
            let per = samples
                .iter()
                .map(|s| s.values.iter().position(|&v| v < eps).map(|k| k + 1))
                .collect();
            (eps, per)
        })
        .collect();
    let falsified = witnesses.iter().any(|(_, per)| per.iter().any(Option::is_none));
    let worst: Vec<(usize, f64)> = (0..max_l)
        .map(|k| (k + 1, samples.iter().map(|s| s.values[k]).fold(0.0, f64::max)))
        .collect();
    let mut detect = params.detect;
    detect.window = detect.window.min(max_l).max(2.min(max_l));
    let verdict = if max_l >= 2 {
        classify(worst.clone(), &detect)?
    } else {
        ConvergenceVerdict {
            status: Status::Inconclusive,
            limit: None,
            residual: f64::NAN,
            trace: worst.clone(),
            diagnostics: vec!["single-term subsequences".into()],
        }
    };
    let regime = if exact {
        Regime::Structural("sampled subsequences, frozen rows".into())
    } else if let Some(i_horizon) = params.i_horizon {
        Regime::Horizon {
            i_horizon,
            bound: params.uniform_tail_bound,
        }
    } else if structural.is_some() {
        Regime::Structural("sampled subsequences, monotone rows checked to 4x the tail start".into())
    } else {
        Regime::Unavailable
    };
    let outcome = match (&regime, falsified) {
        (Regime::Unavailable, _) => Outcome::Inconclusive,
        (_, true) => Outcome::Fails,
        (_, false) => Outcome::Holds,
    };
    let notes = vec![
        format!("{} at sample", if falsified { "falsified" } else { "holds" }),
        format!("seed {}, {} subsequences of length {max_l}", params.seed, samples.len()),
    ];
    let min = CriterionReport {
        id: CriterionId::LinfAMin,
        matrix: a.descriptor(),
        schedule: dd.describe(),
        trace: worst,
        verdict,
        outcome,
        regime,
        notes,
    };
    Ok(LinfReport {
        bound,
        min,
        samples,
        witnesses,
    })
}

/// `T_n = ||Az - (1/(q-p)) sum_{k=p+1}^{q} A z^(k)||_Y`, with the two terms
/// evaluated as separate row sums (`A z^(k) = sum_{j<=k} z_j a^j`).
pub fn section_test<M>(y: &SpaceId, a: &M, z: &Seq<f64>, d: &DefermentSchedule, params: &CriteriaParams) -> Result<CriterionReport>
where
    M: InfiniteMatrix + Clone + 'static,
{
    let dd = prepared(d, params)?;
    let z_const = z.tail().constant_from();
    let structural = z_const.and_then(|(from, _)| structural_note(a, dd.q(1).max(from)));
    let zeval = Arc::new(RowEval::new(z));
    let trunc_cols = params.i_horizon.unwrap_or(1000);
    assemble(CriterionId::SectionTest(y.name()), a.descriptor(), d, params, structural, |n| {
        let q = dd.q(n);
        let avg = averaged_sections(z, &dd, n)?;
        let aeval = RowEval::new(&avg);
        let (zev, m) = (zeval.clone(), a.clone());
        let residual = move |i: usize| {
            let az = zev.row(&m, i, trunc_cols);
            let aa = aeval.row(&m, i, trunc_cols);
            match (az, aa) {
                (Ok(u), Ok(v)) if u.bound == ErrorBound::Exact && v.bound == ErrorBound::Exact => u.value - v.value,
                _ => f64::NAN,
            }
        };
        let r = match z_const {
            Some((from, c)) => row_profile(a, q.max(from), c, residual),
            None => Seq::from_fn(residual),
        };
        let trunc = row_trunc(&r, params, q + 1);
        let mut report = norm(y, &r, trunc);
        if report.value.is_nan() {
            report.exact = false;
        }
        Ok(report)
    })
}

/// A functional `g` on the domain, represented by its values `g(a^j)` on
/// the columns of `A`.
#[derive(Clone)]
pub enum Functional {
    /// `g(a^j) = a_ij`.
    Coordinate(usize),
    /// `g(a^j) = lim_i a_ij`, read off the far rows.
    Limit,
    Custom { label: String, g: Arc<dyn Fn(usize) -> f64 + Send + Sync> },
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Coordinate(i) => write!(f, "coordinate({i})"),
            Functional::Limit => f.write_str("limit"),
            Functional::Custom { label, .. } => write!(f, "custom({label})"),
        }
    }
}

/// `{z_j g(a^j)} in sigma_p^q[s]` for every enumerated functional `g`.
/// Converged only when every member test converges; diverged when any
/// diverges.
pub fn df_plus_test<M>(
    a: &M,
    z: &Seq<f64>,
    d: &DefermentSchedule,
    functionals: &[Functional],
    params: &DetectParams,
) -> Result<ConvergenceVerdict<f64>>
where
    M: InfiniteMatrix + Clone + 'static,
{
    if functionals.is_empty() {
        return Err(Error::Invalid("no functionals to test".into()));
    }
    let mut combined = Status::Converged;
    let mut diagnostics = Vec::new();
    let mut last = None;
    for g in functionals {
        let m = a.clone();
        let column: Seq<f64> = match g {
            Functional::Coordinate(i) => {
                let i = *i;
                let s = Seq::from_fn(move |j| m.entry(i, j));
                match a.row_support(i)? {
                    Some((_, hi)) => s.with_tail(Tail::EventuallyZero { from: hi + 1 }),
                    None => s,
                }
            }
            Functional::Limit => Seq::from_fn(move |j| match m.far_rows(j) {
                Some(f) if f.shape == FarShape::Frozen => m.entry(f.start, j),
                Some(_) => 0.0,
                None => f64::NAN,
            }),
            Functional::Custom { g, .. } => {
                let g = g.clone();
                Seq::from_fn(move |j| g(j))
            }
        };
        let v = member_sigma_pq_s(&z.mul(&column), d, params)?;
        diagnostics.push(format!("{g:?}: {}", v.status.as_str()));
        combined = match (combined, v.status) {
            (Status::Diverged, _) | (_, Status::Diverged) => Status::Diverged,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Converged,
        };
        last = Some(v);
    }
    let mut v = last.expect("at least one functional");
    v.status = combined;
    if combined != Status::Converged {
        v.limit = None;
    }
    v.diagnostics = diagnostics;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{CatalogMatrix, FnMatrix};

    fn params() -> CriteriaParams {
        CriteriaParams::default()
    }

    #[test]
    fn identity_fails_everywhere() {
        for d in [DefermentSchedule::cesaro(), DefermentSchedule::block(), DefermentSchedule::poly(1, 2).unwrap()] {
            let r = criterion_c_a(&CatalogMatrix::Identity, &d, &params()).unwrap();
            assert!(r.trace.iter().all(|&(_, t)| (t - 1.0).abs() < 1e-12));
            assert_eq!(r.outcome, Outcome::Fails);
        }
    }

    #[test]
    fn difference_is_schedule_sensitive() {
        let r = criterion_c_a(&CatalogMatrix::Difference, &DefermentSchedule::cesaro(), &params()).unwrap();
        for &(n, t) in &r.trace {
            assert!((t - 1.0 / n as f64).abs() < 1e-12);
        }
        assert_eq!(r.outcome, Outcome::Holds);
        let unit = DefermentSchedule::parse("unit").unwrap();
        let r = criterion_c_a(&CatalogMatrix::Difference, &unit, &params()).unwrap();
        assert!(r.trace.iter().all(|&(_, t)| t == 1.0));
        assert_eq!(r.outcome, Outcome::Fails);
    }

    #[test]
    fn l_a_examples() {
        let r = criterion_l_a(&CatalogMatrix::Difference, &DefermentSchedule::cesaro(), &params()).unwrap();
        assert!(r.trace.iter().all(|&(_, t)| (t - 1.0).abs() < 1e-12));
        assert_eq!(r.outcome, Outcome::Fails);
        let first_row = CatalogMatrix::user_table(vec![vec![1.0]]).unwrap();
        let r = criterion_l_a(&first_row, &DefermentSchedule::block(), &params()).unwrap();
        assert!(r.trace.iter().all(|&(_, t)| t == 0.0));
        assert_eq!(r.outcome, Outcome::Holds);
        let r = criterion_l_a(&CatalogMatrix::Zero, &DefermentSchedule::cesaro(), &params()).unwrap();
        assert_eq!(r.outcome, Outcome::Holds);
    }

    #[test]
    fn bv_a_examples() {
        let r = criterion_bv_a(&CatalogMatrix::Zero, &DefermentSchedule::cesaro(), &params()).unwrap();
        assert_eq!(r.outcome, Outcome::Holds);
        let r = criterion_bv_a(&CatalogMatrix::Identity, &DefermentSchedule::cesaro(), &params()).unwrap();
        assert!(r.trace.iter().all(|&(_, t)| t >= 1.0));
        assert_eq!(r.outcome, Outcome::Fails);
        // brute force over i <= 4q: variation of A zeta^n plus its last value
        let d = DefermentSchedule::cesaro();
        let r = criterion_bv_a(&CatalogMatrix::Difference, &d, &params()).unwrap();
        for &(n, t) in r.trace.iter().step_by(23) {
            let (p, q) = d.window(n).unwrap();
            let w = (q - p) as f64;
            let v = |i: usize| (p + 1..=q).map(|k| if k == i { -1.0 } else { 0.0 }).sum::<f64>() / w;
            let brute: f64 = (1..4 * q).map(|i| (v(i) - v(i + 1)).abs()).sum::<f64>() + v(4 * q).abs();
            assert!((t - brute).abs() < 1e-12, "n={n}");
        }
        assert_eq!(r.outcome, Outcome::Holds);
    }

    #[test]
    fn linf_examples() {
        let d = DefermentSchedule::cesaro();
        let r = criterion_linf_a(&CatalogMatrix::Zero, &d, &params()).unwrap();
        assert_eq!(r.bound.outcome, Outcome::Holds);
        assert_eq!(r.min.outcome, Outcome::Holds);
        assert!(r.samples.iter().all(|s| s.values.iter().all(|&v| v == 0.0)));
        let r = criterion_linf_a(&CatalogMatrix::Identity, &d, &params()).unwrap();
        assert_eq!(r.min.outcome, Outcome::Fails);
        assert!(r.samples.iter().all(|s| s.values.iter().all(|&v| v == 1.0)));
        let r = criterion_linf_a(&CatalogMatrix::Difference, &d, &params()).unwrap();
        assert_eq!(r.min.outcome, Outcome::Holds);
        for s in &r.samples {
            for (l, &v) in s.values.iter().enumerate() {
                assert!((v - 1.0 / s.indices[l] as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn section_test_examples() {
        let p = params();
        for a in CatalogMatrix::all() {
            for y in [SpaceId::C, SpaceId::L1, SpaceId::BV] {
                let r = section_test(&y, &a, &Seq::impulse(5), &DefermentSchedule::block(), &p).unwrap();
                assert!(r.trace[10..].iter().all(|&(_, t)| t == 0.0), "{a:?} {y}");
                assert_eq!(r.outcome, Outcome::Holds, "{a:?} {y} {:?} {:?}", &r.trace[..6], r.verdict.diagnostics);
            }
        }
        let d = DefermentSchedule::cesaro();
        let r = section_test(&SpaceId::C, &CatalogMatrix::Difference, &Seq::ones(), &d, &p).unwrap();
        let c = criterion_c_a(&CatalogMatrix::Difference, &d, &p).unwrap();
        for (u, v) in r.trace.iter().zip(&c.trace) {
            assert!((u.1 - v.1).abs() < 1e-10);
        }
        assert_eq!(r.outcome, Outcome::Holds);
        let r = section_test(&SpaceId::C, &CatalogMatrix::Identity, &Seq::ones(), &d, &p).unwrap();
        assert_eq!(r.outcome, Outcome::Fails);
    }

    #[test]
    fn regime_falls_back_to_horizon() {
        let g = FnMatrix::new("geo", |i, j| if j == i { 1.0 } else { 0.0 }, None);
        let r = criterion_c_a(&g, &DefermentSchedule::cesaro(), &params()).unwrap();
        assert_eq!(r.regime, Regime::Unavailable);
        assert_eq!(r.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn df_plus_examples() {
        let d = DefermentSchedule::block();
        let dp = DetectParams::new(1e-6, 16, 300);
        let fs = [Functional::Coordinate(1), Functional::Coordinate(7), Functional::Limit];
        let v = df_plus_test(&CatalogMatrix::Difference, &Seq::finite(vec![1.0, -2.0, 3.0]), &d, &fs, &dp).unwrap();
        assert_eq!(v.status, Status::Converged);
        let v = df_plus_test(&CatalogMatrix::Identity, &Seq::alternating(), &d, &fs, &dp).unwrap();
        assert_eq!(v.status, Status::Converged);
        let row_sum = Functional::Custom {
            label: "row-sum".into(),
            g: Arc::new(|_| 1.0),
        };
        let v = df_plus_test(&CatalogMatrix::Difference, &Seq::ones(), &d, &[row_sum], &dp).unwrap();
        assert_eq!(v.status, Status::Diverged);
    }
}
