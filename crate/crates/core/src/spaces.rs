//! Concrete sequence spaces, their norms at finite truncation, and the
//! `sigma_p^q[s]` membership and dual-pair tests.

use std::fmt;
use std::str::FromStr;

use crate::convergence::{detect_limit, ConvergenceVerdict, DetectParams};
use crate::error::{Error, Result};
use crate::means::{averaged_sections, deferred_mean, partial_sums};
use crate::scalar::{Compensated, Scalar};
use crate::schedule::DefermentSchedule;
use crate::seq::{Seq, Tail, WindowSums};

/// Remainders below this count as exact.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum SpaceId {
    /// Convergent sequences, sup norm.
    C,
    /// Null sequences, sup norm.
    C0,
    /// Absolutely summable sequences.
    L1,
    /// Bounded variation: `sum |x_i - x_{i+1}| + lim |x_i|`.
    BV,
    /// Bounded variation and null: `sum |x_i - x_{i+1}|`.
    BV0,
    /// Bounded sequences, sup norm.
    LInf,
    /// `sigma_p^q[s]` with `||x|| = sup_n |(D_{p,q} S x)_n|`.
    SigmaPqS(DefermentSchedule),
}

impl SpaceId {
    pub fn name(&self) -> String {
        match self {
            SpaceId::C => "c".into(),
            SpaceId::C0 => "c0".into(),
            SpaceId::L1 => "l".into(),
            SpaceId::BV => "bv".into(),
            SpaceId::BV0 => "bv0".into(),
            SpaceId::LInf => "linf".into(),
            SpaceId::SigmaPqS(d) => format!("sigma[{}]", d.describe()),
        }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SpaceId {
    type Err = Error;

    /// Parses the schedule-free spaces; `sigma` needs a schedule and is
    /// built with [`SpaceId::SigmaPqS`].
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "c" => SpaceId::C,
            "c0" => SpaceId::C0,
            "l" | "l1" => SpaceId::L1,
            "bv" => SpaceId::BV,
            "bv0" => SpaceId::BV0,
            "linf" | "l_inf" | "linfty" => SpaceId::LInf,
            other => return Err(Error::Invalid(format!("unknown space '{other}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport {
    pub value: f64,
    /// True when tail descriptors bound the truncation error below
    /// [`EXACT_TOL`].
    pub exact: bool,
    pub trunc: usize,
}

/// `||x||` in `space`, truncated at coordinate `trunc` (or later when a
/// tail descriptor needs a longer explicit head).
pub fn norm<S: Scalar>(space: &SpaceId, x: &Seq<S>, trunc: usize) -> NormReport {
    let trunc = trunc.max(1);
    match space {
        SpaceId::C | SpaceId::C0 | SpaceId::LInf => sup_norm(x, trunc),
        SpaceId::L1 => l1_norm(x, trunc),
        SpaceId::BV => bv_norm(x, trunc, true),
        SpaceId::BV0 => bv_norm(x, trunc, false),
        SpaceId::SigmaPqS(d) => sigma_norm(x, d, trunc),
    }
}

fn sup_norm<S: Scalar>(x: &Seq<S>, trunc: usize) -> NormReport {
    let head_max = |m: usize| (1..=m).map(|j| x.at(j).modulus()).fold(0.0f64, f64::max);
    match *x.tail() {
        Tail::EventuallyZero { from } => {
            let m = from.saturating_sub(1);
            NormReport {
                value: head_max(m.min(trunc)),
                exact: m <= trunc,
                trunc,
            }
        }
        Tail::EventuallyConstant { from, value } => {
            let m = from.saturating_sub(1);
            NormReport {
                value: head_max(m.min(trunc)).max(value.modulus()),
                exact: m <= trunc,
                trunc,
            }
        }
        Tail::EventuallyMonotone { from, limit, .. } => {
            let m = from.min(trunc);
            NormReport {
                value: head_max(m).max(limit.modulus()),
                exact: from <= trunc,
                trunc,
            }
        }
        Tail::AbsBound { from, ratio, coeff } => {
            let value = head_max(trunc);
            let beyond = coeff * ratio.powf(from.max(trunc + 1) as f64);
            NormReport {
                value,
                exact: beyond <= value || beyond < EXACT_TOL,
                trunc,
            }
        }
        Tail::Unknown => NormReport {
            value: head_max(trunc),
            exact: false,
            trunc,
        },
    }
}

fn l1_norm<S: Scalar>(x: &Seq<S>, trunc: usize) -> NormReport {
    let head = |m: usize| {
        let mut acc = Compensated::<f64>::zero();
        for j in 1..=m {
            acc.add(x.at(j).modulus());
        }
        acc.value()
    };
    match *x.tail() {
        Tail::EventuallyZero { from } => {
            let m = from.saturating_sub(1);
            NormReport {
                value: head(m.min(trunc)),
                exact: m <= trunc,
                trunc,
            }
        }
        Tail::EventuallyConstant { value, .. } if value != S::zero() => NormReport {
            value: f64::INFINITY,
            exact: true,
            trunc,
        },
        Tail::EventuallyConstant { from, .. } => {
            let m = from.saturating_sub(1);
            NormReport {
                value: head(m.min(trunc)),
                exact: m <= trunc,
                trunc,
            }
        }
        Tail::EventuallyMonotone {
            from,
            limit,
            summable,
        } => {
            let m = from.min(trunc);
            if limit != S::zero() {
                return NormReport {
                    value: f64::INFINITY,
                    exact: true,
                    trunc,
                };
            }
            if x.at(from) == S::zero() {
                return NormReport {
                    value: head(m.min(from - 1)),
                    exact: from <= trunc + 1,
                    trunc,
                };
            }
            if summable == Some(false) {
                return NormReport {
                    value: f64::INFINITY,
                    exact: true,
                    trunc,
                };
            }
            NormReport {
                value: head(trunc),
                exact: false,
                trunc,
            }
        }
        Tail::AbsBound { from, ratio, coeff } => {
            let start = from.max(trunc + 1);
            let remainder = coeff * ratio.powf(start as f64) / (1.0 - ratio);
            NormReport {
                value: head(trunc),
                exact: remainder < EXACT_TOL,
                trunc,
            }
        }
        Tail::Unknown => NormReport {
            value: head(trunc),
            exact: false,
            trunc,
        },
    }
}

fn bv_norm<S: Scalar>(x: &Seq<S>, trunc: usize, with_limit: bool) -> NormReport {
    // sum_{j=1}^{m-1} |x_j - x_{j+1}|
    let variation = |m: usize| {
        let mut acc = Compensated::<f64>::zero();
        let mut prev = x.at(1);
        for j in 2..=m {
            let cur = x.at(j);
            acc.add((prev - cur).modulus());
            prev = cur;
        }
        acc.value()
    };
    let lim_term = |l: S| if with_limit { l.modulus() } else { 0.0 };
    match *x.tail() {
        Tail::EventuallyZero { from } | Tail::EventuallyConstant { from, .. } => {
            let value = x.tail().constant_from().map(|(_, v)| v).unwrap_or_else(S::zero);
            let m = from.max(2);
            NormReport {
                value: variation(m.min(trunc.max(2))) + lim_term(value),
                exact: m <= trunc.max(2),
                trunc,
            }
        }
        Tail::EventuallyMonotone { from, limit, .. } => {
            let m = from.max(1);
            NormReport {
                value: variation(m.min(trunc.max(1))) + (x.at(m) - limit).modulus() + lim_term(limit),
                exact: m <= trunc.max(1),
                trunc,
            }
        }
        Tail::AbsBound { from, ratio, coeff } => {
            let start = from.max(trunc + 1);
            let remainder = 2.0 * coeff * ratio.powf(start as f64) / (1.0 - ratio);
            NormReport {
                value: variation(trunc + 1),
                exact: remainder < EXACT_TOL,
                trunc,
            }
        }
        Tail::Unknown => {
            let mut value = variation(trunc);
            if with_limit {
                let params = DetectParams::new(1e-8, 16.min(trunc.max(2)), trunc.max(2));
                match detect_limit(|j| x.at(j), &params) {
                    Ok(v) if v.is_converged() => value += v.limit_or_nan().modulus(),
                    _ => value += x.at(trunc).modulus(),
                }
            }
            NormReport {
                value,
                exact: false,
                trunc,
            }
        }
    }
}

fn sigma_norm<S: Scalar>(x: &Seq<S>, d: &DefermentSchedule, trunc: usize) -> NormReport {
    let sums = partial_sums(x);
    let w = WindowSums::new(sums.clone());
    let mut value = 0.0f64;
    for n in 1..=trunc {
        match crate::means::deferred_mean_at(&w, d, n) {
            Ok(v) => value = value.max(v.modulus()),
            Err(_) => {
                return NormReport {
                    value: f64::NAN,
                    exact: false,
                    trunc,
                }
            }
        }
    }
    let mut exact = false;
    if let Some((from, limit)) = sums.tail().constant_from() {
        if let Ok((p, q)) = d.window(trunc) {
            let settled = d.is_monotone() && p + 1 >= from;
            let monotone_tail = d.constant_p().is_some() && q + 1 >= from;
            if settled || monotone_tail {
                value = value.max(limit.modulus());
                exact = true;
            }
        }
    }
    NormReport { value, exact, trunc }
}

/// `sup_k |x_1 + ... + x_k|` over `k <= trunc` (the `cs` norm, used for
/// `phi` inclusion checks).
pub fn cs_norm<S: Scalar>(x: &Seq<S>, trunc: usize) -> NormReport {
    let sums = partial_sums(x);
    let mut report = sup_norm(&sums, trunc);
    if sums.tail().is_unknown() {
        report.exact = false;
    }
    report
}

fn horizon_schedule(d: &DefermentSchedule, params: &DetectParams) -> Result<DefermentSchedule> {
    let d = d.clone().with_horizon(params.horizon);
    for n in 1..=d.horizon() {
        d.window(n)?;
    }
    Ok(d)
}

/// `x in sigma_p^q[s]`: does `(D_{p,q} S x)_n` converge?
pub fn member_sigma_pq_s<S: Scalar>(
    x: &Seq<S>,
    d: &DefermentSchedule,
    params: &DetectParams,
) -> Result<ConvergenceVerdict<S>> {
    let d = horizon_schedule(d, params)?;
    let means = deferred_mean(&partial_sums(x), &d)?;
    Ok(detect_limit(|n| means.at(n), params)?)
}

/// `x.y in sigma_p^q[s]`, the pairwise test behind the d-dual.
pub fn d_dual_test<S: Scalar>(
    x: &Seq<S>,
    y: &Seq<S>,
    d: &DefermentSchedule,
    params: &DetectParams,
) -> Result<ConvergenceVerdict<S>> {
    member_sigma_pq_s(&x.mul(y), d, params)
}

/// The sigma-dual pair test: `lim_n (1/n) sum_{k<=n} sum_{j<=k} x_j y_j`.
pub fn sigma_dual_test<S: Scalar>(x: &Seq<S>, y: &Seq<S>, params: &DetectParams) -> Result<ConvergenceVerdict<S>> {
    d_dual_test(x, y, &DefermentSchedule::cesaro(), params)
}

/// `sigma_p^q[K]` at truncation: `T_n = ||x - (1/(q-p)) sum_k x^(k)||` in
/// `space`, classified by the detector. The property holds when the verdict
/// converges to zero.
pub fn sigma_pq_k_test<S: Scalar>(
    space: &SpaceId,
    x: &Seq<S>,
    d: &DefermentSchedule,
    trunc: usize,
    params: &DetectParams,
) -> Result<ConvergenceVerdict<f64>> {
    let d = horizon_schedule(d, params)?;
    let mut values = Vec::with_capacity(params.horizon);
    for n in 1..=params.horizon {
        let residual = x.sub(&averaged_sections(x, &d, n)?);
        let q = d.q(n);
        values.push(norm(space, &residual, trunc.max(q + 1)).value);
    }
    Ok(detect_limit(|n| values[n - 1], params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::Status;
    use crate::means::zeta;

    #[test]
    fn sup_norm_of_zeta_is_one() {
        for d in [DefermentSchedule::cesaro(), DefermentSchedule::block()] {
            for n in [1, 5, 40] {
                let r = norm(&SpaceId::LInf, &zeta::<f64>(&d, n).unwrap(), 3);
                assert_eq!(r.value, 1.0);
            }
        }
    }

    #[test]
    fn l1_of_impulse() {
        let r = norm(&SpaceId::L1, &Seq::<f64>::impulse(3), 10);
        assert_eq!(r, NormReport { value: 1.0, exact: true, trunc: 10 });
        let r = norm(&SpaceId::L1, &Seq::<f64>::ones(), 10);
        assert_eq!(r.value, f64::INFINITY);
    }

    #[test]
    fn sigma_norm_of_first_impulse() {
        // partial sums of delta^1 are all 1; brute-force sup of their means
        let brute = (1..=100)
            .map(|n| (1..=n).map(|_| 1.0).sum::<f64>() / n as f64)
            .fold(0.0f64, f64::max);
        let r = norm(&SpaceId::SigmaPqS(DefermentSchedule::cesaro()), &Seq::<f64>::impulse(1), 100);
        assert_eq!(r.value, brute);
        assert!(r.exact);
    }

    #[test]
    fn bv_norm_uses_limit_term() {
        let x: Seq = Seq::eventually_constant(vec![0.0, 2.0], 1.0);
        // |0-2| + |2-1| + lim 1
        assert_eq!(norm(&SpaceId::BV, &x, 10).value, 4.0);
        assert_eq!(norm(&SpaceId::BV0, &x, 10).value, 3.0);
        let geometric: Seq = Seq::from_fn(|j| 0.5f64.powi(j as i32)).with_tail(Tail::AbsBound {
            from: 1,
            ratio: 0.5,
            coeff: 1.0,
        });
        let r = norm(&SpaceId::BV, &geometric, 60);
        assert!((r.value - 0.5).abs() < 1e-15);
        assert!(r.exact);
    }

    #[test]
    fn monotone_tail_norms() {
        let x: Seq = Seq::from_fn(|j| 1.0 - 1.0 / j as f64).with_tail(Tail::EventuallyMonotone {
            from: 1,
            limit: 1.0,
            summable: Some(false),
        });
        assert_eq!(norm(&SpaceId::LInf, &x, 5), NormReport { value: 1.0, exact: true, trunc: 5 });
        assert_eq!(norm(&SpaceId::BV, &x, 5).value, 2.0);
        assert_eq!(norm(&SpaceId::L1, &x, 5).value, f64::INFINITY);
    }

    #[test]
    fn membership_examples() {
        let params = DetectParams::new(1e-9, 16, 2000);
        let v = member_sigma_pq_s(&Seq::<f64>::impulse(1), &DefermentSchedule::block(), &params).unwrap();
        assert_eq!(v.limit, Some(1.0));
        let params = DetectParams::new(1e-3, 16, 10_000);
        let v = member_sigma_pq_s(&Seq::alternating(), &DefermentSchedule::cesaro(), &params).unwrap();
        assert!((v.limit.unwrap() - 0.5).abs() < 1e-3);
        let v = member_sigma_pq_s(&Seq::<f64>::ones(), &DefermentSchedule::cesaro(), &params).unwrap();
        assert_eq!(v.status, Status::Diverged);
    }

    #[test]
    fn dual_pair_examples() {
        let params = DetectParams::new(1e-9, 16, 500);
        let v = d_dual_test(&Seq::<f64>::ones(), &Seq::impulse(1), &DefermentSchedule::block(), &params).unwrap();
        assert_eq!(v.limit, Some(1.0));
        let v = d_dual_test(&Seq::random(1, 0.0), &Seq::zero(), &DefermentSchedule::block(), &params).unwrap();
        assert_eq!(v.limit, Some(0.0));
        let v = sigma_dual_test(&Seq::<f64>::impulse(1), &Seq::ones(), &params).unwrap();
        assert_eq!(v.limit, Some(1.0));
        let v = sigma_dual_test(&Seq::<f64>::ones(), &Seq::ones(), &params).unwrap();
        assert!(!v.is_converged());
    }

    #[test]
    fn inverse_squares_dual_pair_reaches_basel_sum() {
        // brute-force oracle, frozen: (1/N) sum_{k<=N} sum_{j<=k} 1/j^2 at N = 10^4
        let n = 10_000usize;
        let mut s = 0.0;
        let mut total = 0.0;
        for k in 1..=n {
            s += 1.0 / (k * k) as f64;
            total += s;
        }
        let brute = total / n as f64;
        let basel = std::f64::consts::PI.powi(2) / 6.0;
        assert!((brute - basel).abs() < 1e-3);
        let params = DetectParams::new(1e-5, 16, n);
        let x = Seq::harmonic_power(2.0);
        let v = d_dual_test(&x, &Seq::ones(), &DefermentSchedule::cesaro(), &params).unwrap();
        assert!(v.is_converged());
        assert!((v.limit.unwrap() - basel).abs() < 1e-3);
        assert!((v.trace[n - 1].1 - brute).abs() < 1e-12);
    }

    #[test]
    fn k_property_examples() {
        let params = DetectParams::new(1e-9, 16, 200);
        for space in [SpaceId::C, SpaceId::C0, SpaceId::L1, SpaceId::BV, SpaceId::LInf] {
            let v = sigma_pq_k_test(&space, &Seq::<f64>::impulse(5), &DefermentSchedule::block(), 10, &params).unwrap();
            assert!(v.converged_to_zero(1e-12), "{space}");
        }
        let v = sigma_pq_k_test(&SpaceId::LInf, &Seq::<f64>::ones(), &DefermentSchedule::cesaro(), 10, &params).unwrap();
        assert!(v.trace.iter().all(|&(_, t)| t == 1.0));
        assert!(!v.converged_to_zero(1e-2));
    }

    #[test]
    fn space_names_parse() {
        for s in ["c", "c0", "l", "bv", "bv0", "linf"] {
            assert_eq!(s.parse::<SpaceId>().unwrap().name(), s);
        }
        assert!("sigma".parse::<SpaceId>().is_err());
    }
}
