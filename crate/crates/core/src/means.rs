//! Deferred and classical Cesaro means, the vectors `zeta^n` and the wedge
//! blocks, and the summation operator `S` with its inverse.

use std::sync::Arc;

use crate::scalar::Scalar;
use crate::schedule::{DefermentSchedule, ScheduleError};
use crate::seq::{Seq, Tail, WindowSums};

/// Partial sums `s_k = x_1 + ... + x_k`, compensated.
pub fn partial_sums<S: Scalar>(x: &Seq<S>) -> Seq<S> {
    let sums = Arc::new(WindowSums::new(x.clone()));
    let tail = match *x.tail() {
        Tail::EventuallyZero { from } => Tail::EventuallyConstant {
            from: from.max(1),
            value: if from > 1 { sums.sum(1, from - 1) } else { S::zero() },
        },
        Tail::EventuallyConstant { from, value } if value == S::zero() => {
            Tail::EventuallyConstant {
                from,
                value: if from > 1 { sums.sum(1, from - 1) } else { S::zero() },
            }
        }
        _ => Tail::Unknown,
    };
    Seq::from_fn(move |k| sums.sum(1, k)).with_tail(tail)
}

/// The summation operator `S x = (x_1, x_1 + x_2, ...)`.
pub fn forward_sum<S: Scalar>(x: &Seq<S>) -> Seq<S> {
    partial_sums(x)
}

/// The inverse `S^{-1} x = (x_1, x_2 - x_1, ...)`.
pub fn backward_diff<S: Scalar>(x: &Seq<S>) -> Seq<S> {
    let tail = match *x.tail() {
        Tail::EventuallyZero { from } => Tail::EventuallyZero { from: from + 1 },
        Tail::EventuallyConstant { from, .. } => Tail::EventuallyZero { from: from + 1 },
        Tail::AbsBound { from, ratio, coeff } => Tail::AbsBound {
            from: from + 1,
            ratio,
            coeff: coeff * (1.0 + 1.0 / ratio),
        },
        _ => Tail::Unknown,
    };
    let x = x.clone();
    Seq::from_fn(move |j| if j == 1 { x.at(1) } else { x.at(j) - x.at(j - 1) }).with_tail(tail)
}

/// Value of `(D_{p,q} x)_n` from precomputed window sums.
pub fn deferred_mean_at<S: Scalar>(
    sums: &WindowSums<S>,
    d: &DefermentSchedule,
    n: usize,
) -> Result<S, ScheduleError> {
    let (p, q) = d.window(n)?;
    Ok(sums.sum(p + 1, q) / (q - p) as f64)
}

/// `(D_{p,q} x)_n = (1/(q(n)-p(n))) sum_{k=p(n)+1}^{q(n)} x_k`.
///
/// The schedule is validated on `[1, d.horizon()]`; coordinates past the
/// horizon where the schedule breaks evaluate to NaN.
pub fn deferred_mean<S: Scalar>(x: &Seq<S>, d: &DefermentSchedule) -> Result<Seq<S>, ScheduleError> {
    for n in 1..=d.horizon() {
        d.window(n)?;
    }
    let tail = match *x.tail() {
        // A constant tail c gives means equal to c once p(n) passes the
        // explicit head; only structurally unbounded p guarantees that.
        Tail::EventuallyConstant { value, from } if from <= 1 => {
            Tail::EventuallyConstant { from: 1, value }
        }
        Tail::EventuallyZero { from } if from <= 1 => Tail::EventuallyZero { from: 1 },
        _ => Tail::Unknown,
    };
    let sums = Arc::new(WindowSums::new(x.clone()));
    let d = d.clone();
    Ok(Seq::from_fn(move |n| {
        deferred_mean_at(&sums, &d, n).unwrap_or_else(|_| S::from_real(f64::NAN))
    })
    .with_tail(tail))
}

/// Classical Cesaro mean `(1/n) sum_{k<=n} x_k`, the specialization
/// `p = 0`, `q(n) = n`.
pub fn cesaro_mean<S: Scalar>(x: &Seq<S>) -> Seq<S> {
    deferred_mean(x, &DefermentSchedule::cesaro()).expect("cesaro windows are always valid")
}

/// `zeta^n = e - (1/(q-p)) sum_{k=p+1}^{q} e^(k)`.
///
/// Coordinate `j` is `1 - #{k in (p, q] : k >= j} / (q - p)`: zero up to
/// `p + 1`, then `1/(q-p), 2/(q-p), ...`, and one from `q + 1` on.
pub fn zeta<S: Scalar>(d: &DefermentSchedule, n: usize) -> Result<Seq<S>, ScheduleError> {
    let (p, q) = d.window(n)?;
    let w = q - p;
    Ok(Seq::from_fn(move |j| {
        let covering = if j <= p + 1 {
            w
        } else if j <= q {
            q - j + 1
        } else {
            0
        };
        S::from_real((w - covering) as f64 / w as f64)
    })
    .with_tail(Tail::EventuallyConstant {
        from: q + 1,
        value: S::one(),
    }))
}

/// The deferred wedge block `(1/(q-p)) sum_{k=p+1}^{q} delta^k`.
pub fn deferred_wedge_elem<S: Scalar>(d: &DefermentSchedule, n: usize) -> Result<Seq<S>, ScheduleError> {
    let (p, q) = d.window(n)?;
    let h = 1.0 / (q - p) as f64;
    Ok(Seq::from_fn(move |j| {
        if j > p && j <= q {
            S::from_real(h)
        } else {
            S::zero()
        }
    })
    .with_tail(Tail::EventuallyZero { from: q + 1 }))
}

/// Averaged sections `(1/(q-p)) sum_{k=p+1}^{q} x^(k)`; coordinate `j` is
/// `x_j * #{k in (p, q] : k >= j} / (q - p)`.
pub fn averaged_sections<S: Scalar>(x: &Seq<S>, d: &DefermentSchedule, n: usize) -> Result<Seq<S>, ScheduleError> {
    let (p, q) = d.window(n)?;
    let w = (q - p) as f64;
    let xc = x.clone();
    let tail = match *x.tail() {
        Tail::EventuallyZero { from } => Tail::EventuallyZero { from: from.min(q + 1) },
        _ => Tail::EventuallyZero { from: q + 1 },
    };
    Ok(Seq::from_fn(move |j| {
        let covering = if j <= p + 1 {
            q - p
        } else if j <= q {
            q - j + 1
        } else {
            0
        };
        xc.at(j) * (covering as f64 / w)
    })
    .with_tail(tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_window_mean(x: &Seq, p: usize, q: usize) -> f64 {
        let mut s = 0.0;
        for k in p + 1..=q {
            s += x.at(k);
        }
        s / (q - p) as f64
    }

    #[test]
    fn partial_sums_examples() {
        assert_eq!(partial_sums(&Seq::<f64>::impulse(3)).head(5), vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(partial_sums(&Seq::<f64>::ones()).head(4), vec![1.0, 2.0, 3.0, 4.0]);
        // direct summation oracle for the alternating series
        let alt = Seq::alternating();
        let mut running = 0.0;
        let expected: Vec<f64> = (1..=8)
            .map(|k| {
                running += if k % 2 == 1 { 1.0 } else { -1.0 };
                running
            })
            .collect();
        assert_eq!(partial_sums(&alt).head(8), expected);
        assert_eq!(expected, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn partial_sums_tail_becomes_constant() {
        let s = partial_sums(&Seq::finite(vec![1.0, 2.0, -0.5]));
        assert_eq!(s.tail(), &Tail::EventuallyConstant { from: 4, value: 2.5 });
        assert_eq!(s.tail_consistent(10, 10), Ok(()));
    }

    #[test]
    fn deferred_mean_examples() {
        let c = DefermentSchedule::cesaro();
        let x = Seq::random(5, 0.0);
        let m = deferred_mean(&x, &c).unwrap();
        for n in [1, 2, 10, 77] {
            assert!((m.at(n) - naive_window_mean(&x, 0, n)).abs() < 1e-14);
        }
        let k = Seq::from_fn(|k| k as f64);
        let b = deferred_mean(&k, &DefermentSchedule::block()).unwrap();
        for n in [1usize, 2, 3, 50, 999] {
            // brute-force window sum (1/n) sum_{k=n+1}^{2n} k
            let brute = naive_window_mean(&k, n, 2 * n);
            assert_eq!(brute, (3 * n + 1) as f64 / 2.0);
            assert_eq!(b.at(n), brute);
        }
        let c7 = deferred_mean(&Seq::constant(7.25), &DefermentSchedule::block()).unwrap();
        assert_eq!(c7.head(5), vec![7.25; 5]);
    }

    #[test]
    fn deferred_mean_rejects_bad_schedule() {
        let bad = DefermentSchedule::custom("bad", |n| if n == 3 { 5 } else { 0 }, |n| n, false)
            .with_horizon(10);
        assert_eq!(
            deferred_mean(&Seq::<f64>::ones(), &bad).unwrap_err(),
            ScheduleError::Violation { n: 3, p: 5, q: 3 }
        );
    }

    #[test]
    fn cesaro_mean_examples() {
        assert_eq!(cesaro_mean(&Seq::<f64>::ones()).head(3), vec![1.0; 3]);
        let alt = cesaro_mean(&Seq::alternating());
        for m in 1..20 {
            assert_eq!(alt.at(2 * m), 0.0);
        }
        let alt_sums = cesaro_mean(&partial_sums(&Seq::alternating()));
        for m in 1..20 {
            assert_eq!(alt_sums.at(2 * m), 0.5);
        }
        let d1 = cesaro_mean(&Seq::<f64>::impulse(1));
        for n in 1..30 {
            assert_eq!(d1.at(n), 1.0 / n as f64);
        }
    }

    #[test]
    fn zeta_displayed_coordinates() {
        let d = DefermentSchedule::custom("p2q6", |_| 2, |n| 5 + n, true);
        let z: Seq = zeta(&d, 1).unwrap();
        assert_eq!(z.head(9), vec![0.0, 0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0, 1.0]);
        let z01: Seq = zeta(&DefermentSchedule::cesaro(), 1).unwrap();
        assert_eq!(z01.head(4), vec![0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn zeta_is_e_minus_averaged_sections() {
        let d = DefermentSchedule::block();
        for n in 1..12 {
            let (p, q) = d.window(n).unwrap();
            let z: Seq = zeta(&d, n).unwrap();
            for j in 1..=3 * q {
                let avg: f64 = (p + 1..=q).filter(|&k| j <= k).count() as f64 / (q - p) as f64;
                assert!((z.at(j) - (1.0 - avg)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn wedge_block() {
        let d = DefermentSchedule::custom("p2q6", |_| 2, |n| 5 + n, true);
        let w: Seq = deferred_wedge_elem(&d, 1).unwrap();
        assert_eq!(w.head(8), vec![0.0, 0.0, 0.25, 0.25, 0.25, 0.25, 0.0, 0.0]);
        let d1: Seq = deferred_wedge_elem(&DefermentSchedule::cesaro(), 1).unwrap();
        assert_eq!(d1.head(3), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn summation_operator_examples() {
        assert_eq!(forward_sum(&Seq::<f64>::impulse(1)).head(5), vec![1.0; 5]);
        assert_eq!(backward_diff(&Seq::<f64>::ones()).head(4), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(backward_diff(&Seq::<f64>::ones()).tail(), &Tail::EventuallyZero { from: 2 });
    }

    #[test]
    fn summed_wedge_is_shifted_zeta() {
        // coordinate oracle: S(wedge)_j = #{k in (p,q] : k <= j}/(q-p) = zeta_{j+1}
        for d in [DefermentSchedule::cesaro(), DefermentSchedule::block()] {
            for n in 1..15 {
                let s: Seq = forward_sum(&deferred_wedge_elem(&d, n).unwrap());
                let z: Seq = zeta(&d, n).unwrap();
                for j in 1..60 {
                    assert!((s.at(j) - z.at(j + 1)).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn averaged_sections_of_ones_complement_zeta() {
        let d = DefermentSchedule::cesaro();
        let avg: Seq = averaged_sections(&Seq::ones(), &d, 6).unwrap();
        let z: Seq = zeta(&d, 6).unwrap();
        for j in 1..20 {
            assert_eq!(avg.at(j) + z.at(j), 1.0);
        }
    }
}
