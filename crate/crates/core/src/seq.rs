//! Lazy scalar sequences indexed from 1.

use std::fmt;
use std::sync::{Arc, RwLock};

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Compensated, Scalar};

/// What is known about a sequence beyond some index.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail<S> {
    /// `x_j = 0` for all `j >= from`.
    EventuallyZero { from: usize },
    /// `x_j = value` for all `j >= from`.
    EventuallyConstant { from: usize, value: S },
    /// `|x_j| <= coeff * ratio^j` for all `j >= from`, with `ratio < 1`.
    AbsBound { from: usize, ratio: f64, coeff: f64 },
    /// For `j >= from` the terms move monotonically along the segment from
    /// `x_from` to `limit`: `x_j = limit + t_j (x_from - limit)` with `t_j`
    /// nonincreasing in `[0, 1]` and `t_j -> 0`. `summable` says whether
    /// `sum |x_j - limit|` is finite, when known.
    EventuallyMonotone {
        from: usize,
        limit: S,
        summable: Option<bool>,
    },
    Unknown,
}

impl<S: Scalar> Tail<S> {
    pub fn is_unknown(&self) -> bool {
        matches!(self, Tail::Unknown)
    }

    /// First index from which the descriptor applies.
    pub fn from(&self) -> Option<usize> {
        match *self {
            Tail::EventuallyZero { from }
            | Tail::EventuallyConstant { from, .. }
            | Tail::AbsBound { from, .. }
            | Tail::EventuallyMonotone { from, .. } => Some(from),
            Tail::Unknown => None,
        }
    }

    /// Index from which the sequence is a known constant, with that constant.
    pub fn constant_from(&self) -> Option<(usize, S)> {
        match *self {
            Tail::EventuallyZero { from } => Some((from, S::zero())),
            Tail::EventuallyConstant { from, value } => Some((from, value)),
            _ => None,
        }
    }

    fn scaled(&self, c: S) -> Tail<S> {
        match *self {
            Tail::EventuallyZero { from } => Tail::EventuallyZero { from },
            Tail::EventuallyConstant { from, value } => Tail::EventuallyConstant {
                from,
                value: value * c,
            },
            Tail::AbsBound { from, ratio, coeff } => Tail::AbsBound {
                from,
                ratio,
                coeff: coeff * c.modulus(),
            },
            Tail::EventuallyMonotone {
                from,
                limit,
                summable,
            } => Tail::EventuallyMonotone {
                from,
                limit: limit * c,
                summable,
            },
            Tail::Unknown => Tail::Unknown,
        }
    }

    fn sum(&self, other: &Tail<S>) -> Tail<S> {
        use Tail::*;
        if let (Some((f1, v1)), Some((f2, v2))) = (self.constant_from(), other.constant_from()) {
            let from = f1.max(f2);
            let value = v1 + v2;
            return if value == S::zero() {
                EventuallyZero { from }
            } else {
                EventuallyConstant { from, value }
            };
        }
        match (self, other) {
            (EventuallyZero { from: f1 }, AbsBound { from: f2, ratio, coeff })
            | (AbsBound { from: f2, ratio, coeff }, EventuallyZero { from: f1 }) => AbsBound {
                from: (*f1).max(*f2),
                ratio: *ratio,
                coeff: *coeff,
            },
            (
                AbsBound {
                    from: f1,
                    ratio: r1,
                    coeff: c1,
                },
                AbsBound {
                    from: f2,
                    ratio: r2,
                    coeff: c2,
                },
            ) => AbsBound {
                from: (*f1).max(*f2),
                ratio: r1.max(*r2),
                coeff: c1 + c2,
            },
            (EventuallyZero { from: f1 }, EventuallyMonotone { from: f2, limit, summable })
            | (EventuallyMonotone { from: f2, limit, summable }, EventuallyZero { from: f1 }) => {
                EventuallyMonotone {
                    from: (*f1).max(*f2),
                    limit: *limit,
                    summable: *summable,
                }
            }
            _ => Unknown,
        }
    }

    fn product(&self, other: &Tail<S>) -> Tail<S> {
        use Tail::*;
        match (self, other) {
            (EventuallyZero { from: f1 }, _) | (_, EventuallyZero { from: f1 }) => {
                EventuallyZero { from: *f1 }
            }
            (EventuallyConstant { from: f1, value: v1 }, EventuallyConstant { from: f2, value: v2 }) => {
                EventuallyConstant {
                    from: (*f1).max(*f2),
                    value: *v1 * *v2,
                }
            }
            (EventuallyConstant { from: f1, value }, AbsBound { from: f2, ratio, coeff })
            | (AbsBound { from: f2, ratio, coeff }, EventuallyConstant { from: f1, value }) => {
                AbsBound {
                    from: (*f1).max(*f2),
                    ratio: *ratio,
                    coeff: coeff * value.modulus(),
                }
            }
            _ => Unknown,
        }
    }
}

type Accessor<S> = Arc<dyn Fn(usize) -> S + Send + Sync>;

/// A lazily evaluated sequence `(x_1, x_2, ...)` with an optional tail
/// descriptor. Coordinates are 1-based; `at(0)` is a logic error.
#[derive(Clone)]
pub struct Seq<S = f64> {
    at: Accessor<S>,
    tail: Tail<S>,
}

impl<S: Scalar> fmt::Debug for Seq<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<S> = (1..=6).map(|j| self.at(j)).collect();
        f.debug_struct("Seq")
            .field("head", &head)
            .field("tail", &self.tail)
            .finish()
    }
}

impl<S: Scalar> Seq<S> {
    /// Sequence given by a coordinate rule with no tail information.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> S + Send + Sync + 'static,
    {
        Seq {
            at: Arc::new(f),
            tail: Tail::Unknown,
        }
    }

    /// Attaches a tail descriptor. The caller vouches for it; use
    /// [`Seq::tail_consistent`] to spot-check.
    pub fn with_tail(mut self, tail: Tail<S>) -> Self {
        self.tail = tail;
        self
    }

    pub fn at(&self, j: usize) -> S {
        debug_assert!(j >= 1, "sequences are 1-indexed");
        (self.at)(j)
    }

    pub fn tail(&self) -> &Tail<S> {
        &self.tail
    }

    /// Coordinates `1..=n`.
    pub fn head(&self, n: usize) -> Vec<S> {
        (1..=n).map(|j| self.at(j)).collect()
    }

    pub fn zero() -> Self {
        Seq::from_fn(|_| S::zero()).with_tail(Tail::EventuallyZero { from: 1 })
    }

    pub fn constant(c: S) -> Self {
        Seq::from_fn(move |_| c).with_tail(Tail::EventuallyConstant { from: 1, value: c })
    }

    /// `e = (1, 1, 1, ...)`.
    pub fn ones() -> Self {
        Seq::constant(S::one())
    }

    /// `delta^j`, the unit vector with a one in position `j`.
    pub fn impulse(j: usize) -> Self {
        assert!(j >= 1, "impulse position is 1-based");
        Seq::from_fn(move |i| if i == j { S::one() } else { S::zero() })
            .with_tail(Tail::EventuallyZero { from: j + 1 })
    }

    /// `e^(k) = delta^1 + ... + delta^k`.
    pub fn section_of_ones(k: usize) -> Self {
        Seq::from_fn(move |i| if i <= k { S::one() } else { S::zero() })
            .with_tail(Tail::EventuallyZero { from: k + 1 })
    }

    /// Finitely supported sequence with the given leading coordinates.
    pub fn finite(values: Vec<S>) -> Self {
        let from = values.len() + 1;
        let values = Arc::new(values);
        Seq::from_fn(move |j| values.get(j - 1).copied().unwrap_or_else(S::zero))
            .with_tail(Tail::EventuallyZero { from })
    }

    /// Explicit head followed by a constant.
    pub fn eventually_constant(head: Vec<S>, value: S) -> Self {
        let from = head.len() + 1;
        let head = Arc::new(head);
        Seq::from_fn(move |j| head.get(j - 1).copied().unwrap_or(value))
            .with_tail(Tail::EventuallyConstant { from, value })
    }

    /// The section `x^(k) = sum_{j<=k} x_j delta^j`.
    pub fn section(&self, k: usize) -> Self {
        let x = self.clone();
        Seq::from_fn(move |j| if j <= k { x.at(j) } else { S::zero() })
            .with_tail(Tail::EventuallyZero { from: k + 1 })
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(usize, S) -> S + Send + Sync + 'static,
    {
        let x = self.clone();
        Seq::from_fn(move |j| f(j, x.at(j)))
    }

    pub fn scale(&self, c: S) -> Self {
        let x = self.clone();
        Seq::from_fn(move |j| x.at(j) * c).with_tail(self.tail.scaled(c))
    }

    pub fn add(&self, other: &Seq<S>) -> Self {
        let (x, y) = (self.clone(), other.clone());
        Seq::from_fn(move |j| x.at(j) + y.at(j)).with_tail(self.tail.sum(&other.tail))
    }

    pub fn sub(&self, other: &Seq<S>) -> Self {
        self.add(&other.scale(-S::one()))
    }

    /// Coordinatewise product `x.y = (x_j y_j)`.
    pub fn mul(&self, other: &Seq<S>) -> Self {
        let (x, y) = (self.clone(), other.clone());
        Seq::from_fn(move |j| x.at(j) * y.at(j)).with_tail(self.tail.product(&other.tail))
    }

    /// `alpha x + beta y`.
    pub fn linear_combination(alpha: S, x: &Seq<S>, beta: S, y: &Seq<S>) -> Self {
        x.scale(alpha).add(&y.scale(beta))
    }

    /// Spot-checks the tail descriptor at `samples` indices past its start
    /// (plus a few beyond `horizon`). Returns the first offending index.
    pub fn tail_consistent(&self, horizon: usize, samples: usize) -> Result<(), usize> {
        let Some(from) = self.tail.from() else {
            return Ok(());
        };
        let stop = from.max(horizon) + samples.max(1);
        let step = ((stop - from) / samples.max(1)).max(1);
        let mut j = from;
        while j <= stop {
            let v = self.at(j);
            let ok = match self.tail {
                Tail::EventuallyZero { .. } => v == S::zero(),
                Tail::EventuallyConstant { value, .. } => v == value,
                Tail::AbsBound { ratio, coeff, .. } => {
                    v.modulus() <= coeff * ratio.powi(j.min(i32::MAX as usize) as i32) * (1.0 + 1e-12)
                }
                Tail::EventuallyMonotone { limit, .. } => {
                    let start = self.at(from);
                    let span = (start - limit).modulus();
                    (v - limit).modulus() <= span * (1.0 + 1e-12) + 1e-300
                }
                Tail::Unknown => true,
            };
            if !ok {
                return Err(j);
            }
            j += step;
        }
        Ok(())
    }
}

impl Seq<f64> {
    /// `x_k = (-1)^(k+1)`: `1, -1, 1, -1, ...`.
    pub fn alternating() -> Self {
        Seq::from_fn(|k| if k % 2 == 1 { 1.0 } else { -1.0 })
    }

    /// `x_k = k^(-s)`.
    pub fn harmonic_power(s: f64) -> Self {
        let seq = Seq::from_fn(move |k| (k as f64).powf(-s));
        if s == 0.0 {
            seq.with_tail(Tail::EventuallyConstant { from: 1, value: 1.0 })
        } else {
            seq
        }
    }

    /// Seeded random sequence `x_k = u_k k^(-decay)` with `u_k` uniform on
    /// `[-1, 1]`. Coordinates are random access: `x_k` depends only on
    /// `(seed, k)`.
    pub fn random(seed: u64, decay: f64) -> Self {
        Seq::from_fn(move |k| uniform_at(seed, k as u64) * (k as f64).powf(-decay))
    }
}

/// Uniform deviate on `[-1, 1]` addressed by `(seed, index)`.
pub fn uniform_at(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(index) * 2);
    let bits = rng.next_u64() >> 11;
    (bits as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

/// Largest explicit index kept in a prefix-sum cache; longer windows are
/// summed directly.
pub(crate) const PREFIX_CACHE_CAP: usize = 1 << 22;

/// Window sums `sum_{k=a}^{b} x_k` computed from cached double-word prefix
/// sums. The explicit part of `x` (before a constant tail) is summed; the
/// constant tail contributes `value * count`.
///
/// The result for a given `(a, b)` does not depend on cache state, so any
/// two consumers of the same sequence agree bit for bit.
pub struct WindowSums<S: Scalar> {
    x: Seq<S>,
    explicit_end: Option<usize>,
    tail_value: S,
    prefix: RwLock<Vec<Compensated<S>>>,
}

impl<S: Scalar> WindowSums<S> {
    pub fn new(x: Seq<S>) -> Self {
        let (explicit_end, tail_value) = match x.tail().constant_from() {
            Some((from, v)) => (Some(from - 1), v),
            None => (None, S::zero()),
        };
        WindowSums {
            x,
            explicit_end,
            tail_value,
            prefix: RwLock::new(vec![Compensated::zero()]),
        }
    }

    pub fn seq(&self) -> &Seq<S> {
        &self.x
    }

    /// Compensated prefix `sum_{k=1}^{m} x_k` over the explicit part (`m`
    /// must not exceed the explicit end).
    fn explicit_prefix(&self, m: usize) -> Compensated<S> {
        if m > PREFIX_CACHE_CAP {
            let mut acc = self.explicit_prefix(PREFIX_CACHE_CAP);
            for k in PREFIX_CACHE_CAP + 1..=m {
                acc.add(self.x.at(k));
            }
            return acc;
        }
        {
            let cache = self.prefix.read().expect("prefix cache poisoned");
            if m < cache.len() {
                return cache[m];
            }
        }
        let mut cache = self.prefix.write().expect("prefix cache poisoned");
        if m >= cache.len() {
            let limit = self.explicit_end.unwrap_or(usize::MAX).min(PREFIX_CACHE_CAP);
            let target = m.max(cache.len() * 2).min(limit).max(m);
            let mut acc = *cache.last().expect("cache holds prefix 0");
            let have = cache.len();
            cache.reserve(target + 1 - have);
            for k in have..=target {
                acc.add(self.x.at(k));
                cache.push(acc);
            }
        }
        cache[m]
    }

    /// Compensated `sum_{k=a}^{b} x_k`; empty when `a > b`.
    pub fn sum_compensated(&self, a: usize, b: usize) -> Compensated<S> {
        debug_assert!(a >= 1);
        if a > b {
            return Compensated::zero();
        }
        let end = self.explicit_end.unwrap_or(usize::MAX);
        let mut total = Compensated::zero();
        if a <= end {
            let hi = b.min(end);
            total.add_compensated(self.explicit_prefix(hi));
            total.add_compensated(self.explicit_prefix(a - 1).negated());
        }
        if b > end && self.tail_value != S::zero() {
            let start = a.max(end + 1);
            total.add_scaled(self.tail_value, (b - start + 1) as f64);
        }
        total
    }

    pub fn sum(&self, a: usize, b: usize) -> S {
        self.sum_compensated(a, b).value()
    }
}
