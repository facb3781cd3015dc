//! Deferment schedules `(p(n), q(n))` with `p(n) < q(n)` and `q(n) -> inf`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("schedule violates p(n) < q(n) at n = {n} (p = {p}, q = {q})")]
    Violation { n: usize, p: usize, q: usize },
    #[error("q(n) did not grow over [1, {horizon}]: max q on the second half is {late_max}, on the first half {early_max}")]
    Bounded {
        horizon: usize,
        early_max: usize,
        late_max: usize,
    },
    #[error("schedule table has {len} entries; n = {n} is out of range")]
    OutOfTable { n: usize, len: usize },
    #[error("invalid schedule parameters: {0}")]
    Invalid(String),
}

/// Structural family of a schedule. Named families carry monotonicity facts
/// that the matrix module uses for far-row arguments.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleShape {
    /// `p(n) = 0`, `q(n) = n`.
    Cesaro,
    /// `p(n) = n`, `q(n) = 2n`.
    Block,
    /// `p(n) = n^a - 1`, `q(n) = n^b`.
    Poly { a: u32, b: u32 },
    /// Explicit lists `p(1..=L)`, `q(1..=L)`.
    Table,
    Custom { label: String, monotone: bool },
}

type IndexFn = Arc<dyn Fn(usize) -> usize + Send + Sync>;

#[derive(Clone)]
pub struct DefermentSchedule {
    p: IndexFn,
    q: IndexFn,
    shape: ScheduleShape,
    horizon: usize,
    table_len: Option<usize>,
}

impl fmt::Debug for DefermentSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DefermentSchedule({})", self.describe())
    }
}

pub const DEFAULT_HORIZON: usize = 10_000;

impl DefermentSchedule {
    /// Classical Cesaro windows `(0, n]`.
    pub fn cesaro() -> Self {
        Self::build(|_| 0, |n| n, ScheduleShape::Cesaro)
    }

    /// Windows `(n, 2n]`.
    pub fn block() -> Self {
        Self::build(|n| n, |n| 2 * n, ScheduleShape::Block)
    }

    /// `p(n) = n^a - 1`, `q(n) = n^b` with `a <= b`. `poly(0, 1)` coincides
    /// with [`DefermentSchedule::cesaro`].
    pub fn poly(a: u32, b: u32) -> Result<Self, ScheduleError> {
        if a > b {
            return Err(ScheduleError::Invalid(format!(
                "poly schedule needs a <= b (got a = {a}, b = {b})"
            )));
        }
        if b == 0 {
            return Err(ScheduleError::Invalid("poly schedule needs b >= 1 so q is unbounded".into()));
        }
        Ok(Self::build(
            move |n| pow_checked(n, a) - 1,
            move |n| pow_checked(n, b),
            ScheduleShape::Poly { a, b },
        ))
    }

    /// Explicit finite schedule; evaluation past the table is an error.
    pub fn table(p: Vec<usize>, q: Vec<usize>) -> Result<Self, ScheduleError> {
        if p.len() != q.len() || p.is_empty() {
            return Err(ScheduleError::Invalid(format!(
                "p and q tables must be nonempty and equally long (got {} and {})",
                p.len(),
                q.len()
            )));
        }
        let len = p.len();
        let (p, q) = (Arc::new(p), Arc::new(q));
        let mut s = Self::build(
            move |n| p.get(n - 1).copied().unwrap_or(0),
            move |n| q.get(n - 1).copied().unwrap_or(0),
            ScheduleShape::Table,
        );
        s.table_len = Some(len);
        s.horizon = len;
        s.validate(len)?;
        Ok(s)
    }

    /// Arbitrary rules. `monotone` declares that both `p` and `q` are
    /// nondecreasing.
    pub fn custom<P, Q>(label: &str, p: P, q: Q, monotone: bool) -> Self
    where
        P: Fn(usize) -> usize + Send + Sync + 'static,
        Q: Fn(usize) -> usize + Send + Sync + 'static,
    {
        Self::build(
            p,
            q,
            ScheduleShape::Custom {
                label: label.to_string(),
                monotone,
            },
        )
    }

    fn build<P, Q>(p: P, q: Q, shape: ScheduleShape) -> Self
    where
        P: Fn(usize) -> usize + Send + Sync + 'static,
        Q: Fn(usize) -> usize + Send + Sync + 'static,
    {
        DefermentSchedule {
            p: Arc::new(p),
            q: Arc::new(q),
            shape,
            horizon: DEFAULT_HORIZON,
            table_len: None,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = match self.table_len {
            Some(len) => horizon.min(len),
            None => horizon,
        };
        self
    }

    /// Largest `n` the schedule is intended to be evaluated at.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn shape(&self) -> &ScheduleShape {
        &self.shape
    }

    pub fn p(&self, n: usize) -> usize {
        (self.p)(n)
    }

    pub fn q(&self, n: usize) -> usize {
        (self.q)(n)
    }

    /// Validated window `(p(n), q(n))`.
    pub fn window(&self, n: usize) -> Result<(usize, usize), ScheduleError> {
        if let Some(len) = self.table_len {
            if n == 0 || n > len {
                return Err(ScheduleError::OutOfTable { n, len });
            }
        }
        let (p, q) = (self.p(n), self.q(n));
        if p >= q {
            return Err(ScheduleError::Violation { n, p, q });
        }
        Ok((p, q))
    }

    /// Window length `q(n) - p(n)`.
    pub fn width(&self, n: usize) -> Result<usize, ScheduleError> {
        self.window(n).map(|(p, q)| q - p)
    }

    /// Checks `p(n) < q(n)` on `[1, horizon]` and the growth proxy for
    /// `q(n) -> inf`: the maximum of `q` over the second half of the range must
    /// exceed its maximum over the first half.
    pub fn validate(&self, horizon: usize) -> Result<(), ScheduleError> {
        let mut early_max = 0;
        let mut late_max = 0;
        let half = horizon / 2;
        for n in 1..=horizon {
            let (_, q) = self.window(n)?;
            if n <= half {
                early_max = early_max.max(q);
            } else {
                late_max = late_max.max(q);
            }
        }
        if horizon >= 2 && late_max <= early_max {
            return Err(ScheduleError::Bounded {
                horizon,
                early_max,
                late_max,
            });
        }
        Ok(())
    }

    /// `sup_{n <= horizon} p(n) / (q(n) - p(n))`, and whether that supremum
    /// is already reached on the first half of the range (the finite-sample
    /// reading of "bounded").
    pub fn deferral_ratio_bound(&self, horizon: usize) -> Result<(f64, bool), ScheduleError> {
        let half = (horizon / 2).max(1);
        let mut early = 0.0f64;
        let mut late = 0.0f64;
        for n in 1..=horizon {
            let (p, q) = self.window(n)?;
            let r = p as f64 / (q - p) as f64;
            if n <= half {
                early = early.max(r);
            } else {
                late = late.max(r);
            }
        }
        let bounded = late <= early * (1.0 + 1e-9) + 1e-12;
        Ok((early.max(late), bounded))
    }

    /// Both `p` and `q` are known to be nondecreasing.
    pub fn is_monotone(&self) -> bool {
        match &self.shape {
            ScheduleShape::Cesaro | ScheduleShape::Block | ScheduleShape::Poly { .. } => true,
            ScheduleShape::Custom { monotone, .. } => *monotone,
            ScheduleShape::Table => false,
        }
    }

    /// `Some(P)` when `p(n) = P` for every `n` (named families only).
    pub fn constant_p(&self) -> Option<usize> {
        match self.shape {
            ScheduleShape::Cesaro | ScheduleShape::Poly { a: 0, .. } => Some(0),
            _ => None,
        }
    }

    /// Whether `p(n) -> inf` is known structurally.
    pub fn p_unbounded(&self) -> bool {
        matches!(
            self.shape,
            ScheduleShape::Block | ScheduleShape::Poly { a: 1.., .. }
        )
    }

    /// Growth exponent of `q` when `p` is constant, used to decide whether
    /// `sum_n 1 / (q(n) - p)` converges.
    pub(crate) fn q_growth_exponent(&self) -> Option<u32> {
        match self.shape {
            ScheduleShape::Cesaro => Some(1),
            ScheduleShape::Poly { a: 0, b } => Some(b),
            _ => None,
        }
    }

    /// Parses `cesaro`, `block`, `unit` (`p = n`, `q = n + 1`), `poly(a,b)`
    /// and `custom-table(p1,p2,...;q1,q2,...)`.
    pub fn parse(spec: &str) -> Result<Self, ScheduleError> {
        use crate::parse::{no_args, split_call, two};
        let (name, args) = split_call(spec).map_err(ScheduleError::Invalid)?;
        let args = args.as_deref();
        match name.as_str() {
            "cesaro" => no_args(&name, args).map(|_| Self::cesaro()),
            "block" => no_args(&name, args).map(|_| Self::block()),
            "unit" => no_args(&name, args).map(|_| Self::custom("unit", |n| n, |n| n + 1, true)),
            "poly" => {
                let (a, b) = two::<u32>(&name, args).map_err(ScheduleError::Invalid)?;
                return Self::poly(a, b);
            }
            "custom-table" | "table" => {
                let body = args.ok_or_else(|| ScheduleError::Invalid("custom-table needs p and q lists".into()))?;
                let (p, q) = body
                    .split_once(';')
                    .ok_or_else(|| ScheduleError::Invalid("custom-table lists are separated by ';'".into()))?;
                let p = crate::parse::list::<usize>(p, ',').map_err(ScheduleError::Invalid)?;
                let q = crate::parse::list::<usize>(q, ',').map_err(ScheduleError::Invalid)?;
                return Self::table(p, q);
            }
            other => Err(format!("unknown schedule '{other}'")),
        }
        .map_err(ScheduleError::Invalid)
    }

    pub fn describe(&self) -> String {
        match &self.shape {
            ScheduleShape::Cesaro => "cesaro".to_string(),
            ScheduleShape::Block => "block".to_string(),
            ScheduleShape::Poly { a, b } => format!("poly({a},{b})"),
            ScheduleShape::Table => format!("custom-table(len={})", self.table_len.unwrap_or(0)),
            ScheduleShape::Custom { label, .. } if label == "unit" => "unit".to_string(),
            ScheduleShape::Custom { label, .. } => format!("custom({label})"),
        }
    }
}

fn pow_checked(n: usize, e: u32) -> usize {
    n.checked_pow(e)
        .unwrap_or_else(|| panic!("schedule overflow: {n}^{e} does not fit in usize"))
}
