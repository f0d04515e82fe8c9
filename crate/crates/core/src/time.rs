//! Exact time points and finite time axes.

use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// Scalar usable as a time point.
///
/// Requires a total order, so `{τ ≤ t}` is always decided exactly. Integer
/// types and `Ratio<i64>` qualify; IEEE floats deliberately do not.
pub trait TimeScalar: Num + FromPrimitive + Ord + Clone + Hash + Debug + Display {}

impl<T> TimeScalar for T where T: Num + FromPrimitive + Ord + Clone + Hash + Debug + Display {}

/// A point of `T ∪ {∞}`; `Infinity` is greater than every finite time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Time<T> {
    Finite(T),
    Infinity,
}

impl<T> Time<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Time::Finite(t) => Some(t),
            Time::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Time::Infinity)
    }
}

impl<T: Display> Display for Time<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Finite(t) => write!(f, "{t}"),
            Time::Infinity => write!(f, "inf"),
        }
    }
}

impl<T> From<T> for Time<T> {
    fn from(t: T) -> Self {
        Time::Finite(t)
    }
}

/// A nonempty, strictly increasing list of time points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeAxis<T> {
    times: Vec<T>,
}

impl<T: TimeScalar> TimeAxis<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidAxis("no time points".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAxis(format!(
                "times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { times })
    }

    /// The axis `0, 1, ..., len - 1`.
    pub fn range(len: usize) -> Result<Self> {
        let times = (0..len)
            .map(|i| T::from_usize(i).ok_or_else(|| Error::InvalidAxis(format!("{i} overflows"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(times)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> &T {
        &self.times[0]
    }

    pub fn last(&self) -> &T {
        &self.times[self.times.len() - 1]
    }

    pub fn position(&self, t: &T) -> Option<usize> {
        self.times.binary_search(t).ok()
    }

    pub fn contains(&self, t: &Time<T>) -> bool {
        match t {
            Time::Finite(t) => self.position(t).is_some(),
            Time::Infinity => true,
        }
    }

    /// `T ∪ {∞}` in increasing order.
    pub fn extended(&self) -> impl Iterator<Item = Time<T>> + '_ {
        self.times
            .iter()
            .cloned()
            .map(Time::Finite)
            .chain(std::iter::once(Time::Infinity))
    }
}
