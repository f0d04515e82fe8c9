//! Filtrations on a finite space, stopping times, `σ(τ)` and the stopping
//! process `X^τ`.
//!
//! A filtration is stored through its atoms: one [`Partition`] per time point
//! (the atoms `A_t` of `F_t`) plus a terminal partition for `F_∞`. Membership
//! `F ∈ F_t` is decided as "F is a union of `A_t` blocks".

use std::fmt;

use crate::error::{Error, Result};
use crate::events::{Event, Partition, SampleSpace};
use crate::time::{Time, TimeAxis, TimeScalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filtration<T> {
    space: SampleSpace,
    axis: TimeAxis<T>,
    levels: Vec<Partition>,
    terminal: Partition,
}

/// Result of [`validate_filtration`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiltrationReport<T> {
    Valid,
    /// `later` does not refine `earlier`; `block` is a block of the later
    /// partition that straddles two earlier blocks.
    NotRefining {
        earlier: Time<T>,
        later: Time<T>,
        block: Event,
    },
}

impl<T> FiltrationReport<T> {
    pub fn is_valid(&self) -> bool {
        matches!(self, FiltrationReport::Valid)
    }
}

impl<T: fmt::Display> fmt::Display for FiltrationReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiltrationReport::Valid => write!(f, "valid"),
            FiltrationReport::NotRefining {
                earlier,
                later,
                block,
            } => write!(
                f,
                "level {later} does not refine level {earlier} (block {block:?})"
            ),
        }
    }
}

impl<T: TimeScalar> Filtration<T> {
    /// Assembles a filtration, checking shapes only; refinement is reported by
    /// [`validate_filtration`].
    pub fn new(
        space: SampleSpace,
        axis: TimeAxis<T>,
        levels: Vec<Partition>,
        terminal: Partition,
    ) -> Result<Self> {
        if levels.len() != axis.len() {
            return Err(Error::InvalidFiltration(format!(
                "{} levels for {} time points",
                levels.len(),
                axis.len()
            )));
        }
        let n = space.len();
        for p in levels.iter().chain(std::iter::once(&terminal)) {
            if p.universe() != n {
                return Err(Error::MixedSpaces {
                    left: n,
                    right: p.universe(),
                });
            }
        }
        Ok(Self {
            space,
            axis,
            levels,
            terminal,
        })
    }

    /// Like [`Filtration::new`] with the terminal partition set to the last level.
    pub fn with_last_as_terminal(
        space: SampleSpace,
        axis: TimeAxis<T>,
        levels: Vec<Partition>,
    ) -> Result<Self> {
        let terminal = levels
            .last()
            .cloned()
            .ok_or_else(|| Error::InvalidFiltration("no levels".into()))?;
        Self::new(space, axis, levels, terminal)
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn axis(&self) -> &TimeAxis<T> {
        &self.axis
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn terminal(&self) -> &Partition {
        &self.terminal
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// `A_t`, or the terminal atoms for `t = ∞`.
    pub fn atoms_at(&self, t: &Time<T>) -> Result<&Partition> {
        match t {
            Time::Infinity => Ok(&self.terminal),
            Time::Finite(x) => self
                .axis
                .position(x)
                .map(|i| &self.levels[i])
                .ok_or_else(|| Error::TimeNotOnAxis(x.to_string())),
        }
    }

    /// The levels paired with their times, in time order.
    pub fn timed_levels(&self) -> impl Iterator<Item = (&T, &Partition)> {
        self.axis.times().iter().zip(self.levels.iter())
    }
}

/// Confirms `A_t` refines `A_s` for consecutive `s < t` and that the terminal
/// partition refines the last level; reports the first failure.
pub fn validate_filtration<T: TimeScalar>(f: &Filtration<T>) -> FiltrationReport<T> {
    let times = f.axis.times();
    for (i, pair) in f.levels.windows(2).enumerate() {
        if let Some(block) = pair[1].first_unrefined_block(&pair[0]) {
            return FiltrationReport::NotRefining {
                earlier: Time::Finite(times[i].clone()),
                later: Time::Finite(times[i + 1].clone()),
                block: block.clone(),
            };
        }
    }
    let last = f.levels.last().expect("at least one level");
    if let Some(block) = f.terminal.first_unrefined_block(last) {
        return FiltrationReport::NotRefining {
            earlier: Time::Finite(f.axis.last().clone()),
            later: Time::Infinity,
            block: block.clone(),
        };
    }
    FiltrationReport::Valid
}

/// A map from outcomes to `T ∪ {∞}`, indexed by outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingTime<T> {
    values: Vec<Time<T>>,
}

impl<T: TimeScalar> StoppingTime<T> {
    pub fn new(values: Vec<Time<T>>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, t: Time<T>) -> Self {
        Self { values: vec![t; n] }
    }

    pub fn values(&self) -> &[Time<T>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, outcome: usize) -> &Time<T> {
        &self.values[outcome]
    }

    pub fn set(&mut self, outcome: usize, t: Time<T>) {
        self.values[outcome] = t;
    }

    fn event_where(&self, pred: impl Fn(&Time<T>) -> bool) -> Event {
        Event::from_indices(
            self.values.len(),
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| pred(v))
                .map(|(i, _)| i),
        )
    }

    /// `{τ ≤ t}`.
    pub fn at_most(&self, t: &Time<T>) -> Event {
        self.event_where(|v| v <= t)
    }

    /// `{τ = t}`, without checking that `t` is on any axis.
    pub fn equal_to(&self, t: &Time<T>) -> Event {
        self.event_where(|v| v == t)
    }

    /// `{τ > t}`.
    pub fn after(&self, t: &Time<T>) -> Event {
        self.event_where(|v| v > t)
    }
}

/// Outcome of [`is_stopping_time`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoppingCheck<T> {
    Valid,
    /// `{τ ≤ time}` cuts `block` of `A_time`; `time` is the smallest such.
    Violation {
        time: T,
        block: Event,
    },
}

impl<T> StoppingCheck<T> {
    pub fn is_valid(&self) -> bool {
        matches!(self, StoppingCheck::Valid)
    }
}

fn check_shape<T: TimeScalar>(tau: &StoppingTime<T>, f: &Filtration<T>) -> Result<()> {
    if tau.len() != f.len() {
        return Err(Error::MixedSpaces {
            left: f.len(),
            right: tau.len(),
        });
    }
    if let Some(v) = tau.values.iter().find(|v| !f.axis.contains(v)) {
        return Err(Error::TimeNotOnAxis(v.to_string()));
    }
    Ok(())
}

/// Checks `{τ ≤ t} ∈ F_t` for every `t` on the axis. The value `∞` needs no
/// check of its own.
pub fn is_stopping_time<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
) -> Result<StoppingCheck<T>> {
    check_shape(tau, f)?;
    for (t, atoms) in f.timed_levels() {
        let stopped = tau.at_most(&Time::Finite(t.clone()));
        if let Some(block) = atoms.split_block(&stopped) {
            return Ok(StoppingCheck::Violation {
                time: t.clone(),
                block: block.clone(),
            });
        }
    }
    Ok(StoppingCheck::Valid)
}

/// [`is_stopping_time`], with a violation turned into an error.
pub fn ensure_stopping_time<T: TimeScalar>(tau: &StoppingTime<T>, f: &Filtration<T>) -> Result<()> {
    match is_stopping_time(tau, f)? {
        StoppingCheck::Valid => Ok(()),
        StoppingCheck::Violation { time, block } => Err(Error::NotAStoppingTime {
            time: time.to_string(),
            block: f.space().show_event(&block),
        }),
    }
}

/// `{ω : τ(ω) = t}` for `t ∈ T ∪ {∞}`.
pub fn level_set<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
    t: &Time<T>,
) -> Result<Event> {
    if !f.axis.contains(t) {
        return Err(Error::TimeNotOnAxis(t.to_string()));
    }
    check_shape(tau, f)?;
    Ok(tau.equal_to(t))
}

/// The atoms of `σ(τ)`: the nonempty level sets of `τ`.
pub fn sigma_of_tau<T: TimeScalar>(tau: &StoppingTime<T>, f: &Filtration<T>) -> Result<Partition> {
    check_shape(tau, f)?;
    let blocks = f
        .axis
        .extended()
        .map(|t| tau.equal_to(&t))
        .filter(|e| !e.is_empty())
        .collect();
    Partition::new(f.len(), blocks)
}

/// A `{0,1}`-valued process on the axis, stored as the slices `{X_t = 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingProcess<T> {
    times: Vec<T>,
    ones: Vec<Event>,
}

impl<T: TimeScalar> StoppingProcess<T> {
    /// A process from its `{X_t = 1}` slices, one per time point.
    pub fn from_slices(times: Vec<T>, ones: Vec<Event>) -> Result<Self> {
        if times.len() != ones.len() {
            return Err(Error::InvalidFiltration(format!(
                "{} slices for {} times",
                ones.len(),
                times.len()
            )));
        }
        Ok(Self { times, ones })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn ones(&self, index: usize) -> &Event {
        &self.ones[index]
    }

    /// `{X_t = 0}` at the `index`-th time point.
    pub fn zeros(&self, index: usize) -> Event {
        self.ones[index].complement()
    }

    pub fn value(&self, index: usize, outcome: usize) -> u8 {
        u8::from(self.ones[index].contains(outcome))
    }

    /// `X_t(ω)` for every time point, in time order.
    pub fn path(&self, outcome: usize) -> Vec<u8> {
        (0..self.times.len())
            .map(|j| self.value(j, outcome))
            .collect()
    }
}

/// `X^τ_t = 1` exactly when `τ > t`, so the path drops to 0 at the stopping
/// instant and stays there.
///
/// `X^τ` is not defined in closed form alongside the main results; this
/// convention is the one consistent with every node value in the worked
/// tree example.
pub fn stopping_process<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
) -> Result<StoppingProcess<T>> {
    check_shape(tau, f)?;
    let times = f.axis.times().to_vec();
    let ones = times
        .iter()
        .map(|t| tau.after(&Time::Finite(t.clone())))
        .collect();
    StoppingProcess::from_slices(times, ones)
}

/// True iff every slice `{X_t = 0}` is a union of `A_t` blocks.
pub fn is_adapted<T: TimeScalar>(proc: &StoppingProcess<T>, f: &Filtration<T>) -> Result<bool> {
    if proc.times.as_slice() != f.axis.times() {
        return Err(Error::InvalidFiltration(
            "process and filtration use different time axes".into(),
        ));
    }
    for (slice, atoms) in proc.ones.iter().zip(f.levels.iter()) {
        if slice.universe() != f.len() {
            return Err(Error::MixedSpaces {
                left: f.len(),
                right: slice.universe(),
            });
        }
        if !atoms.measures(&slice.complement()) {
            return Ok(false);
        }
    }
    Ok(true)
}
