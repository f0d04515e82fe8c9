//! Reference model used by the integration and acceptance tests.
//!
//! Events are `u32` masks and partitions are block ids per outcome. An event
//! is measurable for a partition when it is constant on every block, which is
//! checked pairwise rather than through unions of blocks as the crate does.
#![allow(dead_code)]

use std::collections::BTreeSet;

use stopsigma::{Event, Filtration, Partition, StoppingTime, Time, TimeScalar};

pub type Mask = u32;

#[derive(Debug, Clone)]
pub struct Model {
    pub n: usize,
    /// Block id per outcome, one vector per time point.
    pub levels: Vec<Vec<usize>>,
    pub terminal: Vec<usize>,
    /// Position of `τ(ω)` on the axis; `levels.len()` stands for `∞`.
    pub tau: Vec<usize>,
}

pub fn mask(e: &Event) -> Mask {
    e.iter().fold(0, |m, i| m | 1 << i)
}

pub fn masks(p: &Partition) -> BTreeSet<Mask> {
    p.blocks().iter().map(mask).collect()
}

fn ids(p: &Partition) -> Vec<usize> {
    let mut out = vec![usize::MAX; p.universe()];
    for (b, block) in p.blocks().iter().enumerate() {
        for i in block.iter() {
            out[i] = b;
        }
    }
    out
}

impl Model {
    pub fn new<T: TimeScalar>(f: &Filtration<T>, tau: &StoppingTime<T>) -> Self {
        assert!(f.len() <= 20, "model is for small spaces");
        let times = f.axis().times();
        let tau = tau
            .values()
            .iter()
            .map(|v| match v {
                Time::Finite(t) => times.iter().position(|s| s == t).expect("time on axis"),
                Time::Infinity => times.len(),
            })
            .collect();
        Self {
            n: f.len(),
            levels: f.levels().iter().map(ids).collect(),
            terminal: ids(f.terminal()),
            tau,
        }
    }

    pub fn full(&self) -> Mask {
        ((1u64 << self.n) - 1) as Mask
    }

    pub fn measurable(assign: &[usize], m: Mask) -> bool {
        for i in 0..assign.len() {
            for j in i + 1..assign.len() {
                if assign[i] == assign[j] && (m >> i & 1) != (m >> j & 1) {
                    return false;
                }
            }
        }
        true
    }

    /// `{τ ≤ t_k}`.
    pub fn at_most(&self, k: usize) -> Mask {
        (0..self.n)
            .filter(|&i| self.tau[i] <= k)
            .fold(0, |m, i| m | 1 << i)
    }

    /// `{τ = t_k}`, with `k = levels.len()` for `∞`.
    pub fn equal_to(&self, k: usize) -> Mask {
        (0..self.n)
            .filter(|&i| self.tau[i] == k)
            .fold(0, |m, i| m | 1 << i)
    }

    pub fn is_stopping(&self) -> bool {
        (0..self.levels.len()).all(|k| Self::measurable(&self.levels[k], self.at_most(k)))
    }

    /// `X^τ_t = 1{τ > t}` is adapted.
    pub fn process_adapted(&self) -> bool {
        (0..self.levels.len()).all(|k| {
            let ones = self.full() & !self.at_most(k);
            Self::measurable(&self.levels[k], ones)
        })
    }

    /// `F_τ` by scanning every subset of the space.
    pub fn f_tau(&self) -> BTreeSet<Mask> {
        (0..=self.full())
            .filter(|&m| {
                Self::measurable(&self.terminal, m)
                    && (0..self.levels.len())
                        .all(|k| Self::measurable(&self.levels[k], m & self.at_most(k)))
            })
            .collect()
    }

    /// `σ(τ)`: closure of the level sets of `τ`.
    pub fn sigma_tau(&self) -> BTreeSet<Mask> {
        let gens: Vec<Mask> = (0..=self.levels.len()).map(|k| self.equal_to(k)).collect();
        closure(self.n, &gens)
    }
}

/// Smallest family containing `gens`, `∅` and `Ω`, closed under complement
/// and pairwise union.
pub fn closure(n: usize, gens: &[Mask]) -> BTreeSet<Mask> {
    let full = ((1u64 << n) - 1) as Mask;
    let mut family: BTreeSet<Mask> = gens.iter().copied().collect();
    family.insert(0);
    family.insert(full);
    loop {
        let current: Vec<Mask> = family.iter().copied().collect();
        let before = family.len();
        for &a in &current {
            family.insert(full & !a);
            for &b in &current {
                family.insert(a | b);
            }
        }
        if family.len() == before {
            return family;
        }
    }
}

/// Nonempty members with no nonempty strict subset in the family.
pub fn minimal(family: &BTreeSet<Mask>) -> BTreeSet<Mask> {
    family
        .iter()
        .copied()
        .filter(|&a| a != 0)
        .filter(|&a| !family.iter().any(|&b| b != 0 && b != a && b & a == b))
        .collect()
}

pub fn event_masks(events: &[Event]) -> BTreeSet<Mask> {
    events.iter().map(mask).collect()
}
