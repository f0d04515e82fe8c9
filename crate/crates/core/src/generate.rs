//! Seeded random filtrations and stopping times.
//!
//! All randomness comes from SplitMix64 (Steele, Lea & Flood), the 64-bit
//! generator with increment `0x9E3779B97F4A7C15` and output mixers
//! `0xBF58476D1CE4E5B9` / `0x94D049BB133111EB`. Derived quantities use only
//! the raw 64-bit outputs:
//!
//! * a probability draw is `(x >> 11) * 2^-53 < p`;
//! * a coin is the top bit of `x`;
//! * an index below `m` is `(x * m) >> 64` in 128-bit arithmetic.
//!
//! Filtrations, stopping times and perturbations read independent streams
//! seeded with `seed + k * 0x9E3779B97F4A7C15` for stream ids `k = 0, 1, 2`,
//! so any implementation following these rules reproduces the same instances.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, Partition, SampleSpace};
use crate::filtration::{validate_filtration, Filtration, StoppingTime};
use crate::time::{Time, TimeAxis, TimeScalar};

/// Identifier recorded next to generated instances.
pub const ALGORITHM: &str = "splitmix64";

/// Upper bound on `n_outcomes`.
pub const MAX_OUTCOMES: usize = 1 << 16;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

const FILTRATION_STREAM: u64 = 0;
const STOPPING_STREAM: u64 = 1;
const PERTURB_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_outcomes: usize,
    pub n_times: usize,
    /// Chance that a block of size at least two splits at each time step.
    pub split_prob: f64,
    /// Chance that a block with no stopped outcome stops at each time.
    pub stop_prob: f64,
    /// Chance that a block still alive after the last time gets `τ = ∞`.
    pub infinity_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_outcomes: 10,
            n_times: 5,
            split_prob: 0.5,
            stop_prob: 0.3,
            infinity_prob: 0.3,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_outcomes == 0 || self.n_outcomes > MAX_OUTCOMES {
            return Err(Error::BadConfig(format!(
                "n_outcomes must be in 1..={MAX_OUTCOMES}, got {}",
                self.n_outcomes
            )));
        }
        if self.n_times == 0 {
            return Err(Error::BadConfig("n_times must be at least 1".into()));
        }
        for (name, p) in [
            ("split_prob", self.split_prob),
            ("stop_prob", self.stop_prob),
            ("infinity_prob", self.infinity_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadConfig(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// The configuration for one fuzzing iteration.
    ///
    /// `n_outcomes` and `n_times` act as maxima: the iteration draws its sizes
    /// uniformly from `1..=n_outcomes` and `1..=n_times`.
    pub fn for_iteration(&self, iteration: u64) -> GenConfig {
        let mut rng = InstanceRng::stream(self.seed, iteration.wrapping_add(3));
        let seed = rng.next_u64();
        let n_outcomes = 1 + rng.below(self.n_outcomes);
        let n_times = 1 + rng.below(self.n_times);
        GenConfig {
            seed,
            n_outcomes,
            n_times,
            ..self.clone()
        }
    }
}

/// SplitMix64 plus the derivation rules from the module docs.
#[derive(Debug, Clone)]
pub struct InstanceRng(SplitMix64);

impl InstanceRng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn stream(seed: u64, stream: u64) -> Self {
        Self::new(seed.wrapping_add(stream.wrapping_mul(GOLDEN_GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// True with probability `p`; always consumes one draw.
    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform index in `0..m`; `m` must be positive.
    pub fn below(&mut self, m: usize) -> usize {
        ((self.next_u64() as u128 * m as u128) >> 64) as usize
    }
}

/// Uniform bipartition of a block of at least two outcomes, rejecting splits
/// with an empty side.
fn bipartition(block: &Event, rng: &mut InstanceRng) -> (Event, Event) {
    loop {
        let mut left = Event::empty(block.universe());
        for i in block.iter() {
            if rng.coin() {
                left.insert(i);
            }
        }
        let right = block.difference(&left);
        if !left.is_empty() && !right.is_empty() {
            return (left, right);
        }
    }
}

fn refine(p: &Partition, split_prob: f64, rng: &mut InstanceRng) -> Partition {
    let mut blocks = Vec::with_capacity(p.num_blocks() * 2);
    for block in p.blocks() {
        if block.count() >= 2 && rng.chance(split_prob) {
            let (a, b) = bipartition(block, rng);
            blocks.push(a);
            blocks.push(b);
        } else {
            blocks.push(block.clone());
        }
    }
    Partition::new(p.universe(), blocks).expect("refining a partition yields a partition")
}

/// A random refining chain on the axis `0, 1, ..., n_times - 1`.
///
/// `A_0 = {Ω}`; each later level and the terminal partition refine the level
/// before them.
pub fn gen_filtration<T: TimeScalar>(cfg: &GenConfig) -> Result<Filtration<T>> {
    cfg.validate()?;
    let mut rng = InstanceRng::stream(cfg.seed, FILTRATION_STREAM);
    let n = cfg.n_outcomes;
    let mut levels = vec![Partition::trivial(n)?];
    for _ in 1..cfg.n_times {
        let next = refine(levels.last().expect("nonempty"), cfg.split_prob, &mut rng);
        levels.push(next);
    }
    let terminal = refine(levels.last().expect("nonempty"), cfg.split_prob, &mut rng);
    Filtration::new(
        SampleSpace::numbered(n)?,
        TimeAxis::range(cfg.n_times)?,
        levels,
        terminal,
    )
}

fn ensure_valid<T: TimeScalar>(f: &Filtration<T>) -> Result<()> {
    let report = validate_filtration(f);
    if !report.is_valid() {
        return Err(Error::InvalidFiltration(report.to_string()));
    }
    Ok(())
}

/// A stopping time built from whole `A_t` blocks, hence valid by construction.
///
/// Times are walked in order; every block with no stopped outcome stops there
/// with probability `stop_prob`. Blocks of the last level still alive at the
/// end get `∞` with probability `infinity_prob`, otherwise the last time.
pub fn gen_stopping_time<T: TimeScalar>(
    cfg: &GenConfig,
    f: &Filtration<T>,
) -> Result<StoppingTime<T>> {
    cfg.validate()?;
    ensure_valid(f)?;
    let mut rng = InstanceRng::stream(cfg.seed, STOPPING_STREAM);
    let n = f.len();
    let mut alive = Event::full(n);
    let mut values = vec![Time::Infinity; n];
    for (t, atoms) in f.timed_levels() {
        for block in atoms.blocks() {
            if block.is_subset(&alive) && rng.chance(cfg.stop_prob) {
                for i in block.iter() {
                    values[i] = Time::Finite(t.clone());
                }
                alive = alive.difference(block);
            }
        }
    }
    let last_time = f.axis().last().clone();
    let last_level = f.levels().last().expect("at least one level");
    for block in last_level.blocks() {
        if block.is_subset(&alive) && !rng.chance(cfg.infinity_prob) {
            for i in block.iter() {
                values[i] = Time::Finite(last_time.clone());
            }
        }
    }
    Ok(StoppingTime::new(values))
}

/// Moves one outcome of a valid stopping time to an earlier time so that
/// `{τ ≤ t}` cuts an `A_t` block in two.
///
/// Candidates are pairs `(t, ω)` with `τ(ω) > t` whose `A_t` block has another
/// member; setting `τ(ω) = t` then puts `ω` in `{τ ≤ t}` without the rest of its
/// block. When the generated stopping time offers no candidate, the constant
/// `τ ≡ ∞` is perturbed instead. Returns `None` only when every level consists
/// of singletons.
pub fn gen_non_stopping_time<T: TimeScalar>(
    cfg: &GenConfig,
    f: &Filtration<T>,
) -> Result<Option<StoppingTime<T>>> {
    let generated = gen_stopping_time(cfg, f)?;
    let mut rng = InstanceRng::stream(cfg.seed, PERTURB_STREAM);
    for mut tau in [generated, StoppingTime::constant(f.len(), Time::Infinity)] {
        let candidates = perturbation_candidates(&tau, f);
        if candidates.is_empty() {
            continue;
        }
        let (t, outcome) = candidates[rng.below(candidates.len())].clone();
        tau.set(outcome, Time::Finite(t));
        return Ok(Some(tau));
    }
    Ok(None)
}

fn perturbation_candidates<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
) -> Vec<(T, usize)> {
    let mut out = Vec::new();
    for (t, atoms) in f.timed_levels() {
        let at = Time::Finite(t.clone());
        for block in atoms.blocks().iter().filter(|b| b.count() >= 2) {
            for outcome in block.iter().filter(|&w| tau.value(w) > &at) {
                out.push((t.clone(), outcome));
            }
        }
    }
    out
}

/// A filtration and a valid stopping time from one configuration.
pub fn gen_instance<T: TimeScalar>(cfg: &GenConfig) -> Result<(Filtration<T>, StoppingTime<T>)> {
    let f = gen_filtration(cfg)?;
    let tau = gen_stopping_time(cfg, &f)?;
    Ok((f, tau))
}
