//! The stopping-time sigma-algebra `F_τ`, computed two ways.
//!
//! * Constructively from atoms: `A^t_τ` is the set of blocks of `A_t` lying
//!   inside `{τ = t}` (the terminal partition plays `A_∞`), and the atoms of
//!   `F_τ` are the disjoint union of these layers.
//! * By brute force from the definition: every `F ∈ F_∞` is kept iff
//!   `F ∩ {τ ≤ t} ∈ F_t` for all `t` on the axis.
//!
//! [`verify_theorem1`] compares the two; [`verify_prop3`] checks that `σ(τ)`
//! sits inside `F_τ`. Only finite spaces can be instantiated, so only the
//! finite case of the atom characterisation is machine-checked here.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::events::{atoms_of, generate_sigma, EnumerationBound, Event, Partition, SigmaAlgebra};
use crate::filtration::{ensure_stopping_time, validate_filtration, Filtration, StoppingTime};
use crate::time::{Time, TimeScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Constructive,
    BruteForce,
}

/// Rule selecting which `A_t` blocks enter layer `t`.
///
/// Only [`BlockRule::Contained`] is correct. The other two are mutants used
/// to check that the verification harness notices a broken construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BlockRule {
    /// `A ⊆ {τ = t}`.
    #[default]
    Contained,
    /// `A ∩ {τ = t} ≠ ∅`. Agrees with `Contained` whenever `τ` is a stopping
    /// time, since then every `A_t` block lies inside or outside `{τ = t}`.
    Intersecting,
    /// `A ⊆ {τ ≤ t}`; repeats stopped paths in later layers.
    Cumulative,
}

/// The blocks `A^t_τ` for one `t ∈ T ∪ {∞}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Layer<T> {
    pub time: Time<T>,
    pub blocks: Vec<Event>,
}

impl<T> Layer<T> {
    pub fn union(&self, universe: usize) -> Event {
        let mut out = Event::empty(universe);
        for b in &self.blocks {
            out.union_with(b);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppedResult<T> {
    /// One layer per point of `T ∪ {∞}`, in time order; layers may be empty.
    pub per_time: Vec<Layer<T>>,
    /// The atoms `A_τ` of `F_τ`.
    pub atoms: Partition,
    pub source: Source,
}

impl<T: TimeScalar> StoppedResult<T> {
    pub fn layer(&self, t: &Time<T>) -> Option<&Layer<T>> {
        self.per_time.iter().find(|l| &l.time == t)
    }

    /// Groups the atoms of a brute-force `F_τ` by the value of `τ` on them.
    pub fn from_bruteforce(
        sigma: &SigmaAlgebra,
        tau: &StoppingTime<T>,
        f: &Filtration<T>,
    ) -> Result<Self> {
        let atoms = atoms_of(sigma)?;
        let mut per_time: Vec<Layer<T>> = f
            .axis()
            .extended()
            .map(|time| Layer {
                time,
                blocks: Vec::new(),
            })
            .collect();
        for atom in atoms.blocks() {
            let first = atom.min_index().expect("atoms are nonempty");
            let t = tau.value(first);
            let layer = per_time
                .iter_mut()
                .find(|l| &l.time == t)
                .ok_or_else(|| Error::TimeNotOnAxis(t.to_string()))?;
            layer.blocks.push(atom.clone());
        }
        Ok(Self {
            per_time,
            atoms,
            source: Source::BruteForce,
        })
    }
}

fn check_filtration<T: TimeScalar>(f: &Filtration<T>) -> Result<()> {
    let report = validate_filtration(f);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidFiltration(report.to_string()))
    }
}

/// Layers `A^t_τ` under `rule`, without requiring `τ` to be a stopping time.
pub fn stopped_layers<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
    rule: BlockRule,
) -> Result<Vec<Layer<T>>> {
    if tau.len() != f.len() {
        return Err(Error::MixedSpaces {
            left: f.len(),
            right: tau.len(),
        });
    }
    f.axis()
        .extended()
        .map(|time| {
            let atoms = f.atoms_at(&time)?;
            let target = match rule {
                BlockRule::Cumulative => tau.at_most(&time),
                _ => tau.equal_to(&time),
            };
            let blocks = atoms
                .blocks()
                .iter()
                .filter(|a| match rule {
                    BlockRule::Intersecting => a.intersects(&target),
                    BlockRule::Contained | BlockRule::Cumulative => a.is_subset(&target),
                })
                .cloned()
                .collect();
            Ok(Layer { time, blocks })
        })
        .collect()
}

/// The atoms of `F_τ` built from the atoms of the filtration.
///
/// Fails unless the filtration refines properly and `τ` is a stopping time.
pub fn stopped_atoms<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
) -> Result<StoppedResult<T>> {
    check_filtration(f)?;
    ensure_stopping_time(tau, f)?;
    let per_time = stopped_layers(tau, f, BlockRule::Contained)?;
    let blocks = per_time
        .iter()
        .flat_map(|l| l.blocks.iter().cloned())
        .collect();
    let atoms = Partition::new(f.len(), blocks)?;
    Ok(StoppedResult {
        per_time,
        atoms,
        source: Source::Constructive,
    })
}

/// The layer construction applied to any map `τ`, stopping time or not.
///
/// Without the stopping-time property the blocks need not cover `Ω` and
/// generate nothing in particular; this is for illustration only.
pub fn stopped_atoms_forced<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
) -> Result<Vec<Layer<T>>> {
    check_filtration(f)?;
    stopped_layers(tau, f, BlockRule::Contained)
}

/// `F_τ` listed explicitly, straight from the definition.
///
/// Every union of terminal atoms is tested against `F ∩ {τ ≤ t} ∈ F_t` for
/// each `t` on the axis.
pub fn stopped_sigma_bruteforce<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
    bound: EnumerationBound,
) -> Result<SigmaAlgebra> {
    check_filtration(f)?;
    ensure_stopping_time(tau, f)?;
    let terminal = f.terminal().blocks();
    bound.check(terminal.len())?;

    let n = f.len();
    let conditions: Vec<(Event, &Partition)> = f
        .timed_levels()
        .map(|(t, atoms)| (tau.at_most(&Time::Finite(t.clone())), atoms))
        .collect();

    let candidates = 1u64 << terminal.len();
    let events: Vec<Event> = (0..candidates)
        .into_par_iter()
        .filter_map(|mask| {
            let mut event = Event::empty(n);
            for (i, block) in terminal.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    event.union_with(block);
                }
            }
            conditions
                .iter()
                .all(|(stopped, atoms)| atoms.measures(&event.intersection(stopped)))
                .then_some(event)
        })
        .collect();

    let sigma = SigmaAlgebra::new(n, events)?;
    let check = sigma.check();
    if !check.is_valid() {
        return Err(Error::NotASigmaAlgebra(check.to_string()));
    }
    Ok(sigma)
}

/// One named pass/fail check, with a witness event when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub counterexample: Option<Event>,
}

impl Check {
    pub fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: true,
            detail: detail.into(),
            counterexample: None,
        }
    }

    pub fn fail(name: &'static str, detail: impl Into<String>, witness: Option<Event>) -> Self {
        Self {
            name,
            passed: false,
            detail: detail.into(),
            counterexample: witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "{mark} {}: {}", c.name, c.detail)?;
            if let Some(w) = &c.counterexample {
                write!(f, " (witness {w:?})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Structural facts about the layers: pairwise disjoint, each layer covering
/// exactly `{τ = t}`, and all blocks together partitioning `Ω`.
pub fn verify_structure<T: TimeScalar>(
    layers: &[Layer<T>],
    tau: &StoppingTime<T>,
    n: usize,
) -> Report {
    let mut report = Report::default();

    let mut seen = Event::empty(n);
    let mut overlap = None;
    for block in layers.iter().flat_map(|l| l.blocks.iter()) {
        if block.intersects(&seen) {
            overlap = Some(block.intersection(&seen));
            break;
        }
        seen.union_with(block);
    }
    report.checks.push(match overlap {
        None => Check::pass("layers_disjoint", "blocks of distinct layers never meet"),
        Some(w) => Check::fail("layers_disjoint", "two layer blocks overlap", Some(w)),
    });

    let mismatch = layers.iter().find_map(|l| {
        let level = tau.equal_to(&l.time);
        let covered = l.union(n);
        (covered != level).then(|| {
            (
                l.time.clone(),
                covered
                    .union(&level)
                    .difference(&covered.intersection(&level)),
            )
        })
    });
    report.checks.push(match mismatch {
        None => Check::pass("layers_cover_level_sets", "each layer unions to {tau = t}"),
        Some((t, w)) => Check::fail(
            "layers_cover_level_sets",
            format!("layer at t = {t} differs from the level set"),
            Some(w),
        ),
    });

    let blocks: Vec<Event> = layers
        .iter()
        .flat_map(|l| l.blocks.iter().cloned())
        .collect();
    report.checks.push(match Partition::new(n, blocks) {
        Ok(p) => Check::pass(
            "atoms_partition_omega",
            format!("{} blocks partition the space", p.num_blocks()),
        ),
        Err(e) => Check::fail("atoms_partition_omega", e.to_string(), None),
    });
    report
}

/// Compares the constructive atoms against the brute-force `F_τ`.
pub fn verify_theorem1<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
    bound: EnumerationBound,
) -> Result<Report> {
    verify_theorem1_with(tau, f, bound, BlockRule::Contained)
}

/// [`verify_theorem1`] with the layer construction swapped for `rule`.
pub fn verify_theorem1_with<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
    bound: EnumerationBound,
    rule: BlockRule,
) -> Result<Report> {
    let bruteforce = stopped_sigma_bruteforce(tau, f, bound)?;
    let layers = stopped_layers(tau, f, rule)?;
    let mut atoms: Vec<Event> = layers
        .iter()
        .flat_map(|l| l.blocks.iter().cloned())
        .collect();
    atoms.sort_by_key(|a| a.min_index());
    atoms.dedup();

    let mut report = Report::default();

    let outside = atoms.iter().find(|a| !bruteforce.contains(a));
    report.checks.push(match outside {
        None => Check::pass(
            "atoms_in_stopped_sigma",
            format!("all {} atoms belong to F_tau", atoms.len()),
        ),
        Some(a) => Check::fail(
            "atoms_in_stopped_sigma",
            "an atom is not in F_tau",
            Some(a.clone()),
        ),
    });

    let splitter = bruteforce
        .events()
        .iter()
        .find(|e| !e.is_empty() && atoms.iter().any(|a| e.is_strict_subset(a)));
    report.checks.push(match splitter {
        None => Check::pass("atoms_minimal", "no member of F_tau splits an atom"),
        Some(e) => Check::fail(
            "atoms_minimal",
            "a member of F_tau is a nonempty strict subset of an atom",
            Some(e.clone()),
        ),
    });

    let brute_atoms = atoms_of(&bruteforce)?;
    report
        .checks
        .push(if brute_atoms.blocks() == atoms.as_slice() {
            Check::pass(
                "atoms_match_bruteforce",
                format!("atoms of F_tau equal the {} constructed atoms", atoms.len()),
            )
        } else {
            let witness = brute_atoms
                .blocks()
                .iter()
                .find(|b| !atoms.contains(b))
                .or_else(|| atoms.iter().find(|a| !brute_atoms.blocks().contains(a)))
                .cloned();
            Check::fail(
                "atoms_match_bruteforce",
                format!(
                    "F_tau has {} atoms, construction gave {}",
                    brute_atoms.num_blocks(),
                    atoms.len()
                ),
                witness,
            )
        });

    report.checks.push(match Partition::new(f.len(), atoms) {
        Ok(p) => {
            let generated = generate_sigma(&p, bound)?;
            if generated == bruteforce {
                Check::pass(
                    "sigma_matches_bruteforce",
                    format!("sigma(atoms) = F_tau, {} events", generated.len()),
                )
            } else {
                let witness = generated
                    .events()
                    .iter()
                    .find(|e| !bruteforce.contains(e))
                    .or_else(|| bruteforce.events().iter().find(|e| !generated.contains(e)))
                    .cloned();
                Check::fail(
                    "sigma_matches_bruteforce",
                    format!(
                        "sigma(atoms) has {} events, F_tau has {}",
                        generated.len(),
                        bruteforce.len()
                    ),
                    witness,
                )
            }
        }
        Err(e) => Check::fail(
            "sigma_matches_bruteforce",
            format!("constructed blocks are not a partition: {e}"),
            None,
        ),
    });

    Ok(report)
}

/// Sizes and inclusion of `σ(τ)` inside `F_τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop3Report {
    pub included: bool,
    pub strict: bool,
    pub sigma_tau_events: usize,
    pub stopped_events: usize,
    pub counterexample: Option<Event>,
}

impl Prop3Report {
    pub fn to_report(&self) -> Report {
        let check = if self.included {
            Check::pass(
                "sigma_tau_included",
                format!(
                    "sigma(tau) ({} events) {} F_tau ({} events)",
                    self.sigma_tau_events,
                    if self.strict {
                        "is strictly inside"
                    } else {
                        "equals"
                    },
                    self.stopped_events
                ),
            )
        } else {
            Check::fail(
                "sigma_tau_included",
                "sigma(tau) has an event outside F_tau",
                self.counterexample.clone(),
            )
        };
        Report {
            checks: vec![check],
        }
    }
}

pub fn verify_prop3<T: TimeScalar>(
    tau: &StoppingTime<T>,
    f: &Filtration<T>,
    bound: EnumerationBound,
) -> Result<Prop3Report> {
    let bruteforce = stopped_sigma_bruteforce(tau, f, bound)?;
    let sigma_tau = generate_sigma(&crate::filtration::sigma_of_tau(tau, f)?, bound)?;
    let counterexample = sigma_tau
        .events()
        .iter()
        .find(|e| !bruteforce.contains(e))
        .cloned();
    let included = counterexample.is_none();
    Ok(Prop3Report {
        included,
        strict: included && sigma_tau.len() < bruteforce.len(),
        sigma_tau_events: sigma_tau.len(),
        stopped_events: bruteforce.len(),
        counterexample,
    })
}
