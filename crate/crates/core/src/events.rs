//! Finite sample spaces, events, partitions and explicit sigma-algebras.
//!
//! An [`Event`] is a bitset over the outcome indices `0..n` of a sample space.
//! Spaces with at most 64 outcomes keep their bits inline in a single machine
//! word; larger spaces spill to the heap. Every measurability question in the
//! crate reduces to AND/OR/NOT and population counts on these bitsets.
//!
//! A finite sigma-algebra is represented canonically by its atoms, which form a
//! [`Partition`]. The explicit event-list form [`SigmaAlgebra`] exists for the
//! brute-force paths and is produced from atoms by [`generate_sigma`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Environment variable consulted by [`EnumerationBound::from_env`].
pub const ENUMERATION_BOUND_ENV: &str = "STOPSIGMA_MAX_ATOMS";

/// Maximum number of atoms for which a sigma-algebra may be listed explicitly.
///
/// An explicit listing has `2^atoms` events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnumerationBound(pub usize);

impl EnumerationBound {
    pub const DEFAULT: EnumerationBound = EnumerationBound(20);

    /// Reads the bound from `STOPSIGMA_MAX_ATOMS`, falling back to the default
    /// when the variable is unset or unparsable.
    pub fn from_env() -> Self {
        std::env::var(ENUMERATION_BOUND_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(EnumerationBound)
            .unwrap_or_default()
    }

    pub fn check(self, atoms: usize) -> Result<()> {
        if atoms > self.0 || atoms >= usize::BITS as usize - 1 {
            return Err(Error::TooManyAtoms {
                atoms,
                bound: self.0,
            });
        }
        Ok(())
    }
}

impl Default for EnumerationBound {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// An ordered list of distinct, nonempty outcome labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl std::hash::Hash for SampleSpace {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.labels.hash(state);
    }
}

impl SampleSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || index.insert(label.clone(), i).is_some() {
                return Err(Error::BadLabel(label.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    /// Outcomes labelled `w1, w2, ..., wn`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("w{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn whole(&self) -> Event {
        Event::full(self.len())
    }

    /// Builds an event from outcome labels; `None` names the first unknown label.
    pub fn event<'a, I>(&self, labels: I) -> std::result::Result<Event, String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut event = Event::empty(self.len());
        for label in labels {
            match self.index_of(label) {
                Some(i) => event.insert(i),
                None => return Err(label.to_string()),
            }
        }
        Ok(event)
    }

    /// Renders an event as `{w1,w2}` using this space's labels.
    pub fn show_event(&self, event: &Event) -> String {
        let names: Vec<&str> = event.iter().map(|i| self.label(i)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn show_partition(&self, partition: &Partition) -> String {
        let blocks: Vec<String> = partition
            .blocks()
            .iter()
            .map(|b| self.show_event(b))
            .collect();
        format!("{{{}}}", blocks.join(","))
    }
}

/// A subset of the outcomes `0..n` of a finite sample space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Event {
    universe: usize,
    words: SmallVec<[u64; 1]>,
}

impl Event {
    pub fn empty(universe: usize) -> Self {
        let n_words = universe.div_ceil(WORD_BITS).max(1);
        Self {
            universe,
            words: SmallVec::from_elem(0, n_words),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut event = Self::empty(universe);
        for w in event.words.iter_mut() {
            *w = u64::MAX;
        }
        event.mask_tail();
        event
    }

    pub fn singleton(universe: usize, index: usize) -> Self {
        let mut event = Self::empty(universe);
        event.insert(index);
        event
    }

    /// Panics if an index is outside `0..universe`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut event = Self::empty(universe);
        for i in indices {
            event.insert(i);
        }
        event
    }

    /// Events over spaces of up to 64 outcomes, from a raw bitmask.
    pub fn from_bits(universe: usize, bits: u64) -> Self {
        assert!(universe <= WORD_BITS, "from_bits needs universe <= 64");
        let mut event = Self::empty(universe);
        event.words[0] = bits;
        event.mask_tail();
        event
    }

    fn mask_tail(&mut self) {
        let rem = self.universe % WORD_BITS;
        let last = self.words.len() - 1;
        if self.universe == 0 {
            self.words[0] = 0;
        } else if rem != 0 {
            self.words[last] &= (1u64 << rem) - 1;
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, index: usize) {
        assert!(
            index < self.universe,
            "outcome index {index} outside universe of size {}",
            self.universe
        );
        self.words[index / WORD_BITS] |= 1u64 << (index % WORD_BITS);
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.universe {
            self.words[index / WORD_BITS] &= !(1u64 << (index % WORD_BITS));
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.universe
    }

    pub fn min_index(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    fn zip_with(&self, other: &Event, f: impl Fn(u64, u64) -> u64) -> Event {
        assert_eq!(
            self.universe, other.universe,
            "events over different sample spaces"
        );
        let mut out = self.clone();
        for (a, &b) in out.words.iter_mut().zip(other.words.iter()) {
            *a = f(*a, b);
        }
        out
    }

    pub fn union(&self, other: &Event) -> Event {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Event) -> Event {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Event) -> Event {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> Event {
        let mut out = self.clone();
        for w in out.words.iter_mut() {
            *w = !*w;
        }
        out.mask_tail();
        out
    }

    pub fn union_with(&mut self, other: &Event) {
        assert_eq!(self.universe, other.universe);
        for (a, &b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Event) {
        assert_eq!(self.universe, other.universe);
        for (a, &b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.universe == other.universe
            && self
                .words
                .iter()
                .zip(other.words.iter())
                .all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_strict_subset(&self, other: &Event) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(&a, &b)| a & b == 0)
    }

    pub fn intersects(&self, other: &Event) -> bool {
        !self.is_disjoint(other)
    }
}

/// Orders events by universe size, then as binary numbers whose bit `i` is
/// outcome `i`.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.universe
            .cmp(&other.universe)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Disjoint nonempty blocks covering `0..n`, in canonical order.
///
/// Blocks are sorted by their smallest member, so two partitions are equal
/// exactly when their block lists are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    universe: usize,
    blocks: Vec<Event>,
}

impl Partition {
    pub fn new(universe: usize, mut blocks: Vec<Event>) -> Result<Self> {
        if universe == 0 {
            return Err(Error::EmptySpace);
        }
        let mut seen = Event::empty(universe);
        for block in &blocks {
            if block.universe() != universe {
                return Err(Error::MixedSpaces {
                    left: universe,
                    right: block.universe(),
                });
            }
            if block.is_empty() {
                return Err(Error::NotAPartition("empty block".into()));
            }
            if block.intersects(&seen) {
                return Err(Error::NotAPartition(format!(
                    "block {block:?} overlaps an earlier block"
                )));
            }
            seen.union_with(block);
        }
        if !seen.is_full() {
            let missing = seen.complement();
            return Err(Error::NotAPartition(format!(
                "outcomes {missing:?} are not covered"
            )));
        }
        blocks.sort_by_key(|b| b.min_index());
        Ok(Self { universe, blocks })
    }

    /// Partition from a block id per outcome.
    pub fn from_labels(assignment: &[usize]) -> Result<Self> {
        let universe = assignment.len();
        let mut by_id: HashMap<usize, Event> = HashMap::new();
        for (i, &id) in assignment.iter().enumerate() {
            by_id
                .entry(id)
                .or_insert_with(|| Event::empty(universe))
                .insert(i);
        }
        Self::new(universe, by_id.into_values().collect())
    }

    /// The atoms of the trivial sigma-algebra `{∅, Ω}`.
    pub fn trivial(universe: usize) -> Result<Self> {
        Self::new(universe, vec![Event::full(universe)])
    }

    /// The atoms of the power set.
    pub fn singletons(universe: usize) -> Result<Self> {
        Self::new(
            universe,
            (0..universe)
                .map(|i| Event::singleton(universe, i))
                .collect(),
        )
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn blocks(&self) -> &[Event] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Event> {
        self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// The block containing `outcome`.
    pub fn block_of(&self, outcome: usize) -> &Event {
        self.blocks
            .iter()
            .find(|b| b.contains(outcome))
            .expect("partition covers every outcome")
    }

    /// Block index for every outcome.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.universe];
        for (bi, block) in self.blocks.iter().enumerate() {
            for i in block.iter() {
                out[i] = bi;
            }
        }
        out
    }

    /// The first block that `event` cuts into two nonempty pieces, if any.
    ///
    /// `None` means the event is a union of blocks, i.e. it belongs to the
    /// sigma-algebra these blocks generate.
    pub fn split_block(&self, event: &Event) -> Option<&Event> {
        self.blocks.iter().find(|b| {
            let inside = b.intersection(event);
            !inside.is_empty() && &inside != *b
        })
    }

    pub fn measures(&self, event: &Event) -> bool {
        event.universe() == self.universe && self.split_block(event).is_none()
    }

    fn same_space(&self, other: &Partition) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::MixedSpaces {
                left: self.universe,
                right: other.universe,
            });
        }
        Ok(())
    }

    /// True iff every block of `self` lies inside a block of `coarser`,
    /// i.e. `σ(coarser) ⊆ σ(self)`.
    pub fn refines(&self, coarser: &Partition) -> Result<bool> {
        self.same_space(coarser)?;
        Ok(self.first_unrefined_block(coarser).is_none())
    }

    /// A block of `self` that straddles two blocks of `coarser`.
    pub fn first_unrefined_block(&self, coarser: &Partition) -> Option<&Event> {
        self.blocks.iter().find(|b| {
            let first = b.min_index().expect("blocks are nonempty");
            !b.is_subset(coarser.block_of(first))
        })
    }

    /// Common refinement: all nonempty pairwise block intersections.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.same_space(other)?;
        let mut blocks = Vec::new();
        for a in &self.blocks {
            for b in &other.blocks {
                let c = a.intersection(b);
                if !c.is_empty() {
                    blocks.push(c);
                }
            }
        }
        Partition::new(self.universe, blocks)
    }

    /// Finest common coarsening: connected components of the block-overlap
    /// graph.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.same_space(other)?;
        let mut parent: Vec<usize> = (0..self.universe).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for block in self.blocks.iter().chain(other.blocks.iter()) {
            let mut members = block.iter();
            let Some(root) = members.next() else { continue };
            for m in members {
                let (a, b) = (find(&mut parent, root), find(&mut parent, m));
                if a != b {
                    parent[b] = a;
                }
            }
        }
        let roots: Vec<usize> = (0..self.universe).map(|i| find(&mut parent, i)).collect();
        Partition::from_labels(&roots)
    }
}

/// Outcome of [`SigmaAlgebra::check`]; every failure carries a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SigmaCheck {
    Valid,
    MissingEmpty,
    MissingWhole,
    MissingComplement { event: Event },
    MissingUnion { left: Event, right: Event },
}

impl SigmaCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, SigmaCheck::Valid)
    }
}

impl fmt::Display for SigmaCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaCheck::Valid => write!(f, "valid"),
            SigmaCheck::MissingEmpty => write!(f, "empty set missing"),
            SigmaCheck::MissingWhole => write!(f, "whole space missing"),
            SigmaCheck::MissingComplement { event } => {
                write!(f, "complement of {event:?} missing")
            }
            SigmaCheck::MissingUnion { left, right } => {
                write!(f, "union of {left:?} and {right:?} missing")
            }
        }
    }
}

/// A finite family of events listed explicitly, sorted and deduplicated.
///
/// Only the brute-force paths build these; the canonical form of a finite
/// sigma-algebra is its atom [`Partition`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SigmaAlgebra {
    universe: usize,
    events: Vec<Event>,
}

impl SigmaAlgebra {
    /// Wraps a family of events without checking closure; see [`Self::check`].
    pub fn new(universe: usize, mut events: Vec<Event>) -> Result<Self> {
        if universe == 0 {
            return Err(Error::EmptySpace);
        }
        if let Some(e) = events.iter().find(|e| e.universe() != universe) {
            return Err(Error::MixedSpaces {
                left: universe,
                right: e.universe(),
            });
        }
        events.sort();
        events.dedup();
        Ok(Self { universe, events })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, event: &Event) -> bool {
        self.events.binary_search(event).is_ok()
    }

    pub fn is_subset(&self, other: &SigmaAlgebra) -> bool {
        self.universe == other.universe && self.events.iter().all(|e| other.contains(e))
    }

    /// Checks that the family holds ∅ and Ω and is closed under complement
    /// and pairwise union.
    pub fn check(&self) -> SigmaCheck {
        if self.atoms_if_sigma().is_some() {
            return SigmaCheck::Valid;
        }
        self.find_violation()
    }

    /// Fast path: derive candidate atoms by intersection and confirm the
    /// family is exactly the set of their unions.
    fn atoms_if_sigma(&self) -> Option<Partition> {
        let atoms = Partition::new(self.universe, self.intersection_atoms()).ok()?;
        let k = atoms.num_blocks();
        if k >= usize::BITS as usize - 1 || self.events.len() != 1usize << k {
            return None;
        }
        self.events
            .iter()
            .all(|e| atoms.measures(e))
            .then_some(atoms)
    }

    /// For each outcome, the intersection of every member event containing it.
    fn intersection_atoms(&self) -> Vec<Event> {
        let mut covered = Event::empty(self.universe);
        let mut atoms = Vec::new();
        for i in 0..self.universe {
            if covered.contains(i) {
                continue;
            }
            let mut atom = Event::full(self.universe);
            for e in self.events.iter().filter(|e| e.contains(i)) {
                atom.intersect_with(e);
            }
            covered.union_with(&atom);
            atoms.push(atom);
        }
        atoms
    }

    fn find_violation(&self) -> SigmaCheck {
        if !self.contains(&Event::empty(self.universe)) {
            return SigmaCheck::MissingEmpty;
        }
        if !self.contains(&Event::full(self.universe)) {
            return SigmaCheck::MissingWhole;
        }
        for e in &self.events {
            if !self.contains(&e.complement()) {
                return SigmaCheck::MissingComplement { event: e.clone() };
            }
        }
        for (i, a) in self.events.iter().enumerate() {
            for b in &self.events[i + 1..] {
                if !self.contains(&a.union(b)) {
                    return SigmaCheck::MissingUnion {
                        left: a.clone(),
                        right: b.clone(),
                    };
                }
            }
        }
        unreachable!("a family with ∅ and Ω closed under complement and union has atoms")
    }
}

/// Checks an explicit family of events for the sigma-algebra axioms.
pub fn is_sigma_algebra(universe: usize, events: &[Event]) -> Result<SigmaCheck> {
    Ok(SigmaAlgebra::new(universe, events.to_vec())?.check())
}

/// The atoms (minimal nonempty members) of an explicit sigma-algebra.
pub fn atoms_of(sigma: &SigmaAlgebra) -> Result<Partition> {
    match sigma.atoms_if_sigma() {
        Some(atoms) => Ok(atoms),
        None => Err(Error::NotASigmaAlgebra(sigma.find_violation().to_string())),
    }
}

/// Atoms of a family trusted to be a sigma-algebra; closure is not checked.
pub fn atoms_of_unchecked(sigma: &SigmaAlgebra) -> Result<Partition> {
    Partition::new(sigma.universe, sigma.intersection_atoms())
}

/// All `2^k` unions of the `k` blocks of `atoms`, in canonical order.
pub fn generate_sigma(atoms: &Partition, bound: EnumerationBound) -> Result<SigmaAlgebra> {
    let k = atoms.num_blocks();
    bound.check(k)?;
    let blocks = atoms.blocks();
    let universe = atoms.universe();
    let mut events = Vec::with_capacity(1 << k);
    events.push(Event::empty(universe));
    // Each block doubles the list: the old events, then the old events plus it.
    for block in blocks {
        let grown: Vec<Event> = events.iter().map(|e| e.union(block)).collect();
        events.extend(grown);
    }
    SigmaAlgebra::new(universe, events)
}
