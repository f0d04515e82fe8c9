//! The eight-path tree example: four time points, `F_3 = F_∞` the power set.
//!
//! ```text
//! t=0  t=1          t=2          t=3
//! Ω    {w1,w2}      {w1} {w2}    singletons
//!      {w3,w4}      {w3,w4}
//!      {w5..w8}     {w5,w6} {w7,w8}
//! ```
//!
//! with `τ = (1, 1, 3, 3, 2, 2, 3, 3)`.

use crate::events::{Event, Partition, SampleSpace};
use crate::filtration::{Filtration, StoppingTime};
use crate::time::{Time, TimeAxis};

/// The same instance in the JSON instance-file format.
pub const FIG1_JSON: &str = include_str!("../fixtures/fig1.json");

fn partition(blocks: &[&[usize]]) -> Partition {
    Partition::new(
        8,
        blocks
            .iter()
            .map(|b| Event::from_indices(8, b.iter().map(|i| i - 1)))
            .collect(),
    )
    .expect("fixture blocks form a partition")
}

pub fn fig1() -> (Filtration<i64>, StoppingTime<i64>) {
    let space = SampleSpace::numbered(8).expect("eight labels");
    let levels = vec![
        partition(&[&[1, 2, 3, 4, 5, 6, 7, 8]]),
        partition(&[&[1, 2], &[3, 4], &[5, 6, 7, 8]]),
        partition(&[&[1], &[2], &[3, 4], &[5, 6], &[7, 8]]),
        Partition::singletons(8).expect("eight singletons"),
    ];
    let filtration = Filtration::with_last_as_terminal(
        space,
        TimeAxis::range(4).expect("four time points"),
        levels,
    )
    .expect("fixture filtration is well formed");
    let tau = StoppingTime::new([1, 1, 3, 3, 2, 2, 3, 3].map(Time::Finite).to_vec());
    (filtration, tau)
}
