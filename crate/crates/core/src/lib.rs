//! Stopping-time sigma-algebras on finite filtered spaces.
//!
//! The crate computes the atoms of `F_τ` from the atoms of a filtration and
//! checks them against the definition of `F_τ` evaluated by brute force.
//!
//! Core types are generic over the time scalar through [`TimeScalar`]; the
//! aliases below fix it to integers or exact rationals.

pub mod cli;
pub mod error;
pub mod events;
pub mod filtration;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod render;
pub mod stopped;
pub mod time;

pub use error::{Error, Result};
pub use events::{
    atoms_of, generate_sigma, is_sigma_algebra, EnumerationBound, Event, Partition, SampleSpace,
    SigmaAlgebra, SigmaCheck,
};
pub use filtration::{
    is_adapted, is_stopping_time, level_set, sigma_of_tau, stopping_process, validate_filtration,
    Filtration, FiltrationReport, StoppingCheck, StoppingProcess, StoppingTime,
};
pub use generate::{
    gen_filtration, gen_instance, gen_non_stopping_time, gen_stopping_time, GenConfig,
};
pub use stopped::{
    stopped_atoms, stopped_sigma_bruteforce, verify_prop3, verify_structure, verify_theorem1,
    BlockRule, Report, StoppedResult,
};
pub use time::{Time, TimeAxis, TimeScalar};

/// Exact rational time points, as read from instance files.
pub type Rational = num_rational::Ratio<i64>;

pub type IntTime = Time<i64>;
pub type RationalTime = Time<Rational>;
pub type IntFiltration = Filtration<i64>;
pub type RationalFiltration = Filtration<Rational>;
pub type IntStoppingTime = StoppingTime<i64>;
pub type RationalStoppingTime = StoppingTime<Rational>;
