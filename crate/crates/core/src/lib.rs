//! Toolkit for counting stable matchings.
//!
//! The crate covers the whole pipeline from preference profiles to the
//! numerical constants behind exponential upper bounds on the number of
//! stable matchings:
//!
//! * [`instances`] and [`matchings`]: preference profiles, deferred
//!   acceptance, blocking pairs and brute-force enumeration.
//! * [`rotations`]: exposed rotations, elimination, the rotation poset and
//!   checks of its chain structure.
//! * [`posets`]: finite posets, exact downset counting, tangled grids.
//! * [`counting_lens`]: the reveal-components counting bound on tuple
//!   families, with adapters for perfect matchings and downsets.
//! * [`distributions`]: exact pmfs and samplers for the interval-length
//!   random variables used by the bound.
//! * [`bounds`]: exact identities and rigorous enclosures of the series
//!   constants.
//! * [`verify`] and [`cli`]: the acceptance suite and the command line.

pub mod bitset;
pub mod bounds;
pub mod cli;
pub mod counting_lens;
pub mod distributions;
mod error;
pub mod exact;
pub mod instances;
pub mod matchings;
pub mod posets;
pub mod report;
pub mod rng;
pub mod rotations;
pub mod verify;

pub use error::{Error, Result};
pub use instances::{instance_i2, parse_instance, random_instance, serialize_instance, PreferenceProfile};
pub use matchings::{enumerate_stable_bruteforce, gale_shapley, unstable_pairs, Matching, Side};
pub use posets::{count_downsets, FinitePoset, TangledGrid};
pub use rotations::{build_rotation_poset, check_structure, Rotation, RotationPoset};
