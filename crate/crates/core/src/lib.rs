#![no_std]
#![forbid(unsafe_code)]

//! Ergodic-theory laboratory core: C¹ (but not C^{1+α}) expanding maps of
//! the circle and the 2-torus built on positive-measure Bowen Cantor sets,
//! the invariant measures they carry, and the entropy / Lyapunov machinery
//! used to check Pesin's entropy formula numerically.
//!
//! The circle is modeled as `[-1, 1]` with `-1 ~ 1` (circumference 2).
//!
//! Everything here is pure and allocation-light. Randomness always comes
//! from a caller-supplied [`rand_core::RngCore`], so callers own seeding and
//! parallel stream layout.
//!
//! Module map:
//!
//! * [`piecewise_map`]: monotone pieces, circle maps, torus products.
//! * [`cantor_skeleton`]: atoms and gaps of a Bowen Cantor set, μ_K cylinders.
//! * [`map_builder`]: the concrete example systems.
//! * [`measures`]: measure representations, integration, weak* distance.
//! * [`entropy`]: partition entropy, cylinder tables, Pesin defect, distortion.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cantor_skeleton;
pub mod entropy;
mod error;
pub mod map_builder;
pub mod measures;
pub mod numeric;
pub mod piecewise_map;

pub use cantor_skeleton::{AlphaSchedule, BowenParams, BowenSkeleton, Location, Word};
pub use error::{Error, Inequality};
pub use map_builder::{BuiltSystem, CantorCarrier, Example1Spec, Example2Spec, SystemMap};
pub use measures::{Measure, Observable, ObservableFamily};
pub use numeric::Interval;
pub use piecewise_map::{CircleMap, MonotonePiece, TorusMap};
