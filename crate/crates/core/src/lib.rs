//! Finite-structure toolkit for groupoid quantales.
//!
//! The library implements, in both directions, the correspondence
//! between spatial strongly-Gelfand quantales satisfying the SGF axioms
//! and pairs of a sober-based set groupoid with a selection base of
//! bisection images:
//!
//! - [`topology`]: finite sober spaces, primes, closures, locally
//!   closed sets;
//! - [`groupoid`]: set groupoids, constructors from equivalence
//!   relations and group actions, bisection images;
//! - [`quantale`]: finite unital involutive quantales and the axiom
//!   checkers (distributivity, SG, SGF, inverse quantal frames);
//! - [`gq`]: selection bases and the groupoid quantale they generate;
//! - [`incidence`]: primes, the incidence relation, reconstruction of
//!   the groupoid from a quantale, the canonical embedding, and the
//!   round-trip verification;
//! - [`iso`]: isomorphism search with self-verifying certificates.

pub mod bits;
pub mod fixtures;
pub mod gq;
pub mod groupoid;
pub mod incidence;
pub mod iso;
pub mod json;
pub mod quantale;
pub mod search;
pub mod topology;

pub use gq::{GroupoidQuantale, SelectionBase};
pub use groupoid::{BisectionImage, FiniteGroupoid, GroupAction};
pub use quantale::{FiniteQuantale, SubsetQuantale};
pub use topology::FiniteSpace;
