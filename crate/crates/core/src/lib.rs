//! Exact computations in the Kauffman bracket skein theory of `SU(2)` at a
//! root of unity: Temperley-Lieb algebras and Jones-Wenzl idempotents,
//! evaluation of colored framed link and trivalent graph diagrams in the
//! 3-sphere, reduced skein spaces of solid tori and handlebodies, Dehn twist
//! representations of mapping class groups, and commutant / modular invariant
//! analysis of those representations.
//!
//! All arithmetic is exact, in the cyclotomic field `Q(zeta_{4r})` extended
//! by the surgery normalization scalar `eta`. No floating point enters any
//! certified computation; numeric embeddings are advisory output only.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod matrix;
pub mod mcg;
pub mod recoupling;
pub mod scalars;
pub mod spaces;
pub mod tl;

pub use error::SkeinError;
pub use scalars::{Ctx, CycloField, CycloScalar, Level};

pub type Result<T> = std::result::Result<T, SkeinError>;
