//! Truncated-precision p-adic arithmetic for over-convergent exponentials,
//! Witt vectors, Lubin–Tate formal groups and rank-one Frobenius structures.

pub mod classfield;
pub mod context;
pub mod diffmod;
pub mod error;
pub mod exponentials;
pub mod extensions;
pub mod linalg;
pub mod padic;
pub mod poly;
pub mod residue;
pub mod series;
pub mod witt;
pub mod wide;

pub use context::PrecisionContext;
pub use error::{Error, Result};
pub use padic::{El, LocalRing};
pub use residue::{FiniteField, Fq};
