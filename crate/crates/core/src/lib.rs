//! Exact Hecke operators on conjugacy classes of `SL2(Z)`.
//!
//! * [`sl2`]: bignum matrices, generator words, amalgam words.
//! * [`conj`]: canonical conjugacy classes and formal sums of them.
//! * [`cover`]: orbits on `P1(F_p)`, coset representatives, congruence pullbacks.
//! * [`hecke`]: `T_p`, `e_p`, `T_N` and formal words in them.
//! * [`classfn`]: class functions on `SL2(Z/N)` and the dual operators.
//! * [`periods`]: Eichler cocycles of level one forms and eigenvalue recovery.

pub mod classfn;
pub mod conj;
pub mod cover;
mod error;
pub mod hecke;
pub mod periods;
pub mod random;
pub mod ser;
pub mod sl2;

pub use conj::{canonicalize, ClassType, ConjClass, LoopSum, PslClass};
pub use cover::{CongruenceSpec, OrbitDecomposition, ProjPoint};
pub use error::Error;
pub use hecke::HeckeWord;
pub use sl2::{AmalgamWord, GeneratorWord, Letter, Sign, Sl2, Syllable};

pub type Result<T> = std::result::Result<T, Error>;
