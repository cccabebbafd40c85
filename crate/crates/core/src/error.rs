use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("determinant is {0}, expected 1")]
    Determinant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("class is not central or torsion")]
    NotTorsion,
    #[error("level {level} exceeds the enumeration limit {max}")]
    LevelTooLarge { level: u64, max: u64 },
    #[error("subset is not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("gcd({p}, {n}) != 1")]
    NotCoprime { p: u64, n: u64 },
    #[error("±alpha lies in Gamma({0}); the action on P1 is trivial")]
    TrivialAction(u64),
    #[error("alpha does not act transitively on P1(F_{0})")]
    NotTransitive(u64),
    #[error("level mismatch: expected {expected}, got {got}")]
    LevelMismatch { expected: u64, got: u64 },
    #[error("denominator vanishes: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}
