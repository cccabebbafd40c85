//! Conjugacy classes of `SL2(Z)` and `PSL2(Z)`.
//!
//! A class is keyed by the cyclically reduced amalgam word of any of its
//! elements. Length 0 words are `±I`, length 1 words are the six non-central
//! torsion classes, and longer words (always of even length) are stored at
//! their least rotation under `s < u1 < u2`.
//!
//! Torsion labels: `(+, s)` is the class of `S`, `(-, s)` that of `-S`;
//! `(+, u1)` is `U` (order 6), `(-, u1)` is `-U` (order 3), `(+, u2)` is `U^2`
//! (order 3) and `(-, u2)` is `-U^2 = U^-1` (order 6).

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::sl2::{lift_letters, merge_letters, AmalgamWord, Letter, Sign, Sl2};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConjClass {
    Central(Sign),
    Torsion(Sign, Letter),
    Word(Sign, Vec<Letter>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassType {
    CentralId,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Canonical class of `m`.
pub fn canonicalize(m: &Sl2) -> ConjClass {
    ConjClass::from_word(m.decompose().to_amalgam())
}

/// Index of the lexicographically least rotation (two-pointer minimum expression).
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = &s[(i + k) % n];
        let b = &s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

fn rotated<T: Clone>(s: &[T], r: usize) -> Vec<T> {
    s[r..].iter().chain(s[..r].iter()).cloned().collect()
}

impl ConjClass {
    /// Class of the element represented by an amalgam word.
    pub fn from_word(w: AmalgamWord) -> ConjClass {
        let mut sign = w.sign;
        let mut letters: VecDeque<Letter> = w.letters().iter().copied().collect();
        // conjugate by the last letter until the ends have different types
        while letters.len() >= 2 && letters[0].is_s() == letters[letters.len() - 1].is_s() {
            let last = letters.pop_back().unwrap();
            let first = letters.pop_front().unwrap();
            let (s, merged) = merge_letters(last, first);
            sign = sign * s;
            if let Some(l) = merged {
                letters.push_front(l);
            }
        }
        match letters.len() {
            0 => ConjClass::Central(sign),
            1 => ConjClass::Torsion(sign, letters[0]),
            _ => {
                let v: Vec<Letter> = letters.into_iter().collect();
                let r = least_rotation(&v);
                ConjClass::Word(sign, rotated(&v, r))
            }
        }
    }

    pub fn identity() -> ConjClass {
        ConjClass::Central(Sign::Plus)
    }

    /// The class of `T`.
    pub fn horocycle() -> ConjClass {
        canonicalize(&Sl2::t())
    }

    /// Class of `T^n`.
    pub fn horocycle_pow(n: i64) -> ConjClass {
        canonicalize(&Sl2::t_pow(&BigInt::from(n)))
    }

    pub fn sign(&self) -> Sign {
        match self {
            ConjClass::Central(s) | ConjClass::Torsion(s, _) | ConjClass::Word(s, _) => *s,
        }
    }

    pub fn representative(&self) -> Sl2 {
        match self {
            ConjClass::Central(s) => Sl2::identity().signed(*s),
            ConjClass::Torsion(s, l) => l.lift().signed(*s),
            ConjClass::Word(s, w) => lift_letters(w).signed(*s),
        }
    }

    pub fn trace(&self) -> BigInt {
        self.representative().trace()
    }

    pub fn classify(&self) -> ClassType {
        match self {
            ConjClass::Central(_) => ClassType::CentralId,
            ConjClass::Torsion(..) => ClassType::Elliptic,
            ConjClass::Word(..) => {
                if self.trace().abs() == BigInt::from(2) {
                    ClassType::Parabolic
                } else {
                    ClassType::Hyperbolic
                }
            }
        }
    }

    pub fn is_torsion(&self) -> bool {
        !matches!(self, ConjClass::Word(..))
    }

    /// Element order for central and torsion classes.
    pub fn order(&self) -> Option<u32> {
        match self {
            ConjClass::Central(Sign::Plus) => Some(1),
            ConjClass::Central(Sign::Minus) => Some(2),
            ConjClass::Torsion(_, Letter::S) => Some(4),
            ConjClass::Torsion(Sign::Plus, Letter::U1) | ConjClass::Torsion(Sign::Minus, Letter::U2) => Some(6),
            ConjClass::Torsion(..) => Some(3),
            ConjClass::Word(..) => None,
        }
    }

    /// Class of `γ^m`. Word classes are repeated directly: the least rotation
    /// of `w^m` is the `m`-th power of the least rotation of `w`.
    pub fn power(&self, m: u64) -> ConjClass {
        if m == 0 {
            return ConjClass::identity();
        }
        let sign_pow = |s: Sign| if m % 2 == 0 { Sign::Plus } else { s };
        match self {
            ConjClass::Central(s) => ConjClass::Central(sign_pow(*s)),
            ConjClass::Torsion(..) => canonicalize(&self.representative().pow((m % 12) as i64)),
            ConjClass::Word(s, w) => {
                let mut v = Vec::with_capacity(w.len() * m as usize);
                for _ in 0..m {
                    v.extend_from_slice(w);
                }
                ConjClass::Word(sign_pow(*s), v)
            }
        }
    }

    pub fn negate(&self) -> ConjClass {
        match self {
            ConjClass::Central(s) => ConjClass::Central(s.flip()),
            ConjClass::Torsion(s, l) => ConjClass::Torsion(s.flip(), *l),
            ConjClass::Word(s, w) => ConjClass::Word(s.flip(), w.clone()),
        }
    }

    pub fn to_psl(&self) -> PslClass {
        match self {
            ConjClass::Central(_) => PslClass::Identity,
            ConjClass::Torsion(_, l) => PslClass::Torsion(*l),
            ConjClass::Word(_, w) => PslClass::Word(w.clone()),
        }
    }

    /// Every central and non-central torsion class: `±I` then the six torsion classes.
    pub fn torsion_classes() -> Vec<ConjClass> {
        let mut v = vec![ConjClass::Central(Sign::Plus), ConjClass::Central(Sign::Minus)];
        for s in [Sign::Plus, Sign::Minus] {
            for l in [Letter::S, Letter::U1, Letter::U2] {
                v.push(ConjClass::Torsion(s, l));
            }
        }
        v
    }
}

fn sign_str(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjClass::Central(s) => write!(f, "{}I", sign_str(*s)),
            ConjClass::Torsion(s, l) => write!(f, "{}[{}]", sign_str(*s), l.name()),
            ConjClass::Word(s, w) => {
                let names: Vec<&str> = w.iter().map(|l| l.name()).collect();
                write!(f, "{}[{}]", sign_str(*s), names.join(" "))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ClassJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sign: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    letter: Option<Letter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    letters: Option<Vec<Letter>>,
}

impl Serialize for ConjClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let sign = Some(self.sign().as_i32());
        let j = match self {
            ConjClass::Central(_) => ClassJson { kind: "central".into(), sign, letter: None, letters: None },
            ConjClass::Torsion(_, l) => ClassJson { kind: "torsion".into(), sign, letter: Some(*l), letters: None },
            ConjClass::Word(_, w) => ClassJson { kind: "word".into(), sign, letter: None, letters: Some(w.clone()) },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConjClass {
    /// Word classes are re-canonicalized, so any alternating rotation is accepted.
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<ConjClass, D::Error> {
        let j = ClassJson::deserialize(de)?;
        let sign = j
            .sign
            .and_then(|v| Sign::from_i64(v as i64))
            .ok_or_else(|| D::Error::custom("sign must be 1 or -1"))?;
        match j.kind.as_str() {
            "central" => Ok(ConjClass::Central(sign)),
            "torsion" => {
                let l = j.letter.ok_or_else(|| D::Error::custom("torsion class needs \"letter\""))?;
                Ok(ConjClass::Torsion(sign, l))
            }
            "word" => {
                let w = j.letters.ok_or_else(|| D::Error::custom("word class needs \"letters\""))?;
                let aw = AmalgamWord::from_letters(sign, &w);
                if aw.letters().len() != w.len() || w.len() < 2 || w.len() % 2 != 0 {
                    return Err(D::Error::custom("letters must form an alternating word of even length"));
                }
                Ok(ConjClass::from_word(aw))
            }
            other => Err(D::Error::custom(format!("unknown class kind {other:?}"))),
        }
    }
}

/// Conjugacy class of `PSL2(Z)`: a [`ConjClass`] with the sign forgotten.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PslClass {
    Identity,
    Torsion(Letter),
    Word(Vec<Letter>),
}

impl fmt::Display for PslClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PslClass::Identity => write!(f, "I"),
            PslClass::Torsion(l) => write!(f, "[{}]", l.name()),
            PslClass::Word(w) => {
                let names: Vec<&str> = w.iter().map(|l| l.name()).collect();
                write!(f, "[{}]", names.join(" "))
            }
        }
    }
}

impl Serialize for PslClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let j = match self {
            PslClass::Identity => ClassJson { kind: "identity".into(), sign: None, letter: None, letters: None },
            PslClass::Torsion(l) => ClassJson { kind: "torsion".into(), sign: None, letter: Some(*l), letters: None },
            PslClass::Word(w) => ClassJson { kind: "word".into(), sign: None, letter: None, letters: Some(w.clone()) },
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PslClass {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<PslClass, D::Error> {
        let j = ClassJson::deserialize(de)?;
        match j.kind.as_str() {
            "identity" => Ok(PslClass::Identity),
            "torsion" => Ok(PslClass::Torsion(j.letter.ok_or_else(|| D::Error::custom("missing letter"))?)),
            "word" => {
                let w = j.letters.ok_or_else(|| D::Error::custom("missing letters"))?;
                match ConjClass::from_word(AmalgamWord::from_letters(Sign::Plus, &w)) {
                    ConjClass::Word(_, v) if v.len() == w.len() => Ok(PslClass::Word(v)),
                    _ => Err(D::Error::custom("letters must form an alternating word of even length")),
                }
            }
            other => Err(D::Error::custom(format!("unknown class kind {other:?}"))),
        }
    }
}

/// Finite integer combination of classes. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoopSum<K: Ord = ConjClass> {
    terms: BTreeMap<K, BigInt>,
}

impl<K: Ord> Default for LoopSum<K> {
    fn default() -> Self {
        LoopSum { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> LoopSum<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(k: K) -> Self {
        let mut s = Self::zero();
        s.add_term(k, BigInt::one());
        s
    }

    pub fn add_term(&mut self, k: K, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &BigInt) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn scaled(&self, c: &BigInt) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &BigInt::one());
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-BigInt::one());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &K) -> BigInt {
        self.terms.get(k).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &BigInt)> {
        self.terms.iter()
    }

    /// Linear extension of `f`.
    pub fn map_linear<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> LoopSum<K2>) -> LoopSum<K2> {
        let mut out = LoopSum::zero();
        for (k, c) in &self.terms {
            out.add_scaled(&f(k), c);
        }
        out
    }

    /// Linear extension of a class-to-class map.
    pub fn map_classes<K2: Ord + Clone>(&self, mut f: impl FnMut(&K) -> K2) -> LoopSum<K2> {
        let mut out = LoopSum::zero();
        for (k, c) in &self.terms {
            out.add_term(f(k), c.clone());
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, BigInt)> for LoopSum<K> {
    fn from_iter<I: IntoIterator<Item = (K, BigInt)>>(iter: I) -> Self {
        let mut s = LoopSum::zero();
        for (k, c) in iter {
            s.add_term(k, c);
        }
        s
    }
}

impl LoopSum<ConjClass> {
    pub fn from_matrix(m: &Sl2) -> Self {
        LoopSum::single(canonicalize(m))
    }
}

impl<K: Ord + fmt::Display> fmt::Display for LoopSum<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("{c}*{k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson<K> {
    class: K,
    coeff: String,
}

impl<K: Ord + Serialize> Serialize for LoopSum<K> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (k, c) in &self.terms {
            #[derive(Serialize)]
            struct Term<'a, K> {
                class: &'a K,
                coeff: String,
            }
            seq.serialize_element(&Term { class: k, coeff: c.to_string() })?;
        }
        seq.end()
    }
}

impl<'de, K: Ord + Clone + Deserialize<'de>> Deserialize<'de> for LoopSum<K> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<LoopSum<K>, D::Error> {
        let terms: Vec<TermJson<K>> = Vec::deserialize(de)?;
        let mut out = LoopSum::zero();
        for t in terms {
            let c: BigInt = t.coeff.trim().parse().map_err(|_| D::Error::custom(format!("bad coefficient {:?}", t.coeff)))?;
            out.add_term(t.class, c);
        }
        Ok(out)
    }
}

/// Adams operator: `[γ] ↦ [γ^m]`.
pub fn adams(x: &LoopSum, m: u64) -> LoopSum {
    x.map_classes(|c| c.power(m))
}

/// Conjugation by `diag(1, -1)`.
pub fn real_frobenius(x: &LoopSum) -> LoopSum {
    x.map_classes(|c| {
        let r = c.representative();
        let [a, b, cc, d] = r.into_entries();
        canonicalize(&Sl2::new_unchecked(a, -b, -cc, d))
    })
}

pub fn project_psl(x: &LoopSum) -> LoopSum<PslClass> {
    x.map_classes(ConjClass::to_psl)
}

/// Distinct elements given by words of length at most `max_len` over `{S, T, T^-1}`.
pub fn short_words(max_len: usize) -> Vec<Sl2> {
    let gens = [Sl2::s(), Sl2::t(), Sl2::t().inverse()];
    let mut seen: HashSet<Sl2> = HashSet::new();
    let mut frontier = vec![Sl2::identity()];
    seen.insert(Sl2::identity());
    let mut out = vec![Sl2::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let x = w * g;
                if seen.insert(x.clone()) {
                    out.push(x.clone());
                    next.push(x);
                }
            }
        }
        frontier = next;
    }
    out
}

/// `{P a P^-1 : P in conjugators}`.
pub fn conjugate_orbit(a: &Sl2, conjugators: &[Sl2]) -> HashSet<Sl2> {
    conjugators.iter().map(|p| a.conjugate_by(p)).collect()
}
