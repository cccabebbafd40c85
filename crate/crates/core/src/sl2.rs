//! Exact arithmetic in SL2(Z).
//!
//! Entries are arbitrary-precision integers, so nothing here can overflow.
//! The module also houses the two word forms used everywhere else: words in
//! the standard generators `S`, `T^k` and strictly alternating words in the
//! amalgam alphabet `{s, u, u^2}` coming from `SL2(Z) = Z/4 *_{Z/2} Z/6`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Overall sign `±1` carried by words and conjugacy classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i64(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// `(-1)^k` as a sign.
    pub fn parity(k: &BigInt) -> Sign {
        if k.is_odd() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A 2x2 integer matrix `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sl2 {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl Sl2 {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Sl2, Error> {
        let det = &a * &d - &b * &c;
        if !det.is_one() {
            return Err(Error::Determinant(det.to_string()));
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Sl2, Error> {
        Sl2::new(a.into(), b.into(), c.into(), d.into())
    }

    /// Caller guarantees the determinant.
    pub(crate) fn new_unchecked(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Sl2 {
        debug_assert!((&a * &d - &b * &c).is_one());
        Sl2 { a, b, c, d }
    }

    pub fn identity() -> Sl2 {
        Sl2::new_unchecked(1.into(), 0.into(), 0.into(), 1.into())
    }

    pub fn neg_identity() -> Sl2 {
        Sl2::new_unchecked((-1).into(), 0.into(), 0.into(), (-1).into())
    }

    /// `S = [[0, -1], [1, 0]]`, order 4.
    pub fn s() -> Sl2 {
        Sl2::new_unchecked(0.into(), (-1).into(), 1.into(), 0.into())
    }

    /// `T = [[1, 1], [0, 1]]`.
    pub fn t() -> Sl2 {
        Sl2::t_pow(&BigInt::one())
    }

    pub fn t_pow(k: &BigInt) -> Sl2 {
        Sl2::new_unchecked(1.into(), k.clone(), 0.into(), 1.into())
    }

    /// `U = ST = [[0, -1], [1, 1]]`, order 6.
    pub fn u() -> Sl2 {
        Sl2::new_unchecked(0.into(), (-1).into(), 1.into(), 1.into())
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn into_entries(self) -> [BigInt; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }

    /// `±I`.
    pub fn is_central(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2::new_unchecked(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn neg(&self) -> Sl2 {
        Sl2::new_unchecked(-&self.a, -&self.b, -&self.c, -&self.d)
    }

    pub fn signed(&self, sign: Sign) -> Sl2 {
        match sign {
            Sign::Plus => self.clone(),
            Sign::Minus => self.neg(),
        }
    }

    pub fn pow(&self, e: i64) -> Sl2 {
        let mut base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Sl2::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `p * self * p^-1`.
    pub fn conjugate_by(&self, p: &Sl2) -> Sl2 {
        &(p * self) * &p.inverse()
    }

    /// Entries reduced into `0..n`.
    pub fn reduce(&self, n: u64) -> [u64; 4] {
        let m = BigInt::from(n);
        let r = |x: &BigInt| x.mod_floor(&m).to_u64().expect("residue fits u64");
        [r(&self.a), r(&self.b), r(&self.c), r(&self.d)]
    }

    /// Conjugation by `diag(n, 1)`: `[[a, nb], [c/n, d]]`, defined when `n | c`.
    pub fn conjugate_by_gn(&self, n: u64) -> Option<Sl2> {
        let n = BigInt::from(n);
        let (q, r) = self.c.div_mod_floor(&n);
        if !r.is_zero() {
            return None;
        }
        Some(Sl2::new_unchecked(self.a.clone(), &self.b * &n, q, self.d.clone()))
    }

    /// Word in `S` and powers of `T` evaluating to `self`.
    ///
    /// Euclidean reduction on the first column: while `c != 0` write
    /// `M = T^q S M'` with `q = floor(a / c)`; the remaining upper triangular
    /// matrix is `±T^k`.
    pub fn decompose(&self) -> GeneratorWord {
        let mut syllables = Vec::new();
        let (mut a, mut b, mut c, mut d) =
            (self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone());
        while !c.is_zero() {
            let q = a.div_floor(&c);
            if !q.is_zero() {
                syllables.push(Syllable::T(q.clone()));
            }
            syllables.push(Syllable::S);
            // M' = S^-1 T^-q M
            let a1 = &a - &q * &c;
            let b1 = &b - &q * &d;
            a = c;
            b = d;
            c = -a1;
            d = -b1;
        }
        let sign = if a.is_one() { Sign::Plus } else { Sign::Minus };
        let k = &a * &b;
        if !k.is_zero() {
            syllables.push(Syllable::T(k));
        }
        GeneratorWord { sign, syllables }
    }
}

impl Mul for &Sl2 {
    type Output = Sl2;
    fn mul(self, y: &Sl2) -> Sl2 {
        Sl2::new_unchecked(
            &self.a * &y.a + &self.b * &y.c,
            &self.a * &y.b + &self.b * &y.d,
            &self.c * &y.a + &self.d * &y.c,
            &self.c * &y.b + &self.d * &y.d,
        )
    }
}

impl Mul for Sl2 {
    type Output = Sl2;
    fn mul(self, y: Sl2) -> Sl2 {
        &self * &y
    }
}

impl fmt::Display for Sl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for Sl2 {
    type Err = Error;

    /// `"a,b,c,d"`, decimal, optional leading minus.
    fn from_str(s: &str) -> Result<Sl2, Error> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected four entries \"a,b,c,d\", got {s:?}")));
        }
        let mut e = Vec::with_capacity(4);
        for p in parts {
            let ok = !p.is_empty()
                && p.strip_prefix('-').unwrap_or(p).chars().all(|ch| ch.is_ascii_digit())
                && p != "-";
            if !ok {
                return Err(Error::Parse(format!("bad integer {p:?}")));
            }
            e.push(p.parse::<BigInt>().map_err(|err| Error::Parse(err.to_string()))?);
        }
        let d = e.pop().unwrap();
        let c = e.pop().unwrap();
        let b = e.pop().unwrap();
        let a = e.pop().unwrap();
        Sl2::new(a, b, c, d)
    }
}

#[derive(Serialize, Deserialize)]
struct Sl2Json {
    a: String,
    b: String,
    c: String,
    d: String,
}

impl Serialize for Sl2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Sl2Json {
            a: self.a.to_string(),
            b: self.b.to_string(),
            c: self.c.to_string(),
            d: self.d.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sl2 {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Sl2, D::Error> {
        let j = Sl2Json::deserialize(de)?;
        let text = format!("{},{},{},{}", j.a, j.b, j.c, j.d);
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// One syllable of a [`GeneratorWord`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Syllable {
    S,
    T(BigInt),
}

/// `sign * (product of syllables)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorWord {
    pub sign: Sign,
    pub syllables: Vec<Syllable>,
}

impl GeneratorWord {
    pub fn evaluate(&self) -> Sl2 {
        let s = Sl2::s();
        let mut acc = Sl2::identity();
        for syl in &self.syllables {
            acc = match syl {
                Syllable::S => &acc * &s,
                Syllable::T(k) => &acc * &Sl2::t_pow(k),
            };
        }
        acc.signed(self.sign)
    }

    /// Rewrite in the amalgam alphabet using `T = -S U` and `T^-1 = -U^2 S`.
    pub fn to_amalgam(&self) -> AmalgamWord {
        let mut w = AmalgamBuilder::new(self.sign);
        for syl in &self.syllables {
            match syl {
                Syllable::S => w.push(Letter::S),
                Syllable::T(k) => {
                    let n = k
                        .abs()
                        .to_usize()
                        .expect("T exponent too large to expand into an explicit word");
                    w.sign = w.sign * Sign::parity(k);
                    let pair = if k.is_positive() {
                        [Letter::S, Letter::U1]
                    } else {
                        [Letter::U2, Letter::S]
                    };
                    for _ in 0..n {
                        w.push(pair[0]);
                        w.push(pair[1]);
                    }
                }
            }
        }
        w.finish()
    }
}

/// Letters of the amalgam alphabet, ordered `s < u1 < u2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    #[serde(rename = "s")]
    S,
    #[serde(rename = "u1")]
    U1,
    #[serde(rename = "u2")]
    U2,
}

impl Letter {
    pub fn is_s(self) -> bool {
        self == Letter::S
    }

    pub fn lift(self) -> Sl2 {
        match self {
            Letter::S => Sl2::s(),
            Letter::U1 => Sl2::u(),
            Letter::U2 => Sl2::new_unchecked((-1).into(), (-1).into(), 1.into(), 0.into()),
        }
    }

    fn u_exp(self) -> u8 {
        match self {
            Letter::S => 0,
            Letter::U1 => 1,
            Letter::U2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Letter::S => "s",
            Letter::U1 => "u1",
            Letter::U2 => "u2",
        }
    }

    pub fn parse(s: &str) -> Option<Letter> {
        match s {
            "s" => Some(Letter::S),
            "u1" => Some(Letter::U1),
            "u2" => Some(Letter::U2),
            _ => None,
        }
    }
}

/// Product of two letters of the same type: `s s = -1`, `u^e u^f = ±u^g`.
pub(crate) fn merge_letters(x: Letter, y: Letter) -> (Sign, Option<Letter>) {
    debug_assert_eq!(x.is_s(), y.is_s());
    if x.is_s() {
        return (Sign::Minus, None);
    }
    let mut g = x.u_exp() + y.u_exp();
    let mut sign = Sign::Plus;
    if g >= 3 {
        sign = Sign::Minus;
        g -= 3;
    }
    let letter = match g {
        0 => None,
        1 => Some(Letter::U1),
        _ => Some(Letter::U2),
    };
    (sign, letter)
}

/// Strictly alternating word in `{s}` and `{u1, u2}` with an overall sign.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmalgamWord {
    pub sign: Sign,
    letters: Vec<Letter>,
}

impl AmalgamWord {
    /// Reduce an arbitrary letter sequence to alternating form.
    pub fn from_letters(sign: Sign, letters: &[Letter]) -> AmalgamWord {
        let mut b = AmalgamBuilder::new(sign);
        for &l in letters {
            b.push(l);
        }
        b.finish()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_alternating(&self) -> bool {
        self.letters.windows(2).all(|w| w[0].is_s() != w[1].is_s())
    }

    pub fn lift(&self) -> Sl2 {
        lift_letters(&self.letters).signed(self.sign)
    }
}

pub(crate) fn lift_letters(letters: &[Letter]) -> Sl2 {
    let (s, u, u2) = (Letter::S.lift(), Letter::U1.lift(), Letter::U2.lift());
    letters.iter().fold(Sl2::identity(), |acc, l| match l {
        Letter::S => &acc * &s,
        Letter::U1 => &acc * &u,
        Letter::U2 => &acc * &u2,
    })
}

struct AmalgamBuilder {
    sign: Sign,
    stack: Vec<Letter>,
}

impl AmalgamBuilder {
    fn new(sign: Sign) -> Self {
        AmalgamBuilder { sign, stack: Vec::new() }
    }

    fn push(&mut self, l: Letter) {
        match self.stack.last() {
            Some(&top) if top.is_s() == l.is_s() => {
                self.stack.pop();
                let (s, m) = merge_letters(top, l);
                self.sign = self.sign * s;
                if let Some(m) = m {
                    self.stack.push(m);
                }
            }
            _ => self.stack.push(l),
        }
    }

    fn finish(self) -> AmalgamWord {
        AmalgamWord { sign: self.sign, letters: self.stack }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> Sl2 {
        Sl2::from_i64(a, b, c, d).unwrap()
    }

    #[test]
    fn generator_products() {
        assert_eq!(&Sl2::s() * &Sl2::t(), Sl2::u());
        assert_eq!(&Sl2::s() * &Sl2::s(), Sl2::neg_identity());
        let x = m(2, 1, 1, 1);
        assert_eq!(&Sl2::identity() * &x, x);
        assert_eq!(Sl2::u().pow(6), Sl2::identity());
        assert_eq!(Sl2::u().pow(3), Sl2::neg_identity());
    }

    #[test]
    fn inverses() {
        assert_eq!(Sl2::t().inverse(), m(1, -1, 0, 1));
        assert_eq!(Sl2::s().inverse(), m(0, 1, -1, 0));
        assert_eq!(Sl2::s().inverse(), Sl2::s().neg());
        let x = m(2, 1, 1, 1);
        assert_eq!(x.inverse(), m(1, -1, -1, 2));
        assert!((&x * &x.inverse()).is_identity());
    }

    #[test]
    fn rejects_bad_determinant() {
        assert!(Sl2::from_i64(1, 1, 1, 1).is_err());
        assert!("1,2,3".parse::<Sl2>().is_err());
        assert!("1,x,0,1".parse::<Sl2>().is_err());
        assert!("2,0,0,1".parse::<Sl2>().is_err());
        let big: Sl2 = "1,123456789012345678901234567890,0,1".parse().unwrap();
        assert_eq!(big.b().to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn decompose_small_cases() {
        let w = Sl2::neg_identity().decompose();
        assert_eq!(w.sign, Sign::Minus);
        assert!(w.syllables.is_empty());

        let w = Sl2::t_pow(&5.into()).decompose();
        assert_eq!(w.sign, Sign::Plus);
        assert_eq!(w.syllables, vec![Syllable::T(5.into())]);

        let x = m(2, 1, 1, 1);
        assert_eq!(x.decompose().evaluate(), x);
    }

    #[test]
    fn amalgam_of_generators() {
        let w = Sl2::s().decompose().to_amalgam();
        assert_eq!((w.sign, w.letters()), (Sign::Plus, &[Letter::S][..]));
        let w = Sl2::t().decompose().to_amalgam();
        assert_eq!((w.sign, w.letters()), (Sign::Minus, &[Letter::S, Letter::U1][..]));
        assert_eq!(w.lift(), Sl2::t());
        let w = Sl2::neg_identity().decompose().to_amalgam();
        assert_eq!((w.sign, w.letters()), (Sign::Minus, &[][..]));
    }

    #[test]
    fn letter_lifts_match_powers_of_u() {
        assert_eq!(Letter::U2.lift(), Sl2::u().pow(2));
        for (x, y) in [(Letter::U1, Letter::U1), (Letter::U1, Letter::U2), (Letter::U2, Letter::U2), (Letter::S, Letter::S)] {
            let (s, l) = merge_letters(x, y);
            let lhs = &x.lift() * &y.lift();
            let rhs = l.map(Letter::lift).unwrap_or_else(Sl2::identity).signed(s);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn json_and_text_forms() {
        let x = m(2, -1, 1, 0);
        assert_eq!(x.to_string(), "2,-1,1,0");
        let j = serde_json::to_string(&x).unwrap();
        assert_eq!(j, r#"{"a":"2","b":"-1","c":"1","d":"0"}"#);
        let back: Sl2 = serde_json::from_str(&j).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn gn_conjugation_requires_divisibility() {
        let x = m(1, 0, 2, 1);
        assert_eq!(x.conjugate_by_gn(2).unwrap(), m(1, 0, 1, 1));
        assert!(m(1, 0, 1, 1).conjugate_by_gn(2).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn decomposition_round_trips(seed in any::<u64>(), len in 1usize..=40) {
            let m = crate::random::random_word(&mut crate::random::rng(seed), len);
            let w = m.decompose();
            prop_assert_eq!(w.evaluate(), m.clone());
            let am = w.to_amalgam();
            prop_assert!(am.is_alternating());
            prop_assert_eq!(am.lift(), m.clone());
            prop_assert_eq!(m.inverse().inverse(), m.clone());
            prop_assert!((&m * &m.inverse()).is_identity());
            prop_assert_eq!(m.to_string().parse::<Sl2>().unwrap(), m);
        }
    }
}
