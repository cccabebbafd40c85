//! Finite quotients: `P1(F_p)`, cosets of congruence subgroups and the orbit
//! data `(γ_k, d_k)` that drive every Hecke formula.
//!
//! Points are row vectors and `SL2` acts on the right, `[u:v]·γ = [(u,v)γ]`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::sl2::Sl2;
use crate::Result;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

pub(crate) fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Prime factorization in increasing prime order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn inv_mod(x: u64, m: u64) -> Option<u64> {
    let g = (x as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// Legendre symbol `(x/p)` for odd prime `p`, as -1, 0 or 1.
pub fn legendre(x: u64, p: u64) -> i32 {
    let x = x % p;
    if x == 0 {
        return 0;
    }
    if pow_mod(x, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Point of `P1(F_p)`: index 0 is `[0:1]`, index `j` in `1..=p` is `[1 : j mod p]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    pub p: u64,
    pub index: u64,
}

impl ProjPoint {
    pub fn all(p: u64) -> impl Iterator<Item = ProjPoint> {
        (0..=p).map(move |index| ProjPoint { p, index })
    }

    pub fn from_coords(x: u64, y: u64, p: u64) -> ProjPoint {
        let (x, y) = (x % p, y % p);
        assert!(x != 0 || y != 0, "[0:0] is not a point");
        if x == 0 {
            return ProjPoint { p, index: 0 };
        }
        let j = y * inv_mod(x, p).unwrap() % p;
        ProjPoint { p, index: if j == 0 { p } else { j } }
    }

    pub fn coords(&self) -> (u64, u64) {
        if self.index == 0 {
            (0, 1)
        } else {
            (1, self.index % self.p)
        }
    }

    /// Right action by a matrix given by residues mod `p`.
    pub fn act(&self, m: &[u64; 4]) -> ProjPoint {
        let p = self.p;
        let (u, v) = self.coords();
        let x = (u * m[0] + v * m[2]) % p;
        let y = (u * m[1] + v * m[3]) % p;
        ProjPoint::from_coords(x, y, p)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.coords();
        write!(f, "[{x}:{y}]")
    }
}

/// `γ_0 = I`, `γ_j = [[0,-1],[1,j]]`; `[0:1]·γ_j` is point `j`.
pub fn coset_rep(j: u64) -> Sl2 {
    if j == 0 {
        Sl2::identity()
    } else {
        Sl2::new_unchecked(0.into(), (-1).into(), 1.into(), BigInt::from(j))
    }
}

pub fn coset_reps(p: u64) -> Result<Vec<Sl2>> {
    require_prime(p)?;
    Ok((0..=p).map(coset_rep).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbit {
    pub rep: u64,
    pub d: u64,
}

/// `<α>`-orbits on `P1(F_p)`, each named by its smallest point index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDecomposition {
    pub p: u64,
    pub orbits: Vec<Orbit>,
}

impl OrbitDecomposition {
    pub fn d_multiset(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.orbits.iter().map(|o| o.d).collect();
        v.sort_unstable();
        v
    }

    pub fn total(&self) -> u64 {
        self.orbits.iter().map(|o| o.d).sum()
    }
}

/// Brute-force orbit enumeration over all `p + 1` points.
pub fn orbit_decomposition(alpha: &Sl2, p: u64) -> Result<OrbitDecomposition> {
    require_prime(p)?;
    let m = alpha.reduce(p);
    let mut seen = vec![false; (p + 1) as usize];
    let mut orbits = Vec::new();
    for start in ProjPoint::all(p) {
        if seen[start.index as usize] {
            continue;
        }
        let mut d = 0;
        let mut x = start;
        loop {
            seen[x.index as usize] = true;
            d += 1;
            x = x.act(&m);
            if x == start {
                break;
            }
        }
        orbits.push(Orbit { rep: start.index, d });
    }
    Ok(OrbitDecomposition { p, orbits })
}

/// Cycle structure of `α` on `P1(F_p)`: `fixed` fixed points and `cycles`
/// cycles of common length `cycle_length`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleType {
    pub fixed: u64,
    pub cycle_length: u64,
    pub cycles: u64,
}

impl CycleType {
    pub fn d_multiset(&self) -> Vec<u64> {
        let mut v = vec![1; self.fixed as usize];
        v.extend(std::iter::repeat(self.cycle_length).take(self.cycles as usize));
        v.sort_unstable();
        v
    }
}

/// Which case of the discriminant analysis applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    DiscriminantZero,
    NonzeroSquare,
    NonSquare,
    OddTraceAtTwo,
}

pub fn branch(alpha: &Sl2, p: u64) -> Branch {
    let t = alpha.trace().mod_floor(&BigInt::from(p)).to_u64().unwrap();
    let disc = (t * t + 4 * p - 4) % p;
    if p == 2 {
        return if t == 1 { Branch::OddTraceAtTwo } else { Branch::DiscriminantZero };
    }
    match legendre(disc, p) {
        0 => Branch::DiscriminantZero,
        1 => Branch::NonzeroSquare,
        _ => Branch::NonSquare,
    }
}

fn is_scalar_mod(m: &[u64; 4], p: u64) -> bool {
    m[1] == 0 && m[2] == 0 && m[0] == m[3] && (m[0] == 1 || m[0] == p - 1)
}

/// Multiplicative order of `x` in `F_p^×`.
fn order_mod(x: u64, p: u64) -> u64 {
    let n = p - 1;
    let mut divs: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    divs.sort_unstable();
    *divs.iter().find(|&&d| pow_mod(x, d, p) == 1).unwrap()
}

/// `x^e` in `F_p[x]/(x^2 - t x + 1)`, as `(c0, c1)`.
fn pow_root(t: u64, e: u64, p: u64) -> (u64, u64) {
    let mul = |a: (u64, u64), b: (u64, u64)| {
        // x^2 = t x - 1
        let c0 = a.0 * b.0 % p;
        let c1 = (a.0 * b.1 + a.1 * b.0) % p;
        let c2 = a.1 * b.1 % p;
        ((c0 + p - c2) % p, (c1 + c2 * t) % p)
    };
    let (mut acc, mut base, mut e) = ((1 % p, 0), (0, 1), e);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

/// Cycle type from the characteristic polynomial alone.
pub fn cycle_type_fast(alpha: &Sl2, p: u64) -> Result<CycleType> {
    require_prime(p)?;
    let m = alpha.reduce(p);
    if is_scalar_mod(&m, p) {
        return Err(Error::TrivialAction(p));
    }
    let t = (m[0] + m[3]) % p;
    let ct = match branch(alpha, p) {
        Branch::DiscriminantZero => CycleType { fixed: 1, cycle_length: p, cycles: 1 },
        Branch::OddTraceAtTwo => CycleType { fixed: 0, cycle_length: 3, cycles: 1 },
        Branch::NonzeroSquare => {
            // eigenvalues λ, 1/λ; non-fixed points move by λ^2
            let lambda = (1..p).find(|&l| (l * l + 1) % p == t * l % p).unwrap();
            let ord = order_mod(lambda * lambda % p, p);
            CycleType { fixed: 2, cycle_length: ord, cycles: (p - 1) / ord }
        }
        Branch::NonSquare => {
            let n = p + 1;
            let ord = (1..=n)
                .filter(|d| n % d == 0)
                .find(|&d| pow_root(t, d, p).1 == 0)
                .unwrap();
            CycleType { fixed: 0, cycle_length: ord, cycles: (p + 1) / ord }
        }
    };
    Ok(ct)
}

/// 2x2 matrix over `Z/N`, entries in `0..N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModMat(pub [u32; 4]);

impl ModMat {
    pub fn identity(n: u64) -> ModMat {
        let one = (1 % n) as u32;
        ModMat([one, 0, 0, one])
    }

    pub fn from_sl2(m: &Sl2, n: u64) -> ModMat {
        let r = m.reduce(n);
        ModMat([r[0] as u32, r[1] as u32, r[2] as u32, r[3] as u32])
    }

    pub fn mul(&self, o: &ModMat, n: u64) -> ModMat {
        let [a, b, c, d] = self.0.map(u64::from);
        let [e, f, g, h] = o.0.map(u64::from);
        ModMat([
            ((a * e + b * g) % n) as u32,
            ((a * f + b * h) % n) as u32,
            ((c * e + d * g) % n) as u32,
            ((c * f + d * h) % n) as u32,
        ])
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv(&self, n: u64) -> ModMat {
        let [a, b, c, d] = self.0.map(u64::from);
        let neg = |x: u64| ((n - x % n) % n) as u32;
        ModMat([d as u32, neg(b), neg(c), a as u32])
    }

    pub fn pow(&self, mut e: u64, n: u64) -> ModMat {
        let mut acc = ModMat::identity(n);
        let mut b = *self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b, n);
            }
            b = b.mul(&b, n);
            e >>= 1;
        }
        acc
    }

    pub fn det(&self, n: u64) -> u64 {
        let [a, b, c, d] = self.0.map(u64::from);
        (a * d % n + n - b * c % n) % n
    }

    pub fn reduce(&self, n: u64) -> ModMat {
        ModMat(self.0.map(|x| (x as u64 % n) as u32))
    }

    pub fn conjugate_by(&self, g: &ModMat, n: u64) -> ModMat {
        g.mul(self, n).mul(&g.inv(n), n)
    }

    /// A matrix in `SL2(Z)` reducing to `self` mod `n`.
    pub fn lift(&self, n: u64) -> Sl2 {
        assert_eq!(self.det(n), 1 % n, "lift needs determinant one");
        if n == 1 {
            return Sl2::identity();
        }
        let [a, b, c, d] = self.0.map(i64::from);
        let ni = n as i64;
        let c1 = if c == 0 { ni } else { c };
        let mut d1 = d;
        while c1.gcd(&d1) != 1 {
            d1 += ni;
        }
        // x d1 - y c1 = 1
        let g = d1.extended_gcd(&c1);
        let (x, y) = (g.x, -g.y);
        // u c1 + v d1 = 1
        let h = c1.extended_gcd(&d1);
        let t = (h.x as i128 * (a - x) as i128 + h.y as i128 * (b - y) as i128).rem_euclid(ni as i128) as i64;
        let lifted = Sl2::from_i64(x + t * c1, y + t * d1, c1, d1).expect("lift has determinant one");
        debug_assert_eq!(ModMat::from_sl2(&lifted, n), *self);
        lifted
    }
}

impl fmt::Display for ModMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "{a},{b},{c},{d}")
    }
}

impl FromStr for ModMat {
    type Err = Error;
    fn from_str(s: &str) -> Result<ModMat> {
        let v: Vec<u32> = s
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{x:?}: {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::Parse(format!("expected four residues, got {s:?}")));
        }
        Ok(ModMat([v[0], v[1], v[2], v[3]]))
    }
}

/// All of `SL2(Z/n)` in lexicographic order.
pub fn sl2_mod(n: u64) -> Vec<ModMat> {
    let n32 = n as u32;
    let mut out = Vec::new();
    for a in 0..n32 {
        for b in 0..n32 {
            for c in 0..n32 {
                for d in 0..n32 {
                    let m = ModMat([a, b, c, d]);
                    if m.det(n) == 1 % n {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gamma0,
    Gamma1,
    Full,
}

/// `Γ0(N)`, `Γ1(N)` or `Γ(N)`; text form `"gamma0:11"`, `"gamma1:4"`, `"full:3"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CongruenceSpec {
    pub family: Family,
    pub level: u64,
}

impl CongruenceSpec {
    pub fn new(family: Family, level: u64) -> Result<CongruenceSpec> {
        if level == 0 {
            return Err(Error::Invalid("level must be positive".into()));
        }
        Ok(CongruenceSpec { family, level })
    }

    /// Membership of a residue matrix in the image of the subgroup.
    pub fn contains(&self, m: &ModMat) -> bool {
        let n = self.level as u32;
        let one = 1 % n;
        let [a, b, c, d] = m.0;
        match self.family {
            Family::Gamma0 => c == 0,
            Family::Gamma1 => c == 0 && a == one && d == one,
            Family::Full => c == 0 && b == 0 && a == one && d == one,
        }
    }

    pub fn contains_matrix(&self, m: &Sl2) -> bool {
        self.contains(&ModMat::from_sl2(m, self.level))
    }
}

impl fmt::Display for CongruenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.family {
            Family::Gamma0 => "gamma0",
            Family::Gamma1 => "gamma1",
            Family::Full => "full",
        };
        write!(f, "{name}:{}", self.level)
    }
}

impl FromStr for CongruenceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<CongruenceSpec> {
        let (fam, lvl) = s.split_once(':').ok_or_else(|| Error::Parse(format!("expected family:level, got {s:?}")))?;
        let family = match fam.trim() {
            "gamma0" => Family::Gamma0,
            "gamma1" => Family::Gamma1,
            "full" => Family::Full,
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        let level: u64 = lvl.trim().parse().map_err(|_| Error::Parse(format!("bad level {lvl:?}")))?;
        CongruenceSpec::new(family, level)
    }
}

/// Largest level accepted by [`pullback_subgroup`]; the group is enumerated.
pub const MAX_PULLBACK_LEVEL: u64 = 64;

/// `<ᾱ>`-orbits on `H\G` for finite `H ≤ G ≤ SL2(Z/n)`, with `ᾱ ∈ G`.
///
/// Returns `(γ_s α^{d_s} γ_s^{-1}, d_s)` with `γ_s` a lift of the first coset
/// element of each orbit; every returned matrix reduces into `H`.
pub fn pullback_generic(alpha: &Sl2, n: u64, g: &[ModMat], in_h: impl Fn(&ModMat) -> bool) -> Vec<(Sl2, u64)> {
    let h: Vec<ModMat> = g.iter().copied().filter(|x| in_h(x)).collect();
    let mut coset_of: HashMap<ModMat, usize> = HashMap::with_capacity(g.len());
    let mut firsts: Vec<ModMat> = Vec::new();
    for x in g {
        if coset_of.contains_key(x) {
            continue;
        }
        let id = firsts.len();
        firsts.push(*x);
        for y in &h {
            coset_of.insert(y.mul(x, n), id);
        }
    }
    let a = ModMat::from_sl2(alpha, n);
    let mut seen = vec![false; firsts.len()];
    let mut out = Vec::new();
    for start in 0..firsts.len() {
        if seen[start] {
            continue;
        }
        let mut d = 0u64;
        let mut cur = start;
        loop {
            seen[cur] = true;
            d += 1;
            cur = coset_of[&firsts[cur].mul(&a, n)];
            if cur == start {
                break;
            }
        }
        let gamma = firsts[start].lift(n);
        let conj = alpha.pow(d as i64).conjugate_by(&gamma);
        assert!(in_h(&ModMat::from_sl2(&conj, n)), "pullback entry escaped the subgroup");
        out.push((conj, d));
    }
    out
}

/// Pullback of `α` to the congruence subgroup `Γ'` named by `spec`.
pub fn pullback_subgroup(alpha: &Sl2, spec: &CongruenceSpec) -> Result<Vec<(Sl2, u64)>> {
    if spec.level > MAX_PULLBACK_LEVEL {
        return Err(Error::LevelTooLarge { level: spec.level, max: MAX_PULLBACK_LEVEL });
    }
    let n = spec.level;
    let g = sl2_mod(n);
    Ok(pullback_generic(alpha, n, &g, |m| spec.contains(m)))
}

/// Result of comparing both readings of the circle-cover coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleCheck {
    pub r: u32,
    pub m: u64,
    pub k: i64,
    #[serde(with = "crate::ser::rational")]
    pub lhs: BigRational,
    #[serde(with = "crate::ser::rational")]
    pub rhs: BigRational,
    #[serde(with = "crate::ser::rational")]
    pub rhs_inverted: BigRational,
}

fn factorial(r: u32) -> BigInt {
    (1..=r).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `I_r(σ^j) = j^r / r!`.
fn iterated_log(j: &BigRational, r: u32) -> BigRational {
    num_traits::pow(j.clone(), r as usize) / BigRational::from_integer(factorial(r))
}

/// Degree `m` cover of the punctured plane.
///
/// `lhs` pulls `σ^k` back by walking the `<σ^k>`-orbits on the `m` sheets
/// (each orbit of length `d` lifts to `μ^{kd/m}`) and evaluates `I_r` on the
/// lifts. `rhs` is the closed form with coefficient `(d/m)^{r-1}` and
/// `rhs_inverted` the one with `(m/d)^{r-1}`.
pub fn circle_pushforward_check(r: u32, m: u64, k: i64) -> Result<CircleCheck> {
    if m == 0 || r == 0 {
        return Err(Error::Invalid("r and m must be positive".into()));
    }
    let mut seen = vec![false; m as usize];
    let mut lhs = BigRational::zero();
    let step = k.rem_euclid(m as i64) as u64;
    let mut d_any = 0u64;
    for s in 0..m {
        if seen[s as usize] {
            continue;
        }
        let mut d = 0u64;
        let mut x = s;
        loop {
            seen[x as usize] = true;
            d += 1;
            x = (x + step) % m;
            if x == s {
                break;
            }
        }
        d_any = d;
        let lift = BigRational::new(BigInt::from(k) * BigInt::from(d), BigInt::from(m));
        lhs += iterated_log(&lift, r);
    }
    // every orbit has the same length d = m / gcd(m, k)
    let d = BigRational::from_integer(d_any.into());
    let mr = BigRational::from_integer(m.into());
    let base = iterated_log(&BigRational::from_integer(k.into()), r);
    let rhs = num_traits::pow(&d / &mr, (r - 1) as usize) * &base;
    let rhs_inverted = num_traits::pow(&mr / &d, (r - 1) as usize) * &base;
    Ok(CircleCheck { r, m, k, lhs, rhs, rhs_inverted })
}

/// Unordered set of residues mod `n` of a list of matrices (test helper).
pub fn residues(ms: &[Sl2], n: u64) -> HashSet<ModMat> {
    ms.iter().map(|m| ModMat::from_sl2(m, n)).collect()
}
