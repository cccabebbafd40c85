//! Rational class functions on `SL2(Z/N)` and its subgroups, and the dual
//! Hecke operators.
//!
//! The dual operators raise the level: `Ť_p` and `ě_p` take a level `N`
//! function to a level `pN` function, because the orbit lengths `d_k` depend
//! on the argument mod `p`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conj::LoopSum;
use crate::cover::{orbit_decomposition, require_prime, sl2_mod, CongruenceSpec, ModMat};
use crate::error::Error;
use crate::hecke::hecke_conjugate;
use crate::ser::parse_rational;
use crate::sl2::Sl2;
use crate::Result;

/// Largest level whose group is enumerated.
pub const MAX_LEVEL: u64 = 12;

/// A finite group of residue matrices with its conjugacy classes.
///
/// Classes are ordered by their least element, which also serves as the
/// class key in JSON.
pub struct FiniteGroup {
    pub n: u64,
    full: bool,
    elements: Vec<ModMat>,
    index: HashMap<ModMat, usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl FiniteGroup {
    /// Group on an element list closed under products and containing `I`.
    pub fn from_elements(n: u64, mut elements: Vec<ModMat>) -> Result<FiniteGroup> {
        elements.sort_unstable();
        elements.dedup();
        let index: HashMap<ModMat, usize> = elements.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        if !index.contains_key(&ModMat::identity(n)) {
            return Err(Error::NotSubgroup("identity missing".into()));
        }
        for x in &elements {
            if x.det(n) != 1 % n {
                return Err(Error::NotSubgroup(format!("{x} has determinant != 1")));
            }
            for y in &elements {
                if !index.contains_key(&x.mul(y, n)) {
                    return Err(Error::NotSubgroup(format!("{x} * {y} not in the set")));
                }
            }
        }
        let full = elements.len() == sl2_order(n) as usize;
        let mut class_of = vec![usize::MAX; elements.len()];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..elements.len() {
            if class_of[i] != usize::MAX {
                continue;
            }
            let cid = classes.len();
            let mut members = Vec::new();
            for g in &elements {
                let j = index[&elements[i].conjugate_by(g, n)];
                if class_of[j] == usize::MAX {
                    class_of[j] = cid;
                    members.push(j);
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        Ok(FiniteGroup { n, full, elements, index, class_of, classes })
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ModMat] {
        &self.elements
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_members(&self, c: usize) -> impl Iterator<Item = &ModMat> {
        self.classes[c].iter().map(|&i| &self.elements[i])
    }

    pub fn class_size(&self, c: usize) -> usize {
        self.classes[c].len()
    }

    pub fn class_rep(&self, c: usize) -> ModMat {
        self.elements[self.classes[c][0]]
    }

    pub fn contains(&self, m: &ModMat) -> bool {
        self.index.contains_key(m)
    }

    /// Class index of `m`, reduced mod `n` first.
    pub fn class_index(&self, m: &ModMat) -> Option<usize> {
        self.index.get(&m.reduce(self.n)).map(|&i| self.class_of[i])
    }

    pub fn class_of_sl2(&self, m: &Sl2) -> usize {
        self.class_index(&ModMat::from_sl2(m, self.n)).expect("reduction lies in SL2(Z/n)")
    }

    pub fn is_subgroup_of(&self, g: &FiniteGroup) -> bool {
        self.n == g.n && self.elements.iter().all(|x| g.contains(x))
    }
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(n={}, order={}, classes={})", self.n, self.order(), self.num_classes())
    }
}

/// `|SL2(Z/n)| = n^3 Π_{p|n} (1 - p^-2)`.
pub fn sl2_order(n: u64) -> u64 {
    let mut out = n * n * n;
    for (p, _) in crate::cover::factorize(n) {
        out = out / (p * p) * (p * p - 1);
    }
    out
}

fn cache() -> &'static Mutex<HashMap<u64, Arc<FiniteGroup>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<FiniteGroup>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The full group `SL2(Z/n)`, built once per level.
pub fn build_table(n: u64) -> Result<Arc<FiniteGroup>> {
    if n == 0 {
        return Err(Error::Invalid("level must be positive".into()));
    }
    if n > MAX_LEVEL {
        return Err(Error::LevelTooLarge { level: n, max: MAX_LEVEL });
    }
    if let Some(g) = cache().lock().unwrap().get(&n) {
        return Ok(g.clone());
    }
    let g = Arc::new(FiniteGroup::from_elements(n, sl2_mod(n))?);
    cache().lock().unwrap().insert(n, g.clone());
    Ok(g)
}

/// Subgroup of `SL2(Z/n)` cut out by a congruence condition.
pub fn congruence_subgroup(spec: &CongruenceSpec) -> Result<Arc<FiniteGroup>> {
    let g = build_table(spec.level)?;
    let elems: Vec<ModMat> = g.elements().iter().copied().filter(|m| spec.contains(m)).collect();
    Ok(Arc::new(FiniteGroup::from_elements(spec.level, elems)?))
}

/// Subgroup generated by `gens`.
pub fn generated_subgroup(n: u64, gens: &[ModMat]) -> Result<Arc<FiniteGroup>> {
    let id = ModMat::identity(n);
    let mut seen: HashSet<ModMat> = HashSet::from([id]);
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = x.mul(&g.reduce(n), n);
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    Ok(Arc::new(FiniteGroup::from_elements(n, seen.into_iter().collect())?))
}

/// Exact rational class function on a [`FiniteGroup`].
#[derive(Clone)]
pub struct ClassFunction {
    group: Arc<FiniteGroup>,
    values: Vec<BigRational>,
}

impl PartialEq for ClassFunction {
    fn eq(&self, o: &ClassFunction) -> bool {
        self.group.n == o.group.n && self.group.elements == o.group.elements && self.values == o.values
    }
}

impl ClassFunction {
    pub fn new(group: Arc<FiniteGroup>, values: Vec<BigRational>) -> Result<ClassFunction> {
        if values.len() != group.num_classes() {
            return Err(Error::Invalid(format!("{} values for {} classes", values.len(), group.num_classes())));
        }
        Ok(ClassFunction { group, values })
    }

    pub fn constant(group: Arc<FiniteGroup>, v: BigRational) -> ClassFunction {
        let values = vec![v; group.num_classes()];
        ClassFunction { group, values }
    }

    pub fn indicator(group: Arc<FiniteGroup>, class: usize) -> ClassFunction {
        let mut values = vec![BigRational::zero(); group.num_classes()];
        values[class] = BigRational::one();
        ClassFunction { group, values }
    }

    /// Indicators of every class, in class order.
    pub fn indicator_basis(group: &Arc<FiniteGroup>) -> Vec<ClassFunction> {
        (0..group.num_classes()).map(|c| ClassFunction::indicator(group.clone(), c)).collect()
    }

    /// Evaluates `f` on every element and checks it is constant on classes.
    pub fn from_element_fn(group: Arc<FiniteGroup>, mut f: impl FnMut(&ModMat) -> BigRational) -> ClassFunction {
        let mut values: Vec<Option<BigRational>> = vec![None; group.num_classes()];
        for (i, m) in group.elements.iter().enumerate() {
            let v = f(m);
            let slot = &mut values[group.class_of[i]];
            match slot {
                Some(prev) => assert_eq!(*prev, v, "not constant on the class of {m}"),
                None => *slot = Some(v),
            }
        }
        let values = values.into_iter().map(Option::unwrap).collect();
        ClassFunction { group, values }
    }

    /// Evaluates `f` at one representative per class.
    pub fn from_rep_fn(group: Arc<FiniteGroup>, mut f: impl FnMut(&ModMat) -> BigRational) -> ClassFunction {
        let values = (0..group.num_classes()).map(|c| f(&group.class_rep(c))).collect();
        ClassFunction { group, values }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn level(&self) -> u64 {
        self.group.n
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Value at `m` reduced mod the level.
    pub fn eval(&self, m: &ModMat) -> BigRational {
        let c = self.group.class_index(m).unwrap_or_else(|| panic!("{m} is outside the group"));
        self.values[c].clone()
    }

    pub fn eval_sl2(&self, m: &Sl2) -> BigRational {
        self.eval(&ModMat::from_sl2(m, self.level()))
    }

    /// `<F, x>`: linear extension of evaluation to loop sums.
    pub fn pair(&self, x: &LoopSum) -> BigRational {
        let mut acc = BigRational::zero();
        for (c, k) in x.iter() {
            acc += self.eval_sl2(&c.representative()) * BigRational::from_integer(k.clone());
        }
        acc
    }

    /// `F ∘ (reduce mod N)` as a function of level `m N`.
    pub fn inflate(&self, m: u64) -> Result<ClassFunction> {
        if !self.group.full {
            return Err(Error::Invalid("inflation needs a full-level function".into()));
        }
        let big = build_table(self.level() * m)?;
        let n = self.level();
        Ok(ClassFunction::from_rep_fn(big, |x| self.eval(&x.reduce(n))))
    }

    pub fn add(&self, o: &ClassFunction) -> Result<ClassFunction> {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &ClassFunction) -> Result<ClassFunction> {
        self.zip(o, |a, b| a - b)
    }

    fn zip(&self, o: &ClassFunction, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> Result<ClassFunction> {
        if self.level() != o.level() || self.group.elements != o.group.elements {
            return Err(Error::LevelMismatch { expected: self.level(), got: o.level() });
        }
        let values = self.values.iter().zip(&o.values).map(|(a, b)| f(a, b)).collect();
        Ok(ClassFunction { group: self.group.clone(), values })
    }
}

impl fmt::Debug for ClassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.values.iter().map(|x| x.to_string()).collect();
        write!(f, "ClassFunction({:?}, [{}])", self.group, v.join(", "))
    }
}

impl fmt::Display for ClassFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "level {} ({} classes)", self.level(), self.values.len())?;
        for (c, v) in self.values.iter().enumerate() {
            writeln!(f, "  {:<16} size {:>4}  {}", self.group.class_rep(c).to_string(), self.group.class_size(c), v)?;
        }
        Ok(())
    }
}

impl Serialize for ClassFunction {
    /// `{"level":3,"values":[["a,b,c,d","1/2"],…]}` keyed by class representatives.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct J {
            level: u64,
            values: Vec<(String, String)>,
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(c, v)| (self.group.class_rep(c).to_string(), v.to_string()))
            .collect();
        J { level: self.level(), values }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClassFunction {
    /// Accepts any element of each class as its key; classes left out are zero.
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<ClassFunction, D::Error> {
        #[derive(Deserialize)]
        struct J {
            level: u64,
            values: Vec<(String, String)>,
        }
        let j = J::deserialize(de)?;
        let g = build_table(j.level).map_err(D::Error::custom)?;
        let mut values = vec![BigRational::zero(); g.num_classes()];
        let mut set = vec![false; g.num_classes()];
        for (k, v) in j.values {
            let m: ModMat = k.parse().map_err(D::Error::custom)?;
            let c = g
                .class_index(&m)
                .filter(|_| m.0.iter().all(|&x| (x as u64) < j.level))
                .ok_or_else(|| D::Error::custom(format!("{k} is not in SL2(Z/{})", j.level)))?;
            let v = parse_rational(&v).ok_or_else(|| D::Error::custom(format!("bad rational {v:?}")))?;
            if set[c] && values[c] != v {
                return Err(D::Error::custom(format!("conflicting values for the class of {k}")));
            }
            set[c] = true;
            values[c] = v;
        }
        Ok(ClassFunction { group: g, values })
    }
}

/// Restriction to a subgroup.
pub fn pullback_cf(f: &ClassFunction, h: &Arc<FiniteGroup>) -> Result<ClassFunction> {
    if !h.is_subgroup_of(&f.group) {
        return Err(Error::NotSubgroup("H is not contained in the domain of F".into()));
    }
    Ok(ClassFunction::from_rep_fn(h.clone(), |m| f.eval(m)))
}

/// Right cosets `Hg` with the first element of each, in element order.
struct CosetSpace {
    coset_of: HashMap<ModMat, usize>,
    firsts: Vec<ModMat>,
}

impl CosetSpace {
    fn new(h: &FiniteGroup, g: &FiniteGroup) -> CosetSpace {
        let n = g.n;
        let mut coset_of = HashMap::with_capacity(g.order());
        let mut firsts = Vec::new();
        for x in g.elements() {
            if coset_of.contains_key(x) {
                continue;
            }
            let id = firsts.len();
            firsts.push(*x);
            for y in h.elements() {
                coset_of.insert(y.mul(x, n), id);
            }
        }
        CosetSpace { coset_of, firsts }
    }

    /// `(g_s, d_s)` for each `<a>`-orbit.
    fn orbits(&self, a: &ModMat, n: u64) -> Vec<(ModMat, u64)> {
        let mut seen = vec![false; self.firsts.len()];
        let mut out = Vec::new();
        for start in 0..self.firsts.len() {
            if seen[start] {
                continue;
            }
            let mut d = 0;
            let mut cur = start;
            loop {
                seen[cur] = true;
                d += 1;
                cur = self.coset_of[&self.firsts[cur].mul(a, n)];
                if cur == start {
                    break;
                }
            }
            out.push((self.firsts[start], d));
        }
        out
    }
}

/// `(π_* F)(a) = Σ_s F(g_s a^{d_s} g_s^{-1})` over the `<a>`-orbits on `H\G`.
pub fn pushforward_cf(f: &ClassFunction, g: &Arc<FiniteGroup>) -> Result<ClassFunction> {
    let h = f.group();
    if !h.is_subgroup_of(g) {
        return Err(Error::NotSubgroup("domain of F is not contained in G".into()));
    }
    let n = g.n;
    let cosets = CosetSpace::new(h, g);
    Ok(ClassFunction::from_element_fn(g.clone(), |a| {
        let mut acc = BigRational::zero();
        for (gs, d) in cosets.orbits(a, n) {
            acc += f.eval(&a.pow(d, n).conjugate_by(&gs, n));
        }
        acc
    }))
}

/// `π^*(a) = Σ_s [g_s a^{d_s} g_s^{-1}]` as H-class multiplicities, computed
/// by lifting to `SL2(Z)`.
pub fn pullback_element(a: &Sl2, h: &FiniteGroup, g: &FiniteGroup) -> Vec<(usize, u64)> {
    let n = g.n;
    let entries = crate::cover::pullback_generic(a, n, g.elements(), |m| h.contains(m));
    entries
        .into_iter()
        .map(|(m, d)| (h.class_index(&ModMat::from_sl2(&m, n)).expect("entry lies in H"), d))
        .collect()
}

fn check_dual_level(f: &ClassFunction, p: u64) -> Result<Arc<FiniteGroup>> {
    require_prime(p)?;
    if !f.group.full {
        return Err(Error::Invalid("dual operators need a full-level function".into()));
    }
    build_table(f.level() * p)
}

/// `(Ť_p F)(β) = Σ_k F(g_p γ_k β^{d_k} γ_k^{-1} g_p^{-1} mod N)`, level `pN`.
pub fn dual_tp(f: &ClassFunction, p: u64) -> Result<ClassFunction> {
    let big = check_dual_level(f, p)?;
    let pn = big.n;
    Ok(ClassFunction::from_rep_fn(big, |b| {
        let beta = b.lift(pn);
        let orbits = orbit_decomposition(&beta, p).expect("p is prime");
        let mut acc = BigRational::zero();
        for o in &orbits.orbits {
            acc += f.eval_sl2(&hecke_conjugate(&beta, p, o.rep, o.d));
        }
        acc
    }))
}

/// `(ě_p F)(β) = -F(β) + Σ_k F(β^{d_k})`, level `pN`.
pub fn dual_ep(f: &ClassFunction, p: u64) -> Result<ClassFunction> {
    let big = check_dual_level(f, p)?;
    let (pn, n) = (big.n, f.level());
    Ok(ClassFunction::from_rep_fn(big, |b| {
        let beta = b.lift(pn);
        let orbits = orbit_decomposition(&beta, p).expect("p is prime");
        let mut acc = -f.eval(&b.reduce(n));
        for o in &orbits.orbits {
            acc += f.eval(&b.pow(o.d, pn).reduce(n));
        }
        acc
    }))
}

/// Outcome of [`coprime_twist_formula`].
#[derive(Clone, Debug)]
pub struct TwistReport {
    /// `μ ↦ (p+1) F(g_p μ g_p^{-1})` at level `N`.
    pub twisted: ClassFunction,
    /// `Ť_p F` at level `pN`.
    pub dual: ClassFunction,
    /// Whether `Ť_p F` only depends on the argument mod `N`.
    pub descends: bool,
    /// Whether it descends and then equals `twisted`.
    pub agrees: bool,
}

pub fn coprime_twist_formula(f: &ClassFunction, p: u64) -> Result<TwistReport> {
    require_prime(p)?;
    let n = f.level();
    if n.gcd(&p) != 1 {
        return Err(Error::NotCoprime { p, n });
    }
    let pinv = (1..n.max(2)).find(|x| x * p % n == 1 % n).unwrap_or(0);
    let p1 = BigRational::from_integer(BigInt::from(p + 1));
    let twisted = ClassFunction::from_element_fn(f.group.clone(), |m| {
        let [a, b, c, d] = m.0.map(u64::from);
        let conj = ModMat([a as u32, (b * p % n) as u32, (c * pinv % n) as u32, d as u32]);
        &p1 * f.eval(&conj)
    });
    let dual = dual_tp(f, p)?;
    let mut by_residue: HashMap<ModMat, BigRational> = HashMap::new();
    let mut descends = true;
    for m in dual.group.elements() {
        let v = dual.eval(m);
        let r = m.reduce(n);
        match by_residue.get(&r) {
            Some(prev) if *prev != v => {
                descends = false;
                break;
            }
            Some(_) => {}
            None => {
                by_residue.insert(r, v);
            }
        }
    }
    let agrees = descends && f.group.elements().iter().all(|m| by_residue[m] == twisted.eval(m));
    Ok(TwistReport { twisted, dual, descends, agrees })
}
