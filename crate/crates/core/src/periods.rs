//! Eichler cocycles of level one modular forms and the class functions they
//! define.
//!
//! Binary forms of degree `n` are coefficient vectors `P[j]` of `X^{n-j} Y^j`.
//! `SL2(Z)` acts on the left by `(γ·P)(X, Y) = P(dX + bY, cX + aY)`, which is
//! the action under which `f(τ)(X + τY)^n dτ` is invariant. With base point
//! `τ0 = i` the cocycle satisfies `r_S = 0`, so every `r_γ` is an integer
//! matrix applied to `r_T`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::cover::orbit_decomposition;
use crate::error::Error;
use crate::hecke::apply_tp;
use crate::sl2::{Sl2, Syllable};
use crate::{LoopSum, Result};

pub const DEFAULT_DIGITS: u32 = 30;

const GUARD_BITS: u32 = 64;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Truncated q-expansion `a_0 + a_1 q + ... + a_K q^K` of a level one form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QExpansion {
    pub weight: u32,
    #[serde(with = "coeff_list")]
    pub coeffs: Vec<BigRational>,
}

mod coeff_list {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| {
                crate::ser::parse_rational(t)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad rational {t}")))
            })
            .collect()
    }
}

impl QExpansion {
    pub fn new(weight: u32, coeffs: Vec<BigRational>) -> Result<QExpansion> {
        if weight < 4 || weight % 2 != 0 {
            return Err(Error::Invalid(format!("weight {weight} must be even and at least 4")));
        }
        if coeffs.is_empty() {
            return Err(Error::Invalid("empty q-expansion".into()));
        }
        Ok(QExpansion { weight, coeffs })
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> BigRational {
        self.coeffs.get(n).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &QExpansion) -> Result<QExpansion> {
        if self.weight != other.weight {
            return Err(Error::Invalid("weights differ".into()));
        }
        let k = self.order().min(other.order());
        let coeffs = (0..=k).map(|n| self.coeff(n) + other.coeff(n)).collect();
        QExpansion::new(self.weight, coeffs)
    }

    pub fn scale(&self, c: &BigRational) -> QExpansion {
        QExpansion { weight: self.weight, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Degree `m - 2` of the binary forms the cocycle takes values in.
    pub fn form_degree(&self) -> usize {
        self.weight as usize - 2
    }
}

/// Bernoulli number `B_n` with `B_1 = 1/2`.
pub fn bernoulli(n: u32) -> BigRational {
    // Akiyama-Tanigawa.
    let mut a: Vec<BigRational> = Vec::with_capacity(n as usize + 1);
    for m in 0..=n as usize {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            a[j - 1] = BigRational::from_integer(BigInt::from(j)) * (&a[j - 1] - &a[j]);
        }
    }
    a[0].clone()
}

/// `σ_k(n)`, the sum of `d^k` over divisors `d` of `n`.
pub fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// `-B_k / 2k + Σ σ_{k-1}(n) q^n` up to `q^K`.
pub fn eisenstein(weight: u32, order: usize) -> Result<QExpansion> {
    if weight < 4 || weight % 2 != 0 {
        return Err(Error::Invalid(format!("Eisenstein weight {weight} must be even and at least 4")));
    }
    if order < 1 {
        return Err(Error::Invalid("truncation order must be at least 1".into()));
    }
    let a0 = -bernoulli(weight) / BigRational::from_integer(BigInt::from(2 * weight));
    let mut coeffs = vec![a0];
    coeffs.extend((1..=order as u64).map(|n| BigRational::from_integer(sigma(weight - 1, n))));
    QExpansion::new(weight, coeffs)
}

/// `q Π (1 - q^n)^24` up to `q^K`.
pub fn delta(order: usize) -> QExpansion {
    let k = order.max(1);
    // Π (1 - q^n) up to q^{K-1}, then raise to the 24th power.
    let len = k;
    let mut eta = vec![BigInt::zero(); len];
    eta[0] = BigInt::one();
    for n in 1..len {
        for i in (n..len).rev() {
            let t = eta[i - n].clone();
            eta[i] -= t;
        }
    }
    let mut acc = vec![BigInt::zero(); len];
    acc[0] = BigInt::one();
    for _ in 0..24 {
        let mut next = vec![BigInt::zero(); len];
        for (i, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in eta.iter().enumerate().take(len - i) {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    let mut coeffs = vec![BigRational::zero()];
    coeffs.extend(acc.into_iter().map(BigRational::from_integer));
    QExpansion { weight: 12, coeffs }
}

/// Smallest `K` for which the q-expansion tail of a weight `m` form with
/// coefficients `O(N^{m-1})` is below `10^-digits` on the segment `i -> i+1`.
pub fn required_order(weight: u32, digits: u32) -> usize {
    let target = -(digits as f64) * std::f64::consts::LN_10;
    (1..100_000).find(|&k| log_tail(weight, k, 1.0) < target).unwrap_or(100_000)
}

// ln of 2^{m-2} Σ_{N>K} A N^m e^{-2πN}.
fn log_tail(weight: u32, k: usize, a: f64) -> f64 {
    let m = weight as f64;
    let terms: Vec<f64> = (k + 1..k + 400)
        .map(|n| m * (n as f64).ln() - 2.0 * std::f64::consts::PI * n as f64)
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    (m - 2.0) * std::f64::consts::LN_2 + a.ln() + top + sum.ln()
}

fn coefficient_growth(f: &QExpansion) -> f64 {
    let e = f.weight as i32 - 1;
    (1..=f.order())
        .filter_map(|n| f.coeffs[n].abs().to_f64().map(|a| a / (n as f64).powi(e)))
        .fold(1.0, f64::max)
}

// ---------------------------------------------------------------------------
// Binary forms.

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn poly_mul(p: &[BigInt], q: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(p: &[BigInt], e: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::one()];
    for _ in 0..e {
        acc = poly_mul(&acc, p);
    }
    acc
}

/// Integer matrix `M` of `γ` on degree `n` forms: `(γ·P) = M P`.
pub fn action_matrix(g: &Sl2, n: usize) -> Vec<Vec<BigInt>> {
    let [a, b, c, d] = g.entries();
    let first = [d.clone(), b.clone()];
    let second = [c.clone(), a.clone()];
    let mut m = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for j in 0..=n {
        let col = poly_mul(&poly_pow(&first, n - j), &poly_pow(&second, j));
        for (i, x) in col.into_iter().enumerate() {
            m[i][j] = x;
        }
    }
    m
}

fn mat_mul(x: &[Vec<BigInt>], y: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = x.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if x[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &x[i][k] * &y[k][j];
            }
        }
    }
    out
}

fn mat_add_assign(x: &mut [Vec<BigInt>], y: &[Vec<BigInt>], sign: i32) {
    for (rx, ry) in x.iter_mut().zip(y) {
        for (a, b) in rx.iter_mut().zip(ry) {
            if sign > 0 {
                *a += b;
            } else {
                *a -= b;
            }
        }
    }
}

fn zero_mat(n: usize) -> Vec<Vec<BigInt>> {
    vec![vec![BigInt::zero(); n + 1]; n + 1]
}

/// `γ·P` in exact arithmetic.
pub fn act(g: &Sl2, p: &[BigRational]) -> Vec<BigRational> {
    let n = p.len() - 1;
    let m = action_matrix(g, n);
    m.iter()
        .map(|row| row.iter().zip(p).map(|(x, y)| y * x).fold(BigRational::zero(), |s, t| s + t))
        .collect()
}

/// The quadratic form `cX^2 + (a-d)XY - bY^2` fixed by `α`.
pub fn fixed_quadratic(alpha: &Sl2) -> Vec<BigInt> {
    let [a, b, c, d] = alpha.entries();
    vec![c.clone(), a - d, -b]
}

/// `Q_α^k` as a degree `2k` form.
pub fn fixed_form(alpha: &Sl2, k: usize) -> Vec<BigRational> {
    poly_pow(&fixed_quadratic(alpha), k).into_iter().map(BigRational::from_integer).collect()
}

/// `B(P, Q) = Σ (-1)^i P_i Q_{n-i} / C(n, i)`, invariant under `SL2`.
pub fn pairing(p: &[BigRational], q: &[BigRational]) -> BigRational {
    let n = p.len() - 1;
    assert_eq!(q.len(), n + 1, "pairing degree mismatch");
    let mut s = BigRational::zero();
    for i in 0..=n {
        let t = &p[i] * &q[n - i] / BigRational::from_integer(binomial(n, i));
        if i % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    s
}

/// Integer matrix `A_γ` with `r_γ = A_γ r_T`, folded along the S/T word of
/// `γ` using `r_{γδ} = r_γ + γ·r_δ`, `r_S = 0` and `r_{-I} = 0`.
pub fn cocycle_matrix(g: &Sl2, n: usize) -> Vec<Vec<BigInt>> {
    let word = g.decompose();
    let t = action_matrix(&Sl2::t(), n);
    let t_inv = action_matrix(&Sl2::t().inverse(), n);
    let s = action_matrix(&Sl2::s(), n);
    let mut prefix = action_matrix(&Sl2::identity(), n);
    let mut acc = zero_mat(n);
    for syl in &word.syllables {
        match syl {
            Syllable::S => prefix = mat_mul(&prefix, &s),
            Syllable::T(k) => {
                let steps = k.abs().to_u64().expect("T exponent too large");
                if k.is_positive() {
                    // r_{T^k} = Σ_{j<k} T^j r_T
                    for _ in 0..steps {
                        mat_add_assign(&mut acc, &prefix, 1);
                        prefix = mat_mul(&prefix, &t);
                    }
                } else {
                    // r_{T^-k} = -Σ_{j=1..k} T^{-j} r_T
                    for _ in 0..steps {
                        prefix = mat_mul(&prefix, &t_inv);
                        mat_add_assign(&mut acc, &prefix, -1);
                    }
                }
            }
        }
    }
    acc
}

/// Exact coefficients `c` with `F(α) = Σ c_i (r_T)_i`.
pub fn class_functional(alpha: &Sl2, n: usize) -> Vec<BigRational> {
    functional_from_matrix(&cocycle_matrix(alpha, n), &fixed_form(alpha, n / 2), &BigRational::one())
}

fn functional_from_matrix(a: &[Vec<BigInt>], q: &[BigRational], scale: &BigRational) -> Vec<BigRational> {
    let n = a.len() - 1;
    let weights: Vec<BigRational> = (0..=n)
        .map(|i| {
            let w = &q[n - i] / BigRational::from_integer(binomial(n, i)) * scale;
            if i % 2 == 0 {
                w
            } else {
                -w
            }
        })
        .collect();
    (0..=n)
        .map(|j| (0..=n).fold(BigRational::zero(), |s, i| s + &weights[i] * &a[i][j]))
        .collect()
}

// ---------------------------------------------------------------------------
// Numerics.

fn to_integer(x: &BigInt) -> rug::Integer {
    rug::Integer::from_str_radix(&x.to_str_radix(16), 16).expect("hex conversion")
}

fn to_float(bits: u32, x: &BigRational) -> Float {
    let r = rug::Rational::from((to_integer(x.numer()), to_integer(x.denom())));
    Float::with_val(bits, r)
}

fn log2_abs(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    (x.numer().bits() as f64) - (x.denom().bits() as f64)
}

fn i_pow(bits: u32, e: usize) -> Complex {
    match e % 4 {
        0 => Complex::with_val(bits, (1, 0)),
        1 => Complex::with_val(bits, (0, 1)),
        2 => Complex::with_val(bits, (-1, 0)),
        _ => Complex::with_val(bits, (0, -1)),
    }
}

/// `∫_i^{i+w} f(τ) (X + τY)^n dτ` termwise, `w >= 1` an integer.
pub fn segment_integral(f: &QExpansion, width: u64, bits: u32) -> Vec<Complex> {
    let n = f.form_degree();
    let w = Float::with_val(bits, width);
    let tau_end = Complex::with_val(bits, (&w, 1));
    let i_unit = Complex::with_val(bits, (0, 1));
    let mut out = Vec::with_capacity(n + 1);

    // Per-coefficient integrals ∫ q^N τ^j dτ, N >= 1.
    let pi = Float::with_val(bits, Constant::Pi);
    let mut moments = vec![Complex::with_val(bits, 0); n + 1];
    for (nn, a) in f.coeffs.iter().enumerate().skip(1) {
        if a.is_zero() {
            continue;
        }
        let two_pi_n = Float::with_val(bits, &pi * 2u32) * nn as u32;
        let decay = Float::with_val(bits, -&two_pi_n).exp();
        let coef = Float::with_val(bits, &decay * &to_float(bits, a));
        let c = Complex::with_val(bits, (0, &two_pi_n));
        let c_inv = Complex::with_val(bits, c.recip_ref());
        // I_l = ∫_0^w t^l e^{ct} dt with e^{cw} = 1.
        let mut il = vec![Complex::with_val(bits, 0)];
        let mut wl = Float::with_val(bits, 1);
        for l in 1..=n {
            wl *= &w;
            let prev = Complex::with_val(bits, &il[l - 1] * l as u32);
            let diff = Complex::with_val(bits, &wl - &prev);
            il.push(Complex::with_val(bits, &diff * &c_inv));
        }
        for (j, m) in moments.iter_mut().enumerate() {
            let mut s = Complex::with_val(bits, 0);
            for (l, i_l) in il.iter().enumerate().take(j + 1) {
                let b = to_integer(&binomial(j, l));
                let t = Complex::with_val(bits, &i_pow(bits, j - l) * i_l);
                s += Complex::with_val(bits, &t * &b);
            }
            *m += Complex::with_val(bits, &s * &coef);
        }
    }

    let a0 = to_float(bits, &f.coeff(0));
    for (j, m) in moments.into_iter().enumerate() {
        let hi = Complex::with_val(bits, (&tau_end).pow((j + 1) as u32));
        let lo = Complex::with_val(bits, (&i_unit).pow((j + 1) as u32));
        let diff = Complex::with_val(bits, &hi - &lo) / (j as u32 + 1);
        let total = Complex::with_val(bits, &diff * &a0) + m;
        let b = to_integer(&binomial(n, j));
        out.push(Complex::with_val(bits, &total * &b));
    }
    out
}

/// Eichler cocycle data: `r_T` at the working precision, `r_S = 0`.
#[derive(Clone, Debug)]
pub struct PeriodCocycle {
    form: QExpansion,
    digits: u32,
    bits: u32,
    r_t: Vec<Complex>,
}

/// Value of `F_{f,φ}` together with the magnitude `Σ |c_i| |r_i|` of the
/// terms it was summed from.
#[derive(Clone, Debug)]
pub struct ClassValue {
    pub value: Complex,
    pub scale: Float,
}

fn working_bits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
}

/// Build `r_T` at `digits` decimal digits. Fails when the truncation of `f`
/// cannot reach that accuracy.
pub fn cocycle_build(f: &QExpansion, digits: u32) -> Result<PeriodCocycle> {
    let target = -(digits as f64) * std::f64::consts::LN_10;
    let tail = log_tail(f.weight, f.order(), coefficient_growth(f));
    if tail > target {
        return Err(Error::Invalid(format!(
            "precision budget exceeded: truncation {} gives about 1e{:.0}, need 1e-{}",
            f.order(),
            tail / std::f64::consts::LN_10,
            digits
        )));
    }
    let bits = working_bits(digits);
    let r_t = segment_integral(f, 1, bits);
    Ok(PeriodCocycle { form: f.clone(), digits, bits, r_t })
}

fn apply_matrix(m: &[Vec<BigInt>], v: &[Complex], bits: u32) -> Vec<Complex> {
    m.iter()
        .map(|row| {
            let mut s = Complex::with_val(bits, 0);
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() {
                    s += Complex::with_val(bits, y * &to_integer(x));
                }
            }
            s
        })
        .collect()
}

impl PeriodCocycle {
    pub fn weight(&self) -> u32 {
        self.form.weight
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn form(&self) -> &QExpansion {
        &self.form
    }

    pub fn r_t(&self) -> &[Complex] {
        &self.r_t
    }

    pub fn r_s(&self) -> Vec<Complex> {
        vec![Complex::with_val(self.bits, 0); self.r_t.len()]
    }

    fn degree(&self) -> usize {
        self.form.form_degree()
    }

    /// `r_γ`.
    pub fn eval(&self, g: &Sl2) -> Vec<Complex> {
        apply_matrix(&cocycle_matrix(g, self.degree()), &self.r_t, self.bits)
    }

    /// `γ·v` on complex coefficient vectors.
    pub fn act(&self, g: &Sl2, v: &[Complex]) -> Vec<Complex> {
        apply_matrix(&action_matrix(g, self.degree()), v, self.bits)
    }

    fn evaluate_functional(&self, c: &[BigRational]) -> ClassValue {
        let extra = c.iter().map(log2_abs).fold(0.0, f64::max).max(0.0).ceil() as u32;
        let bits = self.bits + extra;
        let r = if extra == 0 { self.r_t.clone() } else { segment_integral(&self.form, 1, bits) };
        let mut value = Complex::with_val(bits, 0);
        let mut scale = Float::with_val(bits, 0);
        for (ci, ri) in c.iter().zip(&r) {
            if ci.is_zero() {
                continue;
            }
            let t = Complex::with_val(bits, ri * &to_float(bits, ci));
            scale += Float::with_val(bits, t.abs_ref());
            value += t;
        }
        ClassValue { value, scale }
    }

    /// `F_{f,φ}(α) = B(r_α, Q_α^k)`.
    pub fn class_value(&self, alpha: &Sl2) -> Complex {
        self.class_value_detail(alpha).value
    }

    pub fn class_value_detail(&self, alpha: &Sl2) -> ClassValue {
        self.evaluate_functional(&class_functional(alpha, self.degree()))
    }

    /// `F(α^m)` with `r_{α^m}` expanded as `(1 + α + ... + α^{m-1}) r_α`.
    pub fn class_value_power(&self, alpha: &Sl2, m: u32) -> Complex {
        let n = self.degree();
        let a = cocycle_matrix(alpha, n);
        let step = action_matrix(alpha, n);
        let mut sum = zero_mat(n);
        let mut pw = action_matrix(&Sl2::identity(), n);
        for _ in 0..m {
            mat_add_assign(&mut sum, &pw, 1);
            pw = mat_mul(&pw, &step);
        }
        let am = mat_mul(&sum, &a);
        let alpha_m = alpha.pow(m as i64);
        let c = functional_from_matrix(&am, &fixed_form(&alpha_m, n / 2), &BigRational::one());
        self.evaluate_functional(&c).value
    }

    /// `Σ coeff · F(class)` over a loop sum, using class representatives.
    pub fn pair(&self, x: &LoopSum) -> ClassValue {
        let mut c = vec![BigRational::zero(); self.degree() + 1];
        for (class, k) in x.iter() {
            let ci = class_functional(&class.representative(), self.degree());
            for (acc, v) in c.iter_mut().zip(ci) {
                *acc += v * BigRational::from_integer(k.clone());
            }
        }
        self.evaluate_functional(&c)
    }
}

/// Result of the eigenvalue recovery at `p = 2`.
#[derive(Clone, Debug)]
pub struct ApRecovery {
    pub ap: Complex,
    pub expected: BigRational,
    pub rel_err: f64,
}

impl fmt::Display for ApRecovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a_2 = {} (expected {}, rel_err {:e})", format_real(&self.ap, 20), self.expected, self.rel_err)
    }
}

/// Real part of `z` rounded to `digits` significant digits.
pub fn format_real(z: &Complex, digits: usize) -> String {
    z.real().to_string_radix(10, Some(digits.max(1)))
}

/// `a_2 = 2^{k/2-1} · 3 · <F, T_2 α> / F(α^3)` for a weight `k` eigenform.
pub fn ap_recover(f: &QExpansion, alpha: &Sl2, digits: u32) -> Result<ApRecovery> {
    ap_recover_scaled(f, alpha, digits, &BigRational::one())
}

/// [`ap_recover`] with the invariant pairing multiplied by `scale`.
pub fn ap_recover_scaled(f: &QExpansion, alpha: &Sl2, digits: u32, scale: &BigRational) -> Result<ApRecovery> {
    let p = 2u64;
    let decomp = orbit_decomposition(alpha, p)?;
    if decomp.orbits.len() != 1 {
        return Err(Error::NotTransitive(p));
    }
    let a1 = f.coeff(1);
    if a1.is_zero() {
        return Err(Error::Invalid("a_1 = 0; not a normalized eigenform".into()));
    }
    if scale.is_zero() {
        return Err(Error::Invalid("pairing scale must be nonzero".into()));
    }
    let expected = f.coeff(2) / &a1;
    let cocycle = cocycle_build(f, digits)?;
    let n = f.form_degree();

    let image = apply_tp(&LoopSum::from_matrix(alpha), p)?;
    let mut num_c = vec![BigRational::zero(); n + 1];
    for (class, k) in image.iter() {
        let rep = class.representative();
        let c = functional_from_matrix(&cocycle_matrix(&rep, n), &fixed_form(&rep, n / 2), scale);
        for (acc, v) in num_c.iter_mut().zip(c) {
            *acc += v * BigRational::from_integer(k.clone());
        }
    }
    let cube = alpha.pow(3);
    let den_c = functional_from_matrix(&cocycle_matrix(&cube, n), &fixed_form(&cube, n / 2), scale);

    let num = cocycle.evaluate_functional(&num_c);
    let den = cocycle.evaluate_functional(&den_c);
    let bits = num.value.prec().0.max(den.value.prec().0);
    let noise = Float::with_val(bits, &den.scale * Float::with_val(bits, 10).pow(-(digits as i32) / 2));
    if Float::with_val(bits, den.value.abs_ref()) <= noise {
        return Err(Error::Degenerate(format!(
            "F(alpha^3) vanishes for weight {} at {} digits",
            f.weight, digits
        )));
    }
    let factor = BigRational::from_integer(BigInt::from(3u32) << (f.weight as usize / 2 - 1));
    let ratio = Complex::with_val(bits, &num.value / &den.value);
    let ap = Complex::with_val(bits, &ratio * &to_float(bits, &factor));
    let exp_f = to_float(bits, &expected);
    let diff = Complex::with_val(bits, &ap - &exp_f);
    let err = Float::with_val(bits, diff.abs_ref());
    let rel_err = if expected.is_zero() {
        err.to_f64()
    } else {
        (err / exp_f.abs()).to_f64()
    };
    Ok(ApRecovery { ap, expected, rel_err })
}

/// Named forms accepted by the CLI, truncated for `digits` of accuracy.
pub fn named_form(name: &str, digits: u32) -> Result<QExpansion> {
    let weight = match name {
        "eis4" => 4,
        "eis6" => 6,
        "eis8" => 8,
        "eis10" => 10,
        "eis12" => 12,
        "delta" => 12,
        _ => return Err(Error::Parse(format!("unknown form {name}"))),
    };
    let k = required_order(weight, digits + 10);
    if name == "delta" {
        Ok(delta(k))
    } else {
        eisenstein(weight, k)
    }
}

/// `max_i |x_i - y_i|` as `f64`.
pub fn max_abs_diff(x: &[Complex], y: &[Complex]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let p = a.prec().0.max(b.prec().0);
            Float::with_val(p, Complex::with_val(p, a - b).abs_ref()).to_f64()
        })
        .fold(0.0, f64::max)
}

/// `|z|` as `f64`.
pub fn abs_f64(z: &Complex) -> f64 {
    Float::with_val(z.prec().0, z.abs_ref()).to_f64()
}
