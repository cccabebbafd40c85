//! Verifier suites behind `hecke-loops verify`.

use std::collections::BTreeMap;

use clap::ValueEnum;
use hecke_loops::classfn::{build_table, dual_ep, dual_tp, ClassFunction, MAX_LEVEL};
use hecke_loops::conj::{canonicalize, ConjClass};
use hecke_loops::cover::{
    branch, circle_pushforward_check, cycle_type_fast, is_prime, orbit_decomposition, primes_up_to, ModMat,
};
use hecke_loops::hecke::{
    adams_hecke_discrepancy, apply_ep, apply_tn, apply_tp, apply_tpn, check_min_poly, parabolic_ep, parabolic_tp,
    sample_classes, torsion_table, torsion_tpn_closed,
};
use hecke_loops::periods::{abs_f64, ap_recover, cocycle_build, format_real, named_form};
use hecke_loops::random::{random_word, rng, Rng64};
use hecke_loops::{Error, LoopSum, Sign, Sl2};
use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Output, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Minpoly,
    Relations,
    Coprime,
    Parabolic,
    Torsion,
    Cycletype,
    Duality,
    Circle,
    Periods,
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
    detail: Value,
}

#[derive(Serialize)]
struct Report {
    suite: String,
    seed: u64,
    samples: usize,
    pass: bool,
    checks: Vec<Check>,
    /// Recorded observations that are not asserted.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    log: Vec<Value>,
}

struct Builder {
    checks: Vec<Check>,
    log: Vec<Value>,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }
}

fn classes(config: &RunConfig) -> Vec<ConjClass> {
    sample_classes(&mut rng(config.seed), config.samples, config.max_len)
}

fn torsion() -> Vec<ConjClass> {
    ConjClass::torsion_classes()
}

fn primes(config: &RunConfig) -> Result<Vec<u64>, Error> {
    for &p in &config.primes {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
    }
    Ok(config.primes.clone())
}

pub fn run(suite: Suite, config: &RunConfig, level: u64) -> Result<Output, Error> {
    let mut b = Builder { checks: Vec::new(), log: Vec::new() };
    match suite {
        Suite::Minpoly => minpoly(&mut b, config)?,
        Suite::Relations => relations(&mut b, config)?,
        Suite::Coprime => coprime(&mut b, config)?,
        Suite::Parabolic => parabolic(&mut b, config)?,
        Suite::Torsion => torsion_suite(&mut b, config)?,
        Suite::Cycletype => cycletype(&mut b, config)?,
        Suite::Duality => duality(&mut b, config, level)?,
        Suite::Circle => circle(&mut b)?,
        Suite::Periods => periods(&mut b, config)?,
    }
    let pass = b.checks.iter().all(|c| c.pass);
    let name = format!("{suite:?}").to_lowercase();
    let mut pretty = format!("verify {name}: {}\n", if pass { "PASS" } else { "FAIL" });
    for c in &b.checks {
        pretty.push_str(&format!("  {} {}: {}\n", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail));
    }
    for l in &b.log {
        pretty.push_str(&format!("  log {l}\n"));
    }
    let report = Report { suite: name, seed: config.seed, samples: config.samples, pass, checks: b.checks, log: b.log };
    let mut out = Output::of(&report).with_pretty(pretty);
    out.ok = pass;
    Ok(out)
}

fn minpoly(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    let mut xs = classes(config);
    xs.extend(torsion());
    for p in primes(config)? {
        let mut failures = Vec::new();
        for c in &xs {
            if !check_min_poly(&LoopSum::single(c.clone()), p)? {
                failures.push(c.to_string());
            }
        }
        b.check(format!("m_{p}(e_{p}) = 0"), failures.is_empty(), json!({ "classes": xs.len(), "failures": failures }));
    }
    Ok(())
}

/// A random element of `Γ(p)`: a random word raised to its order mod `p`.
fn principal_element(r: &mut Rng64, p: u64, max_len: usize) -> Sl2 {
    let w = random_word(r, max_len);
    let m = ModMat::from_sl2(&w, p);
    let order = (1..).find(|&k| m.pow(k, p) == ModMat::identity(p)).unwrap();
    w.pow(order as i64)
}

fn relations(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    let ps = primes(config)?;
    let xs = classes(config);
    for (i, &p) in ps.iter().enumerate() {
        for &q in &ps[i + 1..] {
            let mut bad = 0;
            for c in &xs {
                let x = LoopSum::single(c.clone());
                if apply_ep(&apply_ep(&x, q)?, p)? != apply_ep(&apply_ep(&x, p)?, q)? {
                    bad += 1;
                }
            }
            b.check(format!("e_{p} e_{q} = e_{q} e_{p}"), bad == 0, json!({ "classes": xs.len(), "failures": bad }));
        }
    }
    for &p in &ps {
        let pi = p as i64;
        let sigma = |n: i64| LoopSum::single(ConjClass::horocycle_pow(n));
        let x = sigma(1);
        let te = apply_tp(&apply_ep(&x, p)?, p)?;
        let et = apply_ep(&apply_tp(&x, p)?, p)?;
        let want_te = sigma(pi * pi).plus(&sigma(1).scaled(&BigInt::from(p)));
        let want_et = sigma(pi).scaled(&BigInt::from(p + 1));
        b.check(
            format!("T_{p} e_{p} != e_{p} T_{p} on sigma"),
            te == want_te && et == want_et && te != et,
            json!({ "T_p e_p": te.to_string(), "e_p T_p": et.to_string() }),
        );

        let mut r = rng(config.seed ^ p);
        let mut bad = 0;
        let n = config.samples.min(20);
        for _ in 0..n {
            let a = principal_element(&mut r, p, 6);
            let x = LoopSum::from_matrix(&a);
            if apply_ep(&x, p)? != x.scaled(&BigInt::from(p)) {
                bad += 1;
            }
        }
        b.check(format!("e_{p} = p on Gamma({p})"), bad == 0, json!({ "elements": n, "failures": bad }));

        let mut nonzero = 0;
        for c in &xs {
            if !adams_hecke_discrepancy(&LoopSum::single(c.clone()), 2, p)?.is_zero() {
                nonzero += 1;
            }
        }
        b.log.push(json!({ "psi^2 T_p - T_p psi^2": { "p": p, "classes": xs.len(), "nonzero": nonzero } }));
    }
    Ok(())
}

fn coprime(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    let ps = primes(config)?;
    let mut pairs = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        for &q in &ps[i + 1..] {
            pairs.push((p, q));
        }
    }
    if ps.len() >= 2 {
        pairs.push((ps[0] * ps[0], ps[1] * ps[1]));
    }
    let xs = classes(config);
    for (m, n) in pairs {
        let mut bad = 0;
        for c in &xs {
            let x = LoopSum::single(c.clone());
            let mn = apply_tn(&apply_tn(&x, n)?, m)?;
            let nm = apply_tn(&apply_tn(&x, m)?, n)?;
            if mn != nm || mn != apply_tn(&x, m * n)? {
                bad += 1;
            }
        }
        b.check(format!("T_{m} T_{n} = T_{n} T_{m} = T_{}", m * n), bad == 0, json!({ "classes": xs.len(), "failures": bad }));
    }
    Ok(())
}

fn parabolic(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    for p in primes(config)? {
        let mut bad = Vec::new();
        for eps in [Sign::Plus, Sign::Minus] {
            for n in -100i64..=100 {
                let c = canonicalize(&Sl2::t().pow(n).signed(eps));
                let x = LoopSum::single(c);
                if apply_tp(&x, p)? != parabolic_tp(eps, n, p) || apply_ep(&x, p)? != parabolic_ep(eps, n, p) {
                    bad.push(json!({ "sign": eps.as_i32(), "n": n }));
                }
            }
        }
        b.check(format!("parabolic closed forms at p = {p}"), bad.is_empty(), json!({ "cases": 402, "failures": bad }));
    }
    Ok(())
}

fn torsion_suite(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    for p in primes(config)? {
        let mut bad = Vec::new();
        for c in torsion() {
            let x = LoopSum::single(c.clone());
            if apply_tp(&x, p)? != torsion_table(p, &c)? {
                bad.push(format!("T_{p} {c}"));
            }
            for n in 1..=3 {
                if apply_tpn(&x, p, n)? != torsion_tpn_closed(p, n, &c)? {
                    bad.push(format!("T_{p}^{n} {c}"));
                }
            }
        }
        b.check(format!("torsion table at p = {p}"), bad.is_empty(), json!({ "classes": 8, "failures": bad }));
    }
    Ok(())
}

fn cycletype(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    let primes = primes_up_to(50);
    let mut r = rng(config.seed);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for i in 0..config.samples {
        let a = random_word(&mut r, config.max_len);
        let p = if i % 10 == 0 { 2 } else { primes[r.gen_range(0..primes.len())] };
        let brute = orbit_decomposition(&a, p)?;
        match cycle_type_fast(&a, p) {
            Ok(ct) => {
                *counts.entry(format!("{:?}", branch(&a, p))).or_default() += 1;
                if ct.d_multiset() != brute.d_multiset() {
                    bad.push(json!({ "alpha": a.to_string(), "p": p }));
                }
            }
            Err(Error::TrivialAction(_)) => {
                *counts.entry("TrivialAction".into()).or_default() += 1;
                if brute.orbits.iter().any(|o| o.d != 1) {
                    bad.push(json!({ "alpha": a.to_string(), "p": p }));
                }
            }
            Err(e) => return Err(e),
        }
    }
    b.check("fast cycle type = brute force", bad.is_empty(), json!({ "branches": counts, "failures": bad }));
    Ok(())
}

fn duality(b: &mut Builder, config: &RunConfig, level: u64) -> Result<(), Error> {
    let g = build_table(level)?;
    let basis = ClassFunction::indicator_basis(&g);
    let mut r = rng(config.seed);
    let alphas: Vec<Sl2> = (0..config.samples.min(20)).map(|_| random_word(&mut r, config.max_len)).collect();
    for p in primes(config)? {
        if level * p > MAX_LEVEL {
            b.log.push(json!({ "skipped": format!("p = {p}: level {} exceeds {MAX_LEVEL}", level * p) }));
            continue;
        }
        let mut bad = 0;
        for f in &basis {
            let d = dual_tp(f, p)?;
            for a in &alphas {
                if d.eval_sl2(a) != f.pair(&apply_tp(&LoopSum::from_matrix(a), p)?) {
                    bad += 1;
                }
            }
        }
        b.check(
            format!("<T_{p}^ F, a> = <F, T_{p} a> at N = {level}"),
            bad == 0,
            json!({ "functions": basis.len(), "loops": alphas.len(), "failures": bad }),
        );
        if level * p * p <= MAX_LEVEL {
            let mut bad = 0;
            for f in &basis {
                let tt = dual_tp(&dual_tp(f, p)?, p)?;
                let e = dual_ep(f, p)?;
                for a in &alphas {
                    let t2 = f.pair(&apply_tpn(&LoopSum::from_matrix(a), p, 2)?);
                    if tt.eval_sl2(a) != t2 + e.eval_sl2(a) {
                        bad += 1;
                    }
                }
            }
            b.check(format!("T_{p}^ T_{p}^ = T_{}^ + e_{p}^ at N = {level}", p * p), bad == 0, json!({ "failures": bad }));
        }
    }
    Ok(())
}

fn circle(b: &mut Builder) -> Result<(), Error> {
    let mut bad = 0;
    let mut table = Vec::new();
    for r in 1..=5u32 {
        let mut row = Vec::new();
        for m in 1..=12u64 {
            let mut mism = 0;
            for k in -24i64..=24 {
                let c = circle_pushforward_check(r, m, k)?;
                if c.lhs != c.rhs {
                    bad += 1;
                }
                if c.lhs != c.rhs_inverted {
                    mism += 1;
                }
            }
            row.push(mism);
        }
        table.push(json!({ "r": r, "inverted_mismatches_by_m": row }));
    }
    b.check("corrected coefficient (d/m)^(r-1)", bad == 0, json!({ "cases": 5 * 12 * 49, "failures": bad }));
    b.log.push(json!({ "inverted coefficient (m/d)^(r-1)": table }));
    Ok(())
}

fn periods(b: &mut Builder, config: &RunConfig) -> Result<(), Error> {
    let alpha = Sl2::from_i64(1, 1, 1, 2)?;
    let n = config.samples.min(30);
    for name in ["eis4", "delta"] {
        let f = named_form(name, config.digits)?;
        let c = cocycle_build(&f, config.digits)?;
        let base = c.class_value(&alpha);
        let mut r = rng(config.seed);
        let mut worst = 0.0f64;
        for _ in 0..n {
            let p = random_word(&mut r, config.max_len);
            let v = c.class_value(&alpha.conjugate_by(&p));
            let diff = rug::Complex::with_val(v.prec().0, &v - &base);
            worst = worst.max(abs_f64(&diff) / abs_f64(&base));
        }
        b.check(format!("{name}: conjugation invariance"), worst <= 1e-8, json!({ "conjugates": n, "worst_rel": worst }));
    }
    for name in ["eis4", "eis6", "eis8", "delta"] {
        let f = named_form(name, config.digits)?;
        match ap_recover(&f, &alpha, config.digits) {
            Ok(r) => b.check(
                format!("{name}: a_2 recovery"),
                r.rel_err <= 1e-6,
                json!({ "ap": format_real(&r.ap, 20), "expected": r.expected.to_string(), "rel_err": r.rel_err }),
            ),
            Err(e) => b.check(format!("{name}: a_2 recovery"), false, json!({ "error": e.to_string() })),
        }
    }
    Ok(())
}
