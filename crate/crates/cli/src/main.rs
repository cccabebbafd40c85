use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use hecke_loops::classfn::{
    build_table, congruence_subgroup, dual_ep, dual_tp, pullback_cf, pushforward_cf, ClassFunction, FiniteGroup,
};
use hecke_loops::conj::{adams, project_psl, real_frobenius};
use hecke_loops::hecke::{apply_ep, apply_tn, apply_tp, apply_word, monomials, nullity_search, sample_classes, Op};
use hecke_loops::periods::{ap_recover, format_real, named_form};
use hecke_loops::random::rng;
use hecke_loops::ser::parse_rational;
use hecke_loops::{canonicalize, CongruenceSpec, ConjClass, Error, HeckeWord, LoopSum, Sl2};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

mod verify;

/// Hecke operators on conjugacy classes of SL2(Z).
///
/// Matrices are written "a,b,c,d" for [[a,b],[c,d]]. Loop sums are given as a
/// matrix, as LoopSum JSON, or as "-" to read JSON from stdin.
#[derive(Parser, Debug)]
#[command(name = "hecke-loops", version)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Seed for the ChaCha20 sample generator.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random samples drawn by verifiers.
    #[arg(long, global = true, default_value_t = 100)]
    pub samples: usize,
    /// Comma-separated primes used by verifiers.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<u64>,
    /// Decimal digits for period computations.
    #[arg(long, global = true, default_value_t = hecke_loops::periods::DEFAULT_DIGITS)]
    pub digits: u32,
    /// Maximum word length of random samples.
    #[arg(long, global = true, default_value_t = 12)]
    pub max_len: usize,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Canonical conjugacy class of a matrix.
    Canon {
        matrix: String,
        /// Also print the class representative.
        #[arg(long)]
        emit_representative: bool,
    },
    /// Representative matrix of a class given as JSON.
    Rep { class: String },
    /// Adams operator psi^m.
    Adams {
        input: String,
        #[arg(long)]
        m: u64,
    },
    /// Complex conjugation, [[a,b],[c,d]] -> [[a,-b],[-c,d]].
    Frobenius { input: String },
    /// Image in PSL2(Z).
    Psl { input: String },
    /// Hecke operator T_p.
    Tp {
        input: String,
        #[arg(long)]
        p: u64,
    },
    /// e_p = pi_* pi^* - id for Gamma0(p).
    Ep {
        input: String,
        #[arg(long)]
        p: u64,
    },
    /// Hecke operator T_N.
    Tn {
        input: String,
        #[arg(long)]
        n: u64,
    },
    /// Apply a Hecke word such as "T2*e3*T2 + 4*e5" or "TN:12".
    ///
    /// Within a word the rightmost letter acts first.
    Word { spec: String, input: String },
    /// Class functions on SL2(Z/N).
    Classfn {
        #[command(subcommand)]
        command: ClassfnCommand,
    },
    /// Period computations.
    Periods {
        #[command(subcommand)]
        command: PeriodsCommand,
    },
    /// Run a verifier suite; exits 0 iff every check passes.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
        /// Level for the duality suite.
        #[arg(long, default_value_t = 3)]
        level: u64,
    },
    /// Search for Hecke words acting as zero on random samples.
    Nullity {
        /// Letters, e.g. "e2,T3".
        #[arg(long, value_delimiter = ',', default_value = "e2")]
        letters: Vec<String>,
        /// Maximum word length.
        #[arg(long, default_value_t = 3)]
        length: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ClassfnCommand {
    /// Conjugacy classes of SL2(Z/N) with their sizes.
    Table {
        #[arg(long)]
        level: u64,
    },
    /// Pushforward from a congruence subgroup to SL2(Z/N).
    Push {
        /// Subgroup, e.g. "gamma0:3".
        #[arg(long)]
        subgroup: String,
        /// "indicator:K", "constant:V" or class-function JSON on the subgroup.
        #[arg(long)]
        function: String,
    },
    /// Restriction from SL2(Z/N) to a congruence subgroup.
    Pull {
        #[arg(long)]
        subgroup: String,
        /// "indicator:K", "constant:V" or class-function JSON at full level.
        #[arg(long)]
        function: String,
    },
    /// Dual operator T_p^vee, level N to pN.
    Dualtp {
        #[arg(long)]
        function: String,
        #[arg(long)]
        level: Option<u64>,
        #[arg(long)]
        p: u64,
    },
    /// Dual operator e_p^vee, level N to pN.
    Dualep {
        #[arg(long)]
        function: String,
        #[arg(long)]
        level: Option<u64>,
        #[arg(long)]
        p: u64,
    },
}

#[derive(Subcommand, Debug)]
enum PeriodsCommand {
    /// Recover a_2 from the class function of a level one eigenform.
    Ap {
        #[arg(long, value_parser = ["eis4", "eis6", "eis8", "eis10", "eis12", "delta"])]
        form: String,
        #[arg(long, default_value = "1,1,1,2")]
        alpha: String,
    },
}

/// Result of a command: JSON plus an optional human rendering.
pub struct Output {
    pub json: serde_json::Value,
    pub pretty: Option<String>,
    pub ok: bool,
}

impl Output {
    fn of<T: Serialize>(value: &T) -> Output {
        Output { json: serde_json::to_value(value).expect("serializable"), pretty: None, ok: true }
    }

    fn with_pretty(mut self, text: impl Into<String>) -> Output {
        self.pretty = Some(text.into());
        self
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(&Error::Parse(first.to_string()));
        }
    };
    let config = cli.config.clone();
    match run(cli) {
        Ok(out) => {
            let text = match (&out.pretty, config.pretty) {
                (Some(p), true) => p.trim_end().to_string(),
                (None, true) => serde_json::to_string_pretty(&out.json).expect("json"),
                _ => serde_json::to_string(&out.json).expect("json"),
            };
            if let Err(e) = emit(&config, &text) {
                return fail(&e);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), Error> {
    match &config.output {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Error::Invalid(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Invalid(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", json!({ "error": e.to_string() }));
    ExitCode::from(2)
}

fn parse_matrix(s: &str) -> Result<Sl2, Error> {
    s.trim().parse()
}

fn read_arg(s: &str) -> Result<String, Error> {
    if s == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf).map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(buf)
    } else {
        Ok(s.to_string())
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// A matrix, a class JSON object, or a LoopSum JSON array.
fn parse_loops(s: &str) -> Result<LoopSum, Error> {
    let text = read_arg(s)?;
    let t = text.trim();
    if t.starts_with('[') {
        serde_json::from_str(t).map_err(json_err)
    } else if t.starts_with('{') {
        let c: ConjClass = serde_json::from_str(t).map_err(json_err)?;
        Ok(LoopSum::single(c))
    } else {
        Ok(LoopSum::from_matrix(&parse_matrix(t)?))
    }
}

fn loops_output(x: &LoopSum) -> Output {
    Output::of(x).with_pretty(x.to_string())
}

fn parse_hecke_word(spec: &str) -> Result<HeckeWord, Error> {
    match spec.trim().strip_prefix("TN:") {
        Some(n) => {
            let n: u64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad level in {spec:?}")))?;
            if n == 0 {
                return Err(Error::Invalid("T_0 is undefined".into()));
            }
            Ok(HeckeWord::monomial(vec![Op::T(n)]))
        }
        None => spec.parse(),
    }
}

fn run(cli: Cli) -> Result<Output, Error> {
    let config = cli.config;
    match cli.command {
        Command::Canon { matrix, emit_representative } => {
            let c = canonicalize(&parse_matrix(&read_arg(&matrix)?)?);
            let pretty = format!("{c}  ({:?})", c.classify());
            if emit_representative {
                let rep = c.representative();
                let value = json!({ "class": c, "representative": rep });
                Ok(Output { json: value, pretty: Some(format!("{pretty}\nrepresentative {rep}")), ok: true })
            } else {
                Ok(Output::of(&c).with_pretty(pretty))
            }
        }
        Command::Rep { class } => {
            let c: ConjClass = serde_json::from_str(&read_arg(&class)?).map_err(json_err)?;
            let rep = c.representative();
            Ok(Output::of(&rep).with_pretty(rep.to_string()))
        }
        Command::Adams { input, m } => Ok(loops_output(&adams(&parse_loops(&input)?, m))),
        Command::Frobenius { input } => Ok(loops_output(&real_frobenius(&parse_loops(&input)?))),
        Command::Psl { input } => {
            let y = project_psl(&parse_loops(&input)?);
            Ok(Output::of(&y).with_pretty(y.to_string()))
        }
        Command::Tp { input, p } => Ok(loops_output(&apply_tp(&parse_loops(&input)?, p)?)),
        Command::Ep { input, p } => Ok(loops_output(&apply_ep(&parse_loops(&input)?, p)?)),
        Command::Tn { input, n } => Ok(loops_output(&apply_tn(&parse_loops(&input)?, n)?)),
        Command::Word { spec, input } => {
            let w = parse_hecke_word(&spec)?;
            Ok(loops_output(&apply_word(&w, &parse_loops(&input)?)?))
        }
        Command::Classfn { command } => run_classfn(command),
        Command::Periods { command: PeriodsCommand::Ap { form, alpha } } => {
            let f = named_form(&form, config.digits)?;
            let alpha = parse_matrix(&alpha)?;
            let r = ap_recover(&f, &alpha, config.digits)?;
            let value = json!({
                "ap": format_real(&r.ap, config.digits as usize),
                "expected": r.expected.to_string(),
                "rel_err": r.rel_err,
            });
            Ok(Output { json: value, pretty: Some(r.to_string()), ok: true })
        }
        Command::Verify { suite, level } => verify::run(suite, &config, level),
        Command::Nullity { letters, length } => {
            let ops: Vec<Op> = letters.iter().map(|l| parse_letter(l)).collect::<Result<_, _>>()?;
            let words = monomials(&ops, length);
            let mut r = rng(config.seed);
            let samples: Vec<LoopSum> =
                sample_classes(&mut r, config.samples, config.max_len).into_iter().map(LoopSum::single).collect();
            let kernel = nullity_search(&words, &samples)?;
            let texts: Vec<String> = kernel.iter().map(|w| w.to_string()).collect();
            let value = json!({ "words": words.len(), "samples": samples.len(), "kernel": texts });
            Ok(Output { json: value, pretty: Some(texts.join("\n")), ok: true })
        }
    }
}

fn parse_letter(s: &str) -> Result<Op, Error> {
    let w: HeckeWord = s.parse()?;
    let mut terms = w.terms();
    match (terms.next(), terms.next()) {
        (Some((ops, c)), None) if ops.len() == 1 && *c == BigInt::from(1) => Ok(ops[0]),
        _ => Err(Error::Parse(format!("{s:?} is not a single letter"))),
    }
}

fn parse_function(text: &str, group: &Arc<FiniteGroup>) -> Result<ClassFunction, Error> {
    let text = read_arg(text)?;
    let t = text.trim();
    if let Some(k) = t.strip_prefix("indicator:") {
        let k: usize = k.parse().map_err(|_| Error::Parse(format!("bad class index {k:?}")))?;
        if k >= group.num_classes() {
            return Err(Error::Invalid(format!("class index {k} out of range 0..{}", group.num_classes())));
        }
        return Ok(ClassFunction::indicator(group.clone(), k));
    }
    if let Some(v) = t.strip_prefix("constant:") {
        let v = parse_rational(v).ok_or_else(|| Error::Parse(format!("bad rational {v:?}")))?;
        return Ok(ClassFunction::constant(group.clone(), v));
    }
    #[derive(serde::Deserialize)]
    struct J {
        level: u64,
        values: Vec<(String, String)>,
    }
    let j: J = serde_json::from_str(t).map_err(json_err)?;
    if j.level != group.n {
        return Err(Error::LevelMismatch { expected: group.n, got: j.level });
    }
    let mut values = vec![Default::default(); group.num_classes()];
    for (key, v) in j.values {
        let m = key.parse()?;
        let c = group.class_index(&m).ok_or_else(|| Error::Invalid(format!("{key} is not in the group")))?;
        values[c] = parse_rational(&v).ok_or_else(|| Error::Parse(format!("bad rational {v:?}")))?;
    }
    ClassFunction::new(group.clone(), values)
}

fn function_output(f: &ClassFunction) -> Output {
    Output::of(f).with_pretty(f.to_string())
}

fn run_classfn(command: ClassfnCommand) -> Result<Output, Error> {
    match command {
        ClassfnCommand::Table { level } => {
            let g = build_table(level)?;
            let classes: Vec<_> = (0..g.num_classes())
                .map(|c| json!({ "rep": g.class_rep(c).to_string(), "size": g.class_size(c) }))
                .collect();
            let mut pretty = format!("SL2(Z/{level}): order {}, {} classes\n", g.order(), g.num_classes());
            for c in 0..g.num_classes() {
                pretty.push_str(&format!("  {:>3}  {:<16} {:>5}\n", c, g.class_rep(c).to_string(), g.class_size(c)));
            }
            let value = json!({ "level": level, "order": g.order(), "classes": classes });
            Ok(Output { json: value, pretty: Some(pretty), ok: true })
        }
        ClassfnCommand::Push { subgroup, function } => {
            let spec: CongruenceSpec = subgroup.parse()?;
            let h = congruence_subgroup(&spec)?;
            let g = build_table(spec.level)?;
            let f = parse_function(&function, &h)?;
            Ok(function_output(&pushforward_cf(&f, &g)?))
        }
        ClassfnCommand::Pull { subgroup, function } => {
            let spec: CongruenceSpec = subgroup.parse()?;
            let h = congruence_subgroup(&spec)?;
            let g = build_table(spec.level)?;
            let f = parse_function(&function, &g)?;
            Ok(function_output(&pullback_cf(&f, &h)?))
        }
        ClassfnCommand::Dualtp { function, level, p } => {
            let f = full_level_function(&function, level)?;
            Ok(function_output(&dual_tp(&f, p)?))
        }
        ClassfnCommand::Dualep { function, level, p } => {
            let f = full_level_function(&function, level)?;
            Ok(function_output(&dual_ep(&f, p)?))
        }
    }
}

/// JSON carries its own level; the shorthand forms need `--level`.
fn full_level_function(text: &str, level: Option<u64>) -> Result<ClassFunction, Error> {
    let text = read_arg(text)?;
    if text.trim_start().starts_with('{') {
        let f: ClassFunction = serde_json::from_str(&text).map_err(json_err)?;
        if let Some(l) = level.filter(|&l| l != f.level()) {
            return Err(Error::LevelMismatch { expected: l, got: f.level() });
        }
        return Ok(f);
    }
    let level = level.ok_or_else(|| Error::Invalid("--level is required for indicator/constant functions".into()))?;
    parse_function(&text, &build_table(level)?)
}
