//! Built-in language suite and length-exact string sampling.
//!
//! Positive samples are drawn uniformly over length-n derivations via an
//! exact arbitrary-precision length table (uniform over strings whenever the
//! grammar is unambiguous). Negatives come from uniform alphabet noise or
//! from geometric-count edits of a positive sample; both are re-drawn until
//! the CYK oracle rejects. Boolean-formula specs instead sample the
//! evaluates-to-false variant of the same syntax, so their negatives are
//! well-formed formulas that merely evaluate wrong.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grammar::{parse_grammar, Cfg};
use crate::oracle::cyk_recognize;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("grammar is not in Chomsky normal form")]
    NotCnf,
    #[error("no string of length {0} in the language")]
    NoStringOfThatLength(usize),
    #[error("could not find a negative sample of length {0} after {1} retries")]
    CannotFindNegative(usize, usize),
    #[error("unknown built-in language {0:?}")]
    UnknownSpec(String),
    #[error("no feasible positive length ≤ {0}")]
    NoFeasibleLength(usize),
}

/// A built-in language: its natural grammar, the CNF used for tables and
/// oracle checks, and the properties the engines rely on.
#[derive(Debug, Clone)]
pub struct LanguageSpec {
    pub name: String,
    /// Natural form (linear where the language is linear).
    pub cfg: Cfg,
    /// CNF form for the length table and the CYK oracle.
    pub cnf: Cfg,
    pub linear: bool,
    pub unambiguous: bool,
    pub deterministic: bool,
    /// For formula-value specs: same syntax rooted at "evaluates to false".
    pub negative_cnf: Option<Cfg>,
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "dyck1",
    "dyck2",
    "palindrome",
    "marked_palindrome",
    "anbn",
    "bfvp_postfix",
    "bfvp_infix",
];

/// Resolve a built-in language by name.
pub fn builtin(name: &str) -> Result<LanguageSpec, SampleError> {
    let spec = |text: &str, linear, deterministic| {
        let cfg = parse_grammar(text).expect("built-in grammar parses");
        LanguageSpec {
            name: name.to_string(),
            cnf: cfg.to_cnf(),
            cfg,
            linear,
            unambiguous: true,
            deterministic,
            negative_cnf: None,
        }
    };
    // Every built-in grammar below is unambiguous; in particular the Dyck
    // grammars use the S → ( S ) S form rather than the ambiguous S → S S.
    match name {
        "dyck1" => Ok(spec("S -> ( S ) S | ε", false, true)),
        "dyck2" => Ok(spec("S -> ( S ) S | [ S ] S | ε", false, true)),
        // Even-length palindromes over {a, b}.
        "palindrome" => Ok(spec("S -> a S a | b S b | a a | b b", true, false)),
        // Center-marked palindromes: deterministic thanks to the marker.
        "marked_palindrome" => Ok(spec("S -> a S a | b S b | m", true, true)),
        "anbn" => Ok(spec("S -> a S b | a b", true, true)),
        "bfvp_postfix" => {
            let mut s = spec(BFVP_POSTFIX, false, true);
            s.negative_cnf =
                Some(with_start(&s.cfg, "VF").to_cnf());
            Ok(s)
        }
        "bfvp_infix" => {
            let mut s = spec(BFVP_INFIX, false, true);
            s.negative_cnf =
                Some(with_start(&s.cfg, "VF").to_cnf());
            Ok(s)
        }
        other => Err(SampleError::UnknownSpec(other.to_string())),
    }
}

/// Postfix formulas that evaluate to true (VT) / false (VF).
const BFVP_POSTFIX: &str = "\
VT -> 1 | VT VT ∧ | VT VT ∨ | VT VF ∨ | VF VT ∨ | VF ¬
VF -> 0 | VF VF ∧ | VF VF ∨ | VT VF ∧ | VF VT ∧ | VT ¬
@start VT";

/// Fully parenthesized infix formulas by value.
const BFVP_INFIX: &str = "\
VT -> 1 | ( VT ∧ VT ) | ( VT ∨ VT ) | ( VT ∨ VF ) | ( VF ∨ VT ) | ¬ VF
VF -> 0 | ( VF ∨ VF ) | ( VF ∧ VF ) | ( VT ∧ VF ) | ( VF ∧ VT ) | ¬ VT
@start VT";

fn with_start(g: &Cfg, start: &str) -> Cfg {
    let mut g = g.clone();
    g.start = start.to_string();
    g
}

/// Exact derivation counts per (nonterminal, length), lengths 1..=max_n.
/// Length 0 (the ε production) is handled separately by callers.
#[derive(Debug, Clone)]
pub struct LengthTable {
    g: Cfg,
    max_n: usize,
    /// counts[nt][ℓ-1] = number of derivations of a length-ℓ terminal string.
    counts: BTreeMap<String, Vec<BigUint>>,
}

pub fn build_length_table(g: &Cfg, max_n: usize) -> Result<LengthTable, SampleError> {
    if !g.is_cnf {
        return Err(SampleError::NotCnf);
    }
    let mut counts: BTreeMap<String, Vec<BigUint>> = g
        .nonterminals
        .iter()
        .map(|a| (a.clone(), vec![BigUint::zero(); max_n]))
        .collect();
    for p in &g.productions {
        if let [t] = p.rhs.as_slice() {
            if t.is_terminal() && max_n >= 1 {
                counts.get_mut(&p.lhs.name).unwrap()[0] += 1u8;
            }
        }
    }
    for len in 2..=max_n {
        for p in &g.productions {
            let [b, c] = p.rhs.as_slice() else { continue };
            if !b.is_nonterminal() {
                continue;
            }
            let mut total = BigUint::zero();
            for m in 1..len {
                total += &counts[&b.name][m - 1] * &counts[&c.name][len - m - 1];
            }
            counts.get_mut(&p.lhs.name).unwrap()[len - 1] += total;
        }
    }
    Ok(LengthTable { g: g.clone(), max_n, counts })
}

impl LengthTable {
    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn count(&self, nt: &str, len: usize) -> BigUint {
        if len == 0 || len > self.max_n {
            return BigUint::zero();
        }
        self.counts.get(nt).map_or_else(BigUint::zero, |v| v[len - 1].clone())
    }

    /// Lengths 1..=max_n with at least one member.
    pub fn feasible_lengths(&self) -> Vec<usize> {
        (1..=self.max_n)
            .filter(|&n| !self.count(&self.g.start, n).is_zero())
            .collect()
    }

    /// A uniformly random length-n derivation from `nt`, as terminal names.
    fn sample(&self, nt: &str, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<String>) {
        if n == 1 {
            let emits: Vec<&str> = self
                .g
                .productions
                .iter()
                .filter(|p| p.lhs.name == nt && p.rhs.len() == 1 && p.rhs[0].is_terminal())
                .map(|p| p.rhs[0].name.as_str())
                .collect();
            out.push(emits[rng.gen_range(0..emits.len())].to_string());
            return;
        }
        // Weight each (rule, split) by the number of derivations under it and
        // draw an exact arbitrary-precision index.
        let total = self.count(nt, n);
        debug_assert!(!total.is_zero());
        let mut pick = rng.gen_biguint_below(&total);
        for p in &self.g.productions {
            let [b, c] = p.rhs.as_slice() else { continue };
            if p.lhs.name != nt || !b.is_nonterminal() {
                continue;
            }
            for m in 1..n {
                let w = &self.counts[&b.name][m - 1] * &self.counts[&c.name][n - m - 1];
                if pick < w {
                    self.sample(&b.name, m, rng, out);
                    self.sample(&c.name, n - m, rng, out);
                    return;
                }
                pick -= w;
            }
        }
        unreachable!("weights sum to count(nt, n)");
    }
}

/// Render terminal names as text: concatenated when every terminal is a
/// single character, whitespace-joined otherwise.
fn render(g: &Cfg, toks: &[String]) -> String {
    if g.terminals.iter().all(|t| t.chars().count() == 1) {
        toks.concat()
    } else {
        toks.join(" ")
    }
}

/// A uniformly random member of length exactly n, deterministic in the seed.
pub fn sample_positive(spec: &LanguageSpec, n: usize, seed: u64) -> Result<String, SampleError> {
    let table = build_length_table(&spec.cnf, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_positive_from(spec, &table, n, &mut rng)
}

/// Same, reusing a prebuilt table and caller-owned randomness.
pub fn sample_positive_from(
    spec: &LanguageSpec,
    table: &LengthTable,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<String, SampleError> {
    if table.count(&spec.cnf.start, n).is_zero() {
        return Err(SampleError::NoStringOfThatLength(n));
    }
    let mut toks = Vec::with_capacity(n);
    table.sample(&spec.cnf.start, n, rng, &mut toks);
    debug_assert_eq!(toks.len(), n);
    let text = render(&spec.cnf, &toks);
    debug_assert_eq!(
        cyk_recognize(&spec.cnf, &spec.cnf.tokenize(&text).unwrap()),
        Ok(true)
    );
    Ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeMode {
    /// Uniform string over Σⁿ, redrawn until the oracle rejects.
    Random,
    /// Positive sample with k ~ Geometric(1/2) single-symbol edits
    /// (substitute, insert, or delete — length may change by ±k).
    Perturb,
}

const NEGATIVE_RETRIES: usize = 100;

/// A string of (roughly, for perturb) length n that the oracle rejects.
pub fn sample_negative(
    spec: &LanguageSpec,
    n: usize,
    mode: NegativeMode,
    seed: u64,
) -> Result<String, SampleError> {
    let table = build_length_table(&spec.cnf, n)?;
    let neg_table = match &spec.negative_cnf {
        Some(g) => Some(build_length_table(g, n)?),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_negative_from(spec, &table, neg_table.as_ref(), n, mode, &mut rng)
}

pub fn sample_negative_from(
    spec: &LanguageSpec,
    table: &LengthTable,
    neg_table: Option<&LengthTable>,
    n: usize,
    mode: NegativeMode,
    rng: &mut ChaCha8Rng,
) -> Result<String, SampleError> {
    assert!(n >= 1);
    // Formula-value specs: a well-formed formula that evaluates to false.
    if let (Some(neg), Some(nt)) = (&spec.negative_cnf, neg_table) {
        if nt.count(&neg.start, n).is_zero() {
            return Err(SampleError::NoStringOfThatLength(n));
        }
        let mut toks = Vec::with_capacity(n);
        nt.sample(&neg.start, n, rng, &mut toks);
        let text = render(neg, &toks);
        debug_assert_eq!(
            cyk_recognize(&spec.cnf, &spec.cnf.tokenize(&text).unwrap()),
            Ok(false)
        );
        return Ok(text);
    }
    let sigma: Vec<&String> = spec.cnf.terminals.iter().collect();
    for _ in 0..NEGATIVE_RETRIES {
        let toks: Vec<String> = match mode {
            NegativeMode::Random => {
                (0..n).map(|_| sigma[rng.gen_range(0..sigma.len())].clone()).collect()
            }
            NegativeMode::Perturb => {
                let base = nearest_feasible(table, n)?;
                let mut toks = Vec::with_capacity(base);
                table.sample(&spec.cnf.start, base, rng, &mut toks);
                let k = 1 + geometric_half(rng);
                for _ in 0..k {
                    edit(&mut toks, &sigma, rng);
                }
                toks
            }
        };
        if toks.is_empty() {
            continue; // deletions may empty a short string
        }
        let text = render(&spec.cnf, &toks);
        let w = spec.cnf.tokenize(&text).expect("tokens drawn from Σ");
        if cyk_recognize(&spec.cnf, &w) == Ok(false) {
            return Ok(text);
        }
    }
    Err(SampleError::CannotFindNegative(n, NEGATIVE_RETRIES))
}

/// Largest feasible positive length ≤ n, else the smallest feasible one.
fn nearest_feasible(table: &LengthTable, n: usize) -> Result<usize, SampleError> {
    let feasible = table.feasible_lengths();
    feasible
        .iter()
        .rev()
        .find(|&&l| l <= n)
        .or_else(|| feasible.first())
        .copied()
        .ok_or(SampleError::NoFeasibleLength(table.max_n))
}

/// Extra failures before the first success at p = 1/2.
fn geometric_half(rng: &mut ChaCha8Rng) -> usize {
    let mut k = 0;
    while rng.gen_bool(0.5) {
        k += 1;
    }
    k
}

fn edit(toks: &mut Vec<String>, sigma: &[&String], rng: &mut ChaCha8Rng) {
    let fresh = |rng: &mut ChaCha8Rng| sigma[rng.gen_range(0..sigma.len())].clone();
    match rng.gen_range(0..3u8) {
        0 if !toks.is_empty() => {
            let i = rng.gen_range(0..toks.len());
            toks[i] = fresh(rng);
        }
        1 => {
            let i = rng.gen_range(0..=toks.len());
            let s = fresh(rng);
            toks.insert(i, s);
        }
        _ if !toks.is_empty() => {
            toks.remove(rng.gen_range(0..toks.len()));
        }
        _ => {
            let s = fresh(rng);
            toks.push(s);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub text: String,
    pub positive: bool,
    pub len: usize,
}

/// An oracle-verified labeled dataset, reproducible from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec_name: String,
    pub seed: u64,
    pub max_n: usize,
    pub split: f64,
    pub records: Vec<Record>,
}

impl Dataset {
    /// One metadata comment line, then `<label TAB string>` per record.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# spec={} seed={} count={} max_n={} split={}",
            self.spec_name,
            self.seed,
            self.records.len(),
            self.max_n,
            self.split
        )
        .unwrap();
        for r in &self.records {
            writeln!(out, "{}\t{}", if r.positive { "positive" } else { "negative" }, r.text)
                .unwrap();
        }
        out
    }
}

/// `count` records with `round(count·split)` positives; positive lengths are
/// uniform over feasible lengths ≤ max_n, negatives alternate modes.
pub fn make_dataset(
    spec: &LanguageSpec,
    count: usize,
    max_n: usize,
    split: f64,
    seed: u64,
) -> Result<Dataset, SampleError> {
    assert!(count >= 1 && split > 0.0 && split < 1.0);
    let table = build_length_table(&spec.cnf, max_n)?;
    let neg_table = match &spec.negative_cnf {
        Some(g) => Some(build_length_table(g, max_n)?),
        None => None,
    };
    let feasible = table.feasible_lengths();
    if feasible.is_empty() {
        return Err(SampleError::NoFeasibleLength(max_n));
    }
    let neg_feasible: Vec<usize> = match &neg_table {
        Some(t) => t.feasible_lengths(),
        None => (1..=max_n).collect(),
    };
    if neg_feasible.is_empty() {
        return Err(SampleError::NoFeasibleLength(max_n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives = ((count as f64) * split).round() as usize;
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        if i < positives {
            let n = feasible[rng.gen_range(0..feasible.len())];
            let text = sample_positive_from(spec, &table, n, &mut rng)?;
            records.push(Record { len: n, text, positive: true });
        } else {
            let n = neg_feasible[rng.gen_range(0..neg_feasible.len())];
            let mode =
                if i % 2 == 0 { NegativeMode::Random } else { NegativeMode::Perturb };
            let text =
                sample_negative_from(spec, &table, neg_table.as_ref(), n, mode, &mut rng)?;
            let len = spec.cnf.tokenize(&text).unwrap().n();
            records.push(Record { text, positive: false, len });
        }
    }
    Ok(Dataset { spec_name: spec.name.clone(), seed, max_n, split, records })
}
