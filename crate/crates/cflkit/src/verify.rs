//! Cross-engine agreement sweeps: run any engine against the CYK oracle on
//! exhaustive small strings and on sampled positives/negatives. Shared by
//! the command-line `verify` subcommand and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bfvp::{eval_recursive, recognize_bfvp, PostfixFormula};
use crate::engine;
use crate::oracle::cyk_recognize;
use crate::path;
use crate::report::{Engine, ResourceReport};
use crate::sampler::{
    build_length_table, sample_negative_from, sample_positive_from, LanguageSpec,
    NegativeMode, SampleError,
};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
    #[error(transparent)]
    Path(#[from] path::PathError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("bfvp engine accepts only formula symbols, got {0:?}")]
    NotAFormula(String),
}

/// One string where the engine and the oracle disagreed.
#[derive(Debug, Clone)]
pub struct Disagreement {
    pub text: String,
    pub engine_accepted: bool,
    pub oracle_accepted: bool,
}

#[derive(Debug, Default)]
pub struct VerifySummary {
    pub checked: usize,
    pub disagreements: Vec<Disagreement>,
    pub max_rounds: usize,
    pub max_cells: usize,
    pub max_pairs: u64,
}

impl VerifySummary {
    pub fn ok(&self) -> bool {
        self.disagreements.is_empty()
    }

    fn absorb(&mut self, text: &str, r: &ResourceReport, oracle: bool) {
        self.checked += 1;
        if r.accepted != oracle {
            self.disagreements.push(Disagreement {
                text: text.to_string(),
                engine_accepted: r.accepted,
                oracle_accepted: oracle,
            });
        }
        let rounds = r
            .rounds_used
            .or(r.pebble_rounds)
            .unwrap_or_default();
        self.max_rounds = self.max_rounds.max(rounds);
        let cells = r.item_cells.unwrap_or_default() + r.slashed_cells.unwrap_or_default();
        self.max_cells = self.max_cells.max(cells);
        self.max_pairs = self.max_pairs.max(r.decomposition_pairs.unwrap_or_default());
    }
}

/// Run one string through the chosen engine. The general engine gets
/// `budget_c` extra rounds past ⌈log₂ n⌉; the bfvp engine ignores the
/// grammar and parses the string as a postfix formula.
pub fn run_engine(
    choice: Engine,
    spec: &LanguageSpec,
    text: &str,
    budget_c: usize,
) -> Result<ResourceReport, VerifyError> {
    match choice {
        Engine::General => {
            let w = match spec.cnf.tokenize(text) {
                Ok(w) => w,
                Err(_) => return Ok(ResourceReport::new(Engine::General, false, 0)),
            };
            Ok(engine::recognize(&spec.cnf, &w, budget_c)?)
        }
        Engine::Unambiguous => {
            let w = match spec.cnf.tokenize(text) {
                Ok(w) => w,
                Err(_) => return Ok(ResourceReport::new(Engine::Unambiguous, false, 0)),
            };
            Ok(path::recognize_unambiguous(&spec.cnf, &w)?)
        }
        Engine::Linear => {
            let w = match spec.cfg.tokenize(text) {
                Ok(w) => w,
                Err(_) => return Ok(ResourceReport::new(Engine::Linear, false, 0)),
            };
            Ok(path::recognize_linear(&spec.cfg, &w)?)
        }
        Engine::Bfvp => {
            let f = PostfixFormula::parse(text)
                .map_err(|_| VerifyError::NotAFormula(text.to_string()))?;
            let b = recognize_bfvp(&f);
            let mut r = ResourceReport::new(Engine::Bfvp, b.accepted, f.n());
            r.pebble_rounds = Some(b.rounds);
            r.item_cells = Some(b.extra_cells);
            Ok(r)
        }
        Engine::Cyk => {
            let w = match spec.cnf.tokenize(text) {
                Ok(w) => w,
                Err(_) => return Ok(ResourceReport::new(Engine::Cyk, false, 0)),
            };
            let accepted = cyk_recognize(&spec.cnf, &w).expect("cnf oracle");
            Ok(ResourceReport::new(Engine::Cyk, accepted, w.n()))
        }
    }
}

/// Oracle verdict for a string: CYK on the CNF grammar, except bfvp, where
/// membership is "well-formed and evaluates to true" by direct evaluation.
pub fn oracle_verdict(choice: Engine, spec: &LanguageSpec, text: &str) -> bool {
    if choice == Engine::Bfvp {
        return PostfixFormula::parse(text)
            .ok()
            .and_then(|f| eval_recursive(&f))
            .unwrap_or(false);
    }
    match spec.cnf.tokenize(text) {
        Ok(w) => cyk_recognize(&spec.cnf, &w).expect("cnf oracle"),
        Err(_) => false,
    }
}

/// All strings over the spec's alphabet of length 1..=max_len, in
/// lexicographic order per length.
pub fn enumerate_strings(spec: &LanguageSpec, max_len: usize) -> impl Iterator<Item = String> {
    let sigma: Vec<String> = spec.cnf.terminals.iter().cloned().collect();
    let spaced = sigma.iter().any(|t| t.chars().count() != 1);
    (1..=max_len).flat_map(move |len| {
        let sigma = sigma.clone();
        let k = sigma.len();
        (0..k.pow(len as u32)).map(move |mut code| {
            let toks: Vec<&str> = (0..len)
                .map(|_| {
                    let t = &sigma[code % k];
                    code /= k;
                    t.as_str()
                })
                .collect();
            if spaced {
                toks.join(" ")
            } else {
                toks.concat()
            }
        })
    })
}

/// Agreement on every string of length 1..=max_len over the alphabet.
pub fn exhaustive_sweep(
    choice: Engine,
    spec: &LanguageSpec,
    max_len: usize,
    budget_c: usize,
) -> Result<VerifySummary, VerifyError> {
    let mut s = VerifySummary::default();
    for text in enumerate_strings(spec, max_len) {
        let r = match run_engine(choice, spec, &text, budget_c) {
            Ok(r) => r,
            Err(VerifyError::NotAFormula(_)) if choice == Engine::Bfvp => {
                // Strings outside the formula alphabet are trivial rejects.
                s.checked += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        s.absorb(&text, &r, oracle_verdict(choice, spec, &text));
        if s.disagreements.len() >= 10 {
            break; // enough counterexamples to report
        }
    }
    Ok(s)
}

/// Agreement on `count` sampled positives and `count` negatives with
/// lengths up to max_n (negatives alternate random/perturb modes).
pub fn sampled_sweep(
    choice: Engine,
    spec: &LanguageSpec,
    count: usize,
    max_n: usize,
    budget_c: usize,
    seed: u64,
) -> Result<VerifySummary, VerifyError> {
    let table = build_length_table(&spec.cnf, max_n)?;
    let neg_table = match &spec.negative_cnf {
        Some(g) => Some(build_length_table(g, max_n)?),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = VerifySummary::default();
    let feasible = table.feasible_lengths();
    if feasible.is_empty() {
        return Err(SampleError::NoFeasibleLength(max_n).into());
    }
    let neg_feasible: Vec<usize> = match &neg_table {
        Some(t) => t.feasible_lengths(),
        None => (1..=max_n).collect(),
    };
    for i in 0..count {
        let n = feasible[rng.gen_range(0..feasible.len())];
        let text = sample_positive_from(spec, &table, n, &mut rng)?;
        let r = run_engine(choice, spec, &text, budget_c)?;
        s.absorb(&text, &r, true);

        let n = neg_feasible[rng.gen_range(0..neg_feasible.len())];
        let mode = if i % 2 == 0 { NegativeMode::Random } else { NegativeMode::Perturb };
        let text = sample_negative_from(spec, &table, neg_table.as_ref(), n, mode, &mut rng)?;
        let r = run_engine(choice, spec, &text, budget_c)?;
        s.absorb(&text, &r, false);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::builtin;

    #[test]
    fn exhaustive_agreement_small() {
        let spec = builtin("dyck1").unwrap();
        let s = exhaustive_sweep(Engine::General, &spec, 4, 4).unwrap();
        assert!(s.ok(), "{:?}", s.disagreements);
        assert_eq!(s.checked, 2 + 4 + 8 + 16);
        let s = exhaustive_sweep(Engine::Unambiguous, &spec, 4, 4).unwrap();
        assert!(s.ok());
        let pal = builtin("palindrome").unwrap();
        let s = exhaustive_sweep(Engine::Linear, &pal, 5, 4).unwrap();
        assert!(s.ok());
    }

    #[test]
    fn sampled_agreement_small() {
        let spec = builtin("anbn").unwrap();
        for choice in [Engine::General, Engine::Unambiguous, Engine::Linear, Engine::Cyk] {
            let s = sampled_sweep(choice, &spec, 20, 12, 4, 3).unwrap();
            assert!(s.ok(), "{choice:?}: {:?}", s.disagreements);
            assert_eq!(s.checked, 40);
        }
    }

    #[test]
    fn bfvp_sweep() {
        let spec = builtin("bfvp_postfix").unwrap();
        let s = exhaustive_sweep(Engine::Bfvp, &spec, 4, 4).unwrap();
        assert!(s.ok(), "{:?}", s.disagreements);
        let s = sampled_sweep(Engine::Bfvp, &spec, 25, 11, 4, 5).unwrap();
        assert!(s.ok(), "{:?}", s.disagreements);
    }

    #[test]
    fn disagreements_are_reported() {
        // An adversarial "spec" whose natural grammar differs from its CNF
        // oracle: the linear engine sees a smaller language.
        let mut spec = builtin("anbn").unwrap();
        spec.cfg = crate::grammar::parse_grammar("S -> a S b | a a b b").unwrap();
        let s = exhaustive_sweep(Engine::Linear, &spec, 4, 4).unwrap();
        assert!(!s.ok());
        assert!(s.disagreements.iter().any(|d| d.text == "ab"));
    }
}
