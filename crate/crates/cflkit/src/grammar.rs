//! Grammar representation, text parsing, CNF conversion, and shape checks.
//!
//! File format: one rule per line, `LHS -> alt1 | alt2 | ...`, tokens
//! whitespace-separated. `ε` or `eps` is the empty rhs, `#` starts a comment,
//! `@start NAME` overrides the default start (the first lhs). Symbols that
//! appear on some lhs are nonterminals; everything else is a terminal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Reserved for machine-generated nonterminals (`X$1`, `X$2`, ...);
/// rejected in user grammars so fresh names can never collide.
pub const RESERVED_CHAR: char = '$';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub name: String,
}

impl Symbol {
    pub fn terminal(name: impl Into<String>) -> Symbol {
        Symbol { kind: SymbolKind::Terminal, name: name.into() }
    }
    pub fn nonterminal(name: impl Into<String>) -> Symbol {
        Symbol { kind: SymbolKind::Nonterminal, name: name.into() }
    }
    pub fn is_terminal(&self) -> bool {
        self.kind == SymbolKind::Terminal
    }
    pub fn is_nonterminal(&self) -> bool {
        self.kind == SymbolKind::Nonterminal
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    pub lhs: Symbol,
    pub rhs: Vec<Symbol>,
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        if self.rhs.is_empty() {
            write!(f, " ε")?;
        }
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub terminals: BTreeSet<String>,
    pub nonterminals: BTreeSet<String>,
    pub productions: Vec<Production>,
    pub start: String,
    /// Every rule is A→BC, A→a, or S→ε with S not on any rhs. Recomputed.
    pub is_cnf: bool,
    /// Every rule has at most one nonterminal on the rhs (and is neither
    /// empty nor a lone nonterminal). Recomputed.
    pub is_linear: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputString {
    pub symbols: Vec<Symbol>,
}

impl InputString {
    pub fn n(&self) -> usize {
        self.symbols.len()
    }
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
    pub fn text(&self) -> String {
        let one_char = self.symbols.iter().all(|s| s.name.chars().count() == 1);
        let sep = if one_char { "" } else { " " };
        self.symbols.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(sep)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("start symbol {0} is not defined by any rule")]
    UndefinedStart(String),
    #[error("symbol {0} used as both terminal and nonterminal")]
    NameCollision(String),
    #[error("grammar generates the empty language")]
    EmptyLanguage,
    #[error("symbol {0} contains the reserved character '{RESERVED_CHAR}'")]
    ReservedName(String),
    #[error("unknown symbol {0:?} in input string")]
    UnknownInputSymbol(String),
}

impl Cfg {
    /// Build a grammar from (lhs, rhs) name pairs. Names on some lhs are
    /// nonterminals, the rest terminals; flags are recomputed, never trusted.
    pub fn from_rules<S: AsRef<str>>(
        rules: &[(S, Vec<S>)],
        start: Option<&str>,
    ) -> Result<Cfg, GrammarError> {
        if rules.is_empty() {
            return Err(GrammarError::Syntax { line: 0, msg: "no rules".into() });
        }
        let lhs_names: BTreeSet<String> =
            rules.iter().map(|(l, _)| l.as_ref().to_string()).collect();
        let start = start.unwrap_or_else(|| rules[0].0.as_ref()).to_string();
        if !lhs_names.contains(&start) {
            return Err(GrammarError::UndefinedStart(start));
        }
        let mut terminals = BTreeSet::new();
        let mut productions = Vec::new();
        for (lhs, rhs) in rules {
            let rhs: Vec<Symbol> = rhs
                .iter()
                .map(|s| {
                    let name = s.as_ref().to_string();
                    if lhs_names.contains(&name) {
                        Symbol::nonterminal(name)
                    } else {
                        terminals.insert(name.clone());
                        Symbol::terminal(name)
                    }
                })
                .collect();
            productions.push(Production { lhs: Symbol::nonterminal(lhs.as_ref()), rhs });
        }
        Ok(Cfg::assemble(terminals, lhs_names, productions, start))
    }

    fn assemble(
        terminals: BTreeSet<String>,
        nonterminals: BTreeSet<String>,
        productions: Vec<Production>,
        start: String,
    ) -> Cfg {
        let mut g = Cfg {
            terminals,
            nonterminals,
            productions,
            start,
            is_cnf: false,
            is_linear: false,
        };
        g.recompute_flags();
        g
    }

    fn recompute_flags(&mut self) {
        self.is_cnf = self.compute_cnf_flag();
        self.is_linear = check_linear(self);
    }

    fn compute_cnf_flag(&self) -> bool {
        let start_on_rhs = self
            .productions
            .iter()
            .any(|p| p.rhs.iter().any(|s| s.is_nonterminal() && s.name == self.start));
        self.productions.iter().all(|p| match p.rhs.as_slice() {
            [] => p.lhs.name == self.start && !start_on_rhs,
            [a] => a.is_terminal(),
            [b, c] => b.is_nonterminal() && c.is_nonterminal(),
            _ => false,
        })
    }

    /// Split `text` into an InputString over this grammar's terminals:
    /// whitespace-separated tokens if any whitespace is present, otherwise
    /// one symbol per character.
    pub fn tokenize(&self, text: &str) -> Result<InputString, GrammarError> {
        let tokens: Vec<String> = if text.chars().any(char::is_whitespace) {
            text.split_whitespace().map(str::to_string).collect()
        } else {
            text.chars().map(String::from).collect()
        };
        let symbols = tokens
            .into_iter()
            .map(|t| {
                if self.terminals.contains(&t) {
                    Ok(Symbol::terminal(t))
                } else {
                    Err(GrammarError::UnknownInputSymbol(t))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(InputString { symbols })
    }

    /// True iff the CNF grammar derives the empty string (rule S→ε).
    pub fn derives_epsilon(&self) -> bool {
        self.productions
            .iter()
            .any(|p| p.lhs.name == self.start && p.rhs.is_empty())
    }

    pub fn to_cnf(&self) -> Cfg {
        to_cnf(self)
    }
}

pub fn parse_grammar(text: &str) -> Result<Cfg, GrammarError> {
    let mut rules: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    let mut start_directive: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("@start") {
            let name = rest.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(GrammarError::Syntax {
                    line: lineno,
                    msg: "@start expects exactly one symbol".into(),
                });
            }
            start_directive = Some(name.to_string());
            continue;
        }
        let (lhs, rhs_text) = line.split_once("->").ok_or(GrammarError::Syntax {
            line: lineno,
            msg: "expected `LHS -> rhs`".into(),
        })?;
        let lhs = lhs.trim();
        if lhs.is_empty() || lhs.contains(char::is_whitespace) {
            return Err(GrammarError::Syntax {
                line: lineno,
                msg: "lhs must be a single symbol".into(),
            });
        }
        let mut alts = Vec::new();
        for alt in rhs_text.split('|') {
            let toks: Vec<String> = alt.split_whitespace().map(str::to_string).collect();
            let toks = match toks.as_slice() {
                [t] if t == "ε" || t == "eps" => Vec::new(),
                [] => {
                    return Err(GrammarError::Syntax {
                        line: lineno,
                        msg: "empty alternative (use ε or eps)".into(),
                    })
                }
                _ => toks,
            };
            alts.push(toks);
        }
        rules.push((lhs.to_string(), alts));
    }

    let flat: Vec<(String, Vec<String>)> = rules
        .iter()
        .flat_map(|(l, alts)| alts.iter().map(move |a| (l.clone(), a.clone())))
        .collect();
    for (l, rhs) in &flat {
        for name in std::iter::once(l).chain(rhs.iter()) {
            if name.contains(RESERVED_CHAR) {
                return Err(GrammarError::ReservedName(name.clone()));
            }
            if name == "ε" || name == "eps" {
                return Err(GrammarError::NameCollision(name.clone()));
            }
        }
    }
    Cfg::from_rules(&flat, start_directive.as_deref())
}

/// General linear shape: at most one nonterminal per rhs, rhs nonempty, and
/// not a lone nonterminal (no unit rules). The strict A→aB | A→Ba | A→a form
/// is recovered by `linear_normal_form`.
pub fn check_linear(g: &Cfg) -> bool {
    g.productions.iter().all(|p| {
        let nts = p.rhs.iter().filter(|s| s.is_nonterminal()).count();
        nts <= 1 && !p.rhs.is_empty() && !(nts == 1 && p.rhs.len() == 1)
    })
}

/// Peel terminals off general-linear rules until every rule is A→aB, A→Ba,
/// or A→a, introducing fresh `X$k` nonterminals. Deterministic; preserves
/// the language and unambiguity.
pub fn linear_normal_form(g: &Cfg) -> Cfg {
    let mut fresh = FreshNames::new();
    let mut out: Vec<(String, Vec<Symbol>)> = Vec::new();
    for p in &g.productions {
        let mut lhs = p.lhs.name.clone();
        let mut rhs = p.rhs.clone();
        loop {
            let strict = match rhs.as_slice() {
                [a] if a.is_terminal() => true,
                [a, b] if a.is_terminal() && b.is_nonterminal() => true,
                [b, a] if b.is_nonterminal() && a.is_terminal() => true,
                _ => false,
            };
            if strict {
                out.push((lhs, rhs));
                break;
            }
            // Peel the leftmost terminal if the nonterminal is not first,
            // otherwise the rightmost one.
            if rhs[0].is_terminal() {
                let head = rhs.remove(0);
                let next = fresh.next();
                out.push((lhs, vec![head, Symbol::nonterminal(next.clone())]));
                lhs = next;
            } else {
                let tail = rhs.pop().expect("nonempty by check_linear");
                let next = fresh.next();
                out.push((lhs, vec![Symbol::nonterminal(next.clone()), tail]));
                lhs = next;
            }
        }
    }
    let rules: Vec<(String, Vec<String>)> = out
        .into_iter()
        .map(|(l, rhs)| (l, rhs.into_iter().map(|s| s.name).collect()))
        .collect();
    Cfg::from_rules(&rules, Some(&g.start)).expect("normal form is well-formed")
}

struct FreshNames {
    next: usize,
}

impl FreshNames {
    fn new() -> Self {
        FreshNames { next: 1 }
    }
    fn next(&mut self) -> String {
        let name = format!("X{RESERVED_CHAR}{}", self.next);
        self.next += 1;
        name
    }
}

/// Classical CNF conversion in START, TERM, BIN, DEL, UNIT order, followed by
/// useless-symbol removal. Fresh names are deterministic, so the output is
/// reproducible. If ε ∈ L(g), the result keeps S'→ε with S' on no rhs.
pub fn to_cnf(g: &Cfg) -> Cfg {
    let mut fresh = FreshNames::new();

    // START: fresh start symbol, never on a rhs.
    let start = fresh.next();
    let mut prods: Vec<(String, Vec<Symbol>)> = vec![(
        start.clone(),
        vec![Symbol::nonterminal(&g.start)],
    )];
    prods.extend(g.productions.iter().map(|p| (p.lhs.name.clone(), p.rhs.clone())));

    // TERM: terminals in long rules become proxy nonterminals. One proxy per
    // terminal, allocated in first-use order.
    let mut proxies: BTreeMap<String, String> = BTreeMap::new();
    let mut proxy_rules: Vec<(String, Vec<Symbol>)> = Vec::new();
    for (_, rhs) in prods.iter_mut() {
        if rhs.len() < 2 {
            continue;
        }
        for s in rhs.iter_mut() {
            if s.is_terminal() {
                let proxy = proxies.entry(s.name.clone()).or_insert_with(|| {
                    let p = fresh.next();
                    proxy_rules.push((p.clone(), vec![s.clone()]));
                    p
                });
                *s = Symbol::nonterminal(proxy.clone());
            }
        }
    }
    prods.extend(proxy_rules);

    // BIN: break rhs longer than 2 into right-branching chains.
    let mut binned: Vec<(String, Vec<Symbol>)> = Vec::new();
    for (lhs, rhs) in prods {
        if rhs.len() <= 2 {
            binned.push((lhs, rhs));
            continue;
        }
        let mut lhs = lhs;
        let mut rest = rhs;
        while rest.len() > 2 {
            let head = rest.remove(0);
            let cont = fresh.next();
            binned.push((lhs, vec![head, Symbol::nonterminal(cont.clone())]));
            lhs = cont;
        }
        binned.push((lhs, rest));
    }

    // DEL: remove ε-productions (keeping S'→ε iff ε ∈ L).
    let mut nullable: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = nullable.len();
        for (lhs, rhs) in &binned {
            if rhs.iter().all(|s| s.is_nonterminal() && nullable.contains(&s.name)) {
                nullable.insert(lhs.clone());
            }
        }
        if nullable.len() == before {
            break;
        }
    }
    let mut deleted: BTreeSet<(String, Vec<Symbol>)> = BTreeSet::new();
    for (lhs, rhs) in &binned {
        // Every way of dropping a nullable subset of the rhs.
        let positions: Vec<usize> = (0..rhs.len())
            .filter(|&i| rhs[i].is_nonterminal() && nullable.contains(&rhs[i].name))
            .collect();
        for mask in 0..(1u32 << positions.len()) {
            let drop: BTreeSet<usize> = positions
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &i)| i)
                .collect();
            let kept: Vec<Symbol> = rhs
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, s)| s.clone())
                .collect();
            if kept.is_empty() && lhs != &start {
                continue;
            }
            deleted.insert((lhs.clone(), kept));
        }
    }
    if !nullable.contains(&g.start) {
        deleted.remove(&(start.clone(), Vec::new()));
    } else {
        deleted.insert((start.clone(), Vec::new()));
    }

    // UNIT: replace A→B chains by the closure over non-unit rules.
    let is_unit = |rhs: &[Symbol]| rhs.len() == 1 && rhs[0].is_nonterminal();
    let mut unit_pairs: BTreeSet<(String, String)> = deleted
        .iter()
        .filter(|(_, rhs)| is_unit(rhs))
        .map(|(l, rhs)| (l.clone(), rhs[0].name.clone()))
        .collect();
    let nts: BTreeSet<String> = deleted.iter().map(|(l, _)| l.clone()).collect();
    for a in &nts {
        unit_pairs.insert((a.clone(), a.clone()));
    }
    loop {
        let mut added = Vec::new();
        for (a, b) in &unit_pairs {
            for (b2, c) in &unit_pairs {
                if b == b2 && !unit_pairs.contains(&(a.clone(), c.clone())) {
                    added.push((a.clone(), c.clone()));
                }
            }
        }
        if added.is_empty() {
            break;
        }
        unit_pairs.extend(added);
    }
    let mut final_rules: BTreeSet<(String, Vec<Symbol>)> = BTreeSet::new();
    for (a, b) in &unit_pairs {
        for (lhs, rhs) in &deleted {
            if lhs == b && !is_unit(rhs) {
                final_rules.insert((a.clone(), rhs.clone()));
            }
        }
    }

    let rules: Vec<(String, Vec<String>)> = final_rules
        .into_iter()
        .map(|(l, rhs)| (l, rhs.into_iter().map(|s| s.name).collect()))
        .collect();
    let g2 = Cfg::from_rules(&rules, Some(&start)).expect("CNF output is well-formed");
    remove_useless(&g2).expect("CNF of a nonempty language stays nonempty")
}

/// Drop nonterminals that are unproductive or unreachable. Errors with
/// EmptyLanguage when the start symbol itself is useless.
pub fn remove_useless(g: &Cfg) -> Result<Cfg, GrammarError> {
    // Productive: derives some terminal string.
    let mut productive: BTreeSet<&str> = BTreeSet::new();
    loop {
        let before = productive.len();
        for p in &g.productions {
            if p.rhs
                .iter()
                .all(|s| s.is_terminal() || productive.contains(s.name.as_str()))
            {
                productive.insert(&p.lhs.name);
            }
        }
        if productive.len() == before {
            break;
        }
    }
    if !productive.contains(g.start.as_str()) {
        return Err(GrammarError::EmptyLanguage);
    }
    let kept: Vec<&Production> = g
        .productions
        .iter()
        .filter(|p| {
            productive.contains(p.lhs.name.as_str())
                && p.rhs
                    .iter()
                    .all(|s| s.is_terminal() || productive.contains(s.name.as_str()))
        })
        .collect();

    // Reachable from start through the surviving rules.
    let mut reachable: BTreeSet<&str> = BTreeSet::new();
    reachable.insert(&g.start);
    loop {
        let before = reachable.len();
        for p in &kept {
            if reachable.contains(p.lhs.name.as_str()) {
                for s in &p.rhs {
                    if s.is_nonterminal() {
                        reachable.insert(&s.name);
                    }
                }
            }
        }
        if reachable.len() == before {
            break;
        }
    }
    let rules: Vec<(String, Vec<String>)> = kept
        .iter()
        .filter(|p| reachable.contains(p.lhs.name.as_str()))
        .map(|p| {
            (
                p.lhs.name.clone(),
                p.rhs.iter().map(|s| s.name.clone()).collect(),
            )
        })
        .collect();
    Cfg::from_rules(&rules, Some(&g.start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_flags() {
        let g = parse_grammar("S -> a").unwrap();
        assert!(g.is_cnf);
        assert!(g.is_linear);

        let g = parse_grammar("S -> S S | a").unwrap();
        assert!(g.is_cnf); // S S is A→BC shape; S→ε absent so start-on-rhs is fine
        assert!(!g.is_linear);

        let g = parse_grammar("S -> a S b | ε").unwrap();
        assert!(!g.is_cnf);
        assert!(!g.is_linear);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_grammar("S -"),
            Err(GrammarError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_grammar("S -> a\n@start T"),
            Err(GrammarError::UndefinedStart(_))
        ));
        assert!(matches!(
            parse_grammar("S -> a$b"),
            Err(GrammarError::ReservedName(_))
        ));
    }

    #[test]
    fn start_directive_and_comments() {
        let g = parse_grammar("# comment\nA -> a B # trailing\nB -> b\n@start B\n").unwrap();
        assert_eq!(g.start, "B");
        assert_eq!(g.nonterminals.len(), 2);
        assert!(g.terminals.contains("a") && g.terminals.contains("b"));
    }

    #[test]
    fn linear_check_matches_shapes() {
        let pal = parse_grammar("S -> a S a | b S b | a | b").unwrap();
        assert!(check_linear(&pal));
        let dyck = parse_grammar("S -> S S | ( S ) | ε").unwrap();
        assert!(!check_linear(&dyck));
        let unit = parse_grammar("S -> A\nA -> a").unwrap();
        assert!(!check_linear(&unit));
    }

    #[test]
    fn linear_normal_form_is_strict() {
        let pal = parse_grammar("S -> a S a | b S b | a a | b b").unwrap();
        let nf = linear_normal_form(&pal);
        for p in &nf.productions {
            let ok = matches!(
                p.rhs.as_slice(),
                [a] if a.is_terminal())
                || matches!(p.rhs.as_slice(), [a, b] if a.is_terminal() && b.is_nonterminal())
                || matches!(p.rhs.as_slice(), [b, a] if b.is_nonterminal() && a.is_terminal());
            assert!(ok, "non-strict rule {p}");
        }
    }

    #[test]
    fn cnf_shape() {
        let g = parse_grammar("S -> a S b | ε").unwrap();
        let cnf = to_cnf(&g);
        assert!(cnf.is_cnf);
        assert!(cnf.derives_epsilon());
        // Fresh start never on a rhs.
        for p in &cnf.productions {
            assert!(p.rhs.iter().all(|s| s.name != cnf.start));
        }
    }

    #[test]
    fn cnf_of_cnf_is_cnf() {
        let g = parse_grammar("S -> S S | a").unwrap();
        let once = to_cnf(&g);
        let twice = to_cnf(&once);
        assert!(once.is_cnf && twice.is_cnf);
    }

    #[test]
    fn useless_removal() {
        let g = parse_grammar("S -> a | U b\nU -> U").unwrap();
        let cleaned = remove_useless(&g).unwrap();
        assert!(!cleaned.nonterminals.contains("U"));
        assert_eq!(cleaned.productions.len(), 1);

        let empty = parse_grammar("S -> A\nA -> A").unwrap();
        assert_eq!(remove_useless(&empty), Err(GrammarError::EmptyLanguage));

        let intact = parse_grammar("S -> a S | b").unwrap();
        let same = remove_useless(&intact).unwrap();
        assert_eq!(same.productions.len(), intact.productions.len());
    }

    #[test]
    fn tokenize_modes() {
        let g = parse_grammar("S -> ( S ) | ε").unwrap();
        assert_eq!(g.tokenize("()").unwrap().n(), 2);
        assert_eq!(g.tokenize("( )").unwrap().n(), 2);
        assert!(matches!(
            g.tokenize("(x)"),
            Err(GrammarError::UnknownInputSymbol(_))
        ));
    }
}
