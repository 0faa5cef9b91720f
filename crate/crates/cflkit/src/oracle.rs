//! Serial ground truth: CYK recognition, parse counting, realizable-item
//! enumeration, parse extraction, and the Jordan (centroid) separator.
//! Every parallel engine is validated against this module.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::compiled::{Cnf, CompileError, Spans};
use crate::grammar::{Cfg, InputString, Symbol};
use crate::items::Item;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("grammar is not in Chomsky Normal Form")]
    NotCnf,
    #[error("grammar has {0} nonterminals; the oracle supports at most 64")]
    TooManyNonterminals(usize),
}

impl From<CompileError> for OracleError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::NotCnf => OracleError::NotCnf,
            CompileError::TooLarge(n) => OracleError::TooManyNonterminals(n),
        }
    }
}

/// The full CYK table: per span, the bitmask of nonterminals deriving it.
/// Split positions are scanned sparsely (only left cells already known to be
/// nonempty), which matters for the long, sparse inputs the linear engine is
/// checked against.
pub(crate) fn cyk_table(cnf: &Cnf, w: &[u16]) -> Vec<u64> {
    let n = w.len();
    let spans = Spans { n };
    let mut table = vec![0u64; spans.count()];
    // For each start position i, the ends k ≥ i with a nonempty cell (i,k),
    // in increasing order because spans are filled by length.
    let mut nonempty_right: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let m = cnf.emit_mask(w[i]);
        table[spans.idx(i, i)] = m;
        if m != 0 {
            nonempty_right[i].push(i);
        }
    }
    for len in 2..=n {
        for i in 0..=(n - len) {
            let j = i + len - 1;
            let mut mask = 0u64;
            for &k in &nonempty_right[i] {
                if k >= j {
                    break;
                }
                let left = table[spans.idx(i, k)];
                let right = table[spans.idx(k + 1, j)];
                if right == 0 {
                    continue;
                }
                for &(a, b, c) in &cnf.binary {
                    if left >> b & 1 != 0 && right >> c & 1 != 0 {
                        mask |= 1 << a;
                    }
                }
            }
            if mask != 0 {
                table[spans.idx(i, j)] = mask;
                nonempty_right[i].push(j);
            }
        }
    }
    table
}

pub fn cyk_recognize(g: &Cfg, w: &InputString) -> Result<bool, OracleError> {
    let cnf = Cnf::compile(g)?;
    if w.is_empty() {
        return Ok(cnf.has_eps);
    }
    let Some(enc) = cnf.encode(w) else {
        return Ok(false);
    };
    let n = enc.len();
    let table = cyk_table(&cnf, &enc);
    Ok(table[Spans { n }.idx(0, n - 1)] >> cnf.start & 1 != 0)
}

pub fn realizable_items(g: &Cfg, w: &InputString) -> Result<Vec<Item>, OracleError> {
    let cnf = Cnf::compile(g)?;
    let Some(enc) = cnf.encode(w) else {
        return Ok(Vec::new());
    };
    let n = enc.len();
    assert!(n >= 1, "realizable_items requires |w| ≥ 1");
    let spans = Spans { n };
    let table = cyk_table(&cnf, &enc);
    let mut items = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mask = table[spans.idx(i, j)];
            for a in 0..cnf.nt_count() {
                if mask >> a & 1 != 0 {
                    items.push(Item::new(cnf.nt_names[a].clone(), i + 1, j + 1));
                }
            }
        }
    }
    Ok(items)
}

pub fn count_parses(g: &Cfg, w: &InputString) -> Result<BigUint, OracleError> {
    let cnf = Cnf::compile(g)?;
    let Some(enc) = cnf.encode(w) else {
        return Ok(BigUint::zero());
    };
    let n = enc.len();
    assert!(n >= 1, "count_parses requires |w| ≥ 1");
    let spans = Spans { n };
    let mask = cyk_table(&cnf, &enc);
    let nts = cnf.nt_count();
    let mut counts: Vec<BigUint> = vec![BigUint::zero(); spans.count() * nts];
    // Multiplicity matters: a duplicated A→a rule means two distinct parses.
    for i in 0..n {
        for &a in cnf.emit_rule_list(enc[i]) {
            counts[spans.idx(i, i) * nts + a as usize] += 1u32;
        }
    }
    for len in 2..=n {
        for i in 0..=(n - len) {
            let j = i + len - 1;
            let here = mask[spans.idx(i, j)];
            if here == 0 {
                continue;
            }
            for &(a, b, c) in &cnf.binary {
                if here >> a & 1 == 0 {
                    continue;
                }
                let mut total = BigUint::zero();
                for k in i..j {
                    let lb = &counts[spans.idx(i, k) * nts + b as usize];
                    if lb.is_zero() {
                        continue;
                    }
                    let rc = &counts[spans.idx(k + 1, j) * nts + c as usize];
                    if rc.is_zero() {
                        continue;
                    }
                    total += lb * rc;
                }
                counts[spans.idx(i, j) * nts + a as usize] += total;
            }
        }
    }
    Ok(counts[spans.idx(0, n - 1) * nts + cnf.start as usize].clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub label: Symbol,
    /// 1-based inclusive positions covered.
    pub span: (usize, usize),
    pub children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn leaf(label: Symbol, pos: usize) -> ParseTree {
        ParseTree { label, span: (pos, pos), children: Vec::new() }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ParseTree::node_count).sum::<usize>()
    }

    /// Terminal leaves left to right.
    pub fn fringe(&self) -> Vec<&Symbol> {
        if self.children.is_empty() {
            vec![&self.label]
        } else {
            self.children.iter().flat_map(ParseTree::fringe).collect()
        }
    }
}

/// Lexicographically-least parse: smallest split index first, then first
/// matching rule in production order, recursively.
pub fn extract_parse(g: &Cfg, w: &InputString) -> Result<Option<ParseTree>, OracleError> {
    let cnf = Cnf::compile(g)?;
    if w.is_empty() {
        // ε has no CNF parse tree in the item sense; report absence.
        return Ok(None);
    }
    let Some(enc) = cnf.encode(w) else {
        return Ok(None);
    };
    let n = enc.len();
    let spans = Spans { n };
    let table = cyk_table(&cnf, &enc);
    if table[spans.idx(0, n - 1)] >> cnf.start & 1 == 0 {
        return Ok(None);
    }
    fn build(
        cnf: &Cnf,
        w: &InputString,
        table: &[u64],
        spans: Spans,
        a: u16,
        i: usize,
        j: usize,
    ) -> ParseTree {
        let label = Symbol::nonterminal(cnf.nt_names[a as usize].clone());
        if i == j {
            return ParseTree {
                label,
                span: (i + 1, j + 1),
                children: vec![ParseTree::leaf(w.symbols[i].clone(), i + 1)],
            };
        }
        for k in i..j {
            let left = table[spans.idx(i, k)];
            let right = table[spans.idx(k + 1, j)];
            for &(h, b, c) in &cnf.binary {
                if h == a && left >> b & 1 != 0 && right >> c & 1 != 0 {
                    return ParseTree {
                        label,
                        span: (i + 1, j + 1),
                        children: vec![
                            build(cnf, w, table, spans, b, i, k),
                            build(cnf, w, table, spans, c, k + 1, j),
                        ],
                    };
                }
            }
        }
        unreachable!("realizable cell must decompose")
    }
    Ok(Some(build(&cnf, w, &table, spans, cnf.start, 0, n - 1)))
}

/// Jordan/centroid separator: the pre-order index of a node whose removal
/// leaves components of ≤ ⌈m/2⌉ nodes each; smallest pre-order index among
/// valid separators.
pub fn jordan_separator(t: &ParseTree) -> usize {
    // Flatten to (parent, subtree size) in pre-order.
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut order: Vec<&ParseTree> = Vec::new();
    fn walk<'a>(
        t: &'a ParseTree,
        p: Option<usize>,
        parent: &mut Vec<Option<usize>>,
        order: &mut Vec<&'a ParseTree>,
    ) {
        let me = order.len();
        order.push(t);
        parent.push(p);
        for c in &t.children {
            walk(c, Some(me), parent, order);
        }
    }
    walk(t, None, &mut parent, &mut order);
    let m = order.len();
    let mut size = vec![1usize; m];
    for v in (1..m).rev() {
        let p = parent[v].unwrap();
        size[p] += size[v];
    }
    let mut best = 0;
    let mut best_max = usize::MAX;
    for v in 0..m {
        let above = m - size[v];
        let child_max = order[v]
            .children
            .iter()
            .scan(v + 1, |next, c| {
                let s = size[*next];
                debug_assert_eq!(s, c.node_count());
                *next += s;
                Some(s)
            })
            .max()
            .unwrap_or(0);
        let worst = above.max(child_max);
        if worst < best_max {
            best_max = worst;
            best = v;
        }
    }
    debug_assert!(best_max <= m.div_ceil(2));
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn dyck1() -> Cfg {
        parse_grammar("S -> ( S ) S | ε").unwrap().to_cnf()
    }

    #[test]
    fn cyk_on_dyck() {
        let g = dyck1();
        for (s, member) in [("()", true), ("(()", false), ("", true), ("(())()", true)] {
            let w = g.tokenize(s).unwrap();
            assert_eq!(cyk_recognize(&g, &w).unwrap(), member, "{s:?}");
        }
    }

    #[test]
    fn rejects_non_cnf() {
        let g = parse_grammar("S -> a S b | ε").unwrap();
        let w = g.tokenize("ab").unwrap();
        assert_eq!(cyk_recognize(&g, &w), Err(OracleError::NotCnf));
    }

    #[test]
    fn parse_counts() {
        let g = parse_grammar("S -> S S | a").unwrap();
        for (s, c) in [("aa", 1u32), ("aaa", 2), ("aaaa", 5)] {
            let w = g.tokenize(s).unwrap();
            assert_eq!(count_parses(&g, &w).unwrap(), BigUint::from(c), "{s}");
        }
    }

    #[test]
    fn realizable_small() {
        let g = parse_grammar("S -> A B\nA -> a\nB -> b").unwrap();
        let w = g.tokenize("ab").unwrap();
        let mut got = realizable_items(&g, &w).unwrap();
        got.sort();
        assert_eq!(
            got,
            vec![Item::new("A", 1, 1), Item::new("B", 2, 2), Item::new("S", 1, 2)]
        );
    }

    #[test]
    fn extract_reyields() {
        let g = dyck1();
        let w = g.tokenize("(())()").unwrap();
        let t = extract_parse(&g, &w).unwrap().unwrap();
        let fringe: Vec<String> = t.fringe().iter().map(|s| s.name.clone()).collect();
        assert_eq!(fringe.join(""), "(())()");
        let w = g.tokenize(")(").unwrap();
        assert!(extract_parse(&g, &w).unwrap().is_none());
    }

    #[test]
    fn separator_tiny() {
        let leaf = |p| ParseTree::leaf(Symbol::terminal("a"), p);
        assert_eq!(jordan_separator(&leaf(1)), 0);
        // 3-node path: middle node 1 splits into two singletons.
        let path = ParseTree {
            label: Symbol::nonterminal("S"),
            span: (1, 1),
            children: vec![ParseTree {
                label: Symbol::nonterminal("A"),
                span: (1, 1),
                children: vec![leaf(1)],
            }],
        };
        assert_eq!(jordan_separator(&path), 1);
    }
}
