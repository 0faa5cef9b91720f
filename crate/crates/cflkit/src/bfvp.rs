//! Boolean Formula Value Problem in postfix notation, recognized directly
//! from counting predicates over positions (depth, dindex, argument) plus the
//! pebble evaluator. No grammar-item table is ever allocated: one pebble node
//! per input position is the entire workspace.

use thiserror::Error;

use crate::pebble::{self, GateOp, PebbleTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfSym {
    /// Literal 1.
    T,
    /// Literal 0.
    F,
    And,
    Or,
    Not,
}

impl BfSym {
    pub fn is_literal(self) -> bool {
        matches!(self, BfSym::T | BfSym::F)
    }
    pub fn is_binary(self) -> bool {
        matches!(self, BfSym::And | BfSym::Or)
    }
    pub fn glyph(self) -> char {
        match self {
            BfSym::T => '1',
            BfSym::F => '0',
            BfSym::And => '∧',
            BfSym::Or => '∨',
            BfSym::Not => '¬',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostfixFormula {
    pub symbols: Vec<BfSym>,
}

impl PostfixFormula {
    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    /// Accepts ∧ ∨ ¬ or the ASCII fallbacks & | !, with or without
    /// whitespace between symbols.
    pub fn parse(text: &str) -> Result<PostfixFormula, BfvpError> {
        let symbols = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '1' => Ok(BfSym::T),
                '0' => Ok(BfSym::F),
                '∧' | '&' => Ok(BfSym::And),
                '∨' | '|' => Ok(BfSym::Or),
                '¬' | '!' => Ok(BfSym::Not),
                other => Err(BfvpError::BadSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if symbols.is_empty() {
            return Err(BfvpError::Empty);
        }
        Ok(PostfixFormula { symbols })
    }

    pub fn text(&self) -> String {
        self.symbols.iter().map(|s| s.glyph()).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BfvpError {
    #[error("symbol {0:?} is not in the BFVP alphabet")]
    BadSymbol(char),
    #[error("empty formula")]
    Empty,
    #[error("position {0} does not hold an operator")]
    NotAnOperator(usize),
    #[error("formula is not well-formed")]
    NotWellFormed,
    #[error("unbalanced parentheses in infix formula")]
    Unbalanced,
}

/// Per-position stack-depth facts. NOT consumes one operand and produces one,
/// so it leaves depth unchanged; literals add one; binary ops remove one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionFacts {
    /// depth(i) = #{j ≤ i literal} − #{j ≤ i binary op}, 1-based positions.
    pub depth: Vec<i64>,
    /// dindex(i) = #{j ≤ i : depth(j) = depth(i)}.
    pub dindex: Vec<usize>,
}

pub fn compute_facts(f: &PostfixFormula) -> PositionFacts {
    let mut depth = Vec::with_capacity(f.n());
    let mut d = 0i64;
    for &s in &f.symbols {
        if s.is_literal() {
            d += 1;
        } else if s.is_binary() {
            d -= 1;
        }
        depth.push(d);
    }
    let mut seen: std::collections::HashMap<i64, usize> = std::collections::HashMap::new();
    let dindex = depth
        .iter()
        .map(|&di| {
            let c = seen.entry(di).or_insert(0);
            *c += 1;
            *c
        })
        .collect();
    PositionFacts { depth, dindex }
}

pub fn well_formed(f: &PostfixFormula) -> bool {
    let facts = compute_facts(f);
    facts.depth.iter().all(|&d| d >= 1) && *facts.depth.last().unwrap() == 1
}

/// Operand positions of the operator at 1-based position `i`: NOT takes the
/// previous position; a binary op takes the previous position and the unique
/// earlier position with equal depth and dindex one less.
pub fn arguments(f: &PostfixFormula, i: usize) -> Result<Vec<usize>, BfvpError> {
    let s = *f
        .symbols
        .get(i.wrapping_sub(1))
        .ok_or(BfvpError::NotAnOperator(i))?;
    if s.is_literal() {
        return Err(BfvpError::NotAnOperator(i));
    }
    if s == BfSym::Not {
        return Ok(vec![i - 1]);
    }
    let facts = compute_facts(f);
    let (d, di) = (facts.depth[i - 1], facts.dindex[i - 1]);
    let first = (1..i)
        .find(|&k| facts.depth[k - 1] == d && facts.dindex[k - 1] == di - 1)
        .ok_or(BfvpError::NotWellFormed)?;
    Ok(vec![first, i - 1])
}

/// Expression tree over pebble nodes; node for position i (1-based) is
/// pebble node i−1, so a postfix re-serialization is just the node order.
pub fn build_tree(f: &PostfixFormula) -> Result<PebbleTree, BfvpError> {
    if !well_formed(f) {
        return Err(BfvpError::NotWellFormed);
    }
    let facts = compute_facts(f);
    // Positions per depth, in order; the unique k with dindex(k) = d−1 is a
    // direct lookup instead of the O(n) scan `arguments` performs.
    let mut at_depth: std::collections::HashMap<i64, Vec<usize>> =
        std::collections::HashMap::new();
    for (pos, &d) in facts.depth.iter().enumerate() {
        at_depth.entry(d).or_default().push(pos + 1);
    }
    let mut t = PebbleTree::new();
    for (pos, &s) in f.symbols.iter().enumerate() {
        let i = pos + 1;
        match s {
            BfSym::T => t.leaf(true),
            BfSym::F => t.leaf(false),
            BfSym::Not => t.gate(GateOp::Not, i as u32 - 2, None),
            BfSym::And | BfSym::Or => {
                let op = if s == BfSym::And { GateOp::And } else { GateOp::Or };
                let first = at_depth[&facts.depth[pos]][facts.dindex[pos] - 2];
                debug_assert_eq!(arguments(f, i).unwrap(), vec![first, i - 1]);
                t.gate(op, first as u32 - 1, Some(i as u32 - 2))
            }
        };
    }
    t.root = t.len() as u32 - 1;
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfvpReport {
    pub accepted: bool,
    pub rounds: usize,
    /// Always 0: the AHAT¹₀ profile has no grammar-item workspace.
    pub extra_cells: usize,
}

pub fn recognize_bfvp(f: &PostfixFormula) -> BfvpReport {
    if !well_formed(f) {
        return BfvpReport { accepted: false, rounds: 0, extra_cells: 0 };
    }
    let t = build_tree(f).expect("checked well-formed");
    let (value, rounds) = pebble::evaluate(&t, 4).expect("pebble budget certified in tests");
    BfvpReport { accepted: value, rounds, extra_cells: 0 }
}

/// Direct recursive (stack) evaluation — the oracle recognize_bfvp is
/// validated against. Returns None when not well-formed.
pub fn eval_recursive(f: &PostfixFormula) -> Option<bool> {
    let mut stack: Vec<bool> = Vec::new();
    for &s in &f.symbols {
        match s {
            BfSym::T => stack.push(true),
            BfSym::F => stack.push(false),
            BfSym::Not => {
                let a = stack.pop()?;
                stack.push(!a);
            }
            BfSym::And | BfSym::Or => {
                let b = stack.pop()?;
                let a = stack.pop()?;
                stack.push(if s == BfSym::And { a && b } else { a || b });
            }
        }
    }
    (stack.len() == 1).then(|| stack[0])
}

/// Shunting-yard conversion with precedence ¬ > ∧ > ∨, binary ops
/// left-associative; parentheses allowed.
pub fn infix_to_postfix(text: &str) -> Result<PostfixFormula, BfvpError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Tok {
        Sym(BfSym),
        LParen,
        RParen,
    }
    let toks = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '1' => Ok(Tok::Sym(BfSym::T)),
            '0' => Ok(Tok::Sym(BfSym::F)),
            '∧' | '&' => Ok(Tok::Sym(BfSym::And)),
            '∨' | '|' => Ok(Tok::Sym(BfSym::Or)),
            '¬' | '!' => Ok(Tok::Sym(BfSym::Not)),
            '(' => Ok(Tok::LParen),
            ')' => Ok(Tok::RParen),
            other => Err(BfvpError::BadSymbol(other)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let prec = |s: BfSym| match s {
        BfSym::Not => 3,
        BfSym::And => 2,
        BfSym::Or => 1,
        _ => 0,
    };
    let mut out = Vec::new();
    let mut ops: Vec<Tok> = Vec::new();
    for t in toks {
        match t {
            Tok::Sym(s) if s.is_literal() => out.push(s),
            Tok::Sym(BfSym::Not) => ops.push(t),
            Tok::Sym(s) => {
                while let Some(&Tok::Sym(top)) = ops.last() {
                    // ¬ is prefix (right-assoc); binaries are left-assoc.
                    if prec(top) > prec(s) || (prec(top) == prec(s) && top != BfSym::Not) {
                        out.push(top);
                        ops.pop();
                    } else {
                        break;
                    }
                }
                ops.push(t);
            }
            Tok::LParen => ops.push(t),
            Tok::RParen => loop {
                match ops.pop() {
                    Some(Tok::Sym(s)) => out.push(s),
                    Some(Tok::LParen) => break,
                    _ => return Err(BfvpError::Unbalanced),
                }
            },
        }
    }
    while let Some(t) = ops.pop() {
        match t {
            Tok::Sym(s) => out.push(s),
            _ => return Err(BfvpError::Unbalanced),
        }
    }
    if out.is_empty() {
        return Err(BfvpError::Empty);
    }
    Ok(PostfixFormula { symbols: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pebble::NodeKind;

    fn pf(s: &str) -> PostfixFormula {
        PostfixFormula::parse(s).unwrap()
    }

    #[test]
    fn depths() {
        assert_eq!(compute_facts(&pf("10∧")).depth, vec![1, 2, 1]);
        assert_eq!(compute_facts(&pf("10∧1∨")).depth, vec![1, 2, 1, 2, 1]);
        assert_eq!(compute_facts(&pf("1¬")).depth, vec![1, 1]);
    }

    #[test]
    fn well_formedness() {
        assert!(well_formed(&pf("10∧")));
        assert!(!well_formed(&pf("∧")));
        assert!(!well_formed(&pf("10")));
    }

    #[test]
    fn argument_positions() {
        assert_eq!(arguments(&pf("10∧"), 3).unwrap(), vec![1, 2]);
        assert_eq!(arguments(&pf("10∧1∨"), 5).unwrap(), vec![3, 4]);
        assert_eq!(arguments(&pf("1¬"), 2).unwrap(), vec![1]);
        assert_eq!(arguments(&pf("10∧"), 1), Err(BfvpError::NotAnOperator(1)));
    }

    #[test]
    fn recognition() {
        assert!(recognize_bfvp(&pf("10∨")).accepted);
        assert!(!recognize_bfvp(&pf("10∧")).accepted);
        assert!(!recognize_bfvp(&pf("10")).accepted); // ill-formed → reject
        let left_chain = pf(&("10∧".to_string() + &"0∧".repeat(40)));
        let r = recognize_bfvp(&left_chain);
        assert!(!r.accepted);
        assert_eq!(r.extra_cells, 0);
        assert!(r.rounds <= 4 * pebble::ceil_log2(left_chain.n()) + 2);
    }

    #[test]
    fn infix_conversion() {
        assert_eq!(infix_to_postfix("1 ∨ 0").unwrap().text(), "10∨");
        assert_eq!(infix_to_postfix("¬(1 ∧ 0)").unwrap().text(), "10∧¬");
        assert_eq!(infix_to_postfix("1|0&0").unwrap().text(), "100∧∨");
        assert_eq!(infix_to_postfix("!!1").unwrap().text(), "1¬¬");
        assert!(infix_to_postfix("(1").is_err());
    }

    #[test]
    fn tree_round_trip_matches_symbols() {
        for s in ["10∧1∨", "1¬0∨", "111∧∧"] {
            let f = pf(s);
            let t = build_tree(&f).unwrap();
            // Node i is position i+1; kinds must mirror the symbols.
            for (i, &sym) in f.symbols.iter().enumerate() {
                let k = t.kinds[i];
                match sym {
                    BfSym::T => assert_eq!(k, NodeKind::Leaf(true)),
                    BfSym::F => assert_eq!(k, NodeKind::Leaf(false)),
                    BfSym::And => assert_eq!(k, NodeKind::Gate(GateOp::And)),
                    BfSym::Or => assert_eq!(k, NodeKind::Gate(GateOp::Or)),
                    BfSym::Not => assert_eq!(k, NodeKind::Gate(GateOp::Not)),
                }
            }
            assert_eq!(recognize_bfvp(&f).accepted, eval_recursive(&f).unwrap());
        }
    }
}
