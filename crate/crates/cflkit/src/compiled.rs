//! Integer-indexed view of a CNF grammar, shared by the oracle and the
//! engines. Nonterminals are numbered in grammar iteration order; nonterminal
//! sets are u64 bitmasks (the workbench caps |N| at 64, plenty for every
//! built-in grammar and any reasonable hand-written one).

use std::collections::HashMap;

use crate::grammar::{Cfg, InputString};

pub(crate) const MAX_NTS: usize = 64;

#[derive(Debug, Clone)]
pub(crate) struct Cnf {
    pub nt_names: Vec<String>,
    term_index: HashMap<String, u16>,
    pub start: u16,
    /// (A, B, C) for every rule A→BC, in production order.
    pub binary: Vec<(u16, u16, u16)>,
    /// Per lhs A: the (B, C) pairs of its binary rules.
    pub by_lhs: Vec<Vec<(u16, u16)>>,
    /// Per B: the (A, C) pairs with A→BC ∈ P.
    pub by_left: Vec<Vec<(u16, u16)>>,
    /// Per C: the (A, B) pairs with A→BC ∈ P.
    pub by_right: Vec<Vec<(u16, u16)>>,
    /// Per terminal a: bitmask of {A : A→a ∈ P}.
    pub emitters: Vec<u64>,
    /// Per terminal a: one entry per rule A→a (multiplicity preserved).
    emit_rules: Vec<Vec<u16>>,
    pub has_eps: bool,
}

impl Cnf {
    pub fn compile(g: &Cfg) -> Result<Cnf, CompileError> {
        if !g.is_cnf {
            return Err(CompileError::NotCnf);
        }
        if g.nonterminals.len() > MAX_NTS {
            return Err(CompileError::TooLarge(g.nonterminals.len()));
        }
        let nt_names: Vec<String> = g.nonterminals.iter().cloned().collect();
        let nt_index: HashMap<String, u16> = nt_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u16))
            .collect();
        let term_names: Vec<String> = g.terminals.iter().cloned().collect();
        let term_index: HashMap<String, u16> = term_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u16))
            .collect();

        let nt_count = nt_names.len();
        let mut cnf = Cnf {
            start: nt_index[&g.start],
            nt_names,
            term_index,
            binary: Vec::new(),
            by_lhs: vec![Vec::new(); nt_count],
            by_left: vec![Vec::new(); nt_count],
            by_right: vec![Vec::new(); nt_count],
            emitters: vec![0; g.terminals.len()],
            emit_rules: vec![Vec::new(); g.terminals.len()],
            has_eps: false,
        };
        for p in &g.productions {
            let a = nt_index[&p.lhs.name];
            match p.rhs.as_slice() {
                [] => cnf.has_eps = true,
                [t] => {
                    let t = cnf.term_index[&t.name] as usize;
                    cnf.emitters[t] |= 1 << a;
                    cnf.emit_rules[t].push(a);
                }
                [b, c] => {
                    let b = nt_index[&b.name];
                    let c = nt_index[&c.name];
                    cnf.binary.push((a, b, c));
                    cnf.by_lhs[a as usize].push((b, c));
                    cnf.by_left[b as usize].push((a, c));
                    cnf.by_right[c as usize].push((a, b));
                }
                _ => unreachable!("is_cnf guarantees rhs length ≤ 2"),
            }
        }
        Ok(cnf)
    }

    pub fn nt_count(&self) -> usize {
        self.nt_names.len()
    }

    pub fn nt_id(&self, name: &str) -> Option<u16> {
        self.nt_names.iter().position(|n| n == name).map(|i| i as u16)
    }

    /// Terminal ids of `w`, or None if some symbol is not in Σ (in which
    /// case no derivation exists).
    pub fn encode(&self, w: &InputString) -> Option<Vec<u16>> {
        w.symbols
            .iter()
            .map(|s| self.term_index.get(&s.name).copied())
            .collect()
    }

    /// Bitmask of {A : A→w_pos ∈ P} for an encoded input.
    pub fn emit_mask(&self, t: u16) -> u64 {
        self.emitters[t as usize]
    }

    /// One lhs per rule A→a, multiplicity preserved (for parse counting).
    pub fn emit_rule_list(&self, t: u16) -> &[u16] {
        &self.emit_rules[t as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CompileError {
    NotCnf,
    TooLarge(usize),
}

/// Row-major triangle index for spans 0 ≤ i ≤ j < n.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Spans {
    pub n: usize,
}

impl Spans {
    pub fn count(&self) -> usize {
        self.n * (self.n + 1) / 2
    }
    /// 0-based i, j: row i starts after the i earlier rows of n−r entries.
    #[inline(always)]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        i * (2 * self.n - i + 1) / 2 + (j - i)
    }
}
