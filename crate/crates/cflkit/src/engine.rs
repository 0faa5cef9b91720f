//! The general-CFL recognizer: a synchronous three-valued fixed-point over
//! items `[A,i,j]` and slashed items `[A,i,j]/[B,k,l]`.
//!
//! Every cell starts at ⊥ except the base cases, and each round recomputes
//! all ⊥ cells from the previous round's table: the new value is the or3
//! over the cell's decompositions of the and3 of the two sub-cells. Values
//! only ever move ⊥→0 or ⊥→1. Membership is decided by `[S,1,n] = 1` within
//! ⌈log₂ n⌉ + C rounds; ⊥ at the cutoff is a (sound) reject.
//!
//! The public surface is definitional and map-based; `solve_round` and
//! `recognize` both run on a bitmask core that produces bit-identical
//! tables, so the cheap representation never drifts from the definition.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::compiled::{Cnf, CompileError, Spans};
use crate::grammar::{Cfg, InputString, Production};
use crate::items::{Item, SlashedItem};
use crate::logic::{and3, Truth3};
use crate::report::{Engine, ResourceReport};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("grammar is not in Chomsky normal form")]
    NotCnf,
    #[error("engine supports at most 64 nonterminals, grammar has {0}")]
    TooManyNonterminals(usize),
}

impl From<CompileError> for EngineError {
    fn from(e: CompileError) -> EngineError {
        match e {
            CompileError::NotCnf => EngineError::NotCnf,
            CompileError::TooLarge(n) => EngineError::TooManyNonterminals(n),
        }
    }
}

/// Which child of the root rule contains the hole of a slashed split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One way to reduce a cell to sub-cells (the lemmas' recursive cases).
/// `split` is the 1-based start of the right child's span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    /// `[X,i,j] ← [Y,i,split−1] ∧ [Z,split,j]` for a rule X→YZ.
    ItemSplit { rule: Production, split: usize },
    /// `[X,i,j] ← [X,i,j]/inner ∧ inner`.
    ItemGuess { inner: Item },
    /// `[X,i,j]/[Y,k,l] ← [A,i,split−1]/[Y,k,l] ∧ [B,split,j]` (side = Left,
    /// rule X→AB) or the mirror image (side = Right). When the holed child's
    /// span equals the hole itself the slashed factor degenerates to the
    /// constant "child nonterminal = Y" (the hole is the entire child).
    SlashSplit { rule: Production, split: usize, side: Side },
    /// `[X,i,j]/[Y,k,l] ← [X,i,j]/mid ∧ mid/[Y,k,l]`.
    SlashGuess { mid: Item },
}

/// A recognition subproblem: either kind of table cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Item(Item),
    Slashed(SlashedItem),
}

/// Base case of the item lemma: `[A,i,i]` is decided by the rule A→w_i.
pub fn base_item_value(it: &Item, w: &InputString, g: &Cfg) -> Truth3 {
    debug_assert!(g.is_cnf);
    if it.i != it.j {
        return Truth3::Bottom;
    }
    let sym = &w.symbols[it.i - 1].name;
    let hit = g.productions.iter().any(|p| {
        p.lhs.name == it.nt && p.rhs.len() == 1 && p.rhs[0].is_terminal() && p.rhs[0].name == *sym
    });
    Truth3::from(hit)
}

fn emits(g: &Cfg, nt: &str, sym: &str) -> bool {
    g.productions
        .iter()
        .any(|p| p.lhs.name == nt && p.rhs.len() == 1 && p.rhs[0].is_terminal() && p.rhs[0].name == sym)
}

/// Base case of the slashed lemma: the hole is the whole span except one
/// boundary symbol, which a sibling nonterminal must emit in one step.
pub fn base_slashed_value(sl: &SlashedItem, w: &InputString, g: &Cfg) -> Truth3 {
    debug_assert!(g.is_cnf);
    let (i, j) = (sl.outer.i, sl.outer.j);
    let (k, l) = (sl.inner.i, sl.inner.j);
    if k == i && l + 1 == j {
        // X → Y Z with Y the hole and Z → w_j.
        let hit = g.productions.iter().any(|p| {
            p.lhs.name == sl.outer.nt
                && p.rhs.len() == 2
                && p.rhs[0].name == sl.inner.nt
                && emits(g, &p.rhs[1].name, &w.symbols[j - 1].name)
        });
        Truth3::from(hit)
    } else if k == i + 1 && l == j {
        // Symmetric: X → Z Y with Z → w_i.
        let hit = g.productions.iter().any(|p| {
            p.lhs.name == sl.outer.nt
                && p.rhs.len() == 2
                && p.rhs[1].name == sl.inner.nt
                && emits(g, &p.rhs[0].name, &w.symbols[i - 1].name)
        });
        Truth3::from(hit)
    } else {
        Truth3::Bottom
    }
}

/// All decompositions of `cell` per the lemmas' recursive cases 1 and 2,
/// within index bounds. Base-case items have none.
pub fn enumerate_decompositions(cell: &Cell, g: &Cfg, n: usize) -> Vec<Decomposition> {
    debug_assert!(g.is_cnf && n >= 1);
    let binary = || g.productions.iter().filter(|p| p.rhs.len() == 2);
    let mut out = Vec::new();
    match cell {
        Cell::Item(it) => {
            if it.i == it.j {
                return out;
            }
            for p in binary().filter(|p| p.lhs.name == it.nt) {
                for split in it.i + 1..=it.j {
                    out.push(Decomposition::ItemSplit { rule: p.clone(), split });
                }
            }
            for k in it.i..=it.j {
                for l in k..=it.j {
                    if (k, l) == (it.i, it.j) {
                        continue;
                    }
                    for y in &g.nonterminals {
                        out.push(Decomposition::ItemGuess { inner: Item::new(y.clone(), k, l) });
                    }
                }
            }
        }
        Cell::Slashed(sl) => {
            let (i, j) = (sl.outer.i, sl.outer.j);
            let (k, l) = (sl.inner.i, sl.inner.j);
            for p in binary().filter(|p| p.lhs.name == sl.outer.nt) {
                // Hole inside the left child [A,i,split−1]: needs split−1 ≥ l.
                for split in l + 1..=j {
                    out.push(Decomposition::SlashSplit { rule: p.clone(), split, side: Side::Left });
                }
                // Hole inside the right child [B,split,j]: needs split ≤ k.
                for split in i + 1..=k {
                    out.push(Decomposition::SlashSplit { rule: p.clone(), split, side: Side::Right });
                }
            }
            for p in i..=k {
                for q in l..=j {
                    if (p, q) == (i, j) || (p, q) == (k, l) {
                        continue;
                    }
                    for z in &g.nonterminals {
                        out.push(Decomposition::SlashGuess { mid: Item::new(z.clone(), p, q) });
                    }
                }
            }
        }
    }
    out
}

/// The full cell table of one recognition instance. All cells are present;
/// ⊥ means "not yet determined". Cells never change once determined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognitionTable {
    pub items: BTreeMap<Item, Truth3>,
    pub slashed: BTreeMap<SlashedItem, Truth3>,
    pub round: usize,
}

impl RecognitionTable {
    /// All items over spans of `w` plus all nested, non-degenerate slashed
    /// items, initialized to their base values (⊥ for non-base shapes).
    pub fn init(g: &Cfg, w: &InputString) -> RecognitionTable {
        assert!(g.is_cnf, "RecognitionTable::init requires a CNF grammar");
        let n = w.n();
        let mut t = RecognitionTable { items: BTreeMap::new(), slashed: BTreeMap::new(), round: 0 };
        for a in &g.nonterminals {
            for i in 1..=n {
                for j in i..=n {
                    let it = Item::new(a.clone(), i, j);
                    let v = base_item_value(&it, w, g);
                    t.items.insert(it, v);
                }
            }
        }
        for a in &g.nonterminals {
            for b in &g.nonterminals {
                for i in 1..=n {
                    for j in i..=n {
                        for k in i..=j {
                            for l in k..=j {
                                if (k, l) == (i, j) {
                                    continue;
                                }
                                let sl = SlashedItem::new(
                                    Item::new(a.clone(), i, j),
                                    Item::new(b.clone(), k, l),
                                );
                                let v = base_slashed_value(&sl, w, g);
                                t.slashed.insert(sl, v);
                            }
                        }
                    }
                }
            }
        }
        t
    }
}

/// One synchronous round: every ⊥ cell recomputes from the previous table;
/// determined cells are untouched. Pure in its input.
pub fn solve_round(t: &RecognitionTable, g: &Cfg, w: &InputString) -> RecognitionTable {
    assert!(g.is_cnf, "solve_round requires a CNF grammar");
    let cnf = Cnf::compile(g).expect("grammar fits the engine");
    let enc = cnf.encode(w).expect("input symbols are in Σ");
    let mut d = Dense::from_table(&cnf, &enc, t);
    d.step();
    let mut next = d.to_table();
    next.round = t.round + 1;
    next
}

/// Run the fixed-point for at most ⌈log₂ n⌉ + C rounds, stopping early at
/// fixpoint or on `[S,1,n] = 1`. ⊥ at the cutoff means reject (soundly);
/// the report carries the remaining ⊥ count for diagnostics.
pub fn recognize(
    g: &Cfg,
    w: &InputString,
    round_budget_constant: usize,
) -> Result<ResourceReport, EngineError> {
    let t0 = Instant::now();
    if !g.is_cnf {
        return Err(EngineError::NotCnf);
    }
    let cnf = Cnf::compile(g)?;
    let n = w.n();
    let mut report = ResourceReport::new(Engine::General, false, n);
    report.rounds_used = Some(0);
    report.item_cells = Some(0);
    report.slashed_cells = Some(0);
    report.decomposition_pairs = Some(0);
    report.undetermined_cells = Some(0);
    if n == 0 {
        report.accepted = cnf.has_eps;
        report.wall_time = t0.elapsed().as_secs_f64();
        return Ok(report);
    }
    let Some(enc) = cnf.encode(w) else {
        // A symbol outside Σ: nothing derives it.
        report.wall_time = t0.elapsed().as_secs_f64();
        return Ok(report);
    };
    let mut d = Dense::init(&cnf, &enc);
    let budget = crate::pebble::ceil_log2(n) + round_budget_constant;
    let mut rounds = 0;
    let mut accepted = d.start_value() == Truth3::True;
    while rounds < budget && !accepted {
        let changed = d.step();
        rounds += 1;
        accepted = d.start_value() == Truth3::True;
        if !changed {
            break;
        }
    }
    // Ledger check: one sweep touches ≤ (|N|³ + 2|P||N|² + |N|² + |P||N|)·n⁶
    // pairs by the lemmas' counting; the budget caps sweeps well below the
    // constant's slack, so the cumulative count stays under the same bound.
    let nn = cnf.nt_count() as u128;
    let np = g.productions.len() as u128;
    let c6 = nn * nn * nn + 2 * np * nn * nn + nn * nn + np * nn;
    let n6 = (n as u128).pow(6);
    debug_assert!(d.pairs as u128 <= c6 * n6, "pair ledger exceeded C6*n^6");
    report.accepted = accepted;
    report.rounds_used = Some(rounds);
    report.item_cells = Some(d.item_cell_count());
    report.slashed_cells = Some(d.slashed_cell_count());
    report.decomposition_pairs = Some(d.pairs);
    report.undetermined_cells = Some(d.undetermined_cells());
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// The bound used by the ledger criterion: C₆ from |N| and |P|.
pub fn pair_ledger_constant(g: &Cfg) -> u128 {
    let nn = g.nonterminals.len() as u128;
    let np = g.productions.len() as u128;
    nn * nn * nn + 2 * np * nn * nn + nn * nn + np * nn
}

// ---------------------------------------------------------------------------
// Dense core: one u64 bit per nonterminal, two masks per cell group.
// ---------------------------------------------------------------------------

/// Per-group three-valued vector: bit set in `t` means 1, in `f` means 0,
/// in neither means ⊥ (never both).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct MaskPair {
    t: u64,
    f: u64,
}

impl MaskPair {
    /// Bitwise Kleene conjunction.
    fn and3(self, o: MaskPair) -> MaskPair {
        MaskPair { t: self.t & o.t, f: self.f | o.f }
    }
    /// Conjunction with a scalar second operand.
    fn and3_scalar(self, s: Truth3, full: u64) -> MaskPair {
        match s {
            Truth3::True => self,
            Truth3::False => MaskPair { t: 0, f: full },
            Truth3::Bottom => MaskPair { t: 0, f: self.f },
        }
    }
    /// ∃-reduction over the bit positions of `full`: or3 across the set.
    fn reduce(self, full: u64) -> Truth3 {
        if self.t & full != 0 {
            Truth3::True
        } else if self.f & full == full {
            Truth3::False
        } else {
            Truth3::Bottom
        }
    }
}

/// Disjunctive accumulator: `t` collects 1s, `f` keeps "all contributions 0".
#[derive(Debug, Clone, Copy)]
struct Acc {
    t: u64,
    f: u64,
}

impl Acc {
    fn new(full: u64) -> Acc {
        Acc { t: 0, f: full }
    }
    fn add_mask(&mut self, c: MaskPair) {
        self.t |= c.t;
        self.f &= c.f;
    }
    fn add_scalar(&mut self, bit: u64, v: Truth3) {
        match v {
            Truth3::True => self.t |= bit,
            Truth3::Bottom => self.f &= !bit,
            Truth3::False => {}
        }
    }
}

/// Dense table over valid cells only. Item groups are spans (bits = nt);
/// slashed groups are (outer span, inner span, outer nt) rows (bits = inner
/// nt), stored both row-wise (`sl`) and transposed (`slt`). Positions are
/// 0-based internally.
struct Dense<'g> {
    cnf: &'g Cnf,
    n: usize,
    nts: usize,
    full: u64,
    spans: Spans,
    /// Start of each outer span's block of nested inner-span slots.
    qoff: Vec<usize>,
    it: Vec<MaskPair>,
    sl: Vec<MaskPair>,
    slt: Vec<MaskPair>,
    pairs: u64,
}

impl<'g> Dense<'g> {
    fn empty(cnf: &'g Cnf, n: usize) -> Dense<'g> {
        let nts = cnf.nt_count();
        let spans = Spans { n };
        let mut qoff = Vec::with_capacity(spans.count());
        let mut total = 0usize;
        for i in 0..n {
            for j in i..n {
                debug_assert_eq!(qoff.len(), spans.idx(i, j));
                qoff.push(total);
                let m = j - i + 1;
                total += m * (m + 1) / 2;
            }
        }
        Dense {
            cnf,
            n,
            nts,
            full: if nts == 64 { !0 } else { (1u64 << nts) - 1 },
            spans,
            qoff,
            it: vec![MaskPair::default(); spans.count()],
            sl: vec![MaskPair::default(); total * nts],
            slt: vec![MaskPair::default(); total * nts],
            pairs: 0,
        }
    }

    /// Slot of the nested span pair (i,j) ⊇ (k,l), 0-based.
    #[inline(always)]
    fn quad(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        debug_assert!(i <= k && k <= l && l <= j && j < self.n);
        let m = j - i + 1;
        self.qoff[self.spans.idx(i, j)] + Spans { n: m }.idx(k - i, l - i)
    }

    #[inline(always)]
    fn item_val(&self, a: u16, i: usize, j: usize) -> Truth3 {
        let mp = self.it[self.spans.idx(i, j)];
        let bit = 1u64 << a;
        if mp.t & bit != 0 {
            Truth3::True
        } else if mp.f & bit != 0 {
            Truth3::False
        } else {
            Truth3::Bottom
        }
    }

    fn init(cnf: &'g Cnf, w: &[u16]) -> Dense<'g> {
        let mut d = Dense::empty(cnf, w.len());
        let n = d.n;
        for i in 0..n {
            let t = cnf.emit_mask(w[i]) & d.full;
            d.it[d.spans.idx(i, i)] = MaskPair { t, f: d.full & !t };
        }
        // Base slashed shapes are fully decided here: in CNF the recursion
        // can never add to them (the sibling must emit in one step).
        for i in 0..n {
            for j in i + 1..n {
                let mut left_hole = vec![0u64; d.nts]; // [X] → bits Y: X→YZ, Z→w_j
                let mut right_hole = vec![0u64; d.nts]; // [X] → bits Y: X→ZY, Z→w_i
                for &(x, y, z) in &cnf.binary {
                    if cnf.emit_mask(w[j]) >> z & 1 != 0 {
                        left_hole[x as usize] |= 1 << y;
                    }
                    if cnf.emit_mask(w[i]) >> y & 1 != 0 {
                        right_hole[x as usize] |= 1 << z;
                    }
                }
                let q1 = d.quad(i, j, i, j - 1);
                let q2 = d.quad(i, j, i + 1, j);
                for x in 0..d.nts {
                    d.sl[q1 * d.nts + x] = MaskPair { t: left_hole[x], f: d.full & !left_hole[x] };
                    d.sl[q2 * d.nts + x] = MaskPair { t: right_hole[x], f: d.full & !right_hole[x] };
                }
            }
        }
        d.rebuild_transpose();
        d
    }

    fn rebuild_transpose(&mut self) {
        self.slt.fill(MaskPair::default());
        let nts = self.nts;
        for q in 0..self.sl.len() / nts {
            for x in 0..nts {
                let row = self.sl[q * nts + x];
                let mut b = row.t;
                while b != 0 {
                    let y = b.trailing_zeros() as usize;
                    b &= b - 1;
                    self.slt[q * nts + y].t |= 1 << x;
                }
                let mut b = row.f;
                while b != 0 {
                    let y = b.trailing_zeros() as usize;
                    b &= b - 1;
                    self.slt[q * nts + y].f |= 1 << x;
                }
            }
        }
    }

    fn start_value(&self) -> Truth3 {
        self.item_val(self.cnf.start, 0, self.n - 1)
    }

    /// One synchronous round over the previous table. Returns whether any
    /// cell changed (false = fixpoint).
    fn step(&mut self) -> bool {
        let n = self.n;
        let nts = self.nts;
        let full = self.full;
        let mut nit = self.it.clone();
        let mut nsl = self.sl.clone();
        // Items over multi-symbol spans.
        for i in 0..n {
            for j in i + 1..n {
                let s = self.spans.idx(i, j);
                let und = full & !(self.it[s].t | self.it[s].f);
                if und == 0 {
                    continue;
                }
                let mut acc = Acc::new(full);
                for &(x, y, z) in &self.cnf.binary {
                    if und >> x & 1 == 0 {
                        continue;
                    }
                    for k in i..j {
                        self.pairs += 1;
                        let v = and3(self.item_val(y, i, k), self.item_val(z, k + 1, j));
                        acc.add_scalar(1 << x, v);
                    }
                }
                for k in i..=j {
                    for l in k..=j {
                        if (k, l) == (i, j) {
                            continue;
                        }
                        let q = self.quad(i, j, k, l);
                        let inner = self.it[self.spans.idx(k, l)];
                        let mut xb = und;
                        while xb != 0 {
                            let x = xb.trailing_zeros() as usize;
                            xb &= xb - 1;
                            self.pairs += nts as u64;
                            let v = self.sl[q * nts + x].and3(inner).reduce(full);
                            acc.add_scalar(1 << x, v);
                        }
                    }
                }
                nit[s].t |= acc.t & und;
                nit[s].f |= acc.f & und;
            }
        }
        // Slashed rows over non-base, non-degenerate nested span pairs.
        for i in 0..n {
            for j in i + 1..n {
                for k in i..=j {
                    for l in k..=j {
                        if (k, l) == (i, j)
                            || (k == i && l + 1 == j)
                            || (k == i + 1 && l == j)
                        {
                            continue;
                        }
                        let q = self.quad(i, j, k, l);
                        for x in 0..nts {
                            let row = self.sl[q * nts + x];
                            let und = full & !(row.t | row.f);
                            if und == 0 {
                                continue;
                            }
                            let mut acc = Acc::new(full);
                            for &(y, z) in &self.cnf.by_lhs[x] {
                                // Hole inside the left child (i,t).
                                for t in l..j {
                                    self.pairs += nts as u64;
                                    let right = self.item_val(z, t + 1, j);
                                    if right == Truth3::False {
                                        continue;
                                    }
                                    let holed = if (i, t) == (k, l) {
                                        MaskPair { t: 1 << y, f: full & !(1 << y) }
                                    } else {
                                        self.sl[self.quad(i, t, k, l) * nts + y as usize]
                                    };
                                    acc.add_mask(holed.and3_scalar(right, full));
                                }
                                // Hole inside the right child (t,j).
                                for t in i + 1..=k {
                                    self.pairs += nts as u64;
                                    let left = self.item_val(y, i, t - 1);
                                    if left == Truth3::False {
                                        continue;
                                    }
                                    let holed = if (t, j) == (k, l) {
                                        MaskPair { t: 1 << z, f: full & !(1 << z) }
                                    } else {
                                        self.sl[self.quad(t, j, k, l) * nts + z as usize]
                                    };
                                    acc.add_mask(holed.and3_scalar(left, full));
                                }
                            }
                            for p in i..=k {
                                for qq in l..=j {
                                    if (p, qq) == (i, j) || (p, qq) == (k, l) {
                                        continue;
                                    }
                                    let m1 = self.sl[self.quad(i, j, p, qq) * nts + x];
                                    let q2 = self.quad(p, qq, k, l);
                                    let mut yb = und;
                                    while yb != 0 {
                                        let y = yb.trailing_zeros() as usize;
                                        yb &= yb - 1;
                                        self.pairs += nts as u64;
                                        let v = m1.and3(self.slt[q2 * nts + y]).reduce(full);
                                        acc.add_scalar(1 << y, v);
                                    }
                                }
                            }
                            nsl[q * nts + x].t |= acc.t & und;
                            nsl[q * nts + x].f |= acc.f & und;
                        }
                    }
                }
            }
        }
        let changed = nit != self.it || nsl != self.sl;
        self.it = nit;
        self.sl = nsl;
        self.rebuild_transpose();
        changed
    }

    fn item_cell_count(&self) -> usize {
        self.spans.count() * self.nts
    }

    fn slashed_cell_count(&self) -> usize {
        // One degenerate (k,l) = (i,j) slot per outer span is allocated but
        // is not a cell.
        (self.sl.len() / self.nts - self.spans.count()) * self.nts * self.nts
    }

    fn undetermined_cells(&self) -> usize {
        let mut c = 0;
        for mp in &self.it {
            c += (self.full & !(mp.t | mp.f)).count_ones() as usize;
        }
        let nts = self.nts;
        for i in 0..self.n {
            for j in i..self.n {
                for k in i..=j {
                    for l in k..=j {
                        if (k, l) == (i, j) {
                            continue;
                        }
                        let q = self.quad(i, j, k, l);
                        for x in 0..nts {
                            let mp = self.sl[q * nts + x];
                            c += (self.full & !(mp.t | mp.f)).count_ones() as usize;
                        }
                    }
                }
            }
        }
        c
    }

    /// Lossless import of a map table (missing cells read as ⊥).
    fn from_table(cnf: &'g Cnf, w: &[u16], t: &RecognitionTable) -> Dense<'g> {
        let mut d = Dense::empty(cnf, w.len());
        for (item, &v) in &t.items {
            let a = cnf.nt_id(&item.nt).expect("table nonterminal in grammar");
            let s = d.spans.idx(item.i - 1, item.j - 1);
            match v {
                Truth3::True => d.it[s].t |= 1 << a,
                Truth3::False => d.it[s].f |= 1 << a,
                Truth3::Bottom => {}
            }
        }
        for (sl, &v) in &t.slashed {
            let x = cnf.nt_id(&sl.outer.nt).expect("table nonterminal in grammar") as usize;
            let y = cnf.nt_id(&sl.inner.nt).expect("table nonterminal in grammar");
            let q = d.quad(sl.outer.i - 1, sl.outer.j - 1, sl.inner.i - 1, sl.inner.j - 1);
            match v {
                Truth3::True => d.sl[q * d.nts + x].t |= 1 << y,
                Truth3::False => d.sl[q * d.nts + x].f |= 1 << y,
                Truth3::Bottom => {}
            }
        }
        d.rebuild_transpose();
        d
    }

    fn to_table(&self) -> RecognitionTable {
        let mut t = RecognitionTable { items: BTreeMap::new(), slashed: BTreeMap::new(), round: 0 };
        let nts = self.nts;
        for i in 0..self.n {
            for j in i..self.n {
                for a in 0..nts {
                    let item = Item::new(self.cnf.nt_names[a].clone(), i + 1, j + 1);
                    t.items.insert(item, self.item_val(a as u16, i, j));
                }
                for k in i..=j {
                    for l in k..=j {
                        if (k, l) == (i, j) {
                            continue;
                        }
                        let q = self.quad(i, j, k, l);
                        for x in 0..nts {
                            let row = self.sl[q * nts + x];
                            for y in 0..nts {
                                let bit = 1u64 << y;
                                let v = if row.t & bit != 0 {
                                    Truth3::True
                                } else if row.f & bit != 0 {
                                    Truth3::False
                                } else {
                                    Truth3::Bottom
                                };
                                let sl = SlashedItem::new(
                                    Item::new(self.cnf.nt_names[x].clone(), i + 1, j + 1),
                                    Item::new(self.cnf.nt_names[y].clone(), k + 1, l + 1),
                                );
                                t.slashed.insert(sl, v);
                            }
                        }
                    }
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::or3;
    use crate::grammar::parse_grammar;
    use crate::logic::Truth3::{Bottom, False, True};
    use crate::oracle::cyk_recognize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dyck1() -> Cfg {
        parse_grammar("S -> ( S ) | S S | ( )").unwrap().to_cnf()
    }

    fn ab_grammar() -> Cfg {
        parse_grammar("S -> A B\nA -> a\nB -> b").unwrap()
    }

    #[test]
    fn base_item_values() {
        let g = dyck1();
        let w = g.tokenize("()").unwrap();
        // Some nonterminal emits '(' at position 1 but not ')' there.
        let emitter = g
            .nonterminals
            .iter()
            .find(|a| emits(&g, a, "("))
            .expect("CNF Dyck-1 has a '(' proxy");
        assert_eq!(base_item_value(&Item::new(emitter.clone(), 1, 1), &w, &g), True);
        assert_eq!(base_item_value(&Item::new(emitter.clone(), 2, 2), &w, &g), False);
        assert_eq!(base_item_value(&Item::new(g.start.clone(), 1, 2), &w, &g), Bottom);
    }

    #[test]
    fn base_slashed_values() {
        let g = ab_grammar();
        assert!(g.is_cnf);
        let w = g.tokenize("ab").unwrap();
        let sl = SlashedItem::new(Item::new("S", 1, 2), Item::new("A", 1, 1));
        assert_eq!(base_slashed_value(&sl, &w, &g), True);
        let sl = SlashedItem::new(Item::new("S", 1, 2), Item::new("B", 2, 2));
        assert_eq!(base_slashed_value(&sl, &w, &g), True);
        let sl = SlashedItem::new(Item::new("S", 1, 2), Item::new("B", 1, 1));
        assert_eq!(base_slashed_value(&sl, &w, &g), False);
        let sl = SlashedItem::new(Item::new("S", 1, 3), Item::new("A", 2, 2));
        assert_eq!(base_slashed_value(&sl, &w, &g), Bottom);
    }

    #[test]
    fn decomposition_counts() {
        let g = ab_grammar();
        let item = Cell::Item(Item::new("S", 1, 2));
        let ds = enumerate_decompositions(&item, &g, 2);
        let splits = ds.iter().filter(|d| matches!(d, Decomposition::ItemSplit { .. })).count();
        let guesses = ds.iter().filter(|d| matches!(d, Decomposition::ItemGuess { .. })).count();
        assert_eq!(splits, 1); // S→AB at split 2
        assert_eq!(guesses, 2 * g.nonterminals.len()); // inners (1,1) and (2,2)
        let base = Cell::Item(Item::new("A", 1, 1));
        assert!(enumerate_decompositions(&base, &g, 2).is_empty());
    }

    /// Reference evaluator: one decomposition against a map table.
    fn eval_decomp(t: &RecognitionTable, cell: &Cell, d: &Decomposition) -> Truth3 {
        match (cell, d) {
            (Cell::Item(it), Decomposition::ItemSplit { rule, split }) => and3(
                t.items[&Item::new(rule.rhs[0].name.clone(), it.i, split - 1)],
                t.items[&Item::new(rule.rhs[1].name.clone(), *split, it.j)],
            ),
            (Cell::Item(it), Decomposition::ItemGuess { inner }) => and3(
                t.slashed[&SlashedItem::new(it.clone(), inner.clone())],
                t.items[inner],
            ),
            (Cell::Slashed(sl), Decomposition::SlashSplit { rule, split, side }) => {
                let (i, j) = (sl.outer.i, sl.outer.j);
                let (k, l) = (sl.inner.i, sl.inner.j);
                match side {
                    Side::Left => {
                        let holed = if (i, split - 1) == (k, l) {
                            Truth3::from(rule.rhs[0].name == sl.inner.nt)
                        } else {
                            t.slashed[&SlashedItem::new(
                                Item::new(rule.rhs[0].name.clone(), i, split - 1),
                                sl.inner.clone(),
                            )]
                        };
                        and3(holed, t.items[&Item::new(rule.rhs[1].name.clone(), *split, j)])
                    }
                    Side::Right => {
                        let holed = if (*split, j) == (k, l) {
                            Truth3::from(rule.rhs[1].name == sl.inner.nt)
                        } else {
                            t.slashed[&SlashedItem::new(
                                Item::new(rule.rhs[1].name.clone(), *split, j),
                                sl.inner.clone(),
                            )]
                        };
                        and3(t.items[&Item::new(rule.rhs[0].name.clone(), i, split - 1)], holed)
                    }
                }
            }
            (Cell::Slashed(sl), Decomposition::SlashGuess { mid }) => and3(
                t.slashed[&SlashedItem::new(sl.outer.clone(), mid.clone())],
                t.slashed[&SlashedItem::new(mid.clone(), sl.inner.clone())],
            ),
            _ => unreachable!("variant shape matches the cell kind"),
        }
    }

    /// Definitional round, straight off enumerate_decompositions.
    fn naive_round(t: &RecognitionTable, g: &Cfg, w: &InputString) -> RecognitionTable {
        let mut next = t.clone();
        next.round += 1;
        for (item, &v) in &t.items {
            if v != Bottom {
                continue;
            }
            let cell = Cell::Item(item.clone());
            let mut acc = False;
            for d in enumerate_decompositions(&cell, g, w.n()) {
                acc = or3(acc, eval_decomp(t, &cell, &d));
            }
            next.items.insert(item.clone(), acc);
        }
        for (sl, &v) in &t.slashed {
            if v != Bottom {
                continue;
            }
            let cell = Cell::Slashed(sl.clone());
            let mut acc = False;
            for d in enumerate_decompositions(&cell, g, w.n()) {
                acc = or3(acc, eval_decomp(t, &cell, &d));
            }
            next.slashed.insert(sl.clone(), acc);
        }
        next
    }

    #[test]
    fn one_round_ab() {
        let g = ab_grammar();
        let w = g.tokenize("ab").unwrap();
        let t = RecognitionTable::init(&g, &w);
        assert_eq!(t.items[&Item::new("S", 1, 2)], Bottom);
        let t1 = solve_round(&t, &g, &w);
        assert_eq!(t1.items[&Item::new("S", 1, 2)], True);
        assert_eq!(t1.round, 1);
    }

    #[test]
    fn dense_round_matches_naive_round() {
        let g = dyck1();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=4);
            let text: String = (0..n).map(|_| if rng.gen() { '(' } else { ')' }).collect();
            let w = g.tokenize(&text).unwrap();
            let mut t = RecognitionTable::init(&g, &w);
            for _ in 0..4 {
                let dense = solve_round(&t, &g, &w);
                let naive = naive_round(&t, &g, &w);
                assert_eq!(dense.items, naive.items, "items differ on {text:?}");
                assert_eq!(dense.slashed, naive.slashed, "slashed differ on {text:?}");
                t = dense;
            }
        }
    }

    #[test]
    fn fixpoint_is_stable_and_monotone() {
        let g = dyck1();
        let w = g.tokenize("(())").unwrap();
        let mut t = RecognitionTable::init(&g, &w);
        loop {
            let next = solve_round(&t, &g, &w);
            // Monotonicity: determined cells keep their value.
            for (item, &v) in &t.items {
                if v != Bottom {
                    assert_eq!(next.items[item], v);
                }
            }
            for (sl, &v) in &t.slashed {
                if v != Bottom {
                    assert_eq!(next.slashed[sl], v);
                }
            }
            if next.items == t.items && next.slashed == t.slashed {
                let again = solve_round(&next, &g, &w);
                assert_eq!(again.items, next.items);
                assert_eq!(again.slashed, next.slashed);
                break;
            }
            t = next;
        }
    }

    #[test]
    fn recognize_dyck1() {
        let g = dyck1();
        for (text, member) in [
            ("()", true),
            ("((()))", true),
            ("()()()", true),
            ("(()", false),
            (")(", false),
            ("((", false),
        ] {
            let w = g.tokenize(text).unwrap();
            let r = recognize(&g, &w, 4).unwrap();
            assert_eq!(r.accepted, member, "on {text:?}");
            if member {
                let budget = crate::pebble::ceil_log2(w.n()) + 4;
                assert!(r.rounds_used.unwrap() <= budget);
            }
        }
    }

    #[test]
    fn agrees_with_cyk_exhaustively_small() {
        let g = dyck1();
        for n in 1..=5 {
            for code in 0..(1u32 << n) {
                let text: String =
                    (0..n).map(|b| if code >> b & 1 == 0 { '(' } else { ')' }).collect();
                let w = g.tokenize(&text).unwrap();
                let r = recognize(&g, &w, 4).unwrap();
                assert_eq!(r.accepted, cyk_recognize(&g, &w).unwrap(), "on {text:?}");
                let c6 = pair_ledger_constant(&g);
                assert!((r.decomposition_pairs.unwrap() as u128) <= c6 * (n as u128).pow(6));
            }
        }
    }

    #[test]
    fn recognize_is_deterministic() {
        let g = dyck1();
        let w = g.tokenize("(())()").unwrap();
        let mut a = recognize(&g, &w, 4).unwrap();
        let mut b = recognize(&g, &w, 4).unwrap();
        a.wall_time = 0.0;
        b.wall_time = 0.0;
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_cnf() {
        let g = parse_grammar("S -> a S a | a").unwrap();
        let w = g.tokenize("aaa").unwrap();
        assert_eq!(recognize(&g, &w, 4), Err(EngineError::NotCnf));
    }

    #[test]
    fn empty_and_foreign_inputs() {
        let g = parse_grammar("S -> a b | ε").unwrap().to_cnf();
        let w = g.tokenize("").unwrap();
        assert!(recognize(&g, &w, 4).unwrap().accepted);
        let w = InputString { symbols: vec![crate::grammar::Symbol::terminal("z")] };
        assert!(!recognize(&g, &w, 4).unwrap().accepted);
    }
}
