//! Rytter's parallel pebble game: evaluate a variable-free Boolean formula
//! in O(log m) synchronous rounds. One round = activate, square, pebble.
//!
//! Each node carries a pointer into its own subformula and a unary `condf`
//! relating the pointer target's (future) value to the node's own value;
//! squaring halves pointer chains, so values propagate logarithmically.

use thiserror::Error;

use crate::logic::{Bottom, False, True, Truth3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOp {
    And,
    Or,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(bool),
    Gate(GateOp),
}

/// A Boolean expression tree (or, for the path-system engine, a DAG in which
/// the subgraph under every node is a tree). Out-degree ≤ 2; `children[1]` is
/// the node's own index for leaves and unary gates.
#[derive(Debug, Clone)]
pub struct PebbleTree {
    pub kinds: Vec<NodeKind>,
    pub children: Vec<[u32; 2]>,
    pub root: u32,
}

impl PebbleTree {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }
    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn leaf(&mut self, value: bool) -> u32 {
        self.push(NodeKind::Leaf(value), None, None)
    }
    pub fn gate(&mut self, op: GateOp, a: u32, b: Option<u32>) -> u32 {
        self.push(NodeKind::Gate(op), Some(a), b)
    }

    fn push(&mut self, kind: NodeKind, a: Option<u32>, b: Option<u32>) -> u32 {
        let id = self.kinds.len() as u32;
        self.kinds.push(kind);
        self.children.push([a.unwrap_or(id), b.or(a).unwrap_or(id)]);
        id
    }

    pub fn new() -> PebbleTree {
        PebbleTree { kinds: Vec::new(), children: Vec::new(), root: 0 }
    }

    /// Direct recursive evaluation; the oracle the pebble game is checked
    /// against, and small enough to share.
    pub fn eval_recursive(&self, v: u32) -> bool {
        let [a, b] = self.children[v as usize];
        match self.kinds[v as usize] {
            NodeKind::Leaf(x) => x,
            NodeKind::Gate(GateOp::Not) => !self.eval_recursive(a),
            NodeKind::Gate(GateOp::And) => self.eval_recursive(a) && self.eval_recursive(b),
            NodeKind::Gate(GateOp::Or) => self.eval_recursive(a) || self.eval_recursive(b),
        }
    }
}

impl Default for PebbleTree {
    fn default() -> Self {
        Self::new()
    }
}

/// The four unary Boolean functions; closed under composition, which is what
/// makes the square step sound. BFVP's ¬ is why negation joins the constants
/// and the identity here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condf {
    ConstT,
    ConstF,
    Identity,
    Negation,
}

impl Condf {
    pub fn apply(self, v: Truth3) -> Truth3 {
        match (self, v) {
            (Condf::ConstT, _) => True,
            (Condf::ConstF, _) => False,
            (Condf::Identity, v) => v,
            (Condf::Negation, True) => False,
            (Condf::Negation, False) => True,
            (Condf::Negation, Bottom) => Bottom,
        }
    }

    /// compose(f, g) = f ∘ g (g applied first).
    pub fn compose(f: Condf, g: Condf) -> Condf {
        match g {
            Condf::ConstT => match f.apply(True) {
                True => Condf::ConstT,
                _ => Condf::ConstF,
            },
            Condf::ConstF => match f.apply(False) {
                True => Condf::ConstT,
                _ => Condf::ConstF,
            },
            Condf::Identity => f,
            Condf::Negation => match f {
                Condf::Identity => Condf::Negation,
                Condf::Negation => Condf::Identity,
                c => c,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct PebbleState {
    pub value: Vec<Truth3>,
    pub ptr: Vec<u32>,
    pub condf: Vec<Condf>,
    /// Gates whose pointer has been dispatched by activate; activate must
    /// fire at most once per node or it would reset squaring progress.
    pub activated: Vec<bool>,
}

impl PebbleState {
    pub fn init(t: &PebbleTree) -> PebbleState {
        let m = t.len();
        let mut s = PebbleState {
            value: vec![Bottom; m],
            ptr: (0..m as u32).collect(),
            condf: vec![Condf::Identity; m],
            activated: vec![false; m],
        };
        for (v, kind) in t.kinds.iter().enumerate() {
            if let NodeKind::Leaf(x) = kind {
                s.value[v] = Truth3::from(*x);
            }
        }
        s
    }
}

/// For each unactivated gate with a child of known value, point at the other
/// child with the condf the dispatch table prescribes. NOT activates
/// unconditionally toward its only child.
pub fn activate(s: &PebbleState, t: &PebbleTree) -> PebbleState {
    let mut next = s.clone();
    for v in 0..t.len() {
        if s.activated[v] || s.value[v].is_known() {
            continue;
        }
        let op = match t.kinds[v] {
            NodeKind::Leaf(_) => continue,
            NodeKind::Gate(op) => op,
        };
        let [a, b] = t.children[v];
        if op == GateOp::Not {
            next.ptr[v] = a;
            next.condf[v] = Condf::Negation;
            next.activated[v] = true;
            continue;
        }
        let (va, vb) = (s.value[a as usize], s.value[b as usize]);
        // Dispatch on a known child; when both are known either choice is
        // consistent, take the first.
        let (known, other) = if va.is_known() {
            (va, b)
        } else if vb.is_known() {
            (vb, a)
        } else {
            continue;
        };
        next.condf[v] = match (op, known) {
            (GateOp::Or, True) => Condf::ConstT,
            (GateOp::Or, False) => Condf::Identity,
            (GateOp::And, True) => Condf::Identity,
            (GateOp::And, False) => Condf::ConstF,
            _ => unreachable!(),
        };
        next.ptr[v] = other;
        next.activated[v] = true;
    }
    next
}

/// One-step pointer closure: v.ptr ← v.ptr.ptr, composing conditionals.
pub fn square(s: &PebbleState) -> PebbleState {
    let mut next = s.clone();
    for v in 0..s.ptr.len() {
        if s.value[v].is_known() || !s.activated[v] {
            continue;
        }
        let w = s.ptr[v] as usize;
        if s.value[w].is_known() {
            continue; // pebble will finish v; w's pointer is now stale scratch
        }
        next.ptr[v] = s.ptr[w];
        next.condf[v] = Condf::compose(s.condf[v], s.condf[w]);
    }
    next
}

/// Every node whose condf is constant or whose pointer target is known gets
/// its value.
pub fn pebble_step(s: &PebbleState) -> PebbleState {
    let mut next = s.clone();
    for v in 0..s.ptr.len() {
        if s.value[v].is_known() || !s.activated[v] {
            continue;
        }
        let target = s.value[s.ptr[v] as usize];
        let out = s.condf[v].apply(target);
        if out.is_known() {
            next.value[v] = out;
        }
    }
    next
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PebbleError {
    #[error("pebble game did not converge within {budget} rounds ({unknown} nodes unknown)")]
    BudgetExceeded { budget: usize, unknown: usize },
}

pub fn round_budget(budget_c: usize, m: usize) -> usize {
    budget_c * ceil_log2(m) + 2
}

pub fn ceil_log2(m: usize) -> usize {
    usize::BITS as usize - m.max(1).next_power_of_two().leading_zeros() as usize - 1
}

/// Run rounds until every node is valued; returns the root value and the
/// number of (activate, square, pebble) rounds used.
pub fn evaluate(t: &PebbleTree, budget_c: usize) -> Result<(bool, usize), PebbleError> {
    let (values, rounds) = evaluate_all(t, budget_c)?;
    Ok((values[t.root as usize] == True, rounds))
}

/// As `evaluate`, but exposing every node's value (the path-system engine
/// reads whole answer sets, not just roots).
///
/// Round-for-round this matches `pebble_step(square(activate(s)))`, but only
/// unknown nodes are touched and the square/pebble snapshots are staged into
/// scratch buffers instead of cloning whole states — the reach graphs this
/// runs on have millions of nodes.
pub fn evaluate_all(t: &PebbleTree, budget_c: usize) -> Result<(Vec<Truth3>, usize), PebbleError> {
    let budget = round_budget(budget_c, t.len());
    let mut s = PebbleState::init(t);
    let mut active: Vec<u32> = (0..t.len() as u32)
        .filter(|&v| !s.value[v as usize].is_known())
        .collect();
    let mut rounds = 0;
    let mut staged: Vec<(u32, u32, Condf)> = Vec::new();
    let mut valued: Vec<(u32, Truth3)> = Vec::new();
    while !active.is_empty() {
        if rounds == budget {
            return Err(PebbleError::BudgetExceeded { budget, unknown: active.len() });
        }
        // activate: reads only child values, writes the node's own fields, so
        // in-place application is already synchronous.
        for &v in &active {
            let v = v as usize;
            if s.activated[v] {
                continue;
            }
            let op = match t.kinds[v] {
                NodeKind::Leaf(_) => continue,
                NodeKind::Gate(op) => op,
            };
            let [a, b] = t.children[v];
            if op == GateOp::Not {
                s.ptr[v] = a;
                s.condf[v] = Condf::Negation;
                s.activated[v] = true;
                continue;
            }
            let (va, vb) = (s.value[a as usize], s.value[b as usize]);
            let (known, other) = if va.is_known() {
                (va, b)
            } else if vb.is_known() {
                (vb, a)
            } else {
                continue;
            };
            s.condf[v] = match (op, known) {
                (GateOp::Or, True) => Condf::ConstT,
                (GateOp::Or, False) => Condf::Identity,
                (GateOp::And, True) => Condf::Identity,
                (GateOp::And, False) => Condf::ConstF,
                _ => unreachable!(),
            };
            s.ptr[v] = other;
            s.activated[v] = true;
        }
        // square: reads other nodes' pointers, so stage then commit.
        staged.clear();
        for &v in &active {
            let vu = v as usize;
            if !s.activated[vu] {
                continue;
            }
            let w = s.ptr[vu] as usize;
            if s.value[w].is_known() {
                continue;
            }
            staged.push((v, s.ptr[w], Condf::compose(s.condf[vu], s.condf[w])));
        }
        for &(v, p, c) in &staged {
            s.ptr[v as usize] = p;
            s.condf[v as usize] = c;
        }
        // pebble: reads other nodes' values, so stage then commit.
        valued.clear();
        for &v in &active {
            let vu = v as usize;
            if !s.activated[vu] {
                continue;
            }
            let out = s.condf[vu].apply(s.value[s.ptr[vu] as usize]);
            if out.is_known() {
                valued.push((v, out));
            }
        }
        for &(v, out) in &valued {
            s.value[v as usize] = out;
        }
        active.retain(|&v| !s.value[v as usize].is_known());
        rounds += 1;
    }
    Ok((s.value, rounds))
}
