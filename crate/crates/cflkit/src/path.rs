//! The path-system recognizers: dependency graphs over items plus Reach.
//!
//! For unambiguous grammars, recognition is ⌈log₂ n⌉ rounds of
//! `X ← Reach(DG(X))` over an O(n³)-edge dependency graph; for linear
//! unambiguous grammars a single Reach over an O(n²)-node graph suffices.
//! Reach itself is computed in parallel by handing the (binarized) graph to
//! the pebble game as a disjunction DAG — legal because unambiguity makes
//! every node's reachable subgraph a tree, which this module verifies and
//! reports as `AmbiguityViolation` when it fails.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::compiled::{Cnf, CompileError, Spans};
use crate::grammar::{check_linear, linear_normal_form, Cfg, InputString};
use crate::items::Item;
use crate::logic::Truth3;
use crate::pebble::{self, GateOp, PebbleTree};
use crate::report::{Engine, ResourceReport};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PathError {
    #[error("grammar is not in Chomsky normal form")]
    NotCnf,
    #[error("grammar is not linear")]
    NotLinear,
    #[error("engine supports at most 64 nonterminals, grammar has {0}")]
    TooManyNonterminals(usize),
    #[error("dependency graph is not a tree system: the grammar is ambiguous on this input")]
    AmbiguityViolation,
}

impl From<CompileError> for PathError {
    fn from(e: CompileError) -> PathError {
        match e {
            CompileError::NotCnf => PathError::NotCnf,
            CompileError::TooLarge(n) => PathError::TooManyNonterminals(n),
        }
    }
}

/// A graph node: an item plus what is known about its realizability
/// (1 = in the marked set, 0 = unrealizable base case, ⊥ = unknown).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathNode {
    pub item: Item,
    pub marked: Truth3,
}

/// The initial marked set T: exactly the base-realizable diagonal items.
pub type InitialSet = BTreeSet<PathNode>;

/// Gorn address of a binarization helper: root ε, children append 0/1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GornAddress {
    pub len: usize,
    pub bits: BigUint,
}

impl GornAddress {
    pub fn root() -> GornAddress {
        GornAddress { len: 0, bits: BigUint::zero() }
    }
    /// Left child: shift left.
    pub fn child0(&self) -> GornAddress {
        GornAddress { len: self.len + 1, bits: &self.bits << 1u8 }
    }
    /// Right child: shift left, then +1.
    pub fn child1(&self) -> GornAddress {
        GornAddress { len: self.len + 1, bits: (&self.bits << 1u8) + 1u8 }
    }
}

impl fmt::Display for GornAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("ε");
        }
        for d in (0..self.len).rev() {
            let bit = (&self.bits >> d) & BigUint::from(1u8);
            f.write_str(if bit.is_zero() { "0" } else { "1" })?;
        }
        Ok(())
    }
}

/// A dependency graph: edge (z, x) means "x realizable implies z realizable,
/// given the marked set used to build the graph". Helper nodes (after
/// `binarize`) carry a Gorn address and mirror the item they fan out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    pub nodes: Vec<PathNode>,
    /// `Some(address)` exactly for binarization helpers.
    pub helper: Vec<Option<GornAddress>>,
    pub edges: Vec<(u32, u32)>,
}

impl DepGraph {
    pub fn new(nodes: Vec<PathNode>, edges: Vec<(u32, u32)>) -> DepGraph {
        let helper = vec![None; nodes.len()];
        let mut g = DepGraph { nodes, helper, edges };
        g.edges.sort_unstable();
        g.edges.dedup();
        g
    }
}

/// R(x, y, z): one rule application gluing x and y into z over adjacent spans.
pub fn relation_r(x: &Item, y: &Item, z: &Item, g: &Cfg) -> bool {
    debug_assert!(g.is_cnf);
    z.i == x.i
        && x.j + 1 == y.i
        && y.j == z.j
        && g.productions.iter().any(|p| {
            p.lhs.name == z.nt
                && p.rhs.len() == 2
                && p.rhs[0].name == x.nt
                && p.rhs[1].name == y.nt
        })
}

/// T = {[A,i,i] | A→w_i ∈ P}.
pub fn initial_marked(g: &Cfg, w: &InputString) -> InitialSet {
    debug_assert!(g.is_cnf && w.n() >= 1);
    let mut t = BTreeSet::new();
    for (pos, sym) in w.symbols.iter().enumerate() {
        for p in &g.productions {
            if p.rhs.len() == 1 && p.rhs[0].is_terminal() && p.rhs[0].name == sym.name {
                t.insert(PathNode {
                    item: Item::new(p.lhs.name.clone(), pos + 1, pos + 1),
                    marked: Truth3::True,
                });
            }
        }
    }
    t
}

/// DG(X): nodes are all items over w; edges (z, x) exactly when z ∉ X and
/// some marked y completes a rule application (Eq. 2).
pub fn build_dep_graph(g: &Cfg, w: &InputString, x: &BTreeSet<Item>) -> DepGraph {
    assert!(g.is_cnf, "build_dep_graph requires a CNF grammar");
    let cnf = Cnf::compile(g).expect("grammar fits the engine");
    let enc = cnf.encode(w).expect("input symbols are in Σ");
    let n = w.n();
    let spans = Spans { n };
    let marked = marked_masks(&cnf, &spans, x);
    let (edges, _) = build_edges(&cnf, &enc, &marked);
    let mut nodes = Vec::with_capacity(cnf.nt_count() * spans.count());
    for a in 0..cnf.nt_count() {
        for i in 0..n {
            for j in i..n {
                let item = Item::new(cnf.nt_names[a].clone(), i + 1, j + 1);
                let m = if marked[spans.idx(i, j)] >> a & 1 != 0 {
                    Truth3::True
                } else if i == j {
                    Truth3::False // diagonal non-base: known unrealizable
                } else {
                    Truth3::Bottom
                };
                nodes.push(PathNode { item, marked: m });
            }
        }
    }
    let helper = vec![None; nodes.len()];
    DepGraph { nodes, helper, edges }
}

fn marked_masks(cnf: &Cnf, spans: &Spans, x: &BTreeSet<Item>) -> Vec<u64> {
    let mut m = vec![0u64; spans.count()];
    for item in x {
        let a = cnf.nt_id(&item.nt).expect("marked nonterminal in grammar");
        m[spans.idx(item.i - 1, item.j - 1)] |= 1 << a;
    }
    m
}

/// Node numbering shared by the engines: nonterminal-major over spans.
#[inline(always)]
fn node_id(a: usize, span: usize, span_count: usize) -> u32 {
    (a * span_count + span) as u32
}

/// Enumerate (span, split, rule) and keep edges whose completing sibling is
/// marked and whose source is unmarked. Returns the sorted, deduplicated edge
/// list and the ledger of (item, split, nonterminal) triples examined.
fn build_edges(cnf: &Cnf, w: &[u16], marked: &[u64]) -> (Vec<(u32, u32)>, u64) {
    let n = w.len();
    let spans = Spans { n };
    let sc = spans.count();
    let mut edges: Vec<u64> = Vec::new();
    let mut triples = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            let z = spans.idx(i, j);
            let zm = marked[z];
            for k in i..j {
                let left = spans.idx(i, k);
                let right = spans.idx(k + 1, j);
                let (lm, rm) = (marked[left], marked[right]);
                for &(a, b, c) in &cnf.binary {
                    triples += 2;
                    if zm >> a & 1 != 0 {
                        continue;
                    }
                    let zn = node_id(a as usize, z, sc) as u64;
                    if rm >> c & 1 != 0 {
                        edges.push(zn << 32 | node_id(b as usize, left, sc) as u64);
                    }
                    if lm >> b & 1 != 0 {
                        edges.push(zn << 32 | node_id(c as usize, right, sc) as u64);
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    (edges.into_iter().map(|e| ((e >> 32) as u32, e as u32)).collect(), triples)
}

// ---------------------------------------------------------------------------
// Graph core shared by the public ops and both engines.
// ---------------------------------------------------------------------------

struct Csr {
    off: Vec<u32>,
    adj: Vec<u32>,
}

impl Csr {
    /// `edges` must be sorted by source.
    fn new(nv: usize, edges: &[(u32, u32)]) -> Csr {
        let mut off = vec![0u32; nv + 1];
        for &(z, _) in edges {
            off[z as usize + 1] += 1;
        }
        for v in 0..nv {
            off[v + 1] += off[v];
        }
        Csr { off, adj: edges.iter().map(|&(_, x)| x).collect() }
    }
    fn out(&self, v: u32) -> &[u32] {
        &self.adj[self.off[v as usize] as usize..self.off[v as usize + 1] as usize]
    }
    fn nv(&self) -> usize {
        self.off.len() - 1
    }
}

/// Verify the tree property: at most one directed path between any pair of
/// nodes. Equivalently, the graph is acyclic and no root reaches any node
/// twice, so a stamped DFS from every in-degree-0 node is exact (a second
/// path always extends upward to such a root, and root-less regions contain
/// a cycle). Work is capped at 32·(V+E) pops (≥ 10⁶): a genuinely ambiguous
/// instance reveals a duplicate visit almost immediately, while a huge
/// well-behaved graph would otherwise pay Σ_root |tree(root)|.
fn check_tree_property(csr: &Csr) -> Result<(), PathError> {
    let nv = csr.nv();
    let mut indeg = vec![0u32; nv];
    for &x in &csr.adj {
        indeg[x as usize] += 1;
    }
    let cap = 1_000_000usize.max(32 * (nv + csr.adj.len()));
    let mut stamp = vec![0u32; nv];
    let mut seen = vec![false; nv];
    let mut stack: Vec<u32> = Vec::new();
    let mut work = 0usize;
    let mut cur = 0u32;
    for root in 0..nv as u32 {
        if indeg[root as usize] != 0 {
            continue;
        }
        cur += 1;
        stack.clear();
        stack.push(root);
        while let Some(v) = stack.pop() {
            work += 1;
            if work > cap {
                return Ok(()); // best effort beyond the cap
            }
            if stamp[v as usize] == cur {
                return Err(PathError::AmbiguityViolation);
            }
            stamp[v as usize] = cur;
            seen[v as usize] = true;
            stack.extend_from_slice(csr.out(v));
        }
    }
    // A node no root reaches sits under a root-less cycle: two z→z paths.
    if (0..nv).any(|v| !seen[v] && indeg[v] > 0) {
        return Err(PathError::AmbiguityViolation);
    }
    Ok(())
}

/// Binarized fan-out: per node at most two children; helpers are appended
/// after the original ids, each remembering its origin and chain depth.
struct Binarized {
    children: Vec<[Option<u32>; 2]>,
    helpers: Vec<(u32, usize)>,
}

fn binarize_structure(csr: &Csr) -> Binarized {
    let nv = csr.nv();
    let mut children: Vec<[Option<u32>; 2]> = vec![[None, None]; nv];
    let mut helpers: Vec<(u32, usize)> = Vec::new();
    let mut hchildren: Vec<[Option<u32>; 2]> = Vec::new();
    for v in 0..nv as u32 {
        let out = csr.out(v);
        match out.len() {
            0 => {}
            1 => children[v as usize] = [Some(out[0]), None],
            2 => children[v as usize] = [Some(out[0]), Some(out[1])],
            k => {
                // Right-branching chain of k−2 helpers over the tail targets.
                children[v as usize] = [Some(out[0]), Some((nv + helpers.len()) as u32)];
                for d in 1..k - 1 {
                    let id = nv + helpers.len();
                    helpers.push((v, d));
                    let next = if d == k - 2 { out[k - 1] } else { (id + 1) as u32 };
                    hchildren.push([Some(out[d]), Some(next)]);
                }
            }
        }
    }
    children.extend(hchildren);
    debug_assert!(children.iter().skip(nv).all(|c| c[0].is_some() && c[1].is_some()));
    Binarized { children, helpers }
}

/// Cap out-degrees at 2 with right-branching helper chains; reachability
/// between original nodes is preserved exactly. Helpers carry Gorn addresses
/// on the right spine (ε for the node itself, then 1, 11, …).
pub fn binarize(d: &DepGraph) -> DepGraph {
    let csr = Csr::new(d.nodes.len(), &d.edges);
    let b = binarize_structure(&csr);
    let mut out = d.clone();
    for &(origin, depth) in &b.helpers {
        out.nodes.push(PathNode {
            item: d.nodes[origin as usize].item.clone(),
            marked: Truth3::Bottom,
        });
        let mut addr = GornAddress::root();
        for _ in 0..depth {
            addr = addr.child1();
        }
        out.helper.push(Some(addr));
    }
    out.edges.clear();
    for (v, ch) in b.children.iter().enumerate() {
        for c in ch.iter().flatten() {
            out.edges.push((v as u32, *c));
        }
    }
    out.edges.sort_unstable();
    out
}

/// All nodes with a directed path (length ≥ 0) to a marked node, by reverse
/// breadth-first traversal. The oracle for `reach_parallel`.
pub fn reach_serial(d: &DepGraph, marked: &BTreeSet<u32>) -> BTreeSet<u32> {
    let nv = d.nodes.len();
    let mut redges: Vec<(u32, u32)> = d.edges.iter().map(|&(z, x)| (x, z)).collect();
    redges.sort_unstable();
    let rev = Csr::new(nv, &redges);
    let mut inset = vec![false; nv];
    let mut queue: Vec<u32> = marked.iter().copied().collect();
    for &m in &queue {
        inset[m as usize] = true;
    }
    while let Some(x) = queue.pop() {
        for &z in rev.out(x) {
            if !inset[z as usize] {
                inset[z as usize] = true;
                queue.push(z);
            }
        }
    }
    (0..nv as u32).filter(|&v| inset[v as usize]).collect()
}

/// Reach computed by the pebble game on the binarized graph read as a
/// disjunction DAG: marked nodes are ⊤ leaves, unmarked sinks ⊥ leaves,
/// everything else an OR over its children (out-degree 1 pairs the child
/// with a shared ⊥ leaf so pointer jumping still collapses chains).
/// Returns (value per node, pebble rounds, formula size).
fn reach_pebble(csr: &Csr, marked: &[bool]) -> (Vec<bool>, usize, usize) {
    let nv = csr.nv();
    let b = binarize_structure(csr);
    let m = b.children.len();
    let mut t = PebbleTree::new();
    let false_leaf = m as u32;
    for (v, ch) in b.children.iter().enumerate() {
        if v < nv && marked[v] {
            t.leaf(true);
            continue;
        }
        match (ch[0], ch[1]) {
            (None, _) => {
                t.leaf(false);
            }
            (Some(a), None) => {
                t.gate(GateOp::Or, a, Some(false_leaf));
            }
            (Some(a), Some(c)) => {
                t.gate(GateOp::Or, a, Some(c));
            }
        }
    }
    t.leaf(false);
    let (values, rounds) =
        pebble::evaluate_all(&t, 4).expect("pebble converges on tree-property graphs");
    let out = (0..nv).map(|v| values[v] == Truth3::True).collect();
    (out, rounds, t.len())
}

/// Parallel Reach. Raises `AmbiguityViolation` when some node's reachable
/// subgraph is not a tree (two distinct paths or a cycle); otherwise returns
/// exactly `reach_serial`'s answer plus the pebble rounds used.
pub fn reach_parallel(
    d: &DepGraph,
    marked: &BTreeSet<u32>,
) -> Result<(BTreeSet<u32>, usize), PathError> {
    let csr = Csr::new(d.nodes.len(), &d.edges);
    check_tree_property(&csr)?;
    let mut mk = vec![false; d.nodes.len()];
    for &v in marked {
        mk[v as usize] = true;
    }
    let (values, rounds, _) = reach_pebble(&csr, &mk);
    Ok(((0..d.nodes.len() as u32).filter(|&v| values[v as usize]).collect(), rounds))
}

/// ⌈log₂ n⌉ rounds of X ← Reach(DG(X)) with cumulative marking
/// and fixpoint early exit; accepted ⇔ [S,1,n] ∈ X.
pub fn recognize_unambiguous(g: &Cfg, w: &InputString) -> Result<ResourceReport, PathError> {
    let t0 = Instant::now();
    if !g.is_cnf {
        return Err(PathError::NotCnf);
    }
    let cnf = Cnf::compile(g)?;
    let n = w.n();
    let mut report = ResourceReport::new(Engine::Unambiguous, false, n);
    report.outer_iterations = Some(0);
    report.pebble_rounds = Some(0);
    report.edge_cells = Some(0);
    report.item_cells = Some(0);
    if n == 0 {
        report.accepted = cnf.has_eps;
        report.wall_time = t0.elapsed().as_secs_f64();
        return Ok(report);
    }
    let Some(enc) = cnf.encode(w) else {
        report.wall_time = t0.elapsed().as_secs_f64();
        return Ok(report);
    };
    let spans = Spans { n };
    let sc = spans.count();
    let nts = cnf.nt_count();
    let mut x = vec![0u64; sc];
    for i in 0..n {
        x[spans.idx(i, i)] = cnf.emit_mask(enc[i]);
    }
    let mut iters = 0;
    let mut pebble_total = 0;
    let mut edge_cells_max = 0u64;
    let mut largest = 0;
    for _ in 0..pebble::ceil_log2(n) {
        let (edges, triples) = build_edges(&cnf, &enc, &x);
        edge_cells_max = edge_cells_max.max(triples);
        let csr = Csr::new(nts * sc, &edges);
        check_tree_property(&csr)?;
        let mut mk = vec![false; nts * sc];
        for a in 0..nts {
            for s in 0..sc {
                mk[node_id(a, s, sc) as usize] = x[s] >> a & 1 != 0;
            }
        }
        let (values, rounds, m) = reach_pebble(&csr, &mk);
        iters += 1;
        pebble_total += rounds;
        largest = largest.max(m);
        let mut grew = false;
        for a in 0..nts {
            for s in 0..sc {
                if values[node_id(a, s, sc) as usize] && x[s] >> a & 1 == 0 {
                    x[s] |= 1 << a;
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    report.accepted = x[spans.idx(0, n - 1)] >> cnf.start & 1 != 0;
    report.outer_iterations = Some(iters);
    report.pebble_rounds = Some(pebble_total);
    report.edge_cells = Some(edge_cells_max as usize);
    report.item_cells = Some(nts * sc);
    report.largest_graph = Some(largest);
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// Linear fast path: one Reach over DG(T) with edges [A,i,j]→[B,i+1,j] for
/// A→w_iB and [A,i,j]→[B,i,j−1] for A→Bw_j on the strict normal form.
pub fn recognize_linear(g: &Cfg, w: &InputString) -> Result<ResourceReport, PathError> {
    let t0 = Instant::now();
    if !check_linear(g) {
        return Err(PathError::NotLinear);
    }
    let n = w.n();
    let mut report = ResourceReport::new(Engine::Linear, false, n);
    report.outer_iterations = Some(0);
    report.pebble_rounds = Some(0);
    report.item_cells = Some(0);
    if n == 0 {
        report.accepted = g.derives_epsilon();
        report.wall_time = t0.elapsed().as_secs_f64();
        return Ok(report);
    }
    let nf = linear_normal_form(g);
    let nt_ids: Vec<&String> = nf.nonterminals.iter().collect();
    let nt_of = |name: &str| nt_ids.iter().position(|s| s.as_str() == name).unwrap();
    let nts = nt_ids.len();
    // Rules in the three strict shapes, on nonterminal ids.
    let mut emit: Vec<(usize, String)> = Vec::new(); // A→a
    let mut left: Vec<(usize, String, usize)> = Vec::new(); // A→aB
    let mut right: Vec<(usize, usize, String)> = Vec::new(); // A→Ba
    for p in &nf.productions {
        let a = nt_of(&p.lhs.name);
        match p.rhs.as_slice() {
            [t] if t.is_terminal() => emit.push((a, t.name.clone())),
            [t, b] if t.is_terminal() => left.push((a, t.name.clone(), nt_of(&b.name))),
            [b, t] if t.is_terminal() => right.push((a, nt_of(&b.name), t.name.clone())),
            [] => continue, // S→ε handled above
            _ => unreachable!("linear_normal_form output is strict"),
        }
    }
    if w.symbols.iter().any(|s| !nf.terminals.contains(&s.name)) {
        report.wall_time = t0.elapsed().as_secs_f64();
        return Ok(report);
    }
    let spans = Spans { n };
    let sc = spans.count();
    let sym = |p: usize| &w.symbols[p].name;
    let mut marked = vec![false; nts * sc];
    for p in 0..n {
        for (a, t) in &emit {
            if sym(p) == t {
                marked[node_id(*a, spans.idx(p, p), sc) as usize] = true;
            }
        }
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let z = spans.idx(i, j);
            for (a, t, b) in &left {
                if sym(i) == t {
                    edges.push((node_id(*a, z, sc), node_id(*b, spans.idx(i + 1, j), sc)));
                }
            }
            for (a, b, t) in &right {
                if sym(j) == t {
                    edges.push((node_id(*a, z, sc), node_id(*b, spans.idx(i, j - 1), sc)));
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let csr = Csr::new(nts * sc, &edges);
    check_tree_property(&csr)?;
    let (values, rounds, m) = reach_pebble(&csr, &marked);
    let start = node_id(nt_of(&nf.start), spans.idx(0, n - 1), sc) as usize;
    report.accepted = values[start];
    report.outer_iterations = Some(1);
    report.pebble_rounds = Some(rounds);
    report.item_cells = Some(nts * sc);
    report.largest_graph = Some(m);
    report.wall_time = t0.elapsed().as_secs_f64();
    Ok(report)
}

/// The node-cell bound constant for the linear engine: C₂ = |N| of the
/// normal form.
pub fn linear_cell_constant(g: &Cfg) -> usize {
    linear_normal_form(g).nonterminals.len()
}

/// The edge-ledger constant for the unambiguous engine: C₃ = 2|P|.
pub fn edge_ledger_constant(g: &Cfg) -> u128 {
    2 * g.productions.len() as u128
}
