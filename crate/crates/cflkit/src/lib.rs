//! cflkit: a workbench for parallel context-free-language recognition.
//!
//! The crate contains three recognizers with very different resource
//! profiles, all parameterized by the same grammar tooling:
//!
//! - [`recognize`]: a three-valued fixed-point engine over items `[A,i,j]`
//!   and slashed items `[A,i,j]/[B,k,l]`, sound for every CFG, with an
//!   O(n^6) work ledger.
//! - [`path::recognize_unambiguous`]: a path-system engine that plays a
//!   pebble game on dependency graphs `DG(X)`, correct for unambiguous
//!   grammars, with an O(n^3) edge ledger and polylog rounds.
//! - [`path::recognize_linear`]: a single-reach fast path for linear
//!   unambiguous grammars with an O(n^2) cell ledger.
//!
//! A CYK oracle ([`oracle`]), a Boolean-formula-value recognizer built from
//! counting predicates ([`bfvp`]), and length-exact samplers ([`sampler`])
//! round out the toolkit.
//!
//! ```
//! use cflkit::{parse_grammar, recognize};
//!
//! let g = parse_grammar("S -> a S b | a b").unwrap().to_cnf();
//! let w = g.tokenize("aabb").unwrap();
//! let report = recognize(&g, &w, 4).unwrap();
//! assert!(report.accepted);
//! ```

mod compiled;

pub mod bfvp;
pub mod engine;
pub mod grammar;
pub mod items;
pub mod logic;
pub mod oracle;
pub mod path;
pub mod pebble;
pub mod report;
pub mod sampler;
pub mod verify;

// The book's code listings are compiled and run as doc-tests so the guide
// can never drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grammars.md")]
    mod grammars {}
    #[doc = include_str!("../../../book/src/general-engine.md")]
    mod general_engine {}
    #[doc = include_str!("../../../book/src/path-systems.md")]
    mod path_systems {}
    #[doc = include_str!("../../../book/src/pebble.md")]
    mod pebble {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
}

pub use engine::{recognize, RecognitionTable};
pub use grammar::{
    check_linear, parse_grammar, Cfg, GrammarError, InputString, Production, Symbol,
};
pub use items::{Item, SlashedItem};
pub use logic::Truth3;
pub use oracle::{cyk_recognize, ParseTree};
pub use path::{recognize_linear, recognize_unambiguous, DepGraph, PathError, PathNode};
pub use report::{Engine, ResourceReport};
