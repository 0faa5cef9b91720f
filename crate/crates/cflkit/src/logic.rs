//! Three-valued truth: {0, 1, ⊥} with Kleene-style strong connectives.
//!
//! ⊥ means "not known yet", not "undefined": a cell that is ⊥ may later
//! become 0 or 1, never the other way around.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truth3 {
    /// Known false.
    False,
    /// Known true.
    True,
    /// Not yet determined.
    Bottom,
}

pub use Truth3::{Bottom, False, True};

impl Truth3 {
    pub fn is_known(self) -> bool {
        self != Bottom
    }
}

impl From<bool> for Truth3 {
    fn from(b: bool) -> Self {
        if b {
            True
        } else {
            False
        }
    }
}

impl fmt::Display for Truth3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            False => "0",
            True => "1",
            Bottom => "⊥",
        })
    }
}

/// Three-valued conjunction: false dominates, ⊥ is contagious otherwise.
pub fn and3(a: Truth3, b: Truth3) -> Truth3 {
    match (a, b) {
        (False, _) | (_, False) => False,
        (True, True) => True,
        _ => Bottom,
    }
}

/// Three-valued disjunction: true dominates, ⊥ is contagious otherwise.
pub fn or3(a: Truth3, b: Truth3) -> Truth3 {
    match (a, b) {
        (True, _) | (_, True) => True,
        (False, False) => False,
        _ => Bottom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // The five non-classical rows of the truth table plus the four
    // classical completions; nine pairs per connective, exhaustive.
    #[test]
    fn truth_table() {
        let cases = [
            // (a, b, a∧b, a∨b)
            (True, Bottom, Bottom, True),
            (Bottom, True, Bottom, True),
            (False, Bottom, False, Bottom),
            (Bottom, False, False, Bottom),
            (Bottom, Bottom, Bottom, Bottom),
            (True, True, True, True),
            (True, False, False, True),
            (False, True, False, True),
            (False, False, False, False),
        ];
        for (a, b, and, or) in cases {
            assert_eq!(and3(a, b), and, "and3({a}, {b})");
            assert_eq!(or3(a, b), or, "or3({a}, {b})");
        }
    }

    #[test]
    fn monotone_in_information() {
        // Refining ⊥ to a classical value never flips an already-known output.
        let all = [False, True, Bottom];
        let refinements = |v: Truth3| -> Vec<Truth3> {
            match v {
                Bottom => vec![False, True],
                v => vec![v],
            }
        };
        for a in all {
            for b in all {
                for ra in refinements(a) {
                    for rb in refinements(b) {
                        for (op, name) in [(and3 as fn(_, _) -> _, "and3"), (or3, "or3")] {
                            let coarse = op(a, b);
                            let fine = op(ra, rb);
                            if coarse.is_known() {
                                assert_eq!(coarse, fine, "{name}({a},{b}) vs ({ra},{rb})");
                            }
                        }
                    }
                }
            }
        }
    }
}
