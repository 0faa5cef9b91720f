//! Cross-engine consistency: on languages inside every engine's scope, all
//! recognizers and the oracle give identical verdicts string for string.

use cflkit::path::{recognize_linear, recognize_unambiguous};
use cflkit::sampler::builtin;
use cflkit::verify::enumerate_strings;
use cflkit::{cyk_recognize, recognize};

#[test]
fn all_engines_agree_on_linear_unambiguous_languages() {
    // Linear and unambiguous: every engine applies.
    for name in ["anbn", "marked_palindrome", "palindrome"] {
        let s = builtin(name).unwrap();
        for text in enumerate_strings(&s, 6) {
            let w = s.cnf.tokenize(&text).unwrap();
            let oracle = cyk_recognize(&s.cnf, &w).unwrap();
            assert_eq!(recognize(&s.cnf, &w, 4).unwrap().accepted, oracle, "general {text:?}");
            assert_eq!(
                recognize_unambiguous(&s.cnf, &w).unwrap().accepted,
                oracle,
                "unambiguous {text:?}"
            );
            let wl = s.cfg.tokenize(&text).unwrap();
            assert_eq!(recognize_linear(&s.cfg, &wl).unwrap().accepted, oracle, "linear {text:?}");
        }
    }
}

#[test]
fn general_and_unambiguous_agree_on_dyck() {
    for name in ["dyck1", "dyck2"] {
        let s = builtin(name).unwrap();
        for text in enumerate_strings(&s, 5) {
            let w = s.cnf.tokenize(&text).unwrap();
            let oracle = cyk_recognize(&s.cnf, &w).unwrap();
            assert_eq!(recognize(&s.cnf, &w, 4).unwrap().accepted, oracle, "general {text:?}");
            assert_eq!(
                recognize_unambiguous(&s.cnf, &w).unwrap().accepted,
                oracle,
                "unambiguous {text:?}"
            );
        }
    }
}

#[test]
fn empty_string_handling_is_uniform() {
    let dyck = builtin("dyck1").unwrap();
    let w = dyck.cnf.tokenize("").unwrap();
    assert!(cyk_recognize(&dyck.cnf, &w).unwrap());
    assert!(recognize(&dyck.cnf, &w, 4).unwrap().accepted);
    assert!(recognize_unambiguous(&dyck.cnf, &w).unwrap().accepted);

    let anbn = builtin("anbn").unwrap();
    let w = anbn.cnf.tokenize("").unwrap();
    assert!(!cyk_recognize(&anbn.cnf, &w).unwrap());
    assert!(!recognize(&anbn.cnf, &w, 4).unwrap().accepted);
    assert!(!recognize_unambiguous(&anbn.cnf, &w).unwrap().accepted);
    assert!(!recognize_linear(&anbn.cfg, &w).unwrap().accepted);
}
