//! Randomized invariants over generated programs and configurations.

use proptest::prelude::*;
use refstore::gen::Gen;
use refstore::store::canonicalize;
use refstore::syntax::{alpha_eq, all_names, fresh_name, parse_term, subst, Term};

/// Rename every binder in `t` to a fresh name, producing an alpha-equal
/// but syntactically different term.
fn freshen_binders(t: &Term, salt: &mut usize) -> Term {
    match t {
        Term::Lam { param, ann, body } if param != "_" => {
            let mut avoid = all_names(t);
            avoid.insert(format!("r{salt}"));
            let p2 = fresh_name(&format!("r{salt}"), &avoid);
            *salt += 1;
            let body2 = subst(body, param, &Term::var(&p2));
            Term::Lam {
                param: p2,
                ann: ann.clone(),
                body: Box::new(freshen_binders(&body2, salt)),
            }
        }
        Term::Bind { var, rhs, body } if var != "_" => {
            let mut avoid = all_names(t);
            avoid.insert(format!("r{salt}"));
            let v2 = fresh_name(&format!("r{salt}"), &avoid);
            *salt += 1;
            let body2 = subst(body, var, &Term::var(&v2));
            Term::Bind {
                var: v2,
                rhs: Box::new(freshen_binders(rhs, salt)),
                body: Box::new(freshen_binders(&body2, salt)),
            }
        }
        _ => t.map_children(|c| freshen_binders(c, salt)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_roundtrip(seed in any::<u64>(), len in 1usize..8) {
        let t = Gen::new(seed).straightline(len);
        let reparsed = parse_term(&t.to_string()).unwrap();
        prop_assert!(alpha_eq(&t, &reparsed), "{t}");
    }

    #[test]
    fn alpha_renaming_is_invisible(seed in any::<u64>(), len in 1usize..8) {
        let t = Gen::new(seed).straightline(len);
        let renamed = freshen_binders(&t, &mut 0);
        prop_assert!(alpha_eq(&t, &renamed), "{t} vs {renamed}");
    }

    #[test]
    fn subst_commutes_with_alpha_renaming(seed in any::<u64>(), n in -9i64..9) {
        // an open integer expression over the free variable i
        let mut g = Gen::new(seed);
        let scope = [("i".to_string(), refstore::syntax::Type::Int)];
        let body = g.pure_term(&refstore::syntax::Type::Int, &scope);
        let t = Term::ret(body);
        let renamed = freshen_binders(&t, &mut 0);
        let s = Term::Int(n.into());
        prop_assert!(alpha_eq(&subst(&t, "i", &s), &subst(&renamed, "i", &s)));
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = g.config(4);
        let once = canonicalize(&c);
        prop_assert_eq!(canonicalize(&once), once.clone(), "{}", once.dump());
    }

    #[test]
    fn canonicalize_collapses_permutations(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let c = g.config(4);
        let p = g.permuted(&c);
        prop_assert_eq!(canonicalize(&c), canonicalize(&p));
    }
}
