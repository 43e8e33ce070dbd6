//! Randomized syntax-level invariants. The typed metatheory suites live in
//! `metacheck`; these cover the printer, parser, and essence plumbing where
//! proptest's shrinking gives small counterexamples.

use proptest::prelude::*;

use deltalf::essence::{
    beta_normalize_bounded, essence, eta_normalize, pure_step, BoundedNf, PureTerm,
};
use deltalf::parser::{elaborate, parse_term};
use deltalf::printer::print_term;
use deltalf::syntax::{alpha_eq, shift, Signature, Term};

fn sig() -> Signature {
    let mut s = Signature::new();
    s.declare_family("a", Term::Type);
    s.declare_object("c", Term::cfam("a"));
    s
}

fn fam_strat() -> impl Strategy<Value = Term> {
    let leaf = Just(Term::cfam("a"));
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(d, c)| Term::arrow(d, c)),
            (inner.clone(), inner.clone()).prop_map(|(d, c)| Term::rel_arrow(d, c)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::inter(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::union(l, r)),
        ]
    })
}

fn obj_strat() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::cobj("c")), (0usize..3).prop_map(Term::Var)];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (fam_strat(), inner.clone()).prop_map(|(d, b)| Term::lam("w", d, b)),
            (fam_strat(), inner.clone()).prop_map(|(d, b)| Term::rel_lam("w", d, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::rel_app(f, a)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::spair(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Term::scopair(l, r)),
            inner.clone().prop_map(Term::proj_l),
            inner.clone().prop_map(Term::proj_r),
            (fam_strat(), inner.clone()).prop_map(|(o, b)| Term::inj_l(o, b)),
            (fam_strat(), inner).prop_map(|(o, b)| Term::inj_r(o, b)),
        ]
    })
}

/// Close the term's free variables (indices < 3) under three binders.
fn closed_obj() -> impl Strategy<Value = Term> {
    obj_strat().prop_map(|t| {
        let mut t = t;
        for hint in ["v2", "v1", "v0"] {
            t = Term::lam(hint, Term::cfam("a"), t);
        }
        t
    })
}

fn pure_strat() -> impl Strategy<Value = PureTerm> {
    let leaf = prop_oneof![
        (0usize..3).prop_map(PureTerm::Var),
        Just(PureTerm::cnst("k")),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|b| PureTerm::lam("w", b)),
            (inner.clone(), inner).prop_map(|(f, a)| PureTerm::app(f, a)),
        ]
    })
}

fn closed_pure() -> impl Strategy<Value = PureTerm> {
    pure_strat().prop_map(|p| {
        let mut p = p;
        for hint in ["v2", "v1", "v0"] {
            p = PureTerm::lam(hint, p);
        }
        p
    })
}

proptest! {
    #[test]
    fn print_parse_roundtrip(t in closed_obj()) {
        let printed = print_term(&t);
        let reparsed = parse_term(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` does not reparse: {e}"));
        let back = elaborate(&sig(), &reparsed)
            .unwrap_or_else(|e| panic!("`{printed}` does not elaborate: {e}"));
        prop_assert_eq!(&back, &t, "`{}` re-elaborated differently", printed);
    }

    #[test]
    fn print_parse_roundtrip_family(t in fam_strat()) {
        let printed = print_term(&t);
        let reparsed = parse_term(&printed)
            .unwrap_or_else(|e| panic!("`{printed}` does not reparse: {e}"));
        let back = elaborate(&sig(), &reparsed)
            .unwrap_or_else(|e| panic!("`{printed}` does not elaborate: {e}"));
        prop_assert_eq!(&back, &t, "`{}` re-elaborated differently", printed);
    }

    #[test]
    fn shift_zero_is_identity(t in closed_obj()) {
        prop_assert_eq!(shift(&t, 0, 0), t);
    }

    #[test]
    fn alpha_eq_ignores_hints(t in closed_obj()) {
        prop_assert!(alpha_eq(&t, &t));
        // reprinting may freshen binder hints; alpha equality must not care
        let printed = print_term(&t);
        let back = elaborate(&sig(), &parse_term(&printed).unwrap()).unwrap();
        prop_assert!(alpha_eq(&t, &back));
    }

    #[test]
    fn essence_takes_left_component(t in closed_obj()) {
        let pair = Term::spair(t.clone(), t.clone());
        prop_assert_eq!(essence(&pair).unwrap(), essence(&t).unwrap());
        prop_assert_eq!(essence(&Term::proj_l(t.clone())).unwrap(), essence(&t).unwrap());
        prop_assert_eq!(essence(&Term::proj_r(t.clone())).unwrap(), essence(&t).unwrap());
    }

    #[test]
    fn eta_normalize_idempotent(p in closed_pure()) {
        let once = eta_normalize(&p);
        prop_assert_eq!(eta_normalize(&once), once.clone());
    }

    #[test]
    fn bounded_normal_forms_are_normal(p in closed_pure()) {
        if let BoundedNf::NormalForm(nf) = beta_normalize_bounded(&p, 200) {
            prop_assert!(pure_step(&nf).is_none(), "claimed normal form still steps");
        }
    }
}
