//! Pretty-printer for kernel terms and pure essence terms.
//!
//! Precedence, loosest to tightest: fun/sfun bodies, `->` and `>->`
//! (right-associative), `|`, `&`, application and `$` (left-associative),
//! prefix proj/inj, atoms. The parser follows the same table, so printing
//! then re-parsing is the identity on well-scoped terms.

use crate::essence::PureTerm;
use crate::syntax::{free_vars, shift, Hint, Term};

const PREC_LAM: u8 = 0;
const PREC_ARROW: u8 = 1;
const PREC_UNION: u8 = 2;
const PREC_INTER: u8 = 3;
const PREC_APP: u8 = 4;
const PREC_PREFIX: u8 = 5;
const PREC_ATOM: u8 = 6;

/// Display names for binders in scope, innermost first.
#[derive(Debug, Clone, Default)]
struct NameEnv {
    names: Vec<String>,
}

impl NameEnv {
    fn lookup(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    /// Pick a printable name for a binder, freshening on clash with any
    /// name already in scope.
    fn fresh(&self, hint: &Hint) -> String {
        let base = hint.name().unwrap_or("x").to_string();
        let mut name = base.clone();
        let mut n = 0usize;
        while self.names.iter().any(|m| *m == name) {
            n += 1;
            name = format!("{base}{n}");
        }
        name
    }

    fn pushed(&self, name: String) -> NameEnv {
        let mut names = self.names.clone();
        names.insert(0, name);
        NameEnv { names }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    go(t, &NameEnv::default(), PREC_LAM, &mut out);
    out
}

fn paren(need: bool, out: &mut String, body: impl FnOnce(&mut String)) {
    if need {
        out.push('(');
        body(out);
        out.push(')');
    } else {
        body(out);
    }
}

fn go(t: &Term, env: &NameEnv, prec: u8, out: &mut String) {
    match t {
        Term::Type => out.push_str("Type"),
        Term::ConstFam(n) | Term::ConstObj(n) => out.push_str(n),
        Term::Var(i) => match env.lookup(*i) {
            Some(n) => out.push_str(n),
            None => out.push_str(&format!("#{i}")),
        },
        Term::PiKind { hint, domain, body } | Term::PiFam { hint, domain, body } => {
            paren(prec > PREC_ARROW, out, |out| {
                if free_vars(body).contains(&0) {
                    let name = env.fresh(hint);
                    out.push('(');
                    out.push_str(&name);
                    out.push_str(" : ");
                    go(domain, env, PREC_LAM, out);
                    out.push_str(") -> ");
                    go(body, &env.pushed(name), PREC_ARROW, out);
                } else {
                    go(domain, env, PREC_UNION, out);
                    out.push_str(" -> ");
                    // body does not mention the binder, so unshift for a
                    // non-dependent arrow
                    go(&shift(body, 1, -1), env, PREC_ARROW, out);
                }
            });
        }
        Term::RelArrowFam { domain, codomain } => {
            paren(prec > PREC_ARROW, out, |out| {
                go(domain, env, PREC_UNION, out);
                out.push_str(" >-> ");
                go(codomain, env, PREC_ARROW, out);
            });
        }
        Term::UnionFam { left, right } => {
            paren(prec > PREC_UNION, out, |out| {
                go(left, env, PREC_UNION, out);
                out.push_str(" | ");
                go(right, env, PREC_INTER, out);
            });
        }
        Term::InterFam { left, right } => {
            paren(prec > PREC_INTER, out, |out| {
                go(left, env, PREC_INTER, out);
                out.push_str(" & ");
                go(right, env, PREC_APP, out);
            });
        }
        Term::FamApp { fam, arg } => {
            paren(prec > PREC_APP, out, |out| {
                go(fam, env, PREC_APP, out);
                out.push(' ');
                go(arg, env, PREC_ATOM, out);
            });
        }
        Term::App { func, arg } => {
            paren(prec > PREC_APP, out, |out| {
                go(func, env, PREC_APP, out);
                out.push(' ');
                go(arg, env, PREC_ATOM, out);
            });
        }
        Term::RelApp { func, arg } => {
            paren(prec > PREC_APP, out, |out| {
                go(func, env, PREC_APP, out);
                out.push_str(" $ ");
                go(arg, env, PREC_ATOM, out);
            });
        }
        Term::Lam { hint, domain, body } | Term::RelLam { hint, domain, body } => {
            paren(prec > PREC_LAM, out, |out| {
                let name = env.fresh(hint);
                out.push_str(if matches!(t, Term::Lam { .. }) {
                    "fun "
                } else {
                    "sfun "
                });
                out.push_str(&name);
                out.push_str(" : ");
                go(domain, env, PREC_LAM, out);
                out.push_str(" => ");
                go(body, &env.pushed(name), PREC_LAM, out);
            });
        }
        Term::SPair { left, right } => {
            out.push('<');
            go(left, env, PREC_LAM, out);
            out.push_str(", ");
            go(right, env, PREC_LAM, out);
            out.push('>');
        }
        Term::SCoPair { left, right } => {
            out.push('[');
            go(left, env, PREC_LAM, out);
            out.push_str(", ");
            go(right, env, PREC_LAM, out);
            out.push(']');
        }
        Term::ProjL(b) => {
            paren(prec > PREC_PREFIX, out, |out| {
                out.push_str("proj_l ");
                go(b, env, PREC_PREFIX, out);
            });
        }
        Term::ProjR(b) => {
            paren(prec > PREC_PREFIX, out, |out| {
                out.push_str("proj_r ");
                go(b, env, PREC_PREFIX, out);
            });
        }
        Term::InjL { other, body } => {
            paren(prec > PREC_PREFIX, out, |out| {
                out.push_str("inj_l [");
                go(other, env, PREC_LAM, out);
                out.push_str("] ");
                go(body, env, PREC_PREFIX, out);
            });
        }
        Term::InjR { other, body } => {
            paren(prec > PREC_PREFIX, out, |out| {
                out.push_str("inj_r [");
                go(other, env, PREC_LAM, out);
                out.push_str("] ");
                go(body, env, PREC_PREFIX, out);
            });
        }
    }
}

pub fn print_pure(p: &PureTerm) -> String {
    let mut out = String::new();
    go_pure(p, &NameEnv::default(), PREC_LAM, &mut out);
    out
}

fn go_pure(p: &PureTerm, env: &NameEnv, prec: u8, out: &mut String) {
    match p {
        PureTerm::Const(n) => out.push_str(n),
        PureTerm::Var(i) => match env.lookup(*i) {
            Some(n) => out.push_str(n),
            None => out.push_str(&format!("#{i}")),
        },
        PureTerm::Lam(hint, body) => {
            paren(prec > PREC_LAM, out, |out| {
                let name = env.fresh(hint);
                out.push_str("fun ");
                out.push_str(&name);
                out.push_str(" => ");
                go_pure(body, &env.pushed(name), PREC_LAM, out);
            });
        }
        PureTerm::App(f, a) => {
            paren(prec > PREC_APP, out, |out| {
                go_pure(f, env, PREC_APP, out);
                out.push(' ');
                go_pure(a, env, PREC_ATOM, out);
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Term {
        Term::cfam("sigma")
    }

    fn t() -> Term {
        Term::cfam("tau")
    }

    #[test]
    fn atoms() {
        assert_eq!(print_term(&Term::Type), "Type");
        assert_eq!(print_term(&s()), "sigma");
        assert_eq!(print_term(&Term::cobj("c")), "c");
    }

    #[test]
    fn rel_arrow() {
        assert_eq!(print_term(&Term::rel_arrow(s(), t())), "sigma >-> tau");
    }

    #[test]
    fn arrows_right_associate() {
        let ty = Term::arrow(s(), Term::arrow(t(), s()));
        assert_eq!(print_term(&ty), "sigma -> tau -> sigma");
        let ty2 = Term::arrow(Term::arrow(s(), t()), s());
        assert_eq!(print_term(&ty2), "(sigma -> tau) -> sigma");
    }

    #[test]
    fn inter_binds_tighter_than_union() {
        let ty = Term::union(Term::inter(s(), t()), s());
        assert_eq!(print_term(&ty), "sigma & tau | sigma");
        let ty2 = Term::inter(Term::union(s(), t()), s());
        assert_eq!(print_term(&ty2), "(sigma | tau) & sigma");
    }

    #[test]
    fn dependent_pi_prints_binder() {
        let ty = Term::pi_fam("x", s(), Term::fam_app(Term::cfam("p"), Term::Var(0)));
        assert_eq!(print_term(&ty), "(x : sigma) -> p x");
    }

    #[test]
    fn non_dependent_pi_prints_arrow() {
        let ty = Term::pi_fam("x", s(), shift(&t(), 0, 1));
        assert_eq!(print_term(&ty), "sigma -> tau");
    }

    #[test]
    fn lambda_and_projections() {
        let tm = Term::lam(
            "x",
            Term::inter(s(), Term::arrow(s(), t())),
            Term::app(Term::proj_r(Term::Var(0)), Term::proj_l(Term::Var(0))),
        );
        assert_eq!(
            print_term(&tm),
            "fun x : sigma & (sigma -> tau) => proj_r x (proj_l x)"
        );
    }

    #[test]
    fn pairs_and_injections() {
        let tm = Term::spair(
            Term::lam("x", s(), Term::Var(0)),
            Term::lam("x", t(), Term::Var(0)),
        );
        assert_eq!(print_term(&tm), "<fun x : sigma => x, fun x : tau => x>");
        let inj = Term::inj_l(t(), Term::cobj("c"));
        assert_eq!(print_term(&inj), "inj_l [tau] c");
    }

    #[test]
    fn shadowed_binders_freshen() {
        let tm = Term::lam("x", s(), Term::lam("x", t(), Term::app(Term::Var(1), Term::Var(0))));
        assert_eq!(
            print_term(&tm),
            "fun x : sigma => fun x1 : tau => x x1"
        );
    }

    #[test]
    fn pure_terms() {
        let id = PureTerm::lam("x", PureTerm::Var(0));
        assert_eq!(print_pure(&id), "fun x => x");
        let app = PureTerm::app(PureTerm::cnst("f"), PureTerm::cnst("a"));
        assert_eq!(print_pure(&app), "f a");
    }
}
