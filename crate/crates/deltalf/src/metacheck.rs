//! Metatheory harness: the erasure mappings into a simply structured pure
//! calculus, per-step reduction simulation checks, and a generative fuzzer
//! that builds terms accepted by the kernel by construction.

use crate::essence::{pure_reducts, pure_shift, PureTerm};
use crate::reduction::{normalize, one_step_reducts_capped, DEFAULT_FUEL};
use crate::syntax::{shift, Context, Hint, Signature, Term};
use crate::typing::Checker;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;

/// Simple types with a top constant, the image of the type-level erasure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErasedType {
    Top,
    Atom(String),
    Arrow(Box<ErasedType>, Box<ErasedType>),
    Inter(Box<ErasedType>, Box<ErasedType>),
    Union(Box<ErasedType>, Box<ErasedType>),
}

impl fmt::Display for ErasedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErasedType::Top => f.write_str("Top"),
            ErasedType::Atom(a) => f.write_str(a),
            ErasedType::Arrow(a, b) => write!(f, "({a}->{b})"),
            ErasedType::Inter(a, b) => write!(f, "({a}&{b})"),
            ErasedType::Union(a, b) => write!(f, "({a}|{b})"),
        }
    }
}

/// Type-level erasure: kinds and families to simple types. Dependencies
/// are dropped.
pub fn erase_type(t: &Term) -> ErasedType {
    match t {
        Term::Type => ErasedType::Top,
        Term::ConstFam(a) => ErasedType::Atom(a.clone()),
        Term::PiKind { domain, body, .. } | Term::PiFam { hint: _, domain, body } => {
            ErasedType::Arrow(Box::new(erase_type(domain)), Box::new(erase_type(body)))
        }
        Term::RelArrowFam { domain, codomain } => ErasedType::Arrow(
            Box::new(erase_type(domain)),
            Box::new(erase_type(codomain)),
        ),
        Term::FamApp { fam, .. } => erase_type(fam),
        Term::InterFam { left, right } => ErasedType::Inter(
            Box::new(erase_type(left)),
            Box::new(erase_type(right)),
        ),
        Term::UnionFam { left, right } => ErasedType::Union(
            Box::new(erase_type(left)),
            Box::new(erase_type(right)),
        ),
        other => panic!("erase_type applied to a non-type term: {other:?}"),
    }
}

/// Name of the product-encoding constant.
fn c_times() -> PureTerm {
    PureTerm::cnst("c_x")
}

/// Name of the per-type product constant for dependent products.
fn c_pi(erased_domain: &ErasedType) -> PureTerm {
    PureTerm::cnst(format!("c_{{{erased_domain}}}"))
}

/// Object- and family-level erasure into the pure calculus. Abstractions
/// gain a vacuous redex carrying the erased domain, so every source redex
/// maps to at least one target redex.
pub fn erase_obj(t: &Term) -> PureTerm {
    match t {
        Term::ConstFam(a) => PureTerm::cnst(a.clone()),
        Term::ConstObj(c) => PureTerm::cnst(c.clone()),
        Term::Var(i) => PureTerm::Var(*i),
        Term::FamApp { fam, arg } => {
            PureTerm::app(erase_obj(fam), erase_obj(arg))
        }
        Term::App { func, arg } | Term::RelApp { func, arg } => {
            PureTerm::app(erase_obj(func), erase_obj(arg))
        }
        Term::Lam { hint, domain, body } | Term::RelLam { hint, domain, body } => {
            // (fun y => fun x => body') domain' with y fresh: body' binds x
            // at 0 and sees y at 1, so lift everything above the binder
            let body_erased = pure_shift(&erase_obj(body), 1, 1);
            PureTerm::app(
                PureTerm::lam(
                    "y",
                    PureTerm::Lam(hint.clone(), Box::new(body_erased)),
                ),
                erase_obj(domain),
            )
        }
        Term::PiFam { hint, domain, body } => PureTerm::app(
            PureTerm::app(c_pi(&erase_type(domain)), erase_obj(domain)),
            PureTerm::Lam(hint.clone(), Box::new(erase_obj(body))),
        ),
        Term::RelArrowFam { domain, codomain } => PureTerm::app(
            PureTerm::app(c_times(), erase_obj(domain)),
            erase_obj(codomain),
        ),
        Term::InterFam { left, right } | Term::UnionFam { left, right } => PureTerm::app(
            PureTerm::app(c_times(), erase_obj(left)),
            erase_obj(right),
        ),
        Term::SPair { left, .. } | Term::SCoPair { left, .. } => erase_obj(left),
        Term::ProjL(b) | Term::ProjR(b) => erase_obj(b),
        Term::InjL { other, body } | Term::InjR { other, body } => {
            // vacuous redex over the annotation
            let lifted = pure_shift(&erase_obj(body), 0, 1);
            PureTerm::app(PureTerm::lam("x", lifted), erase_obj(other))
        }
        Term::Type | Term::PiKind { .. } => {
            panic!("erase_obj applied to a kind")
        }
    }
}

/// Whether the erasures of `d` and `d2` are joined by a beta path from the
/// former to the latter, and how many steps the shortest such path takes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    pub related: bool,
    pub steps: Option<usize>,
}

/// Breadth-first search for the erasure of `d2` among bounded beta
/// descendants of the erasure of `d`. Intended for `d` stepping to `d2` in
/// one source step; projection and pair steps may need zero target steps.
pub fn simulation_check(d: &Term, d2: &Term, max_steps: usize) -> SimulationReport {
    let start = erase_obj(d);
    let goal = erase_obj(d2);
    let mut frontier = vec![start];
    let mut seen: Vec<PureTerm> = frontier.clone();
    for depth in 0..=max_steps {
        if frontier.iter().any(|t| *t == goal) {
            return SimulationReport {
                related: true,
                steps: Some(depth),
            };
        }
        let mut next = Vec::new();
        for t in &frontier {
            for r in pure_reducts(t) {
                if !seen.contains(&r) {
                    seen.push(r.clone());
                    next.push(r);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    SimulationReport {
        related: false,
        steps: None,
    }
}

/// One output of the generative fuzzer: a term the kernel is guaranteed to
/// accept, with the signature and context it lives in.
#[derive(Debug, Clone)]
pub struct FuzzSample {
    pub signature: Signature,
    pub context: Context,
    pub term: Term,
    pub classifier: Term,
}

/// The fixed signature all fuzzed terms live in: three atoms, inhabitants,
/// a couple of functions, and one relevant axiom.
pub fn fuzz_signature() -> Signature {
    let mut sig = Signature::new();
    sig.declare_family("s", Term::Type);
    sig.declare_family("t", Term::Type);
    sig.declare_family("u", Term::Type);
    sig.declare_object("c1", Term::cfam("s"));
    sig.declare_object("c2", Term::cfam("t"));
    sig.declare_object("f", Term::arrow(Term::cfam("s"), Term::cfam("t")));
    sig.declare_object("g", Term::arrow(Term::cfam("s"), Term::cfam("s")));
    sig.declare_object("rel_st", Term::rel_arrow(Term::cfam("s"), Term::cfam("t")));
    sig
}

fn pick_atom(rng: &mut ChaCha8Rng) -> Term {
    let pool = [Term::cfam("s"), Term::cfam("t"), Term::cfam("u")];
    pool.choose(rng).cloned().expect("non-empty pool")
}

/// Synthesis-mode generation: every branch produces a term together with
/// its type, so acceptance is by construction. Returns None when the
/// chosen branch cannot be completed within the budget.
fn gen_obj(rng: &mut ChaCha8Rng, ctx: &mut Vec<Term>, size: usize) -> Option<(Term, Term)> {
    // leaves: context variables and inhabited constants
    if size == 0 || rng.gen_bool(0.25) {
        let mut leaves: Vec<(Term, Term)> = vec![
            (Term::cobj("c1"), Term::cfam("s")),
            (Term::cobj("c2"), Term::cfam("t")),
            (Term::cobj("f"), Term::arrow(Term::cfam("s"), Term::cfam("t"))),
            (Term::cobj("g"), Term::arrow(Term::cfam("s"), Term::cfam("s"))),
        ];
        for (i, ty) in ctx.iter().rev().enumerate() {
            // context entries are stored outermost-first; index from the
            // inside, shifting into the current scope
            leaves.push((Term::Var(i), shift(ty, 0, (i + 1) as isize)));
        }
        return leaves.choose(rng).cloned();
    }
    match rng.gen_range(0..9u8) {
        // plain abstraction
        0 => {
            let dom = pick_atom(rng);
            ctx.push(dom.clone());
            let body = gen_obj(rng, ctx, size - 1);
            ctx.pop();
            let (b, bt) = body?;
            Some((
                Term::lam("v", dom.clone(), b),
                Term::pi_fam("v", dom, bt),
            ))
        }
        // beta redex: apply a freshly built abstraction to a matching
        // argument; keeps the subject reduction suite honest
        1 => {
            let (arg, at) = gen_obj(rng, ctx, size / 2)?;
            ctx.push(at.clone());
            let body = gen_obj(rng, ctx, size / 2);
            ctx.pop();
            let (b, bt) = body?;
            let func = Term::lam("v", at, b);
            let result_ty = crate::syntax::subst(&bt, 0, &arg);
            Some((Term::app(func, arg), result_ty))
        }
        // constant application at an atom
        2 => {
            let (arg, at) = gen_obj(rng, ctx, size - 1)?;
            if at == Term::cfam("s") {
                let c = if rng.gen_bool(0.5) { "f" } else { "g" };
                let cod = if c == "f" { "t" } else { "s" };
                Some((Term::app(Term::cobj(c), arg), Term::cfam(cod)))
            } else {
                None
            }
        }
        // strong pair by duplication, sometimes decorated with a
        // projection so both shapes appear; duplication doubles the term,
        // so it is charged half the budget to keep sizes polynomial
        3 => {
            let (d, dt) = gen_obj(rng, ctx, size / 2)?;
            if rng.gen_bool(0.5) {
                Some((
                    Term::spair(d.clone(), d.clone()),
                    Term::inter(dt.clone(), dt),
                ))
            } else {
                let inner = Term::spair(d.clone(), d.clone());
                Some((
                    Term::spair(d, Term::proj_l(inner)),
                    Term::inter(dt.clone(), dt),
                ))
            }
        }
        // projection of a duplicated pair; charged like branch 3
        4 => {
            let (d, dt) = gen_obj(rng, ctx, size / 2)?;
            let pair = Term::spair(d.clone(), d);
            let proj = if rng.gen_bool(0.5) {
                Term::proj_l(pair)
            } else {
                Term::proj_r(pair)
            };
            Some((proj, dt))
        }
        // injection with a random other branch
        5 => {
            let (d, dt) = gen_obj(rng, ctx, size - 1)?;
            let other = pick_atom(rng);
            if rng.gen_bool(0.5) {
                Some((
                    Term::inj_l(other.clone(), d),
                    Term::union(dt, other),
                ))
            } else {
                Some((
                    Term::inj_r(other.clone(), d),
                    Term::union(other, dt),
                ))
            }
        }
        // relevant identity, occasionally applied
        6 => {
            let dom = pick_atom(rng);
            let lam = Term::rel_lam("v", dom.clone(), Term::Var(0));
            let ty = Term::rel_arrow(dom.clone(), dom.clone());
            if rng.gen_bool(0.5) {
                Some((lam, ty))
            } else {
                let (arg, at) = gen_obj(rng, ctx, size - 1)?;
                if at == dom {
                    Some((Term::rel_app(lam, arg), dom))
                } else {
                    Some((lam, ty))
                }
            }
        }
        // relevant axiom application
        7 => {
            let (arg, at) = gen_obj(rng, ctx, size - 1)?;
            if at == Term::cfam("s") {
                Some((
                    Term::rel_app(Term::cobj("rel_st"), arg),
                    Term::cfam("t"),
                ))
            } else {
                None
            }
        }
        // union elimination: the commuting co-pair applied to an
        // injection; the type is duplicated into the branch domains, so
        // this is charged half the budget as well
        _ => {
            let (d, dt) = gen_obj(rng, ctx, size / 2)?;
            let other = pick_atom(rng);
            let (sigma, tau, arg) = if rng.gen_bool(0.5) {
                (dt.clone(), other.clone(), Term::inj_l(other.clone(), d))
            } else {
                (other.clone(), dt.clone(), Term::inj_r(other.clone(), d))
            };
            let copair = Term::scopair(
                Term::lam(
                    "a",
                    sigma.clone(),
                    Term::inj_r(shift(&tau, 0, 1), Term::Var(0)),
                ),
                Term::lam(
                    "a",
                    tau.clone(),
                    Term::inj_l(shift(&sigma, 0, 1), Term::Var(0)),
                ),
            );
            Some((
                Term::app(copair, arg),
                Term::union(tau, sigma),
            ))
        }
    }
}

/// Generate one accepted term, retrying failed branches a bounded number
/// of times.
pub fn fuzz_well_typed(seed: u64, size: usize) -> Option<FuzzSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = fuzz_signature();
    for _ in 0..50 {
        let mut ctx_types: Vec<Term> = Vec::new();
        // between zero and two ambient variables
        for i in 0..rng.gen_range(0..3usize) {
            let _ = i;
            ctx_types.push(pick_atom(&mut rng));
        }
        let base = ctx_types.clone();
        if let Some((term, classifier)) = gen_obj(&mut rng, &mut ctx_types, size) {
            let mut context = Context::new();
            for (i, ty) in base.iter().enumerate() {
                context.push(Hint::named(format!("z{i}")), ty.clone());
            }
            return Some(FuzzSample {
                signature: sig,
                context,
                term,
                classifier,
            });
        }
    }
    None
}

/// Aggregate result of the property suites, used by the CLI.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub samples: usize,
    pub skipped: usize,
    pub acceptance_failures: Vec<String>,
    pub subject_reduction_failures: Vec<String>,
    pub confluence_failures: Vec<String>,
    pub normalization_failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.acceptance_failures.is_empty()
            && self.subject_reduction_failures.is_empty()
            && self.confluence_failures.is_empty()
            && self.normalization_failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples: {}, skipped: {}", self.samples, self.skipped)?;
        let suites = [
            ("acceptance", &self.acceptance_failures),
            ("subject reduction", &self.subject_reduction_failures),
            ("local confluence", &self.confluence_failures),
            ("normalization", &self.normalization_failures),
        ];
        for (name, failures) in suites {
            if failures.is_empty() {
                writeln!(f, "{name}: pass")?;
            } else {
                writeln!(f, "{name}: FAIL ({} cases)", failures.len())?;
                for c in failures.iter().take(3) {
                    writeln!(f, "  counterexample: {c}")?;
                }
            }
        }
        Ok(())
    }
}

/// Pick the smallest subterm of `t` that still fails `still_fails`, for
/// counterexample reporting.
fn shrink(t: &Term, still_fails: &dyn Fn(&Term) -> bool) -> Term {
    let mut current = t.clone();
    loop {
        let mut advanced = false;
        for (child, crosses) in current.children() {
            if !crosses && still_fails(child) {
                current = child.clone();
                advanced = true;
                break;
            }
        }
        if !advanced {
            return current;
        }
    }
}

/// Run every suite over `seeds` generated samples of the given size.
pub fn run_suites(seeds: u64, size: usize) -> SuiteReport {
    let checker = Checker::default();
    let mut report = SuiteReport::default();
    for seed in 0..seeds {
        let sample = match fuzz_well_typed(seed, size) {
            Some(s) => s,
            None => {
                report.skipped += 1;
                continue;
            }
        };
        report.samples += 1;
        let FuzzSample {
            signature,
            context,
            term,
            classifier,
        } = &sample;
        if let Err(e) = checker.check_type(signature, context, term, classifier) {
            let failing = shrink(term, &|t| {
                checker.infer_type(signature, context, t).is_err()
            });
            report.acceptance_failures.push(format!(
                "seed {seed}: {} ({e})",
                crate::printer::print_term(&failing)
            ));
            continue;
        }
        // subject reduction: one-step reducts re-check at the original
        // classifier; capped because congruence steps in nested pairs
        // make the reduct set quadratic in the term size
        for reduct in one_step_reducts_capped(term, 64) {
            if let Err(e) = checker.check_type(signature, context, &reduct, classifier) {
                report.subject_reduction_failures.push(format!(
                    "seed {seed}: {} -> {} ({e})",
                    crate::printer::print_term(term),
                    crate::printer::print_term(&reduct)
                ));
            }
        }
        match crate::reduction::check_local_confluence(term, DEFAULT_FUEL) {
            Ok(true) => {}
            _ => report.confluence_failures.push(format!(
                "seed {seed}: {}",
                crate::printer::print_term(term)
            )),
        }
        if normalize(term, DEFAULT_FUEL).is_err() {
            report.normalization_failures.push(format!(
                "seed {seed}: {}",
                crate::printer::print_term(term)
            ));
        }
    }
    report
}

/// The object constants appearing in an erased term; exposed for tests.
pub fn erased_constants(p: &PureTerm) -> BTreeSet<String> {
    match p {
        PureTerm::Const(c) => BTreeSet::from([c.clone()]),
        PureTerm::Var(_) => BTreeSet::new(),
        PureTerm::Lam(_, b) => erased_constants(b),
        PureTerm::App(f, a) => {
            let mut s = erased_constants(f);
            s.extend(erased_constants(a));
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::step;

    fn s() -> Term {
        Term::cfam("s")
    }

    #[test]
    fn erase_type_examples() {
        assert_eq!(erase_type(&Term::Type), ErasedType::Top);
        let pi = Term::pi_fam("x", s(), Term::cfam("t"));
        assert_eq!(
            erase_type(&pi),
            ErasedType::Arrow(
                Box::new(ErasedType::Atom("s".into())),
                Box::new(ErasedType::Atom("t".into()))
            )
        );
        // dependency dropped
        let app = Term::fam_app(Term::cfam("p"), Term::cobj("c1"));
        assert_eq!(erase_type(&app), ErasedType::Atom("p".into()));
        let k = Term::pi_kind("x", s(), Term::Type);
        assert_eq!(
            erase_type(&k),
            ErasedType::Arrow(
                Box::new(ErasedType::Atom("s".into())),
                Box::new(ErasedType::Top)
            )
        );
    }

    #[test]
    fn erase_obj_examples() {
        assert_eq!(erase_obj(&Term::cobj("c")), PureTerm::cnst("c"));
        // projections erase to their subject
        let pair = Term::spair(Term::cobj("a"), Term::cobj("a"));
        assert_eq!(erase_obj(&Term::proj_l(pair.clone())), PureTerm::cnst("a"));
        assert_eq!(erase_obj(&pair), PureTerm::cnst("a"));
        // abstraction gains a vacuous redex over the erased domain
        let lam = Term::lam("x", s(), Term::Var(0));
        let expected = PureTerm::app(
            PureTerm::lam("y", PureTerm::lam("x", PureTerm::Var(0))),
            PureTerm::cnst("s"),
        );
        assert_eq!(erase_obj(&lam), expected);
    }

    #[test]
    fn erased_lambda_shifts_captured_variables() {
        // fun x : s => z where z is Var(0) outside: inside the double
        // binder it must point past both
        let lam = Term::lam("x", s(), Term::Var(1));
        let e = erase_obj(&lam);
        let expected = PureTerm::app(
            PureTerm::lam("y", PureTerm::lam("x", PureTerm::Var(2))),
            PureTerm::cnst("s"),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn simulation_beta_step() {
        let redex = Term::app(Term::lam("x", s(), Term::Var(0)), Term::cobj("c1"));
        let (next, _) = step(&redex).unwrap();
        let r = simulation_check(&redex, &next, 10);
        assert!(r.related);
        assert!(r.steps.unwrap() >= 1);
    }

    #[test]
    fn simulation_projection_step_needs_no_target_steps() {
        let pair = Term::spair(Term::cobj("c1"), Term::cobj("c1"));
        let redex = Term::proj_l(pair);
        let (next, _) = step(&redex).unwrap();
        let r = simulation_check(&redex, &next, 10);
        assert!(r.related);
        assert_eq!(r.steps, Some(0));
    }

    #[test]
    fn simulation_relevant_beta() {
        let redex = Term::rel_app(
            Term::rel_lam("x", s(), Term::Var(0)),
            Term::cobj("c1"),
        );
        let (next, _) = step(&redex).unwrap();
        let r = simulation_check(&redex, &next, 10);
        assert!(r.related);
        assert!(r.steps.unwrap() >= 1);
    }

    #[test]
    fn fuzzed_terms_check() {
        let checker = Checker::default();
        let mut produced = 0;
        for seed in 0..200u64 {
            if let Some(sample) = fuzz_well_typed(seed, 8) {
                produced += 1;
                checker
                    .check_type(
                        &sample.signature,
                        &sample.context,
                        &sample.term,
                        &sample.classifier,
                    )
                    .unwrap_or_else(|e| {
                        panic!(
                            "seed {seed} generated a rejected term {}: {e}",
                            crate::printer::print_term(&sample.term)
                        )
                    });
            }
        }
        assert!(produced > 150, "generator failed too often: {produced}/200");
    }

    #[test]
    fn size_zero_gives_leaf() {
        let sample = fuzz_well_typed(3, 0).unwrap();
        assert!(matches!(
            sample.term,
            Term::Var(_) | Term::ConstObj(_)
        ));
    }

    #[test]
    fn suites_pass_at_small_scale() {
        let report = run_suites(60, 6);
        assert!(report.passed(), "{report}");
        assert!(report.samples > 40);
    }
}
