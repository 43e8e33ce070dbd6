//! Release gate. Each criterion prints one pass/fail line; the test fails
//! if any criterion does. Run with `-- --nocapture` to see the lines on a
//! green run.

use deltalf::essence::{beta_normalize_bounded, essence, BoundedNf, PureTerm};
use deltalf::metacheck::{fuzz_well_typed, run_suites, FuzzSample};
use deltalf::parser::{elaborate, parse, parse_term, Command};
use deltalf::printer::print_term;
use deltalf::reduction::{one_step_reducts, step, DEFAULT_FUEL};
use deltalf::session::Session;
use deltalf::subtyping::{
    closure_oracle, closure_oracle_with_axioms, decide_sub, decide_sub_all,
    encode_refinement_signature, inhabit_relevant, RefinementDecl, SimpleType, SubDeriv,
};
use deltalf::syntax::{Context, Signature, Term};
use deltalf::typing::Checker;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn run_corpus_file(name: &str) -> Result<Vec<String>, String> {
    let path = corpus_dir().join(name);
    let src = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
    let mut session = Session::new();
    session.base_dir = corpus_dir();
    session
        .run_source(&src)
        .map(|o| o.lines)
        .map_err(|e| format!("{name}: {e}"))
}

struct Gate {
    failed: Vec<String>,
}

impl Gate {
    fn run(&mut self, n: usize, label: &str, criterion: impl FnOnce() -> Vec<String>) {
        let started = Instant::now();
        let errs = criterion();
        let secs = started.elapsed().as_secs_f32();
        if errs.is_empty() {
            println!("criterion {n} ({label}): pass [{secs:.1}s]");
        } else {
            self.report(n, label, errs);
        }
    }

    fn report(&mut self, n: usize, label: &str, errs: Vec<String>) {
        if errs.is_empty() {
            println!("criterion {n} ({label}): pass");
        } else {
            println!("criterion {n} ({label}): FAIL");
            for e in errs.iter().take(5) {
                println!("    {e}");
            }
            self.failed.push(format!("criterion {n} ({label})"));
        }
    }
}

// ---- criterion 1: corpus files check with the expected classifiers ----

fn corpus_classifiers() -> Vec<String> {
    let expectations: &[(&str, &[&str])] = &[
        (
            "auto_application.dlf",
            &[": sigma & (sigma -> tau) -> tau"],
        ),
        ("poly_id.dlf", &[": (sigma -> sigma) & (tau -> tau)"]),
        ("union_comm.dlf", &[": sigma | tau -> tau | sigma"]),
        ("is0_test.dlf", &["Is_0_Test : F"]),
        ("pierce.dlf", &[": a (y z) (y z)"]),
        ("harrop.dlf", &["bchain_impl_r declared"]),
        ("natded.dlf", &[": (A : o) -> nf0 (imp A A)"]),
        ("delta_omega.dlf", &[") : sigma"]),
    ];
    let mut errs = Vec::new();
    for (file, needles) in expectations {
        match run_corpus_file(file) {
            Ok(lines) => {
                for needle in *needles {
                    if !lines.iter().any(|l| l.contains(needle)) {
                        errs.push(format!("{file}: no output line contains `{needle}`"));
                    }
                }
            }
            Err(e) => errs.push(e),
        }
    }
    errs
}

// ---- criterion 2: the union elimination counterexample term ----

const PIERCE_TERM: &str = "[fun v1 : s1 => proj_l w v1 v1, fun v2 : s2 => proj_r w v2 v2] \
                           ((fun v3 : rho -> s1 | s2 => v3) y z)";

fn pierce_signature() -> Result<Signature, String> {
    let src = std::fs::read_to_string(corpus_dir().join("pierce.dlf"))
        .map_err(|e| e.to_string())?;
    let mut session = Session::new();
    session.base_dir = corpus_dir();
    session.run_source(&src).map_err(|e| e.to_string())?;
    Ok(session.signature)
}

fn pierce_behavior() -> Vec<String> {
    let mut errs = Vec::new();
    let sig = match pierce_signature() {
        Ok(s) => s,
        Err(e) => return vec![e],
    };
    let checker = Checker::default();
    let ctx = Context::new();
    let term = elaborate(&sig, &parse_term(PIERCE_TERM).unwrap()).unwrap();
    let ty = match checker.infer_type(&sig, &ctx, &term) {
        Ok(t) => t,
        Err(e) => return vec![format!("term does not type-check: {e}")],
    };
    let reducts = one_step_reducts(&term);
    if reducts.len() != 1 {
        errs.push(format!("expected exactly one reduct, got {}", reducts.len()));
    }
    // the whole chain stays at the original type
    let mut cur = term.clone();
    let mut guard = 0;
    while let Some((next, _)) = step(&cur) {
        if checker.check_type(&sig, &ctx, &next, &ty).is_err() {
            errs.push(format!(
                "subject reduction lost at {}",
                print_term(&next)
            ));
            break;
        }
        cur = next;
        guard += 1;
        if guard > 100 {
            errs.push("reduction chain did not terminate".into());
            break;
        }
    }
    // naive elimination forks: applying either projection of w directly
    // to the union-typed argument must be rejected
    for fork in ["proj_l w (y z) (y z)", "proj_r w (y z) (y z)"] {
        let t = elaborate(&sig, &parse_term(fork).unwrap()).unwrap();
        if checker.infer_type(&sig, &ctx, &t).is_ok() {
            errs.push(format!("untypable fork was accepted: {fork}"));
        }
    }
    errs
}

// ---- criterion 3: the typable term with divergent essence ----

fn divergent_essence() -> Vec<String> {
    let mut errs = Vec::new();
    let mut sig = Signature::new();
    sig.declare_family("sigma", Term::Type);
    sig.declare_object(
        "c1",
        Term::rel_arrow(
            Term::cfam("sigma"),
            Term::arrow(Term::cfam("sigma"), Term::cfam("sigma")),
        ),
    );
    sig.declare_object(
        "c2",
        Term::rel_arrow(
            Term::arrow(Term::cfam("sigma"), Term::cfam("sigma")),
            Term::cfam("sigma"),
        ),
    );
    let src = "(fun x : sigma => (c1 $ x) x) (c2 $ (fun x : sigma => (c1 $ x) x))";
    let term = elaborate(&sig, &parse_term(src).unwrap()).unwrap();
    let checker = Checker::default();
    match checker.infer_type(&sig, &Context::new(), &term) {
        Ok(ty) => {
            if ty != Term::cfam("sigma") {
                errs.push(format!("typed at {}, wanted sigma", print_term(&ty)));
            }
        }
        Err(e) => errs.push(format!("does not type-check: {e}")),
    }
    let self_app = PureTerm::lam("x", PureTerm::app(PureTerm::Var(0), PureTerm::Var(0)));
    let omega = PureTerm::app(self_app.clone(), self_app);
    let ess = essence(&term).unwrap();
    if ess != omega {
        errs.push("essence is not the self-application loop".into());
    }
    match beta_normalize_bounded(&ess, 10_000) {
        BoundedNf::OutOfFuel(_) => {}
        BoundedNf::NormalForm(nf) => errs.push(format!(
            "essence unexpectedly normalized to {:?}",
            nf
        )),
    }
    errs
}

// ---- criteria 4 and 5: subtype decision vs. oracle, and coercions ----

fn atoms_signature() -> Signature {
    let mut sig = Signature::new();
    sig.declare_family("a", Term::Type);
    sig.declare_family("b", Term::Type);
    sig
}

fn subterm_closure(t: &SimpleType, out: &mut BTreeSet<SimpleType>) {
    out.insert(t.clone());
    match t {
        SimpleType::Atom(_) => {}
        SimpleType::Arrow(x, y) | SimpleType::Inter(x, y) | SimpleType::Union(x, y) => {
            subterm_closure(x, out);
            subterm_closure(y, out);
        }
    }
}

fn types_to_depth(depth: usize) -> Vec<SimpleType> {
    let mut levels: Vec<Vec<SimpleType>> =
        vec![vec![SimpleType::atom("a"), SimpleType::atom("b")]];
    for d in 1..=depth {
        let prev: Vec<SimpleType> = levels.iter().flatten().cloned().collect();
        let mut next = Vec::new();
        for x in &prev {
            for y in &prev {
                next.push(SimpleType::arrow(x.clone(), y.clone()));
                next.push(SimpleType::inter(x.clone(), y.clone()));
                next.push(SimpleType::union(x.clone(), y.clone()));
            }
        }
        levels.push(next);
        let _ = d;
    }
    levels.into_iter().flatten().collect()
}

fn random_type(rng: &mut ChaCha8Rng, depth: usize) -> SimpleType {
    if depth == 0 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.5) {
            SimpleType::atom("a")
        } else {
            SimpleType::atom("b")
        }
    } else {
        let x = random_type(rng, depth - 1);
        let y = random_type(rng, depth - 1);
        match rng.gen_range(0..3u8) {
            0 => SimpleType::arrow(x, y),
            1 => SimpleType::inter(x, y),
            _ => SimpleType::union(x, y),
        }
    }
}

/// Close a universe under the intermediates derivations travel through:
/// idempotence doubles and arrow distribution conclusions, re-closed
/// under subterms. Both the decision procedure and the oracle need these
/// in scope for bound arguments like `b & a | a & a <= a`.
fn enrich(u: &BTreeSet<SimpleType>) -> BTreeSet<SimpleType> {
    let mut out = u.clone();
    for s in u {
        subterm_closure(&SimpleType::inter(s.clone(), s.clone()), &mut out);
        subterm_closure(&SimpleType::union(s.clone(), s.clone()), &mut out);
        if let SimpleType::Inter(l, r) = s {
            if let (SimpleType::Arrow(s1, t1), SimpleType::Arrow(s2, t2)) = (&**l, &**r) {
                if s1 == s2 {
                    subterm_closure(
                        &SimpleType::arrow(
                            (**s1).clone(),
                            SimpleType::inter((**t1).clone(), (**t2).clone()),
                        ),
                        &mut out,
                    );
                }
                if t1 == t2 {
                    subterm_closure(
                        &SimpleType::arrow(
                            SimpleType::union((**s1).clone(), (**s2).clone()),
                            (**t1).clone(),
                        ),
                        &mut out,
                    );
                }
            }
        }
    }
    out
}

/// The universes shared by criteria 4 and 5: the full depth-one space
/// plus seeded random subterm-closed families drawn from depth three.
fn test_universes() -> Vec<BTreeSet<SimpleType>> {
    let mut universes = Vec::new();
    universes.push(enrich(&types_to_depth(1).into_iter().collect()));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let mut u = BTreeSet::new();
        for _ in 0..6 {
            let t = random_type(&mut rng, 3);
            subterm_closure(&t, &mut u);
        }
        universes.push(enrich(&u));
    }
    universes
}

fn oracle_equivalence(derivable: &mut Vec<(SimpleType, SimpleType)>) -> Vec<String> {
    let mut errs = Vec::new();
    let sig = atoms_signature();
    let started = Instant::now();
    let mut pairs = 0usize;
    let mut sample_rng = ChaCha8Rng::seed_from_u64(11);
    for universe in test_universes() {
        let oracle = closure_oracle(&universe);
        let table = decide_sub_all(&sig, &universe);
        for l in &universe {
            for r in &universe {
                pairs += 1;
                let key = (l.clone(), r.clone());
                match table.get(&key) {
                    Some(d) => {
                        if !oracle.contains(&key) {
                            errs.push(format!("decided but not in oracle: {l} <= {r}"));
                        } else if !d.validate(&sig) || d.conclusion() != key {
                            errs.push(format!("bad derivation for {l} <= {r}"));
                        } else {
                            derivable.push(key);
                        }
                    }
                    None => {
                        if oracle.contains(&key) {
                            errs.push(format!("oracle-only pair missed: {l} <= {r}"));
                        }
                    }
                }
            }
        }
        // the per-query entry point must agree with the shared table
        let members: Vec<SimpleType> = universe.iter().cloned().collect();
        for _ in 0..10 {
            let l = &members[sample_rng.gen_range(0..members.len())];
            let r = &members[sample_rng.gen_range(0..members.len())];
            if decide_sub(&sig, l, r).is_some() != oracle.contains(&(l.clone(), r.clone())) {
                errs.push(format!("per-query disagreement on {l} <= {r}"));
            }
        }
    }
    if pairs < 2000 {
        errs.push(format!("only {pairs} pairs exercised"));
    }
    if started.elapsed().as_secs() >= 60 {
        errs.push(format!("oracle sweep too slow: {:?}", started.elapsed()));
    }
    // named instances: projections, the union distribution arrow, and
    // reflexivity hold; the intersection-over-union distribution does not
    let a = || SimpleType::atom("a");
    let b = || SimpleType::atom("b");
    let must_hold = [
        (SimpleType::inter(a(), b()), a()),
        (
            SimpleType::inter(
                SimpleType::arrow(a(), b()),
                SimpleType::arrow(b(), b()),
            ),
            SimpleType::arrow(SimpleType::union(a(), b()), b()),
        ),
        (SimpleType::arrow(a(), b()), SimpleType::arrow(a(), b())),
    ];
    for (l, r) in must_hold {
        if decide_sub(&sig, &l, &r).is_none() {
            errs.push(format!("expected derivable: {l} <= {r}"));
        }
    }
    let dist_l = SimpleType::inter(a(), SimpleType::union(b(), SimpleType::arrow(a(), a())));
    let dist_r = SimpleType::union(
        SimpleType::inter(a(), b()),
        SimpleType::inter(a(), SimpleType::arrow(a(), a())),
    );
    if decide_sub(&sig, &dist_l, &dist_r).is_some() {
        errs.push(format!("distribution law wrongly derivable: {dist_l} <= {dist_r}"));
    }
    errs
}

fn coercion_soundness(derivable: &[(SimpleType, SimpleType)]) -> Vec<String> {
    let sig = atoms_signature();
    // the same pair shows up in many universes; check each witness once
    let unique: Vec<&(SimpleType, SimpleType)> =
        derivable.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4);
    let chunk = unique.len().div_ceil(workers.max(1));
    let mut errs = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in unique.chunks(chunk.max(1)) {
            let sig = &sig;
            handles.push(scope.spawn(move || {
                let checker = Checker::default();
                let ctx = Context::new();
                let mut local = Vec::new();
                for (l, r) in part {
                    let expected = Term::rel_arrow(l.to_family(), r.to_family());
                    match inhabit_relevant(sig, l, r) {
                        Some(witness) => {
                            if let Err(e) = checker.check_type(sig, &ctx, &witness, &expected) {
                                local.push(format!("coercion for {l} <= {r} rejected: {e}"));
                            }
                        }
                        None => local.push(format!("no coercion produced for {l} <= {r}")),
                    }
                }
                local
            }));
        }
        for h in handles {
            errs.extend(h.join().unwrap());
        }
    });
    errs
}

// ---- criterion 6: property suites at scale ----

fn property_suites() -> Vec<String> {
    let mut errs = Vec::new();
    let started = Instant::now();
    let report = run_suites(1200, 30);
    if report.samples < 1000 {
        errs.push(format!("only {} samples generated", report.samples));
    }
    if !report.passed() {
        errs.push(format!("suite failures:\n{report}"));
    }
    // unicity: the inferred classifier is definitionally stable
    let checker = Checker::default();
    for seed in 0..300u64 {
        let Some(FuzzSample {
            signature,
            context,
            term,
            classifier,
        }) = fuzz_well_typed(seed, 30)
        else {
            continue;
        };
        match checker.infer_type(&signature, &context, &term) {
            Ok(inferred) => {
                match deltalf::reduction::def_eq(&inferred, &classifier, DEFAULT_FUEL) {
                    Ok(true) => {}
                    _ => errs.push(format!("seed {seed}: inferred type drifted")),
                }
            }
            Err(e) => errs.push(format!("seed {seed}: inference failed: {e}")),
        }
    }
    if started.elapsed().as_secs() >= 300 {
        errs.push(format!("suites too slow: {:?}", started.elapsed()));
    }
    errs
}

// ---- criterion 7: refinement declarations become subtype axioms ----

fn refinement_encoding() -> Vec<String> {
    let mut errs = Vec::new();
    let decls = [
        RefinementDecl::Atom("alpha".into()),
        RefinementDecl::Atom("gamma".into()),
        RefinementDecl::Atom("pi".into()),
        RefinementDecl::Sub {
            sub: "alpha".into(),
            sup: "gamma".into(),
        },
        RefinementDecl::Sub {
            sub: "alpha".into(),
            sup: "pi".into(),
        },
    ];
    let sig = match encode_refinement_signature(&decls) {
        Ok(s) => s,
        Err(e) => return vec![format!("encoding failed: {e}")],
    };
    let alpha = SimpleType::atom("alpha");
    let axioms = [
        (alpha.clone(), SimpleType::atom("gamma")),
        (alpha.clone(), SimpleType::atom("pi")),
    ];
    for (l, r) in &axioms {
        match decide_sub(&sig, l, r) {
            Some(SubDeriv::Axiom { .. }) => {}
            Some(d) => errs.push(format!("{l} <= {r} derived without the axiom: {d:?}")),
            None => errs.push(format!("expected derivable: {l} <= {r}")),
        }
        match inhabit_relevant(&sig, l, r) {
            Some(w) => {
                let expected = Term::rel_arrow(l.to_family(), r.to_family());
                if Checker::default()
                    .check_type(&sig, &Context::new(), &w, &expected)
                    .is_err()
                {
                    errs.push(format!("axiom coercion for {l} <= {r} rejected"));
                }
            }
            None => errs.push(format!("no coercion for {l} <= {r}")),
        }
    }
    // the independent oracle agrees once given the same axioms
    let universe: BTreeSet<SimpleType> = ["alpha", "gamma", "pi"]
        .iter()
        .map(|a| SimpleType::atom(*a))
        .collect();
    let oracle = closure_oracle_with_axioms(&universe, &axioms);
    for l in &universe {
        for r in &universe {
            let decided = decide_sub(&sig, l, r).is_some();
            if decided != oracle.contains(&(l.clone(), r.clone())) {
                errs.push(format!("oracle disagreement on {l} <= {r}"));
            }
        }
    }
    errs
}

// ---- criterion 8: round-trips and CLI exit codes ----

fn roundtrip(sig: &Signature, t: &Term) -> Result<(), String> {
    let printed = print_term(t);
    let reparsed = parse_term(&printed).map_err(|e| format!("`{printed}`: {e}"))?;
    let back = elaborate(sig, &reparsed).map_err(|e| format!("`{printed}`: {e}"))?;
    if back == *t {
        Ok(())
    } else {
        Err(format!("`{printed}` re-elaborated differently"))
    }
}

fn corpus_roundtrips(errs: &mut Vec<String>) {
    let files = [
        "auto_application.dlf",
        "poly_id.dlf",
        "union_comm.dlf",
        "is0_test.dlf",
        "delta_omega.dlf",
        "pierce.dlf",
        "harrop.dlf",
        "natded.dlf",
    ];
    for file in files {
        let src = match std::fs::read_to_string(corpus_dir().join(file)) {
            Ok(s) => s,
            Err(e) => {
                errs.push(format!("{file}: {e}"));
                continue;
            }
        };
        let cmds = match parse(&src) {
            Ok(c) => c,
            Err(e) => {
                errs.push(format!("{file}: {e}"));
                continue;
            }
        };
        let mut session = Session::new();
        session.base_dir = corpus_dir();
        for cmd in cmds {
            // round-trip every term the command embeds against the
            // signature as it stands before the command runs
            let sts = match &cmd {
                Command::Axiom { classifier, .. } => vec![classifier.clone()],
                Command::Definition {
                    classifier, body, ..
                } => classifier
                    .iter()
                    .cloned()
                    .chain(std::iter::once(body.clone()))
                    .collect(),
                Command::Check(t) | Command::Eval(t) | Command::Essence(t) => {
                    vec![t.clone()]
                }
                _ => vec![],
            };
            for st in sts {
                match elaborate(&session.signature, &st) {
                    Ok(t) => {
                        if let Err(e) = roundtrip(&session.signature, &t) {
                            errs.push(format!("{file}: {e}"));
                        }
                    }
                    Err(e) => errs.push(format!("{file}: {e}")),
                }
            }
            if let Err(e) = session.repl_step(&cmd) {
                errs.push(format!("{file}: {e}"));
                break;
            }
        }
    }
}

fn fuzz_roundtrips(errs: &mut Vec<String>) {
    let mut done = 0;
    let mut seed = 0u64;
    while done < 1000 && seed < 5000 {
        seed += 1;
        let Some(sample) = fuzz_well_typed(seed, 12) else {
            continue;
        };
        // close the term over its ambient context so it prints without
        // free variables
        let mut t = sample.term.clone();
        for (hint, ty) in sample.context.entries.iter().rev() {
            t = Term::Lam {
                hint: hint.clone(),
                domain: Box::new(ty.clone()),
                body: Box::new(t),
            };
        }
        if let Err(e) = roundtrip(&sample.signature, &t) {
            errs.push(format!("seed {seed}: {e}"));
        }
        done += 1;
    }
    if done < 1000 {
        errs.push(format!("only {done} fuzzed round-trips"));
    }
}

fn cli_exit_codes(errs: &mut Vec<String>) {
    let dir = std::env::temp_dir().join("deltalf-acceptance-fixtures");
    if let Err(e) = std::fs::create_dir_all(&dir) {
        errs.push(format!("fixture dir: {e}"));
        return;
    }
    let fixtures = [
        ("valid.dlf", "Axiom s : Type.\nCheck fun x : s => x.\n"),
        (
            "illtyped.dlf",
            "Axiom s : Type.\nAxiom t : Type.\nAxiom c : s.\nCheck (fun x : t => x) c.\n",
        ),
        ("unparsable.dlf", "fun fun ((\n"),
    ];
    for (name, content) in fixtures {
        if let Err(e) = std::fs::write(dir.join(name), content) {
            errs.push(format!("{name}: {e}"));
            return;
        }
    }
    let bin = env!("CARGO_BIN_EXE_deltalf");
    let cases: &[(&[&str], i32)] = &[
        (&["check", "valid.dlf"], 0),
        (&["check", "illtyped.dlf"], 1),
        (&["check", "unparsable.dlf"], 2),
        (&["check", "no_such_file.dlf"], 2),
        (
            &[
                "eval",
                "-e",
                "(fun x : s => x x) (fun x : s => x x)",
            ],
            3,
        ),
    ];
    for (args, want) in cases {
        let out = std::process::Command::new(bin)
            .args(*args)
            .current_dir(&dir)
            .output();
        match out {
            Ok(o) => {
                let got = o.status.code().unwrap_or(-1);
                if got != *want {
                    errs.push(format!("deltalf {args:?}: exit {got}, wanted {want}"));
                }
            }
            Err(e) => errs.push(format!("deltalf {args:?}: {e}")),
        }
    }
}

fn frontend_roundtrip() -> Vec<String> {
    let mut errs = Vec::new();
    corpus_roundtrips(&mut errs);
    fuzz_roundtrips(&mut errs);
    cli_exit_codes(&mut errs);
    errs
}

#[test]
fn acceptance() {
    let mut gate = Gate { failed: Vec::new() };
    gate.run(1, "paper example corpus", corpus_classifiers);
    gate.run(2, "union elimination counterexample", pierce_behavior);
    gate.run(3, "typable term with divergent essence", divergent_essence);
    let mut derivable = Vec::new();
    gate.run(4, "subtype oracle equivalence", || {
        oracle_equivalence(&mut derivable)
    });
    gate.run(5, "coercion soundness", || coercion_soundness(&derivable));
    gate.run(6, "metatheory property suites", property_suites);
    gate.run(7, "refinement encoding", refinement_encoding);
    gate.run(8, "frontend round-trip and exit codes", frontend_roundtrip);
    assert!(gate.failed.is_empty(), "failed: {:?}", gate.failed);
}
