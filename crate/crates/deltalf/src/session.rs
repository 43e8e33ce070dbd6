//! REPL and batch session state: a signature extended by `Axiom` and
//! `Definition` commands, plus the checker budgets.

use crate::essence::essence;
use crate::parser::{elaborate, parse, Command, ElabError, FuelKind, ParseError};
use crate::printer::{print_pure, print_term};
use crate::reduction::normalize;
use crate::subtyping::{decide_sub, inhabit_relevant, SimpleType};
use crate::syntax::{classify, Category, Context, SigEntry, Signature, Term};
use crate::typing::{Checker, KernelError, Rule};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub enum SessionError {
    Parse(ParseError),
    Elab(ElabError),
    Kernel(KernelError),
    Io(String),
    Command(String),
}

impl SessionError {
    /// Budget exhaustion is reported separately so callers can map it to
    /// its own exit code.
    pub fn is_fuel(&self) -> bool {
        matches!(self, SessionError::Kernel(k) if k.is_fuel())
    }
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionError::Parse(e) => write!(f, "parse error: {e}"),
            SessionError::Elab(e) => write!(f, "error: {e}"),
            SessionError::Kernel(e) => write!(f, "type error: {e}"),
            SessionError::Io(e) => write!(f, "io error: {e}"),
            SessionError::Command(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for SessionError {}

impl From<ParseError> for SessionError {
    fn from(e: ParseError) -> Self {
        SessionError::Parse(e)
    }
}

impl From<ElabError> for SessionError {
    fn from(e: ElabError) -> Self {
        SessionError::Elab(e)
    }
}

impl From<KernelError> for SessionError {
    fn from(e: KernelError) -> Self {
        SessionError::Kernel(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutput {
    pub lines: Vec<String>,
    pub quit: bool,
}

impl StepOutput {
    fn lines(lines: Vec<String>) -> Self {
        StepOutput { lines, quit: false }
    }
}

/// One interactive or batch session. Commands mutate the signature only
/// after kernel validation; any error leaves the state unchanged.
#[derive(Debug, Clone)]
pub struct Session {
    pub signature: Signature,
    pub checker: Checker,
    /// Directory against which `Load` paths resolve.
    pub base_dir: PathBuf,
    /// When false, `Subtype` reports derivability without the witness term.
    pub emit_coercion: bool,
}

impl Default for Session {
    fn default() -> Self {
        Session {
            signature: Signature::new(),
            checker: Checker::default(),
            base_dir: PathBuf::from("."),
            emit_coercion: true,
        }
    }
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    /// Parse and run every command in `src`. Stops at the first error;
    /// commands before it keep their effects, matching manual entry.
    pub fn run_source(&mut self, src: &str) -> Result<StepOutput, SessionError> {
        let cmds = parse(src)?;
        let mut lines = Vec::new();
        for cmd in &cmds {
            let out = self.repl_step(cmd)?;
            lines.extend(out.lines);
            if out.quit {
                return Ok(StepOutput { lines, quit: true });
            }
        }
        Ok(StepOutput::lines(lines))
    }

    pub fn repl_step(&mut self, cmd: &Command) -> Result<StepOutput, SessionError> {
        match cmd {
            Command::Axiom { name, classifier } => {
                self.require_fresh(name)?;
                let c = elaborate(&self.signature, classifier)?;
                let entry = match classify(&c) {
                    Ok(Category::Kind) => {
                        self.checker
                            .check_kind(&self.signature, &Context::new(), &c)?;
                        SigEntry {
                            name: name.clone(),
                            classifier: c,
                            is_family: true,
                            body: None,
                        }
                    }
                    Ok(Category::Family) => {
                        self.require_type(&c)?;
                        SigEntry {
                            name: name.clone(),
                            classifier: c,
                            is_family: false,
                            body: None,
                        }
                    }
                    _ => {
                        return Err(SessionError::Command(format!(
                            "an axiom classifier must be a kind or a family, got `{}`",
                            print_term(&c)
                        )))
                    }
                };
                self.signature.entries.push(entry);
                Ok(StepOutput::lines(vec![format!("{name} declared")]))
            }
            Command::Definition {
                name,
                classifier,
                body,
            } => {
                self.require_fresh(name)?;
                let b = elaborate(&self.signature, body)?;
                let ctx = Context::new();
                let entry = match classify(&b) {
                    Ok(Category::Object) => {
                        let cls = match classifier {
                            Some(c) => {
                                let c = elaborate(&self.signature, c)?;
                                self.checker.check_type(&self.signature, &ctx, &b, &c)?;
                                c
                            }
                            None => self.checker.infer_type(&self.signature, &ctx, &b)?,
                        };
                        SigEntry {
                            name: name.clone(),
                            classifier: cls,
                            is_family: false,
                            body: Some(b),
                        }
                    }
                    Ok(Category::Family) => {
                        let k = self.checker.infer_kind(&self.signature, &ctx, &b)?;
                        if let Some(c) = classifier {
                            let c = elaborate(&self.signature, c)?;
                            if !crate::reduction::def_eq(&k, &c, self.checker.reduction_fuel)
                                .map_err(KernelError::from)?
                            {
                                return Err(SessionError::Kernel(KernelError::mismatch(
                                    Rule::Conv,
                                    "definition body has the wrong kind",
                                    &c,
                                    &k,
                                )));
                            }
                        }
                        SigEntry {
                            name: name.clone(),
                            classifier: k,
                            is_family: true,
                            body: Some(b),
                        }
                    }
                    _ => {
                        return Err(SessionError::Command(format!(
                            "a definition body must be an object or a family, got `{}`",
                            print_term(&b)
                        )))
                    }
                };
                let cls = print_term(&entry.classifier);
                self.signature.entries.push(entry);
                Ok(StepOutput::lines(vec![format!("{name} : {cls}")]))
            }
            Command::Check(st) => {
                let t = elaborate(&self.signature, st)?;
                let ctx = Context::new();
                let line = match classify(&t) {
                    Ok(Category::Object) => {
                        let r = self.checker.typed_result(&self.signature, &ctx, &t)?;
                        format!("{} : {}", print_term(&t), print_term(&r.normal_form))
                    }
                    Ok(Category::Family) => {
                        let k = self.checker.infer_kind(&self.signature, &ctx, &t)?;
                        format!("{} : {}", print_term(&t), print_term(&k))
                    }
                    Ok(Category::Kind) => {
                        self.checker.check_kind(&self.signature, &ctx, &t)?;
                        format!("{} is a valid kind", print_term(&t))
                    }
                    Err(e) => return Err(SessionError::Command(e.to_string())),
                };
                Ok(StepOutput::lines(vec![line]))
            }
            Command::Eval(st) => {
                let t = elaborate(&self.signature, st)?;
                let ctx = Context::new();
                // ill-typed terms are not evaluated
                match classify(&t) {
                    Ok(Category::Object) => {
                        self.checker.infer_type(&self.signature, &ctx, &t)?;
                    }
                    Ok(Category::Family) => {
                        self.checker.infer_kind(&self.signature, &ctx, &t)?;
                    }
                    Ok(Category::Kind) => {
                        self.checker.check_kind(&self.signature, &ctx, &t)?;
                    }
                    Err(e) => return Err(SessionError::Command(e.to_string())),
                }
                let nf = normalize(&t, self.checker.reduction_fuel).map_err(KernelError::from)?;
                Ok(StepOutput::lines(vec![print_term(&nf)]))
            }
            Command::Essence(st) => {
                let t = elaborate(&self.signature, st)?;
                self.checker
                    .infer_type(&self.signature, &Context::new(), &t)?;
                let e = essence(&t)
                    .map_err(|e| SessionError::Command(e.to_string()))?;
                Ok(StepOutput::lines(vec![print_pure(&e)]))
            }
            Command::Subtype { left, right } => {
                let l = self.to_simple(left)?;
                let r = self.to_simple(right)?;
                let line = match decide_sub(&self.signature, &l, &r) {
                    Some(_) if self.emit_coercion => {
                        let tm = inhabit_relevant(&self.signature, &l, &r)
                            .expect("decidable pair must be inhabitable");
                        print_term(&tm)
                    }
                    Some(_) => "derivable".to_string(),
                    None => "not derivable".to_string(),
                };
                Ok(StepOutput::lines(vec![line]))
            }
            Command::Load(path) => {
                let full = self.base_dir.join(path);
                let src = std::fs::read_to_string(&full)
                    .map_err(|e| SessionError::Io(format!("{}: {e}", full.display())))?;
                self.run_source(&src)
            }
            Command::SetFuel(kind, n) => {
                match kind {
                    FuelKind::Reduction => self.checker.reduction_fuel = *n,
                    FuelKind::Essence => self.checker.essence_fuel = *n,
                }
                Ok(StepOutput::lines(vec![]))
            }
            Command::Quit => Ok(StepOutput {
                lines: vec![],
                quit: true,
            }),
        }
    }

    fn require_fresh(&self, name: &str) -> Result<(), SessionError> {
        if self.signature.contains(name) {
            Err(SessionError::Command(format!(
                "`{name}` is already declared"
            )))
        } else {
            Ok(())
        }
    }

    fn require_type(&self, fam: &Term) -> Result<(), SessionError> {
        let k = self
            .checker
            .infer_kind(&self.signature, &Context::new(), fam)?;
        let nk = normalize(&k, self.checker.reduction_fuel).map_err(KernelError::from)?;
        if nk == Term::Type {
            Ok(())
        } else {
            Err(SessionError::Kernel(KernelError::mismatch(
                Rule::Conv,
                "axiom classifier does not have kind Type",
                &Term::Type,
                &nk,
            )))
        }
    }

    fn to_simple(&self, st: &crate::parser::STerm) -> Result<SimpleType, SessionError> {
        let t = elaborate(&self.signature, st)?;
        SimpleType::from_family(&t).ok_or_else(|| {
            SessionError::Command(format!(
                "`{}` is not a simple type (atoms, ->, &, | only)",
                print_term(&t)
            ))
        })
    }
}

/// Render a session error as the JSON object used by the CLI's `--json`
/// mode. Hand-rolled; the schema is flat.
pub fn error_json(e: &SessionError) -> String {
    fn esc(s: &str) -> String {
        s.chars()
            .flat_map(|c| match c {
                '"' => "\\\"".chars().collect::<Vec<_>>(),
                '\\' => "\\\\".chars().collect(),
                '\n' => "\\n".chars().collect(),
                c => vec![c],
            })
            .collect()
    }
    let (rule, span, message, expected, actual) = match e {
        SessionError::Parse(p) => (
            "parse".to_string(),
            Some(p.span),
            p.message.clone(),
            (!p.expected.is_empty()).then(|| p.expected.join(", ")),
            None,
        ),
        SessionError::Elab(el) => (
            "resolve".to_string(),
            Some(el.span),
            el.message.clone(),
            None,
            None,
        ),
        SessionError::Kernel(k) => (
            k.rule.to_string(),
            None,
            k.message.clone(),
            k.expected.clone(),
            k.actual.clone(),
        ),
        SessionError::Io(m) => ("io".to_string(), None, m.clone(), None, None),
        SessionError::Command(m) => ("command".to_string(), None, m.clone(), None, None),
    };
    let mut out = format!(
        "{{\"rule\":\"{}\",\"message\":\"{}\"",
        esc(&rule),
        esc(&message)
    );
    if let Some(s) = span {
        out.push_str(&format!(",\"span\":{{\"line\":{},\"col\":{}}}", s.line, s.col));
    }
    if let Some(x) = expected {
        out.push_str(&format!(",\"expected\":\"{}\"", esc(&x)));
    }
    if let Some(x) = actual {
        out.push_str(&format!(",\"actual\":\"{}\"", esc(&x)));
    }
    out.push('}');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> (Session, Result<StepOutput, SessionError>) {
        let mut s = Session::new();
        let r = s.run_source(src);
        (s, r)
    }

    #[test]
    fn axioms_and_check() {
        let (s, r) = run(
            "Axiom sigma : Type.\n\
             Axiom tau : Type.\n\
             Axiom c : sigma.\n\
             Check fun x : sigma & (sigma -> tau) => (proj_r x) (proj_l x).",
        );
        let out = r.unwrap();
        assert_eq!(s.signature.entries.len(), 3);
        assert!(out.lines.last().unwrap().contains("sigma & (sigma -> tau) -> tau"));
    }

    #[test]
    fn essence_of_polymorphic_identity() {
        let (_, r) = run(
            "Axiom sigma : Type.\nAxiom tau : Type.\n\
             Essence <fun x : sigma => x, fun x : tau => x>.",
        );
        assert_eq!(r.unwrap().lines.last().unwrap(), "fun x => x");
    }

    #[test]
    fn eval_rejects_ill_essenced_literal() {
        let (_, r) = run(
            "Axiom sigma : Type.\nAxiom a : sigma.\nAxiom b : sigma.\n\
             Eval proj_l <a, b>.",
        );
        match r {
            Err(SessionError::Kernel(k)) => assert_eq!(k.rule, Rule::InterIntro),
            other => panic!("expected an intersection intro failure, got {other:?}"),
        }
    }

    #[test]
    fn eval_normalizes() {
        let (_, r) = run(
            "Axiom sigma : Type.\nAxiom c : sigma.\n\
             Eval (fun x : sigma => x) c.",
        );
        assert_eq!(r.unwrap().lines.last().unwrap(), "c");
    }

    #[test]
    fn state_unchanged_on_failure() {
        let mut s = Session::new();
        s.run_source("Axiom sigma : Type.").unwrap();
        let before = s.signature.clone();
        assert!(s.run_source("Axiom bad : missing.").is_err());
        assert_eq!(s.signature, before);
        assert!(s.run_source("Axiom sigma : Type.").is_err());
        assert_eq!(s.signature, before);
    }

    #[test]
    fn definitions_check_and_unfold() {
        let (_, r) = run(
            "Axiom sigma : Type.\nAxiom c : sigma.\n\
             Definition id : sigma -> sigma := fun x : sigma => x.\n\
             Eval id c.",
        );
        assert_eq!(r.unwrap().lines.last().unwrap(), "c");
    }

    #[test]
    fn subtype_prints_coercion_or_refusal() {
        let (_, r) = run(
            "Axiom a : Type.\nAxiom b : Type.\n\
             Subtype a & b <= a.",
        );
        let out = r.unwrap();
        assert!(out.lines.last().unwrap().starts_with("sfun"));
        let (_, r2) = run("Axiom a : Type.\nAxiom b : Type.\nSubtype a <= b.");
        assert_eq!(r2.unwrap().lines.last().unwrap(), "not derivable");
    }

    #[test]
    fn set_fuel_updates_checker() {
        let mut s = Session::new();
        s.run_source("Set fuel 42.\nSet essence_fuel 7.").unwrap();
        assert_eq!(s.checker.reduction_fuel, 42);
        assert_eq!(s.checker.essence_fuel, 7);
    }

    #[test]
    fn quit_stops_processing() {
        let (s, r) = run("Axiom sigma : Type.\nQuit.\nAxiom tau : Type.");
        assert!(r.unwrap().quit);
        assert_eq!(s.signature.entries.len(), 1);
    }

    #[test]
    fn load_replays_file() {
        let dir = std::env::temp_dir().join(format!("dlf-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("lib.dlf"), "Axiom sigma : Type.\nAxiom c : sigma.\n").unwrap();
        let mut s = Session::new();
        s.base_dir = dir.clone();
        s.run_source("Load \"lib.dlf\".\nCheck c.").unwrap();
        assert_eq!(s.signature.entries.len(), 2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn error_json_is_flat_and_quoted() {
        let e = SessionError::Command("bad \"thing\"".into());
        let j = error_json(&e);
        assert!(j.starts_with('{') && j.ends_with('}'));
        assert!(j.contains("\\\"thing\\\""));
    }
}
