//! Syntax-directed checkers for the five judgment forms: signature and
//! context validity, kind validity, kinding of families, and typing of
//! objects.
//!
//! The discipline is bidirectional: everything synthesizes except co-pairs,
//! which consume an expected type (or recover it from the application site by
//! matching), and conversion sites, which compare normal forms.

use crate::essence::{essence, essence_eq, EssenceVerdict, PureTerm};
use crate::printer::print_term;
use crate::reduction::{def_eq, normalize, ReductionError, DEFAULT_FUEL};
use crate::syntax::{
    free_vars, replace_var, shift, subst, Context, Hint, Signature, Term,
};
use std::fmt;

/// Default beta budget for essence comparisons.
pub const DEFAULT_ESSENCE_FUEL: usize = 10_000;

/// Typing-rule tags used in error provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Sig,
    Ctx,
    TypeKind,
    PiKind,
    Const,
    Var,
    PiIntro,
    PiElim,
    RelIntro,
    RelElim,
    InterIntro,
    InterElimL,
    InterElimR,
    UnionIntroL,
    UnionIntroR,
    UnionElim,
    Conv,
    Category,
    Fuel,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Sig => "(Sig)",
            Rule::Ctx => "(Ctx)",
            Rule::TypeKind => "(Type)",
            Rule::PiKind => "(PiK)",
            Rule::Const => "(Const)",
            Rule::Var => "(Var)",
            Rule::PiIntro => "(PiI)",
            Rule::PiElim => "(PiE)",
            Rule::RelIntro => "(RelI)",
            Rule::RelElim => "(RelE)",
            Rule::InterIntro => "(InterI)",
            Rule::InterElimL => "(InterEl)",
            Rule::InterElimR => "(InterEr)",
            Rule::UnionIntroL => "(UnionIl)",
            Rule::UnionIntroR => "(UnionIr)",
            Rule::UnionElim => "(UnionE)",
            Rule::Conv => "(Conv)",
            Rule::Category => "(Syntax)",
            Rule::Fuel => "(Fuel)",
        };
        f.write_str(s)
    }
}

/// Structured kernel error carrying the first failing premise of exactly one
/// rule, with position provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelError {
    pub rule: Rule,
    /// Path of child indices from the judgment subject to the failing
    /// subterm.
    pub path: Vec<usize>,
    pub message: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
    pub verdict: Option<EssenceVerdict>,
}

impl KernelError {
    pub fn new(rule: Rule, message: impl Into<String>) -> Self {
        KernelError {
            rule,
            path: vec![],
            message: message.into(),
            expected: None,
            actual: None,
            verdict: None,
        }
    }

    pub fn mismatch(rule: Rule, message: impl Into<String>, expected: &Term, actual: &Term) -> Self {
        KernelError {
            rule,
            path: vec![],
            message: message.into(),
            expected: Some(print_term(expected)),
            actual: Some(print_term(actual)),
            verdict: None,
        }
    }

    pub fn with_verdict(mut self, v: EssenceVerdict) -> Self {
        self.verdict = Some(v);
        self
    }

    pub fn in_child(mut self, i: usize) -> Self {
        self.path.insert(0, i);
        self
    }

    pub fn is_fuel(&self) -> bool {
        self.rule == Rule::Fuel
    }
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.rule, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "; expected {e}")?;
        }
        if let Some(a) = &self.actual {
            write!(f, "; got {a}")?;
        }
        if let Some(v) = &self.verdict {
            write!(f, "; essence verdict {v:?}")?;
        }
        Ok(())
    }
}

impl std::error::Error for KernelError {}

impl From<ReductionError> for KernelError {
    fn from(_: ReductionError) -> Self {
        KernelError::new(Rule::Fuel, "normalization fuel exhausted")
    }
}

/// Result of a successful inference: the classifier plus its normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedResult {
    pub classifier: Term,
    pub normal_form: Term,
}

/// The kernel checker. Budgets are explicit so the REPL and CLI can tune
/// them.
#[derive(Debug, Clone, Copy)]
pub struct Checker {
    pub reduction_fuel: usize,
    pub essence_fuel: usize,
}

impl Default for Checker {
    fn default() -> Self {
        Checker {
            reduction_fuel: DEFAULT_FUEL,
            essence_fuel: DEFAULT_ESSENCE_FUEL,
        }
    }
}

impl Checker {
    fn conv(&self, a: &Term, b: &Term) -> Result<bool, KernelError> {
        Ok(def_eq(a, b, self.reduction_fuel)?)
    }

    fn nf(&self, t: &Term) -> Result<Term, KernelError> {
        Ok(normalize(t, self.reduction_fuel)?)
    }

    fn obj_essence(&self, t: &Term) -> Result<PureTerm, KernelError> {
        essence(t).map_err(|e| KernelError::new(Rule::Category, e.to_string()))
    }

    /// `sigma` kinds at `Type`.
    fn ensure_is_type(&self, sig: &Signature, ctx: &Context, fam: &Term) -> Result<(), KernelError> {
        let k = self.infer_kind(sig, ctx, fam)?;
        let nk = self.nf(&k)?;
        if nk == Term::Type {
            Ok(())
        } else {
            Err(KernelError::mismatch(
                Rule::Conv,
                "family does not have kind Type",
                &Term::Type,
                &nk,
            ))
        }
    }

    /// Validity of a whole signature, checked left-to-right against the
    /// prefix.
    pub fn check_signature(&self, sig: &Signature) -> Result<(), KernelError> {
        let mut prefix = Signature::new();
        let ctx = Context::new();
        for entry in &sig.entries {
            if prefix.contains(&entry.name) {
                return Err(KernelError::new(
                    Rule::Sig,
                    format!("duplicate signature name `{}`", entry.name),
                ));
            }
            if entry.is_family {
                self.check_kind(&prefix, &ctx, &entry.classifier)
                    .map_err(|e| {
                        KernelError::new(
                            Rule::Sig,
                            format!("ill-kinded entry `{}`: {e}", entry.name),
                        )
                    })?;
            } else {
                self.ensure_is_type(&prefix, &ctx, &entry.classifier)
                    .map_err(|e| {
                        KernelError::new(
                            Rule::Sig,
                            format!("ill-typed entry `{}`: {e}", entry.name),
                        )
                    })?;
            }
            if let Some(body) = &entry.body {
                if entry.is_family {
                    let k = self.infer_kind(&prefix, &ctx, body)?;
                    if !self.conv(&k, &entry.classifier)? {
                        return Err(KernelError::new(
                            Rule::Sig,
                            format!("definition body of `{}` has the wrong kind", entry.name),
                        ));
                    }
                } else {
                    self.check_type(&prefix, &ctx, body, &entry.classifier)
                        .map_err(|e| {
                            KernelError::new(
                                Rule::Sig,
                                format!("definition body of `{}` is ill-typed: {e}", entry.name),
                            )
                        })?;
                }
            }
            prefix.entries.push(entry.clone());
        }
        Ok(())
    }

    /// Validity of a context under an already-validated signature.
    pub fn check_context(&self, sig: &Signature, ctx: &Context) -> Result<(), KernelError> {
        let mut prefix = Context::new();
        for (hint, fam) in &ctx.entries {
            if let Some(name) = hint.name() {
                if prefix
                    .entries
                    .iter()
                    .any(|(h, _)| h.name() == Some(name))
                {
                    return Err(KernelError::new(
                        Rule::Ctx,
                        format!("duplicate context variable `{name}`"),
                    ));
                }
            }
            self.ensure_is_type(sig, &prefix, fam)
                .map_err(|e| KernelError::new(Rule::Ctx, format!("ill-formed binding: {e}")))?;
            prefix.push(hint.clone(), fam.clone());
        }
        Ok(())
    }

    /// `K` is a valid kind.
    pub fn check_kind(&self, sig: &Signature, ctx: &Context, k: &Term) -> Result<(), KernelError> {
        match k {
            Term::Type => Ok(()),
            Term::PiKind { hint, domain, body } => {
                self.ensure_is_type(sig, ctx, domain).map_err(|e| e.in_child(0))?;
                let ctx2 = ctx.extended(hint.clone(), (**domain).clone());
                self.check_kind(sig, &ctx2, body).map_err(|e| e.in_child(1))
            }
            _ => Err(KernelError::new(
                Rule::Category,
                format!("not a kind: {}", print_term(k)),
            )),
        }
    }

    /// Kind synthesis for families.
    pub fn infer_kind(&self, sig: &Signature, ctx: &Context, fam: &Term) -> Result<Term, KernelError> {
        match fam {
            Term::ConstFam(name) => match sig.lookup(name) {
                Some(e) if e.is_family => Ok(e.classifier.clone()),
                Some(_) => Err(KernelError::new(
                    Rule::Const,
                    format!("`{name}` is an object constant, not a family"),
                )),
                None => Err(KernelError::new(
                    Rule::Const,
                    format!("unbound family constant `{name}`"),
                )),
            },
            Term::PiFam { hint, domain, body } => {
                self.ensure_is_type(sig, ctx, domain).map_err(|e| e.in_child(0))?;
                let ctx2 = ctx.extended(hint.clone(), (**domain).clone());
                self.ensure_is_type(sig, &ctx2, body).map_err(|e| e.in_child(1))?;
                Ok(Term::Type)
            }
            Term::RelArrowFam { domain, codomain } => {
                self.ensure_is_type(sig, ctx, domain).map_err(|e| e.in_child(0))?;
                self.ensure_is_type(sig, ctx, codomain).map_err(|e| e.in_child(1))?;
                Ok(Term::Type)
            }
            Term::InterFam { left, right } | Term::UnionFam { left, right } => {
                self.ensure_is_type(sig, ctx, left).map_err(|e| e.in_child(0))?;
                self.ensure_is_type(sig, ctx, right).map_err(|e| e.in_child(1))?;
                Ok(Term::Type)
            }
            Term::FamApp { fam: head, arg } => {
                let k = self.infer_kind(sig, ctx, head).map_err(|e| e.in_child(0))?;
                let nk = self.nf(&k)?;
                match nk {
                    Term::PiKind { domain, body, .. } => {
                        self.check_type(sig, ctx, arg, &domain)
                            .map_err(|e| e.in_child(1))?;
                        Ok(subst(&body, 0, arg))
                    }
                    other => Err(KernelError::mismatch(
                        Rule::PiElim,
                        "applying a family whose kind is not a product",
                        &Term::pi_kind("_", Term::cfam("_"), Term::Type),
                        &other,
                    )),
                }
            }
            _ => Err(KernelError::new(
                Rule::Category,
                format!("not a family: {}", print_term(fam)),
            )),
        }
    }

    /// Type synthesis for objects.
    pub fn infer_type(&self, sig: &Signature, ctx: &Context, obj: &Term) -> Result<Term, KernelError> {
        match obj {
            Term::ConstObj(name) => match sig.lookup(name) {
                Some(e) if !e.is_family => Ok(e.classifier.clone()),
                Some(_) => Err(KernelError::new(
                    Rule::Const,
                    format!("`{name}` is a family constant, not an object"),
                )),
                None => Err(KernelError::new(
                    Rule::Const,
                    format!("unbound constant `{name}`"),
                )),
            },
            Term::Var(i) => ctx.lookup(*i).ok_or_else(|| {
                KernelError::new(Rule::Var, format!("unbound variable index {i}"))
            }),
            Term::Lam { hint, domain, body } => {
                self.ensure_is_type(sig, ctx, domain).map_err(|e| e.in_child(0))?;
                let ctx2 = ctx.extended(hint.clone(), (**domain).clone());
                let cod = self.infer_type(sig, &ctx2, body).map_err(|e| e.in_child(1))?;
                Ok(Term::PiFam {
                    hint: hint.clone(),
                    domain: domain.clone(),
                    body: Box::new(cod),
                })
            }
            Term::RelLam { hint, domain, body } => {
                self.ensure_is_type(sig, ctx, domain).map_err(|e| e.in_child(0))?;
                let ctx2 = ctx.extended(hint.clone(), (**domain).clone());
                let cod = self.infer_type(sig, &ctx2, body).map_err(|e| e.in_child(1))?;
                let ess = self.obj_essence(body)?;
                match essence_eq(&ess, &PureTerm::Var(0), self.essence_fuel) {
                    EssenceVerdict::Equal => {}
                    v => {
                        return Err(KernelError::new(
                            Rule::RelIntro,
                            "body of a relevant abstraction must have the identity as essence",
                        )
                        .with_verdict(v))
                    }
                }
                let cod = self.nf(&cod)?;
                if free_vars(&cod).contains(&0) {
                    return Err(KernelError::new(
                        Rule::RelIntro,
                        "codomain of a relevant abstraction cannot depend on its argument",
                    ));
                }
                Ok(Term::RelArrowFam {
                    domain: domain.clone(),
                    codomain: Box::new(shift(&cod, 0, -1)),
                })
            }
            Term::App { func, arg } => {
                if let Term::SCoPair { .. } = &**func {
                    return self.infer_copair_app(sig, ctx, func, arg);
                }
                let ft = self.infer_type(sig, ctx, func).map_err(|e| e.in_child(0))?;
                let nft = self.nf(&ft)?;
                match nft {
                    Term::PiFam { domain, body, .. } => {
                        self.check_type(sig, ctx, arg, &domain)
                            .map_err(|e| e.in_child(1))?;
                        Ok(subst(&body, 0, arg))
                    }
                    other => Err(KernelError::new(
                        Rule::PiElim,
                        format!(
                            "cannot apply a term of type {}; a product type is required",
                            print_term(&other)
                        ),
                    )),
                }
            }
            Term::RelApp { func, arg } => {
                let ft = self.infer_type(sig, ctx, func).map_err(|e| e.in_child(0))?;
                let nft = self.nf(&ft)?;
                match nft {
                    Term::RelArrowFam { domain, codomain } => {
                        self.check_type(sig, ctx, arg, &domain)
                            .map_err(|e| e.in_child(1))?;
                        Ok(*codomain)
                    }
                    other => Err(KernelError::new(
                        Rule::RelElim,
                        format!(
                            "relevant application requires a relevant arrow, got {}",
                            print_term(&other)
                        ),
                    )),
                }
            }
            Term::SPair { left, right } => {
                let lt = self.infer_type(sig, ctx, left).map_err(|e| e.in_child(0))?;
                let rt = self.infer_type(sig, ctx, right).map_err(|e| e.in_child(1))?;
                let le = self.obj_essence(left)?;
                let re = self.obj_essence(right)?;
                match essence_eq(&le, &re, self.essence_fuel) {
                    EssenceVerdict::Equal => Ok(Term::inter(lt, rt)),
                    v => Err(KernelError::new(
                        Rule::InterIntro,
                        "strong pair components must have equal essences",
                    )
                    .with_verdict(v)),
                }
            }
            Term::ProjL(t) => {
                let tt = self.infer_type(sig, ctx, t).map_err(|e| e.in_child(0))?;
                match self.nf(&tt)? {
                    Term::InterFam { left, .. } => Ok(*left),
                    other => Err(KernelError::new(
                        Rule::InterElimL,
                        format!(
                            "left projection requires an intersection, got {}",
                            print_term(&other)
                        ),
                    )),
                }
            }
            Term::ProjR(t) => {
                let tt = self.infer_type(sig, ctx, t).map_err(|e| e.in_child(0))?;
                match self.nf(&tt)? {
                    Term::InterFam { right, .. } => Ok(*right),
                    other => Err(KernelError::new(
                        Rule::InterElimR,
                        format!(
                            "right projection requires an intersection, got {}",
                            print_term(&other)
                        ),
                    )),
                }
            }
            Term::InjL { other, body } => {
                let bt = self.infer_type(sig, ctx, body).map_err(|e| e.in_child(1))?;
                let union = Term::union(bt, (**other).clone());
                self.ensure_is_type(sig, ctx, &union)
                    .map_err(|e| KernelError::new(Rule::UnionIntroL, e.to_string()))?;
                Ok(union)
            }
            Term::InjR { other, body } => {
                let bt = self.infer_type(sig, ctx, body).map_err(|e| e.in_child(1))?;
                let union = Term::union((**other).clone(), bt);
                self.ensure_is_type(sig, ctx, &union)
                    .map_err(|e| KernelError::new(Rule::UnionIntroR, e.to_string()))?;
                Ok(union)
            }
            Term::SCoPair { .. } => Err(KernelError::new(
                Rule::UnionElim,
                "cannot synthesize a type for a co-pair; it needs an expected type or an application site",
            )),
            _ => Err(KernelError::new(
                Rule::Category,
                format!("not an object: {}", print_term(obj)),
            )),
        }
    }

    /// Union elimination at an application site `[l, r] @ arg`: the
    /// dependent family is recovered from the synthesized type of the left
    /// branch by abstracting the injected argument, with a non-dependent
    /// fallback.
    fn infer_copair_app(
        &self,
        sig: &Signature,
        ctx: &Context,
        copair: &Term,
        arg: &Term,
    ) -> Result<Term, KernelError> {
        let (left, right) = match copair {
            Term::SCoPair { left, right } => (&**left, &**right),
            _ => unreachable!(),
        };
        let at = self.infer_type(sig, ctx, arg).map_err(|e| e.in_child(1))?;
        let nat = self.nf(&at)?;
        let (dom_l, dom_r) = match &nat {
            Term::UnionFam { left, right } => ((**left).clone(), (**right).clone()),
            other => {
                return Err(KernelError::new(
                    Rule::UnionElim,
                    format!(
                        "co-pair applied to an argument of non-union type {}",
                        print_term(other)
                    ),
                ))
            }
        };
        let lt = self
            .infer_type(sig, ctx, left)
            .map_err(|e| e.in_child(0).in_child(0))?;
        let nlt = self.nf(&lt)?;
        let (pi_dom, pi_body) = match &nlt {
            Term::PiFam { domain, body, .. } => ((**domain).clone(), (**body).clone()),
            other => {
                return Err(KernelError::new(
                    Rule::UnionElim,
                    format!(
                        "left branch of a co-pair must have a product type, got {}",
                        print_term(other)
                    ),
                ))
            }
        };
        if !self.conv(&pi_dom, &dom_l)? {
            return Err(KernelError::mismatch(
                Rule::UnionElim,
                "left branch domain does not match the left side of the union",
                &dom_l,
                &pi_dom,
            ));
        }
        // Candidate dependent families: abstract occurrences of the injected
        // variable, or take the codomain as-is when it does not mention the
        // bound variable.
        let inj_pattern = Term::inj_l(shift(&dom_r, 0, 1), Term::Var(0));
        let abstracted = abstract_occurrences(&pi_body, &inj_pattern);
        let mut candidates: Vec<Term> = vec![abstracted];
        if !free_vars(&pi_body).contains(&0) {
            candidates.push(pi_body.clone());
        }
        let mut last_err = None;
        for rho in candidates {
            match self.check_copair_against(sig, ctx, left, right, &dom_l, &dom_r, &rho) {
                Ok(()) => return Ok(subst(&rho, 0, arg)),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or_else(|| {
            KernelError::new(Rule::UnionElim, "no dependent family matches the co-pair branches")
        }))
    }

    /// The four premises of union elimination for `[left, right]` at
    /// `Pi x : dom_l | dom_r. rho`.
    fn check_copair_against(
        &self,
        sig: &Signature,
        ctx: &Context,
        left: &Term,
        right: &Term,
        dom_l: &Term,
        dom_r: &Term,
        rho: &Term,
    ) -> Result<(), KernelError> {
        let expected_l = Term::PiFam {
            hint: Hint::default(),
            domain: Box::new(dom_l.clone()),
            body: Box::new(replace_var(
                rho,
                0,
                &Term::inj_l(shift(dom_r, 0, 1), Term::Var(0)),
            )),
        };
        let expected_r = Term::PiFam {
            hint: Hint::default(),
            domain: Box::new(dom_r.clone()),
            body: Box::new(replace_var(
                rho,
                0,
                &Term::inj_r(shift(dom_l, 0, 1), Term::Var(0)),
            )),
        };
        self.check_type(sig, ctx, left, &expected_l)
            .map_err(|e| e.in_child(0))?;
        self.check_type(sig, ctx, right, &expected_r)
            .map_err(|e| e.in_child(1))?;
        let le = self.obj_essence(left)?;
        let re = self.obj_essence(right)?;
        match essence_eq(&le, &re, self.essence_fuel) {
            EssenceVerdict::Equal => {}
            v => {
                return Err(KernelError::new(
                    Rule::UnionElim,
                    "co-pair components must have equal essences",
                )
                .with_verdict(v))
            }
        }
        let ctx2 = ctx.extended(Hint::default(), Term::union(dom_l.clone(), dom_r.clone()));
        self.ensure_is_type(sig, &ctx2, rho)
            .map_err(|e| KernelError::new(Rule::UnionElim, format!("ill-kinded result family: {e}")))?;
        Ok(())
    }

    /// Checking mode: succeeds iff some type is derivable that converts to
    /// `expected`.
    pub fn check_type(
        &self,
        sig: &Signature,
        ctx: &Context,
        obj: &Term,
        expected: &Term,
    ) -> Result<(), KernelError> {
        match obj {
            Term::SCoPair { left, right } => {
                let ne = self.nf(expected)?;
                let (pi_dom, rho) = match &ne {
                    Term::PiFam { domain, body, .. } => ((**domain).clone(), (**body).clone()),
                    other => {
                        return Err(KernelError::new(
                            Rule::UnionElim,
                            format!(
                                "a co-pair requires a product-over-union type, got {}",
                                print_term(other)
                            ),
                        ))
                    }
                };
                let (dom_l, dom_r) = match self.nf(&pi_dom)? {
                    Term::UnionFam { left, right } => (*left, *right),
                    other => {
                        return Err(KernelError::new(
                            Rule::UnionElim,
                            format!(
                                "a co-pair requires a union domain, got {}",
                                print_term(&other)
                            ),
                        ))
                    }
                };
                self.check_copair_against(sig, ctx, left, right, &dom_l, &dom_r, &rho)
            }
            Term::Lam { hint, domain, body } => {
                // Propagate checking into the body so co-pairs in checking
                // position stay checkable.
                let ne = self.nf(expected)?;
                if let Term::PiFam {
                    domain: edom,
                    body: ebody,
                    ..
                } = &ne
                {
                    self.ensure_is_type(sig, ctx, domain).map_err(|e| e.in_child(0))?;
                    if !self.conv(domain, edom)? {
                        return Err(KernelError::mismatch(
                            Rule::Conv,
                            "abstraction domain does not match the expected product domain",
                            edom,
                            domain,
                        ));
                    }
                    let ctx2 = ctx.extended(hint.clone(), (**domain).clone());
                    return self
                        .check_type(sig, &ctx2, body, ebody)
                        .map_err(|e| e.in_child(1));
                }
                self.check_by_inference(sig, ctx, obj, expected)
            }
            Term::SPair { left, right } => {
                let ne = self.nf(expected)?;
                if let Term::InterFam { left: el, right: er } = &ne {
                    self.check_type(sig, ctx, left, el).map_err(|e| e.in_child(0))?;
                    self.check_type(sig, ctx, right, er).map_err(|e| e.in_child(1))?;
                    let le = self.obj_essence(left)?;
                    let re = self.obj_essence(right)?;
                    return match essence_eq(&le, &re, self.essence_fuel) {
                        EssenceVerdict::Equal => Ok(()),
                        v => Err(KernelError::new(
                            Rule::InterIntro,
                            "strong pair components must have equal essences",
                        )
                        .with_verdict(v)),
                    };
                }
                self.check_by_inference(sig, ctx, obj, expected)
            }
            _ => self.check_by_inference(sig, ctx, obj, expected),
        }
    }

    fn check_by_inference(
        &self,
        sig: &Signature,
        ctx: &Context,
        obj: &Term,
        expected: &Term,
    ) -> Result<(), KernelError> {
        let actual = self.infer_type(sig, ctx, obj)?;
        if self.conv(&actual, expected)? {
            Ok(())
        } else {
            Err(KernelError::mismatch(
                Rule::Conv,
                "type mismatch",
                expected,
                &actual,
            ))
        }
    }

    /// Inference plus the normal form of the classifier.
    pub fn typed_result(
        &self,
        sig: &Signature,
        ctx: &Context,
        obj: &Term,
    ) -> Result<TypedResult, KernelError> {
        let classifier = self.infer_type(sig, ctx, obj)?;
        let normal_form = self.nf(&classifier)?;
        Ok(TypedResult {
            classifier,
            normal_form,
        })
    }
}

/// Replace every subterm alpha-equal to `pattern` (shifted appropriately
/// under binders) by the variable bound immediately outside `t`. `t` and
/// `pattern` are both scoped under that binder.
fn abstract_occurrences(t: &Term, pattern: &Term) -> Term {
    fn go(t: &Term, pattern: &Term, depth: usize) -> Term {
        let shifted = shift(pattern, 0, depth as isize);
        if *t == shifted {
            return Term::Var(depth);
        }
        match t {
            Term::Type | Term::ConstFam(_) | Term::ConstObj(_) | Term::Var(_) => t.clone(),
            _ => {
                let children = t.children();
                let mut out = t.clone();
                for (i, (c, binds)) in children.into_iter().enumerate() {
                    let c2 = go(c, pattern, depth + usize::from(binds));
                    out = crate::reduction::with_child(&out, i, c2);
                }
                out
            }
        }
    }
    go(t, pattern, 0)
}
