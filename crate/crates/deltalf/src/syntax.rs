//! Raw term language: kinds, families and objects share one tree type.
//!
//! Binders use de Bruijn indices; the surface name of a binder is kept as a
//! display hint that is ignored by equality, so `PartialEq` on [`Term`] *is*
//! alpha-equivalence.

use std::collections::BTreeSet;
use std::fmt;

/// Display hint for a binder. Compares equal to every other hint so that
/// derived equality on terms coincides with alpha-equivalence.
#[derive(Debug, Clone, Default)]
pub struct Hint(pub Option<String>);

impl Hint {
    pub fn named(s: impl Into<String>) -> Self {
        Hint(Some(s.into()))
    }

    pub fn name(&self) -> Option<&str> {
        self.0.as_deref()
    }
}

impl PartialEq for Hint {
    fn eq(&self, _other: &Hint) -> bool {
        true
    }
}

impl Eq for Hint {}

impl std::hash::Hash for Hint {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

/// Unified syntax tree for kinds, families and objects.
///
/// A [`classify`] pass assigns each well-formed tree exactly one of the three
/// syntactic categories; mixed-category trees are rejected before typing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    // Kinds
    Type,
    PiKind {
        hint: Hint,
        domain: Box<Term>,
        body: Box<Term>,
    },
    // Families
    ConstFam(String),
    PiFam {
        hint: Hint,
        domain: Box<Term>,
        body: Box<Term>,
    },
    RelArrowFam {
        domain: Box<Term>,
        codomain: Box<Term>,
    },
    FamApp {
        fam: Box<Term>,
        arg: Box<Term>,
    },
    InterFam {
        left: Box<Term>,
        right: Box<Term>,
    },
    UnionFam {
        left: Box<Term>,
        right: Box<Term>,
    },
    // Objects
    ConstObj(String),
    Var(usize),
    Lam {
        hint: Hint,
        domain: Box<Term>,
        body: Box<Term>,
    },
    RelLam {
        hint: Hint,
        domain: Box<Term>,
        body: Box<Term>,
    },
    App {
        func: Box<Term>,
        arg: Box<Term>,
    },
    RelApp {
        func: Box<Term>,
        arg: Box<Term>,
    },
    SPair {
        left: Box<Term>,
        right: Box<Term>,
    },
    SCoPair {
        left: Box<Term>,
        right: Box<Term>,
    },
    ProjL(Box<Term>),
    ProjR(Box<Term>),
    /// `in_l^other t`: injection into the left branch, annotated with the
    /// *other* (right) branch type.
    InjL {
        other: Box<Term>,
        body: Box<Term>,
    },
    /// `in_r^other t`: injection into the right branch, annotated with the
    /// *other* (left) branch type.
    InjR {
        other: Box<Term>,
        body: Box<Term>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Kind,
    Family,
    Object,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Kind => write!(f, "kind"),
            Category::Family => write!(f, "family"),
            Category::Object => write!(f, "object"),
        }
    }
}

/// A tree that does not belong to any of the three grammars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryError {
    /// Path from the root to the offending subterm (child indices).
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for CategoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax category error at {:?}: {}", self.path, self.message)
    }
}

impl std::error::Error for CategoryError {}

// Constructor shorthands used pervasively in tests and the elaborator.
impl Term {
    pub fn pi_kind(hint: impl Into<String>, domain: Term, body: Term) -> Term {
        Term::PiKind {
            hint: Hint::named(hint),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    pub fn pi_fam(hint: impl Into<String>, domain: Term, body: Term) -> Term {
        Term::PiFam {
            hint: Hint::named(hint),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    /// Non-dependent function space `domain -> codomain` (body shifted).
    pub fn arrow(domain: Term, codomain: Term) -> Term {
        let body = shift(&codomain, 0, 1);
        Term::PiFam {
            hint: Hint::default(),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    pub fn rel_arrow(domain: Term, codomain: Term) -> Term {
        Term::RelArrowFam {
            domain: Box::new(domain),
            codomain: Box::new(codomain),
        }
    }

    pub fn fam_app(fam: Term, arg: Term) -> Term {
        Term::FamApp {
            fam: Box::new(fam),
            arg: Box::new(arg),
        }
    }

    pub fn inter(left: Term, right: Term) -> Term {
        Term::InterFam {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn union(left: Term, right: Term) -> Term {
        Term::UnionFam {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn lam(hint: impl Into<String>, domain: Term, body: Term) -> Term {
        Term::Lam {
            hint: Hint::named(hint),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    pub fn rel_lam(hint: impl Into<String>, domain: Term, body: Term) -> Term {
        Term::RelLam {
            hint: Hint::named(hint),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    pub fn app(func: Term, arg: Term) -> Term {
        Term::App {
            func: Box::new(func),
            arg: Box::new(arg),
        }
    }

    pub fn rel_app(func: Term, arg: Term) -> Term {
        Term::RelApp {
            func: Box::new(func),
            arg: Box::new(arg),
        }
    }

    pub fn spair(left: Term, right: Term) -> Term {
        Term::SPair {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn scopair(left: Term, right: Term) -> Term {
        Term::SCoPair {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn proj_l(t: Term) -> Term {
        Term::ProjL(Box::new(t))
    }

    pub fn proj_r(t: Term) -> Term {
        Term::ProjR(Box::new(t))
    }

    pub fn inj_l(other: Term, body: Term) -> Term {
        Term::InjL {
            other: Box::new(other),
            body: Box::new(body),
        }
    }

    pub fn inj_r(other: Term, body: Term) -> Term {
        Term::InjR {
            other: Box::new(other),
            body: Box::new(body),
        }
    }

    pub fn cfam(name: impl Into<String>) -> Term {
        Term::ConstFam(name.into())
    }

    pub fn cobj(name: impl Into<String>) -> Term {
        Term::ConstObj(name.into())
    }

    /// Immediate children, paired with whether each crosses a binder.
    pub fn children(&self) -> Vec<(&Term, bool)> {
        match self {
            Term::Type | Term::ConstFam(_) | Term::ConstObj(_) | Term::Var(_) => vec![],
            Term::PiKind { domain, body, .. }
            | Term::PiFam { domain, body, .. }
            | Term::Lam { domain, body, .. }
            | Term::RelLam { domain, body, .. } => vec![(domain, false), (body, true)],
            Term::RelArrowFam { domain, codomain } => vec![(domain, false), (codomain, false)],
            Term::FamApp { fam, arg } => vec![(fam, false), (arg, false)],
            Term::InterFam { left, right }
            | Term::UnionFam { left, right }
            | Term::SPair { left, right }
            | Term::SCoPair { left, right } => vec![(left, false), (right, false)],
            Term::App { func, arg } | Term::RelApp { func, arg } => {
                vec![(func, false), (arg, false)]
            }
            Term::ProjL(t) | Term::ProjR(t) => vec![(t, false)],
            Term::InjL { other, body } | Term::InjR { other, body } => {
                vec![(other, false), (body, false)]
            }
        }
    }
}

/// Alpha-equivalence. With de Bruijn indices and hint-blind equality this is
/// structural identity.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    a == b
}

/// Shift free variables with index `>= cutoff` by `amount`.
pub fn shift(t: &Term, cutoff: usize, amount: isize) -> Term {
    match t {
        Term::Var(i) => {
            if *i >= cutoff {
                let j = (*i as isize + amount) as usize;
                Term::Var(j)
            } else {
                Term::Var(*i)
            }
        }
        Term::Type => Term::Type,
        Term::ConstFam(n) => Term::ConstFam(n.clone()),
        Term::ConstObj(n) => Term::ConstObj(n.clone()),
        Term::PiKind { hint, domain, body } => Term::PiKind {
            hint: hint.clone(),
            domain: Box::new(shift(domain, cutoff, amount)),
            body: Box::new(shift(body, cutoff + 1, amount)),
        },
        Term::PiFam { hint, domain, body } => Term::PiFam {
            hint: hint.clone(),
            domain: Box::new(shift(domain, cutoff, amount)),
            body: Box::new(shift(body, cutoff + 1, amount)),
        },
        Term::RelArrowFam { domain, codomain } => Term::RelArrowFam {
            domain: Box::new(shift(domain, cutoff, amount)),
            codomain: Box::new(shift(codomain, cutoff, amount)),
        },
        Term::FamApp { fam, arg } => Term::FamApp {
            fam: Box::new(shift(fam, cutoff, amount)),
            arg: Box::new(shift(arg, cutoff, amount)),
        },
        Term::InterFam { left, right } => Term::InterFam {
            left: Box::new(shift(left, cutoff, amount)),
            right: Box::new(shift(right, cutoff, amount)),
        },
        Term::UnionFam { left, right } => Term::UnionFam {
            left: Box::new(shift(left, cutoff, amount)),
            right: Box::new(shift(right, cutoff, amount)),
        },
        Term::Lam { hint, domain, body } => Term::Lam {
            hint: hint.clone(),
            domain: Box::new(shift(domain, cutoff, amount)),
            body: Box::new(shift(body, cutoff + 1, amount)),
        },
        Term::RelLam { hint, domain, body } => Term::RelLam {
            hint: hint.clone(),
            domain: Box::new(shift(domain, cutoff, amount)),
            body: Box::new(shift(body, cutoff + 1, amount)),
        },
        Term::App { func, arg } => Term::App {
            func: Box::new(shift(func, cutoff, amount)),
            arg: Box::new(shift(arg, cutoff, amount)),
        },
        Term::RelApp { func, arg } => Term::RelApp {
            func: Box::new(shift(func, cutoff, amount)),
            arg: Box::new(shift(arg, cutoff, amount)),
        },
        Term::SPair { left, right } => Term::SPair {
            left: Box::new(shift(left, cutoff, amount)),
            right: Box::new(shift(right, cutoff, amount)),
        },
        Term::SCoPair { left, right } => Term::SCoPair {
            left: Box::new(shift(left, cutoff, amount)),
            right: Box::new(shift(right, cutoff, amount)),
        },
        Term::ProjL(t) => Term::ProjL(Box::new(shift(t, cutoff, amount))),
        Term::ProjR(t) => Term::ProjR(Box::new(shift(t, cutoff, amount))),
        Term::InjL { other, body } => Term::InjL {
            other: Box::new(shift(other, cutoff, amount)),
            body: Box::new(shift(body, cutoff, amount)),
        },
        Term::InjR { other, body } => Term::InjR {
            other: Box::new(shift(other, cutoff, amount)),
            body: Box::new(shift(body, cutoff, amount)),
        },
    }
}

fn map_binder<F>(t: &Term, depth: usize, f: &F) -> Term
where
    F: Fn(usize, usize) -> Term,
{
    match t {
        Term::Var(i) => f(*i, depth),
        Term::Type => Term::Type,
        Term::ConstFam(n) => Term::ConstFam(n.clone()),
        Term::ConstObj(n) => Term::ConstObj(n.clone()),
        Term::PiKind { hint, domain, body } => Term::PiKind {
            hint: hint.clone(),
            domain: Box::new(map_binder(domain, depth, f)),
            body: Box::new(map_binder(body, depth + 1, f)),
        },
        Term::PiFam { hint, domain, body } => Term::PiFam {
            hint: hint.clone(),
            domain: Box::new(map_binder(domain, depth, f)),
            body: Box::new(map_binder(body, depth + 1, f)),
        },
        Term::RelArrowFam { domain, codomain } => Term::RelArrowFam {
            domain: Box::new(map_binder(domain, depth, f)),
            codomain: Box::new(map_binder(codomain, depth, f)),
        },
        Term::FamApp { fam, arg } => Term::FamApp {
            fam: Box::new(map_binder(fam, depth, f)),
            arg: Box::new(map_binder(arg, depth, f)),
        },
        Term::InterFam { left, right } => Term::InterFam {
            left: Box::new(map_binder(left, depth, f)),
            right: Box::new(map_binder(right, depth, f)),
        },
        Term::UnionFam { left, right } => Term::UnionFam {
            left: Box::new(map_binder(left, depth, f)),
            right: Box::new(map_binder(right, depth, f)),
        },
        Term::Lam { hint, domain, body } => Term::Lam {
            hint: hint.clone(),
            domain: Box::new(map_binder(domain, depth, f)),
            body: Box::new(map_binder(body, depth + 1, f)),
        },
        Term::RelLam { hint, domain, body } => Term::RelLam {
            hint: hint.clone(),
            domain: Box::new(map_binder(domain, depth, f)),
            body: Box::new(map_binder(body, depth + 1, f)),
        },
        Term::App { func, arg } => Term::App {
            func: Box::new(map_binder(func, depth, f)),
            arg: Box::new(map_binder(arg, depth, f)),
        },
        Term::RelApp { func, arg } => Term::RelApp {
            func: Box::new(map_binder(func, depth, f)),
            arg: Box::new(map_binder(arg, depth, f)),
        },
        Term::SPair { left, right } => Term::SPair {
            left: Box::new(map_binder(left, depth, f)),
            right: Box::new(map_binder(right, depth, f)),
        },
        Term::SCoPair { left, right } => Term::SCoPair {
            left: Box::new(map_binder(left, depth, f)),
            right: Box::new(map_binder(right, depth, f)),
        },
        Term::ProjL(t) => Term::ProjL(Box::new(map_binder(t, depth, f))),
        Term::ProjR(t) => Term::ProjR(Box::new(map_binder(t, depth, f))),
        Term::InjL { other, body } => Term::InjL {
            other: Box::new(map_binder(other, depth, f)),
            body: Box::new(map_binder(body, depth, f)),
        },
        Term::InjR { other, body } => Term::InjR {
            other: Box::new(map_binder(other, depth, f)),
            body: Box::new(map_binder(body, depth, f)),
        },
    }
}

/// Capture-avoiding substitution of `u` for the free variable `target`,
/// with the usual index decrement for variables above the target.
pub fn subst(t: &Term, target: usize, u: &Term) -> Term {
    map_binder(t, 0, &|i, depth| {
        if i == target + depth {
            shift(u, 0, depth as isize)
        } else if i > target + depth {
            Term::Var(i - 1)
        } else {
            Term::Var(i)
        }
    })
}

/// Replace every occurrence of the free variable `target` by `u` *without*
/// removing the binder: indices above the target are left untouched. Used to
/// instantiate the dependent family of a union elimination in place.
pub fn replace_var(t: &Term, target: usize, u: &Term) -> Term {
    map_binder(t, 0, &|i, depth| {
        if i == target + depth {
            shift(u, 0, depth as isize)
        } else {
            Term::Var(i)
        }
    })
}

/// Free de Bruijn indices of `t`, relative to the outside of the term.
pub fn free_vars(t: &Term) -> BTreeSet<usize> {
    fn go(t: &Term, depth: usize, out: &mut BTreeSet<usize>) {
        if let Term::Var(i) = t {
            if *i >= depth {
                out.insert(*i - depth);
            }
            return;
        }
        for (c, binds) in t.children() {
            go(c, depth + usize::from(binds), out);
        }
    }
    let mut out = BTreeSet::new();
    go(t, 0, &mut out);
    out
}

/// Assign the unique syntactic category of `t`, or report the first
/// ill-formed mixture found.
pub fn classify(t: &Term) -> Result<Category, CategoryError> {
    fn expect(
        t: &Term,
        want: Category,
        path: &mut Vec<usize>,
        child: usize,
    ) -> Result<(), CategoryError> {
        path.push(child);
        let got = go(t, path)?;
        if got != want {
            let err = CategoryError {
                path: path.clone(),
                message: format!("expected a {want}, found a {got}"),
            };
            path.pop();
            return Err(err);
        }
        path.pop();
        Ok(())
    }

    fn go(t: &Term, path: &mut Vec<usize>) -> Result<Category, CategoryError> {
        match t {
            Term::Type => Ok(Category::Kind),
            Term::PiKind { domain, body, .. } => {
                expect(domain, Category::Family, path, 0)?;
                expect(body, Category::Kind, path, 1)?;
                Ok(Category::Kind)
            }
            Term::ConstFam(_) => Ok(Category::Family),
            Term::PiFam { domain, body, .. } => {
                expect(domain, Category::Family, path, 0)?;
                expect(body, Category::Family, path, 1)?;
                Ok(Category::Family)
            }
            Term::RelArrowFam { domain, codomain } => {
                expect(domain, Category::Family, path, 0)?;
                expect(codomain, Category::Family, path, 1)?;
                Ok(Category::Family)
            }
            Term::FamApp { fam, arg } => {
                expect(fam, Category::Family, path, 0)?;
                expect(arg, Category::Object, path, 1)?;
                Ok(Category::Family)
            }
            Term::InterFam { left, right } | Term::UnionFam { left, right } => {
                expect(left, Category::Family, path, 0)?;
                expect(right, Category::Family, path, 1)?;
                Ok(Category::Family)
            }
            Term::ConstObj(_) | Term::Var(_) => Ok(Category::Object),
            Term::Lam { domain, body, .. } | Term::RelLam { domain, body, .. } => {
                expect(domain, Category::Family, path, 0)?;
                expect(body, Category::Object, path, 1)?;
                Ok(Category::Object)
            }
            Term::App { func, arg } | Term::RelApp { func, arg } => {
                expect(func, Category::Object, path, 0)?;
                expect(arg, Category::Object, path, 1)?;
                Ok(Category::Object)
            }
            Term::SPair { left, right } | Term::SCoPair { left, right } => {
                expect(left, Category::Object, path, 0)?;
                expect(right, Category::Object, path, 1)?;
                Ok(Category::Object)
            }
            Term::ProjL(t) | Term::ProjR(t) => {
                expect(t, Category::Object, path, 0)?;
                Ok(Category::Object)
            }
            Term::InjL { other, body } | Term::InjR { other, body } => {
                expect(other, Category::Family, path, 0)?;
                expect(body, Category::Object, path, 1)?;
                Ok(Category::Object)
            }
        }
    }

    go(t, &mut Vec::new())
}

/// One signature entry. For family constants `classifier` is a kind, for
/// object constants a family; `body` carries a transparent definition when
/// the entry was introduced by `Definition`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigEntry {
    pub name: String,
    pub classifier: Term,
    pub is_family: bool,
    pub body: Option<Term>,
}

/// Ordered list of constant declarations; names are pairwise distinct and
/// each classifier was validated against the preceding prefix only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Signature {
    pub entries: Vec<SigEntry>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn lookup(&self, name: &str) -> Option<&SigEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    pub fn declare_family(&mut self, name: impl Into<String>, kind: Term) {
        self.entries.push(SigEntry {
            name: name.into(),
            classifier: kind,
            is_family: true,
            body: None,
        });
    }

    pub fn declare_object(&mut self, name: impl Into<String>, family: Term) {
        self.entries.push(SigEntry {
            name: name.into(),
            classifier: family,
            is_family: false,
            body: None,
        });
    }
}

/// Ordered list of variable bindings, innermost last. `Var(0)` refers to the
/// last entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Context {
    pub entries: Vec<(Hint, Term)>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, hint: Hint, family: Term) {
        self.entries.push((hint, family));
    }

    pub fn extended(&self, hint: Hint, family: Term) -> Context {
        let mut out = self.clone();
        out.push(hint, family);
        out
    }

    /// Family of `Var(index)`, shifted so it is well-scoped in the full
    /// context.
    pub fn lookup(&self, index: usize) -> Option<Term> {
        if index >= self.entries.len() {
            return None;
        }
        let pos = self.entries.len() - 1 - index;
        Some(shift(&self.entries[pos].1, 0, (index + 1) as isize))
    }
}

/// Every constant resolves in the signature (in the right namespace), every
/// free index resolves in the context, and the tree belongs to one grammar.
pub fn well_scoped(sig: &Signature, ctx: &Context, t: &Term) -> bool {
    fn go(sig: &Signature, depth: usize, t: &Term) -> bool {
        match t {
            Term::Var(i) => *i < depth,
            Term::ConstFam(n) => sig.lookup(n).map(|e| e.is_family).unwrap_or(false),
            Term::ConstObj(n) => sig.lookup(n).map(|e| !e.is_family).unwrap_or(false),
            _ => t
                .children()
                .into_iter()
                .all(|(c, binds)| go(sig, depth + usize::from(binds), c)),
        }
    }
    classify(t).is_ok() && go(sig, ctx.len(), t)
}
