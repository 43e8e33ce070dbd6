//! Decision procedure for the restricted subtype theory on simple types
//! (atoms, arrow, intersection, union; no omega, no distributivity of
//! intersection over union), plus synthesis of coercion terms witnessing
//! each derivable inclusion as a relevant function whose essence is the
//! identity.
//!
//! The decision procedure saturates the subterm closure of the query (and
//! of any relevant-arrow axioms in the signature), keeping the smallest
//! derivation found for each pair. Termination is by finiteness of the
//! closure; completeness at that universe is what the oracle tests check.

use crate::syntax::{shift, SigEntry, Signature, Term};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Types without dependencies or relevant families.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimpleType {
    Atom(String),
    Arrow(Box<SimpleType>, Box<SimpleType>),
    Inter(Box<SimpleType>, Box<SimpleType>),
    Union(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn atom(s: impl Into<String>) -> Self {
        SimpleType::Atom(s.into())
    }

    pub fn arrow(a: SimpleType, b: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn inter(a: SimpleType, b: SimpleType) -> Self {
        SimpleType::Inter(Box::new(a), Box::new(b))
    }

    pub fn union(a: SimpleType, b: SimpleType) -> Self {
        SimpleType::Union(Box::new(a), Box::new(b))
    }

    /// Embed into a kernel family. Arrows become non-dependent products.
    pub fn to_family(&self) -> Term {
        match self {
            SimpleType::Atom(a) => Term::cfam(a),
            SimpleType::Arrow(a, b) => Term::arrow(a.to_family(), b.to_family()),
            SimpleType::Inter(a, b) => Term::inter(a.to_family(), b.to_family()),
            SimpleType::Union(a, b) => Term::union(a.to_family(), b.to_family()),
        }
    }

    /// Partial inverse of `to_family`: succeeds only on closed families
    /// built from atoms, non-dependent products, intersections, and unions.
    pub fn from_family(t: &Term) -> Option<SimpleType> {
        match t {
            Term::ConstFam(a) => Some(SimpleType::Atom(a.clone())),
            Term::PiFam { body, domain, .. } => {
                if crate::syntax::free_vars(body).contains(&0) {
                    return None;
                }
                let dom = SimpleType::from_family(domain)?;
                let cod = SimpleType::from_family(&shift(body, 1, -1))?;
                Some(SimpleType::arrow(dom, cod))
            }
            Term::InterFam { left, right } => Some(SimpleType::inter(
                SimpleType::from_family(left)?,
                SimpleType::from_family(right)?,
            )),
            Term::UnionFam { left, right } => Some(SimpleType::union(
                SimpleType::from_family(left)?,
                SimpleType::from_family(right)?,
            )),
            _ => None,
        }
    }

    fn subterms_into(&self, out: &mut BTreeSet<SimpleType>) {
        out.insert(self.clone());
        match self {
            SimpleType::Atom(_) => {}
            SimpleType::Arrow(a, b) | SimpleType::Inter(a, b) | SimpleType::Union(a, b) => {
                a.subterms_into(out);
                b.subterms_into(out);
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::printer::print_term(&self.to_family()))
    }
}

/// Derivation trees. Each constructor corresponds to one axiom or rule of
/// the theory; `Axiom` cites a signature constant of relevant-arrow type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubDeriv {
    /// s <= s
    Refl(SimpleType),
    /// s <= s & s
    PairSelf(SimpleType),
    /// s | s <= s
    UnionIdem(SimpleType),
    /// l & r <= l
    ProjL(SimpleType, SimpleType),
    /// l & r <= r
    ProjR(SimpleType, SimpleType),
    /// l <= l | r
    InjL(SimpleType, SimpleType),
    /// r <= l | r
    InjR(SimpleType, SimpleType),
    /// s1 <= s2, t1 <= t2 entail s1 & t1 <= s2 & t2
    MonoInter(Box<SubDeriv>, Box<SubDeriv>),
    /// s1 <= s2, t1 <= t2 entail s1 | t1 <= s2 | t2
    MonoUnion(Box<SubDeriv>, Box<SubDeriv>),
    /// s <= t, t <= r entail s <= r
    Trans(Box<SubDeriv>, Box<SubDeriv>),
    /// (s -> t) & (s -> r) <= s -> t & r
    ArrowInterDist {
        dom: SimpleType,
        cod_l: SimpleType,
        cod_r: SimpleType,
    },
    /// (s -> r) & (t -> r) <= (s | t) -> r
    ArrowUnionDist {
        dom_l: SimpleType,
        dom_r: SimpleType,
        cod: SimpleType,
    },
    /// s2 <= s1, t1 <= t2 entail s1 -> t1 <= s2 -> t2
    ArrowMono(Box<SubDeriv>, Box<SubDeriv>),
    /// c : src >-> dst in the signature
    Axiom {
        name: String,
        src: SimpleType,
        dst: SimpleType,
    },
}

impl SubDeriv {
    /// The pair this derivation concludes.
    pub fn conclusion(&self) -> (SimpleType, SimpleType) {
        match self {
            SubDeriv::Refl(s) => (s.clone(), s.clone()),
            SubDeriv::PairSelf(s) => (s.clone(), SimpleType::inter(s.clone(), s.clone())),
            SubDeriv::UnionIdem(s) => (SimpleType::union(s.clone(), s.clone()), s.clone()),
            SubDeriv::ProjL(l, r) => (SimpleType::inter(l.clone(), r.clone()), l.clone()),
            SubDeriv::ProjR(l, r) => (SimpleType::inter(l.clone(), r.clone()), r.clone()),
            SubDeriv::InjL(l, r) => (l.clone(), SimpleType::union(l.clone(), r.clone())),
            SubDeriv::InjR(l, r) => (r.clone(), SimpleType::union(l.clone(), r.clone())),
            SubDeriv::MonoInter(d1, d2) => {
                let (s1, s2) = d1.conclusion();
                let (t1, t2) = d2.conclusion();
                (SimpleType::inter(s1, t1), SimpleType::inter(s2, t2))
            }
            SubDeriv::MonoUnion(d1, d2) => {
                let (s1, s2) = d1.conclusion();
                let (t1, t2) = d2.conclusion();
                (SimpleType::union(s1, t1), SimpleType::union(s2, t2))
            }
            SubDeriv::Trans(d1, d2) => (d1.conclusion().0, d2.conclusion().1),
            SubDeriv::ArrowInterDist { dom, cod_l, cod_r } => (
                SimpleType::inter(
                    SimpleType::arrow(dom.clone(), cod_l.clone()),
                    SimpleType::arrow(dom.clone(), cod_r.clone()),
                ),
                SimpleType::arrow(dom.clone(), SimpleType::inter(cod_l.clone(), cod_r.clone())),
            ),
            SubDeriv::ArrowUnionDist { dom_l, dom_r, cod } => (
                SimpleType::inter(
                    SimpleType::arrow(dom_l.clone(), cod.clone()),
                    SimpleType::arrow(dom_r.clone(), cod.clone()),
                ),
                SimpleType::arrow(SimpleType::union(dom_l.clone(), dom_r.clone()), cod.clone()),
            ),
            SubDeriv::ArrowMono(dd, cd) => {
                let (s2, s1) = dd.conclusion();
                let (t1, t2) = cd.conclusion();
                (SimpleType::arrow(s1, t1), SimpleType::arrow(s2, t2))
            }
            SubDeriv::Axiom { src, dst, .. } => (src.clone(), dst.clone()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SubDeriv::Refl(_)
            | SubDeriv::PairSelf(_)
            | SubDeriv::UnionIdem(_)
            | SubDeriv::ProjL(..)
            | SubDeriv::ProjR(..)
            | SubDeriv::InjL(..)
            | SubDeriv::InjR(..)
            | SubDeriv::ArrowInterDist { .. }
            | SubDeriv::ArrowUnionDist { .. }
            | SubDeriv::Axiom { .. } => 1,
            SubDeriv::MonoInter(a, b) | SubDeriv::MonoUnion(a, b) | SubDeriv::Trans(a, b)
            | SubDeriv::ArrowMono(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Re-check that every node instantiates its rule schema and that axiom
    /// nodes cite a matching signature constant.
    pub fn validate(&self, sig: &Signature) -> bool {
        match self {
            SubDeriv::MonoInter(a, b)
            | SubDeriv::MonoUnion(a, b)
            | SubDeriv::ArrowMono(a, b) => a.validate(sig) && b.validate(sig),
            SubDeriv::Trans(a, b) => {
                a.validate(sig) && b.validate(sig) && a.conclusion().1 == b.conclusion().0
            }
            SubDeriv::Axiom { name, src, dst } => match sig.lookup(name) {
                Some(e) if !e.is_family => {
                    axiom_of_entry(e).is_some_and(|(s, d)| s == *src && d == *dst)
                }
                _ => false,
            },
            _ => true,
        }
    }
}

/// A relevant-arrow object constant read as a subtyping axiom.
fn axiom_of_entry(e: &SigEntry) -> Option<(SimpleType, SimpleType)> {
    if e.is_family {
        return None;
    }
    match &e.classifier {
        Term::RelArrowFam { domain, codomain } => Some((
            SimpleType::from_family(domain)?,
            SimpleType::from_family(codomain)?,
        )),
        _ => None,
    }
}

/// All subtyping axioms a signature contributes.
pub fn signature_axioms(sig: &Signature) -> Vec<(String, SimpleType, SimpleType)> {
    sig.entries
        .iter()
        .filter_map(|e| axiom_of_entry(e).map(|(s, d)| (e.name.clone(), s, d)))
        .collect()
}

type Table = BTreeMap<(SimpleType, SimpleType), SubDeriv>;

/// How a saturation entry was concluded. Composite steps reference their
/// premises by index pair instead of owning subtrees, so the fixed-point
/// loop never deep-clones derivations.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Step {
    Refl,
    PairSelf,
    UnionIdem,
    ProjL,
    ProjR,
    InjL,
    InjR,
    MonoInter((usize, usize), (usize, usize)),
    MonoUnion((usize, usize), (usize, usize)),
    Trans((usize, usize), (usize, usize)),
    ArrowInterDist,
    ArrowUnionDist,
    ArrowMono((usize, usize), (usize, usize)),
    Axiom(String),
}

#[derive(Debug, Clone)]
struct Node {
    step: Step,
    size: usize,
}

type IdxTable = BTreeMap<(usize, usize), Node>;

fn record(table: &mut IdxTable, key: (usize, usize), node: Node) -> bool {
    match table.get(&key) {
        Some(old) if old.size <= node.size => false,
        _ => {
            table.insert(key, node);
            true
        }
    }
}

fn leaf(step: Step) -> Node {
    Node { step, size: 1 }
}

/// Saturate the derivability table over `universe`, which must be closed
/// under subterms.
fn saturate_idx(
    items: &[SimpleType],
    axioms: &[(String, SimpleType, SimpleType)],
) -> IdxTable {
    let index: BTreeMap<&SimpleType, usize> =
        items.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let idx = |s: &SimpleType| index.get(s).copied();
    let mut table = IdxTable::new();
    for (i, s) in items.iter().enumerate() {
        record(&mut table, (i, i), leaf(Step::Refl));
        match s {
            SimpleType::Inter(l, r) => {
                if let Some(li) = idx(l) {
                    record(&mut table, (i, li), leaf(Step::ProjL));
                }
                if let Some(ri) = idx(r) {
                    record(&mut table, (i, ri), leaf(Step::ProjR));
                }
                if l == r {
                    if let Some(li) = idx(l) {
                        record(&mut table, (li, i), leaf(Step::PairSelf));
                    }
                }
                // distributivity axioms fire when the left side has the
                // right shape and the right side lies in the universe
                if let (SimpleType::Arrow(s1, t1), SimpleType::Arrow(s2, t2)) = (&**l, &**r) {
                    if s1 == s2 {
                        let rhs = SimpleType::arrow(
                            (**s1).clone(),
                            SimpleType::inter((**t1).clone(), (**t2).clone()),
                        );
                        if let Some(ri) = idx(&rhs) {
                            record(&mut table, (i, ri), leaf(Step::ArrowInterDist));
                        }
                    }
                    if t1 == t2 {
                        let rhs = SimpleType::arrow(
                            SimpleType::union((**s1).clone(), (**s2).clone()),
                            (**t1).clone(),
                        );
                        if let Some(ri) = idx(&rhs) {
                            record(&mut table, (i, ri), leaf(Step::ArrowUnionDist));
                        }
                    }
                }
            }
            SimpleType::Union(l, r) => {
                if let Some(li) = idx(l) {
                    record(&mut table, (li, i), leaf(Step::InjL));
                }
                if let Some(ri) = idx(r) {
                    record(&mut table, (ri, i), leaf(Step::InjR));
                }
                if l == r {
                    if let Some(li) = idx(l) {
                        record(&mut table, (i, li), leaf(Step::UnionIdem));
                    }
                }
            }
            _ => {}
        }
    }
    for (name, src, dst) in axioms {
        if let (Some(si), Some(di)) = (idx(src), idx(dst)) {
            record(&mut table, (si, di), leaf(Step::Axiom(name.clone())));
        }
    }

    // component index pairs for the monotonicity rules, precomputed once
    struct MonoSite {
        target: usize,
        left: usize,
        right: usize,
        kind: u8, // 0 inter, 1 union, 2 arrow
    }
    let mut sites = Vec::new();
    for (i, s) in items.iter().enumerate() {
        let (l, r, kind) = match s {
            SimpleType::Inter(l, r) => (l, r, 0),
            SimpleType::Union(l, r) => (l, r, 1),
            SimpleType::Arrow(l, r) => (l, r, 2),
            SimpleType::Atom(_) => continue,
        };
        if let (Some(li), Some(ri)) = (idx(l), idx(r)) {
            sites.push(MonoSite {
                target: i,
                left: li,
                right: ri,
                kind,
            });
        }
    }

    // closure under the monotonicity rules and transitivity, to a size
    // fixed point
    loop {
        let mut changed = false;
        for s in &sites {
            for t in &sites {
                if s.kind != t.kind {
                    continue;
                }
                let (first, second) = if s.kind == 2 {
                    // arrows are contravariant in the domain
                    ((t.left, s.left), (s.right, t.right))
                } else {
                    ((s.left, t.left), (s.right, t.right))
                };
                if let (Some(d1), Some(d2)) = (table.get(&first), table.get(&second)) {
                    let node = Node {
                        step: match s.kind {
                            0 => Step::MonoInter(first, second),
                            1 => Step::MonoUnion(first, second),
                            _ => Step::ArrowMono(first, second),
                        },
                        size: 1 + d1.size + d2.size,
                    };
                    changed |= record(&mut table, (s.target, t.target), node);
                }
            }
        }
        let keys: Vec<((usize, usize), usize)> =
            table.iter().map(|(k, n)| (*k, n.size)).collect();
        let mut by_mid: BTreeMap<usize, (Vec<((usize, usize), usize)>, Vec<((usize, usize), usize)>)> =
            BTreeMap::new();
        for (key, size) in &keys {
            by_mid.entry(key.1).or_default().0.push((*key, *size));
            by_mid.entry(key.0).or_default().1.push((*key, *size));
        }
        for (_, (ins, outs)) in &by_mid {
            for (k1, s1) in ins {
                for (k2, s2) in outs {
                    let (a, b) = *k1;
                    let (b2, c) = *k2;
                    if a == c || (a == b && b2 == c) {
                        continue;
                    }
                    let node = Node {
                        step: Step::Trans(*k1, *k2),
                        size: 1 + s1 + s2,
                    };
                    changed |= record(&mut table, (a, c), node);
                }
            }
        }
        if !changed {
            break;
        }
    }
    table
}

/// Rebuild the derivation tree for `key` from the saturated index table.
fn rebuild(items: &[SimpleType], table: &IdxTable, key: (usize, usize)) -> SubDeriv {
    let node = &table[&key];
    let lhs = &items[key.0];
    let rhs = &items[key.1];
    let sub = |k: (usize, usize)| Box::new(rebuild(items, table, k));
    match &node.step {
        Step::Refl => SubDeriv::Refl(lhs.clone()),
        Step::PairSelf => SubDeriv::PairSelf(lhs.clone()),
        Step::UnionIdem => SubDeriv::UnionIdem(rhs.clone()),
        Step::ProjL | Step::ProjR => match lhs {
            SimpleType::Inter(l, r) => {
                if matches!(node.step, Step::ProjL) {
                    SubDeriv::ProjL((**l).clone(), (**r).clone())
                } else {
                    SubDeriv::ProjR((**l).clone(), (**r).clone())
                }
            }
            _ => unreachable!("projection from a non-intersection"),
        },
        Step::InjL | Step::InjR => match rhs {
            SimpleType::Union(l, r) => {
                if matches!(node.step, Step::InjL) {
                    SubDeriv::InjL((**l).clone(), (**r).clone())
                } else {
                    SubDeriv::InjR((**l).clone(), (**r).clone())
                }
            }
            _ => unreachable!("injection into a non-union"),
        },
        Step::MonoInter(k1, k2) => SubDeriv::MonoInter(sub(*k1), sub(*k2)),
        Step::MonoUnion(k1, k2) => SubDeriv::MonoUnion(sub(*k1), sub(*k2)),
        Step::Trans(k1, k2) => SubDeriv::Trans(sub(*k1), sub(*k2)),
        Step::ArrowInterDist => match lhs {
            SimpleType::Inter(l, _) => match &**l {
                SimpleType::Arrow(dom, cod_l) => match lhs {
                    SimpleType::Inter(_, r) => match &**r {
                        SimpleType::Arrow(_, cod_r) => SubDeriv::ArrowInterDist {
                            dom: (**dom).clone(),
                            cod_l: (**cod_l).clone(),
                            cod_r: (**cod_r).clone(),
                        },
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                },
                _ => unreachable!(),
            },
            _ => unreachable!("distribution from a non-intersection"),
        },
        Step::ArrowUnionDist => match lhs {
            SimpleType::Inter(l, r) => match (&**l, &**r) {
                (SimpleType::Arrow(dom_l, cod), SimpleType::Arrow(dom_r, _)) => {
                    SubDeriv::ArrowUnionDist {
                        dom_l: (**dom_l).clone(),
                        dom_r: (**dom_r).clone(),
                        cod: (**cod).clone(),
                    }
                }
                _ => unreachable!(),
            },
            _ => unreachable!("distribution from a non-intersection"),
        },
        Step::ArrowMono(k1, k2) => SubDeriv::ArrowMono(sub(*k1), sub(*k2)),
        Step::Axiom(name) => SubDeriv::Axiom {
            name: name.clone(),
            src: lhs.clone(),
            dst: rhs.clone(),
        },
    }
}

/// Saturate over `universe` and return full derivation trees.
fn saturate(universe: &BTreeSet<SimpleType>, axioms: &[(String, SimpleType, SimpleType)]) -> Table {
    let items: Vec<SimpleType> = universe.iter().cloned().collect();
    let table = saturate_idx(&items, axioms);
    table
        .keys()
        .map(|k| {
            (
                (items[k.0].clone(), items[k.1].clone()),
                rebuild(&items, &table, *k),
            )
        })
        .collect()
}

/// Subterm closure of the query together with all axiom sides, enriched
/// with the intermediates derivations may pass through but subterms do
/// not provide: the idempotence doubles `s & s` and `s | s` of every
/// member (the least-upper/greatest-lower bound arguments go through
/// them), and the conclusions of the two arrow distribution axioms.
fn query_universe(
    lhs: &SimpleType,
    rhs: &SimpleType,
    axioms: &[(String, SimpleType, SimpleType)],
) -> BTreeSet<SimpleType> {
    let mut u = BTreeSet::new();
    lhs.subterms_into(&mut u);
    rhs.subterms_into(&mut u);
    for (_, s, d) in axioms {
        s.subterms_into(&mut u);
        d.subterms_into(&mut u);
    }
    let mut extra = BTreeSet::new();
    for s in &u {
        extra.insert(SimpleType::inter(s.clone(), s.clone()));
        extra.insert(SimpleType::union(s.clone(), s.clone()));
        if let SimpleType::Inter(l, r) = s {
            if let (SimpleType::Arrow(s1, t1), SimpleType::Arrow(s2, t2)) = (&**l, &**r) {
                if s1 == s2 {
                    SimpleType::arrow(
                        (**s1).clone(),
                        SimpleType::inter((**t1).clone(), (**t2).clone()),
                    )
                    .subterms_into(&mut extra);
                }
                if t1 == t2 {
                    SimpleType::arrow(
                        SimpleType::union((**s1).clone(), (**s2).clone()),
                        (**t1).clone(),
                    )
                    .subterms_into(&mut extra);
                }
            }
        }
    }
    u.extend(extra);
    u
}

/// Decide every pair over `universe` at once: the same saturation as
/// [`decide_sub`] with the table shared across queries. `universe` must
/// be closed under subterms.
pub fn decide_sub_all(
    sig: &Signature,
    universe: &BTreeSet<SimpleType>,
) -> BTreeMap<(SimpleType, SimpleType), SubDeriv> {
    let axioms = signature_axioms(sig);
    saturate(universe, &axioms)
}

/// Decide the inclusion, returning a smallest derivation found.
pub fn decide_sub(sig: &Signature, lhs: &SimpleType, rhs: &SimpleType) -> Option<SubDeriv> {
    let axioms = signature_axioms(sig);
    let universe = query_universe(lhs, rhs, &axioms);
    let items: Vec<SimpleType> = universe.iter().cloned().collect();
    let table = saturate_idx(&items, &axioms);
    let li = items.iter().position(|s| s == lhs)?;
    let ri = items.iter().position(|s| s == rhs)?;
    table
        .get(&(li, ri))
        .map(|_| rebuild(&items, &table, (li, ri)))
}

/// Independent completeness oracle: boolean saturation of the derivability
/// relation over a fixed universe, no derivations and no size tracking.
/// Kept deliberately separate from `saturate` so the two can disagree.
pub fn closure_oracle_with_axioms(
    universe: &BTreeSet<SimpleType>,
    axioms: &[(SimpleType, SimpleType)],
) -> BTreeSet<(SimpleType, SimpleType)> {
    let items: Vec<&SimpleType> = universe.iter().collect();
    let mut rel: BTreeSet<(SimpleType, SimpleType)> = BTreeSet::new();
    let add = |rel: &mut BTreeSet<(SimpleType, SimpleType)>, a: &SimpleType, b: &SimpleType| {
        if universe.contains(a) && universe.contains(b) {
            rel.insert((a.clone(), b.clone()))
        } else {
            false
        }
    };
    for s in &items {
        add(&mut rel, s, s);
        let double_inter = SimpleType::inter((*s).clone(), (*s).clone());
        add(&mut rel, s, &double_inter);
        let double_union = SimpleType::union((*s).clone(), (*s).clone());
        add(&mut rel, &double_union, s);
        match s {
            SimpleType::Inter(l, r) => {
                add(&mut rel, s, l);
                add(&mut rel, s, r);
                if let (SimpleType::Arrow(s1, t1), SimpleType::Arrow(s2, t2)) = (&**l, &**r) {
                    if s1 == s2 {
                        let rhs = SimpleType::arrow(
                            (**s1).clone(),
                            SimpleType::inter((**t1).clone(), (**t2).clone()),
                        );
                        add(&mut rel, s, &rhs);
                    }
                    if t1 == t2 {
                        let rhs = SimpleType::arrow(
                            SimpleType::union((**s1).clone(), (**s2).clone()),
                            (**t1).clone(),
                        );
                        add(&mut rel, s, &rhs);
                    }
                }
            }
            SimpleType::Union(l, r) => {
                add(&mut rel, l, s);
                add(&mut rel, r, s);
            }
            _ => {}
        }
    }
    for (a, b) in axioms {
        add(&mut rel, a, b);
    }
    loop {
        let snapshot: Vec<(SimpleType, SimpleType)> = rel.iter().cloned().collect();
        let before = rel.len();
        for s in &items {
            for t in &items {
                let compatible = match (s, t) {
                    (SimpleType::Inter(a, b), SimpleType::Inter(c, d))
                    | (SimpleType::Union(a, b), SimpleType::Union(c, d)) => rel
                        .contains(&((**a).clone(), (**c).clone()))
                        && rel.contains(&((**b).clone(), (**d).clone())),
                    (SimpleType::Arrow(a, b), SimpleType::Arrow(c, d)) => rel
                        .contains(&((**c).clone(), (**a).clone()))
                        && rel.contains(&((**b).clone(), (**d).clone())),
                    _ => false,
                };
                if compatible {
                    rel.insert(((*s).clone(), (*t).clone()));
                }
            }
        }
        for (a, b) in &snapshot {
            for (b2, c) in &snapshot {
                if b == b2 {
                    rel.insert((a.clone(), c.clone()));
                }
            }
        }
        if rel.len() == before {
            break;
        }
    }
    rel
}

pub fn closure_oracle(universe: &BTreeSet<SimpleType>) -> BTreeSet<(SimpleType, SimpleType)> {
    closure_oracle_with_axioms(universe, &[])
}

/// Compile a derivation into the coercion of `subject` from the left
/// conclusion type to the right one.
pub fn coerce(d: &SubDeriv, subject: &Term) -> Term {
    match d {
        SubDeriv::Refl(_) => subject.clone(),
        SubDeriv::PairSelf(_) => Term::spair(subject.clone(), subject.clone()),
        SubDeriv::UnionIdem(s) => {
            let sf = s.to_family();
            Term::app(
                Term::scopair(
                    Term::lam("x", sf.clone(), Term::Var(0)),
                    Term::lam("x", sf, Term::Var(0)),
                ),
                subject.clone(),
            )
        }
        SubDeriv::ProjL(..) => Term::proj_l(subject.clone()),
        SubDeriv::ProjR(..) => Term::proj_r(subject.clone()),
        SubDeriv::InjL(_, r) => Term::inj_l(r.to_family(), subject.clone()),
        SubDeriv::InjR(l, _) => Term::inj_r(l.to_family(), subject.clone()),
        SubDeriv::MonoInter(d1, d2) => Term::spair(
            coerce(d1, &Term::proj_l(subject.clone())),
            coerce(d2, &Term::proj_r(subject.clone())),
        ),
        SubDeriv::MonoUnion(d1, d2) => {
            let (s1, s2) = d1.conclusion();
            let (t1, t2) = d2.conclusion();
            Term::app(
                Term::scopair(
                    Term::lam(
                        "x",
                        s1.to_family(),
                        Term::inj_l(t2.to_family(), coerce(d1, &Term::Var(0))),
                    ),
                    Term::lam(
                        "x",
                        t1.to_family(),
                        Term::inj_r(s2.to_family(), coerce(d2, &Term::Var(0))),
                    ),
                ),
                subject.clone(),
            )
        }
        SubDeriv::Trans(d1, d2) => coerce(d2, &coerce(d1, subject)),
        SubDeriv::ArrowInterDist { dom, .. } => {
            let lifted = shift(subject, 0, 1);
            Term::lam(
                "x",
                dom.to_family(),
                Term::spair(
                    Term::app(Term::proj_l(lifted.clone()), Term::Var(0)),
                    Term::app(Term::proj_r(lifted), Term::Var(0)),
                ),
            )
        }
        SubDeriv::ArrowUnionDist { dom_l, dom_r, .. } => {
            let lifted = shift(subject, 0, 2);
            Term::lam(
                "x",
                SimpleType::union(dom_l.clone(), dom_r.clone()).to_family(),
                Term::app(
                    Term::scopair(
                        Term::lam(
                            "y",
                            dom_l.to_family(),
                            Term::app(Term::proj_l(lifted.clone()), Term::Var(0)),
                        ),
                        Term::lam(
                            "y",
                            dom_r.to_family(),
                            Term::app(Term::proj_r(lifted), Term::Var(0)),
                        ),
                    ),
                    Term::Var(0),
                ),
            )
        }
        SubDeriv::ArrowMono(dd, cd) => {
            let (s2, _) = dd.conclusion();
            let lifted = shift(subject, 0, 1);
            Term::lam(
                "x",
                s2.to_family(),
                coerce(cd, &Term::app(lifted, coerce(dd, &Term::Var(0)))),
            )
        }
        SubDeriv::Axiom { name, .. } => Term::rel_app(Term::cobj(name), subject.clone()),
    }
}

/// Synthesize an inhabitant of `lhs >-> rhs`, or report the inclusion not
/// derivable.
pub fn inhabit_relevant(sig: &Signature, lhs: &SimpleType, rhs: &SimpleType) -> Option<Term> {
    let d = decide_sub(sig, lhs, rhs)?;
    Some(Term::rel_lam(
        "x",
        lhs.to_family(),
        coerce(&d, &Term::Var(0)),
    ))
}

/// Refinement-style declarations: plain atoms plus atom inclusions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefinementDecl {
    Atom(String),
    Sub { sub: String, sup: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndeclaredAtom(pub String);

impl fmt::Display for UndeclaredAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "undeclared atom `{}`", self.0)
    }
}

impl std::error::Error for UndeclaredAtom {}

/// Translate refinement declarations into a signature: each inclusion
/// `a1 <= a2` becomes a fresh constant of type `a1 >-> a2`.
pub fn encode_refinement_signature(
    decls: &[RefinementDecl],
) -> Result<Signature, UndeclaredAtom> {
    let mut sig = Signature::new();
    for d in decls {
        match d {
            RefinementDecl::Atom(a) => sig.declare_family(a.clone(), Term::Type),
            RefinementDecl::Sub { sub, sup } => {
                for a in [sub, sup] {
                    if !sig.entries.iter().any(|e| e.is_family && e.name == *a) {
                        return Err(UndeclaredAtom(a.clone()));
                    }
                }
                sig.declare_object(
                    format!("c_{sub}_{sup}"),
                    Term::rel_arrow(Term::cfam(sub), Term::cfam(sup)),
                );
            }
        }
    }
    Ok(sig)
}
