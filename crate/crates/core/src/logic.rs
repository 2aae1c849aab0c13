//! Quantale-valued modal formulas and logical distances.
//!
//! Formulas are built from ⊤, binary join/meet, tensoring and symmetrised hom
//! with constants, and named modalities interpreted by predicate liftings:
//!
//! ```text
//! φ ::= T | (φ|φ) | (φ&φ) | <u>*φ | hom(<u>,φ) | name(φ,…) | name
//! ```
//!
//! A formula denotes a predicate on the states of a coalgebra; the logical
//! distance at depth d is the symmetrised hom-distance between the value
//! vectors of all formulas of modal depth ≤ d. The enumeration works layer by
//! layer, closing under the propositional operations with semantic
//! deduplication and an explicit vector budget.

use crate::behaviour::{behavioural_distance, BdOpts, Coalgebra, DistanceResult};
use crate::error::{Error, Result};
use crate::functor::SetFunctor;
use crate::lifting::{Lifting, PredicateLifting};
use crate::quantale::{QValue, Quantale, Rat};
use num::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Top,
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Tensor(QValue, Box<Formula>),
    HomS(QValue, Box<Formula>),
    Modal(String, Vec<Formula>),
}

impl Formula {
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top => 0,
            Formula::Or(a, b) | Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Tensor(_, a) | Formula::HomS(_, a) => a.modal_depth(),
            Formula::Modal(_, args) => {
                1 + args.iter().map(Formula::modal_depth).max().unwrap_or(0)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => write!(f, "T"),
            Formula::Or(a, b) => write!(f, "({a}|{b})"),
            Formula::And(a, b) => write!(f, "({a}&{b})"),
            Formula::Tensor(u, a) => write!(f, "<{u}>*{a}"),
            Formula::HomS(u, a) => write!(f, "hom(<{u}>,{a})"),
            Formula::Modal(name, args) => {
                if args.is_empty() {
                    write!(f, "{name}")
                } else {
                    write!(f, "{name}(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")
                }
            }
        }
    }
}

struct Parser<'a> {
    q: &'a Quantale,
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected {c:?}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        let start = self.pos;
        let mut chars = self.src[self.pos..].char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.err("expected a name")),
        }
        let mut end = self.src.len();
        for (i, c) in chars {
            if !(c.is_ascii_alphanumeric() || c == '_') {
                end = self.pos + i;
                break;
            }
        }
        if end == self.src.len() {
            // identifier runs to the end of input
        }
        let s = self.src[start..end].to_string();
        self.pos = end;
        Ok(s)
    }

    fn value(&mut self) -> Result<QValue> {
        self.expect('<')?;
        let start = self.pos;
        let Some(rel) = self.src[self.pos..].find('>') else {
            return Err(self.err("unterminated constant, expected '>'"));
        };
        let text = &self.src[start..start + rel];
        self.pos = start + rel + 1;
        self.q.value_from_str(text).map_err(|e| Error::Parse {
            pos: start,
            msg: format!("constant {text:?}: {e}"),
        })
    }

    fn formula(&mut self) -> Result<Formula> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.expect('(')?;
                let a = self.formula()?;
                self.skip_ws();
                let op = self.peek().ok_or_else(|| self.err("expected '|' or '&'"))?;
                if op != '|' && op != '&' {
                    return Err(self.err("expected '|' or '&'"));
                }
                self.pos += 1;
                let b = self.formula()?;
                self.skip_ws();
                self.expect(')')?;
                Ok(if op == '|' {
                    Formula::Or(Box::new(a), Box::new(b))
                } else {
                    Formula::And(Box::new(a), Box::new(b))
                })
            }
            Some('<') => {
                let u = self.value()?;
                self.skip_ws();
                self.expect('*')?;
                let a = self.formula()?;
                Ok(Formula::Tensor(u, Box::new(a)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.ident()?;
                if name == "T" {
                    return Ok(Formula::Top);
                }
                if name == "hom" {
                    self.skip_ws();
                    self.expect('(')?;
                    self.skip_ws();
                    let u = self.value()?;
                    self.skip_ws();
                    self.expect(',')?;
                    let a = self.formula()?;
                    self.skip_ws();
                    self.expect(')')?;
                    return Ok(Formula::HomS(u, Box::new(a)));
                }
                self.skip_ws();
                if self.peek() == Some('(') {
                    self.expect('(')?;
                    let mut args = vec![self.formula()?];
                    loop {
                        self.skip_ws();
                        match self.peek() {
                            Some(',') => {
                                self.pos += 1;
                                args.push(self.formula()?);
                            }
                            Some(')') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.err("expected ',' or ')'")),
                        }
                    }
                    Ok(Formula::Modal(name, args))
                } else {
                    Ok(Formula::Modal(name, Vec::new()))
                }
            }
            Some(c) => Err(self.err(format!("unexpected {c:?}"))),
            None => Err(self.err("unexpected end of formula")),
        }
    }
}

pub fn parse_formula(q: &Quantale, src: &str) -> Result<Formula> {
    let mut p = Parser { q, src, pos: 0 };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Modality registry and evaluation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct ModalityRegistry {
    map: BTreeMap<String, PredicateLifting>,
}

impl ModalityRegistry {
    pub fn insert(&mut self, pl: PredicateLifting) {
        self.map.insert(pl.name.clone(), pl);
    }

    pub fn get(&self, name: &str) -> Option<&PredicateLifting> {
        self.map.get(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.map.keys().map(String::as_str).collect()
    }

    pub fn liftings(&self) -> impl Iterator<Item = &PredicateLifting> {
        self.map.values()
    }

    /// Every modality mentioned in φ resolves with the right arity.
    pub fn validate(&self, phi: &Formula) -> Result<()> {
        match phi {
            Formula::Top => Ok(()),
            Formula::Or(a, b) | Formula::And(a, b) => {
                self.validate(a)?;
                self.validate(b)
            }
            Formula::Tensor(_, a) | Formula::HomS(_, a) => self.validate(a),
            Formula::Modal(name, args) => {
                let pl = self
                    .get(name)
                    .ok_or_else(|| Error::Unknown(format!("modality {name:?}")))?;
                if pl.arity != args.len() {
                    return Err(Error::Arity(format!(
                        "{name} takes {} arguments, got {}",
                        pl.arity,
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| self.validate(a))
            }
        }
    }
}

/// Stock modalities for a system functor: ⋁/⋀ over subsets, expectation over
/// distributions (tolerant of the added termination point), neighbourhood
/// evaluation, labelled components of any of these.
pub fn registry_for(functor: &SetFunctor) -> ModalityRegistry {
    fn collect(f: &SetFunctor, top: &SetFunctor, out: &mut ModalityRegistry) {
        match f {
            SetFunctor::Identity => out.insert(PredicateLifting::identity_pl()),
            SetFunctor::Powerset => {
                out.insert(PredicateLifting::dia());
                out.insert(PredicateLifting::box_());
            }
            SetFunctor::Dist => out.insert(PredicateLifting::expect()),
            SetFunctor::Maybe(inner) => collect(inner, top, out),
            SetFunctor::Labelled(labels, inner) | SetFunctor::PowerL(labels, inner) => {
                let mut sub = ModalityRegistry::default();
                collect(inner, inner, &mut sub);
                for pl in sub.map.into_values() {
                    for label in labels {
                        out.insert(PredicateLifting::component(label, pl.clone(), top.clone()));
                    }
                }
            }
            SetFunctor::Neighbourhood => out.insert(PredicateLifting::nbhd_dia()),
            SetFunctor::Compose(outer, _) => {
                // One-layer modalities of a composite come from its outer layer.
                collect(outer, top, out)
            }
        }
    }
    let mut reg = ModalityRegistry::default();
    collect(functor, functor, &mut reg);
    reg
}

/// hom_s(u,v) = hom(u,v) ∧ hom(v,u).
pub fn hom_s(q: &Quantale, u: &QValue, v: &QValue) -> Result<QValue> {
    q.meet2(&q.hom(u, v)?, &q.hom(v, u)?)
}

/// The value vector of φ on the states of c: ⟦λ(φ⃗)⟧ = λ(⟨⟦φ⃗⟧⟩) ∘ α.
pub fn eval_formula(phi: &Formula, c: &Coalgebra, reg: &ModalityRegistry) -> Result<Vec<QValue>> {
    let q = &c.q;
    match phi {
        Formula::Top => Ok(vec![q.top(); c.states.len()]),
        Formula::Or(a, b) => {
            let (va, vb) = (eval_formula(a, c, reg)?, eval_formula(b, c, reg)?);
            va.iter().zip(&vb).map(|(x, y)| q.join2(x, y)).collect()
        }
        Formula::And(a, b) => {
            let (va, vb) = (eval_formula(a, c, reg)?, eval_formula(b, c, reg)?);
            va.iter().zip(&vb).map(|(x, y)| q.meet2(x, y)).collect()
        }
        Formula::Tensor(u, a) => {
            let va = eval_formula(a, c, reg)?;
            va.iter().map(|x| q.tensor(u, x)).collect()
        }
        Formula::HomS(u, a) => {
            let va = eval_formula(a, c, reg)?;
            va.iter().map(|x| hom_s(q, u, x)).collect()
        }
        Formula::Modal(name, args) => {
            let pl = reg
                .get(name)
                .ok_or_else(|| Error::Unknown(format!("modality {name:?}")))?;
            let preds: Result<Vec<Vec<QValue>>> =
                args.iter().map(|a| eval_formula(a, c, reg)).collect();
            let preds = preds?;
            c.trans
                .iter()
                .map(|t| pl.eval(q, &c.states, &preds, t))
                .collect()
        }
    }
}

// ---------------------------------------------------------------------------
// Logical distance
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LdOpts {
    pub depth: usize,
    /// Denominator of the constant grid used in <u>*φ and hom(<u>,φ); ignored
    /// for finite quantales, which use their whole carrier.
    pub const_den: u32,
    /// Cap on distinct semantic vectors kept per run.
    pub max_vectors: usize,
}

impl Default for LdOpts {
    fn default() -> LdOpts {
        LdOpts { depth: 3, const_den: 4, max_vectors: 512 }
    }
}

#[derive(Clone, Debug)]
pub struct LdResult {
    /// Distance matrices at depths 0..=depth (cumulative formula families).
    pub per_depth: Vec<VCatDepth>,
    pub budget_hit: bool,
}

#[derive(Clone, Debug)]
pub struct VCatDepth {
    pub depth: usize,
    pub cat: crate::enriched::VCat,
    pub vectors: usize,
}

impl LdResult {
    pub fn final_cat(&self) -> &crate::enriched::VCat {
        &self.per_depth.last().expect("at least depth 0").cat
    }
}

struct Enumeration {
    vecs: Vec<(Formula, Vec<QValue>)>,
    seen: BTreeSet<Vec<QValue>>,
    budget: usize,
    budget_hit: bool,
}

impl Enumeration {
    fn add(&mut self, phi: Formula, v: Vec<QValue>) -> bool {
        if self.seen.contains(&v) {
            return false;
        }
        if self.vecs.len() >= self.budget {
            self.budget_hit = true;
            return false;
        }
        self.seen.insert(v.clone());
        self.vecs.push((phi, v));
        true
    }
}

/// Depth-stratified logical distance. Within each depth the formula family is
/// closed under |, & and the constant operations; modalities advance one depth
/// at a time. Formula families are cumulative across depths, so the distance
/// matrices shrink (in the quantale order they descend) as depth grows.
pub fn logical_distance(
    c: &Coalgebra,
    reg: &ModalityRegistry,
    opts: &LdOpts,
) -> Result<LdResult> {
    let q = &c.q;
    let n = c.states.len();
    let consts = match q.carrier() {
        Ok(v) => v,
        Err(_) => q.grid(opts.const_den)?,
    };
    let mut en = Enumeration {
        vecs: Vec::new(),
        seen: BTreeSet::new(),
        budget: opts.max_vectors,
        budget_hit: false,
    };
    en.add(Formula::Top, vec![q.top(); n]);
    propositional_closure(q, &mut en, &consts, 0)?;
    let mut per_depth = vec![VCatDepth {
        depth: 0,
        cat: ld_matrix(q, c, &en)?,
        vectors: en.vecs.len(),
    }];
    for d in 1..=opts.depth {
        let before = en.vecs.len();
        for pl in reg.liftings() {
            apply_modality(c, pl, &mut en, 0, before)?;
        }
        propositional_closure(q, &mut en, &consts, before)?;
        per_depth.push(VCatDepth {
            depth: d,
            cat: ld_matrix(q, c, &en)?,
            vectors: en.vecs.len(),
        });
    }
    Ok(LdResult { per_depth, budget_hit: en.budget_hit })
}

fn apply_modality(
    c: &Coalgebra,
    pl: &PredicateLifting,
    en: &mut Enumeration,
    lo: usize,
    hi: usize,
) -> Result<()> {
    // κ-tuples over the formulas known at the start of this depth.
    let mut idx = vec![lo; pl.arity];
    if pl.arity == 0 {
        let v: Result<Vec<QValue>> = c
            .trans
            .iter()
            .map(|t| pl.eval(&c.q, &c.states, &[], t))
            .collect();
        en.add(Formula::Modal(pl.name.clone(), vec![]), v?);
        return Ok(());
    }
    'outer: loop {
        let preds: Vec<Vec<QValue>> = idx.iter().map(|&i| en.vecs[i].1.clone()).collect();
        let v: Result<Vec<QValue>> = c
            .trans
            .iter()
            .map(|t| pl.eval(&c.q, &c.states, &preds, t))
            .collect();
        let phi = Formula::Modal(
            pl.name.clone(),
            idx.iter().map(|&i| en.vecs[i].0.clone()).collect(),
        );
        en.add(phi, v?);
        if en.budget_hit {
            return Ok(());
        }
        for slot in 0..pl.arity {
            idx[slot] += 1;
            if idx[slot] < hi {
                continue 'outer;
            }
            idx[slot] = lo;
        }
        break;
    }
    Ok(())
}

/// Worklist closure under |, &, <u>*− and hom(<u>,−); `frontier_from` marks
/// where the unprocessed vectors start.
fn propositional_closure(
    q: &Quantale,
    en: &mut Enumeration,
    consts: &[QValue],
    frontier_from: usize,
) -> Result<()> {
    let mut lo = frontier_from;
    while lo < en.vecs.len() && !en.budget_hit {
        let hi = en.vecs.len();
        // Unordered pairs with at least one side in the frontier [lo, hi);
        // both operations are commutative and older pairs are already closed.
        for i in lo..hi {
            for j in 0..=i {
                let (fi, vi) = en.vecs[i].clone();
                let (fj, vj) = en.vecs[j].clone();
                let or: Result<Vec<QValue>> =
                    vi.iter().zip(&vj).map(|(a, b)| q.join2(a, b)).collect();
                en.add(Formula::Or(Box::new(fi.clone()), Box::new(fj.clone())), or?);
                let and: Result<Vec<QValue>> =
                    vi.iter().zip(&vj).map(|(a, b)| q.meet2(a, b)).collect();
                en.add(Formula::And(Box::new(fi), Box::new(fj)), and?);
                if en.budget_hit {
                    return Ok(());
                }
            }
            let (fi, vi) = en.vecs[i].clone();
            for u in consts {
                let t: Result<Vec<QValue>> = vi.iter().map(|a| q.tensor(u, a)).collect();
                en.add(Formula::Tensor(u.clone(), Box::new(fi.clone())), t?);
                let h: Result<Vec<QValue>> = vi.iter().map(|a| hom_s(q, u, a)).collect();
                en.add(Formula::HomS(u.clone(), Box::new(fi.clone())), h?);
                if en.budget_hit {
                    return Ok(());
                }
            }
        }
        lo = hi;
    }
    Ok(())
}

fn ld_matrix(q: &Quantale, c: &Coalgebra, en: &Enumeration) -> Result<crate::enriched::VCat> {
    let n = c.states.len();
    let mut mat = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let mut acc = q.top();
            for (_, v) in &en.vecs {
                acc = q.meet2(&acc, &hom_s(q, &v[x], &v[y])?)?;
            }
            mat.push(acc);
        }
    }
    crate::enriched::VCat::new(q.clone(), c.states.clone(), mat)
}

/// The formula among the enumerated family whose hom_s value at (x,y) is
/// smallest; ties break toward earlier (smaller) formulas.
pub fn separating_formula(
    c: &Coalgebra,
    reg: &ModalityRegistry,
    opts: &LdOpts,
    x: usize,
    y: usize,
) -> Result<(Formula, QValue)> {
    let q = &c.q;
    let consts = match q.carrier() {
        Ok(v) => v,
        Err(_) => q.grid(opts.const_den)?,
    };
    let mut en = Enumeration {
        vecs: Vec::new(),
        seen: BTreeSet::new(),
        budget: opts.max_vectors,
        budget_hit: false,
    };
    en.add(Formula::Top, vec![q.top(); c.states.len()]);
    propositional_closure(q, &mut en, &consts, 0)?;
    for _ in 1..=opts.depth {
        let before = en.vecs.len();
        for pl in reg.liftings() {
            apply_modality(c, pl, &mut en, 0, before)?;
        }
        propositional_closure(q, &mut en, &consts, before)?;
    }
    let mut best: Option<(Formula, QValue)> = None;
    for (f, v) in &en.vecs {
        let h = hom_s(q, &v[x], &v[y])?;
        let better = match &best {
            None => true,
            Some((_, cur)) => q.le(&h, cur)? && &h != cur,
        };
        if better {
            best = Some((f.clone(), h));
        }
    }
    best.ok_or_else(|| Error::Validation("empty formula family".into()))
}

// ---------------------------------------------------------------------------
// Expressivity comparison
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DepthRow {
    pub depth: usize,
    /// max over state pairs of |bd_s − ld_d| when both sides are numeric.
    pub gap: Option<Rat>,
    pub vectors: usize,
}

#[derive(Clone, Debug)]
pub struct ExpressivityReport {
    pub bd: DistanceResult,
    /// The behavioural side compared against: the symmetrised fixpoint.
    pub bd_sym: crate::enriched::VCat,
    pub rows: Vec<DepthRow>,
    pub budget_hit: bool,
    /// ld ≤ bd_s pointwise in the quantale order (with ε slack when the run
    /// was tolerance-terminated).
    pub universal_ok: bool,
    pub worst: Option<WorstPair>,
}

#[derive(Clone, Debug)]
pub struct WorstPair {
    pub x: String,
    pub y: String,
    pub bd: String,
    pub ld: String,
    pub formula: String,
}

/// Runs the distance fixpoint and the depth-stratified logical distance on the
/// same system and compares them on the symmetric side.
pub fn expressivity_report(
    c: &Coalgebra,
    l: &Lifting,
    reg: &ModalityRegistry,
    bd_opts: &BdOpts,
    ld_opts: &LdOpts,
) -> Result<ExpressivityReport> {
    let q = &c.q;
    let n = c.states.len();
    let bd = behavioural_distance(c, l, bd_opts)?;
    let bd_sym = bd.cat.symmetrize();
    let ld = logical_distance(c, reg, ld_opts)?;
    let mut rows = Vec::new();
    for stage in &ld.per_depth {
        let mut gap: Option<Rat> = Some(Rat::zero());
        for i in 0..n * n {
            match (&mut gap, q.diff(&bd_sym.mat[i], &stage.cat.mat[i])) {
                (Some(g), Some(d)) => {
                    if d > *g {
                        *g = d;
                    }
                }
                _ => gap = None,
            }
        }
        rows.push(DepthRow { depth: stage.depth, gap, vectors: stage.vectors });
    }
    // Universal direction: every enumerated formula is nonexpansive, so
    // ld ≥ bd_s in the quantale order (numerically ld ≤ bd_s). ε slack covers
    // tolerance-terminated fixpoints.
    let last = ld.final_cat();
    let mut universal_ok = true;
    let mut worst: Option<(Rat, usize, usize)> = None;
    for x in 0..n {
        for y in 0..n {
            let b = &bd_sym.mat[x * n + y];
            let v = last.at(x, y);
            let ok = if q.le(b, v)? {
                true
            } else {
                match (q.numeric(v), q.numeric(b)) {
                    // v below b numerically by at most ε is tolerated.
                    (Some(nv), Some(nb)) => nv - nb <= bd.epsilon,
                    _ => false,
                }
            };
            if !ok {
                universal_ok = false;
            }
            if let (Some(nb), Some(nv)) = (q.numeric(b), q.numeric(v)) {
                let d = if nb > nv { nb - nv } else { nv - nb };
                if worst.as_ref().map_or(true, |(w, _, _)| d > *w) {
                    worst = Some((d, x, y));
                }
            }
        }
    }
    let worst = match worst {
        Some((_, x, y)) => {
            let (phi, h) = separating_formula(c, reg, ld_opts, x, y)?;
            Some(WorstPair {
                x: c.states[x].to_string(),
                y: c.states[y].to_string(),
                bd: q.value_to_string(&bd_sym.mat[x * n + y]),
                ld: q.value_to_string(&last.mat[x * n + y]),
                formula: format!("{phi} ({})", q.value_to_string(&h)),
            })
        }
        None => None,
    };
    Ok(ExpressivityReport {
        bd,
        bd_sym,
        rows,
        budget_hit: ld.budget_hit,
        universal_ok,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::Elem;
    use crate::lifting::LaxExt;
    use crate::quantale::rat;
    use proptest::prelude::*;
    use std::collections::BTreeSet as Set;

    fn atoms(names: &[&str]) -> Vec<Elem> {
        names.iter().map(|s| Elem::atom(s)).collect()
    }

    fn set_of(names: &[&str]) -> Elem {
        Elem::Set(names.iter().map(|s| Elem::atom(s)).collect::<Set<_>>())
    }

    fn loop_sink() -> Coalgebra {
        Coalgebra::new(
            Quantale::bool2(),
            SetFunctor::Powerset,
            atoms(&["p", "q", "s"]),
            None,
            vec![set_of(&["p", "s"]), set_of(&["s"]), set_of(&[])],
        )
        .unwrap()
    }

    #[test]
    fn parser_and_printer_agree_on_a_nested_formula() {
        let q = Quantale::luk01();
        let src = "hom(<1/2>,(dia(T)&<3/10>*box(T)))";
        let f = parse_formula(&q, src).unwrap();
        assert_eq!(f.to_string(), src);
        assert_eq!(f.modal_depth(), 1);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let q = Quantale::bool2();
        let err = parse_formula(&q, "(T|").unwrap_err();
        match err {
            Error::Parse { pos, .. } => assert_eq!(pos, 3),
            other => panic!("expected parse error, got {other}"),
        }
        let err = parse_formula(&q, "dia(T) junk").unwrap_err();
        match err {
            Error::Parse { pos, msg } => {
                assert_eq!(pos, 7);
                assert!(msg.contains("trailing"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn whitespace_is_ignored_between_tokens() {
        let q = Quantale::bool2();
        let f = parse_formula(&q, " ( dia( T ) & box( T ) ) ").unwrap();
        assert_eq!(f.to_string(), "(dia(T)&box(T))");
    }

    #[test]
    fn registry_names_follow_the_functor_shape() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let f = SetFunctor::PowerL(labels, Box::new(SetFunctor::Powerset));
        let reg = registry_for(&f);
        assert_eq!(reg.names(), vec!["box_a", "box_b", "dia_a", "dia_b"]);
        let g = SetFunctor::maybe(SetFunctor::Dist);
        assert_eq!(registry_for(&g).names(), vec!["E"]);
    }

    #[test]
    fn diamond_detects_the_extra_loop() {
        let c = loop_sink();
        let reg = registry_for(&c.functor);
        let q = &c.q;
        // ◇◇T: p can take two steps, q cannot.
        let f = parse_formula(q, "dia(dia(T))").unwrap();
        reg.validate(&f).unwrap();
        let v = eval_formula(&f, &c, &reg).unwrap();
        assert_eq!(v, vec![q.top(), q.bottom(), q.bottom()]);
    }

    #[test]
    fn expectation_weighs_the_mass() {
        let q = Quantale::luk01();
        let c = Coalgebra::new(
            q.clone(),
            SetFunctor::maybe(SetFunctor::Dist),
            atoms(&["t", "x"]),
            None,
            vec![
                Elem::Term,
                Elem::dist(vec![(Elem::atom("t"), rat(1, 4)), (Elem::atom("x"), rat(3, 4))])
                    .unwrap(),
            ],
        )
        .unwrap();
        let reg = registry_for(&c.functor);
        // E(T) is ⊤ on live states and ⊥ on termination.
        let f = parse_formula(&q, "E(T)").unwrap();
        let v = eval_formula(&f, &c, &reg).unwrap();
        assert_eq!(v[0], q.num(rat(1, 1)).unwrap());
        assert_eq!(v[1], q.num(rat(0, 1)).unwrap());
        // E(E(T)): x mixes t (value 1) and x (value 0) as 1/4·1 + 3/4·0 = 1/4.
        let f2 = parse_formula(&q, "E(E(T))").unwrap();
        let v2 = eval_formula(&f2, &c, &reg).unwrap();
        assert_eq!(v2[1], q.num(rat(1, 4)).unwrap());
    }

    #[test]
    fn logical_distance_reaches_bisimilarity_on_bool2() {
        let c = loop_sink();
        let reg = registry_for(&c.functor);
        let ld = logical_distance(&c, &reg, &LdOpts { depth: 3, const_den: 1, max_vectors: 512 })
            .unwrap();
        assert!(!ld.budget_hit);
        let q = &c.q;
        // All three states are logically distinct (p ≠ q thanks to ◇◇T).
        let last = ld.final_cat();
        for x in 0..3 {
            for y in 0..3 {
                let want = if x == y { q.top() } else { q.bottom() };
                assert_eq!(last.at(x, y), &want, "({x},{y})");
            }
        }
        // Depth 0 cannot separate anything: only constants exist.
        assert!(ld.per_depth[0].cat.mat.iter().all(|v| v == &q.top()));
        // Depth 1 separates s (no steps) from p and q but not p from q.
        let d1 = &ld.per_depth[1].cat;
        assert_eq!(d1.at(0, 1), &q.top());
        assert_eq!(d1.at(0, 2), &q.bottom());
    }

    #[test]
    fn budget_exhaustion_is_flagged_and_distance_stays_sound() {
        let c = loop_sink();
        let reg = registry_for(&c.functor);
        let small = logical_distance(&c, &reg, &LdOpts { depth: 2, const_den: 1, max_vectors: 3 })
            .unwrap();
        assert!(small.budget_hit);
        let full = logical_distance(&c, &reg, &LdOpts { depth: 2, const_den: 1, max_vectors: 512 })
            .unwrap();
        // Fewer formulas only makes the distance larger (closer to ⊤).
        let q = &c.q;
        for i in 0..9 {
            assert!(q.le(&full.per_depth[2].cat.mat[i], &small.per_depth[2].cat.mat[i]).unwrap());
        }
    }

    #[test]
    fn expressivity_closes_the_gap_on_a_markov_chain() {
        let q = Quantale::luk01();
        let c = Coalgebra::new(
            q.clone(),
            SetFunctor::maybe(SetFunctor::Dist),
            atoms(&["t", "x", "y"]),
            None,
            vec![
                Elem::Term,
                Elem::dist(vec![(Elem::atom("t"), rat(1, 2)), (Elem::atom("x"), rat(1, 2))])
                    .unwrap(),
                Elem::dist(vec![(Elem::atom("t"), rat(1, 4)), (Elem::atom("x"), rat(3, 4))])
                    .unwrap(),
            ],
        )
        .unwrap();
        let reg = registry_for(&c.functor);
        let rep = expressivity_report(
            &c,
            &Lifting::WassersteinE,
            &reg,
            &BdOpts { epsilon: rat(1, 1000), max_iter: 100 },
            &LdOpts { depth: 2, const_den: 4, max_vectors: 400 },
        )
        .unwrap();
        assert!(rep.universal_ok);
        // Gaps shrink (weakly) with depth and the depth-2 family already gets
        // within the fixpoint tolerance on this chain.
        let gaps: Vec<Rat> = rep.rows.iter().map(|r| r.gap.clone().unwrap()).collect();
        assert!(gaps[1] <= gaps[0] && gaps[2] <= gaps[1]);
        assert!(gaps[2] <= rat(1, 100), "gap {}", gaps[2]);
        assert!(rep.worst.is_some());
    }

    #[test]
    fn asymmetric_fixpoints_are_compared_on_their_symmetric_side() {
        let c = loop_sink();
        let reg = registry_for(&c.functor);
        let l = Lifting::Compose(
            Box::new(Lifting::Sym),
            Box::new(Lifting::FromExtension(LaxExt::EgliLower)),
        );
        let rep = expressivity_report(
            &c,
            &l,
            &reg,
            &BdOpts { epsilon: Rat::zero(), max_iter: 50 },
            &LdOpts { depth: 3, const_den: 1, max_vectors: 512 },
        )
        .unwrap();
        assert!(rep.universal_ok);
        assert_eq!(rep.rows.last().unwrap().gap, Some(Rat::zero()));
    }

    fn arb_formula(q: Quantale) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Top),
            Just(Formula::Modal("dia".into(), vec![Formula::Top])),
        ];
        leaf.prop_recursive(3, 24, 2, move |inner| {
            let q = q.clone();
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (0u32..=4, inner.clone()).prop_map(move |(k, a)| {
                    let u = q.num(rat(k as i64, 4)).unwrap();
                    if k % 2 == 0 {
                        Formula::Tensor(u, Box::new(a))
                    } else {
                        Formula::HomS(u, Box::new(a))
                    }
                }),
                inner.clone().prop_map(|a| Formula::Modal("dia".into(), vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::Modal("two".into(), vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn printing_then_parsing_is_the_identity(f in arb_formula(Quantale::luk01())) {
            let q = Quantale::luk01();
            let s = f.to_string();
            let g = parse_formula(&q, &s).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
