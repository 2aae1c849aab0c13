//! Predicate liftings, lax extensions, and Kantorovich constructions.
//!
//! Three interlocking notions, all parameterised by a set functor F and a quantale V:
//!
//! * a κ-ary *predicate lifting* λ turns κ predicates X → V into a predicate F X → V;
//! * a *lax extension* F̂ turns V-relations X ↛ Y into V-relations F X ↛ F Y,
//!   monotonically, laxly preserving composition and containing the functor's
//!   graphs (axioms L1–L3);
//! * a *lifting* F̄ turns V-categories on X into V-categories on F X.
//!
//! The Kantorovich constructions close the loop: a family Λ of predicate liftings
//! induces an extension F̂^Λ (the largest one making every λ nonexpansive) and a
//! lifting F^Λ (the initial structure along all λ-images of functorial predicates).
//! Everything here is computed exactly; enumeration-based routes demand a finite
//! quantale and are guarded, while closed forms (expectation via the LP dual) stay
//! available over [0,1].

use crate::enriched::{index_of, VCat, VRel};
use crate::error::{Error, Result};
use crate::functor::{Elem, SetFunctor};
use crate::quantale::{QValue, Quantale, QuantaleKind, Rat};
use crate::transport::{mass_vector, total_variation, wasserstein_lp};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

// ---------------------------------------------------------------------------
// Predicate liftings
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub struct PredicateLifting {
    pub name: String,
    pub arity: usize,
    pub functor: SetFunctor,
    /// Monotonicity in the pointwise order, as claimed by the construction;
    /// verified, not trusted, by the checkers.
    pub monotone_claim: bool,
    kind: PlKind,
}

#[derive(Clone)]
enum PlKind {
    /// ⋁ of the predicate over a subset's members.
    Dia,
    /// ⋀ of the predicate over a subset's members.
    Box_,
    /// Expected value Σ p·μ over [0,1]; the added point of 1+D is sent to ⊥.
    Expect,
    /// The predicate itself (identity functor).
    IdentityPl,
    /// Constantly ⊤ (identity functor).
    ConstTop,
    /// hom(p(−), ⊥): antitone, used as the dual lifting's companion.
    NegDual,
    /// ⋁_{B∈U} ⋀_{b∈B} p(b) over neighbourhood systems.
    NbhdDia,
    /// Project one label of a family/pair, then apply an inner lifting;
    /// a mismatched product label yields ⊥.
    Component(String, Box<PredicateLifting>),
    /// An arbitrary lifting given by its component on F(V^κ) (finite V only):
    /// λ(p) = table ∘ F⟨p⟩.
    Yoneda { power_carrier: Vec<Elem>, table: BTreeMap<Elem, QValue> },
    /// Induced by a lax extension and a row 𝔯 : 1 ↛ F(κ): λ(g) = F̂g · 𝔯.
    Induced { ext: Box<LaxExt>, kappa: Vec<Elem>, fkappa: Vec<Elem>, row: Vec<QValue> },
}

impl fmt::Debug for PredicateLifting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PredicateLifting({}, arity {})", self.name, self.arity)
    }
}

impl PredicateLifting {
    pub fn dia() -> PredicateLifting {
        PredicateLifting {
            name: "dia".into(),
            arity: 1,
            functor: SetFunctor::Powerset,
            monotone_claim: true,
            kind: PlKind::Dia,
        }
    }

    pub fn box_() -> PredicateLifting {
        PredicateLifting {
            name: "box".into(),
            arity: 1,
            functor: SetFunctor::Powerset,
            monotone_claim: true,
            kind: PlKind::Box_,
        }
    }

    pub fn expect() -> PredicateLifting {
        PredicateLifting {
            name: "E".into(),
            arity: 1,
            functor: SetFunctor::Dist,
            monotone_claim: true,
            kind: PlKind::Expect,
        }
    }

    pub fn identity_pl() -> PredicateLifting {
        PredicateLifting {
            name: "next".into(),
            arity: 1,
            functor: SetFunctor::Identity,
            monotone_claim: true,
            kind: PlKind::IdentityPl,
        }
    }

    pub fn const_top() -> PredicateLifting {
        PredicateLifting {
            name: "const_top".into(),
            arity: 1,
            functor: SetFunctor::Identity,
            monotone_claim: true,
            kind: PlKind::ConstTop,
        }
    }

    pub fn neg_dual() -> PredicateLifting {
        PredicateLifting {
            name: "neg".into(),
            arity: 1,
            functor: SetFunctor::Identity,
            monotone_claim: false,
            kind: PlKind::NegDual,
        }
    }

    pub fn nbhd_dia() -> PredicateLifting {
        PredicateLifting {
            name: "nb".into(),
            arity: 1,
            functor: SetFunctor::Neighbourhood,
            monotone_claim: true,
            kind: PlKind::NbhdDia,
        }
    }

    pub fn component(label: &str, inner: PredicateLifting, functor: SetFunctor) -> PredicateLifting {
        PredicateLifting {
            name: format!("{}_{label}", inner.name),
            arity: inner.arity,
            functor,
            monotone_claim: inner.monotone_claim,
            kind: PlKind::Component(label.to_string(), Box::new(inner)),
        }
    }

    /// A lifting from its component h : F(V^κ) → V; `power_carrier` lists the
    /// points of V^κ (as value tuples), `table` assigns h on F(power_carrier).
    pub fn yoneda(
        name: String,
        functor: SetFunctor,
        arity: usize,
        power_carrier: Vec<Elem>,
        table: BTreeMap<Elem, QValue>,
    ) -> PredicateLifting {
        PredicateLifting {
            name,
            arity,
            functor,
            monotone_claim: false,
            kind: PlKind::Yoneda { power_carrier, table },
        }
    }

    /// The lifting λ(g) = F̂g · 𝔯 induced by a lax extension and a row
    /// 𝔯 : 1 ↛ F(κ) (given over the enumerated carrier of F(κ)).
    pub fn induced(name: String, ext: LaxExt, arity: usize, row: Vec<QValue>) -> Result<PredicateLifting> {
        let kappa: Vec<Elem> = (0..arity).map(|i| Elem::atom(&format!("κ{i}"))).collect();
        let fkappa = ext.functor().enumerate(&kappa)?;
        if row.len() != fkappa.len() {
            return Err(Error::Dimension(format!(
                "row has {} entries for |F(κ)| = {}",
                row.len(),
                fkappa.len()
            )));
        }
        Ok(PredicateLifting {
            name,
            arity,
            functor: ext.functor().clone(),
            monotone_claim: true,
            kind: PlKind::Induced { ext: Box::new(ext), kappa, fkappa, row },
        })
    }

    /// Evaluates λ(p₁,…,p_κ) at t ∈ F X; each predicate is a value row aligned
    /// with `carrier`.
    pub fn eval(
        &self,
        q: &Quantale,
        carrier: &[Elem],
        preds: &[Vec<QValue>],
        t: &Elem,
    ) -> Result<QValue> {
        if preds.len() != self.arity {
            return Err(Error::Arity(format!(
                "{} expects {} predicates, got {}",
                self.name,
                self.arity,
                preds.len()
            )));
        }
        for p in preds {
            if p.len() != carrier.len() {
                return Err(Error::Dimension("predicate row length differs from carrier".into()));
            }
        }
        self.eval_inner(q, carrier, preds, t)
    }

    fn eval_inner(
        &self,
        q: &Quantale,
        carrier: &[Elem],
        preds: &[Vec<QValue>],
        t: &Elem,
    ) -> Result<QValue> {
        let p0 = |x: &Elem| -> Result<QValue> { Ok(preds[0][index_of(carrier, x)?].clone()) };
        match (&self.kind, t) {
            (PlKind::Dia, Elem::Set(members)) => {
                let vals: Result<Vec<QValue>> = members.iter().map(p0).collect();
                q.join(vals?.iter())
            }
            (PlKind::Box_, Elem::Set(members)) => {
                let vals: Result<Vec<QValue>> = members.iter().map(p0).collect();
                q.meet(vals?.iter())
            }
            (PlKind::Expect, Elem::Term) => Ok(q.bottom()),
            (PlKind::Expect, Elem::Dist(d)) => {
                if q.kind != QuantaleKind::Luk01 {
                    return Err(Error::DomainMismatch("expectation needs luk01".into()));
                }
                let mut acc = Rat::zero();
                for (x, mass) in d {
                    let v = p0(x)?;
                    let num = q
                        .numeric(&v)
                        .ok_or_else(|| Error::Validation("non-numeric predicate value".into()))?;
                    acc += num * mass;
                }
                q.num(acc)
            }
            (PlKind::IdentityPl, x) => p0(x),
            (PlKind::ConstTop, _) => Ok(q.top()),
            (PlKind::NegDual, x) => q.hom(&p0(x)?, &q.bottom()),
            (PlKind::NbhdDia, Elem::Set(family)) => {
                let mut outer = Vec::new();
                for b in family {
                    let Elem::Set(bs) = b else {
                        return Err(Error::CarrierMismatch("neighbourhood member is not a set".into()));
                    };
                    let inner: Result<Vec<QValue>> = bs.iter().map(p0).collect();
                    outer.push(q.meet(inner?.iter())?);
                }
                q.join(outer.iter())
            }
            (PlKind::Component(label, inner), Elem::Func(m)) => {
                let sub = m
                    .get(label)
                    .ok_or_else(|| Error::Unknown(format!("label {label:?} in family")))?;
                inner.eval_inner(q, carrier, preds, sub)
            }
            (PlKind::Component(label, inner), Elem::Pair(a, x)) => {
                if a == label {
                    inner.eval_inner(q, carrier, preds, x)
                } else {
                    Ok(q.bottom())
                }
            }
            (PlKind::Yoneda { power_carrier, table }, t) => {
                let mut map = BTreeMap::new();
                for (i, x) in carrier.iter().enumerate() {
                    let tup = Elem::Tuple((0..self.arity).map(|j| Elem::Val(preds[j][i].clone())).collect());
                    if !power_carrier.contains(&tup) {
                        return Err(Error::CarrierMismatch(format!(
                            "predicate tuple {tup} is outside the component grid"
                        )));
                    }
                    map.insert(x.clone(), tup);
                }
                let img = self.functor.fmap(&map, power_carrier, t)?;
                table
                    .get(&img)
                    .cloned()
                    .ok_or_else(|| Error::CarrierMismatch(format!("{img} not in component table")))
            }
            (PlKind::Induced { ext, kappa, fkappa, row }, t) => {
                let mut mat = Vec::with_capacity(kappa.len() * carrier.len());
                for p in preds {
                    mat.extend(p.iter().cloned());
                }
                let g = VRel::new(q.clone(), kappa.clone(), carrier.to_vec(), mat)?;
                let mut parts = Vec::with_capacity(fkappa.len());
                for (w, coef) in fkappa.iter().zip(row) {
                    parts.push(q.tensor(coef, &ext.eval(q, &g, w, t)?)?);
                }
                q.join(parts.iter())
            }
            _ => Err(Error::CarrierMismatch(format!(
                "{} cannot evaluate at {t}",
                self.name
            ))),
        }
    }

    /// The Yoneda component h = λ(proj) : F(V^κ) → V as a table, computed by
    /// evaluating λ on the projection predicates of an explicit value grid.
    pub fn component_table(
        &self,
        q: &Quantale,
        values: &[QValue],
    ) -> Result<(Vec<Elem>, BTreeMap<Elem, QValue>)> {
        let power = power_v_tuples(q, values, self.arity)?;
        let projs: Vec<Vec<QValue>> = (0..self.arity)
            .map(|j| {
                power
                    .carrier
                    .iter()
                    .map(|e| match e {
                        Elem::Tuple(vs) => match &vs[j] {
                            Elem::Val(v) => v.clone(),
                            _ => unreachable!(),
                        },
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        let fpower = self.functor.enumerate(&power.carrier)?;
        let mut table = BTreeMap::new();
        for t in &fpower {
            table.insert(t.clone(), self.eval(q, &power.carrier, &projs, t)?);
        }
        Ok((fpower, table))
    }
}

/// The κ-fold power of the quantale restricted to `values`, with tuples as points
/// and the pointwise hom structure.
pub fn power_v_tuples(q: &Quantale, values: &[QValue], arity: usize) -> Result<VCat> {
    let total = values.len().checked_pow(arity as u32).unwrap_or(usize::MAX);
    if total > 1 << 12 {
        return Err(Error::SizeGuard(format!("{}^{arity} value tuples", values.len())));
    }
    let mut tuples: Vec<Vec<QValue>> = vec![vec![]];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(tuples.len() * values.len());
        for t in &tuples {
            for v in values {
                let mut t2 = t.clone();
                t2.push(v.clone());
                next.push(t2);
            }
        }
        tuples = next;
    }
    let mut mat = Vec::with_capacity(tuples.len() * tuples.len());
    for a in &tuples {
        for b in &tuples {
            let parts: Result<Vec<QValue>> =
                a.iter().zip(b).map(|(u, v)| q.hom(u, v)).collect();
            mat.push(q.meet(parts?.iter())?);
        }
    }
    let carrier = tuples
        .into_iter()
        .map(|t| Elem::Tuple(t.into_iter().map(Elem::Val).collect()))
        .collect();
    VCat::new(q.clone(), carrier, mat)
}

/// All maps f : X → values^κ that are V-functors (X,a) → V^κ, i.e. satisfy
/// a(x,y) ≤ ⋀_j hom(f(x)_j, f(y)_j). Returned as value rows f[x][j].
pub fn vfunctors_to_power(
    base: &VCat,
    values: &[QValue],
    arity: usize,
) -> Result<Vec<Vec<Vec<QValue>>>> {
    let n = base.len();
    let slots = n * arity;
    let total = values.len().checked_pow(slots as u32).unwrap_or(usize::MAX);
    if total > 1 << 20 {
        return Err(Error::SizeGuard(format!("{}^{slots} candidate predicate tuples", values.len())));
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; slots];
    'outer: loop {
        let f = |x: usize, j: usize| &values[pick[x * arity + j]];
        let mut ok = true;
        'check: for x in 0..n {
            for y in 0..n {
                let mut h = base.q.top();
                for j in 0..arity {
                    h = base.q.meet2(&h, &base.q.hom(f(x, j), f(y, j))?)?;
                }
                if !base.q.le(base.at(x, y), &h)? {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            out.push(
                (0..n)
                    .map(|x| (0..arity).map(|j| f(x, j).clone()).collect())
                    .collect(),
            );
        }
        for d in 0..slots {
            pick[d] += 1;
            if pick[d] < values.len() {
                continue 'outer;
            }
            pick[d] = 0;
        }
        break;
    }
    if slots == 0 {
        out.push(vec![Vec::new(); n]);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lax extensions
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub enum LaxExt {
    /// (P̂r)(A,B) = ⋀_{a∈A} ⋁_{b∈B} r(a,b).
    EgliLower,
    /// (P̂r)(A,B) = ⋀_{b∈B} ⋁_{a∈A} r(a,b).
    EgliUpper,
    /// Meet of the two one-sided forms.
    EgliBoth,
    /// The identity functor extended by the relation itself.
    IdentityRel,
    /// The largest extension of the identity functor: constantly ⊤.
    LargestId,
    /// Kantorovich extension of a family of predicate liftings:
    /// F̂^Λ r (t,u) = ⋀_{λ∈Λ} ⋀_{g : κ ↛ X} hom(λ(g)(t), λ(r·g)(u)).
    Kantorovich { functor: SetFunctor, preds: Vec<PredicateLifting> },
    /// Escape hatch for fixtures (e.g. deliberately broken rules in checkers).
    Custom {
        name: String,
        functor: SetFunctor,
        rule: Rc<dyn Fn(&Quantale, &VRel, &Elem, &Elem) -> Result<QValue>>,
    },
}

impl fmt::Debug for LaxExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaxExt({})", self.name())
    }
}

impl LaxExt {
    pub fn name(&self) -> String {
        match self {
            LaxExt::EgliLower => "egli-lower".into(),
            LaxExt::EgliUpper => "egli-upper".into(),
            LaxExt::EgliBoth => "egli".into(),
            LaxExt::IdentityRel => "identity".into(),
            LaxExt::LargestId => "largest".into(),
            LaxExt::Kantorovich { preds, .. } => {
                let names: Vec<&str> = preds.iter().map(|p| p.name.as_str()).collect();
                format!("kantorovich:{}", names.join(","))
            }
            LaxExt::Custom { name, .. } => name.clone(),
        }
    }

    pub fn functor(&self) -> &SetFunctor {
        match self {
            LaxExt::EgliLower | LaxExt::EgliUpper | LaxExt::EgliBoth => &SetFunctor::Powerset,
            LaxExt::IdentityRel | LaxExt::LargestId => &SetFunctor::Identity,
            LaxExt::Kantorovich { functor, .. } => functor,
            LaxExt::Custom { functor, .. } => functor,
        }
    }

    pub fn parse(s: &str) -> Result<LaxExt> {
        match s.trim() {
            "egli-lower" => Ok(LaxExt::EgliLower),
            "egli-upper" => Ok(LaxExt::EgliUpper),
            "egli" => Ok(LaxExt::EgliBoth),
            "identity" => Ok(LaxExt::IdentityRel),
            "largest" => Ok(LaxExt::LargestId),
            "kantorovich:dia" => Ok(LaxExt::Kantorovich {
                functor: SetFunctor::Powerset,
                preds: vec![PredicateLifting::dia()],
            }),
            "kantorovich:box" => Ok(LaxExt::Kantorovich {
                functor: SetFunctor::Powerset,
                preds: vec![PredicateLifting::box_()],
            }),
            other => Err(Error::Unknown(format!("lax extension {other:?}"))),
        }
    }

    /// F̂ r at a pair of points of F(src), F(tgt).
    pub fn eval(&self, q: &Quantale, r: &VRel, t: &Elem, u: &Elem) -> Result<QValue> {
        match self {
            LaxExt::EgliLower => egli(q, r, t, u, false),
            LaxExt::EgliUpper => egli(q, r, t, u, true),
            LaxExt::EgliBoth => {
                q.meet2(&egli(q, r, t, u, false)?, &egli(q, r, t, u, true)?)
            }
            LaxExt::IdentityRel => Ok(r.at_elems(t, u)?.clone()),
            LaxExt::LargestId => Ok(q.top()),
            LaxExt::Kantorovich { preds, .. } => {
                let mut acc = q.top();
                for pl in preds {
                    acc = q.meet2(&acc, &kantorovich_ext_single(q, pl, r, t, u)?)?;
                }
                Ok(acc)
            }
            LaxExt::Custom { rule, .. } => rule(q, r, t, u),
        }
    }

    /// Materialises F̂ r between enumerated carriers.
    pub fn matrix(&self, q: &Quantale, r: &VRel) -> Result<VRel> {
        let fsrc = self.functor().enumerate(&r.src)?;
        let ftgt = self.functor().enumerate(&r.tgt)?;
        let mut mat = Vec::with_capacity(fsrc.len() * ftgt.len());
        for t in &fsrc {
            for u in &ftgt {
                mat.push(self.eval(q, r, t, u)?);
            }
        }
        VRel::new(q.clone(), fsrc, ftgt, mat)
    }

    /// The symmetrised extension r ↦ F̂r ∧ (F̂r°)°.
    pub fn eval_symmetrized(&self, q: &Quantale, r: &VRel, t: &Elem, u: &Elem) -> Result<QValue> {
        let conv = r.converse();
        q.meet2(&self.eval(q, r, t, u)?, &self.eval(q, &conv, u, t)?)
    }
}

fn egli(q: &Quantale, r: &VRel, t: &Elem, u: &Elem, upper: bool) -> Result<QValue> {
    let (Elem::Set(a), Elem::Set(b)) = (t, u) else {
        return Err(Error::CarrierMismatch(format!("Egli–Milner form needs subsets, got {t}, {u}")));
    };
    let (outer, inner) = if upper { (b, a) } else { (a, b) };
    let mut meet_acc = q.top();
    for x in outer {
        let mut join_acc = q.bottom();
        for y in inner {
            let v = if upper { r.at_elems(y, x)? } else { r.at_elems(x, y)? };
            join_acc = q.join2(&join_acc, v)?;
        }
        meet_acc = q.meet2(&meet_acc, &join_acc)?;
    }
    Ok(meet_acc)
}

/// Single-lifting Kantorovich extension, by exhausting all relations g : κ ↛ X
/// over the quantale carrier (finite quantales only).
fn kantorovich_ext_single(
    q: &Quantale,
    pl: &PredicateLifting,
    r: &VRel,
    t: &Elem,
    u: &Elem,
) -> Result<QValue> {
    let values = q.carrier().map_err(|_| {
        Error::UnsupportedEnumeration(format!(
            "Kantorovich extension over {} needs a finite quantale",
            q.name()
        ))
    })?;
    let n = r.src.len();
    let slots = n * pl.arity;
    let total = values.len().checked_pow(slots as u32).unwrap_or(usize::MAX);
    if total > 1 << 20 {
        return Err(Error::SizeGuard(format!("{}^{slots} relation candidates", values.len())));
    }
    let mut acc = q.top();
    let mut pick = vec![0usize; slots];
    'outer: loop {
        // g as κ predicate rows on the source carrier.
        let g: Vec<Vec<QValue>> = (0..pl.arity)
            .map(|j| (0..n).map(|x| values[pick[x * pl.arity + j]].clone()).collect())
            .collect();
        // (r·g)(j, y) = ⋁_x g(j,x) ⊗ r(x,y).
        let mut rg: Vec<Vec<QValue>> = Vec::with_capacity(pl.arity);
        for row in &g {
            let mut out_row = Vec::with_capacity(r.tgt.len());
            for y in 0..r.tgt.len() {
                let parts: Result<Vec<QValue>> =
                    (0..n).map(|x| q.tensor(&row[x], r.at(x, y))).collect();
                out_row.push(q.join(parts?.iter())?);
            }
            rg.push(out_row);
        }
        let lhs = pl.eval(q, &r.src, &g, t)?;
        let rhs = pl.eval(q, &r.tgt, &rg, u)?;
        acc = q.meet2(&acc, &q.hom(&lhs, &rhs)?)?;
        if slots == 0 {
            break;
        }
        for d in 0..slots {
            pick[d] += 1;
            if pick[d] < values.len() {
                continue 'outer;
            }
            pick[d] = 0;
        }
        break;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Liftings of V-categories
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Lifting {
    /// (X,a) ↦ (F X, 1): forgets the structure entirely.
    Discrete(SetFunctor),
    /// (X,a) ↦ (X,a°).
    Dual,
    /// (X,a) ↦ (X,a_s).
    Sym,
    /// Reflexive-symmetric-transitive closure: the least category structure
    /// above a ∨ a° (the zigzag completion).
    Zigzag,
    /// (X,a) ↦ (F X, F̂ a).
    FromExtension(LaxExt),
    /// Kantorovich lifting of a family of predicate liftings (enumeration:
    /// finite quantales only).
    Kantorovich { functor: SetFunctor, preds: Vec<PredicateLifting> },
    /// Kantorovich lifting of the expectation lifting over [0,1], by the exact
    /// LP dual; extends structurally through 1+(−), (−)^A and A×(−).
    WassersteinE,
    /// Total variation on distributions (structure-blind, like `Discrete`
    /// followed by `WassersteinE`).
    TotalVariation,
    /// outer ∘ inner, inner applied first.
    Compose(Box<Lifting>, Box<Lifting>),
}

impl Lifting {
    pub fn name(&self) -> String {
        match self {
            Lifting::Discrete(_) => "discrete".into(),
            Lifting::Dual => "dual".into(),
            Lifting::Sym => "sym".into(),
            Lifting::Zigzag => "zigzag".into(),
            Lifting::FromExtension(e) => e.name(),
            Lifting::Kantorovich { preds, .. } => {
                let names: Vec<&str> = preds.iter().map(|p| p.name.as_str()).collect();
                format!("kantorovich:{}", names.join(","))
            }
            Lifting::WassersteinE => "kantorovich:E".into(),
            Lifting::TotalVariation => "tv".into(),
            Lifting::Compose(o, i) => format!("{}∘{}", o.name(), i.name()),
        }
    }

    /// Parses lifting selection strings; composites use `∘` (or `.`), outermost
    /// first. The ambient functor disambiguates which functor `discrete` and the
    /// Kantorovich families live on.
    pub fn parse(s: &str, ambient: &SetFunctor) -> Result<Lifting> {
        let parts: Vec<&str> = s.split(['∘', '.']).map(str::trim).collect();
        let mut out: Option<Lifting> = None;
        for part in parts.iter().rev() {
            let inner_functor = match &out {
                None => ambient.clone(),
                Some(_) => SetFunctor::Identity,
            };
            let this = Lifting::parse_atom(part, &inner_functor)?;
            out = Some(match out {
                None => this,
                Some(prev) => Lifting::Compose(Box::new(this), Box::new(prev)),
            });
        }
        out.ok_or_else(|| Error::Unknown("empty lifting string".into()))
    }

    fn parse_atom(s: &str, functor: &SetFunctor) -> Result<Lifting> {
        match s {
            "discrete" => Ok(Lifting::Discrete(functor.clone())),
            "dual" => Ok(Lifting::Dual),
            "sym" => Ok(Lifting::Sym),
            "zigzag" => Ok(Lifting::Zigzag),
            "egli-lower" => Ok(Lifting::FromExtension(LaxExt::EgliLower)),
            "egli-upper" => Ok(Lifting::FromExtension(LaxExt::EgliUpper)),
            "egli" => Ok(Lifting::FromExtension(LaxExt::EgliBoth)),
            "kantorovich:E" => Ok(Lifting::WassersteinE),
            "tv" => Ok(Lifting::TotalVariation),
            "kantorovich:dia" => Ok(Lifting::Kantorovich {
                functor: SetFunctor::Powerset,
                preds: vec![PredicateLifting::dia()],
            }),
            "kantorovich:box" => Ok(Lifting::Kantorovich {
                functor: SetFunctor::Powerset,
                preds: vec![PredicateLifting::box_()],
            }),
            "kantorovich:nb" => Ok(Lifting::Kantorovich {
                functor: SetFunctor::Neighbourhood,
                preds: vec![PredicateLifting::nbhd_dia()],
            }),
            other => Err(Error::Unknown(format!("lifting {other:?}"))),
        }
    }

    /// The functor whose images this lifting structures.
    pub fn functor(&self) -> SetFunctor {
        match self {
            Lifting::Discrete(f) => f.clone(),
            Lifting::Dual | Lifting::Sym | Lifting::Zigzag => SetFunctor::Identity,
            Lifting::FromExtension(e) => e.functor().clone(),
            Lifting::Kantorovich { functor, .. } => functor.clone(),
            Lifting::WassersteinE | Lifting::TotalVariation => SetFunctor::Dist,
            Lifting::Compose(o, i) => match (o.functor(), i.functor()) {
                (f, SetFunctor::Identity) => f,
                (SetFunctor::Identity, g) => g,
                (f, g) => SetFunctor::compose(f, g),
            },
        }
    }

    /// Structure value between two points of F X over the base category.
    pub fn eval(&self, base: &VCat, t: &Elem, u: &Elem) -> Result<QValue> {
        let q = &base.q;
        match self {
            Lifting::Discrete(_) => Ok(if t == u { q.unit() } else { q.bottom() }),
            Lifting::Dual => Ok(base.at_elems(u, t)?.clone()),
            Lifting::Sym => q.meet2(base.at_elems(t, u)?, base.at_elems(u, t)?),
            Lifting::Zigzag => {
                let closed = zigzag_closure(base)?;
                Ok(closed.at_elems(t, u)?.clone())
            }
            Lifting::FromExtension(e) => e.eval(q, &base.as_rel(), t, u),
            Lifting::Kantorovich { preds, .. } => {
                let values = q.carrier().map_err(|_| {
                    Error::UnsupportedEnumeration(format!(
                        "Kantorovich lifting by enumeration needs a finite quantale, got {}",
                        q.name()
                    ))
                })?;
                let mut acc = q.top();
                for pl in preds {
                    for f in vfunctors_to_power(base, &values, pl.arity)? {
                        let rows: Vec<Vec<QValue>> = (0..pl.arity)
                            .map(|j| (0..base.len()).map(|x| f[x][j].clone()).collect())
                            .collect();
                        let a = pl.eval(q, &base.carrier, &rows, t)?;
                        let b = pl.eval(q, &base.carrier, &rows, u)?;
                        acc = q.meet2(&acc, &q.hom(&a, &b)?)?;
                    }
                }
                Ok(acc)
            }
            Lifting::WassersteinE => structural_dist(base, t, u, &|c, a, b| {
                wasserstein_lp(c, &mass_vector(&c.carrier, a)?, &mass_vector(&c.carrier, b)?)
                    .and_then(|r| c.q.num(r))
            }),
            Lifting::TotalVariation => structural_dist(base, t, u, &|c, a, b| {
                total_variation(&mass_vector(&c.carrier, a)?, &mass_vector(&c.carrier, b)?)
                    .and_then(|r| c.q.num(r))
            }),
            Lifting::Compose(outer, inner) => {
                let mid = inner.lift(base)?;
                outer.eval(&mid, t, u)
            }
        }
    }

    /// Materialises the lifted category on the enumerated image carrier.
    pub fn lift(&self, base: &VCat) -> Result<VCat> {
        match self {
            // Identity-carrier liftings need no functor enumeration.
            Lifting::Dual => Ok(base.dualize()),
            Lifting::Sym => Ok(base.symmetrize()),
            Lifting::Zigzag => zigzag_closure(base),
            Lifting::Compose(outer, inner) => outer.lift(&inner.lift(base)?),
            _ => {
                let fx = self.functor().enumerate(&base.carrier)?;
                let mut mat = Vec::with_capacity(fx.len() * fx.len());
                for t in &fx {
                    for u in &fx {
                        mat.push(self.eval(base, t, u)?);
                    }
                }
                VCat::new(base.q.clone(), fx, mat)
            }
        }
    }
}

/// Distribution distances extended structurally through products, exponents and
/// the termination point: families meet labelwise, distinct labels/summands are
/// ⊥ apart, the added point is at distance k from itself.
fn structural_dist(
    base: &VCat,
    t: &Elem,
    u: &Elem,
    on_dist: &dyn Fn(&VCat, &Elem, &Elem) -> Result<QValue>,
) -> Result<QValue> {
    let q = &base.q;
    match (t, u) {
        (Elem::Dist(_), Elem::Dist(_)) => on_dist(base, t, u),
        (Elem::Term, Elem::Term) => Ok(q.unit()),
        (Elem::Term, Elem::Dist(_)) | (Elem::Dist(_), Elem::Term) => Ok(q.bottom()),
        (Elem::Func(m1), Elem::Func(m2)) => {
            if m1.keys().ne(m2.keys()) {
                return Err(Error::CarrierMismatch("families over different labels".into()));
            }
            let mut acc = q.top();
            for (k, x) in m1 {
                acc = q.meet2(&acc, &structural_dist(base, x, &m2[k], on_dist)?)?;
            }
            Ok(acc)
        }
        (Elem::Pair(a, x), Elem::Pair(b, y)) => {
            if a == b {
                structural_dist(base, x, y, on_dist)
            } else {
                Ok(q.bottom())
            }
        }
        _ => Err(Error::CarrierMismatch(format!("no distribution distance at {t}, {u}"))),
    }
}

/// Least category structure above a ∨ a°: symmetrise by join, add the diagonal,
/// close under composition by repeated squaring.
fn zigzag_closure(base: &VCat) -> Result<VCat> {
    let q = &base.q;
    let n = base.len();
    let mut mat = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut v = q.join2(base.at(i, j), base.at(j, i))?;
            if i == j {
                v = q.join2(&v, &q.unit())?;
            }
            mat.push(v);
        }
    }
    let mut cur = VCat::new(q.clone(), base.carrier.clone(), mat)?;
    for _ in 0..64 {
        let sq = cur.as_rel().then(&cur.as_rel())?;
        let mut next = Vec::with_capacity(n * n);
        let mut changed = false;
        for (i, v) in cur.mat.iter().enumerate() {
            let j = q.join2(v, &sq.mat[i])?;
            changed |= &j != v;
            next.push(j);
        }
        if !changed {
            return Ok(cur);
        }
        cur = VCat::new(q.clone(), base.carrier.clone(), next)?;
    }
    Err(Error::NonConvergence(64))
}

// ---------------------------------------------------------------------------
// Compatibility
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Compat {
    pub holds: bool,
    pub witness: Option<String>,
    /// Exhaustive over the full quantale carrier, or restricted to a grid.
    pub exhaustive: bool,
}

/// Is λ compatible with the lifting F̄, i.e. is its component a V-functor
/// F̄(V^κ) → V? For infinite quantales the power is grid-restricted and the
/// verdict is marked non-exhaustive.
pub fn compatibility_check(pl: &PredicateLifting, lifting: &Lifting, q: &Quantale) -> Result<Compat> {
    let (values, exhaustive) = match q.carrier() {
        Ok(v) => (v, true),
        Err(_) => (q.grid(4)?, false),
    };
    let power = power_v_tuples(q, &values, pl.arity)?;
    let lifted = lifting.lift(&power)?;
    let projs: Vec<Vec<QValue>> = (0..pl.arity)
        .map(|j| {
            power
                .carrier
                .iter()
                .map(|e| match e {
                    Elem::Tuple(vs) => match &vs[j] {
                        Elem::Val(v) => v.clone(),
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                })
                .collect()
        })
        .collect();
    let mut h = Vec::with_capacity(lifted.len());
    for t in &lifted.carrier {
        h.push(pl.eval(q, &power.carrier, &projs, t)?);
    }
    for i in 0..lifted.len() {
        for j in 0..lifted.len() {
            if !q.le(lifted.at(i, j), &q.hom(&h[i], &h[j])?)? {
                return Ok(Compat {
                    holds: false,
                    witness: Some(format!(
                        "component not functorial at ({}, {}): structure {} ≰ hom({}, {})",
                        lifted.carrier[i],
                        lifted.carrier[j],
                        q.value_to_string(lifted.at(i, j)),
                        q.value_to_string(&h[i]),
                        q.value_to_string(&h[j]),
                    )),
                    exhaustive,
                });
            }
        }
    }
    Ok(Compat { holds: true, witness: None, exhaustive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::rat;

    fn atoms(names: &[&str]) -> Vec<Elem> {
        names.iter().map(|s| Elem::atom(s)).collect()
    }

    fn bool_rel(src: &[Elem], tgt: &[Elem], pairs: &[(usize, usize)]) -> VRel {
        let q = Quantale::bool2();
        let mut mat = vec![q.bottom(); src.len() * tgt.len()];
        for &(i, j) in pairs {
            mat[i * tgt.len() + j] = q.top();
        }
        VRel::new(q, src.to_vec(), tgt.to_vec(), mat).unwrap()
    }

    fn set_elem(names: &[&str]) -> Elem {
        Elem::Set(names.iter().map(|s| Elem::atom(s)).collect())
    }

    #[test]
    fn egli_milner_asymmetry() {
        let q = Quantale::bool2();
        let xs = atoms(&["a", "b"]);
        let r = bool_rel(&xs, &xs, &[(0, 0), (1, 1)]);
        // Lower form: {a} vs {a,b} succeeds (every member of the left matches),
        // upper form fails (b on the right is unmatched from the left).
        let small = set_elem(&["a"]);
        let big = set_elem(&["a", "b"]);
        assert_eq!(LaxExt::EgliLower.eval(&q, &r, &small, &big).unwrap(), q.top());
        assert_eq!(LaxExt::EgliUpper.eval(&q, &r, &small, &big).unwrap(), q.bottom());
        assert_eq!(LaxExt::EgliBoth.eval(&q, &r, &small, &big).unwrap(), q.bottom());
        // The empty set is below everything in the lower form.
        let empty = set_elem(&[]);
        assert_eq!(LaxExt::EgliLower.eval(&q, &r, &empty, &big).unwrap(), q.top());
        assert_eq!(LaxExt::EgliLower.eval(&q, &r, &big, &empty).unwrap(), q.bottom());
    }

    #[test]
    fn egli_milner_is_quantitative_over_luk01() {
        let q = Quantale::luk01();
        let xs = atoms(&["a", "b"]);
        let mat: Vec<QValue> = [(0, 1), (3, 10), (1, 2), (0, 1)]
            .iter()
            .map(|&(n, d)| q.num(rat(n, d)).unwrap())
            .collect();
        let r = VRel::new(q.clone(), xs.clone(), xs.clone(), mat).unwrap();
        let ab = set_elem(&["a", "b"]);
        let a = set_elem(&["a"]);
        // From {a,b} to {a}: a matches at 0, b must use r(b,a) = 1/2; meet = max.
        let v = LaxExt::EgliLower.eval(&q, &r, &ab, &a).unwrap();
        assert_eq!(v, q.num(rat(1, 2)).unwrap());
        // From {a} to {a,b}: best match for a is itself at 0.
        let w = LaxExt::EgliLower.eval(&q, &r, &a, &ab).unwrap();
        assert_eq!(w, q.num(rat(0, 1)).unwrap());
    }

    /// The Kantorovich extension of {⋁} coincides with the lower Egli–Milner
    /// form; spot-checked here, exhausted in the acceptance suite.
    #[test]
    fn kantorovich_of_dia_matches_lower_egli() {
        let q = Quantale::bool2();
        let xs = atoms(&["a", "b"]);
        let ys = atoms(&["u", "v"]);
        let kant = LaxExt::parse("kantorovich:dia").unwrap();
        for mask in 0..16u32 {
            let pairs: Vec<(usize, usize)> = (0..4)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ((i / 2) as usize, (i % 2) as usize))
                .collect();
            let r = bool_rel(&xs, &ys, &pairs);
            let km = kant.matrix(&q, &r).unwrap();
            let em = LaxExt::EgliLower.matrix(&q, &r).unwrap();
            assert_eq!(km, em, "relation mask {mask}");
        }
    }

    #[test]
    fn empty_family_gives_the_largest_extension() {
        let q = Quantale::bool2();
        let xs = atoms(&["a"]);
        let kant = LaxExt::Kantorovich { functor: SetFunctor::Powerset, preds: vec![] };
        let r = bool_rel(&xs, &xs, &[]);
        let m = kant.matrix(&q, &r).unwrap();
        assert!(m.mat.iter().all(|v| v == &q.top()));
    }

    #[test]
    fn discrete_lifting_forgets_structure() {
        let q = Quantale::luk01();
        let base = VCat::indiscrete(q.clone(), atoms(&["x", "y"]));
        let l = Lifting::Discrete(SetFunctor::Identity);
        let lifted = l.lift(&base).unwrap();
        assert_eq!(lifted, VCat::discrete(q, atoms(&["x", "y"])));
    }

    #[test]
    fn dual_and_sym_liftings_act_pointwise() {
        let q = Quantale::luk01();
        let mat: Vec<QValue> = [(0, 1), (1, 5), (1, 2), (0, 1)]
            .iter()
            .map(|&(n, d)| q.num(rat(n, d)).unwrap())
            .collect();
        let base = VCat::new(q.clone(), atoms(&["x", "y"]), mat).unwrap();
        assert_eq!(Lifting::Dual.lift(&base).unwrap(), base.dualize());
        assert_eq!(Lifting::Sym.lift(&base).unwrap(), base.symmetrize());
    }

    /// The zigzag closure of the ordinal (3,∨) with 2 ≤ 1 and 2 ≤ 0 relates
    /// everything, while discrete stays discrete: the initial embedding of the
    /// discrete pair into it is destroyed (the appendix witness).
    #[test]
    fn zigzag_collapses_the_wedge() {
        let q = Quantale::bool2();
        let (t, f) = (q.top(), q.bottom());
        let wedge = VCat::new(
            q.clone(),
            atoms(&["0", "1", "2"]),
            vec![
                t.clone(), f.clone(), f.clone(),
                f.clone(), t.clone(), f.clone(),
                t.clone(), t.clone(), t.clone(),
            ],
        )
        .unwrap();
        wedge.validate().unwrap();
        let closed = Lifting::Zigzag.lift(&wedge).unwrap();
        assert_eq!(closed, VCat::indiscrete(q.clone(), wedge.carrier.clone()));
        let disc = VCat::discrete(q.clone(), atoms(&["x0", "x1"]));
        assert_eq!(Lifting::Zigzag.lift(&disc).unwrap(), disc);
    }

    #[test]
    fn zigzag_is_the_shortest_symmetric_path_over_luk01() {
        let q = Quantale::luk01();
        // Chain x –0.2– y –0.3– z with no direct x–z information.
        let mat: Vec<QValue> = [
            (0, 1), (1, 5), (1, 1),
            (1, 5), (0, 1), (3, 10),
            (1, 1), (3, 10), (0, 1),
        ]
        .iter()
        .map(|&(n, d)| q.num(rat(n, d)).unwrap())
        .collect();
        let base = VCat::new(q.clone(), atoms(&["x", "y", "z"]), mat).unwrap();
        let closed = Lifting::Zigzag.lift(&base).unwrap();
        assert_eq!(closed.at(0, 2), &q.num(rat(1, 2)).unwrap());
        assert_eq!(closed.at(2, 0), &q.num(rat(1, 2)).unwrap());
        closed.validate().unwrap();
    }

    /// Kantorovich lifting of {⋁} on a discrete Bool2 pair: subsets are ordered
    /// by inclusion-like simulation, matching the lower Egli–Milner of equality.
    #[test]
    fn kantorovich_lift_of_dia_on_a_discrete_pair() {
        let q = Quantale::bool2();
        let base = VCat::discrete(q.clone(), atoms(&["x", "y"]));
        let l = Lifting::parse("kantorovich:dia", &SetFunctor::Powerset).unwrap();
        let lifted = l.lift(&base).unwrap();
        let viaext = Lifting::FromExtension(LaxExt::EgliLower).lift(&base).unwrap();
        assert_eq!(lifted, viaext);
        // Hand values: {} ≤ everything, {x} ≤ {x,y}, {x} ≰ {y}.
        let e = Elem::Set(Default::default());
        let sx = set_elem(&["x"]);
        let sy = set_elem(&["y"]);
        let sxy = set_elem(&["x", "y"]);
        assert_eq!(lifted.at_elems(&e, &sx).unwrap(), &q.top());
        assert_eq!(lifted.at_elems(&sx, &sxy).unwrap(), &q.top());
        assert_eq!(lifted.at_elems(&sx, &sy).unwrap(), &q.bottom());
        assert_eq!(lifted.at_elems(&sxy, &sx).unwrap(), &q.bottom());
    }

    #[test]
    fn empty_kantorovich_family_lifts_to_indiscrete() {
        let q = Quantale::bool2();
        let base = VCat::discrete(q.clone(), atoms(&["x", "y"]));
        let l = Lifting::Kantorovich { functor: SetFunctor::Identity, preds: vec![] };
        let lifted = l.lift(&base).unwrap();
        assert_eq!(lifted, VCat::indiscrete(q, atoms(&["x", "y"])));
    }

    /// Dirac distributions sit at exactly the ground distance under the
    /// expectation Kantorovich lifting.
    #[test]
    fn dirac_embedding_is_isometric() {
        let q = Quantale::luk01();
        let mat: Vec<QValue> = [(0, 1), (3, 10), (3, 10), (0, 1)]
            .iter()
            .map(|&(n, d)| q.num(rat(n, d)).unwrap())
            .collect();
        let base = VCat::new(q.clone(), atoms(&["x", "y"]), mat).unwrap();
        let dx = Elem::dirac(Elem::atom("x"));
        let dy = Elem::dirac(Elem::atom("y"));
        let v = Lifting::WassersteinE.eval(&base, &dx, &dy).unwrap();
        assert_eq!(v, q.num(rat(3, 10)).unwrap());
        // Total variation is blind to the ground values.
        let tv = Lifting::TotalVariation.eval(&base, &dx, &dy).unwrap();
        assert_eq!(tv, q.num(rat(1, 1)).unwrap());
    }

    /// tv = (Kantorovich E) ∘ discrete, pointwise.
    #[test]
    fn total_variation_is_the_discrete_composite() {
        let q = Quantale::luk01();
        let mat: Vec<QValue> = [(0, 1), (1, 5), (1, 2), (0, 1)]
            .iter()
            .map(|&(n, d)| q.num(rat(n, d)).unwrap())
            .collect();
        let base = VCat::new(q.clone(), atoms(&["x", "y"]), mat).unwrap();
        let comp = Lifting::Compose(
            Box::new(Lifting::WassersteinE),
            Box::new(Lifting::Discrete(SetFunctor::Identity)),
        );
        let pairs = [
            Elem::dirac(Elem::atom("x")),
            Elem::dirac(Elem::atom("y")),
            Elem::dist(vec![(Elem::atom("x"), rat(1, 2)), (Elem::atom("y"), rat(1, 2))]).unwrap(),
            Elem::dist(vec![(Elem::atom("x"), rat(3, 4)), (Elem::atom("y"), rat(1, 4))]).unwrap(),
        ];
        for t in &pairs {
            for u in &pairs {
                assert_eq!(
                    comp.eval(&base, t, u).unwrap(),
                    Lifting::TotalVariation.eval(&base, t, u).unwrap(),
                    "at {t}, {u}"
                );
            }
        }
    }

    #[test]
    fn structural_distance_through_termination_and_labels() {
        let q = Quantale::luk01();
        let base = VCat::discrete(q.clone(), atoms(&["x"]));
        let term = Elem::Term;
        let dx = Elem::dirac(Elem::atom("x"));
        assert_eq!(Lifting::WassersteinE.eval(&base, &term, &term).unwrap(), q.unit());
        assert_eq!(Lifting::WassersteinE.eval(&base, &term, &dx).unwrap(), q.bottom());
        let fa = Elem::Func([("a".to_string(), term.clone())].into_iter().collect());
        let fb = Elem::Func([("a".to_string(), dx.clone())].into_iter().collect());
        assert_eq!(Lifting::WassersteinE.eval(&base, &fa, &fb).unwrap(), q.bottom());
        assert_eq!(Lifting::WassersteinE.eval(&base, &fb, &fb).unwrap(), q.unit());
    }

    #[test]
    fn induced_lifting_of_the_lower_extension_is_dia() {
        let q = Quantale::bool2();
        // 𝔯 : 1 ↛ P(1) selecting the singleton {κ0}: F(κ) = {∅, {κ0}}.
        let row = vec![q.bottom(), q.top()];
        let pl = PredicateLifting::induced("dia?".into(), LaxExt::EgliLower, 1, row).unwrap();
        let xs = atoms(&["a", "b", "c"]);
        let dia = PredicateLifting::dia();
        // All predicates over the 3-point carrier.
        for mask in 0..8u32 {
            let p: Vec<QValue> = (0..3)
                .map(|i| if mask >> i & 1 == 1 { q.top() } else { q.bottom() })
                .collect();
            for t in SetFunctor::Powerset.enumerate(&xs).unwrap() {
                assert_eq!(
                    pl.eval(&q, &xs, &[p.clone()], &t).unwrap(),
                    dia.eval(&q, &xs, &[p.clone()], &t).unwrap(),
                    "at {t} mask {mask}"
                );
            }
        }
    }

    #[test]
    fn induced_lifting_of_a_bottom_row_is_constant_bottom() {
        let q = Quantale::bool2();
        let row = vec![q.bottom(), q.bottom()];
        let pl = PredicateLifting::induced("none".into(), LaxExt::EgliLower, 1, row).unwrap();
        let xs = atoms(&["a"]);
        let p = vec![q.top()];
        for t in SetFunctor::Powerset.enumerate(&xs).unwrap() {
            assert_eq!(pl.eval(&q, &xs, &[p.clone()], &t).unwrap(), q.bottom());
        }
    }

    #[test]
    fn dia_is_compatible_with_its_own_kantorovich_lift() {
        let q = Quantale::bool2();
        let l = Lifting::FromExtension(LaxExt::EgliLower);
        let c = compatibility_check(&PredicateLifting::dia(), &l, &q).unwrap();
        assert!(c.holds && c.exhaustive, "{:?}", c.witness);
    }

    /// hom(−,⊥) is compatible with the dual lifting but not the plain one,
    /// and it is not monotone.
    #[test]
    fn negation_fits_the_dual_lifting_only() {
        let q = Quantale::bool2();
        let neg = PredicateLifting::neg_dual();
        let dual = compatibility_check(&neg, &Lifting::Dual, &q).unwrap();
        assert!(dual.holds, "{:?}", dual.witness);
        let plain = compatibility_check(&neg, &Lifting::FromExtension(LaxExt::IdentityRel), &q).unwrap();
        assert!(!plain.holds);
        // Monotonicity fails: p ≤ p' pointwise but neg(p) ≥ neg(p').
        let xs = atoms(&["a"]);
        let lo = vec![q.bottom()];
        let hi = vec![q.top()];
        let at = |p: &Vec<QValue>| neg.eval(&q, &xs, &[p.clone()], &Elem::atom("a")).unwrap();
        assert!(q.le(&at(&lo), &at(&hi)).unwrap() == false);
    }

    #[test]
    fn component_table_of_dia_is_membership_of_top() {
        let q = Quantale::bool2();
        let (fp, table) = PredicateLifting::dia()
            .component_table(&q, &q.carrier().unwrap())
            .unwrap();
        // h(A) = ⊤ iff the tuple ⊤ (here: value T) belongs to A.
        for t in &fp {
            let Elem::Set(s) = t else { unreachable!() };
            let has_top = s.iter().any(|e| match e {
                Elem::Tuple(vs) => vs[0] == Elem::Val(q.top()),
                _ => false,
            });
            assert_eq!(table[t] == q.top(), has_top);
        }
    }
}
