//! Carrier elements and the finitary set functors coalgebras range over.
//!
//! Carriers are ordinary finite sets; their points are [`Elem`] values so that the
//! image of a carrier under a functor (subsets, distributions, labelled tuples,
//! neighbourhood systems) is again a carrier. The derived `Ord` on `Elem` is purely
//! structural and only fixes a canonical enumeration order.

use crate::error::{Error, Result};
use crate::quantale::{fmt_rat, QValue, Rat};
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Elem {
    /// A named base-carrier point.
    Atom(String),
    /// A quantale value used as a carrier point (powers of the quantale itself).
    Val(QValue),
    Tuple(Vec<Elem>),
    Set(BTreeSet<Elem>),
    /// Finitely supported probability distribution: sorted support, positive
    /// masses summing to one.
    Dist(Vec<(Elem, Rat)>),
    /// Labelled point of a product A × F.
    Pair(String, Box<Elem>),
    /// A-indexed family, i.e. a point of F^A.
    Func(BTreeMap<String, Elem>),
    /// The added point of 1 + F.
    Term,
}

impl Elem {
    pub fn atom(s: &str) -> Elem {
        Elem::Atom(s.to_string())
    }

    /// Canonicalises and validates a distribution: merges duplicate support
    /// points, drops zero masses, requires total mass one.
    pub fn dist(pairs: Vec<(Elem, Rat)>) -> Result<Elem> {
        let mut merged: BTreeMap<Elem, Rat> = BTreeMap::new();
        for (x, p) in pairs {
            if p.is_negative() {
                return Err(Error::Distribution(format!("negative mass {}", fmt_rat(&p))));
            }
            *merged.entry(x).or_insert_with(Rat::zero) += p;
        }
        let total: Rat = merged.values().cloned().sum();
        if !total.is_one() {
            return Err(Error::Distribution(format!("total mass {} ≠ 1", fmt_rat(&total))));
        }
        Ok(Elem::Dist(merged.into_iter().filter(|(_, p)| !p.is_zero()).collect()))
    }

    pub fn dirac(x: Elem) -> Elem {
        Elem::Dist(vec![(x, Rat::one())])
    }

    /// Mass of `x`, zero off the support. Only meaningful on `Dist`.
    pub fn mass(&self, x: &Elem) -> Rat {
        match self {
            Elem::Dist(d) => d
                .binary_search_by(|(y, _)| y.cmp(x))
                .map(|i| d[i].1.clone())
                .unwrap_or_else(|_| Rat::zero()),
            _ => Rat::zero(),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Atom(s) => write!(f, "{s}"),
            Elem::Val(v) => write!(f, "{v}"),
            Elem::Tuple(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Elem::Set(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            Elem::Dist(d) => {
                write!(f, "[")?;
                for (i, (x, p)) in d.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}:{}", fmt_rat(p))?;
                }
                write!(f, "]")
            }
            Elem::Pair(a, x) => write!(f, "({a},{x})"),
            Elem::Func(m) => {
                write!(f, "{{")?;
                for (i, (a, x)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}->{x}")?;
                }
                write!(f, "}}")
            }
            Elem::Term => write!(f, "*"),
        }
    }
}

/// Size guards keeping exhaustive enumerations honest.
const POWERSET_MAX: usize = 10;
const NBHD_MAX: usize = 3;
const ENUM_MAX: usize = 1 << 16;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SetFunctor {
    Identity,
    /// Finite powerset.
    Powerset,
    /// Finitely supported probability distributions.
    Dist,
    /// 1 + F with the extra point [`Elem::Term`].
    Maybe(Box<SetFunctor>),
    /// A × F for a finite label set A.
    Labelled(Vec<String>, Box<SetFunctor>),
    /// F^A for a finite label set A.
    PowerL(Vec<String>, Box<SetFunctor>),
    /// Monotone neighbourhood systems: up-closed families of subsets.
    Neighbourhood,
    Compose(Box<SetFunctor>, Box<SetFunctor>),
}

impl SetFunctor {
    pub fn powerset() -> SetFunctor {
        SetFunctor::Powerset
    }

    pub fn dist() -> SetFunctor {
        SetFunctor::Dist
    }

    pub fn maybe(f: SetFunctor) -> SetFunctor {
        SetFunctor::Maybe(Box::new(f))
    }

    pub fn labelled(labels: &[&str], f: SetFunctor) -> SetFunctor {
        SetFunctor::Labelled(labels.iter().map(|s| s.to_string()).collect(), Box::new(f))
    }

    pub fn power_labelled(labels: &[&str], f: SetFunctor) -> SetFunctor {
        SetFunctor::PowerL(labels.iter().map(|s| s.to_string()).collect(), Box::new(f))
    }

    pub fn compose(outer: SetFunctor, inner: SetFunctor) -> SetFunctor {
        SetFunctor::Compose(Box::new(outer), Box::new(inner))
    }

    /// Parses the selection strings used in system files; `labels` fills in the
    /// exponent/product label set where the string mentions `A`.
    pub fn parse(s: &str, labels: &[String]) -> Result<SetFunctor> {
        let need_labels = |f: fn(Vec<String>) -> SetFunctor| -> Result<SetFunctor> {
            if labels.is_empty() {
                Err(Error::Validation(format!("functor {s:?} needs a labels list")))
            } else {
                Ok(f(labels.to_vec()))
            }
        };
        match s.trim() {
            "id" => Ok(SetFunctor::Identity),
            "powerset" => Ok(SetFunctor::Powerset),
            "dist" => Ok(SetFunctor::Dist),
            "1+dist" | "(1+dist)" => Ok(SetFunctor::maybe(SetFunctor::Dist)),
            "nbhd" => Ok(SetFunctor::Neighbourhood),
            "dist^A" => need_labels(|a| SetFunctor::PowerL(a, Box::new(SetFunctor::Dist))),
            "(1+dist)^A" => {
                need_labels(|a| SetFunctor::PowerL(a, Box::new(SetFunctor::maybe(SetFunctor::Dist))))
            }
            "powerset^A" => need_labels(|a| SetFunctor::PowerL(a, Box::new(SetFunctor::Powerset))),
            "Axpowerset" | "A x powerset" => {
                need_labels(|a| SetFunctor::Labelled(a, Box::new(SetFunctor::Powerset)))
            }
            "Axid" | "A x id" => need_labels(|a| SetFunctor::Labelled(a, Box::new(SetFunctor::Identity))),
            other => Err(Error::Unknown(format!("functor {other:?}"))),
        }
    }

    pub fn display_name(&self) -> String {
        match self {
            SetFunctor::Identity => "id".into(),
            SetFunctor::Powerset => "powerset".into(),
            SetFunctor::Dist => "dist".into(),
            SetFunctor::Maybe(f) => format!("1+{}", f.display_name()),
            SetFunctor::Labelled(a, f) => format!("Ax{} (|A|={})", f.display_name(), a.len()),
            SetFunctor::PowerL(a, f) => format!("({})^A (|A|={})", f.display_name(), a.len()),
            SetFunctor::Neighbourhood => "nbhd".into(),
            SetFunctor::Compose(f, g) => format!("{}∘{}", f.display_name(), g.display_name()),
        }
    }

    /// Whether [`SetFunctor::enumerate`] can work at all (size guards may still
    /// reject a particular carrier).
    pub fn enumerable(&self) -> bool {
        match self {
            SetFunctor::Dist => false,
            SetFunctor::Maybe(f) => f.enumerable(),
            SetFunctor::Labelled(_, f) | SetFunctor::PowerL(_, f) => f.enumerable(),
            SetFunctor::Compose(f, g) => f.enumerable() && g.enumerable(),
            _ => true,
        }
    }

    /// All points of F X for a finite carrier X, in a deterministic order.
    pub fn enumerate(&self, carrier: &[Elem]) -> Result<Vec<Elem>> {
        match self {
            SetFunctor::Identity => Ok(carrier.to_vec()),
            SetFunctor::Powerset => {
                let n = carrier.len();
                if n > POWERSET_MAX {
                    return Err(Error::SizeGuard(format!("powerset of {n}-point carrier")));
                }
                Ok(subsets(carrier))
            }
            SetFunctor::Dist => Err(Error::UnsupportedEnumeration(
                "distributions over a nonempty carrier are infinite".into(),
            )),
            SetFunctor::Maybe(f) => {
                let mut out = vec![Elem::Term];
                out.extend(f.enumerate(carrier)?);
                Ok(out)
            }
            SetFunctor::Labelled(labels, f) => {
                let inner = f.enumerate(carrier)?;
                let mut out = Vec::with_capacity(labels.len() * inner.len());
                for a in labels {
                    for t in &inner {
                        out.push(Elem::Pair(a.clone(), Box::new(t.clone())));
                    }
                }
                Ok(out)
            }
            SetFunctor::PowerL(labels, f) => {
                let inner = f.enumerate(carrier)?;
                let total = inner.len().checked_pow(labels.len() as u32).unwrap_or(usize::MAX);
                if total > ENUM_MAX {
                    return Err(Error::SizeGuard(format!(
                        "{}^{} points in an exponent carrier",
                        inner.len(),
                        labels.len()
                    )));
                }
                let mut out = vec![BTreeMap::new()];
                for a in labels {
                    let mut next = Vec::with_capacity(out.len() * inner.len());
                    for partial in &out {
                        for t in &inner {
                            let mut m: BTreeMap<String, Elem> = partial.clone();
                            m.insert(a.clone(), t.clone());
                            next.push(m);
                        }
                    }
                    out = next;
                }
                Ok(out.into_iter().map(Elem::Func).collect())
            }
            SetFunctor::Neighbourhood => {
                let n = carrier.len();
                if n > NBHD_MAX {
                    return Err(Error::SizeGuard(format!("neighbourhoods of {n}-point carrier")));
                }
                let subs = subsets(carrier);
                let m = subs.len();
                let mut out = Vec::new();
                'fam: for mask in 0u32..(1 << m) {
                    let family: Vec<&Elem> =
                        (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &subs[i]).collect();
                    // Up-closure under ⊆ on subsets.
                    for (i, a) in subs.iter().enumerate() {
                        if mask >> i & 1 == 0 {
                            continue;
                        }
                        let sa = set_of(a);
                        for (j, b) in subs.iter().enumerate() {
                            if mask >> j & 1 == 0 && sa.is_subset(set_of(b)) {
                                continue 'fam;
                            }
                        }
                    }
                    out.push(Elem::Set(family.into_iter().cloned().collect()));
                }
                Ok(out)
            }
            SetFunctor::Compose(f, g) => f.enumerate(&g.enumerate(carrier)?),
        }
    }

    /// Functorial action on a concrete function given as a lookup table.
    /// `cod` is the codomain carrier (the neighbourhood functor genuinely needs it).
    pub fn fmap(&self, map: &BTreeMap<Elem, Elem>, cod: &[Elem], t: &Elem) -> Result<Elem> {
        let apply = |x: &Elem| -> Result<Elem> {
            map.get(x)
                .cloned()
                .ok_or_else(|| Error::CarrierMismatch(format!("{x} not in function domain")))
        };
        match (self, t) {
            (SetFunctor::Identity, x) => apply(x),
            (SetFunctor::Powerset, Elem::Set(xs)) => {
                let mut out = BTreeSet::new();
                for x in xs {
                    out.insert(apply(x)?);
                }
                Ok(Elem::Set(out))
            }
            (SetFunctor::Dist, Elem::Dist(d)) => {
                let mut merged: BTreeMap<Elem, Rat> = BTreeMap::new();
                for (x, p) in d {
                    *merged.entry(apply(x)?).or_insert_with(Rat::zero) += p.clone();
                }
                Ok(Elem::Dist(merged.into_iter().collect()))
            }
            (SetFunctor::Maybe(_), Elem::Term) => Ok(Elem::Term),
            (SetFunctor::Maybe(f), x) => f.fmap(map, cod, x),
            (SetFunctor::Labelled(_, f), Elem::Pair(a, x)) => {
                Ok(Elem::Pair(a.clone(), Box::new(f.fmap(map, cod, x)?)))
            }
            (SetFunctor::PowerL(_, f), Elem::Func(m)) => {
                let mut out = BTreeMap::new();
                for (a, x) in m {
                    out.insert(a.clone(), f.fmap(map, cod, x)?);
                }
                Ok(Elem::Func(out))
            }
            (SetFunctor::Neighbourhood, Elem::Set(family)) => {
                // N f (U) = { B ⊆ Y : f⁻¹(B) ∈ U }.
                let mut out = BTreeSet::new();
                for b in subsets(cod) {
                    let bs = set_of(&b).clone();
                    let pre: BTreeSet<Elem> = map
                        .iter()
                        .filter(|(_, fx)| bs.contains(*fx))
                        .map(|(x, _)| x.clone())
                        .collect();
                    if family.contains(&Elem::Set(pre)) {
                        out.insert(b);
                    }
                }
                Ok(Elem::Set(out))
            }
            (SetFunctor::Compose(f, g), t) => {
                // (F∘G)(h) acts on F(G X): push the table through G first.
                let g_dom: Vec<Elem> = map.keys().cloned().collect();
                let g_on = g.enumerate(&g_dom)?;
                let mut lifted = BTreeMap::new();
                for u in g_on {
                    let v = g.fmap(map, cod, &u)?;
                    lifted.insert(u, v);
                }
                let g_cod = g.enumerate(cod)?;
                f.fmap(&lifted, &g_cod, t)
            }
            _ => Err(Error::CarrierMismatch(format!(
                "element {t} does not match functor {}",
                self.display_name()
            ))),
        }
    }

    /// Checks that `t` is a well-formed point of F X for the given carrier.
    pub fn validate_elem(&self, carrier: &[Elem], t: &Elem) -> Result<()> {
        let in_carrier = |x: &Elem| -> Result<()> {
            if carrier.contains(x) {
                Ok(())
            } else {
                Err(Error::CarrierMismatch(format!("{x} not in carrier")))
            }
        };
        match (self, t) {
            (SetFunctor::Identity, x) => in_carrier(x),
            (SetFunctor::Powerset, Elem::Set(xs)) => xs.iter().try_for_each(in_carrier),
            (SetFunctor::Dist, Elem::Dist(d)) => {
                let total: Rat = d.iter().map(|(_, p)| p.clone()).sum();
                if !total.is_one() {
                    return Err(Error::Distribution(format!("total mass {}", fmt_rat(&total))));
                }
                if d.iter().any(|(_, p)| !p.is_positive()) {
                    return Err(Error::Distribution("nonpositive mass".into()));
                }
                d.iter().map(|(x, _)| x).try_for_each(in_carrier)
            }
            (SetFunctor::Maybe(_), Elem::Term) => Ok(()),
            (SetFunctor::Maybe(f), x) => f.validate_elem(carrier, x),
            (SetFunctor::Labelled(labels, f), Elem::Pair(a, x)) => {
                if !labels.contains(a) {
                    return Err(Error::Unknown(format!("label {a:?}")));
                }
                f.validate_elem(carrier, x)
            }
            (SetFunctor::PowerL(labels, f), Elem::Func(m)) => {
                let keys: Vec<&String> = m.keys().collect();
                let want: BTreeSet<&String> = labels.iter().collect();
                if keys.len() != want.len() || !keys.iter().all(|k| want.contains(k)) {
                    return Err(Error::CarrierMismatch("labels of the family differ from A".into()));
                }
                m.values().try_for_each(|x| f.validate_elem(carrier, x))
            }
            (SetFunctor::Neighbourhood, Elem::Set(family)) => {
                for a in family {
                    let Elem::Set(sa) = a else {
                        return Err(Error::CarrierMismatch("neighbourhood member is not a set".into()));
                    };
                    sa.iter().try_for_each(in_carrier)?;
                    // Up-closedness.
                    for b in subsets(carrier) {
                        if sa.is_subset(set_of(&b)) && !family.contains(&b) {
                            return Err(Error::Validation(format!(
                                "neighbourhood system not up-closed at {b}"
                            )));
                        }
                    }
                }
                Ok(())
            }
            (SetFunctor::Compose(f, g), t) => f.validate_elem(&g.enumerate(carrier)?, t),
            _ => Err(Error::CarrierMismatch(format!(
                "element {t} does not match functor {}",
                self.display_name()
            ))),
        }
    }
}

fn set_of(e: &Elem) -> &BTreeSet<Elem> {
    match e {
        Elem::Set(s) => s,
        _ => panic!("expected a set element"),
    }
}

/// All subsets of a carrier, in mask order (deterministic).
pub fn subsets(carrier: &[Elem]) -> Vec<Elem> {
    let n = carrier.len();
    assert!(n < 32, "subset enumeration guard");
    (0..(1u32 << n))
        .map(|mask| {
            Elem::Set(
                (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| carrier[i].clone())
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::rat;

    fn abc() -> Vec<Elem> {
        vec![Elem::atom("a"), Elem::atom("b"), Elem::atom("c")]
    }

    #[test]
    fn powerset_enumeration_and_action() {
        let xs = abc();
        let all = SetFunctor::Powerset.enumerate(&xs).unwrap();
        assert_eq!(all.len(), 8);
        // Collapse b ↦ a and push a subset through.
        let map: BTreeMap<Elem, Elem> = vec![
            (Elem::atom("a"), Elem::atom("a")),
            (Elem::atom("b"), Elem::atom("a")),
            (Elem::atom("c"), Elem::atom("c")),
        ]
        .into_iter()
        .collect();
        let ab = Elem::Set([Elem::atom("a"), Elem::atom("b")].into_iter().collect());
        let img = SetFunctor::Powerset.fmap(&map, &xs[..1], &ab).unwrap();
        assert_eq!(img, Elem::Set([Elem::atom("a")].into_iter().collect()));
    }

    #[test]
    fn distribution_pushforward_merges_mass() {
        let map: BTreeMap<Elem, Elem> = vec![
            (Elem::atom("a"), Elem::atom("z")),
            (Elem::atom("b"), Elem::atom("z")),
        ]
        .into_iter()
        .collect();
        let mu = Elem::dist(vec![(Elem::atom("a"), rat(1, 2)), (Elem::atom("b"), rat(1, 2))]).unwrap();
        let img = SetFunctor::Dist.fmap(&map, &[Elem::atom("z")], &mu).unwrap();
        assert_eq!(img, Elem::dirac(Elem::atom("z")));
    }

    #[test]
    fn distributions_are_canonical() {
        let d1 = Elem::dist(vec![
            (Elem::atom("x"), rat(1, 4)),
            (Elem::atom("x"), rat(1, 4)),
            (Elem::atom("y"), rat(1, 2)),
            (Elem::atom("z"), rat(0, 1)),
        ])
        .unwrap();
        let d2 = Elem::dist(vec![(Elem::atom("y"), rat(1, 2)), (Elem::atom("x"), rat(1, 2))]).unwrap();
        assert_eq!(d1, d2);
        assert!(Elem::dist(vec![(Elem::atom("x"), rat(1, 2))]).is_err());
        assert_eq!(d1.mass(&Elem::atom("y")), rat(1, 2));
        assert_eq!(d1.mass(&Elem::atom("w")), rat(0, 1));
    }

    #[test]
    fn neighbourhood_systems_are_up_closed() {
        let xs = vec![Elem::atom("a"), Elem::atom("b")];
        let all = SetFunctor::Neighbourhood.enumerate(&xs).unwrap();
        // Up-closed families over a 2-element base: the free distributive lattice
        // count for n=2 (Dedekind number) is 6.
        assert_eq!(all.len(), 6);
        for u in &all {
            SetFunctor::Neighbourhood.validate_elem(&xs, u).unwrap();
        }
    }

    #[test]
    fn exponent_families_cover_all_label_assignments() {
        let f = SetFunctor::power_labelled(&["l", "r"], SetFunctor::maybe(SetFunctor::Identity));
        let xs = vec![Elem::atom("a")];
        let all = f.enumerate(&xs).unwrap();
        // Each label independently picks * or a.
        assert_eq!(all.len(), 4);
        for t in &all {
            f.validate_elem(&xs, t).unwrap();
        }
    }

    #[test]
    fn functor_strings_parse() {
        let labels = vec!["x".to_string()];
        assert!(SetFunctor::parse("powerset", &[]).is_ok());
        assert!(SetFunctor::parse("dist^A", &[]).is_err());
        assert!(matches!(
            SetFunctor::parse("(1+dist)^A", &labels).unwrap(),
            SetFunctor::PowerL(_, _)
        ));
        assert!(SetFunctor::parse("frobnicate", &[]).is_err());
    }
}
