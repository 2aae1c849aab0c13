//! Quantale-enriched categories and relations on finite carriers.
//!
//! A V-category is a carrier with a V-valued structure matrix a satisfying
//! k ≤ a(x,x) and a(x,y) ⊗ a(y,z) ≤ a(x,z); for the reversed-order numeric
//! quantales these are exactly the (possibly asymmetric) 1-bounded metric axioms.
//! V-relations are V-valued matrices between two carriers, composed with
//! join-of-tensors; `kan` is the right Kan extension, the relational residual.

use crate::error::{Error, Result};
use crate::functor::Elem;
use crate::quantale::{QValue, Quantale};
use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Debug)]
pub struct VCat {
    pub q: Quantale,
    pub carrier: Vec<Elem>,
    /// Row-major |X|×|X|; entry (i,j) is a(xᵢ, xⱼ).
    pub mat: Vec<QValue>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct VRel {
    pub q: Quantale,
    pub src: Vec<Elem>,
    pub tgt: Vec<Elem>,
    /// Row-major |src|×|tgt|.
    pub mat: Vec<QValue>,
}

/// A concrete function between carriers, by target index per source point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MapWitness {
    pub map: Vec<usize>,
}

impl MapWitness {
    pub fn new(map: Vec<usize>) -> MapWitness {
        MapWitness { map }
    }

    pub fn identity(n: usize) -> MapWitness {
        MapWitness { map: (0..n).collect() }
    }

    /// Builds the witness from explicit element pairs.
    pub fn from_pairs(dom: &[Elem], cod: &[Elem], pairs: &[(Elem, Elem)]) -> Result<MapWitness> {
        let mut map = vec![usize::MAX; dom.len()];
        for (x, y) in pairs {
            let i = index_of(dom, x)?;
            let j = index_of(cod, y)?;
            if map[i] != usize::MAX && map[i] != j {
                return Err(Error::Validation(format!("{x} mapped twice")));
            }
            map[i] = j;
        }
        if let Some(i) = map.iter().position(|&j| j == usize::MAX) {
            return Err(Error::Validation(format!("{} has no image", dom[i])));
        }
        Ok(MapWitness { map })
    }

    pub fn check_shape(&self, dom: &[Elem], cod: &[Elem]) -> Result<()> {
        if self.map.len() != dom.len() {
            return Err(Error::Dimension("map length differs from domain".into()));
        }
        if self.map.iter().any(|&j| j >= cod.len()) {
            return Err(Error::Dimension("map target out of range".into()));
        }
        Ok(())
    }

    /// The function as an element table, for functorial actions.
    pub fn as_table(&self, dom: &[Elem], cod: &[Elem]) -> BTreeMap<Elem, Elem> {
        dom.iter()
            .cloned()
            .zip(self.map.iter().map(|&j| cod[j].clone()))
            .collect()
    }
}

pub fn index_of(carrier: &[Elem], x: &Elem) -> Result<usize> {
    carrier
        .iter()
        .position(|y| y == x)
        .ok_or_else(|| Error::CarrierMismatch(format!("{x} not in carrier")))
}

impl VCat {
    pub fn new(q: Quantale, carrier: Vec<Elem>, mat: Vec<QValue>) -> Result<VCat> {
        if mat.len() != carrier.len() * carrier.len() {
            return Err(Error::Dimension(format!(
                "{} entries for a {}-point carrier",
                mat.len(),
                carrier.len()
            )));
        }
        for v in &mat {
            q.validate_value(v)?;
        }
        for (i, x) in carrier.iter().enumerate() {
            if carrier[i + 1..].contains(x) {
                return Err(Error::Validation(format!("duplicate carrier point {x}")));
            }
        }
        Ok(VCat { q, carrier, mat })
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> &QValue {
        &self.mat[i * self.carrier.len() + j]
    }

    pub fn idx(&self, x: &Elem) -> Result<usize> {
        index_of(&self.carrier, x)
    }

    pub fn at_elems(&self, x: &Elem, y: &Elem) -> Result<&QValue> {
        Ok(self.at(self.idx(x)?, self.idx(y)?))
    }

    /// Discrete structure: k on the diagonal, ⊥ off it.
    pub fn discrete(q: Quantale, carrier: Vec<Elem>) -> VCat {
        let n = carrier.len();
        let (k, bot) = (q.unit(), q.bottom());
        let mat = (0..n * n)
            .map(|p| if p / n == p % n { k.clone() } else { bot.clone() })
            .collect();
        VCat { q, carrier, mat }
    }

    /// Indiscrete structure: ⊤ everywhere.
    pub fn indiscrete(q: Quantale, carrier: Vec<Elem>) -> VCat {
        let n = carrier.len();
        let top = q.top();
        VCat { q, carrier, mat: vec![top; n * n] }
    }

    /// The quantale itself as a V-category via hom.
    pub fn of_values(q: Quantale, values: Vec<QValue>) -> Result<VCat> {
        let mut mat = Vec::with_capacity(values.len() * values.len());
        for u in &values {
            for v in &values {
                mat.push(q.hom(u, v)?);
            }
        }
        let carrier = values.into_iter().map(Elem::Val).collect();
        Ok(VCat { q, carrier, mat })
    }

    /// All category-axiom violations, as printable witnesses.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.len();
        let k = self.q.unit();
        for i in 0..n {
            if !self.q.le(&k, self.at(i, i)).unwrap_or(false) {
                out.push(format!(
                    "reflexivity fails at {}: a(x,x) = {}",
                    self.carrier[i],
                    self.q.value_to_string(self.at(i, i))
                ));
            }
            for j in 0..n {
                for l in 0..n {
                    let t = match self.q.tensor(self.at(i, j), self.at(j, l)) {
                        Ok(t) => t,
                        Err(e) => {
                            out.push(e.to_string());
                            return out;
                        }
                    };
                    if !self.q.le(&t, self.at(i, l)).unwrap_or(false) {
                        out.push(format!(
                            "transitivity fails at ({}, {}, {}): {} ⊗ {} ≰ {}",
                            self.carrier[i],
                            self.carrier[j],
                            self.carrier[l],
                            self.q.value_to_string(self.at(i, j)),
                            self.q.value_to_string(self.at(j, l)),
                            self.q.value_to_string(self.at(i, l)),
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v.join("; ")))
        }
    }

    /// The natural order: x ≤ y iff k ≤ a(x,y).
    pub fn natural_le(&self, i: usize, j: usize) -> bool {
        self.q.le(&self.q.unit(), self.at(i, j)).unwrap_or(false)
    }

    pub fn is_separated(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.natural_le(i, j) && self.natural_le(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.at(i, j) == self.at(j, i)))
    }

    /// a_s(x,y) = a(x,y) ∧ a(y,x): the largest symmetric structure below a.
    pub fn symmetrize(&self) -> VCat {
        let n = self.len();
        let mut mat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                mat.push(self.q.meet2(self.at(i, j), self.at(j, i)).unwrap());
            }
        }
        VCat { q: self.q.clone(), carrier: self.carrier.clone(), mat }
    }

    /// The opposite category a°(x,y) = a(y,x).
    pub fn dualize(&self) -> VCat {
        let n = self.len();
        let mut mat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                mat.push(self.at(j, i).clone());
            }
        }
        VCat { q: self.q.clone(), carrier: self.carrier.clone(), mat }
    }

    /// S-power: carrier = functions S → X, structure [f,g] = ⋀_s a(f s, g s).
    pub fn power(&self, exponent: &[String]) -> Result<VCat> {
        let n = self.len();
        let total = n.checked_pow(exponent.len() as u32).unwrap_or(usize::MAX);
        if total > 1 << 14 {
            return Err(Error::SizeGuard(format!("{n}^{} power carrier", exponent.len())));
        }
        let mut funcs: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new()];
        for s in exponent {
            let mut next = Vec::with_capacity(funcs.len() * n);
            for f in &funcs {
                for i in 0..n {
                    let mut f2 = f.clone();
                    f2.insert(s.clone(), i);
                    next.push(f2);
                }
            }
            funcs = next;
        }
        let mut mat = Vec::with_capacity(funcs.len() * funcs.len());
        for f in &funcs {
            for g in &funcs {
                let parts: Vec<QValue> =
                    exponent.iter().map(|s| self.at(f[s], g[s]).clone()).collect();
                mat.push(self.q.meet(parts.iter())?);
            }
        }
        let carrier = funcs
            .into_iter()
            .map(|f| {
                Elem::Func(f.into_iter().map(|(s, i)| (s, self.carrier[i].clone())).collect())
            })
            .collect();
        Ok(VCat { q: self.q.clone(), carrier, mat })
    }

    /// Initial structure induced by a cone of maps into V-categories:
    /// a(x,y) = ⋀ᵢ bᵢ(fᵢ x, fᵢ y). The empty cone gives the indiscrete structure.
    pub fn initial_structure(
        q: &Quantale,
        carrier: &[Elem],
        legs: &[(MapWitness, &VCat)],
    ) -> Result<VCat> {
        let n = carrier.len();
        for (f, b) in legs {
            f.check_shape(carrier, &b.carrier)?;
            if b.q.kind != q.kind {
                return Err(Error::DomainMismatch("cone leg over a different quantale".into()));
            }
        }
        let mut mat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let parts: Vec<QValue> = legs
                    .iter()
                    .map(|(f, b)| b.at(f.map[i], f.map[j]).clone())
                    .collect();
                mat.push(q.meet(parts.iter())?);
            }
        }
        Ok(VCat { q: q.clone(), carrier: carrier.to_vec(), mat })
    }

    /// The structure matrix viewed as an endo-relation.
    pub fn as_rel(&self) -> VRel {
        VRel {
            q: self.q.clone(),
            src: self.carrier.clone(),
            tgt: self.carrier.clone(),
            mat: self.mat.clone(),
        }
    }

    pub fn from_rel(r: &VRel) -> Result<VCat> {
        if r.src != r.tgt {
            return Err(Error::CarrierMismatch("endo-relation required".into()));
        }
        Ok(VCat { q: r.q.clone(), carrier: r.src.clone(), mat: r.mat.clone() })
    }
}

/// Is f a V-functor (X,a) → (Y,b), i.e. a(x,y) ≤ b(f x, f y) everywhere?
pub fn is_vfunctor(f: &MapWitness, dom: &VCat, cod: &VCat) -> Result<bool> {
    f.check_shape(&dom.carrier, &cod.carrier)?;
    let n = dom.len();
    for i in 0..n {
        for j in 0..n {
            if !dom.q.le(dom.at(i, j), cod.at(f.map[i], f.map[j]))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Is f initial, i.e. a(x,y) = b(f x, f y) everywhere? Initial morphisms are
/// exactly the structure-reflecting maps (isometries, not necessarily injective).
pub fn is_initial_morphism(f: &MapWitness, dom: &VCat, cod: &VCat) -> Result<bool> {
    f.check_shape(&dom.carrier, &cod.carrier)?;
    let n = dom.len();
    for i in 0..n {
        for j in 0..n {
            if dom.at(i, j) != cod.at(f.map[i], f.map[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All V-functors from `dom` into the quantale-as-category restricted to `values`,
/// each returned as its value row. Exhaustive: |values|^|X| candidates.
pub fn vfunctors_to_v(dom: &VCat, values: &[QValue]) -> Result<Vec<Vec<QValue>>> {
    let n = dom.len();
    let total = values.len().checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > 1 << 22 {
        return Err(Error::SizeGuard(format!("{}^{n} candidate maps", values.len())));
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; n];
    'outer: loop {
        let f: Vec<&QValue> = pick.iter().map(|&i| &values[i]).collect();
        let mut ok = true;
        'check: for i in 0..n {
            for j in 0..n {
                if !dom.q.le(dom.at(i, j), &dom.q.hom(f[i], f[j])?)? {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            out.push(f.into_iter().cloned().collect());
        }
        for d in 0..n {
            pick[d] += 1;
            if pick[d] < values.len() {
                continue 'outer;
            }
            pick[d] = 0;
        }
        break;
    }
    if n == 0 {
        out.push(Vec::new());
    }
    Ok(out)
}

impl VRel {
    pub fn new(q: Quantale, src: Vec<Elem>, tgt: Vec<Elem>, mat: Vec<QValue>) -> Result<VRel> {
        if mat.len() != src.len() * tgt.len() {
            return Err(Error::Dimension(format!(
                "{} entries for {}×{}",
                mat.len(),
                src.len(),
                tgt.len()
            )));
        }
        for v in &mat {
            q.validate_value(v)?;
        }
        Ok(VRel { q, src, tgt, mat })
    }

    pub fn at(&self, i: usize, j: usize) -> &QValue {
        &self.mat[i * self.tgt.len() + j]
    }

    pub fn at_elems(&self, x: &Elem, y: &Elem) -> Result<&QValue> {
        Ok(self.at(index_of(&self.src, x)?, index_of(&self.tgt, y)?))
    }

    /// Identity relation: k on the diagonal.
    pub fn identity(q: Quantale, carrier: Vec<Elem>) -> VRel {
        VCat::discrete(q, carrier).as_rel()
    }

    /// Graph of a function: k on the graph, ⊥ off it.
    pub fn graph(q: &Quantale, f: &MapWitness, src: &[Elem], tgt: &[Elem]) -> Result<VRel> {
        f.check_shape(src, tgt)?;
        let (k, bot) = (q.unit(), q.bottom());
        let mut mat = vec![bot; src.len() * tgt.len()];
        for (i, &j) in f.map.iter().enumerate() {
            mat[i * tgt.len() + j] = k.clone();
        }
        Ok(VRel { q: q.clone(), src: src.to_vec(), tgt: tgt.to_vec(), mat })
    }

    /// Relational composition: self : X ↛ Y, then s : Y ↛ Z, giving
    /// (s · self)(x,z) = ⋁_y self(x,y) ⊗ s(y,z).
    pub fn then(&self, s: &VRel) -> Result<VRel> {
        if self.tgt != s.src {
            return Err(Error::CarrierMismatch("composition carriers differ".into()));
        }
        let (n, m, p) = (self.src.len(), self.tgt.len(), s.tgt.len());
        let mut mat = Vec::with_capacity(n * p);
        for i in 0..n {
            for k in 0..p {
                let parts: Result<Vec<QValue>> =
                    (0..m).map(|j| self.q.tensor(self.at(i, j), s.at(j, k))).collect();
                mat.push(self.q.join(parts?.iter())?);
            }
        }
        Ok(VRel { q: self.q.clone(), src: self.src.clone(), tgt: s.tgt.clone(), mat })
    }

    /// Converse relation r°(y,x) = r(x,y).
    pub fn converse(&self) -> VRel {
        let (n, m) = (self.src.len(), self.tgt.len());
        let mut mat = Vec::with_capacity(n * m);
        for j in 0..m {
            for i in 0..n {
                mat.push(self.at(i, j).clone());
            }
        }
        VRel { q: self.q.clone(), src: self.tgt.clone(), tgt: self.src.clone(), mat }
    }

    /// Right Kan extension of r : X ↛ Y along s : X ↛ Z, the largest t : Z ↛ Y
    /// with t · s ≤ r; pointwise (r ⊸ s)(z,y) = ⋀_x hom(s(x,z), r(x,y)).
    pub fn kan(r: &VRel, s: &VRel) -> Result<VRel> {
        if r.src != s.src {
            return Err(Error::CarrierMismatch("Kan extension needs a common source".into()));
        }
        let q = &r.q;
        let (n, m, p) = (r.src.len(), r.tgt.len(), s.tgt.len());
        let mut mat = Vec::with_capacity(p * m);
        for z in 0..p {
            for y in 0..m {
                let parts: Result<Vec<QValue>> =
                    (0..n).map(|x| q.hom(s.at(x, z), r.at(x, y))).collect();
                mat.push(q.meet(parts?.iter())?);
            }
        }
        Ok(VRel { q: q.clone(), src: s.tgt.clone(), tgt: r.tgt.clone(), mat })
    }

    /// Pointwise quantale order on parallel relations.
    pub fn le(&self, other: &VRel) -> Result<bool> {
        if self.src != other.src || self.tgt != other.tgt {
            return Err(Error::CarrierMismatch("comparing relations of different shape".into()));
        }
        for (u, v) in self.mat.iter().zip(&other.mat) {
            if !self.q.le(u, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn meet2(&self, other: &VRel) -> Result<VRel> {
        if self.src != other.src || self.tgt != other.tgt {
            return Err(Error::CarrierMismatch("meeting relations of different shape".into()));
        }
        let mat: Result<Vec<QValue>> = self
            .mat
            .iter()
            .zip(&other.mat)
            .map(|(u, v)| self.q.meet2(u, v))
            .collect();
        Ok(VRel { q: self.q.clone(), src: self.src.clone(), tgt: self.tgt.clone(), mat: mat? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::rat;
    use proptest::prelude::*;

    fn atoms(names: &[&str]) -> Vec<Elem> {
        names.iter().map(|s| Elem::atom(s)).collect()
    }

    fn luk_cat(names: &[&str], entries: &[(i64, i64)]) -> VCat {
        let q = Quantale::luk01();
        let mat = entries.iter().map(|&(n, d)| q.num(rat(n, d)).unwrap()).collect();
        VCat::new(q, atoms(names), mat).unwrap()
    }

    #[test]
    fn asymmetric_metric_is_a_category() {
        let c = luk_cat(&["x", "y"], &[(0, 1), (1, 5), (1, 2), (0, 1)]);
        assert!(c.validate().is_ok());
        assert!(!c.is_symmetric());
        assert!(c.is_separated());
    }

    #[test]
    fn reflexivity_violation_names_the_point() {
        let c = luk_cat(&["x", "y"], &[(1, 10), (1, 5), (1, 2), (0, 1)]);
        let v = c.violations();
        assert!(v.iter().any(|w| w.contains("reflexivity") && w.contains('x')), "{v:?}");
    }

    #[test]
    fn transitivity_violation_is_reported_with_its_triple() {
        let c = luk_cat(
            &["x", "y", "z"],
            &[
                (0, 1), (1, 10), (9, 10),
                (1, 1), (0, 1), (1, 10),
                (1, 1), (1, 1), (0, 1),
            ],
        );
        let v = c.violations();
        assert!(v.iter().any(|w| w.contains("transitivity")), "{v:?}");
    }

    #[test]
    fn composition_adds_costs_through_the_middle() {
        // Constant relations compose to the truncated sum under Luk01.
        let q = Quantale::luk01();
        let xs = atoms(&["x0", "x1"]);
        let c4 = q.num(rat(2, 5)).unwrap();
        let c3 = q.num(rat(3, 10)).unwrap();
        let r = VRel::new(q.clone(), xs.clone(), xs.clone(), vec![c4.clone(); 4]).unwrap();
        let s = VRel::new(q.clone(), xs.clone(), xs.clone(), vec![c3.clone(); 4]).unwrap();
        let t = r.then(&s).unwrap();
        let expect = q.num(rat(7, 10)).unwrap();
        assert!(t.mat.iter().all(|v| v == &expect));
    }

    #[test]
    fn identity_is_the_unit_of_composition() {
        let q = Quantale::bool2();
        let xs = atoms(&["a", "b"]);
        let ys = atoms(&["c", "d", "e"]);
        for mask in 0..(1u32 << 6) {
            let mat: Vec<QValue> = (0..6)
                .map(|i| if mask >> i & 1 == 1 { q.top() } else { q.bottom() })
                .collect();
            let r = VRel::new(q.clone(), xs.clone(), ys.clone(), mat).unwrap();
            let l = VRel::identity(q.clone(), xs.clone()).then(&r).unwrap();
            let rr = r.then(&VRel::identity(q.clone(), ys.clone())).unwrap();
            assert_eq!(l, r);
            assert_eq!(rr, r);
        }
    }

    #[test]
    fn converse_transposes_graphs() {
        let q = Quantale::bool2();
        let xs = atoms(&["a", "b"]);
        let ys = atoms(&["c"]);
        let f = MapWitness::new(vec![0, 0]);
        let g = VRel::graph(&q, &f, &xs, &ys).unwrap();
        let gc = g.converse();
        assert_eq!(gc.at(0, 0), &q.top());
        assert_eq!(gc.at(0, 1), &q.top());
        assert_eq!(gc.src, ys);
    }

    /// Exhaustive Boolean check of the defining adjunction of `kan`:
    /// t · s ≤ r ⟺ t ≤ (r ⊸ s), over all r, s, t on 2-element carriers.
    #[test]
    fn kan_extension_is_the_relational_residual() {
        let q = Quantale::bool2();
        let xs = atoms(&["x0", "x1"]);
        let rels: Vec<VRel> = (0..16u32)
            .map(|mask| {
                let mat: Vec<QValue> = (0..4)
                    .map(|i| if mask >> i & 1 == 1 { q.top() } else { q.bottom() })
                    .collect();
                VRel::new(q.clone(), xs.clone(), xs.clone(), mat).unwrap()
            })
            .collect();
        for r in &rels {
            for s in &rels {
                let res = VRel::kan(r, s).unwrap();
                for t in &rels {
                    let lhs = s.then(t).unwrap().le(r).unwrap();
                    let rhs = t.le(&res).unwrap();
                    assert_eq!(lhs, rhs, "adjunction broken");
                }
            }
        }
    }

    #[test]
    fn kan_along_the_identity_graph_returns_the_relation() {
        let q = Quantale::luk01();
        let xs = atoms(&["x0", "x1"]);
        for seed in 0..16 {
            let mat: Vec<QValue> =
                (0..4).map(|i| q.num(rat((seed + i * 3) % 11, 10.min(10))).unwrap()).collect();
            let r = VRel::new(q.clone(), xs.clone(), xs.clone(), mat).unwrap();
            let one = VRel::identity(q.clone(), xs.clone());
            let res = VRel::kan(&r, &one).unwrap();
            assert_eq!(res, r);
        }
    }

    #[test]
    fn symmetrize_takes_the_pointwise_worse_direction() {
        let c = luk_cat(&["x", "y"], &[(0, 1), (1, 5), (1, 2), (0, 1)]);
        let s = c.symmetrize();
        assert_eq!(s.at(0, 1), &c.q.num(rat(1, 2)).unwrap());
        assert_eq!(s.at(1, 0), &c.q.num(rat(1, 2)).unwrap());
        assert!(s.is_symmetric());
        assert_eq!(s.symmetrize(), s);
        // a_s ≤ a pointwise in the quantale order.
        for (u, v) in s.mat.iter().zip(&c.mat) {
            assert!(c.q.le(u, v).unwrap());
        }
        assert_eq!(c.dualize().dualize(), c);
    }

    #[test]
    fn initial_structure_from_identity_and_empty_cones() {
        let c = luk_cat(&["x", "y"], &[(0, 1), (1, 5), (1, 2), (0, 1)]);
        let id = MapWitness::identity(2);
        let back =
            VCat::initial_structure(&c.q, &c.carrier, &[(id.clone(), &c)]).unwrap();
        assert_eq!(back, c);
        let ind = VCat::initial_structure(&c.q, &c.carrier, &[]).unwrap();
        assert_eq!(ind, VCat::indiscrete(c.q.clone(), c.carrier.clone()));
        assert!(is_initial_morphism(&id, &back, &c).unwrap());
    }

    /// The two routes to an initial structure along maps into powers of V agree:
    /// the pointwise meet of cone legs and the residual form via Kan extensions of
    /// the transposed legs.
    #[test]
    fn initial_structure_agrees_with_the_residual_form() {
        let q = Quantale::bool2();
        let vcat = VCat::of_values(q.clone(), q.carrier().unwrap()).unwrap();
        let sq = vcat.power(&["0".into(), "1".into()]).unwrap();
        let xs = atoms(&["p", "q", "r"]);
        // Two arbitrary legs into V².
        for (m1, m2) in [(vec![0, 1, 3], vec![2, 2, 0]), (vec![3, 0, 1], vec![1, 2, 3])] {
            let legs = [
                (MapWitness::new(m1.clone()), &sq),
                (MapWitness::new(m2.clone()), &sq),
            ];
            let direct = VCat::initial_structure(&q, &xs, &legs).unwrap();
            // Transpose each leg into a relation 2 ↛ X and residuate it by itself.
            let idx2 = ["0".to_string(), "1".to_string()];
            let mut acc = VCat::indiscrete(q.clone(), xs.clone()).as_rel();
            for (w, _) in &legs {
                let mut mat: Vec<QValue> = Vec::new();
                for k in &idx2 {
                    for &fi in &w.map {
                        match &sq.carrier[fi] {
                            Elem::Func(m) => match &m[k] {
                                Elem::Val(v) => mat.push(v.clone()),
                                _ => unreachable!(),
                            },
                            _ => unreachable!(),
                        }
                    }
                }
                let flat = VRel::new(
                    q.clone(),
                    atoms(&["0", "1"]),
                    xs.clone(),
                    mat,
                )
                .unwrap();
                acc = acc.meet2(&VRel::kan(&flat, &flat).unwrap()).unwrap();
            }
            assert_eq!(direct.as_rel(), acc);
        }
    }

    #[test]
    fn power_by_a_singleton_is_the_category_itself() {
        let c = luk_cat(&["x", "y"], &[(0, 1), (1, 5), (1, 2), (0, 1)]);
        let p = c.power(&["s".into()]).unwrap();
        assert_eq!(p.mat, c.mat);
        assert_eq!(p.power(&[]).unwrap().len(), 1);
    }

    #[test]
    fn power_of_v_orders_tuples_pointwise() {
        let q = Quantale::bool2();
        let vcat = VCat::of_values(q.clone(), q.carrier().unwrap()).unwrap();
        let sq = vcat.power(&["0".into(), "1".into()]).unwrap();
        assert_eq!(sq.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let (Elem::Func(f), Elem::Func(g)) = (&sq.carrier[i], &sq.carrier[j]) else {
                    unreachable!()
                };
                let pointwise = f.iter().all(|(k, u)| {
                    let (Elem::Val(u), Elem::Val(v)) = (u, &g[k]) else { unreachable!() };
                    q.le(u, v).unwrap()
                });
                assert_eq!(sq.natural_le(i, j), pointwise);
            }
        }
    }

    /// The cone of *all* V-functors into (V, hom) is initial: the structure is
    /// recovered as the pointwise meet of hom-images. Exhaustive over Bool2
    /// categories on ≤ 3 points; grid-valued over Luk01 (the grid contains every
    /// value of the category, which is enough by the Yoneda-style witness).
    #[test]
    fn the_functor_cone_into_v_is_initial() {
        for c in crate::propcheck::all_bool2_categories(3) {
            let values = c.q.carrier().unwrap();
            let fs = vfunctors_to_v(&c, &values).unwrap();
            for i in 0..c.len() {
                for j in 0..c.len() {
                    let parts: Vec<QValue> =
                        fs.iter().map(|f| c.q.hom(&f[i], &f[j]).unwrap()).collect();
                    assert_eq!(&c.q.meet(parts.iter()).unwrap(), c.at(i, j));
                }
            }
        }
        let c = luk_cat(
            &["x", "y", "z"],
            &[(0, 1), (1, 5), (3, 5), (1, 5), (0, 1), (2, 5), (3, 5), (2, 5), (0, 1)],
        );
        c.validate().unwrap();
        let values = c.q.grid(5).unwrap();
        let fs = vfunctors_to_v(&c, &values).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let parts: Vec<QValue> =
                    fs.iter().map(|f| c.q.hom(&f[i], &f[j]).unwrap()).collect();
                assert_eq!(&c.q.meet(parts.iter()).unwrap(), c.at(i, j), "at ({i},{j})");
            }
        }
    }

    /// (V, hom) is injective along initial morphisms: any functor on a sub-structure
    /// extends along an initial inclusion. Exhaustive for Bool2 on small carriers.
    #[test]
    fn v_is_injective_along_initial_inclusions() {
        let q = Quantale::bool2();
        let values = q.carrier().unwrap();
        for big in crate::propcheck::all_bool2_categories(3) {
            // Take the initial sub-structure on the first two points.
            let sub_carrier: Vec<Elem> = big.carrier[..2].to_vec();
            let incl = MapWitness::new(vec![0, 1]);
            let sub = VCat::initial_structure(
                &q,
                &sub_carrier,
                &[(incl.clone(), &big)],
            )
            .unwrap();
            assert!(is_initial_morphism(&incl, &sub, &big).unwrap());
            for f in vfunctors_to_v(&sub, &values).unwrap() {
                let found = vfunctors_to_v(&big, &values).unwrap().into_iter().any(|g| {
                    g[0] == f[0] && g[1] == f[1]
                });
                assert!(found, "no extension of {f:?} along an initial inclusion");
            }
        }
    }

    proptest! {
        /// Composition of V-relations is associative (grid-valued Luk01 instances).
        #[test]
        fn composition_is_associative(vals in proptest::collection::vec(0i64..=10, 12)) {
            let q = Quantale::luk01();
            let xs = atoms(&["a", "b"]);
            let mk = |chunk: &[i64]| {
                let mat: Vec<QValue> =
                    chunk.iter().map(|&n| q.num(rat(n, 10)).unwrap()).collect();
                VRel::new(q.clone(), xs.clone(), xs.clone(), mat).unwrap()
            };
            let (r, s, t) = (mk(&vals[0..4]), mk(&vals[4..8]), mk(&vals[8..12]));
            let left = r.then(&s).unwrap().then(&t).unwrap();
            let right = r.then(&s.then(&t).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn converse_is_involutive(vals in proptest::collection::vec(0i64..=10, 6)) {
            let q = Quantale::luk01();
            let xs = atoms(&["a", "b"]);
            let ys = atoms(&["u", "v", "w"]);
            let mat: Vec<QValue> = vals.iter().map(|&n| q.num(rat(n, 10)).unwrap()).collect();
            let r = VRel::new(q, xs, ys, mat).unwrap();
            prop_assert_eq!(r.converse().converse(), r);
        }
    }
}
