//! Coalgebras and behavioural distances.
//!
//! A coalgebra α : X → F X together with a lifting of F determines a distance
//! on states as the greatest fixpoint of a ↦ (F̄a)(α−, α−), reached from the
//! indiscrete structure by iterating and meeting with the previous stage. Over
//! Bool2 with the powerset functor this specialises to similarity/bisimilarity,
//! which partition refinement computes independently; those oracles live here
//! too, next to simulation checking for lax extensions.

use crate::enriched::{MapWitness, VCat, VRel};
use crate::error::{Error, Result};
use crate::functor::{Elem, SetFunctor};
use crate::lifting::{LaxExt, Lifting};
use crate::quantale::{QValue, Quantale, Rat};
use num::Zero;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Coalgebra {
    pub q: Quantale,
    pub functor: SetFunctor,
    pub states: Vec<Elem>,
    /// Declared structure on states, an upper bound for the distance fixpoint;
    /// indiscrete when the system is a plain set of states.
    pub base: VCat,
    /// α(x) per state, in carrier order.
    pub trans: Vec<Elem>,
}

impl Coalgebra {
    pub fn new(
        q: Quantale,
        functor: SetFunctor,
        states: Vec<Elem>,
        base: Option<VCat>,
        trans: Vec<Elem>,
    ) -> Result<Coalgebra> {
        let base = match base {
            Some(b) => b,
            None => VCat::indiscrete(q.clone(), states.clone()),
        };
        let c = Coalgebra { q, functor, states, base, trans };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.carrier != self.states {
            return Err(Error::CarrierMismatch("state structure carrier differs from states".into()));
        }
        if self.base.q != self.q {
            return Err(Error::DomainMismatch("state structure over a different quantale".into()));
        }
        if self.trans.len() != self.states.len() {
            return Err(Error::Dimension(format!(
                "{} transitions for {} states",
                self.trans.len(),
                self.states.len()
            )));
        }
        self.base.validate()?;
        for (x, t) in self.states.iter().zip(&self.trans) {
            self.functor.validate_elem(&self.states, t).map_err(|e| {
                Error::Validation(format!("transition of {x}: {e}"))
            })?;
        }
        Ok(())
    }

    pub fn successors(&self, i: usize) -> &Elem {
        &self.trans[i]
    }
}

/// f : X → Y is a coalgebra morphism when F f ∘ α = β ∘ f.
pub fn is_coalgebra_morphism(f: &MapWitness, c: &Coalgebra, d: &Coalgebra) -> Result<bool> {
    if c.functor != d.functor {
        return Err(Error::DomainMismatch("coalgebras over different functors".into()));
    }
    f.check_shape(&c.states, &d.states)?;
    let table = f.as_table(&c.states, &d.states);
    for i in 0..c.states.len() {
        let pushed = c.functor.fmap(&table, &d.states, &c.trans[i])?;
        if pushed != d.trans[f.map[i]] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub cat: VCat,
    pub iterations: usize,
    /// Reached a literal fixpoint (matrix equality), not only the tolerance.
    pub exact: bool,
    /// False only when the iteration budget ran out first.
    pub converged: bool,
    pub epsilon: Rat,
}

#[derive(Clone, Debug)]
pub struct BdOpts {
    /// Numeric stop tolerance; zero demands matrix equality.
    pub epsilon: Rat,
    pub max_iter: usize,
}

impl Default for BdOpts {
    fn default() -> BdOpts {
        BdOpts { epsilon: Rat::new(1.into(), 1_000_000.into()), max_iter: 1000 }
    }
}

/// Iterates a₀ = indiscrete, a_{n+1} = F̄aₙ(α−,α−) ∧ aₙ. The chain descends, so
/// for finite quantales it stabilises; with a tolerance the loop additionally
/// stops once the largest numeric movement drops below ε.
pub fn behavioural_distance(c: &Coalgebra, l: &Lifting, opts: &BdOpts) -> Result<DistanceResult> {
    let q = &c.q;
    let n = c.states.len();
    let mut cur = VCat::indiscrete(q.clone(), c.states.clone());
    // Keep the declared state structure as an upper bound when one was given.
    for (i, v) in cur.mat.iter_mut().enumerate() {
        *v = q.meet2(v, &c.base.mat[i])?;
    }
    for it in 1..=opts.max_iter {
        let mut next = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let step = l.eval(&cur, &c.trans[i], &c.trans[j])?;
                next.push(q.meet2(&step, cur.at(i, j))?);
            }
        }
        let exact = next == cur.mat;
        let mut maxdiff: Option<Rat> = Some(Rat::zero());
        if !exact {
            for (a, b) in next.iter().zip(&cur.mat) {
                match (q.diff(a, b), &mut maxdiff) {
                    (Some(d), Some(m)) => {
                        if d > *m {
                            *m = d;
                        }
                    }
                    _ => maxdiff = None,
                }
            }
        }
        let cat = VCat::new(q.clone(), c.states.clone(), next)?;
        if exact {
            return Ok(DistanceResult {
                cat,
                iterations: it,
                exact: true,
                converged: true,
                epsilon: opts.epsilon.clone(),
            });
        }
        if !opts.epsilon.is_zero() {
            if let Some(m) = maxdiff {
                if m < opts.epsilon {
                    return Ok(DistanceResult {
                        cat,
                        iterations: it,
                        exact: false,
                        converged: true,
                        epsilon: opts.epsilon.clone(),
                    });
                }
            }
        }
        cur = cat;
    }
    Ok(DistanceResult {
        cat: cur,
        iterations: opts.max_iter,
        exact: false,
        converged: false,
        epsilon: opts.epsilon.clone(),
    })
}

/// Is s : X ↛ X a simulation, i.e. α · s ≤ F̂s · α as relations X ↛ F X?
/// Both sides are supported on the image of α, so only transition values are
/// enumerated; F X itself never is.
pub fn is_simulation(s: &VRel, c: &Coalgebra, ext: &LaxExt) -> Result<bool> {
    if s.src != c.states || s.tgt != c.states {
        return Err(Error::CarrierMismatch("simulation candidate is not an endorelation on states".into()));
    }
    let q = &c.q;
    let n = c.states.len();
    let mut targets: BTreeMap<&Elem, Vec<usize>> = BTreeMap::new();
    for (j, t) in c.trans.iter().enumerate() {
        targets.entry(t).or_default().push(j);
    }
    for x in 0..n {
        for (t, preimage) in &targets {
            let lhs = q.join(preimage.iter().map(|&y| s.at(x, y)))?;
            let rhs = ext.eval(q, s, &c.trans[x], t)?;
            if !q.le(&lhs, &rhs)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest simulation on a small Bool2 system, by joining every relation that
/// passes `is_simulation`. Exponential in |X|²; strictly an oracle.
pub fn gfp_simulation_by_enumeration(c: &Coalgebra, ext: &LaxExt) -> Result<VRel> {
    let q = &c.q;
    let n = c.states.len();
    if q.carrier()?.len() != 2 || n * n > 16 {
        return Err(Error::SizeGuard("simulation join is enumerated only over Bool2 with ≤4 states".into()));
    }
    let mut best = vec![q.bottom(); n * n];
    for mask in 0..(1u32 << (n * n)) {
        let mat: Vec<QValue> = (0..n * n)
            .map(|i| if mask >> i & 1 == 1 { q.top() } else { q.bottom() })
            .collect();
        let r = VRel::new(q.clone(), c.states.clone(), c.states.clone(), mat)?;
        if is_simulation(&r, c, ext)? {
            for (b, v) in best.iter_mut().zip(&r.mat) {
                *b = q.join2(b, v)?;
            }
        }
    }
    VRel::new(q.clone(), c.states.clone(), c.states.clone(), best)
}

/// Per-label successor sets of a Bool2 transition value, used by the partition
/// oracles. Unlabelled powerset systems report the single label "".
fn successor_sets(t: &Elem) -> Result<Vec<(String, Vec<Elem>)>> {
    match t {
        Elem::Set(s) => Ok(vec![(String::new(), s.iter().cloned().collect())]),
        Elem::Func(m) => {
            let mut out = Vec::new();
            for (k, v) in m {
                let Elem::Set(s) = v else {
                    return Err(Error::CarrierMismatch("labelled component is not a set".into()));
                };
                out.push((k.clone(), s.iter().cloned().collect()));
            }
            Ok(out)
        }
        _ => Err(Error::CarrierMismatch(format!("no successor sets in {t}"))),
    }
}

/// Bisimilarity of a (possibly labelled) relational system by partition
/// refinement: states are separated until each block has one successor-block
/// signature per label.
pub fn bisimilarity_partition(c: &Coalgebra) -> Result<Vec<usize>> {
    let n = c.states.len();
    let succ: Result<Vec<_>> = c.trans.iter().map(successor_sets).collect();
    let succ = succ?;
    let mut block = vec![0usize; n];
    loop {
        let mut sig_ids: BTreeMap<(usize, Vec<(String, Vec<usize>)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for i in 0..n {
            let mut sig = Vec::new();
            for (label, ys) in &succ[i] {
                let mut blocks: Vec<usize> = ys
                    .iter()
                    .map(|y| Ok(block[crate::enriched::index_of(&c.states, y)?]))
                    .collect::<Result<_>>()?;
                blocks.sort_unstable();
                blocks.dedup();
                sig.push((label.clone(), blocks));
            }
            let id = sig_ids.len();
            next[i] = *sig_ids.entry((block[i], sig)).or_insert(id);
        }
        if next == block {
            return Ok(block);
        }
        block = next;
    }
}

/// Similarity preorder of a Bool2 relational system: greatest R with
/// x R y ⟹ every labelled successor of x is R-matched by one of y.
pub fn similarity_preorder(c: &Coalgebra) -> Result<Vec<bool>> {
    let n = c.states.len();
    let succ: Result<Vec<_>> = c.trans.iter().map(successor_sets).collect();
    let succ = succ?;
    let idx: Result<Vec<Vec<(usize, Vec<usize>)>>> = succ
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(li, (_, ys))| {
                    let v: Result<Vec<usize>> =
                        ys.iter().map(|y| crate::enriched::index_of(&c.states, y)).collect();
                    Ok((li, v?))
                })
                .collect()
        })
        .collect();
    let idx = idx?;
    // Labels must agree shape-wise for the matching to make sense.
    for row in &succ {
        if row.len() != succ[0].len() || row.iter().zip(&succ[0]).any(|(a, b)| a.0 != b.0) {
            return Err(Error::CarrierMismatch("states expose different label sets".into()));
        }
    }
    let mut r = vec![true; n * n];
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if !r[x * n + y] {
                    continue;
                }
                let ok = idx[x].iter().all(|(li, xs)| {
                    let ys = &idx[y][*li].1;
                    xs.iter().all(|&xp| ys.iter().any(|&yp| r[xp * n + yp]))
                });
                if !ok {
                    r[x * n + y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(r);
        }
    }
}
