//! Commutative unital quantales with exact rational arithmetic.
//!
//! A quantale here is a complete lattice with a commutative monoid structure ⊗ that
//! distributes over all joins; `hom` is the right adjoint of ⊗ in each argument:
//! u ⊗ v ≤ w  ⟺  v ≤ hom(u, w).
//!
//! Two of the stock instances carry the *reversed* numeric order (smaller number =
//! larger element), so that the unit k is the top element and joins are numeric
//! infima. All order talk in this crate means the quantale order unless a comment
//! says "numeric".

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

pub type Rat = num::BigRational;

/// Exact rational from an integer pair.
pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Ratio::from_integer(BigInt::from(n))
}

/// Renders a rational as `p/q`, or plain `p` for integers.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, an integer, or a decimal literal, all exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = |msg: &str| Error::Parse { pos: 0, msg: format!("{msg}: {s:?}") };
    if let Some((p, q)) = s.split_once('/') {
        let n: BigInt = p.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: BigInt = q.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let i: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().map_err(|_| bad("bad number"))? };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("bad decimal"));
        }
        let f: BigInt = frac.parse().map_err(|_| bad("bad decimal"))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = Ratio::new(f, den);
        let int_part = Ratio::from_integer(i);
        return Ok(if neg { int_part - frac_part } else { int_part + frac_part });
    }
    let n: BigInt = s.parse().map_err(|_| bad("bad number"))?;
    Ok(Ratio::from_integer(n))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum QuantaleKind {
    /// Two-element Boolean quantale: ⊗ = ∧, k = ⊤ = true.
    Bool2,
    /// [0,1] with truncated addition, numeric order reversed; k = ⊤ = 0.
    Luk01,
    /// [0,∞] with addition, numeric order reversed; k = ⊤ = 0, ⊥ = ∞.
    Cost,
    /// [0,∞] with binary maximum, numeric order reversed.
    MaxCost,
    /// Powerset of a finite commutative monoid, ordered by inclusion; k = {e}.
    Free,
}

impl QuantaleKind {
    pub fn name(self) -> &'static str {
        match self {
            QuantaleKind::Bool2 => "bool2",
            QuantaleKind::Luk01 => "luk01",
            QuantaleKind::Cost => "cost",
            QuantaleKind::MaxCost => "maxcost",
            QuantaleKind::Free => "free",
        }
    }
}

/// A finite commutative monoid presented by a multiplication table.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Monoid {
    pub elems: Vec<String>,
    pub unit: usize,
    /// Row-major: `table[i * n + j]` is the index of `elems[i] · elems[j]`.
    pub table: Vec<usize>,
}

impl Monoid {
    pub fn new(elems: Vec<String>, unit: usize, table: Vec<usize>) -> Result<Monoid> {
        let n = elems.len();
        let m = Monoid { elems, unit, table };
        m.validate(n)?;
        Ok(m)
    }

    fn validate(&self, n: usize) -> Result<()> {
        let err = |msg: String| Err(Error::Validation(msg));
        if n == 0 {
            return err("monoid needs at least the unit".into());
        }
        if self.unit >= n || self.table.len() != n * n {
            return err("monoid table has wrong shape".into());
        }
        if self.table.iter().any(|&k| k >= n) {
            return err("monoid table entry out of range".into());
        }
        {
            let mut seen = BTreeSet::new();
            for e in &self.elems {
                if !seen.insert(e) {
                    return err(format!("duplicate monoid element {e:?}"));
                }
            }
        }
        let mul = |i: usize, j: usize| self.table[i * n + j];
        for i in 0..n {
            if mul(self.unit, i) != i || mul(i, self.unit) != i {
                return err(format!("unit law fails at {:?}", self.elems[i]));
            }
            for j in 0..n {
                if mul(i, j) != mul(j, i) {
                    return err(format!(
                        "monoid is not commutative at ({:?}, {:?})",
                        self.elems[i], self.elems[j]
                    ));
                }
                for k in 0..n {
                    if mul(mul(i, j), k) != mul(i, mul(j, k)) {
                        return err(format!(
                            "associativity fails at ({:?}, {:?}, {:?})",
                            self.elems[i], self.elems[j], self.elems[k]
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.elems.len() + j]
    }

    /// Commutative free monoid over `alphabet`, truncated: words are multisets of
    /// letters of size ≤ `max_len`, and any product that would exceed the bound is
    /// sent to a single absorbing sink. Length is additive, so associativity and
    /// unit laws hold on the nose.
    pub fn free_words(alphabet: &[String], max_len: usize) -> Result<Monoid> {
        if alphabet.is_empty() {
            return Err(Error::Validation("empty alphabet".into()));
        }
        for a in alphabet {
            if a == "e" || a == "#" || a.is_empty() {
                return Err(Error::Validation(format!("reserved or empty letter {a:?}")));
            }
        }
        let letters: Vec<String> = alphabet.to_vec();
        // Multisets as sorted letter-index vectors; index 0 is the empty word.
        let mut words: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                let lo = w.last().copied().unwrap_or(0);
                for l in lo..letters.len() {
                    let mut w2 = w.clone();
                    w2.push(l);
                    next.push(w2.clone());
                    words.push(w2);
                }
            }
            frontier = next;
        }
        words.sort();
        words.dedup();
        let sink = words.len();
        let single = letters.iter().all(|l| l.chars().count() == 1);
        let name = |w: &Vec<usize>| -> String {
            if w.is_empty() {
                "e".into()
            } else if single {
                w.iter().map(|&l| letters[l].clone()).collect()
            } else {
                w.iter().map(|&l| letters[l].clone()).collect::<Vec<_>>().join(".")
            }
        };
        let mut elems: Vec<String> = words.iter().map(name).collect();
        // With max_len 0 only the empty word exists and no product can
        // overflow, so the monoid is trivial and needs no sink.
        if max_len > 0 {
            elems.push("#".into());
        }
        let idx: std::collections::BTreeMap<&Vec<usize>, usize> =
            words.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let n = elems.len();
        let mut table = vec![0usize; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = if i == sink || j == sink {
                    sink
                } else {
                    let mut w: Vec<usize> = words[i].iter().chain(words[j].iter()).copied().collect();
                    w.sort_unstable();
                    if w.len() > max_len {
                        sink
                    } else {
                        idx[&w]
                    }
                };
            }
        }
        Monoid::new(elems, 0, table)
    }
}

/// A value together with the kind of quantale it belongs to.
///
/// The derived `Ord`/`Hash` give a *structural* order used only for canonical
/// sorting inside containers; the quantale order is [`Quantale::le`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct QValue {
    pub kind: QuantaleKind,
    pub val: Val,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Val {
    B(bool),
    N(Rat),
    Inf,
    /// Indices into the owning quantale's monoid element list.
    S(BTreeSet<u32>),
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.val {
            Val::B(true) => write!(f, "T"),
            Val::B(false) => write!(f, "F"),
            Val::N(r) => write!(f, "{}", fmt_rat(r)),
            Val::Inf => write!(f, "inf"),
            Val::S(s) => {
                // Element names need the monoid; indices are still unambiguous.
                write!(f, "{{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "#{x}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quantale {
    pub kind: QuantaleKind,
    pub monoid: Option<Monoid>,
}

impl Quantale {
    pub fn bool2() -> Quantale {
        Quantale { kind: QuantaleKind::Bool2, monoid: None }
    }

    pub fn luk01() -> Quantale {
        Quantale { kind: QuantaleKind::Luk01, monoid: None }
    }

    pub fn cost() -> Quantale {
        Quantale { kind: QuantaleKind::Cost, monoid: None }
    }

    pub fn maxcost() -> Quantale {
        Quantale { kind: QuantaleKind::MaxCost, monoid: None }
    }

    pub fn free(monoid: Monoid) -> Quantale {
        Quantale { kind: QuantaleKind::Free, monoid: Some(monoid) }
    }

    pub fn free_words(alphabet: &[&str], max_len: usize) -> Result<Quantale> {
        let alpha: Vec<String> = alphabet.iter().map(|s| s.to_string()).collect();
        Ok(Quantale::free(Monoid::free_words(&alpha, max_len)?))
    }

    /// Stock quantales by their external names; `free` needs a monoid and is
    /// constructed elsewhere.
    pub fn by_name(name: &str) -> Result<Quantale> {
        match name {
            "bool2" => Ok(Quantale::bool2()),
            "luk01" => Ok(Quantale::luk01()),
            "cost" => Ok(Quantale::cost()),
            "maxcost" => Ok(Quantale::maxcost()),
            _ => Err(Error::Unknown(format!("quantale {name:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn monoid(&self) -> &Monoid {
        self.monoid.as_ref().expect("free quantale carries a monoid")
    }

    pub fn validate_value(&self, v: &QValue) -> Result<()> {
        self.check(v)
    }

    fn check(&self, v: &QValue) -> Result<()> {
        if v.kind != self.kind {
            return Err(Error::DomainMismatch(format!(
                "value of {} used in {}",
                v.kind.name(),
                self.kind.name()
            )));
        }
        match (&v.val, self.kind) {
            (Val::B(_), QuantaleKind::Bool2) => Ok(()),
            (Val::N(r), QuantaleKind::Luk01) => {
                if r.is_negative() || r > &rat_int(1) {
                    Err(Error::Validation(format!("{} outside [0,1]", fmt_rat(r))))
                } else {
                    Ok(())
                }
            }
            (Val::N(r), QuantaleKind::Cost | QuantaleKind::MaxCost) => {
                if r.is_negative() {
                    Err(Error::Validation(format!("negative cost {}", fmt_rat(r))))
                } else {
                    Ok(())
                }
            }
            (Val::Inf, QuantaleKind::Cost | QuantaleKind::MaxCost) => Ok(()),
            (Val::S(s), QuantaleKind::Free) => {
                let n = self.monoid().len() as u32;
                if s.iter().any(|&i| i >= n) {
                    Err(Error::Validation("monoid element index out of range".into()))
                } else {
                    Ok(())
                }
            }
            _ => Err(Error::DomainMismatch(format!(
                "malformed value for {}",
                self.kind.name()
            ))),
        }
    }

    fn b(&self, b: bool) -> QValue {
        QValue { kind: self.kind, val: Val::B(b) }
    }

    fn n(&self, r: Rat) -> QValue {
        QValue { kind: self.kind, val: Val::N(r) }
    }

    fn s(&self, s: BTreeSet<u32>) -> QValue {
        QValue { kind: self.kind, val: Val::S(s) }
    }

    pub fn num(&self, r: Rat) -> Result<QValue> {
        let v = self.n(r);
        self.check(&v)?;
        Ok(v)
    }

    pub fn top(&self) -> QValue {
        match self.kind {
            QuantaleKind::Bool2 => self.b(true),
            QuantaleKind::Luk01 | QuantaleKind::Cost | QuantaleKind::MaxCost => self.n(Rat::zero()),
            QuantaleKind::Free => self.s((0..self.monoid().len() as u32).collect()),
        }
    }

    pub fn bottom(&self) -> QValue {
        match self.kind {
            QuantaleKind::Bool2 => self.b(false),
            QuantaleKind::Luk01 => self.n(rat_int(1)),
            QuantaleKind::Cost | QuantaleKind::MaxCost => QValue { kind: self.kind, val: Val::Inf },
            QuantaleKind::Free => self.s(BTreeSet::new()),
        }
    }

    /// The tensor unit k.
    pub fn unit(&self) -> QValue {
        match self.kind {
            QuantaleKind::Free => self.s([self.monoid().unit as u32].into_iter().collect()),
            _ => self.top(),
        }
    }

    /// Integral means k = ⊤.
    pub fn is_integral(&self) -> bool {
        self.unit() == self.top()
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, QuantaleKind::Bool2 | QuantaleKind::Free)
    }

    /// Quantale order. Reversed numeric order for Luk01/Cost/MaxCost.
    pub fn le(&self, u: &QValue, v: &QValue) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (&u.val, &v.val) {
            (Val::B(a), Val::B(b)) => !a | b,
            (Val::N(a), Val::N(b)) => a >= b,
            (Val::Inf, _) => true,
            (Val::N(_), Val::Inf) => false,
            (Val::S(a), Val::S(b)) => a.is_subset(b),
            _ => unreachable!("check() rules out mixed shapes"),
        })
    }

    pub fn tensor(&self, u: &QValue, v: &QValue) -> Result<QValue> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (&u.val, &v.val) {
            (Val::B(a), Val::B(b)) => self.b(*a && *b),
            (Val::N(a), Val::N(b)) => match self.kind {
                QuantaleKind::Luk01 => {
                    let s = a + b;
                    self.n(if s > rat_int(1) { rat_int(1) } else { s })
                }
                QuantaleKind::Cost => self.n(a + b),
                QuantaleKind::MaxCost => self.n(a.max(b).clone()),
                _ => unreachable!(),
            },
            (Val::Inf, _) | (_, Val::Inf) => self.bottom(),
            (Val::S(a), Val::S(b)) => {
                let m = self.monoid();
                let mut out = BTreeSet::new();
                for &i in a {
                    for &j in b {
                        out.insert(m.mul(i as usize, j as usize) as u32);
                    }
                }
                self.s(out)
            }
            _ => unreachable!(),
        })
    }

    /// Right adjoint of the tensor: the largest v with u ⊗ v ≤ w.
    pub fn hom(&self, u: &QValue, w: &QValue) -> Result<QValue> {
        self.check(u)?;
        self.check(w)?;
        Ok(match (&u.val, &w.val) {
            (Val::B(a), Val::B(b)) => self.b(!a | b),
            (Val::N(a), Val::N(b)) => match self.kind {
                // max(w - u, 0) numerically, truncated like the tensor.
                QuantaleKind::Luk01 | QuantaleKind::Cost => {
                    let d = b - a;
                    self.n(if d.is_negative() { Rat::zero() } else { d })
                }
                QuantaleKind::MaxCost => {
                    if a >= b {
                        self.top()
                    } else {
                        self.n(b.clone())
                    }
                }
                _ => unreachable!(),
            },
            (Val::Inf, _) => self.top(),
            (Val::N(_), Val::Inf) => self.bottom(),
            (Val::S(a), Val::S(b)) => {
                let m = self.monoid();
                let all: Vec<u32> = (0..m.len() as u32).collect();
                let out = all
                    .into_iter()
                    .filter(|&x| a.iter().all(|&i| b.contains(&(m.mul(i as usize, x as usize) as u32))))
                    .collect();
                self.s(out)
            }
            _ => unreachable!(),
        })
    }

    pub fn join2(&self, u: &QValue, v: &QValue) -> Result<QValue> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (&u.val, &v.val) {
            (Val::B(a), Val::B(b)) => self.b(*a || *b),
            (Val::N(a), Val::N(b)) => self.n(a.min(b).clone()),
            (Val::Inf, _) => v.clone(),
            (_, Val::Inf) => u.clone(),
            (Val::S(a), Val::S(b)) => self.s(a.union(b).copied().collect()),
            _ => unreachable!(),
        })
    }

    pub fn meet2(&self, u: &QValue, v: &QValue) -> Result<QValue> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (&u.val, &v.val) {
            (Val::B(a), Val::B(b)) => self.b(*a && *b),
            (Val::N(a), Val::N(b)) => self.n(a.max(b).clone()),
            (Val::Inf, _) | (_, Val::Inf) => self.bottom(),
            (Val::S(a), Val::S(b)) => self.s(a.intersection(b).copied().collect()),
            _ => unreachable!(),
        })
    }

    /// Join of a finite family; the empty join is ⊥.
    pub fn join<'a, I: IntoIterator<Item = &'a QValue>>(&self, vs: I) -> Result<QValue> {
        let mut acc = self.bottom();
        for v in vs {
            acc = self.join2(&acc, v)?;
        }
        Ok(acc)
    }

    /// Meet of a finite family; the empty meet is ⊤.
    pub fn meet<'a, I: IntoIterator<Item = &'a QValue>>(&self, vs: I) -> Result<QValue> {
        let mut acc = self.top();
        for v in vs {
            acc = self.meet2(&acc, v)?;
        }
        Ok(acc)
    }

    /// Full carrier of a finite quantale.
    pub fn carrier(&self) -> Result<Vec<QValue>> {
        match self.kind {
            QuantaleKind::Bool2 => Ok(vec![self.b(false), self.b(true)]),
            QuantaleKind::Free => {
                let n = self.monoid().len();
                if n > 12 {
                    return Err(Error::SizeGuard(format!("2^{n} subsets in free-quantale carrier")));
                }
                let mut out = Vec::with_capacity(1 << n);
                for mask in 0..(1u32 << n) {
                    let s: BTreeSet<u32> = (0..n as u32).filter(|i| mask >> i & 1 == 1).collect();
                    out.push(self.s(s));
                }
                Ok(out)
            }
            _ => Err(Error::UnsupportedEnumeration(format!(
                "{} has infinitely many values",
                self.name()
            ))),
        }
    }

    /// Finite sample closed enough for exact law checking: the full carrier for
    /// finite quantales, a rational grid otherwise. `den` is the grid denominator;
    /// cost grids stop at 3 and include ∞.
    pub fn grid(&self, den: u32) -> Result<Vec<QValue>> {
        match self.kind {
            QuantaleKind::Bool2 | QuantaleKind::Free => self.carrier(),
            QuantaleKind::Luk01 => Ok((0..=den)
                .map(|p| self.n(Ratio::new(BigInt::from(p), BigInt::from(den))))
                .collect()),
            QuantaleKind::Cost | QuantaleKind::MaxCost => {
                let mut out: Vec<QValue> = (0..=3 * den)
                    .map(|p| self.n(Ratio::new(BigInt::from(p), BigInt::from(den))))
                    .collect();
                out.push(self.bottom());
                Ok(out)
            }
        }
    }

    /// Distance-style numeric reading used by gap metrics: ⊤ ↦ 0 and ⊥ ↦ 1 on Bool2,
    /// identity on the numeric quantales (∞ and free-quantale values have none).
    pub fn numeric(&self, v: &QValue) -> Option<Rat> {
        match &v.val {
            Val::B(b) => Some(if *b { Rat::zero() } else { rat_int(1) }),
            Val::N(r) => Some(r.clone()),
            Val::Inf | Val::S(_) => None,
        }
    }

    /// Absolute numeric difference for ε-stopping; `None` means infinite/incomparable.
    pub fn diff(&self, u: &QValue, v: &QValue) -> Option<Rat> {
        if u == v {
            return Some(Rat::zero());
        }
        match (&u.val, &v.val) {
            (Val::N(a), Val::N(b)) => Some((a - b).abs()),
            (Val::B(_), Val::B(_)) => Some(rat_int(1)),
            _ => None,
        }
    }

    pub fn value_to_string(&self, v: &QValue) -> String {
        match &v.val {
            Val::S(s) => {
                let m = self.monoid();
                let names: Vec<&str> = s.iter().map(|&i| m.elems[i as usize].as_str()).collect();
                format!("{{{}}}", names.join(","))
            }
            _ => v.to_string(),
        }
    }

    pub fn value_from_str(&self, s: &str) -> Result<QValue> {
        let t = s.trim();
        match self.kind {
            QuantaleKind::Bool2 => match t {
                "T" | "true" | "⊤" | "1" => Ok(self.b(true)),
                "F" | "false" | "⊥" | "0" => Ok(self.b(false)),
                _ => Err(Error::Parse { pos: 0, msg: format!("bad bool2 value {t:?}") }),
            },
            QuantaleKind::Luk01 | QuantaleKind::Cost | QuantaleKind::MaxCost => {
                if t == "inf" || t == "∞" {
                    if self.kind == QuantaleKind::Luk01 {
                        return Err(Error::Parse { pos: 0, msg: "no ∞ in [0,1]".into() });
                    }
                    return Ok(self.bottom());
                }
                let v = self.n(parse_rat(t)?);
                self.check(&v)?;
                Ok(v)
            }
            QuantaleKind::Free => {
                let inner = t
                    .strip_prefix('{')
                    .and_then(|x| x.strip_suffix('}'))
                    .ok_or_else(|| Error::Parse { pos: 0, msg: format!("expected {{…}}, got {t:?}") })?;
                let m = self.monoid();
                let mut set = BTreeSet::new();
                for name in inner.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                    // #i is the positional form the bare Display falls back to.
                    let i = match name.strip_prefix('#').and_then(|d| d.parse::<usize>().ok()) {
                        Some(i) if i < m.len() => i,
                        _ => m
                            .elems
                            .iter()
                            .position(|e| e == name)
                            .ok_or_else(|| Error::Unknown(format!("monoid element {name:?}")))?,
                    };
                    set.insert(i as u32);
                }
                Ok(self.s(set))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all() -> Vec<Quantale> {
        vec![
            Quantale::bool2(),
            Quantale::luk01(),
            Quantale::cost(),
            Quantale::maxcost(),
            Quantale::free_words(&["a", "b"], 2).unwrap(),
        ]
    }

    fn luk(n: i64, d: i64) -> QValue {
        Quantale::luk01().num(rat(n, d)).unwrap()
    }

    #[test]
    fn truncated_sum_saturates() {
        let q = Quantale::luk01();
        assert_eq!(q.tensor(&luk(7, 10), &luk(6, 10)).unwrap(), luk(1, 1));
        assert_eq!(q.tensor(&luk(3, 10), &luk(4, 10)).unwrap(), luk(7, 10));
    }

    #[test]
    fn bool2_tensor_is_conjunction() {
        let q = Quantale::bool2();
        let (t, f) = (q.top(), q.bottom());
        assert_eq!(q.tensor(&t, &f).unwrap(), f);
        assert_eq!(q.tensor(&t, &t).unwrap(), t);
    }

    #[test]
    fn free_tensor_multiplies_words() {
        let q = Quantale::free_words(&["a", "b"], 2).unwrap();
        let a = q.value_from_str("{a}").unwrap();
        let b = q.value_from_str("{b}").unwrap();
        let ab = q.tensor(&a, &b).unwrap();
        assert_eq!(q.value_to_string(&ab), "{ab}");
        // Commutative by construction.
        assert_eq!(q.tensor(&b, &a).unwrap(), ab);
        // Overflowing the length bound lands in the sink.
        let over = q.tensor(&ab, &a).unwrap();
        assert_eq!(q.value_to_string(&over), "{#}");
    }

    #[test]
    fn hom_closed_forms() {
        let q = Quantale::bool2();
        assert_eq!(q.hom(&q.top(), &q.bottom()).unwrap(), q.bottom());
        let l = Quantale::luk01();
        assert_eq!(l.hom(&luk(3, 10), &luk(1, 2)).unwrap(), luk(1, 5));
        // Residuating a value by itself gives the unit.
        for p in 0..=20 {
            let u = luk(p, 20);
            assert_eq!(l.hom(&u, &u).unwrap(), l.unit());
        }
    }

    #[test]
    fn joins_and_meets_follow_the_reversed_order() {
        let l = Quantale::luk01();
        assert_eq!(l.join([&luk(3, 10), &luk(7, 10)]).unwrap(), luk(3, 10));
        assert_eq!(l.meet([&luk(3, 10), &luk(7, 10)]).unwrap(), luk(7, 10));
        let b = Quantale::bool2();
        assert_eq!(b.meet([]).unwrap(), b.top());
        assert_eq!(b.join([]).unwrap(), b.bottom());
        let c = Quantale::cost();
        let two = c.num(rat_int(2)).unwrap();
        let five = c.num(rat_int(5)).unwrap();
        assert_eq!(c.join([&two, &five, &c.bottom()]).unwrap(), two);
        assert_eq!(c.meet([&two, &c.bottom()]).unwrap(), c.bottom());
    }

    /// The adjunction u ⊗ v ≤ w ⟺ v ≤ hom(u, w), checked exhaustively on the
    /// sample grid of every stock quantale. This doubles as the oracle for the
    /// closed forms of hom: the grid join of {v : u ⊗ v ≤ w} must equal hom(u, w)
    /// whenever the latter lies on the grid (it does for all grid inputs here).
    #[test]
    fn hom_is_the_right_adjoint_on_the_grid() {
        for q in all() {
            let grid = q.grid(20).unwrap();
            for u in &grid {
                for w in &grid {
                    let h = q.hom(u, w).unwrap();
                    let mut best = q.bottom();
                    for v in &grid {
                        let lhs = q.le(&q.tensor(u, v).unwrap(), w).unwrap();
                        let rhs = q.le(v, &h).unwrap();
                        assert_eq!(lhs, rhs, "{}: adjunction at u={u}, v={v}, w={w}", q.name());
                        if lhs {
                            best = q.join2(&best, v).unwrap();
                        }
                    }
                    assert_eq!(best, h, "{}: grid join disagrees with hom at u={u}, w={w}", q.name());
                }
            }
        }
    }

    #[test]
    fn tensor_laws_on_the_grid() {
        for q in all() {
            let grid = q.grid(4).unwrap();
            let k = q.unit();
            for u in &grid {
                assert_eq!(q.tensor(u, &k).unwrap(), *u, "{}: unit law", q.name());
                for v in &grid {
                    assert_eq!(
                        q.tensor(u, v).unwrap(),
                        q.tensor(v, u).unwrap(),
                        "{}: commutativity",
                        q.name()
                    );
                    for w in &grid {
                        let l = q.tensor(&q.tensor(u, v).unwrap(), w).unwrap();
                        let r = q.tensor(u, &q.tensor(v, w).unwrap()).unwrap();
                        assert_eq!(l, r, "{}: associativity", q.name());
                    }
                }
            }
        }
    }

    #[test]
    fn integrality_matches_the_instances() {
        assert!(Quantale::bool2().is_integral());
        assert!(Quantale::luk01().is_integral());
        assert!(Quantale::cost().is_integral());
        assert!(Quantale::maxcost().is_integral());
        // k = {e} ⊊ ⊤ = P(M) once the monoid has more than one element.
        assert!(!Quantale::free_words(&["a", "b"], 2).unwrap().is_integral());
        assert!(Quantale::free_words(&["a"], 0).unwrap().is_integral());
    }

    #[test]
    fn mixing_quantales_is_rejected() {
        let l = Quantale::luk01();
        let c = Quantale::cost();
        let v = c.num(rat_int(2)).unwrap();
        assert!(matches!(l.tensor(&l.top(), &v), Err(Error::DomainMismatch(_))));
        assert!(l.num(rat(3, 2)).is_err());
        assert!(c.num(rat(-1, 2)).is_err());
    }

    #[test]
    fn value_strings_round_trip() {
        for q in all() {
            for v in q.grid(7).unwrap() {
                let s = q.value_to_string(&v);
                assert_eq!(q.value_from_str(&s).unwrap(), v, "{}: {s}", q.name());
            }
        }
        assert_eq!(parse_rat("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rat("-1.25").unwrap(), rat(-5, 4));
        assert!(parse_rat("1/0").is_err());
    }

    proptest! {
        /// ⊗ distributes over finite joins of grid values (the complete form is the
        /// same statement applied pointwise everywhere we ever take joins).
        #[test]
        fn tensor_distributes_over_joins(
            qi in 0usize..5,
            ui in 0usize..21,
            picks in proptest::collection::vec(0usize..21, 0..4),
        ) {
            let q = &all()[qi];
            let grid = q.grid(20).unwrap();
            let u = &grid[ui % grid.len()];
            let vs: Vec<&QValue> = picks.iter().map(|&i| &grid[i % grid.len()]).collect();
            let lhs = q.tensor(u, &q.join(vs.iter().copied()).unwrap()).unwrap();
            let parts: Vec<QValue> =
                vs.iter().map(|v| q.tensor(u, v).unwrap()).collect();
            let rhs = q.join(parts.iter()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn order_is_antisymmetric_and_tensor_monotone(
            qi in 0usize..5,
            a in 0usize..21,
            b in 0usize..21,
            c in 0usize..21,
        ) {
            let q = &all()[qi];
            let grid = q.grid(20).unwrap();
            let (u, v, w) = (&grid[a % grid.len()], &grid[b % grid.len()], &grid[c % grid.len()]);
            if q.le(u, v).unwrap() && q.le(v, u).unwrap() {
                prop_assert_eq!(u, v);
            }
            if q.le(u, v).unwrap() {
                prop_assert!(q.le(&q.tensor(u, w).unwrap(), &q.tensor(v, w).unwrap()).unwrap());
            }
        }
    }
}
