//! File formats: JSON descriptions of quantales, categories, relations and
//! coalgebras, plus the CSV/JSON artifacts the command line emits.
//!
//! Values are strings in the quantale's surface syntax ("1/2", "T", "inf",
//! "{a,ab}"), so files stay exact: nothing is parsed through floating point.
//! Writes go through a temp file and rename, so a crash never leaves a
//! truncated artifact behind.

use crate::behaviour::{Coalgebra, DistanceResult};
use crate::enriched::{VCat, VRel};
use crate::error::{Error, Result};
use crate::functor::{Elem, SetFunctor};
use crate::logic::ExpressivityReport;
use crate::propcheck::CheckReport;
use crate::quantale::{parse_rat, Monoid, Quantale};
use serde_json::{json, Map, Value};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// Quantale field
// ---------------------------------------------------------------------------

/// The "quantale" field: a stock name ("bool2", "luk01", "cost", "maxcost"),
/// "free:<path>" pointing at a monoid file (resolved against `base`), or an
/// inline object {"free": {...}}.
pub fn quantale_from_value(v: &Value, base: Option<&Path>) -> Result<Quantale> {
    match v {
        Value::String(s) => {
            if let Some(rest) = s.strip_prefix("free:") {
                let path = match base {
                    Some(dir) => dir.join(rest),
                    None => PathBuf::from(rest),
                };
                let text = std::fs::read_to_string(&path)?;
                let mv: Value = serde_json::from_str(&text)?;
                Ok(Quantale::free(monoid_from_value(&mv)?))
            } else {
                Quantale::by_name(s)
            }
        }
        Value::Object(m) => {
            let inner = m
                .get("free")
                .ok_or_else(|| Error::Validation("quantale object needs a \"free\" key".into()))?;
            Ok(Quantale::free(monoid_from_value(inner)?))
        }
        _ => Err(Error::Validation("quantale field must be a string or object".into())),
    }
}

/// Monoid files: {"alphabet": [...], "max_len": n} for truncated commutative
/// words, or an explicit table {"elems": [...], "unit": "e", "table": [[...]]}
/// with rows and entries written as element names.
pub fn monoid_from_value(v: &Value) -> Result<Monoid> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Validation("monoid description must be an object".into()))?;
    if let Some(alpha) = obj.get("alphabet") {
        let letters: Vec<String> = as_string_vec(alpha, "alphabet")?;
        let max_len = obj
            .get("max_len")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Validation("alphabet form needs integer max_len".into()))?;
        return Monoid::free_words(&letters, max_len as usize);
    }
    let elems: Vec<String> = as_string_vec(
        obj.get("elems").ok_or_else(|| Error::Validation("monoid needs elems".into()))?,
        "elems",
    )?;
    let unit_name = obj
        .get("unit")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Validation("monoid needs a unit name".into()))?;
    let unit = elems
        .iter()
        .position(|e| e == unit_name)
        .ok_or_else(|| Error::Unknown(format!("unit {unit_name:?}")))?;
    let rows = obj
        .get("table")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Validation("monoid needs a table".into()))?;
    let mut table = Vec::with_capacity(elems.len() * elems.len());
    if rows.len() != elems.len() {
        return Err(Error::Dimension("monoid table row count".into()));
    }
    for row in rows {
        let names = as_string_vec(row, "table row")?;
        if names.len() != elems.len() {
            return Err(Error::Dimension("monoid table row length".into()));
        }
        for name in names {
            table.push(
                elems
                    .iter()
                    .position(|e| *e == name)
                    .ok_or_else(|| Error::Unknown(format!("monoid element {name:?}")))?,
            );
        }
    }
    Monoid::new(elems, unit, table)
}

fn as_string_vec(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| Error::Validation(format!("{what} must be an array")))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Validation(format!("{what} entries must be strings")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Categories and relations
// ---------------------------------------------------------------------------

fn parse_matrix(q: &Quantale, rows: &Value, nrows: usize, ncols: usize) -> Result<Vec<crate::quantale::QValue>> {
    let rows = rows
        .as_array()
        .ok_or_else(|| Error::Validation("matrix must be an array of rows".into()))?;
    if rows.len() != nrows {
        return Err(Error::Dimension(format!("matrix has {} rows, carrier has {nrows}", rows.len())));
    }
    let mut out = Vec::with_capacity(nrows * ncols);
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Validation("matrix row must be an array".into()))?;
        if row.len() != ncols {
            return Err(Error::Dimension(format!("matrix row of length {}, expected {ncols}", row.len())));
        }
        for cell in row {
            let s = cell
                .as_str()
                .ok_or_else(|| Error::Validation("matrix entries must be value strings".into()))?;
            out.push(q.value_from_str(s)?);
        }
    }
    Ok(out)
}

pub fn category_from_value(v: &Value, base: Option<&Path>) -> Result<VCat> {
    let obj = v.as_object().ok_or_else(|| Error::Validation("category must be an object".into()))?;
    let q = quantale_from_value(
        obj.get("quantale").ok_or_else(|| Error::Validation("missing quantale".into()))?,
        base,
    )?;
    let names = as_string_vec(
        obj.get("carrier").ok_or_else(|| Error::Validation("missing carrier".into()))?,
        "carrier",
    )?;
    let carrier: Vec<Elem> = names.iter().map(|s| Elem::atom(s)).collect();
    let mat = parse_matrix(
        &q,
        obj.get("matrix").ok_or_else(|| Error::Validation("missing matrix".into()))?,
        carrier.len(),
        carrier.len(),
    )?;
    let cat = VCat::new(q, carrier, mat)?;
    cat.validate()?;
    Ok(cat)
}

pub fn relation_from_value(v: &Value, base: Option<&Path>) -> Result<VRel> {
    let obj = v.as_object().ok_or_else(|| Error::Validation("relation must be an object".into()))?;
    let q = quantale_from_value(
        obj.get("quantale").ok_or_else(|| Error::Validation("missing quantale".into()))?,
        base,
    )?;
    let src: Vec<Elem> = as_string_vec(
        obj.get("src").ok_or_else(|| Error::Validation("missing src".into()))?,
        "src",
    )?
    .iter()
    .map(|s| Elem::atom(s))
    .collect();
    let tgt: Vec<Elem> = as_string_vec(
        obj.get("tgt").ok_or_else(|| Error::Validation("missing tgt".into()))?,
        "tgt",
    )?
    .iter()
    .map(|s| Elem::atom(s))
    .collect();
    let mat = parse_matrix(
        &q,
        obj.get("matrix").ok_or_else(|| Error::Validation("missing matrix".into()))?,
        src.len(),
        tgt.len(),
    )?;
    VRel::new(q, src, tgt, mat)
}

pub fn category_to_value(cat: &VCat) -> Value {
    let n = cat.len();
    let rows: Vec<Value> = (0..n)
        .map(|i| {
            Value::Array(
                (0..n)
                    .map(|j| Value::String(cat.q.value_to_string(cat.at(i, j))))
                    .collect(),
            )
        })
        .collect();
    json!({
        "quantale": cat.q.name(),
        "carrier": cat.carrier.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "matrix": rows,
    })
}

pub fn relation_to_value(r: &VRel) -> Value {
    let rows: Vec<Value> = (0..r.src.len())
        .map(|i| {
            Value::Array(
                (0..r.tgt.len())
                    .map(|j| Value::String(r.q.value_to_string(r.at(i, j))))
                    .collect(),
            )
        })
        .collect();
    json!({
        "quantale": r.q.name(),
        "src": r.src.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "tgt": r.tgt.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "matrix": rows,
    })
}

// ---------------------------------------------------------------------------
// Coalgebras
// ---------------------------------------------------------------------------

/// Transition payloads follow the functor shape:
/// identity: "state"; powerset: ["s1","s2"]; distributions: {"s": "1/2", ...};
/// an added point: the string "term"; exponents: {"label": payload, ...};
/// labelled sums: {"label": "a", "value": payload}; neighbourhoods: an array
/// of arrays of states.
pub fn transition_from_value(f: &SetFunctor, states: &[Elem], v: &Value) -> Result<Elem> {
    let state = |name: &str| -> Result<Elem> {
        let e = Elem::atom(name);
        if states.contains(&e) {
            Ok(e)
        } else {
            Err(Error::Unknown(format!("state {name:?}")))
        }
    };
    match (f, v) {
        (SetFunctor::Identity, Value::String(s)) => state(s),
        (SetFunctor::Powerset, Value::Array(items)) => {
            let mut set = BTreeSet::new();
            for it in items {
                let s = it
                    .as_str()
                    .ok_or_else(|| Error::Validation("successor entries must be state names".into()))?;
                set.insert(state(s)?);
            }
            Ok(Elem::Set(set))
        }
        (SetFunctor::Dist, Value::Object(m)) => {
            let mut pairs = Vec::new();
            for (name, mass) in m {
                let ms = mass
                    .as_str()
                    .ok_or_else(|| Error::Validation("masses must be rational strings".into()))?;
                pairs.push((state(name)?, parse_rat(ms)?));
            }
            Elem::dist(pairs)
        }
        (SetFunctor::Maybe(_), Value::String(s)) if s == "term" => Ok(Elem::Term),
        (SetFunctor::Maybe(inner), other) => transition_from_value(inner, states, other),
        (SetFunctor::PowerL(labels, inner), Value::Object(m)) => {
            let mut out = std::collections::BTreeMap::new();
            for label in labels {
                let sub = m.get(label).ok_or_else(|| {
                    Error::Validation(format!("missing component for label {label:?}"))
                })?;
                out.insert(label.clone(), transition_from_value(inner, states, sub)?);
            }
            if m.len() != labels.len() {
                return Err(Error::Validation("extra labels in component object".into()));
            }
            Ok(Elem::Func(out))
        }
        (SetFunctor::Labelled(labels, inner), Value::Object(m)) => {
            let label = m
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Validation("labelled payload needs a \"label\"".into()))?;
            if !labels.iter().any(|l| l == label) {
                return Err(Error::Unknown(format!("label {label:?}")));
            }
            let sub = m
                .get("value")
                .ok_or_else(|| Error::Validation("labelled payload needs a \"value\"".into()))?;
            Ok(Elem::Pair(label.to_string(), Box::new(transition_from_value(inner, states, sub)?)))
        }
        (SetFunctor::Neighbourhood, Value::Array(fams)) => {
            let mut family = BTreeSet::new();
            for sub in fams {
                let names = as_string_vec(sub, "neighbourhood")?;
                let mut set = BTreeSet::new();
                for n in names {
                    set.insert(state(&n)?);
                }
                family.insert(Elem::Set(set));
            }
            Ok(Elem::Set(family))
        }
        _ => Err(Error::Validation(format!(
            "transition {v} does not fit functor {}",
            f.display_name()
        ))),
    }
}

pub fn transition_to_value(f: &SetFunctor, t: &Elem) -> Result<Value> {
    match (f, t) {
        (SetFunctor::Identity, x) => Ok(Value::String(x.to_string())),
        (SetFunctor::Powerset, Elem::Set(s)) => {
            Ok(Value::Array(s.iter().map(|x| Value::String(x.to_string())).collect()))
        }
        (SetFunctor::Dist, Elem::Dist(d)) => {
            let mut m = Map::new();
            for (x, p) in d {
                m.insert(x.to_string(), Value::String(crate::quantale::fmt_rat(p)));
            }
            Ok(Value::Object(m))
        }
        (SetFunctor::Maybe(_), Elem::Term) => Ok(Value::String("term".into())),
        (SetFunctor::Maybe(inner), other) => transition_to_value(inner, other),
        (SetFunctor::PowerL(_, inner), Elem::Func(m)) => {
            let mut out = Map::new();
            for (k, x) in m {
                out.insert(k.clone(), transition_to_value(inner, x)?);
            }
            Ok(Value::Object(out))
        }
        (SetFunctor::Labelled(_, inner), Elem::Pair(a, x)) => Ok(json!({
            "label": a,
            "value": transition_to_value(inner, x)?,
        })),
        (SetFunctor::Neighbourhood, Elem::Set(family)) => {
            let mut fams = Vec::new();
            for sub in family {
                let Elem::Set(s) = sub else {
                    return Err(Error::CarrierMismatch("neighbourhood member is not a set".into()));
                };
                fams.push(Value::Array(s.iter().map(|x| Value::String(x.to_string())).collect()));
            }
            Ok(Value::Array(fams))
        }
        _ => Err(Error::CarrierMismatch(format!("{t} does not fit {}", f.display_name()))),
    }
}

pub fn coalgebra_from_value(v: &Value, base: Option<&Path>) -> Result<Coalgebra> {
    let obj = v.as_object().ok_or_else(|| Error::Validation("system must be an object".into()))?;
    let q = quantale_from_value(
        obj.get("quantale").ok_or_else(|| Error::Validation("missing quantale".into()))?,
        base,
    )?;
    let labels: Vec<String> = match obj.get("labels") {
        Some(l) => as_string_vec(l, "labels")?,
        None => Vec::new(),
    };
    let fname = obj
        .get("functor")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Validation("missing functor".into()))?;
    let functor = SetFunctor::parse(fname, &labels)?;
    let names = as_string_vec(
        obj.get("states").ok_or_else(|| Error::Validation("missing states".into()))?,
        "states",
    )?;
    let states: Vec<Elem> = names.iter().map(|s| Elem::atom(s)).collect();
    let metric = match obj.get("metric") {
        Some(rows) => Some(VCat::new(
            q.clone(),
            states.clone(),
            parse_matrix(&q, rows, states.len(), states.len())?,
        )?),
        None => None,
    };
    let trans_obj = obj
        .get("transitions")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Validation("missing transitions object".into()))?;
    let mut trans = Vec::with_capacity(states.len());
    for name in &names {
        let payload = trans_obj
            .get(name)
            .ok_or_else(|| Error::Validation(format!("no transition for state {name:?}")))?;
        trans.push(transition_from_value(&functor, &states, payload).map_err(|e| {
            Error::Validation(format!("state {name:?}: {e}"))
        })?);
    }
    if trans_obj.len() != names.len() {
        return Err(Error::Validation("transitions mention unknown states".into()));
    }
    Coalgebra::new(q, functor, states, metric, trans)
}

pub fn load_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_category(path: &Path) -> Result<VCat> {
    category_from_value(&load_value(path)?, path.parent())
}

pub fn load_relation(path: &Path) -> Result<VRel> {
    relation_from_value(&load_value(path)?, path.parent())
}

pub fn load_coalgebra(path: &Path) -> Result<Coalgebra> {
    coalgebra_from_value(&load_value(path)?, path.parent())
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

pub fn distance_report_value(c: &Coalgebra, lifting: &str, r: &DistanceResult) -> Value {
    let mut v = category_to_value(&r.cat);
    let obj = v.as_object_mut().expect("category value is an object");
    obj.insert("lifting".into(), Value::String(lifting.to_string()));
    obj.insert("iterations".into(), json!(r.iterations));
    obj.insert("converged".into(), json!(r.converged));
    obj.insert("exact".into(), json!(r.exact));
    obj.insert("epsilon".into(), Value::String(crate::quantale::fmt_rat(&r.epsilon)));
    obj.insert("functor".into(), Value::String(c.functor.display_name()));
    v
}

pub fn check_report_value(r: &CheckReport) -> Value {
    json!({
        "name": r.name,
        "passed": r.passed(),
        "instances": r.instances,
        "exhaustive": r.exhaustive,
        "seed": r.seed,
        "failures": r.failures,
    })
}

pub fn expressivity_report_value(rep: &ExpressivityReport) -> Value {
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "depth": r.depth,
                "gap": r.gap.as_ref().map(crate::quantale::fmt_rat),
                "vectors": r.vectors,
            })
        })
        .collect();
    json!({
        "iterations": rep.bd.iterations,
        "converged": rep.bd.converged,
        "exact": rep.bd.exact,
        "behavioural": category_to_value(&rep.bd_sym),
        "depths": rows,
        "budget_hit": rep.budget_hit,
        "universal_ok": rep.universal_ok,
        "worst": rep.worst.as_ref().map(|w| json!({
            "x": w.x, "y": w.y, "bd": w.bd, "ld": w.ld, "formula": w.formula,
        })),
    })
}

/// Square distance matrix as CSV: header row of states, then one row per state.
pub fn matrix_csv(cat: &VCat) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(cat.carrier.iter().map(|e| e.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..cat.len() {
        let mut row = vec![cat.carrier[i].to_string()];
        row.extend((0..cat.len()).map(|j| cat.q.value_to_string(cat.at(i, j))));
        w.write_record(&row).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Validation(e.to_string()))?)
        .map_err(|e| Error::Validation(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv: {e}"))
}

/// Write via a temp file in the same directory and an atomic rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("artifact"),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
