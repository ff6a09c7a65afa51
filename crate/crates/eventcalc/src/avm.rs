//! Sorted attribute-value structures.
//!
//! An [`Avm`] is a tree: an optional index variable, a [`Sort`], and a
//! finite feature→value map. Values are atoms, exact rationals, nested
//! Avms, or (inside rule patterns only) capitalized pattern variables.
//! Shared participants across structures are expressed by equal index
//! variables, not by re-entrant graph edges, so unification is plain
//! structural recursion with sorts combined through the lattice meet.

use crate::sorts::Sort;
use crate::units::{Measure, Rational, Unit, UnitError};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

/// Feature names, ordered by the canonical emission order of the text
/// format. Lexicon-driven roles outside the built-in set use `Role` and
/// sort after the built-ins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Pred,
    ComposedOf,
    Agent,
    Patient,
    Goal,
    Path,
    RefObj,
    Card,
    Quantity,
    ProximalDistance,
    Duration,
    Distance,
    Name,
    Number,
    Unit,
    Role(String),
}

impl Feature {
    pub fn name(&self) -> &str {
        match self {
            Feature::Pred => "pred",
            Feature::ComposedOf => "composed-of",
            Feature::Agent => "agent",
            Feature::Patient => "patient",
            Feature::Goal => "goal",
            Feature::Path => "path",
            Feature::RefObj => "ref-obj",
            Feature::Card => "card",
            Feature::Quantity => "quantity",
            Feature::ProximalDistance => "proximal-distance",
            Feature::Duration => "duration",
            Feature::Distance => "distance",
            Feature::Name => "name",
            Feature::Number => "number",
            Feature::Unit => "unit",
            Feature::Role(s) => s,
        }
    }

    const BUILTIN: [Feature; 15] = [
        Feature::Pred,
        Feature::ComposedOf,
        Feature::Agent,
        Feature::Patient,
        Feature::Goal,
        Feature::Path,
        Feature::RefObj,
        Feature::Card,
        Feature::Quantity,
        Feature::ProximalDistance,
        Feature::Duration,
        Feature::Distance,
        Feature::Name,
        Feature::Number,
        Feature::Unit,
    ];
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(b) = Feature::BUILTIN.iter().find(|b| b.name() == s) {
            return Ok(b.clone());
        }
        Ok(Feature::Role(s.to_string()))
    }
}

/// A path from the root of an Avm: the sequence of features followed.
pub type FeaturePath = Vec<Feature>;

/// Renders a feature path as `composed-of.patient`; the empty path as
/// `root`.
pub fn path_to_string(path: &[Feature]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter()
            .map(Feature::name)
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// The index slot of an Avm: anonymous, a ground variable (`e1`, `x`),
/// or a pattern variable (`E1`) inside rule patterns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Index {
    Anon,
    Var(String),
    Pattern(String),
}

impl Index {
    pub fn var(name: &str) -> Index {
        Index::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Index::Var(v) => Some(v),
            _ => None,
        }
    }
}

/// A feature value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Atom(String),
    Number(Rational),
    Avm(Avm),
    /// Pattern variable; legal only inside rule patterns.
    Pattern(String),
}

impl Value {
    pub fn atom(s: &str) -> Value {
        Value::Atom(s.to_string())
    }

    pub fn integer(n: i64) -> Value {
        Value::Number(Rational::from_integer(n))
    }

    pub fn as_avm(&self) -> Option<&Avm> {
        match self {
            Value::Avm(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<Rational> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    /// Short rendering for diagnostics and clash reports.
    pub fn brief(&self) -> String {
        match self {
            Value::Atom(a) => a.clone(),
            Value::Number(n) => n.to_string(),
            Value::Avm(a) => format!("[sort: {}]", a.sort),
            Value::Pattern(v) => v.clone(),
        }
    }
}

/// A sorted attribute-value structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Avm {
    pub index: Index,
    pub sort: Sort,
    features: BTreeMap<Feature, Value>,
}

impl Avm {
    pub fn new(sort: Sort) -> Avm {
        Avm {
            index: Index::Anon,
            sort,
            features: BTreeMap::new(),
        }
    }

    pub fn with_index(mut self, name: &str) -> Avm {
        self.index = Index::var(name);
        self
    }

    pub fn with(mut self, feature: Feature, value: Value) -> Avm {
        self.features.insert(feature, value);
        self
    }

    pub fn set(&mut self, feature: Feature, value: Value) {
        self.features.insert(feature, value);
    }

    pub fn remove(&mut self, feature: &Feature) -> Option<Value> {
        self.features.remove(feature)
    }

    pub fn get(&self, feature: &Feature) -> Option<&Value> {
        self.features.get(feature)
    }

    pub fn get_avm(&self, feature: &Feature) -> Option<&Avm> {
        self.get(feature).and_then(Value::as_avm)
    }

    pub fn get_atom(&self, feature: &Feature) -> Option<&str> {
        self.get(feature).and_then(Value::as_atom)
    }

    pub fn has(&self, feature: &Feature) -> bool {
        self.features.contains_key(feature)
    }

    /// Features in canonical order.
    pub fn features(&self) -> impl Iterator<Item = (&Feature, &Value)> {
        self.features.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Follows a feature path from this node. The empty path addresses
    /// the node itself.
    pub fn get_path(&self, path: &[Feature]) -> Option<ValueRef<'_>> {
        match path.split_first() {
            None => Some(ValueRef::Avm(self)),
            Some((first, rest)) => match self.features.get(first)? {
                Value::Avm(inner) => inner.get_path(rest),
                leaf if rest.is_empty() => Some(ValueRef::from_value(leaf)),
                _ => None,
            },
        }
    }

    /// True when neither the index nor any value contains a pattern
    /// variable.
    pub fn is_ground(&self) -> bool {
        if matches!(self.index, Index::Pattern(_)) {
            return false;
        }
        self.features.values().all(|v| match v {
            Value::Pattern(_) => false,
            Value::Avm(a) => a.is_ground(),
            _ => true,
        })
    }

    /// Reads a `{number, unit}` measure from a feature of this node.
    pub fn measure_at(&self, feature: &Feature) -> Option<Result<Measure, UnitError>> {
        let avm = self.get_avm(feature)?;
        avm.as_measure()
    }

    /// Interprets this node as a measure record.
    pub fn as_measure(&self) -> Option<Result<Measure, UnitError>> {
        let number = self.get(&Feature::Number)?.as_number()?;
        let unit = self.get_atom(&Feature::Unit)?;
        Some(
            unit.parse::<Unit>()
                .and_then(|unit| Measure::new(number, unit)),
        )
    }

    /// Builds a measure record node: `[number: N, unit: U]` of sort
    /// `measure`.
    pub fn measure_record(m: &Measure) -> Avm {
        Avm::new(Sort::Measure)
            .with(Feature::Number, Value::Number(m.number()))
            .with(Feature::Unit, Value::atom(m.unit().atom()))
    }

    /// All index variables occurring in the structure, in traversal
    /// order, with duplicates.
    pub fn index_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        if let Index::Var(v) = &self.index {
            out.push(v.clone());
        }
        for v in self.features.values() {
            if let Value::Avm(a) = v {
                a.collect_vars(out);
            }
        }
    }
}

/// Borrowed view of what a feature path addresses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueRef<'a> {
    Avm(&'a Avm),
    Atom(&'a str),
    Number(Rational),
    Pattern(&'a str),
}

impl<'a> ValueRef<'a> {
    fn from_value(v: &'a Value) -> ValueRef<'a> {
        match v {
            Value::Avm(a) => ValueRef::Avm(a),
            Value::Atom(s) => ValueRef::Atom(s),
            Value::Number(n) => ValueRef::Number(*n),
            Value::Pattern(p) => ValueRef::Pattern(p),
        }
    }

    pub fn as_atom(&self) -> Option<&'a str> {
        match self {
            ValueRef::Atom(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_avm(&self) -> Option<&'a Avm> {
        match self {
            ValueRef::Avm(a) => Some(a),
            _ => None,
        }
    }
}

/// A unification failure: the path from the root where the conflict
/// occurred and brief renderings of the two irreconcilable values.
#[derive(Debug, Clone, PartialEq)]
pub struct Clash {
    pub path: FeaturePath,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Clash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "clash at {}: {} vs {}",
            path_to_string(&self.path),
            self.left,
            self.right
        )
    }
}

impl std::error::Error for Clash {}

/// Sorted unification. The result sort is the lattice meet at each
/// node; features are unioned, shared features unified recursively.
/// Index variables alias: the result keeps the left index when bound,
/// otherwise the right. Pattern variables absorb whatever they meet.
pub fn unify(a: &Avm, b: &Avm) -> Result<Avm, Clash> {
    unify_at(a, b, &mut Vec::new())
}

fn unify_at(a: &Avm, b: &Avm, path: &mut FeaturePath) -> Result<Avm, Clash> {
    let sort = a.sort.meet(b.sort);
    if sort == Sort::Bottom && a.sort != Sort::Bottom && b.sort != Sort::Bottom {
        return Err(Clash {
            path: path.clone(),
            left: a.sort.to_string(),
            right: b.sort.to_string(),
        });
    }
    let index = match (&a.index, &b.index) {
        (Index::Anon, other) => other.clone(),
        (this, _) => this.clone(),
    };
    let mut features = a.features.clone();
    for (feat, bv) in &b.features {
        match features.get(feat) {
            None => {
                features.insert(feat.clone(), bv.clone());
            }
            Some(av) => {
                path.push(feat.clone());
                let merged = unify_values(av, bv, path)?;
                path.pop();
                features.insert(feat.clone(), merged);
            }
        }
    }
    Ok(Avm {
        index,
        sort,
        features,
    })
}

fn unify_values(a: &Value, b: &Value, path: &mut FeaturePath) -> Result<Value, Clash> {
    match (a, b) {
        (Value::Pattern(_), other) => Ok(other.clone()),
        (this, Value::Pattern(_)) => Ok(this.clone()),
        (Value::Avm(x), Value::Avm(y)) => Ok(Value::Avm(unify_at(x, y, path)?)),
        (Value::Atom(x), Value::Atom(y)) if x == y => Ok(a.clone()),
        (Value::Number(x), Value::Number(y)) if x == y => Ok(a.clone()),
        _ => Err(Clash {
            path: path.clone(),
            left: a.brief(),
            right: b.brief(),
        }),
    }
}

/// True iff every path/value in `general` is present and compatible in
/// `specific`, with `general`'s sort above `specific`'s at each
/// corresponding node. Index variable names are not compared; they are
/// existential in a partial description.
pub fn subsumes(general: &Avm, specific: &Avm) -> bool {
    if !specific.sort.leq(general.sort) {
        return false;
    }
    general.features.iter().all(|(feat, gv)| {
        specific
            .features
            .get(feat)
            .is_some_and(|sv| value_subsumes(gv, sv))
    })
}

fn value_subsumes(general: &Value, specific: &Value) -> bool {
    match (general, specific) {
        (Value::Pattern(_), _) => true,
        (Value::Avm(g), Value::Avm(s)) => subsumes(g, s),
        (Value::Atom(g), Value::Atom(s)) => g == s,
        (Value::Number(g), Value::Number(s)) => g == s,
        _ => false,
    }
}

/// Structural equality up to a consistent renaming of index variables.
pub fn alpha_eq(a: &Avm, b: &Avm) -> bool {
    let mut fwd: BTreeMap<String, String> = BTreeMap::new();
    let mut bwd: BTreeMap<String, String> = BTreeMap::new();
    alpha_eq_at(a, b, &mut fwd, &mut bwd)
}

fn alpha_eq_at(
    a: &Avm,
    b: &Avm,
    fwd: &mut BTreeMap<String, String>,
    bwd: &mut BTreeMap<String, String>,
) -> bool {
    if a.sort != b.sort {
        return false;
    }
    match (&a.index, &b.index) {
        (Index::Anon, Index::Anon) => {}
        (Index::Var(x), Index::Var(y)) => {
            let f = fwd.entry(x.clone()).or_insert_with(|| y.clone());
            let g = bwd.entry(y.clone()).or_insert_with(|| x.clone());
            if f != y || g != x {
                return false;
            }
        }
        (Index::Pattern(x), Index::Pattern(y)) if x == y => {}
        _ => return false,
    }
    if a.features.len() != b.features.len() {
        return false;
    }
    a.features.iter().all(|(feat, av)| {
        b.features.get(feat).is_some_and(|bv| match (av, bv) {
            (Value::Avm(x), Value::Avm(y)) => alpha_eq_at(x, y, fwd, bwd),
            (Value::Atom(x), Value::Atom(y)) => x == y,
            (Value::Number(x), Value::Number(y)) => x == y,
            (Value::Pattern(x), Value::Pattern(y)) => x == y,
            _ => false,
        })
    })
}

static FRESH_COUNTER: AtomicU64 = AtomicU64::new(1);

/// Generates a globally fresh index variable from a base name. The
/// alphabetic stem of the base is kept for readability; a monotone
/// counter guarantees freshness under concurrent use.
pub fn fresh_var(base: &str) -> String {
    let stem: String = base.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let stem = if stem.is_empty() { "v".to_string() } else { stem };
    let n = FRESH_COUNTER.fetch_add(1, Ordering::Relaxed);
    format!("{stem}_{n}")
}

/// Consistently replaces every index variable and pattern variable with
/// a fresh one; twice-occurring variables stay aliased.
pub fn rename_fresh(a: &Avm) -> Avm {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    rename_at(a, &mut map)
}

fn rename_at(a: &Avm, map: &mut BTreeMap<String, String>) -> Avm {
    let index = match &a.index {
        Index::Anon => Index::Anon,
        Index::Var(v) => Index::Var(
            map.entry(v.clone())
                .or_insert_with(|| fresh_var(v))
                .clone(),
        ),
        Index::Pattern(v) => Index::Pattern(
            map.entry(v.clone())
                .or_insert_with(|| fresh_var(v))
                .clone(),
        ),
    };
    let features = a
        .features
        .iter()
        .map(|(feat, v)| {
            let v = match v {
                Value::Avm(inner) => Value::Avm(rename_at(inner, map)),
                Value::Pattern(p) => Value::Pattern(
                    map.entry(p.clone())
                        .or_insert_with(|| fresh_var(p))
                        .clone(),
                ),
                other => other.clone(),
            };
            (feat.clone(), v)
        })
        .collect();
    Avm {
        index,
        sort: a.sort,
        features,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_text;

    fn pour_process() -> Avm {
        parse_text(
            "[index: e, sort: process, pred: pour, agent: jack, \
             patient: [index: x, sort: substance, pred: water], \
             goal: [index: xa, sort: object, pred: bucket, name: A]]",
        )
        .unwrap()
    }

    #[test]
    fn get_path_walks_features() {
        let p = pour_process();
        let got = p.get_path(&[Feature::Patient, Feature::Pred]).unwrap();
        assert_eq!(got.as_atom(), Some("water"));
    }

    #[test]
    fn get_path_empty_is_identity() {
        let p = pour_process();
        let got = p.get_path(&[]).unwrap();
        assert_eq!(got.as_avm(), Some(&p));
    }

    #[test]
    fn get_path_missing_hop_is_absent() {
        let p = pour_process();
        assert!(p.get_path(&[Feature::Distance]).is_none());
        assert!(p
            .get_path(&[Feature::Patient, Feature::Pred, Feature::Card])
            .is_none());
    }

    #[test]
    fn unify_is_idempotent_up_to_aliasing() {
        let p = pour_process();
        let u = unify(&p, &p).unwrap();
        assert!(alpha_eq(&u, &p));
    }

    #[test]
    fn unify_sibling_sorts_clashes_at_root() {
        let a = Avm::new(Sort::Event);
        let b = Avm::new(Sort::Process);
        let clash = unify(&a, &b).unwrap_err();
        assert!(clash.path.is_empty());
        assert_eq!(clash.left, "event");
        assert_eq!(clash.right, "process");
    }

    #[test]
    fn unify_merges_features_and_sorts() {
        let a = Avm::new(Sort::Eventuality).with(Feature::Pred, Value::atom("pour"));
        let b = Avm::new(Sort::Process).with(Feature::Agent, Value::atom("jack"));
        let u = unify(&a, &b).unwrap();
        assert_eq!(u.sort, Sort::Process);
        assert_eq!(u.get_atom(&Feature::Pred), Some("pour"));
        assert_eq!(u.get_atom(&Feature::Agent), Some("jack"));
    }

    #[test]
    fn unify_reports_nested_clash_path() {
        let a = parse_text("[sort: process, patient: [sort: substance, pred: water]]").unwrap();
        let b = parse_text("[sort: process, patient: [sort: substance, pred: wine]]").unwrap();
        let clash = unify(&a, &b).unwrap_err();
        assert_eq!(clash.path, vec![Feature::Patient, Feature::Pred]);
    }

    #[test]
    fn subsumes_partial_description() {
        let general = Avm::new(Sort::Eventuality).with(Feature::Pred, Value::atom("pour"));
        let specific = pour_process();
        assert!(subsumes(&general, &specific));
        assert!(!subsumes(&specific, &general));
        assert!(subsumes(&specific, &specific));
    }

    #[test]
    fn subsumes_respects_sort_direction() {
        let event = Avm::new(Sort::Event);
        let eventuality = Avm::new(Sort::Eventuality);
        assert!(subsumes(&eventuality, &event));
        assert!(!subsumes(&event, &eventuality));
    }

    #[test]
    fn rename_fresh_keeps_structure_and_aliasing() {
        let a = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: process, pred: pour], \
             duration: [number: 30, unit: seconds]]",
        )
        .unwrap();
        let r = rename_fresh(&a);
        assert!(alpha_eq(&a, &r));
        assert_ne!(a.index, r.index);
        let rr = rename_fresh(&r);
        assert!(alpha_eq(&r, &rr));
    }

    #[test]
    fn rename_fresh_leaves_ground_atoms() {
        let a = pour_process();
        let r = rename_fresh(&a);
        assert_eq!(r.get_atom(&Feature::Pred), Some("pour"));
        assert_eq!(
            r.get_avm(&Feature::Patient).unwrap().get_atom(&Feature::Pred),
            Some("water")
        );
    }

    #[test]
    fn fresh_vars_are_distinct() {
        let a = fresh_var("e1");
        let b = fresh_var("e1");
        assert_ne!(a, b);
        assert!(a.starts_with("e_"));
    }

    #[test]
    fn pattern_values_absorb() {
        let pat = Avm::new(Sort::Event).with(Feature::ComposedOf, Value::Pattern("E".into()));
        let ground = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: process, pred: pour]]",
        )
        .unwrap();
        let u = unify(&pat, &ground).unwrap();
        assert_eq!(
            u.get_avm(&Feature::ComposedOf).unwrap().get_atom(&Feature::Pred),
            Some("pour")
        );
        assert!(!pat.is_ground());
        assert!(ground.is_ground());
    }
}
