//! The inference engine: pattern rules with arithmetic side conditions
//! and a subsumption-based entailment procedure.
//!
//! Two rules are schematic patterns with side conditions:
//!
//! * **duration weakening** — an event composed of a continuum and
//!   lasting `N1` units has, for every `0 ≤ N2 ≤ N1`, a counterpart of
//!   duration `N2` composed of the *same* continuum. The rule schema
//!   has infinitely many instances over the rationals, so it is applied
//!   goal-directed: the candidate `N2` is always read off a query,
//!   never enumerated.
//! * **quantity derivation** — from an event composed of a transfer
//!   process with a known rate, derive the re-description of the *same*
//!   event in which the patient is the concrete quantity transferred:
//!   `N2 = rate(E, U2, U1) × N1`.
//!
//! Two more are structural: existential weakening (dropping measures,
//! cardinalities, names, or nominal preds yields weaker descriptions of
//! the same entities) and the equivalence between the two construals of
//! a distance phrase over an `along`-path.

use crate::avm::{fresh_var, subsumes, Avm, Clash, Feature, Index, Value};
use crate::kb::canonical_key;
use crate::sortal::{Lexicon, VerbCategory};
use crate::sorts::Sort;
use crate::units::{convert, Measure, Rational, Unit};
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Rule applications per derivation are capped here by default. The
/// shipped derivations need at most two; four leaves slack without
/// opening unbounded search.
pub const DEFAULT_SEARCH_DEPTH: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KbError {
    #[error("facts must be ground; found pattern variables")]
    NotGround,
    #[error("fact with index {index} conflicts with an existing fact: {clash}")]
    IncompatibleFact { index: String, clash: Clash },
    #[error("rate fact refers to unknown process index {0}")]
    UnknownRateProcess(String),
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(Rational),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("rule not applicable: {0}")]
    Inapplicable(String),
    #[error("side condition violated: {0}")]
    SideConditionViolated(String),
    #[error("no rate fact for process {process} compatible with unit {unit}")]
    RateUnknown { process: String, unit: String },
    #[error("pattern variable {0} unbound in rule conclusion")]
    Unbound(String),
}

/// A stored transfer rate: quantity units per time unit for one
/// process, e.g. `rate e 1/6 gallons per seconds`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFact {
    pub process: String,
    pub rate: Rational,
    pub quantity_unit: Unit,
    pub time_unit: Unit,
}

impl RateFact {
    pub fn new(
        process: &str,
        rate: Rational,
        quantity_unit: Unit,
        time_unit: Unit,
    ) -> Result<RateFact, KbError> {
        if !rate.is_positive() {
            return Err(KbError::NonPositiveRate(rate));
        }
        Ok(RateFact {
            process: process.to_string(),
            rate,
            quantity_unit,
            time_unit,
        })
    }
}

/// An immutable snapshot of ground facts plus rate facts. Queries are
/// pure functions of a snapshot; assertion builds a new state.
#[derive(Debug, Clone, Default)]
pub struct Kb {
    facts: Vec<Avm>,
    rates: Vec<RateFact>,
}

impl Kb {
    pub fn new() -> Kb {
        Kb::default()
    }

    /// Adds a ground fact. Facts sharing a root index must describe the
    /// same entity compatibly (their contents must unify).
    pub fn add_fact(&mut self, fact: Avm) -> Result<(), KbError> {
        if !fact.is_ground() {
            return Err(KbError::NotGround);
        }
        if let Index::Var(root) = &fact.index {
            for existing in &self.facts {
                if existing.index.as_var() == Some(root) {
                    if let Err(clash) = crate::avm::unify(existing, &fact) {
                        return Err(KbError::IncompatibleFact {
                            index: root.clone(),
                            clash,
                        });
                    }
                }
            }
        }
        self.facts.push(fact);
        Ok(())
    }

    /// Adds a rate fact; its process index must occur in some fact.
    pub fn add_rate(&mut self, rate: RateFact) -> Result<(), KbError> {
        if !self.all_vars().contains(&rate.process) {
            return Err(KbError::UnknownRateProcess(rate.process));
        }
        self.rates.push(rate);
        Ok(())
    }

    pub fn facts(&self) -> &[Avm] {
        &self.facts
    }

    pub fn rates(&self) -> &[RateFact] {
        &self.rates
    }

    pub fn fact_by_index(&self, root: &str) -> Option<&Avm> {
        self.facts
            .iter()
            .find(|f| f.index.as_var() == Some(root))
    }

    /// Every index variable occurring anywhere in the facts.
    pub fn all_vars(&self) -> BTreeSet<String> {
        self.facts
            .iter()
            .flat_map(|f| f.index_vars())
            .collect()
    }

    /// Looks up a rate for a process and a duration, converting the
    /// duration into the rate's own time unit. Returns the transferred
    /// quantity.
    pub fn quantity_for(&self, process: &str, duration: &Measure) -> Option<Measure> {
        self.rates.iter().find_map(|r| {
            if r.process != process {
                return None;
            }
            let in_rate_unit = convert(duration, r.time_unit).ok()?;
            Measure::new(r.rate * in_rate_unit.number(), r.quantity_unit).ok()
        })
    }
}

/// Arithmetic side condition of a rule, decidable given ground
/// bindings.
#[derive(Debug, Clone)]
pub enum SideCondition {
    True,
    /// `0 ≤ candidate ≤ bound`; the candidate is supplied by the caller
    /// (goal-directed), the bound comes from the match.
    NumberLeq { candidate: String, bound: String },
    /// `result = rate(process, result_unit, duration_unit) × duration`,
    /// solved against the KB's rate table. Binds `result` and
    /// `result_unit`.
    RateProduct {
        result: String,
        result_unit: String,
        process: String,
        duration: String,
        duration_unit: String,
    },
}

/// A schematic rule: match the premise pattern, solve the side
/// condition, instantiate the conclusion. Variables listed in `fresh`
/// become new index variables in the conclusion.
#[derive(Debug, Clone)]
pub struct Rule {
    pub name: &'static str,
    pub lhs: Avm,
    pub rhs: Avm,
    pub side: SideCondition,
    pub fresh: Vec<&'static str>,
}

#[derive(Debug, Clone, Default)]
pub struct Bindings {
    values: BTreeMap<String, Value>,
    indices: BTreeMap<String, Index>,
}

impl Bindings {
    pub fn bind_number(&mut self, var: &str, n: Rational) {
        self.values.insert(var.to_string(), Value::Number(n));
    }

    fn number(&self, var: &str) -> Option<Rational> {
        self.values.get(var).and_then(Value::as_number)
    }

    fn atom(&self, var: &str) -> Option<&str> {
        self.values.get(var).and_then(Value::as_atom)
    }

    /// Witness-friendly rendering: structure bindings show as their
    /// index variable.
    fn summarize(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for (var, idx) in &self.indices {
            if let Index::Var(v) = idx {
                out.push((var.clone(), v.clone()));
            }
        }
        for (var, value) in &self.values {
            let shown = match value {
                Value::Avm(a) => match &a.index {
                    Index::Var(v) => v.clone(),
                    _ => value.brief(),
                },
                other => other.brief(),
            };
            out.push((var.clone(), shown));
        }
        out.sort();
        out
    }
}

fn match_avm(pattern: &Avm, ground: &Avm, binds: &mut Bindings) -> bool {
    if !ground.sort.leq(pattern.sort) {
        return false;
    }
    match &pattern.index {
        Index::Anon => {}
        Index::Pattern(v) => match binds.indices.get(v) {
            Some(prev) => {
                if prev != &ground.index {
                    return false;
                }
            }
            None => {
                binds.indices.insert(v.clone(), ground.index.clone());
            }
        },
        Index::Var(x) => {
            if ground.index.as_var() != Some(x) {
                return false;
            }
        }
    }
    pattern.features().all(|(feat, pv)| {
        ground
            .get(feat)
            .is_some_and(|gv| match_value(pv, gv, binds))
    })
}

fn match_value(pattern: &Value, ground: &Value, binds: &mut Bindings) -> bool {
    match (pattern, ground) {
        (Value::Pattern(v), _) => match binds.values.get(v) {
            Some(prev) => prev == ground,
            None => {
                binds.values.insert(v.clone(), ground.clone());
                true
            }
        },
        (Value::Avm(p), Value::Avm(g)) => match_avm(p, g, binds),
        (Value::Atom(a), Value::Atom(b)) => a == b,
        (Value::Number(a), Value::Number(b)) => a == b,
        _ => false,
    }
}

fn solve_side(side: &SideCondition, binds: &mut Bindings, kb: &Kb) -> Result<(), RuleError> {
    match side {
        SideCondition::True => Ok(()),
        SideCondition::NumberLeq { candidate, bound } => {
            let n2 = binds
                .number(candidate)
                .ok_or_else(|| RuleError::Unbound(candidate.clone()))?;
            let n1 = binds
                .number(bound)
                .ok_or_else(|| RuleError::Unbound(bound.clone()))?;
            if n2.is_negative() {
                return Err(RuleError::SideConditionViolated(format!(
                    "{candidate} = {n2} is negative"
                )));
            }
            if n2 > n1 {
                return Err(RuleError::SideConditionViolated(format!(
                    "{candidate} = {n2} exceeds {bound} = {n1}"
                )));
            }
            Ok(())
        }
        SideCondition::RateProduct {
            result,
            result_unit,
            process,
            duration,
            duration_unit,
        } => {
            let idx = match binds.indices.get(process) {
                Some(Index::Var(v)) => v.clone(),
                _ => return Err(RuleError::Unbound(process.clone())),
            };
            let n1 = binds
                .number(duration)
                .ok_or_else(|| RuleError::Unbound(duration.clone()))?;
            let unit_atom = binds
                .atom(duration_unit)
                .ok_or_else(|| RuleError::Unbound(duration_unit.clone()))?
                .to_string();
            let unknown = || RuleError::RateUnknown {
                process: idx.clone(),
                unit: unit_atom.clone(),
            };
            let unit: Unit = unit_atom.parse().map_err(|_| unknown())?;
            let dur = Measure::new(n1, unit).map_err(|_| {
                RuleError::SideConditionViolated(format!("negative duration {n1}"))
            })?;
            let qty = kb.quantity_for(&idx, &dur).ok_or_else(unknown)?;
            binds.bind_number(result, qty.number());
            binds
                .values
                .insert(result_unit.to_string(), Value::atom(qty.unit().atom()));
            Ok(())
        }
    }
}

fn instantiate(rhs: &Avm, binds: &Bindings, fresh: &BTreeMap<String, String>) -> Result<Avm, RuleError> {
    let index = match &rhs.index {
        Index::Anon => Index::Anon,
        Index::Var(v) => Index::Var(v.clone()),
        Index::Pattern(v) => {
            if let Some(name) = fresh.get(v) {
                Index::Var(name.clone())
            } else if let Some(idx) = binds.indices.get(v) {
                idx.clone()
            } else {
                return Err(RuleError::Unbound(v.clone()));
            }
        }
    };
    let mut out = Avm::new(rhs.sort);
    out.index = index;
    for (feat, v) in rhs.features() {
        let v = match v {
            Value::Pattern(p) => binds
                .values
                .get(p)
                .cloned()
                .ok_or_else(|| RuleError::Unbound(p.clone()))?,
            Value::Avm(inner) => Value::Avm(instantiate(inner, binds, fresh)?),
            other => other.clone(),
        };
        out.set(feat.clone(), v);
    }
    Ok(out)
}

impl Rule {
    /// Matches the premise against a fact, solves the side condition
    /// against the KB, and instantiates the conclusion. `seed` carries
    /// externally supplied bindings (the goal-directed parameters).
    pub fn apply(&self, fact: &Avm, kb: &Kb, seed: Bindings) -> Result<Avm, RuleError> {
        self.apply_traced(fact, kb, seed).map(|(avm, _)| avm)
    }

    fn apply_traced(
        &self,
        fact: &Avm,
        kb: &Kb,
        mut binds: Bindings,
    ) -> Result<(Avm, Bindings), RuleError> {
        if !match_avm(&self.lhs, fact, &mut binds) {
            return Err(RuleError::Inapplicable(format!(
                "premise of {} does not match",
                self.name
            )));
        }
        solve_side(&self.side, &mut binds, kb)?;
        let fresh: BTreeMap<String, String> = self
            .fresh
            .iter()
            .map(|v| (v.to_string(), fresh_var(&v.to_lowercase())))
            .collect();
        let avm = instantiate(&self.rhs, &binds, &fresh)?;
        Ok((avm, binds))
    }
}

fn measure_pattern(number_var: &str, unit_var: &str) -> Value {
    Value::Avm(
        Avm::new(crate::sorts::Sort::Measure)
            .with(Feature::Number, Value::Pattern(number_var.to_string()))
            .with(Feature::Unit, Value::Pattern(unit_var.to_string())),
    )
}

fn pat_index(avm: Avm, var: &str) -> Avm {
    let mut avm = avm;
    avm.index = Index::Pattern(var.to_string());
    avm
}

/// The duration-weakening rule schema.
pub fn duration_rule() -> Rule {
    let lhs = pat_index(
        Avm::new(Sort::Event)
            .with(Feature::ComposedOf, Value::Pattern("E".into()))
            .with(Feature::Duration, measure_pattern("N1", "U")),
        "E1",
    );
    let rhs = pat_index(
        Avm::new(Sort::Event)
            .with(Feature::ComposedOf, Value::Pattern("E".into()))
            .with(Feature::Duration, measure_pattern("N2", "U")),
        "E2",
    );
    Rule {
        name: "duration_weaken",
        lhs,
        rhs,
        side: SideCondition::NumberLeq {
            candidate: "N2".into(),
            bound: "N1".into(),
        },
        fresh: vec!["E2"],
    }
}

/// The quantity-derivation rule schema for one transfer verb. Verbs
/// that take no goal omit the feature in both patterns.
pub fn quantity_rule(verb: &str, takes_goal: bool) -> Rule {
    let mut inner = pat_index(
        Avm::new(Sort::Process)
            .with(Feature::Pred, Value::atom(verb))
            .with(Feature::Agent, Value::Pattern("A".into()))
            .with(Feature::Patient, Value::Pattern("X".into())),
        "E",
    );
    if takes_goal {
        inner.set(Feature::Goal, Value::Pattern("G".into()));
    }
    let lhs = pat_index(
        Avm::new(Sort::Event)
            .with(Feature::ComposedOf, Value::Avm(inner))
            .with(Feature::Duration, measure_pattern("N1", "U1")),
        "E1",
    );
    let patient = pat_index(
        Avm::new(Sort::Object)
            .with(Feature::ComposedOf, Value::Pattern("X".into()))
            .with(Feature::Quantity, measure_pattern("N2", "U2")),
        "X1",
    );
    let mut rhs = pat_index(
        Avm::new(Sort::Event)
            .with(Feature::Pred, Value::atom(verb))
            .with(Feature::Agent, Value::Pattern("A".into()))
            .with(Feature::Patient, Value::Avm(patient))
            .with(Feature::Duration, measure_pattern("N1", "U1")),
        "E1",
    );
    if takes_goal {
        rhs.set(Feature::Goal, Value::Pattern("G".into()));
    }
    Rule {
        name: "quantity_derive",
        lhs,
        rhs,
        side: SideCondition::RateProduct {
            result: "N2".into(),
            result_unit: "U2".into(),
            process: "E".into(),
            duration: "N1".into(),
            duration_unit: "U1".into(),
        },
        fresh: vec!["X1"],
    }
}

/// One quantity rule per transfer verb in the lexicon.
pub fn transfer_rules(lex: &Lexicon) -> Vec<Rule> {
    lex.entries()
        .filter(|e| e.category == VerbCategory::TransferVerb)
        .map(|e| quantity_rule(&e.pred, e.constant_roles.contains(&Feature::Goal)))
        .collect()
}

/// Weakens an event's duration to `n2` (which must satisfy
/// `0 ≤ n2 ≤ N1`). The result is a fresh event composed of the *same*
/// continuum.
pub fn duration_weaken(fact: &Avm, n2: Rational, kb: &Kb) -> Result<Avm, RuleError> {
    let mut seed = Bindings::default();
    seed.bind_number("N2", n2);
    duration_rule().apply(fact, kb, seed)
}

/// Derives the concrete-quantity re-description of an event composed of
/// a transfer process, using the KB's rate table. The result keeps the
/// root index: it describes the same event.
pub fn quantity_derive(fact: &Avm, kb: &Kb) -> Result<Avm, RuleError> {
    quantity_derive_traced(fact, kb).map(|(avm, _)| avm)
}

fn quantity_derive_traced(fact: &Avm, kb: &Kb) -> Result<(Avm, Bindings), RuleError> {
    let mut last = RuleError::Inapplicable(
        "composed-of filler is not a transfer process with a duration".into(),
    );
    for rule in transfer_rules(&Lexicon::builtin()) {
        match rule.apply_traced(fact, kb, Bindings::default()) {
            Ok(out) => return Ok(out),
            Err(RuleError::Inapplicable(_)) => {}
            Err(other) => last = other,
        }
    }
    Err(last)
}

/// Single-step existential weakenings: each result drops exactly one
/// cardinality, quantity, name, nominal pred, duration or distance,
/// keeping the original indices (a weaker description of the same
/// entities). Facts with nothing to drop yield the empty set.
pub fn existential_weaken(fact: &Avm) -> Vec<Avm> {
    let mut drops: Vec<(Vec<Feature>, Feature)> = Vec::new();
    collect_drops(fact, &mut Vec::new(), &mut drops);
    drops
        .into_iter()
        .map(|(path, feat)| drop_at(fact, &path, &feat))
        .collect()
}

fn collect_drops(node: &Avm, path: &mut Vec<Feature>, out: &mut Vec<(Vec<Feature>, Feature)>) {
    for feat in [
        Feature::Card,
        Feature::Quantity,
        Feature::Name,
        Feature::Duration,
        Feature::Distance,
    ] {
        if node.has(&feat) {
            out.push((path.clone(), feat));
        }
    }
    // Dropping a pred yields "something"; only nominal (material-sorted)
    // descriptions weaken this way.
    if node.sort.leq(Sort::Material) && node.has(&Feature::Pred) {
        out.push((path.clone(), Feature::Pred));
    }
    for (feat, v) in node.features() {
        if let Value::Avm(inner) = v {
            path.push(feat.clone());
            collect_drops(inner, path, out);
            path.pop();
        }
    }
}

fn drop_at(fact: &Avm, path: &[Feature], feat: &Feature) -> Avm {
    let mut out = fact.clone();
    match path.split_first() {
        None => {
            out.remove(feat);
        }
        Some((first, rest)) => {
            if let Some(Value::Avm(inner)) = fact.get(first) {
                out.set(first.clone(), Value::Avm(drop_at(inner, rest, feat)));
            }
        }
    }
    out
}

/// Rewrites between the two construals of a distance over an
/// `along`-path: the measure-phrase form (event composed of a motion
/// process over a path continuum, distance at the host) and the direct
/// form (event predicating over a delimited along-path). Both describe
/// the same event, so the root index is kept; inner indices freshen.
pub fn path_measure_equiv(fact: &Avm) -> Result<Avm, RuleError> {
    if fact.sort != Sort::Event {
        return Err(RuleError::Inapplicable("not an event".into()));
    }
    if !fact.has(&Feature::Distance) {
        return Err(RuleError::Inapplicable("no distance feature".into()));
    }

    if let Some(filler) = fact.get_avm(&Feature::ComposedOf) {
        // Measure-phrase form → direct delimited form.
        let path = filler
            .get_avm(&Feature::Path)
            .ok_or_else(|| RuleError::Inapplicable("inner continuum has no path".into()))?;
        if path.get_atom(&Feature::Pred) != Some("along") {
            return Err(RuleError::Inapplicable("path pred is not `along`".into()));
        }
        if path.sort != Sort::NonDelimitedPath || filler.sort != Sort::Process {
            return Err(RuleError::Inapplicable(
                "measure-phrase form needs a process over a path continuum".into(),
            ));
        }
        let mut delimited = path.clone();
        delimited.sort = Sort::DelimitedPath;
        delimited.index = Index::Var(fresh_var("p"));
        let mut out = Avm::new(Sort::Event);
        out.index = fact.index.clone();
        for (feat, v) in filler.features() {
            if *feat == Feature::Path {
                continue;
            }
            out.set(feat.clone(), v.clone());
        }
        out.set(Feature::Path, Value::Avm(delimited));
        for (feat, v) in fact.features() {
            if *feat == Feature::ComposedOf {
                continue;
            }
            out.set(feat.clone(), v.clone());
        }
        Ok(out)
    } else {
        // Direct delimited form → measure-phrase form.
        let path = fact
            .get_avm(&Feature::Path)
            .ok_or_else(|| RuleError::Inapplicable("no path feature".into()))?;
        if path.get_atom(&Feature::Pred) != Some("along") {
            return Err(RuleError::Inapplicable("path pred is not `along`".into()));
        }
        if path.sort != Sort::DelimitedPath {
            return Err(RuleError::Inapplicable(
                "direct form needs a delimited along-path".into(),
            ));
        }
        let mut continuum_path = path.clone();
        continuum_path.sort = Sort::NonDelimitedPath;
        continuum_path.index = Index::Var(fresh_var("p"));
        let mut inner = Avm::new(Sort::Process);
        inner.index = Index::Var(fresh_var("e"));
        for (feat, v) in fact.features() {
            if matches!(feat, Feature::Distance | Feature::Duration | Feature::Path) {
                continue;
            }
            inner.set(feat.clone(), v.clone());
        }
        inner.set(Feature::Path, Value::Avm(continuum_path));
        let mut out = Avm::new(Sort::Event);
        out.index = fact.index.clone();
        out.set(Feature::ComposedOf, Value::Avm(inner));
        for feat in [Feature::Distance, Feature::Duration] {
            if let Some(v) = fact.get(&feat) {
                out.set(feat, v.clone());
            }
        }
        Ok(out)
    }
}

/// One rule application in a witness derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessStep {
    pub rule: &'static str,
    pub bindings: Vec<(String, String)>,
}

impl fmt::Display for WitnessStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if !self.bindings.is_empty() {
            let parts: Vec<String> = self
                .bindings
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            write!(f, " [{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

/// A successful entailment: the sequence of rule applications that led
/// from a stored fact to a structure the query subsumes. Empty when the
/// query subsumes a stored fact directly.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Derivation {
    pub steps: Vec<WitnessStep>,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.steps.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}. {}", i + 1, step)?;
        }
        Ok(())
    }
}

/// Decides whether the query (a possibly partial description) is
/// subsumption-entailed by the KB within the default search depth,
/// returning the witness derivation on success.
pub fn entails(kb: &Kb, query: &Avm) -> Option<Derivation> {
    entails_with_depth(kb, query, DEFAULT_SEARCH_DEPTH)
}

/// [`entails`] with an explicit bound on rule applications.
pub fn entails_with_depth(kb: &Kb, query: &Avm, max_depth: usize) -> Option<Derivation> {
    let mut frontier: VecDeque<(Avm, Vec<WitnessStep>)> = VecDeque::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for fact in kb.facts() {
        if let Ok(key) = canonical_key(fact) {
            if seen.insert(key) {
                frontier.push_back((fact.clone(), Vec::new()));
            }
        }
    }
    while let Some((fact, steps)) = frontier.pop_front() {
        if subsumes(query, &fact) {
            return Some(Derivation { steps });
        }
        if steps.len() >= max_depth {
            continue;
        }
        for (derived, step) in expansions(&fact, kb, Some(query)) {
            let Ok(key) = canonical_key(&derived) else {
                continue;
            };
            if seen.insert(key) {
                let mut next = steps.clone();
                next.push(step);
                frontier.push_back((derived, next));
            }
        }
    }
    None
}

/// All single-rule expansions of a fact. When a query is given, the
/// duration rule is applied goal-directed with the query's duration;
/// without one it is skipped (its schema has infinitely many
/// instances).
fn expansions(fact: &Avm, kb: &Kb, query: Option<&Avm>) -> Vec<(Avm, WitnessStep)> {
    let mut out = Vec::new();
    if let Some(q) = query {
        if let (Some(Ok(want)), Some(Ok(have))) = (
            q.measure_at(&Feature::Duration),
            fact.measure_at(&Feature::Duration),
        ) {
            if let Ok(converted) = convert(&want, have.unit()) {
                let mut seed = Bindings::default();
                seed.bind_number("N2", converted.number());
                if let Ok((derived, binds)) = duration_rule().apply_traced(fact, kb, seed) {
                    out.push((
                        derived,
                        WitnessStep {
                            rule: "duration_weaken",
                            bindings: binds.summarize(),
                        },
                    ));
                }
            }
        }
    }
    if let Ok((derived, binds)) = quantity_derive_traced(fact, kb) {
        out.push((
            derived,
            WitnessStep {
                rule: "quantity_derive",
                bindings: binds.summarize(),
            },
        ));
    }
    for derived in existential_weaken(fact) {
        out.push((
            derived.clone(),
            WitnessStep {
                rule: "existential_weaken",
                bindings: describe_drop(fact, &derived),
            },
        ));
    }
    if let Ok(derived) = path_measure_equiv(fact) {
        let direction = if fact.has(&Feature::ComposedOf) {
            "to-direct-form"
        } else {
            "to-measure-phrase-form"
        };
        out.push((
            derived,
            WitnessStep {
                rule: "path_measure_equiv",
                bindings: vec![("direction".to_string(), direction.to_string())],
            },
        ));
    }
    out
}

fn describe_drop(before: &Avm, after: &Avm) -> Vec<(String, String)> {
    fn diff(a: &Avm, b: &Avm, path: &mut Vec<Feature>) -> Option<String> {
        for (feat, v) in a.features() {
            match b.get(feat) {
                None => {
                    path.push(feat.clone());
                    let s = crate::avm::path_to_string(path);
                    path.pop();
                    return Some(s);
                }
                Some(Value::Avm(bi)) => {
                    if let Value::Avm(ai) = v {
                        path.push(feat.clone());
                        if let Some(s) = diff(ai, bi, path) {
                            return Some(s);
                        }
                        path.pop();
                    }
                }
                _ => {}
            }
        }
        None
    }
    match diff(before, after, &mut Vec::new()) {
        Some(dropped) => vec![("dropped".to_string(), dropped)],
        None => Vec::new(),
    }
}

/// The BFS closure of a single fact under the four rules, using the
/// given goal durations for the duration rule. The fact itself comes
/// first; results are deduplicated up to index renaming.
pub fn derivation_closure(
    kb: &Kb,
    fact: &Avm,
    max_depth: usize,
    durations: &[Rational],
) -> Vec<Avm> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut frontier: VecDeque<(Avm, usize)> = VecDeque::new();
    if let Ok(key) = canonical_key(fact) {
        seen.insert(key);
    }
    out.push(fact.clone());
    frontier.push_back((fact.clone(), 0));
    while let Some((node, depth)) = frontier.pop_front() {
        if depth >= max_depth {
            continue;
        }
        let mut derived: Vec<Avm> = Vec::new();
        for &n2 in durations {
            if let Ok(d) = duration_weaken(&node, n2, kb) {
                derived.push(d);
            }
        }
        if let Ok(d) = quantity_derive(&node, kb) {
            derived.push(d);
        }
        derived.extend(existential_weaken(&node));
        if let Ok(d) = path_measure_equiv(&node) {
            derived.push(d);
        }
        for d in derived {
            let Ok(key) = canonical_key(&d) else { continue };
            if seen.insert(key) {
                out.push(d.clone());
                frontier.push_back((d, depth + 1));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_text;

    const POUR_FOR_30S: &str = "[index: e1, sort: event, composed-of: [index: e, sort: process, \
         pred: pour, agent: jack, patient: [index: x, sort: substance, pred: water], \
         goal: [index: xa, sort: object, pred: bucket, name: A]], \
         duration: [number: 30, unit: seconds]]";

    const POUR_FIVE_GALLONS: &str = "[index: e1, sort: event, pred: pour, agent: jack, \
         patient: [index: x1, sort: object, composed-of: [index: x, sort: substance, \
         pred: water], quantity: [number: 5, unit: gallons]], \
         goal: [index: xa, sort: object, pred: bucket, name: A], \
         duration: [number: 30, unit: seconds]]";

    const FILL_FIVE_BUCKETS: &str = "[index: e0, sort: event, pred: fill, agent: jack, \
         patient: [index: x0, sort: object, pred: bucket, card: 5], \
         duration: [number: 20, unit: minutes]]";

    const ALONG_FOR_TWO_MILES: &str = "[index: e1, sort: event, composed-of: [index: e, \
         sort: process, pred: run, agent: jack, path: [index: p, sort: non-delimited-path, \
         pred: along, ref-obj: [index: r, sort: object, pred: river]]], \
         distance: [number: 2, unit: miles]]";

    fn pour_kb() -> Kb {
        let mut kb = Kb::new();
        kb.add_fact(parse_text(POUR_FOR_30S).unwrap()).unwrap();
        kb.add_rate(
            RateFact::new("e", Rational::new(1, 6), Unit::Gallons, Unit::Seconds).unwrap(),
        )
        .unwrap();
        kb
    }

    fn rat(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn duration_weaken_shares_the_continuum() {
        let kb = pour_kb();
        let fact = parse_text(POUR_FOR_30S).unwrap();
        let weakened = duration_weaken(&fact, rat(25), &kb).unwrap();
        assert_eq!(weakened.sort, Sort::Event);
        assert_ne!(weakened.index, fact.index, "root index must freshen");
        assert_eq!(
            weakened.get_avm(&Feature::ComposedOf).unwrap().index,
            fact.get_avm(&Feature::ComposedOf).unwrap().index,
            "the continuum is shared"
        );
        let m = weakened.measure_at(&Feature::Duration).unwrap().unwrap();
        assert_eq!(m.number(), rat(25));
        assert_eq!(m.unit(), Unit::Seconds);
    }

    #[test]
    fn duration_weaken_boundary_gives_fresh_copy() {
        let kb = pour_kb();
        let fact = parse_text(POUR_FOR_30S).unwrap();
        let same = duration_weaken(&fact, rat(30), &kb).unwrap();
        assert_ne!(same.index, fact.index);
        assert!(alpha_eq(&same, &fact));
    }

    #[test]
    fn duration_weaken_rejects_larger_and_negative() {
        let kb = pour_kb();
        let fact = parse_text(POUR_FOR_30S).unwrap();
        assert!(matches!(
            duration_weaken(&fact, rat(35), &kb),
            Err(RuleError::SideConditionViolated(_))
        ));
        assert!(matches!(
            duration_weaken(&fact, rat(-1), &kb),
            Err(RuleError::SideConditionViolated(_))
        ));
    }

    #[test]
    fn duration_weaken_needs_composed_of() {
        let kb = pour_kb();
        let fact = parse_text(FILL_FIVE_BUCKETS).unwrap();
        assert!(matches!(
            duration_weaken(&fact, rat(10), &kb),
            Err(RuleError::Inapplicable(_))
        ));
    }

    #[test]
    fn quantity_derive_reproduces_the_five_gallon_description() {
        let kb = pour_kb();
        let fact = parse_text(POUR_FOR_30S).unwrap();
        let derived = quantity_derive(&fact, &kb).unwrap();
        let expected = parse_text(POUR_FIVE_GALLONS).unwrap();
        assert!(alpha_eq(&derived, &expected), "got {derived:?}");
        assert_eq!(derived.index, fact.index, "re-description of the same event");
        let qty = derived
            .get_avm(&Feature::Patient)
            .unwrap()
            .measure_at(&Feature::Quantity)
            .unwrap()
            .unwrap();
        assert_eq!(qty.number(), rat(5));
    }

    #[test]
    fn quantity_derive_scales_with_duration() {
        let kb = pour_kb();
        let fact = parse_text(&POUR_FOR_30S.replace("number: 30", "number: 15")).unwrap();
        let derived = quantity_derive(&fact, &kb).unwrap();
        let qty = derived
            .get_avm(&Feature::Patient)
            .unwrap()
            .measure_at(&Feature::Quantity)
            .unwrap()
            .unwrap();
        assert_eq!(qty.number(), Rational::new(5, 2));
    }

    #[test]
    fn quantity_derive_converts_time_units_on_lookup() {
        let mut kb = Kb::new();
        kb.add_fact(parse_text(POUR_FOR_30S).unwrap()).unwrap();
        kb.add_rate(RateFact::new("e", rat(10), Unit::Gallons, Unit::Minutes).unwrap())
            .unwrap();
        let derived = quantity_derive(&parse_text(POUR_FOR_30S).unwrap(), &kb).unwrap();
        let qty = derived
            .get_avm(&Feature::Patient)
            .unwrap()
            .measure_at(&Feature::Quantity)
            .unwrap()
            .unwrap();
        // 10 gallons/minute × 30 seconds = 5 gallons.
        assert_eq!(qty.number(), rat(5));
        assert_eq!(qty.unit(), Unit::Gallons);
    }

    #[test]
    fn quantity_derive_without_rate_is_rate_unknown() {
        let mut kb = Kb::new();
        kb.add_fact(parse_text(POUR_FOR_30S).unwrap()).unwrap();
        assert!(matches!(
            quantity_derive(&parse_text(POUR_FOR_30S).unwrap(), &kb),
            Err(RuleError::RateUnknown { .. })
        ));
    }

    #[test]
    fn quantity_derive_requires_a_transfer_process() {
        let kb = pour_kb();
        let fill_wrapped = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: process, pred: fill, \
             agent: jack, patient: [index: x, sort: substance, pred: bucket]], \
             duration: [number: 20, unit: minutes]]",
        )
        .unwrap();
        assert!(matches!(
            quantity_derive(&fill_wrapped, &kb),
            Err(RuleError::Inapplicable(_))
        ));
    }

    #[test]
    fn existential_weaken_drops_one_thing_at_a_time() {
        let fact = parse_text(FILL_FIVE_BUCKETS).unwrap();
        let weaker = existential_weaken(&fact);
        // card, patient pred, duration
        assert_eq!(weaker.len(), 3);
        assert!(weaker.iter().all(|w| w.index == fact.index));
        assert!(weaker
            .iter()
            .any(|w| !w.get_avm(&Feature::Patient).unwrap().has(&Feature::Card)));
        assert!(weaker
            .iter()
            .any(|w| !w.get_avm(&Feature::Patient).unwrap().has(&Feature::Pred)));
        assert!(weaker.iter().any(|w| !w.has(&Feature::Duration)));
    }

    #[test]
    fn existential_weaken_on_bare_roles_is_empty() {
        let fact =
            parse_text("[index: e, sort: process, pred: run, agent: jack]").unwrap();
        assert!(existential_weaken(&fact).is_empty());
    }

    #[test]
    fn path_measure_equiv_round_trips() {
        let fact = parse_text(ALONG_FOR_TWO_MILES).unwrap();
        let direct = path_measure_equiv(&fact).unwrap();
        assert_eq!(direct.index, fact.index);
        assert!(!direct.has(&Feature::ComposedOf));
        let path = direct.get_avm(&Feature::Path).unwrap();
        assert_eq!(path.sort, Sort::DelimitedPath);
        assert_eq!(path.get_atom(&Feature::Pred), Some("along"));
        let back = path_measure_equiv(&direct).unwrap();
        assert!(alpha_eq(&back, &fact));
    }

    #[test]
    fn path_measure_equiv_rejects_to_paths() {
        let fact = parse_text(
            "[index: e1, sort: event, pred: run, agent: jack, \
             path: [index: p1, sort: delimited-path, pred: to, \
             ref-obj: [index: b, sort: object, pred: bridge]], \
             distance: [number: 2, unit: miles]]",
        )
        .unwrap();
        assert!(matches!(
            path_measure_equiv(&fact),
            Err(RuleError::Inapplicable(_))
        ));
    }

    #[test]
    fn entails_weakened_duration() {
        let kb = pour_kb();
        let query = parse_text(&POUR_FOR_30S.replace("number: 30", "number: 20")).unwrap();
        let derivation = entails(&kb, &query).expect("entailed");
        assert_eq!(derivation.steps.len(), 1);
        assert_eq!(derivation.steps[0].rule, "duration_weaken");
    }

    #[test]
    fn entails_quantity_description() {
        let kb = pour_kb();
        let query = parse_text(POUR_FIVE_GALLONS).unwrap();
        let derivation = entails(&kb, &query).expect("entailed");
        assert!(derivation
            .steps
            .iter()
            .any(|s| s.rule == "quantity_derive"));
    }

    #[test]
    fn entails_rejects_longer_durations() {
        let kb = pour_kb();
        let query = parse_text(&POUR_FOR_30S.replace("number: 30", "number: 35")).unwrap();
        assert!(entails(&kb, &query).is_none());
    }

    #[test]
    fn entails_direct_match_has_empty_witness() {
        let kb = pour_kb();
        let query = parse_text(POUR_FOR_30S).unwrap();
        let derivation = entails(&kb, &query).unwrap();
        assert!(derivation.steps.is_empty());
    }

    #[test]
    fn witness_serializes_as_numbered_list() {
        let kb = pour_kb();
        let query = parse_text(POUR_FIVE_GALLONS).unwrap();
        let derivation = entails(&kb, &query).unwrap();
        let text = derivation.to_string();
        assert!(text.starts_with("1. quantity_derive ["), "got {text}");
        assert!(text.contains("E=e"));
    }

    #[test]
    fn weaken_then_derive_matches_rescaled_quantity() {
        let kb = pour_kb();
        let fact = parse_text(POUR_FOR_30S).unwrap();
        let full = quantity_derive(&fact, &kb).unwrap();
        let full_qty = full
            .get_avm(&Feature::Patient)
            .unwrap()
            .measure_at(&Feature::Quantity)
            .unwrap()
            .unwrap()
            .number();
        for n in 0..=30 {
            let weakened = duration_weaken(&fact, rat(n), &kb).unwrap();
            let derived = quantity_derive(&weakened, &kb).unwrap();
            let qty = derived
                .get_avm(&Feature::Patient)
                .unwrap()
                .measure_at(&Feature::Quantity)
                .unwrap()
                .unwrap()
                .number();
            assert_eq!(qty, Rational::new(1, 6) * rat(n));
            assert_eq!(qty, full_qty * rat(n) / rat(30));
        }
    }

    #[test]
    fn kb_rejects_incompatible_redescription() {
        let mut kb = Kb::new();
        kb.add_fact(parse_text(POUR_FOR_30S).unwrap()).unwrap();
        // Compatible re-description of e1: fine.
        kb.add_fact(parse_text(POUR_FIVE_GALLONS).unwrap()).unwrap();
        // Incompatible duration for e1: rejected.
        let conflicting =
            parse_text(&POUR_FOR_30S.replace("number: 30", "number: 7")).unwrap();
        assert!(matches!(
            kb.add_fact(conflicting),
            Err(KbError::IncompatibleFact { .. })
        ));
    }

    #[test]
    fn kb_rejects_non_ground_facts() {
        let mut kb = Kb::new();
        let mut avm = Avm::new(Sort::Event);
        avm.set(Feature::ComposedOf, Value::Pattern("E".into()));
        assert!(matches!(kb.add_fact(avm), Err(KbError::NotGround)));
    }

    #[test]
    fn closure_contains_the_expected_derivatives() {
        let kb = pour_kb();
        let fact = parse_text(POUR_FOR_30S).unwrap();
        let closure = derivation_closure(&kb, &fact, 2, &[rat(25), rat(20)]);
        let expected = parse_text(POUR_FIVE_GALLONS).unwrap();
        assert!(closure.iter().any(|c| alpha_eq(c, &expected)));
        assert!(closure.iter().any(|c| {
            c.measure_at(&Feature::Duration)
                .and_then(Result::ok)
                .is_some_and(|m| m.number() == rat(25))
        }));
    }
}
