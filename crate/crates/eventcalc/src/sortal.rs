//! Well-sortedness checking for eventuality descriptions.
//!
//! The checker enforces a closed set of named constraints over ground
//! structures:
//!
//! * **C1 composed-of-needs-continuum** — a `composed-of` filler must be
//!   a continuum, and its host must be the filler's delimited
//!   counterpart.
//! * **C2 process-incremental-continuum** — a process fills its pred's
//!   incremental role with a continuum (substance for transfer verbs,
//!   non-delimited path for motion verbs). The incremental participant
//!   is exactly the one that varies across the continuum, so a
//!   delimited filler makes process predication impossible.
//! * **C3 event-incremental-delimited** — an event carrying its pred
//!   directly must fill the incremental role with a delimited value.
//! * **C4 constant-roles-delimited** — agent, goal and ref-obj fillers
//!   stay constant across a continuum and must be delimited or atomic.
//! * **C5 path-pred-restriction** — a path's sort must satisfy its
//!   pred's restriction (`to` demands a delimited path; `towards` and
//!   `along` accept either subsort).
//! * **C6 distance-needs-delimited-or-measure** — distance sits either
//!   on an event predicating directly over a delimited path (bare
//!   distance phrase) or on an event with `composed-of` (distance
//!   measure phrase) whose inner path, if any, is itself a continuum;
//!   never on a process.
//! * **C7 fill-verbs-event-only** — filling predication is event
//!   predication: a filling process with a delimited patient is out, and
//!   filling over a continuum patient is only available as a
//!   measure-phrase core under `composed-of`.
//!
//! An unknown pred yields an `unknown-pred` diagnostic rather than an
//! error.

use crate::avm::{path_to_string, Avm, Feature, FeaturePath, Value};
use crate::sorts::Sort;
use crate::units::{Measure, Unit};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SortalError {
    #[error("expected an eventuality description, got sort {0}")]
    NotAnEventuality(Sort),
}

/// Lexical classes relevant to the sortal discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbCategory {
    TransferVerb,
    FillVerb,
    MotionVerb,
    Nominal,
    PathPred,
}

/// Per-pred sortal properties.
#[derive(Debug, Clone)]
pub struct LexicalEntry {
    pub pred: String,
    pub category: VerbCategory,
    /// The role whose filler varies across a process continuum.
    pub incremental_role: Option<Feature>,
    /// Roles whose fillers stay constant across the continuum.
    pub constant_roles: Vec<Feature>,
    /// For path preds: the sort the path must have.
    pub path_sort_restriction: Option<Sort>,
}

impl LexicalEntry {
    pub fn transfer(pred: &str, takes_goal: bool) -> LexicalEntry {
        let mut constant_roles = vec![Feature::Agent];
        if takes_goal {
            constant_roles.push(Feature::Goal);
        }
        LexicalEntry {
            pred: pred.to_string(),
            category: VerbCategory::TransferVerb,
            incremental_role: Some(Feature::Patient),
            constant_roles,
            path_sort_restriction: None,
        }
    }

    pub fn fill(pred: &str) -> LexicalEntry {
        LexicalEntry {
            pred: pred.to_string(),
            category: VerbCategory::FillVerb,
            incremental_role: None,
            constant_roles: vec![Feature::Agent],
            path_sort_restriction: None,
        }
    }

    pub fn motion(pred: &str) -> LexicalEntry {
        LexicalEntry {
            pred: pred.to_string(),
            category: VerbCategory::MotionVerb,
            incremental_role: Some(Feature::Path),
            constant_roles: vec![Feature::Agent],
            path_sort_restriction: None,
        }
    }

    pub fn path_pred(pred: &str, restriction: Sort) -> LexicalEntry {
        LexicalEntry {
            pred: pred.to_string(),
            category: VerbCategory::PathPred,
            incremental_role: None,
            constant_roles: vec![Feature::RefObj],
            path_sort_restriction: Some(restriction),
        }
    }

    pub fn nominal(pred: &str) -> LexicalEntry {
        LexicalEntry {
            pred: pred.to_string(),
            category: VerbCategory::Nominal,
            incremental_role: None,
            constant_roles: Vec::new(),
            path_sort_restriction: None,
        }
    }
}

/// The pred-keyed lexicon the checker consults.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexicalEntry>,
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    pub fn insert(&mut self, entry: LexicalEntry) {
        self.entries.insert(entry.pred.clone(), entry);
    }

    pub fn get(&self, pred: &str) -> Option<&LexicalEntry> {
        self.entries.get(pred)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexicalEntry> {
        self.entries.values()
    }

    /// The shipped pred set: the transfer verbs (pour, dribble, drip,
    /// leak, ooze, seep, siphon), fill, run, the three path preds, and
    /// the five nominals.
    pub fn builtin() -> Lexicon {
        let mut lex = Lexicon::new();
        for pred in ["pour", "dribble", "drip", "siphon"] {
            lex.insert(LexicalEntry::transfer(pred, true));
        }
        // leak/ooze/seep take no goal; the transfer rule patterns omit
        // the feature for them.
        for pred in ["leak", "ooze", "seep"] {
            lex.insert(LexicalEntry::transfer(pred, false));
        }
        lex.insert(LexicalEntry::fill("fill"));
        lex.insert(LexicalEntry::motion("run"));
        lex.insert(LexicalEntry::path_pred("to", Sort::DelimitedPath));
        lex.insert(LexicalEntry::path_pred("towards", Sort::Path));
        lex.insert(LexicalEntry::path_pred("along", Sort::Path));
        for pred in ["water", "bucket", "bridge", "river", "shore"] {
            lex.insert(LexicalEntry::nominal(pred));
        }
        lex
    }
}

/// The closed constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// C1
    ComposedOfNeedsContinuum,
    /// C2
    ProcessIncrementalContinuum,
    /// C3
    EventIncrementalDelimited,
    /// C4
    ConstantRolesDelimited,
    /// C5
    PathPredRestriction,
    /// C6
    DistanceNeedsDelimitedOrMeasure,
    /// C7
    FillVerbsEventOnly,
    UnknownPred,
}

impl Constraint {
    pub fn name(self) -> &'static str {
        match self {
            Constraint::ComposedOfNeedsContinuum => "composed-of-needs-continuum",
            Constraint::ProcessIncrementalContinuum => "process-incremental-continuum",
            Constraint::EventIncrementalDelimited => "event-incremental-delimited",
            Constraint::ConstantRolesDelimited => "constant-roles-delimited",
            Constraint::PathPredRestriction => "path-pred-restriction",
            Constraint::DistanceNeedsDelimitedOrMeasure => "distance-needs-delimited-or-measure",
            Constraint::FillVerbsEventOnly => "fill-verbs-event-only",
            Constraint::UnknownPred => "unknown-pred",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One named violation, localized by a feature path into the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub constraint: Constraint,
    pub path: FeaturePath,
    pub message: String,
    pub offending: (Sort, Sort),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}: {}",
            self.constraint,
            path_to_string(&self.path),
            self.message
        )
    }
}

fn value_sort(v: &Value) -> Sort {
    match v {
        Value::Avm(a) => a.sort,
        Value::Atom(_) => Sort::AtomSort,
        Value::Number(_) => Sort::NumberSort,
        Value::Pattern(_) => Sort::Top,
    }
}

fn value_is_delimited_or_atomic(v: &Value) -> bool {
    match v {
        Value::Atom(_) => true,
        Value::Avm(a) => a.sort.is_delimited() || a.sort == Sort::AtomSort,
        _ => false,
    }
}

/// Checks a ground description against the closed constraint set and
/// returns every violation found.
pub fn check(a: &Avm, lex: &Lexicon) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk(a, lex, &mut Vec::new(), false, &mut out);
    out
}

fn walk(
    node: &Avm,
    lex: &Lexicon,
    path: &mut FeaturePath,
    under_composed_of: bool,
    out: &mut Vec<Diagnostic>,
) {
    let entry = node
        .get_atom(&Feature::Pred)
        .and_then(|pred| lex.get(pred));

    if let Some(pred) = node.get(&Feature::Pred) {
        let unknown = match pred {
            Value::Atom(p) => lex.get(p).is_none(),
            _ => true,
        };
        if unknown {
            out.push(Diagnostic {
                constraint: Constraint::UnknownPred,
                path: path.clone(),
                message: format!("pred `{}` is not in the lexicon", pred.brief()),
                offending: (node.sort, Sort::Top),
            });
        }
    }

    // C1: composed-of points at a continuum and the host realizes it.
    if let Some(filler) = node.get(&Feature::ComposedOf) {
        path.push(Feature::ComposedOf);
        let fsort = value_sort(filler);
        if !fsort.is_continuum() {
            out.push(Diagnostic {
                constraint: Constraint::ComposedOfNeedsContinuum,
                path: path.clone(),
                message: format!(
                    "composed-of must point at a continuum (a process is required \
                     where sort {fsort} was found)"
                ),
                offending: (fsort, node.sort),
            });
        } else {
            let counterpart = fsort.delimited_counterpart().expect("continuum");
            if node.sort != counterpart {
                out.push(Diagnostic {
                    constraint: Constraint::ComposedOfNeedsContinuum,
                    path: path.clone(),
                    message: format!(
                        "a {fsort} continuum is realized by sort {counterpart}, \
                         not {}",
                        node.sort
                    ),
                    offending: (node.sort, fsort),
                });
            }
        }
        path.pop();
    }

    // C2/C3: the incremental thematic relation discipline.
    if let Some(e) = entry {
        if let Some(role) = &e.incremental_role {
            if node.sort == Sort::Process {
                if let Some(filler) = node.get(role) {
                    let fsort = value_sort(filler);
                    if !fsort.is_continuum() {
                        path.push(role.clone());
                        out.push(Diagnostic {
                            constraint: Constraint::ProcessIncrementalContinuum,
                            path: path.clone(),
                            message: format!(
                                "process predication over `{}` needs a continuum {role} \
                                 (e.g. {}); found sort {fsort}",
                                e.pred,
                                expected_continuum(role)
                            ),
                            offending: (fsort, expected_continuum(role)),
                        });
                        path.pop();
                    }
                }
            } else if node.sort == Sort::Event {
                match node.get(role) {
                    Some(filler) => {
                        let fsort = value_sort(filler);
                        if !fsort.is_delimited() {
                            path.push(role.clone());
                            out.push(Diagnostic {
                                constraint: Constraint::EventIncrementalDelimited,
                                path: path.clone(),
                                message: format!(
                                    "direct event predication over `{}` needs a delimited \
                                     {role}; found sort {fsort}",
                                    e.pred
                                ),
                                offending: (fsort, expected_delimited(role)),
                            });
                            path.pop();
                        }
                    }
                    None => {
                        out.push(Diagnostic {
                            constraint: Constraint::EventIncrementalDelimited,
                            path: path.clone(),
                            message: format!(
                                "direct event predication over `{}` needs a delimited \
                                 {role}, but none is present",
                                e.pred
                            ),
                            offending: (node.sort, expected_delimited(role)),
                        });
                    }
                }
            }
        }
    }

    // C4: constant roles stay delimited or atomic.
    for role in [Feature::Agent, Feature::Goal, Feature::RefObj] {
        if let Some(filler) = node.get(&role) {
            if !value_is_delimited_or_atomic(filler) {
                path.push(role.clone());
                out.push(Diagnostic {
                    constraint: Constraint::ConstantRolesDelimited,
                    path: path.clone(),
                    message: format!(
                        "{role} stays constant across a continuum and must be \
                         delimited or atomic; found sort {}",
                        value_sort(filler)
                    ),
                    offending: (value_sort(filler), Sort::Object),
                });
                path.pop();
            }
        }
    }

    // C5: path sorts satisfy their pred's restriction.
    if node.sort.leq(Sort::Path) && node.sort != Sort::Bottom {
        if let Some(e) = entry {
            if let Some(restriction) = e.path_sort_restriction {
                if !node.sort.leq(restriction) {
                    out.push(Diagnostic {
                        constraint: Constraint::PathPredRestriction,
                        path: path.clone(),
                        message: format!(
                            "`{}` requires a path of sort {restriction}; found {}",
                            e.pred, node.sort
                        ),
                        offending: (node.sort, restriction),
                    });
                }
            }
        }
    }

    // C6: distance predication.
    if node.has(&Feature::Distance) {
        path.push(Feature::Distance);
        if node.sort.is_continuum() {
            out.push(Diagnostic {
                constraint: Constraint::DistanceNeedsDelimitedOrMeasure,
                path: path.clone(),
                message: format!("distance may never sit on a continuum (sort {})", node.sort),
                offending: (node.sort, Sort::Event),
            });
        } else if let Some(filler) = node.get_avm(&Feature::ComposedOf) {
            if let Some(inner_path) = filler.get_avm(&Feature::Path) {
                if inner_path.sort.leq(Sort::DelimitedPath) {
                    out.push(Diagnostic {
                        constraint: Constraint::DistanceNeedsDelimitedOrMeasure,
                        path: path.clone(),
                        message: "a distance measure phrase requires the inner path to be \
                                  a continuum, not a delimited path"
                            .to_string(),
                        offending: (inner_path.sort, Sort::NonDelimitedPath),
                    });
                }
            }
        } else if node.has(&Feature::Pred) {
            let delimited_path = node
                .get_avm(&Feature::Path)
                .is_some_and(|p| p.sort.leq(Sort::DelimitedPath));
            if !delimited_path {
                let found = node
                    .get_avm(&Feature::Path)
                    .map(|p| p.sort)
                    .unwrap_or(Sort::Bottom);
                out.push(Diagnostic {
                    constraint: Constraint::DistanceNeedsDelimitedOrMeasure,
                    path: path.clone(),
                    message: "bare distance predication is restricted to delimited paths"
                        .to_string(),
                    offending: (found, Sort::DelimitedPath),
                });
            }
        } else {
            out.push(Diagnostic {
                constraint: Constraint::DistanceNeedsDelimitedOrMeasure,
                path: path.clone(),
                message: "distance needs direct predication over a delimited path or a \
                          measure-phrase construal"
                    .to_string(),
                offending: (node.sort, Sort::Event),
            });
        }
        path.pop();
    }

    // C7: filling is event predication.
    if let Some(e) = entry {
        if e.category == VerbCategory::FillVerb {
            let patient_sort = node.get(&Feature::Patient).map(value_sort);
            if node.sort == Sort::Process {
                if let Some(ps) = patient_sort {
                    if ps.is_delimited() {
                        path.push(Feature::Patient);
                        out.push(Diagnostic {
                            constraint: Constraint::FillVerbsEventOnly,
                            path: path.clone(),
                            message: format!(
                                "`{}` sets a terminal point per patient; a filling process \
                                 cannot take a delimited patient (sort {ps})",
                                e.pred
                            ),
                            offending: (ps, Sort::Substance),
                        });
                        path.pop();
                    } else if !under_composed_of {
                        out.push(fill_needs_composed_of(e, node.sort, path));
                    }
                } else if !under_composed_of {
                    out.push(fill_needs_composed_of(e, node.sort, path));
                }
            } else if node.sort == Sort::Event {
                if let Some(ps) = patient_sort {
                    if ps.is_continuum() {
                        path.push(Feature::Patient);
                        out.push(Diagnostic {
                            constraint: Constraint::FillVerbsEventOnly,
                            path: path.clone(),
                            message: format!(
                                "a `{}` event needs a delimited patient; a continuum \
                                 patient (sort {ps}) is only available as a measure-phrase \
                                 core under composed-of",
                                e.pred
                            ),
                            offending: (ps, Sort::Object),
                        });
                        path.pop();
                    }
                }
            }
        }
    }

    for (feat, v) in node.features() {
        if let Value::Avm(inner) = v {
            path.push(feat.clone());
            walk(inner, lex, path, *feat == Feature::ComposedOf, out);
            path.pop();
        }
    }
}

fn fill_needs_composed_of(e: &LexicalEntry, sort: Sort, path: &FeaturePath) -> Diagnostic {
    Diagnostic {
        constraint: Constraint::FillVerbsEventOnly,
        path: path.clone(),
        message: format!(
            "a `{}` process is only available as a measure-phrase core under composed-of",
            e.pred
        ),
        offending: (sort, Sort::Event),
    }
}

fn expected_continuum(role: &Feature) -> Sort {
    match role {
        Feature::Path => Sort::NonDelimitedPath,
        _ => Sort::Substance,
    }
}

fn expected_delimited(role: &Feature) -> Sort {
    match role {
        Feature::Path => Sort::DelimitedPath,
        _ => Sort::Object,
    }
}

/// Which adverbials a pred-bearing core licenses, computed structurally
/// by building the candidate construals and checking them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdverbialProfile {
    /// A temporal for-phrase is available: the core can stand as the
    /// continuum filler of a measure phrase.
    pub for_temporal: bool,
    /// An in-phrase is available: direct event predication works.
    pub in_temporal: bool,
    /// A distance for-phrase is available (motion preds whose path
    /// tolerates a continuum construal).
    pub for_distance: bool,
}

/// The sort a pred-bearing core takes when it serves as the continuum
/// filler of a measure phrase. Motion predication is slaved to the
/// path's lexically fixed sort (a delimited `to`-path keeps forcing
/// event predication even here, which is exactly what makes
/// *ran-to-the-bridge-for-thirty-seconds* clash); everything else
/// demotes to a process.
pub fn measure_core(core: &Avm, lex: &Lexicon) -> Avm {
    let mut out = core.clone();
    let is_motion = core
        .get_atom(&Feature::Pred)
        .and_then(|p| lex.get(p))
        .is_some_and(|e| e.category == VerbCategory::MotionVerb);
    out.sort = if is_motion {
        match core.get_avm(&Feature::Path) {
            Some(p) if p.sort.leq(Sort::DelimitedPath) => Sort::Event,
            _ => Sort::Process,
        }
    } else {
        Sort::Process
    };
    out
}

/// The core under direct (restrictive) event predication.
pub fn event_core(core: &Avm) -> Avm {
    let mut out = core.clone();
    out.sort = Sort::Event;
    out
}

/// Predication sort with no adverbial pressure: a continuum incremental
/// filler (or, for fill verbs, patient) yields a process, a delimited
/// one an event.
pub fn natural_core(core: &Avm, lex: &Lexicon) -> Avm {
    let mut out = core.clone();
    let entry = core.get_atom(&Feature::Pred).and_then(|p| lex.get(p));
    let relevant = entry.and_then(|e| match e.category {
        VerbCategory::FillVerb => Some(Feature::Patient),
        _ => e.incremental_role.clone(),
    });
    out.sort = match relevant.and_then(|role| core.get(&role).map(value_sort)) {
        Some(s) if s.is_continuum() => Sort::Process,
        Some(_) => Sort::Event,
        None => match entry.map(|e| e.category) {
            Some(VerbCategory::FillVerb) => Sort::Event,
            _ => Sort::Process,
        },
    };
    out
}

/// Computes the adverbial profile of a pred-bearing core (an
/// eventuality description without duration or distance features).
pub fn adverbial_compatibility(
    core: &Avm,
    lex: &Lexicon,
) -> Result<AdverbialProfile, SortalError> {
    if !core.sort.leq(Sort::Eventuality) {
        return Err(SortalError::NotAnEventuality(core.sort));
    }
    let second = Measure::from_integer(1, Unit::Seconds).expect("non-negative");
    let mile = Measure::from_integer(1, Unit::Miles).expect("non-negative");

    let wrapped = wrap_in_measure_phrase(core, lex, Feature::Duration, &second);
    let for_temporal = check(&wrapped, lex).is_empty();

    let mut direct = event_core(core);
    direct.set(Feature::Duration, Value::Avm(Avm::measure_record(&second)));
    let in_temporal = check(&direct, lex).is_empty();

    let is_motion = core
        .get_atom(&Feature::Pred)
        .and_then(|p| lex.get(p))
        .is_some_and(|e| e.category == VerbCategory::MotionVerb);
    let for_distance = is_motion && {
        let wrapped = wrap_in_measure_phrase(core, lex, Feature::Distance, &mile);
        check(&wrapped, lex).is_empty()
    };

    Ok(AdverbialProfile {
        for_temporal,
        in_temporal,
        for_distance,
    })
}

/// Builds `[sort: event, composed-of: <core construal>, <feat>: <m>]`.
pub fn wrap_in_measure_phrase(
    core: &Avm,
    lex: &Lexicon,
    measure_feature: Feature,
    m: &Measure,
) -> Avm {
    Avm::new(Sort::Event)
        .with(Feature::ComposedOf, Value::Avm(measure_core(core, lex)))
        .with(measure_feature, Value::Avm(Avm::measure_record(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::parse_text;

    fn lex() -> Lexicon {
        Lexicon::builtin()
    }

    const POUR_FOR_30S: &str = "[index: e1, sort: event, composed-of: [index: e, sort: process, \
         pred: pour, agent: jack, patient: [index: x, sort: substance, pred: water], \
         goal: [index: xa, sort: object, pred: bucket, name: A]], \
         duration: [number: 30, unit: seconds]]";

    const RAN_TO_FOR_30S: &str = "[index: e1, sort: event, composed-of: [index: e, sort: event, \
         pred: run, agent: jack, path: [index: p, sort: delimited-path, pred: to, \
         ref-obj: [index: b, sort: object, pred: bridge]]], \
         duration: [number: 30, unit: seconds]]";

    #[test]
    fn pour_for_thirty_seconds_is_well_sorted() {
        let a = parse_text(POUR_FOR_30S).unwrap();
        assert_eq!(check(&a, &lex()), Vec::new());
    }

    #[test]
    fn ran_to_the_bridge_for_thirty_seconds_violates_c1() {
        let a = parse_text(RAN_TO_FOR_30S).unwrap();
        let diags = check(&a, &lex());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].constraint, Constraint::ComposedOfNeedsContinuum);
        assert_eq!(diags[0].path, vec![Feature::ComposedOf]);
        assert_eq!(diags[0].offending.0, Sort::Event);
    }

    #[test]
    fn process_with_quantized_patient_violates_c2() {
        let a = parse_text(
            "[index: e, sort: process, pred: pour, agent: jack, \
             patient: [index: x1, sort: object, composed-of: [index: x, sort: substance, \
             pred: water], quantity: [number: 5, unit: gallons]], \
             goal: [index: xa, sort: object, pred: bucket, name: A]]",
        )
        .unwrap();
        let diags = check(&a, &lex());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].constraint, Constraint::ProcessIncrementalContinuum);
        assert_eq!(diags[0].path, vec![Feature::Patient]);
    }

    #[test]
    fn ran_to_the_bridge_for_two_miles_violates_c1_and_c6() {
        let a = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: event, pred: run, \
             agent: jack, path: [index: p, sort: delimited-path, pred: to, \
             ref-obj: [index: b, sort: object, pred: bridge]]], \
             distance: [number: 2, unit: miles]]",
        )
        .unwrap();
        let diags = check(&a, &lex());
        let constraints: Vec<_> = diags.iter().map(|d| d.constraint).collect();
        assert!(constraints.contains(&Constraint::ComposedOfNeedsContinuum));
        assert!(constraints.contains(&Constraint::DistanceNeedsDelimitedOrMeasure));
    }

    #[test]
    fn corrected_inner_process_still_violates_c5() {
        // Same starred sentence with the inner sort flipped to process:
        // now the clash lands on the to-path instead.
        let a = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: process, pred: run, \
             agent: jack, path: [index: p, sort: non-delimited-path, pred: to, \
             ref-obj: [index: b, sort: object, pred: bridge]]], \
             distance: [number: 2, unit: miles]]",
        )
        .unwrap();
        let diags = check(&a, &lex());
        assert!(diags
            .iter()
            .any(|d| d.constraint == Constraint::PathPredRestriction));
    }

    #[test]
    fn fill_event_with_bare_plural_patient_violates_c7() {
        let a = parse_text(
            "[index: e0, sort: event, pred: fill, agent: jack, \
             patient: [index: x, sort: substance, pred: bucket], \
             duration: [number: 20, unit: minutes]]",
        )
        .unwrap();
        let diags = check(&a, &lex());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].constraint, Constraint::FillVerbsEventOnly);
        assert_eq!(diags[0].path, vec![Feature::Patient]);
    }

    #[test]
    fn fill_process_with_delimited_patient_violates_c7() {
        let a = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: process, pred: fill, \
             agent: jack, patient: [index: x, sort: object, pred: bucket, card: 5]], \
             duration: [number: 20, unit: minutes]]",
        )
        .unwrap();
        let diags = check(&a, &lex());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].constraint, Constraint::FillVerbsEventOnly);
    }

    #[test]
    fn fill_process_over_bare_plural_is_fine_under_composed_of() {
        let a = parse_text(
            "[index: e1, sort: event, composed-of: [index: e, sort: process, pred: fill, \
             agent: jack, patient: [index: x, sort: substance, pred: bucket]], \
             duration: [number: 20, unit: minutes]]",
        )
        .unwrap();
        assert_eq!(check(&a, &lex()), Vec::new());
    }

    #[test]
    fn unknown_pred_is_a_diagnostic_not_a_crash() {
        let a = parse_text("[index: e, sort: process, pred: zorp, agent: jack]").unwrap();
        let diags = check(&a, &lex());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].constraint, Constraint::UnknownPred);
    }

    #[test]
    fn constant_role_must_stay_delimited() {
        let a = parse_text(
            "[index: e, sort: process, pred: pour, agent: jack, \
             patient: [index: x, sort: substance, pred: water], \
             goal: [index: g, sort: substance, pred: water]]",
        )
        .unwrap();
        let diags = check(&a, &lex());
        assert!(diags
            .iter()
            .any(|d| d.constraint == Constraint::ConstantRolesDelimited
                && d.path == vec![Feature::Goal]));
    }

    #[test]
    fn event_without_its_incremental_role_is_flagged() {
        let a = parse_text("[index: e, sort: event, pred: run, agent: jack, \
             duration: [number: 30, unit: seconds]]")
            .unwrap();
        let diags = check(&a, &lex());
        assert!(diags
            .iter()
            .any(|d| d.constraint == Constraint::EventIncrementalDelimited));
    }

    #[test]
    fn diagnostics_serialize_one_per_line() {
        let a = parse_text(RAN_TO_FOR_30S).unwrap();
        let line = check(&a, &lex())[0].to_string();
        assert!(line.starts_with("composed-of-needs-continuum at composed-of: "));
    }

    #[test]
    fn diagnostic_paths_address_existing_nodes() {
        for text in [
            RAN_TO_FOR_30S,
            "[index: e, sort: process, pred: pour, agent: jack, \
             patient: [index: x1, sort: object, pred: water]]",
        ] {
            let a = parse_text(text).unwrap();
            for d in check(&a, &lex()) {
                assert!(a.get_path(&d.path).is_some(), "dangling path in {d}");
            }
        }
    }

    #[test]
    fn adverbial_profile_for_pour_with_substance_patient() {
        let core = parse_text(
            "[index: e, sort: process, pred: pour, agent: jack, \
             patient: [index: x, sort: substance, pred: water], \
             goal: [index: xa, sort: object, pred: bucket, name: A]]",
        )
        .unwrap();
        let profile = adverbial_compatibility(&core, &lex()).unwrap();
        assert!(profile.for_temporal);
        assert!(!profile.in_temporal);
        assert!(!profile.for_distance);
    }

    #[test]
    fn adverbial_profile_for_pour_with_quantity_patient() {
        let core = parse_text(
            "[index: e, sort: event, pred: pour, agent: jack, \
             patient: [index: x1, sort: object, composed-of: [index: x, sort: substance, \
             pred: water], quantity: [number: 5, unit: gallons]], \
             goal: [index: xa, sort: object, pred: bucket, name: A]]",
        )
        .unwrap();
        let profile = adverbial_compatibility(&core, &lex()).unwrap();
        assert!(!profile.for_temporal);
        assert!(profile.in_temporal);
    }

    #[test]
    fn adverbial_profile_for_fill() {
        let counted = parse_text(
            "[index: e, sort: event, pred: fill, agent: jack, \
             patient: [index: x, sort: object, pred: bucket, card: 5]]",
        )
        .unwrap();
        let profile = adverbial_compatibility(&counted, &lex()).unwrap();
        assert!(!profile.for_temporal);
        assert!(profile.in_temporal);

        let bare = parse_text(
            "[index: e, sort: process, pred: fill, agent: jack, \
             patient: [index: x, sort: substance, pred: bucket]]",
        )
        .unwrap();
        let profile = adverbial_compatibility(&bare, &lex()).unwrap();
        assert!(profile.for_temporal);
        assert!(!profile.in_temporal);
    }

    #[test]
    fn adverbial_profile_for_motion() {
        let towards = parse_text(
            "[index: e, sort: process, pred: run, agent: jack, \
             path: [index: p, sort: non-delimited-path, pred: towards, \
             ref-obj: [index: b, sort: object, pred: bridge]]]",
        )
        .unwrap();
        let profile = adverbial_compatibility(&towards, &lex()).unwrap();
        assert!(profile.for_temporal);
        assert!(!profile.in_temporal);
        assert!(profile.for_distance);

        let to = parse_text(
            "[index: e, sort: event, pred: run, agent: jack, \
             path: [index: p, sort: delimited-path, pred: to, \
             ref-obj: [index: b, sort: object, pred: bridge]]]",
        )
        .unwrap();
        let profile = adverbial_compatibility(&to, &lex()).unwrap();
        assert!(!profile.for_temporal);
        assert!(profile.in_temporal);
        assert!(!profile.for_distance);
    }

    #[test]
    fn non_eventuality_input_is_an_error() {
        let a = parse_text("[index: x, sort: object, pred: bucket]").unwrap();
        assert!(adverbial_compatibility(&a, &lex()).is_err());
    }
}
