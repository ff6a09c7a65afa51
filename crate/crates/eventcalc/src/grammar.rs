//! The bidirectional controlled-English fragment.
//!
//! [`Fragment::parse_sentence`] maps a sentence onto the structure its
//! adverbials and noun phrases determine compositionally: temporal and
//! spatial *for*-phrases are measure phrases, so they wrap the
//! pred-bearing core in `composed-of`; *in*-phrases restrict an event
//! directly; `N units of X` builds an object composed of a substance
//! with a quantity; numeral-plus-plural builds `card`; `to`, `towards`
//! and `along` build path structures of their lexically required sorts.
//! The result is then checked for well-sortedness, so a sentence that
//! parses fine syntactically can still come back with diagnostics.
//!
//! [`Fragment::realize`] is the inverse: a deterministic canonical
//! sentence per well-sorted structure (subject, verb, measures, NP, PP,
//! adverbial), with the adverbial head chosen from structure alone —
//! `composed-of` plus a measure realizes *for*, a direct duration
//! realizes *in*, a direct distance realizes as a bare distance phrase.
//!
//! The fragment is deliberately non-recursive; verbs realize in the
//! simple past and only past forms parse.

use crate::avm::{path_to_string, Avm, Feature, Index, Value};
use crate::calculus::{derivation_closure, Kb, DEFAULT_SEARCH_DEPTH};
use crate::sortal::{
    check, event_core, measure_core, natural_core, wrap_in_measure_phrase, Diagnostic,
    LexicalEntry, Lexicon as SortalLexicon, VerbCategory,
};
use crate::sorts::Sort;
use crate::units::{Dimension, Measure, Rational, Unit};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// The shipped lexicon file. One entry per line:
/// `<surface> <class> <pred-atom> [<extra>]`.
pub const DEFAULT_LEXICON: &str = "\
# surface      class      pred      extra
jack           name       jack
poured         verb-past  pour      transfer-verb goal
dribbled       verb-past  dribble   transfer-verb goal
dripped        verb-past  drip      transfer-verb goal
leaked         verb-past  leak      transfer-verb
oozed          verb-past  ooze      transfer-verb
seeped         verb-past  seep      transfer-verb
siphoned       verb-past  siphon    transfer-verb goal
filled         verb-past  fill      fill-verb
ran            verb-past  run       motion-verb
water          noun       water     substance
bucket         noun       bucket    object
bridge         noun       bridge    object
river          noun       river     object
shore          noun       shore     object
seconds        unit       seconds   time
minutes        unit       minutes   time
gallons        unit       gallons   volume
miles          unit       miles     distance
yards          unit       yards     distance
to             prep       to        delimited-path
towards        prep       towards   path
along          prep       along     path
into           prep       into      goal
for            prep       for       measure
in             prep       in        restrictive
of             prep       of        partitive
from           prep       from      proximal
the            det        the
a              det        a
something      misc       something
";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LexiconError {
    #[error("lexicon line {line}: {message}")]
    Bad { line: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parse error at token {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SentenceError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("sentence is ill-sorted: {}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllSorted {
        avm: Box<Avm>,
        diagnostics: Vec<Diagnostic>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizeError {
    #[error("structure lies outside the fragment at: {}", .paths.join(", "))]
    Unrealizable { paths: Vec<String> },
    #[error("structure contains pattern variables")]
    NotGround,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParaphraseError {
    #[error("index {0} is not bound in the knowledge base")]
    UnboundIndex(String),
}

/// Token classes of the closed lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Name,
    VerbPast,
    Noun,
    PluralNoun,
    CardNumeral,
    Number,
    Unit,
    Prep,
    Det,
    Misc,
    Comma,
}

/// A classified surface token.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub surface: String,
    pub class: TokenClass,
}

#[derive(Debug, Clone, PartialEq)]
struct VerbEntry {
    pred: String,
    category: VerbCategory,
    takes_goal: bool,
    surface: String,
}

#[derive(Debug, Clone, PartialEq)]
struct NounEntry {
    pred: String,
    mass: bool,
    surface: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PrepKind {
    PathTo,
    PathTowards,
    PathAlong,
    Into,
    For,
    In,
    Of,
    From,
}

/// The controlled fragment: surface lexicon plus the sortal lexicon
/// derived from it. Immutable after load.
#[derive(Debug, Clone)]
pub struct Fragment {
    names: BTreeMap<String, String>,
    verbs: BTreeMap<String, VerbEntry>,
    nouns: BTreeMap<String, NounEntry>,
    plurals: BTreeMap<String, String>,
    units: BTreeMap<String, Unit>,
    preps: BTreeMap<String, PrepKind>,
    by_pred_verb: BTreeMap<String, VerbEntry>,
    by_pred_noun: BTreeMap<String, NounEntry>,
    sortal: SortalLexicon,
}

impl Fragment {
    /// The fragment over the shipped lexicon.
    pub fn builtin() -> Fragment {
        Fragment::from_lexicon_text(DEFAULT_LEXICON).expect("shipped lexicon parses")
    }

    /// Loads a lexicon file: `<surface> <class> <pred-atom> [<extra>]`
    /// per line, `#` comments and blank lines skipped.
    pub fn from_lexicon_text(text: &str) -> Result<Fragment, LexiconError> {
        let mut f = Fragment {
            names: BTreeMap::new(),
            verbs: BTreeMap::new(),
            nouns: BTreeMap::new(),
            plurals: BTreeMap::new(),
            units: BTreeMap::new(),
            preps: BTreeMap::new(),
            by_pred_verb: BTreeMap::new(),
            by_pred_noun: BTreeMap::new(),
            sortal: SortalLexicon::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: &str| LexiconError::Bad {
                line: lineno,
                message: message.to_string(),
            };
            let mut parts = line.split_whitespace();
            let surface = parts.next().ok_or_else(|| bad("missing surface"))?.to_string();
            let class = parts.next().ok_or_else(|| bad("missing class"))?;
            let pred = parts.next().unwrap_or(&surface).to_string();
            let extra: Vec<&str> = parts.collect();
            match class {
                "name" => {
                    f.names.insert(surface, pred);
                }
                "verb-past" => {
                    let category = match extra.first().copied() {
                        Some("transfer-verb") => VerbCategory::TransferVerb,
                        Some("fill-verb") => VerbCategory::FillVerb,
                        Some("motion-verb") => VerbCategory::MotionVerb,
                        other => {
                            return Err(bad(&format!(
                                "verb needs a category (transfer-verb, fill-verb or \
                                 motion-verb), got {other:?}"
                            )))
                        }
                    };
                    let takes_goal = extra.contains(&"goal");
                    let entry = VerbEntry {
                        pred: pred.clone(),
                        category,
                        takes_goal,
                        surface: surface.clone(),
                    };
                    f.sortal.insert(match category {
                        VerbCategory::TransferVerb => LexicalEntry::transfer(&pred, takes_goal),
                        VerbCategory::FillVerb => LexicalEntry::fill(&pred),
                        _ => LexicalEntry::motion(&pred),
                    });
                    f.by_pred_verb.insert(pred, entry.clone());
                    f.verbs.insert(surface, entry);
                }
                "noun" => {
                    let mass = match extra.first().copied() {
                        Some("substance") => true,
                        Some("object") => false,
                        other => {
                            return Err(bad(&format!(
                                "noun needs substance or object, got {other:?}"
                            )))
                        }
                    };
                    let entry = NounEntry {
                        pred: pred.clone(),
                        mass,
                        surface: surface.clone(),
                    };
                    if !mass {
                        f.plurals.insert(format!("{surface}s"), surface.clone());
                    }
                    f.sortal.insert(LexicalEntry::nominal(&pred));
                    f.by_pred_noun.insert(pred, entry.clone());
                    f.nouns.insert(surface, entry);
                }
                "unit" => {
                    let unit: Unit = pred
                        .parse()
                        .map_err(|e| bad(&format!("{e}")))?;
                    f.units.insert(surface, unit);
                }
                "prep" => {
                    let kind = match (pred.as_str(), extra.first().copied()) {
                        ("to", _) => PrepKind::PathTo,
                        ("towards", _) => PrepKind::PathTowards,
                        ("along", _) => PrepKind::PathAlong,
                        ("into", _) => PrepKind::Into,
                        ("for", _) => PrepKind::For,
                        ("in", _) => PrepKind::In,
                        ("of", _) => PrepKind::Of,
                        ("from", _) => PrepKind::From,
                        (other, _) => return Err(bad(&format!("unknown prep `{other}`"))),
                    };
                    match kind {
                        PrepKind::PathTo => f
                            .sortal
                            .insert(LexicalEntry::path_pred("to", Sort::DelimitedPath)),
                        PrepKind::PathTowards => {
                            f.sortal.insert(LexicalEntry::path_pred("towards", Sort::Path))
                        }
                        PrepKind::PathAlong => {
                            f.sortal.insert(LexicalEntry::path_pred("along", Sort::Path))
                        }
                        _ => {}
                    }
                    f.preps.insert(surface, kind);
                }
                "det" | "misc" => {}
                other => return Err(bad(&format!("unknown class `{other}`"))),
            }
        }
        Ok(f)
    }

    /// The sortal lexicon derived from this fragment's entries.
    pub fn sortal_lexicon(&self) -> &SortalLexicon {
        &self.sortal
    }

    /// Splits, lowercases and classifies. Commas become their own
    /// tokens; an unknown single letter after a noun serves as a name
    /// (`bucket A`).
    pub fn tokenize(&self, s: &str) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        for raw in s.split_whitespace() {
            let mut word = raw.to_lowercase();
            let mut trailing_commas = 0;
            while word.ends_with(',') {
                word.pop();
                trailing_commas += 1;
            }
            while word.starts_with(',') {
                word.remove(0);
                out.push(Token {
                    surface: ",".into(),
                    class: TokenClass::Comma,
                });
            }
            if !word.is_empty() {
                let class = self.classify(&word).ok_or_else(|| ParseError {
                    position: out.len(),
                    message: format!("unknown word `{word}`"),
                })?;
                out.push(Token {
                    surface: word,
                    class,
                });
            }
            for _ in 0..trailing_commas {
                out.push(Token {
                    surface: ",".into(),
                    class: TokenClass::Comma,
                });
            }
        }
        Ok(out)
    }

    fn classify(&self, word: &str) -> Option<TokenClass> {
        if self.names.contains_key(word) {
            Some(TokenClass::Name)
        } else if self.verbs.contains_key(word) {
            Some(TokenClass::VerbPast)
        } else if self.nouns.contains_key(word) {
            Some(TokenClass::Noun)
        } else if self.plurals.contains_key(word) {
            Some(TokenClass::PluralNoun)
        } else if self.units.contains_key(word) {
            Some(TokenClass::Unit)
        } else if self.preps.contains_key(word) {
            Some(TokenClass::Prep)
        } else if word == "the" || word == "a" {
            Some(TokenClass::Det)
        } else if word == "something" {
            Some(TokenClass::Misc)
        } else if numerals::is_number_word(word) {
            Some(TokenClass::CardNumeral)
        } else if word.chars().all(|c| c.is_ascii_digit() || c == '/')
            && word.chars().next().is_some_and(|c| c.is_ascii_digit())
        {
            Some(TokenClass::Number)
        } else if word.len() == 1 && word.chars().all(|c| c.is_ascii_alphabetic()) {
            // Single letters double as names after nouns: bucket A.
            Some(TokenClass::Misc)
        } else {
            None
        }
    }

    /// Parses a sentence of the fragment into its structure, then
    /// checks well-sortedness. Syntactic failures are [`ParseError`]s;
    /// sortal clashes come back as diagnostics with the offending
    /// structure attached.
    pub fn parse_sentence(&self, s: &str) -> Result<Avm, SentenceError> {
        let tokens = self.tokenize(s)?;
        let form = self.parse_form(&tokens)?;
        let avm = self.build_avm(&form);
        let diagnostics = check(&avm, &self.sortal);
        if diagnostics.is_empty() {
            Ok(avm)
        } else {
            Err(SentenceError::IllSorted {
                avm: Box::new(avm),
                diagnostics,
            })
        }
    }

    /// Parses into the surface shape without building or checking the
    /// structure.
    pub fn parse_form(&self, tokens: &[Token]) -> Result<SentenceForm, ParseError> {
        let mut p = FormParser {
            fragment: self,
            tokens,
            pos: 0,
        };
        p.sentence()
    }

    fn build_avm(&self, form: &SentenceForm) -> Avm {
        let mut core = Avm::new(Sort::Eventuality)
            .with(Feature::Pred, Value::atom(&form.verb.pred))
            .with(Feature::Agent, Value::atom(&form.subject));
        if let Some(np) = &form.object_np {
            core.set(Feature::Patient, Value::Avm(self.nominal_avm(np)));
        }
        match &form.oblique {
            Some(Oblique::Goal(np)) => {
                core.set(Feature::Goal, Value::Avm(self.nominal_avm(np)));
            }
            Some(Oblique::Path {
                pred,
                ref_obj,
                proximal,
            }) => {
                let sort = match self.preps.get(pred.as_str()) {
                    Some(PrepKind::PathTo) => Sort::DelimitedPath,
                    Some(PrepKind::PathTowards) => Sort::NonDelimitedPath,
                    // An along-path is read as a continuum except under a
                    // bare distance phrase, which requires fixed endpoints.
                    _ if form.bare_distance.is_some() => Sort::DelimitedPath,
                    _ => Sort::NonDelimitedPath,
                };
                let mut path = Avm::new(sort)
                    .with(Feature::Pred, Value::atom(pred))
                    .with(Feature::RefObj, Value::Avm(self.nominal_avm(ref_obj)));
                if let Some((m, landmark)) = proximal {
                    let mut record = Avm::measure_record(m);
                    record.set(Feature::RefObj, Value::Avm(self.nominal_avm(landmark)));
                    path.set(Feature::ProximalDistance, Value::Avm(record));
                }
                core.set(Feature::Path, Value::Avm(path));
            }
            None => {}
        }
        if let Some(d) = &form.bare_distance {
            core.set(Feature::Distance, Value::Avm(Avm::measure_record(d)));
        }

        let mut root = match &form.adverbial {
            None => natural_core(&core, &self.sortal),
            Some(adv) => match adv.head {
                AdverbialHead::For => {
                    let feature = match adv.dimension {
                        Dimension::Time => Feature::Duration,
                        _ => Feature::Distance,
                    };
                    wrap_in_measure_phrase(&core, &self.sortal, feature, &adv.measure)
                }
                AdverbialHead::In => {
                    let mut root = event_core(&core);
                    root.set(
                        Feature::Duration,
                        Value::Avm(Avm::measure_record(&adv.measure)),
                    );
                    root
                }
            },
        };
        assign_indices(&mut root);
        root
    }

    fn nominal_avm(&self, n: &Nominal) -> Avm {
        match n {
            Nominal::Something => Avm::new(Sort::Object),
            Nominal::Mass { noun } | Nominal::BarePlural { noun } => {
                Avm::new(Sort::Substance).with(Feature::Pred, Value::atom(noun))
            }
            Nominal::Counted { noun, card } => Avm::new(Sort::Object)
                .with(Feature::Pred, Value::atom(noun))
                .with(Feature::Card, Value::integer(*card)),
            Nominal::Measured { measure, of } => Avm::new(Sort::Object)
                .with(Feature::ComposedOf, Value::Avm(self.nominal_avm(of)))
                .with(Feature::Quantity, Value::Avm(Avm::measure_record(measure))),
            Nominal::Named { noun, name } => Avm::new(Sort::Object)
                .with(Feature::Pred, Value::atom(noun))
                .with(Feature::Name, Value::atom(name)),
            Nominal::Definite { noun } | Nominal::Indefinite { noun } => {
                Avm::new(Sort::Object).with(Feature::Pred, Value::atom(noun))
            }
        }
    }

    /// Realizes a ground, well-sorted structure as its unique canonical
    /// sentence. The caller is responsible for checking first; what
    /// this validates is membership in the fragment, reporting the
    /// offending paths otherwise.
    pub fn realize(&self, avm: &Avm) -> Result<String, RealizeError> {
        if !avm.is_ground() {
            return Err(RealizeError::NotGround);
        }
        let mut bad_paths: Vec<String> = Vec::new();
        let text = self.realize_inner(avm, &mut bad_paths);
        if bad_paths.is_empty() {
            Ok(text.expect("no bad paths implies text"))
        } else {
            Err(RealizeError::Unrealizable { paths: bad_paths })
        }
    }

    fn realize_inner(&self, avm: &Avm, bad: &mut Vec<String>) -> Option<String> {
        // Locate the pred-bearing core and classify the adverbial from
        // structure alone.
        let (core, core_path, adverbial): (&Avm, Vec<Feature>, Option<(AdverbialHead, Measure)>);
        let duration = read_measure(avm, Feature::Duration, bad);
        let distance = read_measure(avm, Feature::Distance, bad);
        if let Some(filler) = avm.get_avm(&Feature::ComposedOf) {
            if avm.has(&Feature::Pred) {
                bad.push("pred".into());
                return None;
            }
            core = filler;
            core_path = vec![Feature::ComposedOf];
            adverbial = match (duration, distance) {
                (Some(d), None) => Some((AdverbialHead::For, d)),
                (None, Some(d)) => Some((AdverbialHead::For, d)),
                (Some(_), Some(_)) => {
                    // One temporal adverbial and one spatial measure is
                    // the fragment's ceiling; a measure phrase carrying
                    // both lies outside it.
                    bad.push("distance".into());
                    return None;
                }
                (None, None) => {
                    bad.push("composed-of".into());
                    return None;
                }
            };
            for (feat, _) in avm.features() {
                if !matches!(
                    feat,
                    Feature::ComposedOf | Feature::Duration | Feature::Distance
                ) {
                    bad.push(feat.name().to_string());
                }
            }
        } else {
            core = avm;
            core_path = Vec::new();
            adverbial = duration.map(|d| (AdverbialHead::In, d));
        }

        let mut parts: Vec<String> = Vec::new();

        let Some(Value::Atom(agent)) = core.get(&Feature::Agent) else {
            bad.push(joined(&core_path, Feature::Agent));
            return None;
        };
        parts.push(capitalize(agent));

        let Some(pred) = core.get_atom(&Feature::Pred) else {
            bad.push(joined(&core_path, Feature::Pred));
            return None;
        };
        let Some(verb) = self.by_pred_verb.get(pred) else {
            bad.push(joined(&core_path, Feature::Pred));
            return None;
        };
        parts.push(verb.surface.clone());

        // Bare distance phrase precedes the NP/PP: "ran two miles to
        // the bridge". It is only available on the direct form.
        if core_path.is_empty() {
            if let Some(d) = distance {
                match spell_measure(&d) {
                    Some(words) => parts.push(words),
                    None => bad.push("distance".into()),
                }
            }
        } else if core.has(&Feature::Distance) || core.has(&Feature::Duration) {
            bad.push(joined(&core_path, Feature::Distance));
        }

        if let Some(patient) = core.get(&Feature::Patient) {
            match patient.as_avm() {
                Some(p) => {
                    let mut path = core_path.clone();
                    path.push(Feature::Patient);
                    if let Some(text) = self.np_text(p, NpRole::Patient, &path, bad) {
                        parts.push(text);
                    }
                }
                None => bad.push(joined(&core_path, Feature::Patient)),
            }
        }

        if let Some(goal) = core.get(&Feature::Goal) {
            match goal.as_avm() {
                Some(g) => {
                    let mut path = core_path.clone();
                    path.push(Feature::Goal);
                    if let Some(text) = self.np_text(g, NpRole::Goal, &path, bad) {
                        parts.push(format!("into {text}"));
                    }
                }
                None => bad.push(joined(&core_path, Feature::Goal)),
            }
        }

        if let Some(path_avm) = core.get(&Feature::Path) {
            let mut ppath = core_path.clone();
            ppath.push(Feature::Path);
            match path_avm.as_avm() {
                Some(p) => {
                    if let Some(text) = self.path_text(p, &ppath, bad) {
                        parts.push(text);
                    }
                }
                None => bad.push(path_to_string(&ppath)),
            }
        }

        for (feat, _) in core.features() {
            if !matches!(
                feat,
                Feature::Pred | Feature::Agent | Feature::Patient | Feature::Goal | Feature::Path
            ) && !(core_path.is_empty()
                && matches!(feat, Feature::Duration | Feature::Distance))
            {
                bad.push(joined(&core_path, feat.clone()));
            }
        }

        if let Some((head, m)) = adverbial {
            match spell_measure(&m) {
                Some(words) => {
                    let head = match head {
                        AdverbialHead::For => "for",
                        AdverbialHead::In => "in",
                    };
                    parts.push(format!("{head} {words}"));
                }
                None => bad.push("duration".into()),
            }
        }

        Some(parts.join(" "))
    }

    fn np_text(
        &self,
        np: &Avm,
        role: NpRole,
        at: &[Feature],
        bad: &mut Vec<String>,
    ) -> Option<String> {
        let mut claim = |feat: &Feature, ok: bool| {
            if !ok {
                let mut p = at.to_vec();
                p.push(feat.clone());
                bad.push(path_to_string(&p));
            }
        };
        for (feat, _) in np.features() {
            let ok = matches!(
                feat,
                Feature::Pred | Feature::Card | Feature::Name | Feature::Quantity
                    | Feature::ComposedOf
            );
            claim(feat, ok);
        }

        // Quantity construction: five gallons of water.
        if let Some(q) = np.get_avm(&Feature::Quantity) {
            let inner = np.get_avm(&Feature::ComposedOf)?;
            let mut ipath = at.to_vec();
            ipath.push(Feature::ComposedOf);
            let inner_text = self.np_text(inner, NpRole::Patient, &ipath, bad)?;
            let m = q.as_measure().and_then(Result::ok);
            return match m.and_then(|m| spell_measure(&m)) {
                Some(words) => Some(format!("{words} of {inner_text}")),
                None => {
                    bad.push(joined(at, Feature::Quantity));
                    None
                }
            };
        }
        if np.has(&Feature::ComposedOf) {
            bad.push(joined(at, Feature::ComposedOf));
            return None;
        }

        let Some(pred) = np.get_atom(&Feature::Pred) else {
            // A bare description realizes as "something" only when
            // nothing else is left.
            return if np.is_empty() {
                Some("something".to_string())
            } else {
                bad.push(path_to_string(at));
                None
            };
        };
        let Some(noun) = self.by_pred_noun.get(pred) else {
            bad.push(joined(at, Feature::Pred));
            return None;
        };

        if let Some(card) = np.get(&Feature::Card) {
            let n = card.as_number();
            return match n.and_then(spell_integer) {
                Some(words) => Some(format!("{words} {}s", noun.surface)),
                None => {
                    bad.push(joined(at, Feature::Card));
                    None
                }
            };
        }
        if let Some(name) = np.get_atom(&Feature::Name) {
            return Some(format!("{} {}", noun.surface, name.to_uppercase()));
        }
        if np.sort == Sort::Substance {
            return if noun.mass {
                Some(noun.surface.clone())
            } else {
                Some(format!("{}s", noun.surface))
            };
        }
        match role {
            NpRole::RefObj => Some(format!("the {}", noun.surface)),
            _ => Some(format!("a {}", noun.surface)),
        }
    }

    fn path_text(&self, path: &Avm, at: &[Feature], bad: &mut Vec<String>) -> Option<String> {
        for (feat, _) in path.features() {
            if !matches!(
                feat,
                Feature::Pred | Feature::RefObj | Feature::ProximalDistance
            ) {
                bad.push(joined(at, feat.clone()));
            }
        }
        let Some(pred) = path.get_atom(&Feature::Pred) else {
            bad.push(joined(at, Feature::Pred));
            return None;
        };
        let Some(ref_obj) = path.get_avm(&Feature::RefObj) else {
            bad.push(joined(at, Feature::RefObj));
            return None;
        };
        let mut rpath = at.to_vec();
        rpath.push(Feature::RefObj);
        let ref_text = self.np_text(ref_obj, NpRole::RefObj, &rpath, bad)?;
        let mut out = format!("{pred} {ref_text}");
        if let Some(prox) = path.get_avm(&Feature::ProximalDistance) {
            let landmark = prox.get_avm(&Feature::RefObj);
            let m = prox.as_measure().and_then(Result::ok);
            match (m.and_then(|m| spell_measure(&m)), landmark) {
                (Some(words), Some(landmark)) => {
                    let mut lpath = at.to_vec();
                    lpath.push(Feature::ProximalDistance);
                    lpath.push(Feature::RefObj);
                    let landmark_text = self.np_text(landmark, NpRole::RefObj, &lpath, bad)?;
                    out = format!("{out}, {words} from {landmark_text},");
                }
                _ => {
                    bad.push(joined(at, Feature::ProximalDistance));
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Realizes a fact and its derivable weakenings, deduplicated, up
    /// to `max` sentences. Derivatives that leave the fragment are
    /// skipped silently.
    pub fn paraphrases(
        &self,
        kb: &Kb,
        index: &str,
        max: usize,
    ) -> Result<Vec<String>, ParaphraseError> {
        let fact = kb
            .fact_by_index(index)
            .ok_or_else(|| ParaphraseError::UnboundIndex(index.to_string()))?;
        let durations = paraphrase_durations(fact);
        let closure = derivation_closure(kb, fact, DEFAULT_SEARCH_DEPTH, &durations);
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for avm in &closure {
            if out.len() >= max {
                break;
            }
            if let Ok(s) = self.realize(avm) {
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
        Ok(out)
    }
}

/// Weakened durations offered when paraphrasing: five-unit steps below
/// the fact's own duration.
fn paraphrase_durations(fact: &Avm) -> Vec<Rational> {
    let Some(Ok(m)) = fact.measure_at(&Feature::Duration) else {
        return Vec::new();
    };
    let step = Rational::from_integer(5);
    let mut out = Vec::new();
    let mut n = m.number() - step;
    while n > Rational::zero() {
        out.push(n);
        n -= step;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NpRole {
    Patient,
    Goal,
    RefObj,
}

fn joined(prefix: &[Feature], feat: Feature) -> String {
    let mut p = prefix.to_vec();
    p.push(feat);
    path_to_string(&p)
}

fn read_measure(avm: &Avm, feat: Feature, bad: &mut Vec<String>) -> Option<Measure> {
    match avm.get(&feat) {
        None => None,
        Some(Value::Avm(_)) => match avm.measure_at(&feat) {
            Some(Ok(m)) => Some(m),
            _ => {
                bad.push(feat.name().to_string());
                None
            }
        },
        Some(_) => {
            bad.push(feat.name().to_string());
            None
        }
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn spell_measure(m: &Measure) -> Option<String> {
    let words = spell_integer(m.number())?;
    Some(format!("{words} {}", m.unit().atom()))
}

fn spell_integer(n: Rational) -> Option<String> {
    if !n.is_integer() {
        return None;
    }
    numerals::spell(n.to_integer())
}

/// Surface shape of a parsed sentence, before structure building.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceForm {
    pub subject: String,
    pub verb: ParsedVerb,
    pub object_np: Option<Nominal>,
    pub oblique: Option<Oblique>,
    pub adverbial: Option<Adverbial>,
    pub bare_distance: Option<Measure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedVerb {
    pub pred: String,
    pub category: VerbCategory,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Oblique {
    Goal(Nominal),
    Path {
        pred: String,
        ref_obj: Nominal,
        proximal: Option<(Measure, Nominal)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdverbialHead {
    For,
    In,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adverbial {
    pub head: AdverbialHead,
    pub measure: Measure,
    pub dimension: Dimension,
}

/// Noun-phrase shapes of the fragment.
#[derive(Debug, Clone, PartialEq)]
pub enum Nominal {
    Something,
    Mass { noun: String },
    BarePlural { noun: String },
    Counted { noun: String, card: i64 },
    Measured { measure: Measure, of: Box<Nominal> },
    Named { noun: String, name: String },
    Definite { noun: String },
    Indefinite { noun: String },
}

struct FormParser<'a> {
    fragment: &'a Fragment,
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> FormParser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + offset)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, message: &str) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn prep(&self, t: &Token) -> Option<PrepKind> {
        if t.class == TokenClass::Prep {
            self.fragment.preps.get(&t.surface).copied()
        } else {
            None
        }
    }

    fn sentence(&mut self) -> Result<SentenceForm, ParseError> {
        let subject = match self.bump() {
            Some(t) if t.class == TokenClass::Name => {
                self.fragment.names.get(&t.surface).cloned().unwrap()
            }
            _ => return Err(self.fail("expected a subject name")),
        };
        let verb = match self.bump() {
            Some(t) if t.class == TokenClass::VerbPast => {
                self.fragment.verbs.get(&t.surface).cloned().unwrap()
            }
            _ => return Err(self.fail("expected a past-tense verb")),
        };

        let mut form = SentenceForm {
            subject,
            verb: ParsedVerb {
                pred: verb.pred.clone(),
                category: verb.category,
            },
            object_np: None,
            oblique: None,
            adverbial: None,
            bare_distance: None,
        };

        match verb.category {
            VerbCategory::TransferVerb | VerbCategory::FillVerb => {
                form.object_np = Some(self.np()?);
                if let Some(t) = self.peek() {
                    if self.prep(t) == Some(PrepKind::Into) {
                        if !verb.takes_goal {
                            return Err(
                                self.fail(&format!("verb `{}` takes no goal phrase", verb.surface))
                            );
                        }
                        self.bump();
                        form.oblique = Some(Oblique::Goal(self.np()?));
                    }
                }
            }
            VerbCategory::MotionVerb => {
                if self.starts_measure() {
                    let m = self.measure()?;
                    if m.unit().dimension() != Dimension::Distance {
                        return Err(self.fail("a bare measure before a path must be a distance"));
                    }
                    form.bare_distance = Some(m);
                }
                if let Some(t) = self.peek() {
                    if matches!(
                        self.prep(t),
                        Some(PrepKind::PathTo | PrepKind::PathTowards | PrepKind::PathAlong)
                    ) {
                        let pred = t.surface.clone();
                        self.bump();
                        if self.peek().is_some_and(|t| t.surface == "the") {
                            self.bump();
                        }
                        let ref_obj = match self.bump() {
                            Some(t) if t.class == TokenClass::Noun => Nominal::Definite {
                                noun: t.surface.clone(),
                            },
                            _ => return Err(self.fail("expected a reference object noun")),
                        };
                        let proximal = self.proximal()?;
                        form.oblique = Some(Oblique::Path {
                            pred,
                            ref_obj,
                            proximal,
                        });
                    }
                }
            }
            _ => return Err(self.fail("verb class cannot head a sentence")),
        }

        if let Some(t) = self.peek() {
            let head = match self.prep(t) {
                Some(PrepKind::For) => Some(AdverbialHead::For),
                Some(PrepKind::In) => Some(AdverbialHead::In),
                _ => None,
            };
            if let Some(head) = head {
                self.bump();
                let measure = self.measure()?;
                let dimension = measure.unit().dimension();
                match (head, dimension) {
                    (AdverbialHead::For, Dimension::Time | Dimension::Distance) => {}
                    (AdverbialHead::In, Dimension::Time) => {}
                    _ => {
                        return Err(
                            self.fail("in-phrases take temporal measures in this fragment")
                        )
                    }
                }
                form.adverbial = Some(Adverbial {
                    head,
                    measure,
                    dimension,
                });
            }
        }

        if self.pos != self.tokens.len() {
            return Err(self.fail("unexpected trailing words"));
        }
        Ok(form)
    }

    fn starts_measure(&self) -> bool {
        matches!(
            self.peek().map(|t| t.class),
            Some(TokenClass::CardNumeral | TokenClass::Number)
        )
    }

    fn number(&mut self) -> Result<i64, ParseError> {
        match self.peek().map(|t| t.class) {
            Some(TokenClass::Number) => {
                let t = self.bump().unwrap();
                t.surface
                    .parse::<i64>()
                    .map_err(|_| self.fail("bad numeral"))
            }
            Some(TokenClass::CardNumeral) => {
                let words: Vec<&str> = self.tokens[self.pos..]
                    .iter()
                    .take_while(|t| t.class == TokenClass::CardNumeral)
                    .map(|t| t.surface.as_str())
                    .collect();
                let (value, used) = numerals::parse(&words).ok_or_else(|| {
                    self.fail("cannot read number words")
                })?;
                self.pos += used;
                Ok(value)
            }
            _ => Err(self.fail("expected a number")),
        }
    }

    fn measure(&mut self) -> Result<Measure, ParseError> {
        let n = self.number()?;
        match self.bump() {
            Some(t) if t.class == TokenClass::Unit => {
                let unit = *self.fragment.units.get(&t.surface).unwrap();
                Measure::from_integer(n, unit).map_err(|e| self.fail(&e.to_string()))
            }
            _ => Err(self.fail("expected a unit")),
        }
    }

    fn proximal(&mut self) -> Result<Option<(Measure, Nominal)>, ParseError> {
        let comma = self.peek().is_some_and(|t| t.class == TokenClass::Comma);
        let numeral = self
            .peek_at(1)
            .is_some_and(|t| matches!(t.class, TokenClass::CardNumeral | TokenClass::Number));
        if !(comma && numeral) {
            return Ok(None);
        }
        self.bump();
        let m = self.measure()?;
        match self.bump() {
            Some(t) if self.prep(t) == Some(PrepKind::From) => {}
            _ => return Err(self.fail("expected `from` in a proximal-distance phrase")),
        }
        if self.peek().is_some_and(|t| t.surface == "the") {
            self.bump();
        }
        let landmark = match self.bump() {
            Some(t) if t.class == TokenClass::Noun => Nominal::Definite {
                noun: t.surface.clone(),
            },
            _ => return Err(self.fail("expected a landmark noun")),
        };
        match self.bump() {
            Some(t) if t.class == TokenClass::Comma => {}
            _ => return Err(self.fail("expected a closing comma after the proximal phrase")),
        }
        Ok(Some((m, landmark)))
    }

    fn np(&mut self) -> Result<Nominal, ParseError> {
        match self.peek() {
            Some(t) if t.class == TokenClass::Misc && t.surface == "something" => {
                self.bump();
                Ok(Nominal::Something)
            }
            Some(t) if t.class == TokenClass::Det => {
                let det = t.surface.clone();
                self.bump();
                let noun = self.count_noun()?;
                if det == "a" {
                    Ok(Nominal::Indefinite { noun })
                } else {
                    Ok(Nominal::Definite { noun })
                }
            }
            Some(t) if matches!(t.class, TokenClass::CardNumeral | TokenClass::Number) => {
                let n = self.number()?;
                match self.peek().map(|t| t.class) {
                    Some(TokenClass::Unit) => {
                        let t = self.bump().unwrap();
                        let unit = *self.fragment.units.get(&t.surface).unwrap();
                        let measure = Measure::from_integer(n, unit)
                            .map_err(|e| self.fail(&e.to_string()))?;
                        match self.bump() {
                            Some(t) if self.prep(t) == Some(PrepKind::Of) => {}
                            _ => return Err(self.fail("expected `of` after a measure")),
                        }
                        let inner = self.np()?;
                        if !matches!(inner, Nominal::Mass { .. } | Nominal::BarePlural { .. }) {
                            return Err(
                                self.fail("a measure-of phrase needs a mass or bare plural noun")
                            );
                        }
                        Ok(Nominal::Measured {
                            measure,
                            of: Box::new(inner),
                        })
                    }
                    Some(TokenClass::PluralNoun) => {
                        let t = self.bump().unwrap();
                        let noun = self.fragment.plurals.get(&t.surface).cloned().unwrap();
                        Ok(Nominal::Counted { noun, card: n })
                    }
                    _ => Err(self.fail("expected a unit or plural noun after a numeral")),
                }
            }
            Some(t) if t.class == TokenClass::Noun => {
                let entry = self.fragment.nouns.get(&t.surface).cloned().unwrap();
                self.bump();
                if entry.mass {
                    return Ok(Nominal::Mass {
                        noun: entry.surface,
                    });
                }
                // A following single letter is a name: bucket A.
                match self.peek() {
                    Some(t)
                        if t.surface.len() == 1
                            && matches!(t.class, TokenClass::Det | TokenClass::Misc) =>
                    {
                        let name = t.surface.to_uppercase();
                        self.bump();
                        Ok(Nominal::Named {
                            noun: entry.surface,
                            name,
                        })
                    }
                    _ => Err(self.fail("a bare count noun needs a determiner, numeral or name")),
                }
            }
            Some(t) if t.class == TokenClass::PluralNoun => {
                let noun = self.fragment.plurals.get(&t.surface).cloned().unwrap();
                self.bump();
                Ok(Nominal::BarePlural { noun })
            }
            _ => Err(self.fail("expected a noun phrase")),
        }
    }

    fn count_noun(&mut self) -> Result<String, ParseError> {
        match self.bump() {
            Some(t) if t.class == TokenClass::Noun => {
                let entry = self.fragment.nouns.get(&t.surface).unwrap();
                if entry.mass {
                    Err(self.fail("mass nouns take no determiner in this fragment"))
                } else {
                    Ok(entry.surface.clone())
                }
            }
            _ => Err(self.fail("expected a noun")),
        }
    }
}

/// Assigns index variables in pre-order: eventualities get `e1, e2,
/// ...`, paths `p1, ...`, everything else `x1, ...`. Measure records
/// stay anonymous.
fn assign_indices(root: &mut Avm) {
    let mut counters: BTreeMap<&'static str, u64> = BTreeMap::new();
    assign_rec(root, &mut counters);
}

fn assign_rec(node: &mut Avm, counters: &mut BTreeMap<&'static str, u64>) {
    if node.sort != Sort::Measure && matches!(node.index, Index::Anon) {
        let stem = if node.sort.leq(Sort::Eventuality) {
            "e"
        } else if node.sort.leq(Sort::Path) {
            "p"
        } else {
            "x"
        };
        let n = counters.entry(stem).or_insert(0);
        *n += 1;
        node.index = Index::Var(format!("{stem}{n}"));
    }
    let feats: Vec<Feature> = node.features().map(|(f, _)| f.clone()).collect();
    for feat in feats {
        if let Some(Value::Avm(inner)) = node.get(&feat) {
            let mut inner = inner.clone();
            assign_rec(&mut inner, counters);
            node.set(feat, Value::Avm(inner));
        }
    }
}

/// English numerals for the fragment: words for 0 through 9999.
mod numerals {
    const UNITS: [&str; 20] = [
        "zero",
        "one",
        "two",
        "three",
        "four",
        "five",
        "six",
        "seven",
        "eight",
        "nine",
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
    ];
    const TENS: [&str; 8] = [
        "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    ];

    fn unit_value(word: &str) -> Option<i64> {
        UNITS.iter().position(|&w| w == word).map(|i| i as i64)
    }

    fn tens_value(word: &str) -> Option<i64> {
        TENS.iter()
            .position(|&w| w == word)
            .map(|i| (i as i64 + 2) * 10)
    }

    fn simple_value(word: &str) -> Option<i64> {
        if let Some(v) = unit_value(word) {
            return Some(v);
        }
        if let Some(v) = tens_value(word) {
            return Some(v);
        }
        if let Some((tens, unit)) = word.split_once('-') {
            let t = tens_value(tens)?;
            let u = unit_value(unit)?;
            if u >= 1 && u <= 9 {
                return Some(t + u);
            }
        }
        None
    }

    pub fn is_number_word(word: &str) -> bool {
        word == "hundred" || word == "thousand" || simple_value(word).is_some()
    }

    /// Reads a maximal number-word sequence from the front of `words`;
    /// returns the value and how many words were consumed.
    pub fn parse(words: &[&str]) -> Option<(i64, usize)> {
        let mut total = 0i64;
        let mut current = 0i64;
        let mut used = 0;
        for &word in words {
            match word {
                "hundred" => {
                    if current == 0 {
                        current = 1;
                    }
                    current *= 100;
                }
                "thousand" => {
                    if current == 0 {
                        current = 1;
                    }
                    total += current * 1000;
                    current = 0;
                }
                _ => match simple_value(word) {
                    Some(v) => current += v,
                    None => break,
                },
            }
            used += 1;
        }
        if used == 0 {
            None
        } else {
            Some((total + current, used))
        }
    }

    /// Spells a number in words; covers 0 through 9999.
    pub fn spell(n: i64) -> Option<String> {
        if !(0..=9999).contains(&n) {
            return None;
        }
        if n < 20 {
            return Some(UNITS[n as usize].to_string());
        }
        if n < 100 {
            let t = TENS[(n / 10 - 2) as usize];
            return if n % 10 == 0 {
                Some(t.to_string())
            } else {
                Some(format!("{t}-{}", UNITS[(n % 10) as usize]))
            };
        }
        if n < 1000 {
            let head = format!("{} hundred", UNITS[(n / 100) as usize]);
            return if n % 100 == 0 {
                Some(head)
            } else {
                Some(format!("{head} {}", spell(n % 100)?))
            };
        }
        let head = format!("{} thousand", UNITS[(n / 1000) as usize]);
        if n % 1000 == 0 {
            Some(head)
        } else {
            Some(format!("{head} {}", spell(n % 1000)?))
        }
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn spell_and_parse_agree() {
            for n in 0..=2500 {
                let words = spell(n).unwrap();
                let tokens: Vec<&str> = words
                    .split(' ')
                    .flat_map(|w| w.split(' '))
                    .collect();
                let (back, used) = parse(&tokens).unwrap();
                assert_eq!(back, n, "{words}");
                assert_eq!(used, tokens.len(), "{words}");
            }
        }

        #[test]
        fn familiar_spellings() {
            assert_eq!(spell(30).unwrap(), "thirty");
            assert_eq!(spell(25).unwrap(), "twenty-five");
            assert_eq!(spell(200).unwrap(), "two hundred");
            assert_eq!(spell(5).unwrap(), "five");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avm::alpha_eq;
    use crate::calculus::RateFact;
    use crate::kb::parse_text;

    fn frag() -> Fragment {
        Fragment::builtin()
    }

    fn parses(s: &str) -> Avm {
        frag().parse_sentence(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn pour_for_thirty_seconds_builds_the_measure_phrase_form() {
        let got = parses("Jack poured water into bucket A for thirty seconds");
        let want = parse_text(
            "[index: e1, sort: event, composed-of: [index: e2, sort: process, pred: pour, \
             agent: jack, patient: [index: x1, sort: substance, pred: water], \
             goal: [index: x2, sort: object, pred: bucket, name: A]], \
             duration: [number: 30, unit: seconds]]",
        )
        .unwrap();
        assert!(alpha_eq(&got, &want), "got {got:?}");
    }

    #[test]
    fn pour_five_gallons_in_thirty_seconds_builds_the_direct_form() {
        let got = parses("Jack poured five gallons of water into bucket A in thirty seconds");
        let want = parse_text(
            "[index: e1, sort: event, pred: pour, agent: jack, \
             patient: [index: x1, sort: object, composed-of: [index: x2, sort: substance, \
             pred: water], quantity: [number: 5, unit: gallons]], \
             goal: [index: x3, sort: object, pred: bucket, name: A], \
             duration: [number: 30, unit: seconds]]",
        )
        .unwrap();
        assert!(alpha_eq(&got, &want), "got {got:?}");
    }

    #[test]
    fn ran_to_the_bridge_for_thirty_seconds_is_starred_with_c1() {
        let err = frag()
            .parse_sentence("Jack ran to the bridge for thirty seconds")
            .unwrap_err();
        match err {
            SentenceError::IllSorted { avm, diagnostics } => {
                assert!(diagnostics.iter().any(|d| d.constraint
                    == crate::sortal::Constraint::ComposedOfNeedsContinuum));
                // The inner core keeps its lexically forced event sort.
                assert_eq!(avm.get_avm(&Feature::ComposedOf).unwrap().sort, Sort::Event);
            }
            other => panic!("expected diagnostics, got {other:?}"),
        }
    }

    #[test]
    fn ran_towards_the_bridge_is_fine() {
        let got = parses("Jack ran towards the bridge for thirty seconds");
        let want = parse_text(
            "[index: e1, sort: event, composed-of: [index: e2, sort: process, pred: run, \
             agent: jack, path: [index: p1, sort: non-delimited-path, pred: towards, \
             ref-obj: [index: x1, sort: object, pred: bridge]]], \
             duration: [number: 30, unit: seconds]]",
        )
        .unwrap();
        assert!(alpha_eq(&got, &want), "got {got:?}");
    }

    #[test]
    fn poured_five_gallons_for_thirty_seconds_fails_on_the_inner_process() {
        let err = frag()
            .parse_sentence("Jack poured five gallons of water into bucket A for thirty seconds")
            .unwrap_err();
        match err {
            SentenceError::IllSorted { diagnostics, .. } => {
                assert!(diagnostics.iter().any(|d| d.constraint
                    == crate::sortal::Constraint::ProcessIncrementalContinuum));
            }
            other => panic!("expected diagnostics, got {other:?}"),
        }
    }

    #[test]
    fn filled_buckets_in_twenty_minutes_is_starred_with_c7() {
        let err = frag()
            .parse_sentence("Jack filled buckets in twenty minutes")
            .unwrap_err();
        match err {
            SentenceError::IllSorted { diagnostics, .. } => {
                assert!(diagnostics
                    .iter()
                    .any(|d| d.constraint == crate::sortal::Constraint::FillVerbsEventOnly));
            }
            other => panic!("expected diagnostics, got {other:?}"),
        }
    }

    #[test]
    fn filled_buckets_for_twenty_minutes_is_fine() {
        let got = parses("Jack filled buckets for twenty minutes");
        assert_eq!(got.sort, Sort::Event);
        let inner = got.get_avm(&Feature::ComposedOf).unwrap();
        assert_eq!(inner.sort, Sort::Process);
        assert_eq!(
            inner.get_avm(&Feature::Patient).unwrap().sort,
            Sort::Substance
        );
    }

    #[test]
    fn golden_sentences_realize_back_byte_identically() {
        let f = frag();
        for s in [
            "Jack filled five buckets in twenty minutes",
            "Jack poured water into bucket A for thirty seconds",
            "Jack poured five gallons of water into bucket A in thirty seconds",
            "Jack ran towards the bridge for thirty seconds",
            "Jack ran along the river, two hundred yards from the shore, for thirty seconds",
            "Jack ran two miles to the bridge",
            "Jack ran along the river for two miles",
            "Jack filled a bucket",
            "Jack filled something",
        ] {
            let avm = f.parse_sentence(s).unwrap_or_else(|e| panic!("{s}: {e}"));
            let back = f.realize(&avm).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(back, s);
        }
    }

    #[test]
    fn adverbial_choice_is_structural_not_lexical() {
        let f = frag();
        let pour = parses("Jack poured water into bucket A for thirty seconds");
        let dribble = parses("Jack dribbled water into bucket A for thirty seconds");
        let r1 = f.realize(&pour).unwrap();
        let r2 = f.realize(&dribble).unwrap();
        assert!(r1.contains(" for "));
        assert!(r2.contains(" for "));
        assert_eq!(r1.replace("poured", "dribbled"), r2);
    }

    #[test]
    fn starred_sentences_parse_but_fail_the_check() {
        // Realization presupposes a clean check, so none of these can
        // reach it through the pipeline.
        let f = frag();
        for s in [
            "Jack ran to the bridge for thirty seconds",
            "Jack ran to the bridge for two miles",
            "Jack poured five gallons of water into bucket A for thirty seconds",
            "Jack filled buckets in twenty minutes",
        ] {
            match f.parse_sentence(s) {
                Err(SentenceError::IllSorted { diagnostics, .. }) => {
                    assert!(!diagnostics.is_empty(), "{s}");
                }
                other => panic!("{s}: expected diagnostics, got {other:?}"),
            }
        }
    }

    #[test]
    fn bare_distance_with_along_is_the_delimited_variant() {
        let got = parses("Jack ran two miles along the river");
        let path = got.get_avm(&Feature::Path).unwrap();
        assert_eq!(path.sort, Sort::DelimitedPath);
        assert_eq!(path.get_atom(&Feature::Pred), Some("along"));
        assert_eq!(frag().realize(&got).unwrap(), "Jack ran two miles along the river");
    }

    #[test]
    fn leak_takes_no_goal() {
        let err = frag()
            .parse_sentence("Jack leaked water into bucket A for thirty seconds")
            .unwrap_err();
        assert!(matches!(err, SentenceError::Parse(_)));
        parses("Jack leaked water for thirty seconds");
    }

    #[test]
    fn unknown_word_is_a_parse_error() {
        let err = frag().parse_sentence("Jack quaffed mead").unwrap_err();
        assert!(matches!(err, SentenceError::Parse(_)));
    }

    #[test]
    fn paraphrases_cover_the_derived_sentences() {
        let f = frag();
        let mut kb = Kb::new();
        let fill = f.parse_sentence("Jack filled five buckets in twenty minutes").unwrap();
        kb.add_fact(fill).unwrap();
        let out = f.paraphrases(&kb, "e1", 50).unwrap();
        assert!(out.contains(&"Jack filled five buckets in twenty minutes".to_string()));
        assert!(out.contains(&"Jack filled a bucket".to_string()), "{out:?}");
        assert!(out.contains(&"Jack filled something".to_string()), "{out:?}");
    }

    #[test]
    fn paraphrases_include_weakened_durations_and_quantities() {
        let f = frag();
        let mut kb = Kb::new();
        let pour = f
            .parse_sentence("Jack poured water into bucket A for thirty seconds")
            .unwrap();
        kb.add_fact(pour).unwrap();
        kb.add_rate(
            RateFact::new("e2", Rational::new(1, 6), Unit::Gallons, Unit::Seconds).unwrap(),
        )
        .unwrap();
        let out = f.paraphrases(&kb, "e1", 200).unwrap();
        assert!(
            out.contains(&"Jack poured water into bucket A for twenty-five seconds".to_string()),
            "{out:?}"
        );
        assert!(
            out.contains(
                &"Jack poured five gallons of water into bucket A in thirty seconds".to_string()
            ),
            "{out:?}"
        );
    }

    #[test]
    fn paraphrases_with_zero_max_is_empty() {
        let f = frag();
        let mut kb = Kb::new();
        kb.add_fact(f.parse_sentence("Jack filled a bucket").unwrap())
            .unwrap();
        assert_eq!(f.paraphrases(&kb, "e1", 0).unwrap(), Vec::<String>::new());
    }

    #[test]
    fn paraphrases_of_unbound_index_is_an_error() {
        let f = frag();
        let kb = Kb::new();
        assert!(f.paraphrases(&kb, "e9", 10).is_err());
    }

    #[test]
    fn realize_rejects_out_of_fragment_features() {
        let f = frag();
        let avm = parse_text(
            "[index: e1, sort: event, pred: fill, agent: jack, \
             patient: [index: x1, sort: object, pred: bucket], \
             proximal-distance: [number: 1, unit: yards]]",
        )
        .unwrap();
        let err = f.realize(&avm).unwrap_err();
        match err {
            RealizeError::Unrealizable { paths } => {
                assert!(paths.iter().any(|p| p.contains("proximal-distance")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inverse_round_trip_over_generated_sentences() {
        let f = frag();
        let mut checked = 0;
        for s in generated_sentences() {
            match f.parse_sentence(&s) {
                Ok(avm) => {
                    let realized = f.realize(&avm).unwrap_or_else(|e| panic!("{s}: {e}"));
                    let reparsed = f.parse_sentence(&realized).unwrap();
                    assert!(alpha_eq(&avm, &reparsed), "{s} vs {realized}");
                    checked += 1;
                }
                Err(SentenceError::IllSorted { .. }) => {}
                Err(SentenceError::Parse(e)) => panic!("{s}: {e}"),
            }
        }
        assert!(checked > 40, "only {checked} well-sorted sentences generated");
    }

    fn generated_sentences() -> Vec<String> {
        let mut out = Vec::new();
        let patients = ["water", "five gallons of water", "buckets", "three buckets"];
        let goals = ["", " into bucket A", " into a bucket"];
        let advs = ["", " for thirty seconds", " in two minutes", " for ten seconds"];
        for v in ["poured", "dribbled", "filled"] {
            for p in patients {
                for g in goals {
                    if v == "filled" && !g.is_empty() {
                        continue;
                    }
                    for a in advs {
                        out.push(format!("Jack {v} {p}{g}{a}"));
                    }
                }
            }
        }
        let paths = ["to the bridge", "towards the bridge", "along the river"];
        for path in paths {
            for a in advs {
                out.push(format!("Jack ran {path}{a}"));
            }
            out.push(format!("Jack ran two miles {path}"));
        }
        out.push("Jack ran along the river for two miles".into());
        out.push("Jack ran along the river, two hundred yards from the shore, for thirty seconds".into());
        out
    }
}
