//! The fixed sort lattice.
//!
//! Fourteen sorts arranged as a tree under `top` with a shared `bottom`:
//!
//! ```text
//!                         top
//!      ┌─────────┬─────────┼──────────┬──────────┐
//! eventuality material    path      measure  atom-sort  number-sort
//!   ┌──┴──┐   ┌──┴──┐   ┌──┴────────────┐
//! event process object substance  delimited-path non-delimited-path
//!      └─────────┴──────────┴─── bottom ───┴──────┘
//! ```
//!
//! `process`, `substance` and `non-delimited-path` are the continuum
//! sorts: abstract entities whose realizations vary in amount. Their
//! delimited counterparts are `event`, `object` and `delimited-path`.
//! Sibling pairs are incompatible (meet = `bottom`), which is what makes
//! the lattice useful for detecting sortal clashes during unification.
//!
//! The lattice is hard-coded and closed; there is no user-defined sort
//! machinery. `measure`, `atom-sort` and `number-sort` are housekeeping
//! sorts for amount records, names and numerals, and never unify with
//! the eventuality/material/path families.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("unknown sort name: {0}")]
    Unknown(String),
    #[error("sort {0} is not a continuum sort and has no delimited counterpart")]
    NotContinuum(Sort),
}

/// A node of the fixed sort lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Top,
    Eventuality,
    Event,
    Process,
    Material,
    Object,
    Substance,
    Path,
    DelimitedPath,
    NonDelimitedPath,
    Measure,
    AtomSort,
    NumberSort,
    Bottom,
}

impl Sort {
    pub const ALL: [Sort; 14] = [
        Sort::Top,
        Sort::Eventuality,
        Sort::Event,
        Sort::Process,
        Sort::Material,
        Sort::Object,
        Sort::Substance,
        Sort::Path,
        Sort::DelimitedPath,
        Sort::NonDelimitedPath,
        Sort::Measure,
        Sort::AtomSort,
        Sort::NumberSort,
        Sort::Bottom,
    ];

    /// The sort's parent in the tree; `None` for `top` and `bottom`
    /// (`bottom` sits below every leaf rather than under one parent).
    fn parent(self) -> Option<Sort> {
        match self {
            Sort::Top | Sort::Bottom => None,
            Sort::Eventuality
            | Sort::Material
            | Sort::Path
            | Sort::Measure
            | Sort::AtomSort
            | Sort::NumberSort => Some(Sort::Top),
            Sort::Event | Sort::Process => Some(Sort::Eventuality),
            Sort::Object | Sort::Substance => Some(Sort::Material),
            Sort::DelimitedPath | Sort::NonDelimitedPath => Some(Sort::Path),
        }
    }

    /// `self` is `other` or a descendant of it.
    pub fn leq(self, other: Sort) -> bool {
        if self == Sort::Bottom || other == Sort::Top {
            return true;
        }
        let mut cur = Some(self);
        while let Some(s) = cur {
            if s == other {
                return true;
            }
            cur = s.parent();
        }
        false
    }

    /// Greatest lower bound. `bottom` signals incompatibility.
    pub fn meet(self, other: Sort) -> Sort {
        if self.leq(other) {
            self
        } else if other.leq(self) {
            other
        } else {
            // The order is a tree plus bottom, so incomparable sorts
            // have no common descendant other than bottom.
            Sort::Bottom
        }
    }

    /// True exactly for `process`, `substance`, `non-delimited-path`.
    pub fn is_continuum(self) -> bool {
        matches!(
            self,
            Sort::Process | Sort::Substance | Sort::NonDelimitedPath
        )
    }

    /// True exactly for `event`, `object`, `delimited-path`: concrete
    /// entities with fixed extent.
    pub fn is_delimited(self) -> bool {
        matches!(self, Sort::Event | Sort::Object | Sort::DelimitedPath)
    }

    /// Maps each continuum sort to the sort of its realizations:
    /// process → event, substance → object,
    /// non-delimited-path → delimited-path. This is the sort-level image
    /// of the `composed-of` relation.
    pub fn delimited_counterpart(self) -> Result<Sort, SortError> {
        match self {
            Sort::Process => Ok(Sort::Event),
            Sort::Substance => Ok(Sort::Object),
            Sort::NonDelimitedPath => Ok(Sort::DelimitedPath),
            other => Err(SortError::NotContinuum(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sort::Top => "top",
            Sort::Eventuality => "eventuality",
            Sort::Event => "event",
            Sort::Process => "process",
            Sort::Material => "material",
            Sort::Object => "object",
            Sort::Substance => "substance",
            Sort::Path => "path",
            Sort::DelimitedPath => "delimited-path",
            Sort::NonDelimitedPath => "non-delimited-path",
            Sort::Measure => "measure",
            Sort::AtomSort => "atom-sort",
            Sort::NumberSort => "number-sort",
            Sort::Bottom => "bottom",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sort {
    type Err = SortError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sort::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| SortError::Unknown(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leq_examples() {
        assert!(Sort::Event.leq(Sort::Eventuality));
        assert!(!Sort::Event.leq(Sort::Process));
        assert!(Sort::Bottom.leq(Sort::Substance));
        assert!(Sort::Process.leq(Sort::Top));
        assert!(!Sort::Measure.leq(Sort::Eventuality));
    }

    #[test]
    fn meet_examples() {
        assert_eq!(Sort::Eventuality.meet(Sort::Event), Sort::Event);
        assert_eq!(Sort::Object.meet(Sort::Substance), Sort::Bottom);
        assert_eq!(Sort::Top.meet(Sort::Path), Sort::Path);
        assert_eq!(Sort::Event.meet(Sort::Process), Sort::Bottom);
        assert_eq!(Sort::Measure.meet(Sort::Material), Sort::Bottom);
    }

    #[test]
    fn continuum_examples() {
        assert!(Sort::Process.is_continuum());
        assert!(!Sort::Object.is_continuum());
        assert!(Sort::NonDelimitedPath.is_continuum());
        assert!(!Sort::Eventuality.is_continuum());
    }

    #[test]
    fn counterpart_examples() {
        assert_eq!(Sort::Process.delimited_counterpart(), Ok(Sort::Event));
        assert_eq!(Sort::Substance.delimited_counterpart(), Ok(Sort::Object));
        assert_eq!(
            Sort::NonDelimitedPath.delimited_counterpart(),
            Ok(Sort::DelimitedPath)
        );
        assert!(Sort::Event.delimited_counterpart().is_err());
        assert!(Sort::Top.delimited_counterpart().is_err());
    }

    #[test]
    fn unknown_name_is_reported() {
        let err = "weird".parse::<Sort>().unwrap_err();
        assert_eq!(err, SortError::Unknown("weird".to_string()));
    }

    #[test]
    fn names_round_trip() {
        for &s in &Sort::ALL {
            assert_eq!(s.name().parse::<Sort>().unwrap(), s);
        }
    }

    #[test]
    fn meet_is_commutative_and_idempotent() {
        for &a in &Sort::ALL {
            assert_eq!(a.meet(a), a);
            for &b in &Sort::ALL {
                assert_eq!(a.meet(b), b.meet(a));
            }
        }
    }

    #[test]
    fn meet_is_associative() {
        for &a in &Sort::ALL {
            for &b in &Sort::ALL {
                for &c in &Sort::ALL {
                    assert_eq!(a.meet(b).meet(c), a.meet(b.meet(c)));
                }
            }
        }
    }

    #[test]
    fn leq_agrees_with_meet() {
        for &a in &Sort::ALL {
            for &b in &Sort::ALL {
                assert_eq!(a.leq(b), a.meet(b) == a);
            }
        }
    }

    #[test]
    fn continuum_and_delimited_are_disjoint() {
        for &s in &Sort::ALL {
            assert!(!(s.is_continuum() && s.is_delimited()));
        }
        assert_eq!(Sort::ALL.iter().filter(|s| s.is_continuum()).count(), 3);
        assert_eq!(Sort::ALL.iter().filter(|s| s.is_delimited()).count(), 3);
    }

    #[test]
    fn counterpart_is_never_a_continuum() {
        for &s in &Sort::ALL {
            if let Ok(c) = s.delimited_counterpart() {
                assert!(!c.is_continuum());
                assert!(c.is_delimited());
            }
        }
    }
}
