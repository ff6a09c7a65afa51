//! Exact rational measures and the fixed unit-conversion table.
//!
//! Every number in the system is a rational ([`Rational`]); measure
//! arithmetic (rule side conditions, rate lookups) therefore never loses
//! precision. The unit table is closed: the five surface units plus
//! `individuals` for counting, one base unit per dimension.

use num_rational::Rational64;
use num_traits::Signed;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Exact rational number used throughout the crate.
pub type Rational = Rational64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitError {
    #[error("unknown unit: {0}")]
    UnknownUnit(String),
    #[error("cannot convert {from} ({from_dim}) to {to} ({to_dim})")]
    DimensionMismatch {
        from: Unit,
        from_dim: Dimension,
        to: Unit,
        to_dim: Dimension,
    },
    #[error("measure number must be non-negative, got {0}")]
    NegativeNumber(Rational),
}

/// Measurement dimension. Each unit belongs to exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Time,
    Volume,
    Distance,
    Count,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Time => "time",
            Dimension::Volume => "volume",
            Dimension::Distance => "distance",
            Dimension::Count => "count",
        };
        f.write_str(s)
    }
}

/// One of the closed set of units. The atom spellings are the ones that
/// appear inside attribute-value structures (`seconds`, `miles`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Seconds,
    Minutes,
    Gallons,
    Miles,
    Yards,
    Individuals,
}

impl Unit {
    pub const ALL: [Unit; 6] = [
        Unit::Seconds,
        Unit::Minutes,
        Unit::Gallons,
        Unit::Miles,
        Unit::Yards,
        Unit::Individuals,
    ];

    pub fn atom(self) -> &'static str {
        match self {
            Unit::Seconds => "seconds",
            Unit::Minutes => "minutes",
            Unit::Gallons => "gallons",
            Unit::Miles => "miles",
            Unit::Yards => "yards",
            Unit::Individuals => "individuals",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Seconds | Unit::Minutes => Dimension::Time,
            Unit::Gallons => Dimension::Volume,
            Unit::Miles | Unit::Yards => Dimension::Distance,
            Unit::Individuals => Dimension::Count,
        }
    }

    /// Multiplier to the dimension's base unit (second, gallon, yard,
    /// individual). minute = 60 seconds, mile = 1760 yards.
    pub fn base_factor(self) -> Rational {
        match self {
            Unit::Seconds => Rational::from_integer(1),
            Unit::Minutes => Rational::from_integer(60),
            Unit::Gallons => Rational::from_integer(1),
            Unit::Miles => Rational::from_integer(1760),
            Unit::Yards => Rational::from_integer(1),
            Unit::Individuals => Rational::from_integer(1),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.atom())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Unit::ALL
            .iter()
            .copied()
            .find(|u| u.atom() == s)
            .ok_or_else(|| UnitError::UnknownUnit(s.to_string()))
    }
}

/// A non-negative rational quantity in a specific unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Measure {
    number: Rational,
    unit: Unit,
}

impl Measure {
    pub fn new(number: Rational, unit: Unit) -> Result<Measure, UnitError> {
        if number.is_negative() {
            return Err(UnitError::NegativeNumber(number));
        }
        Ok(Measure { number, unit })
    }

    pub fn from_integer(number: i64, unit: Unit) -> Result<Measure, UnitError> {
        Measure::new(Rational::from_integer(number), unit)
    }

    pub fn number(&self) -> Rational {
        self.number
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.number, self.unit)
    }
}

/// Exact rescale of a measure into another unit of the same dimension.
pub fn convert(m: &Measure, target: Unit) -> Result<Measure, UnitError> {
    if m.unit.dimension() != target.dimension() {
        return Err(UnitError::DimensionMismatch {
            from: m.unit,
            from_dim: m.unit.dimension(),
            to: target,
            to_dim: target.dimension(),
        });
    }
    let number = m.number * m.unit.base_factor() / target.base_factor();
    Ok(Measure {
        number,
        unit: target,
    })
}

/// `a <= b` after conversion to the dimension's base unit.
pub fn measure_leq(a: &Measure, b: &Measure) -> Result<bool, UnitError> {
    let b_in_a = convert(b, a.unit)?;
    Ok(a.number <= b_in_a.number)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: i64, u: Unit) -> Measure {
        Measure::from_integer(n, u).unwrap()
    }

    #[test]
    fn convert_minutes_to_seconds() {
        let out = convert(&m(20, Unit::Minutes), Unit::Seconds).unwrap();
        assert_eq!(out, m(1200, Unit::Seconds));
    }

    #[test]
    fn convert_miles_to_yards() {
        let out = convert(&m(2, Unit::Miles), Unit::Yards).unwrap();
        assert_eq!(out, m(3520, Unit::Yards));
    }

    #[test]
    fn convert_across_dimensions_fails() {
        let err = convert(&m(30, Unit::Seconds), Unit::Gallons).unwrap_err();
        assert!(matches!(err, UnitError::DimensionMismatch { .. }));
    }

    #[test]
    fn leq_within_dimension() {
        assert!(measure_leq(&m(25, Unit::Seconds), &m(30, Unit::Seconds)).unwrap());
        assert!(!measure_leq(&m(1, Unit::Minutes), &m(30, Unit::Seconds)).unwrap());
        assert!(measure_leq(&m(30, Unit::Seconds), &m(30, Unit::Seconds)).unwrap());
    }

    #[test]
    fn leq_cross_dimension_fails() {
        assert!(measure_leq(&m(1, Unit::Miles), &m(1, Unit::Minutes)).is_err());
    }

    #[test]
    fn negative_measure_rejected() {
        assert!(Measure::from_integer(-1, Unit::Seconds).is_err());
    }

    #[test]
    fn convert_is_invertible() {
        for &a in &Unit::ALL {
            for &b in &Unit::ALL {
                if a.dimension() != b.dimension() {
                    continue;
                }
                for n in 0..50i64 {
                    let orig = Measure::new(Rational::new(n, 7), a).unwrap();
                    let back = convert(&convert(&orig, b).unwrap(), a).unwrap();
                    assert_eq!(orig, back);
                }
            }
        }
    }
}
