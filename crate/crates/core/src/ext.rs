//! Reals extended with a single negative infinity.

use std::fmt;
use std::ops::Add;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number or `NEG_INF`. Never NaN, never `+inf`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
#[repr(transparent)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const NEG_INF: ExtReal = ExtReal(f64::NEG_INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Accepts finite values and `-inf`.
    pub fn new(value: f64) -> Option<ExtReal> {
        if value.is_finite() || value == f64::NEG_INFINITY {
            Some(ExtReal(value))
        } else {
            None
        }
    }

    /// Panics on non-finite input.
    pub fn finite(value: f64) -> ExtReal {
        assert!(value.is_finite(), "expected a finite value, got {value}");
        ExtReal(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }

    /// `self - other`. Subtracting `NEG_INF` has no value in the extended
    /// reals used here and is reported as an error.
    pub fn checked_sub(self, other: ExtReal) -> Result<ExtReal> {
        if other.is_neg_inf() {
            return Err(Error::UndefinedDifference);
        }
        Ok(ExtReal(self.0 - other.0))
    }

    /// Difference as a plain float, for finite operands.
    pub fn finite_diff(self, other: ExtReal) -> Option<f64> {
        (self.is_finite() && other.is_finite()).then_some(self.0 - other.0)
    }

    /// True when both are `NEG_INF` or both finite and within `tol`.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self.is_neg_inf(), other.is_neg_inf()) {
            (true, true) => true,
            (false, false) => (self.0 - other.0).abs() <= tol,
            _ => false,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal(self.0 + rhs.0)
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        debug_assert!(rhs.is_finite());
        ExtReal(self.0 + rhs)
    }
}

impl From<f64> for ExtReal {
    fn from(value: f64) -> Self {
        ExtReal::finite(value)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_neg_inf() {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::new(v).ok_or_else(|| E::custom(format!("value {v} is not allowed")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                if v == "-inf" {
                    Ok(ExtReal::NEG_INF)
                } else {
                    Err(E::custom(format!("unexpected string {v:?}")))
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: [ExtReal; 4] = [
        ExtReal::NEG_INF,
        ExtReal(-1.5),
        ExtReal(0.0),
        ExtReal(2.25),
    ];

    #[test]
    fn add_and_max_laws() {
        for &a in &SAMPLES {
            assert_eq!(a.max(ExtReal::NEG_INF), a);
            assert_eq!(ExtReal::NEG_INF.max(a), a);
            assert_eq!(ExtReal::NEG_INF + a, ExtReal::NEG_INF);
            assert_eq!(a + ExtReal::NEG_INF, ExtReal::NEG_INF);
            for &b in &SAMPLES {
                assert_eq!(a + b, b + a);
                assert_eq!(a.max(b), b.max(a));
                assert!(a.max(b) >= a && a.max(b) >= b);
                for &c in &SAMPLES {
                    assert_eq!((a + b) + c, a + (b + c));
                    assert_eq!(a.max(b).max(c), a.max(b.max(c)));
                    // addition distributes over max
                    assert_eq!(a + b.max(c), (a + b).max(a + c));
                }
            }
        }
    }

    #[test]
    fn subtraction_rules() {
        assert!(ExtReal::NEG_INF.checked_sub(ExtReal::NEG_INF).is_err());
        assert!(ExtReal(1.0).checked_sub(ExtReal::NEG_INF).is_err());
        assert_eq!(
            ExtReal::NEG_INF.checked_sub(ExtReal(3.0)).unwrap(),
            ExtReal::NEG_INF
        );
        assert_eq!(ExtReal(2.25).checked_sub(ExtReal(-1.5)).unwrap(), ExtReal(3.75));
    }

    #[test]
    fn rejects_nan_and_pos_inf() {
        assert!(ExtReal::new(f64::NAN).is_none());
        assert!(ExtReal::new(f64::INFINITY).is_none());
        assert!(ExtReal::new(f64::NEG_INFINITY).unwrap().is_neg_inf());
    }

    #[test]
    fn json_round_trip() {
        let v = vec![ExtReal::NEG_INF, ExtReal(0.5), ExtReal(-3.0)];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"["-inf",0.5,-3.0]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExtReal>("\"inf\"").is_err());
    }
}
