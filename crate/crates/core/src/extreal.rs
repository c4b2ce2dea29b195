//! Extended reals `[-inf, +inf]`.
//!
//! Values are `f64` with NaN excluded, so comparisons are total. Addition
//! follows the convention `inf + (-inf) = inf`, which is the one used for
//! sums of extended-real-valued functions in minimization: a point at which
//! any term is `+inf` is infeasible.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INFINITY: ExtReal = ExtReal(f64::NEG_INFINITY);
    pub const ZERO: ExtReal = ExtReal(0.0);

    /// Returns `None` for NaN.
    pub fn new(value: f64) -> Option<Self> {
        if value.is_nan() {
            None
        } else {
            Some(ExtReal(value))
        }
    }

    /// Maps NaN to `+inf`. Used for function oracles, where an undefined
    /// value (e.g. the log of a negative number) marks a point outside the domain.
    pub fn from_oracle(value: f64) -> Self {
        if value.is_nan() {
            ExtReal::INFINITY
        } else {
            ExtReal(value)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_inf(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn abs(self) -> Self {
        ExtReal(self.0.abs())
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtReal never holds NaN")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        if self.is_pos_inf() || rhs.is_pos_inf() {
            ExtReal::INFINITY
        } else {
            ExtReal(self.0 + rhs.0)
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::from_oracle(rhs)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

impl From<ExtReal> for f64 {
    fn from(v: ExtReal) -> f64 {
        v.0
    }
}

impl TryFrom<f64> for ExtReal {
    type Error = crate::Error;

    fn try_from(value: f64) -> crate::Result<Self> {
        ExtReal::new(value).ok_or_else(|| crate::Error::invalid("NaN is not an extended real"))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // f64 already renders as "inf" / "-inf".
        fmt::Display::fmt(&self.0, f)
    }
}

// JSON has no infinity literal, so infinities travel as the strings "inf" / "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => ExtReal::new(v).ok_or_else(|| serde::de::Error::custom("NaN")),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(ExtReal::INFINITY),
                "-inf" | "-infinity" => Ok(ExtReal::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other:?}"))),
            },
        }
    }
}
