use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Result};

/// Which tail(s) of the predictive distribution an interval constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    #[default]
    Two,
    /// `(-inf, c]`: an upper bound on the future response.
    Lower,
    /// `(c, +inf)`: a lower bound on the future response.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodTag {
    #[serde(rename = "QE")]
    Qe,
    #[serde(rename = "CP")]
    Cp,
    #[serde(rename = "MFB")]
    Mfb,
    #[serde(rename = "T_IID")]
    TIid,
    #[serde(rename = "T_LS")]
    TLs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    #[serde(with = "extended_real")]
    pub lower: f64,
    #[serde(with = "extended_real")]
    pub upper: f64,
    /// Nominal coverage `1 - alpha`.
    pub level: f64,
    pub method: MethodTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

impl PredictionInterval {
    pub fn new(lower: f64, upper: f64, level: f64, method: MethodTag, center: Option<f64>) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return domain(format!("invalid interval [{lower}, {upper}]"));
        }
        Ok(Self { lower, upper, level, method, center })
    }

    /// Builds the interval for `side` from a lower and an upper candidate
    /// endpoint, discarding the one the side leaves open.
    pub(crate) fn sided(lo: f64, hi: f64, side: Side, level: f64, method: MethodTag, center: Option<f64>) -> Result<Self> {
        match side {
            Side::Two => Self::new(lo, hi, level, method, center),
            Side::Lower => Self::new(f64::NEG_INFINITY, hi, level, method, center),
            Side::Upper => Self::new(lo, f64::INFINITY, level, method, center),
        }
    }

    /// Closed membership test: endpoints belong to the interval.
    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn side(&self) -> Side {
        match (self.lower.is_infinite(), self.upper.is_infinite()) {
            (true, false) => Side::Lower,
            (false, true) => Side::Upper,
            _ => Side::Two,
        }
    }

    /// `[a, b]` with infinite ends printed as `-inf` / `inf`.
    pub fn display(&self) -> String {
        format!("[{}, {}]", fmt_end(self.lower), fmt_end(self.upper))
    }
}

fn fmt_end(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// JSON has no infinities; they travel as the strings `"inf"` / `"-inf"`.
mod extended_real {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("expected a number, \"inf\" or \"-inf\", got {other:?}"))),
            },
        }
    }
}
