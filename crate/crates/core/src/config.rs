//! Small helpers shared by the JSON configuration formats.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A record label that may be written in JSON as a string or a number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Label(pub String);

#[derive(Deserialize)]
#[serde(untagged)]
enum RawLabel {
    Str(String),
    Num(serde_json::Number),
    Bool(bool),
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Label(match RawLabel::deserialize(d)? {
            RawLabel::Str(s) => s,
            RawLabel::Num(n) => n.to_string(),
            RawLabel::Bool(b) => b.to_string(),
        }))
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

pub(crate) fn labels<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    let raw: Vec<Label> = Vec::deserialize(d)?;
    Ok(raw.into_iter().map(|l| l.0).collect())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawReal {
    Num(f64),
    Str(String),
}

/// Parses `"inf"`, `"infinity"` (any case, optional sign) or a finite number.
pub fn parse_extended_real(s: &str) -> Option<f64> {
    let t = s.trim().to_ascii_lowercase();
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(&t)),
    };
    let v = match body {
        "inf" | "infinity" => f64::INFINITY,
        _ => body.parse::<f64>().ok().filter(|v| v.is_finite())?,
    };
    Some(if neg { -v } else { v })
}

/// A real that may also be written as the string `"inf"`.
pub fn extended_real<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match RawReal::deserialize(d)? {
        RawReal::Num(v) => Ok(v),
        RawReal::Str(s) => parse_extended_real(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("not a number: {s:?}"))),
    }
}

/// Optional form of [`extended_real`]; use with `#[serde(default)]`.
pub fn extended_real_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    extended_real(d).map(Some)
}
