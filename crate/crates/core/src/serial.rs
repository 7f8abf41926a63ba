//! Output formatting shared by the JSON and CSV writers.
//!
//! Floats are written with 17 significant digits so that every value reads
//! back to the same bits. Non-finite values (the indices may be `±∞`) are not
//! JSON numbers and are written as the strings `"inf"`, `"-inf"`, `"nan"`.

use serde::ser::{Error as _, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` with 17 significant digits, or `inf` / `-inf` / `nan`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// `serialize_with` adapter for `f64` fields.
pub fn f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(fmt17(*x)).map_err(S::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_str(&fmt17(*x))
    }
}

/// `serialize_with` adapter for `Option<f64>` fields.
pub fn opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => f64(v, s),
        None => s.serialize_none(),
    }
}

struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        f64(&self.0, s)
    }
}

/// `serialize_with` adapter for `Vec<f64>` / `[f64]` fields.
pub fn vec_f64<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&Sig17(x))?;
    }
    seq.end()
}

/// Parse a value written by [`fmt17`].
pub fn parse17(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        t => t.parse().ok(),
    }
}
