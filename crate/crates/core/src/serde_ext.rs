//! Serde helpers for extended reals.
//!
//! JSON has no infinity, so ±∞ travel as the strings `"inf"` / `"-inf"`.
//! Finite values stay plain numbers. Numeric strings are accepted on input.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

fn parse<E: serde::de::Error>(v: NumOrStr) -> Result<f64, E> {
    match v {
        NumOrStr::Num(x) => Ok(x),
        NumOrStr::Str(s) => {
            let t = s.trim();
            match t.parse::<f64>() {
                Ok(x) if !x.is_nan() => Ok(x),
                _ => Err(E::custom(format!("not a number: {s:?}"))),
            }
        }
    }
}

/// Extended real wrapper with the string convention for infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        parse(NumOrStr::deserialize(d)?).map(ExtReal)
    }
}

pub mod real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtReal(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(ExtReal::deserialize(d)?.0)
    }
}

pub mod reals {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|&x| ExtReal(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<ExtReal>::deserialize(d)?.into_iter().map(|x| x.0).collect())
    }
}

pub mod opt_real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(ExtReal).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<ExtReal>::deserialize(d)?.map(|x| x.0))
    }
}
