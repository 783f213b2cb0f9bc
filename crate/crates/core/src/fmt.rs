//! Round-trip number formatting: 17 significant digits everywhere.

use serde::Serializer;
use serde_json::value::RawValue;

/// `x` with 17 significant digits in scientific notation, e.g. `-9.5964066272085070e2`.
///
/// Parsing the result recovers `x` bit for bit.
pub fn f17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Serializes a float as a 17-digit JSON number (`null` if not finite).
pub fn json_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(f17(*x)).map_err(serde::ser::Error::custom)?;
        s.serialize_some(&raw)
    } else {
        s.serialize_none()
    }
}

pub fn json_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => json_f64(v, s),
        None => s.serialize_none(),
    }
}

pub fn json_vec_f64<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&F17(*x))?;
    }
    seq.end()
}

/// Newtype that serializes with [`json_f64`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl serde::Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        json_f64(&self.0, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -959.6406627208507, 1e-300, 3.0, 0.0, -0.0, f64::MAX, 5e-324] {
            let s = f17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(f17(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn json_numbers() {
        #[derive(serde::Serialize)]
        struct T {
            #[serde(serialize_with = "json_f64")]
            a: f64,
            #[serde(serialize_with = "json_f64")]
            b: f64,
            #[serde(serialize_with = "json_vec_f64")]
            c: Vec<f64>,
        }
        let t = T {
            a: 0.5,
            b: f64::NAN,
            c: vec![1.0, -2.5],
        };
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"a":5.0000000000000000e-1,"b":null,"c":[1.0000000000000000e0,-2.5000000000000000e0]}"#
        );
    }
}
