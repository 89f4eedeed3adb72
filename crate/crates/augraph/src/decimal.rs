//! Decimal-string encoding of floats for file formats.
//!
//! All on-disk probabilities and parameters are stored as decimal strings
//! with 17 significant digits, which round-trips every finite `f64` exactly
//! and keeps the files diffable across platforms.

use crate::error::{Error, Result};

/// Encode a finite `f64` as a decimal string with 17 significant digits.
pub fn encode(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Parse a decimal string produced by [`encode`] (or any plain decimal).
pub fn decode(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::MalformedPayload(format!("bad decimal string: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::MalformedPayload(format!("non-finite value: {s:?}")));
    }
    Ok(v)
}

/// Encode a slice of floats.
pub fn encode_vec(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|&x| encode(x)).collect()
}

/// Decode a slice of decimal strings.
pub fn decode_vec(ss: &[String]) -> Result<Vec<f64>> {
    ss.iter().map(|s| decode(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip_simple() {
        for &x in &[0.0, 1.0, 0.125, 1.0 / 3.0, -2.5e-17, f64::MIN_POSITIVE] {
            assert_eq!(decode(&encode(x)).unwrap(), x);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(decode("inf").is_err());
        assert!(decode("NaN").is_err());
        assert!(decode("not a number").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(x in prop::num::f64::NORMAL) {
            prop_assert_eq!(decode(&encode(x)).unwrap(), x);
        }
    }
}
