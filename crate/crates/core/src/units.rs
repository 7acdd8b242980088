//! Presentation units and number formatting.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    /// Converts a value in nats to this unit.
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            Unit::Nats => x,
            Unit::Bits => x / LN_2,
        }
    }

    /// Converts a value in this unit to nats.
    pub fn to_nats(self, x: f64) -> f64 {
        match self {
            Unit::Nats => x,
            Unit::Bits => x * LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

/// Formats `x` with `sig` significant digits, '.' decimal separator.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sig = sig.max(1);
    let e = x.abs().log10().floor() as i32;
    if (-5..sig as i32).contains(&e) {
        let decimals = (sig as i32 - 1 - e).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        // rounding may have bumped the exponent; that only adds a digit
        trim_zeros(s)
    } else {
        let s = format!("{:.*e}", sig - 1, x);
        let (mant, exp) = s.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(mant.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_digits() {
        assert_eq!(fmt_sig(0.5, 12), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(fmt_sig(123456.0, 12), "123456");
        assert_eq!(fmt_sig(1.5e-9, 12), "1.5e-9");
        assert_eq!(fmt_sig(-2.0, 12), "-2");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }

    #[test]
    fn bits_roundtrip() {
        let x = 0.136920;
        assert!((Unit::Bits.to_nats(Unit::Bits.from_nats(x)) - x).abs() < 1e-15);
        assert!((Unit::Bits.from_nats(LN_2) - 1.0).abs() < 1e-15);
    }
}
