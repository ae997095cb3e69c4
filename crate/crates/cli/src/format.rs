//! Numeric output at 12 significant digits.

use serde_json::Value;

/// Rounds to 12 significant decimal digits.
pub fn sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn fmt_f64(x: f64) -> String {
    let v = sig(x);
    if v == 0.0 {
        "0".into()
    } else {
        v.to_string()
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(sig(x)).map_or(Value::Null, Value::Number)
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig(0.7000000000000001), 0.7);
        assert_eq!(sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(0.55), "0.55");
        assert_eq!(fmt_f64(123456.7890123456), "123456.789012");
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
