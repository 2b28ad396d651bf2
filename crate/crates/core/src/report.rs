//! Deterministic report output: an ordered JSON value with fixed float
//! formatting (17 significant digits), plus the shared verdict type.

use std::fmt::{self, Write as _};

use crate::lorentz::Vec4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    Degenerate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::Fails => "Fails",
            Verdict::Degenerate => "Degenerate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `x` with 17 significant digits in exponent form; `None` for non-finite.
pub fn fmt_f64(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    // normalize -0 so equal values print identically
    let x = if x == 0.0 { 0.0 } else { x };
    Some(format!("{x:.16e}"))
}

/// CSV cell for a float; non-finite values print as `nan`/`inf`.
pub fn csv_f64(x: f64) -> String {
    fmt_f64(x).unwrap_or_else(|| {
        if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    })
}

/// JSON value whose objects keep insertion order.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    /// Appends a field; panics when called on a non-object.
    pub fn with(mut self, key: &str, value: impl Into<Json>) -> Json {
        match &mut self {
            Json::Obj(fields) => fields.push((key.to_string(), value.into())),
            _ => panic!("Json::with on a non-object"),
        }
        self
    }

    pub fn nums(xs: &[f64]) -> Json {
        Json::Arr(xs.iter().map(|&x| Json::Num(x)).collect())
    }

    /// Signs stored as floats, written as integers.
    pub fn signs(xs: &[f64]) -> Json {
        Json::Arr(xs.iter().map(|&x| Json::Int(x as i64)).collect())
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => write!(out, "{i}").expect("write to String"),
            Json::Num(x) => match fmt_f64(*x) {
                Some(s) => out.push_str(&s),
                None => out.push_str("null"),
            },
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
            Json::Arr(items) => {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    v.write(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(k).expect("string serializes"));
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

impl fmt::Display for Json {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Json {
        Json::Num(x)
    }
}

impl From<usize> for Json {
    fn from(x: usize) -> Json {
        Json::Int(x as i64)
    }
}

impl From<i64> for Json {
    fn from(x: i64) -> Json {
        Json::Int(x)
    }
}

impl From<bool> for Json {
    fn from(b: bool) -> Json {
        Json::Bool(b)
    }
}

impl From<&str> for Json {
    fn from(s: &str) -> Json {
        Json::Str(s.to_string())
    }
}

impl From<String> for Json {
    fn from(s: String) -> Json {
        Json::Str(s)
    }
}

impl From<Vec4> for Json {
    fn from(v: Vec4) -> Json {
        Json::nums(&v.to_array())
    }
}

impl From<Verdict> for Json {
    fn from(v: Verdict) -> Json {
        Json::Str(v.name().to_string())
    }
}

impl<T: Into<Json>> From<Vec<T>> for Json {
    fn from(v: Vec<T>) -> Json {
        Json::Arr(v.into_iter().map(Into::into).collect())
    }
}

impl<T: Into<Json>> From<Option<T>> for Json {
    fn from(v: Option<T>) -> Json {
        v.map(Into::into).unwrap_or(Json::Null)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(fmt_f64(1.0).unwrap(), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.0).unwrap(), "0.0000000000000000e0");
        assert_eq!(fmt_f64(3f64.sqrt()).unwrap(), "1.7320508075688772e0");
        assert_eq!(fmt_f64(f64::NAN), None);
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).unwrap().parse::<f64>().unwrap(), x);
    }

    #[test]
    fn objects_keep_order() {
        let j = Json::obj()
            .with("z", 1.5)
            .with("a", "x\"y")
            .with("n", f64::INFINITY)
            .with("v", vec![Json::Int(-1), Json::Bool(true)]);
        assert_eq!(
            j.to_string(),
            r#"{"z":1.5000000000000000e0,"a":"x\"y","n":null,"v":[-1,true]}"#
        );
    }

    #[test]
    fn output_is_valid_json() {
        let j = Json::obj().with("e", Vec4::new(1.0, -2.5e-300, 0.0, 7.0)).with("s", Json::signs(&[1.0, -1.0]));
        let v: serde_json::Value = serde_json::from_str(&j.to_string()).unwrap();
        assert_eq!(v["s"][1], -1);
        assert_eq!(v["e"][1].as_f64().unwrap(), -2.5e-300);
    }
}
