//! Flat key/value reports with deterministic JSON and `key = value` output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Number, Value as Json};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
    Series(Vec<f64>),
}

/// Keys are kept sorted so output never depends on insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: BTreeMap<String, Value>,
}

fn json_number(x: f64) -> Json {
    match Number::from_f64(x) {
        Some(n) => Json::Number(n),
        None => Json::String(format_number(x)),
    }
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// large magnitudes.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e7).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: Value) {
        self.entries.insert(key.into(), value);
    }

    pub fn number(&mut self, key: impl Into<String>, x: f64) {
        self.set(key, Value::Number(x));
    }

    pub fn flag(&mut self, key: impl Into<String>, b: bool) {
        self.set(key, Value::Bool(b));
    }

    pub fn text(&mut self, key: impl Into<String>, s: impl Into<String>) {
        self.set(key, Value::Text(s.into()));
    }

    pub fn series(&mut self, key: impl Into<String>, xs: Vec<f64>) {
        self.set(key, Value::Series(xs));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn get_number(&self, key: &str) -> Option<f64> {
        match self.entries.get(key) {
            Some(Value::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        match self.entries.get(key) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copies every entry of `other` under `prefix`.
    pub fn merge_prefixed(&mut self, prefix: &str, other: &Report) {
        for (k, v) in &other.entries {
            self.entries.insert(format!("{prefix}{k}"), v.clone());
        }
    }

    pub fn to_json_value(&self) -> Json {
        let mut map = Map::new();
        for (k, v) in &self.entries {
            let j = match v {
                Value::Number(x) => json_number(*x),
                Value::Bool(b) => Json::Bool(*b),
                Value::Text(s) => Json::String(s.clone()),
                Value::Series(xs) => Json::Array(xs.iter().map(|x| json_number(*x)).collect()),
            };
            map.insert(k.clone(), j);
        }
        Json::Object(map)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("plain JSON values");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let rendered = match v {
                Value::Number(x) => format_number(*x),
                Value::Bool(b) => b.to_string(),
                Value::Text(s) => s.clone(),
                Value::Series(xs) => {
                    let items: Vec<String> = xs.iter().map(|x| format_number(*x)).collect();
                    format!("[{}]", items.join(", "))
                }
            };
            writeln!(out, "{k} = {rendered}").expect("write to String");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_text_agree_on_keys() {
        let mut r = Report::new();
        r.number("b", 1.5);
        r.number("a", 1e-12);
        r.flag("ok", true);
        r.text("surface", "legendrian-torus");
        r.series("hist", vec![3.0, 2.0]);
        r.number("bad", f64::NAN);
        let text = r.to_text();
        assert_eq!(
            text,
            "a = 1e-12\nb = 1.5\nbad = NaN\nhist = [3, 2]\nok = true\nsurface = legendrian-torus\n"
        );
        let json: Json = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["b"], Json::from(1.5));
        assert_eq!(json["bad"], Json::from("NaN"));
        assert_eq!(json.as_object().unwrap().len(), r.len());
    }

    #[test]
    fn numbers_round_trip_through_text() {
        for x in [0.1, 22.792_902_263_953_85, -3.5e-9, 1e300] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }
}
