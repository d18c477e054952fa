//! Flat key-value report emission.
//!
//! Analytic reports serialize as a single flat JSON object. Reals that are
//! naturally computed in the log domain are emitted under both `<key>_ln`
//! and, where the magnitude permits, a linear `<key>`.

use std::collections::BTreeMap;

use serde_json::{Number, Value};

/// Ordered flat key-value map (BTreeMap keeps output byte-stable).
#[derive(Clone, Debug, Default)]
pub struct FlatReport(pub BTreeMap<String, Value>);

impl FlatReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u64(&mut self, key: &str, v: u64) {
        self.0.insert(key.to_string(), Value::from(v));
    }

    pub fn put_i64(&mut self, key: &str, v: i64) {
        self.0.insert(key.to_string(), Value::from(v));
    }

    pub fn put_bool(&mut self, key: &str, v: bool) {
        self.0.insert(key.to_string(), Value::from(v));
    }

    pub fn put_str(&mut self, key: &str, v: &str) {
        self.0.insert(key.to_string(), Value::from(v));
    }

    pub fn put_f64(&mut self, key: &str, v: f64) {
        let val = Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(format!("{v}")));
        self.0.insert(key.to_string(), val);
    }

    /// Emits `<key>_ln` always and a linear `<key>` when exp(ln) is a normal
    /// finite double.
    pub fn put_log_value(&mut self, key: &str, ln: f64) {
        self.put_f64(&format!("{key}_ln"), ln);
        let lin = ln.exp();
        if lin.is_finite() {
            self.put_f64(key, lin);
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("flat report serializes")
    }
}
