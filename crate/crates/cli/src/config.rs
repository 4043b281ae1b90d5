//! JSON run configuration. Every field is optional; command-line flags
//! take precedence over the file.

use std::fs;

use serde::Deserialize;
use serde_json::Value;

use irslab_core::exactnum::Dyadic;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// A measure name, or a descriptor given inline as a JSON object.
    pub measure: Option<Value>,
    pub words: Option<Vec<String>>,
    /// A decimal number or a string (decimal or dyadic).
    pub width: Option<Value>,
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub tolerance_exp: Option<u64>,
    pub max_len: Option<usize>,
    pub shift: Option<i64>,
    pub pairs: Option<usize>,
    pub sample: Option<usize>,
    pub a: Option<Vec<String>>,
    pub joint: Option<bool>,
    pub allow_wide: Option<bool>,
    pub max_factors: Option<u64>,
    pub out: Option<String>,
    pub csv: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&str>) -> Result<RunConfig, Failure> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Parse(format!("cannot read {path}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{path}: {e}")))
    }

    /// The measure as text accepted by the descriptor parser.
    pub fn measure_text(&self) -> Result<Option<String>, Failure> {
        match &self.measure {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v @ Value::Object(_)) => Ok(Some(v.to_string())),
            Some(other) => Err(Failure::Parse(format!(
                "measure must be a name or an object, got {other}"
            ))),
        }
    }
}

/// The largest power of two not above the requested width. Exact dyadic
/// input such as `1/2^20` is kept as given.
pub fn parse_width(flag: Option<&str>, config: Option<&Value>) -> Result<Dyadic, Failure> {
    let text = match (flag, config) {
        (Some(f), _) => f.to_string(),
        (None, Some(Value::String(s))) => s.clone(),
        (None, Some(Value::Number(n))) => n.to_string(),
        (None, Some(other)) => {
            return Err(Failure::Parse(format!(
                "width must be a number, got {other}"
            )))
        }
        (None, None) => "1e-6".to_string(),
    };
    let parsed = match text.parse::<Dyadic>() {
        Ok(d) => Some(d),
        Err(_) => text
            .trim()
            .parse::<f64>()
            .ok()
            .and_then(Dyadic::pow2_at_most),
    };
    match parsed {
        Some(d) if !d.is_negative() && !d.is_zero() => Ok(d),
        _ => Err(Failure::Parse(format!(
            "width must be positive, got {text:?}"
        ))),
    }
}
