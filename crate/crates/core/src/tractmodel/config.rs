//! Model specs and the flat key=value config format.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which model to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    /// F(w) = e^w + ln a on {Re e^w > ln(L/a)}.
    Exp { a: f64, l: f64 },
    /// T₀ plus hooked tracts T₁ … T_{n_max}.
    Hook { n_max: usize, eps: f64, a: f64 },
    /// The hook model plus the half-strips Sₙ.
    HookStrips { n_max: usize, eps: f64 },
}

impl ModelSpec {
    pub fn exp_default() -> Self {
        ModelSpec::Exp { a: 0.25, l: 1.0 }
    }

    pub fn hook_default() -> Self {
        ModelSpec::Hook { n_max: 3, eps: 1e-3, a: 6.0 }
    }

    pub fn strips_default() -> Self {
        ModelSpec::HookStrips { n_max: 3, eps: 1e-3 }
    }

    /// Default spec for a model name (`exp`, `hook`, `hook_strips`).
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "exp" => Ok(Self::exp_default()),
            "hook" => Ok(Self::hook_default()),
            "hook_strips" | "strips" => Ok(Self::strips_default()),
            other => Err(Error::InvalidSpec(format!("unknown model '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Exp { .. } => "exp",
            ModelSpec::Hook { .. } => "hook",
            ModelSpec::HookStrips { .. } => "hook_strips",
        }
    }

    /// Build from parsed key=value pairs; `model` selects the family and the
    /// remaining keys override its defaults.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let name = map.get("model").map(String::as_str).unwrap_or("exp");
        let mut spec = Self::named(name)?;
        for (k, v) in map {
            if k == "model" {
                continue;
            }
            let num = || v.parse::<f64>().map_err(|_| Error::Config(format!("{k} = {v}: not a number")));
            let int = || v.parse::<usize>().map_err(|_| Error::Config(format!("{k} = {v}: not an integer")));
            match (&mut spec, k.as_str()) {
                (ModelSpec::Exp { a, .. }, "a") => *a = num()?,
                (ModelSpec::Exp { l, .. }, "L" | "l") => *l = num()?,
                (ModelSpec::Hook { a, .. }, "a") => *a = num()?,
                (ModelSpec::Hook { n_max, .. } | ModelSpec::HookStrips { n_max, .. }, "n_max") => *n_max = int()?,
                (ModelSpec::Hook { eps, .. } | ModelSpec::HookStrips { eps, .. }, "eps") => *eps = num()?,
                _ => return Err(Error::Config(format!("key '{k}' does not apply to model '{name}'"))),
            }
        }
        Ok(spec)
    }

    pub fn from_config(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let body = line.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(Error::Parse { position: start, message: format!("expected key = value, got '{body}'") });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Parse { position: start, message: "empty key".into() });
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Parse { position: start, message: format!("duplicate key '{k}'") });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let s = ModelSpec::from_config("model = exp\na = 0.2 # comment\nL = 1.5\n").unwrap();
        assert_eq!(s, ModelSpec::Exp { a: 0.2, l: 1.5 });
        let h = ModelSpec::from_config("model=hook\nn_max=2").unwrap();
        assert_eq!(h, ModelSpec::Hook { n_max: 2, eps: 1e-3, a: 6.0 });
        assert!(ModelSpec::from_config("model = exp\nn_max = 2").is_err());
        assert!(ModelSpec::from_config("model = sine").is_err());
        assert!(matches!(parse_key_values("a = 1\nbroken"), Err(Error::Parse { position: 6, .. })));
    }
}
