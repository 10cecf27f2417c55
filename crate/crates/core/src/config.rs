//! Layered configuration: built-in defaults, an optional JSON override
//! document, then command-line `key=value` assignments.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::gates::{GateGrain, NamedGate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{key}`{}", .suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
    },
    #[error("`{key}` from {layer}: expected {expected}, got {got}")]
    Type {
        key: String,
        expected: &'static str,
        got: String,
        layer: Source,
    },
    #[error("`{key}` from {layer}: {message}")]
    Invariant {
        key: String,
        message: String,
        layer: Source,
    },
    #[error("malformed assignment `{0}` (expected key=value)")]
    Assignment(String),
    #[error("override document must be a JSON object")]
    NotAnObject,
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Which layer last set a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    Override,
    CommandLine,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "defaults",
            Source::Override => "override file",
            Source::CommandLine => "command line",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Qasm3,
    Qco,
}

impl EmitFormat {
    pub fn name(self) -> &'static str {
        match self {
            EmitFormat::Qasm3 => "qasm3",
            EmitFormat::Qco => "qco",
        }
    }
}

/// Single-qubit rotation basis. Only ZYZ is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationBasis {
    Zyz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QConfig {
    pub granularity: GateGrain,
    pub tol_verify: f64,
    pub sk_epsilon: f64,
    pub sk_depth: usize,
    pub sk_net_length: usize,
    pub optimization_level: u8,
    pub window_size: usize,
    /// `None` is unbounded.
    pub ancilla_budget: Option<usize>,
    pub emit_format: EmitFormat,
    pub rotation_basis: RotationBasis,
    pub sk_alphabet: Vec<NamedGate>,
}

impl Default for QConfig {
    fn default() -> Self {
        use NamedGate::*;
        QConfig {
            granularity: GateGrain::Principal,
            tol_verify: 1e-8,
            sk_epsilon: 0.3,
            sk_depth: 3,
            sk_net_length: 12,
            optimization_level: 1,
            window_size: 4,
            ancilla_budget: None,
            emit_format: EmitFormat::Qasm3,
            rotation_basis: RotationBasis::Zyz,
            sk_alphabet: vec![H, T, TD, S, SD],
        }
    }
}

pub const KEYS: [&str; 11] = [
    "granularity",
    "tol_verify",
    "sk_epsilon",
    "sk_depth",
    "sk_net_length",
    "optimization_level",
    "window_size",
    "ancilla_budget",
    "emit_format",
    "rotation_basis",
    "sk_alphabet",
];

/// Per-key record of the layer that supplied the final value.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance(BTreeMap<&'static str, Source>);

impl Provenance {
    pub fn source(&self, key: &str) -> Option<Source> {
        self.0.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, Source)> + '_ {
        self.0.iter().map(|(k, s)| (*k, *s))
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cur = row[j + 1];
            row[j + 1] = (prev + (ca != cb) as usize).min(row[j] + 1).min(cur + 1);
            prev = cur;
        }
    }
    row[b.len()]
}

fn known_key(key: &str) -> Result<&'static str> {
    KEYS.iter().copied().find(|k| *k == key).ok_or_else(|| {
        let (best, d) = KEYS
            .iter()
            .map(|k| (*k, levenshtein(key, k)))
            .min_by_key(|&(_, d)| d)
            .unwrap();
        ConfigError::UnknownKey {
            key: key.to_string(),
            suggestion: (d <= key.len().max(3) / 2 + 1).then(|| best.to_string()),
        }
    })
}

fn describe(v: &Value) -> String {
    match v {
        Value::String(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

impl QConfig {
    fn apply(&mut self, key: &'static str, v: &Value, source: Source) -> Result<()> {
        let mismatch = |expected| ConfigError::Type {
            key: key.to_string(),
            expected,
            got: describe(v),
            layer: source,
        };
        let real = || v.as_f64().ok_or_else(|| mismatch("a number"));
        let count = || {
            v.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| mismatch("a nonnegative integer"))
        };
        match key {
            "granularity" => {
                self.granularity = v
                    .as_str()
                    .and_then(GateGrain::from_name)
                    .ok_or_else(|| mismatch("a granularity name (unitary ... clifford_t)"))?
            }
            "tol_verify" => self.tol_verify = real()?,
            "sk_epsilon" => self.sk_epsilon = real()?,
            "sk_depth" => self.sk_depth = count()?,
            "sk_net_length" => self.sk_net_length = count()?,
            "optimization_level" => {
                self.optimization_level = match v.as_u64() {
                    Some(n @ 0..=2) => n as u8,
                    _ => return Err(mismatch("0, 1 or 2")),
                }
            }
            "window_size" => self.window_size = count()?,
            "ancilla_budget" => {
                self.ancilla_budget = match v {
                    Value::Null => None,
                    Value::String(s) if s.eq_ignore_ascii_case("unbounded") => None,
                    _ => Some(count().map_err(|_| mismatch("an integer, null or \"unbounded\""))?),
                }
            }
            "emit_format" => {
                self.emit_format = match v.as_str().map(str::to_ascii_lowercase).as_deref() {
                    Some("qasm3") => EmitFormat::Qasm3,
                    Some("qco") => EmitFormat::Qco,
                    _ => return Err(mismatch("\"qasm3\" or \"qco\"")),
                }
            }
            "rotation_basis" => {
                self.rotation_basis = match v.as_str() {
                    Some(s) if s.eq_ignore_ascii_case("zyz") => RotationBasis::Zyz,
                    _ => return Err(mismatch("\"ZYZ\"")),
                }
            }
            "sk_alphabet" => {
                let items = match v {
                    Value::Array(a) => a.clone(),
                    Value::String(s) => s
                        .split(',')
                        .map(|x| Value::String(x.trim().into()))
                        .collect(),
                    _ => return Err(mismatch("a list of gate names")),
                };
                self.sk_alphabet = items
                    .iter()
                    .map(|x| x.as_str().and_then(NamedGate::from_name))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| mismatch("a list of gate names"))?;
            }
            _ => unreachable!("key checked by known_key"),
        }
        Ok(())
    }

    fn validate(&self, prov: &Provenance) -> Result<()> {
        let fail = |key: &'static str, message: String| ConfigError::Invariant {
            key: key.to_string(),
            message,
            layer: prov.source(key).unwrap_or(Source::Default),
        };
        if self.window_size < 2 {
            return Err(fail(
                "window_size",
                format!("must be at least 2, got {}", self.window_size),
            ));
        }
        for (key, v) in [
            ("tol_verify", self.tol_verify),
            ("sk_epsilon", self.sk_epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(fail(key, format!("must be positive, got {v}")));
            }
        }
        if self.sk_net_length == 0 {
            return Err(fail("sk_net_length", "must be at least 1".into()));
        }
        if self.sk_alphabet.is_empty() {
            return Err(fail("sk_alphabet", "must not be empty".into()));
        }
        Ok(())
    }
}

/// Splits `key=value`; the value is read as JSON, falling back to a bare
/// string (so `granularity=clifford_t` works unquoted).
pub fn parse_assignment(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::Assignment(s.to_string()))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(ConfigError::Assignment(s.to_string()));
    }
    let v = v.trim();
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

/// Merges the layers in precedence order. `default_doc` replaces built-in
/// defaults key by key when given.
pub fn load(
    default_doc: Option<&Value>,
    override_doc: Option<&Value>,
    cli_pairs: &[(String, Value)],
) -> Result<(QConfig, Provenance)> {
    let mut cfg = QConfig::default();
    let mut prov = Provenance(KEYS.iter().map(|&k| (k, Source::Default)).collect());
    let empty = Map::new();
    let layers = [
        (default_doc, Source::Default),
        (override_doc, Source::Override),
    ];
    for (doc, source) in layers {
        let map = match doc {
            None => &empty,
            Some(Value::Object(m)) => m,
            Some(_) => return Err(ConfigError::NotAnObject),
        };
        for (k, v) in map {
            let key = known_key(k)?;
            cfg.apply(key, v, source)?;
            prov.0.insert(key, source);
        }
    }
    for (k, v) in cli_pairs {
        let key = known_key(k)?;
        cfg.apply(key, v, Source::CommandLine)?;
        prov.0.insert(key, Source::CommandLine);
    }
    cfg.validate(&prov)?;
    Ok((cfg, prov))
}
