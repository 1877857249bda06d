//! JSON run configuration.
//!
//! A config is one flat JSON object. Every physical and numerical parameter is
//! required; only output cadence, analysis tolerances and the theory
//! conventions have defaults. Parsing reports every problem at once.

use std::fmt;

use serde_json::{Map, Value};

use crate::grid::{cfl_max_dt, Grid2D};
use crate::model::{NetworkParams, NonlinearityBounds};
use crate::sim::{RunConfig, Scheme};
use crate::theory::{NormConventions, DEFAULT_C_STAR};

const REQUIRED_REAL: &[&str] = &[
    "eta",
    "sigma",
    "J",
    "k",
    "a",
    "b",
    "c",
    "q",
    "r",
    "P",
    "kappa",
    "dx",
    "dt",
    "amplitude",
];
const REQUIRED_INT: &[&str] = &["m", "nx", "ny", "n_steps", "seed"];
const OPTIONAL: &[&str] = &[
    "record_every",
    "snapshot_every",
    "integrator",
    "C_star",
    "norm_convention",
    "phi_norm_sq",
    "omega_measure_K",
    "omega_measure_Q",
    "out_dir",
    "tail_fraction",
    "transient",
    "envelope_slack",
];

pub const DEFAULT_RECORD_EVERY: usize = 10;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;
/// Fraction of the run treated as transient by the envelope check.
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigErrorKind {
    Missing { expected: &'static str },
    TypeMismatch { expected: &'static str, found: String },
    Range { reason: String },
    Unknown,
    Syntax { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub kind: ConfigErrorKind,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key = &self.key;
        match &self.kind {
            ConfigErrorKind::Missing { expected } => write!(f, "missing key `{key}` (expected {expected})"),
            ConfigErrorKind::TypeMismatch { expected, found } => {
                write!(f, "key `{key}`: expected {expected}, found {found}")
            }
            ConfigErrorKind::Range { reason } => write!(f, "key `{key}`: {reason}"),
            ConfigErrorKind::Unknown => write!(f, "unknown key `{key}`"),
            ConfigErrorKind::Syntax { reason } => write!(f, "invalid JSON: {reason}"),
        }
    }
}

/// All problems found in one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConventionPreset {
    #[default]
    Integral,
    Reconciled,
}

/// A validated configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub run: RunConfig<f64>,
    pub c_star: f64,
    pub conventions: NormConventions<f64>,
    pub preset: ConventionPreset,
    pub out_dir: Option<String>,
    pub tail_fraction: f64,
    pub transient: f64,
    pub envelope_slack: f64,
}

fn type_name(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(_) => "boolean".into(),
        Value::Number(n) if n.is_f64() => "real number".into(),
        Value::Number(_) => "integer".into(),
        Value::String(_) => "string".into(),
        Value::Array(_) => "array".into(),
        Value::Object(_) => "object".into(),
    }
}

struct Reader<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<ConfigError>,
}

impl Reader<'_> {
    fn err(&mut self, key: &str, kind: ConfigErrorKind) {
        self.errors.push(ConfigError {
            key: key.to_string(),
            kind,
        });
    }

    fn real(&mut self, key: &str, required: bool) -> Option<f64> {
        const EXPECTED: &str = "a number";
        match self.obj.get(key) {
            None => {
                if required {
                    self.err(key, ConfigErrorKind::Missing { expected: EXPECTED });
                }
                None
            }
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    let found = type_name(v);
                    self.err(
                        key,
                        ConfigErrorKind::TypeMismatch {
                            expected: EXPECTED,
                            found,
                        },
                    );
                    None
                }
            },
        }
    }

    fn int(&mut self, key: &str, required: bool) -> Option<u64> {
        const EXPECTED: &str = "a nonnegative integer";
        match self.obj.get(key) {
            None => {
                if required {
                    self.err(key, ConfigErrorKind::Missing { expected: EXPECTED });
                }
                None
            }
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    let found = type_name(v);
                    self.err(
                        key,
                        ConfigErrorKind::TypeMismatch {
                            expected: EXPECTED,
                            found,
                        },
                    );
                    None
                }
            },
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.obj.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                let found = type_name(v);
                self.err(
                    key,
                    ConfigErrorKind::TypeMismatch {
                        expected: "a string",
                        found,
                    },
                );
                None
            }
        }
    }

    fn range(&mut self, key: &str, ok: bool, reason: impl Into<String>) {
        if !ok {
            self.err(key, ConfigErrorKind::Range { reason: reason.into() });
        }
    }
}

/// Parses and validates a JSON configuration, collecting every error.
pub fn parse_config(text: &str) -> Result<ConfigDocument, ConfigErrors> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            key: String::new(),
            kind: ConfigErrorKind::Syntax { reason: e.to_string() },
        }])
    })?;
    let Value::Object(obj) = &value else {
        return Err(ConfigErrors(vec![ConfigError {
            key: String::new(),
            kind: ConfigErrorKind::TypeMismatch {
                expected: "a JSON object",
                found: type_name(&value),
            },
        }]));
    };
    let mut rd = Reader {
        obj,
        errors: Vec::new(),
    };

    for key in obj.keys() {
        let known = REQUIRED_REAL.contains(&key.as_str())
            || REQUIRED_INT.contains(&key.as_str())
            || OPTIONAL.contains(&key.as_str());
        if !known {
            rd.err(key, ConfigErrorKind::Unknown);
        }
    }

    let mut reals = std::collections::HashMap::new();
    for &key in REQUIRED_REAL {
        if let Some(v) = rd.real(key, true) {
            reals.insert(key, v);
        }
    }
    let mut ints = std::collections::HashMap::new();
    for &key in REQUIRED_INT {
        if let Some(v) = rd.int(key, true) {
            ints.insert(key, v);
        }
    }

    for key in ["eta", "sigma", "k", "a", "b", "c", "q", "r", "kappa", "dx", "dt"] {
        if let Some(&v) = reals.get(key) {
            rd.range(key, v > 0.0, format!("must be > 0, got {v}"));
        }
    }
    for key in ["P", "amplitude"] {
        if let Some(&v) = reals.get(key) {
            rd.range(key, v >= 0.0, format!("must be >= 0, got {v}"));
        }
    }
    if let Some(&m) = ints.get("m") {
        rd.range("m", m >= 2, format!("must be >= 2, got {m}"));
    }
    for key in ["nx", "ny"] {
        if let Some(&n) = ints.get(key) {
            rd.range(key, n >= 3, format!("must be >= 3, got {n}"));
        }
    }
    if let Some(&n) = ints.get("n_steps") {
        rd.range("n_steps", n >= 1, "must be >= 1");
    }
    if let (Some(&eta), Some(&dx), Some(&dt)) = (reals.get("eta"), reals.get("dx"), reals.get("dt")) {
        if eta > 0.0 && dx > 0.0 && dt > 0.0 {
            let limit = dx * dx / (4.0 * eta);
            rd.range(
                "dt",
                dt <= limit,
                format!("{dt} exceeds the explicit stability bound cfl_max_dt = dx^2/(4 eta) = {limit}"),
            );
        }
    }

    let record_every = rd.int("record_every", false).unwrap_or(DEFAULT_RECORD_EVERY as u64);
    rd.range("record_every", record_every >= 1, "must be >= 1");
    let snapshot_every = rd.int("snapshot_every", false).unwrap_or(0);
    let scheme = match rd.string("integrator").as_deref() {
        None | Some("euler") => Scheme::Euler,
        Some("rk4") => Scheme::Rk4,
        Some(other) => {
            rd.range(
                "integrator",
                false,
                format!("expected \"euler\" or \"rk4\", got \"{other}\""),
            );
            Scheme::Euler
        }
    };
    let c_star = rd.real("C_star", false).unwrap_or(DEFAULT_C_STAR);
    rd.range("C_star", c_star >= 0.0, "must be >= 0");
    let preset = match rd.string("norm_convention").as_deref() {
        None | Some("integral") => ConventionPreset::Integral,
        Some("reconciled") => ConventionPreset::Reconciled,
        Some(other) => {
            rd.range(
                "norm_convention",
                false,
                format!("expected \"integral\" or \"reconciled\", got \"{other}\""),
            );
            ConventionPreset::Integral
        }
    };
    let phi_override = rd.real("phi_norm_sq", false);
    let omega_k_override = rd.real("omega_measure_K", false);
    let omega_q_override = rd.real("omega_measure_Q", false);
    for (key, v) in [
        ("phi_norm_sq", phi_override),
        ("omega_measure_K", omega_k_override),
        ("omega_measure_Q", omega_q_override),
    ] {
        if let Some(v) = v {
            rd.range(key, v >= 0.0, format!("must be >= 0, got {v}"));
        }
    }
    let out_dir = rd.string("out_dir");
    let tail_fraction = rd.real("tail_fraction", false).unwrap_or(DEFAULT_TAIL_FRACTION);
    rd.range(
        "tail_fraction",
        tail_fraction > 0.0 && tail_fraction <= 1.0,
        format!("must lie in (0, 1], got {tail_fraction}"),
    );
    let transient = rd.real("transient", false);
    if let Some(t) = transient {
        rd.range("transient", t >= 0.0, format!("must be >= 0, got {t}"));
    }
    let envelope_slack = rd
        .real("envelope_slack", false)
        .unwrap_or(crate::metrics::DEFAULT_ENVELOPE_SLACK);
    rd.range(
        "envelope_slack",
        envelope_slack >= 1.0,
        format!("must be >= 1, got {envelope_slack}"),
    );

    if !rd.errors.is_empty() {
        return Err(ConfigErrors(rd.errors));
    }

    let g = |k: &str| reals[k];
    let params = NetworkParams {
        diffusion: g("eta"),
        recovery_coupling: g("sigma"),
        reference_potential: g("J"),
        memristor_strength: g("k"),
        a: g("a"),
        b: g("b"),
        c: g("c"),
        q: g("q"),
        r: g("r"),
        coupling: g("P"),
        neurons: ints["m"] as usize,
    };
    let single = |key: &str, reason: String| {
        ConfigErrors(vec![ConfigError {
            key: key.to_string(),
            kind: ConfigErrorKind::Range { reason },
        }])
    };
    let grid =
        Grid2D::new(ints["nx"] as usize, ints["ny"] as usize, g("dx")).map_err(|e| single("nx", e.to_string()))?;
    let bounds = NonlinearityBounds::prototype(g("kappa")).map_err(|e| single("kappa", e.to_string()))?;
    debug_assert!(cfl_max_dt(&params, &grid, 1.0).is_ok());

    let base = match preset {
        ConventionPreset::Integral => NormConventions::integral(&bounds, &grid),
        ConventionPreset::Reconciled => NormConventions::reconciled(&bounds, &grid),
    };
    let conventions = NormConventions {
        phi_norm_sq: phi_override.unwrap_or(base.phi_norm_sq),
        omega_measure_k: omega_k_override.unwrap_or(base.omega_measure_k),
        omega_measure_q: omega_q_override.unwrap_or(base.omega_measure_q),
    };

    let run = RunConfig {
        params,
        bounds,
        grid,
        dt: g("dt"),
        n_steps: ints["n_steps"] as usize,
        seed: ints["seed"],
        amplitude: g("amplitude"),
        record_every: record_every as usize,
        snapshot_every: snapshot_every as usize,
        scheme,
    };
    let transient = transient.unwrap_or(DEFAULT_TRANSIENT_FRACTION * run.t_end());
    Ok(ConfigDocument {
        run,
        c_star,
        conventions,
        preset,
        out_dir,
        tail_fraction,
        transient,
        envelope_slack,
    })
}
