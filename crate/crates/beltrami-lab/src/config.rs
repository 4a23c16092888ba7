//! Run configuration: a flat key-value file (or the same structure as JSON)
//! describing the coefficient field, grid, and the list of operations to run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every operation `run` understands, in the order the names are accepted.
pub const KNOWN_OPS: &[&str] = &[
    "solve",
    "oracle-compare",
    "homogeneity",
    "lavrentiev",
    "log-ratio",
    "theorem1",
    "belinskij",
    "lehto",
    "phi-divergence",
    "remark11",
    "fmo-bound",
    "psi-infinity",
    "infinity-tail",
    "ring",
    "distortion",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", default)]
pub struct RunConfig {
    /// Coefficient field key, e.g. `zero`, `radial-stretch:k=3,support=1`.
    pub field: String,
    /// Grid nodes per axis; power of two, at least 16.
    pub grid_n: usize,
    pub half_width: f64,
    pub center_re: f64,
    pub center_im: f64,
    /// Solver residual tolerance (grid L¹ mean of |∂̄f − μ·∂f|).
    pub tol: f64,
    /// Truncation levels; empty means a single bounded solve.
    pub schedule: Vec<u32>,
    pub seed: u64,
    pub ops: Vec<String>,
    /// Output directory; paths are machine-specific, so the echoed config in
    /// a report always has this cleared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,

    /// `to-zero` or `to-infinity`: ladder direction for asymptotic profiles.
    pub direction: String,
    /// Base point for pointwise criteria.
    pub z0_re: f64,
    pub z0_im: f64,
    /// Disk radius for pointwise criteria and the distortion bound.
    pub eps0: f64,
    /// Majorant key for divergence criteria, e.g. `exp:alpha=1`.
    pub phi: String,
    /// Admissible-weight key for the criterion at infinity, e.g. `inv-t`.
    pub psi: String,
    /// Scalar dominant key for ring and distortion checks, e.g. `const:c=1`.
    pub scalar: String,
    /// Ring radii, r1 < r2.
    pub r1: f64,
    pub r2: f64,
    /// Lower cutoff for the majorant divergence integral.
    pub delta: f64,
    /// Modulus-of-continuity scale in the distortion bound.
    pub distortion_delta: f64,
    /// Base radius and dyadic depth for tail checks at infinity.
    pub r0: f64,
    pub depth: u32,
    /// `unit` or `full-area` spherical area element.
    pub normalization: String,
    /// Monte Carlo sample budget for disk means.
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            field: "zero".into(),
            grid_n: 256,
            half_width: 4.0,
            center_re: 0.0,
            center_im: 0.0,
            tol: 1e-8,
            schedule: Vec::new(),
            seed: 0,
            ops: Vec::new(),
            output_dir: None,
            direction: "to-zero".into(),
            z0_re: 0.0,
            z0_im: 0.0,
            eps0: 0.25,
            phi: "exp:alpha=1".into(),
            psi: "inv-t".into(),
            scalar: "const:c=1".into(),
            r1: 0.3,
            r2: 0.9,
            delta: 1.0,
            distortion_delta: 0.5,
            r0: 4.0,
            depth: 8,
            normalization: "unit".into(),
            samples: 16384,
        }
    }
}

impl RunConfig {
    pub fn center(&self) -> num_complex::Complex<f64> {
        num_complex::Complex::new(self.center_re, self.center_im)
    }

    pub fn z0(&self) -> num_complex::Complex<f64> {
        num_complex::Complex::new(self.z0_re, self.z0_im)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |key: &str, msg: String| Error::Config { key: key.into(), line: 0, msg };
        if self.grid_n < 16 || !self.grid_n.is_power_of_two() {
            return Err(cfg("grid-n", format!("{} is not a power of two >= 16", self.grid_n)));
        }
        if !(self.half_width > 0.0) {
            return Err(cfg("half-width", "must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(cfg("tol", "must be positive".into()));
        }
        if !(self.eps0 > 0.0) {
            return Err(cfg("eps0", "must be positive".into()));
        }
        if !(self.r0 > 0.0) {
            return Err(cfg("r0", "must be positive".into()));
        }
        if !(self.r1 > 0.0 && self.r1 < self.r2) {
            return Err(cfg("r1", "need 0 < r1 < r2".into()));
        }
        if !matches!(self.direction.as_str(), "to-zero" | "to-infinity") {
            return Err(cfg("direction", format!("unknown direction `{}`", self.direction)));
        }
        if !matches!(self.normalization.as_str(), "unit" | "full-area") {
            return Err(cfg(
                "normalization",
                format!("unknown normalization `{}`", self.normalization),
            ));
        }
        if !self.schedule.is_empty() {
            if self.schedule.len() < 3 || self.schedule.windows(2).any(|w| w[1] <= w[0]) {
                return Err(cfg(
                    "schedule",
                    "needs at least 3 strictly increasing levels".into(),
                ));
            }
        }
        for op in &self.ops {
            if !KNOWN_OPS.contains(&op.as_str()) {
                return Err(cfg("ops", format!("unknown op `{op}`")));
            }
        }
        Ok(())
    }

    /// Key-value text, one `key = value` per line, lists comma-separated.
    pub fn to_kv_text(&self) -> String {
        let json = serde_json::to_value(self).expect("config serializes");
        let obj = json.as_object().expect("config is an object");
        let mut out = String::new();
        for (k, v) in obj {
            let rendered = match v {
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|x| match x {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {rendered}\n"));
        }
        out
    }
}

/// Parses either the key-value format or JSON (text starting with `{`).
/// Unknown keys are rejected with the offending key and line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let cfg: RunConfig = serde_json::from_str(trimmed).map_err(|e| Error::Config {
            key: String::new(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        return Ok(cfg);
    }

    let defaults = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    let mut obj = defaults.as_object().expect("object").clone();
    // output-dir defaults to None and is skipped above; accept it as a key.
    let list_keys = ["schedule", "ops"];
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| Error::Config {
            key: stripped.to_string(),
            line,
            msg: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |msg: String| Error::Config { key: key.to_string(), line, msg };
        if key == "output-dir" {
            obj.insert(key.into(), serde_json::Value::String(value.to_string()));
            continue;
        }
        let slot = match obj.get(key) {
            Some(v) => v.clone(),
            None => return Err(bad(format!("unknown key `{key}`"))),
        };
        let parsed = if list_keys.contains(&key) {
            let items: Vec<&str> =
                value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            if key == "schedule" {
                let mut levels = Vec::new();
                for it in &items {
                    levels.push(serde_json::Value::from(
                        it.parse::<u32>()
                            .map_err(|_| bad(format!("`{it}` is not an integer level")))?,
                    ));
                }
                serde_json::Value::Array(levels)
            } else {
                serde_json::Value::Array(
                    items.iter().map(|s| serde_json::Value::String(s.to_string())).collect(),
                )
            }
        } else {
            match slot {
                serde_json::Value::String(_) => serde_json::Value::String(value.to_string()),
                serde_json::Value::Number(n) if n.is_u64() => serde_json::Value::from(
                    value
                        .parse::<u64>()
                        .map_err(|_| bad(format!("`{value}` is not a non-negative integer")))?,
                ),
                serde_json::Value::Number(_) => serde_json::Value::from(
                    value.parse::<f64>().map_err(|_| bad(format!("`{value}` is not a number")))?,
                ),
                other => return Err(bad(format!("cannot assign to `{other}`"))),
            }
        };
        obj.insert(key.into(), parsed);
    }
    let cfg: RunConfig =
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| Error::Config {
            key: String::new(),
            line: 0,
            msg: e.to_string(),
        })?;
    cfg.validate()?;
    Ok(cfg)
}
