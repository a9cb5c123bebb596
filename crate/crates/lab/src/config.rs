//! Experiment configuration: a flat `key = value` file (TOML syntax, no
//! tables) merged with command-line flags. Flags win over the file, the file
//! wins over schema defaults.
//!
//! The schema for every subcommand lives in [`schema`] and is documented in
//! `config-schema.md` at the crate root.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    IntList,
    FloatList,
    Str,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    /// `None` marks an optional key with no default.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Key {
    Key {
        name,
        kind,
        default,
        help,
    }
}

pub const SUBCOMMANDS: [&str; 9] = [
    "project",
    "besov",
    "simulate2d",
    "simulate3d",
    "pipeline",
    "picard",
    "example",
    "conditions",
    "scan",
];

const SEED: Key = key("seed", Kind::Int, Some("0"), "seed of the ChaCha8 generator");
const N: Key = key("N", Kind::Int, Some("32"), "vertical oscillation frequency");
const N0: Key = key("N0", Kind::Int, Some("2"), "horizontal frequency bound of v0h");
const AMP: Key = key("amp", Kind::Float, Some("1"), "L2 norm of v0h on T^2");
const H_RES: Key = key("h_res", Kind::Int, Some("16"), "horizontal resolution of example grids");
const N3: Key = key("n3", Kind::Int, Some("8"), "vertical points of example grids (stride N)");
const INPUT: Key = key("input", Kind::Str, None, "CGNS1 snapshot to read instead of random data");
const RESOLUTION: Key = key("resolution", Kind::Int, Some("32"), "points per axis");
const DIM: Key = key("dim", Kind::Int, Some("3"), "torus dimension, 2 or 3");
const KMAX: Key = key("kmax", Kind::Float, Some("8"), "largest |k| of random data");
const DT: Key = key("dt", Kind::Float, Some("0.001"), "time step");
const T_END: Key = key("t_end", Kind::Float, Some("1"), "final time");
const SCHEME: Key = key("scheme", Kind::Choice(&["ifrk4"]), Some("ifrk4"), "time integrator");
const SNAP: Key = key("snapshot_stride", Kind::Int, Some("100"), "steps between snapshots");
const DIAG: Key = key("diag_stride", Kind::Int, Some("10"), "steps between diagnostics records");
const P_BLOWUP: Key = key("p_blowup", Kind::Float, Some("8"), "Lebesgue index of the blow-up integral");
const P: Key = key("p", Kind::Float, Some("8"), "Lebesgue index, in (6, inf)");
const INTERVALS: Key = key("intervals", Kind::Int, Some("80"), "Simpson intervals of the time integrals");
const HEAT_POINTS: Key = key("heat_points", Kind::Int, Some("100"), "heat quadrature points of the inner Besov norm");

pub fn schema(sub: &str) -> Option<Vec<Key>> {
    let keys = match sub {
        "example" => vec![
            N,
            N0,
            AMP,
            H_RES,
            N3,
            SEED,
            key("out", Kind::Str, Some("u0.cgns"), "snapshot file name"),
        ],
        "project" => vec![
            INPUT,
            RESOLUTION,
            DIM,
            KMAX,
            SEED,
            key("out", Kind::Str, Some("projected.cgns"), "snapshot file name"),
        ],
        "besov" => vec![
            INPUT,
            RESOLUTION,
            DIM,
            KMAX,
            SEED,
            key("s", Kind::Float, Some("-1"), "regularity index (negative for the heat method)"),
            key("p", Kind::Float, Some("inf"), "Lebesgue index"),
            key("q", Kind::Float, Some("2"), "summation index"),
            key("method", Kind::Choice(&["dyadic", "heat", "both"]), Some("both"), "characterisation"),
            key("points", Kind::Int, Some("200"), "heat quadrature points"),
            key("blocks_out", Kind::Str, None, "file prefix for Littlewood-Paley blocks"),
        ],
        "simulate2d" => vec![
            key("init", Kind::Choice(&["taylor-green", "random", "file"]), Some("taylor-green"), "initial data"),
            INPUT,
            key("resolution", Kind::Int, Some("64"), "points per axis"),
            AMP,
            key("kmax", Kind::Float, Some("4"), "largest |k| of random data"),
            DT,
            T_END,
            SCHEME,
            SNAP,
            DIAG,
            P_BLOWUP,
            SEED,
        ],
        "simulate3d" => vec![
            key("init", Kind::Choice(&["abc", "random", "example", "file"]), Some("abc"), "initial data"),
            INPUT,
            RESOLUTION,
            key("amp", Kind::Float, Some("1"), "amplitude (ABC, random) or L2 norm of v0h (example)"),
            key("kmax", Kind::Float, Some("4"), "largest |k| of random data"),
            N,
            N0,
            H_RES,
            N3,
            DT,
            T_END,
            SCHEME,
            SNAP,
            DIAG,
            P_BLOWUP,
            SEED,
        ],
        "pipeline" => vec![
            N,
            N0,
            AMP,
            key("h_res", Kind::Int, Some("32"), "horizontal resolution"),
            key("n3", Kind::Int, Some("32"), "vertical points (stride N)"),
            SEED,
            DT,
            T_END,
            P,
            key("coupling", Kind::Choice(&["lockstep", "sequential"]), Some("lockstep"), "how u_2D feeds R"),
            key("lambdas", Kind::FloatList, Some("1,10,100"), "weights of the X_lambda table"),
            key("snapshot_stride", Kind::Int, Some("100"), "steps between recorded samples"),
            key("snapshots", Kind::Choice(&["none", "final", "all"]), Some("none"), "CGNS1 export of u_F, u_2D, R"),
        ],
        "picard" => vec![
            key("resolution", Kind::Int, Some("16"), "points per axis of T^3"),
            key("reference_amp", Kind::Float, Some("0.2"), "amplitude of the decaying ABC reference flow"),
            key("amp", Kind::Float, Some("2"), "L2 norm of R0"),
            key("kmax", Kind::Float, Some("3"), "largest |k| of R0"),
            key("nodes", Kind::Int, Some("100"), "time intervals"),
            T_END,
            key("lambda", Kind::Float, Some("1"), "weight of the X_lambda norm"),
            P,
            key("max_iters", Kind::Int, Some("40"), "iteration cap"),
            key("tol", Kind::Float, Some("1e-12"), "relative increment stopping tolerance"),
            key("compare_dt", Kind::Float, None, "also time-step with this dt and report the distance"),
            SEED,
        ],
        "conditions" | "scan" => vec![
            key("mode", Kind::Choice(&["check", "scan"]), Some(if sub == "scan" { "scan" } else { "check" }), "single report or N scan"),
            key("N", Kind::IntList, Some("32"), "frequency, or list for a scan"),
            N0,
            AMP,
            key("amp_law", Kind::Choice(&["fixed", "log19"]), Some("fixed"), "amp per N: fixed, or (log N)^(1/9)"),
            P,
            H_RES,
            N3,
            INTERVALS,
            HEAT_POINTS,
            SEED,
        ],
        _ => return None,
    };
    Some(keys)
}

/// Parses one textual value according to its kind.
pub fn parse_value(k: &Key, text: &str) -> Result<Value, LabError> {
    let bad = || LabError::Config(format!("invalid value `{text}` for `{}`", k.name));
    let float = |s: &str| -> Result<f64, LabError> {
        let v: f64 = s.trim().parse().map_err(|_| bad())?;
        if v.is_nan() {
            return Err(bad());
        }
        Ok(v)
    };
    Ok(match k.kind {
        Kind::Int => json!(text.trim().parse::<u64>().map_err(|_| bad())?),
        Kind::Float => float_value(float(text)?),
        Kind::IntList => Value::Array(
            text.split(',')
                .map(|s| s.trim().parse::<u64>().map(|v| json!(v)).map_err(|_| bad()))
                .collect::<Result<_, _>>()?,
        ),
        Kind::FloatList => Value::Array(
            text.split(',')
                .map(|s| float(s).map(float_value))
                .collect::<Result<_, _>>()?,
        ),
        Kind::Str => json!(text),
        Kind::Choice(opts) => {
            if !opts.contains(&text) {
                return Err(LabError::Config(format!(
                    "`{}` must be one of {}, got `{text}`",
                    k.name,
                    opts.join(", ")
                )));
            }
            json!(text)
        }
    })
}

/// JSON has no infinity; it is carried as the string "inf".
fn float_value(v: f64) -> Value {
    if v.is_infinite() {
        json!(if v > 0.0 { "inf" } else { "-inf" })
    } else {
        json!(v)
    }
}

fn toml_to_text(v: &toml::Value) -> Option<String> {
    Some(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(a) => a.iter().map(toml_to_text).collect::<Option<Vec<_>>>()?.join(","),
        _ => return None,
    })
}

/// Reads a flat config file into `key -> text`.
pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, LabError> {
    let text = std::fs::read_to_string(path)?;
    parse_file(&text)
}

pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, LabError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::Config(format!("config file: {}", e.message())))?;
    table
        .iter()
        .map(|(k, v)| {
            toml_to_text(v)
                .map(|t| (k.clone(), t))
                .ok_or_else(|| LabError::Config(format!("key `{k}` must be a scalar or a flat list")))
        })
        .collect()
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub subcommand: String,
    pub values: BTreeMap<String, Value>,
}

impl ResolvedConfig {
    /// Merges schema defaults, file entries and flag entries (in that order).
    pub fn resolve(
        sub: &str,
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, LabError> {
        let keys = schema(sub).ok_or_else(|| LabError::Config(format!("unknown subcommand `{sub}`")))?;
        for name in file.keys().chain(flags.keys()) {
            if !keys.iter().any(|k| k.name == name) {
                return Err(LabError::Config(format!("unknown key `{name}` for `{sub}`")));
            }
        }
        let mut values = BTreeMap::new();
        for k in &keys {
            let text = flags
                .get(k.name)
                .map(String::as_str)
                .or_else(|| file.get(k.name).map(String::as_str))
                .or(k.default);
            if let Some(t) = text {
                values.insert(k.name.to_string(), parse_value(k, t)?);
            }
        }
        Ok(Self {
            subcommand: sub.to_string(),
            values,
        })
    }

    /// Canonical JSON (sorted keys) of the subcommand and its values.
    pub fn canonical(&self) -> Value {
        json!({ "subcommand": self.subcommand, "config": self.values })
    }

    /// SHA-256 of the canonical JSON text.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.canonical()).expect("serialisable");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn get(&self, name: &str) -> Result<&Value, LabError> {
        self.values
            .get(name)
            .ok_or_else(|| LabError::Config(format!("missing key `{name}`")))
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn usize(&self, name: &str) -> Result<usize, LabError> {
        self.get(name)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| LabError::Config(format!("`{name}` must be an integer")))
    }

    pub fn f64(&self, name: &str) -> Result<f64, LabError> {
        value_f64(self.get(name)?).ok_or_else(|| LabError::Config(format!("`{name}` must be a number")))
    }

    pub fn str(&self, name: &str) -> Result<&str, LabError> {
        self.get(name)?
            .as_str()
            .ok_or_else(|| LabError::Config(format!("`{name}` must be a string")))
    }

    pub fn opt_str(&self, name: &str) -> Option<&str> {
        self.values.get(name).and_then(Value::as_str)
    }

    pub fn usize_list(&self, name: &str) -> Result<Vec<usize>, LabError> {
        let v = self.get(name)?;
        let arr = v
            .as_array()
            .ok_or_else(|| LabError::Config(format!("`{name}` must be a list")))?;
        arr.iter()
            .map(|x| x.as_u64().map(|v| v as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| LabError::Config(format!("`{name}` must list integers")))
    }

    pub fn f64_list(&self, name: &str) -> Result<Vec<f64>, LabError> {
        let v = self.get(name)?;
        let arr = v
            .as_array()
            .ok_or_else(|| LabError::Config(format!("`{name}` must be a list")))?;
        arr.iter()
            .map(value_f64)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| LabError::Config(format!("`{name}` must list numbers")))
    }
}

fn value_f64(v: &Value) -> Option<f64> {
    match v {
        Value::String(s) if s == "inf" => Some(f64::INFINITY),
        Value::String(s) if s == "-inf" => Some(f64::NEG_INFINITY),
        _ => v.as_f64(),
    }
}

/// Output root: the `--out-dir` flag, else `NSLAB_OUT`, else the working
/// directory.
pub fn output_root(flag: Option<&str>) -> PathBuf {
    flag.map(PathBuf::from)
        .or_else(|| std::env::var_os("NSLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}
