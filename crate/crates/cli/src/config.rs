//! Experiment configuration: a flat TOML table of scalar keys, layered with
//! command-line overrides.

use std::path::{Path as FsPath, PathBuf};

use pathsum_core::{
    Boundary, Endpoint, FunctionalKind, FunctionalSpec, LatticeSpec, MoveSet, NormalizationSpec,
    PhaseMode, DEFAULT_ENUMERATION_CAP, DEFAULT_TRANSFER_BUDGET,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

/// Every key a config may contain.
pub const KEYS: &[&str] = &[
    "n_slices",
    "eps",
    "delta",
    "site_min",
    "site_max",
    "move_set",
    "boundary",
    "functional",
    "mu",
    "omega",
    "h",
    "offset",
    "mode",
    "norm",
    "a_site",
    "b_site",
    "h_values",
    "compare_sites",
    "seed",
    "n_samples",
    "output_path",
    "format",
    "cap",
    "budget",
    "verify",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("config {path} is not a flat key = value file: {reason}")]
    Syntax { path: PathBuf, reason: String },

    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("missing required config key `{0}`")]
    Missing(&'static str),

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub functional: FunctionalSpec,
    pub mode: PhaseMode,
    pub norm: NormalizationSpec,
    pub a_site: Option<i64>,
    pub b_site: Option<i64>,
    pub h_values: Option<Vec<f64>>,
    /// End sites for `compare-analytic`; defaults to `b_site`.
    pub compare_sites: Option<Vec<i64>>,
    pub seed: Option<u64>,
    pub n_samples: u64,
    pub output_path: PathBuf,
    pub format: Format,
    /// Enumeration cap, in paths.
    pub cap: u64,
    /// Transfer-matrix budget, in matrix entries.
    pub budget: u64,
    /// Brute-force cross-check in `kernel`; defaults to on when both
    /// endpoints are set.
    pub verify: Option<bool>,
}

impl ExperimentConfig {
    /// Reads `path` (if any), then applies `key=value` overrides in order.
    pub fn load(path: Option<&FsPath>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(path) => read_table(path)?,
            None => Table::new(),
        };
        for item in overrides {
            let (key, value) = parse_override(item)?;
            table.insert(key, value);
        }
        Self::from_table(&table)
    }

    pub fn from_table(table: &Table) -> Result<Self, ConfigError> {
        if let Some(key) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        let r = Reader(table);

        let mut lattice = LatticeSpec::new(
            r.require("n_slices")?,
            r.require("eps")?,
            r.require("delta")?,
            r.require("site_min")?,
            r.require("site_max")?,
            r.get("move_set")?.unwrap_or(MoveSet::Local),
        )
        .map_err(|e| ConfigError::Invalid { key: "lattice", reason: e.to_string() })?;
        lattice.boundary = r.get("boundary")?.unwrap_or(Boundary::HardWall);

        let functional = FunctionalSpec {
            kind: r.get("functional")?.unwrap_or(FunctionalKind::FreeAction),
            mu: r.get("mu")?.unwrap_or(1.0),
            omega: r.get("omega")?.unwrap_or(0.0),
            h: r.get("h")?.unwrap_or(std::f64::consts::TAU),
            offset: r.get("offset")?.unwrap_or(0.0),
        };
        functional
            .validate()
            .map_err(|e| ConfigError::Invalid { key: "functional", reason: e.to_string() })?;

        Ok(Self {
            lattice,
            functional,
            mode: r.get("mode")?.unwrap_or_default(),
            norm: r.get("norm")?.unwrap_or(NormalizationSpec::Unit),
            a_site: r.get("a_site")?,
            b_site: r.get("b_site")?,
            h_values: r.list("h_values")?,
            compare_sites: r.list("compare_sites")?,
            seed: r.seed()?,
            n_samples: r.get("n_samples")?.unwrap_or(10),
            output_path: r.get::<String>("output_path")?.unwrap_or_else(|| "out".into()).into(),
            format: r.get("format")?.unwrap_or_default(),
            cap: r.get("cap")?.unwrap_or(DEFAULT_ENUMERATION_CAP as u64),
            budget: r.get("budget")?.unwrap_or(DEFAULT_TRANSFER_BUDGET as u64),
            verify: r.get("verify")?,
        })
    }

    pub fn a(&self) -> Result<Endpoint, ConfigError> {
        let site = self.a_site.ok_or(ConfigError::Missing("a_site"))?;
        Ok(Endpoint::new(0, site))
    }

    pub fn b(&self) -> Result<Endpoint, ConfigError> {
        let site = self.b_site.ok_or(ConfigError::Missing("b_site"))?;
        Ok(Endpoint::new(self.lattice.n_slices, site))
    }

    /// The effective configuration as a table that [`Self::from_table`]
    /// reads back unchanged.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        let mut put = |key: &str, value: Value| {
            t.insert(key.to_string(), value);
        };
        let l = &self.lattice;
        put("n_slices", Value::Integer(l.n_slices as i64));
        put("eps", Value::Float(l.eps));
        put("delta", Value::Float(l.delta));
        put("site_min", Value::Integer(l.site_min));
        put("site_max", Value::Integer(l.site_max));
        put("move_set", enum_value(&l.move_set));
        put("boundary", enum_value(&l.boundary));
        let f = &self.functional;
        put("functional", enum_value(&f.kind));
        put("mu", Value::Float(f.mu));
        put("omega", Value::Float(f.omega));
        put("h", Value::Float(f.h));
        put("offset", Value::Float(f.offset));
        put("mode", enum_value(&self.mode));
        put("norm", enum_value(&self.norm));
        if let Some(a) = self.a_site {
            put("a_site", Value::Integer(a));
        }
        if let Some(b) = self.b_site {
            put("b_site", Value::Integer(b));
        }
        if let Some(hs) = &self.h_values {
            put("h_values", Value::Array(hs.iter().map(|&h| Value::Float(h)).collect()));
        }
        if let Some(cs) = &self.compare_sites {
            put("compare_sites", Value::Array(cs.iter().map(|&c| Value::Integer(c)).collect()));
        }
        if let Some(seed) = self.seed {
            // TOML integers are signed 64-bit.
            let v = i64::try_from(seed)
                .map(Value::Integer)
                .unwrap_or_else(|_| Value::String(seed.to_string()));
            put("seed", v);
        }
        put("n_samples", u64_value(self.n_samples));
        put("output_path", Value::String(self.output_path.display().to_string()));
        put("format", enum_value(&self.format));
        put("cap", u64_value(self.cap));
        put("budget", u64_value(self.budget));
        if let Some(v) = self.verify {
            put("verify", Value::Boolean(v));
        }
        t
    }
}

fn enum_value<T: Serialize>(v: &T) -> Value {
    Value::try_from(v).expect("unit enum serializes to a string")
}

fn u64_value(v: u64) -> Value {
    i64::try_from(v).map(Value::Integer).unwrap_or(Value::Integer(i64::MAX))
}

fn read_table(path: &FsPath) -> Result<Table, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax {
        path: path.to_owned(),
        reason: e.message().to_string(),
    })?;
    if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table()) {
        return Err(ConfigError::Syntax {
            path: path.to_owned(),
            reason: format!("`{key}` is a section; only top-level keys are allowed"),
        });
    }
    Ok(table)
}

/// `key=value`, where the value is read as a TOML value if it parses as
/// one and as a bare string otherwise.
fn parse_override(item: &str) -> Result<(String, Value), ConfigError> {
    let (key, raw) = item.split_once('=').ok_or_else(|| ConfigError::BadOverride(item.into()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::BadOverride(item.into()));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

struct Reader<'a>(&'a Table);

impl Reader<'_> {
    fn get<T: DeserializeOwned>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        self.0
            .get(key)
            .map(|v| {
                v.clone().try_into().map_err(|e: toml::de::Error| ConfigError::Invalid {
                    key,
                    reason: format!("{} ({})", e.message(), v),
                })
            })
            .transpose()
    }

    fn require<T: DeserializeOwned>(&self, key: &'static str) -> Result<T, ConfigError> {
        self.get(key)?.ok_or(ConfigError::Missing(key))
    }

    /// An array, a single scalar, or a comma-separated string such as
    /// `10,1,0.1`.
    fn list<T>(&self, key: &'static str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: DeserializeOwned + std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            Some(Value::String(s)) => s
                .split(',')
                .map(|part| {
                    part.trim().parse::<T>().map_err(|e| ConfigError::Invalid {
                        key,
                        reason: format!("`{}`: {e}", part.trim()),
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
            Some(v @ (Value::Integer(_) | Value::Float(_))) => {
                let one = Table::from_iter([(key.to_string(), Value::Array(vec![v.clone()]))]);
                Reader(&one).get(key)
            }
            _ => self.get(key),
        }
    }

    fn seed(&self) -> Result<Option<u64>, ConfigError> {
        match self.0.get("seed") {
            Some(Value::String(s)) => s
                .parse()
                .map(Some)
                .map_err(|e| ConfigError::Invalid { key: "seed", reason: format!("`{s}`: {e}") }),
            _ => self.get("seed"),
        }
    }
}
