use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::Initializer;
use crate::error::{Error, Result};
use crate::network::Topology;

/// Step size of the reference simulation (20 players on a random tree).
pub const PAPER_SIM_ALPHA: f64 = 0.05;

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    /// `0.9 * alpha_max`.
    Auto,
    /// Exactly this value, even outside the admissible range.
    Fixed(f64),
    /// `min(value, 0.9 * alpha_max)`.
    Capped(f64),
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Auto => f.write_str("auto"),
            AlphaSpec::Fixed(v) => write!(f, "{v:?}"),
            AlphaSpec::Capped(v) => write!(f, "capped:{v:?}"),
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let positive = |t: &str| -> Result<f64> {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad step size `{t}`")))?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::input(format!("step size must be positive, got {v}")));
            }
            Ok(v)
        };
        if s.eq_ignore_ascii_case("auto") {
            Ok(AlphaSpec::Auto)
        } else if let Some(rest) = s.strip_prefix("capped:") {
            Ok(AlphaSpec::Capped(positive(rest)?))
        } else {
            Ok(AlphaSpec::Fixed(positive(s)?))
        }
    }
}

impl Serialize for AlphaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaSpec::Fixed(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 && v.is_finite() => Ok(AlphaSpec::Fixed(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("step size must be positive, got {v}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// One experiment. Parsed from TOML; every field is optional.
///
/// ```toml
/// n = 20
/// game_seed = 1
/// graph_seed = 2
/// init_seed = 3
/// coupling_scale = 0.2
/// topology = "tree"          # tree | ring | complete | star
/// alpha = "auto"             # "auto" | 0.05 | "capped:0.05"
/// init = "uniform"           # uniform | zero | self-knowledge
/// max_iters = 1000
/// tol = 0.0                  # 0 runs the full horizon
/// check_lemmas = true
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub game_seed: u64,
    pub graph_seed: u64,
    pub init_seed: u64,
    pub coupling_scale: f64,
    pub topology: Topology,
    pub alpha: AlphaSpec,
    pub init: Initializer,
    pub max_iters: usize,
    pub tol: f64,
    pub check_lemmas: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            game_seed: 1,
            graph_seed: 2,
            init_seed: 3,
            coupling_scale: 0.2,
            topology: Topology::Tree,
            alpha: AlphaSpec::Auto,
            init: Initializer::Uniform,
            max_iters: 1000,
            tol: 0.0,
            check_lemmas: true,
        }
    }
}

impl ExperimentConfig {
    /// Named presets. `paper-sim`: 20 players on a random tree with step size
    /// `min(0.05, 0.9 * alpha_max)`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-sim" => Ok(Self {
                alpha: AlphaSpec::Capped(PAPER_SIM_ALPHA),
                ..Self::default()
            }),
            "default" => Ok(Self::default()),
            other => Err(Error::input(format!("unknown preset `{other}`"))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `text` with every missing field taken from `base`.
    pub fn from_toml_over(base: &Self, text: &str) -> Result<Self> {
        let parse = |t: &str| toml::from_str::<toml::Table>(t).map_err(|e| Error::parse(e.to_string()));
        let mut table = parse(&base.to_toml())?;
        table.extend(parse(text)?);
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::input(format!("n must be at least 2, got {}", self.n)));
        }
        if self.n < self.topology.min_nodes() {
            return Err(Error::input(format!(
                "{} needs at least {} nodes",
                self.topology,
                self.topology.min_nodes()
            )));
        }
        if !(self.coupling_scale >= 0.0) || !self.coupling_scale.is_finite() {
            return Err(Error::input("coupling_scale must be finite and non-negative"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::input("tol must be non-negative"));
        }
        Ok(())
    }
}
