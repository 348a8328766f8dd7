//! Flat key-value configuration merged from a TOML file, `EXASP_*`
//! environment variables and command-line flags, in increasing precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use exasp::propagator::Method;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Prefix of environment variables that override configuration keys.
pub const ENV_PREFIX: &str = "EXASP_";

macro_rules! settings {
    ($($field:ident => $key:literal, $flag:literal, $help:literal;)*) => {
        /// Every configuration key as an optional command-line flag.
        #[derive(clap::Args, Clone, Debug, Default)]
        pub struct Settings {
            /// TOML file with configuration keys.
            #[arg(long, value_name = "PATH")]
            pub config: Option<PathBuf>,
            $(
                #[arg(long = $flag, value_name = "VALUE", help = $help)]
                pub $field: Option<String>,
            )*
            /// Swept axis `KEY=V1,V2,...`; repeat for a second axis.
            #[arg(long = "sweep", value_name = "KEY=VALUES")]
            pub sweep: Vec<String>,
        }

        /// Configuration keys that accept a single value.
        pub const KEYS: &[&str] = &[$($key),*];

        impl Settings {
            fn flag_entries(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(($key, v.as_str()));
                    }
                )*
                out
            }
        }
    };
}

settings! {
    model => "model", "model", "twolevel, hubbard or molecule";
    epsilon => "epsilon", "epsilon", "two-level half splitting";
    g => "g", "g", "two-level diabatic coupling";
    mu => "mu", "mu", "two-level transition dipole";
    sites => "sites", "sites", "Hubbard chain length";
    hopping => "hopping", "hopping", "Hubbard hopping t";
    u => "u", "u", "Hubbard on-site repulsion U";
    electrons => "electrons", "electrons", "Hubbard electron count (default: half filling)";
    integrals => "integrals", "integrals", "FCIDUMP-style integrals file";
    dipoles => "dipoles", "dipoles", "dipole integrals file";
    polarization => "polarization", "polarization", "field polarization as x,y,z";
    omega_max => "omega_max", "omega-max", "final photon frequency, or auto for twice the bright excitation energy";
    lambda_max => "lambda_max", "lambda-max", "peak coupling strength";
    total_time => "T", "T", "total evolution time";
    dt => "dt", "dt", "time step";
    steps => "steps", "steps", "number of steps (overrides dt)";
    method => "method", "method", "exact or trotter";
    record_every => "record_every", "record-every", "trace row interval in steps";
    layers => "layers", "layers", "tUPS layers for a variational initial state";
    checkpoint => "checkpoint", "checkpoint", "tUPS checkpoint used as initial state";
    seed => "seed", "seed", "random seed";
    replicas => "replicas", "replicas", "parallel-tempering replicas";
    bhpt_steps => "bhpt_steps", "bhpt-steps", "basin-hopping steps per replica";
    n_states => "n_states", "n-states", "eigenvalues kept per spectrum point";
    points => "points", "points", "spectrum grid points";
    skip_prep => "skip_prep", "skip-prep", "emit the pathway without a ground-state preparation";
    optimize => "optimize", "optimize", "peephole-optimize emitted circuits";
    workers => "workers", "workers", "concurrent sweep runs (default: logical cores)";
    output => "output", "output", "output path prefix";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Twolevel,
    Hubbard,
    Molecule,
}

/// `auto` or an explicit frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OmegaMax {
    Auto,
    Value(f64),
}

impl Serialize for OmegaMax {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OmegaMax::Auto => s.serialize_str("auto"),
            OmegaMax::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for OmegaMax {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(OmegaMax::Value(v)),
            Raw::Text(t) if t.eq_ignore_ascii_case("auto") => Ok(OmegaMax::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", got {t:?}"
            ))),
        }
    }
}

/// Unnormalized polarization vector, written `x,y,z` or as a 3-array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Polarization(pub [f64; 3]);

impl<'de> Deserialize<'de> for Polarization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Array([f64; 3]),
            Text(String),
        }
        let v = match Raw::deserialize(d)? {
            Raw::Array(a) => a,
            Raw::Text(t) => {
                let parts: Vec<f64> = t
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| serde::de::Error::custom(format!("bad polarization {t:?}: {e}")))?;
                <[f64; 3]>::try_from(parts)
                    .map_err(|_| serde::de::Error::custom(format!("polarization {t:?} needs three components")))?
            }
        };
        Ok(Polarization(v))
    }
}

/// Fully merged run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelKind,
    pub epsilon: f64,
    pub g: f64,
    pub mu: f64,
    pub sites: usize,
    pub hopping: f64,
    pub u: f64,
    pub electrons: Option<usize>,
    pub integrals: Option<PathBuf>,
    pub dipoles: Option<PathBuf>,
    pub polarization: Polarization,
    pub omega_max: OmegaMax,
    pub lambda_max: f64,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub dt: f64,
    pub steps: Option<usize>,
    pub method: Method,
    pub record_every: Option<usize>,
    pub layers: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub seed: u64,
    pub replicas: usize,
    pub bhpt_steps: usize,
    pub n_states: usize,
    pub points: usize,
    pub skip_prep: bool,
    pub optimize: bool,
    pub workers: Option<usize>,
    pub output: PathBuf,
    pub sweep: Vec<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            model: ModelKind::Twolevel,
            epsilon: 1.0,
            g: 0.0,
            mu: 1.0,
            sites: 4,
            hopping: 1.0,
            u: 4.0,
            electrons: None,
            integrals: None,
            dipoles: None,
            polarization: Polarization([0.0, 0.0, 1.0]),
            omega_max: OmegaMax::Auto,
            lambda_max: 1.0,
            total_time: 10.0,
            dt: 0.1,
            steps: None,
            method: Method::Exact,
            record_every: None,
            layers: None,
            checkpoint: None,
            seed: 0,
            replicas: 8,
            bhpt_steps: 250,
            n_states: 12,
            points: 101,
            skip_prep: false,
            optimize: true,
            workers: None,
            output: PathBuf::from("exasp"),
            sweep: Vec::new(),
        }
    }
}

impl Config {
    /// `<output>.<extension>`.
    pub fn output_path(&self, extension: &str) -> PathBuf {
        let mut name = self.output.clone().into_os_string();
        name.push(".");
        name.push(extension);
        PathBuf::from(name)
    }
}

/// A value as written on the command line or in the environment: TOML
/// syntax when it parses, a bare string otherwise.
pub fn parse_value(text: &str) -> toml::Value {
    match format!("v = {text}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}

fn load_file(path: &Path) -> Result<toml::Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(table)
}

/// Merged key table: file < environment < flags.
pub fn merged_table<F>(settings: &Settings, env: F) -> Result<toml::Table>
where
    F: Fn(&str) -> Option<String>,
{
    let mut table = match &settings.config {
        Some(path) => load_file(path)?,
        None => toml::Table::new(),
    };
    for key in KEYS.iter().copied().chain(["sweep"]) {
        if let Some(v) = env(&format!("{ENV_PREFIX}{}", key.to_uppercase())) {
            let value = if key == "sweep" {
                toml::Value::Array(v.split(';').map(|a| toml::Value::String(a.trim().into())).collect())
            } else {
                parse_value(&v)
            };
            table.insert(key.into(), value);
        }
    }
    for (key, v) in settings.flag_entries() {
        table.insert(key.into(), parse_value(v));
    }
    if !settings.sweep.is_empty() {
        let axes = settings.sweep.iter().map(|a| toml::Value::String(a.clone())).collect();
        table.insert("sweep".into(), toml::Value::Array(axes));
    }
    Ok(table)
}

/// Deserializes a merged table, naming the offending key on failure.
pub fn from_table(table: toml::Table) -> Result<Config> {
    let config: Config = table.try_into().context("invalid configuration")?;
    config.validate()?;
    Ok(config)
}

/// Configuration for the current process: file, `EXASP_*` variables, flags.
pub fn resolve(settings: &Settings) -> Result<Config> {
    from_table(merged_table(settings, |k| std::env::var(k).ok())?)
}

impl Config {
    fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                bail!("configuration key `{key}` must be positive, got {v}");
            }
            Ok(())
        };
        positive("T", self.total_time)?;
        positive("dt", self.dt)?;
        if !(self.lambda_max.is_finite() && self.lambda_max >= 0.0) {
            bail!(
                "configuration key `lambda_max` must be non-negative, got {}",
                self.lambda_max
            );
        }
        if let OmegaMax::Value(w) = self.omega_max {
            positive("omega_max", w)?;
        }
        if self.steps == Some(0) {
            bail!("configuration key `steps` must be at least 1");
        }
        if self.layers == Some(0) {
            bail!("configuration key `layers` must be at least 1");
        }
        if self.workers == Some(0) {
            bail!("configuration key `workers` must be at least 1");
        }
        if self.model == ModelKind::Molecule && self.integrals.is_none() {
            bail!("configuration key `integrals` is required for the molecule model");
        }
        if self.layers.is_some() && self.checkpoint.is_some() {
            bail!("configuration keys `layers` and `checkpoint` are mutually exclusive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn values_parse_as_toml_or_string() {
        assert_eq!(parse_value("4"), toml::Value::Integer(4));
        assert_eq!(parse_value("0.5"), toml::Value::Float(0.5));
        assert_eq!(parse_value("auto"), toml::Value::String("auto".into()));
        assert_eq!(parse_value("0,1,0"), toml::Value::String("0,1,0".into()));
        assert_eq!(parse_value("true"), toml::Value::Boolean(true));
    }

    #[test]
    fn precedence_file_env_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "model = \"hubbard\"\nu = 2\nT = 5\ndt = 0.5\n").unwrap();
        let mut s = settings();
        s.config = Some(path);
        s.u = Some("8".into());
        let env = |k: &str| match k {
            "EXASP_U" => Some("3".into()),
            "EXASP_T" => Some("7".into()),
            _ => None,
        };
        let cfg = from_table(merged_table(&s, env).unwrap()).unwrap();
        assert_eq!(cfg.model, ModelKind::Hubbard);
        assert_eq!(cfg.u, 8.0);
        assert_eq!(cfg.total_time, 7.0);
        assert_eq!(cfg.dt, 0.5);
    }

    #[test]
    fn polarization_and_omega_forms() {
        let mut s = settings();
        s.polarization = Some("0, 1, 0".into());
        s.omega_max = Some("0.15".into());
        let cfg = from_table(merged_table(&s, |_| None).unwrap()).unwrap();
        assert_eq!(cfg.polarization.0, [0.0, 1.0, 0.0]);
        assert_eq!(cfg.omega_max, OmegaMax::Value(0.15));
        let cfg: Config = toml::from_str("polarization = [1, 0, 0]\nomega_max = \"auto\"").unwrap();
        assert_eq!(cfg.polarization.0, [1.0, 0.0, 0.0]);
        assert_eq!(cfg.omega_max, OmegaMax::Auto);
    }

    #[test]
    fn errors_name_the_key() {
        let mut s = settings();
        s.lambda_max = Some("fast".into());
        let err = format!("{:#}", from_table(merged_table(&s, |_| None).unwrap()).unwrap_err());
        assert!(err.contains("lambda_max"), "{err}");
        let err = format!("{:#}", toml::from_str::<Config>("omega = 1").unwrap_err());
        assert!(err.contains("omega"), "{err}");
        let mut s = settings();
        s.dt = Some("-1".into());
        let err = format!("{:#}", from_table(merged_table(&s, |_| None).unwrap()).unwrap_err());
        assert!(err.contains("`dt`"), "{err}");
    }

    #[test]
    fn sweep_axes_from_flags_and_env() {
        let mut s = settings();
        s.sweep = vec!["T=5,10".into()];
        let cfg = from_table(merged_table(&s, |_| None).unwrap()).unwrap();
        assert_eq!(cfg.sweep, vec!["T=5,10".to_string()]);
        let env = |k: &str| (k == "EXASP_SWEEP").then(|| "u=1,2; layers=1,2".to_string());
        let cfg = from_table(merged_table(&settings(), env).unwrap()).unwrap();
        assert_eq!(cfg.sweep, vec!["u=1,2".to_string(), "layers=1,2".to_string()]);
    }

    #[test]
    fn output_paths() {
        let cfg = Config {
            output: PathBuf::from("out/run1"),
            ..Config::default()
        };
        assert_eq!(cfg.output_path("csv"), PathBuf::from("out/run1.csv"));
    }
}
