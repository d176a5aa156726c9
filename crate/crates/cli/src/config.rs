//! Experiment configuration: defaults, a flat `key = value` file, and
//! command-line overrides (flags win over the file).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lincon::env::SynthKind;
use lincon::PolicyKind;

use crate::error::CliError;

pub const DEFAULT_RUNS: usize = 16;
pub const DEFAULT_HORIZON: f64 = 50_000.0;
pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Csv(PathBuf),
    Synthetic {
        kind: SynthKind,
        n: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    LinConTs,
    LinConKlUcb,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::LinConTs => "linconts",
            Algo::LinConKlUcb => "linconklucb",
        }
    }

    pub fn policy(self, klucb_c: f64) -> PolicyKind {
        match self {
            Algo::LinConTs => PolicyKind::LinConTs,
            Algo::LinConKlUcb => PolicyKind::LinConKlUcb { c: klucb_c },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    /// Overrides the instance's default threshold.
    pub eta: Option<f64>,
    /// Real-valued so that bound reports can use any `T >= 1`; simulations
    /// require an integer.
    pub horizon: f64,
    pub runs: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algo>,
    pub klucb_c: f64,
    pub gamma: f64,
    pub output_dir: Option<PathBuf>,
    pub grid_points: usize,
    pub jobs: usize,
}

/// Raw settings as strings, keyed by long flag name without the dashes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "instance",
    "synthetic",
    "n",
    "instance-seed",
    "eta",
    "horizon",
    "runs",
    "seed",
    "algo",
    "klucb-c",
    "gamma",
    "out",
    "jobs",
    "grid-points",
];

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key `{key}`",
                    idx + 1
                )));
            }
            map.insert(key, value.trim().to_owned());
        }
        Ok(Settings(map))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_owned(), value.into());
    }

    /// Layers `other` on top of `self`.
    pub fn merged(mut self, other: Settings) -> Self {
        self.0.extend(other.0);
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Config(format!("invalid value `{v}` for {key}")))
            })
            .transpose()
    }

    pub fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let instance = match (self.get("instance"), self.get("synthetic")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "--instance and --synthetic are mutually exclusive".into(),
                ))
            }
            (Some(path), None) => InstanceSource::Csv(PathBuf::from(path)),
            (None, Some(kind)) => InstanceSource::Synthetic {
                kind: kind.parse().map_err(|e| CliError::Config(format!("{e}")))?,
                n: self.parsed("n")?.unwrap_or(50),
                seed: self.parsed("instance-seed")?.unwrap_or(0),
            },
            (None, None) => {
                return Err(CliError::Config(
                    "one of --instance or --synthetic is required".into(),
                ))
            }
        };
        let algorithms = match self.get("algo").unwrap_or("linconts,linconklucb") {
            "both" | "all" => vec![Algo::LinConTs, Algo::LinConKlUcb],
            list => {
                let mut algos = Vec::new();
                for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let algo = match name {
                        "linconts" => Algo::LinConTs,
                        "linconklucb" => Algo::LinConKlUcb,
                        other => {
                            return Err(CliError::Config(format!("unknown algorithm `{other}`")))
                        }
                    };
                    if !algos.contains(&algo) {
                        algos.push(algo);
                    }
                }
                algos
            }
        };
        let config = ExperimentConfig {
            instance,
            eta: self.parsed("eta")?,
            horizon: self.parsed("horizon")?.unwrap_or(DEFAULT_HORIZON),
            runs: self.parsed("runs")?.unwrap_or(DEFAULT_RUNS),
            base_seed: self.parsed("seed")?.unwrap_or(0),
            algorithms,
            klucb_c: self.parsed("klucb-c")?.unwrap_or(0.0),
            gamma: self.parsed("gamma")?.unwrap_or(DEFAULT_GAMMA),
            output_dir: self.get("out").map(PathBuf::from),
            grid_points: self.parsed("grid-points")?.unwrap_or(DEFAULT_GRID_POINTS),
            jobs: self.parsed("jobs")?.unwrap_or(1),
        };
        config.validate()?;
        Ok(config)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.runs < 1 {
            return bad("runs must be >= 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma = {} outside (0, 1]", self.gamma));
        }
        if !(self.horizon >= 1.0) || !self.horizon.is_finite() {
            return bad(format!("horizon = {} must be >= 1", self.horizon));
        }
        if let Some(eta) = self.eta {
            if !(0.0..=1.0).contains(&eta) {
                return bad(format!("eta = {eta} outside [0, 1]"));
            }
        }
        if !(self.klucb_c >= 0.0) || !self.klucb_c.is_finite() {
            return bad(format!("klucb-c = {} must be >= 0", self.klucb_c));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.jobs < 1 {
            return bad("jobs must be >= 1".into());
        }
        if self.grid_points < 2 {
            return bad("grid-points must be >= 2".into());
        }
        if let InstanceSource::Synthetic { n, .. } = self.instance {
            if n < 2 {
                return bad(format!("synthetic instances need n >= 2, got {n}"));
            }
        }
        Ok(())
    }

    /// The horizon as a round count, for simulations.
    pub fn rounds(&self) -> Result<u64, CliError> {
        if self.horizon.fract() != 0.0 {
            return Err(CliError::Config(format!(
                "horizon = {} must be an integer for simulations",
                self.horizon
            )));
        }
        Ok(self.horizon as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_file_parsing() {
        let s = Settings::parse("# comment\nsynthetic = coupon\nn = 12 # trailing\nklucb_c=1.5\n")
            .unwrap();
        let c = s.into_config().unwrap();
        assert_eq!(
            c.instance,
            InstanceSource::Synthetic {
                kind: SynthKind::Coupon,
                n: 12,
                seed: 0
            }
        );
        assert_eq!(c.runs, 16);
        assert_eq!(c.gamma, 0.5);
        assert_eq!(c.klucb_c, 1.5);
        assert_eq!(c.algorithms, vec![Algo::LinConTs, Algo::LinConKlUcb]);
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::parse("synthetic = edx\nruns = 4\n").unwrap();
        let mut flags = Settings::default();
        flags.set("runs", "2");
        let c = file.merged(flags).into_config().unwrap();
        assert_eq!(c.runs, 2);
    }

    #[test]
    fn validation_errors() {
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("no equals sign").is_err());
        for bad in [
            "synthetic = coupon\nruns = 0",
            "synthetic = coupon\ngamma = 1.5",
            "synthetic = coupon\nalgo = greedy",
            "synthetic = nope",
            "runs = 3",
            "synthetic = coupon\ninstance = x.csv",
            "synthetic = coupon\nhorizon = abc",
        ] {
            assert!(
                Settings::parse(bad).unwrap().into_config().is_err(),
                "{bad}"
            );
        }
    }

    #[test]
    fn fractional_horizon_only_for_bounds() {
        let c = Settings::parse("synthetic = coupon\nhorizon = 2.5")
            .unwrap()
            .into_config()
            .unwrap();
        assert!(c.rounds().is_err());
    }
}
