//! Ground-truth bandit instances and reward-event simulation.
//!
//! # Arm CSV schema
//!
//! ```text
//! # eta: 0.25
//! arm_id,mu,r
//! 1,0.12,0.55
//! 2,0.27,0.80
//! ```
//!
//! UTF-8, header exactly `arm_id,mu,r`, integer `arm_id`, decimal `mu` in
//! `[0, 1]` and `r` in `(0, 1]`. Lines starting with `#` are comments; a
//! comment of the form `# eta: <value>` sets the instance's default
//! threshold. Rows may appear in any order and are sorted by `arm_id`.
//!
//! Raw datasets are expected to be preprocessed before loading. For a
//! coupon-style dataset, `mu` is the purchase rate and `r` the selling price
//! divided by the largest admissible price (200 price units in the original
//! coupon data). For a course-style dataset, `mu` is the min-max normalized
//! participant count ([`normalize_minmax`]) and `r` is certified participants
//! divided by participants.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::ArmParams;

/// Upper limit on redraws when a synthetic instance comes out infeasible.
pub const SYNTH_MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    pub name: String,
    /// External identifiers, parallel to `arms`.
    pub ids: Vec<u64>,
    pub arms: Vec<ArmParams>,
    pub eta: f64,
}

impl BanditInstance {
    /// Builds an instance with ids `1..=N`.
    pub fn new(name: impl Into<String>, arms: Vec<ArmParams>, eta: f64) -> Result<Self> {
        let ids = (1..=arms.len() as u64).collect();
        Self::with_ids(name, ids, arms, eta)
    }

    pub fn with_ids(
        name: impl Into<String>,
        ids: Vec<u64>,
        arms: Vec<ArmParams>,
        eta: f64,
    ) -> Result<Self> {
        crate::lp::validate_problem(&arms, eta)?;
        if ids.len() != arms.len() {
            return Err(Error::LengthMismatch {
                expected: arms.len(),
                actual: ids.len(),
            });
        }
        Ok(BanditInstance {
            name: name.into(),
            ids,
            arms,
            eta,
        })
    }

    pub fn from_pairs(name: impl Into<String>, pairs: &[(f64, f64)], eta: f64) -> Result<Self> {
        let arms = pairs
            .iter()
            .map(|&(mu, r)| ArmParams::new(mu, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, arms, eta)
    }

    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.r).collect()
    }

    pub fn max_mu(&self) -> f64 {
        self.arms
            .iter()
            .map(|a| a.mu)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_feasible(&self) -> bool {
        self.max_mu() >= self.eta
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        crate::lp::validate_problem(&self.arms, eta)?;
        self.eta = eta;
        Ok(self)
    }

    pub fn ensure_feasible(&self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible {
                max_mu: self.max_mu(),
                eta: self.eta,
            })
        }
    }
}

/// Bernoulli reward event with mean `mu_arm`.
pub fn sample_reward_event<R: Rng + ?Sized>(
    instance: &BanditInstance,
    arm: usize,
    rng: &mut R,
) -> Result<bool> {
    let params = instance.arms.get(arm).ok_or(Error::IndexOutOfRange {
        index: arm,
        len: instance.n_arms(),
    })?;
    Ok(rng.random::<f64>() < params.mu)
}

pub fn load_arms_csv(path: impl AsRef<Path>, eta: Option<f64>) -> Result<BanditInstance> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_owned());
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_arms_csv(&text, &name, eta)
}

/// Parses the arm CSV schema. An explicit `eta` overrides the `# eta:`
/// directive; one of the two is required.
pub fn parse_arms_csv(text: &str, name: &str, eta: Option<f64>) -> Result<BanditInstance> {
    let eta = match eta {
        Some(eta) => eta,
        None => eta_directive(text)?
            .ok_or_else(|| Error::invalid("no eta given and no `# eta:` directive in the file"))?,
    };

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let header_line = header.position().map_or(1, |p| p.line());
    if header.iter().collect::<Vec<_>>() != ["arm_id", "mu", "r"] {
        return Err(Error::Parse {
            line: header_line,
            message: format!(
                "expected header `arm_id,mu,r`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows: Vec<(u64, ArmParams)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        if record.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 fields, found {}",
                record.len()
            )));
        }
        let id: u64 = record[0]
            .parse()
            .map_err(|_| parse_err(format!("arm_id `{}` is not an integer", &record[0])))?;
        let mu: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(format!("mu `{}` is not a number", &record[1])))?;
        let r: f64 = record[2]
            .parse()
            .map_err(|_| parse_err(format!("r `{}` is not a number", &record[2])))?;
        let arm = ArmParams::new(mu, r).map_err(|e| parse_err(format!("arm {id}: {e}")))?;
        if rows.iter().any(|(other, _)| *other == id) {
            return Err(parse_err(format!("duplicate arm_id {id}")));
        }
        rows.push((id, arm));
    }
    if rows.is_empty() {
        return Err(Error::NoArms);
    }
    rows.sort_by_key(|(id, _)| *id);
    let (ids, arms) = rows.into_iter().unzip();
    BanditInstance::with_ids(name, ids, arms, eta)
}

fn eta_directive(text: &str) -> Result<Option<f64>> {
    for (idx, line) in BufReader::new(text.as_bytes()).lines().enumerate() {
        let line = line?;
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some(value) = comment.trim().strip_prefix("eta:") {
            let eta = value.trim().parse().map_err(|_| Error::Parse {
                line: idx as u64 + 1,
                message: format!("bad eta directive `{}`", value.trim()),
            })?;
            return Ok(Some(eta));
        }
    }
    Ok(None)
}

/// Writes an instance in the arm CSV schema, including the eta directive.
pub fn write_arms_csv<W: Write>(instance: &BanditInstance, out: W) -> Result<()> {
    let mut out = out;
    writeln!(out, "# name: {}", instance.name)?;
    writeln!(out, "# eta: {}", instance.eta)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["arm_id", "mu", "r"])?;
    for (id, arm) in instance.ids.iter().zip(&instance.arms) {
        writer.write_record([id.to_string(), arm.mu.to_string(), arm.r.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// `mu ~ U[0, 0.30]`, `r ~ U(0, 1]`, default `eta = 0.25`.
    Coupon,
    /// `mu ~ U[0, 1]`, `r ~ U(0, 0.40]`, default `eta = 0.50`.
    Edx,
}

impl SynthKind {
    pub fn default_eta(self) -> f64 {
        match self {
            SynthKind::Coupon => 0.25,
            SynthKind::Edx => 0.50,
        }
    }

    fn mu_max(self) -> f64 {
        match self {
            SynthKind::Coupon => 0.30,
            SynthKind::Edx => 1.0,
        }
    }

    fn r_max(self) -> f64 {
        match self {
            SynthKind::Coupon => 1.0,
            SynthKind::Edx => 0.40,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Coupon => "coupon",
            SynthKind::Edx => "edx",
        }
    }
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupon" => Ok(SynthKind::Coupon),
            "edx" => Ok(SynthKind::Edx),
            other => Err(Error::invalid(format!(
                "unknown synthetic kind `{other}` (expected coupon or edx)"
            ))),
        }
    }
}

/// Draws a synthetic instance, redrawing infeasible ones (`max mu < eta`)
/// up to [`SYNTH_MAX_RETRIES`] times.
pub fn synth_instance<R: Rng + ?Sized>(
    kind: SynthKind,
    n: usize,
    eta: f64,
    rng: &mut R,
) -> Result<BanditInstance> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "synthetic instances need n >= 2, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta = {eta} outside [0, 1]")));
    }
    let mut last_max = 0.0;
    for _ in 0..=SYNTH_MAX_RETRIES {
        let arms: Vec<ArmParams> = (0..n)
            .map(|_| {
                let mu = kind.mu_max() * rng.random::<f64>();
                // 1 - U[0, 1) lies in (0, 1].
                let r = kind.r_max() * (1.0 - rng.random::<f64>());
                ArmParams { mu, r }
            })
            .collect();
        let instance = BanditInstance::new(format!("{}-{n}", kind.name()), arms, eta)?;
        if instance.is_feasible() {
            return Ok(instance);
        }
        last_max = instance.max_mu();
    }
    Err(Error::Infeasible {
        max_mu: last_max,
        eta,
    })
}

pub fn synth_coupon_like<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BanditInstance> {
    synth_instance(SynthKind::Coupon, n, SynthKind::Coupon.default_eta(), rng)
}

pub fn synth_edx_like<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<BanditInstance> {
    synth_instance(SynthKind::Edx, n, SynthKind::Edx.default_eta(), rng)
}

/// `(v - min) / (max - min)` elementwise.
pub fn normalize_minmax(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("values must be finite and nonnegative"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Err(Error::domain(
            "min-max normalization needs two distinct values",
        ));
    }
    Ok(values.iter().map(|v| (v - min) / (max - min)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn reward_events_at_the_endpoints() {
        let inst = BanditInstance::from_pairs("t", &[(0.0, 1.0), (1.0, 1.0)], 0.5).unwrap();
        let mut rng = seeded(5);
        for _ in 0..1000 {
            assert!(!sample_reward_event(&inst, 0, &mut rng).unwrap());
            assert!(sample_reward_event(&inst, 1, &mut rng).unwrap());
        }
        assert!(matches!(
            sample_reward_event(&inst, 2, &mut rng),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn reward_event_frequency() {
        let inst = BanditInstance::from_pairs("t", &[(0.3, 1.0)], 0.0).unwrap();
        let mut rng = seeded(11);
        let m = 100_000;
        let hits = (0..m)
            .filter(|_| sample_reward_event(&inst, 0, &mut rng).unwrap())
            .count();
        let mean = hits as f64 / m as f64;
        assert!((mean - 0.3).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn csv_roundtrip_sorted_by_id() {
        let text = "# eta: 0.5\narm_id,mu,r\n2,0.9,0.1\n1,0.1,1.0\n";
        let inst = parse_arms_csv(text, "x", None).unwrap();
        assert_eq!(inst.ids, vec![1, 2]);
        assert_eq!(inst.arms[0], ArmParams { mu: 0.1, r: 1.0 });
        assert_eq!(inst.eta, 0.5);

        let mut buf = Vec::new();
        write_arms_csv(&inst, &mut buf).unwrap();
        let back = parse_arms_csv(std::str::from_utf8(&buf).unwrap(), "x", None).unwrap();
        assert_eq!(back.arms, inst.arms);
        assert_eq!(back.eta, inst.eta);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err =
            parse_arms_csv("arm_id,mu,r\n1,0.1,1.0\n2,1.5,0.3\n", "x", Some(0.5)).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("mu"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_arms_csv("arm_id,mu,r\n# nothing\n", "x", Some(0.5)),
            Err(Error::NoArms)
        ));
        assert!(matches!(
            parse_arms_csv("arm_id,mu\n1,0.1\n", "x", Some(0.5)),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_arms_csv("arm_id,mu,r\n1,0.1,1.0,7\n", "x", Some(0.5)),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_arms_csv("arm_id,mu,r\n1,abc,1.0\n", "x", Some(0.5)),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_arms_csv("arm_id,mu,r\n1,0.1,1.0\n1,0.2,1.0\n", "x", Some(0.5)),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse_arms_csv("arm_id,mu,r\n1,0.1,1.0\n", "x", None).is_err());
    }

    #[test]
    fn csv_file_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("two.csv");
        std::fs::write(&path, "arm_id,mu,r\n1,0.1,1.0\n2,0.9,0.1\n").unwrap();
        let inst = load_arms_csv(&path, Some(0.5)).unwrap();
        assert_eq!(inst.n_arms(), 2);
        assert_eq!(inst.name, "two");
        assert!(load_arms_csv(dir.path().join("missing.csv"), Some(0.5)).is_err());
    }

    #[test]
    fn coupon_like_ranges() {
        let mut rng = seeded(2);
        let inst = synth_coupon_like(142, &mut rng).unwrap();
        assert_eq!(inst.n_arms(), 142);
        assert_eq!(inst.eta, 0.25);
        assert!(inst.is_feasible());
        for a in &inst.arms {
            assert!(a.mu <= 0.30 && a.mu >= 0.0);
            assert!(a.r > 0.0 && a.r <= 1.0);
        }
        assert!(synth_coupon_like(2, &mut rng).unwrap().is_feasible());
        assert!(synth_coupon_like(1, &mut rng).is_err());
    }

    #[test]
    fn coupon_like_gives_up_when_eta_unreachable() {
        let mut rng = seeded(2);
        assert!(matches!(
            synth_instance(SynthKind::Coupon, 10, 0.99, &mut rng),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn edx_like_ranges() {
        let mut rng = seeded(3);
        let inst = synth_edx_like(290, &mut rng).unwrap();
        assert_eq!(inst.n_arms(), 290);
        assert_eq!(inst.eta, 0.5);
        assert!(inst.arms.iter().all(|a| a.r > 0.0 && a.r <= 0.40));
    }

    #[test]
    fn minmax() {
        assert_eq!(
            normalize_minmax(&[10.0, 20.0, 30.0]).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(normalize_minmax(&[0.0, 100.0]).unwrap(), vec![0.0, 1.0]);
        assert!(normalize_minmax(&[4.0, 4.0, 4.0]).is_err());
        assert!(normalize_minmax(&[]).is_err());
    }
}
