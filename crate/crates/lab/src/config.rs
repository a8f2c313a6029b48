use std::path::Path;

use elex_core::profile::Profile;
use elex_core::rng::replica_seed;
use elex_core::stefan::StefanInit;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, json_err, Error, Result};
use crate::io::load_profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Process {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Process {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "X" | "x" => Ok(Process::X),
            "Y" | "y" => Ok(Process::Y),
            "Z" | "z" => Ok(Process::Z),
            _ => Err(format!("unknown process `{s}` (expected X, Y or Z)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverGrid {
    /// Intervals of the reference grid.
    pub m: usize,
    pub dt: f64,
}

/// One convergence study. Missing JSON fields take the default experiment's
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: Process,
    pub n_list: Vec<usize>,
    pub a: f64,
    /// Named profile or CSV file for `u0`.
    pub profile: String,
    pub t_max: f64,
    pub observation_times: Vec<f64>,
    /// Root of the replica seeds.
    pub seed: u64,
    pub replicas: usize,
    pub solver: SolverGrid,
    /// Modes kept by the H₋₁ distance.
    pub h_modes: u32,
    pub output_dir: Option<String>,
}

/// Fewest replicas accepted for a standard error.
pub const MIN_REPLICAS: usize = 30;

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t_max = 0.25;
        Self {
            process: Process::X,
            n_list: vec![32, 64, 128, 256],
            a: 1.0,
            profile: "half-step".into(),
            t_max,
            observation_times: uniform_times(t_max, 20),
            seed: 1,
            replicas: 100,
            solver: SolverGrid { m: 400, dt: 1e-5 },
            h_modes: 32,
            output_dir: None,
        }
    }
}

/// `k T / count` for `k = 1..=count`.
pub fn uniform_times(t_max: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| t_max * k as f64 / count as f64).collect()
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(json_err(path))
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicas as u64).map(|i| replica_seed(self.seed, i)).collect()
    }

    /// SHA-256 of the JSON encoding (fields in declaration order).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn load_profile(&self) -> Result<Profile> {
        load_profile(&self.profile)
    }

    /// Checks every field and that the profile is usable by both the
    /// particle sampler and the reference solver.
    pub fn validate(&self) -> Result<Profile> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_list.is_empty() {
            return bad("n_list is empty".into());
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 9) {
            return bad(format!("N = {n} is too small: the mollifier width N^(-1/3) must stay below 1/2"));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return bad(format!("a = {} must be finite and non-negative", self.a));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad(format!("t_max = {} must be positive", self.t_max));
        }
        let times = &self.observation_times;
        if times.is_empty() || times.iter().any(|&t| !(0.0..=self.t_max).contains(&t)) || times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("observation times must be increasing and lie in [0, t_max]".into());
        }
        if self.replicas < MIN_REPLICAS {
            return bad(format!("{} replicas; standard errors need at least {MIN_REPLICAS}", self.replicas));
        }
        if self.solver.m < 8 || !(self.solver.dt.is_finite() && self.solver.dt > 0.0) {
            return bad("solver grid needs m >= 8 and dt > 0".into());
        }
        if self.h_modes == 0 {
            return bad("h_modes must be positive".into());
        }
        let p = self.load_profile()?;
        p.validate()?;
        StefanInit::from_profile(&p, self.solver.m)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_partial_json_fills_in() {
        let d = ExperimentConfig::default();
        d.validate().unwrap();
        let c: ExperimentConfig = serde_json::from_str(r#"{"n_list":[16,32],"replicas":40}"#).unwrap();
        assert_eq!(c.n_list, vec![16, 32]);
        assert_eq!(c.t_max, d.t_max);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"typo":1}"#).is_err());
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = ExperimentConfig::default();
        let h0 = base.hash();
        assert_eq!(h0, base.clone().hash());
        let variants: Vec<ExperimentConfig> = vec![
            ExperimentConfig { process: Process::Z, ..base.clone() },
            ExperimentConfig { n_list: vec![32, 64], ..base.clone() },
            ExperimentConfig { a: 2.0, ..base.clone() },
            ExperimentConfig { profile: "bump:0.5".into(), ..base.clone() },
            ExperimentConfig { t_max: 0.5, ..base.clone() },
            ExperimentConfig { observation_times: vec![0.25], ..base.clone() },
            ExperimentConfig { seed: 2, ..base.clone() },
            ExperimentConfig { replicas: 101, ..base.clone() },
            ExperimentConfig { solver: SolverGrid { m: 200, dt: 1e-5 }, ..base.clone() },
            ExperimentConfig { solver: SolverGrid { m: 400, dt: 2e-5 }, ..base.clone() },
            ExperimentConfig { h_modes: 16, ..base.clone() },
            ExperimentConfig { output_dir: Some("out".into()), ..base.clone() },
        ];
        for v in variants {
            assert_ne!(v.hash(), h0, "{v:?}");
        }
    }

    #[test]
    fn validation_rejects() {
        let d = ExperimentConfig::default();
        assert!(ExperimentConfig { replicas: 10, ..d.clone() }.validate().is_err());
        assert!(ExperimentConfig { n_list: vec![8], ..d.clone() }.validate().is_err());
        assert!(ExperimentConfig { observation_times: vec![0.2, 0.1], ..d.clone() }.validate().is_err());
        assert!(ExperimentConfig { profile: "step:0.5".into(), ..d.clone() }.validate().is_err());
        assert!(ExperimentConfig { a: -1.0, ..d }.validate().is_err());
    }
}
