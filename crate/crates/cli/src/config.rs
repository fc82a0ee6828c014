use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ncgrad::gradest::Mode;
use serde::{Deserialize, Serialize};

/// Run settings shared by the commands. Every field is optional so a config
/// file and command-line flags can be layered; flags win.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `zoo:<name>` or a path to a model JSON file.
    pub model: Option<String>,
    /// Parameters for zoo models (`d`, `n`, `p`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    pub mean: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub mode: Option<Mode>,
    pub num_rho: Option<usize>,
    pub t_grid: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub ancilla: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn layered(mut self, over: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(model, mean, k, mode, num_rho, t_grid, seed, ancilla, output);
        self.params.extend(over.params);
        self
    }

    /// Seed, which sampled mode requires explicitly.
    pub fn seed_for(&self, mode: Mode) -> Result<u64> {
        match (mode, self.seed) {
            (_, Some(s)) => Ok(s),
            (Mode::Sampled, None) => bail!("sampled mode needs an explicit --seed"),
            (Mode::Exact, None) => Ok(0),
        }
    }
}

/// Parses `key=value`.
pub fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig {
            model: Some("zoo:cyclic".into()),
            params: [("n".to_string(), "6".to_string())].into(),
            mean: Some("logarithmic".into()),
            k: Some(0.5),
            mode: Some(Mode::Sampled),
            num_rho: Some(12),
            t_grid: Some(vec![0.001, 0.1, 2.5]),
            seed: Some(9),
            ancilla: Some(2),
            output: Some("out.json".into()),
        };
        let back: RunConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { seed: Some(1), k: Some(0.5), ..Default::default() };
        let flags = RunConfig { seed: Some(2), ..Default::default() };
        let merged = file.layered(flags);
        assert_eq!((merged.seed, merged.k), (Some(2), Some(0.5)));
    }

    #[test]
    fn sampled_mode_requires_seed() {
        let cfg = RunConfig::default();
        assert!(cfg.seed_for(Mode::Sampled).is_err());
        assert_eq!(cfg.seed_for(Mode::Exact).unwrap(), 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("modle = 'zoo:cyclic'").is_err());
        assert_eq!(parse_param("n = 4").unwrap(), ("n".into(), "4".into()));
        assert!(parse_param("n4").is_err());
    }
}
