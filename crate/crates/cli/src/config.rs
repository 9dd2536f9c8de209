//! Run configuration: plan files, embedded configs and flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fully resolved parameters of one run. Every artifact embeds it, and a
/// run started from an embedded config reproduces the artifact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bigk: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leading: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_smallest: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value {v:?} for {key}")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_num(key, p))
        .collect()
}

impl RunConfig {
    /// Sets one field from its `key = value` text form. Keys match the
    /// long flag names; `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "d" => self.d = Some(parse_num(&key, v)?),
            "s" => self.s = Some(parse_num(&key, v)?),
            "gamma" => self.gamma = Some(parse_num(&key, v)?),
            "t" => self.t = Some(parse_num(&key, v)?),
            "bigk" => self.bigk = Some(parse_num(&key, v)?),
            "n" => self.n = Some(parse_num(&key, v)?),
            "n-list" => self.n_list = Some(parse_list(&key, v)?),
            "trials" => self.trials = Some(parse_num(&key, v)?),
            "seed" => self.seed = Some(parse_num(&key, v)?),
            "tol" => self.tol = Some(parse_num(&key, v)?),
            "family" => self.family = Some(v.to_string()),
            "metric" => self.metric = Some(v.to_string()),
            "coeffs" => self.coeffs = Some(parse_list(&key, v)?),
            "steps" => self.steps = Some(parse_num(&key, v)?),
            "step-size" => self.step_size = Some(parse_num(&key, v)?),
            "x" => self.x = Some(parse_list(&key, v)?),
            "leading" => self.leading = Some(v.to_string()),
            "scale-power" => self.scale_power = Some(parse_num(&key, v)?),
            "log-power" => self.log_power = Some(parse_num(&key, v)?),
            "include-smallest" => self.include_smallest = Some(parse_num(&key, v)?),
            "format" => self.format = Some(v.to_string()),
            "in" => self.inputs = v.split(',').map(|p| PathBuf::from(p.trim())).collect(),
            other => return Err(CliError::Usage(format!("unknown plan key {other:?}"))),
        }
        Ok(())
    }

    /// Overlays every field that is set in `other`.
    pub fn overlay(&mut self, other: RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            d, s, gamma, t, bigk, n, n_list, trials, seed, tol, family, metric, coeffs, steps,
            step_size, x, leading, scale_power, log_power, include_smallest, format
        );
        if !other.inputs.is_empty() {
            self.inputs = other.inputs;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Reads a plan file of `key = value` lines; `#` starts a comment.
pub fn read_plan_file(path: &Path, command: &str) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig {
        command: command.to_string(),
        ..Default::default()
    };
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key = value", path.display(), k + 1))
        })?;
        cfg.set(key, value)?;
    }
    Ok(cfg)
}

/// Marker of the config line in text artifacts.
pub const CONFIG_PREFIX: &str = "# config: ";

/// Extracts the config embedded in an artifact: a `# config: {...}` line in
/// text outputs or the `config` member of a JSON output.
pub fn read_embedded(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("{}: bad embedded config: {e}", path.display()));
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix(CONFIG_PREFIX)) {
        return serde_json::from_str(line).map_err(bad);
    }
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|_| CliError::Usage(format!("{} carries no embedded config", path.display())))?;
    match value.get("config") {
        Some(c) => serde_json::from_value(c.clone()).map_err(bad),
        None => Err(CliError::Usage(format!("{} carries no embedded config", path.display()))),
    }
}
