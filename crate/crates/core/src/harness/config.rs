use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ckks::{NoiseBounds, SECURITY_EXCLUSIONS};
use crate::dataflow::{KernelCosts, MAX_CHUNKS, MIN_CHUNKS};
use crate::model::{GpuSpec, ModelConstants};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "KSFLOW_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub l_values: Vec<usize>,
    pub dnum_values: Vec<usize>,
    /// `(L, dnum)` pairs never evaluated.
    pub exclusions: Vec<(usize, usize)>,
    /// Names of GPUs to sweep: presets or entries of `gpus`.
    pub gpu_presets: Vec<String>,
    pub chunks_min: usize,
    pub chunks_max: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: vec![1 << 14, 1 << 15, 1 << 16, 1 << 17],
            l_values: vec![10, 30, 50],
            dnum_values: vec![2, 4, 6, 8],
            exclusions: SECURITY_EXCLUSIONS.to_vec(),
            gpu_presets: GpuSpec::presets().into_iter().map(|g| g.name).collect(),
            chunks_min: MIN_CHUNKS,
            chunks_max: MAX_CHUNKS,
            seed: 0,
        }
    }
}

/// Desk-scale numeric verification settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub n: usize,
    pub max_level: usize,
    pub dnum: usize,
    pub trials: usize,
    /// Largest ring degree accepted without an explicit override.
    pub max_n: usize,
    /// Random inputs per ring degree in the NTT oracle check.
    pub ntt_samples: usize,
    pub noise: NoiseBounds,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: 1 << 10,
            max_level: 6,
            dnum: 3,
            trials: 20,
            max_n: 1 << 13,
            ntt_samples: 1000,
            noise: NoiseBounds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    /// Extra GPUs, or replacements for presets of the same name.
    #[serde(default)]
    pub gpus: Vec<GpuSpec>,
    #[serde(default)]
    pub constants: ModelConstants,
    #[serde(default)]
    pub costs: KernelCosts,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            sweep: SweepConfig::default(),
            verify: VerifyConfig::default(),
            gpus: Vec::new(),
            constants: ModelConstants::default(),
            costs: KernelCosts::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Loads `path` if given, else the file named by [`CONFIG_ENV`], else the defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self, HarnessError> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} unsupported, expected {SCHEMA_VERSION}", self.schema_version));
        }
        let s = &self.sweep;
        if let Some(n) = s.n_values.iter().find(|n| !n.is_power_of_two() || **n < 4) {
            return bad(format!("sweep.n_values: {n} is not a power of two >= 4"));
        }
        if s.l_values.contains(&0) || s.dnum_values.contains(&0) {
            return bad("sweep.l_values and sweep.dnum_values must be positive".into());
        }
        if !(MIN_CHUNKS <= s.chunks_min && s.chunks_min <= s.chunks_max && s.chunks_max <= MAX_CHUNKS) {
            return bad(format!("sweep chunks range {}..={} must lie in 2..=10", s.chunks_min, s.chunks_max));
        }
        for name in &s.gpu_presets {
            self.gpu(name)?;
        }
        for g in &self.gpus {
            g.validate().map_err(|e| HarnessError::Config(format!("gpus: {e}")))?;
        }
        self.constants.validate().map_err(|e| HarnessError::Config(format!("constants: {e}")))?;
        if self.costs.elements_per_warp == 0 {
            return bad("costs.elements_per_warp must be positive".into());
        }
        let v = &self.verify;
        if !v.n.is_power_of_two() || v.n < 4 || v.max_level == 0 || v.dnum == 0 || v.dnum > v.max_level {
            return bad("verify: n must be a power of two >= 4 and 1 <= dnum <= max_level".into());
        }
        if v.trials == 0 {
            return bad("verify.trials must be at least 1".into());
        }
        Ok(())
    }

    /// Resolves a GPU by name: config entries first, then presets.
    pub fn gpu(&self, name: &str) -> Result<GpuSpec, HarnessError> {
        if let Some(g) = self.gpus.iter().find(|g| g.name.eq_ignore_ascii_case(name)) {
            return Ok(g.clone());
        }
        GpuSpec::preset(name).map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        assert_eq!(Config::from_json(&cfg.to_json()).unwrap(), cfg);
        let minimal = Config::from_json(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(minimal, cfg);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = Config::from_json("{\"schema_version\": 1,\n \"sweep\": {\"n_valuez\": []}}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_valuez") && msg.contains("line 2"), "{msg}");
        let err = Config::from_json(r#"{"schema_version": 7}"#).unwrap_err();
        assert!(err.to_string().contains("schema_version"));
        let err = Config::from_json(r#"{"schema_version": 1, "sweep": {"chunks_max": 12}}"#).unwrap_err();
        assert!(err.to_string().contains("chunks"));
        let err = Config::from_json(r#"{"schema_version": 1, "sweep": {"gpu_presets": ["H100"]}}"#).unwrap_err();
        assert!(err.to_string().contains("H100"));
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = Config::from_json(r#"{"schema_version": 1, "constants": {"dram_latency": 900}, "costs": {"mac_alu": 4}}"#)
            .unwrap();
        assert_eq!(cfg.constants.dram_latency, 900.0);
        assert_eq!(cfg.constants.p_warp, ModelConstants::default().p_warp);
        assert_eq!(cfg.costs.mac_alu, 4);
        assert_eq!(cfg.costs.elements_per_warp, KernelCosts::default().elements_per_warp);
    }

    #[test]
    fn custom_gpu_overrides_preset() {
        let mut g = GpuSpec::rtx_4090();
        g.l2_bytes = 1e9;
        let cfg = Config { gpus: vec![g.clone()], ..Config::default() };
        assert_eq!(cfg.gpu("rtx4090").unwrap(), g);
        assert_eq!(cfg.gpu("A100").unwrap(), GpuSpec::a100());
    }
}
