use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{HarnessError, VerifyConfig};
use crate::ckks::{keygen, keyswitch, keyswitch_error, uniform_poly, CkksParams, KeySource};
use crate::dataflow::{verify_equivalence, ScheduleSpec};
use crate::rns::generate_prime_chain;
use crate::rns::oracle::dft_oracle;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n: usize,
    pub max_level: usize,
    pub dnum: usize,
    pub trials: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "verify N={} L={} dnum={} trials={} seed={}\n",
            self.n, self.max_level, self.dnum, self.trials, self.seed
        );
        for c in &self.checks {
            let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(out, "{}", if self.passed() { "all checks passed" } else { "some checks failed" });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Numeric checks at desk scale: NTT against the direct transform, the
/// KeySwitch decryption identity, and bit-equality of all schedules.
pub fn run_verify(cfg: &VerifyConfig, seed: u64, allow_large_n: bool) -> Result<VerifyReport, HarnessError> {
    if cfg.n > cfg.max_n && !allow_large_n {
        return Err(HarnessError::Guard { n: cfg.n, max: cfg.max_n });
    }
    if cfg.trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    let params = CkksParams::builder(cfg.n, cfg.max_level, cfg.dnum)
        .noise_std(3.2)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let checks = vec![ntt_check(cfg.ntt_samples, seed)?, keyswitch_check(&params, cfg, seed)?, equivalence_check(&params, cfg, seed)?];
    Ok(VerifyReport { seed, n: cfg.n, max_level: cfg.max_level, dnum: cfg.dnum, trials: cfg.trials, checks })
}

fn ntt_check(samples: usize, seed: u64) -> Result<CheckResult, HarnessError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut n = 4;
    while n <= 256 {
        let q = generate_prime_chain(30, 1, n)?.remove(0);
        for _ in 0..samples {
            let a: Vec<u64> = (0..n).map(|_| rng.random_range(0..q.value())).collect();
            let mut fwd = a.clone();
            q.forward(&mut fwd);
            let mut back = fwd.clone();
            q.inverse(&mut back);
            if fwd != dft_oracle(&a, &q)? || back != a {
                failures.push(n);
                break;
            }
        }
        n *= 2;
    }
    Ok(CheckResult {
        name: "ntt_oracle".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{samples} inputs per N in 4..=256 match the direct transform")
        } else {
            format!("mismatch at N = {failures:?}")
        },
    })
}

fn keyswitch_check(params: &CkksParams, cfg: &VerifyConfig, seed: u64) -> Result<CheckResult, HarnessError> {
    let (sk, evk) = keygen(params, seed)?;
    let basis = params.level_basis(params.max_level())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6b73);
    let mut worst = 0;
    for _ in 0..cfg.trials {
        let d = uniform_poly(&basis, &mut rng);
        let (out, _) = keyswitch(params, &d, &evk, ScheduleSpec::dsob())?;
        worst = worst.max(keyswitch_error(&sk, KeySource::Square, &d, &out)?);
    }
    Ok(CheckResult {
        name: "keyswitch_identity".into(),
        passed: worst < cfg.noise.keyswitch,
        detail: format!("max |<KS(d),(1,s)> - d*s^2| = {worst} (bound {})", cfg.noise.keyswitch),
    })
}

fn equivalence_check(params: &CkksParams, cfg: &VerifyConfig, seed: u64) -> Result<CheckResult, HarnessError> {
    let report = verify_equivalence(params, cfg.trials, seed)?;
    let detail = match &report.first_mismatch {
        None => format!("{} schedules bit-identical over {} trials", report.schedules.len(), report.trials),
        Some(m) => format!(
            "{} differs in trial {}: component {} digit {} chunk {:?} row {} coeff {} ({} != {})",
            m.schedule, m.trial, m.component, m.digit, m.chunk, m.row, m.coeff, m.found, m.expected
        ),
    };
    Ok(CheckResult { name: "schedule_equivalence".into(), passed: report.all_equal(), detail })
}
