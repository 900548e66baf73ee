//! Checks that every schedule computes the same KeySwitch, bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exec::run_scheduled_keyswitch;
use super::plan::Layout;
use super::schedule::ScheduleSpec;
use crate::ckks::{keygen, keyswitch_reference, CkksError, CkksParams, EvaluationKey, KeySwitchOutput};
use crate::rns::RnsPolynomial;

/// Chunk counts exercised for the chunked strategies.
pub const EQUIVALENCE_CHUNKS: [usize; 3] = [2, 3, 10];

pub fn equivalence_schedules() -> Vec<ScheduleSpec> {
    let mut out = vec![ScheduleSpec::dsob(), ScheduleSpec::dpob()];
    for c in EQUIVALENCE_CHUNKS {
        out.push(ScheduleSpec::dsoc(c).expect("valid chunks"));
    }
    for c in EQUIVALENCE_CHUNKS {
        out.push(ScheduleSpec::dpoc(c).expect("valid chunks"));
    }
    out
}

/// Corrupts one output residue of one schedule, to test the harness itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultInjection {
    pub schedule: ScheduleSpec,
    pub trial: usize,
    pub component: usize,
    pub row: usize,
    pub coeff: usize,
}

/// Where a schedule first disagreed with the reference.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub trial: usize,
    pub schedule: ScheduleSpec,
    pub component: usize,
    /// Digit owning the prime row.
    pub digit: usize,
    /// Output chunk holding the row under this schedule, if chunked.
    pub chunk: Option<usize>,
    pub row: usize,
    pub coeff: usize,
    pub expected: u64,
    pub found: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub trials: usize,
    pub schedules: Vec<ScheduleSpec>,
    /// Per trial, whether every schedule matched the reference.
    pub trial_equal: Vec<bool>,
    pub first_mismatch: Option<Mismatch>,
}

impl EquivalenceReport {
    pub fn all_equal(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Runs all schedules on `trials` uniform random inputs at the top level.
pub fn verify_equivalence(params: &CkksParams, trials: usize, seed: u64) -> Result<EquivalenceReport, CkksError> {
    let (_, evk) = keygen(params, seed)?;
    let basis = params.level_basis(params.max_level())?;
    let inputs: Vec<RnsPolynomial> = (0..trials)
        .map(|t| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(1 + t as u64));
            crate::ckks::uniform_poly(&basis, &mut rng)
        })
        .collect();
    verify_equivalence_on(params, &evk, &inputs, None)
}

/// Runs all schedules on the given inputs, optionally corrupting one output.
pub fn verify_equivalence_on(
    params: &CkksParams,
    evk: &EvaluationKey,
    inputs: &[RnsPolynomial],
    fault: Option<FaultInjection>,
) -> Result<EquivalenceReport, CkksError> {
    let schedules = equivalence_schedules();
    let outcomes: Vec<Option<Mismatch>> = inputs
        .par_iter()
        .enumerate()
        .map(|(t, d)| run_trial(params, evk, d, t, &schedules, fault))
        .collect::<Result<_, _>>()?;
    Ok(EquivalenceReport {
        trials: inputs.len(),
        schedules,
        trial_equal: outcomes.iter().map(Option::is_none).collect(),
        first_mismatch: outcomes.into_iter().flatten().next(),
    })
}

fn run_trial(
    params: &CkksParams,
    evk: &EvaluationKey,
    d: &RnsPolynomial,
    trial: usize,
    schedules: &[ScheduleSpec],
    fault: Option<FaultInjection>,
) -> Result<Option<Mismatch>, CkksError> {
    let reference = keyswitch_reference(params, d, evk)?;
    let layout = Layout::new(&params.shape(), d.basis().len());
    for &spec in schedules {
        let (mut out, _) = run_scheduled_keyswitch(params, d, evk, spec)?;
        if let Some(f) = fault.filter(|f| f.schedule == spec && f.trial == trial) {
            inject(&mut out, f)?;
        }
        if let Some(m) = first_difference(&reference, &out, &layout, spec, trial) {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

fn inject(out: &mut KeySwitchOutput, f: FaultInjection) -> Result<(), CkksError> {
    let poly = if f.component == 0 { &mut out.c0 } else { &mut out.c1 };
    let mut rows = poly.rows().to_vec();
    let q = poly.basis().prime(f.row).value();
    rows[f.row][f.coeff] = (rows[f.row][f.coeff] + 1) % q;
    *poly = RnsPolynomial::from_rows(poly.basis(), rows, poly.domain())?;
    Ok(())
}

fn first_difference(
    reference: &KeySwitchOutput,
    out: &KeySwitchOutput,
    layout: &Layout,
    spec: ScheduleSpec,
    trial: usize,
) -> Option<Mismatch> {
    let pairs = [(&reference.c0, &out.c0), (&reference.c1, &out.c1)];
    for (component, (want, got)) in pairs.into_iter().enumerate() {
        for (row, (w, g)) in want.rows().iter().zip(got.rows()).enumerate() {
            if let Some(coeff) = w.iter().zip(g).position(|(a, b)| a != b) {
                let digit = layout.digits.iter().position(|r| r.contains(&row)).unwrap_or(0);
                let chunk = spec.kind().is_chunked().then(|| {
                    layout.output_chunks(spec.chunks()).iter().position(|c| c.contains(&row)).unwrap_or(0)
                });
                return Some(Mismatch {
                    trial,
                    schedule: spec,
                    component,
                    digit,
                    chunk,
                    row,
                    coeff,
                    expected: w[coeff],
                    found: g[coeff],
                });
            }
        }
    }
    None
}
