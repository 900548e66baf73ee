//! Numeric KeySwitch that follows a schedule's task list row by row.

use super::cost::KernelCosts;
use super::plan::{plan_tasks, KernelKind, KernelTask, Layout};
use super::schedule::ScheduleSpec;
use super::trace::{launches_for, ExecutionTrace};
use crate::ckks::{CkksError, CkksParams, EvaluationKey, KeySwitchOutput};
use crate::rns::arith::{add_mod, mul_mod};
use crate::rns::{BaseConverter, Domain, ModDown, RnsBasis, RnsPolynomial};

/// Runs KeySwitch under `schedule` with default kernel costs.
pub fn run_scheduled_keyswitch(
    params: &CkksParams,
    d: &RnsPolynomial,
    evk: &EvaluationKey,
    schedule: ScheduleSpec,
) -> Result<(KeySwitchOutput, ExecutionTrace), CkksError> {
    run_scheduled_keyswitch_with(params, d, evk, schedule, &KernelCosts::default())
}

pub fn run_scheduled_keyswitch_with(
    params: &CkksParams,
    d: &RnsPolynomial,
    evk: &EvaluationKey,
    schedule: ScheduleSpec,
    costs: &KernelCosts,
) -> Result<(KeySwitchOutput, ExecutionTrace), CkksError> {
    let level = crate::ckks::check_keyswitch_inputs(params, d, evk)?;
    let shape = params.shape();
    let tasks = plan_tasks(&shape, level, schedule);
    let mut exec = Executor::new(params, d, evk, level)?;
    for task in &tasks {
        exec.run(task);
    }
    let output = exec.finish()?;
    let launches = launches_for(&shape, level, schedule, costs, &tasks);
    Ok((output, ExecutionTrace { shape, level, schedule, costs: *costs, launches }))
}

struct Executor<'a> {
    d: &'a RnsPolynomial,
    evk: &'a EvaluationKey,
    layout: Layout,
    ext: RnsBasis,
    /// Full-basis row of each extended row, for key lookup.
    key_rows: Vec<usize>,
    raise: Vec<BaseConverter>,
    /// Per digit: BConv-scaled coefficient rows of `D_i`.
    scaled: Vec<Option<Vec<Vec<u64>>>>,
    /// Per digit, per extended row: the raised residue row.
    raised: Vec<Vec<Option<Vec<u64>>>>,
    acc: [Vec<Vec<u64>>; 2],
    down: ModDown,
    scaled_p: [Option<Vec<Vec<u64>>>; 2],
    converted: [Vec<Option<Vec<u64>>>; 2],
    out: [Vec<Option<Vec<u64>>>; 2],
}

impl<'a> Executor<'a> {
    fn new(params: &CkksParams, d: &'a RnsPolynomial, evk: &'a EvaluationKey, level: usize) -> Result<Self, CkksError> {
        let layout = Layout::new(&params.shape(), level);
        let ext = params.extended_basis(level)?;
        let raise = layout
            .digits
            .iter()
            .zip(&layout.complements)
            .map(|(digit, others)| {
                let own: Vec<usize> = digit.clone().collect();
                BaseConverter::new(&ext.select(&own)?, &ext.select(others)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let down = ModDown::new(&ext, params.special_basis())?;
        let ext_len = layout.extended_len();
        let n = params.n();
        let digits = layout.digits.len();
        Ok(Self {
            d,
            evk,
            key_rows: params.extended_rows(level),
            raise,
            scaled: vec![None; digits],
            raised: vec![vec![None; ext_len]; digits],
            acc: [vec![vec![0; n]; ext_len], vec![vec![0; n]; ext_len]],
            down,
            scaled_p: [None, None],
            converted: [vec![None; level], vec![None; level]],
            out: [vec![None; level], vec![None; level]],
            layout,
            ext,
        })
    }

    fn run(&mut self, task: &KernelTask) {
        match task.kind {
            KernelKind::Intt1 => {
                for w in &task.work {
                    let rows: Vec<Vec<u64>> = w
                        .rows
                        .iter()
                        .map(|&r| {
                            let mut row = self.d.row(r).to_vec();
                            self.ext.prime(r).inverse(&mut row);
                            row
                        })
                        .collect();
                    self.scaled[w.digit] = Some(self.raise[w.digit].scale_inputs(&rows));
                }
            }
            KernelKind::BConv1 => {
                for w in &task.work {
                    let scaled = self.scaled[w.digit].as_ref().expect("iNTT1 precedes BConv1");
                    let others = &self.layout.complements[w.digit];
                    for &r in &w.rows {
                        let j = others.binary_search(&r).expect("row is in the complement");
                        self.raised[w.digit][r] = Some(self.raise[w.digit].convert_row(scaled, j));
                    }
                }
            }
            KernelKind::NTT1 => {
                for w in &task.work {
                    for &r in &w.rows {
                        let row = self.raised[w.digit][r].as_mut().expect("BConv1 precedes NTT1");
                        self.ext.prime(r).forward(row);
                    }
                }
            }
            KernelKind::MulAcc => {
                for w in &task.work {
                    let (b, a) = &self.evk.digits()[w.digit];
                    for &r in &w.rows {
                        let q = self.ext.prime(r).value();
                        let src: &[u64] = if self.layout.digits[w.digit].contains(&r) {
                            self.d.row(r)
                        } else {
                            self.raised[w.digit][r].as_deref().expect("NTT1 precedes MulAcc")
                        };
                        let kr = self.key_rows[r];
                        for (acc, key) in self.acc.iter_mut().zip([b.row(kr), a.row(kr)]) {
                            for ((x, &s), &k) in acc[r].iter_mut().zip(src).zip(key) {
                                *x = add_mod(*x, mul_mod(s, k, q), q);
                            }
                        }
                    }
                }
            }
            KernelKind::Intt2 => {
                let rows = &task.work[0].rows;
                for c in 0..2 {
                    let special: Vec<Vec<u64>> = rows
                        .iter()
                        .map(|&r| {
                            let mut row = self.acc[c][r].clone();
                            self.ext.prime(r).inverse(&mut row);
                            row
                        })
                        .collect();
                    self.scaled_p[c] = Some(self.down.converter().scale_inputs(&special));
                }
            }
            KernelKind::BConv2 => {
                for c in 0..2 {
                    let scaled = self.scaled_p[c].as_ref().expect("iNTT2 precedes BConv2");
                    for &r in &task.work[0].rows {
                        self.converted[c][r] = Some(self.down.converter().convert_row(scaled, r));
                    }
                }
            }
            KernelKind::NTT2 => {
                for c in 0..2 {
                    for &r in &task.work[0].rows {
                        let mut conv = self.converted[c][r].take().expect("BConv2 precedes NTT2");
                        self.ext.prime(r).forward(&mut conv);
                        // (x − c)·P^{-1} commutes with the NTT, so the epilogue runs
                        // on evaluation-domain rows.
                        self.out[c][r] = Some(self.down.finish_row(r, &self.acc[c][r], &conv));
                    }
                }
            }
        }
    }

    fn finish(self) -> Result<KeySwitchOutput, CkksError> {
        let basis = self.ext.range(0..self.layout.level)?;
        let [o0, o1] = self.out;
        let collect = |rows: Vec<Option<Vec<u64>>>| -> Result<RnsPolynomial, CkksError> {
            let rows = rows.into_iter().map(|r| r.expect("every output row is produced")).collect();
            Ok(RnsPolynomial::from_rows(&basis, rows, Domain::Ntt)?)
        };
        Ok(KeySwitchOutput { c0: collect(o0)?, c1: collect(o1)? })
    }
}
