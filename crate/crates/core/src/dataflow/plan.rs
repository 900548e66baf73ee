//! KeySwitch as an ordered list of kernel tasks.
//!
//! Rows are indexed in the extended basis `Q_l ∪ P`: ciphertext primes
//! `0..l`, then special primes `l..l+alpha`. Digit `i` owns rows `D_i`; its
//! raised copy covers the complement `O_i`. Output-chunked schedules split each
//! `O_i` and the phase-2 output rows `0..l` into `c` groups.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::schedule::ScheduleSpec;
use crate::ckks::{split_even, ParamShape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelKind {
    #[serde(rename = "iNTT1")]
    Intt1,
    BConv1,
    NTT1,
    MulAcc,
    #[serde(rename = "iNTT2")]
    Intt2,
    BConv2,
    NTT2,
}

impl KernelKind {
    pub const ALL: [KernelKind; 7] =
        [Self::Intt1, Self::BConv1, Self::NTT1, Self::MulAcc, Self::Intt2, Self::BConv2, Self::NTT2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Intt1 => "iNTT1",
            Self::BConv1 => "BConv1",
            Self::NTT1 => "NTT1",
            Self::MulAcc => "MulAcc",
            Self::Intt2 => "iNTT2",
            Self::BConv2 => "BConv2",
            Self::NTT2 => "NTT2",
        }
    }

    pub fn is_phase_one(self) -> bool {
        matches!(self, Self::Intt1 | Self::BConv1 | Self::NTT1 | Self::MulAcc)
    }

    /// Phase-2 kernels run on both accumulated components.
    pub fn components(self) -> u64 {
        if self.is_phase_one() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The rows one digit contributes to a task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitRows {
    pub digit: usize,
    pub rows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTask {
    pub kind: KernelKind,
    pub chunk: Option<usize>,
    /// Digits whose data the launch touches.
    pub digits: Vec<usize>,
    /// Phase 1: per-digit extended-basis rows. Phase 2: a single entry with
    /// `digit = usize::MAX` listing the extended rows of one component.
    pub work: Vec<DigitRows>,
}

impl KernelTask {
    /// Output rows summed over digits, per component.
    pub fn rows(&self) -> usize {
        self.work.iter().map(|w| w.rows.len()).sum()
    }
}

pub(crate) const PHASE_TWO: usize = usize::MAX;

/// Row layout of one KeySwitch at `level`.
#[derive(Clone, Debug)]
pub struct Layout {
    pub level: usize,
    pub alpha: usize,
    pub digits: Vec<Range<usize>>,
    /// `O_i`: the extended rows digit `i` is raised to, ascending.
    pub complements: Vec<Vec<usize>>,
}

impl Layout {
    pub fn new(shape: &ParamShape, level: usize) -> Self {
        let alpha = shape.alpha();
        let digits = shape.active_digits(level);
        let complements =
            digits.iter().map(|d| (0..level + alpha).filter(|r| !d.contains(r)).collect()).collect();
        Self { level, alpha, digits, complements }
    }

    pub fn extended_len(&self) -> usize {
        self.level + self.alpha
    }

    /// The `c` row groups of `O_i`.
    pub fn digit_chunks(&self, digit: usize, chunks: usize) -> Vec<Vec<usize>> {
        let o = &self.complements[digit];
        split_even(o.len(), chunks).into_iter().map(|r| o[r].to_vec()).collect()
    }

    /// The `c` groups of phase-2 output rows `0..l`.
    pub fn output_chunks(&self, chunks: usize) -> Vec<Vec<usize>> {
        split_even(self.level, chunks).into_iter().map(|r| r.collect()).collect()
    }
}

/// Emits the task list of `spec`. Chunks with no rows are skipped.
pub fn plan_tasks(shape: &ParamShape, level: usize, spec: ScheduleSpec) -> Vec<KernelTask> {
    let layout = Layout::new(shape, level);
    let c = spec.chunks();
    let chunk_tag = |k: usize| spec.kind().is_chunked().then_some(k);
    let digit_groups: Vec<Vec<Vec<usize>>> = (0..layout.digits.len()).map(|i| layout.digit_chunks(i, c)).collect();
    let own = |i: usize| -> Vec<usize> { layout.digits[i].clone().collect() };
    let mulacc_rows = |i: usize, k: usize| -> Vec<usize> {
        let mut rows = digit_groups[i][k].clone();
        if k == 0 {
            rows.extend(own(i));
            rows.sort_unstable();
        }
        rows
    };
    let task = |kind, chunk, work: Vec<DigitRows>| KernelTask {
        kind,
        chunk,
        digits: work.iter().map(|w| w.digit).collect(),
        work,
    };
    let mut tasks = Vec::new();
    let all: Vec<usize> = (0..layout.digits.len()).collect();

    if spec.kind().is_digit_parallel() {
        let work = all.iter().map(|&i| DigitRows { digit: i, rows: own(i) }).collect();
        tasks.push(task(KernelKind::Intt1, None, work));
        for k in 0..c {
            let live: Vec<usize> = all.iter().copied().filter(|&i| !digit_groups[i][k].is_empty()).collect();
            if live.is_empty() {
                continue;
            }
            for kind in [KernelKind::BConv1, KernelKind::NTT1] {
                let work = live.iter().map(|&i| DigitRows { digit: i, rows: digit_groups[i][k].clone() }).collect();
                tasks.push(task(kind, chunk_tag(k), work));
            }
            let work = live.iter().map(|&i| DigitRows { digit: i, rows: mulacc_rows(i, k) }).collect();
            tasks.push(task(KernelKind::MulAcc, chunk_tag(k), work));
        }
    } else {
        for &i in &all {
            tasks.push(task(KernelKind::Intt1, None, vec![DigitRows { digit: i, rows: own(i) }]));
            for k in 0..c {
                if digit_groups[i][k].is_empty() {
                    continue;
                }
                for kind in [KernelKind::BConv1, KernelKind::NTT1] {
                    tasks.push(task(kind, chunk_tag(k), vec![DigitRows { digit: i, rows: digit_groups[i][k].clone() }]));
                }
                tasks.push(task(KernelKind::MulAcc, chunk_tag(k), vec![DigitRows { digit: i, rows: mulacc_rows(i, k) }]));
            }
        }
    }

    let phase_two = |kind, chunk, rows: Vec<usize>| KernelTask {
        kind,
        chunk,
        digits: all.clone(),
        work: vec![DigitRows { digit: PHASE_TWO, rows }],
    };
    tasks.push(phase_two(KernelKind::Intt2, None, (level..layout.extended_len()).collect()));
    for (k, rows) in layout.output_chunks(c).into_iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        tasks.push(phase_two(KernelKind::BConv2, chunk_tag(k), rows.clone()));
        tasks.push(phase_two(KernelKind::NTT2, chunk_tag(k), rows));
    }
    tasks
}

/// Closed-form launch count, valid whenever every row group is nonempty.
pub fn expected_launches(spec: ScheduleSpec, dnum: usize) -> usize {
    use super::schedule::DataflowKind::*;
    let (d, c) = (dnum, spec.chunks());
    match spec.kind() {
        Dsob => 4 * d + 3,
        Dpob => 7,
        Dsoc => d * (1 + 3 * c) + 1 + 2 * c,
        Dpoc => 2 + 5 * c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::schedule::DataflowKind;

    #[test]
    fn closed_form_counts_on_the_grid() {
        for &n in &[1 << 14, 1 << 17] {
            for &l in &[10, 30, 50] {
                for &d in &[2, 4, 6, 8] {
                    let shape = ParamShape::new(n, l, d).unwrap();
                    for spec in ScheduleSpec::all() {
                        assert_eq!(plan_tasks(&shape, l, spec).len(), expected_launches(spec, d), "{spec} L={l} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn worked_counts_for_four_digits() {
        let shape = ParamShape::new(1 << 16, 30, 4).unwrap();
        let count = |s| plan_tasks(&shape, 30, s).len();
        assert_eq!(count(ScheduleSpec::dsob()), 19);
        assert_eq!(count(ScheduleSpec::dpob()), 7);
        assert_eq!(count(ScheduleSpec::dsoc(2).unwrap()), 33);
        assert_eq!(count(ScheduleSpec::dpoc(2).unwrap()), 12);
    }

    #[test]
    fn rows_are_covered_exactly_once() {
        let shape = ParamShape::new(1 << 10, 7, 3).unwrap();
        for spec in [ScheduleSpec::dsob(), ScheduleSpec::new(DataflowKind::Dpoc, 3).unwrap()] {
            let tasks = plan_tasks(&shape, 7, spec);
            let layout = Layout::new(&shape, 7);
            for (i, digit) in layout.digits.iter().enumerate() {
                let mut mulacc: Vec<usize> = tasks
                    .iter()
                    .filter(|t| t.kind == KernelKind::MulAcc)
                    .flat_map(|t| t.work.iter().filter(|w| w.digit == i).flat_map(|w| w.rows.clone()))
                    .collect();
                mulacc.sort_unstable();
                assert_eq!(mulacc, (0..layout.extended_len()).collect::<Vec<_>>());
                let raised: usize = tasks
                    .iter()
                    .filter(|t| t.kind == KernelKind::BConv1)
                    .flat_map(|t| t.work.iter().filter(|w| w.digit == i))
                    .map(|w| w.rows.len())
                    .sum();
                assert_eq!(raised, layout.extended_len() - digit.len());
            }
        }
    }

    #[test]
    fn empty_chunks_are_skipped() {
        // Six output rows cannot fill ten chunks.
        let shape = ParamShape::new(1 << 10, 6, 3).unwrap();
        let tasks = plan_tasks(&shape, 6, ScheduleSpec::dpoc(10).unwrap());
        assert!(tasks.iter().all(|t| t.rows() > 0));
        assert_eq!(tasks.iter().filter(|t| t.kind == KernelKind::BConv2).count(), 6);
    }
}
