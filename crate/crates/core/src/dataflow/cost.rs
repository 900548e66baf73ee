//! Per-warp instruction templates for each kernel kind.
//!
//! A warp owns `E = min(elements_per_warp, N)` output coefficients of one
//! prime row, so a launch over `r` rows of degree `N` has exactly `r·N/E`
//! warps and the template below is the same for every launch of a kind.

use serde::{Deserialize, Serialize};

use super::plan::KernelKind;
use crate::ckks::ParamShape;

/// Instruction-cost constants. Defaults are order-of-magnitude estimates for
/// 64-bit modular arithmetic on 32-bit integer units, not calibrated values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelCosts {
    /// Coefficients handled by one logical warp.
    pub elements_per_warp: u64,
    /// ALU instructions per lane for one radix-2 butterfly.
    pub butterfly_alu: u64,
    /// ALU instructions per lane for one BConv multiply-accumulate.
    pub mac_alu: u64,
    /// ALU instructions per lane for a MulAcc element (two products, two sums).
    pub mulacc_alu: u64,
    /// ALU instructions per lane for the fused `(x − c)·P^{-1}` epilogue.
    pub epilogue_alu: u64,
    /// Global-memory round trips per NTT; remaining stages stay on chip.
    pub ntt_global_passes: u64,
}

impl Default for KernelCosts {
    fn default() -> Self {
        Self {
            elements_per_warp: 1024,
            butterfly_alu: 10,
            mac_alu: 8,
            mulacc_alu: 16,
            epilogue_alu: 8,
            ntt_global_passes: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StallKind {
    ComData,
    MemData,
}

/// An issue run ended by a dependency stall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalTemplate {
    pub alu_insts: u64,
    pub mem_insts: u64,
    pub stall: StallKind,
}

impl IntervalTemplate {
    pub fn issue_insts(&self) -> u64 {
        self.alu_insts + self.mem_insts
    }
}

/// Per-warp work of one kernel kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelTemplate {
    pub intervals: Vec<IntervalTemplate>,
    pub words_read: u64,
    pub words_written: u64,
}

impl KernelTemplate {
    pub fn insts_per_warp(&self) -> u64 {
        self.intervals.iter().map(IntervalTemplate::issue_insts).sum()
    }
}

impl KernelCosts {
    pub fn elements_per_warp(&self, n: usize) -> u64 {
        self.elements_per_warp.min(n as u64).max(1)
    }

    pub fn template(&self, kind: KernelKind, shape: &ParamShape) -> KernelTemplate {
        let e = self.elements_per_warp(shape.n);
        // Instructions to touch E elements once across 32 lanes.
        let w = e.div_ceil(32);
        let half = e.div_ceil(64);
        let stages = shape.n.trailing_zeros() as u64;
        let alpha = shape.alpha() as u64;
        let ntt_stages = |intervals: &mut Vec<IntervalTemplate>| {
            for _ in 0..stages {
                intervals.push(IntervalTemplate { alu_insts: 0, mem_insts: 2 * w, stall: StallKind::MemData });
                intervals.push(IntervalTemplate {
                    alu_insts: half * self.butterfly_alu,
                    mem_insts: 0,
                    stall: StallKind::ComData,
                });
            }
        };
        let passes = self.ntt_global_passes;
        let mut intervals = Vec::new();
        match kind {
            KernelKind::Intt1 | KernelKind::NTT1 | KernelKind::Intt2 => {
                ntt_stages(&mut intervals);
                KernelTemplate { intervals, words_read: passes * e, words_written: passes * e }
            }
            KernelKind::NTT2 => {
                ntt_stages(&mut intervals);
                intervals.push(IntervalTemplate {
                    alu_insts: w * self.epilogue_alu,
                    mem_insts: 2 * w,
                    stall: StallKind::ComData,
                });
                KernelTemplate { intervals, words_read: passes * e + e, words_written: passes * e }
            }
            KernelKind::BConv1 | KernelKind::BConv2 => {
                // One source row per interval, padded to alpha rows so the
                // template does not depend on which digit is converted.
                for _ in 0..alpha {
                    intervals.push(IntervalTemplate {
                        alu_insts: w * self.mac_alu,
                        mem_insts: w,
                        stall: StallKind::MemData,
                    });
                }
                intervals.push(IntervalTemplate { alu_insts: 2 * w, mem_insts: w, stall: StallKind::ComData });
                KernelTemplate { intervals, words_read: alpha * e, words_written: e }
            }
            KernelKind::MulAcc => {
                intervals.push(IntervalTemplate { alu_insts: 0, mem_insts: 5 * w, stall: StallKind::MemData });
                intervals.push(IntervalTemplate {
                    alu_insts: w * self.mulacc_alu,
                    mem_insts: 2 * w,
                    stall: StallKind::ComData,
                });
                KernelTemplate { intervals, words_read: 5 * e, words_written: 2 * e }
            }
        }
    }
}
