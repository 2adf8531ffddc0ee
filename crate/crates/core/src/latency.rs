//! Cycle-count model of a partial-parallel list decoder.
//!
//! Each LLR layer of `len` entries costs `ceil(len / P)` cycles on `P`
//! processing units per path; partial-sum updates are combinational (0
//! cycles); every T₁ activation occupies the pruning pipeline for `N_s`
//! cycles. The CA-SCL baseline uses the closed form
//! `N_C = 2N + (N/P)·log2(N/4P) + N·R`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{PolarError, Result};
use crate::tree::{CodeTree, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchParams {
    /// Processing units per decoding path (`P`).
    pub processing_units: usize,
    /// Pipeline stages per T₁ activation (`N_s`).
    pub pipeline_stages: usize,
    /// Clock of the baseline list decoder, MHz.
    pub baseline_mhz: f64,
    /// Clock of the reduced-latency decoder, MHz.
    pub rlld_mhz: f64,
}

impl Default for ArchParams {
    fn default() -> Self {
        Self {
            processing_units: 128,
            pipeline_stages: 4,
            baseline_mhz: 412.0,
            rlld_mhz: 400.0,
        }
    }
}

impl ArchParams {
    fn validate(&self) -> Result<()> {
        if !self.processing_units.is_power_of_two() {
            return Err(PolarError::Arch(format!(
                "P = {} is not a power of two",
                self.processing_units
            )));
        }
        if !(self.baseline_mhz > 0.0 && self.rlld_mhz > 0.0) {
            return Err(PolarError::Arch(
                "clock frequencies must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub n: usize,
    pub k: usize,
    /// `N_L`: LLR computation cycles.
    pub llr_cycles: u64,
    /// `N_a`: T₁ activations.
    pub t1_activations: u64,
    /// `N_s`.
    pub pipeline_stages: u64,
    /// `N_P = N_a·N_s`.
    pub pruning_cycles: u64,
    /// `N_R = N_L + N_P`.
    pub rlld_cycles: u64,
    /// `N_C`.
    pub baseline_cycles: u64,
    /// `N_C / N_R`.
    pub cycle_ratio: f64,
    /// `(N_C / f_CS) / (N_R / f_RS)`.
    pub latency_ratio: f64,
}

impl CycleReport {
    /// Assembles a report from raw counts.
    pub fn from_counts(
        n: usize,
        k: usize,
        llr_cycles: u64,
        t1_activations: u64,
        params: &ArchParams,
    ) -> Result<Self> {
        params.validate()?;
        let baseline = baseline_cycles(n, k, params.processing_units)?;
        let pipeline_stages = params.pipeline_stages as u64;
        let pruning_cycles = t1_activations * pipeline_stages;
        let rlld_cycles = llr_cycles + pruning_cycles;
        let cycle_ratio = baseline as f64 / rlld_cycles as f64;
        let latency_ratio =
            (baseline as f64 / params.baseline_mhz) / (rlld_cycles as f64 / params.rlld_mhz);
        Ok(Self {
            n,
            k,
            llr_cycles,
            t1_activations,
            pipeline_stages,
            pruning_cycles,
            rlld_cycles,
            baseline_cycles: baseline,
            cycle_ratio,
            latency_ratio,
        })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CycleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 10] = [
            ("N", self.n.to_string()),
            ("K", self.k.to_string()),
            ("N_L", self.llr_cycles.to_string()),
            ("N_a", self.t1_activations.to_string()),
            ("N_s", self.pipeline_stages.to_string()),
            ("N_P", self.pruning_cycles.to_string()),
            ("N_R", self.rlld_cycles.to_string()),
            ("N_C", self.baseline_cycles.to_string()),
            ("cycle_ratio", format!("{:.4}", self.cycle_ratio)),
            ("latency_ratio", format!("{:.4}", self.latency_ratio)),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<14}{v:>12}")?;
        }
        Ok(())
    }
}

/// `N_C = 2N + (N/P)·log2(N/4P) + N·R` with `R = K/N`.
pub fn baseline_cycles(n: usize, k: usize, p: usize) -> Result<u64> {
    if !n.is_power_of_two() || !p.is_power_of_two() || n < 4 * p {
        return Err(PolarError::Arch(format!(
            "need powers of two with N >= 4P (N = {n}, P = {p})"
        )));
    }
    if k > n {
        return Err(PolarError::InfoLength { k, n });
    }
    let log_term = (n / (4 * p)).trailing_zeros() as usize;
    Ok((2 * n + (n / p) * log_term + k) as u64)
}

/// `N_L` of a schedule: every scheduled LLR layer costs `ceil(len/P)`.
pub fn llr_cycles(schedule: &Schedule, p: usize) -> u64 {
    schedule
        .entries
        .iter()
        .filter_map(|e| e.llr_layers)
        .flat_map(|(from, to)| from..=to)
        .map(|t| ((1usize << (schedule.depth - t)).div_ceil(p)) as u64)
        .sum()
}

/// Cycle report of the reduced-latency decoder for a labeled tree.
pub fn rlld_cycles(tree: &CodeTree, params: &ArchParams) -> Result<CycleReport> {
    params.validate()?;
    let schedule = tree.schedule();
    let k = tree.frozen_mask().iter().filter(|&&f| !f).count();
    let n_l = llr_cycles(&schedule, params.processing_units);
    let n_a = schedule.t1_count() as u64;
    CycleReport::from_counts(tree.len(), k, n_l, n_a, params)
}
