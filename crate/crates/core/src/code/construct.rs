//! Frozen-set construction by reliability ranking of the synthetic channels.
//!
//! Leaf `i` of the code tree is reached from the root by reading the bits of
//! `i` MSB first: a 0 bit is the degraded (check-node) branch, a 1 bit the
//! upgraded (variable-node) branch.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PolarCode;
use crate::error::{PolarError, Result};

/// Design Eb/N0 (dB) used by the Gaussian approximation unless overridden.
pub const DEFAULT_DESIGN_SNR_DB: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ConstructionMethod {
    /// Bhattacharyya-parameter recursion. The design parameter is the
    /// Bhattacharyya parameter of the underlying channel, in (0, 1); for an
    /// erasure channel it is the erasure probability.
    Bhattacharyya,
    /// Gaussian approximation of density evolution. The design parameter is
    /// Eb/N0 in dB; the rate used to convert it is K/N.
    #[default]
    GaussianApproximation,
}

impl FromStr for ConstructionMethod {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bhattacharyya" | "bha" | "bec" => Ok(Self::Bhattacharyya),
            "ga" | "gaussian" | "gaussian-approximation" => Ok(Self::GaussianApproximation),
            other => Err(PolarError::UnknownMethod(other.to_string())),
        }
    }
}

impl fmt::Display for ConstructionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bhattacharyya => f.write_str("bhattacharyya"),
            Self::GaussianApproximation => f.write_str("ga"),
        }
    }
}

/// Builds a code of length `2^depth` with `k` information positions (CRC bits
/// included) by freezing the `N - k` least reliable synthetic channels.
pub fn construct_code(
    depth: usize,
    k: usize,
    method: ConstructionMethod,
    design_param: f64,
) -> Result<PolarCode> {
    if !(2..=24).contains(&depth) {
        return Err(PolarError::BlockLength(
            1usize.checked_shl(depth as u32).unwrap_or(0),
        ));
    }
    let len = 1usize << depth;
    if k == 0 || k > len {
        return Err(PolarError::InfoLength { k, n: len });
    }
    let reliability = match method {
        ConstructionMethod::Bhattacharyya => {
            if !(design_param > 0.0 && design_param < 1.0) {
                return Err(PolarError::DesignParam(design_param));
            }
            bhattacharyya_reliability(depth, design_param)
        }
        ConstructionMethod::GaussianApproximation => {
            if !design_param.is_finite() {
                return Err(PolarError::DesignParam(design_param));
            }
            let rate = k as f64 / len as f64;
            let mean = 4.0 * rate * 10f64.powf(design_param / 10.0);
            ga_reliability(depth, mean)
        }
    };
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| reliability[a].total_cmp(&reliability[b]).then(a.cmp(&b)));
    let mut frozen: Vec<usize> = order[..len - k].to_vec();
    frozen.sort_unstable();
    PolarCode::new(depth, k, &frozen)
}

/// Returns `-ln Z` per leaf; larger is more reliable.
pub fn bhattacharyya_reliability(depth: usize, z0: f64) -> Vec<f64> {
    let mut ln_z = vec![z0.ln()];
    for _ in 0..depth {
        ln_z = ln_z
            .iter()
            .flat_map(|&lz| {
                let z = lz.exp();
                [lz + (2.0 - z).ln(), 2.0 * lz]
            })
            .collect();
    }
    ln_z.into_iter().map(|lz| -lz).collect()
}

/// Returns the mean LLR per leaf under the Gaussian approximation.
pub fn ga_reliability(depth: usize, channel_mean: f64) -> Vec<f64> {
    let mut means = vec![channel_mean];
    for _ in 0..depth {
        means = means
            .iter()
            .flat_map(|&m| [ga_check_node(m), 2.0 * m])
            .collect();
    }
    means
}

/// `ln φ(x)` with Chung's two-piece approximation of φ.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 10.0 {
        (-0.4527 * x.powf(0.86) + 0.0218).min(0.0)
    } else {
        0.5 * (PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// φ⁻¹(1 − (1 − φ(m))²), evaluated in the log domain so large means do not
/// underflow.
fn ga_check_node(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let lp = ln_phi(m);
    let target = lp + (2.0 - lp.exp()).ln();
    let (mut lo, mut hi) = (0.0f64, m);
    for _ in 0..128 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
