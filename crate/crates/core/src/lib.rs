//! Polar codes with successive-cancellation, list and reduced-latency list
//! decoders, a cycle-count latency model and a Monte-Carlo FER harness.

pub mod code;
pub mod codebook;
pub mod error;
pub mod kernels;
pub mod latency;
pub mod rlld;
pub mod sc;
pub mod scl;
pub mod sim;
pub mod sorter;
pub mod tree;

pub use code::{construct_code, ConstructionMethod, CrcConfig, PolarCode, DEFAULT_DESIGN_SNR_DB};
pub use error::{PolarError, Result};
pub use rlld::{CrcStatus, ListOutput, RlldDecoder, Selection};
pub use scl::{CaSclDecoder, CopyMode};
pub use sim::{
    compare_paired, emit, simulate, simulate_many, DecoderSpec, RunResult, RunSpec, StopRule,
};
pub use tree::{build_tree, CodeTree};
