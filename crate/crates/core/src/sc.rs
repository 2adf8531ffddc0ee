//! Non-list decoders: reference SC, SSC and ML-SSC.

use std::sync::Arc;

use crate::code::{polar_transform, PolarCode};
use crate::codebook::{mask_to_bits, Codebook, CodebookCache};
use crate::error::{PolarError, Result};
use crate::kernels::{combine, f_min_sum, g_update, hard_decision};
use crate::tree::{build_tree, CodeTree, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScOutput {
    /// Estimated u-vector (frozen positions are zero).
    pub u_hat: Vec<u8>,
    /// Estimated codeword, the root constituent code.
    pub codeword: Vec<u8>,
}

fn check_len(code_len: usize, llrs: &[f64]) -> Result<()> {
    if llrs.len() != code_len {
        return Err(PolarError::Length {
            expected: code_len,
            got: llrs.len(),
        });
    }
    Ok(())
}

/// Successive cancellation over the full tree, min-sum `f`.
pub fn sc_decode(code: &PolarCode, llrs: &[f64]) -> Result<ScOutput> {
    check_len(code.len(), llrs)?;
    fn rec(alpha: &[f64], start: usize, frozen: &[bool], u: &mut [u8]) -> Vec<u8> {
        if alpha.len() == 1 {
            let bit = if frozen[start] {
                0
            } else {
                hard_decision(alpha[0])
            };
            u[start] = bit;
            return vec![bit];
        }
        let half = alpha.len() / 2;
        let left_alpha: Vec<f64> = alpha.chunks(2).map(|p| f_min_sum(p[0], p[1])).collect();
        let bl = rec(&left_alpha, start, frozen, u);
        let right_alpha: Vec<f64> = alpha
            .chunks(2)
            .zip(&bl)
            .map(|(p, &b)| g_update(p[0], p[1], b))
            .collect();
        let br = rec(&right_alpha, start + half, frozen, u);
        combine(&bl, &br)
    }
    let mut u_hat = vec![0u8; code.len()];
    let codeword = rec(llrs, 0, code.frozen_mask(), &mut u_hat);
    Ok(ScOutput { u_hat, codeword })
}

/// Exhaustive ML decision over a constituent codebook:
/// `argmax_x Σ (1 - 2x[i])·α[i]`, ties to the lowest codeword index.
pub fn ml_node_decode(alpha: &[f64], codebook: &Codebook) -> (usize, Vec<u8>) {
    assert_eq!(alpha.len(), codebook.width());
    let mut best = (0usize, f64::NEG_INFINITY);
    for (j, &w) in codebook.words().iter().enumerate() {
        let score: f64 = alpha
            .iter()
            .enumerate()
            .map(|(k, &a)| if (w >> k) & 1 == 1 { -a } else { a })
            .sum();
        if score > best.1 {
            best = (j, score);
        }
    }
    (best.0, codebook.word_bits(best.0))
}

/// Decoder over a pruned [`CodeTree`]: rate-0 nodes return zeros, rate-1
/// nodes hard decisions, ML nodes exhaustive ML, and arbitrary nodes recurse.
#[derive(Debug, Clone)]
pub struct TreeDecoder {
    tree: CodeTree,
    codebooks: Vec<Option<Arc<Codebook>>>,
}

impl TreeDecoder {
    pub fn new(tree: CodeTree) -> Self {
        let mut cache = CodebookCache::default();
        let codebooks = tree
            .nodes()
            .iter()
            .map(|n| {
                (n.kind == NodeKind::Ml && n.is_target()).then(|| cache.get(&tree.local_frozen(n)))
            })
            .collect();
        Self { tree, codebooks }
    }

    pub fn ssc(code: &PolarCode) -> Self {
        Self::new(CodeTree::ssc(&build_tree(code)))
    }

    /// ML-SSC: rate-1 nodes are never list-expanded, so `W_T = 0`.
    pub fn ml_ssc(code: &PolarCode, w_ml: usize) -> Result<Self> {
        Ok(Self::new(CodeTree::prune_and_label(
            &build_tree(code),
            0,
            w_ml,
        )?))
    }

    pub fn tree(&self) -> &CodeTree {
        &self.tree
    }

    pub fn decode(&self, llrs: &[f64]) -> Result<ScOutput> {
        check_len(self.tree.len(), llrs)?;
        let mut u_hat = vec![0u8; self.tree.len()];
        let codeword = self.rec(0, llrs, &mut u_hat);
        Ok(ScOutput { u_hat, codeword })
    }

    fn rec(&self, idx: usize, alpha: &[f64], u: &mut [u8]) -> Vec<u8> {
        let node = self.tree.node(idx);
        let beta = match (node.children, node.kind) {
            (Some([l, r]), _) => {
                let left_alpha: Vec<f64> = alpha.chunks(2).map(|p| f_min_sum(p[0], p[1])).collect();
                let bl = self.rec(l, &left_alpha, u);
                let right_alpha: Vec<f64> = alpha
                    .chunks(2)
                    .zip(&bl)
                    .map(|(p, &b)| g_update(p[0], p[1], b))
                    .collect();
                let br = self.rec(r, &right_alpha, u);
                return combine(&bl, &br);
            }
            (None, NodeKind::Rate0) => vec![0u8; node.width],
            (None, NodeKind::Rate1) => alpha.iter().map(|&a| hard_decision(a)).collect(),
            (None, NodeKind::Ml) => {
                let cb = self.codebooks[idx].as_ref().expect("ML node codebook");
                mask_to_bits(cb.word(ml_node_decode(alpha, cb).0), node.width)
            }
            (None, NodeKind::Arbitrary) => unreachable!("arbitrary nodes always have children"),
        };
        let seg = &mut u[node.start..node.start + node.width];
        seg.copy_from_slice(&beta);
        polar_transform(seg);
        beta
    }
}

pub fn ssc_decode(code: &PolarCode, llrs: &[f64]) -> Result<ScOutput> {
    TreeDecoder::ssc(code).decode(llrs)
}

pub fn ml_ssc_decode(code: &PolarCode, llrs: &[f64], w_ml: usize) -> Result<ScOutput> {
    TreeDecoder::ml_ssc(code, w_ml)?.decode(llrs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_all_zero() {
        let code = PolarCode::new(4, 8, &(0..8).collect::<Vec<_>>()).unwrap();
        let out = sc_decode(&code, &[10.0; 16]).unwrap();
        assert_eq!(out.u_hat, vec![0; 16]);
        assert_eq!(ssc_decode(&code, &[10.0; 16]).unwrap(), out);
    }

    #[test]
    fn n4_hand_trace() {
        // frozen {0,1}; LLRs (+1, -3, +2, +1)
        // layer 1 left: f(1,-3) = -1, f(2,1) = 1; leaves: f(-1,1) = -1 -> u0 frozen 0,
        // g(-1,1,0) = 0 -> u1 frozen 0; right: g(1,-3,0) = -2, g(2,1,0) = 3;
        // f(-2,3) = -2 -> u2 = 1; g(-2,3,1) = 5 -> u3 = 0.
        let code = PolarCode::new(2, 2, &[0, 1]).unwrap();
        let out = sc_decode(&code, &[1.0, -3.0, 2.0, 1.0]).unwrap();
        assert_eq!(out.u_hat, vec![0, 0, 1, 0]);
        assert_eq!(out.codeword, code.encode(&out.u_hat).unwrap());
        assert_eq!(out.codeword, vec![1, 1, 0, 0]);
    }

    #[test]
    fn ml_node_examples() {
        let zero = Codebook::new(&[true, true]);
        assert_eq!(ml_node_decode(&[-3.0, 2.0], &zero).1, vec![0, 0]);
        let full = Codebook::new(&[false, false]);
        assert_eq!(ml_node_decode(&[1.0, -2.0], &full).1, vec![0, 1]);
        // repetition: score(0000) = 1+1+1-3 = 0, score(1111) = -0 = 0 -> tie
        // goes to index 0; shift the last LLR to break the tie.
        let rep = Codebook::new(&[true, true, true, false]);
        assert_eq!(
            ml_node_decode(&[1.0, 1.0, 1.0, -3.0], &rep).1,
            vec![0, 0, 0, 0]
        );
        let s1111: f64 = -(1.0 + 1.0 + 1.0 - 3.5);
        assert!(s1111 > 0.0);
        assert_eq!(
            ml_node_decode(&[1.0, 1.0, 1.0, -3.5], &rep).1,
            vec![1, 1, 1, 1]
        );
    }

    #[test]
    fn length_mismatch() {
        let code = PolarCode::new(2, 2, &[0, 1]).unwrap();
        assert!(sc_decode(&code, &[1.0; 3]).is_err());
        assert!(ssc_decode(&code, &[1.0; 5]).is_err());
    }
}
