//! Constituent codebooks of small tree nodes.

use std::collections::HashMap;
use std::sync::Arc;

use crate::code::polar_transform;

/// All constituent codewords of a node with the given local frozen pattern.
///
/// Codeword `j` is the node-local polar transform of the u-segment whose
/// information positions, in increasing order, carry the bits of `j` MSB
/// first. Words are bitmasks: bit `k` is position `k` of the node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    width: usize,
    info_count: usize,
    words: Vec<u32>,
}

impl Codebook {
    pub fn new(local_frozen: &[bool]) -> Self {
        let width = local_frozen.len();
        assert!(width.is_power_of_two() && width <= 32, "node width {width}");
        let info: Vec<usize> = (0..width).filter(|&k| !local_frozen[k]).collect();
        let info_count = info.len();
        assert!(
            info_count <= 16,
            "too many information bits for enumeration"
        );
        let mut u = vec![0u8; width];
        let words = (0..1usize << info_count)
            .map(|j| {
                u.fill(0);
                for (m, &pos) in info.iter().enumerate() {
                    u[pos] = ((j >> (info_count - 1 - m)) & 1) as u8;
                }
                polar_transform(&mut u);
                u.iter()
                    .enumerate()
                    .fold(0u32, |acc, (k, &b)| acc | ((b as u32) << k))
            })
            .collect();
        Self {
            width,
            info_count,
            words,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn info_count(&self) -> usize {
        self.info_count
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn word(&self, j: usize) -> u32 {
        self.words[j]
    }

    pub fn word_bits(&self, j: usize) -> Vec<u8> {
        mask_to_bits(self.words[j], self.width)
    }
}

pub fn mask_to_bits(mask: u32, width: usize) -> Vec<u8> {
    (0..width).map(|k| ((mask >> k) & 1) as u8).collect()
}

/// Hard-decision bitmask of an LLR vector (bit k set when `llr[k] < 0`).
pub fn hard_mask(llr: &[f64]) -> u32 {
    llr.iter()
        .enumerate()
        .fold(0u32, |acc, (k, &a)| acc | (((a < 0.0) as u32) << k))
}

/// Shares codebooks between nodes with identical frozen patterns.
#[derive(Debug, Default)]
pub struct CodebookCache {
    map: HashMap<Vec<bool>, Arc<Codebook>>,
}

impl CodebookCache {
    pub fn get(&mut self, local_frozen: &[bool]) -> Arc<Codebook> {
        self.map
            .entry(local_frozen.to_vec())
            .or_insert_with(|| Arc::new(Codebook::new(local_frozen)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
