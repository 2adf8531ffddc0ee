//! List-decoding state (per-path LLR and partial-sum arrays with lazy
//! copying), the LLR-domain path metric, and the CRC-aided SC list decoder.

use serde::Serialize;

use crate::code::{polar_transform, PolarCode};
use crate::error::Result;
use crate::kernels::{f_min_sum, g_update, hard_decision};
use crate::rlld::{ListConfig, ListDecoder, ListOutput, Selection};
use crate::tree::{build_tree, CodeTree};

/// How a cloned path obtains its LLR arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CopyMode {
    /// Copy the per-layer reference indices only.
    #[default]
    Lazy,
    /// Copy every LLR array. Reference implementation for testing.
    Eager,
}

/// Per-path decoder memory for list size `L` and depth `n`.
///
/// `llr[t][l]` is `P_{l,t}` (layer 0 is the shared channel vector),
/// `psum[t][l][k]` is `C_{l,t}[k]` (slot 0 left-child code, slot 1 right-child
/// code) and `refs[l][t]` is `r_l[t]`, the path whose layer-`t` array path `l`
/// reads.
#[derive(Debug, Clone)]
pub struct ListState {
    depth: usize,
    list_size: usize,
    copy_mode: CopyMode,
    channel: Vec<f64>,
    llr: Vec<Vec<Vec<f64>>>,
    psum: Vec<Vec<Vec<[u8; 2]>>>,
    refs: Vec<Vec<usize>>,
    metrics: Vec<f64>,
    active: Vec<bool>,
    u_hat: Vec<Vec<u8>>,
}

impl ListState {
    pub fn new(depth: usize, list_size: usize, copy_mode: CopyMode) -> Self {
        assert!(list_size >= 1);
        let len = 1usize << depth;
        let llr = (0..=depth)
            .map(|t| {
                if t == 0 {
                    Vec::new()
                } else {
                    vec![vec![0.0; len >> t]; list_size]
                }
            })
            .collect();
        let psum = (0..=depth)
            .map(|t| vec![vec![[0u8; 2]; len >> t]; list_size])
            .collect();
        Self {
            depth,
            list_size,
            copy_mode,
            channel: vec![0.0; len],
            llr,
            psum,
            refs: vec![vec![0; depth + 1]; list_size],
            metrics: vec![0.0; list_size],
            active: vec![false; list_size],
            u_hat: vec![vec![0; len]; list_size],
        }
    }

    /// Starts a frame: one active path (index 0) with metric 0.
    pub fn reset(&mut self, channel: &[f64]) {
        assert_eq!(channel.len(), self.channel.len());
        self.channel.copy_from_slice(channel);
        for r in &mut self.refs {
            r.fill(0);
        }
        self.metrics.fill(0.0);
        self.active.fill(false);
        self.active[0] = true;
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn copy_mode(&self) -> CopyMode {
        self.copy_mode
    }

    pub fn is_active(&self, l: usize) -> bool {
        self.active[l]
    }

    pub fn active_paths(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.list_size).filter(|&l| self.active[l])
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn set_active(&mut self, l: usize, on: bool) {
        self.active[l] = on;
    }

    pub fn metric(&self, l: usize) -> f64 {
        self.metrics[l]
    }

    pub fn set_metric(&mut self, l: usize, pm: f64) {
        self.metrics[l] = pm;
    }

    pub fn refs(&self, l: usize) -> &[usize] {
        &self.refs[l]
    }

    pub fn u_hat(&self, l: usize) -> &[u8] {
        &self.u_hat[l]
    }

    /// The LLR vector path `l` sees at `layer`, resolved through `r_l`.
    pub fn view_llrs(&self, l: usize, layer: usize) -> &[f64] {
        if layer == 0 {
            &self.channel
        } else {
            &self.llr[layer][self.refs[l][layer]]
        }
    }

    /// Writes `P_{l,t}` for `t = from..=to`: `g` with the stored left partial
    /// sums at `t == i_s`, `f` at every other layer.
    pub fn llr_comp(&mut self, l: usize, i_s: usize, from: usize, to: usize) {
        debug_assert!(from >= 1 && to <= self.depth);
        for t in from..=to {
            let src_path = self.refs[l][t - 1];
            let (lower, upper) = self.llr.split_at_mut(t);
            let src: &[f64] = if t == 1 {
                &self.channel
            } else {
                &lower[t - 1][src_path]
            };
            let dst = &mut upper[0][l];
            if t == i_s {
                let ps = &self.psum[t][l];
                for (k, d) in dst.iter_mut().enumerate() {
                    *d = g_update(src[2 * k], src[2 * k + 1], ps[k][0]);
                }
            } else {
                for (k, d) in dst.iter_mut().enumerate() {
                    *d = f_min_sum(src[2 * k], src[2 * k + 1]);
                }
            }
            self.refs[l][t] = l;
        }
    }

    /// Stores the constituent code `beta` of the node at (`layer`, `start`)
    /// for path `l`, records its u-segment, and propagates partial sums
    /// upward while the current node is a right child. Returns the layer
    /// where propagation stopped.
    pub fn psum_comp(&mut self, l: usize, layer: usize, start: usize, beta: &[u8]) -> usize {
        let width = beta.len();
        debug_assert_eq!(width, 1 << (self.depth - layer));
        let seg = &mut self.u_hat[l][start..start + width];
        seg.copy_from_slice(beta);
        polar_transform(seg);

        let mut index = start >> (self.depth - layer);
        let slot = (layer > 0 && index % 2 == 1) as usize;
        for (c, &b) in self.psum[layer][l].iter_mut().zip(beta) {
            c[slot] = b;
        }
        let mut t = layer;
        while t > 0 && index % 2 == 1 {
            let parent = index / 2;
            let pslot = (t > 1 && parent % 2 == 1) as usize;
            let (lower, upper) = self.psum.split_at_mut(t);
            let child = &upper[0][l];
            let dst = &mut lower[t - 1][l];
            for (k, c) in child.iter().enumerate() {
                dst[2 * k][pslot] = c[0] ^ c[1];
                dst[2 * k + 1][pslot] = c[1];
            }
            t -= 1;
            index = parent;
        }
        t
    }

    /// Clones path `from` into slot `to`: partial sums and u-estimates are
    /// copied; LLR arrays are shared through the references for layers below
    /// `i_s`, while layers `i_s..=n` point at `to` itself (they are rewritten
    /// before being read). In eager mode the LLR arrays are copied instead.
    pub fn lazy_copy(&mut self, from: usize, to: usize, i_s: usize) {
        if from == to {
            return;
        }
        match self.copy_mode {
            CopyMode::Lazy => {
                let src = self.refs[from].clone();
                let dst = &mut self.refs[to];
                dst[0] = 0;
                for t in 1..=self.depth {
                    dst[t] = if t < i_s { src[t] } else { to };
                }
            }
            CopyMode::Eager => {
                for t in 1..=self.depth {
                    let view = self.refs[from][t];
                    let data = self.llr[t][view].clone();
                    self.llr[t][to] = data;
                    self.refs[to][t] = to;
                }
            }
        }
        for t in 0..=self.depth {
            let data = self.psum[t][from].clone();
            self.psum[t][to] = data;
        }
        let u = self.u_hat[from].clone();
        self.u_hat[to] = u;
        self.metrics[to] = self.metrics[from];
    }

    /// Root constituent code of path `l` (the estimated codeword).
    pub fn codeword(&self, l: usize) -> Vec<u8> {
        self.psum[0][l].iter().map(|c| c[0]).collect()
    }
}

/// `PM + |llr|` when the decision disagrees with the threshold detection of
/// `llr`, else `PM`.
pub fn bit_metric_update(pm: f64, llr: f64, u: u8) -> f64 {
    if u != hard_decision(llr) {
        pm + llr.abs()
    } else {
        pm
    }
}

/// One continuation of a path at an information bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathFork {
    pub path: usize,
    pub bit: u8,
    pub metric: f64,
}

/// Forks every `(path, metric, llr)` on both bit values and keeps the
/// `list_size` smallest extended metrics (ties: lower path, then bit 0).
pub fn expand_and_prune(paths: &[(usize, f64, f64)], list_size: usize) -> Vec<PathFork> {
    let mut forks: Vec<PathFork> = paths
        .iter()
        .flat_map(|&(path, pm, llr)| {
            [0u8, 1].map(|bit| PathFork {
                path,
                bit,
                metric: bit_metric_update(pm, llr, bit),
            })
        })
        .collect();
    forks.sort_by(|a, b| {
        a.metric
            .total_cmp(&b.metric)
            .then(a.path.cmp(&b.path))
            .then(a.bit.cmp(&b.bit))
    });
    forks.truncate(list_size);
    forks
}

/// CRC-aided SC list decoder: bit-by-bit expansion over the unpruned tree,
/// frozen bits penalize the path metric.
#[derive(Debug, Clone)]
pub struct CaSclDecoder {
    inner: ListDecoder,
}

impl CaSclDecoder {
    pub fn new(code: &PolarCode, list_size: usize) -> Result<Self> {
        Self::with_copy_mode(code, list_size, CopyMode::Lazy)
    }

    pub fn with_copy_mode(code: &PolarCode, list_size: usize, copy_mode: CopyMode) -> Result<Self> {
        let tree = CodeTree::unpruned(&build_tree(code));
        let cfg = ListConfig {
            list_size,
            selection: Selection::Lmld,
            rate0_penalty: true,
            copy_mode,
        };
        Ok(Self {
            inner: ListDecoder::new(code.clone(), tree, cfg)?,
        })
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<ListOutput> {
        self.inner.decode(llrs)
    }

    pub fn inner_mut(&mut self) -> &mut ListDecoder {
        &mut self.inner
    }
}

pub fn ca_scl_decode(code: &PolarCode, llrs: &[f64], list_size: usize) -> Result<ListOutput> {
    CaSclDecoder::new(code, list_size)?.decode(llrs)
}
