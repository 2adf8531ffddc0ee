//! Reduced-latency list decoding over the pruned code tree.
//!
//! T₀ nodes are decoded instantly (rate-0: zeros, rate-1: hard decision)
//! without touching the path metrics. T₁ nodes (small rate-1 and ML nodes)
//! expand every path over its `2^{I_v}` candidate constituent codes and keep
//! the `L` best extended metrics, either exactly (LMLD) or through the
//! group-minimum / bitonic-sorter pipeline (SLMLD).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::code::PolarCode;
use crate::codebook::{hard_mask, mask_to_bits, Codebook, CodebookCache};
use crate::error::{PolarError, Result};
use crate::kernels::hard_decision;
use crate::scl::{CopyMode, ListState};
use crate::sorter::{bbs_2l_l, min2, MetricRecord};
use crate::tree::{build_tree, CodeTree, ListClass, NodeKind, Schedule, DEFAULT_W_ML};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Selection {
    #[default]
    Lmld,
    Slmld,
}

impl FromStr for Selection {
    type Err = PolarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmld" => Ok(Self::Lmld),
            "slmld" => Ok(Self::Slmld),
            other => Err(PolarError::UnknownAlgorithm(other.to_string())),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lmld => "lmld",
            Self::Slmld => "slmld",
        })
    }
}

/// A candidate continuation `(l, j)` of a T₁ node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub path: usize,
    pub index: usize,
    pub node_metric: f64,
    /// Extended metric `PM_l + NM_l^j`.
    pub metric: f64,
}

/// Node metrics of one path at a T₁ node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathExpansion {
    pub path: usize,
    pub path_metric: f64,
    pub node_metrics: Vec<f64>,
}

/// `NM^j = Σ_k |α[k]|` over the positions where codeword `j` disagrees with
/// the threshold detection of `α`.
pub fn node_metrics(alpha: &[f64], codebook: &Codebook) -> Vec<f64> {
    assert_eq!(alpha.len(), codebook.width());
    let hard = hard_mask(alpha);
    codebook
        .words()
        .iter()
        .map(|&w| {
            let mut diff = w ^ hard;
            let mut nm = 0.0;
            while diff != 0 {
                let k = diff.trailing_zeros() as usize;
                nm += alpha[k].abs();
                diff &= diff - 1;
            }
            nm
        })
        .collect()
}

/// Every `(l, j)` with its extended metric, in path-major order.
pub fn candidate_set(paths: &[PathExpansion]) -> Vec<Candidate> {
    paths
        .iter()
        .flat_map(|p| {
            p.node_metrics
                .iter()
                .enumerate()
                .map(move |(j, &nm)| Candidate {
                    path: p.path,
                    index: j,
                    node_metric: nm,
                    metric: p.path_metric + nm,
                })
        })
        .collect()
}

/// Exact list-ML selection: the `L` smallest extended metrics over all
/// paths and candidates, ascending (ties by path, then candidate index).
pub fn lmld_expand(paths: &[PathExpansion], list_size: usize) -> Vec<Candidate> {
    let cands = candidate_set(paths);
    select_candidates(&cands, list_size)
}

fn select_candidates(cands: &[Candidate], list_size: usize) -> Vec<Candidate> {
    let cmp = |a: &Candidate, b: &Candidate| {
        a.metric
            .total_cmp(&b.metric)
            .then(a.path.cmp(&b.path))
            .then(a.index.cmp(&b.index))
    };
    let mut v = cands.to_vec();
    if list_size < v.len() {
        v.select_nth_unstable_by(list_size, cmp);
        v.truncate(list_size);
    }
    v.sort_by(cmp);
    v
}

/// Step 1 of SLMLD for one path: up to `L` node-metric records.
fn slmld_path_survivors(p: &PathExpansion, list_size: usize) -> Vec<MetricRecord<(usize, usize)>> {
    let recs: Vec<_> = p
        .node_metrics
        .iter()
        .enumerate()
        .map(|(j, &nm)| MetricRecord::new(nm, (p.path, j)))
        .collect();
    let count = recs.len();
    if count <= list_size {
        recs
    } else if count == 2 * list_size {
        bbs_2l_l(&recs, list_size)
    } else {
        let q = count / list_size;
        let pairs: Vec<_> = recs.chunks(q).flat_map(min2).collect();
        bbs_2l_l(&pairs, list_size)
    }
}

/// Reduces records to the `L` smallest through a tree of 2L→L sorters fed
/// with contiguous blocks.
fn bbs_tree_reduce(
    mut records: Vec<MetricRecord<(usize, usize)>>,
    list_size: usize,
) -> Vec<MetricRecord<(usize, usize)>> {
    const PAD: (usize, usize) = (usize::MAX, usize::MAX);
    while records.len() > list_size {
        records = records
            .chunks(2 * list_size)
            .flat_map(|block| {
                let mut block = block.to_vec();
                block.resize(2 * list_size, MetricRecord::new(f64::INFINITY, PAD));
                bbs_2l_l(&block, list_size)
            })
            .collect();
    }
    records.retain(|r| r.payload != PAD);
    records.sort_by(crate::sorter::record_cmp);
    records
}

/// Simplified list-ML selection for `L` a power of two up to 8.
pub fn slmld_expand(paths: &[PathExpansion], list_size: usize) -> Result<Vec<Candidate>> {
    if !list_size.is_power_of_two() || list_size > 8 {
        return Err(PolarError::ListSize(list_size));
    }
    let mut extended = Vec::with_capacity(paths.len() * list_size);
    for p in paths {
        if !p.node_metrics.len().is_power_of_two() {
            return Err(PolarError::Length {
                expected: p.node_metrics.len().next_power_of_two(),
                got: p.node_metrics.len(),
            });
        }
        for r in slmld_path_survivors(p, list_size) {
            extended.push(MetricRecord::new(p.path_metric + r.metric, r.payload));
        }
    }
    let lookup = |path: usize, index: usize| {
        let p = paths.iter().find(|p| p.path == path).expect("known path");
        Candidate {
            path,
            index,
            node_metric: p.node_metrics[index],
            metric: p.path_metric + p.node_metrics[index],
        }
    };
    Ok(bbs_tree_reduce(extended, list_size)
        .into_iter()
        .map(|r| lookup(r.payload.0, r.payload.1))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ListConfig {
    pub list_size: usize,
    pub selection: Selection,
    /// Charge frozen positions of rate-0 targets to the path metric (bit-wise
    /// list decoding). RLLD leaves it off.
    pub rate0_penalty: bool,
    pub copy_mode: CopyMode,
}

impl ListConfig {
    pub fn rlld(list_size: usize, selection: Selection) -> Self {
        Self {
            list_size,
            selection,
            rate0_penalty: false,
            copy_mode: CopyMode::Lazy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrcStatus {
    Passed,
    Failed,
    /// The code has no CRC; the lowest-metric path was returned.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ListOutput {
    pub u_hat: Vec<u8>,
    pub codeword: Vec<u8>,
    pub payload: Vec<u8>,
    pub path_metric: f64,
    pub crc: CrcStatus,
    /// Number of T₁ activations (`N_a`) in this frame.
    pub t1_activations: usize,
    /// Metrics of all final paths, ascending.
    pub final_metrics: Vec<f64>,
}

/// LLR vector seen by one path at one schedule entry.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLlrs {
    pub entry: usize,
    pub path: usize,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub entry: usize,
    pub expansions: Vec<PathExpansion>,
    pub survivors: Vec<Candidate>,
}

/// Optional per-frame record of decoder internals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodeTrace {
    pub alphas: Vec<NodeLlrs>,
    pub activations: Vec<Activation>,
    /// `(path, PM)` of every active path after each schedule entry.
    pub metrics: Vec<Vec<(usize, f64)>>,
}

/// Schedule-driven list decoder shared by CA-SCL (unpruned tree, frozen-bit
/// penalties) and RLLD (pruned tree).
#[derive(Debug, Clone)]
pub struct ListDecoder {
    code: PolarCode,
    tree: CodeTree,
    schedule: Schedule,
    codebooks: Vec<Option<Arc<Codebook>>>,
    cfg: ListConfig,
    state: ListState,
    betas: Vec<Vec<u8>>,
}

impl ListDecoder {
    pub fn new(code: PolarCode, tree: CodeTree, cfg: ListConfig) -> Result<Self> {
        if cfg.list_size == 0 {
            return Err(PolarError::ListSize(0));
        }
        if cfg.selection == Selection::Slmld
            && (!cfg.list_size.is_power_of_two() || cfg.list_size > 8)
        {
            return Err(PolarError::ListSize(cfg.list_size));
        }
        if tree.len() != code.len() {
            return Err(PolarError::Length {
                expected: code.len(),
                got: tree.len(),
            });
        }
        let schedule = if cfg.rate0_penalty {
            tree.schedule_with_rate0_llrs()
        } else {
            tree.schedule()
        };
        let mut cache = CodebookCache::default();
        let codebooks = schedule
            .entries
            .iter()
            .map(|e| {
                (e.class == ListClass::T1)
                    .then(|| cache.get(&code.frozen_mask()[e.start..e.start + e.width]))
            })
            .collect();
        let state = ListState::new(code.depth(), cfg.list_size, cfg.copy_mode);
        let betas = vec![Vec::new(); cfg.list_size];
        Ok(Self {
            code,
            tree,
            schedule,
            codebooks,
            cfg,
            state,
            betas,
        })
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    pub fn tree(&self) -> &CodeTree {
        &self.tree
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn config(&self) -> &ListConfig {
        &self.cfg
    }

    pub fn state(&self) -> &ListState {
        &self.state
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<ListOutput> {
        self.run(llrs, None)
    }

    pub fn decode_traced(&mut self, llrs: &[f64], trace: &mut DecodeTrace) -> Result<ListOutput> {
        self.run(llrs, Some(trace))
    }

    fn run(&mut self, llrs: &[f64], mut trace: Option<&mut DecodeTrace>) -> Result<ListOutput> {
        if llrs.len() != self.code.len() {
            return Err(PolarError::Length {
                expected: self.code.len(),
                got: llrs.len(),
            });
        }
        if let Some(tr) = trace.as_deref_mut() {
            *tr = DecodeTrace::default();
        }
        self.state.reset(llrs);
        let mut activations = 0;
        for pos in 0..self.schedule.len() {
            let entry = self.schedule.entries[pos].clone();
            let active: Vec<usize> = self.state.active_paths().collect();
            if let Some((from, to)) = entry.llr_layers {
                for &l in &active {
                    self.state.llr_comp(l, entry.i_s, from, to);
                }
            }
            let needs_alpha = entry.kind != NodeKind::Rate0 || self.cfg.rate0_penalty;
            if needs_alpha {
                if let Some(tr) = trace.as_deref_mut() {
                    for &l in &active {
                        tr.alphas.push(NodeLlrs {
                            entry: pos,
                            path: l,
                            alpha: self.state.view_llrs(l, entry.layer).to_vec(),
                        });
                    }
                }
            }
            match (entry.class, entry.kind) {
                (ListClass::T0, NodeKind::Rate0) => {
                    for &l in &active {
                        if self.cfg.rate0_penalty {
                            let penalty: f64 = self
                                .state
                                .view_llrs(l, entry.layer)
                                .iter()
                                .filter(|&&a| a < 0.0)
                                .map(|a| a.abs())
                                .sum();
                            let pm = self.state.metric(l);
                            self.state.set_metric(l, pm + penalty);
                        }
                        self.betas[l].clear();
                        self.betas[l].resize(entry.width, 0);
                    }
                }
                (ListClass::T0, _) => {
                    for &l in &active {
                        let alpha = self.state.view_llrs(l, entry.layer);
                        let beta: Vec<u8> = alpha.iter().map(|&a| hard_decision(a)).collect();
                        self.betas[l] = beta;
                    }
                }
                (ListClass::T1, _) => {
                    activations += 1;
                    self.expand(pos, &active, trace.as_deref_mut())?;
                }
            }
            let now_active: Vec<usize> = self.state.active_paths().collect();
            for &l in &now_active {
                let beta = std::mem::take(&mut self.betas[l]);
                self.state.psum_comp(l, entry.layer, entry.start, &beta);
                self.betas[l] = beta;
            }
            if let Some(tr) = trace.as_deref_mut() {
                tr.metrics.push(
                    now_active
                        .iter()
                        .map(|&l| (l, self.state.metric(l)))
                        .collect(),
                );
            }
        }
        Ok(self.select_output(activations))
    }

    fn expand(
        &mut self,
        pos: usize,
        active: &[usize],
        trace: Option<&mut DecodeTrace>,
    ) -> Result<()> {
        let entry = &self.schedule.entries[pos];
        let codebook = self.codebooks[pos]
            .clone()
            .expect("T1 entries carry a codebook");
        let expansions: Vec<PathExpansion> = active
            .iter()
            .map(|&l| PathExpansion {
                path: l,
                path_metric: self.state.metric(l),
                node_metrics: node_metrics(self.state.view_llrs(l, entry.layer), &codebook),
            })
            .collect();
        let survivors = match self.cfg.selection {
            Selection::Lmld => lmld_expand(&expansions, self.cfg.list_size),
            Selection::Slmld => slmld_expand(&expansions, self.cfg.list_size)?,
        };
        let next_i_s = self.schedule.next_i_s(pos);
        let width = entry.width;

        // Each surviving source keeps its own slot for its first survivor;
        // further survivors are cloned into slots freed by dead paths.
        let list_size = self.cfg.list_size;
        let mut claimed = vec![false; list_size];
        let mut placed: Vec<(usize, Candidate)> = Vec::with_capacity(survivors.len());
        let mut pending = Vec::new();
        for c in &survivors {
            if claimed[c.path] {
                pending.push(*c);
            } else {
                claimed[c.path] = true;
                placed.push((c.path, *c));
            }
        }
        let mut free = (0..list_size).filter(|&s| !claimed[s]);
        for c in pending {
            let slot = free.next().expect("at most L survivors");
            self.state.lazy_copy(c.path, slot, next_i_s);
            placed.push((slot, c));
        }
        for s in 0..list_size {
            self.state.set_active(s, false);
        }
        for &(slot, c) in &placed {
            self.state.set_active(slot, true);
            self.state.set_metric(slot, c.metric);
            self.betas[slot] = mask_to_bits(codebook.word(c.index), width);
        }
        if let Some(tr) = trace {
            tr.activations.push(Activation {
                entry: pos,
                expansions,
                survivors,
            });
        }
        Ok(())
    }

    fn select_output(&self, activations: usize) -> ListOutput {
        let mut paths: Vec<usize> = self.state.active_paths().collect();
        paths.sort_by(|&a, &b| {
            self.state
                .metric(a)
                .total_cmp(&self.state.metric(b))
                .then(a.cmp(&b))
        });
        let final_metrics = paths.iter().map(|&l| self.state.metric(l)).collect();
        let (chosen, crc) = match self.code.crc() {
            None => (paths[0], CrcStatus::Absent),
            Some(_) => match paths
                .iter()
                .find(|&&l| self.code.crc_passes(self.state.u_hat(l)) == Some(true))
            {
                Some(&l) => (l, CrcStatus::Passed),
                None => (paths[0], CrcStatus::Failed),
            },
        };
        let u_hat = self.state.u_hat(chosen).to_vec();
        ListOutput {
            payload: self.code.payload_of(&u_hat),
            codeword: self.state.codeword(chosen),
            u_hat,
            path_metric: self.state.metric(chosen),
            crc,
            t1_activations: activations,
            final_metrics,
        }
    }
}

/// RLLD decoder with thresholds `W_T` and `W_ML`.
#[derive(Debug, Clone)]
pub struct RlldDecoder {
    inner: ListDecoder,
}

impl RlldDecoder {
    pub fn new(
        code: &PolarCode,
        list_size: usize,
        selection: Selection,
        w_t: usize,
        w_ml: usize,
    ) -> Result<Self> {
        Self::with_config(code, w_t, w_ml, ListConfig::rlld(list_size, selection))
    }

    pub fn with_config(code: &PolarCode, w_t: usize, w_ml: usize, cfg: ListConfig) -> Result<Self> {
        let tree = CodeTree::prune_and_label(&build_tree(code), w_t, w_ml)?;
        Ok(Self {
            inner: ListDecoder::new(code.clone(), tree, cfg)?,
        })
    }

    pub fn with_defaults(
        code: &PolarCode,
        list_size: usize,
        selection: Selection,
        w_t: usize,
    ) -> Result<Self> {
        Self::new(code, list_size, selection, w_t, DEFAULT_W_ML)
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<ListOutput> {
        self.inner.decode(llrs)
    }

    pub fn decode_traced(&mut self, llrs: &[f64], trace: &mut DecodeTrace) -> Result<ListOutput> {
        self.inner.decode_traced(llrs, trace)
    }

    pub fn inner(&self) -> &ListDecoder {
        &self.inner
    }
}

pub fn rlld_decode(
    code: &PolarCode,
    llrs: &[f64],
    list_size: usize,
    selection: Selection,
    w_t: usize,
    w_ml: usize,
) -> Result<ListOutput> {
    RlldDecoder::new(code, list_size, selection, w_t, w_ml)?.decode(llrs)
}
