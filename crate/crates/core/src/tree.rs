//! Code tree: node classification, pruning, rate-1 splitting and the
//! depth-first decoding schedule shared by the tree-based decoders and the
//! latency model.
//!
//! Layer `t` nodes cover `2^(n-t)` consecutive leaves; the root is layer 0 and
//! the leaves are layer `n`.

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::code::PolarCode;
use crate::error::{PolarError, Result};

/// Largest information count a list-ML (or ML) node may carry.
pub const MAX_NODE_INFO: usize = 8;
/// Width of the rate-1 pieces produced by splitting.
pub const SPLIT_WIDTH: usize = 8;
/// Default maximum width of an ML node.
pub const DEFAULT_W_ML: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    Rate0,
    Rate1,
    Ml,
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ListClass {
    /// Decoded instantly, no path expansion.
    T0,
    /// Expanded by list-ML decoding.
    T1,
}

/// The complete (unpruned) tree of a code, stored as per-leaf prefix counts.
#[derive(Debug, Clone)]
pub struct FullTree {
    depth: usize,
    info_prefix: Vec<usize>,
    frozen: Vec<bool>,
}

impl FullTree {
    pub fn build(code: &PolarCode) -> Self {
        let mut info_prefix = Vec::with_capacity(code.len() + 1);
        info_prefix.push(0);
        let mut acc = 0;
        for &f in code.frozen_mask() {
            acc += (!f) as usize;
            info_prefix.push(acc);
        }
        Self {
            depth: code.depth(),
            info_prefix,
            frozen: code.frozen_mask().to_vec(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    pub fn node_count(&self) -> usize {
        2 * self.len() - 1
    }

    pub fn info_in(&self, start: usize, width: usize) -> usize {
        self.info_prefix[start + width] - self.info_prefix[start]
    }

    /// Rate classification of the node with in-layer index `index`.
    pub fn kind(&self, layer: usize, index: usize) -> NodeKind {
        let width = 1usize << (self.depth - layer);
        match self.info_in(index * width, width) {
            0 => NodeKind::Rate0,
            i if i == width => NodeKind::Rate1,
            _ => NodeKind::Arbitrary,
        }
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }
}

pub fn build_tree(code: &PolarCode) -> FullTree {
    FullTree::build(code)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub layer: usize,
    /// Leftmost leaf index (IDX₀).
    pub start: usize,
    pub width: usize,
    pub info_count: usize,
    pub kind: NodeKind,
    pub class: Option<ListClass>,
    pub children: Option<[usize; 2]>,
    /// Created by splitting a rate-1 node.
    pub generated: bool,
}

impl TreeNode {
    /// Rightmost leaf index (IDX₁).
    pub fn end(&self) -> usize {
        self.start + self.width - 1
    }

    pub fn index_in_layer(&self) -> usize {
        self.start / self.width
    }

    pub fn is_right_child(&self) -> bool {
        self.layer > 0 && self.index_in_layer() % 2 == 1
    }

    pub fn is_target(&self) -> bool {
        self.children.is_none()
    }

    /// `(I_s, I_e)` for a tree of the given depth.
    pub fn boundary_layers(&self, depth: usize) -> (usize, usize) {
        boundary_layers(depth, self.layer, self.start)
    }
}

/// `I_s`: the layer of the right-child ancestor whose leftmost leaf is
/// `start` (0 when `start == 0`). `I_e`: the layer where upward partial-sum
/// propagation stops, found by climbing while the current node is a right
/// child.
pub fn boundary_layers(depth: usize, layer: usize, start: usize) -> (usize, usize) {
    let i_s = if start == 0 {
        0
    } else {
        depth - start.trailing_zeros() as usize
    };
    let index = start >> (depth - layer);
    let i_e = layer - (index.trailing_ones() as usize).min(layer);
    (i_s, i_e)
}

/// Replaces a rate-1 node wider than [`SPLIT_WIDTH`] by its binary subtree
/// down to width-8 rate-1 leaves. Interior nodes of the result are arbitrary.
/// Nodes are returned in preorder; child links index into the returned vector.
pub fn split_rate1(node: &TreeNode) -> Result<Vec<TreeNode>> {
    if node.kind != NodeKind::Rate1 {
        return Err(PolarError::Threshold(format!(
            "cannot split a {:?} node",
            node.kind
        )));
    }
    let mut out = Vec::new();
    if node.width <= SPLIT_WIDTH {
        let mut n = node.clone();
        n.children = None;
        out.push(n);
        return Ok(out);
    }
    fn rec(out: &mut Vec<TreeNode>, layer: usize, start: usize, width: usize) -> usize {
        let idx = out.len();
        if width == SPLIT_WIDTH {
            out.push(TreeNode {
                layer,
                start,
                width,
                info_count: width,
                kind: NodeKind::Rate1,
                class: Some(ListClass::T1),
                children: None,
                generated: true,
            });
            return idx;
        }
        out.push(TreeNode {
            layer,
            start,
            width,
            info_count: width,
            kind: NodeKind::Arbitrary,
            class: None,
            children: None,
            generated: true,
        });
        let l = rec(out, layer + 1, start, width / 2);
        let r = rec(out, layer + 1, start + width / 2, width / 2);
        out[idx].children = Some([l, r]);
        idx
    }
    rec(&mut out, node.layer, node.start, node.width);
    out[0].generated = node.generated;
    Ok(out)
}

/// Labeled, pruned code tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTree {
    depth: usize,
    nodes: Vec<TreeNode>,
    targets: Vec<usize>,
    frozen: Vec<bool>,
    w_t: usize,
    w_ml: usize,
}

impl CodeTree {
    /// Keeps maximal rate-0/rate-1 nodes and the highest arbitrary nodes with
    /// `W_v <= w_ml` and `I_v <= 8` as ML nodes, splits rate-1 nodes that
    /// would be T₁ but are wider than 8, and assigns T₀/T₁.
    pub fn prune_and_label(full: &FullTree, w_t: usize, w_ml: usize) -> Result<Self> {
        if w_ml > 32 {
            return Err(PolarError::Threshold(format!("W_ML = {w_ml} exceeds 32")));
        }
        let mut tree = Self::empty(full, w_t, w_ml);
        tree.label(full, 0, 0, false);
        tree.collect_targets();
        Ok(tree)
    }

    /// SSC tree: rate-0/rate-1 pruning only, all rate-1 nodes hard-decided.
    pub fn ssc(full: &FullTree) -> Self {
        Self::prune_and_label(full, 0, 0).expect("thresholds in range")
    }

    /// Unpruned tree: every leaf is a target. Frozen leaves are T₀ rate-0,
    /// information leaves T₁ rate-1 of width 1.
    pub fn unpruned(full: &FullTree) -> Self {
        let mut tree = Self::empty(full, 1, 0);
        tree.label(full, 0, 0, true);
        tree.collect_targets();
        tree
    }

    fn empty(full: &FullTree, w_t: usize, w_ml: usize) -> Self {
        Self {
            depth: full.depth(),
            nodes: Vec::with_capacity(full.node_count()),
            targets: Vec::new(),
            frozen: full.frozen_mask().to_vec(),
            w_t,
            w_ml,
        }
    }

    fn label(&mut self, full: &FullTree, layer: usize, start: usize, unpruned: bool) -> usize {
        let width = 1usize << (self.depth - layer);
        let info = full.info_in(start, width);
        let kind = match info {
            0 => NodeKind::Rate0,
            i if i == width => NodeKind::Rate1,
            _ => NodeKind::Arbitrary,
        };
        let node = TreeNode {
            layer,
            start,
            width,
            info_count: info,
            kind,
            class: None,
            children: None,
            generated: false,
        };
        let idx = self.nodes.len();
        if unpruned {
            if width == 1 {
                let class = if info == 0 {
                    ListClass::T0
                } else {
                    ListClass::T1
                };
                self.nodes.push(TreeNode {
                    class: Some(class),
                    ..node
                });
                return idx;
            }
        } else {
            match kind {
                NodeKind::Rate0 => {
                    self.nodes.push(TreeNode {
                        class: Some(ListClass::T0),
                        ..node
                    });
                    return idx;
                }
                NodeKind::Rate1 if info > self.w_t => {
                    self.nodes.push(TreeNode {
                        class: Some(ListClass::T0),
                        ..node
                    });
                    return idx;
                }
                NodeKind::Rate1 => {
                    let sub = split_rate1(&TreeNode {
                        class: Some(ListClass::T1),
                        ..node
                    })
                    .expect("rate-1 node");
                    let base = self.nodes.len();
                    self.nodes.extend(sub.into_iter().map(|mut n| {
                        if let Some([l, r]) = n.children {
                            n.children = Some([l + base, r + base]);
                        }
                        n
                    }));
                    return idx;
                }
                NodeKind::Arbitrary if width <= self.w_ml && info <= MAX_NODE_INFO => {
                    self.nodes.push(TreeNode {
                        kind: NodeKind::Ml,
                        class: Some(ListClass::T1),
                        ..node
                    });
                    return idx;
                }
                _ => {}
            }
        }
        self.nodes.push(node);
        let l = self.label(full, layer + 1, start, unpruned);
        let r = self.label(full, layer + 1, start + width / 2, unpruned);
        self.nodes[idx].children = Some([l, r]);
        idx
    }

    fn collect_targets(&mut self) {
        // Preorder arena: leaves appear left to right.
        self.targets = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_target())
            .collect();
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        1 << self.depth
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn w_t(&self) -> usize {
        self.w_t
    }

    pub fn w_ml(&self) -> usize {
        self.w_ml
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &TreeNode {
        &self.nodes[idx]
    }

    /// Target node indices (pruned-tree leaves) in decoding order.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    /// Frozen pattern of a node's leaves as a bitmask (bit k = leaf start+k).
    pub fn local_frozen(&self, node: &TreeNode) -> Vec<bool> {
        self.frozen[node.start..node.start + node.width].to_vec()
    }

    /// Decoding schedule in which rate-0 targets receive no LLR vector.
    pub fn schedule(&self) -> Schedule {
        Schedule::build(self, false)
    }

    /// Schedule that also computes the LLR vectors of rate-0 targets (needed
    /// when frozen bits contribute to a path metric).
    pub fn schedule_with_rate0_llrs(&self) -> Schedule {
        Schedule::build(self, true)
    }

    pub fn count_class(&self, class: ListClass) -> usize {
        self.targets
            .iter()
            .filter(|&&i| self.nodes[i].class == Some(class))
            .count()
    }

    /// Indented text rendering of the pruned tree.
    pub fn dump_text(&self) -> String {
        let mut s = String::new();
        self.dump_rec(0, 0, &mut s);
        s
    }

    fn dump_rec(&self, idx: usize, indent: usize, s: &mut String) {
        let n = &self.nodes[idx];
        let class = match n.class {
            Some(ListClass::T0) => " T0",
            Some(ListClass::T1) => " T1",
            None => "",
        };
        let _ = writeln!(
            s,
            "{:indent$}{:?}{} t={} [{}..{}] W={} I={}{}",
            "",
            n.kind,
            class,
            n.layer,
            n.start,
            n.end(),
            n.width,
            n.info_count,
            if n.generated { " (split)" } else { "" },
            indent = indent * 2
        );
        if let Some([l, r]) = n.children {
            self.dump_rec(l, indent + 1, s);
            self.dump_rec(r, indent + 1, s);
        }
    }

    /// Graphviz rendering of the pruned tree.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph code_tree {\n  node [style=filled];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let (fill, font) = match n.kind {
                NodeKind::Rate0 => ("white", "black"),
                NodeKind::Rate1 => ("black", "white"),
                NodeKind::Ml => ("gray40", "white"),
                NodeKind::Arbitrary => ("gray80", "black"),
            };
            let class = match n.class {
                Some(ListClass::T0) => "\\nT0",
                Some(ListClass::T1) => "\\nT1",
                None => "",
            };
            let _ = writeln!(
                s,
                "  n{i} [label=\"{:?}{class}\\n[{}..{}]\", fillcolor={fill}, fontcolor={font}];",
                n.kind,
                n.start,
                n.end()
            );
            if let Some([l, r]) = n.children {
                let _ = writeln!(s, "  n{i} -> n{l};\n  n{i} -> n{r};");
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Action {
    /// Write LLR layers `from..=to` for the path(s) (g at `I_s`, f below).
    ComputeLlr {
        node: usize,
        from: usize,
        to: usize,
    },
    DecodeT0 {
        node: usize,
    },
    DecodeT1 {
        node: usize,
    },
    /// Store the constituent code and propagate partial sums up to `to`.
    PartialSumUp {
        node: usize,
        to: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduledNode {
    pub node: usize,
    pub layer: usize,
    pub start: usize,
    pub width: usize,
    pub info_count: usize,
    pub kind: NodeKind,
    pub class: ListClass,
    pub i_s: usize,
    pub i_e: usize,
    /// LLR layers written before decoding this node; `None` when the node
    /// needs nothing beyond what is already stored.
    pub llr_layers: Option<(usize, usize)>,
    pub is_right_child: bool,
}

/// Linearized depth-first traversal of a [`CodeTree`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub depth: usize,
    pub entries: Vec<ScheduledNode>,
}

impl Schedule {
    fn build(tree: &CodeTree, rate0_llrs: bool) -> Self {
        let depth = tree.depth();
        let entries = tree
            .targets()
            .iter()
            .map(|&idx| {
                let n = tree.node(idx);
                let (i_s, i_e) = n.boundary_layers(depth);
                let from = i_s.max(1);
                let to = if n.kind == NodeKind::Rate0 && !rate0_llrs {
                    n.layer as isize - 1
                } else {
                    n.layer as isize
                };
                let llr_layers = (from as isize <= to).then_some((from, to as usize));
                ScheduledNode {
                    node: idx,
                    layer: n.layer,
                    start: n.start,
                    width: n.width,
                    info_count: n.info_count,
                    kind: n.kind,
                    class: n.class.expect("targets are classified"),
                    i_s,
                    i_e,
                    llr_layers,
                    is_right_child: n.is_right_child(),
                }
            })
            .collect();
        Self { depth, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `I_s` of the entry after `pos` (used when cloning paths), or `depth`
    /// if `pos` is the last one.
    pub fn next_i_s(&self, pos: usize) -> usize {
        self.entries.get(pos + 1).map_or(self.depth, |e| e.i_s)
    }

    pub fn t1_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.class == ListClass::T1)
            .count()
    }

    pub fn actions(&self) -> Vec<Action> {
        let mut out = Vec::with_capacity(3 * self.entries.len());
        for e in &self.entries {
            if let Some((from, to)) = e.llr_layers {
                out.push(Action::ComputeLlr {
                    node: e.node,
                    from,
                    to,
                });
            }
            out.push(match e.class {
                ListClass::T0 => Action::DecodeT0 { node: e.node },
                ListClass::T1 => Action::DecodeT1 { node: e.node },
            });
            out.push(Action::PartialSumUp {
                node: e.node,
                to: e.i_e,
            });
        }
        out
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{:?} {:?} t={} [{}..{}] I_s={} I_e={} llr={:?}",
                e.class,
                e.kind,
                e.layer,
                e.start,
                e.start + e.width - 1,
                e.i_s,
                e.i_e,
                e.llr_layers
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(depth: usize, frozen: &[usize]) -> PolarCode {
        PolarCode::new(depth, (1 << depth) - frozen.len(), frozen).unwrap()
    }

    #[test]
    fn full_tree_of_the_8_3_example() {
        let full = build_tree(&code(3, &[0, 1, 2, 3, 4]));
        assert_eq!(full.node_count(), 15);
        assert_eq!(full.kind(1, 0), NodeKind::Rate0);
        assert_eq!(full.kind(2, 3), NodeKind::Rate1);
        assert_eq!(full.kind(2, 2), NodeKind::Arbitrary);
        assert_eq!(full.kind(0, 0), NodeKind::Arbitrary);
        for i in 0..8 {
            let expect = if i < 5 {
                NodeKind::Rate0
            } else {
                NodeKind::Rate1
            };
            assert_eq!(full.kind(3, i), expect);
        }
    }

    #[test]
    fn degenerate_roots() {
        let all_frozen = build_tree(&code(3, &(0..8).collect::<Vec<_>>()));
        assert_eq!(all_frozen.kind(0, 0), NodeKind::Rate0);
        let none_frozen = build_tree(&code(3, &[]));
        assert_eq!(none_frozen.kind(0, 0), NodeKind::Rate1);
    }

    #[test]
    fn boundary_layer_examples() {
        assert_eq!(boundary_layers(3, 3, 0).0, 0);
        assert_eq!(boundary_layers(3, 3, 4).0, 1);
        assert_eq!(boundary_layers(3, 3, 6).0, 2);
        // node over leaves {6,7}: layer 2, in-layer index 3
        assert_eq!(boundary_layers(3, 2, 6), (2, 0));
        // left child never ascends
        assert_eq!(boundary_layers(3, 2, 4), (1, 2));
    }

    #[test]
    fn boundary_layers_match_algorithm_trace() {
        // literal loop: start at n, decrement per trailing zero bit
        for depth in 1..=8 {
            for start in 1..(1usize << depth) {
                let mut i_s = depth;
                for j in 0..depth {
                    if (start >> j) & 1 == 0 {
                        i_s -= 1;
                    } else {
                        break;
                    }
                }
                let layer = depth - start.trailing_zeros() as usize;
                assert_eq!(boundary_layers(depth, layer, start).0, i_s);
                assert_eq!(boundary_layers(depth, depth, start).0, i_s);
            }
        }
    }

    #[test]
    fn split_examples() {
        let mk = |width: usize| TreeNode {
            layer: 0,
            start: 0,
            width,
            info_count: width,
            kind: NodeKind::Rate1,
            class: Some(ListClass::T1),
            children: None,
            generated: false,
        };
        let sub = split_rate1(&mk(32)).unwrap();
        assert_eq!(sub.iter().filter(|n| n.kind == NodeKind::Rate1).count(), 4);
        assert_eq!(
            sub.iter().filter(|n| n.kind == NodeKind::Arbitrary).count(),
            3
        );
        assert!(sub
            .iter()
            .filter(|n| n.kind == NodeKind::Rate1)
            .all(|n| n.width == 8));
        let sub = split_rate1(&mk(16)).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(split_rate1(&mk(8)).unwrap(), vec![mk(8)]);
        let mut r0 = mk(16);
        r0.kind = NodeKind::Rate0;
        assert!(split_rate1(&r0).is_err());
    }

    #[test]
    fn labels_and_classes() {
        // leaves 0..8 frozen, 8..16 info, then info-dense tail
        let frozen: Vec<usize> = (0..8).chain([16, 17, 18, 20]).collect();
        let c = code(5, &frozen);
        let full = build_tree(&c);
        let tree = CodeTree::prune_and_label(&full, 8, 8).unwrap();
        let targets: Vec<&TreeNode> = tree.targets().iter().map(|&i| tree.node(i)).collect();
        assert_eq!(targets[0].kind, NodeKind::Rate0);
        assert_eq!(targets[0].class, Some(ListClass::T0));
        assert_eq!((targets[1].kind, targets[1].width), (NodeKind::Rate1, 8));
        assert_eq!(targets[1].class, Some(ListClass::T1));
        // leaves 16..32: W=16 > W_ML, so recurse: [16..24) has I=4 -> ML
        assert_eq!(
            (targets[2].kind, targets[2].start, targets[2].width),
            (NodeKind::Ml, 16, 8)
        );
        assert_eq!(targets[3].kind, NodeKind::Rate1);
        let tree = CodeTree::prune_and_label(&full, 4, 8).unwrap();
        assert_eq!(tree.node(tree.targets()[1]).class, Some(ListClass::T0));
    }

    #[test]
    fn wide_rate1_gets_split() {
        let c = code(6, &(0..32).collect::<Vec<_>>());
        let full = build_tree(&c);
        let tree = CodeTree::prune_and_label(&full, 32, 16).unwrap();
        let t1: Vec<_> = tree
            .targets()
            .iter()
            .map(|&i| tree.node(i))
            .filter(|n| n.class == Some(ListClass::T1))
            .collect();
        assert_eq!(t1.len(), 4);
        assert!(t1.iter().all(|n| n.width == 8 && n.generated));
        let tree = CodeTree::prune_and_label(&full, 31, 16).unwrap();
        assert_eq!(tree.count_class(ListClass::T1), 0);
    }

    #[test]
    fn rate0_schedules_no_own_llr() {
        let c = code(3, &[0, 1, 2, 3, 4]);
        let tree = CodeTree::prune_and_label(&build_tree(&c), 8, 0).unwrap();
        let s = tree.schedule();
        let first = &s.entries[0];
        assert_eq!(first.kind, NodeKind::Rate0);
        assert_eq!(first.llr_layers, None);
        // leaves 4 (frozen) and 5 (info): rate-0 leaf 4 gets layers 1..=2 only
        let leaf4 = s.entries.iter().find(|e| e.start == 4).unwrap();
        assert_eq!(leaf4.llr_layers, Some((1, 2)));
        let s = tree.schedule_with_rate0_llrs();
        let leaf4 = s.entries.iter().find(|e| e.start == 4).unwrap();
        assert_eq!(leaf4.llr_layers, Some((1, 3)));
    }

    #[test]
    fn dumps_render() {
        let c = code(3, &[0, 1, 2, 3, 4]);
        let tree = CodeTree::prune_and_label(&build_tree(&c), 8, 0).unwrap();
        assert!(tree.dump_text().starts_with("Arbitrary t=0 [0..7]"));
        assert!(tree.to_dot().contains("digraph"));
    }
}
