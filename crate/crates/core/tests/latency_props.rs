mod common;

use common::{ga_code, random_code, rng};
use polar_rlld::latency::{baseline_cycles, llr_cycles, rlld_cycles, ArchParams, CycleReport};
use polar_rlld::tree::NodeKind;
use polar_rlld::{build_tree, CodeTree};
use rand::Rng;

#[test]
fn published_arithmetic() {
    assert_eq!(baseline_cycles(8192, 4096, 128).unwrap(), 20736);
    assert_eq!(baseline_cycles(1024, 512, 64).unwrap(), 2592);
    assert_eq!(baseline_cycles(1024, 0, 64).unwrap(), 2048 + 16 * 2);
    let r = CycleReport::from_counts(8192, 4096, 1207, 441, &ArchParams::default()).unwrap();
    assert_eq!(r.pruning_cycles, 1764);
    assert_eq!(r.rlld_cycles, 2971);
    assert!((r.cycle_ratio - 6.98).abs() < 0.01);
    assert!((r.latency_ratio - 6.77).abs() < 0.01);
    assert!(baseline_cycles(256, 128, 128).is_err());
}

/// Independent recount: walk the targets, charge `ceil(2^(n-t)/P)` for every
/// layer from `max(I_s, 1)` down to the node (one less for rate-0 nodes).
fn recount(tree: &CodeTree, p: usize) -> (u64, u64) {
    let n = tree.depth();
    let mut n_l = 0u64;
    let mut n_a = 0u64;
    for &t in tree.targets() {
        let node = tree.node(t);
        let i_s = if node.start == 0 {
            0
        } else {
            n - node.start.trailing_zeros() as usize
        };
        let last = if node.kind == NodeKind::Rate0 {
            node.layer as isize - 1
        } else {
            node.layer as isize
        };
        let mut layer = i_s.max(1) as isize;
        while layer <= last {
            n_l += (1u64 << (n as isize - layer)).div_ceil(p as u64);
            layer += 1;
        }
        n_a += (node.class == Some(polar_rlld::tree::ListClass::T1)) as u64;
    }
    (n_l, n_a)
}

#[test]
fn counts_match_independent_recount() {
    let mut r = rng(30);
    for _ in 0..200 {
        let depth = r.random_range(2..=11);
        let k = r.random_range(1..=1usize << depth);
        let code = random_code(depth, k, &mut r);
        let w_t = [0usize, 8, 16, 32][r.random_range(0..4)];
        let w_ml = [0usize, 8, 16][r.random_range(0..3)];
        let tree = CodeTree::prune_and_label(&build_tree(&code), w_t, w_ml).unwrap();
        let p = [1usize, 4, 16, 128][r.random_range(0..4)];
        let (n_l, n_a) = recount(&tree, p);
        assert_eq!(llr_cycles(&tree.schedule(), p), n_l);
        assert_eq!(tree.schedule().t1_count() as u64, n_a);
    }
}

#[test]
fn rlld_beats_baseline_at_practical_sizes() {
    for depth in 10..=13 {
        for rate in [0.25, 0.5, 0.75] {
            let k = ((1usize << depth) as f64 * rate) as usize;
            let code = ga_code(depth, k);
            let full = build_tree(&code);
            for w_t in [8, 16, 32, 64] {
                for w_ml in [0, 8, 16] {
                    let tree = CodeTree::prune_and_label(&full, w_t, w_ml).unwrap();
                    let params = ArchParams {
                        processing_units: 64,
                        ..ArchParams::default()
                    };
                    let rep = rlld_cycles(&tree, &params).unwrap();
                    assert_eq!(rep.rlld_cycles, rep.llr_cycles + rep.pruning_cycles);
                    assert_eq!(rep.pruning_cycles, rep.t1_activations * rep.pipeline_stages);
                    assert!(
                        rep.rlld_cycles < rep.baseline_cycles,
                        "N={} K={k} W_T={w_t}",
                        1 << depth
                    );
                }
            }
        }
    }
}

#[test]
fn no_t1_nodes_means_no_pruning_cycles() {
    let code = ga_code(10, 512);
    let tree = CodeTree::prune_and_label(&build_tree(&code), 0, 0).unwrap();
    let rep = rlld_cycles(
        &tree,
        &ArchParams {
            processing_units: 64,
            ..ArchParams::default()
        },
    )
    .unwrap();
    assert_eq!(rep.t1_activations, 0);
    assert_eq!(rep.pruning_cycles, 0);
}

#[test]
fn report_is_deterministic() {
    let code = ga_code(13, 4096);
    let tree = CodeTree::prune_and_label(&build_tree(&code), 32, 16).unwrap();
    let a = rlld_cycles(&tree, &ArchParams::default()).unwrap();
    let b = rlld_cycles(&tree.clone(), &ArchParams::default()).unwrap();
    assert_eq!(a, b);
    let text = a.to_text();
    assert!(text.lines().any(|l| l.starts_with("N_R")));
}
