//! Randomized oracle suites shared by the unit-scale tests and the
//! acceptance run. Each returns the number of cases checked.

use polar_rlld::code::polar_transform;
use polar_rlld::kernels::hard_decision;
use polar_rlld::rlld::{
    lmld_expand, slmld_expand, Candidate, DecodeTrace, ListConfig, ListDecoder, PathExpansion,
    RlldDecoder, Selection,
};
use polar_rlld::scl::{CaSclDecoder, CopyMode};
use polar_rlld::sorter::{bbs_2l_l, bitonic_network_2l_l, MetricRecord};
use polar_rlld::tree::ListClass;
use polar_rlld::PolarCode;
use rand::Rng;

use super::{noisy_frame, random_code, rng};

fn random_metric<R: Rng>(r: &mut R, coarse: bool) -> f64 {
    if coarse {
        r.random_range(0..6) as f64
    } else {
        r.random_range(0.0..10.0)
    }
}

fn sorted(mut v: Vec<(f64, usize)>) -> Vec<(f64, usize)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

/// BBS, the compare-exchange network and the 4L composition against a
/// stable full sort.
pub fn bbs_suite(cases: usize, seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let l = [1usize, 2, 4, 8][case % 4];
        let coarse = r.random_bool(0.5);
        let recs: Vec<MetricRecord<usize>> = (0..4 * l)
            .map(|i| MetricRecord::new(random_metric(&mut r, coarse), i))
            .collect();
        let key =
            |v: &[MetricRecord<usize>]| sorted(v.iter().map(|x| (x.metric, x.payload)).collect());
        let oracle = |v: &[MetricRecord<usize>]| key(v)[..l].to_vec();

        let half = &recs[..2 * l];
        let got = bbs_2l_l(half, l);
        if key(&got) != oracle(half) || got.len() != l {
            return Err(format!("bbs_2l_l L={l} case {case}"));
        }
        if key(&bitonic_network_2l_l(half, l)) != oracle(half) {
            return Err(format!("network L={l} case {case}"));
        }
        let mut stage: Vec<MetricRecord<usize>> = bbs_2l_l(&recs[..2 * l], l);
        stage.extend(bbs_2l_l(&recs[2 * l..], l));
        if key(&bbs_2l_l(&stage, l)) != oracle(&recs) {
            return Err(format!("composition L={l} case {case}"));
        }
    }
    Ok(cases)
}

fn random_expansions<R: Rng>(r: &mut R, list_size: usize, max_info: usize) -> Vec<PathExpansion> {
    let paths = r.random_range(1..=list_size);
    let info = r.random_range(0..=max_info);
    let coarse = r.random_bool(0.3);
    let mut slots: Vec<usize> = (0..list_size).collect();
    for i in (1..slots.len()).rev() {
        slots.swap(i, r.random_range(0..=i));
    }
    slots[..paths]
        .iter()
        .map(|&path| PathExpansion {
            path,
            path_metric: random_metric(r, coarse),
            node_metrics: (0..1 << info).map(|_| random_metric(r, coarse)).collect(),
        })
        .collect()
}

/// All `(metric, path, index)` fully sorted, truncated to `L`.
fn brute_force(paths: &[PathExpansion], list_size: usize) -> Vec<(f64, usize, usize)> {
    let mut all: Vec<(f64, usize, usize)> = paths
        .iter()
        .flat_map(|p| {
            p.node_metrics
                .iter()
                .enumerate()
                .map(move |(j, nm)| (p.path_metric + nm, p.path, j))
        })
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    all.truncate(list_size);
    all
}

fn triples(c: &[Candidate]) -> Vec<(f64, usize, usize)> {
    c.iter().map(|c| (c.metric, c.path, c.index)).collect()
}

pub fn lmld_suite(cases: usize, seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let l = r.random_range(1..=8);
        let paths = random_expansions(&mut r, l, 6);
        if triples(&lmld_expand(&paths, l)) != brute_force(&paths, l) {
            return Err(format!("lmld case {case}: {paths:?}"));
        }
    }
    Ok(cases)
}

pub fn slmld_suite(cases: usize, seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let l = [1usize, 2, 4, 8][r.random_range(0..4)];
        let max_info = (2 * l).trailing_zeros() as usize;
        let paths = random_expansions(&mut r, l, max_info);
        let mut a = triples(&slmld_expand(&paths, l).map_err(|e| e.to_string())?);
        let mut b = triples(&lmld_expand(&paths, l));
        a.sort_by(|x, y| x.1.cmp(&y.1).then(x.2.cmp(&y.2)));
        b.sort_by(|x, y| x.1.cmp(&y.1).then(x.2.cmp(&y.2)));
        if a != b {
            return Err(format!("slmld case {case}: {paths:?}"));
        }
    }
    Ok(cases)
}

fn traced(dec: &mut ListDecoder, llrs: &[f64]) -> (DecodeTrace, Vec<u8>, f64) {
    let mut tr = DecodeTrace::default();
    let out = dec.decode_traced(llrs, &mut tr).expect("decode");
    (tr, out.u_hat, out.path_metric)
}

fn random_list_decoders<R: Rng>(r: &mut R, code: &PolarCode) -> (ListDecoder, ListDecoder) {
    let l = r.random_range(1..=4usize);
    if r.random_bool(0.25) {
        let lazy = CaSclDecoder::with_copy_mode(code, l, CopyMode::Lazy)
            .unwrap()
            .inner_mut()
            .clone();
        let eager = CaSclDecoder::with_copy_mode(code, l, CopyMode::Eager)
            .unwrap()
            .inner_mut()
            .clone();
        return (lazy, eager);
    }
    let l = if l == 3 { 4 } else { l };
    let sel = if r.random_bool(0.5) {
        Selection::Lmld
    } else {
        Selection::Slmld
    };
    let w_t = [0usize, 1, 2, 4, 8, 16, 64][r.random_range(0..7)];
    let w_ml = [0usize, 4, 8, 16][r.random_range(0..4)];
    let mk = |mode| {
        let cfg = ListConfig {
            copy_mode: mode,
            ..ListConfig::rlld(l, sel)
        };
        RlldDecoder::with_config(code, w_t, w_ml, cfg)
            .unwrap()
            .inner()
            .clone()
    };
    (mk(CopyMode::Lazy), mk(CopyMode::Eager))
}

/// Lazy (reference-array) and eager (full copy) decoders in lockstep: every
/// LLR vector read, every expansion and every metric must agree exactly.
pub fn lazy_eager_suite(frames: usize, seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let mut code = random_code(4, 8, &mut r);
    let mut pair = random_list_decoders(&mut r, &code);
    for f in 0..frames {
        if f % 50 == 0 {
            let depth = r.random_range(2..=6);
            let k = r.random_range(1..=1usize << depth);
            code = random_code(depth, k, &mut r);
            pair = random_list_decoders(&mut r, &code);
        }
        let snr = r.random_range(-1.0..3.0);
        let frame = noisy_frame(&code, snr, seed, f as u64);
        let a = traced(&mut pair.0, &frame.llrs);
        let b = traced(&mut pair.1, &frame.llrs);
        if a != b {
            return Err(format!("lazy/eager mismatch at frame {f} on {code:?}"));
        }
    }
    Ok(frames)
}

/// Codebook of a constituent code enumerated directly: information pattern
/// `j` placed MSB first on the unfrozen positions, then transformed.
fn oracle_codebook(local_frozen: &[bool]) -> Vec<Vec<u8>> {
    let info: Vec<usize> = (0..local_frozen.len())
        .filter(|&i| !local_frozen[i])
        .collect();
    (0..1usize << info.len())
        .map(|j| {
            let mut u = vec![0u8; local_frozen.len()];
            for (b, &pos) in info.iter().enumerate() {
                u[pos] = ((j >> (info.len() - 1 - b)) & 1) as u8;
            }
            polar_transform(&mut u);
            u
        })
        .collect()
}

fn oracle_nm(alpha: &[f64], word: &[u8]) -> f64 {
    alpha
        .iter()
        .zip(word)
        .filter(|(&a, &x)| x != hard_decision(a))
        .map(|(a, _)| a.abs())
        .sum()
}

/// At every T₁ activation of random RLLD decodes: node metrics from the
/// directly enumerated codebook, `PM + NM` additivity, survivor count,
/// survivor optimality and (LMLD) the brute-force survivor set.
pub fn activation_suite(min_activations: usize, seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let mut checked = 0;
    let mut f = 0u64;
    while checked < min_activations {
        let depth = r.random_range(3..=8);
        let k = r.random_range(1..=1usize << depth);
        let code = random_code(depth, k, &mut r);
        let l = [1usize, 2, 4, 8][r.random_range(0..4)];
        let sel = if r.random_bool(0.5) {
            Selection::Lmld
        } else {
            Selection::Slmld
        };
        let w_t = [1usize, 2, 4, 8, 16, 64][r.random_range(0..6)];
        let w_ml = [0usize, 4, 8, 16][r.random_range(0..4)];
        let mut dec = RlldDecoder::new(&code, l, sel, w_t, w_ml).unwrap();
        let schedule = dec.inner().schedule().clone();
        for _ in 0..10 {
            f += 1;
            let frame = noisy_frame(&code, r.random_range(-1.0..3.0), seed ^ 0x5eed, f);
            let mut tr = DecodeTrace::default();
            dec.decode_traced(&frame.llrs, &mut tr)
                .map_err(|e| e.to_string())?;
            for act in &tr.activations {
                let e = &schedule.entries[act.entry];
                if e.class != ListClass::T1 {
                    return Err("activation on a T0 entry".into());
                }
                let words = oracle_codebook(&code.frozen_mask()[e.start..e.start + e.width]);
                let mut total = 0;
                for exp in &act.expansions {
                    let alpha = &tr
                        .alphas
                        .iter()
                        .find(|a| a.entry == act.entry && a.path == exp.path)
                        .ok_or("missing alpha")?
                        .alpha;
                    let mut nm_sorted: Vec<f64> = exp.node_metrics.clone();
                    let mut oracle: Vec<f64> = words.iter().map(|w| oracle_nm(alpha, w)).collect();
                    nm_sorted.sort_by(f64::total_cmp);
                    oracle.sort_by(f64::total_cmp);
                    if nm_sorted
                        .iter()
                        .zip(&oracle)
                        .any(|(a, b)| (a - b).abs() > 1e-9)
                    {
                        return Err(format!("node metrics differ at entry {}", act.entry));
                    }
                    total += exp.node_metrics.len();
                }
                if act.survivors.len() != l.min(total) {
                    return Err(format!(
                        "survivor count {} != min({l}, {total})",
                        act.survivors.len()
                    ));
                }
                for s in &act.survivors {
                    let src = act
                        .expansions
                        .iter()
                        .find(|p| p.path == s.path)
                        .ok_or("unknown source")?;
                    if s.node_metric != src.node_metrics[s.index]
                        || s.metric != src.path_metric + s.node_metric
                    {
                        return Err(format!("additivity fails at entry {}", act.entry));
                    }
                    if s.node_metric < 0.0 {
                        return Err("negative node metric".into());
                    }
                }
                if sel == Selection::Lmld {
                    let expect = brute_force(&act.expansions, l);
                    if triples(&act.survivors) != expect {
                        return Err(format!("LMLD survivors differ at entry {}", act.entry));
                    }
                    let worst_kept = act
                        .survivors
                        .iter()
                        .map(|s| s.metric)
                        .fold(f64::MIN, f64::max);
                    let best_dropped = act
                        .expansions
                        .iter()
                        .flat_map(|p| {
                            p.node_metrics
                                .iter()
                                .enumerate()
                                .map(move |(j, nm)| (p.path, j, p.path_metric + nm))
                        })
                        .filter(|(p, j, _)| {
                            !act.survivors.iter().any(|s| s.path == *p && s.index == *j)
                        })
                        .map(|x| x.2)
                        .fold(f64::MAX, f64::min);
                    if worst_kept > best_dropped {
                        return Err("survivor optimality".into());
                    }
                }
                checked += 1;
            }
            for (prev, next) in tr.metrics.iter().zip(tr.metrics.iter().skip(1)) {
                let floor = prev.iter().map(|x| x.1).fold(f64::MAX, f64::min);
                if next.iter().any(|x| x.1 < floor) {
                    return Err("path metric decreased".into());
                }
            }
        }
    }
    Ok(checked)
}
