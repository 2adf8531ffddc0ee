//! Software model of the selection units used by SLMLD: the 2L→L
//! bitonic-sequence sorter (BBS) and the minimum-two unit.
//!
//! Records are ordered by metric, ties by payload. The functional versions
//! below are plain selections; [`bitonic_network_2l_l`] is the
//! compare-exchange network they model.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRecord<P> {
    pub metric: f64,
    pub payload: P,
}

impl<P> MetricRecord<P> {
    pub fn new(metric: f64, payload: P) -> Self {
        Self { metric, payload }
    }
}

#[inline]
pub fn record_cmp<P: Ord>(a: &MetricRecord<P>, b: &MetricRecord<P>) -> Ordering {
    a.metric
        .total_cmp(&b.metric)
        .then_with(|| a.payload.cmp(&b.payload))
}

/// The `l` smallest of `2l` records, ascending.
pub fn bbs_2l_l<P: Ord + Copy>(records: &[MetricRecord<P>], l: usize) -> Vec<MetricRecord<P>> {
    assert_eq!(records.len(), 2 * l, "BBS takes exactly 2L inputs");
    select_smallest(records, l)
}

/// The two smallest records, ascending.
pub fn min2<P: Ord + Copy>(records: &[MetricRecord<P>]) -> [MetricRecord<P>; 2] {
    assert!(records.len() >= 2, "min2 needs at least two inputs");
    let (mut first, mut second) = if record_cmp(&records[1], &records[0]).is_lt() {
        (records[1], records[0])
    } else {
        (records[0], records[1])
    };
    for r in &records[2..] {
        if record_cmp(r, &first).is_lt() {
            second = first;
            first = *r;
        } else if record_cmp(r, &second).is_lt() {
            second = *r;
        }
    }
    [first, second]
}

/// The `k` smallest records (all of them if fewer), ascending.
pub fn select_smallest<P: Ord + Copy>(
    records: &[MetricRecord<P>],
    k: usize,
) -> Vec<MetricRecord<P>> {
    let mut v = records.to_vec();
    if k < v.len() {
        v.select_nth_unstable_by(k, record_cmp);
        v.truncate(k);
    }
    v.sort_by(record_cmp);
    v
}

/// One compare-exchange layer: `(i, j, ascending)` with `i < j`.
type Layer = Vec<(usize, usize, bool)>;

/// Comparator layers of the 2L→L network: bitonic-sort both halves in
/// opposite directions, half-clean, then bitonic-merge the lower half.
pub fn network_layers(l: usize) -> Vec<Layer> {
    assert!(l.is_power_of_two(), "L must be a power of two");
    let n = 2 * l;
    let mut layers = Vec::new();
    let mut k = 2;
    while k <= l {
        let mut j = k / 2;
        while j >= 1 {
            let layer = (0..n)
                .filter_map(|i| {
                    let p = i ^ j;
                    (p > i).then_some((i, p, i & k == 0))
                })
                .collect();
            layers.push(layer);
            j /= 2;
        }
        k *= 2;
    }
    layers.push((0..l).map(|i| (i, i + l, true)).collect());
    let mut j = l / 2;
    while j >= 1 {
        layers.push(
            (0..l)
                .filter_map(|i| {
                    let p = i ^ j;
                    (p > i).then_some((i, p, true))
                })
                .collect(),
        );
        j /= 2;
    }
    layers
}

/// Number of comparator stages of the 2L→L network.
pub fn network_depth(l: usize) -> usize {
    network_layers(l).len()
}

/// Runs the compare-exchange network; returns the lower `l` outputs.
pub fn bitonic_network_2l_l<P: Ord + Copy>(
    records: &[MetricRecord<P>],
    l: usize,
) -> Vec<MetricRecord<P>> {
    assert_eq!(records.len(), 2 * l, "BBS takes exactly 2L inputs");
    let mut v = records.to_vec();
    for layer in network_layers(l) {
        for (i, j, ascending) in layer {
            let out_of_order = record_cmp(&v[i], &v[j]).is_gt();
            if out_of_order == ascending {
                v.swap(i, j);
            }
        }
    }
    v.truncate(l);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs(metrics: &[f64]) -> Vec<MetricRecord<usize>> {
        metrics
            .iter()
            .enumerate()
            .map(|(i, &m)| MetricRecord::new(m, i))
            .collect()
    }

    fn metrics(r: &[MetricRecord<usize>]) -> Vec<f64> {
        r.iter().map(|r| r.metric).collect()
    }

    #[test]
    fn bbs_examples() {
        let r = recs(&[5.0, 3.0, 8.0, 1.0, 9.0, 2.0, 7.0, 4.0]);
        assert_eq!(metrics(&bbs_2l_l(&r, 4)), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(bitonic_network_2l_l(&r, 4), bbs_2l_l(&r, 4));
        let eq = recs(&[1.0; 8]);
        let out = bbs_2l_l(&eq, 4);
        assert_eq!(
            out.iter().map(|r| r.payload).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(bitonic_network_2l_l(&eq, 4), out);
        let sorted = recs(&[0.5, 1.0, 1.5, 2.0]);
        assert_eq!(bbs_2l_l(&sorted, 2), sorted[..2].to_vec());
    }

    #[test]
    fn min2_examples() {
        let r = recs(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(metrics(&min2(&r)), vec![1.0, 2.0]);
        let r = recs(&[3.0, 2.0]);
        assert_eq!(metrics(&min2(&r)), vec![2.0, 3.0]);
        let r = recs(&[1.0; 5]);
        assert_eq!(min2(&r).map(|r| r.payload), [0, 1]);
    }

    #[test]
    fn network_depths() {
        assert_eq!(network_depth(1), 1);
        assert_eq!(network_depth(2), 3);
        assert_eq!(network_depth(4), 6);
        assert_eq!(network_depth(8), 10);
    }

    #[test]
    #[should_panic]
    fn bbs_rejects_wrong_width() {
        bbs_2l_l(&recs(&[1.0, 2.0, 3.0]), 2);
    }
}
