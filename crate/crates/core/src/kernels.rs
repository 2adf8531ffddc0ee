//! Elementary LLR and partial-sum operations shared by every decoder.

/// Min-sum check-node update: `sign(a)·sign(b)·min(|a|, |b|)`, with
/// `sign(0) = +1`.
#[inline]
pub fn f_min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Variable-node update given the left partial sum `beta`.
#[inline]
pub fn g_update(a: f64, b: f64, beta: u8) -> f64 {
    if beta == 0 {
        b + a
    } else {
        b - a
    }
}

/// Threshold detection: 0 for `llr >= 0`, 1 otherwise.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// `(β[2i], β[2i+1]) = (βl[i] ⊕ βr[i], βr[i])`.
pub fn combine(left: &[u8], right: &[u8]) -> Vec<u8> {
    assert_eq!(left.len(), right.len());
    left.iter()
        .zip(right)
        .flat_map(|(&l, &r)| [l ^ r, r])
        .collect()
}
