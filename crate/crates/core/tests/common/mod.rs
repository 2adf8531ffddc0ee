#![allow(dead_code)]

use polar_rlld::sim::{frame_rng, generate_frame, ChannelConfig, Frame};
use polar_rlld::{construct_code, ConstructionMethod, CrcConfig, PolarCode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Code with a uniformly random frozen set.
pub fn random_code<R: Rng>(depth: usize, k: usize, rng: &mut R) -> PolarCode {
    let mut idx: Vec<usize> = (0..1 << depth).collect();
    idx.shuffle(rng);
    let frozen = &idx[..(1 << depth) - k];
    PolarCode::new(depth, k, frozen).unwrap()
}

pub fn ga_code(depth: usize, k: usize) -> PolarCode {
    construct_code(depth, k, ConstructionMethod::GaussianApproximation, 2.0).unwrap()
}

pub fn ga_code_crc(depth: usize, k: usize, crc: CrcConfig) -> PolarCode {
    ga_code(depth, k).with_crc(crc).unwrap()
}

pub fn noisy_frame(code: &PolarCode, ebn0_db: f64, seed: u64, frame: u64) -> Frame {
    let ch = ChannelConfig::new(ebn0_db, code.rate());
    generate_frame(code, &ch, &mut frame_rng(seed, 0, frame), false).unwrap()
}

pub fn bitrev(i: usize, depth: usize) -> usize {
    if depth == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS as usize - depth)
    }
}

/// `x = u · B_N · F^{⊗n}` by the explicit generator matrix: row `i` of the
/// generator is row `bitrev(i)` of the Kronecker power, whose entry `(a, b)`
/// is 1 iff the bits of `b` are a subset of those of `a`.
pub fn matrix_encode(u: &[u8]) -> Vec<u8> {
    let n = u.len();
    let depth = n.trailing_zeros() as usize;
    let mut x = vec![0u8; n];
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0 {
            continue;
        }
        let a = bitrev(i, depth);
        for (b, xb) in x.iter_mut().enumerate() {
            if b & !a == 0 {
                *xb ^= 1;
            }
        }
    }
    x
}

pub mod oracles;
