//! Sobol' sequences (Joe–Kuo direction numbers) with optional Owen scrambling.

use crate::error::{Error, Result};
use crate::shots::derive_seed;

const BITS: usize = 32;

/// `(s, a, m_1..m_s)` for dimensions 2 and up.
const DIRECTIONS: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

pub const MAX_DIM: usize = DIRECTIONS.len() + 1;

fn direction_vectors(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, x) in v.iter_mut().enumerate() {
            *x = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[dim - 1];
    let s = s as usize;
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Gray-code Sobol' generator over `[0, 1)^dim`.
#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
    scramble: Option<u64>,
}

impl Sobol {
    /// `scramble = Some(seed)` applies Owen nested scrambling.
    pub fn new(dim: usize, scramble: Option<u64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "Sobol' dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        Ok(Sobol {
            directions: (0..dim).map(direction_vectors).collect(),
            state: vec![0; dim],
            index: 0,
            scramble,
        })
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// Next point. Panics after `2^32` points.
    pub fn next_point(&mut self) -> Vec<f64> {
        assert!(self.index < 1 << BITS, "Sobol' sequence exhausted");
        if self.index > 0 {
            let c = (self.index - 1).trailing_ones() as usize;
            for (x, v) in self.state.iter_mut().zip(&self.directions) {
                *x ^= v[c];
            }
        }
        self.index += 1;
        self.state
            .iter()
            .enumerate()
            .map(|(d, &x)| match self.scramble {
                None => x as f64 / (1u64 << BITS) as f64,
                Some(seed) => owen(x, seed, d as u64),
            })
            .collect()
    }
}

/// Flips bit `k` (from the top) by a hash of the seed, dimension, `k` and
/// the higher bits, then fills bits below 2^-32 with a hash of the result.
fn owen(x: u32, seed: u64, dim: u64) -> f64 {
    let base = derive_seed(seed, dim);
    let mut out = 0u32;
    for k in 0..BITS {
        let prefix = if k == 0 { 0 } else { (x >> (BITS - k)) as u64 };
        let h = derive_seed(derive_seed(base, k as u64), prefix);
        let bit = ((x >> (BITS - 1 - k)) & 1) ^ (h & 1) as u32;
        out |= bit << (BITS - 1 - k);
    }
    let low = derive_seed(base ^ 0x5bd1_e995, out as u64) >> (64 - 21);
    ((out as u64) << 21 | low) as f64 / (1u64 << 53) as f64
}
