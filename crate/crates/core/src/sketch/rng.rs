//! Gaussian compression matrices from a counter-based stream.
//!
//! The uniform source is ChaCha8 keyed by the 64-bit seed (expanded with the
//! generator's standard `seed_from_u64`), with the 64-bit stream id selecting
//! an independent keystream. ChaCha is a counter-mode cipher, so any block
//! of the stream can be regenerated from `(seed, stream, position)` alone.
//!
//! Each pair of 64-bit words `(w1, w2)` becomes two standard normals by
//! Box–Muller:
//!
//! ```text
//! u1 = ((w1 >> 11) + 1) · 2^-53          ∈ (0, 1]
//! u2 =  (w2 >> 11)      · 2^-53          ∈ [0, 1)
//! z1 = sqrt(-2 ln u1) · cos(2π u2)
//! z2 = sqrt(-2 ln u1) · sin(2π u2)
//! ```
//!
//! Entries fill the matrix in column-major order, `z1` before `z2`.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::DenseMatrix;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Deterministic standard-normal stream.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * INV_2_53;
        let u2 = (self.rng.next_u64() >> 11) as f64 * INV_2_53;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// `rows × cols` matrix of independent standard normals (stream 0).
pub fn giid(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    giid_stream(rows, cols, seed, 0)
}

/// As [`giid`], drawing from an independent stream of the same seed.
pub fn giid_stream(rows: usize, cols: usize, seed: u64, stream: u64) -> DenseMatrix {
    let mut src = NormalStream::new(seed, stream);
    let mut m = DenseMatrix::zeros(rows, cols);
    m.as_mut_slice()
        .iter_mut()
        .for_each(|v| *v = src.next_normal());
    m
}
