//! Named, reproducible randomness.
//!
//! Every source of randomness in the toolkit is a [`SeedStream`]: a ChaCha
//! generator keyed by a base seed, a role name, and a stream index. Distinct
//! roles never share a stream, so Monte Carlo aggregates are independent of
//! evaluation order, and a fixed `(seed, role, index)` triple always replays
//! the same sequence.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix, DensityMatrix, StateVector};

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seeded random stream dedicated to one named role.
pub struct SeedStream {
    rng: ChaCha12Rng,
}

impl SeedStream {
    pub fn new(seed: u64, role: &str) -> Self {
        Self::derive(seed, role, 0)
    }

    /// Sub-stream `index` of a role, e.g. one per Monte Carlo batch.
    pub fn derive(seed: u64, role: &str, index: u64) -> Self {
        let role_hash = fnv1a(role.as_bytes());
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&role_hash.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        let mix = fnv1a(&key[0..24]);
        key[24..32].copy_from_slice(&mix.to_le_bytes());
        Self {
            rng: ChaCha12Rng::from_seed(key),
        }
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn usize_below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Samples an index from an explicit probability vector.
    pub fn sample_index(&mut self, probabilities: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, &p) in probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probabilities.len() - 1
    }

    /// Chooses `count` distinct indices out of `0..n` (partial Fisher-Yates).
    pub fn choose_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.usize_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}

pub fn random_complex(stream: &mut SeedStream) -> Complex64 {
    Complex64::new(stream.standard_normal(), stream.standard_normal())
}

/// Haar-ish random pure state (normalized complex Gaussian vector).
pub fn random_state_vector(dim: usize, stream: &mut SeedStream) -> StateVector {
    let amps: Vec<Complex64> = (0..dim).map(|_| random_complex(stream)).collect();
    StateVector::normalized(amps).expect("gaussian vector normalizes")
}

/// Random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(dim: usize, stream: &mut SeedStream) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| random_complex(stream)).collect())
        .collect();
    for j in 0..dim {
        // two orthogonalization passes for numerical stability
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[k]
                    .iter()
                    .zip(&cols[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = cols[k].clone();
                for (entry, base) in cols[j].iter_mut().zip(&prev) {
                    *entry -= proj * base;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random rank-limited density matrix `A A† / Tr(A A†)`.
pub fn random_density(dim: usize, rank: usize, stream: &mut SeedStream) -> DensityMatrix {
    let a = ComplexMatrix::from_fn(dim, rank.max(1).min(dim), |_, _| random_complex(stream));
    let raw = a.mul(&a.adjoint());
    let tr = raw.trace().re;
    DensityMatrix::new(raw.scale(Complex64::new(1.0 / tr, 0.0)).hermitized())
        .expect("normalized gram matrix is a state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_replay_deterministically() {
        let mut a = SeedStream::new(42, "role");
        let mut b = SeedStream::new(42, "role");
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn roles_are_independent() {
        let mut a = SeedStream::new(42, "alice");
        let mut b = SeedStream::new(42, "bob");
        let same = (0..32).filter(|_| a.uniform() == b.uniform()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut stream = SeedStream::new(1, "unitary");
        for dim in [2, 4, 8] {
            let u = random_unitary(dim, &mut stream);
            assert!(u.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn choose_indices_distinct_and_in_range() {
        let mut stream = SeedStream::new(5, "choose");
        let picked = stream.choose_indices(100, 10);
        assert_eq!(picked.len(), 10);
        let mut sorted = picked.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        assert!(picked.iter().all(|&i| i < 100));
    }

    #[test]
    fn sample_index_respects_distribution() {
        let mut stream = SeedStream::new(9, "sample");
        let probs = [0.25, 0.5, 0.25];
        let mut counts = [0usize; 3];
        let n = 40_000;
        for _ in 0..n {
            counts[stream.sample_index(&probs)] += 1;
        }
        for (i, &p) in probs.iter().enumerate() {
            let freq = counts[i] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 5.0 * sigma, "outcome {i}: {freq} vs {p}");
        }
    }
}
