//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream keyed by the run seed
//! and a domain tag, with the stream number set to the copy or replication
//! index. Work can therefore be split across threads in any way without
//! changing a single draw.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a; stable across platforms and compiler versions, unlike `DefaultHasher`.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent stream number `index` within the `domain` of run `seed`.
pub fn stream(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a(domain.as_bytes()).rotate_left(17);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Uniform draw on the open interval `(0, 1)`, on the grid `(k + 1/2) 2^{-53}`.
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Above this many trials the normal approximation replaces exact sampling;
/// its total-variation error is of order `n^{-1/2}` < 1e-8.
pub const NORMAL_APPROX_TRIALS: u64 = 1 << 53;

/// Trial counts up to which Bernoulli draws are counted one by one.
pub const DIRECT_BERNOULLI_TRIALS: u64 = 16;

/// `Binomial(n, p)` draw.
pub fn binomial_u64<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= DIRECT_BERNOULLI_TRIALS {
        // Bernoulli trials against a 64-bit threshold; exact up to 2^-64 in p.
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
        return (0..n).filter(|_| rng.next_u64() < threshold).count() as u64;
    }
    if n > NORMAL_APPROX_TRIALS {
        return normal_binomial(rng, n as f64, p).min(n as f64) as u64;
    }
    Binomial::new(n, p)
        .expect("probability checked above")
        .sample(rng)
}

/// `Binomial(n, p)` draw for trial counts beyond `u64`.
pub fn binomial_u128<R: Rng + ?Sized>(rng: &mut R, n: u128, p: f64) -> u128 {
    if n <= u128::from(NORMAL_APPROX_TRIALS) {
        return u128::from(binomial_u64(rng, n as u64, p));
    }
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    (normal_binomial(rng, n as f64, p).min(n as f64) as u128).min(n)
}

fn normal_binomial<R: Rng + ?Sized>(rng: &mut R, n: f64, p: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    (n * p + z * (n * p * (1.0 - p)).sqrt()).round().max(0.0)
}
