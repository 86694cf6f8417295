//! Seeded random sources.
//!
//! Every random object in the crate is generated from a `u64` seed through a
//! ChaCha8 stream. Per-trial seeds are derived with [`derive_seed`], a
//! SplitMix64 finalizer applied to `seed ^ golden·(index+1)`, so results do not
//! depend on how trials are scheduled.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{householder_qr, Matrix};
use crate::scalar::Real;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent stream below `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)))
}

pub fn gaussian<T: Real>(rng: &mut (impl Rng + ?Sized)) -> T {
    let g: f64 = StandardNormal.sample(rng);
    T::of(g)
}

/// Complex standard Gaussian: independent real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<T: Real>(rng: &mut (impl Rng + ?Sized)) -> Complex<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::of(re * s), T::of(im * s))
}

pub fn complex_gaussian_vector<T: Real>(n: usize, rng: &mut (impl Rng + ?Sized)) -> Vec<Complex<T>> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn complex_gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut (impl Rng + ?Sized)) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Real matrix with i.i.d. `N(0,1)` entries.
pub fn real_gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut (impl Rng + ?Sized)) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| Complex::new(gaussian(rng), T::zero()))
}

/// Haar-distributed real orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `diag(R)` folded into `Q`.
pub fn random_orthogonal<T: Real>(n: usize, rng: &mut (impl Rng + ?Sized)) -> Matrix<T> {
    let g = real_gaussian_matrix::<T>(n, n, rng);
    let (mut q, r) = householder_qr(&g);
    for j in 0..n {
        if r[(j, j)].re < T::zero() {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    // Householder reflectors of a real matrix leave q real up to roundoff.
    q.map(|z| Complex::new(z.re, T::zero()))
}

pub fn uniform<T: Real>(lo: f64, hi: f64, rng: &mut (impl Rng + ?Sized)) -> T {
    T::of(rng.random_range(lo..hi))
}
