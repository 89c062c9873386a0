//! Seeded Haar-random states and unitaries.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, CMatrix, CVector};

/// The generator used everywhere a seed is accepted.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed, e.g. per audit instance.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian vector, not normalized.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| c64(gaussian(rng), gaussian(rng)))
}

/// Uniformly distributed unit vector in `C^d`.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    loop {
        let v = gaussian_vector(rng, d);
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

/// Haar-distributed unitary via phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| c64(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { c64(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| c64(gaussian(rng), gaussian(rng)));
    (&g + g.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(3);
        for d in 1..6 {
            let u = haar_unitary(&mut rng, d);
            let err = (&u * u.adjoint() - CMatrix::identity(d, d)).norm();
            assert!(err < 1e-12, "d = {d}: {err}");
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = haar_state(&mut seeded(11), 4);
        let b = haar_state(&mut seeded(11), 4);
        assert_eq!(a, b);
        assert_ne!(child_seed(1, 0), child_seed(1, 1));
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }
}
