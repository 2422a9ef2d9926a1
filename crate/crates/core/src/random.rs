//! Seeded random states, operators and unitaries.
//!
//! Streams are keyed by `(master seed, stream index)` on a counter-based
//! ChaCha20 generator, so parallel trials reproduce regardless of
//! scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Ket, Mat, Operator, Vector, C64};
use crate::space::Space;

pub type StreamRng = ChaCha20Rng;

/// Generator for trial `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex normal sample (real and imaginary parts N(0, 1/2)).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    // Row-major fill keeps streams stable across storage orders.
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Normalized complex Gaussian vector.
pub fn random_ket<R: Rng + ?Sized>(space: Space, rng: &mut R) -> Ket {
    let d = space.total_dim();
    loop {
        let v = Vector::from_iterator(d, (0..d).map(|_| complex_normal(rng)));
        if v.norm() > 0.0 {
            return Ket::new(space.clone(), v)
                .and_then(|k| k.normalized())
                .expect("length matches space");
        }
    }
}

/// Haar-random pure state as a projector, deterministic in `seed`.
pub fn haar_random_pure_state(space: Space, seed: u64) -> DensityOperator {
    random_ket(space, &mut rng_for(seed, 0))
        .projector()
        .expect("nonzero vector")
}

/// Random state `G G^dag / Tr` with `G` a `dim × rank` Ginibre matrix.
pub fn random_state<R: Rng + ?Sized>(
    space: Space,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let d = space.total_dim();
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let g = ginibre(rng, d, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = crate::spectral::hermitize(&(m / C64::new(tr, 0.0)));
    DensityOperator::from_matrix(space, m)
}

/// Random state of the given rank, deterministic in `seed`.
pub fn random_density_operator(space: Space, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_state(space, rank, &mut rng_for(seed, 0))
}

/// Full-rank random state.
pub fn random_full_rank<R: Rng + ?Sized>(space: Space, rng: &mut R) -> DensityOperator {
    let d = space.total_dim();
    random_state(space, d, rng).expect("full rank is valid")
}

/// Ginibre operator on `space`.
pub fn random_operator<R: Rng + ?Sized>(space: Space, rng: &mut R) -> Operator {
    let d = space.total_dim();
    Operator::new(space, ginibre(rng, d, d)).expect("square")
}

/// Hermitian part of a Ginibre operator.
pub fn random_hermitian<R: Rng + ?Sized>(space: Space, rng: &mut R) -> Operator {
    let d = space.total_dim();
    let g = ginibre(rng, d, d);
    Operator::new(space, crate::spectral::hermitize(&g)).expect("square")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix with
/// the diagonal phases of `R` removed.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Mat {
    let qr = ginibre(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random isometry `d_in → d_out` (first `d_in` columns of a unitary).
pub fn random_isometry<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Mat {
    assert!(d_out >= d_in, "isometry needs d_out >= d_in");
    random_unitary(d_out, rng).columns(0, d_in).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_deterministic() {
        let s = Space::single("A", 3).unwrap();
        let a = haar_random_pure_state(s.clone(), 11);
        let b = haar_random_pure_state(s.clone(), 11);
        let c = haar_random_pure_state(s, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn streams_differ() {
        let mut a = rng_for(5, 0);
        let mut b = rng_for(5, 1);
        let x: u64 = a.random();
        let y: u64 = b.random();
        assert_ne!(x, y);
    }

    #[test]
    fn one_dimensional_pure_state() {
        let s = Space::single("A", 1).unwrap();
        let rho = haar_random_pure_state(s, 3);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_is_respected() {
        let s = Space::single("A", 4).unwrap();
        for rank in 1..=4 {
            let rho = random_density_operator(s.clone(), rank, rank as u64).unwrap();
            assert_eq!(rho.rank(), rank);
        }
        assert_eq!(
            random_density_operator(s.clone(), 0, 1).unwrap_err(),
            Error::InvalidRank { rank: 0, dim: 4 }
        );
        assert_eq!(
            random_density_operator(s, 5, 1).unwrap_err(),
            Error::InvalidRank { rank: 5, dim: 4 }
        );
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_for(1, 2);
        let u = random_unitary(5, &mut rng);
        assert!((u.adjoint() * &u - Mat::identity(5, 5)).norm() < 1e-12);
    }
}
