//! Seeded random instances for the invariant suites.
//!
//! Gaussian entries are i.i.d. standard complex normal (`E|z|² = 1`).
//! Hermitian instances are `(G + G*)/2`, positive instances are squares of
//! Hermitian ones, and unitaries come from the QR factorization of a
//! Gaussian matrix with the phases of `R`'s diagonal divided out.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{BlockElement, BlockShape, TraceSpec, C64};
use crate::nfunction::NFunction;

pub type SuiteRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of instance `index` of the suite `name` under the run seed `seed`.
pub fn instance_seed(seed: u64, name: &str, index: usize) -> u64 {
    // FNV-1a of the name keeps streams of different suites independent
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
    }
    splitmix(splitmix(seed ^ h).wrapping_add(index as u64))
}

pub fn rng_for(seed: u64, name: &str, index: usize) -> SuiteRng {
    ChaCha8Rng::seed_from_u64(instance_seed(seed, name, index))
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = gaussian_matrix(rng, n);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub fn positive<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let h = hermitian(rng, n);
    &h * &h
}

/// Haar-distributed unitary.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let qr = gaussian_matrix(rng, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random shape with at most `max_blocks` blocks of size `1..=max_dim`.
pub fn shape<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_dim: usize) -> BlockShape {
    let k = rng.random_range(1..=max_blocks);
    BlockShape::new((0..k).map(|_| rng.random_range(1..=max_dim)).collect()).expect("small shape")
}

/// Shapes up to `⊕` of a 4×4 and a 3×3 block.
pub fn small_shape<R: Rng + ?Sized>(rng: &mut R) -> BlockShape {
    match rng.random_range(0..4) {
        0 => BlockShape::new(vec![rng.random_range(1..=4)]),
        1 => BlockShape::new(vec![rng.random_range(1..=4), rng.random_range(1..=3)]),
        2 => BlockShape::new(vec![4, 3]),
        _ => BlockShape::commutative(rng.random_range(1..=5)),
    }
    .expect("small shape")
}

pub fn element<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> BlockElement {
    BlockElement::from_blocks(shape.dims().iter().map(|&n| gaussian_matrix(rng, n)).collect()).expect("finite")
}

pub fn hermitian_element<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> BlockElement {
    BlockElement::from_blocks(shape.dims().iter().map(|&n| hermitian(rng, n)).collect()).expect("finite")
}

pub fn positive_element<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> BlockElement {
    BlockElement::from_blocks(shape.dims().iter().map(|&n| positive(rng, n)).collect()).expect("finite")
}

pub fn unitary_element<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> BlockElement {
    BlockElement::from_blocks(shape.dims().iter().map(|&n| unitary(rng, n)).collect()).expect("finite")
}

/// Trace with block weights drawn log-uniformly from `[1/4, 4]`.
pub fn trace<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> TraceSpec {
    let w = (0..shape.num_blocks()).map(|_| (rng.random_range(-1.0..1.0) * 4f64.ln()).exp()).collect();
    TraceSpec::new(shape.clone(), w).expect("positive weights")
}

/// Positive definite `h = V D V*` with eigenvalues log-uniform in
/// `[1, max_condition]` times a random overall scale in `[1/4, 4]`.
pub fn weight_density<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape, max_condition: f64) -> BlockElement {
    let scale = (rng.random_range(-1.0..1.0) * 4f64.ln()).exp();
    let log_c = max_condition.ln();
    let blocks = shape
        .dims()
        .iter()
        .map(|&n| {
            let v = unitary(rng, n);
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
                C64::new(scale * (rng.random_range(0.0..1.0) * log_c).exp(), 0.0)
            }));
            let h = &v * d * v.adjoint();
            (&h + h.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    BlockElement::from_blocks(blocks).expect("finite")
}

/// The N-function family exercised by the suites.
pub fn nfunction_family() -> Vec<NFunction> {
    vec![
        NFunction::power(1.5).unwrap(),
        NFunction::power(2.0).unwrap(),
        NFunction::power(3.0).unwrap(),
        NFunction::log_power(2.0).unwrap(),
    ]
}

pub fn pick<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| rng_for(7, "x", 3).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(instance_seed(7, "x", 3), instance_seed(7, "y", 3));
        assert_ne!(instance_seed(7, "x", 3), instance_seed(7, "x", 4));
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_for(1, "u", 0);
        let u = unitary(&mut rng, 5);
        let id = DMatrix::<C64>::identity(5, 5);
        assert!((u.adjoint() * &u - id).norm() < 1e-12);
    }

    #[test]
    fn weight_density_condition_is_bounded() {
        let mut rng = rng_for(1, "h", 0);
        let shape = BlockShape::new(vec![4, 3]).unwrap();
        let h = weight_density(&mut rng, &shape, 1e4);
        let eig = h.hermitian_eigen().unwrap();
        assert!(eig.min_value() > 0.0);
        assert!(eig.max_value() / eig.min_value() <= 1e4 * (1.0 + 1e-9));
    }
}
