//! Reference computations shared by the integration tests. Nothing here goes
//! through circuits: states are written down from bitstrings and the Grover
//! operators act on plain vectors.

#![allow(dead_code)]

use num_complex::Complex64;
use qpix_core::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// NEQR amplitudes built from the MSB-first label "row bits, column bits,
/// intensity bits".
pub fn reference_neqr(img: &GrayImage) -> Vec<Complex64> {
    let n = img.side_exp() as usize;
    let q = img.bit_depth() as usize;
    let side = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (q + 2 * n)];
    for (i, &v) in img.pixels().iter().enumerate() {
        let label = format!("{:0n$b}{:0n$b}{:0q$b}", i / side, i % side, v, n = n, q = q);
        let k = usize::from_str_radix(&label, 2).unwrap();
        amps[k] = Complex64::new(1.0 / side as f64, 0.0);
    }
    amps
}

/// Position-register probabilities after `iterations` Grover rounds on the
/// NEQR state, marking pixels with intensity `target`. The oracle negates
/// entries directly and the diffuser is `v -> 2<psi|v> psi - v`.
pub fn reference_grover(img: &GrayImage, target: u32, iterations: usize) -> Vec<f64> {
    let q = img.bit_depth() as usize;
    let psi = reference_neqr(img);
    let mut v = psi.clone();
    let color_mask = (1usize << q) - 1;
    for _ in 0..iterations {
        for (k, a) in v.iter_mut().enumerate() {
            if k & color_mask == target as usize {
                *a = -*a;
            }
        }
        let overlap: Complex64 = psi.iter().zip(&v).map(|(p, a)| p.conj() * a).sum();
        for (a, p) in v.iter_mut().zip(&psi) {
            *a = 2.0 * overlap * p - *a;
        }
    }
    let mut out = vec![0.0; img.pixels().len()];
    for (k, a) in v.iter().enumerate() {
        out[k >> q] += a.norm_sqr();
    }
    out
}

pub fn random_image(rng: &mut ChaCha8Rng, n: u32, q: u32) -> GrayImage {
    let max = 1u32 << q;
    let pixels = (0..1usize << (2 * n))
        .map(|_| rng.gen_range(0..max))
        .collect();
    GrayImage::new(n, q, pixels).unwrap()
}

/// `count` random images with n in 1..=2, q in 1..=8 (q + 2n <= 12).
pub fn random_images(seed: u64, count: usize) -> Vec<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=2);
            let q = rng.gen_range(1..=8);
            random_image(&mut rng, n, q)
        })
        .collect()
}

/// Every 2x2 image with q = 2 (256 of them).
pub fn all_2x2_q2() -> Vec<GrayImage> {
    (0u32..256)
        .map(|code| {
            let pixels = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
            GrayImage::new(1, 2, pixels).unwrap()
        })
        .collect()
}

pub fn max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
