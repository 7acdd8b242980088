#![allow(dead_code)]

use covertmac::channel::Dmmac;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pmf of length `k`, mixed with the uniform law at weight `floor`.
pub fn pmf(rng: &mut impl Rng, k: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| (1.0 - floor) * v / s + floor / k as f64).collect()
}

/// Three-user MAC with every row drawn independently.
pub fn random_mac(rng: &mut impl Rng, x3: usize, ny: usize, nz: usize, floor: f64) -> Dmmac {
    let y: Vec<Vec<f64>> = (0..4 * x3).map(|_| pmf(rng, ny, floor)).collect();
    let z: Vec<Vec<f64>> = (0..4 * x3).map(|_| pmf(rng, nz, floor)).collect();
    Dmmac::from_rows(&y, &z).expect("random rows are valid")
}

/// MAC whose outputs depend on X1 only.
pub fn random_single_user(rng: &mut impl Rng, ny: usize, nz: usize, floor: f64) -> Dmmac {
    let y = [pmf(rng, ny, floor), pmf(rng, ny, floor)];
    let z = [pmf(rng, nz, floor), pmf(rng, nz, floor)];
    // rows in (x1, x2, x3) order with binary x3
    let ys: Vec<Vec<f64>> = (0..8).map(|r| y[r / 4].clone()).collect();
    let zs: Vec<Vec<f64>> = (0..8).map(|r| z[r / 4].clone()).collect();
    Dmmac::from_rows(&ys, &zs).expect("random rows are valid")
}

/// Random alphabet sizes and rows.
pub fn random_mac_any(rng: &mut impl Rng, floor: f64) -> Dmmac {
    let x3 = rng.gen_range(1..=3);
    let ny = rng.gen_range(2..=5);
    let nz = rng.gen_range(2..=5);
    random_mac(rng, x3, ny, nz, floor)
}
