//! Time sharing two parameter sets yields the mixture of their corners.

use covertmac::channel::reference::reference_mac;
use covertmac::region::{convex_mix, corner, CovertParams};

fn main() -> covertmac::Result<()> {
    let ch = reference_mac();
    let a = CovertParams::single(vec![1.0, 0.0], [1.0, 0.2], [0.7, 0.7]);
    let b = CovertParams::single(vec![0.2, 0.8], [0.1, 1.0], [0.7, 0.7]);
    let (ca, cb) = (corner(&a, &ch)?, corner(&b, &ch)?);
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mixed = corner(&convex_mix(&a, &b, lambda, &ch)?, &ch)?;
        let expect: Vec<f64> = ca.r.iter().zip(&cb.r).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
        println!("λ={lambda:.2}  r = {:.5?}  mixture of corners = {:.5?}  R3 = {:.5}", mixed.r, expect, mixed.r_nc[0]);
    }
    Ok(())
}
