//! Reduced-resolution data of the reference-channel figures, in bits.

use covertmac::channel::reference::reference_mac;
use covertmac::cli::figures::{fig6_data, fig7_data, fig8_data, FigureOptions};

fn main() -> covertmac::Result<()> {
    let ch = reference_mac();
    let opts = FigureOptions { angles: 25, starts: 16, k_points: 9, ..Default::default() };
    for (level, pts) in fig6_data(&ch, &opts)? {
        let best = pts.iter().map(|p| p.axis1 + p.axis2).fold(0.0, f64::max);
        println!("R3 = {level}: {} boundary points, max r1 + r2 = {best:.4}", pts.len());
    }
    let f7 = fig7_data(&ch, &opts)?;
    for i in 0..f7.k2.len() {
        println!("k2 = {:.2}: randomized {:.4}  hull {:.4}", f7.k2[i], f7.randomized[i], f7.hull[i]);
    }
    let f8 = fig8_data(&ch, &opts)?;
    let gain = f8.support.iter().map(|s| s.2 - s.1).fold(f64::NEG_INFINITY, f64::max);
    println!("largest two-phase gain on (r2, R3): {gain:.4} bits");
    Ok(())
}
