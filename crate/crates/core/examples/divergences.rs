//! Per-letter divergences and χ² distances of the reference channel.

use covertmac::channel::reference::reference_mac;
use covertmac::infodiv::{chi2_mixture, divergence_profile};

fn main() -> covertmac::Result<()> {
    let ch = reference_mac();
    let prof = divergence_profile(&ch)?;
    for x3 in 0..ch.x3_size() {
        for l in 0..2 {
            println!(
                "x3={x3} user {}: D_Y = {:.4}  D_Z = {:.4}  key gap = {:+.4} nats",
                l + 1,
                prof.d_y[l][x3],
                prof.d_z[l][x3],
                prof.d_z[l][x3] - prof.d_y[l][x3]
            );
        }
        // χ² of the warden mixture only depends on the intensity ratio
        for (r1, r2) in [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            println!("  chi2({r1}, {r2}) = {:.5}", chi2_mixture(r1, r2, x3, &ch)?);
        }
    }
    Ok(())
}
