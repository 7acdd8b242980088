//! What the warden sees: the exact codebook-mixture divergence for a few
//! codebook sizes against the first-order value ω²/2·E[χ²].

use covertmac::channel::reference::reference_mac;
use covertmac::region::CovertParams;
use covertmac::simulator::{simulate, SimConfig, Sizes};

fn main() -> covertmac::Result<()> {
    let ch = reference_mac();
    let params = CovertParams::single(vec![0.5, 0.5], [1.0, 1.0], [1.0, 1.0]);
    for keys in [1, 4, 16, 64] {
        let sizes = Sizes { m1: 2, k1: keys, m2: 2, k2: keys, m3: 1 };
        let cfg = SimConfig { n: 1000, trials: 1, delta_samples: 400, sizes: Some(sizes), seed: 1, ..Default::default() };
        let d = simulate(&cfg, &params, &ch)?.delta.expect("delta requested");
        println!(
            "K = {keys:>3}: delta = {:.4} ± {:.4} nats, first order {:.4}, bound on detection error sum {:.3}",
            d.average, d.per_w3[0].stderr, d.theory, d.covertness_bound
        );
    }
    Ok(())
}
