//! Finite-blocklength run of the coding scheme on the reference channel.

use covertmac::channel::reference::reference_mac;
use covertmac::infodiv::blahut_arimoto;
use covertmac::region::CovertParams;
use covertmac::simulator::{simulate, SimConfig};

fn main() -> covertmac::Result<()> {
    let ch = reference_mac();
    let rows: Vec<&[f64]> = (0..ch.x3_size()).map(|x| ch.y_row(0, 0, x)).collect();
    let p_x3 = blahut_arimoto(&rows, 1e-10, 10_000).input;
    let params = CovertParams::single(p_x3, [1.0, 1.0], [1.0, 1.0]);
    // a typicality radius below the default so W3 is decodable at this n
    let cfg = SimConfig { n: 2000, trials: 100, delta_samples: 200, mu_n: Some(0.04), seed: 3, ..Default::default() };
    let r = simulate(&cfg, &params, &ch)?;
    println!("sizes {:?}", r.derived.sizes);
    println!("Pe under H=0: {:.3}  {:?}", r.pe0.rate, r.pe0.wilson95);
    println!("Pe under H=1: {:.3}  errors (w3, w1, w2) = {:?}", r.pe1.rate, r.pe1_by_message);
    if let Some(d) = &r.delta {
        println!("delta {:.4} nats (first-order value {:.4})", d.average, d.theory);
    }
    Ok(())
}
