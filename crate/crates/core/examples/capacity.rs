//! Blahut–Arimoto capacity of the non-covert link with both covert users idle.

use covertmac::channel::reference::reference_mac;
use covertmac::infodiv::blahut_arimoto;
use covertmac::units::Unit;

fn main() {
    let ch = reference_mac();
    let rows: Vec<&[f64]> = (0..ch.x3_size()).map(|x| ch.y_row(0, 0, x)).collect();
    let cap = blahut_arimoto(&rows, 1e-12, 100_000);
    println!(
        "C = {:.6} nats = {:.6} bits after {} iterations (gap {:.1e})",
        cap.nats,
        Unit::Bits.from_nats(cap.nats),
        cap.iterations,
        cap.gap
    );
    println!("input law {:?}", cap.input);
}
