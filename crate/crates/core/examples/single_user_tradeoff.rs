//! Covert rate against key budget for one covert user.

use covertmac::channel::reference::reference_mac;
use covertmac::region::SingleUser;

fn main() -> covertmac::Result<()> {
    // the x2 = 0, x3 = 0 slice of the reference channel
    let su = SingleUser::from_dmmac(&reference_mac(), true)?;
    println!("capacity {:.4} nats, saturates at k = {:.4}", su.capacity(), su.knee());
    let kmax = 1.5 * su.knee().max(0.1);
    for i in 0..=10 {
        let k = kmax * i as f64 / 10.0;
        println!("k1 = {k:.4}  r1* = {:.4}", su.rate(k));
    }
    Ok(())
}
