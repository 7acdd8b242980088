//! Two receivers sharing one warden: covert user 1 is decoded at receiver 1,
//! covert user 2 at receiver 2, the non-covert message at both.

use covertmac::channel::{reference::reference_mac, DmicChannel};
use covertmac::region::{corner_ic, maximize, CovertParams, IcModel, MaximizeOptions, RegionQuery};

fn main() -> covertmac::Result<()> {
    let mac = reference_mac();
    // receiver 2 sees the reference outputs in reverse letter order
    let y2: Vec<f64> = mac.gamma_y().chunks(mac.y_size()).flat_map(|r| r.iter().rev().copied()).collect();
    let ic = DmicChannel::new(
        mac.x3_size(),
        mac.y_size(),
        mac.y_size(),
        mac.z_size(),
        mac.gamma_y().to_vec(),
        y2,
        mac.gamma_z().to_vec(),
    )?;
    let t = corner_ic(&CovertParams::single(vec![0.5, 0.5], [1.0, 1.0], [1.0, 1.0]), &ic)?;
    println!("uniform X3, full intensity: {t:?}");

    let model = IcModel::new(&ic)?;
    let q = RegionQuery::mac([1.0, 1.0, 1.0], [f64::INFINITY; 2]);
    let m = maximize(&model, &q, &MaximizeOptions { starts: 16, ..Default::default() })?;
    println!("max r1 + r2 + R3 = {:.5} at {:?}", m.objective, m.tuple);
    Ok(())
}
