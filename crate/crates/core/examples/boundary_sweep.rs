//! Upper boundary of the (r1, r2) region at a fixed non-covert rate, written
//! as CSV plus the witness file.

use covertmac::channel::reference::reference_mac;
use covertmac::region::{boundary_sweep, write_boundary_csv, Axis, MacModel, RegionQuery, SweepOptions};
use covertmac::units::Unit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ch = reference_mac();
    let model = MacModel::new(&ch)?;
    let base = RegionQuery::mac([0.0; 3], [0.55, 0.55]).with_fixed(Axis::NonCovert(0), 0.05);
    let opts = SweepOptions { angles: 21, first_starts: 16, starts_per_angle: 4, ..Default::default() };
    let pts = boundary_sweep(&model, [Axis::Covert(0), Axis::Covert(1)], &base, &opts)?;
    for p in &pts {
        println!("r1 = {:.4}  r2 = {:.4}  R3 = {:.4}", p.axis1, p.axis2, p.tuple.r_nc[0]);
    }
    let dir = std::env::temp_dir().join("covertmac_boundary_example");
    std::fs::create_dir_all(&dir)?;
    let params = write_boundary_csv(&dir.join("boundary.csv"), &pts, Unit::Nats)?;
    println!("wrote {} and {}", dir.join("boundary.csv").display(), params.display());
    Ok(())
}
