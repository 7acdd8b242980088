//! Weighted sum of rates on the three-user MAC under key budgets, with and
//! without a fixed non-covert rate.

use covertmac::channel::reference::reference_mac;
use covertmac::region::{maximize, Axis, MacModel, MaximizeOptions, RegionQuery};

fn main() -> covertmac::Result<()> {
    let ch = reference_mac();
    let model = MacModel::new(&ch)?;
    let opts = MaximizeOptions { starts: 16, ..Default::default() };

    let q = RegionQuery::mac([1.0, 1.0, 0.0], [0.5, 0.5]);
    let m = maximize(&model, &q, &opts)?;
    println!("max r1 + r2 = {:.5}  tuple {:?}", m.objective, m.tuple);

    let q = q.with_fixed(Axis::NonCovert(0), 0.1);
    let m = maximize(&model, &q, &opts)?;
    println!("with R3 = 0.1: r1 + r2 = {:.5}, phases used {}", m.objective, m.params.phases());
    println!("{}", serde_json::to_string_pretty(&m.params).expect("params serialize"));
    Ok(())
}
