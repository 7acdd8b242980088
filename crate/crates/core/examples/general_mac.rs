//! A MAC with a ternary covert user, a binary covert user and two binary
//! non-covert users.

use covertmac::channel::GeneralMac;
use covertmac::infodiv::JointInputLaw;
use covertmac::region::{corner_general, maximize, CovertParams, GeneralModel, MaximizeOptions, RegionQuery};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rows(rng: &mut ChaCha8Rng, rows: usize, width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * width);
    for _ in 0..rows {
        let w: Vec<f64> = (0..width).map(|_| 0.2 + rng.gen::<f64>()).collect();
        let s: f64 = w.iter().sum();
        out.extend(w.iter().map(|v| v / s));
    }
    out
}

fn main() -> covertmac::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (covert, nc) = (vec![3, 2], vec![2, 2]);
    let inputs: usize = covert.iter().chain(&nc).product();
    let gy = random_rows(&mut rng, inputs, 4);
    let gz = random_rows(&mut rng, inputs, 3);
    let ch = GeneralMac::new(covert, nc, 4, 3, gy, gz)?;
    println!("admissible: {}", ch.validate().is_admissible());

    let params = CovertParams {
        joint: JointInputLaw::single(vec![0.25; 4]),
        rho: vec![vec![1.0, 0.5]],
        beta: vec![1.0, 1.0],
        psi: Some(vec![vec![vec![0.5, 0.5], vec![1.0]]]),
    };
    let c = corner_general(&params, &ch)?;
    println!("corner {:?}", c.tuple);
    println!("I(X3 X4; Y) bound {:.5}", c.nc_bounds.value(0b11));

    let model = GeneralModel::new(&ch)?;
    let q = RegionQuery { weights: vec![1.0, 1.0, 0.2, 0.2], key_budgets: vec![0.3, 0.3], fixed: vec![] };
    let m = maximize(&model, &q, &MaximizeOptions { starts: 8, phases: Some(2), ..Default::default() })?;
    println!("weighted optimum {:.5}: {:?}", m.objective, m.tuple);
    Ok(())
}
