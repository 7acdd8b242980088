//! Data behind the figures of the reference channel. Inputs and outputs of the
//! public functions are in bits.

use crate::channel::Dmmac;
use crate::error::Result;
use crate::infodiv::{chi2_mixture, divergence_profile, JointInputLaw};
use crate::region::{
    boundary_sweep, maximize, Axis, BoundaryPoint, CovertParams, MacModel, MaximizeOptions,
    RateKeyTuple, RegionQuery, SingleUser, SweepOptions,
};
use crate::units::Unit;

/// Key budget of both covert users in the region figures (bits).
pub const KEY_BUDGET_BITS: f64 = 0.8;
pub const FIG5_R1_BITS: [f64; 3] = [0.25, 0.5, 0.75];
pub const FIG6_R3_BITS: [f64; 3] = [0.1965, 0.15, 0.05];

#[derive(Debug, Clone)]
pub struct FigureOptions {
    pub angles: usize,
    pub starts: usize,
    pub seed: u64,
    /// Number of k₂ grid points of the fig7 curves on [0, 0.8].
    pub k_points: usize,
    /// Directions per quarter circle for fig4.
    pub fig4_grid: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { angles: 61, starts: 16, seed: 0, k_points: 17, fig4_grid: 7 }
    }
}

impl FigureOptions {
    fn sweep(&self, phases: Option<usize>) -> SweepOptions {
        SweepOptions {
            angles: self.angles,
            first_starts: self.starts,
            starts_per_angle: (self.starts / 4).max(2),
            phases,
            seed: self.seed,
        }
    }

    fn maximize(&self, hints: Vec<CovertParams>) -> MaximizeOptions {
        MaximizeOptions { starts: self.starts, seed: self.seed, hints, ..Default::default() }
    }
}

fn nats(bits: f64) -> f64 {
    Unit::Bits.to_nats(bits)
}

fn bits(nats: f64) -> f64 {
    Unit::Bits.from_nats(nats)
}

fn budgets() -> Vec<f64> {
    vec![nats(KEY_BUDGET_BITS); 2]
}

/// Tuple converted to bits.
pub fn tuple_bits(t: &RateKeyTuple) -> RateKeyTuple {
    let c = |v: &Vec<f64>| v.iter().map(|x| bits(*x)).collect();
    RateKeyTuple { r: c(&t.r), r_nc: c(&t.r_nc), k: c(&t.k), k_signed: c(&t.k_signed) }
}

fn points_bits(points: Vec<BoundaryPoint>) -> Vec<BoundaryPoint> {
    points
        .into_iter()
        .map(|p| BoundaryPoint { axis1: bits(p.axis1), axis2: bits(p.axis2), tuple: tuple_bits(&p.tuple), params: p.params })
        .collect()
}

/// One maximiser of the 3-D region per weight direction: `(weights, tuple)`.
pub fn fig4_data(ch: &Dmmac, opts: &FigureOptions) -> Result<Vec<([f64; 3], RateKeyTuple)>> {
    let model = MacModel::new(ch)?;
    let g = opts.fig4_grid.max(2);
    let mut out = Vec::new();
    let mut hint: Vec<CovertParams> = vec![];
    for j in 0..g {
        let phi = std::f64::consts::FRAC_PI_2 * j as f64 / (g - 1) as f64;
        let around = if j == g - 1 { 1 } else { g };
        for i in 0..around {
            let th = std::f64::consts::FRAC_PI_2 * i as f64 / (g - 1) as f64;
            let w = [th.cos() * phi.cos(), th.sin() * phi.cos(), phi.sin()].map(|v| if v.abs() < 1e-15 { 0.0 } else { v });
            let q = RegionQuery { weights: w.to_vec(), key_budgets: budgets(), fixed: vec![] };
            let m = maximize(&model, &q, &opts.maximize(hint.clone()))?;
            hint = vec![m.params.clone()];
            out.push((w, tuple_bits(&m.tuple)));
        }
    }
    Ok(out)
}

/// (r₂, R₃) boundaries at each fixed r₁ level (bits).
pub fn fig5_data(ch: &Dmmac, opts: &FigureOptions) -> Result<Vec<(f64, Vec<BoundaryPoint>)>> {
    let model = MacModel::new(ch)?;
    FIG5_R1_BITS
        .iter()
        .map(|&lvl| {
            let q = RegionQuery { weights: vec![0.0; 3], key_budgets: budgets(), fixed: vec![] }
                .with_fixed(Axis::Covert(0), nats(lvl));
            let pts = boundary_sweep(&model, [Axis::Covert(1), Axis::NonCovert(0)], &q, &opts.sweep(None))?;
            Ok((lvl, points_bits(pts)))
        })
        .collect()
}

/// (r₁, r₂) boundaries at each fixed R₃ level (bits).
pub fn fig6_data(ch: &Dmmac, opts: &FigureOptions) -> Result<Vec<(f64, Vec<BoundaryPoint>)>> {
    let model = MacModel::new(ch)?;
    FIG6_R3_BITS
        .iter()
        .map(|&lvl| {
            let q = RegionQuery { weights: vec![0.0; 3], key_budgets: budgets(), fixed: vec![] }
                .with_fixed(Axis::NonCovert(0), nats(lvl));
            let pts = boundary_sweep(&model, [Axis::Covert(0), Axis::Covert(1)], &q, &opts.sweep(None))?;
            Ok((lvl, points_bits(pts)))
        })
        .collect()
}

/// Largest r₂ under a k₂ budget, in bits, for the full channel and for X3
/// pinned to each symbol, plus the closed-form concave envelope of the pinned
/// curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig7 {
    pub k2: Vec<f64>,
    pub randomized: Vec<f64>,
    pub pinned: Vec<Vec<f64>>,
    pub hull: Vec<f64>,
}

/// User 2 alone at X3 = x: the single-user closed form.
pub fn pinned_user2(ch: &Dmmac, x: usize) -> Result<SingleUser> {
    let prof = divergence_profile(ch)?;
    Ok(SingleUser { d_y: prof.d_y[1][x], d_z: prof.d_z[1][x], chi2: chi2_mixture(0.0, 1.0, x, ch)? })
}

fn lift(p: &CovertParams, x: usize, x3_size: usize) -> CovertParams {
    let mut e = vec![0.0; x3_size];
    e[x] = 1.0;
    CovertParams {
        joint: JointInputLaw { p_t: p.joint.p_t.clone(), p_x_given_t: vec![e; p.phases()] },
        ..p.clone()
    }
}

/// Value at `x` of the upper concave envelope of `pts`, flat beyond the
/// rightmost point and equal to the leftmost value before it.
pub fn concave_envelope(pts: &[(f64, f64)], x: f64) -> f64 {
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    sorted.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    if x <= hull[0].0 {
        return hull[0].1;
    }
    for w in hull.windows(2) {
        if x <= w[1].0 {
            let t = (x - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + t * (w[1].1 - w[0].1);
        }
    }
    hull.last().map_or(f64::NEG_INFINITY, |p| p.1)
}

pub fn fig7_data(ch: &Dmmac, opts: &FigureOptions) -> Result<Fig7> {
    let kp = opts.k_points.max(2);
    let k2: Vec<f64> = (0..kp).map(|i| KEY_BUDGET_BITS * i as f64 / (kp - 1) as f64).collect();
    let full = MacModel::new(ch)?;
    let restricted: Vec<Dmmac> = (0..ch.x3_size()).map(|x| ch.restrict_x3(x)).collect::<Result<_>>()?;
    let max_r2 = |model: &MacModel, k: f64, hints: Vec<CovertParams>| -> Result<(f64, CovertParams)> {
        let q = RegionQuery { weights: vec![0.0, 1.0, 0.0], key_budgets: vec![f64::INFINITY, nats(k)], fixed: vec![] };
        let m = maximize(model, &q, &opts.maximize(hints))?;
        Ok((bits(m.tuple.r[1]), m.params))
    };
    let mut pinned = vec![Vec::with_capacity(kp); restricted.len()];
    let mut randomized = Vec::with_capacity(kp);
    let mut prev: Vec<Option<CovertParams>> = vec![None; restricted.len() + 1];
    for &k in &k2 {
        let mut lifted = vec![];
        for (x, rc) in restricted.iter().enumerate() {
            let m = MacModel::new(rc)?;
            let (r, p) = max_r2(&m, k, prev[x].iter().cloned().collect())?;
            pinned[x].push(r);
            lifted.push(lift(&p, x, ch.x3_size()));
            prev[x] = Some(p);
        }
        lifted.extend(prev[restricted.len()].iter().cloned());
        let (r, p) = max_r2(&full, k, lifted)?;
        randomized.push(r);
        prev[restricted.len()] = Some(p);
    }
    // closed-form envelope of the pinned curves
    let kmax = nats(KEY_BUDGET_BITS);
    let mut verts = Vec::new();
    for x in 0..ch.x3_size() {
        let su = pinned_user2(ch, x)?;
        verts.push((0.0, su.rate(0.0)));
        let knee = su.knee().min(kmax);
        verts.push((knee, su.rate(knee)));
        verts.push((kmax, su.rate(kmax)));
    }
    let hull = k2.iter().map(|&k| bits(concave_envelope(&verts, nats(k)))).collect();
    Ok(Fig7 { k2, randomized, pinned, hull })
}

/// Largest value of cos θ·a + sin θ·b over `pts`.
pub fn support(pts: &[(f64, f64)], theta: f64) -> f64 {
    pts.iter().map(|p| theta.cos() * p.0 + theta.sin() * p.1).fold(f64::NEG_INFINITY, f64::max)
}

/// (r₂, R₃) boundaries with one phase and with two phases.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig8 {
    pub single: Vec<BoundaryPoint>,
    pub multiplexed: Vec<BoundaryPoint>,
    /// (θ, support with one phase, support with two phases).
    pub support: Vec<(f64, f64, f64)>,
}

pub fn fig8_data(ch: &Dmmac, opts: &FigureOptions) -> Result<Fig8> {
    let model = MacModel::new(ch)?;
    let q = RegionQuery { weights: vec![0.0; 3], key_budgets: budgets(), fixed: vec![] };
    let axes = [Axis::Covert(1), Axis::NonCovert(0)];
    let single = points_bits(boundary_sweep(&model, axes, &q, &opts.sweep(Some(1)))?);
    let multiplexed = points_bits(boundary_sweep(&model, axes, &q, &opts.sweep(Some(2)))?);
    let xy = |v: &[BoundaryPoint]| v.iter().map(|p| (p.axis1, p.axis2)).collect::<Vec<_>>();
    let (a, b) = (xy(&single), xy(&multiplexed));
    let n = opts.angles.max(2);
    let support = (0..n)
        .map(|i| {
            let th = std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64;
            (th, support(&a, th), support(&b, th))
        })
        .collect();
    Ok(Fig8 { single, multiplexed, support })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_of_two_ramps() {
        // ramps to (1, 1) and (3, 2): hull goes (0,0) → (1,1) → (3,2)
        let v = [(0.0, 0.0), (1.0, 1.0), (4.0, 1.0), (0.0, 0.0), (3.0, 2.0), (4.0, 2.0)];
        assert!((concave_envelope(&v, 0.5) - 0.5).abs() < 1e-15);
        assert!((concave_envelope(&v, 2.0) - 1.5).abs() < 1e-15);
        assert!((concave_envelope(&v, 3.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn support_of_points() {
        let p = [(1.0, 0.0), (0.0, 1.0)];
        assert!((support(&p, std::f64::consts::FRAC_PI_4) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
