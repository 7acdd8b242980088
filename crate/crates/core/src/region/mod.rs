//! Asymptotic rate-key regions: corner evaluation for the three-user MAC,
//! the general MAC and the interference channel, the single-user and
//! two-user closed forms, convex mixing of parameter sets, and the
//! multi-start optimiser behind boundary sweeps.

mod model;
mod optimize;
mod params;
mod sweep;

pub use model::{GeneralModel, IcModel, MacModel, NcTerms, RegionModel, RegionTerms};
pub use optimize::{maximize, maximize_grid, Maximum, MaximizeOptions, FEASIBILITY_TOL};
pub use params::{Axis, CovertParams, FixedRate, RateKeyTuple, RegionQuery};
pub use sweep::{boundary_sweep, upper_hull, write_boundary_csv, BoundaryPoint, SweepOptions};

use crate::channel::{DmicChannel, Dmmac, GeneralMac};
use crate::error::{Error, Result};
use crate::infodiv::{self, Polymatroid};
use serde::Serialize;
use std::f64::consts::SQRT_2;

/// Rate-key tuple of `params` on the three-user MAC.
pub fn corner(params: &CovertParams, ch: &Dmmac) -> Result<RateKeyTuple> {
    MacModel::new(ch)?.corner(params)
}

/// Rate-key tuple on the interference channel.
pub fn corner_ic(params: &CovertParams, ch: &DmicChannel) -> Result<RateKeyTuple> {
    IcModel::new(ch)?.corner(params)
}

/// Corner of the general MAC together with the non-covert subset-sum bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralCorner {
    /// `r_nc` holds the polymatroid vertex that fills users in index order.
    pub tuple: RateKeyTuple,
    pub nc_bounds: Polymatroid,
}

pub fn corner_general(params: &CovertParams, ch: &GeneralMac) -> Result<GeneralCorner> {
    let terms = GeneralModel::new(ch)?.terms(params)?;
    let tuple = terms.tuple(&params.beta)?;
    let NcTerms::Table(nc_bounds) = terms.nc else { unreachable!("general model returns a table") };
    Ok(GeneralCorner { tuple, nc_bounds })
}

/// Covert rates and keys with the non-covert user acting only as a jammer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JammerPoint {
    pub r: Vec<f64>,
    pub k: Vec<f64>,
}

pub fn jammer_region_point(params: &CovertParams, ch: &Dmmac) -> Result<JammerPoint> {
    let t = corner(params, ch)?;
    Ok(JammerPoint { r: t.r, k: t.k })
}

/// Single-user covert channel after dropping the inert inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleUser {
    pub d_y: f64,
    pub d_z: f64,
    pub chi2: f64,
}

impl SingleUser {
    /// Requires Y and Z to ignore X2 and X3 unless `force` is set, in which
    /// case the slice x2 = 0, x3 = 0 is used.
    pub fn from_dmmac(ch: &Dmmac, force: bool) -> Result<Self> {
        if !force && !ch.is_single_user() {
            return Err(Error::NotAdmissible(
                "outputs depend on X2 or X3; pass the user-1 reduction explicitly".into(),
            ));
        }
        let d = |a: &[f64], b: &[f64], what: &str| {
            infodiv::kl_unchecked(a, b)
                .finite()
                .ok_or_else(|| Error::AbsoluteContinuity(format!("user 1 {what} row")))
        };
        let d_y = d(ch.y_row(1, 0, 0), ch.y_row(0, 0, 0), "Y")?;
        let d_z = d(ch.z_row(1, 0, 0), ch.z_row(0, 0, 0), "Z")?;
        let chi2 = infodiv::chi2_mixture(1.0, 0.0, 0, ch)?;
        Ok(Self { d_y, d_z, chi2 })
    }

    /// Largest covert rate without a key budget.
    pub fn capacity(&self) -> f64 {
        if self.d_y == 0.0 {
            0.0
        } else {
            SQRT_2 * self.d_y / self.chi2.sqrt()
        }
    }

    /// Key rate at which the covert rate saturates (0 if no key is needed).
    pub fn knee(&self) -> f64 {
        let g = (self.d_z - self.d_y).max(0.0);
        if g == 0.0 {
            0.0
        } else {
            SQRT_2 * g / self.chi2.sqrt()
        }
    }

    /// Largest covert rate with key rate at most `k1`.
    pub fn rate(&self, k1: f64) -> f64 {
        let g = (self.d_z - self.d_y).max(0.0);
        let linear = if g == 0.0 { f64::INFINITY } else { k1 * self.d_y / g };
        linear.min(self.capacity())
    }
}

/// Largest covert rate under key budget `k1` on a channel where X2 and X3 are inert.
pub fn single_user_tradeoff(k1: f64, ch: &Dmmac) -> Result<f64> {
    if !(k1 >= 0.0) {
        return Err(Error::Infeasible(format!("key budget {k1} is negative")));
    }
    Ok(SingleUser::from_dmmac(ch, false)?.rate(k1))
}

/// Two covert users without a non-covert user, intensities normalised to sum to one.
pub fn two_user_region_point(rho1: f64, rho2: f64, beta: [f64; 2], ch: &Dmmac) -> Result<RateKeyTuple> {
    if !(rho1 >= 0.0 && rho2 >= 0.0) || (rho1 + rho2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!("intensities ({rho1}, {rho2}) must be nonnegative and sum to 1")));
    }
    if !ch.ignores_x3() {
        return Err(Error::NotAdmissible("outputs depend on X3".into()));
    }
    let prof = infodiv::divergence_profile(ch)?;
    let chi = infodiv::chi2_mixture(rho1, rho2, 0, ch)?;
    let rho = [rho1, rho2];
    let mut r = vec![0.0; 2];
    let mut ks = vec![0.0; 2];
    for l in 0..2 {
        r[l] = beta[l] * SQRT_2 * rho[l] * prof.d_y[l][0] / chi.sqrt();
        ks[l] = beta[l] * SQRT_2 * rho[l] * (prof.d_z[l][0] - prof.d_y[l][0]) / chi.sqrt();
    }
    Ok(RateKeyTuple { r, r_nc: vec![0.0], k: ks.iter().map(|v| v.max(0.0)).collect(), k_signed: ks })
}

/// Parameters whose corner is the λ-mixture of the corners of `a` and `b`:
/// phases of `a` weighted by λ, phases of `b` by 1 − λ with intensities scaled
/// so both sides carry the same χ² mass. Both sides must share β.
pub fn convex_mix(a: &CovertParams, b: &CovertParams, lambda: f64, ch: &Dmmac) -> Result<CovertParams> {
    convex_mix_in(&MacModel::new(ch)?, a, b, lambda)
}

pub fn convex_mix_in<M: RegionModel>(
    model: &M,
    a: &CovertParams,
    b: &CovertParams,
    lambda: f64,
) -> Result<CovertParams> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParams(format!("mixing weight {lambda} outside [0, 1]")));
    }
    if a.beta.iter().zip(&b.beta).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::InvalidParams("mixed parameter sets must share the fractions β".into()));
    }
    let (ta, tb) = (model.terms(a)?, model.terms(b)?);
    if !(ta.mass > 0.0 && tb.mass > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let nu = (ta.mass / tb.mass).sqrt();
    let mut p_t: Vec<f64> = a.joint.p_t.iter().map(|p| lambda * p).collect();
    p_t.extend(b.joint.p_t.iter().map(|p| (1.0 - lambda) * p));
    let mut p_x = a.joint.p_x_given_t.clone();
    p_x.extend(b.joint.p_x_given_t.iter().cloned());
    let mut rho = a.rho.clone();
    rho.extend(b.rho.iter().map(|r| r.iter().map(|v| nu * v).collect()));
    let psi = match (&a.psi, &b.psi) {
        (None, None) => None,
        _ => {
            let lc = model.covert_users();
            let fill = |p: &CovertParams| -> Vec<Vec<Vec<f64>>> {
                (0..p.phases()).map(|t| (0..lc).map(|l| p.psi_of(t, l).to_vec()).collect()).collect()
            };
            let mut v = fill(a);
            v.extend(fill(b));
            Some(v)
        }
    };
    Ok(CovertParams {
        joint: infodiv::JointInputLaw { p_t, p_x_given_t: p_x },
        rho,
        beta: a.beta.clone(),
        psi,
    })
}
