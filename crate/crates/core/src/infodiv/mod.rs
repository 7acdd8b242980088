//! Information measures: KL divergence, chi-squared mixture distances,
//! conditional mutual informations and the two expansion identities used as
//! numerical cross-checks.

mod capacity;
mod identity;
mod polymatroid;

pub use capacity::{blahut_arimoto, Capacity};
pub use identity::{local_div_ratio, mi_identity_gap, mi_upper_bound_slack, FactorizedLaw, IdentityGap};
pub use polymatroid::Polymatroid;

use crate::channel::{Dmmac, GeneralMac};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Result of a KL divergence: a finite value or the absolute-continuity failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Divergence {
    Finite(f64),
    /// `p` puts mass where `q` has none.
    Infinite,
}

impl Divergence {
    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Divergence::Infinite)
    }

    /// The value as a float, with `f64::INFINITY` for the failure case.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// D(p‖q) in nats with 0·log 0 = 0.
pub fn kl(p: &[f64], q: &[f64]) -> Result<Divergence> {
    if p.len() != q.len() {
        return Err(Error::Structure(format!(
            "kl over alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(kl_unchecked(p, q))
}

pub(crate) fn kl_unchecked(p: &[f64], q: &[f64]) -> Divergence {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return Divergence::Infinite;
            }
            d += a * (a / b).ln();
        }
    }
    Divergence::Finite(d.max(0.0))
}

/// I(X;Y) for input pmf `p` over rows `w[x]`.
pub fn mutual_information(p: &[f64], w: &[&[f64]]) -> f64 {
    let ny = w.first().map_or(0, |r| r.len());
    let mut out = vec![0.0; ny];
    for (&px, row) in p.iter().zip(w) {
        if px > 0.0 {
            for (o, &g) in out.iter_mut().zip(row.iter()) {
                *o += px * g;
            }
        }
    }
    let mut i = 0.0;
    for (&px, row) in p.iter().zip(w) {
        if px > 0.0 {
            for (&g, &o) in row.iter().zip(&out) {
                if g > 0.0 {
                    i += px * g * (g / o).ln();
                }
            }
        }
    }
    i.max(0.0)
}

/// Per-letter divergences of the covert rows against the idle row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProfile {
    /// `d_y[l][x3]` = D(Γ_Y(·|e_{l+1},x3) ‖ Γ_Y(·|0,0,x3)).
    pub d_y: [Vec<f64>; 2],
    pub d_z: [Vec<f64>; 2],
    /// Both covert users active, against idle.
    pub d_y12: Vec<Divergence>,
    pub d_z12: Vec<Divergence>,
}

/// Divergence tables of a three-user MAC; fails if a single-user row escapes
/// the idle support.
pub fn divergence_profile(ch: &Dmmac) -> Result<DivergenceProfile> {
    let n = ch.x3_size();
    let mut d_y = [vec![0.0; n], vec![0.0; n]];
    let mut d_z = [vec![0.0; n], vec![0.0; n]];
    let mut d_y12 = Vec::with_capacity(n);
    let mut d_z12 = Vec::with_capacity(n);
    for x3 in 0..n {
        for (l, (x1, x2)) in [(1, 0), (0, 1)].into_iter().enumerate() {
            d_y[l][x3] = kl_unchecked(ch.y_row(x1, x2, x3), ch.y_row(0, 0, x3))
                .finite()
                .ok_or_else(|| Error::AbsoluteContinuity(format!("Y, user {}, x3={x3}", l + 1)))?;
            d_z[l][x3] = kl_unchecked(ch.z_row(x1, x2, x3), ch.z_row(0, 0, x3))
                .finite()
                .ok_or_else(|| Error::AbsoluteContinuity(format!("Z, user {}, x3={x3}", l + 1)))?;
        }
        d_y12.push(kl_unchecked(ch.y_row(1, 1, x3), ch.y_row(0, 0, x3)));
        d_z12.push(kl_unchecked(ch.z_row(1, 1, x3), ch.z_row(0, 0, x3)));
    }
    Ok(DivergenceProfile { d_y, d_z, d_y12, d_z12 })
}

/// Sum of `v(z)²/g(z)`, treating `0²/0` as 0.
pub(crate) fn chi_sum(v: impl Iterator<Item = f64>, g: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for (d, &b) in v.zip(g) {
        if b > 0.0 {
            s += d * d / b;
        } else if d != 0.0 {
            return Err(Error::AbsoluteContinuity(
                "mixture puts mass where the idle warden row has none".into(),
            ));
        }
    }
    Ok(s)
}

/// χ² distance between the (ρ1, ρ2)-weighted mixture of the single-user warden
/// rows and the idle warden row at `x3`. Depends on ρ only through ρ1/(ρ1+ρ2).
pub fn chi2_mixture(rho1: f64, rho2: f64, x3: usize, ch: &Dmmac) -> Result<f64> {
    if !(rho1 >= 0.0 && rho2 >= 0.0) {
        return Err(Error::InvalidParams(format!("negative intensity ({rho1}, {rho2})")));
    }
    let s = rho1 + rho2;
    if !(s > 0.0) {
        return Err(Error::InvalidParams("both intensities are zero".into()));
    }
    let (a1, a2) = (rho1 / s, rho2 / s);
    let g10 = ch.z_row(1, 0, x3);
    let g01 = ch.z_row(0, 1, x3);
    let g00 = ch.z_row(0, 0, x3);
    chi_sum((0..g00.len()).map(|z| a1 * g10[z] + a2 * g01[z] - g00[z]), g00)
}

/// (ρ1+ρ2)²·χ²(ρ1,ρ2,x3) written as a quadratic form; defined (as 0) at ρ = 0.
pub fn chi2_mass(rho1: f64, rho2: f64, x3: usize, ch: &Dmmac) -> Result<f64> {
    let g10 = ch.z_row(1, 0, x3);
    let g01 = ch.z_row(0, 1, x3);
    let g00 = ch.z_row(0, 0, x3);
    chi_sum(
        (0..g00.len()).map(|z| rho1 * (g10[z] - g00[z]) + rho2 * (g01[z] - g00[z])),
        g00,
    )
}

fn check_psi(psi: &[Vec<f64>], ch: &GeneralMac) -> Result<()> {
    if psi.len() != ch.l_c() {
        return Err(Error::InvalidParams(format!(
            "{} symbol pmfs for {} covert users",
            psi.len(),
            ch.l_c()
        )));
    }
    for (l, p) in psi.iter().enumerate() {
        if p.len() != ch.covert_sizes()[l] - 1 {
            return Err(Error::InvalidParams(format!(
                "user {} symbol pmf has {} entries, alphabet needs {}",
                l + 1,
                p.len(),
                ch.covert_sizes()[l] - 1
            )));
        }
        let s: f64 = p.iter().sum();
        if p.iter().any(|v| !(*v >= 0.0)) || (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("user {} symbol pmf is not a pmf", l + 1)));
        }
    }
    Ok(())
}

/// χ² of the ρ-weighted mixture of ψ-averaged single-user warden rows against
/// the idle row, for the general MAC at non-covert tuple index `nc`.
pub fn chi2_general(rho: &[f64], psi: &[Vec<f64>], nc: usize, ch: &GeneralMac) -> Result<f64> {
    check_psi(psi, ch)?;
    if rho.len() != ch.l_c() || rho.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidParams("intensities must be one nonnegative value per covert user".into()));
    }
    let norm: f64 = rho.iter().sum();
    if !(norm > 0.0) {
        return Err(Error::InvalidParams("all intensities are zero".into()));
    }
    let idle = vec![0; ch.l_c()];
    let g00 = ch.z_row(&idle, nc);
    let mut mix = vec![0.0; ch.z_size()];
    let mut first = true;
    for l in 0..ch.l_c() {
        let a = rho[l] / norm;
        for (k, &w) in psi[l].iter().enumerate() {
            let row = ch.z_row(&ch.unit_input(l, k + 1), nc);
            for (m, &g) in mix.iter_mut().zip(row) {
                let term = a * (w * g);
                if first {
                    *m = term;
                } else {
                    *m += term;
                }
            }
            first = false;
        }
    }
    chi_sum(mix.iter().zip(g00).map(|(m, g)| m - g), g00)
}

/// Phase law P_T with a conditional law of the non-covert input per phase
/// (X3 for the three-user MAC, the flattened non-covert tuple otherwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointInputLaw {
    pub p_t: Vec<f64>,
    pub p_x_given_t: Vec<Vec<f64>>,
}

pub(crate) const PMF_TOL: f64 = 1e-9;

fn check_pmf(name: &str, p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().sum();
    if p.iter().any(|v| !(*v >= 0.0)) || (s - 1.0).abs() > PMF_TOL {
        return Err(Error::InvalidParams(format!("{name} is not a pmf (sum {s})")));
    }
    Ok(())
}

impl JointInputLaw {
    /// One phase with input law `p`.
    pub fn single(p: Vec<f64>) -> Self {
        Self { p_t: vec![1.0], p_x_given_t: vec![p] }
    }

    pub fn phases(&self) -> usize {
        self.p_t.len()
    }

    /// Product law from per-user marginals `marginals[t][j]` over the mixed-radix tuple.
    pub fn product(p_t: Vec<f64>, marginals: &[Vec<Vec<f64>>]) -> Self {
        let p_x_given_t = marginals
            .iter()
            .map(|users| {
                users.iter().fold(vec![1.0], |acc, m| {
                    acc.iter().flat_map(|a| m.iter().map(move |b| a * b)).collect()
                })
            })
            .collect();
        Self { p_t, p_x_given_t }
    }

    pub fn validate(&self, x_size: usize) -> Result<()> {
        if self.p_t.is_empty() || self.p_x_given_t.len() != self.p_t.len() {
            return Err(Error::InvalidParams("phase law and conditional laws disagree in length".into()));
        }
        check_pmf("P_T", &self.p_t)?;
        for (t, p) in self.p_x_given_t.iter().enumerate() {
            if p.len() != x_size {
                return Err(Error::InvalidParams(format!(
                    "phase {t} input law has {} entries, alphabet has {x_size}",
                    p.len()
                )));
            }
            check_pmf(&format!("input law of phase {t}"), p)?;
        }
        Ok(())
    }
}

/// I(X3;Y | X1=0, X2=0, T) on the three-user MAC.
pub fn cond_mi_x3(joint: &JointInputLaw, ch: &Dmmac) -> Result<f64> {
    joint.validate(ch.x3_size())?;
    Ok(cond_mi_rows(joint, &idle_y_rows(ch)))
}

pub(crate) fn idle_y_rows(ch: &Dmmac) -> Vec<&[f64]> {
    (0..ch.x3_size()).map(|x3| ch.y_row(0, 0, x3)).collect()
}

pub(crate) fn cond_mi_rows(joint: &JointInputLaw, rows: &[&[f64]]) -> f64 {
    joint
        .p_t
        .iter()
        .zip(&joint.p_x_given_t)
        .filter(|(pt, _)| **pt > 0.0)
        .map(|(pt, p)| pt * mutual_information(p, rows))
        .sum()
}

/// Table of I(X_J; Y | X_c = 0, X_{Jᶜ}, T) for every subset J of non-covert users.
pub fn cond_mi_table(joint: &JointInputLaw, ch: &GeneralMac) -> Result<Polymatroid> {
    joint.validate(ch.nc_count())?;
    Ok(polymatroid::mi_table(joint, ch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::reference::reference_mac;

    #[test]
    fn kl_two_letter_value() {
        // 0.5 ln 2 + 0.5 ln(2/3)
        let want = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        let got = kl(&[0.5, 0.5], &[0.25, 0.75]).unwrap().finite().unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.143841036225890).abs() < 1e-12);
    }

    #[test]
    fn kl_edge_cases() {
        assert_eq!(kl(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), Divergence::Finite(0.0));
        assert_eq!(kl(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), Divergence::Infinite);
        assert_eq!(kl(&[0.0, 1.0], &[0.5, 0.5]).unwrap(), Divergence::Finite(2f64.ln()));
        assert!(kl(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn profile_of_reference_channel() {
        let p = divergence_profile(&reference_mac()).unwrap();
        let expect = [[0.848697, 0.613910], [0.611278, 0.493721]];
        let expect_z = [[0.815925, 0.378001], [2.008246, 0.274574]];
        for l in 0..2 {
            for x3 in 0..2 {
                assert!((p.d_y[l][x3] - expect[l][x3]).abs() < 1e-6);
                assert!((p.d_z[l][x3] - expect_z[l][x3]).abs() < 1e-6);
            }
        }
        assert!(p.d_y12.iter().chain(&p.d_z12).all(|d| !d.is_infinite()));
    }

    #[test]
    fn chi2_single_user_reduction() {
        let ch = reference_mac();
        for x3 in 0..2 {
            let g1 = ch.z_row(1, 0, x3);
            let g0 = ch.z_row(0, 0, x3);
            let want: f64 = g1.iter().zip(g0).map(|(a, b)| (a - b) * (a - b) / b).sum();
            let got = chi2_mixture(0.37, 0.0, x3, &ch).unwrap();
            assert!((got - want).abs() < 1e-14);
        }
        assert!(chi2_mixture(0.0, 0.0, 0, &ch).is_err());
    }

    #[test]
    fn chi2_mass_matches_scaled_distance() {
        let ch = reference_mac();
        let (r1, r2) = (0.3, 1.7);
        let m = chi2_mass(r1, r2, 1, &ch).unwrap();
        let c = chi2_mixture(r1, r2, 1, &ch).unwrap();
        assert!((m - (r1 + r2) * (r1 + r2) * c).abs() < 1e-12);
        assert_eq!(chi2_mass(0.0, 0.0, 1, &ch).unwrap(), 0.0);
    }

    #[test]
    fn cond_mi_degenerate_is_zero() {
        let ch = reference_mac();
        let j = JointInputLaw { p_t: vec![0.4, 0.6], p_x_given_t: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert_eq!(cond_mi_x3(&j, &ch).unwrap(), 0.0);
    }

    #[test]
    fn mutual_information_of_noiseless_bit() {
        let w: [&[f64]; 2] = [&[1.0, 0.0], &[0.0, 1.0]];
        assert!((mutual_information(&[0.5, 0.5], &w) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn product_law_flattens_mixed_radix() {
        let j = JointInputLaw::product(vec![1.0], &[vec![vec![0.25, 0.75], vec![0.5, 0.3, 0.2]]]);
        let want = [0.125, 0.075, 0.05, 0.375, 0.225, 0.15];
        for (a, b) in j.p_x_given_t[0].iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
