//! Evaluation of the region expressions for each channel shape.

use super::params::{CovertParams, RateKeyTuple};
use crate::channel::{DmicChannel, Dmmac, GeneralMac};
use crate::error::{Error, Result};
use crate::infodiv::{self, kl_unchecked, mutual_information, Polymatroid};
use std::f64::consts::SQRT_2;

/// Non-covert part of a region evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum NcTerms {
    /// One non-covert user: the largest rate.
    Single(f64),
    /// Several non-covert users: subset-sum bounds.
    Table(Polymatroid),
}

/// The three expectations behind a region corner, before β is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTerms {
    /// E[ρℓ,T · D_Y^(ℓ)] per covert user.
    pub rate_num: Vec<f64>,
    /// E[ρℓ,T · (D_Z^(ℓ) − D_Y^(ℓ))] per covert user.
    pub key_num: Vec<f64>,
    /// E[‖ρ_T‖₁² · χ²(ρ_T, ·)].
    pub mass: f64,
    pub nc: NcTerms,
    /// Some phase with positive probability has a nonzero intensity.
    pub active: bool,
}

impl RegionTerms {
    /// Rate and key factors √2·num/√mass per user (rate, signed key).
    pub fn factors(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if !self.active {
            return Err(Error::ZeroDenominator);
        }
        if self.mass <= 0.0 {
            if self.rate_num.iter().chain(&self.key_num).all(|v| *v == 0.0) {
                let z = vec![0.0; self.rate_num.len()];
                return Ok((z.clone(), z));
            }
            return Err(Error::Unbounded);
        }
        let s = SQRT_2 / self.mass.sqrt();
        Ok((
            self.rate_num.iter().map(|a| a * s).collect(),
            self.key_num.iter().map(|b| b * s).collect(),
        ))
    }

    pub fn nc_rates(&self) -> Vec<f64> {
        match &self.nc {
            NcTerms::Single(i) => vec![*i],
            NcTerms::Table(p) => p.greedy(&vec![0.0; p.users]).1,
        }
    }

    pub fn tuple(&self, beta: &[f64]) -> Result<RateKeyTuple> {
        let (fr, fk) = self.factors()?;
        let r: Vec<f64> = fr.iter().zip(beta).map(|(f, b)| b * f).collect();
        let k_signed: Vec<f64> = fk.iter().zip(beta).map(|(f, b)| b * f).collect();
        Ok(RateKeyTuple {
            r,
            r_nc: self.nc_rates(),
            k: k_signed.iter().map(|v| v.max(0.0)).collect(),
            k_signed,
        })
    }
}

/// A channel shape whose region can be evaluated from [`CovertParams`].
pub trait RegionModel: Sync {
    fn covert_sizes(&self) -> Vec<usize>;
    /// Alphabet sizes of the non-covert users.
    fn nc_sizes(&self) -> Vec<usize>;
    /// Phase count that suffices for the whole region.
    fn default_phases(&self) -> usize;
    /// Evaluation without shape checks; `params` must fit the model.
    fn raw_terms(&self, params: &CovertParams) -> RegionTerms;

    fn covert_users(&self) -> usize {
        self.covert_sizes().len()
    }

    fn nc_count(&self) -> usize {
        self.nc_sizes().iter().product()
    }

    fn terms(&self, params: &CovertParams) -> Result<RegionTerms> {
        params.validate(&self.covert_sizes(), self.nc_count())?;
        Ok(self.raw_terms(params))
    }

    fn corner(&self, params: &CovertParams) -> Result<RateKeyTuple> {
        self.terms(params)?.tuple(&params.beta)
    }
}

fn any_active(params: &CovertParams) -> bool {
    params
        .joint
        .p_t
        .iter()
        .zip(&params.rho)
        .any(|(pt, r)| *pt > 0.0 && r.iter().any(|v| *v > 0.0))
}

/// Precomputed divergences and warden deviations of a three-user MAC.
#[derive(Debug, Clone)]
pub struct MacModel<'a> {
    ch: &'a Dmmac,
    d_y: [Vec<f64>; 2],
    d_key: [Vec<f64>; 2],
    /// `delta[l][x3][z]` = Γ_Z(z|e_l,x3) − Γ_Z(z|0,0,x3).
    delta: [Vec<Vec<f64>>; 2],
    /// 1/Γ_Z(z|0,0,x3), 0 where the idle row vanishes.
    inv_idle: Vec<Vec<f64>>,
    idle_y: Vec<&'a [f64]>,
}

impl<'a> MacModel<'a> {
    /// Fails if a single-user row escapes the idle support (infinite divergence).
    pub fn new(ch: &'a Dmmac) -> Result<Self> {
        let prof = infodiv::divergence_profile(ch)?;
        let n = ch.x3_size();
        let d_key = [0, 1].map(|l| (0..n).map(|x| prof.d_z[l][x] - prof.d_y[l][x]).collect());
        let delta = [(1, 0), (0, 1)].map(|(a, b)| {
            (0..n)
                .map(|x3| {
                    ch.z_row(a, b, x3).iter().zip(ch.z_row(0, 0, x3)).map(|(p, q)| p - q).collect()
                })
                .collect()
        });
        let inv_idle = (0..n)
            .map(|x3| ch.z_row(0, 0, x3).iter().map(|&q| if q > 0.0 { 1.0 / q } else { 0.0 }).collect())
            .collect();
        Ok(Self { ch, d_y: prof.d_y, d_key, delta, inv_idle, idle_y: infodiv::idle_y_rows(ch) })
    }

    pub fn channel(&self) -> &Dmmac {
        self.ch
    }

    /// Covert expectations without the non-covert part.
    fn covert_terms(&self, params: &CovertParams) -> ([f64; 2], [f64; 2], f64) {
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        let mut mass = 0.0;
        for ((pt, px), rho) in params.joint.p_t.iter().zip(&params.joint.p_x_given_t).zip(&params.rho) {
            if *pt <= 0.0 {
                continue;
            }
            let (r1, r2) = (rho[0], rho[1]);
            for (x3, &q) in px.iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                let w = pt * q;
                a[0] += w * r1 * self.d_y[0][x3];
                a[1] += w * r2 * self.d_y[1][x3];
                b[0] += w * r1 * self.d_key[0][x3];
                b[1] += w * r2 * self.d_key[1][x3];
                let (d1, d2, ig) = (&self.delta[0][x3], &self.delta[1][x3], &self.inv_idle[x3]);
                let mut s = 0.0;
                for z in 0..ig.len() {
                    let v = r1 * d1[z] + r2 * d2[z];
                    s += v * v * ig[z];
                }
                mass += w * s;
            }
        }
        (a, b, mass)
    }

    fn nc_info(&self, params: &CovertParams) -> f64 {
        params
            .joint
            .p_t
            .iter()
            .zip(&params.joint.p_x_given_t)
            .filter(|(pt, _)| **pt > 0.0)
            .map(|(pt, px)| pt * mutual_information(px, &self.idle_y))
            .sum()
    }
}

impl RegionModel for MacModel<'_> {
    fn covert_sizes(&self) -> Vec<usize> {
        vec![2, 2]
    }

    fn nc_sizes(&self) -> Vec<usize> {
        vec![self.ch.x3_size()]
    }

    fn default_phases(&self) -> usize {
        6
    }

    fn raw_terms(&self, params: &CovertParams) -> RegionTerms {
        let (a, b, mass) = self.covert_terms(params);
        RegionTerms {
            rate_num: a.to_vec(),
            key_num: b.to_vec(),
            mass,
            nc: NcTerms::Single(self.nc_info(params)),
            active: any_active(params),
        }
    }
}

/// Interference channel: each covert user is decoded at its own receiver and
/// the non-covert message at both.
#[derive(Debug, Clone)]
pub struct IcModel<'a> {
    rx: [MacModel<'a>; 2],
}

impl<'a> IcModel<'a> {
    pub fn new(ch: &'a DmicChannel) -> Result<Self> {
        Ok(Self { rx: [MacModel::new(ch.receiver(1))?, MacModel::new(ch.receiver(2))?] })
    }
}

impl RegionModel for IcModel<'_> {
    fn covert_sizes(&self) -> Vec<usize> {
        vec![2, 2]
    }

    fn nc_sizes(&self) -> Vec<usize> {
        vec![self.rx[0].ch.x3_size()]
    }

    fn default_phases(&self) -> usize {
        7
    }

    fn raw_terms(&self, params: &CovertParams) -> RegionTerms {
        let (a1, b1, mass) = self.rx[0].covert_terms(params);
        let (a2, b2, _) = self.rx[1].covert_terms(params);
        let i = self.rx[0].nc_info(params).min(self.rx[1].nc_info(params));
        RegionTerms {
            rate_num: vec![a1[0], a2[1]],
            key_num: vec![b1[0], b2[1]],
            mass,
            nc: NcTerms::Single(i),
            active: any_active(params),
        }
    }
}

/// General MAC with arbitrary covert alphabets.
#[derive(Debug, Clone)]
pub struct GeneralModel<'a> {
    ch: &'a GeneralMac,
    /// `d_y[l][nc][x-1]`.
    d_y: Vec<Vec<Vec<f64>>>,
    d_key: Vec<Vec<Vec<f64>>>,
    /// `delta[l][nc][x-1][z]`.
    delta: Vec<Vec<Vec<Vec<f64>>>>,
    inv_idle: Vec<Vec<f64>>,
}

impl<'a> GeneralModel<'a> {
    pub fn new(ch: &'a GeneralMac) -> Result<Self> {
        let idle = vec![0; ch.l_c()];
        let mut d_y = vec![vec![]; ch.l_c()];
        let mut d_key = vec![vec![]; ch.l_c()];
        let mut delta = vec![vec![]; ch.l_c()];
        for l in 0..ch.l_c() {
            for nc in 0..ch.nc_count() {
                let (mut dy, mut dk, mut dl) = (vec![], vec![], vec![]);
                for x in 1..ch.covert_sizes()[l] {
                    let input = ch.unit_input(l, x);
                    let fy = kl_unchecked(ch.y_row(&input, nc), ch.y_row(&idle, nc));
                    let fz = kl_unchecked(ch.z_row(&input, nc), ch.z_row(&idle, nc));
                    let (Some(fy), Some(fz)) = (fy.finite(), fz.finite()) else {
                        return Err(Error::AbsoluteContinuity(format!(
                            "user {} symbol {x} at non-covert input {:?}",
                            l + 1,
                            ch.nc_tuple(nc)
                        )));
                    };
                    dy.push(fy);
                    dk.push(fz - fy);
                    dl.push(
                        ch.z_row(&input, nc).iter().zip(ch.z_row(&idle, nc)).map(|(p, q)| p - q).collect(),
                    );
                }
                d_y[l].push(dy);
                d_key[l].push(dk);
                delta[l].push(dl);
            }
        }
        let inv_idle = (0..ch.nc_count())
            .map(|nc| ch.z_row(&idle, nc).iter().map(|&q| if q > 0.0 { 1.0 / q } else { 0.0 }).collect())
            .collect();
        Ok(Self { ch, d_y, d_key, delta, inv_idle })
    }
}

impl RegionModel for GeneralModel<'_> {
    fn covert_sizes(&self) -> Vec<usize> {
        self.ch.covert_sizes().to_vec()
    }

    fn nc_sizes(&self) -> Vec<usize> {
        self.ch.nc_sizes().to_vec()
    }

    fn default_phases(&self) -> usize {
        self.ch.l_c() + self.ch.l_nc() + self.ch.l_c() + 1
    }

    fn raw_terms(&self, params: &CovertParams) -> RegionTerms {
        let lc = self.ch.l_c();
        let mut a = vec![0.0; lc];
        let mut b = vec![0.0; lc];
        let mut mass = 0.0;
        let mut v = vec![0.0; self.ch.z_size()];
        for (t, ((pt, px), rho)) in
            params.joint.p_t.iter().zip(&params.joint.p_x_given_t).zip(&params.rho).enumerate()
        {
            if *pt <= 0.0 {
                continue;
            }
            for (nc, &q) in px.iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                let w = pt * q;
                v.iter_mut().for_each(|e| *e = 0.0);
                for l in 0..lc {
                    let psi = params.psi_of(t, l);
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for (x, &ps) in psi.iter().enumerate() {
                        sa += ps * self.d_y[l][nc][x];
                        sb += ps * self.d_key[l][nc][x];
                        let c = rho[l] * ps;
                        for (e, d) in v.iter_mut().zip(&self.delta[l][nc][x]) {
                            *e += c * d;
                        }
                    }
                    a[l] += w * rho[l] * sa;
                    b[l] += w * rho[l] * sb;
                }
                mass += w * v.iter().zip(&self.inv_idle[nc]).map(|(e, g)| e * e * g).sum::<f64>();
            }
        }
        let table = if self.ch.l_nc() == 0 {
            Polymatroid { users: 0, rank: vec![0.0] }
        } else {
            infodiv::cond_mi_table(&params.joint, self.ch).expect("validated law")
        };
        RegionTerms { rate_num: a, key_num: b, mass, nc: NcTerms::Table(table), active: any_active(params) }
    }
}
