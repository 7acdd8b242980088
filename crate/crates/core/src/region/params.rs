use crate::error::{Error, Result};
use crate::infodiv::JointInputLaw;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Existential parameters of the region: phase and non-covert input laws,
/// per-phase covert intensities, the fractions β and (for non-binary covert
/// alphabets) per-phase symbol pmfs ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovertParams {
    pub joint: JointInputLaw,
    /// `rho[t][l]`, intensity of covert user `l` in phase `t`.
    pub rho: Vec<Vec<f64>>,
    /// Fraction per covert user, in [0, 1].
    pub beta: Vec<f64>,
    /// `psi[t][l][x - 1]`, pmf of user `l` over its non-idle symbols in phase `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<Vec<Vec<f64>>>>,
}

impl CovertParams {
    /// Single phase, three-user MAC shape.
    pub fn single(p_x3: Vec<f64>, rho: [f64; 2], beta: [f64; 2]) -> Self {
        Self {
            joint: JointInputLaw::single(p_x3),
            rho: vec![rho.to_vec()],
            beta: beta.to_vec(),
            psi: None,
        }
    }

    pub fn phases(&self) -> usize {
        self.joint.p_t.len()
    }

    /// Checks shapes and ranges against `covert` users and an input alphabet of `x_size`.
    pub fn validate(&self, covert_sizes: &[usize], x_size: usize) -> Result<()> {
        let lc = covert_sizes.len();
        self.joint.validate(x_size)?;
        if self.rho.len() != self.phases() || self.rho.iter().any(|r| r.len() != lc) {
            return Err(Error::InvalidParams(format!(
                "intensities must be {} phases by {lc} users",
                self.phases()
            )));
        }
        if self.rho.iter().flatten().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParams("intensities must be finite and nonnegative".into()));
        }
        if self.beta.len() != lc || self.beta.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::InvalidParams(format!("need {lc} fractions in [0, 1]")));
        }
        let needs_psi = covert_sizes.iter().any(|&s| s > 2);
        match &self.psi {
            None if needs_psi => {
                return Err(Error::InvalidParams("non-binary covert alphabet needs symbol pmfs".into()))
            }
            Some(psi) => {
                if psi.len() != self.phases() {
                    return Err(Error::InvalidParams("symbol pmfs need one entry per phase".into()));
                }
                for (t, users) in psi.iter().enumerate() {
                    if users.len() != lc {
                        return Err(Error::InvalidParams(format!("phase {t}: symbol pmfs for {} users", users.len())));
                    }
                    for (l, p) in users.iter().enumerate() {
                        let s: f64 = p.iter().sum();
                        if p.len() != covert_sizes[l] - 1 || p.iter().any(|v| !(*v >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                            return Err(Error::InvalidParams(format!("phase {t}, user {}: bad symbol pmf", l + 1)));
                        }
                    }
                }
            }
            None => {}
        }
        Ok(())
    }

    /// Symbol pmf of user `l` in phase `t` (`[1.0]` for binary users without ψ).
    pub fn psi_of(&self, t: usize, l: usize) -> &[f64] {
        match &self.psi {
            Some(p) => &p[t][l],
            None => &[1.0],
        }
    }

    /// Flattened parameter vector used for deterministic tie-breaking.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.joint.p_t.clone();
        v.extend(self.joint.p_x_given_t.iter().flatten());
        v.extend(self.rho.iter().flatten());
        v.extend(&self.beta);
        if let Some(p) = &self.psi {
            v.extend(p.iter().flatten().flatten());
        }
        v
    }
}

/// Covert rates and keys (nats per √(n·δ̄ₙ)) and non-covert rates (nats per use).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateKeyTuple {
    pub r: Vec<f64>,
    pub r_nc: Vec<f64>,
    /// Key rates needed, clamped at 0.
    pub k: Vec<f64>,
    /// Key requirement before clamping; negative means the channel to the
    /// receiver is better than the one to the warden.
    pub k_signed: Vec<f64>,
}

impl RateKeyTuple {
    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Covert(l) => self.r[l],
            Axis::NonCovert(j) => self.r_nc[j],
        }
    }
}

/// A rate coordinate: covert user `l` or non-covert user `j` (both from 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Covert(usize),
    NonCovert(usize),
}

impl Axis {
    /// Parses `r1`, `r2`, … for covert users and `R3`, … for non-covert users,
    /// numbering all users consecutively from 1 with `lc` covert users first.
    pub fn parse(s: &str, lc: usize) -> Result<Axis> {
        let bad = || Error::InvalidParams(format!("unknown rate axis `{s}`"));
        let (head, num) = s.split_at(1);
        let i: usize = num.parse().map_err(|_| bad())?;
        match head {
            "r" if (1..=lc).contains(&i) => Ok(Axis::Covert(i - 1)),
            "R" if i > lc => Ok(Axis::NonCovert(i - lc - 1)),
            _ => Err(bad()),
        }
    }

    pub fn name(self, lc: usize) -> String {
        match self {
            Axis::Covert(l) => format!("r{}", l + 1),
            Axis::NonCovert(j) => format!("R{}", lc + j + 1),
        }
    }

    pub(crate) fn weight_index(self, lc: usize) -> usize {
        match self {
            Axis::Covert(l) => l,
            Axis::NonCovert(j) => lc + j,
        }
    }
}

/// A lower bound on one rate (for covert rates it is met with equality).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedRate {
    pub axis: Axis,
    pub value: f64,
}

impl fmt::Display for FixedRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} = {}", self.axis, self.value)
    }
}

/// Weighted rate objective with key budgets and fixed-rate constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    /// Covert users first, then non-covert users.
    pub weights: Vec<f64>,
    /// Upper bound on each covert user's key rate (`f64::INFINITY` for none).
    pub key_budgets: Vec<f64>,
    pub fixed: Vec<FixedRate>,
}

impl RegionQuery {
    /// Query for the three-user MAC with weights on (r1, r2, R3).
    pub fn mac(weights: [f64; 3], budgets: [f64; 2]) -> Self {
        Self { weights: weights.to_vec(), key_budgets: budgets.to_vec(), fixed: vec![] }
    }

    pub fn with_fixed(mut self, axis: Axis, value: f64) -> Self {
        self.fixed.push(FixedRate { axis, value });
        self
    }

    pub fn validate(&self, lc: usize, lnc: usize) -> Result<()> {
        if self.weights.len() != lc + lnc {
            return Err(Error::InvalidParams(format!(
                "{} weights for {} rate axes",
                self.weights.len(),
                lc + lnc
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParams("weights must be finite and nonnegative".into()));
        }
        if self.weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidParams("at least one weight must be positive".into()));
        }
        if self.key_budgets.len() != lc {
            return Err(Error::InvalidParams(format!("need {lc} key budgets")));
        }
        if let Some(b) = self.key_budgets.iter().find(|b| b.is_nan() || **b < 0.0) {
            return Err(Error::Infeasible(format!("key budget {b} is negative")));
        }
        for f in &self.fixed {
            let ok = match f.axis {
                Axis::Covert(l) => l < lc,
                Axis::NonCovert(j) => j < lnc,
            };
            if !ok {
                return Err(Error::InvalidParams(format!("fixed rate on unknown axis {:?}", f.axis)));
            }
            if !(f.value >= 0.0) || !f.value.is_finite() {
                return Err(Error::Infeasible(format!("fixed rate {} is not a nonnegative number", f.value)));
            }
        }
        Ok(())
    }
}
