use super::{DmicChannel, Dmmac, GeneralMac};
use serde::Serialize;
use std::fmt;

/// Gap below which two warden rows count as identical.
pub const DISTINCT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// A covert user's row puts mass where the idle row has none.
    Support,
    /// A covert user's warden row equals the idle row.
    Distinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observer {
    Y,
    Y1,
    Y2,
    Z,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub observer: Observer,
    /// Covert user, counted from 1.
    pub user: usize,
    /// Non-idle covert symbol of that user.
    pub symbol: usize,
    /// Non-covert input (x3 for the three-user MAC, the tuple otherwise).
    pub context: Vec<usize>,
    /// Offending output letter for support violations.
    pub output: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.condition {
            Condition::Support => write!(
                f,
                "{:?}: user {} symbol {} at context {:?} reaches output {} outside the idle support",
                self.observer,
                self.user,
                self.symbol,
                self.context,
                self.output.unwrap_or(0)
            ),
            Condition::Distinct => write!(
                f,
                "{:?}: user {} symbol {} at context {:?} is indistinguishable from idle",
                self.observer, self.user, self.symbol, self.context
            ),
        }
    }
}

/// Every regularity violation found on a channel; empty means admissible.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when all violations are of the distinctness kind, so every
    /// divergence between a covert row and the idle row is finite.
    pub fn supports_ok(&self) -> bool {
        self.violations.iter().all(|v| v.condition != Condition::Support)
    }
}

fn check_pair(
    out: &mut Vec<Violation>,
    observer: Observer,
    user: usize,
    symbol: usize,
    context: &[usize],
    row: &[f64],
    base: &[f64],
    distinct: bool,
) {
    for (k, (&p, &q)) in row.iter().zip(base).enumerate() {
        if p > 0.0 && q == 0.0 {
            out.push(Violation {
                condition: Condition::Support,
                observer,
                user,
                symbol,
                context: context.to_vec(),
                output: Some(k),
            });
        }
    }
    if distinct {
        let gap = row.iter().zip(base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if gap <= DISTINCT_TOL {
            out.push(Violation {
                condition: Condition::Distinct,
                observer,
                user,
                symbol,
                context: context.to_vec(),
                output: None,
            });
        }
    }
}

fn dmmac_into(ch: &Dmmac, y_obs: Observer, with_z: bool, out: &mut Vec<Violation>) {
    for x3 in 0..ch.x3_size() {
        for (user, (x1, x2)) in [(1, (1, 0)), (2, (0, 1))] {
            check_pair(out, y_obs, user, 1, &[x3], ch.y_row(x1, x2, x3), ch.y_row(0, 0, x3), false);
            if with_z {
                check_pair(
                    out,
                    Observer::Z,
                    user,
                    1,
                    &[x3],
                    ch.z_row(x1, x2, x3),
                    ch.z_row(0, 0, x3),
                    true,
                );
            }
        }
    }
}

pub(super) fn validate_dmmac(ch: &Dmmac) -> ValidationReport {
    let mut v = Vec::new();
    dmmac_into(ch, Observer::Y, true, &mut v);
    ValidationReport { violations: v }
}

pub(super) fn validate_dmic(ch: &DmicChannel) -> ValidationReport {
    let mut v = Vec::new();
    dmmac_into(ch.receiver(1), Observer::Y1, true, &mut v);
    dmmac_into(ch.receiver(2), Observer::Y2, false, &mut v);
    ValidationReport { violations: v }
}

pub(super) fn validate_general(ch: &GeneralMac) -> ValidationReport {
    let mut v = Vec::new();
    let idle = vec![0; ch.l_c()];
    for nc in 0..ch.nc_count() {
        let ctx = ch.nc_tuple(nc);
        for l in 0..ch.l_c() {
            for x in 1..ch.covert_sizes()[l] {
                let input = ch.unit_input(l, x);
                check_pair(
                    &mut v,
                    Observer::Y,
                    l + 1,
                    x,
                    &ctx,
                    ch.y_row(&input, nc),
                    ch.y_row(&idle, nc),
                    false,
                );
                check_pair(
                    &mut v,
                    Observer::Z,
                    l + 1,
                    x,
                    &ctx,
                    ch.z_row(&input, nc),
                    ch.z_row(&idle, nc),
                    true,
                );
            }
        }
    }
    ValidationReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::super::reference::reference_mac;
    use super::*;

    #[test]
    fn reference_channel_is_admissible() {
        assert!(reference_mac().validate().is_admissible());
    }

    #[test]
    fn identical_warden_rows_are_flagged() {
        let ch = reference_mac();
        let mut gz = ch.gamma_z().to_vec();
        let w = ch.z_size();
        for x3 in 0..2 {
            let base: Vec<f64> = ch.z_row(0, 0, x3).to_vec();
            let r = (2 * 1 + 0) * 2 + x3;
            gz[r * w..(r + 1) * w].copy_from_slice(&base);
        }
        let bad = Dmmac::new(2, 6, 6, ch.gamma_y().to_vec(), gz).unwrap();
        let rep = bad.validate();
        assert_eq!(rep.violations.len(), 2);
        assert!(rep
            .violations
            .iter()
            .all(|v| v.condition == Condition::Distinct && v.user == 1 && v.observer == Observer::Z));
    }

    #[test]
    fn support_violation_reports_location() {
        // Y row (0,0,x3=1) has a structural zero at y=2 that user 1 reaches.
        let gy = vec![
            0.5, 0.5, 0.0, // (0,0,0)
            0.5, 0.5, 0.0, // (0,0,1)
            0.5, 0.5, 0.0, // (0,1,0)
            0.5, 0.5, 0.0, // (0,1,1)
            0.4, 0.6, 0.0, // (1,0,0)
            0.4, 0.3, 0.3, // (1,0,1)
            0.5, 0.5, 0.0, // (1,1,0)
            0.5, 0.5, 0.0, // (1,1,1)
        ];
        let gz = vec![
            0.5, 0.5, 0.3, 0.7, 0.2, 0.8, 0.2, 0.8, 0.6, 0.4, 0.7, 0.3, 0.1, 0.9, 0.1, 0.9,
        ];
        let ch = Dmmac::new(2, 3, 2, gy, gz).unwrap();
        let rep = ch.validate();
        assert_eq!(rep.violations.len(), 1);
        let v = &rep.violations[0];
        assert_eq!((v.condition, v.observer, v.user), (Condition::Support, Observer::Y, 1));
        assert_eq!((v.context.clone(), v.output), (vec![1], Some(2)));
        assert!(!rep.supports_ok());
    }
}
