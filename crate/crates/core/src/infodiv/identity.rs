//! Expansion identities of the covert mutual information, used as cross-checks.

use super::{chi2_mixture, kl_unchecked, Divergence};
use crate::channel::Dmmac;
use crate::error::{Error, Result};
use serde::Serialize;

/// Law P_T · P_{X1|T} · P_{X2|T} · P_{X3|T} with binary covert inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizedLaw {
    pub p_t: Vec<f64>,
    /// P(X1 = 1 | T = t).
    pub p1: Vec<f64>,
    /// P(X2 = 1 | T = t).
    pub p2: Vec<f64>,
    pub p_x3_given_t: Vec<Vec<f64>>,
}

impl FactorizedLaw {
    /// Factorizes a joint pmf `joint[t][x1][x2][x3]`; fails if it is not a
    /// product given T (to within `tol`).
    pub fn from_joint(joint: &[[[Vec<f64>; 2]; 2]], tol: f64) -> Result<Self> {
        let mut law = FactorizedLaw { p_t: vec![], p1: vec![], p2: vec![], p_x3_given_t: vec![] };
        for (t, block) in joint.iter().enumerate() {
            let nx3 = block[0][0].len();
            let pt: f64 = block.iter().flatten().flatten().sum();
            let cond = |x1: usize, x2: usize, x3: usize| if pt > 0.0 { block[x1][x2][x3] / pt } else { 0.0 };
            let p1: f64 = (0..2).flat_map(|x2| (0..nx3).map(move |x3| (x2, x3))).map(|(x2, x3)| cond(1, x2, x3)).sum();
            let p2: f64 = (0..2).flat_map(|x1| (0..nx3).map(move |x3| (x1, x3))).map(|(x1, x3)| cond(x1, 1, x3)).sum();
            let p3: Vec<f64> = (0..nx3)
                .map(|x3| (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| cond(a, b, x3)).sum())
                .collect();
            if pt > 0.0 {
                for x1 in 0..2 {
                    for x2 in 0..2 {
                        for x3 in 0..nx3 {
                            let a = if x1 == 1 { p1 } else { 1.0 - p1 };
                            let b = if x2 == 1 { p2 } else { 1.0 - p2 };
                            if (cond(x1, x2, x3) - a * b * p3[x3]).abs() > tol {
                                return Err(Error::InvalidParams(format!(
                                    "joint law does not factorize given T at t={t}, x=({x1},{x2},{x3})"
                                )));
                            }
                        }
                    }
                }
            }
            law.p_t.push(pt);
            law.p1.push(p1);
            law.p2.push(p2);
            law.p_x3_given_t.push(p3);
        }
        Ok(law)
    }
}

/// Worst residuals of the two exact identities over all phases and branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityGap {
    /// For I(X1; Y | X2 = x2, X3, T = t).
    pub user1: f64,
    /// For I(X2; Y | X1 = x1, X3, T = t).
    pub user2: f64,
}

impl IdentityGap {
    pub fn max(&self) -> f64 {
        self.user1.max(self.user2)
    }
}

fn finite(d: Divergence, what: &str) -> Result<f64> {
    d.finite().ok_or_else(|| Error::AbsoluteContinuity(what.to_string()))
}

/// Residual of I(Xℓ;Y|X_other = v, X3, T = t) against
/// Σ_{x} P(Xℓ = x)·E[D(Γ(·|x, v, X3) ‖ Γ(·|0,0,X3))] − E[D(Γ_mix(·|v, X3) ‖ Γ(·|0,0,X3))].
fn branch_residual(ch: &Dmmac, user: usize, p: f64, v: usize, p3: &[f64]) -> Result<f64> {
    let row = |x: usize, x3: usize| if user == 0 { ch.y_row(x, v, x3) } else { ch.y_row(v, x, x3) };
    let px = [1.0 - p, p];
    let mut direct = 0.0;
    let mut rhs = 0.0;
    for (x3, &q3) in p3.iter().enumerate() {
        if q3 == 0.0 {
            continue;
        }
        let mix: Vec<f64> = (0..ch.y_size()).map(|y| px[0] * row(0, x3)[y] + px[1] * row(1, x3)[y]).collect();
        for x in 0..2 {
            if px[x] == 0.0 {
                continue;
            }
            for (y, &g) in row(x, x3).iter().enumerate() {
                if g > 0.0 {
                    direct += q3 * px[x] * g * (g / mix[y]).ln();
                }
            }
            rhs += q3 * px[x] * finite(kl_unchecked(row(x, x3), ch.y_row(0, 0, x3)), "covert row vs idle")?;
        }
        rhs -= q3 * finite(kl_unchecked(&mix, ch.y_row(0, 0, x3)), "mixture vs idle")?;
    }
    Ok((direct - rhs).abs())
}

/// Largest residual of the exact rewriting of the conditional covert mutual
/// information in terms of divergences against the idle output row.
pub fn mi_identity_gap(law: &FactorizedLaw, ch: &Dmmac) -> Result<IdentityGap> {
    let mut gap = IdentityGap { user1: 0.0, user2: 0.0 };
    for t in 0..law.p_t.len() {
        if law.p_t[t] == 0.0 {
            continue;
        }
        let p3 = &law.p_x3_given_t[t];
        for v in 0..2 {
            gap.user1 = gap.user1.max(branch_residual(ch, 0, law.p1[t], v, p3)?);
            gap.user2 = gap.user2.max(branch_residual(ch, 1, law.p2[t], v, p3)?);
        }
    }
    Ok(gap)
}

/// For each phase, the slack `bound − I(X1; Y | X2, X3, T = t)` where
/// `bound = P1(1)·(E[D_Y^(1)(X3)] + P2(1)·E[D(Γ(·|1,1,X3) ‖ Γ(·|0,1,X3))])`.
/// Nonnegative on any law; `+inf` if the correction divergence is infinite.
pub fn mi_upper_bound_slack(law: &FactorizedLaw, ch: &Dmmac) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(law.p_t.len());
    for t in 0..law.p_t.len() {
        let p3 = &law.p_x3_given_t[t];
        let (a, b) = (law.p1[t], law.p2[t]);
        let mut mi = 0.0;
        let mut d1 = 0.0;
        let mut d11 = 0.0;
        for (x3, &q3) in p3.iter().enumerate() {
            if q3 == 0.0 {
                continue;
            }
            for (x2, w2) in [(0, 1.0 - b), (1, b)] {
                if w2 == 0.0 {
                    continue;
                }
                let r0 = ch.y_row(0, x2, x3);
                let r1 = ch.y_row(1, x2, x3);
                for (x1, w1, r) in [(0, 1.0 - a, r0), (1, a, r1)] {
                    let _ = x1;
                    if w1 == 0.0 {
                        continue;
                    }
                    for y in 0..ch.y_size() {
                        let g = r[y];
                        if g > 0.0 {
                            let m = (1.0 - a) * r0[y] + a * r1[y];
                            mi += q3 * w2 * w1 * g * (g / m).ln();
                        }
                    }
                }
            }
            d1 += q3 * finite(kl_unchecked(ch.y_row(1, 0, x3), ch.y_row(0, 0, x3)), "user 1 vs idle")?;
            d11 += q3 * kl_unchecked(ch.y_row(1, 1, x3), ch.y_row(0, 1, x3)).as_f64();
        }
        let correction = if b == 0.0 { 0.0 } else { b * d11 };
        let bound = if a == 0.0 { 0.0 } else { a * (d1 + correction) };
        out.push(bound - mi);
    }
    Ok(out)
}

/// Ratio of D(averaged warden row ‖ idle row) to its second-order expansion
/// ((α1+α2)²/2)·χ²(α1, α2, x3), for Bernoulli(α1), Bernoulli(α2) covert inputs.
pub fn local_div_ratio(alpha1: f64, alpha2: f64, x3: usize, ch: &Dmmac) -> Result<f64> {
    let s = alpha1 + alpha2;
    if !(alpha1 >= 0.0 && alpha2 >= 0.0 && s > 0.0 && s <= 0.2) {
        return Err(Error::InvalidParams(format!("need 0 < α1+α2 ≤ 0.2, got ({alpha1}, {alpha2})")));
    }
    let g00 = ch.z_row(0, 0, x3);
    let g10 = ch.z_row(1, 0, x3);
    let g01 = ch.z_row(0, 1, x3);
    let g11 = ch.z_row(1, 1, x3);
    // KL written with the deviation from the idle row to keep precision at tiny α.
    let mut d = 0.0;
    for z in 0..g00.len() {
        let delta = alpha1 * (1.0 - alpha2) * (g10[z] - g00[z])
            + alpha2 * (1.0 - alpha1) * (g01[z] - g00[z])
            + alpha1 * alpha2 * (g11[z] - g00[z]);
        let q = g00[z];
        if q == 0.0 {
            if delta > 0.0 {
                return Err(Error::AbsoluteContinuity(format!("averaged warden row at x3={x3}, z={z}")));
            }
            continue;
        }
        let p = q + delta;
        if p > 0.0 {
            d += p * (delta / q).ln_1p() - delta;
        } else {
            d += q;
        }
    }
    let chi = chi2_mixture(alpha1, alpha2, x3, ch)?;
    Ok(d / (s * s / 2.0 * chi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::reference::reference_mac;

    fn law(p1: f64, p2: f64, p3: Vec<f64>) -> FactorizedLaw {
        FactorizedLaw { p_t: vec![1.0], p1: vec![p1], p2: vec![p2], p_x3_given_t: vec![p3] }
    }

    #[test]
    fn silent_user_gives_zero_sides() {
        let g = mi_identity_gap(&law(0.0, 0.3, vec![0.4, 0.6]), &reference_mac()).unwrap();
        assert!(g.user1 < 1e-15);
    }

    #[test]
    fn identity_holds_on_both_branches() {
        let g = mi_identity_gap(&law(0.37, 0.61, vec![0.2, 0.8]), &reference_mac()).unwrap();
        assert!(g.max() < 1e-12, "{g:?}");
    }

    #[test]
    fn upper_bound_has_nonnegative_slack() {
        for s in mi_upper_bound_slack(&law(0.2, 0.7, vec![0.5, 0.5]), &reference_mac()).unwrap() {
            assert!(s >= -1e-15);
        }
    }

    #[test]
    fn factorization_check() {
        let l = law(0.3, 0.6, vec![0.25, 0.75]);
        let mut joint = vec![[[vec![0.0; 2], vec![0.0; 2]], [vec![0.0; 2], vec![0.0; 2]]]];
        for x1 in 0..2 {
            for x2 in 0..2 {
                for x3 in 0..2 {
                    let a = if x1 == 1 { 0.3 } else { 0.7 };
                    let b = if x2 == 1 { 0.6 } else { 0.4 };
                    joint[0][x1][x2][x3] = a * b * l.p_x3_given_t[0][x3];
                }
            }
        }
        let f = FactorizedLaw::from_joint(&joint, 1e-12).unwrap();
        assert!((f.p1[0] - 0.3).abs() < 1e-15 && (f.p2[0] - 0.6).abs() < 1e-15);
        joint[0][1][1][0] += 0.01;
        joint[0][0][0][0] -= 0.01;
        assert!(FactorizedLaw::from_joint(&joint, 1e-12).is_err());
    }

    #[test]
    fn local_ratio_approaches_one() {
        let ch = reference_mac();
        for x3 in 0..2 {
            let r3 = local_div_ratio(1e-3, 1e-3, x3, &ch).unwrap();
            let r4 = local_div_ratio(1e-4, 1e-4, x3, &ch).unwrap();
            // the gap to 1 is first order in α: a tenfold smaller α shrinks it about tenfold
            let shrink = (r4 - 1.0).abs() / (r3 - 1.0).abs();
            assert!((0.08..0.12).contains(&shrink), "{r3} {r4}");
            assert!((r3 - 1.0).abs() < 0.03, "{r3}");
            let single = local_div_ratio(1e-4, 0.0, x3, &ch).unwrap();
            assert!((single - 1.0).abs() < 0.01, "{single}");
        }
    }
}
