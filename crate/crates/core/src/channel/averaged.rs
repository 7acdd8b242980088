use super::Dmmac;
use crate::error::{Error, Result};

/// Warden laws of one phase once the covert inputs are averaged out.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedLaws {
    /// Γ⁽ᵗ⁾_{Z|X3}, indexed `[x3][z]`.
    pub z_given_x3: Vec<Vec<f64>>,
    /// Γ⁽ᵗ⁾_{Z|X1X3}, indexed `[x1][x3][z]` (X2 averaged).
    pub z_given_x1x3: [Vec<Vec<f64>>; 2],
    /// Γ⁽ᵗ⁾_{Z|X2X3}, indexed `[x2][x3][z]` (X1 averaged).
    pub z_given_x2x3: [Vec<Vec<f64>>; 2],
}

/// Averages the warden channel over Bernoulli(ρℓₜ·αₙ) covert inputs, per phase.
pub fn averaged_channel(ch: &Dmmac, rho: &[[f64; 2]], alpha_n: f64) -> Result<Vec<AveragedLaws>> {
    if !(0.0..=1.0).contains(&alpha_n) {
        return Err(Error::InvalidParams(format!("alpha_n = {alpha_n} is not a probability")));
    }
    rho.iter()
        .enumerate()
        .map(|(t, r)| {
            let p = [r[0] * alpha_n, r[1] * alpha_n];
            if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidParams(format!(
                    "phase {t}: intensity times alpha_n = {p:?} is not a probability"
                )));
            }
            let pmf = |l: usize, x: usize| if x == 1 { p[l] } else { 1.0 - p[l] };
            let z = ch.z_size();
            let mut x3_law = vec![vec![0.0; z]; ch.x3_size()];
            let mut x1_law = [vec![vec![0.0; z]; ch.x3_size()], vec![vec![0.0; z]; ch.x3_size()]];
            let mut x2_law = x1_law.clone();
            for x3 in 0..ch.x3_size() {
                for x1 in 0..2 {
                    for x2 in 0..2 {
                        let row = ch.z_row(x1, x2, x3);
                        for (k, &g) in row.iter().enumerate() {
                            x1_law[x1][x3][k] += pmf(1, x2) * g;
                            x2_law[x2][x3][k] += pmf(0, x1) * g;
                            x3_law[x3][k] += pmf(0, x1) * pmf(1, x2) * g;
                        }
                    }
                }
            }
            Ok(AveragedLaws { z_given_x3: x3_law, z_given_x1x3: x1_law, z_given_x2x3: x2_law })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::reference::reference_mac;
    use super::*;

    #[test]
    fn silent_users_leave_idle_rows() {
        let ch = reference_mac();
        let a = averaged_channel(&ch, &[[1.0, 1.0]], 0.0).unwrap();
        for x3 in 0..2 {
            assert_eq!(a[0].z_given_x3[x3], ch.z_row(0, 0, x3));
        }
    }

    #[test]
    fn two_point_mixture() {
        let ch = reference_mac();
        let a = averaged_channel(&ch, &[[1.0, 0.0]], 0.5).unwrap();
        for x3 in 0..2 {
            for k in 0..6 {
                let want = 0.5 * ch.z_row(1, 0, x3)[k] + 0.5 * ch.z_row(0, 0, x3)[k];
                assert!((a[0].z_given_x3[x3][k] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reference_row_at_small_alpha() {
        // weights over (x1,x2): (0.99², 0.99·0.01, 0.01·0.99, 0.01²)
        let ch = reference_mac();
        let a = averaged_channel(&ch, &[[1.0, 1.0]], 0.01).unwrap();
        let w = [0.9801, 0.0099, 0.0099, 0.0001];
        for k in 0..6 {
            let want = w[0] * ch.z_row(0, 0, 0)[k]
                + w[1] * ch.z_row(0, 1, 0)[k]
                + w[2] * ch.z_row(1, 0, 0)[k]
                + w[3] * ch.z_row(1, 1, 0)[k];
            assert!((a[0].z_given_x3[0][k] - want).abs() < 1e-15);
        }
        // first letter by hand: .9801*.15 + .0099*.23 + .0099*.01 + .0001*.05
        assert!((a[0].z_given_x3[0][0] - 0.149396).abs() < 1e-12);
    }

    #[test]
    fn marginal_consistency() {
        let ch = reference_mac();
        let (r1, r2, al) = (0.7, 1.3, 0.05);
        let a = &averaged_channel(&ch, &[[r1, r2]], al).unwrap()[0];
        for x3 in 0..2 {
            for k in 0..6 {
                let via1 = (1.0 - r1 * al) * a.z_given_x1x3[0][x3][k] + r1 * al * a.z_given_x1x3[1][x3][k];
                let via2 = (1.0 - r2 * al) * a.z_given_x2x3[0][x3][k] + r2 * al * a.z_given_x2x3[1][x3][k];
                assert!((via1 - a.z_given_x3[x3][k]).abs() < 1e-15);
                assert!((via2 - a.z_given_x3[x3][k]).abs() < 1e-15);
            }
            let s: f64 = a.z_given_x3[x3].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_large_intensity() {
        assert!(averaged_channel(&reference_mac(), &[[30.0, 0.0]], 0.05).is_err());
    }
}
