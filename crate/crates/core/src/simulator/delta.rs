//! Monte Carlo estimate of the warden divergence with the exact codebook
//! mixture.

use super::codebook::Codebook;
use super::multiplex::Slot;
use super::stream_rng;
use crate::channel::{averaged_channel, Dmmac};
use crate::error::{Error, Result};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_MIXTURE_CAP: u128 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub w3: u64,
    /// Nats.
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in v {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + compensated_sum(v.iter().map(|x| (x - m).exp())).ln()
}

fn log_ratio(p: f64, q: f64) -> Result<f64> {
    if q > 0.0 {
        Ok(p.ln() - q.ln())
    } else if p == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::AbsoluteContinuity("warden output outside the idle support".into()))
    }
}

/// Per-position warden law and log-ratio tables for one x3 codeword.
struct Tables {
    /// Sampling law at each (slot kind, phase, x_lead, x_follow, x3).
    samplers: Vec<WeightedIndex<f64>>,
    /// ln Γ(z|eₗ,x3)/Γ0, indexed `[l][x3][z]`.
    single: [Vec<Vec<f64>>; 2],
    /// ln Γ(z|1,1,x3)/Γ(z|1,0,x3)·Γ0/Γ(z|0,1,x3) (the pair correction).
    pair: Vec<Vec<f64>>,
    /// ln Γ̄(z|0,x3)/Γ0 and ln Γ̄(z|1,x3)/Γ̄(z|0,x3) per phase, follower averaged.
    lead0: Vec<Vec<Vec<f64>>>,
    lead1: Vec<Vec<Vec<f64>>>,
    nx: usize,
}

impl Tables {
    fn new(cb: &Codebook, ch: &Dmmac) -> Result<Self> {
        let nx = ch.x3_size();
        let lead = cb.schedule.leader;
        let avg = averaged_channel(ch, &cb.rho, cb.alpha_n)?;
        let ratio_rows = |a: &[f64], b: &[f64]| -> Result<Vec<f64>> { a.iter().zip(b).map(|(p, q)| log_ratio(*p, *q)).collect() };
        let mut single = [vec![], vec![]];
        let mut pair = vec![];
        for x3 in 0..nx {
            let g0 = ch.z_row(0, 0, x3);
            single[0].push(ratio_rows(ch.z_row(1, 0, x3), g0)?);
            single[1].push(ratio_rows(ch.z_row(0, 1, x3), g0)?);
            let both = ratio_rows(ch.z_row(1, 1, x3), g0)?;
            pair.push((0..g0.len()).map(|z| both[z] - single[0][x3][z] - single[1][x3][z]).collect());
        }
        let mut lead0 = vec![];
        let mut lead1 = vec![];
        let mut samplers = vec![];
        for a in &avg {
            let rows = if lead == 0 { &a.z_given_x1x3 } else { &a.z_given_x2x3 };
            lead0.push((0..nx).map(|x3| ratio_rows(&rows[0][x3], ch.z_row(0, 0, x3))).collect::<Result<Vec<_>>>()?);
            lead1.push((0..nx).map(|x3| ratio_rows(&rows[1][x3], &rows[0][x3])).collect::<Result<Vec<_>>>()?);
        }
        // exact inputs: index (x1, x2, x3); leader slots: (phase, x_lead, x3)
        for x1 in 0..2 {
            for x2 in 0..2 {
                for x3 in 0..nx {
                    samplers.push(WeightedIndex::new(ch.z_row(x1, x2, x3)).map_err(|e| Error::Probability(e.to_string()))?);
                }
            }
        }
        for a in &avg {
            let rows = if lead == 0 { &a.z_given_x1x3 } else { &a.z_given_x2x3 };
            for xl in 0..2 {
                for x3 in 0..nx {
                    samplers.push(WeightedIndex::new(&rows[xl][x3]).map_err(|e| Error::Probability(e.to_string()))?);
                }
            }
        }
        Ok(Self { samplers, single, pair, lead0, lead1, nx })
    }

    fn exact(&self, x1: usize, x2: usize, x3: usize) -> &WeightedIndex<f64> {
        &self.samplers[(x1 * 2 + x2) * self.nx + x3]
    }

    fn averaged(&self, t: usize, xl: usize, x3: usize) -> &WeightedIndex<f64> {
        &self.samplers[4 * self.nx + (t * 2 + xl) * self.nx + x3]
    }
}

/// Estimates δ for the non-covert codeword `w3` from `samples` warden output
/// draws under H=1, each scored against the exact uniform mixture over all
/// covert codeword pairs. Sample `j` uses its own RNG stream of `seed`.
pub fn estimate_delta(
    cb: &Codebook,
    ch: &Dmmac,
    w3: u64,
    samples: usize,
    seed: u64,
    cap: u128,
) -> Result<DeltaEstimate> {
    let x3 = cb.x3.get(w3 as usize).ok_or_else(|| Error::Index(format!("w3 = {w3}")))?;
    let (lead, fol) = (cb.schedule.leader, 1 - cb.schedule.leader);
    let (nl, nf) = (cb.covert[lead].len(), cb.covert[fol].len());
    let pairs = nl as u128 * nf as u128;
    if pairs > cap {
        return Err(Error::MixtureCap { pairs, cap });
    }
    if samples == 0 {
        return Err(Error::InvalidParams("need at least one divergence sample".into()));
    }
    let n = cb.n();
    let follower_noise = (0..n).any(|i| cb.schedule.slots[i] == Slot::Leader && cb.one_prob(fol, i) > 0.0);
    let sends = |l: usize| cb.covert[l].ones.iter().any(|c| c.iter().any(|&i| cb.schedule.sends_codeword(l, i as usize)));
    if !follower_noise && !sends(0) && !sends(1) {
        return Ok(DeltaEstimate { w3, mean: 0.0, stderr: 0.0, samples });
    }
    let tab = Tables::new(cb, ch)?;
    let log_pairs = (pairs as f64).ln();
    let draw = |j: usize| -> f64 {
        let mut rng = stream_rng(seed, super::DOMAIN_DELTA, (w3 << 32) | j as u64);
        let cl = rng.gen_range(0..nl);
        let cf = rng.gen_range(0..nf);
        let mut xl = vec![0u8; n];
        let mut xf = vec![0u8; n];
        for &i in &cb.covert[lead].ones[cl] {
            xl[i as usize] = 1;
        }
        for &i in &cb.covert[fol].ones[cf] {
            if cb.schedule.slots[i as usize] == Slot::Both {
                xf[i as usize] = 1;
            }
        }
        let mut z = vec![0u8; n];
        let mut base = 0.0;
        for i in 0..n {
            let (t, x) = (cb.mux.t_seq[i], x3[i] as usize);
            let zi = match cb.schedule.slots[i] {
                Slot::Both => {
                    let (a, b) = if lead == 0 { (xl[i], xf[i]) } else { (xf[i], xl[i]) };
                    tab.exact(a as usize, b as usize, x).sample(&mut rng)
                }
                Slot::Leader => tab.averaged(t, xl[i] as usize, x).sample(&mut rng),
                Slot::Silent => tab.exact(0, 0, x).sample(&mut rng),
            };
            z[i] = zi as u8;
            if cb.schedule.slots[i] == Slot::Leader {
                base += tab.lead0[t][x][zi];
            }
        }
        let val = |i: usize, table: &[Vec<f64>]| table[x3[i] as usize][z[i] as usize];
        let lead_score: Vec<f64> = cb.covert[lead]
            .ones
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&i| {
                        let i = i as usize;
                        match cb.schedule.slots[i] {
                            Slot::Both => val(i, &tab.single[lead]),
                            Slot::Leader => val(i, &tab.lead1[cb.mux.t_seq[i]]),
                            Slot::Silent => 0.0,
                        }
                    })
                    .sum()
            })
            .collect();
        let shared = |c: &Vec<u32>| -> Vec<usize> {
            c.iter().map(|&i| i as usize).filter(|&i| cb.schedule.slots[i] == Slot::Both).collect()
        };
        let fol_sets: Vec<Vec<usize>> = cb.covert[fol].ones.iter().map(shared).collect();
        let fol_score: Vec<f64> = fol_sets.iter().map(|s| s.iter().map(|&i| val(i, &tab.single[fol])).sum()).collect();
        let mut marker = vec![0.0f64; n];
        let mut terms = Vec::with_capacity(nl * nf);
        for (a, c) in cb.covert[lead].ones.iter().enumerate() {
            let lead_shared = shared(c);
            for &i in &lead_shared {
                marker[i] = val(i, &tab.pair);
            }
            for (b, s) in fol_sets.iter().enumerate() {
                let overlap: f64 = s.iter().map(|&i| marker[i]).sum();
                terms.push(lead_score[a] + fol_score[b] + overlap);
            }
            for &i in &lead_shared {
                marker[i] = 0.0;
            }
        }
        base + log_sum_exp(&terms) - log_pairs
    };
    let values: Vec<f64> = (0..samples).into_par_iter().map(draw).collect();
    let mean = compensated_sum(values.iter().cloned()) / samples as f64;
    let stderr = if samples > 1 {
        let var = compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / (samples - 1) as f64;
        (var / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(DeltaEstimate { w3, mean, stderr, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v.iter().cloned()), 2.0);
    }

    #[test]
    fn log_sum_exp_stable() {
        let v = [-1000.0, -1000.0];
        assert!((log_sum_exp(&v) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
