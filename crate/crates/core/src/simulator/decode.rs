//! Successive decoding at the legitimate receiver.

use super::codebook::{Codebook, Hypothesis};
use crate::channel::Dmmac;
use crate::error::Result;
use crate::infodiv::{divergence_profile, JointInputLaw};

/// Decoder outputs; `None` means a declared failure (no candidate or several).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoded {
    pub w3: Option<u64>,
    pub w: [Option<u64>; 2],
}

/// Receiver state shared by all trials of one codebook.
pub struct Decoder<'a> {
    cb: &'a Codebook,
    ch: &'a Dmmac,
    /// Target joint law of (t, x3, y), flattened.
    target: Vec<f64>,
    mu_n: f64,
    /// Log-likelihood thresholds ηℓ.
    pub eta: [f64; 2],
    /// llr[l][x3][y] = log Γ_Y(y|eₗ,x3) − log Γ_Y(y|0,0,x3).
    llr: [Vec<Vec<f64>>; 2],
}

impl<'a> Decoder<'a> {
    /// `mu` are the threshold slacks μ₁, μ₂. Each threshold is
    /// (1−μℓ)·αₙ·Σᵢ ρℓ,tᵢ·E[D_Y^(ℓ)(X3)|T=tᵢ] over the user's decoding slots.
    pub fn new(cb: &'a Codebook, ch: &'a Dmmac, joint: &JointInputLaw, mu_n: f64, mu: [f64; 2]) -> Result<Self> {
        let (nx, ny) = (ch.x3_size(), ch.y_size());
        let nt = joint.p_t.len();
        let mut target = vec![0.0; nt * nx * ny];
        for t in 0..nt {
            for x3 in 0..nx {
                let w = joint.p_t[t] * joint.p_x_given_t[t][x3];
                for (y, g) in ch.y_row(0, 0, x3).iter().enumerate() {
                    target[(t * nx + x3) * ny + y] = w * g;
                }
            }
        }
        let prof = divergence_profile(ch)?;
        let mut eta = [0.0; 2];
        for (l, e) in eta.iter_mut().enumerate() {
            let per_phase: Vec<f64> = (0..nt)
                .map(|t| (0..nx).map(|x3| joint.p_x_given_t[t][x3] * prof.d_y[l][x3]).sum::<f64>())
                .collect();
            let sum: f64 = (0..cb.n())
                .filter(|&i| cb.schedule.sends_codeword(l, i))
                .map(|i| {
                    let t = cb.mux.t_seq[i];
                    cb.rho[t][l] * per_phase[t]
                })
                .sum();
            *e = (1.0 - mu[l]) * cb.alpha_n * sum;
        }
        let llr = [0, 1].map(|l| {
            (0..nx)
                .map(|x3| {
                    let (a, b) = if l == 0 { (1, 0) } else { (0, 1) };
                    let on = ch.y_row(a, b, x3);
                    let off = ch.y_row(0, 0, x3);
                    on.iter().zip(off).map(|(p, q)| p.ln() - q.ln()).collect()
                })
                .collect()
        });
        Ok(Self { cb, ch, target, mu_n, eta, llr })
    }

    fn typical(&self, x3: &[u8], y: &[u8]) -> bool {
        let (nx, ny) = (self.ch.x3_size(), self.ch.y_size());
        let mut counts = vec![0u32; self.target.len()];
        for (i, &t) in self.cb.mux.t_seq.iter().enumerate() {
            counts[(t * nx + x3[i] as usize) * ny + y[i] as usize] += 1;
        }
        let n = self.cb.n() as f64;
        counts.iter().zip(&self.target).all(|(&c, &p)| (c as f64 / n - p).abs() <= self.mu_n)
    }

    /// Log-likelihood ratio of a candidate codeword of user `l` over its slots.
    fn score(&self, l: usize, ones: &[u32], x3: &[u8], y: &[u8]) -> f64 {
        ones.iter()
            .map(|&i| i as usize)
            .filter(|&i| self.cb.schedule.sends_codeword(l, i))
            .map(|i| self.llr[l][x3[i] as usize][y[i] as usize])
            .sum()
    }

    fn unique<I: Iterator<Item = (u64, bool)>>(it: I) -> Option<u64> {
        let mut found = None;
        for (w, ok) in it {
            if ok {
                if found.is_some() {
                    return None;
                }
                found = Some(w);
            }
        }
        found
    }

    /// Decodes W3 by joint typicality, then under H=1 each covert message by
    /// the threshold test that treats the other covert user as silent.
    pub fn decode(&self, y: &[u8], s: [u64; 2], h: Hypothesis) -> Decoded {
        let cb = self.cb;
        let w3 = Self::unique(cb.x3.iter().enumerate().map(|(w, x3)| (w as u64, self.typical(x3, y))));
        let mut out = Decoded { w3, w: [None, None] };
        let (Some(w3), Hypothesis::Active) = (w3, h) else { return out };
        let x3 = &cb.x3[w3 as usize];
        for l in 0..2 {
            let book = &cb.covert[l];
            out.w[l] = if book.messages == 1 {
                Some(0)
            } else {
                Self::unique(
                    (0..book.messages).map(|w| (w, self.score(l, book.codeword(w, s[l]), x3, y) >= self.eta[l])),
                )
            };
        }
        out
    }

    pub fn decoding_slots(&self, l: usize) -> usize {
        (0..self.cb.n()).filter(|&i| self.cb.schedule.sends_codeword(l, i)).count()
    }
}
