//! Random codebooks and the encoder.

use super::multiplex::{MultiplexSequence, Schedule, Slot};
use crate::error::{Error, Result};
use crate::infodiv::JointInputLaw;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

/// Largest number of covert codewords stored per user.
pub const MAX_CODEWORDS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Hypothesis {
    Silent,
    Active,
}

/// One user's covert codebook, stored as the sorted positions of its ones.
#[derive(Debug, Clone, PartialEq)]
pub struct CovertBook {
    pub messages: u64,
    pub keys: u64,
    pub ones: Vec<Vec<u32>>,
}

impl CovertBook {
    pub fn codeword(&self, w: u64, s: u64) -> &[u32] {
        &self.ones[(w * self.keys + s) as usize]
    }

    pub fn len(&self) -> usize {
        self.ones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ones.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub mux: MultiplexSequence,
    pub schedule: Schedule,
    pub alpha_n: f64,
    /// ρℓ,t per phase.
    pub rho: Vec<[f64; 2]>,
    pub covert: [CovertBook; 2],
    pub x3: Vec<Vec<u8>>,
}

impl Codebook {
    pub fn n(&self) -> usize {
        self.mux.t_seq.len()
    }

    /// Probability of a one for user `l` at position `i`.
    pub fn one_prob(&self, l: usize, i: usize) -> f64 {
        self.rho[self.mux.t_seq[i]][l] * self.alpha_n
    }
}

/// Sorted positions of ones of an independent Bernoulli sequence whose
/// success probability is constant on each phase block.
fn sparse_bernoulli<R: Rng>(mux: &MultiplexSequence, probs: &[f64], rng: &mut R) -> Vec<u32> {
    let mut out = Vec::new();
    for (t, &p) in probs.iter().enumerate() {
        let block = mux.block(t);
        if p <= 0.0 || block.is_empty() {
            continue;
        }
        if p >= 1.0 {
            out.extend(block.map(|i| i as u32));
            continue;
        }
        let log_q = (-p).ln_1p();
        let mut i = block.start;
        loop {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip >= (block.end - i) as f64 {
                break;
            }
            i += skip as usize;
            out.push(i as u32);
            i += 1;
        }
    }
    out
}

/// Draws both covert codebooks and the non-covert codebook.
///
/// `sizes` holds (M₁, K₁, M₂, K₂, M₃).
pub fn generate_codebooks<R: Rng>(
    mux: MultiplexSequence,
    schedule: Schedule,
    joint: &JointInputLaw,
    rho: Vec<[f64; 2]>,
    alpha_n: f64,
    sizes: [u64; 5],
    rng: &mut R,
) -> Result<Codebook> {
    for (t, r) in rho.iter().enumerate() {
        for (l, v) in r.iter().enumerate() {
            if !(v * alpha_n <= 1.0) || *v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "user {} phase {t}: intensity {v} times alpha_n {alpha_n} exceeds 1",
                    l + 1
                )));
            }
        }
    }
    let mut covert = Vec::with_capacity(2);
    for l in 0..2 {
        let (m, k) = (sizes[2 * l], sizes[2 * l + 1]);
        let total = m.checked_mul(k).filter(|c| *c <= MAX_CODEWORDS && *c >= 1).ok_or_else(|| {
            Error::InvalidParams(format!("user {}: {m}×{k} codewords is outside 1..={MAX_CODEWORDS}", l + 1))
        })?;
        let probs: Vec<f64> = rho.iter().map(|r| r[l] * alpha_n).collect();
        let ones = (0..total).map(|_| sparse_bernoulli(&mux, &probs, rng)).collect();
        covert.push(CovertBook { messages: m, keys: k, ones });
    }
    let laws: Vec<Option<WeightedIndex<f64>>> =
        joint.p_x_given_t.iter().map(|p| WeightedIndex::new(p).ok()).collect();
    let mut x3 = Vec::with_capacity(sizes[4] as usize);
    for _ in 0..sizes[4] {
        let mut cw = Vec::with_capacity(mux.t_seq.len());
        for &t in &mux.t_seq {
            let law = laws[t].as_ref().ok_or_else(|| Error::InvalidParams(format!("phase {t} has no input law")))?;
            cw.push(law.sample(rng) as u8);
        }
        x3.push(cw);
    }
    let [c1, c2]: [CovertBook; 2] = covert.try_into().expect("two users");
    Ok(Codebook { mux, schedule, alpha_n, rho, covert: [c1, c2], x3 })
}

/// Channel inputs of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub x: [Vec<u8>; 2],
    pub x3: Vec<u8>,
}

/// Transmitted sequences. `w` = (w₁, w₂, w₃) and `s` = (s₁, s₂); `rng`
/// supplies the local randomness of the user that does not lead.
pub fn encode<R: Rng>(cb: &Codebook, h: Hypothesis, w: [u64; 3], s: [u64; 2], rng: &mut R) -> Result<Inputs> {
    let n = cb.n();
    if w[2] as usize >= cb.x3.len() {
        return Err(Error::Index(format!("w3 = {} with {} codewords", w[2], cb.x3.len())));
    }
    for l in 0..2 {
        let b = &cb.covert[l];
        if w[l] >= b.messages || s[l] >= b.keys {
            return Err(Error::Index(format!("user {}: (w, s) = ({}, {}) out of range", l + 1, w[l], s[l])));
        }
    }
    let mut x = [vec![0u8; n], vec![0u8; n]];
    if h == Hypothesis::Active {
        for l in 0..2 {
            for &i in cb.covert[l].codeword(w[l], s[l]) {
                if cb.schedule.sends_codeword(l, i as usize) {
                    x[l][i as usize] = 1;
                }
            }
        }
        let f = 1 - cb.schedule.leader;
        for i in 0..n {
            if cb.schedule.slots[i] == Slot::Leader && rng.gen::<f64>() < cb.one_prob(f, i) {
                x[f][i] = 1;
            }
        }
    }
    Ok(Inputs { x, x3: cb.x3[w[2] as usize].clone() })
}

#[cfg(test)]
mod tests {
    use super::super::multiplex::build_multiplex;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn book(rho: [f64; 2], phi: [f64; 2], n: usize, sizes: [u64; 5]) -> Codebook {
        let mux = build_multiplex(&[1.0], n);
        let sched = Schedule::new(&mux, phi);
        let joint = JointInputLaw::single(vec![0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        generate_codebooks(mux, sched, &joint, vec![rho], 0.01, sizes, &mut rng).unwrap()
    }

    #[test]
    fn zero_intensity_gives_zero_codewords() {
        let cb = book([0.0, 0.0], [1.0, 1.0], 500, [3, 2, 2, 2, 2]);
        assert!(cb.covert.iter().all(|b| b.ones.iter().all(|c| c.is_empty())));
    }

    #[test]
    fn one_frequency_matches_bernoulli() {
        let cb = book([2.0, 1.0], [1.0, 1.0], 1000, [100, 1, 1, 1, 1]);
        let ones: usize = cb.covert[0].ones.iter().map(|c| c.len()).sum();
        let (total, p) = (100_000.0f64, 0.02f64);
        let sd = (total * p * (1.0 - p)).sqrt();
        assert!((ones as f64 - total * p).abs() < 3.0 * sd, "{ones}");
        assert!(cb.covert[0].ones.iter().all(|c| c.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn follower_stays_off_codeword_outside_shared_slots() {
        let cb = book([50.0, 50.0], [0.8, 0.4], 1000, [1, 1, 1, 1, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inp = encode(&cb, Hypothesis::Active, [0, 0, 0], [0, 0], &mut rng).unwrap();
        let cw2 = cb.covert[1].codeword(0, 0);
        for i in 0..1000 {
            match cb.schedule.slots[i] {
                Slot::Silent => assert_eq!((inp.x[0][i], inp.x[1][i]), (0, 0)),
                Slot::Both => assert_eq!(inp.x[1][i] == 1, cw2.contains(&(i as u32))),
                Slot::Leader => {}
            }
        }
        let local: usize = (400..800).map(|i| inp.x[1][i] as usize).sum();
        assert!(local > 100, "local randomness on leader-only slots: {local}");
        let silent = encode(&cb, Hypothesis::Silent, [0, 0, 0], [0, 0], &mut rng).unwrap();
        assert!(silent.x.iter().all(|v| v.iter().all(|b| *b == 0)));
    }

    #[test]
    fn out_of_range_index() {
        let cb = book([1.0, 1.0], [1.0, 1.0], 50, [2, 1, 1, 1, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(encode(&cb, Hypothesis::Active, [2, 0, 0], [0, 0], &mut rng).is_err());
    }
}
