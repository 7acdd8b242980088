//! Finite-blocklength Monte Carlo of the covert coding schemes on a binary
//! three-user MAC: multiplexing, codebooks, encoding, successive decoding,
//! error rates and the exact-mixture warden divergence.
//!
//! Every random quantity is drawn from a ChaCha stream keyed by the seed, a
//! domain tag and the item index, so results do not depend on the number of
//! worker threads (`COVERTMAC_THREADS`).

mod codebook;
mod decode;
mod delta;
mod multiplex;

pub use codebook::{encode, generate_codebooks, Codebook, CovertBook, Hypothesis, Inputs, MAX_CODEWORDS};
pub use decode::{Decoded, Decoder};
pub use delta::{estimate_delta, DeltaEstimate, DEFAULT_MIXTURE_CAP};
pub use multiplex::{build_multiplex, MultiplexSequence, Schedule, Slot};

use crate::channel::Dmmac;
use crate::error::{Error, Result};
use crate::infodiv::{chi2_mass, cond_mi_x3, divergence_profile};
use crate::region::CovertParams;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub(crate) const DOMAIN_CODEBOOK: u64 = 1;
pub(crate) const DOMAIN_TRIAL: u64 = 2;
pub(crate) const DOMAIN_DELTA: u64 = 3;

/// RNG for item `index` of `domain`.
pub(crate) fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Worker pool sized by `COVERTMAC_THREADS` (all cores when unset).
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("COVERTMAC_THREADS") {
        let k: usize = v
            .parse()
            .ok()
            .filter(|k| *k > 0)
            .ok_or_else(|| Error::InvalidParams(format!("COVERTMAC_THREADS = `{v}` is not a positive integer")))?;
        b = b.num_threads(k);
    }
    b.build().map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

/// ωₙ = scale·n^exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaRule {
    pub scale: f64,
    pub exponent: f64,
}

impl Default for OmegaRule {
    fn default() -> Self {
        Self { scale: 1.0, exponent: -1.0 / 3.0 }
    }
}

impl OmegaRule {
    pub fn omega(&self, n: usize) -> f64 {
        self.scale * (n as f64).powf(self.exponent)
    }

    /// ωₙ → 0 needs a negative exponent and ωₙ√n − log n → ∞ one above −1/2.
    pub fn check(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) || !(self.exponent > -0.5 && self.exponent < 0.0) {
            return Err(Error::InvalidParams(format!(
                "omega rule {}·n^{} needs scale > 0 and exponent in (-1/2, 0)",
                self.scale, self.exponent
            )));
        }
        Ok(())
    }
}

/// Message, key and non-covert codebook sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    pub m1: u64,
    pub k1: u64,
    pub m2: u64,
    pub k2: u64,
    pub m3: u64,
}

impl Sizes {
    fn array(&self) -> [u64; 5] {
        [self.m1, self.k1, self.m2, self.k2, self.m3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub omega: OmegaRule,
    /// Typicality radius; n^(−1/3) when absent.
    pub mu_n: Option<f64>,
    /// Threshold slacks μ₁, μ₂.
    pub mu: [f64; 2],
    /// Rate back-offs ξ₁..ξ₆.
    pub xi: [f64; 6],
    pub phi: [f64; 2],
    /// Explicit sizes; otherwise the achievability expressions scaled by `size_scale`.
    pub sizes: Option<Sizes>,
    pub size_scale: f64,
    pub m3_cap: u64,
    pub mixture_cap: u128,
    /// Draw a fresh codebook for every trial.
    pub redraw: bool,
    pub trials: usize,
    pub delta_samples: usize,
    /// Number of non-covert codewords whose divergence is estimated.
    pub delta_codewords: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            omega: OmegaRule::default(),
            mu_n: None,
            mu: [0.1, 0.1],
            xi: [0.1; 6],
            phi: [1.0, 1.0],
            sizes: None,
            size_scale: 1.0,
            m3_cap: 16,
            mixture_cap: DEFAULT_MIXTURE_CAP,
            redraw: false,
            trials: 200,
            delta_samples: 200,
            delta_codewords: 1,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn omega_n(&self) -> f64 {
        self.omega.omega(self.n)
    }

    pub fn alpha_n(&self) -> f64 {
        self.omega_n() / (self.n as f64).sqrt()
    }

    pub fn mu_n(&self) -> f64 {
        self.mu_n.unwrap_or_else(|| (self.n as f64).powf(-1.0 / 3.0))
    }

    pub fn validate(&self) -> Result<()> {
        self.omega.check()?;
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n == 0 {
            return bad("blocklength must be positive".into());
        }
        if self.mu.iter().any(|m| !(*m > 0.0 && *m < 1.0)) {
            return bad(format!("threshold slacks {:?} must lie in (0, 1)", self.mu));
        }
        if self.xi.iter().any(|x| !(*x >= 0.0)) {
            return bad("rate back-offs must be nonnegative".into());
        }
        if self.phi.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad(format!("fractions {:?} must lie in [0, 1]", self.phi));
        }
        if !(self.size_scale > 0.0) || self.m3_cap == 0 || self.trials == 0 {
            return bad("size_scale, m3_cap and trials must be positive".into());
        }
        if matches!(self.mu_n, Some(m) if !(m > 0.0)) {
            return bad("typicality radius must be positive".into());
        }
        Ok(())
    }
}

/// Logarithmic sizes (nats) from the achievability expressions, before rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogSizes {
    pub log_m: [f64; 2],
    pub log_k: [f64; 2],
    pub log_m3: f64,
}

/// log Mℓ = s(1−ξℓ)·φℓ·ωₙ√n·E[ρℓ D_Y], log MℓKℓ = s(1+ξℓ₊₃)·φℓ·ωₙ√n·E[ρℓ D_Z]
/// and log M3 = s(1−ξ3)·n·I(X3;Y|X1=X2=0,T), with `s` the size scale.
pub fn scheme_log_sizes(cfg: &SimConfig, params: &CovertParams, ch: &Dmmac) -> Result<LogSizes> {
    let prof = divergence_profile(ch)?;
    let j = &params.joint;
    let scale = cfg.size_scale * cfg.omega_n() * (cfg.n as f64).sqrt();
    let mut log_m = [0.0; 2];
    let mut log_k = [0.0; 2];
    for l in 0..2 {
        let e = |d: &[f64]| -> f64 {
            (0..j.p_t.len())
                .map(|t| j.p_t[t] * params.rho[t][l] * (0..ch.x3_size()).map(|x| j.p_x_given_t[t][x] * d[x]).sum::<f64>())
                .sum()
        };
        log_m[l] = scale * (1.0 - cfg.xi[l]) * cfg.phi[l] * e(&prof.d_y[l]);
        let total = scale * (1.0 + cfg.xi[l + 3]) * cfg.phi[l] * e(&prof.d_z[l]);
        log_k[l] = (total - log_m[l]).max(0.0);
    }
    let log_m3 = cfg.size_scale * (1.0 - cfg.xi[2]) * cfg.n as f64 * cond_mi_x3(j, ch)?;
    Ok(LogSizes { log_m, log_k, log_m3 })
}

fn count(log: f64, cap: u64) -> u64 {
    let v = log.exp().round();
    if v >= cap as f64 {
        cap
    } else {
        (v as u64).max(1)
    }
}

/// Right-hand side of the divergence expression with ξ₆ = 0:
/// max(φ₁,φ₂)·ωₙ²/2·E[(ρ₁+ρ₂)²χ²].
pub fn delta_theory(cfg: &SimConfig, params: &CovertParams, ch: &Dmmac) -> Result<f64> {
    let j = &params.joint;
    let mut e = 0.0;
    for t in 0..j.p_t.len() {
        for x3 in 0..ch.x3_size() {
            let w = j.p_t[t] * j.p_x_given_t[t][x3];
            if w > 0.0 {
                e += w * chi2_mass(params.rho[t][0], params.rho[t][1], x3, ch)?;
            }
        }
    }
    let w = cfg.omega_n();
    Ok(cfg.phi[0].max(cfg.phi[1]) * w * w / 2.0 * e)
}

/// Miss + false-alarm lower bound of any warden test, 1 − δ clamped to [0, 1].
pub fn covertness_bound(delta: f64) -> f64 {
    (1.0 - delta).clamp(0.0, 1.0)
}

/// Empirical error rate with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRate {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson95: [f64; 2],
}

impl ErrorRate {
    pub fn new(errors: u64, trials: u64) -> Self {
        let z = 1.959_963_984_540_054;
        let nf = trials as f64;
        let p = errors as f64 / nf;
        let denom = 1.0 + z * z / nf;
        let centre = (p + z * z / (2.0 * nf)) / denom;
        let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
        let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
        let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
        Self { errors, trials, rate: p, wilson95: [lo, hi] }
    }
}

/// Quantities derived from the configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub omega_n: f64,
    pub alpha_n: f64,
    pub mu_n: f64,
    pub log_sizes: Option<LogSizes>,
    pub sizes: Sizes,
    pub m3_capped: bool,
    pub eta: [f64; 2],
    /// Shared, leader-only and silent slot counts.
    pub slots: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSummary {
    pub per_w3: Vec<DeltaEstimate>,
    pub average: f64,
    pub max: f64,
    pub theory: f64,
    pub theory_ratio: Option<f64>,
    pub covertness_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub derived: Derived,
    pub pe0: ErrorRate,
    pub pe1: ErrorRate,
    /// Trials under H=1 in which W3, W1 or W2 was not recovered.
    pub pe1_by_message: [u64; 3],
    pub delta: Option<DeltaSummary>,
}

/// Codebook and decoder set-up for one configuration.
pub struct Setup<'a> {
    pub cfg: &'a SimConfig,
    pub params: &'a CovertParams,
    pub ch: &'a Dmmac,
    pub derived: Derived,
}

impl<'a> Setup<'a> {
    pub fn new(cfg: &'a SimConfig, params: &'a CovertParams, ch: &'a Dmmac) -> Result<Self> {
        cfg.validate()?;
        params.validate(&[2, 2], ch.x3_size())?;
        if cfg.n < params.phases() {
            return Err(Error::InvalidParams(format!("n = {} is below the phase count", cfg.n)));
        }
        let (log_sizes, sizes, capped) = match cfg.sizes {
            Some(s) => {
                let capped = s.m3 > cfg.m3_cap;
                (None, Sizes { m3: s.m3.min(cfg.m3_cap), ..s }, capped)
            }
            None => {
                let ls = scheme_log_sizes(cfg, params, ch)?;
                let lim = MAX_CODEWORDS + 1;
                let s = Sizes {
                    m1: count(ls.log_m[0], lim),
                    k1: count(ls.log_k[0], lim),
                    m2: count(ls.log_m[1], lim),
                    k2: count(ls.log_k[1], lim),
                    m3: count(ls.log_m3, cfg.m3_cap),
                };
                let capped = ls.log_m3.exp().round() > cfg.m3_cap as f64;
                (Some(ls), s, capped)
            }
        };
        let mux = build_multiplex(&params.joint.p_t, cfg.n);
        let sched = Schedule::new(&mux, cfg.phi);
        let slots = [sched.count(Slot::Both), sched.count(Slot::Leader), sched.count(Slot::Silent)];
        let derived = Derived {
            omega_n: cfg.omega_n(),
            alpha_n: cfg.alpha_n(),
            mu_n: cfg.mu_n(),
            log_sizes,
            sizes,
            m3_capped: capped,
            eta: [0.0; 2],
            slots,
        };
        Ok(Self { cfg, params, ch, derived })
    }

    fn rho(&self) -> Vec<[f64; 2]> {
        self.params.rho.iter().map(|r| [r[0], r[1]]).collect()
    }

    /// Codebook for stream `index` of the codebook domain.
    pub fn codebook(&self, index: u64) -> Result<Codebook> {
        let mux = build_multiplex(&self.params.joint.p_t, self.cfg.n);
        let sched = Schedule::new(&mux, self.cfg.phi);
        let mut rng = stream_rng(self.cfg.seed, DOMAIN_CODEBOOK, index);
        generate_codebooks(
            mux,
            sched,
            &self.params.joint,
            self.rho(),
            self.derived.alpha_n,
            self.derived.sizes.array(),
            &mut rng,
        )
    }
}

struct ChannelSampler {
    rows: Vec<WeightedIndex<f64>>,
    nx: usize,
}

impl ChannelSampler {
    fn new(ch: &Dmmac) -> Result<Self> {
        let mut rows = Vec::new();
        for x1 in 0..2 {
            for x2 in 0..2 {
                for x3 in 0..ch.x3_size() {
                    rows.push(WeightedIndex::new(ch.y_row(x1, x2, x3)).map_err(|e| Error::Probability(e.to_string()))?);
                }
            }
        }
        Ok(Self { rows, nx: ch.x3_size() })
    }

    fn output<R: Rng>(&self, inp: &Inputs, rng: &mut R) -> Vec<u8> {
        (0..inp.x3.len())
            .map(|i| {
                let r = (inp.x[0][i] as usize * 2 + inp.x[1][i] as usize) * self.nx + inp.x3[i] as usize;
                self.rows[r].sample(rng) as u8
            })
            .collect()
    }
}

#[derive(Default, Clone, Copy)]
struct TrialOutcome {
    err0: bool,
    err1: [bool; 3],
}

fn one_trial(cb: &Codebook, dec: &Decoder, sampler: &ChannelSampler, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let b = &cb.covert;
    let w = [rng.gen_range(0..b[0].messages), rng.gen_range(0..b[1].messages), rng.gen_range(0..cb.x3.len() as u64)];
    let s = [rng.gen_range(0..b[0].keys), rng.gen_range(0..b[1].keys)];
    let mut out = TrialOutcome::default();
    let inp0 = encode(cb, Hypothesis::Silent, w, s, rng)?;
    let y0 = sampler.output(&inp0, rng);
    out.err0 = dec.decode(&y0, s, Hypothesis::Silent).w3 != Some(w[2]);
    let inp1 = encode(cb, Hypothesis::Active, w, s, rng)?;
    let y1 = sampler.output(&inp1, rng);
    let d = dec.decode(&y1, s, Hypothesis::Active);
    out.err1 = [d.w3 != Some(w[2]), d.w[0] != Some(w[0]), d.w[1] != Some(w[1])];
    Ok(out)
}

/// Error part of a simulation: `trials` independent trials under both
/// hypotheses with fresh messages and keys.
pub fn run_trials(setup: &mut Setup) -> Result<(ErrorRate, ErrorRate, [u64; 3])> {
    let cfg = setup.cfg;
    let sampler = ChannelSampler::new(setup.ch)?;
    let mu_n = cfg.mu_n();
    let shared = if cfg.redraw { None } else { Some(setup.codebook(0)?) };
    if let Some(cb) = &shared {
        setup.derived.eta = Decoder::new(cb, setup.ch, &setup.params.joint, mu_n, cfg.mu)?.eta;
    }
    let setup_ref = &*setup;
    let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, DOMAIN_TRIAL, i as u64);
            let own;
            let cb = match &shared {
                Some(cb) => cb,
                None => {
                    own = setup_ref.codebook(i as u64 + 1)?;
                    &own
                }
            };
            let dec = Decoder::new(cb, setup_ref.ch, &setup_ref.params.joint, mu_n, cfg.mu)?;
            one_trial(cb, &dec, &sampler, &mut rng)
        })
        .collect();
    let mut e0 = 0;
    let mut e1 = 0;
    let mut by = [0u64; 3];
    for o in outcomes {
        let o = o?;
        e0 += o.err0 as u64;
        e1 += o.err1.iter().any(|e| *e) as u64;
        for k in 0..3 {
            by[k] += o.err1[k] as u64;
        }
    }
    let t = cfg.trials as u64;
    Ok((ErrorRate::new(e0, t), ErrorRate::new(e1, t), by))
}

/// Divergence part: estimates for the first `delta_codewords` non-covert
/// codewords of the shared codebook.
pub fn run_delta(setup: &Setup) -> Result<DeltaSummary> {
    let cfg = setup.cfg;
    let cb = setup.codebook(0)?;
    let count = cfg.delta_codewords.clamp(1, cb.x3.len() as u64);
    let per_w3: Vec<DeltaEstimate> = (0..count)
        .map(|w3| estimate_delta(&cb, setup.ch, w3, cfg.delta_samples, cfg.seed, cfg.mixture_cap))
        .collect::<Result<_>>()?;
    let average = per_w3.iter().map(|d| d.mean).sum::<f64>() / per_w3.len() as f64;
    let max = per_w3.iter().map(|d| d.mean).fold(f64::NEG_INFINITY, f64::max);
    let theory = delta_theory(cfg, setup.params, setup.ch)?;
    Ok(DeltaSummary {
        per_w3,
        average,
        max,
        theory,
        theory_ratio: (theory > 0.0).then(|| average / theory),
        covertness_bound: covertness_bound(average.max(0.0)),
    })
}

/// Full simulation inside the `COVERTMAC_THREADS` worker pool. The divergence
/// part is skipped when `delta_samples` is 0.
pub fn simulate(cfg: &SimConfig, params: &CovertParams, ch: &Dmmac) -> Result<SimResult> {
    worker_pool()?.install(|| {
        let mut setup = Setup::new(cfg, params, ch)?;
        let (pe0, pe1, by) = run_trials(&mut setup)?;
        let delta = if cfg.delta_samples > 0 { Some(run_delta(&setup)?) } else { None };
        Ok(SimResult { config: cfg.clone(), derived: setup.derived, pe0, pe1, pe1_by_message: by, delta })
    })
}
