//! Monte-Carlo FER measurement over the BI-AWGN channel.
//!
//! Frames are independent work items. Frame `i` draws its randomness from a
//! dedicated ChaCha stream keyed by (seed, i), so results depend only on the
//! seed and the frame index, never on worker count or batch size: a run is
//! reproducible bit for bit with any parallelism.

mod decoder;

pub use decoder::{DecodeOutcome, Decoder};

use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::ldpc::{extend_to_rate, CodeView, LdpcError, RateAdaptiveCode};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Monte-Carlo budgets and numerics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    /// Hard cap on simulated frames per (s, R) point.
    pub max_frames: usize,
    /// Stop once this many frame errors were observed.
    pub target_errors: usize,
    pub max_iterations: usize,
    /// Channel LLRs are clipped to this magnitude.
    pub llr_clip: f64,
    /// Worker threads; 1 runs fully inline.
    pub workers: usize,
}

impl SimConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            max_frames: 10_000,
            target_errors: 50,
            max_iterations: 200,
            llr_clip: 30.0,
            workers: 1,
        }
    }

    pub fn validated(self) -> Result<Self, SimError> {
        if self.max_frames < 1 {
            return Err(SimError::BadConfig("max_frames must be >= 1".into()));
        }
        if self.target_errors < 1 {
            return Err(SimError::BadConfig("target_errors must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(SimError::BadConfig("workers must be >= 1".into()));
        }
        Ok(self)
    }
}

/// One measured Monte-Carlo point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FerSample {
    /// Per-quadrature SNR, linear.
    pub s: f64,
    pub rate: f64,
    pub frames: usize,
    pub frame_errors: usize,
    pub fer: f64,
    /// 95% Clopper-Pearson bounds.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Seed the point was run with (derived per point inside grids).
    pub seed: u64,
}

impl FerSample {
    pub fn ci_half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// Exact binomial (Clopper-Pearson) confidence bounds.
pub fn clopper_pearson(errors: usize, frames: usize, confidence: f64) -> (f64, f64) {
    assert!(frames >= 1 && errors <= frames);
    let alpha = 1.0 - confidence;
    let (e, n) = (errors as f64, frames as f64);
    let low = if errors == 0 {
        0.0
    } else {
        Beta::new(e, n - e + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let high = if errors == frames {
        1.0
    } else {
        Beta::new(e + 1.0, n - e).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (low, high)
}

/// BPSK over BI-AWGN at per-quadrature SNR `s`: bits map 0 -> +1, 1 -> -1,
/// noise variance is `1/s`, channel LLR is `2y/sigma^2` clipped to
/// `llr_clip`. Punctured positions carry LLR 0; `s = 0` degenerates to an
/// all-zero LLR vector.
pub fn transmit_frame(view: &CodeView, s: f64, llr_clip: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut rng_frame = rng.clone();
    let k = view.k();
    let mut info = vec![0u8; k];
    fill_random_bits(&mut info, &mut rng_frame);
    let full = view.encode_full(&info).expect("info length matches view");
    let mut llr = vec![0.0; view.total_vars()];
    transmit_into(view, &full, s, llr_clip, &mut rng_frame, &mut llr);
    llr
}

fn fill_random_bits(bits: &mut [u8], rng: &mut ChaCha8Rng) {
    for chunk in bits.chunks_mut(64) {
        let mut word: u64 = rng.gen();
        for b in chunk.iter_mut() {
            *b = (word & 1) as u8;
            word >>= 1;
        }
    }
}

fn transmit_into(
    view: &CodeView,
    full_codeword: &[u8],
    s: f64,
    llr_clip: f64,
    rng: &mut ChaCha8Rng,
    llr_out: &mut [f64],
) {
    if s <= 0.0 {
        llr_out.fill(0.0);
        return;
    }
    let sigma2 = 1.0 / s;
    let sigma = sigma2.sqrt();
    let scale = 2.0 / sigma2;
    for v in 0..view.total_vars() {
        if !view.is_transmitted(v) {
            llr_out[v] = 0.0;
            continue;
        }
        let x = 1.0 - 2.0 * full_codeword[v] as f64;
        let noise: f64 = rng.sample(StandardNormal);
        let y = x + sigma * noise;
        llr_out[v] = (scale * y).clamp(-llr_clip, llr_clip);
    }
}

/// Per-worker scratch: decoder plus frame buffers.
struct FrameWorker {
    decoder: Decoder,
    info: Vec<u8>,
    full: Vec<u8>,
    llr: Vec<f64>,
}

impl FrameWorker {
    fn new(view: &CodeView) -> Self {
        Self {
            decoder: Decoder::for_view(view),
            info: vec![0; view.k()],
            full: Vec::new(),
            llr: vec![0.0; view.total_vars()],
        }
    }

    /// Simulates frame `frame_idx`; returns true on frame error (decoder
    /// failed to converge, or converged to a wrong codeword).
    fn frame_error(&mut self, view: &CodeView, s: f64, cfg: &SimConfig, frame_idx: usize) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(frame_idx as u64);
        fill_random_bits(&mut self.info, &mut rng);
        self.full = view.encode_full(&self.info).expect("info length matches");
        transmit_into(view, &self.full, s, cfg.llr_clip, &mut rng, &mut self.llr);
        let out = self.decoder.decode(&self.llr, cfg.max_iterations);
        if !out.converged {
            return true;
        }
        self.decoder.hard_bits() != &self.full[..]
    }
}

/// Measures the FER at one (view, s) point.
///
/// Simulates frames in index order until `target_errors` errors or
/// `max_frames` frames, whichever comes first; the reported frame count is
/// trimmed to the exact frame at which the target was reached, so the
/// result is a pure function of (seed, outcomes).
pub fn run_fer_point(view: &CodeView, s: f64, cfg: &SimConfig) -> Result<FerSample, SimError> {
    let cfg = cfg.validated()?;
    let outcomes = if cfg.workers == 1 {
        let mut worker = FrameWorker::new(view);
        let mut outcomes = Vec::new();
        let mut errors = 0usize;
        for idx in 0..cfg.max_frames {
            let err = worker.frame_error(view, s, &cfg, idx);
            errors += err as usize;
            outcomes.push(err);
            if errors >= cfg.target_errors {
                break;
            }
        }
        outcomes
    } else {
        run_outcomes_parallel(view, s, &cfg)
    };
    let mut frames = 0usize;
    let mut errors = 0usize;
    for (idx, &err) in outcomes.iter().enumerate() {
        frames = idx + 1;
        errors += err as usize;
        if errors >= cfg.target_errors {
            break;
        }
    }
    let fer = errors as f64 / frames as f64;
    let (ci_low, ci_high) = clopper_pearson(errors, frames, 0.95);
    Ok(FerSample {
        s,
        rate: view.rate(),
        frames,
        frame_errors: errors,
        fer,
        ci_low,
        ci_high,
        seed: cfg.seed,
    })
}

fn run_outcomes_parallel(view: &CodeView, s: f64, cfg: &SimConfig) -> Vec<bool> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .expect("worker pool");
    // Fixed batch size independent of worker count; the error-target scan
    // afterwards trims to the exact stopping frame.
    let batch = 256usize;
    let mut outcomes: Vec<bool> = Vec::new();
    let mut errors = 0usize;
    let mut start = 0usize;
    while start < cfg.max_frames && errors < cfg.target_errors {
        let end = (start + batch).min(cfg.max_frames);
        let chunk: Vec<bool> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map_init(
                    || FrameWorker::new(view),
                    |worker, idx| worker.frame_error(view, s, cfg, idx),
                )
                .collect()
        });
        errors += chunk.iter().filter(|&&e| e).count();
        outcomes.extend(chunk);
        start = end;
    }
    outcomes
}

/// SNR ladder policy for one rate: the initial ladder spans the
/// Shannon-limit SNRs of the rate at the two reconciliation-efficiency
/// bounds (`s = 2^(2R/beta) - 1`), geometrically spaced; it is then expanded
/// geometrically until the measured FERs bracket `fer_window`, or the
/// expansion budget runs out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPolicy {
    pub beta_low: f64,
    pub beta_high: f64,
    pub points: usize,
    pub fer_window: (f64, f64),
    pub max_expansions: usize,
}

impl Default for LadderPolicy {
    fn default() -> Self {
        Self {
            beta_low: 0.5,
            beta_high: 0.99,
            points: 6,
            fer_window: (0.005, 0.9),
            max_expansions: 6,
        }
    }
}

impl LadderPolicy {
    /// Shannon-limit per-quadrature SNR for code rate `r` at efficiency
    /// `beta`: the rate satisfies `r = beta/2 * log2(1 + s)`.
    pub fn shannon_snr(r: f64, beta: f64) -> f64 {
        (2.0f64).powf(2.0 * r / beta) - 1.0
    }

    fn initial_ladder(&self, rate: f64) -> Vec<f64> {
        let s_lo = Self::shannon_snr(rate, self.beta_high);
        let s_hi = Self::shannon_snr(rate, self.beta_low);
        let n = self.points.max(2);
        (0..n)
            .map(|i| s_lo * (s_hi / s_lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }
}

/// All samples measured for one rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFerTable {
    pub rate: f64,
    pub samples: Vec<FerSample>,
    /// True when the measured FERs bracket the policy window; false flags a
    /// partial table (expansion budget exhausted).
    pub window_covered: bool,
}

/// Derives a per-point seed from the campaign seed (splitmix64 over a point
/// tag) so ladder points use disjoint randomness yet stay reproducible.
pub fn point_seed(seed: u64, rate_idx: usize, point_idx: usize) -> u64 {
    let mut x = seed ^ ((rate_idx as u64) << 32 | point_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Runs the MC campaign for each rate in `rates`.
pub fn run_fer_grid(
    code: &Arc<RateAdaptiveCode>,
    rates: &[f64],
    policy: &LadderPolicy,
    cfg: &SimConfig,
) -> Result<Vec<RateFerTable>, SimError> {
    let mut tables = Vec::with_capacity(rates.len());
    for (ri, &rate) in rates.iter().enumerate() {
        let view = extend_to_rate(code, rate)?;
        let mut ladder = policy.initial_ladder(rate);
        let gfactor = if ladder.len() >= 2 {
            ladder[1] / ladder[0]
        } else {
            1.5
        };
        let mut samples: Vec<FerSample> = Vec::new();
        let mut next_point = 0usize;
        for &s in &ladder {
            let mut point_cfg = *cfg;
            point_cfg.seed = point_seed(cfg.seed, ri, next_point);
            next_point += 1;
            samples.push(run_fer_point(&view, s, &point_cfg)?);
        }
        let mut expansions = 0usize;
        loop {
            let max_fer = samples.iter().map(|x| x.fer).fold(0.0, f64::max);
            let min_fer = samples.iter().map(|x| x.fer).fold(1.0, f64::min);
            if (max_fer >= policy.fer_window.1 && min_fer <= policy.fer_window.0)
                || expansions >= policy.max_expansions
            {
                break;
            }
            let s_new = if max_fer < policy.fer_window.1 {
                ladder.first().unwrap() / gfactor
            } else {
                ladder.last().unwrap() * gfactor
            };
            if max_fer < policy.fer_window.1 {
                ladder.insert(0, s_new);
            } else {
                ladder.push(s_new);
            }
            let mut point_cfg = *cfg;
            point_cfg.seed = point_seed(cfg.seed, ri, next_point);
            next_point += 1;
            samples.push(run_fer_point(&view, s_new, &point_cfg)?);
            expansions += 1;
        }
        samples.sort_by(|a, b| a.s.partial_cmp(&b.s).unwrap());
        let max_fer = samples.iter().map(|x| x.fer).fold(0.0, f64::max);
        let min_fer = samples.iter().map(|x| x.fer).fold(1.0, f64::min);
        let window_covered = max_fer >= policy.fer_window.1 && min_fer <= policy.fer_window.0;
        tables.push(RateFerTable {
            rate,
            samples,
            window_covered,
        });
    }
    Ok(tables)
}

pub const SAMPLES_CSV_HEADER: &str = "rate,s_linear,s_db,frames,errors,fer,ci_low,ci_high,seed";

/// Writes one rate table in the documented CSV schema.
pub fn write_samples_csv<W: Write>(mut w: W, table: &RateFerTable) -> Result<(), SimError> {
    writeln!(w, "{SAMPLES_CSV_HEADER}")?;
    for sm in &table.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            sm.rate,
            sm.s,
            10.0 * sm.s.log10(),
            sm.frames,
            sm.frame_errors,
            sm.fer,
            sm.ci_low,
            sm.ci_high,
            sm.seed
        )?;
    }
    Ok(())
}

/// Reads samples back; rows may mix rates, grouping is by exact rate value
/// in order of first appearance.
pub fn read_samples_csv<R: BufRead>(r: R) -> Result<Vec<RateFerTable>, SimError> {
    let mut tables: Vec<RateFerTable> = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == SAMPLES_CSV_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(SimError::CsvParse {
                line: lineno + 1,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let parse_f = |i: usize| -> Result<f64, SimError> {
            fields[i].parse().map_err(|_| SimError::CsvParse {
                line: lineno + 1,
                msg: format!("bad float '{}'", fields[i]),
            })
        };
        let parse_u = |i: usize| -> Result<u64, SimError> {
            fields[i].parse().map_err(|_| SimError::CsvParse {
                line: lineno + 1,
                msg: format!("bad integer '{}'", fields[i]),
            })
        };
        let sample = FerSample {
            rate: parse_f(0)?,
            s: parse_f(1)?,
            frames: parse_u(3)? as usize,
            frame_errors: parse_u(4)? as usize,
            fer: parse_f(5)?,
            ci_low: parse_f(6)?,
            ci_high: parse_f(7)?,
            seed: parse_u(8)?,
        };
        match tables.iter_mut().find(|t| t.rate == sample.rate) {
            Some(t) => t.samples.push(sample),
            None => tables.push(RateFerTable {
                rate: sample.rate,
                samples: vec![sample],
                window_covered: true,
            }),
        }
    }
    Ok(tables)
}
