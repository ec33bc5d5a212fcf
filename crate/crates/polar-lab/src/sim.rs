//! BPSK/AWGN Monte-Carlo harness: FER/BER estimation, latency statistics and
//! the design-space explorer.
//!
//! Determinism contract: every frame draws its randomness from a ChaCha8
//! stream keyed by (seed, frame index), so results are bit-identical across
//! runs and independent of the worker count. Time-capped runs are the one
//! documented exception.

use crate::code::{CodeError, CodeSpec, Construction, PmMode, Rate};
use crate::crc::CrcParams;
use crate::decoder::{Decoder, SATURATION_LLR};
use crate::encoder::{EncodeError, SystematicEncoder};
use rand_core::{RngCore, SeedableRng};
use std::io::Write;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("rate_info must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("csv write failed: {0}")]
    Csv(#[from] std::io::Error),
}

/// Default seed; the POLAR_LAB_SEED environment variable overrides it.
pub const DEFAULT_SEED: u64 = 0x5EED_2025;

pub fn seed_from_env() -> u64 {
    std::env::var("POLAR_LAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// sigma = sqrt(1 / (2 * rate_info * 10^(ebn0/10))) for unit-energy BPSK.
///
/// `rate_info` counts information bits only (CRC is overhead).
pub fn ebn0_to_sigma(ebn0_db: f64, rate_info: f64) -> Result<f64, SimError> {
    if rate_info <= 0.0 {
        return Err(SimError::NonPositiveRate(rate_info));
    }
    Ok((1.0 / (2.0 * rate_info * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Frame-indexed RNG: same seed and index give the same stream everywhere.
pub fn frame_rng(seed: u64, frame: u64) -> rand_chacha::ChaCha8Rng {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

#[inline]
fn uniform_open(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    // (0, 1]
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
}

/// Gaussian pairs via the Marsaglia polar form of Box-Muller (no sin/cos,
/// documented and platform-stable up to libm's ln/sqrt).
pub struct GaussianSource {
    rng: rand_chacha::ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(rng: rand_chacha::ChaCha8Rng) -> Self {
        Self { rng, spare: None }
    }

    pub fn rng_mut(&mut self) -> &mut rand_chacha::ChaCha8Rng {
        &mut self.rng
    }

    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * uniform_open(&mut self.rng) - 1.0;
            let v = 2.0 * uniform_open(&mut self.rng) - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// BPSK over AWGN: y = (1-2x) + sigma*n, llr = 2y/sigma^2. Shortened
/// positions are appended with the saturation LLR (known zeros).
pub fn bpsk_awgn(
    codeword: &[u8],
    sigma: f64,
    noise: &mut GaussianSource,
    n_mother: usize,
) -> Vec<f32> {
    let scale = 2.0 / (sigma * sigma);
    let mut llr = Vec::with_capacity(n_mother);
    for &x in codeword {
        let y = (1.0 - 2.0 * x as f64) + sigma * noise.next_gaussian();
        llr.push((scale * y) as f32);
    }
    llr.resize(n_mother, SATURATION_LLR);
    llr
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    ErrorTarget,
    FrameCap,
    TimeCap,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::ErrorTarget => write!(f, "error_target"),
            StopReason::FrameCap => write!(f, "frame_cap"),
            StopReason::TimeCap => write!(f, "time_cap"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StopRules {
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub max_time: Option<Duration>,
}

impl Default for StopRules {
    fn default() -> Self {
        Self {
            min_frame_errors: 100,
            max_frames: 1_000_000_000,
            max_time: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub stop_reason: StopReason,
    /// Frames whose final answer came from schedule stage i (0 = SC).
    pub stage_frames: Vec<u64>,
}

impl SimResult {
    /// Monte-Carlo standard error of the FER estimate.
    pub fn fer_std_error(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        (self.fer * (1.0 - self.fer) / self.frames as f64).sqrt()
    }
}

/// Everything fixed about a code needed to simulate frames.
pub struct SimContext {
    pub spec: CodeSpec,
    pub encoder: SystematicEncoder,
    pub crc: Option<CrcParams>,
}

impl SimContext {
    pub fn new(spec: &CodeSpec) -> Result<Self, SimError> {
        let frozen = spec.frozen_set()?;
        Ok(Self {
            spec: spec.clone(),
            encoder: SystematicEncoder::new(&frozen, spec.n_tx),
            crc: spec.crc_params()?,
        })
    }

    /// Transmitted payload (info then CRC) for one frame's RNG.
    pub fn draw_payload(&self, rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<u8>, Vec<u8>) {
        let k = self.spec.k_info;
        let info: Vec<u8> = (0..k).map(|_| (rng.next_u32() & 1) as u8).collect();
        let mut payload = info.clone();
        if let Some(crc) = &self.crc {
            payload.extend(crc.compute_bits(&info));
        }
        (info, payload)
    }

    /// Encode + channel for one frame index; returns (info bits, LLR frame).
    pub fn frame(&self, seed: u64, idx: u64, sigma: f64) -> (Vec<u8>, Vec<f32>) {
        let mut rng = frame_rng(seed, idx);
        let (info, payload) = self.draw_payload(&mut rng);
        let cw = self.encoder.encode_bits(&payload).expect("validated spec");
        let mut noise = GaussianSource::new(rng);
        let llr = bpsk_awgn(&cw, sigma, &mut noise, self.spec.n_mother);
        (info, llr)
    }
}

struct BatchCounters {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
    stage_frames: Vec<u64>,
}

impl BatchCounters {
    fn new(stages: usize) -> Self {
        Self {
            frames: 0,
            frame_errors: 0,
            bit_errors: 0,
            stage_frames: vec![0; stages],
        }
    }

    fn merge(&mut self, other: &BatchCounters) {
        self.frames += other.frames;
        self.frame_errors += other.frame_errors;
        self.bit_errors += other.bit_errors;
        for (a, b) in self.stage_frames.iter_mut().zip(&other.stage_frames) {
            *a += b;
        }
    }
}

fn simulate_range(
    ctx: &SimContext,
    dec: &mut Decoder,
    seed: u64,
    sigma: f64,
    frames: impl Iterator<Item = u64>,
    counters: &mut BatchCounters,
) {
    for idx in frames {
        let (info, llr) = ctx.frame(seed, idx, sigma);
        let out = dec.ascl_decode(&llr);
        let bit_errs = info
            .iter()
            .zip(&out.info)
            .filter(|(a, b)| a != b)
            .count() as u64;
        counters.frames += 1;
        counters.bit_errors += bit_errs;
        if bit_errs > 0 {
            counters.frame_errors += 1;
        }
        counters.stage_frames[out.stage as usize] += 1;
    }
}

/// Monte-Carlo FER at one operating point. Frame errors compare decoded info
/// bits with the transmitted ones. Stops at the first satisfied rule,
/// evaluated on deterministic frame-count boundaries.
pub fn run_fer(
    spec: &CodeSpec,
    ebn0_db: f64,
    stop: &StopRules,
    seed: u64,
    workers: usize,
) -> Result<SimResult, SimError> {
    let ctx = SimContext::new(spec)?;
    let sigma = ebn0_to_sigma(ebn0_db, spec.rate_info())?;
    let stages = spec.list_schedule.len() + 1;
    let workers = workers.max(1);
    let started = Instant::now();
    let mut total = BatchCounters::new(stages);
    let mut next_frame = 0u64;
    let batch = 4096u64;
    let mut reason = StopReason::FrameCap;
    let mut decoders: Vec<Decoder> = (0..workers)
        .map(|_| Decoder::new(spec))
        .collect::<Result<_, _>>()?;
    loop {
        if total.frame_errors >= stop.min_frame_errors {
            reason = StopReason::ErrorTarget;
            break;
        }
        if total.frames >= stop.max_frames {
            reason = StopReason::FrameCap;
            break;
        }
        if let Some(cap) = stop.max_time {
            if started.elapsed() >= cap {
                reason = StopReason::TimeCap;
                break;
            }
        }
        let end = (next_frame + batch).min(stop.max_frames);
        if workers == 1 {
            let mut c = BatchCounters::new(stages);
            simulate_range(&ctx, &mut decoders[0], seed, sigma, next_frame..end, &mut c);
            total.merge(&c);
        } else {
            let results: Vec<BatchCounters> = std::thread::scope(|scope| {
                let ctx = &ctx;
                let handles: Vec<_> = decoders
                    .iter_mut()
                    .enumerate()
                    .map(|(w, dec)| {
                        scope.spawn(move || {
                            let mut c = BatchCounters::new(stages);
                            let frames =
                                (next_frame..end).filter(|idx| (idx % workers as u64) == w as u64);
                            simulate_range(ctx, dec, seed, sigma, frames, &mut c);
                            c
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
            for c in &results {
                total.merge(c);
            }
        }
        next_frame = end;
    }
    let frames = total.frames.max(1);
    Ok(SimResult {
        ebn0_db,
        frames: total.frames,
        frame_errors: total.frame_errors,
        bit_errors: total.bit_errors,
        fer: total.frame_errors as f64 / frames as f64,
        ber: total.bit_errors as f64 / (frames as f64 * spec.k_info as f64),
        stop_reason: reason,
        stage_frames: total.stage_frames,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyStats {
    pub samples: usize,
    pub avg_us: f64,
    pub p50_us: f64,
    pub p99_us: f64,
    pub p999_us: f64,
    pub worst_us: f64,
}

/// Wall-clock per-frame timing of `decode` alone; encode and channel run
/// untimed beforehand. Warmup frames are discarded.
pub fn measure_latency(
    mut decode: impl FnMut(&[f32]),
    frames: &[Vec<f32>],
    warmup: usize,
) -> LatencyStats {
    assert!(frames.len() > warmup, "need frames beyond warmup");
    let mut samples = Vec::with_capacity(frames.len() - warmup);
    for (i, llr) in frames.iter().enumerate() {
        let t0 = Instant::now();
        decode(llr);
        let dt = t0.elapsed();
        if i >= warmup {
            samples.push(dt.as_secs_f64() * 1e6);
        }
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let pct = |q: f64| samples[(((n as f64) * q) as usize).min(n - 1)];
    LatencyStats {
        samples: n,
        avg_us: samples.iter().sum::<f64>() / n as f64,
        p50_us: pct(0.50),
        p99_us: pct(0.99),
        p999_us: pct(0.999),
        worst_us: samples[n - 1],
    }
}

/// Pre-generated noisy frames for latency runs (generation excluded from
/// timing).
pub fn latency_frames(
    spec: &CodeSpec,
    ebn0_db: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f32>>, SimError> {
    let ctx = SimContext::new(spec)?;
    let sigma = ebn0_to_sigma(ebn0_db, spec.rate_info())?;
    Ok((0..count as u64)
        .map(|idx| ctx.frame(seed, idx, sigma).1)
        .collect())
}

#[derive(Clone, Debug)]
pub struct ExploreGrid {
    pub constructions: Vec<Construction>,
    pub crcs: Vec<(u32, u32)>,
    pub lists: Vec<usize>,
}

impl ExploreGrid {
    /// The criterion grid: {GA, 5G} x {CRC 8, 12, 16} x {L 8, 32, 64}.
    pub fn standard() -> Self {
        Self {
            constructions: vec![Construction::FiveG, Construction::Ga],
            crcs: vec![(8, 0x9B), (12, 0xF13), (16, 0x8005)],
            lists: vec![8, 32, 64],
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExploreRow {
    pub k_info: usize,
    pub rate: Rate,
    pub construction: Construction,
    pub crc_width: u32,
    pub crc_poly: u32,
    pub l_max: usize,
    pub target_fer: f64,
    pub ebn0_db: f64,
    pub fer: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub lat_avg_us: f64,
    pub lat_p99_us: f64,
    pub lat_worst_us: f64,
    pub stop_reason: String,
}

pub const CSV_HEADER: &str = "k_info,rate,construction,crc_width,crc_poly,L_max,target_fer,\
ebn0_db,fer,frames,frame_errors,lat_avg_us,lat_p99_us,lat_worst_us,stop_reason";

impl ExploreRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:#x},{},{},{:.2},{:.6e},{},{},{:.3},{:.3},{:.3},{}",
            self.k_info,
            self.rate,
            self.construction,
            self.crc_width,
            self.crc_poly,
            self.l_max,
            self.target_fer,
            self.ebn0_db,
            self.fer,
            self.frames,
            self.frame_errors,
            self.lat_avg_us,
            self.lat_p99_us,
            self.lat_worst_us,
            self.stop_reason
        )
    }
}

fn doubling_schedule(l_max: usize) -> Vec<usize> {
    let mut schedule = Vec::new();
    let mut l = 2;
    while l <= l_max {
        schedule.push(l);
        l *= 2;
    }
    schedule
}

/// Spec variant for one grid point.
fn grid_spec(
    base: &CodeSpec,
    construction: Construction,
    crc: (u32, u32),
    l_max: usize,
) -> Result<CodeSpec, CodeError> {
    CodeSpec::new(
        base.k_info,
        crc.0 as usize,
        crc.1,
        base.rate,
        construction,
        base.design_snr_db.or(Some(3.0)),
        doubling_schedule(l_max),
        base.pm_mode,
    )
}

/// Bisection on Eb/N0 to the point reaching the target FER, 0.05 dB
/// resolution. Returns the achieving Eb/N0 and its measurement.
fn find_operating_point(
    spec: &CodeSpec,
    target_fer: f64,
    seed: u64,
    workers: usize,
) -> Result<(f64, SimResult), SimError> {
    let stop = StopRules {
        min_frame_errors: 100,
        max_frames: ((200.0 / target_fer) as u64).max(20_000),
        max_time: None,
    };
    let guess = spec.design_snr_db.unwrap_or(3.0);
    let mut lo = guess - 3.0;
    let mut hi = guess;
    let mut hi_result = run_fer(spec, hi, &stop, seed, workers)?;
    let mut tries = 0;
    while hi_result.fer > target_fer {
        lo = hi;
        hi += 1.0;
        hi_result = run_fer(spec, hi, &stop, seed, workers)?;
        tries += 1;
        if tries > 12 {
            return Ok((f64::NAN, hi_result));
        }
    }
    // ensure lo is genuinely above target
    loop {
        let lo_result = run_fer(spec, lo, &stop, seed, workers)?;
        if lo_result.fer > target_fer || lo <= guess - 6.0 {
            break;
        }
        hi = lo;
        hi_result = lo_result;
        lo -= 1.0;
    }
    while hi - lo > 0.05 {
        let mid = 0.5 * (lo + hi);
        let mid_result = run_fer(spec, mid, &stop, seed, workers)?;
        if mid_result.fer <= target_fer {
            hi = mid;
            hi_result = mid_result;
        } else {
            lo = mid;
        }
    }
    // snap to the 0.05 dB grid
    let ebn0 = (hi / 0.05).round() * 0.05;
    Ok((ebn0, hi_result))
}

/// One CSV row per grid point; per-point failures are recorded in the row
/// and the run continues.
pub fn explore(
    base: &CodeSpec,
    grid: &ExploreGrid,
    target_fer: f64,
    seed: u64,
    workers: usize,
    mut progress: Option<&mut dyn Write>,
) -> Vec<ExploreRow> {
    let mut rows = Vec::new();
    for &construction in &grid.constructions {
        for &crc in &grid.crcs {
            for &l_max in &grid.lists {
                let mut row = ExploreRow {
                    k_info: base.k_info,
                    rate: base.rate,
                    construction,
                    crc_width: crc.0,
                    crc_poly: crc.1,
                    l_max,
                    target_fer,
                    ebn0_db: f64::NAN,
                    fer: f64::NAN,
                    frames: 0,
                    frame_errors: 0,
                    lat_avg_us: 0.0,
                    lat_p99_us: 0.0,
                    lat_worst_us: 0.0,
                    stop_reason: "failed".to_string(),
                };
                match explore_point(base, construction, crc, l_max, target_fer, seed, workers) {
                    Ok(filled) => row = filled,
                    Err(e) => row.stop_reason = format!("failed: {e}"),
                }
                if let Some(out) = progress.as_deref_mut() {
                    let _ = writeln!(out, "{}", row.csv_line());
                }
                rows.push(row);
            }
        }
    }
    rows
}

fn explore_point(
    base: &CodeSpec,
    construction: Construction,
    crc: (u32, u32),
    l_max: usize,
    target_fer: f64,
    seed: u64,
    workers: usize,
) -> Result<ExploreRow, SimError> {
    let spec = grid_spec(base, construction, crc, l_max)?;
    let (ebn0, result) = find_operating_point(&spec, target_fer, seed, workers)?;
    let (lat_avg, lat_p99, lat_worst) = if ebn0.is_finite() {
        let frames = latency_frames(&spec, ebn0, 3000, seed ^ 0xBEEF)?;
        let mut dec = Decoder::new(&spec)?;
        let stats = measure_latency(|llr| drop(dec.ascl_decode(llr)), &frames, 500);
        (stats.avg_us, stats.p99_us, stats.worst_us)
    } else {
        (0.0, 0.0, 0.0)
    };
    Ok(ExploreRow {
        k_info: spec.k_info,
        rate: spec.rate,
        construction,
        crc_width: crc.0,
        crc_poly: crc.1,
        l_max,
        target_fer,
        ebn0_db: ebn0,
        fer: result.fer,
        frames: result.frames,
        frame_errors: result.frame_errors,
        lat_avg_us: lat_avg,
        lat_p99_us: lat_p99,
        lat_worst_us: lat_worst,
        stop_reason: if ebn0.is_finite() {
            result.stop_reason.to_string()
        } else {
            "failed: no bracket".to_string()
        },
    })
}

pub fn write_csv(rows: &[ExploreRow], path: &std::path::Path) -> Result<(), SimError> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{CodeSpec, Construction, PmMode, Rate};

    fn toy_spec() -> CodeSpec {
        CodeSpec::new(
            24,
            8,
            0x9B,
            Rate::new(1, 2).unwrap(),
            Construction::FiveG,
            None,
            vec![2, 4],
            PmMode::Approximate,
        )
        .unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert!((ebn0_to_sigma(0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((ebn0_to_sigma(0.0, 0.25).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((ebn0_to_sigma(3.0103, 0.5).unwrap() - 0.70711).abs() < 1e-4);
        assert!(ebn0_to_sigma(1.0, 0.0).is_err());
    }

    #[test]
    fn llr_mean_moment_check() {
        // E[llr | x=0] = 2/sigma^2 within 3 standard errors
        let sigma = 0.8;
        let mut noise = GaussianSource::new(frame_rng(42, 0));
        let n = 1_000_000usize;
        let cw = vec![0u8; 256];
        let mut sum = 0.0f64;
        let mut count = 0usize;
        for _ in 0..n / 256 {
            let llr = bpsk_awgn(&cw, sigma, &mut noise, 256);
            for v in llr {
                sum += v as f64;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let expect = 2.0 / (sigma * sigma);
        // var(llr) = 4/sigma^2
        let se = (4.0 / (sigma * sigma) / count as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean {mean} expect {expect} se {se}"
        );
    }

    #[test]
    fn noiseless_limit_recovers_exactly() {
        let spec = toy_spec();
        let ctx = SimContext::new(&spec).unwrap();
        let mut dec = Decoder::new(&spec).unwrap();
        for idx in 0..20 {
            let mut rng = frame_rng(7, idx);
            let (info, payload) = ctx.draw_payload(&mut rng);
            let cw = ctx.encoder.encode_bits(&payload).unwrap();
            let mut noise = GaussianSource::new(rng);
            let llr = bpsk_awgn(&cw, 1e-3, &mut noise, spec.n_mother);
            let out = dec.ascl_decode(&llr);
            assert_eq!(out.info, info);
        }
    }

    #[test]
    fn frames_are_deterministic() {
        let spec = toy_spec();
        let ctx = SimContext::new(&spec).unwrap();
        let (i1, l1) = ctx.frame(99, 5, 0.9);
        let (i2, l2) = ctx.frame(99, 5, 0.9);
        assert_eq!(i1, i2);
        assert_eq!(l1, l2);
        let (_, l3) = ctx.frame(99, 6, 0.9);
        assert_ne!(l1, l3);
    }

    #[test]
    fn run_fer_noiseless_hits_frame_cap() {
        let spec = toy_spec();
        let stop = StopRules {
            min_frame_errors: 10,
            max_frames: 500,
            max_time: None,
        };
        let result = run_fer(&spec, 40.0, &stop, 3, 1).unwrap();
        assert_eq!(result.frames, 500);
        assert_eq!(result.frame_errors, 0);
        assert_eq!(result.fer, 0.0);
        assert_eq!(result.stop_reason, StopReason::FrameCap);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let spec = toy_spec();
        let stop = StopRules {
            min_frame_errors: 30,
            max_frames: 20_000,
            max_time: None,
        };
        let a = run_fer(&spec, 2.0, &stop, 11, 1).unwrap();
        let b = run_fer(&spec, 2.0, &stop, 11, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn escalation_accounting_sums_to_total() {
        let spec = toy_spec();
        let stop = StopRules {
            min_frame_errors: 50,
            max_frames: 5_000,
            max_time: None,
        };
        let r = run_fer(&spec, 1.0, &stop, 17, 2).unwrap();
        assert_eq!(r.stage_frames.iter().sum::<u64>(), r.frames);
        assert!(r.frame_errors <= r.frames);
        assert!(r.fer >= 0.0 && r.fer <= 1.0);
    }

    #[test]
    fn latency_stats_invariants() {
        let spec = toy_spec();
        let frames = latency_frames(&spec, 3.0, 200, 5).unwrap();
        let mut dec = Decoder::new(&spec).unwrap();
        let stats = measure_latency(|llr| drop(dec.ascl_decode(llr)), &frames, 50);
        assert_eq!(stats.samples, 150);
        assert!(stats.avg_us <= stats.worst_us);
        assert!(stats.p50_us <= stats.p99_us);
        assert!(stats.p99_us <= stats.p999_us);
        assert!(stats.p999_us <= stats.worst_us);
    }

    #[test]
    fn grid_row_count_is_cartesian() {
        let grid = ExploreGrid {
            constructions: vec![Construction::FiveG, Construction::Ga],
            crcs: vec![(8, 0x9B), (12, 0xF13), (10, 0x3D9)],
            lists: vec![2, 4],
        };
        assert_eq!(
            grid.constructions.len() * grid.crcs.len() * grid.lists.len(),
            12
        );
    }
}
