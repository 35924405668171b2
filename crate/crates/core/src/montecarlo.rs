//! Event-level simulation of the retransmission protocol, single and dual
//! source, over non-coherent AWGN and Rician channels.
//!
//! Orthogonal messages are the standard basis in `2^B` complex dimensions,
//! so a matched-filter bank reduces to one complex sample per codeword and
//! the square-law statistics accumulate across rounds exactly as the
//! analysis assumes.
//!
//! Per-trial randomness is derived from `(seed, trial index)`, and partial
//! results are reduced in fixed chunk order, so a run is bit-identical
//! whether it executes sequentially or on the rayon pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dual::DualSchedule;
use crate::error::Error;
use crate::protocol::EnergySchedule;
use crate::quantizer::{compatible_set, QuantizerKind, QuantizerSpec};
use crate::sources::{Distribution, SourceConfig, SourceModel, SQRT_3};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    AwgnNoncoherent,
    Rician,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelModel,
    /// NLOS energy fraction (Rician only; ignored for AWGN).
    pub alpha: f64,
    pub n0: f64,
}

impl ChannelSpec {
    pub fn awgn(n0: f64) -> Self {
        ChannelSpec {
            kind: ChannelModel::AwgnNoncoherent,
            alpha: 0.0,
            n0,
        }
    }

    pub fn rician(alpha: f64, n0: f64) -> Self {
        ChannelSpec {
            kind: ChannelModel::Rician,
            alpha,
            n0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > 0.0) {
            return Err(Error::config("n0 must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("alpha must lie in [0,1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolSchedule {
    Single(EnergySchedule),
    Dual(DualSchedule),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub source: SourceConfig,
    pub quantizer: QuantizerSpec,
    pub schedule: ProtocolSchedule,
    pub channel: ChannelSpec,
    pub trials: u64,
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.channel.validate()?;
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        if self.source.dimension != 1 {
            return Err(Error::config("protocol trials use scalar sources (K = 1)"));
        }
        if self.quantizer.bits > 16 {
            return Err(Error::config("codebook size limited to 2^16"));
        }
        match &self.schedule {
            ProtocolSchedule::Single(s) => {
                s.validate()?;
                if (s.n0 - self.channel.n0).abs() > 1e-12 * s.n0 {
                    return Err(Error::config("schedule and channel disagree on n0"));
                }
            }
            ProtocolSchedule::Dual(s) => {
                s.validate()?;
                if (s.n0 - self.channel.n0).abs() > 1e-12 * s.n0 {
                    return Err(Error::config("schedule and channel disagree on n0"));
                }
                if s.bits != self.quantizer.bits {
                    return Err(Error::config("schedule and quantizer disagree on B"));
                }
            }
        }
        Ok(())
    }
}

/// Tallies of the protocol error events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    /// Data decision wrong at the end of round 1 (either source, for dual).
    pub round1_error: u64,
    /// A transmitted NACK was missed.
    pub uncorrectable: u64,
    /// A silent control phase was read as a NACK.
    pub misdetect: u64,
    /// Decision still wrong after the final round.
    pub final_error: u64,
    /// Dual runs: exactly one source wrong after round 1.
    pub one_source_error: u64,
    /// Dual runs: both sources wrong after round 1.
    pub both_sources_error: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub trials: u64,
    /// Mean squared error (summed over sources for dual runs).
    pub empirical_mse: f64,
    pub mse_stderr: f64,
    /// Per-source MSE (length 1 for single-source runs).
    pub per_source_mse: Vec<f64>,
    /// `rate[i]`: fraction of trials reaching round `i+1` whose cumulative
    /// decision was wrong at the end of that round.
    pub per_round_error_rate: Vec<f64>,
    /// Fraction of trials that started a second round.
    pub retransmission_rate: f64,
    pub measured_avg_energy: f64,
    pub energy_stderr: f64,
    pub counts: EventCounts,
}

// Fixed-size work unit; reduction happens in chunk order regardless of the
// executing thread.
const CHUNK: u64 = 8192;

#[derive(Debug, Clone)]
struct Accum {
    trials: u64,
    sum_d: f64,
    sum_d2: f64,
    sum_src: [f64; 2],
    round_reached: Vec<u64>,
    round_wrong: Vec<u64>,
    retx: u64,
    sum_energy: f64,
    sum_energy2: f64,
    counts: EventCounts,
}

impl Accum {
    fn new(rounds: usize) -> Self {
        Accum {
            trials: 0,
            sum_d: 0.0,
            sum_d2: 0.0,
            sum_src: [0.0; 2],
            round_reached: vec![0; rounds],
            round_wrong: vec![0; rounds],
            retx: 0,
            sum_energy: 0.0,
            sum_energy2: 0.0,
            counts: EventCounts::default(),
        }
    }

    fn merge(mut self, other: &Accum) -> Self {
        self.trials += other.trials;
        self.sum_d += other.sum_d;
        self.sum_d2 += other.sum_d2;
        self.sum_src[0] += other.sum_src[0];
        self.sum_src[1] += other.sum_src[1];
        for i in 0..self.round_reached.len() {
            self.round_reached[i] += other.round_reached[i];
            self.round_wrong[i] += other.round_wrong[i];
        }
        self.retx += other.retx;
        self.sum_energy += other.sum_energy;
        self.sum_energy2 += other.sum_energy2;
        self.counts.round1_error += other.counts.round1_error;
        self.counts.uncorrectable += other.counts.uncorrectable;
        self.counts.misdetect += other.counts.misdetect;
        self.counts.final_error += other.counts.final_error;
        self.counts.one_source_error += other.counts.one_source_error;
        self.counts.both_sources_error += other.counts.both_sources_error;
        self
    }

    fn into_stats(self, n_sources: usize) -> SimStats {
        let n = self.trials as f64;
        let mse = self.sum_d / n;
        let var = (self.sum_d2 / n - mse * mse).max(0.0);
        let avg_e = self.sum_energy / n;
        let var_e = (self.sum_energy2 / n - avg_e * avg_e).max(0.0);
        SimStats {
            trials: self.trials,
            empirical_mse: mse,
            mse_stderr: (var / n).sqrt(),
            per_source_mse: self.sum_src[..n_sources].iter().map(|s| s / n).collect(),
            per_round_error_rate: self
                .round_reached
                .iter()
                .zip(&self.round_wrong)
                .map(|(&r, &w)| if r == 0 { 0.0 } else { w as f64 / r as f64 })
                .collect(),
            retransmission_rate: self.retx as f64 / n,
            measured_avg_energy: avg_e,
            energy_stderr: (var_e / n).sqrt(),
            counts: self.counts,
        }
    }
}

// splitmix64 finalizer: decorrelates per-trial streams from (seed, index).
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut z = seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

#[derive(Clone, Copy)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    fn norm2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    fn add(self, o: Complex) -> Complex {
        Complex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

fn noise<R: Rng>(rng: &mut R, n0: f64) -> Complex {
    let s = (0.5 * n0).sqrt();
    Complex {
        re: s * rng.sample::<f64, _>(StandardNormal),
        im: s * rng.sample::<f64, _>(StandardNormal),
    }
}

// Received complex amplitude for a transmission of energy `e`: fresh uniform
// phase each round, plus a fresh Rayleigh component on the Rician channel.
fn channel_gain<R: Rng>(rng: &mut R, channel: &ChannelSpec, e: f64) -> Complex {
    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
    match channel.kind {
        ChannelModel::AwgnNoncoherent => Complex {
            re: e.sqrt() * phase.cos(),
            im: e.sqrt() * phase.sin(),
        },
        ChannelModel::Rician => {
            let los = ((1.0 - channel.alpha) * e).sqrt();
            let fade = (0.5 * channel.alpha * e).sqrt();
            Complex {
                re: los * phase.cos() + fade * rng.sample::<f64, _>(StandardNormal),
                im: los * phase.sin() + fade * rng.sample::<f64, _>(StandardNormal),
            }
        }
    }
}

// One data phase: add |<Y, S_k>|^2 to every codeword statistic.
fn data_phase<R: Rng>(
    rng: &mut R,
    channel: &ChannelSpec,
    energy: f64,
    sent: usize,
    stats: &mut [f64],
) {
    let gain = channel_gain(rng, channel, energy);
    for (k, s) in stats.iter_mut().enumerate() {
        let mut y = noise(rng, channel.n0);
        if k == sent {
            y = y.add(gain);
        }
        *s += y.norm2();
    }
}

// One control phase. Returns (nack_detected, energy_spent).
fn control_phase<R: Rng>(
    rng: &mut R,
    channel: &ChannelSpec,
    ec: f64,
    lambda: f64,
    decision_wrong: bool,
) -> (bool, f64) {
    let mut y = noise(rng, channel.n0);
    let mut spent = 0.0;
    if decision_wrong {
        y = y.add(channel_gain(rng, channel, ec));
        spent = ec;
    }
    (y.norm2() > lambda * ec, spent)
}

fn argmax(stats: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (k, &v) in stats.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = k;
        }
    }
    best
}

fn draw_scalar<R: Rng>(rng: &mut R, distribution: Distribution) -> f64 {
    match distribution {
        Distribution::Uniform => (2.0 * rng.gen::<f64>() - 1.0) * SQRT_3,
        Distribution::Gaussian => rng.sample(StandardNormal),
    }
}

fn single_trial(cfg: &TrialConfig, sched: &EnergySchedule, trial: u64, acc: &mut Accum) {
    let mut rng = trial_rng(cfg.seed, trial);
    let u = draw_scalar(&mut rng, cfg.source.distribution);
    let sent = cfg.quantizer.quantize(u);
    let n_codewords = cfg.quantizer.levels.len();
    let mut stats = vec![0.0f64; n_codewords];
    let n_rounds = sched.n_rounds();
    let mut energy = 0.0;
    let mut decision = 0usize;

    for round in 0..n_rounds {
        energy += sched.ed[round];
        data_phase(&mut rng, &cfg.channel, sched.ed[round], sent, &mut stats);
        decision = argmax(&stats);
        let wrong = decision != sent;
        acc.round_reached[round] += 1;
        acc.round_wrong[round] += wrong as u64;
        if round == 0 {
            acc.counts.round1_error += wrong as u64;
        }
        if round + 1 == n_rounds {
            break;
        }
        let (nack, spent) =
            control_phase(&mut rng, &cfg.channel, sched.ec[round], sched.lambda, wrong);
        energy += spent;
        if wrong && !nack {
            acc.counts.uncorrectable += 1;
        }
        if !wrong && nack {
            acc.counts.misdetect += 1;
        }
        if round == 0 && nack {
            acc.retx += 1;
        }
        if !nack {
            break;
        }
    }

    let err = u - cfg.quantizer.reconstruct(decision);
    let d = err * err;
    acc.counts.final_error += (decision != sent) as u64;
    acc.trials += 1;
    acc.sum_d += d;
    acc.sum_d2 += d * d;
    acc.sum_src[0] += d;
    acc.sum_energy += energy;
    acc.sum_energy2 += energy * energy;
}

// Decoder-side compatibility: forward sets J[k] (allowed second-source bins
// per first-source bin) and the transposed sets for re-deciding one source
// while the other stays fixed.
struct CompatMaps {
    forward: Vec<Vec<usize>>,
    reverse: Vec<Vec<usize>>,
}

fn compat_maps(q: &QuantizerSpec, theta: f64, rho: f64) -> CompatMaps {
    let n = q.levels.len();
    let forward: Vec<Vec<usize>> = (0..n).map(|k| compatible_set(q, k, theta, rho)).collect();
    let mut reverse = vec![Vec::new(); n];
    for (k, js) in forward.iter().enumerate() {
        for &l in js {
            reverse[l].push(k);
        }
    }
    CompatMaps { forward, reverse }
}

// Joint argmax over compatible pairs (k, l in J[k]).
fn joint_argmax(stats1: &[f64], stats2: &[f64], maps: &CompatMaps) -> (usize, usize) {
    let mut best = (0usize, 0usize);
    let mut best_v = f64::NEG_INFINITY;
    for (k, js) in maps.forward.iter().enumerate() {
        for &l in js {
            let v = stats1[k] + stats2[l];
            if v > best_v {
                best_v = v;
                best = (k, l);
            }
        }
    }
    best
}

fn constrained_argmax(stats: &[f64], allowed: &[usize]) -> usize {
    let mut best = allowed[0];
    let mut best_v = f64::NEG_INFINITY;
    for &k in allowed {
        if stats[k] > best_v {
            best_v = stats[k];
            best = k;
        }
    }
    best
}

fn dual_trial(
    cfg: &TrialConfig,
    sched: &DualSchedule,
    maps: &CompatMaps,
    trial: u64,
    acc: &mut Accum,
) {
    let mut rng = trial_rng(cfg.seed, trial);
    let pair = crate::sources::sample_pair_with(&cfg.source, &mut rng);
    let (u1, u2) = (pair.u1[0], pair.u2[0]);
    let m1 = cfg.quantizer.quantize(u1);
    let m2 = cfg.quantizer.quantize(u2);
    let n_codewords = cfg.quantizer.levels.len();
    let mut stats1 = vec![0.0f64; n_codewords];
    let mut stats2 = vec![0.0f64; n_codewords];
    let mut energy = 0.0;

    // Round 1: both sources transmit, joint detection over compatible pairs.
    energy += sched.ed11 + sched.ed12;
    data_phase(&mut rng, &cfg.channel, sched.ed11, m1, &mut stats1);
    data_phase(&mut rng, &cfg.channel, sched.ed12, m2, &mut stats2);
    let (mut k_hat, mut l_hat) = joint_argmax(&stats1, &stats2, maps);

    let wrong1 = k_hat != m1;
    let wrong2 = l_hat != m2;
    acc.round_reached[0] += 1;
    acc.round_wrong[0] += (wrong1 || wrong2) as u64;
    acc.counts.round1_error += (wrong1 || wrong2) as u64;
    acc.counts.one_source_error += (wrong1 != wrong2) as u64;
    acc.counts.both_sources_error += (wrong1 && wrong2) as u64;

    // Per-source control phases.
    let (nack1, spent1) =
        control_phase(&mut rng, &cfg.channel, sched.ec11, sched.lambda, wrong1);
    let (nack2, spent2) =
        control_phase(&mut rng, &cfg.channel, sched.ec12, sched.lambda, wrong2);
    energy += spent1 + spent2;
    if (wrong1 && !nack1) || (wrong2 && !nack2) {
        acc.counts.uncorrectable += 1;
    }
    if (!wrong1 && nack1) || (!wrong2 && nack2) {
        acc.counts.misdetect += 1;
    }

    // Round 2: only sources whose control flagged an error retransmit; the
    // round budget E_D2 is split among them (a lone retransmitter gets all
    // of it, matching the energy expectation's accounting).
    if nack1 || nack2 {
        acc.retx += 1;
        let share = sched.ed2 / (nack1 as u64 + nack2 as u64) as f64;
        if nack1 {
            energy += share;
            data_phase(&mut rng, &cfg.channel, share, m1, &mut stats1);
        }
        if nack2 {
            energy += share;
            data_phase(&mut rng, &cfg.channel, share, m2, &mut stats2);
        }
        if nack1 && nack2 {
            let (k, l) = joint_argmax(&stats1, &stats2, maps);
            k_hat = k;
            l_hat = l;
        } else if nack1 {
            if !maps.reverse[l_hat].is_empty() {
                k_hat = constrained_argmax(&stats1, &maps.reverse[l_hat]);
            }
        } else if !maps.forward[k_hat].is_empty() {
            l_hat = constrained_argmax(&stats2, &maps.forward[k_hat]);
        }
        acc.round_reached[1] += 1;
        acc.round_wrong[1] += (k_hat != m1 || l_hat != m2) as u64;
    }

    let e1 = u1 - cfg.quantizer.reconstruct(k_hat);
    let e2 = u2 - cfg.quantizer.reconstruct(l_hat);
    let d1 = e1 * e1;
    let d2 = e2 * e2;
    let d = d1 + d2;
    acc.counts.final_error += (k_hat != m1 || l_hat != m2) as u64;
    acc.trials += 1;
    acc.sum_d += d;
    acc.sum_d2 += d * d;
    acc.sum_src[0] += d1;
    acc.sum_src[1] += d2;
    acc.sum_energy += energy;
    acc.sum_energy2 += energy * energy;
}

fn chunk_ranges(trials: u64) -> Vec<(u64, u64)> {
    let mut v = Vec::new();
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        v.push((start, end));
        start = end;
    }
    v
}

fn run_chunks<F>(trials: u64, rounds: usize, parallel: bool, f: F) -> Accum
where
    F: Fn(u64, &mut Accum) + Sync,
{
    let ranges = chunk_ranges(trials);
    let simulate = |&(start, end): &(u64, u64)| {
        let mut acc = Accum::new(rounds);
        for t in start..end {
            f(t, &mut acc);
        }
        acc
    };
    let partials: Vec<Accum> = {
        #[cfg(feature = "parallel")]
        {
            if parallel {
                ranges.par_iter().map(simulate).collect()
            } else {
                ranges.iter().map(simulate).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = parallel;
            ranges.iter().map(simulate).collect()
        }
    };
    partials
        .into_iter()
        .fold(Accum::new(rounds), |a, b| a.merge(&b))
}

fn run_single_impl(cfg: &TrialConfig, parallel: bool) -> Result<SimStats> {
    cfg.validate()?;
    let sched = match &cfg.schedule {
        ProtocolSchedule::Single(s) => s.clone(),
        ProtocolSchedule::Dual(_) => {
            return Err(Error::config("run_single needs a single-source schedule"))
        }
    };
    let acc = run_chunks(cfg.trials, sched.n_rounds(), parallel, |t, acc| {
        single_trial(cfg, &sched, t, acc)
    });
    Ok(acc.into_stats(1))
}

fn run_dual_impl(cfg: &TrialConfig, parallel: bool) -> Result<SimStats> {
    cfg.validate()?;
    let sched = match &cfg.schedule {
        ProtocolSchedule::Dual(s) => *s,
        ProtocolSchedule::Single(_) => {
            return Err(Error::config("run_dual needs a dual-source schedule"))
        }
    };
    // Joint decoding searches pairs the source statistics allow. The uniform
    // pair's contamination support bounds |rho*u1 - u2| by sqrt(3(1-rho^2));
    // the Gaussian construction uses the configured theta window (true pairs
    // outside it are undecodable and count as errors).
    let theta_decode = match cfg.quantizer.kind {
        QuantizerKind::GaussianGrid => sched.theta,
        _ => SQRT_3 * (1.0 - sched.rho * sched.rho).max(0.0).sqrt(),
    };
    let maps = compat_maps(&cfg.quantizer, theta_decode, sched.rho);
    if maps.forward.iter().all(|j| j.is_empty()) {
        return Err(Error::config("no compatible pairs: theta too small"));
    }
    let acc = run_chunks(cfg.trials, 2, parallel, |t, acc| {
        dual_trial(cfg, &sched, &maps, t, acc)
    });
    Ok(acc.into_stats(2))
}

/// Simulate the single-source protocol (parallel when the `parallel`
/// feature is enabled).
pub fn run_single(cfg: &TrialConfig) -> Result<SimStats> {
    run_single_impl(cfg, true)
}

/// Sequential reference path; bit-identical to [`run_single`].
pub fn run_single_seq(cfg: &TrialConfig) -> Result<SimStats> {
    run_single_impl(cfg, false)
}

/// Simulate the dual-source protocol (parallel when the `parallel` feature
/// is enabled).
pub fn run_dual(cfg: &TrialConfig) -> Result<SimStats> {
    run_dual_impl(cfg, true)
}

/// Sequential reference path; bit-identical to [`run_dual`].
pub fn run_dual_seq(cfg: &TrialConfig) -> Result<SimStats> {
    run_dual_impl(cfg, false)
}

/// Convenience constructor for single-source trial configs.
pub fn single_config(
    distribution: Distribution,
    bits: u32,
    sched: EnergySchedule,
    channel: ChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<TrialConfig> {
    let quantizer = crate::quantizer::build_quantizer(QuantizerKind::UniformPlain, bits, 1.0)?;
    Ok(TrialConfig {
        source: SourceConfig::new(SourceModel::ModelI, distribution, 1.0, 1)?,
        quantizer,
        schedule: ProtocolSchedule::Single(sched),
        channel,
        trials,
        seed,
    })
}

/// Convenience constructor for dual-source trial configs. The quantizer kind
/// follows the source distribution.
pub fn dual_config(
    distribution: Distribution,
    sched: DualSchedule,
    channel: ChannelSpec,
    trials: u64,
    seed: u64,
) -> Result<TrialConfig> {
    let kind = match distribution {
        Distribution::Uniform => QuantizerKind::UniformTails,
        Distribution::Gaussian => QuantizerKind::GaussianGrid,
    };
    let quantizer = crate::quantizer::build_quantizer(kind, sched.bits, sched.rho)?;
    Ok(TrialConfig {
        source: SourceConfig::new(SourceModel::ModelI, distribution, sched.rho, 1)?,
        quantizer,
        schedule: ProtocolSchedule::Dual(sched),
        channel,
        trials,
        seed,
    })
}
