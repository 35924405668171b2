//! Rician-channel adaptation of the single-source protocol.
//!
//! The channel scales the transmitted amplitude by
//! `sqrt(1-alpha) e^{j phi} + sqrt(alpha) h` with `h ~ CN(0,1)` drawn fresh
//! per transmission, so a fraction `alpha` of the energy rides on a Rayleigh
//! component. The misdetect statistic is unchanged; the uncorrectable one
//! sees the fading-inflated effective noise `alpha*E_C + N0`.

use crate::error::Error;
use crate::protocol::{pr_misdetect, EnergySchedule};
use crate::special::{marcum_q1, rician_pm, Quadrature};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianSpec {
    /// NLOS energy fraction, 0 = pure AWGN, 1 = pure Rayleigh.
    pub alpha: f64,
    pub n0: f64,
}

impl RicianSpec {
    pub fn new(alpha: f64, n0: f64) -> Result<Self> {
        let s = RicianSpec { alpha, n0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!(
                "alpha must lie in [0,1], got {}",
                self.alpha
            )));
        }
        if !(self.n0 > 0.0) {
            return Err(Error::config("n0 must be > 0"));
        }
        Ok(())
    }
}

/// Probability that a NACK sent over the fading channel is missed.
///
/// The LOS component carries `(1-alpha) E_C` against an effective per-branch
/// noise of `alpha*E_C + N0`; the threshold stays at `lambda*E_C`.
pub fn rician_uncorrectable(ec: f64, spec: &RicianSpec, lambda: f64) -> Result<f64> {
    spec.validate()?;
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda in [0,1) required, got {lambda}")));
    }
    if !(ec >= 0.0) {
        return Err(Error::domain("ec must be >= 0"));
    }
    let eff = spec.alpha * ec + spec.n0;
    let a = (2.0 * (1.0 - spec.alpha) * ec / eff).sqrt();
    let b = (2.0 * lambda * ec / eff).sqrt();
    Ok(1.0 - marcum_q1(a, b)?)
}

/// Exact M-ary round error under fading at the cumulative SNR of round `l`.
pub fn rician_round_error(bits: u32, gamma_cum: f64, l: u32, spec: &RicianSpec) -> Result<f64> {
    rician_pm(1 << bits, l, gamma_cum, spec.alpha, &Quadrature::default())
}

/// Average energy of the two-round protocol over the fading channel: the
/// AWGN expectation with the fading round-error and uncorrectable
/// statistics substituted.
pub fn rician_avg_energy(bits: u32, sched: &EnergySchedule, spec: &RicianSpec) -> Result<f64> {
    sched.validate()?;
    spec.validate()?;
    if (spec.n0 - sched.n0).abs() > 1e-12 * sched.n0 {
        return Err(Error::config("schedule and channel disagree on n0"));
    }
    let n = sched.n_rounds();
    let mut total = sched.ed[0];
    for i in 1..n {
        let pe_prev = rician_round_error(bits, sched.cumulative_gamma(i), i as u32, spec)?;
        let unc = rician_uncorrectable(sched.ec[i - 1], spec, sched.lambda)?;
        let mis = pr_misdetect(sched.ec[i - 1], sched.n0, sched.lambda)?;
        total += sched.ed[i] * (pe_prev * (1.0 - unc) + (1.0 - pe_prev) * mis);
        total += sched.ec[i - 1] * pe_prev;
    }
    Ok(total)
}

/// One-round fading distortion, `2^{-2B} + 2 P_M(L=1, gamma)`.
pub fn rician_distortion_one(bits: u32, gamma: f64, spec: &RicianSpec) -> Result<f64> {
    spec.validate()?;
    let p = rician_pm(1 << bits, 1, gamma, spec.alpha, &Quadrature::default())?;
    Ok(2f64.powi(-2 * bits as i32) + 2.0 * p)
}

/// Two-round fading distortion bound,
/// `2^{-2B} + 2 [P_M(1) Pr(E_{e->c,1}) + P_M(2)]`, with the exact M-ary
/// probabilities at the per-round cumulative SNRs.
pub fn rician_distortion_two(bits: u32, sched: &EnergySchedule, spec: &RicianSpec) -> Result<f64> {
    sched.validate()?;
    spec.validate()?;
    if sched.n_rounds() != 2 {
        return Err(Error::Unsupported(
            "fading distortion bound is derived for two rounds".into(),
        ));
    }
    if (spec.n0 - sched.n0).abs() > 1e-12 * sched.n0 {
        return Err(Error::config("schedule and channel disagree on n0"));
    }
    let p1 = rician_round_error(bits, sched.cumulative_gamma(1), 1, spec)?;
    let p2 = rician_round_error(bits, sched.cumulative_gamma(2), 2, spec)?;
    let unc = rician_uncorrectable(sched.ec[0], spec, sched.lambda)?;
    Ok(2f64.powi(-2 * bits as i32) + 2.0 * (p1 * unc + p2).min(1.0))
}
