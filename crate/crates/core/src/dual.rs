//! Two-source extension of the protocol: joint energies, probabilities of
//! one/both sources in error, and the uniform/Gaussian distortion upper
//! bounds.
//!
//! Correlation enters through the compatible-pair cardinality
//! `ceil(2^B * theta * sqrt(1-rho^2))`: joint detection only confuses
//! messages the source statistics allow, so the union bounds scale with that
//! count instead of the full codebook.

use crate::error::Error;
use crate::quantizer::{distortion_terms_gaussian, distortion_terms_uniform};
use crate::special::{p2_gaussian_variant, p2_pairwise, uncorrectable_bound};
use crate::Result;

use std::f64::consts::PI;

/// Energy schedule of the dual-source protocol (two rounds).
///
/// `ed11`/`ed12` are the per-source data energies of round 1, `ed2` the
/// total data energy available for retransmissions, `ec11`/`ec12` the
/// per-source control energies. Both control thresholds share `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualSchedule {
    pub ed11: f64,
    pub ed12: f64,
    pub ed2: f64,
    pub ec11: f64,
    pub ec12: f64,
    pub lambda: f64,
    pub n0: f64,
    pub bits: u32,
    pub rho: f64,
    pub theta: f64,
}

/// Correlation regime of the dual-source analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationRegime {
    High,
    Low,
}

impl DualSchedule {
    /// Default constructor with the symmetric split
    /// `E_D1 = 2 E_D11 = 2 E_D12` and `E_C1 = 2 E_C11 = 2 E_C12`.
    #[allow(clippy::too_many_arguments)]
    pub fn symmetric(
        ed1_total: f64,
        ed2_total: f64,
        ec1_total: f64,
        lambda: f64,
        n0: f64,
        bits: u32,
        rho: f64,
        theta: f64,
    ) -> Result<Self> {
        let s = DualSchedule {
            ed11: 0.5 * ed1_total,
            ed12: 0.5 * ed1_total,
            ed2: ed2_total,
            ec11: 0.5 * ec1_total,
            ec12: 0.5 * ec1_total,
            lambda,
            n0,
            bits,
            rho,
            theta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.ed11, self.ed12, self.ed2, self.ec11, self.ec12]
            .iter()
            .any(|&e| !(e >= 0.0))
        {
            return Err(Error::config("energies must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::config("lambda must lie in [0, 1)"));
        }
        if !(self.n0 > 0.0) {
            return Err(Error::config("n0 must be > 0"));
        }
        if self.bits < 2 {
            return Err(Error::config("dual protocol needs B >= 2"));
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(Error::config("|rho| <= 1 required"));
        }
        if !(self.theta > 0.0) {
            return Err(Error::config("theta must be > 0"));
        }
        Ok(())
    }

    pub fn ed1_total(&self) -> f64 {
        self.ed11 + self.ed12
    }

    pub fn ec1_total(&self) -> f64 {
        self.ec11 + self.ec12
    }

    /// Recover the allocation parameter `mu` from `E_D2 = (2-mu) E_D1`.
    fn mu(&self) -> Result<f64> {
        let ed1 = self.ed1_total();
        if !(ed1 > 0.0) {
            return Err(Error::domain("asymptotic form needs E_D1 > 0"));
        }
        let mu = 2.0 - self.ed2 / ed1;
        if !(mu > 0.0 && mu < 2.0) {
            return Err(Error::domain(format!(
                "schedule implies mu = {mu}, outside (0, 2)"
            )));
        }
        Ok(mu)
    }
}

/// Allocation for the dual protocol: `E_D2 = (2-mu) E_D1` with the control
/// energy equating the exponents of the corresponding regime
/// (`E_C1 = E_D2/(1-sqrt(lambda))^2` in the high-correlation regime, half of
/// that in the low one).
#[allow(clippy::too_many_arguments)]
pub fn allocate_dual(
    ed1_total: f64,
    mu: f64,
    lambda: f64,
    n0: f64,
    bits: u32,
    rho: f64,
    theta: f64,
    regime: CorrelationRegime,
) -> Result<DualSchedule> {
    if !(ed1_total > 0.0) {
        return Err(Error::domain("ed1 must be > 0"));
    }
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::domain(format!("mu in (0,2) required, got {mu}")));
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::domain("lambda in [0,1) required"));
    }
    let s = 1.0 - lambda.sqrt();
    let ed2 = (2.0 - mu) * ed1_total;
    let ec1 = match regime {
        CorrelationRegime::High => ed2 / (s * s),
        CorrelationRegime::Low => ed2 / (2.0 * s * s),
    };
    DualSchedule::symmetric(ed1_total, ed2, ec1, lambda, n0, bits, rho, theta)
}

/// Joint first-round error pattern probabilities plus the per-source control
/// statistics, as consumed by the energy expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualErrorProbs {
    /// Source 1 in error, source 2 correct.
    pub p10: f64,
    /// Source 2 in error, source 1 correct.
    pub p01: f64,
    /// Both in error.
    pub p11: f64,
    pub unc1: f64,
    pub unc2: f64,
    pub mis1: f64,
    pub mis2: f64,
}

/// Average energy of the dual protocol: the exact expectation and its
/// simplified upper bound (correct-NACK-detection and both-correct factors
/// bounded by one). Returns `(exact, bound)`.
pub fn dual_avg_energy(s: &DualSchedule, probs: &DualErrorProbs) -> Result<(f64, f64)> {
    s.validate()?;
    let p00 = (1.0 - probs.p10 - probs.p01 - probs.p11).max(0.0);
    let exact = s.ed11
        + s.ed12
        + s.ec11 * probs.p10
        + s.ec12 * probs.p01
        + (s.ec11 + s.ec12) * probs.p11
        + s.ed2
            * (probs.p10 * (1.0 - probs.unc1)
                + probs.p01 * (1.0 - probs.unc2)
                + probs.p11 * (1.0 - probs.unc1 * probs.unc2)
                + p00 * (probs.mis1 + probs.mis2));
    let ec1 = s.ec1_total();
    let bound = s.ed1_total()
        + 0.5 * ec1 * (probs.p10 + probs.p01)
        + ec1 * probs.p11
        + s.ed2 * (probs.p10 + probs.p01 + probs.p11 + (probs.mis1 + probs.mis2));
    Ok((exact, bound))
}

fn ceil_cardinality(bits: u32, theta: f64, rho: f64) -> f64 {
    (2f64.powi(bits as i32) * theta * (1.0 - rho * rho).max(0.0).sqrt()).ceil()
}

/// Sum of the per-source uncorrectable-error bounds (the control phases are
/// independent, so the any-source event is union-bounded).
fn uncorrectable_sum(s: &DualSchedule) -> Result<f64> {
    let u1 = uncorrectable_bound(s.lambda, s.ec11 / s.n0)?;
    let u2 = uncorrectable_bound(s.lambda, s.ec12 / s.n0)?;
    Ok((u1 + u2).min(1.0))
}

/// Probabilities of exactly one source / both sources ending in error for
/// the uniform pair. Pairwise terms use the `e^{-gamma/2}` convention at the
/// per-source (one in error) or summed (both in error) cumulative SNRs; the
/// smaller per-source energy is used so asymmetric splits stay bounds.
pub fn dual_pe_uniform(s: &DualSchedule) -> Result<(f64, f64)> {
    s.validate()?;
    let unc = uncorrectable_sum(s)?;
    let card1 = ceil_cardinality(s.bits, 1.0, s.rho);
    let card_theta = ceil_cardinality(s.bits, s.theta, s.rho);
    let m = 2f64.powi(s.bits as i32);

    let g_src_r1 = s.ed11.min(s.ed12) / s.n0;
    let g_src_cum = g_src_r1 + 0.5 * s.ed2 / s.n0;
    let g_both_r1 = s.ed1_total() / s.n0;
    let g_both_cum = (s.ed1_total() + s.ed2) / s.n0;

    let p_e1 = card1 * unc * p2_pairwise(1, g_src_r1)?
        + card_theta * p2_pairwise(2, g_src_cum)?;
    let p_e2 = card1 * m * unc * unc * p2_pairwise(2, g_both_r1)?
        + card_theta * m * p2_pairwise(4, g_both_cum)?;
    Ok((p_e1.min(1.0), p_e2.min(1.0)))
}

/// Same composition for Gaussian sources: both cardinalities carry `theta`,
/// pairwise terms use the `e^{-gamma}` convention at half/full energies.
pub fn dual_pe_gaussian(s: &DualSchedule) -> Result<(f64, f64)> {
    s.validate()?;
    let unc = uncorrectable_sum(s)?;
    let card_theta = ceil_cardinality(s.bits, s.theta, s.rho);
    let m = 2f64.powi(s.bits as i32);

    let ed1 = s.ed1_total();
    let p_e1 = card_theta * unc * p2_gaussian_variant(1, 0.5 * ed1 / s.n0)?
        + card_theta * p2_gaussian_variant(2, 0.5 * (ed1 + s.ed2) / s.n0)?;
    let p_e2 = card_theta * m * unc * unc * p2_gaussian_variant(2, ed1 / s.n0)?
        + card_theta * m * p2_gaussian_variant(4, (ed1 + s.ed2) / s.n0)?;
    Ok((p_e1.min(1.0), p_e2.min(1.0)))
}

/// One-round (no-feedback) variants: round-1 errors stand uncorrected.
pub fn dual_pe_uniform_one_round(s: &DualSchedule) -> Result<(f64, f64)> {
    s.validate()?;
    let card1 = ceil_cardinality(s.bits, 1.0, s.rho);
    let m = 2f64.powi(s.bits as i32);
    let p_e1 = card1 * p2_pairwise(1, s.ed11.min(s.ed12) / s.n0)?;
    let p_e2 = card1 * m * p2_pairwise(2, s.ed1_total() / s.n0)?;
    Ok((p_e1.min(1.0), p_e2.min(1.0)))
}

pub fn dual_pe_gaussian_one_round(s: &DualSchedule) -> Result<(f64, f64)> {
    s.validate()?;
    let card_theta = ceil_cardinality(s.bits, s.theta, s.rho);
    let m = 2f64.powi(s.bits as i32);
    let ed1 = s.ed1_total();
    let p_e1 = card_theta * p2_gaussian_variant(1, 0.5 * ed1 / s.n0)?;
    let p_e2 = card_theta * m * p2_gaussian_variant(2, ed1 / s.n0)?;
    Ok((p_e1.min(1.0), p_e2.min(1.0)))
}

/// Components of the total-error expansion (symmetric per-source control
/// statistics assumed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalErrorComponents {
    /// Per-source uncorrectable probability `Pr(E_{e->c,1,j})`.
    pub unc: f64,
    /// Exactly one source in error after round 1.
    pub p_one_first: f64,
    /// Both sources in error after round 1.
    pub p_both_first: f64,
    /// Residual error probability of the final round.
    pub p_final: f64,
}

/// Total error probability after the second round:
/// `unc * P_{e,1,1} + unc^2 * P_{e,2,1} + Pr(E_2)`, clamped to 1.
pub fn appendix_total_pe(c: &TotalErrorComponents) -> f64 {
    (c.unc * c.p_one_first + c.unc * c.unc * c.p_both_first + c.p_final).clamp(0.0, 1.0)
}

/// Upper tail of the standard normal, `Q(t)`, via the Abramowitz & Stegun
/// 7.1.26 polynomial (absolute error below 1.5e-7).
fn normal_tail(t: f64) -> f64 {
    let x = t / std::f64::consts::SQRT_2;
    let s = 1.0 / (1.0 + 0.327_591_1 * x.abs());
    let poly = s
        * (0.254_829_592
            + s * (-0.284_496_736 + s * (1.421_413_741 + s * (-1.453_152_027 + s * 1.061_405_429))));
    let erfc_abs = poly * (-x * x).exp();
    let erfc = if x >= 0.0 { erfc_abs } else { 2.0 - erfc_abs };
    0.5 * erfc
}

/// Probability that a Gaussian pair is incompatible,
/// `Pr(|U2'| > theta * sqrt(1-rho^2))`.
///
/// `exact` evaluates the Gaussian tail (for Monte Carlo predictions); the
/// default exponential form is the one the distortion bound composes with,
/// keeping it a true bound.
pub fn incompatibility_probability(theta: f64, rho: f64, exact: bool) -> f64 {
    let t = theta * (1.0 - rho * rho).max(0.0).sqrt();
    if exact {
        2.0 * normal_tail(t)
    } else {
        (-0.5 * t * t).exp()
    }
}

/// Distortion upper bound for the uniform pair after two rounds.
///
/// Non-asymptotic: `D_q + D_{e,1} P_{e,1} + D_{e,2} P_{e,2}`. Asymptotic
/// (high correlation): `exp(-E_D1 (1-mu/3)/N0) * beta(E_D1, rho)` with the
/// closed-form `beta` envelope.
pub fn dual_distortion_uniform(s: &DualSchedule, asymptotic: bool) -> Result<f64> {
    s.validate()?;
    if !asymptotic {
        let terms = distortion_terms_uniform(s.bits, s.rho)?;
        let (p1, p2) = dual_pe_uniform(s)?;
        Ok(terms.d_q + terms.d_e1 * p1 + terms.d_e2 * p2)
    } else {
        let mu = s.mu()?;
        let g1 = s.ed1_total() / s.n0;
        let rho2 = s.rho * s.rho;
        if !(rho2 > 0.0) {
            return Err(Error::domain("beta envelope needs rho != 0"));
        }
        let decay = (-0.5 * g1).exp();
        let beta = ((96.0 + 3.0 / rho2 * decay)
            / (14.0 + (0.5 * decay + 2.0 * rho2).powi(2)))
        .powf(2.0 / 3.0);
        Ok((-g1 * (1.0 - mu / 3.0)).exp() * beta)
    }
}

/// Distortion upper bound for the Gaussian pair after two rounds.
///
/// Non-asymptotic: the compatible/incompatible split with the exponential
/// incompatibility bound. Asymptotic: the dominant envelope of the printed
/// high-correlation form, or the three-exponential low-correlation form with
/// prefactors at their stated polynomial orders (unit coefficients; the
/// analysis does not pin the constants).
pub fn dual_distortion_gaussian(
    s: &DualSchedule,
    regime: CorrelationRegime,
    asymptotic: bool,
) -> Result<f64> {
    s.validate()?;
    if !asymptotic {
        let terms = distortion_terms_gaussian(s.bits, s.rho, s.theta)?;
        let (p1, p2) = dual_pe_gaussian(s)?;
        let tail = incompatibility_probability(s.theta, s.rho, false);
        let d_ec1 = terms.d_ec1.expect("gaussian terms");
        let d_eic1 = terms.d_eic1.expect("gaussian terms");
        Ok(terms.d_q + d_ec1 * p1 + terms.d_e2 * p2 + tail * (d_eic1 + terms.d_e2 * p2))
    } else {
        let mu = s.mu()?;
        let g1 = s.ed1_total() / s.n0;
        match regime {
            CorrelationRegime::High => {
                let alpha = (4.0 * (g1 / PI).sqrt() + 16.0 * g1).powf(-2.0 / 3.0);
                Ok((-g1 * (1.0 - mu / 3.0)).exp() * alpha)
            }
            CorrelationRegime::Low => {
                let cubed = ((3.0 - mu) * g1).powi(3);
                Ok(g1 * (-0.5 * g1 * (1.0 - mu / 4.0)).exp()
                    + (g1 + cubed) * (-0.5 * g1 * (1.0 - mu / 3.0)).exp()
                    + cubed * (-0.25 * g1 * (3.0 - mu)).exp())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn sched(ed1: f64, ed2: f64, ec1: f64, rho: f64, bits: u32) -> DualSchedule {
        DualSchedule::symmetric(ed1, ed2, ec1, 0.25, 1.0, bits, rho, 1.0).unwrap()
    }

    #[test]
    fn avg_energy_zero_error_probs() {
        let s = sched(8.0, 8.0, 12.0, 0.99, 4);
        let probs = DualErrorProbs {
            p10: 0.0,
            p01: 0.0,
            p11: 0.0,
            unc1: 0.0,
            unc2: 0.0,
            mis1: 0.0,
            mis2: 0.0,
        };
        let (exact, bound) = dual_avg_energy(&s, &probs).unwrap();
        close(exact, 8.0, 1e-15);
        close(bound, 8.0, 1e-15);
    }

    #[test]
    fn avg_energy_symmetric_substitution() {
        let s = sched(8.0, 6.0, 12.0, 0.99, 4);
        let p = 0.05;
        let probs = DualErrorProbs {
            p10: p,
            p01: p,
            p11: p * p,
            unc1: 0.0,
            unc2: 0.0,
            mis1: 0.01,
            mis2: 0.01,
        };
        let (exact, bound) = dual_avg_energy(&s, &probs).unwrap();
        let p00 = 1.0 - 2.0 * p - p * p;
        let want_exact =
            8.0 + 6.0 * (2.0 * p) + 12.0 * p * p + s.ed2 * (2.0 * p + p * p + p00 * 0.02);
        close(exact, want_exact, 1e-12);
        let want_bound =
            8.0 + 6.0 * (2.0 * p) + 12.0 * p * p + s.ed2 * (2.0 * p + p * p + 0.02);
        close(bound, want_bound, 1e-12);
        assert!(bound >= exact);
    }

    #[test]
    fn pe_uniform_full_correlation_degenerates() {
        let s = sched(8.0, 8.0, 12.0, 1.0, 4);
        let (p1, p2) = dual_pe_uniform(&s).unwrap();
        assert_eq!(p1, 0.0);
        assert_eq!(p2, 0.0);
    }

    #[test]
    fn pe_uniform_recomposition() {
        // rho = 0.99, B = 4, per-source 4.0, retransmission total 8.0,
        // per-source control 3.0.
        let s = sched(8.0, 8.0, 6.0, 0.99, 4);
        let card1 = (16.0f64 * (1.0 - 0.99f64 * 0.99).sqrt()).ceil();
        let card_t = card1; // theta = 1
        let unc: f64 = (-0.75f64).exp().min(1.0); // 2 * 0.5 e^{-(0.5)^2 * 3}
        let p2_1 = 0.5 * (-2.0f64).exp();
        let p2_2_src = 0.125 * (-4.0f64).exp() * (4.0 + 4.0);
        let p2_2_both = p2_2_src;
        let p2_4 = p2_pairwise(4, 16.0).unwrap();
        let want_p1 = card1 * unc * p2_1 + card_t * p2_2_src;
        let want_p2 = card1 * 16.0 * unc * unc * p2_2_both + card_t * 16.0 * p2_4;
        let (p1, p2) = dual_pe_uniform(&s).unwrap();
        close(p1, want_p1, 1e-12);
        close(p2, want_p2, 1e-12);
    }

    #[test]
    fn pe_gaussian_recomposition() {
        let s = DualSchedule::symmetric(10.0, 10.0, 8.0, 0.25, 1.0, 3, 0.0, 2.0).unwrap();
        let card = (8.0f64 * 2.0).ceil();
        let unc: f64 = ((-0.25f64 * 4.0).exp()).min(1.0);
        let want_p1 = card * unc * p2_gaussian_variant(1, 5.0).unwrap()
            + card * p2_gaussian_variant(2, 10.0).unwrap();
        let want_p2 = (card * 8.0 * unc * unc * p2_gaussian_variant(2, 10.0).unwrap()
            + card * 8.0 * p2_gaussian_variant(4, 20.0).unwrap())
        .min(1.0);
        let (p1, p2) = dual_pe_gaussian(&s).unwrap();
        close(p1, want_p1, 1e-12);
        close(p2, want_p2, 1e-12);
    }

    #[test]
    fn pe_gaussian_ceiling_floor_is_one() {
        // Tiny theta: the ceiling keeps a single compatible candidate, so
        // probabilities stay positive but small.
        let s = DualSchedule {
            theta: 1e-9,
            ..sched(10.0, 10.0, 8.0, 0.9, 4)
        };
        let (p1, p2) = dual_pe_gaussian(&s).unwrap();
        assert!(p1 > 0.0 && p2 > 0.0);
        let big = DualSchedule {
            theta: 1.0,
            ..s
        };
        let (q1, q2) = dual_pe_gaussian(&big).unwrap();
        assert!(p1 <= q1 && p2 <= q2);
    }

    #[test]
    fn pe_monotone_in_energy_and_structural_dominance() {
        let mut prev = (1.0, 1.0);
        for i in 1..=6 {
            let e = 4.0 * i as f64;
            let s = sched(e, e, 0.75 * e, 0.99, 4);
            let (p1, p2) = dual_pe_uniform(&s).unwrap();
            assert!(p1 <= prev.0 + 1e-12 && p2 <= prev.1 + 1e-12);
            prev = (p1, p2);
            if p1 < 1.0 && p2 < 1.0 {
                assert!(p2 <= 16.0 * p1 + 1e-12, "p2 {p2} vs 2^B p1 {}", 16.0 * p1);
            }
        }
    }

    #[test]
    fn appendix_composition() {
        let zero = TotalErrorComponents {
            unc: 0.0,
            p_one_first: 0.0,
            p_both_first: 0.0,
            p_final: 0.0,
        };
        assert_eq!(appendix_total_pe(&zero), 0.0);
        let c = TotalErrorComponents {
            unc: 1.0,
            p_one_first: 0.2,
            p_both_first: 0.3,
            p_final: 0.4,
        };
        close(appendix_total_pe(&c), 0.9, 1e-15);
        let c = TotalErrorComponents {
            p_final: 0.9,
            ..c
        };
        assert_eq!(appendix_total_pe(&c), 1.0);
    }

    #[test]
    fn appendix_matches_dual_composition() {
        // Grouping the one-source/both-sources terms of the pair
        // probabilities by their control factors reproduces the step-(c)
        // total error expansion exactly.
        let s = sched(10.0, 10.0, 8.0, 0.99, 4);
        let unc = ((-0.25f64 * 4.0).exp()).min(1.0); // summed per-source bound
        let card1 = (16.0 * (1.0f64 - 0.99 * 0.99).sqrt()).ceil();
        let (p1, p2) = dual_pe_uniform(&s).unwrap();
        let c = TotalErrorComponents {
            unc,
            p_one_first: card1 * p2_pairwise(1, 5.0).unwrap(),
            p_both_first: card1 * 16.0 * p2_pairwise(2, 10.0).unwrap(),
            p_final: card1 * p2_pairwise(2, 10.0).unwrap()
                + card1 * 16.0 * p2_pairwise(4, 20.0).unwrap(),
        };
        close(appendix_total_pe(&c), p1 + p2, 1e-12);
    }

    #[test]
    fn uniform_distortion_floor_and_beta_limit() {
        let s = sched(2000.0, 2000.0, 1500.0, 0.99, 4);
        let d = dual_distortion_uniform(&s, false).unwrap();
        let d_q = distortion_terms_uniform(4, 0.99).unwrap().d_q;
        close(d, d_q, 1e-12);

        // beta at rho = 1 and E_D1 -> infinity: (96/18)^(2/3).
        let s = sched(4000.0, 4000.0, 3000.0, 1.0, 4);
        let d = dual_distortion_uniform(&s, true).unwrap();
        let beta = (96.0f64 / 18.0).powf(2.0 / 3.0);
        close(beta, 3.054, 2e-3);
        close(d, (-4000.0f64 * (1.0 - 1.0 / 3.0)).exp() * beta, 1e-12);
    }

    #[test]
    fn gaussian_distortion_alpha_value_and_floor() {
        let alpha = (4.0 / PI.sqrt() + 16.0f64).powf(-2.0 / 3.0);
        let s = DualSchedule::symmetric(1.0, 1.0, 0.75, 0.25, 1.0, 4, 0.99, 1.0).unwrap();
        let d = dual_distortion_gaussian(&s, CorrelationRegime::High, true).unwrap();
        close(d, (-2.0f64 / 3.0).exp() * alpha, 1e-12);

        // Huge energies and huge theta: only the quantization floor remains
        // (the incompatibility tail vanishes).
        let s = DualSchedule {
            theta: 40.0,
            ..DualSchedule::symmetric(4000.0, 4000.0, 3000.0, 0.25, 1.0, 4, 0.9, 40.0).unwrap()
        };
        let d = dual_distortion_gaussian(&s, CorrelationRegime::High, false).unwrap();
        let d_q = distortion_terms_gaussian(4, 0.9, 40.0).unwrap().d_q;
        close(d, d_q, 1e-9);
    }

    #[test]
    fn bounds_never_below_quantization_floor() {
        for &rho in &[0.9, 0.99] {
            for &e in &[2.0, 8.0, 20.0] {
                let s = sched(e, e, 0.75 * e, rho, 4);
                let du = dual_distortion_uniform(&s, false).unwrap();
                assert!(du >= distortion_terms_uniform(4, rho).unwrap().d_q);
                let dg = dual_distortion_gaussian(&s, CorrelationRegime::High, false).unwrap();
                assert!(dg >= distortion_terms_gaussian(4, rho, 1.0).unwrap().d_q);
            }
        }
    }

    #[test]
    fn incompatibility_exact_vs_bound() {
        for &t in &[0.5, 1.0, 2.0, 3.0] {
            for &rho in &[0.0, 0.9] {
                let exact = incompatibility_probability(t, rho, true);
                let bound = incompatibility_probability(t, rho, false);
                assert!(exact <= bound + 1e-7, "t={t} rho={rho}");
            }
        }
        // 2*Q(1) frozen reference.
        close(incompatibility_probability(1.0, 0.0, true), 0.317_310_5, 1e-6);
    }

    #[test]
    fn allocation_regimes() {
        let hi = allocate_dual(10.0, 1.0, 0.25, 1.0, 4, 0.99, 1.0, CorrelationRegime::High)
            .unwrap();
        close(hi.ed2, 10.0, 1e-12);
        close(hi.ec1_total(), 40.0, 1e-12);
        let lo = allocate_dual(10.0, 1.0, 0.25, 1.0, 4, 0.5, 3.0, CorrelationRegime::Low).unwrap();
        close(lo.ec1_total(), 20.0, 1e-12);
    }
}
