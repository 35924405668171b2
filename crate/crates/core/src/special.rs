//! Special functions and pairwise error probabilities.
//!
//! Everything downstream (protocol bounds, fading adaptation, Monte Carlo
//! cross-checks) is built on the functions in this module:
//!
//! * modified Bessel functions of integer order, plain and exponentially
//!   scaled;
//! * the first-order Marcum-Q function, evaluated by adaptive quadrature of
//!   its defining integral;
//! * the pairwise error probability of L-fold non-coherent square-law
//!   combining between two orthogonal hypotheses, in both exponent
//!   conventions used by the protocol analysis;
//! * the exact M-ary error probability over a Rician channel with NLOS
//!   fraction `alpha`, by numerical integration.

use crate::error::Error;
use crate::quad::segmented_simpson;
use crate::Result;

/// Tuning knobs for the numerical integrations in this module.
///
/// `truncation` replaces the infinite upper limit; `None` picks a point where
/// the integrand tail is far below `abs_tol` (it depends on the integrand
/// scale, so a fixed default would either truncate mass or waste work).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub truncation: Option<f64>,
    pub max_subdivisions: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            truncation: None,
            max_subdivisions: 200_000,
        }
    }
}

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::config("quadrature tolerances must be > 0"));
        }
        if let Some(t) = self.truncation {
            if !(t > 0.0) {
                return Err(Error::config("truncation point must be > 0"));
            }
        }
        if self.max_subdivisions == 0 {
            return Err(Error::config("max_subdivisions must be >= 1"));
        }
        Ok(())
    }
}

/// Largest argument for which `bessel_i` returns the unscaled value.
pub const BESSEL_PLAIN_MAX: f64 = 700.0;

// Crossover between the ascending series and the large-x asymptotic
// expansion for the scaled Bessel function.
const BESSEL_SERIES_MAX: f64 = 600.0;

fn bessel_series_sum(order: u32, x: f64) -> f64 {
    // Ascending series: I_n(x) = sum_k (x/2)^(n+2k) / (k! (n+k)!).
    // All terms are positive, so there is no cancellation.
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=order {
        term *= half / j as f64;
    }
    if term == 0.0 {
        // x == 0 and order >= 1.
        return 0.0;
    }
    let mut sum = term;
    let h2 = half * half;
    for k in 1..2000u32 {
        term *= h2 / (k as f64 * (k + order) as f64);
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

fn bessel_scaled_asymptotic(order: u32, x: f64) -> f64 {
    // e^{-x} I_n(x) ~ (2 pi x)^{-1/2} (1 - (mu-1)/(8x) + ...), mu = 4 n^2.
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40u32 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * x * kf);
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Modified Bessel function of the first kind, integer order.
///
/// Accurate to better than 1e-10 relative error for `x <= 700`; beyond that
/// the result overflows `f64` head-room and [`bessel_i_scaled`] must be used.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("bessel_i requires x >= 0, got {x}")));
    }
    if x > BESSEL_PLAIN_MAX {
        return Err(Error::Overflow(format!(
            "bessel_i({order}, {x}): use bessel_i_scaled for x > {BESSEL_PLAIN_MAX}"
        )));
    }
    Ok(bessel_series_sum(order, x))
}

/// Exponentially scaled modified Bessel function, `e^{-x} I_n(x)`.
///
/// Valid for all `x >= 0`; this is the representation the Rician integrand
/// uses so that products with other exponentials never overflow.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "bessel_i_scaled requires x >= 0, got {x}"
        )));
    }
    if x <= BESSEL_SERIES_MAX {
        Ok(bessel_series_sum(order, x) * (-x).exp())
    } else {
        Ok(bessel_scaled_asymptotic(order, x))
    }
}

/// First-order Marcum-Q function `Q_1(a, b)`.
///
/// Evaluated as the tail integral of the Rician envelope density,
/// `Q_1(a,b) = int_b^inf x exp(-(x^2+a^2)/2) I_0(ax) dx`, with the Bessel
/// factor kept in scaled form. Absolute error below 1e-9.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= 0.0) {
        return Err(Error::domain(format!(
            "marcum_q1 requires a, b >= 0, got ({a}, {b})"
        )));
    }
    if b == 0.0 {
        // Integral of the full density.
        return Ok(1.0);
    }
    if a == 0.0 {
        // Rayleigh tail.
        return Ok((-0.5 * b * b).exp());
    }
    // x exp(-(x^2+a^2)/2) I_0(ax) = x exp(-(x-a)^2/2) * [e^{-ax} I_0(ax)]
    let f = |x: f64| {
        let d = x - a;
        let scaled = bessel_i_scaled(0, a * x).expect("a*x >= 0");
        x * (-0.5 * d * d).exp() * scaled
    };
    // The envelope density is a Gaussian of unit width around x = a, so
    // segments of width 4 always sample the peak.
    let upper = a.max(b) + 20.0;
    if upper <= b {
        return Ok(0.0);
    }
    let v = segmented_simpson(&f, b, upper, 4.0, 1e-12, 1e-12, 400_000)
        .ok_or_else(|| Error::NonConvergence("marcum_q1 quadrature".into()))?;
    Ok(v.clamp(0.0, 1.0))
}

/// Upper bound on the probability of an uncorrectable control error:
/// `(1/2) exp(-(sqrt(lambda)-1)^2 E_C/N_0)`.
///
/// Dominates `1 - Q_1(sqrt(2 E_C/N_0), sqrt(2 lambda E_C/N_0))` for every
/// `lambda` in `[0, 1)`.
pub fn uncorrectable_bound(lambda: f64, ec_over_n0: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::domain(format!(
            "uncorrectable_bound requires lambda in [0,1), got {lambda}"
        )));
    }
    if !(ec_over_n0 >= 0.0) {
        return Err(Error::domain(format!(
            "uncorrectable_bound requires E_C/N_0 >= 0, got {ec_over_n0}"
        )));
    }
    let s = lambda.sqrt() - 1.0;
    Ok(0.5 * (-s * s * ec_over_n0).exp())
}

/// Largest combining order for which the binomial weights are computed in
/// exact integer arithmetic. The protocol never exceeds a handful of rounds.
pub const P2_MAX_ORDER: u32 = 16;

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

// c_n = (1/n!) sum_{k=0}^{L-1-n} C(2L-1, k), exact up to L = 16.
fn combining_weights(l: u32) -> Vec<f64> {
    (0..l)
        .map(|n| {
            let sum: u128 = (0..=(l - 1 - n)).map(|k| binomial(2 * l - 1, k)).sum();
            let mut fact = 1.0f64;
            for j in 1..=n {
                fact *= j as f64;
            }
            sum as f64 / fact
        })
        .collect()
}

/// Pairwise error probability of L-fold non-coherent square-law combining:
/// `2^{-(2L-1)} e^{-gamma/2} sum_n c_n (gamma/2)^n` with `gamma` the total
/// combined SNR.
pub fn p2_pairwise(l: u32, gamma: f64) -> Result<f64> {
    p2_with_exponent(l, 0.5 * gamma)
}

/// Pairwise error probability in the `e^{-gamma}` convention used by the
/// dual-source Gaussian analysis. Identical to [`p2_pairwise`] under the
/// substitution `gamma -> gamma/2`.
pub fn p2_gaussian_variant(l: u32, gamma: f64) -> Result<f64> {
    p2_with_exponent(l, gamma)
}

fn p2_with_exponent(l: u32, z: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("p2 combining order must be >= 1"));
    }
    if l > P2_MAX_ORDER {
        return Err(Error::Overflow(format!(
            "p2 order {l} exceeds exact-binomial range {P2_MAX_ORDER}"
        )));
    }
    if !(z >= 0.0) {
        return Err(Error::domain(format!("p2 requires gamma >= 0, got {z}")));
    }
    let weights = combining_weights(l);
    let mut sum = 0.0;
    let mut zpow = 1.0;
    for c in &weights {
        sum += c * zpow;
        zpow *= z;
    }
    let scale = 2f64.powi(-(2 * l as i32 - 1));
    Ok((scale * (-z).exp() * sum).clamp(0.0, 1.0))
}

// Density of the normalized correct-branch decision variable: noncentral
// chi-square with 2L degrees of freedom and noncentrality 2*lam, expressed
// in the unit-mean-spread variable v.
fn noncentral_density(l: u32, lam: f64, v: f64) -> f64 {
    if v < 0.0 {
        return 0.0;
    }
    let xb = 2.0 * (v * lam).sqrt();
    let n = l - 1;
    if xb < 30.0 {
        // Series form, stable down to lam = 0:
        // v^{L-1} e^{-v-lam} sum_j (v lam)^j / (j! (j+L-1)!)
        let mut fact = 1.0;
        for j in 1..=n {
            fact *= j as f64;
        }
        let mut term = 1.0 / fact;
        let mut sum = term;
        let w = v * lam;
        for j in 1..200u32 {
            term *= w / (j as f64 * (j + n) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        v.powi(n as i32) * (-v - lam).exp() * sum
    } else {
        let d = v.sqrt() - lam.sqrt();
        (v / lam).powf(0.5 * n as f64)
            * (-d * d).exp()
            * bessel_i_scaled(n, xb).expect("xb >= 0")
    }
}

/// Exact M-ary error probability of non-coherent orthogonal signaling with
/// L-fold square-law combining over a Rician channel.
///
/// `gamma` is the total received SNR, `alpha` the NLOS energy fraction
/// (`alpha = 0` recovers the AWGN formula). Evaluated by adaptive quadrature
/// with the Bessel factor in scaled form; the result is clamped to `[0, 1]`.
pub fn rician_pm(m: u32, l: u32, gamma: f64, alpha: f64, quad: &Quadrature) -> Result<f64> {
    quad.validate()?;
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::domain(format!(
            "rician_pm requires M = 2^B >= 2, got {m}"
        )));
    }
    if l == 0 {
        return Err(Error::domain("rician_pm requires L >= 1"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!(
            "rician_pm requires gamma >= 0, got {gamma}"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!(
            "rician_pm requires alpha in [0,1], got {alpha}"
        )));
    }

    // Wrong branches see only thermal noise, so relative to the correct
    // branch's (fading-inflated) scale they appear stretched by s = 1+a*g.
    let s = 1.0 + alpha * gamma;
    let lam = gamma * (1.0 - alpha) / s;
    let m_others = (m - 1) as i32;

    let integrand = |v: f64| {
        let pdf = noncentral_density(l, lam, v);
        if pdf == 0.0 {
            return 0.0;
        }
        // P(central chi2_{2L} < v*s) for one wrong branch.
        let vs = v * s;
        let mut tail = 0.0;
        let mut term = 1.0;
        for k in 0..l {
            if k > 0 {
                term *= vs / k as f64;
            }
            tail += term;
        }
        let cdf = 1.0 - (-vs).exp() * tail;
        cdf.max(0.0).powi(m_others) * pdf
    };

    let upper = quad
        .truncation
        .unwrap_or_else(|| (lam.sqrt() + 16.0).powi(2) + 50.0);
    // Density mass sits around v = L + lam with spread ~ sqrt(2(L+2*lam)).
    let seg = (2.0 * (l as f64 + 2.0 * lam)).sqrt().max(2.0);
    let p_correct = segmented_simpson(
        &integrand,
        0.0,
        upper,
        seg,
        quad.abs_tol,
        quad.rel_tol,
        quad.max_subdivisions,
    )
    .ok_or_else(|| Error::NonConvergence("rician_pm quadrature".into()))?;
    Ok((1.0 - p_correct).clamp(0.0, 1.0))
}
