//! Scalar quantizers for the protocol and their closed-form distortion terms.
//!
//! Three grids are used:
//!
//! * `UniformPlain` — 2^B equal bins on `(-sqrt3, sqrt3)`, the single-source
//!   quantizer with MSE floor `2^{-2B}`;
//! * `UniformTails` — the dual-source grid for the uniform/contaminated
//!   pair: 2^B - 2 equal interior bins on `(-sqrt3*rho, sqrt3*rho)` plus one
//!   bin per contamination tail;
//! * `GaussianGrid` — 2^B - 2 equal interior bins on `(-Delta, Delta)` with
//!   `Delta = 2 sqrt(B ln 2)` and one unbounded bin per Gaussian tail,
//!   reconstructed at `-Delta`/`+Delta`.
//!
//! Bins are half-open `[low, high)`; ties at an edge go to the higher bin.

use crate::error::Error;
use crate::sources::SQRT_3;
use crate::Result;

use std::f64::consts::{LN_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerKind {
    UniformPlain,
    UniformTails,
    GaussianGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    pub kind: QuantizerKind,
    pub bits: u32,
    /// `2^B + 1` edges, non-decreasing. Outer edges may be infinite
    /// (GaussianGrid) or coincide with their neighbor (UniformTails at
    /// rho = 1, where the tails carry zero probability).
    pub edges: Vec<f64>,
    /// `2^B` reconstruction levels, `levels[n]` inside `[edges[n], edges[n+1]]`.
    pub levels: Vec<f64>,
    /// Grid half-width `Delta` (GaussianGrid only).
    pub delta: Option<f64>,
}

/// Closed-form distortion terms for the dual-source bounds.
///
/// `d_ec1`/`d_eic1` (one source in error, compatible/incompatible pair) only
/// exist for the Gaussian construction; for the uniform grid `d_e1` is the
/// single one-source term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionTerms {
    pub d_q: f64,
    pub d_e1: f64,
    pub d_e2: f64,
    pub d_ec1: Option<f64>,
    pub d_eic1: Option<f64>,
}

/// Number of messages for a B-bit quantizer.
pub fn codebook_size(bits: u32) -> usize {
    1usize << bits
}

pub fn build_quantizer(kind: QuantizerKind, bits: u32, rho: f64) -> Result<QuantizerSpec> {
    match kind {
        QuantizerKind::UniformPlain => {
            if bits == 0 {
                return Err(Error::Unsupported("UniformPlain requires B >= 1".into()));
            }
            let n = codebook_size(bits);
            let width = 2.0 * SQRT_3 / n as f64;
            let edges: Vec<f64> = (0..=n).map(|i| -SQRT_3 + i as f64 * width).collect();
            let levels: Vec<f64> = (0..n)
                .map(|i| -SQRT_3 + (i as f64 + 0.5) * width)
                .collect();
            Ok(QuantizerSpec {
                kind,
                bits,
                edges,
                levels,
                delta: None,
            })
        }
        QuantizerKind::UniformTails => {
            if bits < 2 {
                return Err(Error::Unsupported("UniformTails requires B >= 2".into()));
            }
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(Error::domain(format!(
                    "UniformTails requires rho in (0, 1], got {rho}"
                )));
            }
            let n = codebook_size(bits);
            let interior = n - 2;
            let hi = SQRT_3 * rho;
            let outer = SQRT_3 * (rho + (1.0 - rho * rho).sqrt());
            let width = 2.0 * hi / interior as f64;
            let mut edges = Vec::with_capacity(n + 1);
            edges.push(-outer);
            for i in 0..=interior {
                edges.push(-hi + i as f64 * width);
            }
            edges.push(outer);
            let mut levels = Vec::with_capacity(n);
            levels.push(-0.5 * (outer + hi));
            for i in 0..interior {
                levels.push(-hi + (i as f64 + 0.5) * width);
            }
            levels.push(0.5 * (outer + hi));
            Ok(QuantizerSpec {
                kind,
                bits,
                edges,
                levels,
                delta: None,
            })
        }
        QuantizerKind::GaussianGrid => {
            if bits < 2 {
                return Err(Error::Unsupported("GaussianGrid requires B >= 2".into()));
            }
            let n = codebook_size(bits);
            let interior = n - 2;
            let delta = 2.0 * (bits as f64 * LN_2).sqrt();
            let width = 2.0 * delta / interior as f64;
            let mut edges = Vec::with_capacity(n + 1);
            edges.push(f64::NEG_INFINITY);
            for i in 0..=interior {
                edges.push(-delta + i as f64 * width);
            }
            edges.push(f64::INFINITY);
            let mut levels = Vec::with_capacity(n);
            levels.push(-delta);
            for i in 0..interior {
                levels.push(-delta + (i as f64 + 0.5) * width);
            }
            levels.push(delta);
            Ok(QuantizerSpec {
                kind,
                bits,
                edges,
                levels,
                delta: Some(delta),
            })
        }
    }
}

impl QuantizerSpec {
    /// Bin index of `u`: the `n` with `edges[n] <= u < edges[n+1]`, clamped
    /// to the outermost bins for out-of-range inputs.
    pub fn quantize(&self, u: f64) -> usize {
        let n_bins = self.levels.len();
        // Count interior thresholds <= u; ties go to the higher bin.
        let idx = self.edges[1..n_bins].partition_point(|e| *e <= u);
        idx.min(n_bins - 1)
    }

    pub fn reconstruct(&self, bin: usize) -> f64 {
        self.levels[bin]
    }

    /// Quantize-then-reconstruct in one step.
    pub fn project(&self, u: f64) -> f64 {
        self.levels[self.quantize(u)]
    }

    fn bin_interval(&self, n: usize) -> (f64, f64) {
        (self.edges[n], self.edges[n + 1])
    }
}

/// Compatible set `J_m`: bins `n` reachable by `u2` when `u1` lies in bin `m`
/// and `|rho*u1 - u2| < theta`, by interval arithmetic on the bin edges.
pub fn compatible_set(q: &QuantizerSpec, m: usize, theta: f64, rho: f64) -> Vec<usize> {
    let (lo, hi) = q.bin_interval(m);
    let (a, b) = if rho >= 0.0 {
        (rho * lo - theta, rho * hi + theta)
    } else {
        (rho * hi - theta, rho * lo + theta)
    };
    let n_bins = q.levels.len();
    (0..n_bins)
        .filter(|&n| {
            let (nlo, nhi) = q.bin_interval(n);
            nlo < b && nhi > a && nlo < nhi
        })
        .collect()
}

/// Closed-form distortion terms of the uniform/contaminated-uniform grid.
pub fn distortion_terms_uniform(bits: u32, rho: f64) -> Result<DistortionTerms> {
    if bits < 2 {
        return Err(Error::Unsupported(
            "distortion_terms_uniform requires B >= 2".into(),
        ));
    }
    if rho == 0.0 {
        return Err(Error::domain(
            "distortion_terms_uniform undefined at rho = 0",
        ));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::domain(format!(
            "distortion_terms_uniform requires rho in (0, 1], got {rho}"
        )));
    }
    let n2 = (codebook_size(bits) - 2) as f64;
    let omr = 1.0 - rho * rho;
    let d_q = (12.0 + omr / (rho * rho) - 4.0 * (3.0 * omr).sqrt() / rho) / (n2 * n2)
        + (3.0 * omr).powf(1.5) / (8.0 * rho.powi(3));
    let d_e1 = 6.0
        * (2f64.powi(-2 * bits as i32 + 2)
            + 5.0 * omr
            + 2f64.powi(-(bits as i32) + 3) * omr.sqrt());
    let d_e2 = 14.0 + 12.0 * rho * rho + 3.0 * omr / 4.0 + 6.0 * rho * omr.sqrt();
    Ok(DistortionTerms {
        d_q,
        d_e1,
        d_e2,
        d_ec1: None,
        d_eic1: None,
    })
}

/// Closed-form distortion terms of the Gaussian grid (explicit
/// Delta-dependent forms, before the loose constant absorption).
pub fn distortion_terms_gaussian(bits: u32, rho: f64, theta: f64) -> Result<DistortionTerms> {
    if bits < 2 {
        return Err(Error::Unsupported(
            "distortion_terms_gaussian requires B >= 2".into(),
        ));
    }
    if !(theta > 0.0) {
        return Err(Error::domain(format!("theta must be > 0, got {theta}")));
    }
    if !(rho.abs() <= 1.0) {
        return Err(Error::domain(format!("|rho| <= 1 required, got {rho}")));
    }
    let b = bits as f64;
    let n2 = (codebook_size(bits) - 2) as f64;
    let delta2 = 4.0 * b * LN_2;
    let delta = delta2.sqrt();
    let omr = 1.0 - rho * rho;
    // Shared Gaussian tail integral: e^{-D^2/2} (D/sqrt(2pi) + (1+D^2)/2).
    let tail = (-0.5 * delta2).exp() * (delta / (2.0 * PI).sqrt() + 0.5 * (1.0 + delta2));
    let d_q = 4.0 * tail + 2.0 * delta2 / (n2 * n2);
    let root = (2.0 * b * LN_2 / PI).sqrt();
    let d_e2 = 32.0 * b * LN_2
        + 4.0 * root
        + 4.0 * (-2.0 * b * LN_2).exp() * (1.0 - 4.0 * b * LN_2 + 2.0 * root);
    let one_src = 2.0 * tail + delta2 / (n2 * n2);
    let d_ec1 = one_src + 4.0 * theta * theta * omr;
    let d_eic1 = one_src + 3.0 * theta * theta * omr + omr;
    Ok(DistortionTerms {
        d_q,
        d_e1: d_ec1,
        d_e2,
        d_ec1: Some(d_ec1),
        d_eic1: Some(d_eic1),
    })
}

/// Regime boundary for the compatibility constant: the analysis calls the
/// correlation "low" once `theta > 2 sqrt(B ln 2 / (1 - rho^2))`. Used as the
/// documented default when no explicit `theta` is configured.
pub fn theta_regime_boundary(bits: u32, rho: f64) -> f64 {
    2.0 * (bits as f64 * LN_2 / (1.0 - rho * rho)).sqrt()
}
