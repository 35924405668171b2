//! Adaptive Simpson quadrature on a finite interval.
//!
//! Small and deliberately boring: the integrands in this crate are smooth
//! after the scaled-Bessel rewrite, so recursive Simpson with an absolute +
//! relative error budget is enough.

/// Integrate `f` over `[a, b]` to the requested tolerances.
///
/// Returns `None` if the subdivision budget runs out before the local error
/// estimates drop below tolerance.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: u32,
) -> Option<f64> {
    if a == b {
        return Some(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut budget = max_subdivisions as i64;
    let v = recurse(
        f, a, b, fa, fm, fb, whole, abs_tol, rel_tol, 60, &mut budget,
    )?;
    Some(v)
}

/// Integrate `f` over `[a, b]` by splitting into segments of width at most
/// `seg_width` and running adaptive Simpson on each.
///
/// Sharply peaked integrands defeat plain adaptive Simpson when every initial
/// sample lands in a flat tail; bounding the segment width by the peak scale
/// guarantees the peak is sampled.
pub(crate) fn segmented_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    seg_width: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: u32,
) -> Option<f64> {
    debug_assert!(seg_width > 0.0);
    let n = (((b - a) / seg_width).ceil() as usize).max(1);
    let per_seg_tol = abs_tol / n as f64;
    let h = (b - a) / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == n { b } else { lo + h };
        total += adaptive_simpson(f, lo, hi, per_seg_tol, rel_tol, max_subdivisions)?;
    }
    Some(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    rel_tol: f64,
    depth: u32,
    budget: &mut i64,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Standard Simpson error estimate: |delta|/15.
    let tol = abs_tol.max(rel_tol * (left + right).abs());
    if delta.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol {
            return None;
        }
        return Some(left + right + delta / 15.0);
    }
    *budget -= 1;
    if *budget < 0 {
        return None;
    }
    let l = recurse(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        0.5 * abs_tol,
        rel_tol,
        depth - 1,
        budget,
    )?;
    let r = recurse(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        0.5 * abs_tol,
        rel_tol,
        depth - 1,
        budget,
    )?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        // Simpson is exact for cubics.
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let v = adaptive_simpson(&f, 0.0, 2.0, 1e-12, 1e-12, 1000).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn gaussian_mass() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = adaptive_simpson(&f, -10.0, 10.0, 1e-12, 1e-12, 100_000).unwrap();
        assert!((v - 1.0).abs() < 1e-11, "got {v}");
    }

    #[test]
    fn budget_exhaustion_reports_failure() {
        let f = |x: f64| (1e6 * x).sin().abs();
        assert!(adaptive_simpson(&f, 0.0, 1.0, 1e-14, 1e-14, 4).is_none());
    }
}
