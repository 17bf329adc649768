//! Adaptive Simpson quadrature on finite and semi-infinite intervals.

use crate::error::{Error, Result};

/// Tolerances and budget for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Absolute tolerance, >= 0.
    pub abs_tol: f64,
    /// Relative tolerance, >= 0.
    pub rel_tol: f64,
    /// Maximum number of interval subdivisions before giving up.
    pub max_subdivisions: u64,
}

impl ToleranceConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: u64) -> Result<Self> {
        if !(abs_tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: abs_tol,
                constraint: "abs_tol >= 0",
            });
        }
        if !(rel_tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: rel_tol,
                constraint: "rel_tol >= 0",
            });
        }
        if abs_tol + rel_tol <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: abs_tol,
                constraint: "abs_tol + rel_tol > 0",
            });
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidParameter {
                name: "max_subdivisions",
                value: 0.0,
                constraint: "max_subdivisions >= 1",
            });
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 1 << 20,
        }
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct Adaptive<'a, F> {
    f: &'a F,
    budget: u64,
    limit: u64,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        // the factor 15 is the usual Richardson estimate for Simpson's rule
        if delta.abs() <= 15.0 * tol || (b - a) < f64::EPSILON * (a.abs() + b.abs()) {
            return Ok(left + right + delta / 15.0);
        }
        if self.budget == 0 {
            return Err(Error::NonConvergence {
                context: "adaptive Simpson quadrature",
                limit: self.limit,
            });
        }
        self.budget -= 1;
        let half_tol = 0.5 * tol;
        Ok(self.refine(a, m, fa, flm, fm, left, half_tol)?
            + self.refine(m, b, fm, frm, fb, right, half_tol)?)
    }
}

/// Integrate `f` over the finite interval `[a, b]` to the configured tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &ToleranceConfig) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter {
            name: "interval",
            value: if a.is_finite() { b } else { a },
            constraint: "finite endpoints",
        });
    }
    if a == b {
        return Ok(0.0);
    }
    let (a, b, flip) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    let tol = cfg.abs_tol.max(cfg.rel_tol * whole.abs());
    let mut driver = Adaptive {
        f: &f,
        budget: cfg.max_subdivisions,
        limit: cfg.max_subdivisions,
    };
    Ok(flip * driver.refine(a, b, fa, fm, fb, whole, tol)?)
}

/// Integrate `f` over `[a, inf)` for an absolutely integrable, decaying `f`.
///
/// The tail is truncated by scanning geometrically growing segments and
/// stopping once two consecutive segments contribute less than the absolute
/// tolerance; each finite piece is handled by [`integrate`].
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            constraint: "finite lower limit",
        });
    }
    let mut total = 0.0;
    let mut lo = a;
    let mut width = 1.0f64.max(0.25 * a.abs());
    let mut quiet_segments = 0u32;
    for _ in 0..64 {
        let hi = lo + width;
        // probe the segment so a locally tiny f cannot end the scan while a
        // later peak is still ahead
        let mut peak = 0.0f64;
        for i in 0..=8 {
            peak = peak.max(f(lo + width * f64::from(i) / 8.0).abs());
        }
        let piece = integrate(&f, lo, hi, cfg)?;
        total += piece;
        let cutoff = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if piece.abs() <= cutoff && peak * width <= cutoff {
            quiet_segments += 1;
            if quiet_segments >= 2 {
                return Ok(total);
            }
        } else {
            quiet_segments = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::NonConvergence {
        context: "semi-infinite quadrature tail scan",
        limit: 64,
    })
}
