//! Conditional bit-error rates of the receiver and the eavesdropper, given
//! the magnitude of the receiver's quadrature outcome.
//!
//! The sender transmits one of two coherent states with real amplitudes
//! `+alpha` / `-alpha`; both parties decode by the sign of a quadrature
//! measurement. Conditioned on the receiver's outcome magnitude `x`:
//!
//! * `bob_ber` is the probability that the sign of the receiver's outcome
//!   disagrees with the sent bit, a logistic in `x`.
//! * `eve_ber` is the probability that the eavesdropper's sign disagrees
//!   with the receiver's, a pair of `erfc` terms whose arguments carry the
//!   composite channel parameter `lambda`. Through the collective noise the
//!   eavesdropper's outcome tracks the receiver's, so this error rate decays
//!   like a Gaussian in `x` once `delta > 0` and eventually drops below the
//!   receiver's logistic error; that crossover is what kills the advantage
//!   of thresholding on large `x`.
//! * `eve_ber_upper_bound` is the closed-form Gaussian tail bound on
//!   `eve_ber`, valid for large `x`.
//!
//! Everything is parameterized by the signed outcome only through `|x|`;
//! callers pass `x >= 0`.

use crate::channel::{attack_from_channel, ChannelParams};
use crate::error::{Error, Result};
use crate::gaussmath::erf::{consts::SQRT_PI, erfc, ln_erfc};
use crate::gaussmath::{gauss_pdf, ln_sigmoid, sigmoid};

/// Signal amplitude `alpha > 0` and the mean photon number `n = alpha^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Coherent-state amplitude (real, positive).
    pub alpha: f64,
    /// Mean photon number, `alpha^2`.
    pub n: f64,
}

impl ProtocolParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "alpha > 0",
            });
        }
        Ok(Self {
            alpha,
            n: alpha * alpha,
        })
    }

    pub fn from_mean_photon_number(n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n,
                constraint: "n > 0",
            });
        }
        Ok(Self { alpha: n.sqrt(), n })
    }
}

/// Which of the two signal states a quantity is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitSign {
    Plus,
    Minus,
}

impl BitSign {
    pub fn factor(self) -> f64 {
        match self {
            BitSign::Plus => 1.0,
            BitSign::Minus => -1.0,
        }
    }
}

/// Composite channel parameter
/// `lambda = sqrt(((1 - eta) + delta/2) / ((eta + delta/2) * (1 + delta)))`
/// governing the eavesdropper's error-function arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParam {
    pub lambda: f64,
}

/// One row of a bit-error-rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub x: f64,
    pub q_bob: f64,
    pub q_eve: f64,
    /// Tail bound on `q_eve`; present only where its preconditions hold.
    pub q_eve_bound: Option<f64>,
}

/// Log-likelihood-ratio scale: `8 * sqrt(eta) * alpha * x / (1 + delta)`.
fn llr(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> f64 {
    8.0 * ch.eta.sqrt() * pp.alpha * x / (1.0 + ch.delta)
}

/// Density of the receiver's quadrature outcome given the sent state: a
/// Gaussian with mean `sign * sqrt(eta) * alpha` and variance `(1 + delta)/4`.
pub fn bob_quadrature_pdf(
    x: f64,
    sign: BitSign,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> f64 {
    let mean = sign.factor() * ch.eta.sqrt() * pp.alpha;
    gauss_pdf(x, mean, ch.observed_variance()).expect("observed variance is positive")
}

/// Symmetrized outcome density `(P(x|+) + P(x|-)) / 2`.
pub fn bob_marginal_pdf(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> f64 {
    0.5 * (bob_quadrature_pdf(x, BitSign::Plus, pp, ch)
        + bob_quadrature_pdf(x, BitSign::Minus, pp, ch))
}

/// Posterior probability that the sender chose `+alpha` given outcome `x`:
/// the logistic `1 / (1 + exp(-8 sqrt(eta) alpha x / (1 + delta)))`.
pub fn posterior_alpha(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> f64 {
    sigmoid(llr(x, pp, ch))
}

/// Receiver's conditional bit-error rate: the posterior of the opposite
/// state, `1 / (1 + exp(8 sqrt(eta) alpha x / (1 + delta)))`. Equals 1/2 at
/// `x = 0` and decreases strictly in `x`.
pub fn bob_ber(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> f64 {
    sigmoid(-llr(x, pp, ch))
}

/// Natural log of [`bob_ber`], finite far beyond the underflow point.
pub fn ln_bob_ber(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> f64 {
    ln_sigmoid(-llr(x, pp, ch))
}

/// The composite parameter `lambda`; zero exactly when `eta = 1, delta = 0`.
pub fn lambda_param(ch: &ChannelParams) -> LambdaParam {
    let num = (1.0 - ch.eta) + ch.delta / 2.0;
    let den = (ch.eta + ch.delta / 2.0) * (1.0 + ch.delta);
    LambdaParam {
        lambda: (num / den).sqrt(),
    }
}

struct EveTerms {
    /// `sqrt(2) * lambda * (delta x + sqrt(eta) alpha)`
    arg_plus: f64,
    /// `sqrt(2) * lambda * (delta x - sqrt(eta) alpha)`
    arg_minus: f64,
    /// posterior of `+alpha`
    p_plus: f64,
    /// posterior of `-alpha` (the receiver's error rate)
    p_minus: f64,
    t: f64,
}

fn eve_terms(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> Result<EveTerms> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            constraint: "x >= 0",
        });
    }
    if !ch.within_ctl() {
        return Err(Error::BeyondClassicalTeleportationLimit {
            eta: ch.eta,
            delta: ch.delta,
        });
    }
    let lambda = lambda_param(ch).lambda;
    let sea = ch.eta.sqrt() * pp.alpha;
    let s2l = std::f64::consts::SQRT_2 * lambda;
    let t = llr(x, pp, ch);
    Ok(EveTerms {
        arg_plus: s2l * (ch.delta * x + sea),
        arg_minus: s2l * (ch.delta * x - sea),
        p_plus: sigmoid(t),
        p_minus: sigmoid(-t),
        t,
    })
}

/// Eavesdropper's conditional bit-error rate
/// `q_E = 1/2 P(+|x) erfc(sqrt2 lambda (delta x + sqrt(eta) alpha))
///      + 1/2 P(-|x) erfc(sqrt2 lambda (delta x - sqrt(eta) alpha))`.
///
/// Exactly 1/2 at `x = 0`; identically 1/2 on the ideal channel
/// `eta = 1, delta = 0`; independent of `x` in the large-`x` limit when
/// `delta = 0`.
pub fn eve_ber(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> Result<f64> {
    let t = eve_terms(x, pp, ch)?;
    // grouped as q_B + gap so the two erfc terms cancel exactly at x = 0
    Ok(t.p_minus + eve_bob_gap_terms(&t))
}

/// `q_E(x) - q_B(x)` without cancellation between two nearly equal values:
/// `1/2 (P(+|x) erfc(arg_plus) - P(-|x) erfc(-arg_minus))`.
pub fn eve_bob_gap(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> Result<f64> {
    Ok(eve_bob_gap_terms(&eve_terms(x, pp, ch)?))
}

fn eve_bob_gap_terms(t: &EveTerms) -> f64 {
    0.5 * (t.p_plus * erfc(t.arg_plus) - t.p_minus * erfc(-t.arg_minus))
}

/// Natural log of [`eve_ber`], usable where the plain value underflows
/// (error-function arguments in the hundreds).
pub fn ln_eve_ber(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> Result<f64> {
    let t = eve_terms(x, pp, ch)?;
    let a = ln_sigmoid(t.t) + ln_erfc(t.arg_plus);
    let b = ln_sigmoid(-t.t) + ln_erfc(t.arg_minus);
    let hi = a.max(b);
    let lo = a.min(b);
    Ok(std::f64::consts::LN_2.mul_add(-1.0, hi + (lo - hi).exp().ln_1p()))
}

/// Sign of `q_E(x) - q_B(x)` evaluated in the log domain, reliable even
/// where both error rates underflow to zero.
pub fn eve_bob_log_gap(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> Result<f64> {
    Ok(ln_eve_ber(x, pp, ch)? - ln_bob_ber(x, pp, ch))
}

/// Closed-form Gaussian upper bound on [`eve_ber`]:
/// `exp(-2 lambda^2 eta alpha^2) / sqrt(pi) * exp(-lambda^2 delta^2 x^2)`.
///
/// Valid only where its derivation holds: `delta > 0`,
/// `sqrt2 lambda (delta x - sqrt(eta) alpha) > 1`, and
/// `x > 4 sqrt(eta) alpha / delta`. Points outside get a domain error naming
/// the violated precondition.
pub fn eve_ber_upper_bound(x: f64, pp: &ProtocolParams, ch: &ChannelParams) -> Result<f64> {
    let t = eve_terms(x, pp, ch)?;
    if !(ch.delta > 0.0) {
        return Err(Error::BoundOutOfDomain {
            x,
            precondition: "delta > 0",
        });
    }
    if !(t.arg_minus > 1.0) {
        return Err(Error::BoundOutOfDomain {
            x,
            precondition: "sqrt(2)*lambda*(delta*x - sqrt(eta)*alpha) > 1",
        });
    }
    let sea = ch.eta.sqrt() * pp.alpha;
    if !(x > 4.0 * sea / ch.delta) {
        return Err(Error::BoundOutOfDomain {
            x,
            precondition: "x > 4*sqrt(eta)*alpha/delta",
        });
    }
    let l2 = lambda_param(ch).lambda.powi(2);
    let prefactor = (-2.0 * l2 * ch.eta * pp.alpha * pp.alpha).exp() / SQRT_PI;
    Ok(prefactor * (-l2 * ch.delta * ch.delta * x * x).exp())
}

/// Smallest `x` at which all preconditions of [`eve_ber_upper_bound`] hold.
pub fn bound_domain_start(pp: &ProtocolParams, ch: &ChannelParams) -> Result<f64> {
    if !(ch.delta > 0.0) {
        return Err(Error::BoundOutOfDomain {
            x: f64::NAN,
            precondition: "delta > 0",
        });
    }
    if !ch.within_ctl() {
        return Err(Error::BeyondClassicalTeleportationLimit {
            eta: ch.eta,
            delta: ch.delta,
        });
    }
    let lambda = lambda_param(ch).lambda;
    let sea = ch.eta.sqrt() * pp.alpha;
    let from_erfc_arg = (1.0 / (std::f64::consts::SQRT_2 * lambda) + sea) / ch.delta;
    let from_ratio = 4.0 * sea / ch.delta;
    Ok(from_erfc_arg.max(from_ratio))
}

/// Evaluate both error rates (and the tail bound where defined) on a strictly
/// increasing grid of nonnegative outcomes.
pub fn ber_curve(
    x_grid: &[f64],
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> Result<Vec<BerPoint>> {
    for (i, &x) in x_grid.iter().enumerate() {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x_grid",
                value: x,
                constraint: "nonnegative finite entries",
            });
        }
        if i > 0 && x <= x_grid[i - 1] {
            return Err(Error::InvalidParameter {
                name: "x_grid",
                value: x,
                constraint: "strictly increasing entries",
            });
        }
    }
    x_grid
        .iter()
        .map(|&x| {
            Ok(BerPoint {
                x,
                q_bob: bob_ber(x, pp, ch),
                q_eve: eve_ber(x, pp, ch)?,
                q_eve_bound: eve_ber_upper_bound(x, pp, ch).ok(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussmath::{integrate_semi_infinite, ToleranceConfig};

    fn ch(eta: f64, delta: f64) -> ChannelParams {
        ChannelParams::new(eta, delta).unwrap()
    }

    fn pp(alpha: f64) -> ProtocolParams {
        ProtocolParams::new(alpha).unwrap()
    }

    #[test]
    fn pdf_peak_and_symmetry() {
        let p = pp(1.0);
        let c = ch(0.7, 0.0);
        let peak = bob_quadrature_pdf(c.eta.sqrt(), BitSign::Plus, &p, &c);
        assert!((peak - 0.7978845608028653558798921).abs() < 1e-15);

        let c = ch(0.6, 0.3);
        let x = 0.37;
        let a = bob_quadrature_pdf(x, BitSign::Plus, &p, &c);
        let b = bob_quadrature_pdf(-x, BitSign::Minus, &p, &c);
        assert!((a - b).abs() < 1e-16);
    }

    #[test]
    fn pdf_normalizes() {
        let p = pp(0.1);
        let c = ch(0.5, 0.8);
        let cfg = ToleranceConfig::default();
        let upper =
            integrate_semi_infinite(|x| bob_quadrature_pdf(x, BitSign::Plus, &p, &c), 0.0, &cfg)
                .unwrap();
        let lower =
            integrate_semi_infinite(|x| bob_quadrature_pdf(-x, BitSign::Plus, &p, &c), 0.0, &cfg)
                .unwrap();
        assert!((upper + lower - 1.0).abs() < 1e-9);
    }

    #[test]
    fn posterior_examples() {
        let p = pp(1.0);
        let c = ch(1.0, 0.0);
        assert_eq!(posterior_alpha(0.0, &p, &c), 0.5);
        assert_eq!(posterior_alpha(1e8, &p, &c), 1.0);
        // 1/(1 + e^-8), mpmath reference
        assert!((posterior_alpha(1.0, &p, &c) - 0.9996646498695335218961217).abs() < 1e-15);
        // stable for very large outcomes
        assert_eq!(posterior_alpha(1e4, &p, &c), 1.0);
        assert_eq!(posterior_alpha(-1e4, &p, &c), 0.0);
    }

    #[test]
    fn posterior_signs_sum_to_one() {
        let p = pp(0.7);
        let c = ch(0.6, 0.4);
        let mut x = -5.0;
        while x <= 5.0 {
            let s = posterior_alpha(x, &p, &c) + posterior_alpha(-x, &p, &c);
            assert!((s - 1.0).abs() < 1e-15);
            x += 0.31;
        }
    }

    #[test]
    fn bob_ber_examples() {
        let p = pp(1.0);
        assert_eq!(bob_ber(0.0, &p, &ch(0.8, 0.3)), 0.5);
        // 1/(1 + e^8)
        assert!((bob_ber(1.0, &p, &ch(1.0, 0.0)) - 0.0003353501304664781038783278).abs() < 1e-18);
        // 1/(1 + e^(8/3)) at eta = 0.64, delta = 0.2, x = 0.5
        assert!(
            (bob_ber(0.5, &p, &ch(0.64, 0.2)) - 0.06496916912866406212754281).abs() < 1e-16
        );
    }

    #[test]
    fn bob_ber_monotone_and_bounded() {
        let p = pp(0.5);
        let c = ch(0.7, 0.6);
        let mut prev = bob_ber(0.0, &p, &c);
        assert_eq!(prev, 0.5);
        let mut x = 0.05;
        while x < 10.0 {
            let q = bob_ber(x, &p, &c);
            assert!(q < prev && q <= 0.5);
            prev = q;
            x += 0.05;
        }
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_param(&ch(0.5, 0.0)).lambda, 1.0);
        assert_eq!(lambda_param(&ch(1.0, 0.0)).lambda, 0.0);
        // direct substitution: ((1-0.5)+0.5)/((0.5+0.5)*(1+1)) = 1/2
        assert!((lambda_param(&ch(0.5, 1.0)).lambda - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(
            (lambda_param(&ch(0.8, 0.4)).lambda - 0.534522483824848769369107).abs() < 1e-15
        );
    }

    #[test]
    fn eve_ber_anchors() {
        let p = pp(1.0);
        // exactly 1/2 at the origin
        assert_eq!(eve_ber(0.0, &p, &ch(0.8, 0.4)).unwrap(), 0.5);
        assert_eq!(eve_ber(0.0, &p, &ch(0.3, 0.1)).unwrap(), 0.5);
        // identically 1/2 on the ideal channel
        let ideal = ch(1.0, 0.0);
        for &x in &[0.0, 0.3, 1.7, 9.0] {
            assert!((eve_ber(x, &p, &ideal).unwrap() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn eve_ber_reference_values() {
        // mpmath references at eta = 0.8, delta = 0.4, alpha = 1
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let cases = [
            (0.5, 0.1678443153053829228372589),
            (1.0, 0.08691532389113363140428596),
            (2.0, 0.03505638668586813161535677),
        ];
        for (x, want) in cases {
            let got = eve_ber(x, &p, &c).unwrap();
            assert!(
                (got - want).abs() < 1e-15,
                "q_E({x}) = {got}, expected {want}"
            );
        }
    }

    #[test]
    fn eve_ber_constant_limit_at_zero_noise() {
        let p = pp(1.0);
        let c = ch(0.5, 0.0);
        let lambda = lambda_param(&c).lambda;
        let limit = 0.5 * erfc(std::f64::consts::SQRT_2 * lambda * c.eta.sqrt() * p.alpha);
        let far = 20.0 * c.observed_std();
        assert!((eve_ber(far, &p, &c).unwrap() - limit).abs() < 1e-10);
    }

    #[test]
    fn eve_ber_in_unit_interval_and_ln_consistent() {
        let p = pp(0.6);
        let c = ch(0.7, 0.5);
        let mut x = 0.0;
        while x < 12.0 {
            let q = eve_ber(x, &p, &c).unwrap();
            assert!(q > 0.0 && q < 1.0);
            let lq = ln_eve_ber(x, &p, &c).unwrap();
            if q > 1e-300 {
                assert!((lq - q.ln()).abs() < 1e-9, "ln mismatch at {x}: {lq} vs {}", q.ln());
            }
            x += 0.37;
        }
    }

    #[test]
    fn gap_matches_direct_difference() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        for &x in &[0.1, 0.5, 1.0, 2.5] {
            let gap = eve_bob_gap(x, &p, &c).unwrap();
            let direct = eve_ber(x, &p, &c).unwrap() - bob_ber(x, &p, &c);
            assert!((gap - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn bound_examples() {
        let p = pp(1.0);
        let c = ch(0.5, 0.5);
        // in-domain point, mpmath reference for the closed form
        let b = eve_ber_upper_bound(10.0, &p, &c).unwrap();
        assert!((b - 1.673609159312959780864029e-8).abs() < 1e-22);
        let q = eve_ber(10.0, &p, &c).unwrap();
        assert!(q < b, "bound must dominate: q = {q:e}, bound = {b:e}");

        // x = 1 violates x > 4 sqrt(eta) alpha / delta = 5.657
        let err = eve_ber_upper_bound(1.0, &p, &c).unwrap_err();
        assert!(matches!(err, Error::BoundOutOfDomain { .. }));

        // delta = 0 has no bound at all
        let err = eve_ber_upper_bound(10.0, &p, &ch(0.5, 0.0)).unwrap_err();
        assert!(matches!(
            err,
            Error::BoundOutOfDomain {
                precondition: "delta > 0",
                ..
            }
        ));
    }

    #[test]
    fn bound_dominates_on_random_domain_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 200 {
            let eta: f64 = rng.gen_range(0.1..=1.0);
            let delta: f64 = rng.gen_range(0.05..(2.0 * eta).min(1.9) * 0.95);
            let alpha: f64 = rng.gen_range(0.05..2.0);
            let p = pp(alpha);
            let c = ch(eta, delta);
            let start = bound_domain_start(&p, &c).unwrap();
            let x = start * rng.gen_range(1.001..2.0);
            let l2 = lambda_param(&c).lambda.powi(2);
            if l2 * delta * delta * x * x > 600.0 {
                continue; // bound underflows; compared in log domain elsewhere
            }
            let b = eve_ber_upper_bound(x, &p, &c).unwrap();
            let q = eve_ber(x, &p, &c).unwrap();
            assert!(q < b, "chain violated at eta={eta}, delta={delta}, alpha={alpha}, x={x}");
            checked += 1;
        }
    }

    #[test]
    fn curve_basics() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let pts = ber_curve(&[0.0], &p, &c).unwrap();
        assert_eq!(pts[0].q_bob, 0.5);
        assert_eq!(pts[0].q_eve, 0.5);
        assert!(pts[0].q_eve_bound.is_none());

        let grid: Vec<f64> = (0..60).map(|i| f64::from(i) * 0.25).collect();
        let pts = ber_curve(&grid, &p, &c).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].q_bob < w[0].q_bob, "q_bob must strictly decrease");
        }
        // bound column fills in once inside its domain
        let start = bound_domain_start(&p, &c).unwrap();
        for pt in &pts {
            assert_eq!(pt.q_eve_bound.is_some(), pt.x > start);
        }

        assert!(ber_curve(&[0.0, 0.0], &p, &c).is_err());
        assert!(ber_curve(&[-1.0], &p, &c).is_err());
    }

    #[test]
    fn ctl_violation_propagates() {
        let p = pp(1.0);
        let c = ch(0.3, 0.6);
        assert!(matches!(
            eve_ber(1.0, &p, &c),
            Err(Error::BeyondClassicalTeleportationLimit { .. })
        ));
    }

    #[test]
    fn protocol_params_consistency() {
        let p = ProtocolParams::new(2.0).unwrap();
        assert_eq!(p.n, 4.0);
        let p = ProtocolParams::from_mean_photon_number(0.25).unwrap();
        assert_eq!(p.alpha, 0.5);
        assert!(ProtocolParams::new(0.0).is_err());
        assert!(ProtocolParams::new(-1.0).is_err());
        assert!(ProtocolParams::from_mean_photon_number(0.0).is_err());
    }
}
