//! Binary-symmetric-channel information and postselected mutual information.
//!
//! A round is kept when the magnitude of the receiver's outcome falls in the
//! postselection window. The per-pulse information between the sender and a
//! party is the window integral of the outcome density times the
//! binary-symmetric-channel information of that party's conditional error
//! rate; the factor 1/2 from folding the two outcome signs is absorbed into
//! the symmetrized density, so no extra sifting constant appears. Security
//! verdicts depend only on the sign of the information difference, which a
//! common constant cannot change.

use crate::ber::{bob_ber, bob_marginal_pdf, eve_ber, ProtocolParams};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::gaussmath::erf::erfc;
use crate::gaussmath::{integrate, ToleranceConfig};

/// Accepted range `[x0, x1)` of outcome magnitudes; `x1 = None` keeps
/// everything above `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostselectionWindow {
    pub x0: f64,
    pub x1: Option<f64>,
}

impl PostselectionWindow {
    pub fn new(x0: f64, x1: f64) -> Result<Self> {
        if !(x0 >= 0.0) || !x0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x0",
                value: x0,
                constraint: "x0 >= 0",
            });
        }
        if !(x1 > x0) {
            return Err(Error::InvalidParameter {
                name: "x1",
                value: x1,
                constraint: "x1 > x0",
            });
        }
        Ok(Self { x0, x1: Some(x1) })
    }

    pub fn above(x0: f64) -> Result<Self> {
        if !(x0 >= 0.0) || !x0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x0",
                value: x0,
                constraint: "x0 >= 0",
            });
        }
        Ok(Self { x0, x1: None })
    }

    pub fn contains(&self, magnitude: f64) -> bool {
        magnitude >= self.x0 && self.x1.map_or(true, |hi| magnitude < hi)
    }
}

/// Whose conditional error rate enters the information integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Bob,
    Eve,
}

/// Postselected informations of both parties and the window acceptance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoResult {
    /// Sender-receiver information per pulse, bits.
    pub i_ab: f64,
    /// Sender-eavesdropper information per pulse, bits.
    pub i_ae: f64,
    /// `i_ab - i_ae`.
    pub advantage: f64,
    /// Probability that a round is accepted by the window.
    pub acceptance_prob: f64,
}

/// Mutual information of a binary symmetric channel with error rate `q`:
/// `i(q) = 1 + q log2 q + (1 - q) log2(1 - q)`.
pub fn bsc_info(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) || q.is_nan() {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
            constraint: "0 <= q <= 1",
        });
    }
    let plogp = |p: f64| if p == 0.0 { 0.0 } else { p * p.log2() };
    Ok(1.0 + plogp(q) + plogp(1.0 - q))
}

fn integration_cutoff(pp: &ProtocolParams, ch: &ChannelParams) -> f64 {
    // the integrand is dominated by a Gaussian centred at sqrt(eta)*alpha;
    // 12 standard deviations leave a tail far below the default tolerances
    ch.eta.sqrt() * pp.alpha + 12.0 * ch.observed_std()
}

/// Postselected mutual information of one party over the window:
/// the integral over accepted magnitudes of the symmetrized outcome density
/// times `i(q_party(x))`. Nonnegative; vanishes as `x0` grows.
pub fn ps_mutual_info(
    party: Party,
    w: &PostselectionWindow,
    pp: &ProtocolParams,
    ch: &ChannelParams,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    if party == Party::Eve && !ch.within_ctl() {
        return Err(Error::BeyondClassicalTeleportationLimit {
            eta: ch.eta,
            delta: ch.delta,
        });
    }
    let hi = match w.x1 {
        Some(x1) => x1.min(integration_cutoff(pp, ch)),
        None => integration_cutoff(pp, ch),
    };
    if hi <= w.x0 {
        return Ok(0.0);
    }
    let integrand = |x: f64| {
        let q = match party {
            Party::Bob => bob_ber(x, pp, ch),
            Party::Eve => eve_ber(x, pp, ch).expect("CTL checked above"),
        };
        bob_marginal_pdf(x, pp, ch) * bsc_info(q).expect("error rates lie in [0, 1]")
    };
    integrate(integrand, w.x0, hi, cfg)
}

/// Probability that `|x|` lands in the window, in closed form.
pub fn acceptance_probability(
    w: &PostselectionWindow,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> f64 {
    let sigma = ch.observed_std();
    let mean = ch.eta.sqrt() * pp.alpha;
    // P(X > t) for the symmetrized two-component mixture
    let upper_tail = |t: f64| {
        0.25 * (erfc((t - mean) / (sigma * std::f64::consts::SQRT_2))
            + erfc((t + mean) / (sigma * std::f64::consts::SQRT_2)))
    };
    let top = w.x1.map_or(0.0, upper_tail);
    2.0 * (upper_tail(w.x0) - top)
}

/// Evaluate both parties on the same window and report the advantage.
pub fn info_advantage(
    w: &PostselectionWindow,
    pp: &ProtocolParams,
    ch: &ChannelParams,
    cfg: &ToleranceConfig,
) -> Result<InfoResult> {
    let i_ab = ps_mutual_info(Party::Bob, w, pp, ch, cfg)?;
    let i_ae = ps_mutual_info(Party::Eve, w, pp, ch, cfg)?;
    Ok(InfoResult {
        i_ab,
        i_ae,
        advantage: i_ab - i_ae,
        acceptance_prob: acceptance_probability(w, pp, ch),
    })
}
