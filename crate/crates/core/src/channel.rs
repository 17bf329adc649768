//! The lossy Gaussian channel, its decomposition into an amplifier followed
//! by a beam splitter, and the closed-form security lines derived from it.
//!
//! A channel is described by the line transmission `eta` and the excess
//! quadrature noise `delta` (observed variance `(1 + delta)/4`). Any such
//! channel with `delta < 2*eta` can be produced by the eavesdropper with a
//! phase-insensitive amplifier of gain `g` followed by a beam splitter of
//! transmission `kappa`, leaving her a correlated copy of the receiver's
//! coherent state scaled by the amplitude ratio `xi`.

use crate::error::{Error, Result};

/// Line transmission and excess quadrature noise of the Gaussian channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Line transmission, in (0, 1].
    pub eta: f64,
    /// Excess quadrature noise, >= 0, in units of the vacuum variance.
    pub delta: f64,
}

impl ChannelParams {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                constraint: "0 < eta <= 1",
            });
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                constraint: "delta >= 0",
            });
        }
        Ok(Self { eta, delta })
    }

    /// The quadrature variance the receiver observes, `(1 + delta)/4`.
    pub fn observed_variance(&self) -> f64 {
        (1.0 + self.delta) / 4.0
    }

    /// Standard deviation of the receiver's quadrature outcome.
    pub fn observed_std(&self) -> f64 {
        self.observed_variance().sqrt()
    }

    /// Whether the channel lies strictly inside the classical teleportation
    /// limit `delta < 2*eta`. On the limit an intercept-resend attack
    /// reproduces the channel exactly, so no protocol can be secure there.
    pub fn within_ctl(&self) -> bool {
        self.delta < 2.0 * self.eta
    }

    fn require_within_ctl(&self) -> Result<()> {
        if self.within_ctl() {
            Ok(())
        } else {
            Err(Error::BeyondClassicalTeleportationLimit {
                eta: self.eta,
                delta: self.delta,
            })
        }
    }
}

/// Amplifier gain, beam-splitter transmission, and the eavesdropper-to-receiver
/// amplitude ratio realizing a given channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackParams {
    /// Phase-insensitive amplifier gain, >= 1.
    pub g: f64,
    /// Beam-splitter transmission, in (0, 1].
    pub kappa: f64,
    /// Eavesdropper amplitude divided by receiver amplitude.
    pub xi: f64,
}

impl AttackParams {
    pub fn new(g: f64, kappa: f64, xi: f64) -> Result<Self> {
        if !(g >= 1.0) || !g.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g",
                value: g,
                constraint: "g >= 1",
            });
        }
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                constraint: "0 < kappa <= 1",
            });
        }
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "xi",
                value: xi,
                constraint: "xi >= 0",
            });
        }
        Ok(Self { g, kappa, xi })
    }
}

/// Map a channel to the amplifier/beam-splitter attack realizing it:
/// `g = eta / (eta - delta/2)`, `kappa = eta - delta/2`,
/// `xi = sqrt((1 - eta + delta/2) / (eta - delta/2))`.
///
/// Rejects channels at or beyond the classical teleportation limit, where the
/// required gain diverges.
pub fn attack_from_channel(ch: &ChannelParams) -> Result<AttackParams> {
    ch.require_within_ctl()?;
    let half = ch.delta / 2.0;
    let kappa = ch.eta - half;
    let g = ch.eta / kappa;
    let xi = ((1.0 - ch.eta + half) / kappa).sqrt();
    AttackParams::new(g, kappa, xi)
}

/// Map attack parameters back to the channel they produce:
/// `eta = g * kappa`, `delta = 2 * (g - 1) * kappa`.
pub fn channel_from_attack(g: f64, kappa: f64) -> Result<ChannelParams> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::InvalidParameter {
            name: "g",
            value: g,
            constraint: "g >= 1",
        });
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: kappa,
            constraint: "0 < kappa <= 1",
        });
    }
    let eta = g * kappa;
    if eta > 1.0 {
        return Err(Error::UnphysicalTransmission { g, kappa });
    }
    ChannelParams::new(eta, 2.0 * (g - 1.0) * kappa)
}

/// Observed receiver variance, `(1 + delta)/4`.
pub fn observed_variance(ch: &ChannelParams) -> f64 {
    ch.observed_variance()
}

/// `delta < 2*eta` predicate; see [`ChannelParams::within_ctl`].
pub fn within_ctl(ch: &ChannelParams) -> bool {
    ch.within_ctl()
}

/// Whether a Gaussian-modulated protocol without postselection is secure on
/// this channel: the receiver's signal-to-noise ratio beats the
/// eavesdropper's iff `xi <= 1`, equivalently `delta <= 2*eta - 1`. At
/// `delta = 0` this is the 3 dB loss limit `eta >= 1/2`. The `xi = 1`
/// boundary counts as secure.
pub fn gaussian_protocol_secure(ch: &ChannelParams) -> Result<bool> {
    let attack = attack_from_channel(ch)?;
    Ok(attack.xi <= 1.0)
}

/// Amplitude ratio when the sender uses thermal coherent states and the
/// eavesdropper taps a plain beam splitter: `sqrt((1 - eta)/eta)`. Coincides
/// with the amplifier-attack `xi` at `delta = 0`.
pub fn xi_thermal(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            constraint: "0 < eta <= 1",
        });
    }
    Ok(((1.0 - eta) / eta).sqrt())
}
