//! Seeded simulation of full protocol rounds under the amplifier plus
//! beam-splitter attack, used as an independent check on every closed form
//! in the crate.
//!
//! Each round draws the sent bit, the collective Gaussian displacement
//! `beta` (shared by both receiving modes, which is what correlates the
//! eavesdropper with the receiver), and both quadrature outcomes. Error
//! tallies are binned by the magnitude of the receiver's outcome:
//!
//! * the receiver errs when the sign of her outcome disagrees with the sent
//!   bit;
//! * the eavesdropper's conditional error rate is the probability that her
//!   sign disagrees with the *receiver's* sign, which is the event the
//!   closed-form `eve_ber` describes.
//!
//! Rounds are split across independent ChaCha substreams with fixed stream
//! assignment, so results are bit-identical for a given configuration no
//! matter how the work is scheduled.

use crate::ber::{bob_ber, bob_marginal_pdf, eve_ber, ProtocolParams};
use crate::channel::{attack_from_channel, AttackParams, ChannelParams};
use crate::error::{Error, Result};
use crate::gaussmath::{integrate, integrate_semi_infinite, ToleranceConfig};
use crate::infotheory::{bsc_info, PostselectionWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, StandardNormal};
use rayon::prelude::*;

/// Stream id reserved for bootstrap resampling, far above any data stream.
const BOOTSTRAP_STREAM: u64 = 1 << 40;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// Simulation size, seeding, and binning configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub rounds: u64,
    /// Width of the `|x|` bins.
    pub bin_width: f64,
    /// Number of independent RNG substreams the rounds are split across.
    pub stream_count: u32,
}

impl McConfig {
    pub fn new(seed: u64, rounds: u64, bin_width: f64, stream_count: u32) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidParameter {
                name: "rounds",
                value: 0.0,
                constraint: "rounds >= 1",
            });
        }
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::InvalidParameter {
                name: "bin_width",
                value: bin_width,
                constraint: "bin_width > 0",
            });
        }
        if stream_count == 0 {
            return Err(Error::InvalidParameter {
                name: "stream_count",
                value: 0.0,
                constraint: "stream_count >= 1",
            });
        }
        Ok(Self {
            seed,
            rounds,
            bin_width,
            stream_count,
        })
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            rounds: 1_000_000,
            bin_width: 0.05,
            stream_count: 16,
        }
    }
}

/// One simulated round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    /// Sent bit, +1 or -1.
    pub bit: i8,
    /// Collective displacement added to both receiving modes.
    pub beta_re: f64,
    pub beta_im: f64,
    /// Receiver's quadrature outcome.
    pub x_bob: f64,
    /// Eavesdropper's quadrature outcome.
    pub x_eve: f64,
}

fn sign_of(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Draw one protocol round. The displacement has variance `delta/4` per
/// quadrature and enters both means; each mode adds its own vacuum noise of
/// variance 1/4. `delta = 0` uses an exactly zero displacement.
pub fn sample_round<R: Rng>(
    rng: &mut R,
    pp: &ProtocolParams,
    ch: &ChannelParams,
    attack: &AttackParams,
) -> TrialRecord {
    let bit: i8 = if rng.gen::<bool>() { 1 } else { -1 };
    let (beta_re, beta_im) = if ch.delta > 0.0 {
        let s = (ch.delta / 4.0).sqrt();
        let zr: f64 = rng.sample(StandardNormal);
        let zi: f64 = rng.sample(StandardNormal);
        (s * zr, s * zi)
    } else {
        (0.0, 0.0)
    };
    let signal = ch.eta.sqrt() * f64::from(bit) * pp.alpha + beta_re;
    let zb: f64 = rng.sample(StandardNormal);
    let ze: f64 = rng.sample(StandardNormal);
    TrialRecord {
        bit,
        beta_re,
        beta_im,
        x_bob: signal + 0.5 * zb,
        x_eve: attack.xi * signal + 0.5 * ze,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BinTally {
    count: u64,
    bob_errors: u64,
    eve_mismatches: u64,
    sum_abs_x: f64,
}

impl BinTally {
    fn merge(&mut self, other: &BinTally) {
        self.count += other.count;
        self.bob_errors += other.bob_errors;
        self.eve_mismatches += other.eve_mismatches;
        self.sum_abs_x += other.sum_abs_x;
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct MomentAcc {
    count: u64,
    sum_b: f64,
    sum_b2: f64,
    sum_e: f64,
    sum_e2: f64,
    sum_be: f64,
}

impl MomentAcc {
    fn push(&mut self, x_bob: f64, x_eve: f64) {
        self.count += 1;
        self.sum_b += x_bob;
        self.sum_b2 += x_bob * x_bob;
        self.sum_e += x_eve;
        self.sum_e2 += x_eve * x_eve;
        self.sum_be += x_bob * x_eve;
    }

    fn merge(&mut self, other: &MomentAcc) {
        self.count += other.count;
        self.sum_b += other.sum_b;
        self.sum_b2 += other.sum_b2;
        self.sum_e += other.sum_e;
        self.sum_e2 += other.sum_e2;
        self.sum_be += other.sum_be;
    }

    fn mean_b(&self) -> f64 {
        self.sum_b / self.count as f64
    }

    /// Within-group sums of squares about the group means.
    fn ss(&self) -> (f64, f64, f64) {
        let n = self.count as f64;
        let ss_b = self.sum_b2 - self.sum_b * self.sum_b / n;
        let ss_e = self.sum_e2 - self.sum_e * self.sum_e / n;
        let ss_be = self.sum_be - self.sum_b * self.sum_e / n;
        (ss_b, ss_e, ss_be)
    }
}

/// Estimated error rates in one `|x|` bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinEstimate {
    pub lo: f64,
    /// Upper edge; `None` marks the merged far tail.
    pub hi: Option<f64>,
    pub count: u64,
    /// Mean `|x|` of the samples landing in the bin.
    pub mean_abs_x: Option<f64>,
    /// Receiver error rate; `None` for an empty bin rather than 0/0.
    pub q_bob: Option<f64>,
    pub q_bob_se: Option<f64>,
    /// Eavesdropper-vs-receiver mismatch rate.
    pub q_eve: Option<f64>,
    pub q_eve_se: Option<f64>,
}

/// Sample moments conditioned on the sent bit, pooled over both bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentsEstimate {
    pub rounds: u64,
    /// Receiver mean outcome given bit +1, to compare with `sqrt(eta)*alpha`.
    pub bob_mean_plus: f64,
    pub bob_mean_plus_se: f64,
    /// Receiver conditional variance, to compare with `(1 + delta)/4`.
    pub bob_var: f64,
    pub bob_var_se: f64,
    /// Eavesdropper conditional variance, vs `(xi^2 delta + 1)/4`.
    pub eve_var: f64,
    pub eve_var_se: f64,
    /// Conditional covariance of the two outcomes, vs `xi * delta/4`.
    pub cov_be: f64,
    pub cov_be_se: f64,
}

/// Binned conditional error-rate estimates plus the moment checks.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub config: McConfig,
    pub bins: Vec<BinEstimate>,
    pub moments: MomentsEstimate,
}

struct StreamTally {
    bins: Vec<BinTally>,
    plus: MomentAcc,
    minus: MomentAcc,
}

fn stream_rounds(cfg: &McConfig, stream: u32) -> u64 {
    let base = cfg.rounds / u64::from(cfg.stream_count);
    let rem = cfg.rounds % u64::from(cfg.stream_count);
    base + u64::from(u64::from(stream) < rem)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Number of regular bins before the merged tail: everything beyond
/// `8 * sigma_obs + sqrt(eta) * alpha` lands in one bin.
fn core_bin_count(cfg: &McConfig, pp: &ProtocolParams, ch: &ChannelParams) -> usize {
    let cutoff = ch.eta.sqrt() * pp.alpha + 8.0 * ch.observed_std();
    ((cutoff / cfg.bin_width).ceil() as usize).max(1)
}

fn run_binned(
    cfg: &McConfig,
    pp: &ProtocolParams,
    ch: &ChannelParams,
    attack: &AttackParams,
    n_core: usize,
) -> Vec<StreamTally> {
    (0..cfg.stream_count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, u64::from(k));
            let mut tally = StreamTally {
                bins: vec![BinTally::default(); n_core + 1],
                plus: MomentAcc::default(),
                minus: MomentAcc::default(),
            };
            for _ in 0..stream_rounds(cfg, k) {
                let t = sample_round(&mut rng, pp, ch, attack);
                let abs_x = t.x_bob.abs();
                let idx = ((abs_x / cfg.bin_width) as usize).min(n_core);
                let bin = &mut tally.bins[idx];
                bin.count += 1;
                bin.sum_abs_x += abs_x;
                bin.bob_errors += u64::from(sign_of(t.x_bob) != t.bit);
                bin.eve_mismatches += u64::from(sign_of(t.x_eve) != sign_of(t.x_bob));
                if t.bit > 0 {
                    tally.plus.push(t.x_bob, t.x_eve);
                } else {
                    tally.minus.push(t.x_bob, t.x_eve);
                }
            }
            tally
        })
        .collect()
}

fn binomial_se(q: f64, n: u64) -> f64 {
    (q * (1.0 - q) / n as f64).sqrt()
}

/// Simulate and estimate per-bin conditional error rates. Deterministic for
/// a fixed configuration; empty bins are flagged with `None` fields instead
/// of dividing by zero.
pub fn estimate_conditional_bers(
    cfg: &McConfig,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> Result<McEstimate> {
    let attack = attack_from_channel(ch)?;
    estimate_conditional_bers_with_attack(cfg, pp, ch, &attack)
}

/// [`estimate_conditional_bers`] with explicit attack parameters, so a
/// deliberately corrupted attack can be simulated against the honest
/// analytics.
pub fn estimate_conditional_bers_with_attack(
    cfg: &McConfig,
    pp: &ProtocolParams,
    ch: &ChannelParams,
    attack: &AttackParams,
) -> Result<McEstimate> {
    let n_core = core_bin_count(cfg, pp, ch);
    let tallies = run_binned(cfg, pp, ch, attack, n_core);

    let mut bins = vec![BinTally::default(); n_core + 1];
    let mut plus = MomentAcc::default();
    let mut minus = MomentAcc::default();
    for t in &tallies {
        for (acc, part) in bins.iter_mut().zip(&t.bins) {
            acc.merge(part);
        }
        plus.merge(&t.plus);
        minus.merge(&t.minus);
    }

    let bin_estimates = bins
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let lo = i as f64 * cfg.bin_width;
            let hi = (i < n_core).then(|| lo + cfg.bin_width);
            if b.count == 0 {
                BinEstimate {
                    lo,
                    hi,
                    count: 0,
                    mean_abs_x: None,
                    q_bob: None,
                    q_bob_se: None,
                    q_eve: None,
                    q_eve_se: None,
                }
            } else {
                let n = b.count as f64;
                let qb = b.bob_errors as f64 / n;
                let qe = b.eve_mismatches as f64 / n;
                BinEstimate {
                    lo,
                    hi,
                    count: b.count,
                    mean_abs_x: Some(b.sum_abs_x / n),
                    q_bob: Some(qb),
                    q_bob_se: Some(binomial_se(qb, b.count)),
                    q_eve: Some(qe),
                    q_eve_se: Some(binomial_se(qe, b.count)),
                }
            }
        })
        .collect();

    let n = (plus.count + minus.count) as f64;
    let dof = n - 2.0;
    let (ssb_p, sse_p, ssbe_p) = plus.ss();
    let (ssb_m, sse_m, ssbe_m) = minus.ss();
    let bob_var = (ssb_p + ssb_m) / dof;
    let eve_var = (sse_p + sse_m) / dof;
    let cov_be = (ssbe_p + ssbe_m) / dof;
    let moments = MomentsEstimate {
        rounds: cfg.rounds,
        bob_mean_plus: plus.mean_b(),
        bob_mean_plus_se: (bob_var / plus.count as f64).sqrt(),
        bob_var,
        bob_var_se: bob_var * (2.0 / dof).sqrt(),
        eve_var,
        eve_var_se: eve_var * (2.0 / dof).sqrt(),
        cov_be,
        cov_be_se: ((bob_var * eve_var + cov_be * cov_be) / dof).sqrt(),
    };

    Ok(McEstimate {
        config: *cfg,
        bins: bin_estimates,
        moments,
    })
}

/// Plug-in mutual-information estimates over a postselection window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInfoEstimate {
    pub i_ab: f64,
    pub i_ae: f64,
    /// Bootstrap standard errors (200 parametric resamples).
    pub i_ab_se: f64,
    pub i_ae_se: f64,
    pub accepted: u64,
    pub acceptance_frac: f64,
}

/// Estimate both postselected informations by binning accepted rounds and
/// plugging the binned error rates into the binary-channel formula. An empty
/// acceptance set is an error, distinct from estimating zero information.
pub fn estimate_mutual_info_mc(
    cfg: &McConfig,
    w: &PostselectionWindow,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> Result<MutualInfoEstimate> {
    let attack = attack_from_channel(ch)?;
    let cutoff = ch.eta.sqrt() * pp.alpha + 8.0 * ch.observed_std();
    let top = w.x1.map_or(cutoff, |x1| x1.min(cutoff));
    let n_core = if top > w.x0 {
        (((top - w.x0) / cfg.bin_width).ceil() as usize).max(1)
    } else {
        1
    };

    let tallies: Vec<Vec<BinTally>> = (0..cfg.stream_count)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(cfg.seed, u64::from(k));
            let mut bins = vec![BinTally::default(); n_core + 1];
            for _ in 0..stream_rounds(cfg, k) {
                let t = sample_round(&mut rng, pp, ch, &attack);
                let abs_x = t.x_bob.abs();
                if !w.contains(abs_x) {
                    continue;
                }
                let idx = (((abs_x - w.x0) / cfg.bin_width) as usize).min(n_core);
                let bin = &mut bins[idx];
                bin.count += 1;
                bin.sum_abs_x += abs_x;
                bin.bob_errors += u64::from(sign_of(t.x_bob) != t.bit);
                bin.eve_mismatches += u64::from(sign_of(t.x_eve) != sign_of(t.x_bob));
            }
            bins
        })
        .collect();

    let mut bins = vec![BinTally::default(); n_core + 1];
    for t in &tallies {
        for (acc, part) in bins.iter_mut().zip(t) {
            acc.merge(part);
        }
    }
    let accepted: u64 = bins.iter().map(|b| b.count).sum();
    if accepted == 0 {
        return Err(Error::EmptyAcceptance);
    }

    let total = cfg.rounds as f64;
    let plug_in = |counts: &[(u64, f64, f64)]| -> (f64, f64) {
        // (count, q_bob, q_eve) per bin -> (i_ab, i_ae)
        let mut i_ab = 0.0;
        let mut i_ae = 0.0;
        for &(count, qb, qe) in counts {
            if count == 0 {
                continue;
            }
            let weight = 0.5 * count as f64 / total;
            i_ab += weight * bsc_info(qb).expect("rate in [0,1]");
            i_ae += weight * bsc_info(qe).expect("rate in [0,1]");
        }
        (i_ab, i_ae)
    };

    let observed: Vec<(u64, f64, f64)> = bins
        .iter()
        .map(|b| {
            if b.count == 0 {
                (0, 0.0, 0.0)
            } else {
                let n = b.count as f64;
                (
                    b.count,
                    b.bob_errors as f64 / n,
                    b.eve_mismatches as f64 / n,
                )
            }
        })
        .collect();
    let (i_ab, i_ae) = plug_in(&observed);

    // parametric bootstrap: multinomial over (bins, rejected), then binomial
    // error counts inside each resampled bin
    let mut rng = stream_rng(cfg.seed, BOOTSTRAP_STREAM);
    let mut ab_samples = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut ae_samples = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut remaining = cfg.rounds;
        let mut remaining_p = 1.0f64;
        let mut resampled = Vec::with_capacity(observed.len());
        for &(count, qb, qe) in &observed {
            let p_cell = count as f64 / total;
            let draw = draw_binomial(&mut rng, remaining, p_cell / remaining_p);
            remaining -= draw;
            remaining_p = (remaining_p - p_cell).max(f64::MIN_POSITIVE);
            let eb = draw_binomial(&mut rng, draw, qb);
            let ee = draw_binomial(&mut rng, draw, qe);
            let n = draw as f64;
            resampled.push((
                draw,
                if draw == 0 { 0.0 } else { eb as f64 / n },
                if draw == 0 { 0.0 } else { ee as f64 / n },
            ));
        }
        let (a, e) = plug_in(&resampled);
        ab_samples.push(a);
        ae_samples.push(e);
    }

    Ok(MutualInfoEstimate {
        i_ab,
        i_ae,
        i_ab_se: sample_std(&ab_samples),
        i_ae_se: sample_std(&ae_samples),
        accepted,
        acceptance_frac: accepted as f64 / total,
    })
}

fn draw_binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability in range").sample_with(rng)
}

trait SampleWith {
    fn sample_with<R: Rng>(&self, rng: &mut R) -> u64;
}

impl SampleWith for Binomial {
    fn sample_with<R: Rng>(&self, rng: &mut R) -> u64 {
        use rand_distr::Distribution;
        self.sample(rng)
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// One analytic-vs-simulation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub analytic: f64,
    pub estimate: f64,
    pub std_error: f64,
    /// `(estimate - analytic) / std_error`.
    pub z: f64,
}

/// Result of comparing a simulation against the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<OracleCheck>,
    pub populated_bins: usize,
    pub max_abs_z: f64,
    /// All checks within three standard errors.
    pub pass: bool,
}

/// Minimum bin occupancy for a bin to take part in verification.
pub const POPULATED_BIN_THRESHOLD: u64 = 1000;

/// Expected value of a per-bin error-rate estimate: the density-weighted
/// average of the conditional rate over the bin.
fn bin_average_rate<F: Fn(f64) -> f64>(
    rate: F,
    lo: f64,
    hi: Option<f64>,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> f64 {
    let cfg = ToleranceConfig::new(1e-14, 1e-11, 1 << 20).unwrap();
    let density = |x: f64| 2.0 * bob_marginal_pdf(x, pp, ch);
    let weighted = |x: f64| density(x) * rate(x);
    let (mass, num) = match hi {
        Some(hi) => (
            integrate(density, lo, hi, &cfg).unwrap(),
            integrate(weighted, lo, hi, &cfg).unwrap(),
        ),
        None => (
            integrate_semi_infinite(density, lo, &cfg).unwrap(),
            integrate_semi_infinite(weighted, lo, &cfg).unwrap(),
        ),
    };
    num / mass
}

/// Compare a finished simulation against the closed forms it should follow.
/// The simulation must have been produced with `attack` (possibly corrupted);
/// the analytic side always uses the honest channel values.
pub fn verification_report(
    est: &McEstimate,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> Result<VerificationReport> {
    let attack = attack_from_channel(ch)?;
    let mut checks = Vec::new();

    let m = &est.moments;
    let push = |checks: &mut Vec<OracleCheck>, name: &str, analytic: f64, estimate: f64, se: f64| {
        checks.push(OracleCheck {
            name: name.to_string(),
            analytic,
            estimate,
            std_error: se,
            z: (estimate - analytic) / se,
        });
    };
    push(
        &mut checks,
        "bob_mean_given_plus",
        ch.eta.sqrt() * pp.alpha,
        m.bob_mean_plus,
        m.bob_mean_plus_se,
    );
    push(
        &mut checks,
        "bob_conditional_variance",
        ch.observed_variance(),
        m.bob_var,
        m.bob_var_se,
    );
    push(
        &mut checks,
        "eve_conditional_variance",
        (attack.xi * attack.xi * ch.delta + 1.0) / 4.0,
        m.eve_var,
        m.eve_var_se,
    );
    push(
        &mut checks,
        "bob_eve_conditional_covariance",
        attack.xi * ch.delta / 4.0,
        m.cov_be,
        m.cov_be_se,
    );

    let mut populated = 0usize;
    for bin in &est.bins {
        if bin.count < POPULATED_BIN_THRESHOLD {
            continue;
        }
        populated += 1;
        let qb_analytic = bin_average_rate(|x| bob_ber(x, pp, ch), bin.lo, bin.hi, pp, ch);
        let qe_analytic = bin_average_rate(
            |x| eve_ber(x, pp, ch).expect("within CTL"),
            bin.lo,
            bin.hi,
            pp,
            ch,
        );
        let label = match bin.hi {
            Some(hi) => format!("[{:.3},{:.3})", bin.lo, hi),
            None => format!("[{:.3},inf)", bin.lo),
        };
        push(
            &mut checks,
            &format!("q_bob {label}"),
            qb_analytic,
            bin.q_bob.unwrap(),
            binomial_se(qb_analytic, bin.count),
        );
        push(
            &mut checks,
            &format!("q_eve {label}"),
            qe_analytic,
            bin.q_eve.unwrap(),
            binomial_se(qe_analytic, bin.count),
        );
    }

    let max_abs_z = checks
        .iter()
        .map(|c| c.z.abs())
        .fold(0.0f64, f64::max);
    Ok(VerificationReport {
        checks,
        populated_bins: populated,
        max_abs_z,
        pass: max_abs_z <= 3.0,
    })
}

/// Simulate with the honest attack parameters and compare against the
/// closed forms; passes iff every comparison is within three standard errors.
pub fn verify_against_analytic(
    cfg: &McConfig,
    pp: &ProtocolParams,
    ch: &ChannelParams,
) -> Result<VerificationReport> {
    let est = estimate_conditional_bers(cfg, pp, ch)?;
    verification_report(&est, pp, ch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(eta: f64, delta: f64) -> ChannelParams {
        ChannelParams::new(eta, delta).unwrap()
    }

    fn pp(alpha: f64) -> ProtocolParams {
        ProtocolParams::new(alpha).unwrap()
    }

    fn cfg(rounds: u64) -> McConfig {
        McConfig::new(7, rounds, 0.05, 8).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(0, 0, 0.05, 4).is_err());
        assert!(McConfig::new(0, 10, 0.0, 4).is_err());
        assert!(McConfig::new(0, 10, 0.05, 0).is_err());
    }

    #[test]
    fn marginals_match_channel_moments() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let r = verify_against_analytic(&cfg(1_000_000), &p, &c).unwrap();
        for check in &r.checks {
            assert!(
                check.z.abs() <= 4.0,
                "{} drifted: {check:?}",
                check.name
            );
        }
        assert!(r.pass, "max |z| = {}", r.max_abs_z);
    }

    #[test]
    fn zero_noise_kills_displacement_and_covariance() {
        let p = pp(1.0);
        let c = ch(0.6, 0.0);
        let attack = attack_from_channel(&c).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            let t = sample_round(&mut rng, &p, &c, &attack);
            assert_eq!(t.beta_re, 0.0);
            assert_eq!(t.beta_im, 0.0);
        }
        let est = estimate_conditional_bers(&cfg(400_000), &p, &c).unwrap();
        // no collective noise: conditional covariance is zero
        assert!(est.moments.cov_be.abs() <= 3.0 * est.moments.cov_be_se);
    }

    #[test]
    fn eve_uninformed_on_ideal_channel() {
        let p = pp(1.0);
        let c = ch(1.0, 0.0);
        let est = estimate_conditional_bers(&cfg(400_000), &p, &c).unwrap();
        for bin in &est.bins {
            if bin.count >= POPULATED_BIN_THRESHOLD {
                let q = bin.q_eve.unwrap();
                let se = bin.q_eve_se.unwrap();
                assert!((q - 0.5).abs() <= 4.0 * se, "bin {bin:?}");
            }
        }
    }

    #[test]
    fn origin_bin_is_symmetric() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let est = estimate_conditional_bers(&cfg(1_000_000), &p, &c).unwrap();
        let first = &est.bins[0];
        let q = first.q_bob.unwrap();
        assert!((q - 0.5).abs() <= 4.0 * first.q_bob_se.unwrap(), "{first:?}");
        // and the eavesdropper's mismatch rate there is 1/2 as well
        let qe = first.q_eve.unwrap();
        assert!((qe - 0.5).abs() <= 4.0 * first.q_eve_se.unwrap(), "{first:?}");
    }

    #[test]
    fn determinism_bitwise() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let a = estimate_conditional_bers(&cfg(200_000), &p, &c).unwrap();
        let b = estimate_conditional_bers(&cfg(200_000), &p, &c).unwrap();
        assert_eq!(a, b);
        let ma = estimate_mutual_info_mc(
            &cfg(200_000),
            &PostselectionWindow::above(0.3).unwrap(),
            &p,
            &c,
        )
        .unwrap();
        let mb = estimate_mutual_info_mc(
            &cfg(200_000),
            &PostselectionWindow::above(0.3).unwrap(),
            &p,
            &c,
        )
        .unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn different_seeds_differ() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let a = estimate_conditional_bers(&McConfig::new(1, 100_000, 0.05, 4).unwrap(), &p, &c)
            .unwrap();
        let b = estimate_conditional_bers(&McConfig::new(2, 100_000, 0.05, 4).unwrap(), &p, &c)
            .unwrap();
        assert_ne!(a.moments.bob_mean_plus, b.moments.bob_mean_plus);
    }

    #[test]
    fn empty_acceptance_is_distinct() {
        let p = pp(1.0);
        let c = ch(0.5, 0.0);
        let w = PostselectionWindow::above(50.0).unwrap();
        let r = estimate_mutual_info_mc(&cfg(10_000), &w, &p, &c);
        assert!(matches!(r, Err(Error::EmptyAcceptance)));
    }

    #[test]
    fn mutual_info_tracks_analytic_at_moderate_size() {
        let p = pp(1.0);
        let c = ch(0.5, 0.0);
        let w = PostselectionWindow::above(0.5).unwrap();
        let mc = estimate_mutual_info_mc(&McConfig::new(3, 2_000_000, 0.02, 8).unwrap(), &p, &c, &w)
            .map(|x| x);
        let mc = mc.unwrap();
        // mpmath references for this window
        assert!((mc.i_ab - 0.30708722222192666239).abs() <= 4.0 * mc.i_ab_se);
        assert!((mc.i_ae - 0.19035345358519475095).abs() <= 4.0 * mc.i_ae_se);
        let expected_acc = 0.66852575312835224623;
        assert!((mc.acceptance_frac - expected_acc).abs() < 3e-3);
    }

    #[test]
    fn corrupted_attack_detected() {
        let p = pp(1.0);
        let c = ch(0.8, 0.4);
        let honest = attack_from_channel(&c).unwrap();
        let corrupted =
            AttackParams::new(honest.g, honest.kappa, honest.xi * 1.1).unwrap();
        let est =
            estimate_conditional_bers_with_attack(&cfg(1_000_000), &p, &c, &corrupted).unwrap();
        let report = verification_report(&est, &p, &c).unwrap();
        assert!(!report.pass, "corrupted xi must fail: {}", report.max_abs_z);
    }

    #[test]
    fn stream_split_covers_all_rounds() {
        let c = McConfig::new(0, 1_000_003, 0.05, 16).unwrap();
        let total: u64 = (0..16).map(|k| stream_rounds(&c, k)).sum();
        assert_eq!(total, 1_000_003);
    }
}
