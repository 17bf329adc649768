//! Where postselection helps: crossover analysis between the two conditional
//! error rates and the noise boundary above which no outcome magnitude gives
//! the receiver an edge.
//!
//! For `delta > 0` the eavesdropper's error decays like a Gaussian in the
//! outcome magnitude while the receiver's decays only exponentially, so the
//! receiver's pointwise advantage `q_E - q_B > 0`, if present at all, lives
//! on a bounded range of outcomes. The boundary `delta*(eta)` is the noise
//! level at which that range closes; it is found by bisecting on the maximum
//! of the gap over a dense outcome scan.

use crate::ber::{eve_bob_gap, eve_bob_log_gap, ProtocolParams};
use crate::channel::{attack_from_channel, ChannelParams};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Threshold separating a genuine advantage gap from numerical zero.
pub const GAP_TOLERANCE: f64 = 1e-10;

/// Density of the outcome scan used to locate the maximum gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanConfig {
    pub log_points: usize,
    pub linear_points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            log_points: 512,
            linear_points: 512,
        }
    }
}

impl ScanConfig {
    /// Same scan with twice as many points of each kind.
    pub fn doubled(&self) -> Self {
        Self {
            log_points: self.log_points * 2,
            linear_points: self.linear_points * 2,
        }
    }
}

/// Outcome of the pointwise advantage analysis at fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverReport {
    /// Smallest positive outcome where `q_E - q_B` changes sign, when one
    /// exists within the searched range.
    pub x_c: Option<f64>,
    /// Whether the gap exceeds [`GAP_TOLERANCE`] anywhere.
    pub advantage_exists: bool,
    /// Largest observed value of `q_E - q_B` over the scan.
    pub max_gap: f64,
}

/// Classification of a channel point for the binary postselected protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `delta >= 2*eta`: an intercept-resend attack reproduces the channel.
    BeyondCtl,
    /// `xi <= 1`: secure without postselection.
    GaussianSecure,
    /// Postselection gives the receiver a pointwise error advantage somewhere.
    PsSecure,
    /// No outcome magnitude favors the receiver.
    PsInsecure,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::BeyondCtl => "beyond_ctl",
            Verdict::GaussianSecure => "gaussian_secure",
            Verdict::PsSecure => "ps_secure",
            Verdict::PsInsecure => "ps_insecure",
        }
    }
}

/// One solved point of a boundary curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub eta: f64,
    /// Boundary noise, absent when the solver failed at this point.
    pub delta_star: Option<f64>,
    pub iterations: u32,
    /// Diagnostic note for failed or suspicious points.
    pub note: Option<String>,
}

/// Sampled boundary `eta -> delta*` at fixed mean photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub n: f64,
    pub solver_tol: f64,
    pub points: Vec<BoundaryPoint>,
}

/// Result of a single boundary bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySolution {
    pub delta_star: f64,
    pub iterations: u32,
    /// Whether the sampled gap maxima decreased monotonically in `delta`
    /// along the bisection path.
    pub gap_monotone: bool,
}

fn scan_grid(pp: &ProtocolParams, ch: &ChannelParams, scan: &ScanConfig) -> Vec<f64> {
    let sigma = ch.observed_std();
    let lo = 1e-3 * sigma;
    let hi = ch.eta.sqrt() * pp.alpha / ch.delta.max(1e-3) + 20.0 * sigma;
    let mut xs = Vec::with_capacity(scan.log_points + scan.linear_points);
    let ratio = hi / lo;
    for k in 0..scan.log_points {
        let t = k as f64 / (scan.log_points - 1) as f64;
        xs.push(lo * ratio.powf(t));
    }
    for k in 1..=scan.linear_points {
        xs.push(hi * k as f64 / scan.linear_points as f64);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Largest value of `q_E(x) - q_B(x)` over the scan range, grid scan plus
/// golden-section refinement of the three best local maxima.
pub fn max_gap(pp: &ProtocolParams, ch: &ChannelParams, scan: &ScanConfig) -> Result<f64> {
    // validate once so the closure below cannot fail
    eve_bob_gap(0.0, pp, ch)?;
    let g = |x: f64| eve_bob_gap(x, pp, ch).expect("parameters validated");
    let xs = scan_grid(pp, ch, scan);
    let gaps: Vec<f64> = xs.iter().map(|&x| g(x)).collect();

    let mut best = f64::NEG_INFINITY;
    let mut maxima: Vec<(f64, usize)> = Vec::new();
    for i in 0..xs.len() {
        best = best.max(gaps[i]);
        let left_ok = i == 0 || gaps[i] >= gaps[i - 1];
        let right_ok = i + 1 == xs.len() || gaps[i] >= gaps[i + 1];
        if left_ok && right_ok {
            maxima.push((gaps[i], i));
        }
    }
    maxima.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for &(_, i) in maxima.iter().take(3) {
        let a = if i == 0 { xs[0] * 0.5 } else { xs[i - 1] };
        let b = if i + 1 == xs.len() { xs[i] } else { xs[i + 1] };
        if a < b {
            best = best.max(golden_max(&g, a, b));
        }
    }
    Ok(best)
}

/// Scan for the first sign change of `q_E - q_B`, extending past the
/// standard range in the log domain until the eavesdropper's Gaussian decay
/// has taken over. Returns the refined crossing when found.
fn first_crossing(pp: &ProtocolParams, ch: &ChannelParams, scan: &ScanConfig) -> Result<Option<f64>> {
    let h = |x: f64| eve_bob_log_gap(x, pp, ch).expect("parameters validated");
    let mut xs = scan_grid(pp, ch, scan);
    if ch.delta > 0.0 {
        // the gap can stay positive far beyond the scan window before the
        // quadratic decay wins; extend geometrically
        let mut x = *xs.last().unwrap();
        for _ in 0..60 {
            x *= 2.0;
            xs.push(x);
            if h(x) < 0.0 {
                break;
            }
        }
    }
    let mut prev_x = xs[0];
    let mut prev_h = h(prev_x);
    for &x in &xs[1..] {
        let cur = h(x);
        if prev_h.signum() != cur.signum() && prev_h != 0.0 {
            let root = crate::gaussmath::find_root_bisect(h, prev_x, x, 1e-9 * x.max(1.0))?;
            return Ok(Some(root));
        }
        prev_x = x;
        prev_h = cur;
    }
    Ok(None)
}

/// Smallest outcome beyond which `q_E < q_B` holds throughout the searched
/// range: the last sign change of the gap, or zero when the eavesdropper
/// dominates from the start. `None` when she never does (`delta = 0`).
pub fn eve_dominance_onset(pp: &ProtocolParams, ch: &ChannelParams) -> Result<Option<f64>> {
    eve_bob_gap(0.0, pp, ch)?;
    let h = |x: f64| eve_bob_log_gap(x, pp, ch).expect("parameters validated");
    let scan = ScanConfig::default();
    let mut xs = scan_grid(pp, ch, &scan);
    if ch.delta > 0.0 {
        let mut x = *xs.last().unwrap();
        for _ in 0..60 {
            x *= 2.0;
            xs.push(x);
            if h(x) < -20.0 {
                break;
            }
        }
    }
    if h(*xs.last().unwrap()) >= 0.0 {
        return Ok(None);
    }
    let mut last_change: Option<(f64, f64)> = None;
    let mut prev_x = xs[0];
    let mut prev_h = h(prev_x);
    for &x in &xs[1..] {
        let cur = h(x);
        if prev_h > 0.0 && cur <= 0.0 {
            last_change = Some((prev_x, x));
        }
        prev_x = x;
        prev_h = cur;
    }
    match last_change {
        Some((a, b)) => Ok(Some(crate::gaussmath::find_root_bisect(
            h,
            a,
            b,
            1e-9 * b.max(1.0),
        )?)),
        None => Ok(Some(0.0)),
    }
}

/// Full pointwise-advantage analysis at fixed parameters.
pub fn ps_advantage_exists(pp: &ProtocolParams, ch: &ChannelParams) -> Result<CrossoverReport> {
    ps_advantage_exists_with(pp, ch, &ScanConfig::default())
}

/// [`ps_advantage_exists`] with an explicit scan density.
pub fn ps_advantage_exists_with(
    pp: &ProtocolParams,
    ch: &ChannelParams,
    scan: &ScanConfig,
) -> Result<CrossoverReport> {
    let gap = max_gap(pp, ch, scan)?;
    let x_c = first_crossing(pp, ch, scan)?;
    Ok(CrossoverReport {
        x_c,
        advantage_exists: gap > GAP_TOLERANCE,
        max_gap: gap,
    })
}

/// Noise level above which no outcome magnitude favors the receiver, found
/// by bisecting `max_gap` in `delta` at fixed `eta`.
pub fn boundary_delta(eta: f64, n: f64, tol: f64) -> Result<BoundarySolution> {
    boundary_delta_with_scan(eta, n, tol, &ScanConfig::default())
}

/// [`boundary_delta`] with an explicit scan density.
pub fn boundary_delta_with_scan(
    eta: f64,
    n: f64,
    tol: f64,
    scan: &ScanConfig,
) -> Result<BoundarySolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "tol > 0",
        });
    }
    let pp = ProtocolParams::from_mean_photon_number(n)?;
    let gap_at = |delta: f64| -> Result<f64> {
        let ch = ChannelParams::new(eta, delta)?;
        max_gap(&pp, &ch, scan)
    };

    // keep a short distance from the infinite-gain singularity at 2*eta
    let hi = 2.0 * eta - 1e-6 * eta;
    // start just under the xi = 1 line; the boundary can sit below it for
    // weak signals, so walk the lower end down until the advantage reappears
    let mut lo = (2.0 * eta - 1.0 - 0.05).max(0.0);
    let mut profile: Vec<(f64, f64)> = Vec::new();
    let mut gap_lo = gap_at(lo)?;
    profile.push((lo, gap_lo));
    while gap_lo <= GAP_TOLERANCE && lo > 0.0 {
        lo = if lo > 0.1 { lo - 0.1 } else { lo / 4.0 };
        if lo < 1e-9 {
            lo = 0.0;
        }
        gap_lo = gap_at(lo)?;
        profile.push((lo, gap_lo));
    }
    let gap_hi = gap_at(hi)?;
    profile.push((hi, gap_hi));
    if gap_lo <= GAP_TOLERANCE || gap_hi > GAP_TOLERANCE {
        return Err(Error::BoundaryNotBracketed { profile });
    }

    let mut lo = lo;
    let mut hi = hi;
    let mut iterations = 0u32;
    let mut samples: Vec<(f64, f64)> = profile.clone();
    while hi - lo > tol && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let g = gap_at(mid)?;
        samples.push((mid, g));
        if g > GAP_TOLERANCE {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let gap_monotone = samples.windows(2).all(|w| w[1].1 <= w[0].1 + GAP_TOLERANCE);
    Ok(BoundarySolution {
        delta_star: 0.5 * (lo + hi),
        iterations,
        gap_monotone,
    })
}

/// Solve the boundary on an increasing `eta` grid; failed points are kept in
/// the curve with a note instead of aborting the sweep.
pub fn boundary_curve(eta_grid: &[f64], n: f64, tol: f64) -> Result<BoundaryCurve> {
    boundary_curve_with_scan(eta_grid, n, tol, &ScanConfig::default())
}

/// [`boundary_curve`] with an explicit scan density.
pub fn boundary_curve_with_scan(
    eta_grid: &[f64],
    n: f64,
    tol: f64,
    scan: &ScanConfig,
) -> Result<BoundaryCurve> {
    for (i, &eta) in eta_grid.iter().enumerate() {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eta_grid",
                value: eta,
                constraint: "entries in (0, 1]",
            });
        }
        if i > 0 && eta <= eta_grid[i - 1] {
            return Err(Error::InvalidParameter {
                name: "eta_grid",
                value: eta,
                constraint: "strictly increasing entries",
            });
        }
    }
    let points: Vec<BoundaryPoint> = eta_grid
        .par_iter()
        .map(|&eta| match boundary_delta_with_scan(eta, n, tol, scan) {
            Ok(sol) => BoundaryPoint {
                eta,
                delta_star: Some(sol.delta_star),
                iterations: sol.iterations,
                note: if sol.gap_monotone {
                    None
                } else {
                    Some("gap maximum not monotone across bisection samples".to_string())
                },
            },
            Err(e) => BoundaryPoint {
                eta,
                delta_star: None,
                iterations: 0,
                note: Some(e.to_string()),
            },
        })
        .collect();
    Ok(BoundaryCurve {
        n,
        solver_tol: tol,
        points,
    })
}

/// Place a channel point in one of the four security regions.
pub fn classify_point(ch: &ChannelParams, pp: &ProtocolParams) -> Verdict {
    if !ch.within_ctl() {
        return Verdict::BeyondCtl;
    }
    let attack = attack_from_channel(ch).expect("inside CTL");
    if attack.xi <= 1.0 {
        return Verdict::GaussianSecure;
    }
    let report = ps_advantage_exists(pp, ch).expect("inside CTL");
    if report.advantage_exists {
        Verdict::PsSecure
    } else {
        Verdict::PsInsecure
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(n: f64) -> ProtocolParams {
        ProtocolParams::from_mean_photon_number(n).unwrap()
    }

    fn ch(eta: f64, delta: f64) -> ChannelParams {
        ChannelParams::new(eta, delta).unwrap()
    }

    #[test]
    fn zero_noise_always_leaves_an_advantage() {
        for &eta in &[0.1, 0.3, 0.5, 0.8, 0.99] {
            let r = ps_advantage_exists(&pp(1.0), &ch(eta, 0.0)).unwrap();
            assert!(r.advantage_exists, "expected advantage at eta = {eta}");
            assert!(r.max_gap > 1e-4);
            assert!(r.x_c.is_none(), "no crossover without collective noise");
        }
    }

    #[test]
    fn near_ctl_has_no_advantage() {
        let r = ps_advantage_exists(&pp(1.0), &ch(0.5, 0.999)).unwrap();
        assert!(!r.advantage_exists, "report: {r:?}");
        assert!(r.max_gap <= GAP_TOLERANCE);
    }

    #[test]
    fn low_noise_crossover_is_finite() {
        let r = ps_advantage_exists(&pp(1.0), &ch(0.9, 0.01)).unwrap();
        assert!(r.advantage_exists);
        let x_c = r.x_c.expect("crossover expected for delta > 0");
        assert!(x_c.is_finite() && x_c > 0.0);
        // beyond the crossover the eavesdropper stays ahead
        let p = pp(1.0);
        let c = ch(0.9, 0.01);
        for &mult in &[1.01, 2.0, 10.0] {
            let h = eve_bob_log_gap(x_c * mult, &p, &c).unwrap();
            assert!(h < 0.0, "gap positive at {} times x_c", mult);
        }
    }

    #[test]
    fn dominance_onset_cases() {
        // no onset without collective noise
        assert!(eve_dominance_onset(&pp(1.0), &ch(0.7, 0.0)).unwrap().is_none());
        // dominance from the start close to the teleportation limit
        let onset = eve_dominance_onset(&pp(1.0), &ch(0.5, 0.95)).unwrap().unwrap();
        assert_eq!(onset, 0.0);
        // finite onset in the benign regime
        let onset = eve_dominance_onset(&pp(1.0), &ch(0.9, 0.1)).unwrap().unwrap();
        assert!(onset > 0.0);
        let h = eve_bob_log_gap(onset * 1.05, &pp(1.0), &ch(0.9, 0.1)).unwrap();
        assert!(h < 0.0);
    }

    #[test]
    fn boundary_stays_inside_ctl_band() {
        for &(eta, n) in &[(0.3, 1.0), (0.5, 1.0), (0.8, 0.1), (1.0, 10.0)] {
            let sol = boundary_delta(eta, n, 1e-4).unwrap();
            assert!(sol.delta_star > 0.0 && sol.delta_star < 2.0 * eta);
            // just below the boundary an advantage exists, just above none
            let below = max_gap(
                &pp(n),
                &ch(eta, sol.delta_star - 2e-4),
                &ScanConfig::default(),
            )
            .unwrap();
            let above = max_gap(
                &pp(n),
                &ch(eta, (sol.delta_star + 2e-4).min(2.0 * eta * 0.999999)),
                &ScanConfig::default(),
            )
            .unwrap();
            assert!(below > GAP_TOLERANCE, "({eta}, {n}): below = {below:e}");
            assert!(above <= GAP_TOLERANCE, "({eta}, {n}): above = {above:e}");
        }
    }

    #[test]
    fn boundary_deterministic() {
        let a = boundary_delta(0.5, 1.0, 1e-4).unwrap();
        let b = boundary_delta(0.5, 1.0, 1e-4).unwrap();
        assert_eq!(a.delta_star, b.delta_star);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn curve_smoke() {
        let grid = [0.2, 0.4, 0.6, 0.8, 1.0];
        let curve = boundary_curve(&grid, 1.0, 1e-3).unwrap();
        assert_eq!(curve.points.len(), 5);
        let mut prev_eta = 0.0;
        for pt in &curve.points {
            assert!(pt.eta > prev_eta);
            prev_eta = pt.eta;
            let d = pt.delta_star.expect("all points solvable at n = 1");
            assert!(d > 0.0 && d < 2.0 * pt.eta);
        }
    }

    #[test]
    fn curve_rejects_bad_grid() {
        assert!(boundary_curve(&[0.5, 0.5], 1.0, 1e-3).is_err());
        assert!(boundary_curve(&[0.0, 0.5], 1.0, 1e-3).is_err());
        assert!(boundary_curve(&[0.5, 1.2], 1.0, 1e-3).is_err());
    }

    #[test]
    fn verdict_examples() {
        let p = pp(1.0);
        assert_eq!(classify_point(&ch(0.3, 0.6), &p), Verdict::BeyondCtl);
        assert_eq!(classify_point(&ch(0.75, 0.5), &p), Verdict::GaussianSecure);
        // outside the Gaussian-secure strip the verdict is one of the PS pair
        let v = classify_point(&ch(0.8, 0.7), &p);
        assert!(v == Verdict::PsSecure || v == Verdict::PsInsecure);
        assert_eq!(classify_point(&ch(0.9, 0.1), &p), Verdict::PsSecure);
        assert_eq!(classify_point(&ch(0.5, 0.95), &p), Verdict::PsInsecure);
    }

    #[test]
    fn verdicts_partition_consistently() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = pp(1.0);
        for _ in 0..100 {
            let eta: f64 = rng.gen_range(0.05..=1.0);
            let delta: f64 = rng.gen_range(0.0..2.5 * eta);
            let c = ch(eta, delta);
            let v = classify_point(&c, &p);
            assert_eq!(v == Verdict::BeyondCtl, !c.within_ctl());
            if c.within_ctl() {
                let gaussian = crate::channel::gaussian_protocol_secure(&c).unwrap();
                assert_eq!(v == Verdict::GaussianSecure, gaussian);
            }
        }
    }
}
