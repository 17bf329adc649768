//////////////////////////////////////////////////////////////////////////
// The erf/erfc rational approximations below follow FreeBSD's           //
// /usr/src/lib/msun/src/s_erf.c (also the basis of Go's math.Erfc),     //
// which carries this notice:                                            //
//                                                                       //
// ====================================================                  //
// Copyright (C) 1993 by Sun Microsystems, Inc. All rights reserved.     //
//                                                                       //
// Developed at SunPro, a Sun Microsystems, Inc. business.               //
// Permission to use, copy, modify, and distribute this                  //
// software is freely granted, provided that this notice                 //
// is preserved.                                                         //
// ====================================================                  //
//////////////////////////////////////////////////////////////////////////

//! Error function, complementary error function, and the scaled form
//! `erfcx(x) = exp(x^2) * erfc(x)` needed for tail-dominated comparisons.
//!
//! `erfc` is accurate to a few ulp over the whole double range; `erfcx`
//! reuses the same rational fits with the `exp(-x^2)` factor cancelled
//! analytically, switching to the asymptotic series beyond the fit range,
//! so log-domain tail work stays accurate where `erfc` itself underflows.

const ERX: f64 = 8.45062911510467529297e-01;

// coefficients for approximation to erf in [0, 0.84375]
const EFX: f64 = 1.28379167095512586316e-01;
const EFX8: f64 = 1.02703333676410069053e+00;
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;

// coefficients for approximation to erf in [0.84375, 1.25]
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;

// coefficients for approximation to erfc in [1.25, 1/0.35]
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;

// coefficients for approximation to erfc in [1/0.35, 28]
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

const VERY_TINY: f64 = 2.848094538889218e-306;
const TINY: f64 = 1.3877787807814457e-17; // 2^-56
const SMALL: f64 = 3.725290298461914e-9; // 2^-28

/// `R/S` rational tail correction: `erfc(x) = exp(-x^2 - 0.5625 + R/S) / x`
/// for `x >= 1.25`.
fn tail_rs(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    if x < 1.0 / 0.35 {
        let r = RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7))))));
        let q = 1.0
            + s * (SA1
                + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8)))))));
        r / q
    } else {
        let r = RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6)))));
        let q = 1.0
            + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7))))));
        r / q
    }
}

/// Error function `erf(x) = 2/sqrt(pi) * Int_0^x exp(-t^2) dt`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return -1.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    let value = if x < 0.84375 {
        if x < SMALL {
            if x < VERY_TINY {
                0.125 * (8.0 * x + EFX8 * x)
            } else {
                x + EFX * x
            }
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            x + x * (r / s)
        }
    } else if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        ERX + p / q
    } else if x >= 6.0 {
        1.0
    } else {
        // split x into a pseudo-single-precision high part so that
        // exp(-z*z) * exp((z-x)(z+x)) reproduces exp(-x*x) accurately
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let r = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + tail_rs(x)).exp();
        1.0 - r / x
    };
    if sign {
        -value
    } else {
        value
    }
}

/// Complementary error function `erfc(x) = 2/sqrt(pi) * Int_x^inf exp(-t^2) dt`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 2.0;
    }
    let sign = x < 0.0;
    let x = x.abs();
    if x < 0.84375 {
        let temp = if x < TINY {
            x
        } else {
            let z = x * x;
            let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
            let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
            let y = r / s;
            if x < 0.25 {
                x + x * y
            } else {
                0.5 + (x * y + (x - 0.5))
            }
        };
        if sign {
            1.0 + temp
        } else {
            1.0 - temp
        }
    } else if x < 1.25 {
        let s = x - 1.0;
        let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
        let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
        if sign {
            1.0 + ERX + p / q
        } else {
            1.0 - ERX - p / q
        }
    } else if x < 28.0 {
        if sign && x > 6.0 {
            return 2.0;
        }
        let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
        let r = (-z * z - 0.5625).exp() * ((z - x) * (z + x) + tail_rs(x)).exp();
        if sign {
            2.0 - r / x
        } else {
            r / x
        }
    } else if sign {
        2.0
    } else {
        0.0
    }
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) * erfc(x)`.
///
/// Stays finite and accurate for arbitrarily large positive `x`, where the
/// plain `erfc` underflows. Overflows to infinity for `x` below about -26.6.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        // erfc(-x) = 2 - erfc(x)
        let e = (x * x).exp(); // overflows to inf for x < -26.6, as it must
        return 2.0 * e - erfcx(-x);
    }
    if x < 1.25 {
        (x * x).exp() * erfc(x)
    } else if x < 28.0 {
        // the exp(-x^2) factor of the tail expression cancels exactly
        (tail_rs(x) - 0.5625).exp() / x
    } else {
        // asymptotic series 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!!/(2x^2)^k;
        // at x >= 28 seven terms reach full double precision
        let inv2x2 = 1.0 / (2.0 * x * x);
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut k = 0.0;
        loop {
            term *= -(2.0 * k + 1.0) * inv2x2;
            sum += term;
            k += 1.0;
            if term.abs() < f64::EPSILON * sum || k > 8.0 {
                break;
            }
        }
        sum / (x * consts::SQRT_PI)
    }
}

/// Natural log of `erfc(x)`, defined for all finite `x`.
///
/// For positive arguments this is `-x^2 + ln(erfcx(x))`, which remains
/// accurate far beyond the underflow point of `erfc`.
pub fn ln_erfc(x: f64) -> f64 {
    if x <= 0.0 {
        erfc(x).ln()
    } else {
        -x * x + erfcx(x).ln()
    }
}

pub(crate) mod consts {
    /// sqrt(pi)
    pub const SQRT_PI: f64 = 1.772453850905516027298167;
}
