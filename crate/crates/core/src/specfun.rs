//! Error function family in double precision.
//!
//! Rational Chebyshev approximations after W. J. Cody (Math. Comp. 23, 1969),
//! evaluated on three intervals of |x|. `erfcx` shares the two outer
//! intervals and never forms `exp(x²)` for large arguments, so products such
//! as `exp(β²)·erfc(β)` stay finite for any β ≥ 0.

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

// |x| <= 0.46875
const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    1.138_641_541_510_501_6e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_5e3,
    1.857_777_061_846_031_5e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412e1,
    2.440_246_379_344_441_7e2,
    1.282_616_526_077_372_3e3,
    2.844_236_833_439_170_6e3,
];

// 0.46875 < |x| <= 4
const C: [f64; 9] = [
    5.641_884_969_886_701e-1,
    8.883_149_794_388_376,
    6.611_919_063_714_163e1,
    2.986_351_381_974_001_3e2,
    8.819_522_212_417_691e2,
    1.712_047_612_634_070_6e3,
    2.051_078_377_826_071_6e3,
    1.230_339_354_797_997_2e3,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_5e1,
    1.176_939_508_913_125e2,
    5.371_811_018_620_099e2,
    1.621_389_574_566_690_2e3,
    3.290_799_235_733_459_6e3,
    4.362_619_090_143_247e3,
    3.439_367_674_143_721_6e3,
    1.230_339_354_803_749_5e3,
];

// |x| > 4, polynomial in 1/x²
const P: [f64; 6] = [
    3.053_266_349_612_323_4e-1,
    3.603_448_999_498_044_5e-1,
    1.257_817_261_112_292_5e-1,
    1.608_378_514_874_227_7e-2,
    6.587_491_615_298_378e-4,
    1.631_538_713_730_209_8e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    5.279_051_029_514_284e-1,
    6.051_834_131_244_132e-2,
    2.335_204_976_268_691_8e-3,
];

const SMALL: f64 = 0.468_75;
const MID: f64 = 4.0;
// erfc underflows past this point
const XBIG: f64 = 26.543;
// erfcx(x) == 1/(x√π) to double precision past this point
const XHUGE: f64 = 6.71e7;

/// erf(x)/x for |x| <= 0.46875.
fn small_ratio(y: f64) -> f64 {
    let ysq = y * y;
    let mut num = A[4] * ysq;
    let mut den = ysq;
    for i in 0..3 {
        num = (num + A[i]) * ysq;
        den = (den + B[i]) * ysq;
    }
    (num + A[3]) / (den + B[3])
}

/// erfcx(y) for 0.46875 < y <= 4.
fn mid_scaled(y: f64) -> f64 {
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    (num + C[7]) / (den + D[7])
}

/// erfcx(y) for y > 4.
fn tail_scaled(y: f64) -> f64 {
    if y >= XHUGE {
        return FRAC_1_SQRT_PI / y;
    }
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    (FRAC_1_SQRT_PI - r) / y
}

/// exp(-y²) with the square split so the rounding of y² does not leak into
/// the exponent.
fn exp_neg_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    let del = (y - head) * (y + head);
    (-head * head).exp() * (-del).exp()
}

/// erfc(y) for y > 0.46875.
fn erfc_outer(y: f64) -> f64 {
    if y >= XBIG {
        0.0
    } else if y <= MID {
        exp_neg_square(y) * mid_scaled(y)
    } else {
        exp_neg_square(y) * tail_scaled(y)
    }
}

/// The error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL {
        return x * small_ratio(y);
    }
    let tail = erfc_outer(y);
    if x < 0.0 {
        tail - 1.0
    } else {
        1.0 - tail
    }
}

/// The complementary error function `1 - erf(x)`, accurate in the right tail.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= SMALL {
        return 1.0 - x * small_ratio(y);
    }
    let tail = erfc_outer(y);
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Scaled complementary error function `exp(x²)·erfc(x)` for `x >= 0`.
///
/// Returns NaN for negative or NaN arguments.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x <= SMALL {
        (x * x).exp() * (1.0 - x * small_ratio(x))
    } else if x <= MID {
        mid_scaled(x)
    } else {
        tail_scaled(x)
    }
}
