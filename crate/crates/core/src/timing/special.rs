//! Log-gamma, digamma and trigamma for positive real arguments.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Reflection keeps the series in its accurate range.
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::of_usize(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Digamma ψ(x) for `x > 0`.
pub fn digamma<T: Real>(x: T) -> T {
    let mut x = x;
    let mut acc = T::zero();
    let shift_to = T::lit(10.0);
    while x < shift_to {
        acc = acc - x.recip();
        x = x + T::one();
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    // ln x - 1/2x - Σ B_{2n} / (2n x^{2n})
    let series = inv2
        * (T::lit(1.0 / 12.0)
            - inv2
                * (T::lit(1.0 / 120.0)
                    - inv2 * (T::lit(1.0 / 252.0) - inv2 * (T::lit(1.0 / 240.0) - inv2 * T::lit(1.0 / 132.0)))));
    acc + x.ln() - T::lit(0.5) * inv - series
}

/// Trigamma ψ'(x) for `x > 0`.
pub fn trigamma<T: Real>(x: T) -> T {
    let mut x = x;
    let mut acc = T::zero();
    let shift_to = T::lit(10.0);
    while x < shift_to {
        acc = acc + (x * x).recip();
        x = x + T::one();
    }
    let inv = x.recip();
    let inv2 = inv * inv;
    // 1/x + 1/2x² + Σ B_{2n} / x^{2n+1}
    let series = inv
        * inv2
        * (T::lit(1.0 / 6.0)
            - inv2
                * (T::lit(1.0 / 30.0)
                    - inv2 * (T::lit(1.0 / 42.0) - inv2 * (T::lit(1.0 / 30.0) - inv2 * T::lit(5.0 / 66.0)))));
    acc + inv + T::lit(0.5) * inv2 + series
}
