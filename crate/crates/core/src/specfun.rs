//! Digamma and trigamma functions and the shifted harmonic sums they close.

use crate::error::{Error, Result};
use crate::scalar::{KahanSum, Scalar};

/// Arguments below this are shifted upward by the unit recurrence before the
/// asymptotic series is applied.
const SHIFT_THRESHOLD: f64 = 8.0;

/// Largest `m` summed term by term in [`shifted_harmonic`].
pub const DIRECT_SUM_LIMIT: usize = 10_000_000;

fn check_arg<T: Scalar>(x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive(x.as_f64()))
    }
}

/// Ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma<T: Scalar>(x: T) -> Result<T> {
    check_arg(x)?;
    let threshold = T::lit(SHIFT_THRESHOLD);
    let mut x = x;
    let mut shift = KahanSum::new();
    while x < threshold {
        shift.add(x.recip());
        x = x + T::one();
    }
    // ln x - 1/(2x) - sum B_2k / (2k x^2k)
    let r = x.recip();
    let r2 = r * r;
    let series = r2
        * (T::lit(1.0 / 12.0)
            - r2 * (T::lit(1.0 / 120.0)
                - r2 * (T::lit(1.0 / 252.0)
                    - r2 * (T::lit(1.0 / 240.0)
                        - r2 * (T::lit(1.0 / 132.0) - r2 * T::lit(691.0 / 32760.0))))));
    Ok(x.ln() - T::lit(0.5) * r - series - shift.value())
}

/// Ψ₁(x) = d²/dx² ln Γ(x) for x > 0.
pub fn trigamma<T: Scalar>(x: T) -> Result<T> {
    check_arg(x)?;
    let threshold = T::lit(SHIFT_THRESHOLD);
    let mut x = x;
    let mut shift = KahanSum::new();
    while x < threshold {
        shift.add((x * x).recip());
        x = x + T::one();
    }
    // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
    let r = x.recip();
    let r2 = r * r;
    let series = r
        + T::lit(0.5) * r2
        + r * r2
            * (T::lit(1.0 / 6.0)
                - r2 * (T::lit(1.0 / 30.0)
                    - r2 * (T::lit(1.0 / 42.0)
                        - r2 * (T::lit(1.0 / 30.0)
                            - r2 * (T::lit(5.0 / 66.0) - r2 * T::lit(691.0 / 2730.0))))));
    Ok(series + shift.value())
}

/// Σ_{i=1}^{m} (θ + i)^(-power) for power 1 or 2.
///
/// Summed directly (smallest terms first, compensated) up to
/// [`DIRECT_SUM_LIMIT`]; larger `m` use the digamma/trigamma difference.
pub fn shifted_harmonic<T: Scalar>(theta: T, m: usize, power: u32) -> Result<T> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(Error::InvalidTheta(theta.as_f64()));
    }
    if power != 1 && power != 2 {
        return Err(Error::InvalidArgument(format!(
            "harmonic power must be 1 or 2, got {power}"
        )));
    }
    if m > DIRECT_SUM_LIMIT {
        let hi = theta + T::of_usize(m) + T::one();
        let lo = theta + T::one();
        return Ok(if power == 1 {
            digamma(hi)? - digamma(lo)?
        } else {
            trigamma(lo)? - trigamma(hi)?
        });
    }
    let sum: KahanSum<T> = (1..=m)
        .rev()
        .map(|i| {
            let t = (theta + T::of_usize(i)).recip();
            if power == 1 {
                t
            } else {
                t * t
            }
        })
        .collect();
    Ok(sum.value())
}
