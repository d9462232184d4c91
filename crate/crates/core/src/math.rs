//! Float helpers backed by `libm` so the crate builds without `std`.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `p ln p` with `0 ln 0 = 0`.
#[inline]
pub(crate) fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * ln(p)
    } else {
        0.0
    }
}

/// `|A|^k` with overflow checking.
pub(crate) fn checked_pow(base: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..k {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Mean and unbiased sample variance.
pub(crate) fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1) as f64)
}
