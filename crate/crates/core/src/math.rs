//! Float helpers missing from `core`.

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Fractional distance to the nearest integer, in `[0, 0.5]`.
#[inline]
pub fn fractionality(x: f64) -> f64 {
    (x - round(x)).abs()
}
