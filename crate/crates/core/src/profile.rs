//! C^∞ transition profiles shared by the angular partition and the dyadic
//! frequency localizer.

/// `exp(-1/x)` for `x > 0`, zero otherwise.
#[inline]
pub fn flat_bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, C^∞ and monotone between.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    let a = flat_bump(x);
    let b = flat_bump(1.0 - x);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Dyadic annulus profile: 1 on `[1/2, 2]`, 0 outside `(1/4, 4)`.
#[inline]
pub fn annulus_profile(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let s = t.log2().abs();
    if s <= 1.0 {
        1.0
    } else {
        smooth_step(2.0 - s)
    }
}
