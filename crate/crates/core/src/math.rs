use core::f64::consts::PI;

/// Wraps an angle to (-pi, pi].
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Absolute difference of two angles on the circle, in [0, pi].
pub(crate) fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}
