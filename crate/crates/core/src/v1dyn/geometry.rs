use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use crate::wavelet::Orientation;

/// Preferred bar orientations (radians, 0 = horizontal) encoded by a band.
///
/// `ω_h` responds to vertical structure and `ω_v` to horizontal structure.
/// The diagonal band pools both diagonals, so it carries two readings.
pub fn preferred_angles(o: Orientation) -> &'static [f64] {
    match o {
        Orientation::H => &[FRAC_PI_2],
        Orientation::V => &[0.0],
        Orientation::D => &[FRAC_PI_4, 3.0 * FRAC_PI_4],
    }
}

/// Wraps an orientation difference into `(−π/2, π/2]`.
#[inline]
pub fn wrap_half_pi(a: f64) -> f64 {
    let r = a - PI * (a / PI).floor();
    if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// Relative geometry of a connection from node `i` (orientation `θ`) to a
/// node `j` (orientation `θ′`) displaced by `(dx, dy)` lattice units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGeometry {
    /// Center distance in units of the receiving scale.
    pub d: f64,
    /// Angles between each preferred orientation and the line `i → j`,
    /// ordered so `|θ1| ≤ |θ2| ≤ π/2`, signed so `θ1 ≥ 0`.
    pub theta1: f64,
    pub theta2: f64,
    /// `2θ1 + 2 sin|θ1 + θ2|`.
    pub beta: f64,
    /// `θ − θ′` wrapped into `(−π/2, π/2]`.
    pub dtheta: f64,
    /// `|s − s′|`.
    pub dscale: usize,
}

impl KernelGeometry {
    pub fn new(dx: f64, dy: f64, theta: f64, theta_prime: f64, dscale: usize) -> Self {
        let d = dx.hypot(dy);
        let line = if d > 0.0 { dy.atan2(dx) } else { 0.0 };
        let mut t1 = wrap_half_pi(theta - line);
        let mut t2 = wrap_half_pi(theta_prime - line);
        if t1.abs() > t2.abs() {
            core::mem::swap(&mut t1, &mut t2);
        }
        // Mirroring the pair about the connecting line flips both signs and
        // leaves the configuration unchanged; pick the mirror with θ1 ≥ 0.
        if t1 < 0.0 {
            t1 = -t1;
            t2 = -t2;
        }
        Self {
            d,
            theta1: t1,
            theta2: t2,
            beta: 2.0 * t1 + 2.0 * (t1 + t2).abs().sin(),
            dtheta: wrap_half_pi(theta - theta_prime),
            dscale,
        }
    }
}
