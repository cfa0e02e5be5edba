//! Planar pose algebra.
//!
//! Angles are radians, counterclockwise positive, and always wrapped to
//! `(-pi, pi]`.

use core::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Wraps an angle to `(-pi, pi]`. `-pi` maps to `pi`.
pub fn wrap_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap(a))
}

/// Infallible wrap for values already known to be finite.
#[inline]
pub(crate) fn wrap(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = libm::remainder(a, TAU);
    if w <= -PI {
        w += TAU;
    } else if w > PI {
        w -= TAU;
    }
    w
}

/// World-frame pose.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// A pose expressed in the local frame of another pose.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    /// Builds a pose, wrapping `theta`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: wrap(theta) }
    }

    pub fn distance(&self, other: &Pose2D) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

impl RelPose {
    pub const IDENTITY: RelPose = RelPose { x: 0.0, y: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: wrap(theta) }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.theta]
    }

    pub fn norm(&self) -> f64 {
        libm::hypot(self.x, self.y)
    }
}

/// World pose of the point whose coordinates in `base`'s frame are `rel`.
pub fn compose(base: Pose2D, rel: RelPose) -> Pose2D {
    let (s, c) = libm::sincos(base.theta);
    Pose2D {
        x: base.x + c * rel.x - s * rel.y,
        y: base.y + s * rel.x + c * rel.y,
        theta: wrap(base.theta + rel.theta),
    }
}

/// `target` expressed in the frame of `base`.
pub fn relative(base: Pose2D, target: Pose2D) -> RelPose {
    let (s, c) = libm::sincos(base.theta);
    let dx = target.x - base.x;
    let dy = target.y - base.y;
    RelPose {
        x: c * dx + s * dy,
        y: -s * dx + c * dy,
        theta: wrap(target.theta - base.theta),
    }
}

/// Robot motion between consecutive steps, in the frame of the earlier pose.
#[inline]
pub fn robot_delta(prev: Pose2D, curr: Pose2D) -> RelPose {
    relative(prev, curr)
}

/// Rotates a world-frame vector into the local frame of a heading.
#[inline]
pub(crate) fn rotate_into(theta: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = libm::sincos(theta);
    [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
}

/// Rotates a local vector out into the world frame.
#[inline]
pub(crate) fn rotate_out(theta: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = libm::sincos(theta);
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn angle_close(a: f64, b: f64, tol: f64) -> bool {
        wrap(a - b).abs() <= tol
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert!(close(wrap_angle(3.0 * PI).unwrap(), PI, 1e-12));
        assert_eq!(wrap_angle(-PI).unwrap(), PI);
        assert_eq!(wrap_angle(PI).unwrap(), PI);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn compose_examples() {
        let p = compose(Pose2D::new(0.0, 0.0, 0.0), RelPose::new(1.0, 2.0, 0.3));
        assert_eq!(p, Pose2D::new(1.0, 2.0, 0.3));

        let p = compose(Pose2D::new(0.0, 0.0, FRAC_PI_2), RelPose::new(1.0, 0.0, 0.0));
        assert!(close(p.x, 0.0, 1e-15) && close(p.y, 1.0, 1e-15));
        assert!(close(p.theta, FRAC_PI_2, 1e-15));
    }

    #[test]
    fn compose_matches_rotation_matrix_oracle() {
        let base = Pose2D::new(2.0, 1.0, 0.7);
        let rel = RelPose::new(0.4, -0.2, 0.1);
        let out = compose(base, rel);
        // R(0.7) * (0.4, -0.2) + (2, 1), written out with std-free cos/sin.
        let (c, s) = (libm::cos(0.7), libm::sin(0.7));
        let ox = 2.0 + c * 0.4 + (-s) * -0.2;
        let oy = 1.0 + s * 0.4 + c * -0.2;
        assert!(close(out.x, ox, 1e-14) && close(out.y, oy, 1e-14));
        assert!(close(out.theta, 0.8, 1e-14));
        let back = relative(base, out);
        assert!(close(back.x, rel.x, 1e-12) && close(back.y, rel.y, 1e-12));
        assert!(angle_close(back.theta, rel.theta, 1e-12));
    }

    #[test]
    fn relative_examples() {
        let p = Pose2D::new(0.3, -1.2, 2.9);
        assert_eq!(relative(p, p), RelPose::IDENTITY);
        let r = relative(Pose2D::new(0.0, 0.0, FRAC_PI_2), Pose2D::new(0.0, 1.0, FRAC_PI_2));
        assert!(close(r.x, 1.0, 1e-15) && close(r.y, 0.0, 1e-15) && r.theta == 0.0);
    }

    #[test]
    fn robot_delta_examples() {
        let d = robot_delta(Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(0.1, 0.0, 0.0));
        assert_eq!(d, RelPose::new(0.1, 0.0, 0.0));
        let p = Pose2D::new(1.0, 1.0, 0.25 * PI);
        assert_eq!(robot_delta(p, p), RelPose::IDENTITY);
        let q = Pose2D::new(-0.4, 2.2, -1.9);
        assert_eq!(robot_delta(p, q), relative(p, q));
    }

    fn pose() -> impl Strategy<Value = Pose2D> {
        (-50.0..50.0f64, -50.0..50.0f64, -10.0..10.0f64).prop_map(|(x, y, t)| Pose2D::new(x, y, t))
    }

    proptest! {
        #[test]
        fn relative_matches_matrix_oracle(a in pose(), b in pose()) {
            // R(theta)^T (b - a), entries computed independently.
            let (c, s) = (libm::cos(a.theta), libm::sin(a.theta));
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let r = relative(a, b);
            prop_assert!(close(r.x, c * dx + s * dy, 1e-12));
            prop_assert!(close(r.y, -s * dx + c * dy, 1e-12));
            prop_assert!(angle_close(r.theta, b.theta - a.theta, 1e-12));
        }

        #[test]
        fn compose_inverts_relative(a in pose(), b in pose()) {
            let back = compose(a, relative(a, b));
            prop_assert!(close(back.x, b.x, 1e-12) && close(back.y, b.y, 1e-12));
            prop_assert!(angle_close(back.theta, b.theta, 1e-12));
        }

        #[test]
        fn relative_distance_symmetry(a in pose(), b in pose()) {
            prop_assert!(close(relative(a, b).norm(), relative(b, a).norm(), 1e-11));
        }

        #[test]
        fn wrap_idempotent_and_in_range(a in -1e6..1e6f64) {
            let w = wrap_angle(a).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w).unwrap(), w);
            let k = ((a - w) / TAU).round();
            prop_assert!(close(a - w, k * TAU, 1e-9 * a.abs().max(1.0)));
        }

        #[test]
        fn distance_invariant_under_base_change(c in pose(), p in pose(), q in pose()) {
            let rp = relative(c, p);
            let rq = relative(c, q);
            let d_rel = libm::hypot(rp.x - rq.x, rp.y - rq.y);
            prop_assert!(close(d_rel, p.distance(&q), 1e-9));
        }
    }
}
