//! Points of the Riemann sphere as unit vectors, with the great-circle metric.
//!
//! The chart is stereographic projection from the north pole: `0` is the
//! south pole `(0,0,-1)` and `∞` the north pole `(0,0,1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(pub [f64; 3]);

impl SpherePoint {
    pub fn infinity() -> Self {
        SpherePoint([0.0, 0.0, 1.0])
    }

    pub fn from_complex(z: Complex64) -> Self {
        let r2 = z.norm_sqr();
        if !r2.is_finite() {
            return Self::infinity();
        }
        let s = 1.0 / (1.0 + r2);
        SpherePoint([2.0 * z.re * s, 2.0 * z.im * s, (r2 - 1.0) * s])
    }

    /// Point with homogeneous coordinates `[p : q]`, i.e. `p / q`.
    pub fn from_projective(p: Complex64, q: Complex64) -> Self {
        if p.norm_sqr() <= q.norm_sqr() {
            Self::from_complex(p / q)
        } else {
            Self::from_complex(q / p).flipped()
        }
    }

    /// Image under `z -> 1/z`.
    pub fn flipped(self) -> Self {
        let [x, y, z] = self.0;
        SpherePoint([x, -y, -z])
    }

    /// Chart value, `None` at infinity.
    pub fn to_complex(self) -> Option<Complex64> {
        let [x, y, z] = self.0;
        if z >= 1.0 {
            return None;
        }
        let d = 1.0 - z;
        Some(Complex64::new(x / d, y / d))
    }

    /// Homogeneous coordinates `[p : q]` with `max(|p|, |q|) = 1`.
    pub fn to_projective(self) -> (Complex64, Complex64) {
        let [x, y, z] = self.0;
        if z <= 0.0 {
            let d = 1.0 - z;
            (Complex64::new(x / d, y / d), Complex64::new(1.0, 0.0))
        } else {
            // 1/w is the chart value of the flipped point
            let d = 1.0 + z;
            (Complex64::new(1.0, 0.0), Complex64::new(x / d, -y / d))
        }
    }

    pub fn norm(self) -> f64 {
        let [x, y, z] = self.0;
        (x * x + y * y + z * z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        let [x, y, z] = self.0;
        SpherePoint([x / n, y / n, z / n])
    }

    pub fn dot(self, o: Self) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(self, o: Self) -> [f64; 3] {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        [b * z - c * y, c * x - a * z, a * y - b * x]
    }

    pub fn antipode(self) -> Self {
        let [x, y, z] = self.0;
        SpherePoint([-x, -y, -z])
    }

    /// Point at angle `t` from `self` in the unit tangent direction `u`.
    pub fn geodesic(self, u: [f64; 3], t: f64) -> Self {
        let (s, c) = t.sin_cos();
        let [x, y, z] = self.0;
        SpherePoint([c * x + s * u[0], c * y + s * u[1], c * z + s * u[2]]).normalized()
    }

    /// An orthonormal pair spanning the tangent plane.
    pub fn tangent_frame(self) -> ([f64; 3], [f64; 3]) {
        let p = self.0;
        let a = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d = a[0] * p[0] + a[1] * p[1] + a[2] * p[2];
        let mut e1 = [a[0] - d * p[0], a[1] - d * p[1], a[2] - d * p[2]];
        let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        for v in e1.iter_mut() {
            *v /= n1;
        }
        let e2 = SpherePoint(p).cross(SpherePoint(e1));
        (e1, e2)
    }
}

/// Great-circle distance on the unit sphere; the diameter is `π`.
pub fn spherical_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    let c = p.cross(q);
    let s = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    s.atan2(p.dot(q))
}
