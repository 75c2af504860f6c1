//! Geometry of the upper half-plane with the Teichmüller normalization
//! `d_T = d_hyp / 2`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{MappingClass, Mat2i};

/// Point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelPoint {
    x: f64,
    y: f64,
}

impl ModelPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && y > 0.0 {
            Ok(ModelPoint { x, y })
        } else {
            Err(Error::InvalidPoint { x, y })
        }
    }

    pub(crate) fn raw(x: f64, y: f64) -> Self {
        debug_assert!(y > 0.0 && x.is_finite(), "bad point ({x}, {y})");
        ModelPoint { x, y }
    }

    pub fn i() -> Self {
        ModelPoint { x: 0.0, y: 1.0 }
    }

    /// `i * height`
    pub fn imag(height: f64) -> Result<Self> {
        Self::new(0.0, height)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn act(&self, g: &Mat2i) -> ModelPoint {
        let (x, y) = g.act(self.x, self.y);
        ModelPoint::raw(x, y)
    }

    pub fn act_big(&self, g: &MappingClass) -> ModelPoint {
        let (x, y) = g.act(self.x, self.y);
        ModelPoint::raw(x, y)
    }
}

/// Constants of the model: genus 1, one puncture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelParams {
    pub g: u32,
    pub n: u32,
    pub h: u32,
    pub m: u32,
}

pub const MODEL: ModelParams = ModelParams {
    g: 1,
    n: 1,
    h: 2,
    m: 1,
};

impl ModelParams {
    pub fn h(&self) -> f64 {
        f64::from(self.h)
    }
}

/// Real Möbius transformation, `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealIsometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealIsometry {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let scale = [a, b, c, d].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if ((a * d - b * c) - 1.0).abs() > 1e-12 * scale * scale {
            return Err(Error::InvalidInput(format!(
                "det of [[{a},{b}],[{c},{d}]] is not 1"
            )));
        }
        Ok(RealIsometry { a, b, c, d })
    }

    pub const IDENTITY: RealIsometry = RealIsometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn compose(&self, o: &RealIsometry) -> RealIsometry {
        RealIsometry {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> RealIsometry {
        RealIsometry {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// The affine map `z -> x + y z` sending i to `p`.
    pub fn affine_to(p: ModelPoint) -> RealIsometry {
        let s = p.y.sqrt();
        RealIsometry {
            a: s,
            b: p.x / s,
            c: 0.0,
            d: 1.0 / s,
        }
    }
}

impl From<Mat2i> for RealIsometry {
    fn from(m: Mat2i) -> Self {
        let [a, b, c, d] = m.to_f64();
        RealIsometry { a, b, c, d }
    }
}

pub fn apply_isometry(g: &RealIsometry, z: ModelPoint) -> Result<ModelPoint> {
    let (nx, ny) = (g.c * z.x + g.d, g.c * z.y);
    let den = nx * nx + ny * ny;
    if den.sqrt() < 1e-300 {
        return Err(Error::NumericOverflow(
            "degenerate Möbius denominator".into(),
        ));
    }
    let (px, py) = (g.a * z.x + g.b, g.a * z.y);
    ModelPoint::new((px * nx + py * ny) / den, (py * nx - px * ny) / den)
        .map_err(|_| Error::NumericOverflow("Möbius image left the half-plane".into()))
}

/// Standard hyperbolic distance (curvature -1).
pub fn hyp_dist(a: ModelPoint, b: ModelPoint) -> f64 {
    2.0 * teich_dist(a, b)
}

/// Teichmüller distance, half the hyperbolic distance.
pub fn teich_dist(a: ModelPoint, b: ModelPoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    ((dx * dx + dy * dy).sqrt() / (2.0 * (a.y * b.y).sqrt())).asinh()
}

/// Hyperbolic area of the Teichmüller ball of radius `r`.
pub fn ball_area(r: f64) -> f64 {
    2.0 * PI * ((2.0 * r).cosh() - 1.0)
}

/// Hyperbolic area of the modular fundamental domain.
pub const FUNDAMENTAL_AREA: f64 = PI / 3.0;

/// One reduction move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Translate(i64),
    Invert,
}

const MAX_REDUCTION_STEPS: usize = 100_000;

fn reduction_moves(z: ModelPoint, mut visit: impl FnMut(Move)) -> ModelPoint {
    let (mut x, mut y) = (z.x, z.y);
    for _ in 0..MAX_REDUCTION_STEPS {
        let n = x.round();
        if n != 0.0 {
            x -= n;
            visit(Move::Translate(-(n as i64)));
        }
        let r2 = x * x + y * y;
        if r2 < 1.0 {
            x = -x / r2;
            y /= r2;
            visit(Move::Invert);
        } else {
            break;
        }
    }
    ModelPoint::raw(x, y)
}

/// Classical translate-and-invert reduction into
/// `F = {|Re z| <= 1/2, |z| >= 1}`. Returns `(z', g)` with `g z = z'`.
pub fn reduce_to_fundamental(z: ModelPoint) -> (ModelPoint, MappingClass) {
    let mut g = MappingClass::identity();
    let s = MappingClass::from(Mat2i::S);
    let zr = reduction_moves(z, |mv| {
        g = match mv {
            Move::Translate(n) => MappingClass::from(Mat2i::translation(n)).mul(&g),
            Move::Invert => s.mul(&g),
        }
    });
    (zr, g)
}

/// Reduction with an `i64` matrix; errors if the matrix overflows.
pub fn reduce_fast(z: ModelPoint) -> Result<(ModelPoint, Mat2i)> {
    let mut g = Mat2i::IDENTITY;
    let mut overflow = false;
    let zr = reduction_moves(z, |mv| {
        if overflow {
            return;
        }
        let step = match mv {
            Move::Translate(n) => Mat2i::translation(n),
            Move::Invert => Mat2i::S,
        };
        match step.checked_mul(&g) {
            Some(m) => g = m,
            None => overflow = true,
        }
    });
    if overflow {
        return Err(Error::NumericOverflow(
            "reduction matrix exceeds i64".into(),
        ));
    }
    Ok((zr, g))
}

/// Reduced point only.
pub fn reduce_point(z: ModelPoint) -> ModelPoint {
    reduction_moves(z, |_| {})
}

pub fn in_fundamental_domain(z: ModelPoint, tol: f64) -> bool {
    z.x.abs() <= 0.5 + tol && z.x * z.x + z.y * z.y >= 1.0 - tol
}

/// Point at hyperbolic distance `rho` from i along the ray with angle
/// `theta` (counterclockwise from straight up), moved to `center`.
pub fn polar_point(center: ModelPoint, rho: f64, theta: f64) -> ModelPoint {
    let s = (0.5 * theta).sin();
    let y = 1.0 / ((-rho).exp() + 2.0 * rho.sinh() * s * s);
    let x = -rho.sinh() * theta.sin() * y;
    ModelPoint::raw(center.x + center.y * x, center.y * y)
}

/// Direction angle at `center` of the geodesic ray towards the boundary
/// point `xi` (`None` is the cusp at infinity).
pub fn direction_to(center: ModelPoint, xi: Option<f64>) -> f64 {
    match xi {
        None => 0.0,
        Some(t) => {
            let w = (t - center.x) / center.y;
            2.0 * 1f64.atan2(-w)
        }
    }
}

/// Hyperbolic radius with `P(rho <= t) = (cosh t - 1)/(cosh rho_max - 1)`.
fn sample_radius<R: Rng + ?Sized>(rho_max: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    2.0 * (u * (rho_max.cosh() - 1.0) / 2.0).sqrt().asinh()
}

/// Uniform point (hyperbolic area) in the Teichmüller ball `B(center, r)`.
pub fn sample_ball<R: Rng + ?Sized>(center: ModelPoint, r: f64, rng: &mut R) -> ModelPoint {
    if r <= 0.0 {
        return center;
    }
    let rho = sample_radius(2.0 * r, rng);
    let theta = rng.random_range(-PI..PI);
    polar_point(center, rho, theta)
}

/// Importance sampler for ball averages of functions that blow up in one
/// cusp. Angles are drawn from an even mixture of the uniform law and a
/// density `~ 1/sqrt(phi^2 + a^2)` concentrated around `focus`, with `a`
/// matched to the angular width `~2 e^{-rho}` of the cusp at radius `rho`.
/// Each sample carries the likelihood ratio against the uniform ball law, so
/// `mean(w f)` is unbiased for the ball average of `f`.
pub fn sample_ball_focused<R: Rng + ?Sized>(
    center: ModelPoint,
    r: f64,
    focus: f64,
    rng: &mut R,
) -> (ModelPoint, f64) {
    if r <= 0.0 {
        return (center, 1.0);
    }
    let rho = sample_radius(2.0 * r, rng);
    let a = (2.0 * (-rho).exp()).max(1e-300);
    let span = (PI / a).asinh();
    let phi = if rng.random::<bool>() {
        rng.random_range(-PI..PI)
    } else {
        a * (rng.random_range(-1.0..1.0) * span).sinh()
    };
    let h = 1.0 / ((phi * phi + a * a).sqrt() * 2.0 * span);
    let q = 0.5 / (2.0 * PI) + 0.5 * h;
    let w = (1.0 / (2.0 * PI)) / q;
    (polar_point(center, rho, focus + phi), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::stream_rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_invalid_points() {
        assert!(ModelPoint::new(0.0, 0.0).is_err());
        assert!(ModelPoint::new(0.0, -1.0).is_err());
        assert!(ModelPoint::new(f64::NAN, 1.0).is_err());
        assert!(ModelPoint::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn distances_on_the_imaginary_axis() {
        assert_eq!(teich_dist(ModelPoint::i(), ModelPoint::i()), 0.0);
        let d = teich_dist(ModelPoint::i(), ModelPoint::imag(4.0).unwrap());
        assert!(close(d, 2f64.ln(), 1e-12));
    }

    #[test]
    fn isometry_examples() {
        let s = RealIsometry::new(0.0, -1.0, 1.0, 0.0).unwrap();
        let z = apply_isometry(&s, ModelPoint::i()).unwrap();
        assert!(close(z.x(), 0.0, 1e-15) && close(z.y(), 1.0, 1e-15));
        let t = RealIsometry::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let z = apply_isometry(&t, ModelPoint::i()).unwrap();
        assert!(close(z.x(), 1.0, 1e-15) && close(z.y(), 1.0, 1e-15));
        assert!(RealIsometry::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn reduction_examples() {
        let (z, g) = reduce_to_fundamental(ModelPoint::i());
        assert_eq!(z, ModelPoint::i());
        assert_eq!(g, MappingClass::identity());

        let (z, g) = reduce_to_fundamental(ModelPoint::new(1.0, 1.0).unwrap());
        assert!(close(z.x(), 0.0, 1e-15) && close(z.y(), 1.0, 1e-15));
        assert_eq!(g, MappingClass::from(Mat2i::translation(-1)));

        let p = ModelPoint::new(0.5, 0.1).unwrap();
        let (z, g) = reduce_to_fundamental(p);
        assert!(in_fundamental_domain(z, 1e-12));
        let gz = p.act_big(&g);
        assert!(close(gz.x(), z.x(), 1e-10) && close(gz.y(), z.y(), 1e-10));
    }

    #[test]
    fn polar_points_have_the_right_distance() {
        let c = ModelPoint::new(0.3, 2.0).unwrap();
        for k in 0..12 {
            let th = -PI + k as f64 * 0.5;
            let p = polar_point(c, 1.7, th);
            assert!(close(hyp_dist(c, p), 1.7, 1e-10));
        }
        let up = polar_point(ModelPoint::i(), 1.0, 0.0);
        assert!(close(up.x(), 0.0, 1e-15) && close(up.y(), 1f64.exp(), 1e-12));
    }

    #[test]
    fn direction_to_points_at_the_target() {
        let c = ModelPoint::new(0.2, 0.7).unwrap();
        let th = direction_to(c, Some(-1.3));
        let far = polar_point(c, 40.0, th);
        assert!(close(far.x(), -1.3, 1e-9));
        assert_eq!(direction_to(c, None), 0.0);
    }

    #[test]
    fn zero_radius_ball_is_the_center() {
        let c = ModelPoint::new(1.0, 3.0).unwrap();
        let mut rng = stream_rng(1, 0);
        assert_eq!(sample_ball(c, 0.0, &mut rng), c);
    }

    #[test]
    fn focused_weights_average_to_one() {
        let mut rng = stream_rng(5, 0);
        let n = 200_000;
        let s: f64 = (0..n)
            .map(|_| sample_ball_focused(ModelPoint::i(), 3.0, 0.4, &mut rng).1)
            .sum();
        assert!(close(s / n as f64, 1.0, 0.01));
    }
}
