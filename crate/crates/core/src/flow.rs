//! Geodesic flow on the frame bundle `PSL(2,Z) \ PSL(2,R)`.
//!
//! A frame is a matrix `g` with base point `g i` and direction obtained by
//! pushing the upward vector at i. The flow is right multiplication by
//! `a_t = diag(e^t, e^-t)`, which moves the base point at unit Teichmüller
//! speed. Strong stable leaves are the orbits of `n(s) = [[1, s], [0, 1]]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{MappingClass, Mat2i};
use crate::hyp::{
    ball_area, reduce_fast, reduce_to_fundamental, sample_ball, teich_dist, ModelPoint,
    FUNDAMENTAL_AREA,
};
use crate::mcg::{axis_endpoints, class_of_matrix, ConjClassWord};
use crate::par::{stream_rng, Exec, StreamRng};
use crate::stats::{from_batch_means, linfit, Estimate};
use crate::torus::systole_value;

pub type Mat2f = [f64; 4];

fn mul(a: &Mat2f, b: &Mat2f) -> Mat2f {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn inv(a: &Mat2f) -> Mat2f {
    [a[3], -a[1], -a[2], a[0]]
}

fn diag(t: f64) -> Mat2f {
    [t.exp(), 0.0, 0.0, (-t).exp()]
}

fn int_mul(g: &Mat2i, a: &Mat2f) -> Mat2f {
    mul(&g.to_f64(), a)
}

fn base_of(g: &Mat2f) -> ModelPoint {
    let n = g[2] * g[2] + g[3] * g[3];
    ModelPoint::raw((g[0] * g[2] + g[1] * g[3]) / n, 1.0 / n)
}

fn wrap(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t == -PI {
        PI
    } else {
        t
    }
}

fn direction_of(g: &Mat2f) -> f64 {
    wrap(-2.0 * g[2].atan2(g[3]))
}

/// `n(x) a(y) k(-theta/2)`: base `x + iy`, direction `theta` counterclockwise
/// from straight up.
fn frame_matrix(base: ModelPoint, theta: f64) -> Mat2f {
    let s = base.y().sqrt();
    let (sn, cs) = (-0.5 * theta).sin_cos();
    let na = [s, base.x() / s, 0.0, 1.0 / s];
    mul(&na, &[cs, -sn, sn, cs])
}

/// Reduce the base point of `g` into the fundamental domain.
fn reduce_frame(g: &Mat2f) -> Result<(Mat2f, Mat2i)> {
    let (_, gamma) = reduce_fast(base_of(g))?;
    Ok((int_mul(&gamma, g), gamma))
}

/// Point of the frame bundle with the accumulated deck transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    g: Mat2f,
    deck: MappingClass,
}

impl Frame {
    pub fn new(g: Mat2f) -> Result<Self> {
        let det = g[0] * g[3] - g[1] * g[2];
        if !g.iter().all(|v| v.is_finite()) || (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "frame matrix has det {det}, expected 1"
            )));
        }
        Ok(Frame {
            g,
            deck: MappingClass::identity(),
        })
    }

    /// Frame at `base` pointing in direction `theta`.
    pub fn at(base: ModelPoint, theta: f64) -> Self {
        Frame {
            g: frame_matrix(base, theta),
            deck: MappingClass::identity(),
        }
    }

    pub fn matrix(&self) -> Mat2f {
        self.g
    }

    pub fn deck(&self) -> &MappingClass {
        &self.deck
    }

    pub fn base(&self) -> ModelPoint {
        base_of(&self.g)
    }

    pub fn direction(&self) -> f64 {
        direction_of(&self.g)
    }

    /// Move the base point into the fundamental domain, recording the move.
    pub fn reduce(&self) -> Frame {
        let (_, gamma) = reduce_to_fundamental(self.base());
        let [a, b, c, d] = gamma.to_f64();
        Frame {
            g: mul(&[a, b, c, d], &self.g),
            deck: gamma.mul(&self.deck),
        }
    }

    /// Flow without reduction.
    pub fn flow_unreduced(&self, t: f64) -> Frame {
        Frame {
            g: mul(&self.g, &diag(t)),
            deck: self.deck.clone(),
        }
    }
}

/// `g_t q`, reduced, with the deck updated so that
/// `deck * (unreduced flowed frame) = reduced frame`.
pub fn flow(frame: &Frame, t: f64) -> Frame {
    frame.flow_unreduced(t).reduce()
}

/// Base ball times an interval of directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBox {
    center: ModelPoint,
    radius: f64,
    theta0: f64,
    width: f64,
    measure: f64,
}

/// Volume of the frame bundle in area-times-angle units.
pub const TOTAL_VOLUME: f64 = FUNDAMENTAL_AREA * 2.0 * PI;

impl FrameBox {
    /// `radius` is Teichmüller; the ball has to sit inside the interior of
    /// the fundamental domain so that membership of reduced frames is exact.
    pub fn new(center: ModelPoint, radius: f64, theta0: f64, width: f64) -> Result<Self> {
        if !(radius > 0.0) || !(width > 0.0 && width <= 2.0 * PI) {
            return Err(Error::InvalidInput(format!(
                "degenerate box: radius {radius}, width {width}"
            )));
        }
        let (ec, er) = (
            center.y() * (2.0 * radius).cosh(),
            center.y() * (2.0 * radius).sinh(),
        );
        let inside =
            center.x().abs() + er < 0.5 && (center.x().powi(2) + ec.powi(2)).sqrt() - er > 1.0;
        if !inside {
            return Err(Error::InvalidInput(
                "box base must lie inside the fundamental domain".into(),
            ));
        }
        let measure = ball_area(radius) * width / TOTAL_VOLUME;
        Ok(FrameBox {
            center,
            radius,
            theta0: wrap(theta0),
            width,
            measure,
        })
    }

    /// Box with the given normalized measure.
    pub fn with_measure(center: ModelPoint, theta0: f64, width: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !(width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "degenerate box: measure {mu}, width {width}"
            )));
        }
        let area = mu * TOTAL_VOLUME / width;
        let radius = 0.5 * (1.0 + area / (2.0 * PI)).acosh();
        Self::new(center, radius, theta0, width)
    }

    pub fn center(&self) -> ModelPoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    fn contains_raw(&self, g: &Mat2f) -> bool {
        teich_dist(self.center, base_of(g)) <= self.radius
            && wrap(direction_of(g) - self.theta0).abs() <= 0.5 * self.width
    }

    fn sample_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Mat2f {
        let p = sample_ball(self.center, self.radius, rng);
        let th = self.theta0 + (rng.random::<f64>() - 0.5) * self.width;
        frame_matrix(p, th)
    }
}

/// A set of frames with known measure that can be sampled uniformly.
pub trait FrameSet: Sync {
    /// Base point used as the reference for axis distances.
    fn center(&self) -> ModelPoint;
    /// Normalized measure.
    fn measure(&self) -> f64;
    fn contains_matrix(&self, g: &Mat2f) -> bool;
    fn sample_matrix(&self, rng: &mut StreamRng) -> Mat2f;
    /// Frames on the boundary that realize the extremes of the set.
    fn extreme_frames(&self) -> Vec<Mat2f>;

    fn contains(&self, q: &Frame) -> bool {
        self.contains_matrix(&q.g)
    }

    fn sample(&self, rng: &mut StreamRng) -> Frame {
        Frame {
            g: self.sample_matrix(rng),
            deck: MappingClass::identity(),
        }
    }

    /// Sampled sup of the max-entry norm of `g1^{-1} g2 - I` over pairs in
    /// the set, with a 10% safety margin.
    fn diameter(&self, seed: u64) -> f64 {
        let mut rng = stream_rng(seed, 0xd1a);
        let mut pts = self.extreme_frames();
        for _ in 0..256 {
            pts.push(self.sample_matrix(&mut rng));
        }
        let mut d: f64 = 0.0;
        for a in &pts {
            let ai = inv(a);
            for b in &pts {
                let e = mul(&ai, b);
                let n = (e[0] - 1.0)
                    .abs()
                    .max(e[1].abs())
                    .max(e[2].abs())
                    .max((e[3] - 1.0).abs());
                d = d.max(n);
            }
        }
        1.1 * d
    }

    /// Closing constants for recurrence time `r`.
    fn closing_constants(&self, r: f64, seed: u64) -> Result<ClosingConstants> {
        let d = self.diameter(seed);
        if d >= 1.0 {
            return Err(Error::Precondition(format!(
                "box diameter {d} too large for the closing bound"
            )));
        }
        let tail = (-2.0 * r).exp();
        Ok(ClosingConstants {
            diameter: d,
            eps: -(1.0 - d).ln() + 2.0 * tail * (1.0 + d) / (1.0 - d),
            c1: 0.5 * (d / (1.0 - d)).asinh() + 2.0 * tail / (1.0 - d).powi(2),
        })
    }
}

impl FrameSet for FrameBox {
    fn center(&self) -> ModelPoint {
        self.center
    }

    fn measure(&self) -> f64 {
        self.measure
    }

    fn contains_matrix(&self, g: &Mat2f) -> bool {
        self.contains_raw(g)
    }

    fn sample_matrix(&self, rng: &mut StreamRng) -> Mat2f {
        self.sample_raw(rng)
    }

    fn extreme_frames(&self) -> Vec<Mat2f> {
        let mut pts = Vec::with_capacity(128);
        for k in 0..64 {
            let phi = 2.0 * PI * k as f64 / 64.0;
            let p = crate::hyp::polar_point(self.center, 2.0 * self.radius, phi);
            for s in [-0.5, 0.5] {
                pts.push(frame_matrix(p, self.theta0 + s * self.width));
            }
        }
        pts
    }
}

fn nbar(u: f64) -> Mat2f {
    [1.0, 0.0, u, 1.0]
}

fn nplus(s: f64) -> Mat2f {
    [1.0, s, 0.0, 1.0]
}

/// Flow box `g0 nbar(u) a(t) n(s)` with `|u| <= half[0]`, `|t| <= half[1]`,
/// `|s| <= half[2]`: unstable, flow and stable segments through the frame
/// `g0`. In these coordinates Haar measure is `4 e^{2t} du dt ds` in
/// area-times-angle units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowBox {
    g0: Mat2f,
    ginv: Mat2f,
    half: [f64; 3],
    measure: f64,
}

impl FlowBox {
    /// Box around the frame at `base` pointing in direction `theta`. Every
    /// frame of the box must have its base point inside the interior of the
    /// fundamental domain.
    pub fn new(base: ModelPoint, theta: f64, half: [f64; 3]) -> Result<Self> {
        if !half.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(Error::InvalidInput(format!("degenerate flow box {half:?}")));
        }
        let g0 = frame_matrix(base, theta);
        let abs = 4.0 * (2.0 * half[0]) * (2.0 * half[2]) * (2.0 * half[1]).sinh();
        let b = FlowBox {
            g0,
            ginv: inv(&g0),
            half,
            measure: abs / TOTAL_VOLUME,
        };
        // base points over a grid of the box
        let n = 8;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let c = |m: usize, h: f64| h * (2.0 * m as f64 / n as f64 - 1.0);
                    let p = base_of(&b.at(c(i, half[0]), c(j, half[1]), c(k, half[2])));
                    if !(p.x().abs() < 0.5 && p.x() * p.x() + p.y() * p.y() > 1.0) {
                        return Err(Error::InvalidInput(
                            "flow box leaves the fundamental domain".into(),
                        ));
                    }
                }
            }
        }
        Ok(b)
    }

    /// Box with equal half-widths and the given normalized measure.
    pub fn with_measure(base: ModelPoint, theta: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidInput(format!("measure {mu} outside (0, 1)")));
        }
        let target = mu * TOTAL_VOLUME;
        let f = |h: f64| 16.0 * h * h * (2.0 * h).sinh() - target;
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = 0.5 * (lo + hi);
        Self::new(base, theta, [h; 3])
    }

    pub fn half_widths(&self) -> [f64; 3] {
        self.half
    }

    fn at(&self, u: f64, t: f64, s: f64) -> Mat2f {
        mul(&mul(&mul(&self.g0, &nbar(u)), &diag(t)), &nplus(s))
    }

    /// Coordinates `(u, t, s)` of `g` relative to `g0`, if `g0^{-1} g` has
    /// such a decomposition.
    pub fn coordinates(&self, g: &Mat2f) -> Option<[f64; 3]> {
        let mut e = mul(&self.ginv, g);
        if e[0] < 0.0 {
            e = e.map(|v| -v);
        }
        (e[0] > 0.0).then(|| [e[2] / e[0], e[0].ln(), e[1] / e[0]])
    }
}

impl FrameSet for FlowBox {
    fn center(&self) -> ModelPoint {
        base_of(&self.g0)
    }

    fn measure(&self) -> f64 {
        self.measure
    }

    fn contains_matrix(&self, g: &Mat2f) -> bool {
        self.coordinates(g)
            .is_some_and(|c| c.iter().zip(&self.half).all(|(x, h)| x.abs() <= *h))
    }

    fn sample_matrix(&self, rng: &mut StreamRng) -> Mat2f {
        let [hu, ht, hs] = self.half;
        let u = (2.0 * rng.random::<f64>() - 1.0) * hu;
        let s = (2.0 * rng.random::<f64>() - 1.0) * hs;
        // density proportional to e^{2t} on [-ht, ht]
        let (a, b) = ((-2.0 * ht).exp(), (2.0 * ht).exp());
        let t = 0.5 * (a + rng.random::<f64>() * (b - a)).ln();
        self.at(u, t, s)
    }

    fn extreme_frames(&self) -> Vec<Mat2f> {
        let mut pts = Vec::with_capacity(27);
        for i in [-1.0, 0.0, 1.0] {
            for j in [-1.0, 0.0, 1.0] {
                for k in [-1.0, 0.0, 1.0] {
                    pts.push(self.at(i * self.half[0], j * self.half[1], k * self.half[2]));
                }
            }
        }
        pts
    }
}

/// Bounds for closing a recurrence. If two frames of a box are related by
/// `q' = q e` then the deck element is conjugate to `e a_{-R}`, so its trace
/// is `e_11 e^{-R} + e_22 e^R` and its axis passes the start at horizontal
/// offset about `e_12 / e_22`. With every entry of `e - I` at most `D` this
/// gives the two constants below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosingConstants {
    pub diameter: f64,
    /// Bound on `|length - R|`.
    pub eps: f64,
    /// Bound on the start-to-axis distance.
    pub c1: f64,
}

/// Closed geodesic shadowing a recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedOrbit {
    pub gamma: MappingClass,
    pub length: f64,
    pub axis_distance: f64,
}

impl ClosedOrbit {
    pub fn within(&self, r: f64, k: &ClosingConstants) -> bool {
        (self.length - r).abs() <= k.eps && self.axis_distance <= k.c1
    }

    /// Canonical word of the forward translation `gamma^{-1}`.
    pub fn word(&self) -> Result<ConjClassWord> {
        let m = self
            .gamma
            .inverse()
            .to_mat2i()
            .ok_or_else(|| Error::NumericOverflow("deck element exceeds i64".into()))?;
        class_of_matrix(&m)
    }
}

/// Teichmüller distance from `z` to the geodesic with endpoints `u`, `v`.
pub fn dist_to_geodesic(z: ModelPoint, u: f64, v: f64) -> f64 {
    // w = (z - v) / (z - u) sends the geodesic to the imaginary axis
    let (ax, ay) = (z.x() - v, z.y());
    let (bx, by) = (z.x() - u, z.y());
    let n = bx * bx + by * by;
    let wx = (ax * bx + ay * by) / n;
    let wy = (ay * bx - ax * by) / n;
    0.5 * (wx.abs() / wy.abs()).asinh()
}

/// Closed orbit from a recurrence `gamma g_R q ~ q`: the axis of `gamma`.
pub fn close_orbit(q: &Frame, r: f64, gamma: &MappingClass) -> Result<ClosedOrbit> {
    if !gamma.is_hyperbolic() {
        return Err(Error::Precondition(format!(
            "recurrence element {gamma} is not hyperbolic"
        )));
    }
    let length = crate::mcg::length_from_trace(&gamma.trace());
    let (u, v) = axis_endpoints(gamma)?;
    let _ = r;
    Ok(ClosedOrbit {
        gamma: gamma.clone(),
        length,
        axis_distance: dist_to_geodesic(q.base(), u, v),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    pub t_grid: Vec<f64>,
    pub separations: Vec<f64>,
    pub base_distances: Vec<f64>,
    pub max_deviation: f64,
}

/// Follow two frames on one strong stable leaf and compare the horocyclic
/// separation with `e^{-2t}` times the initial one.
pub fn stable_contraction_check(
    q1: &Frame,
    q2: &Frame,
    t_grid: &[f64],
) -> Result<ContractionReport> {
    let e = mul(&inv(&q1.g), &q2.g);
    let scale = e.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if (e[0] - 1.0).abs() > 1e-9 * scale
        || e[2].abs() > 1e-9 * scale
        || (e[3] - 1.0).abs() > 1e-9 * scale
    {
        return Err(Error::Precondition(
            "frames are not on one strong stable leaf".into(),
        ));
    }
    let s0 = e[1];
    if s0.abs() > 1.0 {
        return Err(Error::Precondition(format!(
            "initial separation {s0} exceeds 1"
        )));
    }
    let mut seps = Vec::with_capacity(t_grid.len());
    let mut dists = Vec::with_capacity(t_grid.len());
    let mut dev: f64 = 0.0;
    for &t in t_grid {
        let a = mul(&q1.g, &diag(t));
        let b = mul(&q2.g, &diag(t));
        let st = mul(&inv(&a), &b)[1];
        dev = dev.max((st - (-2.0 * t).exp() * s0).abs());
        seps.push(st.abs());
        dists.push(teich_dist(base_of(&a), base_of(&b)));
    }
    Ok(ContractionReport {
        t_grid: t_grid.to_vec(),
        separations: seps,
        base_distances: dists,
        max_deviation: dev,
    })
}

/// Second frame on the strong stable leaf of `q`.
pub fn stable_partner(q: &Frame, s: f64) -> Frame {
    Frame {
        g: mul(&q.g, &[1.0, s, 0.0, 1.0]),
        deck: q.deck.clone(),
    }
}

const CHUNKS: usize = 100;

/// `mu(U ∩ g_R U)` by sampling `U`, flowing and testing membership.
pub fn mixing_correlation(
    u: &impl FrameSet,
    r: f64,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<Estimate> {
    if n < 10_000 {
        return Err(Error::InvalidInput(format!(
            "need at least 10^4 samples, got {n}"
        )));
    }
    let per = n / CHUNKS;
    let at = diag(r);
    let fracs: Vec<Result<f64>> = exec.map(CHUNKS, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let mut hits = 0usize;
        for _ in 0..per {
            let g = mul(&u.sample_matrix(&mut rng), &at);
            let (g, _) = reduce_frame(&g)?;
            hits += usize::from(u.contains_matrix(&g));
        }
        Ok(hits as f64 / per as f64)
    });
    let fracs: Vec<f64> = fracs.into_iter().collect::<Result<_>>()?;
    Ok(from_batch_means(&fracs).scale(u.measure()))
}

/// Haar-random frame with base point height truncated at `y_max`.
pub fn sample_haar<R: Rng + ?Sized>(rng: &mut R, y_max: f64) -> Frame {
    let y0 = 0.5 * 3f64.sqrt();
    loop {
        let x = rng.random::<f64>() - 0.5;
        let inv_y = 1.0 / y0 - rng.random::<f64>() * (1.0 / y0 - 1.0 / y_max);
        let y = 1.0 / inv_y;
        if x * x + y * y >= 1.0 {
            let th = rng.random_range(-PI..PI);
            return Frame::at(ModelPoint::raw(x, y), th);
        }
    }
}

/// Cusp truncation used for Haar sampling.
pub const HAAR_Y_MAX: f64 = 1e3;

/// Fraction of Haar-random frames whose time-`t` image lies in `U`, times
/// the total measure: an estimate of `mu(g_{-t} U)`.
pub fn flowed_box_measure(
    u: &impl FrameSet,
    t: f64,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<Estimate> {
    let per = (n / CHUNKS).max(1);
    let at = diag(t);
    let fracs: Vec<Result<f64>> = exec.map(CHUNKS, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let mut hits = 0usize;
        for _ in 0..per {
            let q = sample_haar(&mut rng, HAAR_Y_MAX);
            let (g, _) = reduce_frame(&mul(&q.g, &at))?;
            hits += usize::from(u.contains_matrix(&g));
        }
        Ok(hits as f64 / per as f64)
    });
    let fracs: Vec<f64> = fracs.into_iter().collect::<Result<_>>()?;
    Ok(from_batch_means(&fracs))
}

/// Fraction of the flow segment `[0, r]` from `g` spent with systole at
/// least `delta`, sampled at spacing `step`.
fn thick_time(g: &Mat2f, r: f64, delta: f64, step: f64) -> f64 {
    let n = (r / step).ceil().max(1.0) as usize;
    let h = r / n as f64;
    let thick = (0..n)
        .filter(|&k| systole_value(base_of(&mul(g, &diag((k as f64 + 0.5) * h)))) >= delta)
        .count();
    thick as f64 / n as f64
}

/// Settings for the recurrence census.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CensusOptions {
    pub samples: usize,
    pub seed: u64,
    /// Thick set is `systole >= delta_thick`.
    pub delta_thick: f64,
    pub exec: Exec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub deck: Mat2i,
    pub word: ConjClassWord,
    pub events: u64,
    pub regular_events: u64,
    /// `mu(U) events / samples`
    pub measure: f64,
    pub axis_distance_to_center: f64,
}

impl Component {
    pub fn regular(&self) -> bool {
        2 * self.regular_events >= self.events
    }

    pub fn csv_row(&self) -> String {
        use crate::report::fmt9;
        format!(
            "{};{};{};{};{}",
            self.word.csv_word(),
            self.word.trace(),
            fmt9(self.word.teich_length()),
            self.events,
            fmt9(self.measure)
        )
    }
}

pub const CENSUS_CSV_HEADER: &str = "word;trace;length;count_of_events;est_component_measure";

#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub r: f64,
    pub mu: f64,
    pub samples: usize,
    pub events: u64,
    pub irregular_events: u64,
    pub components: Vec<Component>,
    pub regular_count: usize,
    /// `regular components / (mu e^{hR})`
    pub ratio: f64,
    /// Fraction of regular components with measure within a factor 3 of `mu e^{-hR}`.
    pub within_factor3: f64,
    pub warning: Option<String>,
}

/// Recurrence events from `U` back to `U` after time `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceEvent {
    pub start: Frame,
    pub deck: Mat2i,
    pub thick_fraction: f64,
}

pub fn recurrence_events(
    u: &impl FrameSet,
    r: f64,
    opts: &CensusOptions,
) -> Result<Vec<RecurrenceEvent>> {
    let per = opts.samples / CHUNKS;
    let at = diag(r);
    let chunks: Vec<Result<Vec<RecurrenceEvent>>> = opts.exec.map(CHUNKS, |c| {
        let mut rng = stream_rng(opts.seed, c as u64);
        let mut out = Vec::new();
        for _ in 0..per {
            let g = u.sample_matrix(&mut rng);
            let (h, gamma) = reduce_frame(&mul(&g, &at))?;
            if u.contains_matrix(&h) {
                out.push(RecurrenceEvent {
                    start: Frame {
                        g,
                        deck: MappingClass::identity(),
                    },
                    deck: gamma.psl_normalize(),
                    thick_fraction: thick_time(&g, r, opts.delta_thick, 0.05),
                });
            }
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c?);
    }
    Ok(all)
}

/// Census of the connected components of `g_R U ∩ U`, one per deck
/// element, with regularity decided by time spent in the thick set.
pub fn margulis_count(u: &impl FrameSet, r: f64, opts: &CensusOptions) -> Result<Census> {
    if r > 5.0 {
        return Err(Error::Resource {
            what: format!("census at R = {r}"),
            cap: 5,
            hint: "the expected number of components grows like e^{2R}".into(),
        });
    }
    let events = recurrence_events(u, r, opts)?;
    census_from_events(u, r, opts, &events)
}

/// Group recurrence events by deck element into components.
pub fn census_from_events(
    u: &impl FrameSet,
    r: f64,
    opts: &CensusOptions,
    events: &[RecurrenceEvent],
) -> Result<Census> {
    let mut groups: BTreeMap<[i64; 4], (u64, u64)> = BTreeMap::new();
    let mut irregular = 0u64;
    for e in events {
        let regular = e.thick_fraction >= 0.5;
        irregular += u64::from(!regular);
        let entry = groups.entry(e.deck.0).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += u64::from(regular);
    }
    let per = (opts.samples / CHUNKS * CHUNKS) as f64;
    let mut components = Vec::with_capacity(groups.len());
    for (k, (n, reg)) in groups {
        let deck = Mat2i(k);
        let gamma = MappingClass::from(deck);
        if !gamma.is_hyperbolic() {
            continue;
        }
        let orbit = close_orbit(&Frame::at(u.center(), 0.0), r, &gamma)?;
        components.push(Component {
            deck,
            word: orbit.word()?,
            events: n,
            regular_events: reg,
            measure: u.measure() * n as f64 / per,
            axis_distance_to_center: orbit.axis_distance,
        });
    }
    let h = crate::hyp::MODEL.h();
    let expected = u.measure() * (h * r).exp();
    let regular: Vec<&Component> = components.iter().filter(|c| c.regular()).collect();
    let target = u.measure() * (-h * r).exp();
    let within = regular
        .iter()
        .filter(|c| c.measure <= 3.0 * target && c.measure >= target / 3.0)
        .count();
    let warning =
        (regular.len() < 10).then(|| format!("only {} regular components observed", regular.len()));
    Ok(Census {
        r,
        mu: u.measure(),
        samples: opts.samples,
        events: events.len() as u64,
        irregular_events: irregular,
        regular_count: regular.len(),
        ratio: regular.len() as f64 / expected,
        within_factor3: if regular.is_empty() {
            0.0
        } else {
            within as f64 / regular.len() as f64
        },
        components,
        warning,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceRow {
    pub r: f64,
    pub fraction: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceReport {
    pub delta_thick: f64,
    pub theta: f64,
    pub rows: Vec<RecurrenceRow>,
    /// `-slope` of `ln fraction` against `R`.
    pub decay: f64,
}

/// Fraction of Haar-random orbits of length `r`, sampled at unit times,
/// that spend at least `theta r` outside the thick set `systole >= delta`.
pub fn recurrence_fraction(
    delta: f64,
    theta: f64,
    r: f64,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<Estimate> {
    if !(delta > 0.0 && delta < 1.0) || !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "need delta in (0,1) and theta in (0,1], got {delta}, {theta}"
        )));
    }
    let steps = r.floor().max(1.0) as usize;
    let per = (n / CHUNKS).max(1);
    let fracs = exec.map(CHUNKS, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let mut escaping = 0usize;
        for _ in 0..per {
            let q = sample_haar(&mut rng, HAAR_Y_MAX);
            let outside = (0..steps)
                .filter(|&k| systole_value(base_of(&mul(&q.g, &diag(k as f64 + 0.5)))) < delta)
                .count();
            escaping += usize::from(outside as f64 >= theta * steps as f64);
        }
        escaping as f64 / per as f64
    });
    Ok(from_batch_means(&fracs))
}

pub fn recurrence_decay(
    delta: f64,
    theta: f64,
    r_grid: &[f64],
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<RecurrenceReport> {
    let mut rows = Vec::with_capacity(r_grid.len());
    for (i, &r) in r_grid.iter().enumerate() {
        let fraction = recurrence_fraction(delta, theta, r, n, seed.wrapping_add(i as u64), exec)?;
        rows.push(RecurrenceRow { r, fraction });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|x| x.fraction.mean > 0.0)
        .map(|x| (x.r, x.fraction.mean.ln()))
        .collect();
    let decay = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        -linfit(&xs, &ys).slope
    } else {
        f64::NAN
    };
    Ok(RecurrenceReport {
        delta_thick: delta,
        theta,
        rows,
        decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp::polar_point;

    #[test]
    fn frames_point_where_they_say() {
        let c = ModelPoint::new(0.2, 1.4).unwrap();
        for th in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            let q = Frame::at(c, th);
            assert!((q.base().x() - c.x()).abs() < 1e-12 && (q.base().y() - c.y()).abs() < 1e-12);
            assert!((q.direction() - th).abs() < 1e-12);
            let p = q.flow_unreduced(0.7).base();
            let want = polar_point(c, 1.4, th);
            assert!((p.x() - want.x()).abs() < 1e-10 && (p.y() - want.y()).abs() < 1e-10);
        }
    }

    #[test]
    fn flow_up_the_imaginary_axis() {
        let q = Frame::at(ModelPoint::i(), 0.0);
        let p = q.flow_unreduced(1.3).base();
        assert!((p.y() - 2.6f64.exp()).abs() < 1e-9 && p.x().abs() < 1e-12);
        assert!((teich_dist(ModelPoint::i(), p) - 1.3).abs() < 1e-12);
        assert_eq!(flow(&q, 0.0).matrix(), q.matrix());
    }

    #[test]
    fn stable_leaf_contracts() {
        let q = Frame::at(ModelPoint::new(0.1, 1.2).unwrap(), 0.4);
        let rep = stable_contraction_check(&q, &stable_partner(&q, 0.3), &[0.0, 1.0, 2.0]).unwrap();
        assert!(rep.max_deviation < 1e-9);
        assert!((rep.separations[1] / rep.separations[0] - (-2f64).exp()).abs() < 1e-9);
        let off = Frame::at(ModelPoint::new(0.1, 1.2).unwrap(), 0.5);
        assert!(stable_contraction_check(&q, &off, &[1.0]).is_err());
    }

    #[test]
    fn box_measure() {
        let b = FrameBox::with_measure(ModelPoint::new(0.1, 1.5).unwrap(), 0.0, PI / 2.0, 0.02)
            .unwrap();
        assert!((b.measure() - 0.02).abs() < 1e-12);
        assert!(FrameBox::new(ModelPoint::new(0.45, 1.5).unwrap(), 0.2, 0.0, 1.0).is_err());
        assert!(FrameBox::new(ModelPoint::new(0.0, 1.5).unwrap(), 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn geodesic_distance() {
        // imaginary axis
        let z = ModelPoint::new(1.0, 1.0).unwrap();
        assert!((dist_to_geodesic(z, 0.0, 1e18) - 0.5 * 1f64.asinh()).abs() < 1e-9);
        assert!(dist_to_geodesic(ModelPoint::i(), -1.0, 1.0).abs() < 1e-15);
    }
}
