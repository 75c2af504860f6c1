//! Orbit points of SL(2,Z) in Teichmüller balls, the spread of thin orbits,
//! and the two-link chain bound.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::Mat2i;
use crate::hyp::{reduce_fast, teich_dist, ModelPoint, MODEL};
use crate::par::Exec;
use crate::stats::linfit;
use crate::torus::{extremal_length, systole, CurveClass};

/// Radius guard for orbit enumeration.
pub const TAU_MAX: f64 = 7.0;
/// Cap on listed orbit points.
pub const POINT_CAP: u64 = 50_000_000;
/// A curve is short when `sqrt(Ext) < EPS0`.
pub const EPS0: f64 = 0.5;

/// Hyperbolic length proxy `sqrt(Ext)` of the systole.
pub fn ell1(z: ModelPoint) -> f64 {
    systole(z).1.sqrt()
}

/// `G(Z) = max(1, 1 / ell1(Z))`
pub fn g_factor(z: ModelPoint) -> f64 {
    (1.0 / ell1(z)).max(1.0)
}

/// Short curve of `z`, if any.
pub fn short_curve(z: ModelPoint) -> Option<CurveClass> {
    let (c, e) = systole(z);
    (e.sqrt() < EPS0).then_some(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stabilizer {
    Trivial,
    /// `z = i`, fixed by `S`
    Order2,
    /// `z = (1 + i sqrt 3) / 2`, fixed by `[[1, -1], [1, 0]]`
    Order3,
}

/// Representative `y0 = g y` of the orbit, with `g` and the stabilizer of `y0`.
fn orbit_base(y: ModelPoint) -> Result<(ModelPoint, Mat2i, Stabilizer)> {
    let (z, g) = reduce_fast(y)?;
    let tol = 1e-9;
    if z.x().abs() < tol && (z.y() - 1.0).abs() < tol {
        return Ok((ModelPoint::i(), g, Stabilizer::Order2));
    }
    let h = 0.5 * 3f64.sqrt();
    if (z.x().abs() - 0.5).abs() < tol && (z.y() - h).abs() < tol {
        let g = if z.x() < 0.0 {
            Mat2i::translation(1).try_mul(&g)?
        } else {
            g
        };
        return Ok((ModelPoint::new(0.5, h)?, g, Stabilizer::Order3));
    }
    Ok((z, g, Stabilizer::Trivial))
}

fn normalized(c: i64, d: i64) -> (i64, i64) {
    if c < 0 || (c == 0 && d < 0) {
        (-c, -d)
    } else {
        (c, d)
    }
}

/// Keep one bottom row per coset of the stabilizer.
fn canonical_row(c: i64, d: i64, stab: Stabilizer) -> bool {
    let me = normalized(c, d);
    match stab {
        Stabilizer::Trivial => true,
        Stabilizer::Order2 => me <= normalized(d, -c),
        Stabilizer::Order3 => {
            let r1 = normalized(c + d, -c);
            let r2 = normalized(d, -c - d);
            me <= r1 && me <= r2
        }
    }
}

/// Some matrix with bottom row `(c, d)`.
fn complete_row(c: i64, d: i64) -> Mat2i {
    let e = c.extended_gcd(&d);
    // x c + y d = 1, take a = y, b = -x
    let (x, y) = if e.gcd == 1 { (e.x, e.y) } else { (-e.x, -e.y) };
    Mat2i([y, -x, c, d])
}

/// Visit every distinct orbit point `g Y` with `d_T(X, g Y) <= tau`, with
/// one group element `g` sending `Y` there. Bottom rows `(c, d)` are pruned
/// by `Im(g Y) >= Im(X) e^{-2 tau}`; for each row the admissible
/// translations form an interval.
pub fn for_each_orbit_point(
    x: ModelPoint,
    y: ModelPoint,
    tau: f64,
    exec: Exec,
    f: impl Fn(Mat2i, ModelPoint) + Sync + Send,
) -> Result<u64> {
    if !(0.0..=TAU_MAX).contains(&tau) {
        return Err(Error::InvalidInput(format!(
            "tau = {tau} outside [0, {TAU_MAX}]"
        )));
    }
    let (y0, to_base, stab) = orbit_base(y)?;
    let bound = (y0.y() / x.y()) * (2.0 * tau).exp();
    let c_max = (bound.sqrt() / y0.y()).floor() as i64;
    let s2 = 4.0 * x.y() * tau.sinh().powi(2);
    let counts = exec.map((c_max + 1) as usize, |ci| {
        let c = ci as i64;
        let mut n = 0u64;
        let rest = bound - (c as f64 * y0.y()).powi(2);
        if rest < 0.0 {
            return n;
        }
        let w = rest.sqrt();
        let center = -(c as f64) * y0.x();
        let (d_lo, d_hi) = if c == 0 {
            (1, 1)
        } else {
            ((center - w).ceil() as i64, (center + w).floor() as i64)
        };
        for d in d_lo..=d_hi {
            if c.gcd(&d) != 1 || !canonical_row(c, d, stab) {
                continue;
            }
            let g0 = complete_row(c, d);
            let w0 = y0.act(&g0);
            let q = s2 * w0.y() - (x.y() - w0.y()).powi(2);
            if q < 0.0 {
                continue;
            }
            let sq = q.sqrt();
            let k_lo = (x.x() - w0.x() - sq).ceil() as i64;
            let k_hi = (x.x() - w0.x() + sq).floor() as i64;
            for k in k_lo..=k_hi {
                let p = ModelPoint::raw(w0.x() + k as f64, w0.y());
                if teich_dist(x, p) <= tau {
                    let g = Mat2i::translation(k)
                        .checked_mul(&g0)
                        .and_then(|m| m.checked_mul(&to_base));
                    if let Some(g) = g {
                        f(g, p);
                    }
                    n += 1;
                }
            }
        }
        n
    });
    Ok(counts.iter().sum())
}

/// `|Gamma Y ∩ B(X, tau)|`
pub fn count_orbit_points(x: ModelPoint, y: ModelPoint, tau: f64, exec: Exec) -> Result<u64> {
    for_each_orbit_point(x, y, tau, exec, |_, _| {})
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub g: Mat2i,
    pub point: ModelPoint,
    /// Short curve of X that is also short at the point.
    pub stratum: Option<CurveClass>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPointSet {
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub tau: f64,
    pub points: Vec<OrbitPoint>,
}

impl OrbitPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn stratum_count(&self, shared: bool) -> usize {
        self.points
            .iter()
            .filter(|p| p.stratum.is_some() == shared)
            .count()
    }
}

pub fn orbit_points(x: ModelPoint, y: ModelPoint, tau: f64) -> Result<OrbitPointSet> {
    let n = count_orbit_points(x, y, tau, Exec::Parallel)?;
    if n > POINT_CAP {
        return Err(Error::Resource {
            what: format!("{n} orbit points"),
            cap: POINT_CAP,
            hint: "use count_orbit_points".into(),
        });
    }
    let found = std::sync::Mutex::new(Vec::with_capacity(n as usize));
    for_each_orbit_point(x, y, tau, Exec::Sequential, |g, p| {
        found.lock().expect("poisoned").push((g, p))
    })?;
    let short = short_curve(x);
    let mut points: Vec<OrbitPoint> = found
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|(g, point)| {
            let stratum = short.filter(|c| extremal_length(*c, point).sqrt() < EPS0);
            OrbitPoint { g, point, stratum }
        })
        .collect();
    points.sort_by(|a, b| {
        a.point
            .x()
            .total_cmp(&b.point.x())
            .then(a.point.y().total_cmp(&b.point.y()))
    });
    Ok(OrbitPointSet { x, y, tau, points })
}

/// Orbit points of `Y` within `c2` of `Y` itself.
pub fn spread_count(y: ModelPoint, c2: f64) -> Result<u64> {
    if !(c2 > 0.0 && c2 <= 2.0) {
        return Err(Error::InvalidInput(format!("c2 = {c2} outside (0, 2]")));
    }
    count_orbit_points(y, y, c2, Exec::Sequential)
}

/// Exact quotient distance when it is at most `max`.
pub fn quotient_dist_exact(a: ModelPoint, b: ModelPoint, max: f64) -> Result<Option<f64>> {
    let best = std::sync::Mutex::new(f64::INFINITY);
    for_each_orbit_point(a, b, max, Exec::Sequential, |_, p| {
        let d = teich_dist(a, p);
        let mut m = best.lock().expect("poisoned");
        if d < *m {
            *m = d;
        }
    })?;
    let d = best.into_inner().expect("poisoned");
    Ok(d.is_finite().then_some(d))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainLink {
    pub d: f64,
    pub m: i32,
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    /// Number of short curves of X.
    pub k: usize,
    pub s: usize,
    pub tau: f64,
    /// `tau_i = -log ell_i(X)` for the short curves.
    pub tau_i: Vec<f64>,
    pub links: Vec<ChainLink>,
    /// `|F(X, Y, B)| / (e^{(h - |B|) tau} G(X) G(Y))` for the stratum `B`
    /// of the short curves of X.
    pub stratum_ratio: f64,
    pub final_ratio: f64,
}

/// Chain decomposition of the ball for the model, where at most one curve is
/// short. With `k` short curves at X the ball splits at `tau_1 = -log ell_1`
/// into links of lengths `d_1 = min(tau_1, tau)` and `d_2 = tau - d_1`,
/// with exponents `m_i = h - k + i - 1`. The first link keeps the short
/// curve, so only the stratum sharing it is counted there; the last link
/// counts everything.
pub fn chain_bound_audit(x: ModelPoint, y: ModelPoint, tau: f64) -> Result<ChainReport> {
    let h = MODEL.h;
    let gx = g_factor(x);
    let gy = g_factor(y);
    let short = short_curve(x);
    let k = usize::from(short.is_some());
    let set = orbit_points(x, y, tau)?;
    let total = set.len() as u64;
    let stratum = set.stratum_count(true) as u64;
    let mut links = Vec::new();
    let mut tau_i = Vec::new();
    if let Some(c) = short {
        let t1 = -extremal_length(c, x).sqrt().ln();
        tau_i.push(t1);
        let d1 = t1.min(tau);
        let d2 = tau - d1;
        let m1 = h as i32 - k as i32;
        let m2 = m1 + 1;
        let near = set
            .points
            .iter()
            .filter(|p| p.stratum.is_some() && teich_dist(x, p.point) <= d1)
            .count() as u64;
        let b1 = (m1 as f64 * d1).exp() * gx * gy;
        links.push(ChainLink {
            d: d1,
            m: m1,
            count: near,
            bound: b1,
            ratio: near as f64 / b1,
        });
        let b2 = (m1 as f64 * d1 + m2 as f64 * d2).exp() * gx * gy;
        links.push(ChainLink {
            d: d2,
            m: m2,
            count: total,
            bound: b2,
            ratio: total as f64 / b2,
        });
    } else {
        let b = (h as f64 * tau).exp() * gx * gy;
        links.push(ChainLink {
            d: tau,
            m: h as i32,
            count: total,
            bound: b,
            ratio: total as f64 / b,
        });
    }
    let stratum_bound = ((h as f64 - k as f64) * tau).exp() * gx * gy;
    let final_ratio = links.last().map_or(f64::NAN, |l| l.ratio);
    Ok(ChainReport {
        k,
        s: k,
        tau,
        tau_i,
        links,
        stratum_ratio: if k == 1 {
            stratum as f64 / stratum_bound
        } else {
            f64::NAN
        },
        final_ratio,
    })
}

/// Points of a fixed net of the fundamental domain: rows `2 spacing` apart in
/// `ln y`, and within a row as many evenly spaced points as fit at
/// hyperbolic spacing `2 spacing`, at least one.
pub fn quotient_net(spacing: f64, y_top: f64) -> Vec<ModelPoint> {
    let h = 2.0 * spacing;
    let mut out = Vec::new();
    let mut t = (0.5 * 3f64.sqrt()).ln() + 0.5 * h;
    while t <= y_top.ln() {
        let y = t.exp();
        let n = ((1.0 / (h * y)).floor() as usize).max(1);
        for j in 0..n {
            let x = -0.5 + (j as f64 + 0.5) / n as f64;
            if x * x + y * y >= 1.0 {
                out.push(ModelPoint::raw(x, y));
            }
        }
        t += h;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetImageReport {
    pub tau_grid: Vec<f64>,
    pub counts: Vec<u64>,
    /// Slope of `ln count` against `ln tau`.
    pub exponent: f64,
}

/// Number of quotient-net points within quotient distance `tau` of X, i.e.
/// net representatives of the image of `B(X, tau)` in moduli space.
pub fn net_image_audit(
    x: ModelPoint,
    tau_grid: &[f64],
    spacing: f64,
    exec: Exec,
) -> Result<NetImageReport> {
    let tau_max = tau_grid.iter().cloned().fold(0.0, f64::max);
    let (xr, _) = reduce_fast(x)?;
    let net = quotient_net(spacing, xr.y() * (2.0 * tau_max).exp() * 1.01);
    let dists: Vec<Result<Option<f64>>> =
        exec.map_slice(&net, |p| quotient_dist_exact(*p, xr, tau_max));
    let dists: Vec<Option<f64>> = dists.into_iter().collect::<Result<_>>()?;
    let counts: Vec<u64> = tau_grid
        .iter()
        .map(|&t| dists.iter().filter(|d| d.is_some_and(|d| d <= t)).count() as u64)
        .collect();
    let pts: Vec<(f64, f64)> = tau_grid
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&t, &c)| (t.ln(), (c as f64).ln()))
        .collect();
    let exponent = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        linfit(&xs, &ys).slope
    } else {
        f64::NAN
    };
    Ok(NetImageReport {
        tau_grid: tau_grid.to_vec(),
        counts,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn includes_the_base_point() {
        let x = ModelPoint::new(0.2, 1.7).unwrap();
        let set = orbit_points(x, x, 0.0).unwrap();
        assert_eq!(set.len(), 1);
        assert!(teich_dist(set.points[0].point, x) < 1e-9);
    }

    #[test]
    fn group_elements_send_y_to_the_point() {
        let x = ModelPoint::new(0.1, 1.3).unwrap();
        let y = ModelPoint::new(2.3, 0.4).unwrap();
        let set = orbit_points(x, y, 2.0).unwrap();
        assert!(set.len() > 10);
        for p in &set.points {
            let q = y.act(&p.g);
            assert!(teich_dist(q, p.point) < 1e-9);
        }
    }

    #[test]
    fn stabilizers_are_folded() {
        // i and rho: every point listed once
        for y in [
            ModelPoint::i(),
            ModelPoint::new(-0.5, 0.5 * 3f64.sqrt()).unwrap(),
        ] {
            let set = orbit_points(ModelPoint::i(), y, 2.5).unwrap();
            for w in set.points.windows(2) {
                assert!(teich_dist(w[0].point, w[1].point) > 1e-6);
            }
        }
    }

    #[test]
    fn thin_spread_is_about_g_squared() {
        let y = ModelPoint::imag(100.0).unwrap();
        let n = spread_count(y, 0.5).unwrap() as f64;
        assert!((25.0..=400.0).contains(&n), "{n}");
        assert!(spread_count(ModelPoint::i(), 0.5).unwrap() <= 10);
    }

    #[test]
    fn chain_lengths_add_up() {
        let x = ModelPoint::imag(50.0).unwrap();
        let rep = chain_bound_audit(x, ModelPoint::i(), 3.0).unwrap();
        let sum: f64 = rep.links.iter().map(|l| l.d).sum();
        assert!((sum - 3.0).abs() < 1e-12);
        assert_eq!(rep.k, 1);
        assert_eq!(
            rep.links.iter().map(|l| l.m).collect::<Vec<_>>(),
            vec![1, 2]
        );
    }
}
