//! Separated nets, random-walk trajectories on them, and the geodesic to
//! trajectory discretization.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hyp::{reduce_point, sample_ball, teich_dist, ModelPoint};
use crate::mcg::{axis_endpoints, axis_point, GeodesicClass};
use crate::par::{stream_rng, Exec};
use crate::stats::{batch_means, Estimate};
use crate::torus::{bias_eval, systole_value, BiasParams};

/// Cell height in `ln y` and width in units of `y` for the spatial index.
const CELL_H: f64 = 2.0;
const CELL_W: f64 = 8.0;

type CellKey = (i32, i64);

fn cell_of(x: f64, y: f64) -> CellKey {
    let row = (y.ln() / CELL_H).floor() as i32;
    let col = (x / (CELL_W * (row as f64 * CELL_H).exp())).floor() as i64;
    (row, col)
}

/// Cells that may hold points within hyperbolic distance `d` of `(x, y)`.
fn cells_near(x: f64, y: f64, d: f64, mut visit: impl FnMut(CellKey)) {
    let ly = y.ln();
    let r0 = ((ly - d) / CELL_H).floor() as i32;
    let r1 = ((ly + d) / CELL_H).floor() as i32;
    let sh = 2.0 * (0.5 * d).sinh();
    for row in r0..=r1 {
        let base = (row as f64 * CELL_H).exp();
        let hw = sh * (y * base * CELL_H.exp()).sqrt();
        let w = CELL_W * base;
        let c0 = ((x - hw) / w).floor() as i64;
        let c1 = ((x + hw) / w).floor() as i64;
        for col in c0..=c1 {
            visit((row, col));
        }
    }
}

/// Region covered by a net.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub center: ModelPoint,
    pub radius: f64,
}

/// `(c1, c2)`-separated net of a Teichmüller ball.
#[derive(Clone, Debug)]
pub struct Net {
    points: Vec<ModelPoint>,
    c1: f64,
    c2: f64,
    region: Region,
    /// Sorted cell keys with the range of `order` they own.
    cells: Vec<(CellKey, u32, u32)>,
    order: Vec<u32>,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ModelPoint] {
        &self.points
    }

    pub fn point(&self, id: u32) -> ModelPoint {
        self.points[id as usize]
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn region(&self) -> Region {
        self.region
    }

    fn cell_slice(&self, key: CellKey) -> &[u32] {
        match self.cells.binary_search_by(|c| c.0.cmp(&key)) {
            Ok(i) => &self.order[self.cells[i].1 as usize..self.cells[i].2 as usize],
            Err(_) => &[],
        }
    }

    /// Visit ids within Teichmüller distance `r` of `z`.
    pub fn for_each_within(&self, z: ModelPoint, r: f64, mut f: impl FnMut(u32, f64)) {
        cells_near(z.x(), z.y(), 2.0 * r, |key| {
            for &id in self.cell_slice(key) {
                let d = teich_dist(z, self.points[id as usize]);
                if d <= r {
                    f(id, d);
                }
            }
        });
    }

    pub fn within(&self, z: ModelPoint, r: f64) -> Vec<u32> {
        let mut v = Vec::new();
        self.for_each_within(z, r, |id, _| v.push(id));
        v.sort_unstable();
        v
    }

    pub fn count_within(&self, z: ModelPoint, r: f64) -> usize {
        let mut n = 0;
        self.for_each_within(z, r, |_, _| n += 1);
        n
    }

    /// Nearest net point within `r_max`, if any.
    pub fn nearest(&self, z: ModelPoint, r_max: f64) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        self.for_each_within(z, r_max, |id, d| {
            if best.is_none_or(|(bid, bd)| d < bd || (d == bd && id < bid)) {
                best = Some((id, d));
            }
        });
        best
    }
}

/// Budget on candidate points examined while building a net.
pub const NET_CANDIDATE_BUDGET: u64 = 200_000_000;

/// Greedy net of `B(center, radius)`: candidates come from a jittered grid
/// in horocyclic coordinates with spacing `c1/2` and are kept when no kept
/// point lies within `c1`. Coverage is then probed at 1000 random points.
pub fn build_net(center: ModelPoint, radius: f64, c1: f64, c2: f64, seed: u64) -> Result<Net> {
    if !(c1 > 0.0 && c1 <= c2) {
        return Err(Error::InvalidInput(format!(
            "need 0 < c1 <= c2, got c1 = {c1}, c2 = {c2}"
        )));
    }
    if !(0.0..=8.0).contains(&radius) {
        return Err(Error::InvalidInput(format!(
            "net radius {radius} outside [0, 8]"
        )));
    }
    let rho = 2.0 * radius;
    let step = c1; // hyperbolic spacing c1_hyp / 2 = c1
    let area = crate::hyp::ball_area(radius);
    let projected = (area / (step * step)) as u64;
    if projected > NET_CANDIDATE_BUDGET {
        return Err(Error::Resource {
            what: format!("net candidates for radius {radius}"),
            cap: NET_CANDIDATE_BUDGET,
            hint: "use a smaller radius or larger c1".into(),
        });
    }
    let mut rng = stream_rng(seed, 0x4e45);
    let mut points = vec![center];
    let mut grid: HashMap<CellKey, Vec<u32>> = HashMap::new();
    grid.entry(cell_of(center.x(), center.y()))
        .or_default()
        .push(0);
    let (xc, yc) = (center.x(), center.y());
    let ch = rho.cosh() - 1.0;
    let rows = (2.0 * rho / step).ceil() as i64 + 1;
    let sep_hyp = 2.0 * c1;
    for r in 0..rows {
        let t = yc.ln() - rho + (r as f64 + rng.random::<f64>()) * step;
        let y = t.exp();
        let w2 = 2.0 * y * yc * ch - (y - yc).powi(2);
        if w2 <= 0.0 {
            continue;
        }
        let half = w2.sqrt();
        let dx = step * y;
        let mut x = xc - half + rng.random::<f64>() * dx;
        while x <= xc + half {
            let xj = x + (rng.random::<f64>() - 0.5) * 0.5 * dx;
            let yj = y * ((rng.random::<f64>() - 0.5) * 0.5 * step).exp();
            x += dx;
            let cand = ModelPoint::raw(xj, yj);
            if teich_dist(center, cand) > radius {
                continue;
            }
            let mut clash = false;
            cells_near(xj, yj, sep_hyp, |key| {
                if clash {
                    return;
                }
                if let Some(ids) = grid.get(&key) {
                    clash = ids
                        .iter()
                        .any(|&id| teich_dist(cand, points[id as usize]) < c1);
                }
            });
            if !clash {
                let id = points.len() as u32;
                points.push(cand);
                grid.entry(cell_of(xj, yj)).or_default().push(id);
            }
        }
    }
    let mut cells: Vec<(CellKey, u32, u32)> = Vec::with_capacity(grid.len());
    let mut order = Vec::with_capacity(points.len());
    let mut keys: Vec<CellKey> = grid.keys().copied().collect();
    keys.sort_unstable();
    for k in keys {
        let ids = &grid[&k];
        let start = order.len() as u32;
        order.extend_from_slice(ids);
        cells.push((k, start, order.len() as u32));
    }
    drop(grid);
    let net = Net {
        points,
        c1,
        c2,
        region: Region { center, radius },
        cells,
        order,
    };
    let mut probe_rng = stream_rng(seed, 0x5052);
    for _ in 0..1000 {
        let p = sample_ball(center, radius, &mut probe_rng);
        if net.nearest(p, c2).is_none() {
            return Err(Error::Resource {
                what: format!(
                    "net coverage: probe ({}, {}) farther than c2 = {c2}",
                    p.x(),
                    p.y()
                ),
                cap: 1000,
                hint: "raise c2 relative to c1".into(),
            });
        }
    }
    Ok(net)
}

/// Sequence of net nodes with steps at most `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub nodes: Vec<u32>,
    pub tau: f64,
}

impl Trajectory {
    pub fn is_valid(&self, net: &Net) -> bool {
        self.nodes
            .windows(2)
            .all(|w| teich_dist(net.point(w[0]), net.point(w[1])) <= self.tau + 1e-12)
    }

    /// Debug dump: node ids separated by spaces.
    pub fn dump(&self) -> String {
        self.nodes
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Quotient distance estimate: both points reduced, then the best of a
/// fixed set of nearby group elements. Exact for points high in the cusp.
pub fn quotient_dist(a: ModelPoint, b: ModelPoint) -> f64 {
    use crate::group::Mat2i;
    let a = reduce_point(a);
    let b = reduce_point(b);
    let t = |n| Mat2i::translation(n);
    let mut best = f64::INFINITY;
    let gens = [
        Mat2i::IDENTITY,
        t(1),
        t(-1),
        Mat2i::S,
        t(1).checked_mul(&Mat2i::S).unwrap(),
        t(-1).checked_mul(&Mat2i::S).unwrap(),
        Mat2i::S.checked_mul(&t(1)).unwrap(),
        Mat2i::S.checked_mul(&t(-1)).unwrap(),
        t(1).checked_mul(&Mat2i::S)
            .unwrap()
            .checked_mul(&t(1))
            .unwrap(),
        t(-1)
            .checked_mul(&Mat2i::S)
            .unwrap()
            .checked_mul(&t(-1))
            .unwrap(),
    ];
    for g in gens {
        best = best.min(teich_dist(a, b.act(&g)));
    }
    best
}

/// Thin filter: every node has systole at most `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThinFilter {
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepCounts {
    pub steps: usize,
    pub all: f64,
    pub filtered: f64,
    pub almost_closed: f64,
    /// Standard errors, zero in exhaustive mode.
    pub se: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryFamily {
    pub base: ModelPoint,
    pub start: u32,
    pub tau: f64,
    pub closed_tol: f64,
    pub exhaustive: bool,
    pub per_step: Vec<StepCounts>,
    pub expanded: u64,
}

impl TrajectoryFamily {
    /// Least-squares slope of `ln count` against `R = n tau`.
    pub fn growth(&self, pick: impl Fn(&StepCounts) -> f64) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .per_step
            .iter()
            .filter(|s| s.steps >= 1 && pick(s) > 0.0)
            .map(|s| (s.steps as f64 * self.tau, pick(s).ln()))
            .collect();
        if pts.len() < 2 {
            return f64::NEG_INFINITY;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        crate::stats::linfit(&xs, &ys).slope
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WalkOptions {
    pub tau: f64,
    pub n_steps: usize,
    pub filter: Option<ThinFilter>,
    pub closed_tol: f64,
    pub cap: u64,
}

impl WalkOptions {
    pub fn new(tau: f64, n_steps: usize, filter: Option<ThinFilter>, c2: f64) -> Self {
        WalkOptions {
            tau,
            n_steps,
            filter,
            closed_tol: 2.0 * c2 + 0.1,
            cap: 10_000_000,
        }
    }
}

/// Exact trajectory counts from the net point nearest `x`, by dynamic
/// programming over path counts per node.
pub fn count_trajectories(
    net: &Net,
    x: ModelPoint,
    opts: &WalkOptions,
) -> Result<TrajectoryFamily> {
    let (start, _) = net
        .nearest(x, net.c2())
        .ok_or_else(|| Error::Precondition("base point is not covered by the net".into()))?;
    let thin = |id: u32| match opts.filter {
        Some(f) => systole_value(net.point(id)) <= f.delta,
        None => true,
    };
    let closed = |id: u32| quotient_dist(net.point(id), x) <= opts.closed_tol;
    // Frontiers: path counts per node, unrestricted and filtered.
    let mut all: HashMap<u32, u128> = HashMap::from([(start, 1)]);
    let mut filt: HashMap<u32, u128> = if thin(start) {
        HashMap::from([(start, 1)])
    } else {
        HashMap::new()
    };
    let mut per_step = vec![StepCounts {
        steps: 0,
        all: 1.0,
        filtered: if thin(start) { 1.0 } else { 0.0 },
        almost_closed: if thin(start) && closed(start) {
            1.0
        } else {
            0.0
        },
        se: [0.0; 3],
    }];
    let mut expanded = 0u64;
    let mut thin_cache: HashMap<u32, (bool, bool)> = HashMap::new();
    for step in 1..=opts.n_steps {
        expanded += all.len() as u64;
        if expanded > opts.cap {
            return Err(Error::Resource {
                what: format!("exhaustive trajectory count at step {step}"),
                cap: opts.cap,
                hint: "switch to sampling mode".into(),
            });
        }
        let last = step == opts.n_steps;
        let mut next_all: HashMap<u32, u128> = HashMap::new();
        let mut total_all: u128 = 0;
        let mut ids: Vec<u32> = all.keys().copied().collect();
        ids.sort_unstable();
        for &u in &ids {
            let c = all[&u];
            net.for_each_within(net.point(u), opts.tau, |v, _| {
                total_all += c;
                if !last {
                    *next_all.entry(v).or_insert(0) += c;
                }
            });
        }
        let mut next_f: HashMap<u32, u128> = HashMap::new();
        let (mut total_f, mut total_c): (u128, u128) = (0, 0);
        let mut fids: Vec<u32> = filt.keys().copied().collect();
        fids.sort_unstable();
        for &u in &fids {
            let c = filt[&u];
            net.for_each_within(net.point(u), opts.tau, |v, _| {
                let (is_thin, is_closed) =
                    *thin_cache.entry(v).or_insert_with(|| (thin(v), closed(v)));
                if is_thin {
                    total_f += c;
                    if is_closed {
                        total_c += c;
                    }
                    if !last {
                        *next_f.entry(v).or_insert(0) += c;
                    }
                }
            });
        }
        per_step.push(StepCounts {
            steps: step,
            all: total_all as f64,
            filtered: total_f as f64,
            almost_closed: total_c as f64,
            se: [0.0; 3],
        });
        all = next_all;
        filt = next_f;
    }
    Ok(TrajectoryFamily {
        base: x,
        start,
        tau: opts.tau,
        closed_tol: opts.closed_tol,
        exhaustive: true,
        per_step,
        expanded,
    })
}

/// Knuth-style unbiased estimates of the same counts from random walks that
/// pick uniformly among admissible neighbours and carry the product of the
/// branching numbers.
pub fn sample_trajectories(
    net: &Net,
    x: ModelPoint,
    opts: &WalkOptions,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<TrajectoryFamily> {
    let (start, _) = net
        .nearest(x, net.c2())
        .ok_or_else(|| Error::Precondition("base point is not covered by the net".into()))?;
    let thin = |id: u32| match opts.filter {
        Some(f) => systole_value(net.point(id)) <= f.delta,
        None => true,
    };
    let n = opts.n_steps;
    // per sample: [all_k, filtered_k, closed_k] for k = 0..=n
    let runs = exec.map(samples, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let mut out = vec![[0.0f64; 3]; n + 1];
        // unrestricted walk
        let (mut u, mut w) = (start, 1.0);
        out[0][0] = 1.0;
        for row in out.iter_mut().skip(1) {
            let nb = net.within(net.point(u), opts.tau);
            w *= nb.len() as f64;
            row[0] = w;
            u = nb[rng.random_range(0..nb.len())];
        }
        // filtered walk
        if thin(start) {
            let (mut u, mut w) = (start, 1.0);
            out[0][1] = 1.0;
            out[0][2] = f64::from(u8::from(
                quotient_dist(net.point(start), x) <= opts.closed_tol,
            ));
            for row in out.iter_mut().skip(1) {
                let nb: Vec<u32> = net
                    .within(net.point(u), opts.tau)
                    .into_iter()
                    .filter(|&v| thin(v))
                    .collect();
                if nb.is_empty() {
                    break;
                }
                w *= nb.len() as f64;
                row[1] = w;
                // closed fraction among admissible endpoints, exact per step
                let closed = nb
                    .iter()
                    .filter(|&&v| quotient_dist(net.point(v), x) <= opts.closed_tol)
                    .count();
                row[2] = w * closed as f64 / nb.len() as f64;
                u = nb[rng.random_range(0..nb.len())];
            }
        }
        out
    });
    let per_step = (0..=n)
        .map(|k| {
            let est: Vec<Estimate> = (0..3)
                .map(|c| batch_means(&runs.iter().map(|r| r[k][c]).collect::<Vec<_>>(), 20))
                .collect();
            StepCounts {
                steps: k,
                all: est[0].mean,
                filtered: est[1].mean,
                almost_closed: est[2].mean,
                se: [est[0].se, est[1].se, est[2].se],
            }
        })
        .collect();
    Ok(TrajectoryFamily {
        base: x,
        start,
        tau: opts.tau,
        closed_tol: opts.closed_tol,
        exhaustive: false,
        per_step,
        expanded: 0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QStep {
    pub steps: usize,
    pub q: f64,
    /// `q(r + tau) / q(r)`
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QAudit {
    pub steps: Vec<QStep>,
    /// Bound on one step: `M max(1, e^{s c1} c(tau + c1/2))`.
    pub one_step_bound: f64,
    /// `M = area(B(tau + c1/2)) / area(B(c1/2))`, the packing bound on branching.
    pub packing: f64,
    /// Contraction factor used, `c(tau + c1/2)`.
    pub contraction: f64,
    /// Slope of `ln q` against `n tau`.
    pub exponent: f64,
}

/// `q(r) = sum of u over endpoints of thin-filtered trajectories with r
/// steps`, with the per-step bound that follows from packing and the
/// contraction of the bias: a net point's `f_1` is at most `e^{s c1}` times
/// its average over the disjoint ball of radius `c1/2` around it.
pub fn q_recursion_audit(
    net: &Net,
    x: ModelPoint,
    tau: f64,
    n_steps: usize,
    delta: f64,
    params: &BiasParams,
    contraction_at: impl Fn(f64) -> f64,
) -> Result<QAudit> {
    if systole_value(x) >= delta {
        return Err(Error::Precondition(
            "base point must lie in the thin part".into(),
        ));
    }
    let (start, _) = net
        .nearest(x, net.c2())
        .ok_or_else(|| Error::Precondition("base point is not covered by the net".into()))?;
    let u = |id: u32| bias_eval(net.point(id), params).u;
    let thin = |id: u32| systole_value(net.point(id)) <= delta;
    let c1 = net.c1();
    let packing = crate::hyp::ball_area(tau + 0.5 * c1) / crate::hyp::ball_area(0.5 * c1);
    let contraction = contraction_at(tau + 0.5 * c1);
    let one_step_bound = packing * (params.s * c1).exp().mul_add(contraction, 0.0).max(1.0);
    let mut frontier: HashMap<u32, f64> = HashMap::from([(start, 1.0)]);
    let q0 = bias_eval(x, params).u;
    let mut steps = vec![QStep {
        steps: 0,
        q: q0,
        ratio: f64::NAN,
        bound: f64::NAN,
    }];
    // node 0 is the net point nearest x; q is tracked from it
    let mut q_prev = u(start);
    for step in 1..=n_steps {
        let mut next: HashMap<u32, f64> = HashMap::new();
        let mut ids: Vec<u32> = frontier.keys().copied().collect();
        ids.sort_unstable();
        for &a in &ids {
            let c = frontier[&a];
            net.for_each_within(net.point(a), tau, |v, _| {
                if thin(v) {
                    *next.entry(v).or_insert(0.0) += c;
                }
            });
        }
        let q: f64 = {
            let mut keys: Vec<u32> = next.keys().copied().collect();
            keys.sort_unstable();
            keys.iter().map(|&v| next[&v] * u(v)).sum()
        };
        steps.push(QStep {
            steps: step,
            q,
            ratio: q / q_prev,
            bound: one_step_bound,
        });
        q_prev = q;
        frontier = next;
    }
    let xs: Vec<f64> = steps.iter().skip(1).map(|s| s.steps as f64 * tau).collect();
    let ys: Vec<f64> = steps.iter().skip(1).map(|s| s.q.ln()).collect();
    let exponent = if xs.len() >= 2 {
        crate::stats::linfit(&xs, &ys).slope
    } else {
        f64::NAN
    };
    Ok(QAudit {
        steps,
        one_step_bound,
        packing,
        contraction,
        exponent,
    })
}

/// Mark points `length/n` apart along the axis of the class and snap each to
/// its nearest net point. The spacing is chosen so that snapped steps stay
/// within `tau`: `n = ceil(length / (tau - 2 c2))`.
pub fn discretize_geodesic(class: &GeodesicClass, net: &Net, tau: f64) -> Result<Trajectory> {
    let c2 = net.c2();
    if tau <= 2.0 * c2 {
        return Err(Error::Precondition(format!(
            "tau = {tau} must exceed 2 c2 = {}",
            2.0 * c2
        )));
    }
    let m = class.word.matrix();
    let (xm, xp) = axis_endpoints(&m)?;
    let len = class.word.teich_length();
    // start at the axis point closest to the net center
    let center = net.region().center;
    let s0 = golden_min(|s| teich_dist(axis_point(xm, xp, s), center), -20.0, 20.0);
    let n = (len / (tau - 2.0 * c2)).ceil().max(1.0) as usize;
    let mut nodes = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let p = axis_point(xm, xp, s0 + len * k as f64 / n as f64);
        let (id, _) = net
            .nearest(p, c2)
            .ok_or(Error::CoverageGap { x: p.x(), y: p.y() })?;
        nodes.push(id);
    }
    Ok(Trajectory { nodes, tau })
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_zero_net_is_the_center() {
        let c = ModelPoint::new(0.3, 2.0).unwrap();
        let net = build_net(c, 0.0, 1.0, 2.0, 1).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.point(0), c);
    }

    #[test]
    fn net_is_separated_and_indexed() {
        let net = build_net(ModelPoint::i(), 3.0, 1.0, 2.0, 4).unwrap();
        let pts = net.points();
        for (i, p) in pts.iter().enumerate() {
            let mut brute: Vec<u32> = (0..pts.len() as u32)
                .filter(|&j| teich_dist(*p, pts[j as usize]) <= 2.0)
                .collect();
            brute.sort_unstable();
            assert_eq!(net.within(*p, 2.0), brute);
            for q in &pts[..i] {
                assert!(teich_dist(*p, *q) >= 1.0);
            }
        }
    }

    #[test]
    fn one_step_count_is_the_ball_count() {
        let net = build_net(ModelPoint::i(), 4.0, 1.0, 2.0, 9).unwrap();
        let opts = WalkOptions::new(2.0, 1, None, 2.0);
        let fam = count_trajectories(&net, ModelPoint::i(), &opts).unwrap();
        assert_eq!(
            fam.per_step[1].all as usize,
            net.count_within(ModelPoint::i(), 2.0)
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_net(ModelPoint::i(), 1.0, 2.0, 1.0, 1).is_err());
        assert!(build_net(ModelPoint::i(), 9.0, 1.0, 2.0, 1).is_err());
    }
}
