//! Product regions `(H^2)^j` with the sup metric, the multi-curve bias
//! `f_j` and Monte-Carlo verification of its contraction under `A_tau`.

use rand::Rng;

use crate::avg::{ball_average, Sampling};
use crate::error::{Error, Result};
use crate::hyp::{direction_to, teich_dist, ModelPoint};
use crate::par::{stream_rng, Exec};
use crate::stats::{linfit_weighted, Estimate, LinFit};
use crate::torus::{bias_eval, in_region_w, systole, BiasParams};

pub const DEFAULT_M_MAX: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    factors: Vec<ModelPoint>,
}

impl ProductPoint {
    pub fn new(factors: Vec<ModelPoint>, m_max: usize) -> Result<Self> {
        if factors.is_empty() || factors.len() > m_max {
            return Err(Error::Dimension {
                expected: m_max,
                got: factors.len(),
            });
        }
        Ok(ProductPoint { factors })
    }

    pub fn factors(&self) -> &[ModelPoint] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }
}

pub fn sup_dist(a: &ProductPoint, b: &ProductPoint) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.factors
        .iter()
        .zip(&b.factors)
        .map(|(p, q)| teich_dist(*p, *q))
        .fold(0.0, f64::max))
}

/// Membership in the sup-metric ball, which is the product of factor balls.
pub fn in_product_ball(center: &ProductPoint, r: f64, p: &ProductPoint) -> Result<bool> {
    Ok(sup_dist(center, p)? <= r)
}

/// `ln f_j = s sum ln eps_i - 2 s sum ln flatlen_k`, `flatlen^2` = systole.
pub fn ln_f_product(j: usize, point: &ProductPoint, params: &BiasParams) -> Result<f64> {
    if j != point.dim() || j > params.m {
        return Err(Error::Dimension {
            expected: j,
            got: point.dim(),
        });
    }
    let eps: f64 = (1..=j).map(|i| params.ln_eps(i)).sum();
    let lens: f64 = point.factors.iter().map(|z| systole(*z).1.ln()).sum();
    Ok(params.s * (eps - lens))
}

pub fn f_product(j: usize, point: &ProductPoint, params: &BiasParams) -> Result<f64> {
    ln_f_product(j, point, params).map(f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFunction {
    Bias,
    Constant,
}

#[derive(Clone, Debug)]
pub struct ContractionConfig {
    pub j: usize,
    pub s: f64,
    pub tau_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub exec: Exec,
    pub function: TestFunction,
}

impl ContractionConfig {
    pub fn new(j: usize, tau_grid: Vec<f64>, samples: usize, seed: u64) -> Self {
        ContractionConfig {
            j,
            s: 0.5,
            tau_grid,
            samples,
            seed,
            exec: Exec::Parallel,
            function: TestFunction::Bias,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub j: usize,
    pub tau_grid: Vec<f64>,
    /// `(A_tau f_j)/f_j`
    pub ratios: Vec<Estimate>,
    /// Least-squares slope of `ln ratio` against tau.
    pub raw_fit: LinFit,
    /// Slope after dividing out the `tau^j` prefactor of `C_j tau^j e^{-j tau}`.
    pub fit: LinFit,
    /// `C_j = max_tau (ratio + 3 se) / (tau^j e^{-j tau})`
    pub c_const: f64,
    pub samples: usize,
    pub seed: u64,
}

impl InequalityReport {
    pub fn c_j(&self, tau: f64) -> f64 {
        self.c_const * tau.powi(self.j as i32) * (-(self.j as f64) * tau).exp()
    }
}

/// Base point whose factor balls of radius `tau_max` stay in the cusp chart
/// `y >= 2` where the systole is `1/y`.
pub fn deep_base_point(j: usize, tau_max: f64) -> ProductPoint {
    let factors = (0..j)
        .map(|k| ModelPoint::raw(0.1 * k as f64, (2.0 * tau_max + 6.0 + k as f64).exp()))
        .collect();
    ProductPoint { factors }
}

fn check_cusp_chart(point: &ProductPoint, tau: f64) -> Result<()> {
    for z in point.factors() {
        let (c, l) = systole(*z);
        // the ball B(z, tau) reaches systole at most l e^{2 tau}
        if c.q() != 0 || z.y() * (-2.0 * tau).exp() < 2.0 || l >= 1.0 {
            return Err(Error::Precondition(format!(
                "factor ({}, {}) is not deep enough in the cusp for tau = {tau}",
                z.x(),
                z.y()
            )));
        }
    }
    Ok(())
}

/// Monte-Carlo `(A_tau f_j)/f_j` on a sup-metric ball, one estimate per tau.
/// The product ball carries the product measure, so the average of the
/// product function is the product of per-factor averages of `systole^{-s}`.
pub fn verify_contraction(cfg: &ContractionConfig) -> Result<InequalityReport> {
    if cfg.samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "{} samples; at least 1000 required",
            cfg.samples
        )));
    }
    if cfg.tau_grid.len() < 3 || cfg.tau_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "tau grid must be increasing with at least 3 points".into(),
        ));
    }
    let tau_max = *cfg.tau_grid.last().expect("nonempty");
    let base = deep_base_point(cfg.j, tau_max);
    for &t in &cfg.tau_grid {
        check_cusp_chart(&base, t)?;
    }
    let s = cfg.s;
    let cells: Vec<(usize, usize)> = (0..cfg.tau_grid.len())
        .flat_map(|t| (0..cfg.j).map(move |k| (t, k)))
        .collect();
    let per_factor = cfg.exec.map_slice(&cells, |&(t, k)| {
        let z = base.factors()[k];
        let tau = cfg.tau_grid[t];
        let l0 = systole(z).1;
        let focus = direction_to(z, systole(z).0.cusp());
        let stream = ((t * DEFAULT_M_MAX + k) as u64) << 8;
        match cfg.function {
            TestFunction::Constant => ball_average(
                z,
                tau,
                cfg.samples,
                Sampling::Uniform,
                cfg.seed,
                stream,
                Exec::Sequential,
                |_| 1.0,
            ),
            TestFunction::Bias => ball_average(
                z,
                tau,
                cfg.samples,
                Sampling::Focused(focus),
                cfg.seed,
                stream,
                Exec::Sequential,
                |p| (systole(p).1 / l0).powf(-s),
            ),
        }
    });
    let ratios: Vec<Estimate> = (0..cfg.tau_grid.len())
        .map(|t| Estimate::product(&per_factor[t * cfg.j..(t + 1) * cfg.j]))
        .collect();
    let xs = &cfg.tau_grid;
    let sig: Vec<f64> = ratios.iter().map(|r| r.rel_se().max(1e-12)).collect();
    let ln_r: Vec<f64> = ratios.iter().map(|r| r.mean.ln()).collect();
    let raw_fit = linfit_weighted(xs, &ln_r, &sig);
    let jf = cfg.j as f64;
    let corrected: Vec<f64> = ln_r.iter().zip(xs).map(|(l, t)| l - jf * t.ln()).collect();
    let fit = linfit_weighted(xs, &corrected, &sig);
    let c_const = ratios
        .iter()
        .zip(xs)
        .map(|(r, t)| (r.mean + 3.0 * r.se) / (t.powf(jf) * (-jf * t).exp()))
        .fold(0.0, f64::max);
    Ok(InequalityReport {
        j: cfg.j,
        tau_grid: cfg.tau_grid.clone(),
        ratios,
        raw_fit,
        fit,
        c_const,
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

/// Declared stratum of a test point: `j = 0` for points of `W_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemPoint {
    pub z: ModelPoint,
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCheck {
    pub z: ModelPoint,
    pub j: usize,
    /// `(A u_j - (c_j + 1/2K) u_j) / u_j`, with its standard error.
    pub violation: Estimate,
    /// `max(0, A u - c u)` at points of `W_0`.
    pub b: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SystemReport {
    pub tau: f64,
    pub c: f64,
    pub points: Vec<PointCheck>,
    pub worst_sigma: f64,
    pub max_b: f64,
    pub samples: usize,
    pub seed: u64,
}

impl SystemReport {
    /// Every thin point within 3 standard errors of the inequality.
    pub fn certified(&self) -> bool {
        self.points
            .iter()
            .filter(|p| p.j >= 1)
            .all(|p| p.violation.mean <= 3.0 * p.violation.se)
    }
}

/// Check `A_tau u_j <= (c_j + 1/(2K)) u_j` at thin points and measure the
/// additive term `b` at points of `W_0`. One curve on the torus, so the
/// only homogeneous rung is `u_1 = f_1`.
pub fn verify_system(
    points: &[SystemPoint],
    params: &BiasParams,
    contraction: &InequalityReport,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<SystemReport> {
    if params.m != 1 {
        return Err(Error::InvalidInput(
            "the torus model has one curve (m = 1)".into(),
        ));
    }
    for p in points {
        if p.j > params.m {
            return Err(Error::InvalidInput(format!("stratum {} exceeds m", p.j)));
        }
        if p.j >= 1 && in_region_w(p.j - 1, p.z, params) {
            return Err(Error::Precondition(format!(
                "point ({}, {}) lies in W_{} but was declared in stratum {}",
                p.z.x(),
                p.z.y(),
                p.j - 1,
                p.j
            )));
        }
    }
    let tau = params.tau;
    let c = contraction.c_j(tau) + 0.5 / params.k();
    let checks = exec.map(points.len(), |i| {
        let p = points[i];
        let b0 = bias_eval(p.z, params);
        let uj0 = b0.u_j[p.j];
        let focus = direction_to(p.z, systole(p.z).0.cusp());
        let avg = ball_average(
            p.z,
            tau,
            samples,
            Sampling::Focused(focus),
            seed,
            (i as u64) << 8,
            Exec::Sequential,
            |q| bias_eval(q, params).u_j[p.j] / uj0,
        );
        let violation = Estimate::new(avg.mean - c, avg.se);
        let b = (p.j == 0).then(|| ((avg.mean - c) * uj0).max(0.0));
        PointCheck {
            z: p.z,
            j: p.j,
            violation,
            b,
        }
    });
    let worst_sigma = checks
        .iter()
        .filter(|p| p.j >= 1)
        .map(|p| p.violation.mean / p.violation.se.max(1e-300))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_b = checks.iter().filter_map(|p| p.b).fold(0.0, f64::max);
    Ok(SystemReport {
        tau,
        c,
        points: checks,
        worst_sigma,
        max_b,
        samples,
        seed,
    })
}

/// Thin test points `x + iY` with `1/Y` below `eps'_1`, log-uniform over
/// `spread` e-folds of depth.
pub fn thin_points(params: &BiasParams, count: usize, spread: f64, seed: u64) -> Vec<SystemPoint> {
    let mut rng = stream_rng(seed, 0x7417);
    let y0 = -params.ln_eps_prime(1) + 0.01;
    (0..count)
        .map(|_| {
            let x = rng.random_range(-0.5..0.5);
            let y = (y0 + spread * rng.random::<f64>()).exp();
            SystemPoint {
                z: ModelPoint::raw(x, y),
                j: 1,
            }
        })
        .collect()
}

/// Thick test points in the fundamental domain below height `ymax`.
pub fn thick_points(count: usize, ymax: f64, seed: u64) -> Vec<SystemPoint> {
    let mut rng = stream_rng(seed, 0x7416);
    (0..count)
        .map(|_| loop {
            let x: f64 = rng.random_range(-0.5..0.5);
            let y: f64 = rng.random_range(0.8..ymax);
            if x * x + y * y >= 1.0 {
                break SystemPoint {
                    z: ModelPoint::raw(x, y),
                    j: 0,
                };
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> ModelPoint {
        ModelPoint::new(x, y).unwrap()
    }

    #[test]
    fn sup_distance() {
        let a = ProductPoint::new(vec![pt(0.0, 1.0), pt(0.0, 1.0)], 3).unwrap();
        let b = ProductPoint::new(vec![pt(0.0, 0.6f64.exp()), pt(0.0, 1.4f64.exp())], 3).unwrap();
        assert_eq!(sup_dist(&a, &a).unwrap(), 0.0);
        assert!((sup_dist(&a, &b).unwrap() - 0.7).abs() < 1e-12);
        let c = ProductPoint::new(vec![pt(0.0, 1.0)], 3).unwrap();
        assert!(matches!(sup_dist(&a, &c), Err(Error::Dimension { .. })));
        assert!(ProductPoint::new(vec![pt(0.0, 1.0); 4], 3).is_err());
    }

    #[test]
    fn product_bias_examples() {
        let mut p = BiasParams::standard(0.5, 3.0, 2).unwrap();
        let (e1, e2) = (1e-3f64, 1e-2f64);
        p.ln_eps = vec![e1.ln(), e2.ln()];
        let x = ProductPoint::new(vec![pt(0.0, 10.0), pt(0.3, 10.0)], 3).unwrap();
        let f = f_product(2, &x, &p).unwrap();
        assert!((f - 10.0 * (e1 * e2).sqrt()).abs() < 1e-12);

        let p1 = BiasParams::standard(0.5, 3.0, 1).unwrap();
        let z = pt(0.2, 1e9);
        let one = ProductPoint::new(vec![z], 3).unwrap();
        let torus = bias_eval(z, &p1).f[1];
        assert!((f_product(1, &one, &p1).unwrap() / torus - 1.0).abs() < 1e-12);

        let deeper = ProductPoint::new(vec![pt(0.0, 20.0), pt(0.3, 10.0)], 3).unwrap();
        assert!(f_product(2, &deeper, &p).unwrap() > f);
    }

    #[test]
    fn constant_function_does_not_contract() {
        let mut cfg = ContractionConfig::new(2, vec![3.0, 4.0, 5.0], 2000, 1);
        cfg.function = TestFunction::Constant;
        let r = verify_contraction(&cfg).unwrap();
        assert!(r.ratios.iter().all(|e| e.mean == 1.0));
        assert!(r.raw_fit.slope.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(
            verify_contraction(&ContractionConfig::new(1, vec![3.0, 4.0, 5.0], 10, 1)).is_err()
        );
        assert!(verify_contraction(&ContractionConfig::new(1, vec![3.0, 4.0], 5000, 1)).is_err());
    }

    #[test]
    fn system_precondition() {
        let p = BiasParams::standard(0.5, 3.0, 1).unwrap();
        let cfg = ContractionConfig::new(1, vec![3.0, 4.0, 5.0], 2000, 1);
        let rep = verify_contraction(&cfg).unwrap();
        let bad = [SystemPoint {
            z: ModelPoint::i(),
            j: 1,
        }];
        assert!(matches!(
            verify_system(&bad, &p, &rep, 2000, 1, Exec::Sequential),
            Err(Error::Precondition(_))
        ));
    }
}
