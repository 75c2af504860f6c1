//! Extremal lengths, systole and the bias functions on the once-punctured
//! torus of modulus z.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::Mat2i;
use crate::hyp::ModelPoint;

/// Simple closed curve `p + q z`, `gcd(p, q) = 1`, normalized with `q > 0`
/// or `(p, q) = (1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveClass {
    p: i64,
    q: i64,
}

impl CurveClass {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p.gcd(&q) != 1 {
            return Err(Error::InvalidInput(format!(
                "curve ({p},{q}) is not primitive"
            )));
        }
        Ok(Self::normalized(p, q))
    }

    fn normalized(p: i64, q: i64) -> Self {
        if q < 0 || (q == 0 && p < 0) {
            CurveClass { p: -p, q: -q }
        } else {
            CurveClass { p, q }
        }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Image under an integer unimodular matrix acting on the modulus by
    /// Möbius: the curve with the same extremal length at `g z`.
    pub fn transform(&self, g: &Mat2i) -> CurveClass {
        let [a, b, c, d] = g.0;
        // p + q z = (p', q') . (1, gz) * (cz + d), solve for (p', q').
        let (p, q) = (self.p, self.q);
        Self::normalized(p * a - q * b, -p * c + q * d)
    }

    /// Boundary point where this curve is pinched, `None` for infinity.
    pub fn cusp(&self) -> Option<f64> {
        if self.q == 0 {
            None
        } else {
            Some(-(self.p as f64) / self.q as f64)
        }
    }
}

/// `|p + q z|^2 / Im z`.
pub fn extremal_length(c: CurveClass, z: ModelPoint) -> f64 {
    let re = c.p as f64 + c.q as f64 * z.x();
    let im = c.q as f64 * z.y();
    (re * re + im * im) / z.y()
}

/// Shortest curve by Lagrange-Gauss reduction of the lattice `<1, z>`.
pub fn systole(z: ModelPoint) -> (CurveClass, f64) {
    // Lattice vectors carry their integer coordinates (p, q).
    let vec = |p: f64, q: f64| (p + q * z.x(), q * z.y());
    let norm = |v: (f64, f64)| v.0 * v.0 + v.1 * v.1;
    let (mut u, mut v) = ((1i64, 0i64), (0i64, 1i64));
    let mut uu = vec(1.0, 0.0);
    let mut vv = vec(0.0, 1.0);
    if norm(vv) < norm(uu) {
        std::mem::swap(&mut u, &mut v);
        std::mem::swap(&mut uu, &mut vv);
    }
    for _ in 0..10_000 {
        let mu = ((vv.0 * uu.0 + vv.1 * uu.1) / norm(uu)).round();
        if mu != 0.0 {
            let m = mu as i64;
            v = (v.0 - m * u.0, v.1 - m * u.1);
            vv = vec(v.0 as f64, v.1 as f64);
        }
        if norm(vv) < norm(uu) {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut uu, &mut vv);
        } else {
            break;
        }
    }
    let best = norm(uu);
    let tol = best * 1e-12;
    let mut cands = vec![CurveClass::normalized(u.0, u.1)];
    for (p, q) in [v, (u.0 + v.0, u.1 + v.1), (u.0 - v.0, u.1 - v.1)] {
        if (norm(vec(p as f64, q as f64)) - best).abs() <= tol {
            cands.push(CurveClass::normalized(p, q));
        }
    }
    let c = *cands.iter().min().expect("nonempty");
    (c, best / z.y())
}

pub fn systole_value(z: ModelPoint) -> f64 {
    systole(z).1
}

/// Constants of the bias construction, stored as logarithms because the
/// epsilon ladder underflows `f64` already for three curves.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasParams {
    pub s: f64,
    pub tau: f64,
    pub m: usize,
    pub ln_k: f64,
    /// `ln eps_1 .. ln eps_m`
    pub ln_eps: Vec<f64>,
}

impl BiasParams {
    /// Default ladder: `K = e^{2 m tau}(1 + 1e-3)`, `eps_m = K^-3 / 2`, each
    /// lower rung half of the largest admissible value.
    pub fn standard(s: f64, tau: f64, m: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidInput(format!(
                "exponent s = {s} outside (0,1)"
            )));
        }
        if m == 0 || tau <= 0.0 {
            return Err(Error::InvalidInput("need m >= 1 and tau > 0".into()));
        }
        let ln_k = 2.0 * m as f64 * tau + 1e-3f64.ln_1p();
        let mut ln_eps = vec![0.0; m];
        ln_eps[m - 1] = -3.0 * ln_k - 2f64.ln();
        for i in (0..m - 1).rev() {
            ln_eps[i] = ln_eps[i + 1] - Self::ladder_gap(s, m, ln_k) - 2f64.ln();
        }
        let p = BiasParams {
            s,
            tau,
            m,
            ln_k,
            ln_eps,
        };
        p.validate()?;
        Ok(p)
    }

    /// `ln(K^2 (2 m K^2)^{2/s})`
    fn ladder_gap(s: f64, m: usize, ln_k: f64) -> f64 {
        2.0 * ln_k + (2.0 / s) * ((2.0 * m as f64).ln() + 2.0 * ln_k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s = {} outside (0,1)", self.s));
        }
        if self.ln_eps.len() != self.m {
            return bad("ladder length differs from m".into());
        }
        if self.ln_k <= 2.0 * self.m as f64 * self.tau {
            return bad("K must exceed e^{2 m tau}".into());
        }
        if self.ln_eps[self.m - 1] >= -3.0 * self.ln_k {
            return bad("eps_m must be below K^-3".into());
        }
        for i in 0..self.m - 1 {
            if self.ln_eps[i] >= self.ln_eps[i + 1] - Self::ladder_gap(self.s, self.m, self.ln_k) {
                return bad(format!("ladder condition fails at rung {}", i + 1));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        self.ln_k.exp()
    }

    /// `ln eps_j`, `j` in `1..=m`.
    pub fn ln_eps(&self, j: usize) -> f64 {
        self.ln_eps[j - 1]
    }

    /// `ln eps'_j = ln(eps_j / (m K^2))`.
    pub fn ln_eps_prime(&self, j: usize) -> f64 {
        self.ln_eps[j - 1] - (self.m as f64).ln() - 2.0 * self.ln_k
    }

    /// Sandwich constants with `kappa_1 u <= G <= kappa_2 u` for m = 1, s = 1/2.
    /// On the torus `G/u = 1/(l^{1/2} + eps^{1/2})`, decreasing in the systole
    /// `l`, which never exceeds `2/sqrt 3`.
    pub fn kappas(&self) -> Option<(f64, f64)> {
        if self.m != 1 || (self.s - 0.5).abs() > 1e-15 {
            return None;
        }
        let e = (0.5 * self.ln_eps[0]).exp();
        let lmax = 2.0 / 3f64.sqrt();
        Some((1.0 / (lmax.sqrt() + e), 1.0 / e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasEvaluation {
    /// Shortest extremal lengths, ascending.
    pub lengths: Vec<f64>,
    /// `f_0 ..= f_m`
    pub f: Vec<f64>,
    pub u: f64,
    /// `u_j = sum_{k >= j} f_k`, `j = 0..=m`
    pub u_j: Vec<f64>,
    pub g: f64,
}

/// Bias functions at `z` (one curve, so `u = 1 + (eps_1/l_1)^s`).
pub fn bias_eval(z: ModelPoint, params: &BiasParams) -> BiasEvaluation {
    let l1 = systole_value(z);
    bias_from_lengths(&[l1], params)
}

/// Bias functions from ascending short-curve lengths (missing rungs count as
/// long curves with `f = 0`).
pub fn bias_from_lengths(lengths: &[f64], params: &BiasParams) -> BiasEvaluation {
    let m = params.m;
    let mut f = vec![1.0; m + 1];
    let mut ln_f = 0.0;
    #[allow(clippy::needless_range_loop)]
    for j in 1..=m {
        f[j] = match lengths.get(j - 1) {
            Some(&l) => {
                ln_f += params.s * (params.ln_eps(j) - l.ln());
                ln_f.exp()
            }
            None => 0.0,
        };
    }
    let mut u_j = vec![0.0; m + 1];
    let mut acc = 0.0;
    for j in (0..=m).rev() {
        acc += f[j];
        u_j[j] = acc;
    }
    let g = lengths.iter().map(|l| l.powf(-0.5)).product();
    BiasEvaluation {
        lengths: lengths.to_vec(),
        f,
        u: u_j[0],
        u_j,
        g,
    }
}

/// `W_j = {l_{j+1} > eps'_{j+1}}`; `W_m` is everything.
pub fn in_region_w(j: usize, z: ModelPoint, params: &BiasParams) -> bool {
    if j >= params.m {
        return true;
    }
    // One curve on the torus: only j = 0 is a real condition.
    systole_value(z).ln() > params.ln_eps_prime(j + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> ModelPoint {
        ModelPoint::new(x, y).unwrap()
    }

    #[test]
    fn extremal_length_examples() {
        let h = CurveClass::new(1, 0).unwrap();
        let v = CurveClass::new(0, 1).unwrap();
        assert_eq!(extremal_length(h, ModelPoint::i()), 1.0);
        assert_eq!(extremal_length(v, ModelPoint::i()), 1.0);
        assert!((extremal_length(h, pt(0.37, 10.0)) - 0.1).abs() < 1e-15);
        assert!(CurveClass::new(2, 4).is_err());
    }

    #[test]
    fn systole_examples() {
        let (c, v) = systole(ModelPoint::i());
        assert_eq!(v, 1.0);
        assert_eq!((c.p(), c.q()), (0, 1));
        let (c, v) = systole(pt(0.0, 10.0));
        assert_eq!((c.p(), c.q()), (1, 0));
        assert!((v - 0.1).abs() < 1e-15);
        // deep in the cusp at -1/2: curve (1, 2)
        let (c, v) = systole(pt(-0.5, 0.001));
        assert_eq!((c.p(), c.q()), (1, 2));
        assert!((v - 4.0 * 0.001).abs() < 1e-12);
    }

    #[test]
    fn bias_examples() {
        let mut p = BiasParams::standard(0.5, 3.0, 1).unwrap();
        p.ln_eps[0] = 0.01f64.ln();
        let b = bias_eval(pt(0.0, 10.0), &p);
        assert!((b.f[1] - 0.316227766).abs() < 1e-9);
        assert!((b.g - 3.16227766).abs() < 1e-8);
        assert_eq!(b.f[0], 1.0);
        assert!((b.u - 1.0 - b.f[1]).abs() < 1e-15);
        let thick = bias_eval(ModelPoint::i(), &p);
        assert!(thick.f[1] <= 1.0);
    }

    #[test]
    fn default_ladder_is_valid_and_underflows_gracefully() {
        for m in 1..=3 {
            for tau in [3.0, 5.0, 7.0] {
                let p = BiasParams::standard(0.5, tau, m).unwrap();
                assert!(p.validate().is_ok());
                assert!(p.ln_k > 2.0 * m as f64 * tau);
            }
        }
        let p = BiasParams::standard(0.5, 3.0, 2).unwrap();
        let mut broken = p.clone();
        broken.ln_eps[0] = broken.ln_eps[1] - 1.0;
        assert!(broken.validate().is_err());
    }

    #[test]
    fn region_w() {
        let p = BiasParams::standard(0.5, 3.0, 1).unwrap();
        assert!(in_region_w(0, ModelPoint::i(), &p));
        let deep = (-p.ln_eps_prime(1)).exp() * 10.0;
        assert!(!in_region_w(0, pt(0.2, deep), &p));
        assert!(in_region_w(1, pt(0.2, deep), &p));
    }

    #[test]
    fn transform_preserves_extremal_length() {
        let g = Mat2i([2, 1, 1, 1]);
        let c = CurveClass::new(3, 5).unwrap();
        let z = pt(0.3, 0.8);
        let gz = z.act(&g);
        let a = extremal_length(c, z);
        let b = extremal_length(c.transform(&g), gz);
        assert!((a - b).abs() < 1e-9 * a);
    }
}
