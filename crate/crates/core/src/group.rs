//! Integer unimodular matrices: a fast `i64` form with checked arithmetic and
//! the arbitrary-precision [`MappingClass`].

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Row-major `[[a, b], [c, d]]` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2i(pub [i64; 4]);

impl Mat2i {
    pub const IDENTITY: Mat2i = Mat2i([1, 0, 0, 1]);
    /// z -> -1/z
    pub const S: Mat2i = Mat2i([0, -1, 1, 0]);

    pub fn translation(n: i64) -> Mat2i {
        Mat2i([1, n, 0, 1])
    }

    /// Right twist `[[1,0],[1,1]]^k`.
    pub fn right(k: i64) -> Mat2i {
        Mat2i([1, 0, k, 1])
    }

    /// Left twist `[[1,1],[0,1]]^k`.
    pub fn left(k: i64) -> Mat2i {
        Mat2i([1, k, 0, 1])
    }

    pub fn det(&self) -> i128 {
        let [a, b, c, d] = self.0;
        a as i128 * d as i128 - b as i128 * c as i128
    }

    pub fn trace(&self) -> i64 {
        self.0[0] + self.0[3]
    }

    pub fn checked_mul(&self, o: &Mat2i) -> Option<Mat2i> {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        let m = |x: i64, y: i64, z: i64, w: i64| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some(Mat2i([
            m(a, e, b, g)?,
            m(a, f, b, h)?,
            m(c, e, d, g)?,
            m(c, f, d, h)?,
        ]))
    }

    pub fn try_mul(&self, o: &Mat2i) -> Result<Mat2i> {
        self.checked_mul(o)
            .ok_or_else(|| Error::NumericOverflow("integer matrix product exceeds i64".into()))
    }

    pub fn inverse(&self) -> Mat2i {
        let [a, b, c, d] = self.0;
        Mat2i([d, -b, -c, a])
    }

    pub fn neg(&self) -> Mat2i {
        let [a, b, c, d] = self.0;
        Mat2i([-a, -b, -c, -d])
    }

    /// Representative of `±self` in PSL(2,Z): first nonzero of (c, d) positive
    /// when c != 0, else a > 0.
    pub fn psl_normalize(&self) -> Mat2i {
        let [a, _, c, d] = self.0;
        let flip = if c != 0 {
            c < 0
        } else if a != 0 {
            a < 0
        } else {
            d < 0
        };
        if flip {
            self.neg()
        } else {
            *self
        }
    }

    /// Möbius action on a point given as (x, y) with y > 0.
    pub fn act(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d] = self.0.map(|v| v as f64);
        let (nx, ny) = (c * x + d, c * y);
        let den = nx * nx + ny * ny;
        let (px, py) = (a * x + b, a * y);
        ((px * nx + py * ny) / den, (py * nx - px * ny) / den)
    }

    pub fn to_f64(&self) -> [f64; 4] {
        self.0.map(|v| v as f64)
    }
}

impl fmt::Display for Mat2i {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[[{a},{b}],[{c},{d}]]")
    }
}

/// Element of SL(2,Z) with arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MappingClass {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl MappingClass {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if &a * &d - &b * &c != BigInt::one() {
            return Err(Error::InvalidInput(format!(
                "determinant of [[{a},{b}],[{c},{d}]] is not 1"
            )));
        }
        Ok(MappingClass { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        MappingClass {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > BigInt::from(2)
    }

    pub fn mul(&self, o: &MappingClass) -> MappingClass {
        MappingClass {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> MappingClass {
        MappingClass {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    pub fn to_mat2i(&self) -> Option<Mat2i> {
        Some(Mat2i([
            self.a.to_i64()?,
            self.b.to_i64()?,
            self.c.to_i64()?,
            self.d.to_i64()?,
        ]))
    }

    pub fn to_f64(&self) -> [f64; 4] {
        [&self.a, &self.b, &self.c, &self.d].map(|v| v.to_f64().unwrap_or(f64::NAN))
    }

    /// Möbius action in floating point.
    pub fn act(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d] = self.to_f64();
        let (nx, ny) = (c * x + d, c * y);
        let den = nx * nx + ny * ny;
        let (px, py) = (a * x + b, a * y);
        ((px * nx + py * ny) / den, (py * nx - px * ny) / den)
    }
}

impl From<Mat2i> for MappingClass {
    fn from(m: Mat2i) -> Self {
        let [a, b, c, d] = m.0;
        MappingClass {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }
}

impl fmt::Display for MappingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twists_multiply_to_golden_matrix() {
        let m = Mat2i::right(1).checked_mul(&Mat2i::left(1)).unwrap();
        assert_eq!(m, Mat2i([1, 1, 1, 2]));
        assert_eq!(m.trace(), 3);
        assert_eq!(m.det(), 1);
    }

    #[test]
    fn overflow_is_detected() {
        let big = Mat2i([i64::MAX / 2, 1, 1, 0]);
        assert!(big.checked_mul(&big).is_none());
    }

    #[test]
    fn bigint_roundtrip() {
        let m = Mat2i([2, 1, 1, 1]);
        let g = MappingClass::from(m);
        assert_eq!(g.to_mat2i(), Some(m));
        assert_eq!(g.mul(&g.inverse()), MappingClass::identity());
        assert!(MappingClass::from_i64(1, 1, 1, 1).is_err());
    }
}
