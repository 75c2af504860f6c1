//! Closed geodesics of the model moduli space: conjugacy classes of
//! hyperbolic elements of SL(2,Z), written as cyclic words in the positive
//! twists `R = [[1,0],[1,1]]` and `L = [[1,1],[0,1]]`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::group::{MappingClass, Mat2i};
use crate::hyp::{reduce_point, ModelPoint};
use crate::par::Exec;
use crate::torus::systole_value;

/// Canonical cyclic word `(a_1, b_1, ..., a_k, b_k)` of twist exponents.
#[derive(Clone, Debug)]
pub struct ConjClassWord {
    exponents: Vec<u32>,
    primitive: bool,
    trace: BigInt,
    teich_length: f64,
}

// everything else is a function of the exponents
impl PartialEq for ConjClassWord {
    fn eq(&self, other: &Self) -> bool {
        self.exponents == other.exponents
    }
}

impl Eq for ConjClassWord {}

impl std::hash::Hash for ConjClassWord {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.exponents.hash(state);
    }
}

impl ConjClassWord {
    pub fn new(exponents: &[u32]) -> Result<Self> {
        if exponents.is_empty() || !exponents.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(
                "word needs a positive even number of exponents".into(),
            ));
        }
        if exponents.contains(&0) {
            return Err(Error::InvalidInput("exponents must be positive".into()));
        }
        let exponents = canonical_rotation(exponents);
        let trace = word_to_matrix(&exponents)?.trace();
        Ok(ConjClassWord {
            primitive: is_primitive(&exponents),
            teich_length: length_from_trace(&trace),
            exponents,
            trace,
        })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn primitive(&self) -> bool {
        self.primitive
    }

    pub fn trace(&self) -> &BigInt {
        &self.trace
    }

    pub fn teich_length(&self) -> f64 {
        self.teich_length
    }

    pub fn matrix(&self) -> MappingClass {
        word_to_matrix(&self.exponents).expect("validated word")
    }

    pub fn power(&self, k: usize) -> Result<Self> {
        Self::new(&self.exponents.repeat(k))
    }

    /// `a1,b1,a2,b2`
    pub fn csv_word(&self) -> String {
        self.exponents
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for ConjClassWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .exponents
            .chunks(2)
            .map(|p| format!("{};{}", p[0], p[1]))
            .collect();
        write!(f, "({})", parts.join(" | "))
    }
}

/// Lexicographically least rotation by an even shift.
pub fn canonical_rotation(exps: &[u32]) -> Vec<u32> {
    let n = exps.len();
    let mut best = 0;
    for shift in (2..n).step_by(2) {
        let cmp = (0..n)
            .map(|i| exps[(shift + i) % n].cmp(&exps[(best + i) % n]))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        if cmp == Ordering::Less {
            best = shift;
        }
    }
    (0..n).map(|i| exps[(best + i) % n]).collect()
}

/// Not a proper power of a shorter pair sequence.
pub fn is_primitive(exps: &[u32]) -> bool {
    let pairs = exps.len() / 2;
    (1..pairs).filter(|d| pairs.is_multiple_of(*d)).all(|d| {
        let p = 2 * d;
        (p..exps.len()).any(|i| exps[i] != exps[i - p])
    })
}

/// `R^{a1} L^{b1} ... R^{ak} L^{bk}`
pub fn word_to_matrix(exps: &[u32]) -> Result<MappingClass> {
    if exps.is_empty() {
        return Err(Error::InvalidInput("empty word".into()));
    }
    let mut m = MappingClass::identity();
    for (i, &e) in exps.iter().enumerate() {
        let e = BigInt::from(e);
        let step = if i % 2 == 0 {
            MappingClass::new(BigInt::one(), BigInt::from(0), e, BigInt::one())?
        } else {
            MappingClass::new(BigInt::one(), e, BigInt::from(0), BigInt::one())?
        };
        m = m.mul(&step);
    }
    Ok(m)
}

/// `arccosh(t/2)`, switching to a cancellation-free form for huge traces.
pub fn length_from_trace(t: &BigInt) -> f64 {
    let tf = t.to_f64().unwrap_or(f64::INFINITY).abs();
    length_from_trace_f64(tf)
}

pub fn length_from_trace_f64(t: f64) -> f64 {
    if t > 1e8 {
        t.ln() + ((1.0 + (1.0 - 4.0 / (t * t)).sqrt()) / 2.0).ln()
    } else {
        (t / 2.0).acosh()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicClass {
    pub word: ConjClassWord,
    /// Repelling and attracting fixed points.
    pub axis: (f64, f64),
    /// Integer quadratic `c x^2 + (d - a) x - b` with the endpoints as roots.
    pub quadratic: [BigInt; 3],
    pub min_systole: f64,
}

impl GeodesicClass {
    pub fn from_word(word: ConjClassWord, step: f64) -> Result<Self> {
        let m = word.matrix();
        let axis = axis_endpoints(&m)?;
        let [a, b, c, d] = m.entries();
        let quadratic = [c.clone(), d - a, -b];
        let min_systole = min_systole_on_axis(&m, word.teich_length(), step)?;
        Ok(GeodesicClass {
            word,
            axis,
            quadratic,
            min_systole,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{};{};{};{}",
            self.word.csv_word(),
            self.word.trace(),
            crate::report::fmt9(self.word.teich_length()),
            crate::report::fmt9(self.min_systole)
        )
    }
}

pub const CLASS_CSV_HEADER: &str = "word;trace;length;min_systole";

/// Fixed points `(repelling, attracting)` of a hyperbolic matrix.
pub fn axis_endpoints(m: &MappingClass) -> Result<(f64, f64)> {
    if !m.is_hyperbolic() {
        return Err(Error::InvalidInput(format!("{m} is not hyperbolic")));
    }
    let [a, b, c, d] = m.to_f64();
    let t = a + d;
    let disc = (t * t - 4.0).sqrt();
    if c == 0.0 {
        return Err(Error::InvalidInput(
            "axis through infinity is not supported".into(),
        ));
    }
    let r1 = ((a - d) + disc) / (2.0 * c);
    let r2 = ((a - d) - disc) / (2.0 * c);
    // derivative at a fixed point is (c x + d)^{-2}; attracting means |c x + d| > 1
    let _ = b;
    if (c * r1 + d).abs() > 1.0 {
        Ok((r2, r1))
    } else {
        Ok((r1, r2))
    }
}

/// Point of the axis from `xm` (repelling) to `xp` (attracting) at signed
/// Teichmüller arclength `s` from the top of the semicircle.
pub fn axis_point(xm: f64, xp: f64, s: f64) -> ModelPoint {
    let c = 0.5 * (xm + xp);
    let r = 0.5 * (xp - xm).abs();
    let sign = (xp - xm).signum();
    // Hyperbolic arclength 2s from the top: angle with tanh(2s) = cos(phi).
    let th = (2.0 * s).tanh();
    let sech = 1.0 / (2.0 * s).cosh();
    ModelPoint::raw(c + sign * r * th, r * sech)
}

fn min_systole_on_axis(m: &MappingClass, length: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidInput(format!(
            "axis step {step} outside (0, 0.1]"
        )));
    }
    let (xm, xp) = axis_endpoints(m)?;
    let n = (length / step).ceil().max(1.0) as usize;
    let h = length / n as f64;
    let f = |s: f64| systole_value(reduce_point(axis_point(xm, xp, s)));
    let (mut best_s, mut best) = (0.0, f64::INFINITY);
    for k in 0..n {
        let s = k as f64 * h;
        let v = f(s);
        if v < best {
            best = v;
            best_s = s;
        }
    }
    // Golden-section polish of the sampled minimum.
    let (mut lo, mut hi) = (best_s - h, best_s + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
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
    Ok(best.min(f1).min(f2))
}

/// Minimum systole along one period of the closed geodesic.
pub fn min_systole_along_axis(word: &ConjClassWord, step: f64) -> Result<f64> {
    min_systole_on_axis(&word.matrix(), word.teich_length(), step)
}

/// Fraction of one period spent with systole below `delta`, by sampling.
pub fn thin_fraction(word: &ConjClassWord, delta: f64, step: f64) -> Result<f64> {
    let m = word.matrix();
    let (xm, xp) = axis_endpoints(&m)?;
    let length = word.teich_length();
    let n = (length / step).ceil().max(1.0) as usize;
    let h = length / n as f64;
    let thin = (0..n)
        .filter(|&k| systole_value(reduce_point(axis_point(xm, xp, (k as f64 + 0.5) * h))) < delta)
        .count();
    Ok(thin as f64 / n as f64)
}

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub primitive_only: bool,
    /// Cap on the projected number of classes.
    pub cap: u64,
    pub axis_step: f64,
    pub exec: Exec,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            primitive_only: false,
            cap: 2_000_000,
            axis_step: 0.02,
            exec: Exec::Parallel,
        }
    }
}

/// Raw output of the necklace search: `(trace, exponents, primitive)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawClass {
    pub trace: u64,
    pub exponents: Vec<u32>,
    pub primitive: bool,
}

fn trace_bound(r_max: f64) -> u64 {
    let t = 2.0 * r_max.cosh();
    // guard against rounding just below an integer trace
    (t * (1.0 + 1e-14)).floor() as u64
}

/// Necklace search over words of pairs with trace at most `2 cosh(r_max)`.
/// Prenecklaces are generated by the Fredricksen-Kessler-Maiorana rule with
/// the running period `p`; a prefix is abandoned once its trace exceeds the
/// bound since appending positive twists never lowers the trace.
pub fn enumerate_raw(r_max: f64, opts: &EnumOptions) -> Result<Vec<RawClass>> {
    if !(r_max > 0.0) {
        return Err(Error::InvalidInput("R_max must be positive".into()));
    }
    let projected = (2.0 * r_max).exp() / (2.0 * r_max) * 1.3;
    if projected > opts.cap as f64 || r_max > 20.0 {
        return Err(Error::Resource {
            what: format!("enumeration to R = {r_max} (about {projected:.0} classes)"),
            cap: opts.cap,
            hint: "lower R_max or raise the cap".into(),
        });
    }
    let tb = trace_bound(r_max) as i64;
    let firsts = first_pairs(tb);
    let chunks = opts.exec.map_slice(&firsts, |&(a, b)| {
        let mut out = Vec::new();
        let m = Mat2i::right(a as i64)
            .checked_mul(&Mat2i::left(b as i64))
            .expect("small");
        let mut word = vec![(a, b)];
        dfs(&mut word, m, 1, tb, &mut out);
        out
    });
    let mut all: Vec<RawClass> = chunks
        .into_iter()
        .flatten()
        .filter(|c| !opts.primitive_only || c.primitive)
        .filter(|c| length_from_trace_f64(c.trace as f64) <= r_max)
        .collect();
    all.sort_by(|x, y| {
        x.trace
            .cmp(&y.trace)
            .then_with(|| x.exponents.cmp(&y.exponents))
    });
    Ok(all)
}

fn first_pairs(tb: i64) -> Vec<(u32, u32)> {
    // trace of R^a L^b is a b + 2
    let mut v = Vec::new();
    let mut a = 1i64;
    while a + 2 <= tb {
        let mut b = 1i64;
        while a * b + 2 <= tb {
            v.push((a as u32, b as u32));
            b += 1;
        }
        a += 1;
    }
    v
}

fn dfs(word: &mut Vec<(u32, u32)>, m: Mat2i, p: usize, tb: i64, out: &mut Vec<RawClass>) {
    let n = word.len();
    if n.is_multiple_of(p) {
        out.push(RawClass {
            trace: m.trace() as u64,
            exponents: word.iter().flat_map(|&(a, b)| [a, b]).collect(),
            primitive: p == n,
        });
    }
    let reference = word[n - p];
    let mut a = 1u32;
    while let Some(ma) = m.checked_mul(&Mat2i::right(a as i64)) {
        match ma.checked_mul(&Mat2i::left(1)) {
            Some(x) if x.trace() <= tb => {}
            _ => break,
        }
        if a < reference.0 {
            a += 1;
            continue;
        }
        let mut b = 1u32;
        while let Some(mb) = ma.checked_mul(&Mat2i::left(b as i64)) {
            if mb.trace() > tb {
                break;
            }
            let c = (a, b);
            match c.cmp(&reference) {
                Ordering::Less => {}
                ord => {
                    let np = if ord == Ordering::Equal { p } else { n + 1 };
                    word.push(c);
                    dfs(word, mb, np, tb, out);
                    word.pop();
                }
            }
            b += 1;
        }
        a += 1;
    }
}

/// All classes with length at most `r_max`, sorted by (length, word).
pub fn enumerate_classes(r_max: f64, opts: &EnumOptions) -> Result<Vec<GeodesicClass>> {
    let raw = enumerate_raw(r_max, opts)?;
    let step = opts.axis_step;
    let out: Vec<Result<GeodesicClass>> = opts.exec.map_slice(&raw, |c| {
        GeodesicClass::from_word(ConjClassWord::new(&c.exponents)?, step)
    });
    out.into_iter().collect()
}

/// Number of classes with length at most each grid point.
pub fn count_by_length(r_grid: &[f64], opts: &EnumOptions) -> Result<Vec<u64>> {
    let r_max = r_grid.iter().cloned().fold(0.0, f64::max);
    let raw = enumerate_raw(r_max, opts)?;
    Ok(r_grid
        .iter()
        .map(|&r| {
            raw.iter()
                .filter(|c| length_from_trace_f64(c.trace as f64) <= r)
                .count() as u64
        })
        .collect())
}

fn isqrt(n: i128) -> i128 {
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Conjugacy class (in PSL(2,Z)) of a hyperbolic matrix as a cyclic word.
///
/// The attracting fixed point is a quadratic irrational whose continued
/// fraction is eventually periodic. Even-indexed tails `x_{2n}` lie in the
/// orbit of the fixed point, and the period read backwards from one of them
/// is the cyclic word of the class.
pub fn class_of_matrix(m: &Mat2i) -> Result<ConjClassWord> {
    let m = if m.trace() < 0 { m.neg() } else { *m };
    let [a, _, c, d] = m.0.map(i128::from);
    let t = a + d;
    if t <= 2 {
        return Err(Error::InvalidInput(format!("{m} is not hyperbolic")));
    }
    let disc = t * t - 4;
    let s = isqrt(disc);
    // x = (P + sqrt(disc)) / Q with Q | disc - P^2
    let (xf_plus, xf_minus) = {
        let sq = (disc as f64).sqrt();
        (
            ((a - d) as f64 + sq) / (2 * c) as f64,
            ((a - d) as f64 - sq) / (2 * c) as f64,
        )
    };
    let attracting_plus =
        ((c as f64) * xf_plus + d as f64).abs() < ((c as f64) * xf_minus + d as f64).abs();
    let (mut p, mut q) = if attracting_plus {
        (a - d, 2 * c)
    } else {
        (d - a, -2 * c)
    };
    let mut seen: std::collections::HashMap<(i128, i128), usize> = std::collections::HashMap::new();
    let mut digits: Vec<i128> = Vec::new();
    let start = loop {
        let idx = digits.len();
        if idx.is_multiple_of(2) {
            if let Some(&first) = seen.get(&(p, q)) {
                break first;
            }
            seen.insert((p, q), idx);
        }
        if idx > 100_000 {
            return Err(Error::NumericOverflow(
                "continued fraction did not become periodic".into(),
            ));
        }
        let digit = if q > 0 {
            floor_div(p + s, q)
        } else {
            floor_div(p + s + 1, q)
        };
        digits.push(digit);
        p = digit * q - p;
        q = (disc - p * p) / q;
    };
    let period: Vec<i128> = digits[start..].to_vec();
    if period.iter().any(|&x| x <= 0 || x > u32::MAX as i128) {
        return Err(Error::NumericOverflow(
            "unexpected continued fraction digit".into(),
        ));
    }
    // the period runs against our word order
    let n = period.len();
    let exps: Vec<u32> = (0..n).map(|i| period[(n - i) % n] as u32).collect();
    let base = ConjClassWord::new(&exps)?;
    // the stabilizer generator may be a proper root of m
    let mut k = 1;
    let target = BigInt::from(t);
    loop {
        let w = base.power(k)?;
        match w.trace().cmp(&target) {
            Ordering::Equal => return Ok(w),
            Ordering::Greater => {
                return Err(Error::NumericOverflow(format!(
                    "no power of {base} has trace {t}"
                )));
            }
            Ordering::Less => k += 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_of_conjugated_words() {
        let g = Mat2i([2, 1, 7, 4]);
        for exps in [
            vec![1, 1],
            vec![2, 1],
            vec![1, 2],
            vec![3, 1, 1, 2],
            vec![1, 1, 1, 1],
            vec![2, 5, 1, 3],
        ] {
            let w = ConjClassWord::new(&exps).unwrap();
            let m = w.matrix().to_mat2i().unwrap();
            let conj = g.try_mul(&m).unwrap().try_mul(&g.inverse()).unwrap();
            assert_eq!(class_of_matrix(&conj).unwrap(), w, "{exps:?}");
            assert_eq!(class_of_matrix(&conj.neg()).unwrap(), w);
        }
    }

    #[test]
    fn word_matrices() {
        let m = word_to_matrix(&[1, 1]).unwrap();
        assert_eq!(m, MappingClass::from_i64(1, 1, 1, 2).unwrap());
        assert_eq!(word_to_matrix(&[2, 1]).unwrap().trace(), BigInt::from(4));
        assert!(word_to_matrix(&[]).is_err());
    }

    #[test]
    fn canonical_and_primitive() {
        assert_eq!(canonical_rotation(&[2, 1, 1, 3]), vec![1, 3, 2, 1]);
        assert!(is_primitive(&[1, 2]));
        assert!(!is_primitive(&[1, 2, 1, 2]));
        assert!(is_primitive(&[1, 2, 1, 3]));
        let w = ConjClassWord::new(&[1, 1]).unwrap();
        let w3 = w.power(3).unwrap();
        assert!(!w3.primitive());
        assert!((w3.teich_length() - 3.0 * w.teich_length()).abs() < 1e-12);
    }

    #[test]
    fn shortest_class() {
        let v = enumerate_classes(1.0, &EnumOptions::default()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].word.exponents(), &[1, 1]);
        assert!((v[0].word.teich_length() - 1.5f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn per_trace_primitive_counts() {
        let opts = EnumOptions {
            primitive_only: true,
            ..Default::default()
        };
        let raw = enumerate_raw((29.0f64 / 2.0).acosh() + 1e-9, &opts).unwrap();
        let counts: Vec<usize> = (3..30)
            .map(|t| raw.iter().filter(|c| c.trace == t).count())
            .collect();
        assert_eq!(
            counts,
            vec![
                1, 2, 2, 3, 2, 4, 2, 6, 3, 4, 4, 6, 4, 6, 4, 7, 4, 10, 2, 12, 4, 4, 8, 12, 5, 8, 8
            ]
        );
    }

    #[test]
    fn axis_systole_examples() {
        let w = ConjClassWord::new(&[1, 1]).unwrap();
        let v = min_systole_along_axis(&w, 0.02).unwrap();
        // highest point of the axis is at height sqrt(5)/2
        assert!((v - 2.0 / 5f64.sqrt()).abs() < 1e-9, "{v}");
        let deep = ConjClassWord::new(&[20, 20]).unwrap();
        assert!(min_systole_along_axis(&deep, 0.02).unwrap() <= 0.2);
        let a = min_systole_along_axis(&ConjClassWord::new(&[1, 3, 2, 1]).unwrap(), 0.02).unwrap();
        let m = word_to_matrix(&[2, 1, 1, 3]).unwrap();
        let b = min_systole_on_axis(&m, length_from_trace(&m.trace()), 0.02).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn overflow_safe_length() {
        let t = 1e9f64;
        let direct = (t / 2.0).acosh();
        assert!((length_from_trace_f64(t) - direct).abs() < 1e-12);
    }
}
