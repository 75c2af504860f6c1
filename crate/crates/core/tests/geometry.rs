use std::f64::consts::PI;

use proptest::prelude::*;
use teichlab::group::{MappingClass, Mat2i};
use teichlab::hyp::{
    apply_isometry, ball_area, in_fundamental_domain, reduce_fast, reduce_to_fundamental,
    sample_ball, teich_dist, ModelPoint, RealIsometry,
};
use teichlab::lattice::{count_orbit_points, quotient_dist_exact};
use teichlab::par::{stream_rng, Exec};
use teichlab::stats::{ks_pvalue, ks_statistic};
use teichlab::walk::quotient_dist;

fn point() -> impl Strategy<Value = ModelPoint> {
    (-5.0f64..5.0, -4.0f64..3.0).prop_map(|(x, ly)| ModelPoint::new(x, ly.exp()).unwrap())
}

fn isometry() -> impl Strategy<Value = RealIsometry> {
    (-3.0f64..3.0, -2.0f64..2.0, -3.0f64..3.0).prop_map(|(x, ly, t)| {
        // translate, scale, rotate about i
        let (s, c) = (0.5 * t).sin_cos();
        let rot = RealIsometry::new(c, s, -s, c).unwrap();
        RealIsometry::affine_to(ModelPoint::new(x, ly.exp()).unwrap()).compose(&rot)
    })
}

proptest! {
    #[test]
    fn distance_is_a_metric(a in point(), b in point(), c in point()) {
        let ab = teich_dist(a, b);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - teich_dist(b, a)).abs() <= 1e-12 * (1.0 + ab));
        prop_assert!(teich_dist(a, a) == 0.0);
        prop_assert!(teich_dist(a, c) <= ab + teich_dist(b, c) + 1e-9);
    }

    #[test]
    fn isometries_preserve_distance(a in point(), b in point(), g in isometry()) {
        let (ga, gb) = (apply_isometry(&g, a).unwrap(), apply_isometry(&g, b).unwrap());
        let d = teich_dist(a, b);
        prop_assert!((teich_dist(ga, gb) - d).abs() <= 1e-8 * (1.0 + d));
        let back = apply_isometry(&g.inverse(), ga).unwrap();
        prop_assert!(teich_dist(back, a) < 1e-8);
    }

    #[test]
    fn reduction_lands_in_the_domain_in_the_same_orbit(z in point()) {
        let (w, g) = reduce_to_fundamental(z);
        prop_assert!(in_fundamental_domain(w, 1e-12));
        prop_assert!(teich_dist(z.act_big(&g), w) < 1e-8);
        let (w2, m) = reduce_fast(z).unwrap();
        prop_assert_eq!(w, w2);
        prop_assert_eq!(MappingClass::from(m), g);
    }

    #[test]
    fn integer_moves_commute_with_reduction(z in point(), n in -3i64..3) {
        let moved = z.act(&Mat2i::translation(n).checked_mul(&Mat2i::S).unwrap());
        let (a, _) = reduce_to_fundamental(z);
        let (b, _) = reduce_to_fundamental(moved);
        // same orbit, and both in F: equal unless on the boundary
        if a.x().abs() < 0.5 - 1e-9 && a.x().powi(2) + a.y().powi(2) > 1.0 + 1e-9 {
            prop_assert!(teich_dist(a, b) < 1e-7);
        }
    }
}

#[test]
fn teichmueller_distance_examples() {
    assert_eq!(teich_dist(ModelPoint::i(), ModelPoint::i()), 0.0);
    assert!(
        (teich_dist(ModelPoint::i(), ModelPoint::imag(4.0).unwrap()) - 2f64.ln()).abs() < 1e-15
    );
    let s = RealIsometry::from(Mat2i::S);
    let z = apply_isometry(&s, ModelPoint::i()).unwrap();
    assert!((z.x()).abs() < 1e-15 && (z.y() - 1.0).abs() < 1e-15);
    let z = apply_isometry(&RealIsometry::from(Mat2i::translation(1)), ModelPoint::i()).unwrap();
    assert_eq!((z.x(), z.y()), (1.0, 1.0));
    assert!(RealIsometry::new(1.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn reduction_examples() {
    let (z, g) = reduce_to_fundamental(ModelPoint::new(1.0, 1.0).unwrap());
    assert!((z.x()).abs() < 1e-15 && (z.y() - 1.0).abs() < 1e-15);
    assert_eq!(g, MappingClass::from(Mat2i::translation(-1)));
    let z0 = ModelPoint::new(0.5, 0.1).unwrap();
    let (z, g) = reduce_to_fundamental(z0);
    assert!(in_fundamental_domain(z, 1e-12));
    assert!(teich_dist(z0.act_big(&g), z) < 1e-10);
}

#[test]
fn ball_samples_fill_the_ball_with_the_right_area() {
    // hit-or-miss area of a small box around the center against the sampler
    let c = ModelPoint::new(0.3, 2.0).unwrap();
    let r = 0.8;
    let mut rng = stream_rng(11, 0);
    let n = 200_000;
    let mut dists: Vec<f64> = (0..n)
        .map(|_| teich_dist(c, sample_ball(c, r, &mut rng)))
        .collect();
    assert!(dists.iter().all(|&d| d <= r + 1e-9));
    // P(d <= s) = area(s) / area(r)
    let d = ks_statistic(&mut dists, |s| ball_area(s) / ball_area(r));
    assert!(ks_pvalue(d, n) > 1e-3, "KS distance {d}");
    // inner half-radius ball gets its share of the area
    let frac = dists.iter().filter(|&&d| d <= 0.5 * r).count() as f64 / n as f64;
    let want = ball_area(0.5 * r) / ball_area(r);
    assert!((frac - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt());
}

#[test]
fn ball_area_matches_monte_carlo_on_a_grid() {
    // area of B(i, r) by quadrature over a rectangle in (x, ln y)
    let r: f64 = 0.6;
    let (ymin, ymax) = ((-2.0 * r).exp(), (2.0 * r).exp());
    let xmax = (2.0 * r).sinh();
    let n = 1200;
    let mut area = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = -xmax + 2.0 * xmax * (i as f64 + 0.5) / n as f64;
            let ly = ymin.ln() + (ymax.ln() - ymin.ln()) * (j as f64 + 0.5) / n as f64;
            let y = ly.exp();
            if teich_dist(ModelPoint::i(), ModelPoint::new(x, y).unwrap()) <= r {
                // dA = dx dy / y^2 = dx dly / y
                area += (2.0 * xmax / n as f64) * ((ymax.ln() - ymin.ln()) / n as f64) / y;
            }
        }
    }
    assert!(
        (area - ball_area(r)).abs() / ball_area(r) < 5e-3,
        "{area} vs {}",
        ball_area(r)
    );
    assert!((ball_area(r) - 2.0 * PI * ((2.0 * r).cosh() - 1.0)).abs() < 1e-15);
}

/// Orbit of i: `d_hyp(i, g i)` has `cosh = (a^2 + b^2 + c^2 + d^2) / 2`, and
/// the stabilizer `{±1, ±S}` has four elements.
fn brute_force_orbit_of_i(tau: f64) -> u64 {
    let bound = 2.0 * (2.0 * tau).cosh();
    let m = bound.sqrt().floor() as i64;
    let mut n = 0u64;
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                for d in -m..=m {
                    if a * d - b * c == 1
                        && ((a * a + b * b + c * c + d * d) as f64) <= bound * (1.0 + 1e-12)
                    {
                        n += 1;
                    }
                }
            }
        }
    }
    n / 4
}

#[test]
fn orbit_count_of_i_matches_brute_force() {
    for tau in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let got =
            count_orbit_points(ModelPoint::i(), ModelPoint::i(), tau, Exec::Parallel).unwrap();
        assert_eq!(got, brute_force_orbit_of_i(tau), "tau {tau}");
        assert_eq!(
            got,
            count_orbit_points(ModelPoint::i(), ModelPoint::i(), tau, Exec::Sequential).unwrap()
        );
    }
}

#[test]
fn orbit_count_of_a_generic_point_matches_brute_force() {
    let x = ModelPoint::new(0.15, 1.3).unwrap();
    let y = ModelPoint::new(-0.2, 1.1).unwrap();
    let tau = 1.8;
    let m = 40i64;
    let mut n = 0u64;
    for c in 0..=m {
        for d in -m..=m {
            if (c == 0 && d != 1) || num_gcd(c, d) != 1 {
                continue;
            }
            // every matrix with bottom row (c, d), up to sign, is T^k g0
            let g0 = complete(c, d);
            for k in -60..=60 {
                let g = Mat2i::translation(k).checked_mul(&g0).unwrap();
                if teich_dist(x, y.act(&g)) <= tau {
                    n += 1;
                }
            }
        }
    }
    assert_eq!(count_orbit_points(x, y, tau, Exec::Parallel).unwrap(), n);
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_gcd(b, a % b)
    }
}

fn complete(c: i64, d: i64) -> Mat2i {
    // a in [0, c) keeps g0 Y near the strip [0, 1]
    if c == 0 {
        return Mat2i::IDENTITY;
    }
    for a in 0..=c {
        if (a * d - 1) % c == 0 {
            return Mat2i([a, (a * d - 1) / c, c, d]);
        }
    }
    unreachable!("no completion for ({c}, {d})")
}

#[test]
fn quotient_distance_is_exact_in_the_cusp_and_an_upper_bound_elsewhere() {
    let mut rng = stream_rng(5, 0);
    use rand::Rng;
    for _ in 0..300 {
        let a = ModelPoint::new(rng.random_range(-0.5..0.5), rng.random_range(0.9..4.0)).unwrap();
        let b = ModelPoint::new(rng.random_range(-0.5..0.5), rng.random_range(0.9..4.0)).unwrap();
        let q = quotient_dist(a, b);
        let exact = quotient_dist_exact(a, b, 2.5).unwrap().unwrap();
        assert!(q >= exact - 1e-12, "{q} < {exact}");
        if a.y() >= 1.5 && b.y() >= 1.5 {
            assert!((q - exact).abs() < 1e-12, "{a:?} {b:?}: {q} vs {exact}");
        }
    }
}
