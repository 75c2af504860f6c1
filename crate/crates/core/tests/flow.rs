use std::f64::consts::PI;

use teichlab::flow::{
    close_orbit, flow, flowed_box_measure, mixing_correlation, FlowBox, Frame, FrameBox, FrameSet,
    TOTAL_VOLUME,
};
use teichlab::hyp::{direction_to, in_fundamental_domain, teich_dist, ModelPoint};
use teichlab::mcg::{axis_endpoints, axis_point, ConjClassWord};
use teichlab::par::{stream_rng, Exec};

fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
    let same = a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol);
    let flipped = a.iter().zip(&b).all(|(x, y)| (x + y).abs() <= tol);
    same || flipped
}

#[test]
fn deck_tracks_the_reduction_exactly() {
    let mut rng = stream_rng(3, 0);
    use rand::Rng;
    for _ in 0..200 {
        let q = Frame::at(
            ModelPoint::new(rng.random_range(-0.5..0.5), rng.random_range(1.0..3.0)).unwrap(),
            rng.random_range(-PI..PI),
        );
        let t = rng.random_range(0.0..6.0);
        let f = flow(&q, t);
        assert!(in_fundamental_domain(f.base(), 1e-9));
        let [a, b, c, d] = f.deck().to_f64();
        let g = q.flow_unreduced(t).matrix();
        let moved = [
            a * g[0] + b * g[2],
            a * g[1] + b * g[3],
            c * g[0] + d * g[2],
            c * g[1] + d * g[3],
        ];
        assert!(close(
            moved,
            f.matrix(),
            1e-8 * (1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        ));
    }
}

#[test]
fn flow_is_additive() {
    let q = Frame::at(ModelPoint::new(0.21, 1.37).unwrap(), 0.9);
    for (s, t) in [(0.5, 1.25), (1.0, 2.0), (2.5, 0.75)] {
        let two = flow(&flow(&q, s), t);
        let one = flow(&q, s + t);
        assert!(teich_dist(two.base(), one.base()) < 1e-8);
        let dth = (two.direction() - one.direction()).rem_euclid(2.0 * PI);
        assert!(dth.min(2.0 * PI - dth) < 1e-7);
    }
}

#[test]
fn golden_geodesic_closes_exactly() {
    let w = ConjClassWord::new(&[1, 1]).unwrap();
    let gamma = w.matrix();
    let len = w.teich_length();
    assert!((len - 1.5f64.acosh()).abs() < 1e-15);
    let (xm, xp) = axis_endpoints(&gamma).unwrap();
    let p = axis_point(xm, xp, 0.0);
    let q = Frame::at(p, direction_to(p, Some(xp)));
    let end = q.flow_unreduced(len).base();
    // flowing towards the attracting end translates by gamma
    // the translation along the axis is gamma itself
    assert!(teich_dist(end, p.act_big(&gamma)) < 1e-9);
    let orbit = close_orbit(&q, len, &gamma).unwrap();
    assert!((orbit.length - len).abs() < 1e-12);
    assert!(orbit.axis_distance < 1e-9);
    assert_eq!(orbit.word().unwrap(), w);
}

#[test]
fn perturbed_start_stays_close_to_the_axis() {
    let w = ConjClassWord::new(&[1, 1]).unwrap();
    let gamma = w.matrix();
    let (xm, xp) = axis_endpoints(&gamma).unwrap();
    let p = axis_point(xm, xp, 0.0);
    let off = ModelPoint::new(p.x() + 1e-3, p.y()).unwrap();
    let q = Frame::at(off, direction_to(off, Some(xp)) + 1e-3);
    let orbit = close_orbit(&q, w.teich_length(), &gamma).unwrap();
    assert!(
        orbit.axis_distance > 0.0 && orbit.axis_distance < 2e-3,
        "{}",
        orbit.axis_distance
    );
    assert_eq!(orbit.word().unwrap(), w);
}

fn flow_box() -> FlowBox {
    FlowBox::with_measure(ModelPoint::new(0.0, 1.4).unwrap(), PI, 0.015).unwrap()
}

#[test]
fn flow_box_measure_solves_the_size_equation() {
    let b = flow_box();
    assert!((b.measure() - 0.015).abs() < 1e-12);
    let [h, _, _] = b.half_widths();
    assert!((16.0 * h * h * (2.0 * h).sinh() / TOTAL_VOLUME - 0.015).abs() < 1e-12);
    assert!(FlowBox::new(ModelPoint::new(0.45, 1.2).unwrap(), 0.0, [0.2; 3]).is_err());
    assert!(FlowBox::new(ModelPoint::new(0.0, 1.4).unwrap(), 0.0, [0.0, 0.1, 0.1]).is_err());
}

#[test]
fn flow_box_samples_have_matching_coordinates() {
    let b = flow_box();
    let mut rng = stream_rng(9, 0);
    for _ in 0..1000 {
        let q = b.sample(&mut rng);
        assert!(b.contains(&q));
    }
    for g in b.extreme_frames() {
        let c = b.coordinates(&g).unwrap();
        assert!(c
            .iter()
            .zip(b.half_widths())
            .all(|(x, h)| x.abs() <= h + 1e-12));
    }
}

/// Haar-random frames land in a box with probability equal to its measure,
/// before and after flowing (the flow preserves Haar measure).
fn haar_hits(u: &impl FrameSet, t: f64) {
    let n = 2_000_000;
    let est = flowed_box_measure(u, t, n, 21, Exec::Parallel).unwrap();
    // cusp truncation removes a relative 1e-3 / (pi/3) of the volume
    let want = u.measure() / (1.0 - 1e-3 * 3.0 / PI);
    assert!(
        (est.mean - want).abs() < 4.0 * est.se.max(1e-5),
        "t {t}: {} ± {} vs {want}",
        est.mean,
        est.se
    );
}

#[test]
fn flow_box_has_its_haar_measure() {
    let b = flow_box();
    haar_hits(&b, 0.0);
    haar_hits(&b, 1.5);
}

#[test]
fn ball_box_has_its_haar_measure() {
    let b =
        FrameBox::with_measure(ModelPoint::new(0.1, 1.5).unwrap(), 0.0, PI / 2.0, 0.02).unwrap();
    haar_hits(&b, 0.0);
    haar_hits(&b, 2.0);
}

#[test]
fn mixing_at_time_zero_is_the_measure() {
    let b = flow_box();
    let e = mixing_correlation(&b, 0.0, 100_000, 1, Exec::Parallel).unwrap();
    assert!((e.mean - b.measure()).abs() < 1e-15 && e.se == 0.0);
    assert!(mixing_correlation(&b, 1.0, 10, 1, Exec::Parallel).is_err());
}

#[test]
fn mixing_is_schedule_independent() {
    let b = flow_box();
    let p = mixing_correlation(&b, 2.0, 100_000, 4, Exec::Parallel).unwrap();
    let s = mixing_correlation(&b, 2.0, 100_000, 4, Exec::Sequential).unwrap();
    assert_eq!(p, s);
}

#[test]
fn closing_constants_need_a_small_box() {
    let small = flow_box().closing_constants(4.0, 0).unwrap();
    assert!(small.diameter > 0.0 && small.diameter < 1.0);
    assert!(small.eps > 0.0 && small.c1 > 0.0);
    let wide =
        FrameBox::with_measure(ModelPoint::new(0.1, 1.5).unwrap(), 0.0, PI / 2.0, 0.02).unwrap();
    assert!(wide.closing_constants(4.0, 0).is_err());
}
