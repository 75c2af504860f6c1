//! Experiment driver: one function per experiment, each filling a
//! [`CountReport`] with rows, derived constants and named checks.

pub mod config;

use std::f64::consts::PI;
use std::time::Instant;

pub use config::{Experiment, ExperimentConfig, Kind, ParamSpec};

use crate::error::{Error, Result};
use crate::flow::{
    census_from_events, close_orbit, mixing_correlation, recurrence_decay, recurrence_events,
    CensusOptions, FlowBox, FrameBox, FrameSet, CENSUS_CSV_HEADER,
};
use crate::group::MappingClass;
use crate::hyp::{ModelPoint, MODEL};
use crate::lattice::{
    chain_bound_audit, count_orbit_points, g_factor, net_image_audit, spread_count,
};
use crate::mcg::{
    enumerate_classes, enumerate_raw, length_from_trace_f64, thin_fraction, EnumOptions,
    CLASS_CSV_HEADER,
};
use crate::par::{with_workers, Exec};
use crate::product::{
    thick_points, thin_points, verify_contraction, verify_system, ContractionConfig,
};
use crate::report::{fmt9, CountReport};
use crate::stats::linfit;
use crate::torus::BiasParams;
use crate::walk::{
    build_net, count_trajectories, q_recursion_audit, sample_trajectories, ThinFilter, WalkOptions,
};

const EXEC: Exec = Exec::Parallel;

/// Run the configured experiment on the configured worker pool.
pub fn run(cfg: &ExperimentConfig) -> Result<CountReport> {
    let start = Instant::now();
    let mut rep = with_workers(cfg.workers, || -> Result<CountReport> {
        let mut rep = CountReport::new(cfg.experiment.name(), cfg.seed);
        for (k, v) in cfg.echo() {
            rep.param(&k, v);
        }
        match cfg.experiment {
            Experiment::Count => count(cfg, &mut rep)?,
            Experiment::Thin => thin(cfg, &mut rep)?,
            Experiment::BiasVerify => bias_verify(cfg, &mut rep)?,
            Experiment::Walk => walk(cfg, &mut rep)?,
            Experiment::Mix => mix(cfg, &mut rep)?,
            Experiment::Close => close(cfg, &mut rep)?,
            Experiment::Lattice => lattice(cfg, &mut rep)?,
            Experiment::Veech => veech(cfg, &mut rep)?,
            Experiment::Recurrence => recurrence(cfg, &mut rep)?,
            Experiment::Assemble => assemble(cfg, &mut rep)?,
        }
        Ok(rep)
    })?;
    rep.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

fn h() -> f64 {
    MODEL.h()
}

fn prime_ratio(n: u64, r: f64) -> f64 {
    n as f64 * h() * r / (h() * r).exp()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (a, b): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    linfit(&a, &b).slope
}

/// `|diff| / se`, zero when both vanish.
fn z_score(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff.abs() / se
    }
}

fn ln_count(n: u64) -> f64 {
    if n == 0 {
        f64::NEG_INFINITY
    } else {
        (n as f64).ln()
    }
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

/// Enumeration settings, taking `cap` and `axis_step` from the config when
/// the experiment has them.
fn enum_opts(cfg: &ExperimentConfig, primitive_only: bool) -> EnumOptions {
    let has = |k: &str| cfg.experiment.params().iter().any(|p| p.key == k);
    let mut o = EnumOptions {
        primitive_only,
        exec: EXEC,
        ..Default::default()
    };
    if has("cap") {
        o.cap = cfg.count("cap");
    }
    if has("axis_step") {
        o.axis_step = cfg.real("axis_step");
    }
    o
}

fn count(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let grid = cfg.list("r_grid");
    let r_max = grid[grid.len() - 1];
    let raw = enumerate_raw(r_max, &enum_opts(cfg, false))?;
    let lens: Vec<(f64, bool)> = raw
        .iter()
        .map(|c| (length_from_trace_f64(c.trace as f64), c.primitive))
        .collect();
    let primitive_only = cfg.flag("primitive_only");
    rep.columns(&["R", "N", "ratio", "N_primitive", "ratio_primitive"]);
    let mut dev = Vec::new();
    for &r in grid {
        let all = lens.iter().filter(|(l, _)| *l <= r).count() as u64;
        let prim = lens.iter().filter(|(l, p)| *l <= r && *p).count() as u64;
        let n = if primitive_only { prim } else { all };
        dev.push((prime_ratio(n, r) - 1.0).abs());
        rep.row(vec![
            fmt9(r),
            all.to_string(),
            fmt9(prime_ratio(all, r)),
            prim.to_string(),
            fmt9(prime_ratio(prim, r)),
        ]);
    }
    let counted = if primitive_only { "primitive" } else { "all" };
    rep.derive("counted_classes", counted);
    let last = lens
        .iter()
        .filter(|(l, p)| *l <= r_max && (*p || !primitive_only))
        .count() as u64;
    let ratio = prime_ratio(last, r_max);
    rep.derive_f("ratio_at_r_max", ratio);
    rep.criterion(
        "ratio_at_r_max",
        fmt9(ratio),
        "in [0.55, 1.45]",
        (0.55..=1.45).contains(&ratio),
    );
    rep.criterion(
        "ratio_converges",
        dev.iter().map(|d| fmt9(*d)).collect::<Vec<_>>().join(" "),
        "|ratio - 1| non-increasing",
        non_increasing(&dev),
    );
    Ok(())
}

fn thin(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let deltas = cfg.list("deltas");
    let grid = cfg.list("r_grid");
    let step = cfg.real("axis_step");
    let r_max = grid[grid.len() - 1];
    let classes = enumerate_classes(r_max, &enum_opts(cfg, false))?;
    let lens: Vec<f64> = classes.iter().map(|c| c.word.teich_length()).collect();
    rep.columns(&["delta", "R", "N1", "N_enter"]);
    let mut literal_exp = Vec::new();
    let mut enter_exp = Vec::new();
    for &delta in deltas {
        // classes that reach the thin part; only these can stay in it
        let entering: Vec<usize> = (0..classes.len())
            .filter(|&i| classes[i].min_systole < delta)
            .collect();
        let fr: Vec<Result<f64>> =
            EXEC.map_slice(&entering, |&i| thin_fraction(&classes[i].word, delta, step));
        let fr: Vec<f64> = fr.into_iter().collect::<Result<_>>()?;
        let mut ln1 = Vec::new();
        let mut ln_e = Vec::new();
        for &r in grid {
            let n1 = entering
                .iter()
                .zip(&fr)
                .filter(|(&i, &f)| lens[i] <= r && f >= 1.0)
                .count() as u64;
            let ne = entering.iter().filter(|&&i| lens[i] <= r).count() as u64;
            ln1.push(ln_count(n1));
            ln_e.push(ln_count(ne));
            rep.row(vec![fmt9(delta), fmt9(r), n1.to_string(), ne.to_string()]);
        }
        literal_exp.push((delta, slope(grid, &ln1)));
        enter_exp.push((delta, slope(grid, &ln_e)));
    }
    for (d, e) in &literal_exp {
        rep.derive_f(&format!("n1_exponent_delta_{}", fmt9(*d)), *e);
    }
    for (d, e) in &enter_exp {
        rep.derive_f(&format!("enter_exponent_delta_{}", fmt9(*d)), *e);
    }
    // thresholds are read at the smallest delta; exponents must not increase with delta
    let by_delta = |v: &[(f64, f64)]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        s
    };
    let lit = by_delta(&literal_exp);
    let (lo, hi) = (h() - 1.0 - 0.3, h() - 1.0 + 0.6);
    let e0 = lit[0].1;
    rep.criterion(
        "n1_exponent_smallest_delta",
        fmt9(e0),
        &format!("in [{}, {}]", fmt9(lo), fmt9(hi)),
        e0 >= lo && e0 <= hi,
    );
    let monotone = lit
        .windows(2)
        .all(|w| w[0].1.is_finite() && w[1].1.is_finite() && w[1].1 <= w[0].1);
    rep.criterion(
        "n1_exponent_monotone",
        lit.iter().map(|x| fmt9(x.1)).collect::<Vec<_>>().join(" "),
        "non-increasing in delta",
        monotone,
    );
    let ent = by_delta(&enter_exp);
    rep.derive(
        "enter_exponents_non_increasing",
        ent.windows(2).all(|w| w[1].1 <= w[0].1),
    );
    if lit.iter().all(|x| !x.1.is_finite()) {
        rep.note("no closed geodesic stays in the thin part along its whole axis; N1 is empty at every delta");
    }
    Ok(())
}

fn bias_verify(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let s = cfg.real("s");
    let grid = cfg.list("tau_grid").to_vec();
    let samples = cfg.count("samples") as usize;
    rep.columns(&["j", "tau", "ratio", "se", "bound"]);
    let mut system_contraction = None;
    for (k, &jf) in cfg.list("j_list").iter().enumerate() {
        let j = jf as usize;
        if j < 1 || jf.fract() != 0.0 {
            return Err(Error::config(
                "j_list",
                format!("`{jf}` is not a positive integer"),
            ));
        }
        let mut cc =
            ContractionConfig::new(j, grid.clone(), samples, cfg.seed.wrapping_add(k as u64));
        cc.s = s;
        cc.exec = EXEC;
        let ir = verify_contraction(&cc)?;
        for (t, r) in ir.tau_grid.iter().zip(&ir.ratios) {
            rep.row(vec![
                j.to_string(),
                fmt9(*t),
                fmt9(r.mean),
                fmt9(r.se),
                fmt9(ir.c_j(*t)),
            ]);
        }
        rep.derive_f(&format!("raw_slope_j{j}"), ir.raw_fit.slope);
        rep.derive_f(&format!("slope_j{j}"), ir.fit.slope);
        rep.derive_f(&format!("slope_se_j{j}"), ir.fit.slope_se);
        rep.derive_f(&format!("c_const_j{j}"), ir.c_const);
        let sl = ir.fit.slope;
        rep.criterion(
            &format!("contraction_slope_j{j}"),
            fmt9(sl),
            &format!("within 0.35 of -{j}"),
            (sl + jf).abs() <= 0.35,
        );
        if j == 1 {
            system_contraction = Some(ir);
        }
    }
    let n_thin = cfg.count("system_points") as usize;
    let n_thick = cfg.count("thick_points") as usize;
    if n_thin + n_thick > 0 {
        let tau = cfg.real("system_tau");
        let contraction = match system_contraction {
            Some(c) => c,
            None => {
                let mut cc = ContractionConfig::new(1, grid.clone(), samples, cfg.seed);
                cc.s = s;
                cc.exec = EXEC;
                verify_contraction(&cc)?
            }
        };
        let params = BiasParams::standard(s, tau, 1)?;
        let mut pts = thin_points(&params, n_thin, 6.0, cfg.seed);
        pts.extend(thick_points(n_thick, 3.0, cfg.seed));
        let sys = verify_system(
            &pts,
            &params,
            &contraction,
            cfg.count("system_samples") as usize,
            cfg.seed,
            EXEC,
        )?;
        let rows = sys
            .points
            .iter()
            .map(|p| {
                format!(
                    "{};{};{};{};{};{}",
                    fmt9(p.z.x()),
                    fmt9(p.z.y()),
                    p.j,
                    fmt9(p.violation.mean),
                    fmt9(p.violation.se),
                    p.b.map_or("".into(), fmt9)
                )
            })
            .collect();
        rep.table("system", "x;y;stratum;violation;se;b", rows);
        rep.derive_f("system_c", sys.c);
        rep.derive_f("system_worst_sigma", sys.worst_sigma);
        rep.derive_f("system_max_b", sys.max_b);
        rep.derive_f("bias_k", params.k());
        rep.criterion(
            "system_thin_points",
            fmt9(sys.worst_sigma),
            "violation <= 3 se at every thin point",
            n_thin == 0 || sys.certified(),
        );
        rep.criterion(
            "system_b_finite",
            fmt9(sys.max_b),
            "b finite on W_0",
            sys.max_b.is_finite(),
        );
    }
    Ok(())
}

fn walk(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let (c1, c2, tau) = (cfg.real("c1"), cfg.real("c2"), cfg.real("tau"));
    let n_steps = cfg.count("n_steps") as usize;
    let delta = cfg.real("delta");
    let x = ModelPoint::new(0.0, cfg.real("base_height"))?;
    let net = build_net(x, cfg.real("net_radius"), c1, c2, cfg.seed)?;
    rep.derive("net_points", net.len());

    // growth of the net inside balls around X
    let grid = cfg.list("growth_grid");
    let counts: Vec<u64> = grid
        .iter()
        .map(|&t| net.count_within(x, t) as u64)
        .collect();
    let rows: Vec<String> = grid
        .iter()
        .zip(&counts)
        .map(|(t, c)| format!("{};{}", fmt9(*t), c))
        .collect();
    rep.table("net_growth", "tau;count", rows);
    let ln: Vec<f64> = counts.iter().map(|&c| ln_count(c)).collect();
    let gs = slope(grid, &ln);
    rep.derive_f("net_growth_slope", gs);
    rep.criterion(
        "net_growth_slope",
        fmt9(gs),
        "in [1.75, 2.25]",
        (1.75..=2.25).contains(&gs),
    );

    // exhaustive trajectory counts
    let mut all_opts = WalkOptions::new(tau, n_steps, None, c2);
    all_opts.cap = cfg.count("cap");
    let mut thin_opts = WalkOptions::new(tau, n_steps, Some(ThinFilter { delta }), c2);
    thin_opts.cap = all_opts.cap;
    let all = count_trajectories(&net, x, &all_opts)?;
    let filtered = count_trajectories(&net, x, &thin_opts)?;
    rep.columns(&["steps", "R", "all", "thin_filtered", "almost_closed"]);
    for (a, f) in all.per_step.iter().zip(&filtered.per_step) {
        rep.row(vec![
            a.steps.to_string(),
            fmt9(a.steps as f64 * tau),
            fmt9(a.all),
            fmt9(f.filtered),
            fmt9(f.almost_closed),
        ]);
    }
    let g_all = all.growth(|s| s.all);
    let g_thin = filtered.growth(|s| s.filtered);
    let g_closed = filtered.growth(|s| s.almost_closed);
    rep.derive_f("growth_all", g_all);
    rep.derive_f("growth_thin_filtered", g_thin);
    rep.derive_f("growth_almost_closed", g_closed);
    rep.derive_f("closed_tolerance", thin_opts.closed_tol);
    rep.criterion("growth_all", fmt9(g_all), "<= h + 0.3", g_all <= h() + 0.3);
    rep.criterion(
        "growth_thin_filtered",
        fmt9(g_thin),
        "<= h - 1 + 0.5",
        g_thin <= h() - 1.0 + 0.5,
    );

    // sampling against exhaustive at two steps
    let mut two = thin_opts;
    two.n_steps = n_steps.min(2);
    let exact = count_trajectories(&net, x, &two)?;
    let est = sample_trajectories(&net, x, &two, 20_000, cfg.seed, EXEC)?;
    let (e, s) = (
        exact.per_step.last().expect("steps"),
        est.per_step.last().expect("steps"),
    );
    let z_all = z_score(s.all - e.all, s.se[0]);
    let z_thin = z_score(s.filtered - e.filtered, s.se[1]);
    rep.derive_f("sampling_z_all", z_all);
    rep.derive_f("sampling_z_thin", z_thin);
    rep.criterion(
        "sampling_agrees",
        fmt9(z_all.max(z_thin)),
        "<= 3 se",
        z_all <= 3.0 && z_thin <= 3.0,
    );

    // q recursion with the fitted contraction constant
    let params = BiasParams::standard(cfg.real("s"), tau, 1)?;
    let t0 = tau + 0.5 * c1;
    let mut cc = ContractionConfig::new(1, vec![t0, t0 + 0.5, t0 + 1.0], 100_000, cfg.seed);
    cc.s = params.s;
    cc.exec = EXEC;
    let ir = verify_contraction(&cc)?;
    let audit = q_recursion_audit(&net, x, tau, n_steps, delta, &params, |t| ir.c_j(t))?;
    let rows = audit
        .steps
        .iter()
        .map(|q| {
            format!(
                "{};{};{};{}",
                q.steps,
                fmt9(q.q),
                fmt9(q.ratio),
                fmt9(q.bound)
            )
        })
        .collect();
    rep.table("q_recursion", "steps;q;ratio;bound", rows);
    rep.derive_f("q_packing", audit.packing);
    rep.derive_f("q_contraction", audit.contraction);
    rep.derive_f("q_one_step_bound", audit.one_step_bound);
    rep.derive_f("q_exponent", audit.exponent);
    let worst = audit
        .steps
        .iter()
        .skip(1)
        .map(|q| q.ratio / q.bound)
        .fold(0.0, f64::max);
    rep.criterion("q_one_step", fmt9(worst), "ratio/bound <= 1", worst <= 1.0);
    let qe = audit.exponent;
    rep.criterion(
        "q_exponent",
        fmt9(qe),
        "within 0.5 of h - 1",
        (qe - (h() - 1.0)).abs() <= 0.5,
    );
    Ok(())
}

fn frame_box(cfg: &ExperimentConfig) -> Result<FrameBox> {
    let c = ModelPoint::new(cfg.real("box_x"), cfg.real("box_y"))?;
    let w = cfg.real("box_width");
    if w > 2.0 * PI {
        return Err(Error::config("box_width", "exceeds 2 pi"));
    }
    FrameBox::with_measure(c, cfg.real("box_theta"), w, cfg.real("box_mu"))
}

fn mix(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let u = frame_box(cfg)?;
    let n = cfg.count("samples") as usize;
    let mu = u.measure();
    rep.derive_f("box_radius", u.radius());
    rep.derive_f("box_measure", mu);
    rep.columns(&["R", "estimate", "se", "mu", "mu_squared", "z_mu_squared"]);
    let grid = cfg.list("r_grid");
    let mut forward = Vec::new();
    for (i, &r) in grid.iter().enumerate() {
        let e = mixing_correlation(&u, r, n, cfg.seed.wrapping_add(i as u64), EXEC)?;
        let z = z_score(e.mean - mu * mu, e.se);
        rep.row(vec![
            fmt9(r),
            fmt9(e.mean),
            fmt9(e.se),
            fmt9(mu),
            fmt9(mu * mu),
            fmt9(z),
        ]);
        forward.push(e);
    }
    if let Some(i) = grid.iter().position(|&r| r == 0.0) {
        let e = forward[i];
        // the self-intersection is all of U; the only error is the sampled membership at the boundary
        let ok = (e.mean - mu).abs() <= 3.0 * e.se + 1e-12;
        rep.criterion(
            "self_intersection",
            fmt9(e.mean),
            "within 3 se of mu(U)",
            ok,
        );
    }
    let r_last = grid[grid.len() - 1];
    if r_last > 0.0 {
        let e = forward[grid.len() - 1];
        let z = z_score(e.mean - mu * mu, e.se);
        rep.derive_f("mixing_z", z);
        rep.criterion(
            "mixing_at_r_max",
            fmt9(z),
            "|estimate - mu^2| <= 3 se",
            z <= 3.0,
        );
    }
    if cfg.flag("reverse") {
        let mut worst: f64 = 0.0;
        for (i, &r) in grid.iter().enumerate().filter(|(_, &r)| r > 0.0) {
            let b = mixing_correlation(&u, -r, n, cfg.seed.wrapping_add(1000 + i as u64), EXEC)?;
            let f = forward[i];
            let z = z_score(b.mean - f.mean, (b.se * b.se + f.se * f.se).sqrt());
            rep.row(vec![
                fmt9(-r),
                fmt9(b.mean),
                fmt9(b.se),
                fmt9(mu),
                fmt9(mu * mu),
                fmt9(z_score(b.mean - mu * mu, b.se)),
            ]);
            worst = worst.max(z);
        }
        rep.derive_f("time_reversal_z", worst);
        rep.criterion(
            "time_reversal",
            fmt9(worst),
            "forward and backward within 3 se",
            worst <= 3.0,
        );
    }
    Ok(())
}

fn close(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let base = ModelPoint::new(cfg.real("box_x"), cfg.real("box_y"))?;
    match cfg.text("box_shape") {
        "flow" => {
            let u = FlowBox::with_measure(base, cfg.real("box_theta"), cfg.real("box_mu"))?;
            rep.derive_f("box_half_width", u.half_widths()[0]);
            close_with(cfg, rep, &u)
        }
        _ => {
            let u = frame_box(cfg)?;
            rep.derive_f("box_radius", u.radius());
            close_with(cfg, rep, &u)
        }
    }
}

fn close_with<B: FrameSet>(cfg: &ExperimentConfig, rep: &mut CountReport, u: &B) -> Result<()> {
    let opts = CensusOptions {
        samples: cfg.count("samples") as usize,
        seed: cfg.seed,
        delta_thick: cfg.real("delta_thick"),
        exec: EXEC,
    };
    rep.derive_f("box_measure", u.measure());
    rep.columns(&[
        "R",
        "events",
        "hyperbolic_events",
        "closed_ok",
        "eps_box",
        "c1_box",
        "worst_length_error",
        "worst_axis_distance",
        "components",
        "regular",
        "expected",
        "ratio",
        "within_factor3",
    ]);
    let mut all_closed = true;
    let mut word_ok = true;
    let mut ratios = Vec::new();
    let mut within = Vec::new();
    for (i, &r) in cfg.list("r_grid").iter().enumerate() {
        let consts = u.closing_constants(r, cfg.seed)?;
        let mut o = opts;
        o.seed = cfg.seed.wrapping_add(i as u64);
        let events = recurrence_events(u, r, &o)?;
        let mut hyperbolic = 0u64;
        let mut ok = 0u64;
        let (mut worst_len, mut worst_dist): (f64, f64) = (0.0, 0.0);
        for e in &events {
            let gamma = MappingClass::from(e.deck);
            if !gamma.is_hyperbolic() {
                continue;
            }
            hyperbolic += 1;
            let orbit = close_orbit(&e.start, r, &gamma)?;
            worst_len = worst_len.max((orbit.length - r).abs());
            worst_dist = worst_dist.max(orbit.axis_distance);
            ok += u64::from(orbit.within(r, &consts));
        }
        all_closed &= ok == hyperbolic;
        let census = census_from_events(u, r, &o, &events)?;
        for c in &census.components {
            word_ok &= (c.word.teich_length() - r).abs() <= consts.eps;
        }
        let expected = u.measure() * (h() * r).exp();
        rep.row(vec![
            fmt9(r),
            events.len().to_string(),
            hyperbolic.to_string(),
            ok.to_string(),
            fmt9(consts.eps),
            fmt9(consts.c1),
            fmt9(worst_len),
            fmt9(worst_dist),
            census.components.len().to_string(),
            census.regular_count.to_string(),
            fmt9(expected),
            fmt9(census.ratio),
            fmt9(census.within_factor3),
        ]);
        if let Some(w) = &census.warning {
            rep.note(format!("R = {}: {w}", fmt9(r)));
        }
        let rows = census.components.iter().map(|c| c.csv_row()).collect();
        rep.table(&format!("census_r_{}", fmt9(r)), CENSUS_CSV_HEADER, rows);
        ratios.push(census.ratio);
        within.push(census.within_factor3);
    }
    rep.criterion(
        "closing_all_events",
        all_closed,
        "every hyperbolic event closes within the box constants",
        all_closed,
    );
    rep.criterion(
        "closing_word_lengths",
        word_ok,
        "every component word has length within eps_box of R",
        word_ok,
    );
    let ratios_ok = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    let fmt_list = |v: &[f64]| v.iter().map(|x| fmt9(*x)).collect::<Vec<_>>().join(" ");
    rep.criterion(
        "census_ratio",
        fmt_list(&ratios),
        "in [0.5, 2] at every R",
        ratios_ok,
    );
    let dev: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let trend = dev.len() < 2 || dev[dev.len() - 1] <= dev[0];
    rep.criterion(
        "census_trend",
        fmt_list(&dev),
        "|ratio - 1| at the largest R <= at the smallest",
        trend,
    );
    let w_ok = within.iter().all(|w| *w >= 0.8);
    rep.criterion(
        "census_measures",
        fmt_list(&within),
        ">= 0.8 within a factor 3 at every R",
        w_ok,
    );
    Ok(())
}

fn lattice(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let mut systoles = cfg.list("systoles").to_vec();
    // thickest first
    systoles.sort_by(|a, b| b.total_cmp(a));
    let grid = cfg.list("tau_grid");
    if grid[grid.len() - 1] > crate::lattice::TAU_MAX {
        return Err(Error::config(
            "tau_grid",
            format!("radii above {} are out of reach", crate::lattice::TAU_MAX),
        ));
    }
    let c2 = cfg.real("c2");
    rep.columns(&["systole", "tau", "count", "ratio_raw", "ratio_corrected"]);
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut corrected: Vec<Vec<f64>> = Vec::new();
    let mut spread_rows = Vec::new();
    let mut spread_min = f64::INFINITY;
    for &sys in &systoles {
        if !(sys > 0.0 && sys <= 1.0) {
            return Err(Error::config(
                "systoles",
                format!("`{sys}` is not in (0, 1]"),
            ));
        }
        let y = ModelPoint::new(0.0, 1.0 / sys)?;
        let g2 = g_factor(y).powi(2);
        let mut rr = Vec::new();
        let mut cr = Vec::new();
        for &t in grid {
            let n = count_orbit_points(y, y, t, EXEC)?;
            let a = n as f64 / (h() * t).exp();
            rr.push(a);
            cr.push(a / g2);
            rep.row(vec![
                fmt9(sys),
                fmt9(t),
                n.to_string(),
                fmt9(a),
                fmt9(a / g2),
            ]);
        }
        raw.push(rr);
        corrected.push(cr);
        let sc = spread_count(y, c2)?;
        let ratio = sc as f64 / g2;
        spread_min = spread_min.min(ratio);
        spread_rows.push(format!("{};{};{};{}", fmt9(sys), sc, fmt9(g2), fmt9(ratio)));
    }
    rep.table("spread", "systole;count;g_squared;ratio", spread_rows);
    let max_of = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c_thick = max_of(&corrected[0]);
    let c_all = corrected
        .iter()
        .map(|v| max_of(v))
        .fold(f64::NEG_INFINITY, f64::max);
    rep.derive_f("corrected_constant_thick", c_thick);
    rep.derive_f("corrected_constant_all", c_all);
    rep.criterion(
        "orbit_bound_single_constant",
        fmt9(c_all),
        "max corrected ratio <= its value at the thickest Y",
        c_all <= c_thick * (1.0 + 1e-12),
    );
    let growth = (0..grid.len())
        .map(|k| raw[raw.len() - 1][k] / raw[0][k])
        .fold(f64::NEG_INFINITY, f64::max);
    rep.derive_f("raw_growth_thick_to_thin", growth);
    rep.criterion("orbit_raw_growth", fmt9(growth), ">= 5", growth >= 5.0);
    rep.criterion(
        "spread_ratio",
        fmt9(spread_min),
        ">= 0.25 at every Y",
        spread_min >= 0.25,
    );
    // growth exponent at the thickest point
    let ln: Vec<f64> = raw[0]
        .iter()
        .zip(grid)
        .map(|(a, t)| (a * (h() * t).exp()).ln())
        .collect();
    let ge = slope(grid, &ln);
    rep.derive_f("thick_growth_exponent", ge);

    // chain decomposition at the thickest and thinnest points
    let mut chain_rows = Vec::new();
    let mut chain_max: f64 = 0.0;
    for &sys in [systoles[0], systoles[systoles.len() - 1]].iter() {
        let x = ModelPoint::new(0.0, 1.0 / sys)?;
        for &t in grid {
            let c = chain_bound_audit(x, x, t)?;
            for (i, l) in c.links.iter().enumerate() {
                chain_rows.push(format!(
                    "{};{};{};{};{};{};{};{}",
                    fmt9(sys),
                    fmt9(t),
                    i + 1,
                    fmt9(l.d),
                    l.m,
                    l.count,
                    fmt9(l.bound),
                    fmt9(l.ratio)
                ));
                chain_max = chain_max.max(l.ratio);
            }
        }
    }
    rep.table(
        "chain",
        "systole;tau;link;length;exponent;count;bound;ratio",
        chain_rows,
    );
    rep.derive_f("chain_constant", chain_max);

    let img = net_image_audit(
        ModelPoint::i(),
        cfg.list("image_tau"),
        cfg.real("image_spacing"),
        EXEC,
    )?;
    let rows = img
        .tau_grid
        .iter()
        .zip(&img.counts)
        .map(|(t, c)| format!("{};{}", fmt9(*t), c))
        .collect();
    rep.table("net_image", "tau;count", rows);
    rep.derive_f("net_image_exponent", img.exponent);
    Ok(())
}

fn veech(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let r_max = cfg.real("r_max");
    let classes = enumerate_classes(r_max, &enum_opts(cfg, false))?;
    let hh = h();
    let lens: Vec<f64> = classes.iter().map(|c| c.word.teich_length()).collect();
    let ln_sys: Vec<f64> = classes.iter().map(|c| c.min_systole.ln()).collect();
    let sl = slope(&lens, &ln_sys);
    let eps0 = classes
        .iter()
        .zip(&lens)
        .filter(|(_, &l)| l <= 0.5 * r_max)
        .map(|(c, &l)| c.min_systole * (hh * l).exp())
        .fold(f64::INFINITY, f64::min);
    let violations = classes
        .iter()
        .zip(&lens)
        .filter(|(c, &l)| c.min_systole < eps0 * (-hh * l).exp())
        .count();
    rep.columns(&["R", "classes", "min_systole", "bound"]);
    let top = r_max.ceil() as usize;
    for k in 1..=top {
        let r = (k as f64).min(r_max);
        let sel: Vec<f64> = classes
            .iter()
            .zip(&lens)
            .filter(|(_, &l)| l <= r)
            .map(|(c, _)| c.min_systole)
            .collect();
        let m = sel.iter().cloned().fold(f64::INFINITY, f64::min);
        rep.row(vec![
            fmt9(r),
            sel.len().to_string(),
            fmt9(m),
            fmt9(eps0 * (-hh * r).exp()),
        ]);
    }
    rep.table(
        "classes",
        CLASS_CSV_HEADER,
        classes.iter().map(|c| c.csv_row()).collect(),
    );
    rep.derive_f("systole_slope", sl);
    rep.derive_f("eps0_fit", eps0);
    rep.criterion(
        "systole_slope",
        fmt9(sl),
        ">= -(h + 0.3)",
        sl >= -(hh + 0.3),
    );
    rep.criterion(
        "veech_violations",
        violations,
        "no class below eps0 e^{-h R}",
        violations == 0,
    );
    Ok(())
}

fn recurrence(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let delta = cfg.real("delta_thick");
    let theta = cfg.real("theta");
    let mc = recurrence_decay(
        delta,
        theta,
        cfg.list("mc_r_grid"),
        cfg.count("samples") as usize,
        cfg.seed,
        EXEC,
    )?;
    rep.columns(&["source", "R", "value", "se"]);
    for row in &mc.rows {
        rep.row(vec![
            "orbits".into(),
            fmt9(row.r),
            fmt9(row.fraction.mean),
            fmt9(row.fraction.se),
        ]);
    }
    let grid = cfg.list("class_r_grid");
    let step = cfg.real("axis_step");
    let classes = enumerate_classes(grid[grid.len() - 1], &enum_opts(cfg, false))?;
    let fr: Vec<Result<f64>> = EXEC.map_slice(&classes, |c| {
        if c.min_systole >= delta {
            Ok(0.0)
        } else {
            thin_fraction(&c.word, delta, step)
        }
    });
    let fr: Vec<f64> = fr.into_iter().collect::<Result<_>>()?;
    let mut ln = Vec::new();
    for &r in grid {
        let n = classes
            .iter()
            .zip(&fr)
            .filter(|(c, &f)| c.word.teich_length() <= r && f >= theta)
            .count() as u64;
        ln.push(ln_count(n));
        rep.row(vec!["classes".into(), fmt9(r), n.to_string(), fmt9(0.0)]);
    }
    let class_growth = slope(grid, &ln);
    let class_decay = h() - class_growth;
    rep.derive_f("orbit_decay", mc.decay);
    rep.derive_f("class_growth", class_growth);
    rep.derive_f("class_decay", class_decay);
    rep.criterion(
        "orbit_decay_positive",
        fmt9(mc.decay),
        "> 0",
        mc.decay > 0.0,
    );
    rep.criterion(
        "class_decay_positive",
        fmt9(class_decay),
        "> 0",
        class_decay > 0.0,
    );
    Ok(())
}

/// Band `(lo, hi]` of lengths with its class count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Sum band counts over a partition of `(0, R]` into the total and its
/// ratio against `e^{hR}/(hR)`.
pub fn telescoping_assembly(bands: &[Band]) -> Result<(u64, f64)> {
    let first = bands
        .first()
        .ok_or_else(|| Error::InvalidInput("no bands".into()))?;
    if first.lo != 0.0 {
        return Err(Error::InvalidInput(format!(
            "bands must start at 0, not {}",
            first.lo
        )));
    }
    for b in bands {
        if !(b.hi > b.lo) {
            return Err(Error::InvalidInput(format!(
                "empty band ({}, {}]",
                b.lo, b.hi
            )));
        }
    }
    for w in bands.windows(2) {
        if w[1].lo < w[0].hi {
            return Err(Error::InvalidInput(format!(
                "bands ({}, {}] and ({}, {}] overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
        if w[1].lo > w[0].hi {
            return Err(Error::InvalidInput(format!(
                "gap between {} and {}",
                w[0].hi, w[1].lo
            )));
        }
    }
    let r = bands[bands.len() - 1].hi;
    let total: u64 = bands.iter().map(|b| b.count).sum();
    Ok((total, prime_ratio(total, r)))
}

fn assemble(cfg: &ExperimentConfig, rep: &mut CountReport) -> Result<()> {
    let r = cfg.real("r");
    let eps = cfg.real("epsilon");
    let k = (1.0 / eps).round();
    if (k * eps - 1.0).abs() > 1e-9 {
        return Err(Error::config("epsilon", "1/epsilon must be an integer"));
    }
    let k = k as usize;
    let raw = enumerate_raw(
        r,
        &EnumOptions {
            exec: EXEC,
            ..Default::default()
        },
    )?;
    let lens: Vec<f64> = raw
        .iter()
        .map(|c| length_from_trace_f64(c.trace as f64))
        .collect();
    let edge = |i: usize| if i == k { r } else { r * i as f64 / k as f64 };
    let bands: Vec<Band> = (0..k)
        .map(|i| {
            let (lo, hi) = (edge(i), edge(i + 1));
            Band {
                lo,
                hi,
                count: lens.iter().filter(|&&l| l > lo && l <= hi).count() as u64,
            }
        })
        .collect();
    rep.columns(&["lo", "hi", "count"]);
    for b in &bands {
        rep.row(vec![fmt9(b.lo), fmt9(b.hi), b.count.to_string()]);
    }
    let (total, ratio) = telescoping_assembly(&bands)?;
    let direct = lens.iter().filter(|&&l| l <= r).count() as u64;
    rep.derive("total", total);
    rep.derive("direct", direct);
    rep.derive_f("ratio", ratio);
    rep.criterion(
        "assembly_matches_direct",
        total,
        &format!("= {direct}"),
        total == direct,
    );
    rep.criterion(
        "assembly_ratio",
        fmt9(ratio),
        "in [0.55, 1.45]",
        (0.55..=1.45).contains(&ratio),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembly_of_one_band_is_the_band() {
        let (t, _) = telescoping_assembly(&[Band {
            lo: 0.0,
            hi: 6.0,
            count: 17,
        }])
        .unwrap();
        assert_eq!(t, 17);
    }

    #[test]
    fn overlapping_bands_are_rejected() {
        let b = [
            Band {
                lo: 0.0,
                hi: 2.0,
                count: 1,
            },
            Band {
                lo: 1.5,
                hi: 3.0,
                count: 1,
            },
        ];
        assert!(telescoping_assembly(&b).is_err());
        let g = [
            Band {
                lo: 0.0,
                hi: 2.0,
                count: 1,
            },
            Band {
                lo: 2.5,
                hi: 3.0,
                count: 1,
            },
        ];
        assert!(telescoping_assembly(&g).is_err());
    }
}
