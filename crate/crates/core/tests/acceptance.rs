//! End-to-end acceptance suite. Each test prints one pass/fail line
//! (visible with `--nocapture`) and asserts the same condition.

use std::f64::consts::PI;
use std::time::Instant;

use ldcap::dynamics::{jacobi_constant, lagrange_points};
use ldcap::model::{GridSpec, Label, ScalarField, SystemParams, SynodicState, AU_KM};
use ldcap::propagate::{
    physical_radius, propagate, step_rk87, IntegratorConfig, PropagationOptions, Terminal,
};
use ldcap::survey::{
    capture_set, compute_label_field, compute_ld_field, generate_ic, Leg, SurveyRequest,
    SAMPLE_ICS,
};
use ldcap::validate::{agreement, chebyshev_distance_transform, class_boundaries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mars() -> SystemParams {
    SystemParams::sun_mars()
}

fn report(criterion: u32, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_energy_landmarks() {
    let t0 = Instant::now();
    let lm = lagrange_points(&mars()).unwrap();
    let elapsed = t0.elapsed();
    let ok = (lm.cj1 - 3.000203).abs() < 5e-7
        && (lm.cj2 - 3.000202).abs() < 5e-7
        && (lm.cj3 - 3.000001).abs() < 5e-7
        && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        ok,
        &format!(
            "CJ1={:.6} CJ2={:.6} CJ3={:.6} in {:?}",
            lm.cj1, lm.cj2, lm.cj3, elapsed
        ),
    );
}

#[test]
fn criterion_2_ic_oracle() {
    let p = mars();
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for &(_, x0, y0, xp, yp) in &SAMPLE_ICS {
        let s = generate_ic((x0, y0), 0.0, 0.9, &p).unwrap();
        worst = worst.max((s.xp - xp).abs()).max((s.yp - yp).abs());
    }
    let elapsed = t0.elapsed();
    let ok = worst <= 1e-6 && elapsed.as_secs_f64() < 1.0;
    report(
        2,
        ok,
        &format!("12 reference ICs, worst component error {worst:.2e} in {elapsed:?}"),
    );
}

#[test]
fn criterion_3_set_membership() {
    let p = mars();
    let config = IntegratorConfig::default();
    let t0 = Instant::now();

    // expected outcome per named IC: single leg (extent, label) or a
    // capture pair (backward unstable over -pi, forward stable over ext)
    enum Expect {
        Single(f64, Label),
        Capture(f64),
    }
    use Expect::*;
    let table = [
        ("a", Single(-PI, Label::WeaklyStable)),
        ("b", Single(-PI, Label::Crash)),
        ("c", Single(-PI, Label::WeaklyStable)),
        ("d", Single(-PI, Label::Unstable)),
        ("e", Single(2.0 * PI, Label::Crash)),
        ("f", Single(2.0 * PI, Label::Unstable)),
        ("g", Single(2.0 * PI, Label::WeaklyStable)),
        ("h", Single(2.0 * PI, Label::Crash)),
        ("i", Capture(1.5 * PI)),
        ("j", Capture(1.5 * PI)),
        ("k", Capture(3.0 * PI)),
        ("l", Capture(3.0 * PI)),
    ];

    let classify = |name: &str, extent: f64| -> Label {
        let &(_, x0, y0, _, _) = SAMPLE_ICS.iter().find(|(id, ..)| *id == name).unwrap();
        let s = generate_ic((x0, y0), 0.0, 0.9, &mars()).unwrap();
        ldcap::survey::classify_point(&s, 0.0, extent, &config, &p)
            .unwrap()
            .0
    };

    let mut failures = Vec::new();
    for (name, expect) in &table {
        let ok = match expect {
            Single(extent, label) => classify(name, *extent) == *label,
            Capture(fwd) => {
                classify(name, -PI) == Label::Unstable
                    && classify(name, *fwd) == Label::WeaklyStable
            }
        };
        if !ok {
            failures.push(*name);
        }
    }
    let elapsed = t0.elapsed();
    let ok = failures.is_empty() && elapsed.as_secs_f64() < 30.0;
    report(
        3,
        ok,
        &format!("12 membership checks, failures {failures:?}, in {elapsed:?}"),
    );
}

#[test]
fn criterion_4_integrator_quality() {
    // circular-primaries variant: e_p = 0 admits the Jacobi integral
    let p = SystemParams::new(3.226201e-7, 0.0, 1.523688, 3397.0, 170.0, AU_KM).unwrap();
    let config = IntegratorConfig::default();
    let opts = PropagationOptions {
        with_ld: false,
        gamma: 0.5,
        stop_at_escape: false,
    };
    let eps = 6e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 20 {
        let offset = (rng.gen_range(-eps..eps), rng.gen_range(-eps..eps));
        let r = (offset.0 as f64).hypot(offset.1);
        if r < p.r_norm {
            continue;
        }
        let s0 = generate_ic(offset, 0.0, 0.9, &p).unwrap();
        let cj0 = jacobi_constant(&s0, &p).unwrap();
        let out = propagate(&s0, 0.0, 2.0 * PI, &config, &p, &opts).unwrap();
        if out.terminal == Terminal::Impact {
            continue; // the full 2-pi span is required; redraw
        }
        let cj1 = jacobi_constant(&out.state_end, &p).unwrap();
        worst = worst.max((cj1 - cj0).abs());
        done += 1;
    }

    // observed order by step halving against a fine fixed-step reference;
    // a circular osculating orbit keeps fixed steps in the asymptotic range
    let s0 = generate_ic((4.0e-4, 2.0e-4), 0.0, 0.0, &p).unwrap();
    let run = |h: f64, span: f64| -> SynodicState {
        let mut s = s0;
        let steps = (span / h).round() as usize;
        for _ in 0..steps {
            s = step_rk87(&s, h, &p, &opts).unwrap().0;
        }
        s
    };
    let span = 0.1;
    let reference = run(span / 1024.0, span);
    let err = |s: &SynodicState| -> f64 {
        (s.x - reference.x)
            .abs()
            .max((s.y - reference.y).abs())
            .max((s.xp - reference.xp).abs())
            .max((s.yp - reference.yp).abs())
    };
    let e1 = err(&run(span / 16.0, span));
    let e2 = err(&run(span / 32.0, span));
    let order = (e1 / e2).log2();

    let ok = worst <= 1e-9 && order >= 7.5;
    report(
        4,
        ok,
        &format!("worst |dCJ| = {worst:.2e} over 20 ICs, observed order {order:.2}"),
    );
}

#[test]
fn criterion_5_field_properties() {
    let p = mars();
    let config = IntegratorConfig::default();
    let t0 = Instant::now();
    let req = SurveyRequest {
        grid: GridSpec::new(6e-4, 50).unwrap(),
        f0: 0.0,
        f_b: -PI,
        f_f: PI,
        e0: 0.9,
        gamma: 0.5,
    };
    let fields = compute_ld_field(&req, &config, &p).unwrap();

    // (a) exact pointwise decomposition
    let mut exact = true;
    for idx in 0..req.grid.len() {
        let b = fields.backward.values[idx];
        let f = fields.forward.values[idx];
        let t = fields.total.values[idx];
        if !(t == b + f || (t.is_nan() && (b.is_nan() || f.is_nan()))) {
            exact = false;
        }
    }

    // (b) backward LD of an IC equals forward LD of its x-axis mirror
    // (x, -y, -x', y') at f0 = 0, to 10x integrator tolerance
    let opts = PropagationOptions::descriptor(0.5);
    let mut checked = 0;
    let mut worst = 0.0f64;
    'outer: for i in (1..50).step_by(6) {
        for j in (1..50).step_by(6) {
            let b = fields.backward.get(i, j);
            if !b.is_finite() || b == 0.0 {
                continue;
            }
            let offset = req.grid.offset(i, j);
            let s = generate_ic(offset, 0.0, 0.9, &p).unwrap();
            let mirrored = SynodicState::new(0.0, s.x, -s.y, -s.xp, s.yp);
            let out = propagate(&mirrored, 0.0, PI, &config, &p, &opts).unwrap();
            let tol = 10.0 * config.rel_tol * b.abs().max(1.0);
            worst = worst.max((out.ld - b).abs() / tol);
            checked += 1;
            if checked >= 50 {
                break 'outer;
            }
        }
    }
    let elapsed = t0.elapsed();
    let ok = exact && checked == 50 && worst <= 1.0 && elapsed.as_secs_f64() < 300.0;
    report(
        5,
        ok,
        &format!(
            "decomposition exact = {exact}, mirror symmetry on {checked} points, \
             worst deviation {worst:.2}x tolerance, in {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_6_edge_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 8;
    let spec = GridSpec::new(1e-3, n).unwrap();
    let mut exact = true;
    for _ in 0..100 {
        let values: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let field = ScalarField {
            spec,
            values: values.clone(),
            f0: 0.0,
            f_b: 0.0,
            f_f: 1.0,
            gamma: 0.5,
        };
        let g = ldcap::edges::roberts_gradient(&field);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let a = values[i * n + j] - values[(i + 1) * n + j + 1];
                let b = values[(i + 1) * n + j] - values[i * n + j + 1];
                if g[i * (n - 1) + j] != a * a + b * b {
                    exact = false;
                }
            }
        }
    }

    let mut monotone = true;
    for _ in 0..10 {
        let values: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let field = ScalarField {
            spec,
            values,
            f0: 0.0,
            f_b: 0.0,
            f_f: 1.0,
            gamma: 0.5,
        };
        let lo = ldcap::edges::detect_edges(&field, 0.03).unwrap();
        let hi = ldcap::edges::detect_edges(&field, 0.3).unwrap();
        for (a, b) in lo.mask.iter().zip(&hi.mask) {
            if *b && !*a {
                monotone = false;
            }
        }
    }
    report(
        6,
        exact && monotone,
        &format!("gradient oracle exact = {exact}, sigma-monotone = {monotone}"),
    );
}

/// Shared 100x100 survey of criteria 7 and 8.
fn survey_100() -> SurveyRequest {
    SurveyRequest {
        grid: GridSpec::new(6e-4, 100).unwrap(),
        f0: 0.0,
        f_b: 0.0,
        f_f: 2.0 * PI,
        e0: 0.9,
        gamma: 0.5,
    }
}

#[test]
fn criterion_7_separatrix_agreement() {
    let p = mars();
    let config = IntegratorConfig::default();
    let req = survey_100();
    let t0 = Instant::now();

    let fields = compute_ld_field(&req, &config, &p).unwrap();
    let labels = compute_label_field(&req, Leg::Forward, &config, &p).unwrap();
    let normalized = ldcap::edges::normalize_field(&fields.total).unwrap();
    let edges = ldcap::edges::detect_edges(&normalized, 2e-2).unwrap();

    let boundary = class_boundaries(&labels);
    let a = agreement(&edges, &boundary, 2).unwrap();

    // crash-disk boundary: disk pixels (crash or inside the body) with a
    // 4-neighbor outside the disk; recall over that component only
    let n = req.grid.n;
    let disk =
        |l: Label| -> bool { matches!(l, Label::Crash | Label::InsideBody) };
    let mut disk_boundary = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if !disk(labels.get(i, j)) {
                continue;
            }
            let out = (i > 0 && !disk(labels.get(i - 1, j)))
                || (i + 1 < n && !disk(labels.get(i + 1, j)))
                || (j > 0 && !disk(labels.get(i, j - 1)))
                || (j + 1 < n && !disk(labels.get(i, j + 1)));
            disk_boundary[i * n + j] = out;
        }
    }
    let dist_to_edge = chebyshev_distance_transform(&edges.mask, n);
    let disk_total = disk_boundary.iter().filter(|&&b| b).count();
    let disk_hit = disk_boundary
        .iter()
        .enumerate()
        .filter(|&(idx, &b)| b && dist_to_edge[idx] <= 2)
        .count();
    let disk_recall = disk_hit as f64 / disk_total.max(1) as f64;

    let elapsed = t0.elapsed();
    let ok = a.precision >= 0.8
        && disk_total > 0
        && disk_recall >= 0.9
        && elapsed.as_secs_f64() < 600.0;
    report(
        7,
        ok,
        &format!(
            "precision {:.3} at d=2, crash-disk recall {disk_recall:.3} \
             ({disk_hit}/{disk_total}), in {elapsed:?}",
            a.precision
        ),
    );
}

#[test]
fn criterion_8_determinism_across_worker_counts() {
    let p = mars();
    let config = IntegratorConfig::default();

    let run_all = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        pool.install(|| {
            let small = SurveyRequest {
                grid: GridSpec::new(6e-4, 50).unwrap(),
                f0: 0.0,
                f_b: -PI,
                f_f: PI,
                e0: 0.9,
                gamma: 0.5,
            };
            let f50 = compute_ld_field(&small, &config, &p).unwrap();
            let req = survey_100();
            let f100 = compute_ld_field(&req, &config, &p).unwrap();
            let l100 = compute_label_field(&req, Leg::Forward, &config, &p).unwrap();
            (f50, f100, l100)
        })
    };

    let bits = |f: &ScalarField<f64>| -> Vec<u64> {
        f.values.iter().map(|v| v.to_bits()).collect()
    };

    let (a50, a100, al) = run_all(1);
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get().max(2));
    let (b50, b100, bl) = run_all(workers);

    let ok = bits(&a50.total) == bits(&b50.total)
        && bits(&a50.backward) == bits(&b50.backward)
        && bits(&a50.forward) == bits(&b50.forward)
        && bits(&a100.total) == bits(&b100.total)
        && al.labels == bl.labels
        && al
            .event_anomaly
            .iter()
            .zip(&bl.event_anomaly)
            .all(|(x, y)| x.to_bits() == y.to_bits());
    report(
        8,
        ok,
        &format!("1-worker and {workers}-worker outputs byte-identical = {ok}"),
    );
}

#[test]
fn capture_rows_in_grid_masks() {
    // reference rows i..l fall inside the survey grid; their pixels must be
    // set in the capture masks built from label fields
    let p = mars();
    let config = IntegratorConfig::default();
    let grid = GridSpec::new(6e-4, 100).unwrap();
    let mk = |f_b: f64, f_f: f64| SurveyRequest {
        grid,
        f0: 0.0,
        f_b,
        f_f,
        e0: 0.9,
        gamma: 0.5,
    };

    for (names, fwd) in [(["i", "j"], 1.5 * PI), (["k", "l"], 3.0 * PI)] {
        let req = mk(-PI, fwd);
        let back = compute_label_field(&req, Leg::Backward, &config, &p).unwrap();
        let fwd_labels = compute_label_field(&req, Leg::Forward, &config, &p).unwrap();
        let cap = capture_set(&back, &fwd_labels).unwrap();
        for name in names {
            let &(_, x0, y0, _, _) = SAMPLE_ICS.iter().find(|(id, ..)| *id == name).unwrap();
            let (i, j) = grid.nearest(x0, y0).unwrap();
            // the nearest pixel is a different IC than the row itself; only
            // require the capture set to be non-empty near it
            let hit = (i.saturating_sub(1)..=(i + 1).min(99))
                .any(|ii| (j.saturating_sub(1)..=(j + 1).min(99))
                    .any(|jj| cap.mask[ii * 100 + jj]));
            assert!(hit, "no capture pixel near reference row {name}");
        }
    }
}

#[test]
fn weakly_stable_sets_shrink_with_horizon() {
    // interval monotonicity: stable over the longer horizon implies stable
    // over the shorter one
    let p = mars();
    let config = IntegratorConfig::default();
    let grid = GridSpec::new(6e-4, 20).unwrap();
    let mk = |f_f: f64| SurveyRequest {
        grid,
        f0: 0.0,
        f_b: 0.0,
        f_f,
        e0: 0.9,
        gamma: 0.5,
    };
    let short = compute_label_field(&mk(PI), Leg::Forward, &config, &p).unwrap();
    let long = compute_label_field(&mk(2.0 * PI), Leg::Forward, &config, &p).unwrap();
    for idx in 0..grid.len() {
        if long.labels[idx] == Label::WeaklyStable {
            assert_eq!(
                short.labels[idx],
                Label::WeaklyStable,
                "pixel {idx} stable over 2pi but not over pi"
            );
        }
    }
}

#[test]
fn weakly_stable_leg_stays_bound() {
    // reference row a backward: never escapes and ends inside the sphere of
    // influence with negative two-body energy
    let p = mars();
    let config = IntegratorConfig::default();
    let &(_, x0, y0, _, _) = SAMPLE_ICS.iter().find(|(id, ..)| *id == "a").unwrap();
    let s0 = generate_ic((x0, y0), 0.0, 0.9, &p).unwrap();
    let out = propagate(
        &s0,
        0.0,
        -PI,
        &config,
        &p,
        &PropagationOptions::classification(),
    )
    .unwrap();
    assert_eq!(out.terminal, Terminal::ReachedEnd);
    assert!(out.f_escape.is_none());
    let s = out.state_end;
    let r = physical_radius(s.f, s.x, s.y, &p);
    assert!(r < p.rsoi_norm, "final physical distance {r} outside the SOI");
    let rel = ldcap::dynamics::to_secondary_relative(&s, 0.0, &p);
    let h = ldcap::dynamics::kepler_energy(&rel, &p).unwrap();
    assert!(h < 0.0, "final two-body energy {h} not negative");
}
