//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bilat::bands::{
    bloch_cos_phi, cos_phi_odd, double_cell_kard, find_band_edges, kard_at, BandScan, EdgeKind,
};
use bilat::deltamodel::{
    delta_bragg_point, delta_gap_edges, delta_half_cell, half_trace, DeltaSpec, DEFAULT_GAP_WINDOW,
};
use bilat::device::{reverse_device, HalfCellSpec, Ordering};
use bilat::oracle::{
    compare, convergence_table, delta_free_w, delta_limit_w, integrate_w, OracleConfig,
};
use bilat::tmatrix::{
    compose, device_m, device_transmission, device_w, half_cell_w, reverse_half_cell, w_power_cheb,
    w_power_direct, WMatrix,
};
use bilat::transmission::{
    envelopes, find_bound_crossing, find_transparent, transmission_closed_form,
    transparent_energy_of_device, Biperiodic,
};

const DELTA_EDGE_TOL_PI: f64 = 0.01;
const DELTA_BRAGG_TOL_PI: f64 = 0.005;
const DEVICE_ENERGY_TOL_MEV: f64 = 3.0;
const SPLIT_GAP_TOL_MEV: f64 = 0.5;
const SYMMETRIC_GAP_MAX_MEV: f64 = 0.05;
const N_INDEPENDENCE_TOL_MEV: f64 = 1e-4;
const BOUND_TOL: f64 = 1e-9;
const CROSSING_TOL_MEV: f64 = 1e-7;
const HALF_INTEGER_TOL: f64 = 1e-3;
const ORACLE_FINEST_TOL: f64 = 1e-8;

const SCAN_RANGE: (f64, f64) = (60.0, 140.0);
const SCAN_POINTS: usize = 4001;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id} ({name}): {detail}");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn scan(spec: &HalfCellSpec) -> BandScan {
    find_band_edges(spec, SCAN_RANGE, SCAN_POINTS).unwrap()
}

/// The two bands either side of the first split gap.
fn split_bands(s: &BandScan) -> ((f64, f64), (f64, f64)) {
    let i = s
        .edges
        .iter()
        .position(|e| e.kind == EdgeKind::GapLower)
        .expect("no split gap in scan window");
    let lower = (s.edges[i - 1].energy, s.edges[i].energy);
    let upper = (s.edges[i + 1].energy, s.edges[i + 2].energy);
    (lower, upper)
}

fn reference() -> HalfCellSpec {
    HalfCellSpec::gaas_reference()
}

#[test]
fn criterion_1_delta_model() {
    let start = Instant::now();
    let spec = DeltaSpec::reference(0.10);
    let (b, c) = delta_gap_edges(&spec, DEFAULT_GAP_WINDOW).unwrap();
    let bragg = delta_bragg_point(&spec, (0.7 * PI, 0.9 * PI)).unwrap();
    let top = bisect_simple(
        |kd| half_trace(kd, spec.omega_d) + 1.0,
        0.95 * PI,
        1.05 * PI,
    );
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (b / PI - 0.77).abs() <= DELTA_EDGE_TOL_PI
        && (c / PI - 0.89).abs() <= DELTA_EDGE_TOL_PI
        && (bragg / PI - 0.830).abs() <= DELTA_BRAGG_TOL_PI
        && (top / PI - 1.0).abs() <= DELTA_EDGE_TOL_PI
        && elapsed < 1.0;
    report(
        1,
        "delta model",
        ok,
        format!(
            "edges {:.4}π, {:.4}π; bragg {:.4}π; band top {:.4}π; {elapsed:.3} s",
            b / PI,
            c / PI,
            bragg / PI,
            top / PI
        ),
    );
}

fn bisect_simple(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_2_reference_device() {
    let start = Instant::now();
    let wide = reference().oriented(Ordering::WideFirst);
    let narrow = reference().oriented(Ordering::NarrowFirst);
    let s = scan(&wide);
    let (lower, upper) = split_bands(&s);
    let wide_lower = find_transparent(&wide, lower).unwrap();
    let wide_upper = find_transparent(&wide, upper).unwrap();
    let narrow_lower = find_transparent(&narrow, lower).unwrap();
    let narrow_upper = find_transparent(&narrow, upper).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let near = |x: f64, y: f64| (x - y).abs() <= DEVICE_ENERGY_TOL_MEV;
    let inside = |e: Option<f64>, band: (f64, f64)| e.is_some_and(|e| e > band.0 && e < band.1);
    let ok = near(lower.0, 92.0)
        && near(lower.1, 97.5)
        && near(upper.0, 112.0)
        && inside(wide_lower, lower)
        && wide_lower.is_some_and(|e| near(e, 97.4))
        && inside(narrow_upper, upper)
        && narrow_upper.is_some_and(|e| near(e, 110.5))
        && wide_upper.is_none()
        && narrow_lower.is_none()
        && s.warnings.is_empty()
        && elapsed < 5.0;
    report(
        2,
        "reference device",
        ok,
        format!(
            "lower band [{:.3}, {:.3}], gap [{:.3}, {:.3}], transparent wide/lower {:?}, narrow/upper {:?}, wide/upper {:?}, narrow/lower {:?}; {elapsed:.3} s",
            lower.0, lower.1, lower.1, upper.0, wide_lower, narrow_upper, wide_upper, narrow_lower
        ),
    );
}

#[test]
fn criterion_3_small_asymmetry() {
    let split = |wide: f64, narrow: f64| {
        let s = scan(&HalfCellSpec::with_wells(wide, narrow));
        let gaps = s.split_gaps();
        assert_eq!(gaps.len(), 1, "expected one split gap, got {gaps:?}");
        gaps[0].1 - gaps[0].0
    };
    let asym = split(4.1, 4.0);
    let sym = split(4.05, 4.05);
    let ok = (asym - 2.6).abs() <= SPLIT_GAP_TOL_MEV && sym < SYMMETRIC_GAP_MAX_MEV;
    report(
        3,
        "small asymmetry",
        ok,
        format!("4.1/4.0 nm gap {asym:.4} meV, 4.05/4.05 nm gap {sym:.2e} meV"),
    );
}

#[test]
fn criterion_4_transparent_n_independence() {
    let wide = reference().oriented(Ordering::WideFirst);
    let (lower, _) = split_bands(&scan(&wide));
    let from_half_cell = find_transparent(&wide, lower).unwrap().unwrap();
    let energies: Vec<f64> = [4, 6, 10]
        .iter()
        .map(|&n| {
            let d = reference().build_biperiodic(n, Ordering::WideFirst);
            transparent_energy_of_device(&d, lower).unwrap().unwrap()
        })
        .collect();
    let spread = energies
        .iter()
        .map(|e| (e - from_half_cell).abs())
        .fold(0.0, f64::max);
    let ok = spread < N_INDEPENDENCE_TOL_MEV;
    report(
        4,
        "transparent N-independence",
        ok,
        format!("N = 4, 6, 10 give {energies:?} meV; half-cell {from_half_cell:.9}; max spread {spread:.2e}"),
    );
}

#[test]
fn criterion_5_odd_bounds() {
    let mut worst = 0.0_f64;
    let mut details = Vec::new();
    let mut ok = true;
    for ordering in [Ordering::WideFirst, Ordering::NarrowFirst] {
        let bip = Biperiodic::new(reference(), 7, ordering);
        let spec = bip.half_cell();
        let device = bip.device();
        let (lower, upper) = split_bands(&scan(&spec));
        for band in [lower, upper] {
            let inset = 1e-6;
            for i in 0..=2000 {
                let e = band.0 + inset + (band.1 - band.0 - 2.0 * inset) * i as f64 / 2000.0;
                let kp = kard_at(&spec, e).unwrap();
                let env = envelopes(&kp).unwrap();
                let t = device_transmission(&device, e).unwrap();
                let excess = (t - env.upper).max(env.lower - t);
                worst = worst.max(excess);
            }
            // odd N: both orderings give the same T, so a crossing marks μ = 0
            // for whichever ordering is transparent in this band
            let crossing = find_bound_crossing(&spec, band).unwrap();
            let transparent =
                find_transparent(&spec, band)
                    .unwrap()
                    .or(find_transparent(&spec.swapped(), band).unwrap());
            match (crossing, transparent) {
                (Some(x), Some(m)) => {
                    let kp = kard_at(&spec, x).unwrap();
                    let pinch = 1.0 / kp.alpha.cosh().powi(2);
                    let t = device_transmission(&device, x).unwrap();
                    ok &= (x - m).abs() < CROSSING_TOL_MEV && (t - pinch).abs() < BOUND_TOL;
                    details.push(format!(
                        "{ordering:?} [{:.2}, {:.2}]: crossing {x:.9}, μ = 0 at {m:.9}, T − pinch {:.1e}",
                        band.0,
                        band.1,
                        t - pinch
                    ));
                }
                (x, m) => {
                    ok = false;
                    details.push(format!("{ordering:?}: crossing {x:?} but μ = 0 at {m:?}"));
                }
            }
        }
    }
    ok &= worst <= BOUND_TOL;
    report(
        5,
        "odd-N bounds",
        ok,
        format!("worst excursion {worst:.1e}; {}", details.join("; ")),
    );
}

#[test]
fn criterion_6_n35_half_integer_maximum() {
    let bip = Biperiodic::new(reference(), 35, Ordering::WideFirst);
    let spec = bip.half_cell();
    let (lower, upper) = split_bands(&scan(&spec));
    let device = bip.device();
    let t = |e: f64| device_transmission(&device, e).unwrap();
    let mut best = (f64::INFINITY, f64::NAN);
    let mut windows = Vec::new();
    for band in [lower, upper] {
        let et = find_bound_crossing(&spec, band).unwrap().unwrap();
        // from the transparent point to the nearer band edge
        let (lo, hi) = if et - band.0 < band.1 - et {
            (band.0 + 1e-9, et)
        } else {
            (et, band.1 - 1e-9)
        };
        windows.push(format!("[{lo:.4}, {hi:.4}]"));
        let n = 4000;
        let grid: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let ts: Vec<f64> = grid.iter().map(|&e| t(e)).collect();
        for i in 1..n {
            if ts[i] > ts[i - 1] && ts[i] >= ts[i + 1] {
                let e = golden(&t, grid[i - 1], grid[i + 1]);
                let phase = 35.0 * kard_at(&spec, e).unwrap().beta;
                let m = (phase / PI - 0.5).round();
                let res = (phase - (m + 0.5) * PI).abs();
                if res < best.0 {
                    best = (res, e);
                }
            }
        }
    }
    let ok = best.0 < HALF_INTEGER_TOL;
    report(
        6,
        "N = 35 half-integer maximum",
        ok,
        format!(
            "windows {}; best maximum at {:.6} meV with |Nβ − (m+½)π| = {:.3e} rad",
            windows.join(", "),
            best.1,
            best.0
        ),
    );
}

fn golden(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn random_spec(rng: &mut ChaCha8Rng) -> HalfCellSpec {
    HalfCellSpec {
        a: rng.gen_range(0.5..3.0),
        b: rng.gen_range(1.0..5.0),
        c: rng.gen_range(0.5..3.0),
        barrier_height: rng.gen_range(100.0..400.0),
        well_mass: rng.gen_range(0.05..0.1),
        barrier_mass: rng.gen_range(0.05..0.12),
    }
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

fn rel_w(a: &WMatrix, b: &WMatrix) -> f64 {
    let scale = a
        .entries()
        .iter()
        .chain(b.entries().iter())
        .fold(1.0_f64, |m, x| m.max(x.abs()));
    a.max_abs_diff(b) / scale
}

#[test]
fn criterion_7_identity_battery() {
    const SAMPLES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = [0.0_f64; 8];
    let mut zones_seen = std::collections::BTreeSet::new();
    let mut counts = [0usize; 8];
    let mut tries = 0;
    while counts.iter().min().copied().unwrap_or(0) < SAMPLES {
        tries += 1;
        assert!(tries < 200 * SAMPLES, "sampling stalled: {counts:?}");
        let spec = random_spec(&mut rng);
        let e = rng.gen_range(5.0..450.0);
        let n_half = rng.gen_range(1..=12usize);
        let ordering = if rng.gen_bool(0.5) {
            Ordering::WideFirst
        } else {
            Ordering::NarrowFirst
        };
        let w = half_cell_w(&spec, e);

        worst[0] = worst[0].max((w.det() - 1.0).abs());
        counts[0] += 1;

        let bip = Biperiodic::new(spec, n_half, ordering);
        let device = bip.device();
        let m = device_m(&device, e).unwrap();
        worst[1] = worst[1].max((m.flux() - 1.0).abs() / m.m11.norm_sqr().max(1.0));
        counts[1] += 1;

        let t = device_transmission(&device, e).unwrap();
        let t_rev = device_transmission(&reverse_device(&device), e).unwrap();
        worst[7] = worst[7].max(rel(t, t_rev));
        counts[7] += 1;

        let wr = half_cell_w(&bip.half_cell(), e);
        let dbl = bilat::tmatrix::double_cell_w(&wr);
        if bloch_cos_phi(&wr).allowed() {
            let k = rng.gen_range(1..=60u64);
            worst[4] = worst[4].max(rel_w(&w_power_cheb(&dbl, k), &w_power_direct(&dbl, k)));
            counts[4] += 1;
        }

        let Ok(kp) = kard_at(&bip.half_cell(), e) else {
            continue;
        };
        zones_seen.insert(kp.zone.to_string());
        worst[5] = worst[5].max(rel_w(&kp.reconstruct(), &kp.w_r));
        counts[5] += 1;

        let closed = transmission_closed_form(&kp, n_half as u32).unwrap();
        worst[6] = worst[6].max((closed - t).abs());
        counts[6] += 1;

        if kp.zone.is_allowed() {
            worst[2] = worst[2].max(double_cell_kard(&kp).residual());
            counts[2] += 1;
            let nn = rng.gen_range(0..=3u32);
            let wl = reverse_half_cell(&wr);
            let mut seq = vec![wl];
            for i in 0..2 * nn {
                seq.push(if i % 2 == 0 { wr } else { wl });
            }
            let direct = compose(&seq).unwrap().half_trace();
            worst[3] = worst[3].max((cos_phi_odd(&kp, nn).unwrap() - direct).abs());
            counts[3] += 1;
        }
    }
    let tol = [1e-10, 1e-10, 1e-9, 1e-9, 1e-10, 1e-9, 1e-9, 1e-10];
    let names = [
        "det W",
        "flux",
        "μ dual",
        "odd trace",
        "Chebyshev",
        "Kard round trip",
        "closed vs direct T",
        "reversal",
    ];
    let all_zones = ["AZ0", "AZ1", "AZ2", "AZ3", "FZ0", "FZ1", "FZ2", "FZ3"]
        .iter()
        .all(|z| zones_seen.contains(*z));
    let ok = worst.iter().zip(tol).all(|(w, t)| *w <= t) && all_zones;
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(
        7,
        "identity battery",
        ok,
        format!("{detail}; zones seen {zones_seen:?}"),
    );
}

#[test]
fn criterion_8_oracle_convergence() {
    let start = Instant::now();
    let device = reference().build_biperiodic(2, Ordering::WideFirst);
    let e = 100.0;
    let exact = device_w(&device, e);
    let widths = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let rows = convergence_table(&device, e, &exact, &widths).unwrap();
    let finest = compare(
        &integrate_w(&device, e, &OracleConfig::new(1e-3, true).unwrap()),
        &exact,
    );
    let second_order = rows[1..]
        .iter()
        .all(|r| r.ratio.is_some_and(|q| (3.5..=4.5).contains(&q)));
    let richardson_better = rows.iter().all(|r| r.richardson_diff < r.raw_diff);

    let (omega, kd) = (1.403 * PI, 0.83 * PI);
    let target = WMatrix::new(1.0, 0.0, 2.0 * omega, 1.0);
    let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&w| compare(&delta_limit_w(omega, w, kd).unwrap(), &target))
        .collect();
    let first_order = errs.windows(2).all(|p| (p[0] / p[1] - 2.0).abs() < 0.1);
    let spec = DeltaSpec::reference(0.0);
    let analytic = delta_half_cell(kd, &spec).unwrap();
    let limit =
        delta_free_w(0.5, kd) * delta_limit_w(omega, 1e-6, kd).unwrap() * delta_free_w(0.5, kd);
    let delta_ok = compare(&limit, &analytic) < 1e-4 * kd;
    let elapsed = start.elapsed().as_secs_f64();

    let ok = finest < ORACLE_FINEST_TOL
        && second_order
        && richardson_better
        && first_order
        && delta_ok
        && elapsed < 10.0;
    let ratios: Vec<String> = rows
        .iter()
        .filter_map(|r| r.ratio)
        .map(|q| format!("{q:.3}"))
        .collect();
    report(
        8,
        "oracle convergence",
        ok,
        format!(
            "finest diff {finest:.1e}; raw ratios [{}]; delta-limit errors [{}]; {elapsed:.3} s",
            ratios.join(", "),
            errs.iter()
                .map(|e| format!("{e:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}
