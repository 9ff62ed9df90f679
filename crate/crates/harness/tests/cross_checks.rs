//! Cross-module checks: dense oracle vs closed forms, Monte Carlo vs both,
//! and qualitative growth laws across dimensions.

use harness::correlations::{
    g11_exact, g12_exact, g21_exact, g22_exact, CorrelationKind, CorrelationQuery,
};
use harness::estimators::{accumulate, displacement_variance, EstimatorGrid};
use harness::oracle::{build_form, covariance, spacetime_pair_correlation, FormSpec};
use harness::rng::{derive_seed, CounterRng, StreamRng, TAG_SEQ, TAG_SWEEP};
use harness::sim::{
    collect_snapshots, half_sweep, sequential_update, Dynamics, InterfaceState, SimConfig,
};

/// Max |dense - closed form| over every in-guard query with t <= t_cap on
/// the free-time form of the given extents.
fn dense_worst_error(t_ext: usize, l: usize, t_cap: u64) -> f64 {
    let form = build_form(FormSpec::free(t_ext, l)).unwrap();
    let mut cov = covariance(&form, 0).unwrap();
    let mut worst = 0.0f64;
    for kind in CorrelationKind::ALL {
        for t in kind.min_rounds()..=t_cap {
            let jmax = (t_ext.min(l) as i64) / 2 - 4 - 2 * t as i64;
            for j in -jmax..=jmax {
                if !kind.offset_is_valid(j) {
                    continue;
                }
                let dense = spacetime_pair_correlation(&form, &mut cov, kind, t, j).unwrap();
                let exact = CorrelationQuery::new(kind, t, j).unwrap().exact().unwrap();
                worst = worst.max((dense - exact).abs());
            }
        }
    }
    worst
}

#[test]
fn dense_oracle_tracks_closed_forms_as_the_torus_grows() {
    // The finite-ring gap is the bridge constraint, 4/L across cells.
    let e16 = dense_worst_error(16, 16, 2);
    let e32 = dense_worst_error(32, 32, 2);
    assert!(e32 < e16, "{e32} !< {e16}");
    assert!(e16 < 4.0 / 16.0 + 0.06, "e16 = {e16}");
    assert!(e32 < 4.0 / 32.0 + 0.03, "e32 = {e32}");
}

#[test]
fn dense_oracle_confirms_even_symmetry_of_the_space_kernel() {
    let form = build_form(FormSpec::free(32, 32)).unwrap();
    let mut cov = covariance(&form, 0).unwrap();
    let plus = spacetime_pair_correlation(&form, &mut cov, CorrelationKind::SpaceSpace, 1, 2)
        .unwrap();
    let minus = spacetime_pair_correlation(&form, &mut cov, CorrelationKind::SpaceSpace, 1, -2)
        .unwrap();
    // both near +0.5: even, not odd, in j
    assert!((plus - minus).abs() < 1e-9, "{plus} vs {minus}");
    assert!((plus - 0.5).abs() < 0.2, "{plus}");
}

#[test]
fn checkerboard_estimates_match_closed_forms() {
    let l = 1 << 14;
    let t_max = 5u64;
    let t1 = 100u64;
    let config = SimConfig {
        length: l,
        dim: 1,
        dynamics: Dynamics::SublatticeParallel,
        seed: 20_240_601,
        warmup_rounds: 0,
        measure_rounds: 2 * (t1 + t_max + 1),
        snapshot_stride: 2,
        replicas: 1,
    };
    let snaps = collect_snapshots(&config).unwrap();

    let g11 = accumulate(
        &snaps,
        CorrelationKind::SpaceSpace,
        EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, t_max, 0),
        t1,
        10,
    )
    .unwrap();
    let g22 = accumulate(
        &snaps,
        CorrelationKind::TimeTime,
        EstimatorGrid::checkerboard(CorrelationKind::TimeTime, t_max, 0),
        t1,
        10,
    )
    .unwrap();
    let g12 = accumulate(
        &snaps,
        CorrelationKind::SpaceTime,
        EstimatorGrid::checkerboard(CorrelationKind::SpaceTime, t_max, 1),
        t1,
        10,
    )
    .unwrap();

    for t in 1..=t_max {
        let (est, err) = (g11.estimate(t, 0).unwrap(), g11.stderr(t, 0).unwrap());
        let exact = g11_exact(t, 0).unwrap();
        assert!(
            (est - exact).abs() < 4.0 * err,
            "g11({t},0): {est} vs {exact} (err {err:.2e})"
        );
        let (est, err) = (g22.estimate(t, 0).unwrap(), g22.stderr(t, 0).unwrap());
        let exact = g22_exact(t, 0).unwrap();
        assert!(
            (est - exact).abs() < 4.0 * err,
            "g22({t},0): {est} vs {exact} (err {err:.2e})"
        );
        let (est, err) = (g12.estimate(t, 1).unwrap(), g12.stderr(t, 1).unwrap());
        let exact = g12_exact(t, 1).unwrap();
        assert!(
            (est - exact).abs() < 4.0 * err,
            "g12({t},1): {est} vs {exact} (err {err:.2e})"
        );
    }
}

#[test]
fn estimator_symmetries_hold_for_random_sequential_runs() {
    let l = 1 << 13;
    let t1 = 80u64;
    let t = 3u64;
    let config = SimConfig {
        length: l,
        dim: 1,
        dynamics: Dynamics::RandomSequential,
        seed: 7_771_234,
        warmup_rounds: 0,
        measure_rounds: t1 + t + 1,
        snapshot_stride: 1,
        replicas: 1,
    };
    let snaps = collect_snapshots(&config).unwrap();
    let grid = EstimatorGrid {
        t_min: t,
        t_max: t,
        j_max: 6,
        j_step: 1,
    };
    let g12 = accumulate(&snaps, CorrelationKind::SpaceTime, grid, t1, 10).unwrap();
    let g21 = accumulate(&snaps, CorrelationKind::TimeSpace, grid, t1, 10).unwrap();
    for j in [-5i64, -3, -1, 1, 3, 5] {
        let (a, ea) = (g12.estimate(t, j).unwrap(), g12.stderr(t, j).unwrap());
        let (b, eb) = (g12.estimate(t, -j).unwrap(), g12.stderr(t, -j).unwrap());
        let joint = (ea * ea + eb * eb).sqrt();
        assert!((a + b).abs() < 4.0 * joint, "odd symmetry at j={j}: {a} vs {b}");
        let (c, ec) = (g21.estimate(t, j).unwrap(), g21.stderr(t, j).unwrap());
        let joint = (ea * ea + ec * ec).sqrt();
        assert!((a + c).abs() < 4.0 * joint, "detailed balance at j={j}: {a} vs {c}");
    }

    let g11 = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, t1, 10).unwrap();
    for j in [2i64, 4, 6] {
        let (a, ea) = (g11.estimate(t, j).unwrap(), g11.stderr(t, j).unwrap());
        let (b, eb) = (g11.estimate(t, -j).unwrap(), g11.stderr(t, -j).unwrap());
        let joint = (ea * ea + eb * eb).sqrt();
        assert!((a - b).abs() < 4.0 * joint, "even symmetry at j={j}: {a} vs {b}");
    }
}

#[test]
fn checkerboard_causality_and_sum_rule() {
    let l = 1 << 13;
    let t1 = 80u64;
    let config = SimConfig {
        length: l,
        dim: 1,
        dynamics: Dynamics::SublatticeParallel,
        seed: 555_001,
        warmup_rounds: 0,
        measure_rounds: 2 * (t1 + 4),
        snapshot_stride: 2,
        replicas: 1,
    };
    let snaps = collect_snapshots(&config).unwrap();
    let grid = EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, 3, 12);
    let g11 = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, t1, 10).unwrap();

    // outside the cone |j| > 2t the estimate is zero within errors
    for (t, j) in [(1u64, 4i64), (1, -6), (2, 6), (3, 8), (3, 12)] {
        let (est, err) = (g11.estimate(t, j).unwrap(), g11.stderr(t, j).unwrap());
        assert!(est.abs() < 4.0 * err, "cone ({t},{j}): {est} (err {err:.2e})");
    }

    // sum over the offset grid of g11(t, .) is 2 within errors
    for t in 1..=3u64 {
        let mut total = 0.0;
        let mut var = 0.0;
        for j in (-12i64..=12).step_by(2) {
            total += g11.estimate(t, j).unwrap();
            let e = g11.stderr(t, j).unwrap();
            var += e * e;
        }
        let sigma = var.sqrt();
        assert!(
            (total - 2.0).abs() < 5.0 * sigma,
            "sum rule at t={t}: {total} (sigma {sigma:.2e})"
        );
    }
}

#[test]
fn both_dynamics_preserve_the_equilibrium_gradient_law() {
    let l = 1 << 13;
    let rounds = 50u64;

    let mut par = InterfaceState::from_equilibrium(l, 1, 42).unwrap();
    let rng = CounterRng::new(derive_seed(9, TAG_SWEEP));
    for _ in 0..rounds {
        half_sweep(&mut par, &rng);
    }
    let mut seq = InterfaceState::from_equilibrium(l, 1, 43).unwrap();
    let mut stream = StreamRng::seed_from_u64(derive_seed(9, TAG_SEQ));
    sequential_update(&mut seq, &mut stream, rounds * l as u64);

    for (name, state) in [("checkerboard", &par), ("sequential", &seq)] {
        let h = state.heights();
        let mut v1 = 0.0;
        let mut lag2 = 0.0;
        for i in 0..l {
            let g = h[(i + 1) % l] - h[i];
            let g2 = h[(i + 3) % l] - h[(i + 2) % l];
            v1 += g * g;
            lag2 += g * g2;
        }
        v1 /= l as f64;
        lag2 /= l as f64;
        // stderr of both statistics is ~ sqrt(2/L) ~ 0.016
        assert!((v1 - 1.0).abs() < 0.05, "{name}: gradient variance {v1}");
        assert!(lag2.abs() < 0.05, "{name}: lag-2 gradient covariance {lag2}");
    }
}

#[test]
fn displacement_growth_slows_with_dimension() {
    // d = 2 keeps growing (logarithmically); d = 3 saturates.
    let run = |dim: usize, l: usize, seed: u64| {
        let config = SimConfig {
            length: l,
            dim,
            dynamics: Dynamics::SublatticeParallel,
            seed,
            warmup_rounds: 0,
            measure_rounds: 2 * 128,
            snapshot_stride: 2,
            replicas: 1,
        };
        let snaps = collect_snapshots(&config).unwrap();
        (
            displacement_variance(&snaps, 16).unwrap(),
            displacement_variance(&snaps, 128).unwrap(),
        )
    };
    let (d2_early, d2_late) = run(2, 64, 11);
    let (d3_early, d3_late) = run(3, 16, 12);
    let d2_growth = d2_late / d2_early;
    let d3_growth = d3_late / d3_early;
    assert!(d2_growth > 1.25, "d=2 growth {d2_growth}");
    assert!(d3_growth < d2_growth, "d=3 {d3_growth} vs d=2 {d2_growth}");
    assert!(d3_growth < 1.25, "d=3 growth {d3_growth}");
}
