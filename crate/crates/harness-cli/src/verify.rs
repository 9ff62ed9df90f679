//! The `verify` command: named invariant suites with one PASS/FAIL line per
//! check, each reporting the measured value and its bound.

use harness::correlations::{
    displacement_correlation_asym, g11_asym, g11_even_row, g11_exact, g11_quadrature,
    g12_exact, g21_exact, g22_asym, g22_exact, gaussian_tail, CorrelationKind, CorrelationQuery,
};
use harness::estimators::{
    accumulate, DisplacementAccumulator, EstimatorGrid, PairCorrelationAccumulator,
};
use harness::oracle::{
    build_form, covariance, dense_mode_variance, periodic_free_gap, spacetime_pair_correlation,
    FormSpec,
};
use harness::rng::{derive_seed, CounterRng, StreamRng, TAG_REPLICA, TAG_SEQ, TAG_SWEEP};
use harness::sim::{
    collect_snapshots, half_sweep, run, sequential_update, Dynamics, InterfaceState, SimConfig,
};
use harness::spectral::{
    equilibrium_gradient_variance, gamma, mode_variance, periodic_displacement_variance,
    poisson_kernel, poisson_kernel_quadrature, sample_equilibrium, ModeIndex, TorusSpec,
};
use rayon::prelude::*;
use std::time::Instant;

/// One verification check: a measured value against its bound.
pub struct Check {
    pub name: &'static str,
    /// What identity or behavior is being checked.
    pub note: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &'static str, note: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            name,
            note,
            measured,
            bound,
            pass: measured < bound,
        }
    }

    fn render(&self) -> String {
        format!(
            "[{}] {}: measured {:.6e}, bound {:.3e} — {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound,
            self.note
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Exact,
    Spectral,
    Oracle,
    Mc,
    All,
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Exact => exact_suite(),
        Suite::Spectral => spectral_suite(),
        Suite::Oracle => oracle_suite(),
        Suite::Mc => mc_suite(),
        Suite::All => {
            let mut all = exact_suite();
            all.extend(spectral_suite());
            all.extend(oracle_suite());
            all.extend(mc_suite());
            all
        }
    }
}

/// Print the report; true iff everything passed.
pub fn report(checks: &[Check]) -> bool {
    let mut ok = true;
    for c in checks {
        println!("{}", c.render());
        ok &= c.pass;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!(
        "{} checks, {} failed",
        checks.len(),
        failed
    );
    ok
}

// ---------------------------------------------------------------- exact --

pub fn closed_form_vs_quadrature() -> Check {
    let mut worst = 0.0f64;
    for t in 0..=30u64 {
        for half in 0..=t {
            let j = 2 * half as i64;
            let d = (g11_exact(t, j).unwrap() - g11_quadrature(t, j).unwrap()).absmax(worst);
            worst = d;
        }
    }
    Check::below(
        "closed form vs quadrature",
        "space-space kernel equals (1/pi) ∫ cos(j φ) cos^{2t}(φ) dφ for t <= 30",
        worst,
        1e-9,
    )
}

trait AbsMax {
    fn absmax(self, other: f64) -> f64;
}

impl AbsMax for f64 {
    fn absmax(self, other: f64) -> f64 {
        self.abs().max(other)
    }
}

fn sum_rules() -> Vec<Check> {
    let mut worst11 = 0.0f64;
    let mut worst22 = 0.0f64;
    for t in 1..=20u64 {
        let row = g11_even_row(t, t);
        let total = row[0] + 2.0 * row[1..].iter().sum::<f64>();
        worst11 = (total - 2.0).absmax(worst11);
        let mut total = g22_exact(t, 0).unwrap();
        for half in 1..=t as i64 {
            total += 2.0 * g22_exact(t, 2 * half).unwrap();
        }
        worst22 = total.absmax(worst22);
    }
    vec![
        Check::below(
            "space-space sum rule",
            "sum over even offsets of g11(t, .) equals 2 (binomial identity)",
            worst11,
            1e-12,
        ),
        Check::below(
            "time-time sum rule",
            "sum over even offsets of g22(t, .) vanishes",
            worst22,
            1e-12,
        ),
    ]
}

fn causality_and_symmetry() -> Vec<Check> {
    let mut cone = 0.0f64;
    let mut sym = 0.0f64;
    for t in 1..=40u64 {
        for extra in 1..=10 {
            let j = (2 * t + 2 * extra) as i64;
            cone = g11_exact(t, j).unwrap().absmax(cone);
            cone = g22_exact(t, j).unwrap().absmax(cone);
            cone = g12_exact(t, j + 1).unwrap().absmax(cone);
        }
        for half in 0..=t as i64 {
            let j = 2 * half;
            sym = (g11_exact(t, j).unwrap() - g11_exact(t, -j).unwrap()).absmax(sym);
            let jo = j + 1;
            sym = (g12_exact(t, jo).unwrap() + g12_exact(t, -jo).unwrap()).absmax(sym);
            sym = (g21_exact(t, jo).unwrap() + g12_exact(t, jo).unwrap()).absmax(sym);
        }
    }
    vec![
        Check::below(
            "causality cone",
            "all kernels vanish identically outside |j| <= 2t",
            cone,
            1e-300,
        ),
        Check::below(
            "kernel symmetries",
            "g11 even in j, g12 odd in j, g21 = -g12 pointwise",
            sym,
            1e-300,
        ),
    ]
}

pub fn ratio_identity() -> Check {
    let mut worst = 0.0f64;
    for t in 1..=50u64 {
        let ratio = g12_exact(t, 1).unwrap() / g22_exact(t, 0).unwrap();
        worst = ((ratio - 8.0) / 8.0).absmax(worst);
    }
    Check::below(
        "mixed/time kernel ratio",
        "g12(t,1) = 8 g22(t,0) from the closed forms (note: the factor-4 \
         variant g22(t,0) = 4 g12(t,1) is inconsistent with them)",
        worst,
        1e-12,
    )
}

pub fn asymptotic_convergence() -> Check {
    let mut worst_ratio = 0.0f64;
    for t in [50u64, 100, 200] {
        let mut worst = 0.0f64;
        for half in 0..=t {
            let j = 2 * half as i64;
            worst = (g11_exact(t, j).unwrap() - g11_asym(t, j).unwrap()).absmax(worst);
        }
        worst_ratio = worst_ratio.max(worst / (0.5 * (t as f64).powf(-1.5)));
    }
    Check::below(
        "asymptotic convergence rate",
        "max_j |g11 - gaussian asymptote| <= 0.5 t^{-3/2} at t = 50, 100, 200 \
         (bound is the measured/allowed ratio)",
        worst_ratio,
        1.0,
    )
}

fn asymptotic_family_consistency() -> Check {
    let mut worst_ratio = 0.0f64;
    for t in [50u64, 100, 200, 500] {
        let jmax = (t as f64).sqrt() as i64;
        for j in -jmax..=jmax {
            let lhs = g22_asym(t, j).unwrap()
                + 0.25 * (g11_asym(t - 1, j).unwrap() - g11_asym(t, j).unwrap());
            worst_ratio = worst_ratio.max(lhs.abs() / (2.0 * (t as f64).powf(-2.5)));
        }
    }
    Check::below(
        "asymptote internal consistency",
        "g22 asymptote equals the discrete time derivative of the g11 asymptote \
         to order t^{-5/2} (measured/allowed ratio)",
        worst_ratio,
        1.0,
    )
}

fn displacement_tail() -> Check {
    // Simpson quadrature of the tail integral as the independent route.
    let tail_quad = |x: f64| {
        let n = 100_000usize;
        let width = 60.0;
        let h = width / n as f64;
        let f = |u: f64| (-u * u / 2.0).exp();
        let mut s = f(x) + f(x + width);
        for m in 1..n {
            s += if m % 2 == 1 { 4.0 } else { 2.0 } * f(x + h * m as f64);
        }
        s * h / 3.0
    };
    let mut worst = 0.0f64;
    for (t, j) in [(100u64, 10i64), (100, 0), (50, 5), (400, 40)] {
        let tf = t as f64;
        let x = j as f64 / tf.sqrt();
        let expect =
            (2.0 * tf / std::f64::consts::PI).sqrt() * ((-x * x / 2.0).exp() + x * tail_quad(x));
        worst = (displacement_correlation_asym(t, j).unwrap() - expect).absmax(worst);
        worst = (gaussian_tail(x) - tail_quad(x)).absmax(worst);
    }
    Check::below(
        "displacement asymptote vs quadrature",
        "closed bracket (with erfc tail) matches direct Simpson quadrature",
        worst,
        1e-9,
    )
}

pub fn exact_suite() -> Vec<Check> {
    let start = Instant::now();
    let mut checks = vec![closed_form_vs_quadrature()];
    checks.extend(sum_rules());
    checks.extend(causality_and_symmetry());
    checks.push(ratio_identity());
    checks.push(asymptotic_convergence());
    checks.push(asymptotic_family_consistency());
    checks.push(displacement_tail());
    checks.push(Check::below(
        "exact suite runtime",
        "whole closed-form suite stays under its 10 s budget",
        start.elapsed().as_secs_f64(),
        10.0,
    ));
    checks
}

// ------------------------------------------------------------- spectral --

fn eigenvalue_checks() -> Vec<Check> {
    let mut neg = 0.0f64;
    let mut orbit = 0.0f64;
    let mut zero_violation = 0.0f64;
    for (t, l) in [(4usize, 4usize), (8, 8), (8, 12), (16, 32), (30, 18)] {
        let spec = TorusSpec::new(t, l, 1).unwrap();
        for nu in 0..t {
            for k in 0..l {
                let m = ModeIndex::d1(&spec, nu as i64, k as i64).unwrap();
                let g = gamma(&spec, &m);
                neg = neg.max(-g);
                let flip = ModeIndex::d1(&spec, (t - nu) as i64, (l - k) as i64).unwrap();
                let shift =
                    ModeIndex::d1(&spec, (nu + t / 2) as i64, (k + l / 2) as i64).unwrap();
                orbit = (g - gamma(&spec, &flip)).absmax(orbit);
                orbit = (g - gamma(&spec, &shift)).absmax(orbit);
                let is_zero = m.is_zero_mode(&spec);
                if is_zero && g != 0.0 {
                    zero_violation = zero_violation.max(g);
                }
                if !is_zero && g == 0.0 {
                    zero_violation = zero_violation.max(1.0);
                }
                if is_zero != mode_variance(&spec, &m).is_err() {
                    zero_violation = zero_violation.max(1.0);
                }
            }
        }
    }
    vec![
        Check::below(
            "eigenvalue nonnegativity",
            "the update-form eigenvalue is >= 0 on every mode",
            neg,
            1e-300,
        ),
        Check::below(
            "eigenvalue orbit symmetry",
            "gamma is invariant under (nu,k) -> (T-nu, L-k) and the half-shift, bit-exactly",
            orbit,
            1e-300,
        ),
        Check::below(
            "zero-mode characterization",
            "gamma vanishes exactly on the zero orbit, where the mode variance errors out",
            zero_violation,
            1e-300,
        ),
    ]
}

pub fn equal_time_sums_vs_bridge() -> Check {
    let mut worst = 0.0f64;
    for l in [4usize, 6, 8, 12, 64] {
        for j in 0..l {
            let sum = equilibrium_gradient_variance(l, j).unwrap();
            let bridge = (j * (l - j)) as f64 / l as f64;
            worst = (sum - bridge).absmax(worst);
        }
    }
    Check::below(
        "equal-time mode sums",
        "parity-split equilibrium sums equal the ring bridge variance j(L-j)/L",
        worst,
        1e-8,
    )
}

fn periodic_to_equilibrium() -> Check {
    let mut worst_ratio = 0.0f64;
    for l in [4usize, 8, 12] {
        let c_of_l = 1.5 / l as f64; // calibrated: worst measured T*gap is 1/L
        for t in [64usize, 128, 256] {
            let spec = TorusSpec::new(t, l, 1).unwrap();
            for j in 1..l {
                let eq = equilibrium_gradient_variance(l, j).unwrap();
                let per = periodic_displacement_variance(&spec, j, j % 2 == 1).unwrap();
                worst_ratio = worst_ratio.max((per - eq).abs() * t as f64 / c_of_l);
            }
        }
    }
    Check::below(
        "periodic sums converge to equilibrium",
        "finite-T mode sums approach the equilibrium values within C(L)/T, C(L) = 1.5/L",
        worst_ratio,
        1.0,
    )
}

pub fn poisson_kernel_grid() -> Check {
    let mut worst = 0.0f64;
    for ai in 1..=9 {
        let a = ai as f64 / 10.0;
        for n in 0..=20u32 {
            worst =
                (poisson_kernel(a, n).unwrap() - poisson_kernel_quadrature(a, n).unwrap())
                    .absmax(worst);
        }
    }
    Check::below(
        "poisson kernel identity",
        "(1/2pi) ∫ cos(n w) / (1 - 2a cos w + a^2) dw = a^n / (1 - a^2) on the a, n grid",
        worst,
        1e-10,
    )
}

fn sampler_gradient_covariance() -> Check {
    // z-scores of sampled gradient variances against the bridge values
    let mut worst_z = 0.0f64;
    for (l, j, samples, seed) in [
        (4usize, 1usize, 4000u64, 100u64),
        (4, 2, 4000, 200),
        (16, 3, 2000, 300),
        (4096, 1, 200, 400),
    ] {
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for s in 0..samples {
            let h = sample_equilibrium(l, 1, derive_seed(seed + s, 0x5a5a)).unwrap();
            let mut v = 0.0;
            for i in 0..l {
                let d = h[(i + j) % l] - h[i];
                v += d * d;
            }
            v /= l as f64;
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / samples as f64;
        let var = (acc2 / samples as f64 - mean * mean).max(1e-300);
        let stderr = (var / samples as f64).sqrt();
        let expect = (j * (l - j)) as f64 / l as f64;
        worst_z = worst_z.max((mean - expect).abs() / stderr);
    }
    Check::below(
        "equilibrium sampler gradient law",
        "sampled displacement variances match the bridge values within 4 standard errors",
        worst_z,
        4.0,
    )
}

pub fn spectral_suite() -> Vec<Check> {
    let mut checks = eigenvalue_checks();
    checks.push(equal_time_sums_vs_bridge());
    checks.push(periodic_to_equilibrium());
    checks.push(poisson_kernel_grid());
    checks.push(sampler_gradient_covariance());
    checks
}

// --------------------------------------------------------------- oracle --

pub fn lemma3_mode_variances() -> Check {
    let mut worst = 0.0f64;
    for (t, l) in [(4usize, 4usize), (8, 8), (8, 12)] {
        let form = build_form(FormSpec::periodic(t, l)).unwrap();
        let mut cov = covariance(&form, 0).unwrap();
        let spec = TorusSpec::new(t, l, 1).unwrap();
        for nu in 0..t {
            for k in 0..l {
                let mode = ModeIndex::d1(&spec, nu as i64, k as i64).unwrap();
                if mode.is_zero_mode(&spec) {
                    continue;
                }
                let dense = dense_mode_variance(&form, &mut cov, nu, k).unwrap();
                let expect = 1.0 / (4.0 * gamma(&spec, &mode));
                worst = (dense - expect).absmax(worst);
            }
        }
    }
    Check::below(
        "mode variances from dense inversion",
        "DFT of the dense covariance reproduces 1/(4 gamma) on (4,4), (8,8), (8,12)",
        worst,
        1e-8,
    )
}

pub fn equal_time_dense_identities() -> Check {
    let mut worst = 0.0f64;
    for l in [4usize, 6, 8, 12] {
        let form = build_form(FormSpec::equilibrium_ring(l)).unwrap();
        let mut cov = covariance(&form, 0).unwrap();
        for j in 1..l {
            let dense = cov.gradient_cov(j, 0, j, 0);
            let sum = equilibrium_gradient_variance(l, j).unwrap();
            let bridge = (j * (l - j)) as f64 / l as f64;
            worst = (dense - sum).absmax(worst);
            worst = (dense - bridge).absmax(worst);
        }
    }
    Check::below(
        "equal-time dense identities",
        "dense ring covariances equal the mode sums and the bridge variance",
        worst,
        1e-8,
    )
}

pub fn window_gap_chain() -> (Check, Check) {
    let gaps: Vec<f64> = [8usize, 16, 32, 64]
        .iter()
        .map(|&t| periodic_free_gap(t, 4, 6).unwrap())
        .collect();
    let mut worst_ratio = 0.0f64;
    for w in gaps.windows(2) {
        worst_ratio = worst_ratio.max(w[1] / w[0]);
    }
    let monotone = Check::below(
        "periodic-to-free window gap decreases",
        "covariance gap over the 4-slice window shrinks as the periodic extent doubles",
        worst_ratio,
        1.0,
    );
    let far = periodic_free_gap(256, 4, 6).unwrap();
    let decade = Check::below(
        "window gap decade drop",
        "gap at T = 256 is below a tenth of the gap at T = 8",
        far / gaps[0],
        0.1,
    );
    (monotone, decade)
}

fn pin_invariance() -> Check {
    let form = build_form(FormSpec::periodic(6, 6)).unwrap();
    let probes = [(0usize, 2usize, 4usize, 0usize), (3, 5, 1, 3), (7, 2, 8, 0)];
    let reference: Vec<f64> = {
        let mut cov = covariance(&form, 0).unwrap();
        probes
            .iter()
            .map(|&(a, b, c, d)| cov.gradient_cov(a, b, c, d))
            .collect()
    };
    let mut worst = 0.0f64;
    for pin in 1..form.vars() {
        let mut cov = covariance(&form, pin).unwrap();
        for (p, &(a, b, c, d)) in probes.iter().enumerate() {
            worst = (cov.gradient_cov(a, b, c, d) - reference[p]).absmax(worst);
        }
    }
    Check::below(
        "gauge invariance of gradients",
        "gradient covariances do not depend on the pinned site",
        worst,
        1e-9,
    )
}

fn periodic_displacement_dense_check() -> Check {
    let (t_ext, l) = (8usize, 8usize);
    let form = build_form(FormSpec::periodic(t_ext, l)).unwrap();
    let mut cov = covariance(&form, 0).unwrap();
    let spec = TorusSpec::new(t_ext, l, 1).unwrap();
    let mut worst = 0.0f64;
    for j in 1..l / 2 {
        let odd = j % 2 == 1;
        let a = form.site_index(if odd { 1 } else { 0 }, j as i64).unwrap();
        let b = form.site_index(0, 0).unwrap();
        let dense = cov.gradient_cov(a, b, a, b);
        let sum = periodic_displacement_variance(&spec, j, odd).unwrap();
        worst = (dense - sum).absmax(worst);
    }
    Check::below(
        "periodic displacement sums vs dense",
        "finite-torus displacement mode sums match the dense covariance",
        worst,
        1e-8,
    )
}

/// Worst |dense - closed form| per query set on the free-time form, plus the
/// per-query errors for the convergence comparison.
pub fn dense_vs_closed_forms(t_ext: usize, l: usize) -> (f64, Vec<f64>) {
    let form = build_form(FormSpec::free(t_ext, l)).unwrap();
    let mut cov = covariance(&form, 0).unwrap();
    let mut errors = Vec::new();
    let mut worst = 0.0f64;
    for kind in CorrelationKind::ALL {
        for t in kind.min_rounds()..=4 {
            // query list fixed by the smaller acceptance size so both
            // torus sizes evaluate the same cells
            let jmax = 32 / 2 - 4 - 2 * t as i64;
            for j in -jmax..=jmax {
                if !kind.offset_is_valid(j) {
                    continue;
                }
                let dense = spacetime_pair_correlation(&form, &mut cov, kind, t, j).unwrap();
                let exact = CorrelationQuery::new(kind, t, j).unwrap().exact().unwrap();
                let e = (dense - exact).abs();
                errors.push(e);
                worst = worst.max(e);
            }
        }
    }
    (worst, errors)
}

/// Criterion 2 checks; the tolerance clause is expected to fail (the
/// finite-ring bridge constraint alone contributes 4/L = 0.0625 at L = 64 —
/// see the shrink check, which passes).
pub fn dense_closed_form_checks() -> Vec<Check> {
    let start = Instant::now();
    let (worst64, errs64) = dense_vs_closed_forms(64, 64);
    let (worst128, errs128) = dense_vs_closed_forms(128, 128);
    // cells already at rounding level have converged; compare the rest
    let mut worst_per_query = 0.0f64;
    for (a, b) in errs128.iter().zip(&errs64) {
        if *b > 1e-12 {
            worst_per_query = worst_per_query.max(a / b);
        }
    }
    vec![
        Check::below(
            "dense oracle matches closed forms at (64, 64)",
            "max |pair correlation - closed form| over t <= 4 and in-guard offsets \
             (the finite-ring bridge constraint contributes 4/L = 0.0625 by itself)",
            worst64,
            0.02,
        ),
        Check::below(
            "dense error shrinks at (128, 128)",
            "max error at the doubled torus is strictly below the (64, 64) error",
            worst128 / worst64,
            1.0,
        ),
        Check::below(
            "dense error shrinks per query",
            "every queried cell improves as the torus doubles",
            worst_per_query,
            1.0,
        ),
        Check::below(
            "dense comparison runtime",
            "both factorizations and all queries stay under the 120 s budget",
            start.elapsed().as_secs_f64(),
            120.0,
        ),
    ]
}

pub fn oracle_suite() -> Vec<Check> {
    let mut checks = vec![lemma3_mode_variances(), equal_time_dense_identities()];
    let (monotone, decade) = window_gap_chain();
    checks.push(monotone);
    checks.push(decade);
    checks.push(pin_invariance());
    checks.push(periodic_displacement_dense_check());
    checks.extend(dense_closed_form_checks());
    checks
}

// ------------------------------------------------------------------- mc --

const SEED_STATIONARITY: u64 = 61_803_398;
const SEED_MC_EXACT: u64 = 27_187_818;
const SEED_GROWTH_D1: u64 = 14_142_135;
const SEED_GROWTH_D2: u64 = 17_320_508;

pub fn stationarity_checks() -> Vec<Check> {
    let start = Instant::now();
    let l = 1usize << 15;
    let rounds = 100u64;

    let gradient_variance = |h: &[f64]| -> f64 {
        let mut v = 0.0;
        for i in 0..l {
            let d = h[(i + 1) % l] - h[i];
            v += d * d;
        }
        v / l as f64
    };

    let mut par = InterfaceState::from_equilibrium(l, 1, SEED_STATIONARITY).unwrap();
    let rng = CounterRng::new(derive_seed(SEED_STATIONARITY, TAG_SWEEP));
    for _ in 0..rounds {
        half_sweep(&mut par, &rng);
    }
    let v_par = gradient_variance(par.heights());

    let mut seq = InterfaceState::from_equilibrium(l, 1, SEED_STATIONARITY + 1).unwrap();
    let mut stream = StreamRng::seed_from_u64(derive_seed(SEED_STATIONARITY, TAG_SEQ));
    sequential_update(&mut seq, &mut stream, rounds * l as u64);
    let v_seq = gradient_variance(seq.heights());

    vec![
        Check::below(
            "checkerboard stationarity",
            "gradient variance stays at 1 after 100 half-sweeps from equilibrium",
            (v_par - 1.0).abs(),
            0.02,
        ),
        Check::below(
            "sequential stationarity",
            "gradient variance stays at 1 after 100 macroscopic units from equilibrium",
            (v_seq - 1.0).abs(),
            0.02,
        ),
        Check::below(
            "stationarity runtime",
            "both stationarity runs stay under the 60 s budget",
            start.elapsed().as_secs_f64(),
            60.0,
        ),
    ]
}

pub fn mc_vs_exact_checks() -> Vec<Check> {
    let start = Instant::now();
    let l = 1usize << 16;
    let t_max = 8u64;
    let t1 = 200u64;
    let config = SimConfig {
        length: l,
        dim: 1,
        dynamics: Dynamics::SublatticeParallel,
        seed: SEED_MC_EXACT,
        warmup_rounds: 0,
        measure_rounds: 2 * (t1 + t_max + 1),
        snapshot_stride: 2,
        replicas: 1,
    };
    let snaps = collect_snapshots(&config).unwrap();
    let make = |kind: CorrelationKind, j_max: i64| {
        accumulate(
            &snaps,
            kind,
            EstimatorGrid::checkerboard(kind, t_max, j_max),
            t1,
            8,
        )
        .unwrap()
    };
    let g11 = make(CorrelationKind::SpaceSpace, 0);
    let g22 = make(CorrelationKind::TimeTime, 0);
    let g12 = make(CorrelationKind::SpaceTime, 1);

    let z = |acc: &PairCorrelationAccumulator, t: u64, j: i64, exact: f64| -> f64 {
        let est = acc.estimate(t, j).unwrap();
        let err = acc.stderr(t, j).unwrap();
        (est - exact).abs() / err
    };
    let mut z11 = 0.0f64;
    let mut z22 = 0.0f64;
    let mut z12 = 0.0f64;
    for t in 1..=t_max {
        z11 = z11.max(z(&g11, t, 0, g11_exact(t, 0).unwrap()));
        z22 = z22.max(z(&g22, t, 0, g22_exact(t, 0).unwrap()));
        z12 = z12.max(z(&g12, t, 1, g12_exact(t, 1).unwrap()));
    }
    vec![
        Check::below(
            "checkerboard g11 vs closed form",
            "estimated g11(t, 0), t <= 8, within 3 batch-means standard errors",
            z11,
            3.0,
        ),
        Check::below(
            "checkerboard g22 vs closed form",
            "estimated g22(t, 0), t <= 8, within 3 batch-means standard errors",
            z22,
            3.0,
        ),
        Check::below(
            "checkerboard g12 vs closed form",
            "estimated g12(t, 1), t <= 8, within 3 batch-means standard errors",
            z12,
            3.0,
        ),
        Check::below(
            "mc-vs-exact runtime",
            "simulation plus estimation stays under the 300 s budget",
            start.elapsed().as_secs_f64(),
            300.0,
        ),
    ]
}

fn determinism_checks() -> Vec<Check> {
    let config = SimConfig {
        length: 1 << 10,
        dim: 1,
        dynamics: Dynamics::RandomSequential,
        seed: 99,
        warmup_rounds: 2,
        measure_rounds: 16,
        snapshot_stride: 4,
        replicas: 1,
    };
    let a = collect_snapshots(&config).unwrap();
    let b = collect_snapshots(&config).unwrap();
    let identical = (a == b) as i32 as f64;

    let sweep = || {
        let mut s = InterfaceState::from_equilibrium(1 << 16, 1, 7).unwrap();
        let rng = CounterRng::new(13);
        for _ in 0..3 {
            half_sweep(&mut s, &rng);
        }
        s.heights().to_vec()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(sweep);
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(sweep);
    let workers_agree = (single == multi) as i32 as f64;

    vec![
        Check::below(
            "seeded reproducibility",
            "identical (seed, config) produce identical snapshot streams",
            1.0 - identical,
            0.5,
        ),
        Check::below(
            "worker-count independence",
            "half-sweeps are bit-identical with 1 and 8 workers",
            1.0 - workers_agree,
            0.5,
        ),
    ]
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn displacement_growth_checks() -> Vec<Check> {
    let start = Instant::now();

    // d = 1, random-sequential: diffusive sqrt(t) growth of the
    // displacement variance, slope fit on a log-log grid.
    let targets = [64u64, 128, 256, 512, 1024];
    let origins = 32u64;
    let config = SimConfig {
        length: 100_000,
        dim: 1,
        dynamics: Dynamics::RandomSequential,
        seed: SEED_GROWTH_D1,
        warmup_rounds: 0,
        measure_rounds: targets[targets.len() - 1] + origins,
        snapshot_stride: 1,
        replicas: 1,
    };
    let mut acc = DisplacementAccumulator::new(origins, targets.to_vec()).unwrap();
    run(&config, |state| acc.feed(state.heights())).unwrap();
    let xs: Vec<f64> = targets.iter().map(|&t| (t as f64).ln()).collect();
    let ys: Vec<f64> = targets
        .iter()
        .map(|&t| acc.estimate(t).unwrap().ln())
        .collect();
    let slope = least_squares_slope(&xs, &ys);

    // d = 2, checkerboard: logarithmic growth, replica-averaged.
    let d2_targets = [8u64, 16, 32, 64, 128, 256, 512];
    let d2_origins = 32u64;
    let replicas = 96u64;
    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let config = SimConfig {
                length: 128,
                dim: 2,
                dynamics: Dynamics::SublatticeParallel,
                seed: derive_seed(SEED_GROWTH_D2.wrapping_add(r), TAG_REPLICA),
                warmup_rounds: 0,
                measure_rounds: 2 * (d2_targets[d2_targets.len() - 1] + d2_origins),
                snapshot_stride: 2,
                replicas: 1,
            };
            let mut acc = DisplacementAccumulator::new(d2_origins, d2_targets.to_vec()).unwrap();
            run(&config, |state| acc.feed(state.heights())).unwrap();
            d2_targets.iter().map(|&t| acc.estimate(t).unwrap()).collect()
        })
        .collect();
    let mut means = vec![0.0f64; d2_targets.len()];
    for row in &per_replica {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= replicas as f64;
    }
    let ln_t: Vec<f64> = d2_targets.iter().map(|&t| (t as f64).ln()).collect();
    let corr = pearson(&ln_t, &means);

    vec![
        Check::below(
            "diffusive growth exponent (d = 1)",
            "log-log slope of the sequential displacement variance over t in [64, 1024]",
            (slope - 0.5).abs(),
            0.03,
        ),
        Check::below(
            "logarithmic growth (d = 2)",
            "displacement variance vs ln t is linear with correlation >= 0.99",
            1.0 - corr,
            0.01,
        ),
        Check::below(
            "growth checks runtime",
            "both growth scans stay under the 600 s budget",
            start.elapsed().as_secs_f64(),
            600.0,
        ),
    ]
}

pub fn mc_suite() -> Vec<Check> {
    let mut checks = stationarity_checks();
    checks.extend(mc_vs_exact_checks());
    checks.extend(determinism_checks());
    checks.extend(displacement_growth_checks());
    checks
}
