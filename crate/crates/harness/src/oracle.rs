//! Brute-force ground truth: dense assembly and inversion of the space-time
//! quadratic forms on small tori.
//!
//! Heights live on the even space-time sub-lattice `{(t, i) : t + i even}`.
//! Every update contributes one squared linear form
//! `(h^t_i - h^{t-1}_{i-1}/2 - h^{t-1}_{i+1}/2)^2`; the time-periodic form
//! wraps `t - 1` around, the free form instead adds the boundary terms
//! `(1/4)(h^0_i - h^0_{i+2})^2` on even `i` so that exactly one mode (the
//! uniform translation) carries Lebesgue weight. A plain ring form
//! `(1/2) sum_i (h_{i+1} - h_i)^2` covers the equilibrium measure itself.
//!
//! With density `exp(-H)` and `H = x^T A x`, the covariance is
//! `(2A)^{-1}`; the kernel of `A` is the constants, removed by pinning one
//! variable (all observables of interest are gradients, which do not feel
//! the pin). Factorization is dense symmetric positive definite with a hard
//! size cap: this module is an oracle, not a performance path.

use crate::correlations::CorrelationKind;
use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use ndarray_linalg::cholesky::{FactorizeCInto, SolveC, UPLO};
use ndarray_linalg::CholeskyFactorized;
use ndarray::OwnedRepr;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Hard cap on the number of dense variables.
pub const DENSE_VAR_CAP: usize = 10_000;

/// Which quadratic form to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    /// `(1/2) sum (h_{i+1} - h_i)^2` on a plain ring of `length` sites.
    EquilibriumRing,
    /// Update terms for `1 <= t <= T-1` plus the time-0 boundary pairs.
    Free,
    /// Update terms for all `t` with the time direction wrapped.
    Periodic,
}

/// Extents of the form: `time_extent` is `T` (periodic) or `T1` (free) and
/// is ignored by the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormSpec {
    pub kind: FormKind,
    pub time_extent: usize,
    pub length: usize,
}

impl FormSpec {
    pub fn periodic(time_extent: usize, length: usize) -> Self {
        Self {
            kind: FormKind::Periodic,
            time_extent,
            length,
        }
    }

    pub fn free(time_extent: usize, length: usize) -> Self {
        Self {
            kind: FormKind::Free,
            time_extent,
            length,
        }
    }

    pub fn equilibrium_ring(length: usize) -> Self {
        Self {
            kind: FormKind::EquilibriumRing,
            time_extent: 1,
            length,
        }
    }

    fn validate(&self) -> Result<usize> {
        if self.length == 0 || self.length % 2 != 0 {
            return Err(Error::Domain(format!(
                "spatial extent must be a positive even integer, got {}",
                self.length
            )));
        }
        let vars = match self.kind {
            FormKind::EquilibriumRing => self.length,
            FormKind::Free | FormKind::Periodic => {
                if self.time_extent == 0 || self.time_extent % 2 != 0 {
                    return Err(Error::Domain(format!(
                        "time extent must be a positive even integer, got {}",
                        self.time_extent
                    )));
                }
                self.time_extent * self.length / 2
            }
        };
        if vars > DENSE_VAR_CAP {
            return Err(Error::TooLarge {
                vars,
                cap: DENSE_VAR_CAP,
            });
        }
        Ok(vars)
    }
}

/// One squared linear form, as sparse coefficients over variable indices.
type Term = Vec<(usize, f64)>;

/// An assembled quadratic form `H = x^T A x` with its variable layout.
pub struct QuadraticForm {
    pub spec: FormSpec,
    vars: usize,
    terms: Vec<Term>,
}

/// Assemble the quadratic form for `spec`.
pub fn build_form(spec: FormSpec) -> Result<QuadraticForm> {
    let vars = spec.validate()?;
    let l = spec.length;
    let t_ext = spec.time_extent;
    let mut terms: Vec<Term> = Vec::new();
    let form = QuadraticForm {
        spec,
        vars,
        terms: Vec::new(),
    };
    match spec.kind {
        FormKind::EquilibriumRing => {
            let c = 0.5f64.sqrt();
            for i in 0..l {
                terms.push(vec![(i, c), ((i + 1) % l, -c)]);
            }
        }
        FormKind::Periodic => {
            for t in 0..t_ext {
                let prev = (t + t_ext - 1) % t_ext;
                for i in (t % 2..l).step_by(2) {
                    let i = i as i64;
                    terms.push(vec![
                        (form.site_index(t as i64, i)?, 1.0),
                        (form.site_index(prev as i64, i - 1)?, -0.5),
                        (form.site_index(prev as i64, i + 1)?, -0.5),
                    ]);
                }
            }
        }
        FormKind::Free => {
            for t in 1..t_ext {
                for i in (t % 2..l).step_by(2) {
                    let i = i as i64;
                    terms.push(vec![
                        (form.site_index(t as i64, i)?, 1.0),
                        (form.site_index(t as i64 - 1, i - 1)?, -0.5),
                        (form.site_index(t as i64 - 1, i + 1)?, -0.5),
                    ]);
                }
            }
            for i in (0..l).step_by(2) {
                let i = i as i64;
                terms.push(vec![
                    (form.site_index(0, i)?, 0.5),
                    (form.site_index(0, i + 2)?, -0.5),
                ]);
            }
        }
    }
    Ok(QuadraticForm { terms, ..form })
}

impl QuadraticForm {
    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Variable index of lattice site `(t, i)`, wrapped periodically.
    ///
    /// For the space-time kinds the site must lie on the even sub-lattice;
    /// the free form additionally requires `t` inside `0..T1`.
    pub fn site_index(&self, t: i64, i: i64) -> Result<usize> {
        let l = self.spec.length as i64;
        match self.spec.kind {
            FormKind::EquilibriumRing => Ok(i.rem_euclid(l) as usize),
            FormKind::Periodic | FormKind::Free => {
                let t_ext = self.spec.time_extent as i64;
                let tt = if self.spec.kind == FormKind::Periodic {
                    t.rem_euclid(t_ext)
                } else {
                    if t < 0 || t >= t_ext {
                        return Err(Error::FiniteSize(format!(
                            "time {t} outside the free window 0..{t_ext}"
                        )));
                    }
                    t
                };
                let ii = i.rem_euclid(l);
                if (tt + ii) % 2 != 0 {
                    return Err(Error::Parity {
                        what: "space-time site",
                        expected: "on the even sub-lattice (t + i even)",
                        j: i,
                    });
                }
                Ok((tt * l / 2 + ii / 2) as usize)
            }
        }
    }

    /// Dense symmetric matrix `A` with `H = x^T A x`.
    pub fn matrix(&self) -> Array2<f64> {
        let mut a = Array2::<f64>::zeros((self.vars, self.vars));
        for term in &self.terms {
            for &(p, cp) in term {
                for &(q, cq) in term {
                    a[[p, q]] += cp * cq;
                }
            }
        }
        a
    }
}

/// Pinned dense covariance `(2A)^{-1}` with lazily solved columns.
pub struct Covariance {
    factor: CholeskyFactorized<OwnedRepr<f64>>,
    pinned: usize,
    vars: usize,
    columns: HashMap<usize, Array1<f64>>,
    /// Lower-bound condition diagnostic `(max_i L_ii / min_i L_ii)^2` from
    /// the Cholesky diagonal.
    pub condition_diagnostic: f64,
}

/// Factor the pinned form `2A` (delete `pinned` row and column).
pub fn covariance(form: &QuadraticForm, pinned: usize) -> Result<Covariance> {
    let n = form.vars;
    assert!(pinned < n, "pinned index out of range");
    let reduced = |v: usize| if v < pinned { v } else { v - 1 };
    let mut m = Array2::<f64>::zeros((n - 1, n - 1));
    for term in &form.terms {
        for &(p, cp) in term {
            if p == pinned {
                continue;
            }
            for &(q, cq) in term {
                if q == pinned {
                    continue;
                }
                m[[reduced(p), reduced(q)]] += 2.0 * cp * cq;
            }
        }
    }
    let factor = m.factorizec_into(UPLO::Lower).map_err(|e| {
        Error::Domain(format!(
            "pinned form is not positive definite (kernel dimension > 1?): {e}"
        ))
    })?;
    let diag = factor.factor.diag();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &d in diag.iter() {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok(Covariance {
        factor,
        pinned,
        vars: n,
        columns: HashMap::new(),
        condition_diagnostic: (hi / lo) * (hi / lo),
    })
}

impl Covariance {
    pub fn vars(&self) -> usize {
        self.vars
    }

    fn column(&mut self, s: usize) -> &Array1<f64> {
        assert!(s < self.vars);
        let (factor, pinned, vars) = (&self.factor, self.pinned, self.vars);
        self.columns.entry(s).or_insert_with(|| {
            let mut full = Array1::<f64>::zeros(vars);
            if s != pinned {
                let mut rhs = Array1::<f64>::zeros(vars - 1);
                let rs = if s < pinned { s } else { s - 1 };
                rhs[rs] = 1.0;
                let solved = factor
                    .solvec(&rhs)
                    .expect("triangular solve on a successful factorization");
                for (r, &v) in solved.iter().enumerate() {
                    let fullidx = if r < pinned { r } else { r + 1 };
                    full[fullidx] = v;
                }
            }
            full
        })
    }

    /// Covariance entry; the pinned variable is identically zero.
    pub fn entry(&mut self, a: usize, b: usize) -> f64 {
        if a == self.pinned || b == self.pinned {
            return 0.0;
        }
        self.column(b)[a]
    }

    /// `Cov(x_{ap} - x_{am}, x_{bp} - x_{bm})`; columns are solved (and
    /// cached) for the `b` side, so put the factor shared across queries
    /// there.
    pub fn gradient_cov(&mut self, ap: usize, am: usize, bp: usize, bm: usize) -> f64 {
        self.entry(ap, bp) - self.entry(ap, bm) - self.entry(am, bp) + self.entry(am, bm)
    }

    /// Full dense covariance (small forms only).
    pub fn to_dense(&mut self) -> Array2<f64> {
        let n = self.vars;
        let mut c = Array2::<f64>::zeros((n, n));
        for b in 0..n {
            let col = self.column(b).clone();
            for a in 0..n {
                c[[a, b]] = col[a];
            }
        }
        c
    }
}

/// Finite-size analogue of the four correlation kernels, read from the
/// pinned covariance of a space-time form.
///
/// Mixed kernels are reported in the closed-form normalization (4x the raw
/// gradient covariance, see [`CorrelationKind::covariance_scale`]), so the
/// result converges to the closed forms as the torus grows.
pub fn spacetime_pair_correlation(
    form: &QuadraticForm,
    cov: &mut Covariance,
    kind: CorrelationKind,
    t: u64,
    j: i64,
) -> Result<f64> {
    if form.spec.kind == FormKind::EquilibriumRing {
        return Err(Error::Domain(
            "pair correlations need a space-time form, not the equilibrium ring".into(),
        ));
    }
    if !kind.offset_is_valid(j) {
        return Err(Error::Parity {
            what: "pair correlation",
            expected: if kind.offset_parity() == 0 { "even" } else { "odd" },
            j,
        });
    }
    if t < kind.min_rounds() {
        return Err(Error::Domain(format!(
            "{} needs t >= {}, got t = {}",
            kind.label(),
            kind.min_rounds(),
            t
        )));
    }
    let min_extent = form.spec.time_extent.min(form.spec.length) as u64;
    if 2 * t + j.unsigned_abs() + 4 > min_extent / 2 {
        return Err(Error::FiniteSize(format!(
            "query (t = {t}, j = {j}) does not fit inside the ({}, {}) torus",
            form.spec.time_extent, form.spec.length
        )));
    }
    let t = t as i64;
    let (ap, am, bp, bm) = match kind {
        CorrelationKind::SpaceSpace => (
            form.site_index(2 * t, j + 2)?,
            form.site_index(2 * t, j)?,
            form.site_index(0, 2)?,
            form.site_index(0, 0)?,
        ),
        CorrelationKind::TimeTime => (
            form.site_index(2 * t + 2, j)?,
            form.site_index(2 * t, j)?,
            form.site_index(2, 0)?,
            form.site_index(0, 0)?,
        ),
        CorrelationKind::SpaceTime => (
            form.site_index(2 * t, j + 1)?,
            form.site_index(2 * t, j - 1)?,
            form.site_index(2, 0)?,
            form.site_index(0, 0)?,
        ),
        CorrelationKind::TimeSpace => (
            form.site_index(0, j + 1)?,
            form.site_index(0, j - 1)?,
            form.site_index(2 * t, 0)?,
            form.site_index(2 * t - 2, 0)?,
        ),
    };
    Ok(kind.covariance_scale() * cov.gradient_cov(ap, am, bp, bm))
}

/// Mode variance `E |h_hat^nu_k|^2` reconstructed from the dense pinned
/// covariance of the periodic form by a discrete Fourier transform.
pub fn dense_mode_variance(
    form: &QuadraticForm,
    cov: &mut Covariance,
    nu: usize,
    k: usize,
) -> Result<f64> {
    if form.spec.kind != FormKind::Periodic {
        return Err(Error::Domain(
            "mode reconstruction is defined for the periodic form".into(),
        ));
    }
    let t_ext = form.spec.time_extent;
    let l = form.spec.length;
    let dense = cov.to_dense();
    let mut phases = Vec::with_capacity(form.vars);
    for t in 0..t_ext {
        for i in (t % 2..l).step_by(2) {
            let idx = form.site_index(t as i64, i as i64)?;
            let theta =
                2.0 * PI * ((k * i) as f64 / l as f64 + (nu * t) as f64 / t_ext as f64);
            phases.push((idx, theta));
        }
    }
    let mut acc = 0.0;
    for &(x, tx) in &phases {
        for &(y, ty) in &phases {
            acc += (tx - ty).cos() * dense[[x, y]];
        }
    }
    Ok(acc / (l * t_ext) as f64)
}

/// Convergence gap of the time-periodic field toward the free field: the
/// maximum absolute difference of pinned covariances over the window
/// `0 <= t < t1`, both fields pinned at site `(0, 0)`.
pub fn periodic_free_gap(t_ext: usize, t1: usize, l: usize) -> Result<f64> {
    if t1 > t_ext {
        return Err(Error::Domain(format!(
            "window {t1} longer than the periodic extent {t_ext}"
        )));
    }
    let per_form = build_form(FormSpec::periodic(t_ext, l))?;
    let free_form = build_form(FormSpec::free(t1, l))?;
    let pin_per = per_form.site_index(0, 0)?;
    let pin_free = free_form.site_index(0, 0)?;
    let mut per_cov = covariance(&per_form, pin_per)?;
    let mut free_cov = covariance(&free_form, pin_free)?;
    let mut gap = 0.0f64;
    for ta in 0..t1 {
        for ia in (ta % 2..l).step_by(2) {
            let a_per = per_form.site_index(ta as i64, ia as i64)?;
            let a_free = free_form.site_index(ta as i64, ia as i64)?;
            for tb in 0..t1 {
                for ib in (tb % 2..l).step_by(2) {
                    let b_per = per_form.site_index(tb as i64, ib as i64)?;
                    let b_free = free_form.site_index(tb as i64, ib as i64)?;
                    let d = per_cov.entry(a_per, b_per) - free_cov.entry(a_free, b_free);
                    gap = gap.max(d.abs());
                }
            }
        }
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_periodic_torus() {
        let form = build_form(FormSpec::periodic(2, 2)).unwrap();
        assert_eq!(form.vars(), 2);
        let a = form.matrix();
        // H = 2 (h^0_0 - h^1_1)^2
        assert_eq!(a[[0, 0]], 2.0);
        assert_eq!(a[[1, 1]], 2.0);
        assert_eq!(a[[0, 1]], -2.0);
        for r in 0..2 {
            assert!((a.row(r).sum()).abs() < 1e-14);
        }
    }

    #[test]
    fn free_form_rows_sum_to_zero() {
        let form = build_form(FormSpec::free(2, 4)).unwrap();
        let a = form.matrix();
        for r in 0..form.vars() {
            assert!(a.row(r).sum().abs() < 1e-14, "row {r}");
        }
    }

    #[test]
    fn periodic_coupling_structure() {
        // Each site couples to its two lower-diagonal neighbors with -1/2.
        let form = build_form(FormSpec::periodic(4, 12)).unwrap();
        let a = form.matrix();
        let x = form.site_index(2, 6).unwrap();
        let down_left = form.site_index(1, 5).unwrap();
        let down_right = form.site_index(1, 7).unwrap();
        assert_eq!(a[[x, down_left]], -0.5);
        assert_eq!(a[[x, down_right]], -0.5);
        for r in 0..form.vars() {
            assert!(a.row(r).sum().abs() < 1e-13, "row {r}");
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        assert!(matches!(
            build_form(FormSpec::periodic(512, 512)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn ring_covariance_is_effective_resistance() {
        let form = build_form(FormSpec::equilibrium_ring(4)).unwrap();
        let mut cov = covariance(&form, 0).unwrap();
        let v = cov.gradient_cov(1, 0, 1, 0);
        assert!((v - 0.75).abs() < 1e-12, "Var(h1 - h0) = {v}");
        let v = cov.gradient_cov(2, 0, 2, 0);
        assert!((v - 1.0).abs() < 1e-12, "Var(h2 - h0) = {v}");
        assert!(cov.condition_diagnostic >= 1.0);
    }

    #[test]
    fn gradient_covariance_ignores_the_pin() {
        let form = build_form(FormSpec::periodic(6, 6)).unwrap();
        let probes = [(0usize, 2usize, 4usize, 0usize), (3, 5, 1, 3)];
        let reference: Vec<f64> = {
            let mut cov = covariance(&form, 0).unwrap();
            probes
                .iter()
                .map(|&(a, b, c, d)| cov.gradient_cov(a, b, c, d))
                .collect()
        };
        for pin in 1..form.vars() {
            let mut cov = covariance(&form, pin).unwrap();
            for (p, &(a, b, c, d)) in probes.iter().enumerate() {
                assert!(
                    (cov.gradient_cov(a, b, c, d) - reference[p]).abs() < 1e-9,
                    "pin {pin} probe {p}"
                );
            }
        }
    }

    #[test]
    fn dense_mode_variances_match_the_eigenvalue_formula() {
        use crate::spectral::{gamma, ModeIndex, TorusSpec};
        for (t_ext, l) in [(4usize, 4usize), (8, 8), (8, 12)] {
            let form = build_form(FormSpec::periodic(t_ext, l)).unwrap();
            let mut cov = covariance(&form, 0).unwrap();
            let spec = TorusSpec::new(t_ext, l, 1).unwrap();
            for nu in 0..t_ext {
                for k in 0..l {
                    let mode = ModeIndex::d1(&spec, nu as i64, k as i64).unwrap();
                    let dense = dense_mode_variance(&form, &mut cov, nu, k).unwrap();
                    if mode.is_zero_mode(&spec) {
                        continue;
                    }
                    let expect = 1.0 / (4.0 * gamma(&spec, &mode));
                    assert!(
                        (dense - expect).abs() < 1e-8,
                        "T={t_ext} L={l} nu={nu} k={k}: {dense} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn equal_time_variances_match_mode_sums_and_bridge() {
        use crate::spectral::equilibrium_gradient_variance;
        for l in [4usize, 6, 8, 12] {
            let form = build_form(FormSpec::equilibrium_ring(l)).unwrap();
            let mut cov = covariance(&form, 0).unwrap();
            for j in 1..l {
                let dense = cov.gradient_cov(j, 0, j, 0);
                let sum = equilibrium_gradient_variance(l, j).unwrap();
                let bridge = (j * (l - j)) as f64 / l as f64;
                assert!((dense - sum).abs() < 1e-8, "L={l} j={j}");
                assert!((dense - bridge).abs() < 1e-8, "L={l} j={j}");
            }
        }
    }

    #[test]
    fn periodic_displacement_sum_matches_dense() {
        use crate::spectral::{periodic_displacement_variance, TorusSpec};
        let (t_ext, l) = (8usize, 8usize);
        let form = build_form(FormSpec::periodic(t_ext, l)).unwrap();
        let mut cov = covariance(&form, 0).unwrap();
        let spec = TorusSpec::new(t_ext, l, 1).unwrap();
        for j in 1..l / 2 {
            let odd = j % 2 == 1;
            let time = if odd { 1 } else { 0 };
            let a = form.site_index(time, j as i64).unwrap();
            let b = form.site_index(0, 0).unwrap();
            let dense = cov.gradient_cov(a, b, a, b);
            let sum = periodic_displacement_variance(&spec, j, odd).unwrap();
            assert!(
                (dense - sum).abs() < 1e-8,
                "j={j}: dense={dense} sum={sum}"
            );
        }
    }

    #[test]
    fn window_gap_shrinks_with_the_periodic_extent() {
        let g8 = periodic_free_gap(8, 4, 6).unwrap();
        let g16 = periodic_free_gap(16, 4, 6).unwrap();
        let g32 = periodic_free_gap(32, 4, 6).unwrap();
        assert!(g8 > g16 && g16 > g32, "{g8} {g16} {g32}");
        // self-comparison of the free field is identically zero
        let form = build_form(FormSpec::free(4, 6)).unwrap();
        let mut cov_a = covariance(&form, 0).unwrap();
        let mut cov_b = covariance(&form, 0).unwrap();
        let mut gap = 0.0f64;
        for a in 0..form.vars() {
            for b in 0..form.vars() {
                gap = gap.max((cov_a.entry(a, b) - cov_b.entry(a, b)).abs());
            }
        }
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn pair_correlation_guard_and_parity() {
        let form = build_form(FormSpec::periodic(16, 16)).unwrap();
        let mut cov = covariance(&form, 0).unwrap();
        assert!(matches!(
            spacetime_pair_correlation(&form, &mut cov, CorrelationKind::SpaceSpace, 3, 0),
            Err(Error::FiniteSize(_))
        ));
        assert!(matches!(
            spacetime_pair_correlation(&form, &mut cov, CorrelationKind::SpaceSpace, 1, 1),
            Err(Error::Parity { .. })
        ));
        assert!(matches!(
            spacetime_pair_correlation(&form, &mut cov, CorrelationKind::TimeTime, 0, 0),
            Err(Error::Domain(_))
        ));
        let v = spacetime_pair_correlation(&form, &mut cov, CorrelationKind::SpaceSpace, 1, 0)
            .unwrap();
        assert!(v.is_finite());
    }
}
