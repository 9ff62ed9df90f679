//! Fourier-side computations for the space-time periodic field and the
//! equilibrium interface measure.
//!
//! On the torus `(Z/TZ) x (Z/LZ)^d` the update quadratic form diagonalizes
//! with eigenvalue
//!
//! ```text
//! gamma(nu, k) = 1 - 2 cos(2 pi nu / T) c(k) + c(k)^2,
//! c(k) = (1/d) sum_n cos(2 pi k_n / L),
//! ```
//!
//! nonnegative everywhere and zero exactly on the two-element orbit
//! `{(0, 0), (T/2, L/2)}` (the uniform translation mode, which carries
//! Lebesgue weight). Every other mode is an independent centred Gaussian
//! with `E |h_hat|^2 = 1 / (4 gamma)`.
//!
//! Equal-time quantities come from parity-split mode sums; the workhorse for
//! integrating out the time frequency is the Poisson-kernel identity
//!
//! ```text
//! (1/2 pi) ∫₀^{2π} cos(n w) / (1 - 2 a cos w + a^2) dw = a^n / (1 - a^2).
//! ```
//!
//! [`sample_equilibrium`] draws an exact sample of the equilibrium measure
//! (zero mode pinned to 0) by filling independent Gaussian Fourier modes and
//! transforming back; spatial mode `k` carries `E |h_hat_k|^2 =
//! 1 / (2 d (1 - c(k)))`, conjugate pairs split the variance evenly between
//! real and imaginary parts, and self-conjugate modes (all components in
//! `{0, L/2}`) are real with the full variance.

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::util::pairwise_sum;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Extents of the finite space-time torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusSpec {
    /// Time extent `T` (even, positive).
    pub time_extent: usize,
    /// Spatial extent `L` per axis (even, positive).
    pub length: usize,
    /// Spatial dimension `d >= 1`.
    pub dim: usize,
}

impl TorusSpec {
    pub fn new(time_extent: usize, length: usize, dim: usize) -> Result<Self> {
        if time_extent == 0 || time_extent % 2 != 0 {
            return Err(Error::Domain(format!(
                "time extent must be a positive even integer, got {time_extent}"
            )));
        }
        if length == 0 || length % 2 != 0 {
            return Err(Error::Domain(format!(
                "spatial extent must be a positive even integer, got {length}"
            )));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        Ok(Self {
            time_extent,
            length,
            dim,
        })
    }
}

/// A Fourier mode label `(nu, k)`, components reduced modulo `T` and `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeIndex {
    pub nu: usize,
    pub k: Vec<usize>,
}

impl ModeIndex {
    pub fn new(spec: &TorusSpec, nu: i64, k: &[i64]) -> Result<Self> {
        if k.len() != spec.dim {
            return Err(Error::Domain(format!(
                "mode has {} spatial components, torus has dimension {}",
                k.len(),
                spec.dim
            )));
        }
        Ok(Self {
            nu: nu.rem_euclid(spec.time_extent as i64) as usize,
            k: k.iter()
                .map(|&c| c.rem_euclid(spec.length as i64) as usize)
                .collect(),
        })
    }

    /// Convenience constructor for the one-dimensional case.
    pub fn d1(spec: &TorusSpec, nu: i64, k: i64) -> Result<Self> {
        Self::new(spec, nu, &[k])
    }

    /// True on the two-element zero orbit `{(0,0), (T/2, L/2)}`.
    pub fn is_zero_mode(&self, spec: &TorusSpec) -> bool {
        let half_t = spec.time_extent / 2;
        let half_l = spec.length / 2;
        (self.nu == 0 && self.k.iter().all(|&c| c == 0))
            || (self.nu == half_t && self.k.iter().all(|&c| c == half_l))
    }
}

fn folded_cos(extent: usize, index: usize) -> f64 {
    let r = index % extent;
    let folded = r.min(extent - r);
    (2.0 * PI * folded as f64 / extent as f64).cos()
}

/// The lexicographically smallest member of the orbit of `(nu, k)` under
/// `(nu, k) -> (T - nu, L - k)` and `(nu, k) -> (nu + T/2, k + L/2)`.
///
/// Evaluating the eigenvalue on this representative makes the orbit
/// symmetries hold bit-exactly, and the zero orbit land on `(0, 0)` where
/// the formula gives exactly 0.
fn canonical_mode(spec: &TorusSpec, mode: &ModeIndex) -> (usize, Vec<usize>) {
    let t = spec.time_extent;
    let l = spec.length;
    let flip = |nu: usize, k: &[usize]| -> (usize, Vec<usize>) {
        (
            (t - nu) % t,
            k.iter().map(|&c| (l - c) % l).collect(),
        )
    };
    let shift = |nu: usize, k: &[usize]| -> (usize, Vec<usize>) {
        (
            (nu + t / 2) % t,
            k.iter().map(|&c| (c + l / 2) % l).collect(),
        )
    };
    let mut best = (mode.nu, mode.k.clone());
    let candidates = [
        flip(mode.nu, &mode.k),
        shift(mode.nu, &mode.k),
        {
            let (n2, k2) = shift(mode.nu, &mode.k);
            flip(n2, &k2)
        },
    ];
    for cand in candidates {
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Space-time eigenvalue `gamma(nu, k) >= 0` of the update quadratic form,
/// `1 - 2 cos(2 pi nu / T) c(k) + c(k)^2`.
///
/// Equal to `(c - cos w)^2 + sin^2 w`, so nonnegative with zeros exactly on
/// the zero orbit; the clamp only absorbs sub-epsilon rounding from the
/// cancellation near soft modes on very large tori.
pub fn gamma(spec: &TorusSpec, mode: &ModeIndex) -> f64 {
    let (nu, k) = canonical_mode(spec, mode);
    let cw = folded_cos(spec.time_extent, nu);
    let mut c = 0.0;
    for &comp in &k {
        c += folded_cos(spec.length, comp);
    }
    c /= k.len() as f64;
    (1.0 - 2.0 * cw * c + c * c).max(0.0)
}

/// Mode variance `E |h_hat|^2 = 1 / (4 gamma)`; the zero orbit is an error.
pub fn mode_variance(spec: &TorusSpec, mode: &ModeIndex) -> Result<f64> {
    if mode.is_zero_mode(spec) {
        return Err(Error::ZeroMode);
    }
    Ok(1.0 / (4.0 * gamma(spec, mode)))
}

/// Equilibrium displacement variance `E (h_j - h_0)^2` on the ring of `l`
/// sites, from the parity-split mode sums
///
/// ```text
/// even j: (1/L) sum_{k != 0, L/2} (1 - cos(2 pi k j / L)) / (1 - cos^2(2 pi k / L))
/// odd  j: 1/L + (1/L) sum_{k != 0, L/2}
///              (1 - cos(2 pi k j / L) cos(2 pi k / L)) / (1 - cos^2(2 pi k / L))
/// ```
///
/// Both equal the ring-bridge value `j (L - j) / L`.
pub fn equilibrium_gradient_variance(l: usize, j: usize) -> Result<f64> {
    if l == 0 || l % 2 != 0 {
        return Err(Error::Domain(format!("ring size must be even, got {l}")));
    }
    if j >= l {
        return Err(Error::Domain(format!("offset {j} outside ring of size {l}")));
    }
    if j == 0 {
        return Ok(0.0);
    }
    let lf = l as f64;
    let mut terms = Vec::with_capacity(l - 2);
    for k in 1..l {
        if k == l / 2 {
            continue;
        }
        let ck = (2.0 * PI * k as f64 / lf).cos();
        let ckj = (2.0 * PI * (k * j) as f64 / lf).cos();
        let denom = 1.0 - ck * ck;
        if j % 2 == 0 {
            terms.push((1.0 - ckj) / denom);
        } else {
            terms.push((1.0 - ckj * ck) / denom);
        }
    }
    let base = if j % 2 == 0 { 0.0 } else { 1.0 / lf };
    Ok(base + pairwise_sum(&terms) / lf)
}

/// Finite-torus displacement variance of the space-time periodic field
/// (`d = 1`): `E (h^0_j - h^0_0)^2` for even `j`, `E (h^1_j - h^0_0)^2` for
/// odd `j`. The mode sum runs over the full `(nu, k)` grid minus the zero
/// orbit; as `T -> infinity` at fixed `L` it converges to
/// [`equilibrium_gradient_variance`].
pub fn periodic_displacement_variance(spec: &TorusSpec, j: usize, odd: bool) -> Result<f64> {
    if spec.dim != 1 {
        return Err(Error::Domain(
            "periodic displacement variance is a d = 1 computation".into(),
        ));
    }
    if (j % 2 == 1) != odd {
        return Err(Error::Parity {
            what: "periodic displacement variance",
            expected: if odd { "odd" } else { "even" },
            j: j as i64,
        });
    }
    if j >= spec.length {
        return Err(Error::Domain(format!(
            "offset {j} outside ring of size {}",
            spec.length
        )));
    }
    if j == 0 {
        return Ok(0.0);
    }
    let t = spec.time_extent;
    let l = spec.length;
    let (tf, lf) = (t as f64, l as f64);
    let cos_t: Vec<f64> = (0..t).map(|nu| folded_cos(t, nu)).collect();
    let cos_l: Vec<f64> = (0..l).map(|k| folded_cos(l, k)).collect();
    let mut terms = Vec::with_capacity(t * l);
    for k in 0..l {
        let ck = cos_l[k];
        for nu in 0..t {
            if (nu == 0 && k == 0) || (nu == t / 2 && k == l / 2) {
                continue;
            }
            let g = 1.0 - 2.0 * cos_t[nu] * ck + ck * ck;
            let phase = 2.0 * PI * ((k * j) as f64 / lf + if odd { nu as f64 / tf } else { 0.0 });
            let numer = 1.0 - phase.cos();
            if numer == 0.0 {
                continue;
            }
            terms.push(numer / g);
        }
    }
    Ok(pairwise_sum(&terms) / (lf * tf))
}

/// Closed form of the Poisson-kernel integral: `a^n / (1 - a^2)`, `|a| < 1`.
pub fn poisson_kernel(a: f64, n: u32) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "poisson kernel needs |a| < 1, got a = {a}"
        )));
    }
    Ok(a.powi(n as i32) / (1.0 - a * a))
}

/// Companion numeric evaluation of the Poisson-kernel integral
/// `(1/2 pi) ∫₀^{2π} cos(n w) / (1 - 2 a cos w + a^2) dw` by periodic
/// trapezoid rule with node doubling until two refinements agree to 1e-13.
pub fn poisson_kernel_quadrature(a: f64, n: u32) -> Result<f64> {
    if !(a.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "poisson kernel needs |a| < 1, got a = {a}"
        )));
    }
    let f = |w: f64| (n as f64 * w).cos() / (1.0 - 2.0 * a * w.cos() + a * a);
    let eval = |nodes: usize| {
        let values: Vec<f64> = (0..nodes)
            .map(|m| f(2.0 * PI * m as f64 / nodes as f64))
            .collect();
        pairwise_sum(&values) / nodes as f64
    };
    let mut nodes = 256usize;
    let mut prev = eval(nodes);
    loop {
        nodes *= 2;
        let next = eval(nodes);
        if (next - prev).abs() < 1e-13 {
            return Ok(next);
        }
        if nodes > (1 << 22) {
            return Err(Error::Numeric(format!(
                "poisson-kernel quadrature did not settle by {nodes} nodes \
                 (a = {a}, n = {n}, last delta = {:.3e})",
                (next - prev).abs()
            )));
        }
        prev = next;
    }
}

/// Exact equilibrium sample of the interface measure on `(Z/LZ)^d`, zero
/// mode pinned to 0, bit-reproducible for a given seed.
pub fn sample_equilibrium(length: usize, dim: usize, seed: u64) -> Result<Vec<f64>> {
    if length == 0 || length % 2 != 0 {
        return Err(Error::Domain(format!(
            "spatial extent must be a positive even integer, got {length}"
        )));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let n: usize = length
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Domain(format!("lattice {length}^{dim} overflows")))?;
    let mut rng = StreamRng::seed_from_u64(seed);

    // Row-major strides; conjugation is componentwise k -> L - k (mod L).
    let mut strides = vec![1usize; dim];
    for axis in (0..dim.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * length;
    }
    let conjugate = |idx: usize| -> usize {
        let mut rest = idx;
        let mut out = 0;
        for &stride in &strides {
            let c = rest / stride;
            rest %= stride;
            out += ((length - c) % length) * stride;
        }
        out
    };
    let mode_sigma_sq = |idx: usize| -> f64 {
        let mut rest = idx;
        let mut csum = 0.0;
        for &stride in &strides {
            let c = rest / stride;
            rest %= stride;
            csum += folded_cos(length, c);
        }
        let c = csum / dim as f64;
        1.0 / (2.0 * dim as f64 * (1.0 - c))
    };

    let mut modes = vec![Complex64::new(0.0, 0.0); n];
    for idx in 1..n {
        let conj = conjugate(idx);
        if idx < conj {
            let half = (mode_sigma_sq(idx) * 0.5).sqrt();
            let re = half * rng.normal();
            let im = half * rng.normal();
            modes[idx] = Complex64::new(re, im);
            modes[conj] = Complex64::new(re, -im);
        } else if idx == conj {
            // self-conjugate: real mode with the full variance
            modes[idx] = Complex64::new(mode_sigma_sq(idx).sqrt() * rng.normal(), 0.0);
        }
    }

    // h_j = (1/sqrt N) sum_k h_hat_k e^{-2 pi i k.j / L}: a plain forward
    // transform along each axis, then one global 1/sqrt(N) scale.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(length);
    let mut line = vec![Complex64::new(0.0, 0.0); length];
    for (axis, &stride) in strides.iter().enumerate() {
        let block = stride * length;
        let blocks = n / block;
        for b in 0..blocks {
            for inner in 0..stride {
                let base = b * block + inner;
                for (s, slot) in line.iter_mut().enumerate() {
                    *slot = modes[base + s * stride];
                }
                fft.process(&mut line);
                for (s, &value) in line.iter().enumerate() {
                    modes[base + s * stride] = value;
                }
            }
        }
        let _ = axis;
    }

    let scale = 1.0 / (n as f64).sqrt();
    Ok(modes.into_iter().map(|c| c.re * scale).collect())
}
