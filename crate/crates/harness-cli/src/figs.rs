//! The `fig2` and `fig3` commands: random-sequential relaxation curves and
//! fixed-time spatial profiles with error bars, reference curves, and
//! least-squares shape fits.
//!
//! Scaling conventions (printed in the CSV headers): with the checkerboard
//! asymptotics as the yardstick,
//!
//! ```text
//! g11_scaled = sqrt(pi t)/2        * g11(t, 0)
//! g22_scaled = -4 t sqrt(pi t)     * g22(t, 0)
//! g12_scaled = -t sqrt(pi t)/(2 j) * g12(t, j)   (plotted at j = 1)
//! ```
//!
//! each tending to 1 under those asymptotics, which makes curves from
//! different dynamics comparable. The checkerboard reference for `g12` is
//! omitted as its own curve: after scaling it coincides with the `g22`
//! reference exactly (`g12(t,1) = 8 g22(t,0)`).

use crate::csvio::{float, int, CsvBuilder};
use harness::correlations::{g11_exact, g22_exact, CorrelationKind};
use harness::estimators::{EstimatorGrid, PairCorrelationAccumulator};
use harness::sim::{run, Dynamics, SimConfig};
use harness::{Error, Result};
use std::f64::consts::PI;

pub struct Fig2Row {
    pub t: u64,
    pub g11_raw: f64,
    pub g11_scaled: f64,
    pub g11_err: f64,
    pub g22_raw: f64,
    pub g22_scaled: f64,
    pub g22_err: f64,
    pub g12_raw: f64,
    pub g12_scaled: f64,
    pub g12_err: f64,
    pub g11_oe_exact_scaled: f64,
    pub g22_oe_exact_scaled: f64,
}

pub struct Fig2Data {
    pub length: usize,
    pub t1: u64,
    pub t_max: u64,
    pub seed: u64,
    pub rows: Vec<Fig2Row>,
}

const FIG_BLOCKS: usize = 16;

fn run_accumulators(
    length: usize,
    seed: u64,
    mut accs: Vec<&mut PairCorrelationAccumulator>,
) -> Result<()> {
    let needed = accs.iter().map(|a| a.snapshots_needed()).max().unwrap();
    let config = SimConfig {
        length,
        dim: 1,
        dynamics: Dynamics::RandomSequential,
        seed,
        warmup_rounds: 0,
        measure_rounds: needed - 1,
        snapshot_stride: 1,
        replicas: 1,
    };
    let mut feed_error = None;
    run(&config, |state| {
        for acc in accs.iter_mut() {
            if let Err(e) = acc.feed(state.heights()) {
                feed_error.get_or_insert(e);
            }
        }
    })?;
    match feed_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Relaxation of the three kernels at the origin under random-sequential
/// updates, with checkerboard reference curves.
pub fn fig2_data(length: usize, t1: u64, t_max: u64, seed: u64) -> Result<Fig2Data> {
    if t1 < 8 {
        return Err(Error::Domain(format!("t1 must be >= 8, got {t1}")));
    }
    if t_max < 1 {
        return Err(Error::Domain("t-max must be >= 1".into()));
    }
    let mut g11 = PairCorrelationAccumulator::new(
        CorrelationKind::SpaceSpace,
        EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, t_max, 0),
        length,
        t1,
        FIG_BLOCKS,
    )?;
    let mut g22 = PairCorrelationAccumulator::new(
        CorrelationKind::TimeTime,
        EstimatorGrid::checkerboard(CorrelationKind::TimeTime, t_max, 0),
        length,
        t1,
        FIG_BLOCKS,
    )?;
    let mut g12 = PairCorrelationAccumulator::new(
        CorrelationKind::SpaceTime,
        EstimatorGrid::checkerboard(CorrelationKind::SpaceTime, t_max, 1),
        length,
        t1,
        FIG_BLOCKS,
    )?;
    run_accumulators(length, seed, vec![&mut g11, &mut g22, &mut g12])?;

    let mut rows = Vec::new();
    for t in 1..=t_max {
        let tf = t as f64;
        let s11 = (PI * tf).sqrt() / 2.0;
        let s22 = -4.0 * tf * (PI * tf).sqrt();
        let s12 = -tf * (PI * tf).sqrt() / 2.0;
        let (r11, e11) = (g11.estimate(t, 0)?, g11.stderr(t, 0)?);
        let (r22, e22) = (g22.estimate(t, 0)?, g22.stderr(t, 0)?);
        let (r12, e12) = (g12.estimate(t, 1)?, g12.stderr(t, 1)?);
        rows.push(Fig2Row {
            t,
            g11_raw: r11,
            g11_scaled: s11 * r11,
            g11_err: e11,
            g22_raw: r22,
            g22_scaled: s22 * r22,
            g22_err: e22,
            g12_raw: r12,
            g12_scaled: s12 * r12,
            g12_err: e12,
            g11_oe_exact_scaled: s11 * g11_exact(t, 0)?,
            g22_oe_exact_scaled: s22 * g22_exact(t, 0)?,
        });
    }
    Ok(Fig2Data {
        length,
        t1,
        t_max,
        seed,
        rows,
    })
}

pub fn render_fig2_csv(data: &Fig2Data) -> String {
    let mut b = CsvBuilder::new();
    b.meta("command", "fig2")
        .meta("version", env!("CARGO_PKG_VERSION"))
        .meta("dynamics", "sequential")
        .meta("length", data.length)
        .meta("t1", data.t1)
        .meta("t-max", data.t_max)
        .meta("seed", data.seed)
        .meta(
            "scaling",
            "g11 * sqrt(pi t)/2; g22 * -4 t sqrt(pi t); g12(t,1) * -t sqrt(pi t)/2",
        )
        .meta("err-columns", "batch-means stderr of the raw estimate")
        .meta(
            "note",
            "the scaled checkerboard g12 reference equals the g22 reference \
             exactly (g12(t,1) = 8 g22(t,0)) and is omitted",
        )
        .header(&[
            "t",
            "g11_raw",
            "g11_scaled",
            "g11_err",
            "g22_raw",
            "g22_scaled",
            "g22_err",
            "g12_raw",
            "g12_scaled",
            "g12_err",
            "g11_oe_exact_scaled",
            "g22_oe_exact_scaled",
        ]);
    for r in &data.rows {
        b.row(&[
            int(r.t as i64),
            float(r.g11_raw),
            float(r.g11_scaled),
            float(r.g11_err),
            float(r.g22_raw),
            float(r.g22_scaled),
            float(r.g22_err),
            float(r.g12_raw),
            float(r.g12_scaled),
            float(r.g12_err),
            float(r.g11_oe_exact_scaled),
            float(r.g22_oe_exact_scaled),
        ]);
    }
    b.finish()
}

pub struct Fig3Row {
    pub j: i64,
    pub g11: f64,
    pub g11_err: f64,
    pub g22: f64,
    pub g22_err: f64,
    pub g12: f64,
    pub g12_err: f64,
    pub g11_fit: f64,
    pub g22_fit: f64,
    pub g12_fit: f64,
}

pub struct Fig3Data {
    pub length: usize,
    pub t1: u64,
    pub t: u64,
    pub j_max: i64,
    pub seed: u64,
    /// Fitted (amplitude, diffusion constant) per kernel.
    pub g11_fit: (f64, f64),
    pub g22_fit: (f64, f64),
    pub g12_fit: (f64, f64),
    pub rows: Vec<Fig3Row>,
}

/// Weighted least squares of `y ~ amplitude * shape(j; D)` over a
/// one-parameter family, scanning `D` by golden-section on a log grid.
fn fit_shape(
    js: &[i64],
    values: &[f64],
    errs: &[f64],
    t: u64,
    shape: impl Fn(f64, f64) -> f64,
) -> (f64, f64) {
    let weights: Vec<f64> = errs
        .iter()
        .map(|e| {
            let e = e.max(1e-12);
            1.0 / (e * e)
        })
        .collect();
    let amp_ssr = |d: f64| -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&j, &y), &w) in js.iter().zip(values).zip(&weights) {
            let f = shape(j as f64, d * t as f64);
            num += w * y * f;
            den += w * f * f;
        }
        let amp = if den > 0.0 { num / den } else { 0.0 };
        let mut ssr = 0.0;
        for ((&j, &y), &w) in js.iter().zip(values).zip(&weights) {
            let r = y - amp * shape(j as f64, d * t as f64);
            ssr += w * r * r;
        }
        (amp, ssr)
    };
    let (mut lo, mut hi) = (0.02f64.ln(), 50.0f64.ln());
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = amp_ssr(x1.exp()).1;
    let mut f2 = amp_ssr(x2.exp()).1;
    for _ in 0..120 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = amp_ssr(x1.exp()).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = amp_ssr(x2.exp()).1;
        }
    }
    let d = (0.5 * (lo + hi)).exp();
    (amp_ssr(d).0, d)
}

fn gauss_shape(j: f64, dt: f64) -> f64 {
    (-j * j / (4.0 * dt)).exp()
}

fn curvature_shape(j: f64, dt: f64) -> f64 {
    (1.0 - j * j / (2.0 * dt)) * (-j * j / (4.0 * dt)).exp()
}

fn odd_shape(j: f64, dt: f64) -> f64 {
    j * (-j * j / (4.0 * dt)).exp()
}

/// Spatial profiles of the three kernels at a fixed time under
/// random-sequential updates, with fitted reference shapes.
pub fn fig3_data(length: usize, t1: u64, t: u64, j_max: i64, seed: u64) -> Result<Fig3Data> {
    if t1 < 8 {
        return Err(Error::Domain(format!("t1 must be >= 8, got {t1}")));
    }
    if t < 1 {
        return Err(Error::Domain("t must be >= 1".into()));
    }
    let grid = EstimatorGrid {
        t_min: t,
        t_max: t,
        j_max,
        j_step: 1,
    };
    let mut g11 =
        PairCorrelationAccumulator::new(CorrelationKind::SpaceSpace, grid, length, t1, FIG_BLOCKS)?;
    let mut g22 =
        PairCorrelationAccumulator::new(CorrelationKind::TimeTime, grid, length, t1, FIG_BLOCKS)?;
    let mut g12 =
        PairCorrelationAccumulator::new(CorrelationKind::SpaceTime, grid, length, t1, FIG_BLOCKS)?;
    run_accumulators(length, seed, vec![&mut g11, &mut g22, &mut g12])?;

    let js: Vec<i64> = (-j_max..=j_max).collect();
    let collect = |acc: &PairCorrelationAccumulator| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut vals = Vec::new();
        let mut errs = Vec::new();
        for &j in &js {
            vals.push(acc.estimate(t, j)?);
            errs.push(acc.stderr(t, j)?);
        }
        Ok((vals, errs))
    };
    let (v11, e11) = collect(&g11)?;
    let (v22, e22) = collect(&g22)?;
    let (v12, e12) = collect(&g12)?;

    let f11 = fit_shape(&js, &v11, &e11, t, gauss_shape);
    let f22 = fit_shape(&js, &v22, &e22, t, curvature_shape);
    let f12 = fit_shape(&js, &v12, &e12, t, odd_shape);

    let mut rows = Vec::new();
    for (i, &j) in js.iter().enumerate() {
        rows.push(Fig3Row {
            j,
            g11: v11[i],
            g11_err: e11[i],
            g22: v22[i],
            g22_err: e22[i],
            g12: v12[i],
            g12_err: e12[i],
            g11_fit: f11.0 * gauss_shape(j as f64, f11.1 * t as f64),
            g22_fit: f22.0 * curvature_shape(j as f64, f22.1 * t as f64),
            g12_fit: f12.0 * odd_shape(j as f64, f12.1 * t as f64),
        });
    }
    Ok(Fig3Data {
        length,
        t1,
        t,
        j_max,
        seed,
        g11_fit: f11,
        g22_fit: f22,
        g12_fit: f12,
        rows,
    })
}

pub fn render_fig3_csv(data: &Fig3Data) -> String {
    let mut b = CsvBuilder::new();
    b.meta("command", "fig3")
        .meta("version", env!("CARGO_PKG_VERSION"))
        .meta("dynamics", "sequential")
        .meta("length", data.length)
        .meta("t1", data.t1)
        .meta("t", data.t)
        .meta("j-max", data.j_max)
        .meta("seed", data.seed)
        .meta(
            "g11-fit",
            format!(
                "amplitude = {}, diffusion = {} in A exp(-j^2/(4 D t))",
                data.g11_fit.0, data.g11_fit.1
            ),
        )
        .meta(
            "g22-fit",
            format!(
                "amplitude = {}, diffusion = {} in B (1 - j^2/(2 D t)) exp(-j^2/(4 D t))",
                data.g22_fit.0, data.g22_fit.1
            ),
        )
        .meta(
            "g12-fit",
            format!(
                "amplitude = {}, diffusion = {} in C j exp(-j^2/(4 D t))",
                data.g12_fit.0, data.g12_fit.1
            ),
        )
        .header(&[
            "j", "g11", "g11_err", "g22", "g22_err", "g12", "g12_err", "g11_fit", "g22_fit",
            "g12_fit",
        ]);
    for r in &data.rows {
        b.row(&[
            int(r.j),
            float(r.g11),
            float(r.g11_err),
            float(r.g22),
            float(r.g22_err),
            float(r.g12),
            float(r.g12_err),
            float(r.g11_fit),
            float(r.g22_fit),
            float(r.g12_fit),
        ]);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_small_run_shapes_and_reference() {
        let data = fig2_data(2048, 16, 4, 9).unwrap();
        assert_eq!(data.rows.len(), 4);
        for r in &data.rows {
            assert!(r.g11_err >= 0.0 && r.g22_err >= 0.0 && r.g12_err >= 0.0);
            // checkerboard reference scaled toward 1 from below
            assert!(r.g11_oe_exact_scaled > 0.5 && r.g11_oe_exact_scaled < 1.0);
            assert!(r.g22_oe_exact_scaled >= 1.0 && r.g22_oe_exact_scaled < 2.0);
        }
        let csv = render_fig2_csv(&data);
        assert!(csv.starts_with("# command: fig2\n"));
        assert_eq!(csv, render_fig2_csv(&fig2_data(2048, 16, 4, 9).unwrap()));
    }

    #[test]
    fn fig3_small_run_fits_and_determinism() {
        let data = fig3_data(2048, 16, 2, 6, 11).unwrap();
        assert_eq!(data.rows.len(), 13);
        assert!(data.g11_fit.0 > 0.0, "g11 amplitude {}", data.g11_fit.0);
        assert!(data.g11_fit.1 > 0.0);
        let csv = render_fig3_csv(&data);
        assert_eq!(csv, render_fig3_csv(&fig3_data(2048, 16, 2, 6, 11).unwrap()));
        assert!(csv.contains("# g11-fit: amplitude"));
    }

    #[test]
    fn fit_recovers_a_clean_gaussian() {
        let js: Vec<i64> = (-10..=10).collect();
        let d_true = 1.7;
        let t = 5u64;
        let values: Vec<f64> = js
            .iter()
            .map(|&j| 0.8 * gauss_shape(j as f64, d_true * t as f64))
            .collect();
        let errs = vec![0.001; js.len()];
        let (amp, d) = fit_shape(&js, &values, &errs, t, gauss_shape);
        assert!((amp - 0.8).abs() < 1e-6, "amp {amp}");
        assert!((d - d_true).abs() < 1e-4, "D {d}");
    }
}
