//! Empirical space-time correlation estimators with batch-means error bars.
//!
//! Snapshots arrive at unit macroscopic-time stride: every second half-sweep
//! for the checkerboard dynamics, every `L^d` micro-updates for the
//! random-sequential dynamics. Every snapshot is a time origin (origins
//! overlap, so error bars come from batch means over origin blocks, not from
//! naive variances). With `w[s]` the snapshot at macro time `s` and `t'` an
//! origin, a ring of `L` sites is averaged over all `i`:
//!
//! ```text
//! g11(t, j):  (w[t'][i+2] - w[t'][i]) * (w[t'+t][i+j+2] - w[t'+t][i+j])
//! g22(t, j):  (w[t'+1][i] - w[t'][i]) * (w[t'+t+1][i+j] - w[t'+t][i+j])
//! g12(t, j):  (w[t'+1][i] - w[t'][i]) * (w[t'+t][i+j+1] - w[t'+t][i+j-1])
//! g21(t, j):  (w[t'+t][i] - w[t'+t-1][i]) * (w[t'][i+j+1] - w[t'][i+j-1])
//! ```
//!
//! Accumulation is streaming: a sliding window of `t_max + 2` snapshots is
//! retained, each completed origin adds one product per site into per-block
//! compensated sums.
//!
//! Estimates are reported in the kernel normalization of
//! [`CorrelationKind::covariance_scale`]: the mixed kernels are 4x the raw
//! product average, matching their closed forms, so empirical and exact
//! channels compare point by point.

use crate::correlations::CorrelationKind;
use crate::error::{Error, Result};
use crate::util::KahanSum;
use std::collections::VecDeque;

/// The `(t, j)` grid an accumulator covers.
///
/// `j_step = 2` restricts offsets to the parity class of the kind (the
/// checkerboard case); `j_step = 1` covers every integer offset (the
/// random-sequential case, where no parity structure survives).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EstimatorGrid {
    pub t_min: u64,
    pub t_max: u64,
    pub j_max: i64,
    pub j_step: i64,
}

impl EstimatorGrid {
    /// Full time range for `kind` up to `t_max`, parity-matched offsets.
    pub fn checkerboard(kind: CorrelationKind, t_max: u64, j_max: i64) -> Self {
        Self {
            t_min: kind.min_rounds(),
            t_max,
            j_max,
            j_step: 2,
        }
    }

    /// Full time range for `kind` up to `t_max`, every integer offset.
    pub fn all_offsets(kind: CorrelationKind, t_max: u64, j_max: i64) -> Self {
        Self {
            t_min: kind.min_rounds(),
            t_max,
            j_max,
            j_step: 1,
        }
    }

    fn offsets(&self, kind: CorrelationKind) -> Vec<i64> {
        let mut js = Vec::new();
        let mut j = -self.j_max;
        while j <= self.j_max {
            if self.j_step == 1 || kind.offset_is_valid(j) {
                js.push(j);
            }
            j += 1;
        }
        js
    }
}

/// A single estimated cell, ready for table or CSV assembly.
#[derive(Clone, Copy, Debug)]
pub struct CorrelationEstimate {
    pub kind: CorrelationKind,
    pub t: u64,
    pub j: i64,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// One row of a correlation table with its exact, asymptotic and empirical
/// channels (whichever a producer fills).
#[derive(Clone, Copy, Debug)]
pub struct TableRow {
    pub kind: CorrelationKind,
    pub t: u64,
    pub j: i64,
    pub exact: Option<f64>,
    pub asymptotic: Option<f64>,
    pub empirical: Option<f64>,
    pub stderr: Option<f64>,
}

/// A grid of correlation values indexed by `(kind, t, j)`.
#[derive(Clone, Debug, Default)]
pub struct CorrelationTable {
    pub rows: Vec<TableRow>,
}

/// Streaming pair-correlation sums for one kernel on a ring of `n_sites`.
#[derive(Clone, Debug)]
pub struct PairCorrelationAccumulator {
    kind: CorrelationKind,
    grid: EstimatorGrid,
    n_sites: usize,
    planned_origins: u64,
    n_blocks: usize,
    js: Vec<i64>,
    n_t: usize,
    /// `[block][t_idx * n_j + j_idx]` compensated product sums.
    block_sums: Vec<Vec<KahanSum>>,
    block_origins: Vec<u64>,
    /// Origins each block receives in one complete pass.
    expected_block_origins: Vec<u64>,
    origins_done: u64,
    window: VecDeque<Vec<f64>>,
    fed: u64,
}

impl PairCorrelationAccumulator {
    pub fn new(
        kind: CorrelationKind,
        grid: EstimatorGrid,
        n_sites: usize,
        planned_origins: u64,
        n_blocks: usize,
    ) -> Result<Self> {
        if grid.t_min < kind.min_rounds() {
            return Err(Error::Domain(format!(
                "{} starts at t = {}",
                kind.label(),
                kind.min_rounds()
            )));
        }
        if grid.t_min > grid.t_max || !(grid.j_step == 1 || grid.j_step == 2) {
            return Err(Error::Domain("malformed estimator grid".into()));
        }
        if grid.j_max < 0 || grid.j_max + 2 > n_sites as i64 / 2 {
            return Err(Error::Domain(format!(
                "offset range {} too large for a ring of {}",
                grid.j_max, n_sites
            )));
        }
        if planned_origins == 0 || n_blocks == 0 {
            return Err(Error::Domain("need at least one origin and one block".into()));
        }
        let js = grid.offsets(kind);
        let n_t = (grid.t_max - grid.t_min + 1) as usize;
        let cells = n_t * js.len();
        let mut expected = vec![0u64; n_blocks];
        for o in 0..planned_origins {
            expected[(o * n_blocks as u64 / planned_origins) as usize] += 1;
        }
        Ok(Self {
            kind,
            grid,
            n_sites,
            planned_origins,
            n_blocks,
            js,
            n_t,
            block_sums: vec![vec![KahanSum::new(); cells]; n_blocks],
            block_origins: vec![0; n_blocks],
            expected_block_origins: expected,
            origins_done: 0,
            window: VecDeque::new(),
            fed: 0,
        })
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn offsets(&self) -> &[i64] {
        &self.js
    }

    pub fn origins_done(&self) -> u64 {
        self.origins_done
    }

    pub fn planned_origins(&self) -> u64 {
        self.planned_origins
    }

    pub fn block_count(&self) -> usize {
        self.n_blocks
    }

    /// Snapshots a full accumulation must see.
    pub fn snapshots_needed(&self) -> u64 {
        self.planned_origins + self.lag()
    }

    pub fn is_complete(&self) -> bool {
        self.origins_done == self.planned_origins
    }

    /// How far past the origin the window must reach.
    fn lag(&self) -> u64 {
        match self.kind {
            CorrelationKind::TimeTime => self.grid.t_max + 1,
            _ => self.grid.t_max.max(1),
        }
    }

    /// Push the next snapshot (unit macro-time stride) and fold in every
    /// origin it completes.
    pub fn feed(&mut self, heights: &[f64]) -> Result<()> {
        if heights.len() != self.n_sites {
            return Err(Error::Domain(format!(
                "snapshot has {} sites, accumulator expects {}",
                heights.len(),
                self.n_sites
            )));
        }
        let lag = self.lag();
        self.window.push_back(heights.to_vec());
        let s = self.fed;
        self.fed += 1;
        if s >= lag {
            let origin = s - lag;
            if origin < self.planned_origins {
                let b = (origin * self.n_blocks as u64 / self.planned_origins) as usize;
                self.process_origin(b);
                self.origins_done += 1;
                self.block_origins[b] += 1;
            }
            self.window.pop_front();
        }
        Ok(())
    }

    /// Accumulate all products for the origin at the window front.
    fn process_origin(&mut self, origin_block: usize) {
        let l = self.n_sites;
        let t_min = self.grid.t_min;
        for ti in 0..self.n_t {
            let t = (t_min + ti as u64) as usize;
            for (ji, &j) in self.js.iter().enumerate() {
                let total = match self.kind {
                    CorrelationKind::SpaceSpace => {
                        let a = &self.window[0];
                        let b = &self.window[t];
                        space_space_sum(a, b, l, j)
                    }
                    CorrelationKind::TimeTime => {
                        let a0 = &self.window[0];
                        let a1 = &self.window[1];
                        let b0 = &self.window[t];
                        let b1 = &self.window[t + 1];
                        time_time_sum(a0, a1, b0, b1, l, j)
                    }
                    CorrelationKind::SpaceTime => {
                        let a0 = &self.window[0];
                        let a1 = &self.window[1];
                        let b = &self.window[t];
                        time_space_sum(a0, a1, b, l, j)
                    }
                    CorrelationKind::TimeSpace => {
                        let b0 = &self.window[t - 1];
                        let b1 = &self.window[t];
                        let a = &self.window[0];
                        space_time_sum(b0, b1, a, l, j)
                    }
                };
                self.block_sums[origin_block][ti * self.js.len() + ji].add(total);
            }
        }
    }

    fn cell(&self, t: u64, j: i64) -> Result<usize> {
        if t < self.grid.t_min || t > self.grid.t_max {
            return Err(Error::InsufficientData(format!(
                "t = {t} outside the accumulated range {}..={}",
                self.grid.t_min, self.grid.t_max
            )));
        }
        let ji = self
            .js
            .iter()
            .position(|&x| x == j)
            .ok_or_else(|| {
                Error::InsufficientData(format!(
                    "j = {j} outside the accumulated offset grid (|j| <= {}, step {})",
                    self.grid.j_max, self.grid.j_step
                ))
            })?;
        Ok((t - self.grid.t_min) as usize * self.js.len() + ji)
    }

    /// Point estimate of the kernel at `(t, j)`.
    pub fn estimate(&self, t: u64, j: i64) -> Result<f64> {
        if self.origins_done == 0 {
            return Err(Error::InsufficientData(
                "no origin completed; feed more snapshots".into(),
            ));
        }
        let cell = self.cell(t, j)?;
        let total: f64 = self.block_sums.iter().map(|b| b[cell].value()).sum();
        Ok(self.kind.covariance_scale() * total
            / (self.n_sites as f64 * self.origins_done as f64))
    }

    /// Batch-means standard error over origin blocks (needs >= 8 complete
    /// blocks).
    pub fn stderr(&self, t: u64, j: i64) -> Result<f64> {
        let cell = self.cell(t, j)?;
        let mut means = Vec::with_capacity(self.n_blocks);
        for b in 0..self.n_blocks {
            // only blocks that received their full share of origins
            let expected = self.expected_block_origins[b];
            if expected > 0 && self.block_origins[b] >= expected {
                means
                    .push(self.block_sums[b][cell].value()
                        / (self.n_sites as f64 * self.block_origins[b] as f64));
            }
        }
        if means.len() < 8 {
            return Err(Error::TooFewBlocks {
                have: means.len(),
                need: 8,
            });
        }
        let nb = means.len() as f64;
        let mean = means.iter().sum::<f64>() / nb;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (nb - 1.0);
        Ok(self.kind.covariance_scale() * (var / nb).sqrt())
    }

    /// Origins per complete block (for reporting).
    pub fn block_length(&self) -> u64 {
        self.planned_origins / self.n_blocks as u64
    }

    /// Merge a replica's sums (associative, order-independent).
    pub fn merge(&mut self, other: &PairCorrelationAccumulator) -> Result<()> {
        if self.kind != other.kind
            || self.grid != other.grid
            || self.n_sites != other.n_sites
            || self.planned_origins != other.planned_origins
            || self.n_blocks != other.n_blocks
        {
            return Err(Error::Domain(
                "accumulators with different shapes cannot merge".into(),
            ));
        }
        for (mine, theirs) in self.block_sums.iter_mut().zip(&other.block_sums) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                m.merge(t);
            }
        }
        for (m, t) in self.block_origins.iter_mut().zip(&other.block_origins) {
            *m += t;
        }
        self.origins_done += other.origins_done;
        Ok(())
    }

    /// All estimated cells, with error bars where enough blocks completed.
    pub fn rows(&self) -> Vec<CorrelationEstimate> {
        let mut out = Vec::new();
        for t in self.grid.t_min..=self.grid.t_max {
            for &j in &self.js {
                if let Ok(value) = self.estimate(t, j) {
                    out.push(CorrelationEstimate {
                        kind: self.kind,
                        t,
                        j,
                        value,
                        stderr: self.stderr(t, j).ok(),
                    });
                }
            }
        }
        out
    }
}

#[inline]
fn wrap(i: usize, off: i64, l: usize) -> usize {
    (i as i64 + off).rem_euclid(l as i64) as usize
}

/// Step-two space gradients at both ends, offset `j` apart.
fn space_space_sum(a: &[f64], b: &[f64], l: usize, j: i64) -> f64 {
    let mut acc = KahanSum::new();
    let lo = (-j).max(0).min(l as i64) as usize;
    let hi = (l as i64 - j - 2).clamp(0, l as i64) as usize;
    for i in 0..l {
        let (bi, bi2) = if i >= lo && i < hi {
            let base = (i as i64 + j) as usize;
            (base, base + 2)
        } else {
            (wrap(i, j, l), wrap(i, j + 2, l))
        };
        let ai2 = if i + 2 < l { i + 2 } else { i + 2 - l };
        acc.add((a[ai2] - a[i]) * (b[bi2] - b[bi]));
    }
    acc.value()
}

/// Unit-time height differences at both ends, offset `j` apart.
fn time_time_sum(a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64], l: usize, j: i64) -> f64 {
    let mut acc = KahanSum::new();
    for i in 0..l {
        let bj = wrap(i, j, l);
        acc.add((a1[i] - a0[i]) * (b1[bj] - b0[bj]));
    }
    acc.value()
}

/// Time gradient at the origin, centered space gradient at the far end.
fn time_space_sum(a0: &[f64], a1: &[f64], b: &[f64], l: usize, j: i64) -> f64 {
    let mut acc = KahanSum::new();
    for i in 0..l {
        let p = wrap(i, j + 1, l);
        let m = wrap(i, j - 1, l);
        acc.add((a1[i] - a0[i]) * (b[p] - b[m]));
    }
    acc.value()
}

/// Time gradient at the far end, centered space gradient at the origin.
fn space_time_sum(b0: &[f64], b1: &[f64], a: &[f64], l: usize, j: i64) -> f64 {
    let mut acc = KahanSum::new();
    for i in 0..l {
        let p = wrap(i, j + 1, l);
        let m = wrap(i, j - 1, l);
        acc.add((b1[i] - b0[i]) * (a[p] - a[m]));
    }
    acc.value()
}

/// One-shot accumulation over a complete snapshot slice.
pub fn accumulate(
    snapshots: &[Vec<f64>],
    kind: CorrelationKind,
    grid: EstimatorGrid,
    planned_origins: u64,
    n_blocks: usize,
) -> Result<PairCorrelationAccumulator> {
    let n_sites = snapshots
        .first()
        .ok_or_else(|| Error::InsufficientData("no snapshots".into()))?
        .len();
    let mut acc = PairCorrelationAccumulator::new(kind, grid, n_sites, planned_origins, n_blocks)?;
    if (snapshots.len() as u64) < acc.snapshots_needed() {
        return Err(Error::InsufficientData(format!(
            "{} covers origins 0..{} and needs {} snapshots, got {}",
            kind.label(),
            planned_origins,
            acc.snapshots_needed(),
            snapshots.len()
        )));
    }
    for s in snapshots {
        acc.feed(s)?;
    }
    Ok(acc)
}

/// Streaming displacement-variance accumulator: stores the first
/// `n_origins` snapshots and averages `(h^{o+t}_i - h^o_i)^2` over sites
/// and origins for each requested separation `t`.
#[derive(Clone, Debug)]
pub struct DisplacementAccumulator {
    n_origins: u64,
    targets: Vec<u64>,
    origins: Vec<Vec<f64>>,
    sums: Vec<(KahanSum, u64)>,
    time: u64,
}

impl DisplacementAccumulator {
    pub fn new(n_origins: u64, mut targets: Vec<u64>) -> Result<Self> {
        if n_origins == 0 || targets.is_empty() {
            return Err(Error::Domain("need origins and targets".into()));
        }
        targets.sort_unstable();
        targets.dedup();
        let sums = vec![(KahanSum::new(), 0u64); targets.len()];
        Ok(Self {
            n_origins,
            targets,
            origins: Vec::new(),
            sums,
            time: 0,
        })
    }

    pub fn feed(&mut self, heights: &[f64]) {
        if (self.time as usize) < self.n_origins as usize {
            self.origins.push(heights.to_vec());
        }
        for (ti, &t) in self.targets.iter().enumerate() {
            if self.time < t {
                continue;
            }
            let o = self.time - t;
            if o < self.n_origins {
                let origin = &self.origins[o as usize];
                let mut acc = KahanSum::new();
                for (h, h0) in heights.iter().zip(origin) {
                    let d = h - h0;
                    acc.add(d * d);
                }
                self.sums[ti].0.add(acc.value() / heights.len() as f64);
                self.sums[ti].1 += 1;
            }
        }
        self.time += 1;
    }

    /// Mean squared displacement at separation `t`.
    pub fn estimate(&self, t: u64) -> Result<f64> {
        let ti = self
            .targets
            .iter()
            .position(|&x| x == t)
            .ok_or_else(|| Error::InsufficientData(format!("t = {t} was not a target")))?;
        let (sum, count) = &self.sums[ti];
        if *count == 0 {
            return Err(Error::InsufficientData(format!(
                "no origin reached separation t = {t}"
            )));
        }
        Ok(sum.value() / *count as f64)
    }
}

/// Space-and-origin averaged `E (h^{t}_i - h^{0}_i)^2` over a snapshot
/// slice at unit macro-time stride.
pub fn displacement_variance(snapshots: &[Vec<f64>], t: usize) -> Result<f64> {
    if snapshots.len() <= t {
        return Err(Error::InsufficientData(format!(
            "need snapshots spanning t = {t}, got {}",
            snapshots.len()
        )));
    }
    if t == 0 {
        return Ok(0.0);
    }
    let mut acc = KahanSum::new();
    let origins = snapshots.len() - t;
    for o in 0..origins {
        let (a, b) = (&snapshots[o], &snapshots[o + t]);
        let mut per = KahanSum::new();
        for (x, y) in b.iter().zip(a) {
            let d = x - y;
            per.add(d * d);
        }
        acc.add(per.value() / a.len() as f64);
    }
    Ok(acc.value() / origins as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sample_equilibrium;

    fn equilibrium_stream(l: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..count)
            .map(|s| sample_equilibrium(l, 1, seed + s as u64).unwrap())
            .collect()
    }

    #[test]
    fn equal_time_gradient_variance_is_two() {
        // independent equilibrium samples stand in for a perfectly mixing
        // chain; g11(0, 0) = E (h_{i+2} - h_i)^2 = 2 (L - 2) / L
        let l = 4096;
        let snaps = equilibrium_stream(l, 40, 100);
        let grid = EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, 1, 2);
        let acc = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, 30, 10).unwrap();
        let v = acc.estimate(0, 0).unwrap();
        assert!((v - 2.0).abs() < 0.05, "g11(0,0) = {v}");
        // disjoint equal-time increments are uncorrelated
        let v = acc.estimate(0, 2).unwrap();
        assert!(v.abs() < 0.05, "g11(0,2) = {v}");
    }

    #[test]
    fn counts_and_completeness_follow_the_plan() {
        let l = 64;
        let snaps = equilibrium_stream(l, 26, 7);
        let grid = EstimatorGrid::checkerboard(CorrelationKind::TimeTime, 3, 0);
        let mut acc =
            PairCorrelationAccumulator::new(CorrelationKind::TimeTime, grid, l, 22, 11).unwrap();
        assert_eq!(acc.snapshots_needed(), 26);
        for s in &snaps {
            acc.feed(s).unwrap();
        }
        assert!(acc.is_complete());
        assert_eq!(acc.origins_done(), 22);
        assert_eq!(acc.block_length(), 2);
    }

    #[test]
    fn insufficient_snapshots_name_the_range() {
        let snaps = equilibrium_stream(32, 5, 3);
        let grid = EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, 4, 0);
        let err = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, 10, 8).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
        assert!(err.to_string().contains("14 snapshots"));
    }

    #[test]
    fn stderr_needs_eight_blocks_and_is_nonnegative() {
        let snaps = equilibrium_stream(256, 40, 11);
        let grid = EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, 2, 2);
        let acc = accumulate(&snaps, CorrelationKind::SpaceSpace, grid.clone(), 30, 4).unwrap();
        assert!(matches!(
            acc.stderr(1, 0),
            Err(Error::TooFewBlocks { have: 4, need: 8 })
        ));
        let acc = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, 30, 10).unwrap();
        assert!(acc.stderr(1, 0).unwrap() >= 0.0);
        assert!(acc.stderr(2, -2).unwrap() >= 0.0);
    }

    #[test]
    fn merge_preserves_estimates_and_doubles_counts() {
        let snaps = equilibrium_stream(128, 30, 17);
        let grid = EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, 2, 0);
        let a = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, 28, 8).unwrap();
        let mut merged = a.clone();
        merged.merge(&a).unwrap();
        assert_eq!(merged.origins_done(), 56);
        let (x, y) = (a.estimate(1, 0).unwrap(), merged.estimate(1, 0).unwrap());
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn estimate_outside_grid_is_an_error() {
        let snaps = equilibrium_stream(64, 20, 23);
        let grid = EstimatorGrid::checkerboard(CorrelationKind::SpaceSpace, 2, 2);
        let acc = accumulate(&snaps, CorrelationKind::SpaceSpace, grid, 16, 8).unwrap();
        assert!(matches!(acc.estimate(3, 0), Err(Error::InsufficientData(_))));
        assert!(matches!(acc.estimate(1, 1), Err(Error::InsufficientData(_))));
        assert!(matches!(acc.estimate(1, 4), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn displacement_variance_basics() {
        let snaps = equilibrium_stream(512, 12, 29);
        assert_eq!(displacement_variance(&snaps, 0).unwrap(), 0.0);
        let v = displacement_variance(&snaps, 3).unwrap();
        assert!(v > 0.0);
        assert!(displacement_variance(&snaps, 12).is_err());

        let mut acc = DisplacementAccumulator::new(9, vec![3]).unwrap();
        for s in &snaps {
            acc.feed(s);
        }
        let w = acc.estimate(3).unwrap();
        assert!((v - w).abs() < 1e-12, "slice {v} vs stream {w}");
        assert!(acc.estimate(5).is_err());
    }

    #[test]
    fn grids_cover_the_requested_offsets() {
        let g = EstimatorGrid::checkerboard(CorrelationKind::SpaceTime, 3, 3);
        assert_eq!(g.offsets(CorrelationKind::SpaceTime), vec![-3, -1, 1, 3]);
        let g = EstimatorGrid::all_offsets(CorrelationKind::SpaceSpace, 3, 2);
        assert_eq!(
            g.offsets(CorrelationKind::SpaceSpace),
            vec![-2, -1, 0, 1, 2]
        );
    }
}
