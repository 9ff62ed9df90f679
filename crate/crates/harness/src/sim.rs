//! The two stochastic dynamics on the torus `(Z/LZ)^d`.
//!
//! Both resample a site from its heat-bath conditional: an independent
//! Gaussian with mean `(1/2d) * sum of the 2d neighbor heights` and variance
//! `1/(2d)`.
//!
//! * Checkerboard half-sweeps ([`half_sweep`]) update every site of one
//!   parity class at once. Sites with `|i| + round` even move, where `|i|`
//!   is the coordinate sum and `round` the completed-sweep counter; the
//!   resting class is never written, and because each variate is a pure
//!   function of `(seed, round, site)` the sweep can be split across any
//!   number of workers without changing the output.
//! * Random-sequential updates ([`sequential_update`]) pick one uniformly
//!   random site per micro-step from a single sequential stream; `L^d`
//!   micro-steps make one unit of macroscopic time.
//!
//! [`run`] wires a fresh equilibrium sample, optional warmup, and snapshot
//! emission together, fully reproducible from `(seed, config)`.

use crate::error::{Error, Result};
use crate::rng::{derive_seed, CounterRng, StreamRng, TAG_INIT, TAG_SEQ, TAG_SWEEP};
use crate::spectral::sample_equilibrium;
use rayon::prelude::*;

/// Which dynamics drives the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dynamics {
    SublatticeParallel,
    RandomSequential,
}

/// Parameters of a simulation run.
///
/// `warmup_rounds`, `measure_rounds` and `snapshot_stride` count half-sweeps
/// for the checkerboard dynamics and units of `L^d` micro-updates for the
/// random-sequential dynamics.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub length: usize,
    pub dim: usize,
    pub dynamics: Dynamics,
    pub seed: u64,
    pub warmup_rounds: u64,
    pub measure_rounds: u64,
    pub snapshot_stride: u64,
    pub replicas: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.length == 0 || self.length % 2 != 0 {
            return Err(Error::Domain(format!(
                "lattice extent must be a positive even integer, got {}",
                self.length
            )));
        }
        if self.dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        if self.length.checked_pow(self.dim as u32).is_none() {
            return Err(Error::Domain(format!(
                "lattice {}^{} overflows",
                self.length, self.dim
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Domain("snapshot stride must be >= 1".into()));
        }
        if self.replicas == 0 {
            return Err(Error::Domain("at least one replica".into()));
        }
        Ok(())
    }
}

/// Torus geometry: row-major strides and wrapped neighbor lookups.
#[derive(Clone, Debug)]
pub struct Torus {
    pub length: usize,
    pub dim: usize,
    strides: Vec<usize>,
    sites: usize,
}

impl Torus {
    pub fn new(length: usize, dim: usize) -> Result<Self> {
        if length < 2 || dim == 0 {
            return Err(Error::Domain(format!(
                "torus needs extent >= 2 and dimension >= 1, got {length}^{dim}"
            )));
        }
        let sites = length
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::Domain(format!("lattice {length}^{dim} overflows")))?;
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * length;
        }
        Ok(Self {
            length,
            dim,
            strides,
            sites,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Coordinate-sum parity of a flattened index.
    #[inline]
    pub fn site_parity(&self, idx: usize) -> usize {
        let mut rest = idx;
        let mut parity = 0;
        for &stride in &self.strides {
            parity += rest / stride;
            rest %= stride;
        }
        parity % 2
    }

    /// Sum of the `2d` neighbor heights of `idx`.
    #[inline]
    pub fn neighbor_sum(&self, heights: &[f64], idx: usize) -> f64 {
        let l = self.length;
        let mut acc = 0.0;
        let mut rest = idx;
        for &stride in &self.strides {
            let c = rest / stride;
            rest %= stride;
            let up = if c + 1 == l { idx - (l - 1) * stride } else { idx + stride };
            let down = if c == 0 { idx + (l - 1) * stride } else { idx - stride };
            acc += heights[up] + heights[down];
        }
        acc
    }
}

/// Interface heights plus the update bookkeeping.
#[derive(Clone, Debug)]
pub struct InterfaceState {
    heights: Vec<f64>,
    torus: Torus,
    /// Completed checkerboard half-sweeps.
    pub round: u64,
    /// Completed random-sequential micro-updates.
    pub micro_steps: u64,
    parity_sites: [Vec<u32>; 2],
}

impl InterfaceState {
    /// State drawn exactly from the equilibrium measure.
    pub fn from_equilibrium(length: usize, dim: usize, seed: u64) -> Result<Self> {
        let heights = sample_equilibrium(length, dim, seed)?;
        Self::from_heights(heights, length, dim)
    }

    /// Deterministic initial condition (excluded from stationarity checks).
    pub fn flat(length: usize, dim: usize, value: f64) -> Result<Self> {
        let torus = Torus::new(length, dim)?;
        Self::from_heights(vec![value; torus.sites()], length, dim)
    }

    pub fn from_heights(heights: Vec<f64>, length: usize, dim: usize) -> Result<Self> {
        if length % 2 != 0 {
            return Err(Error::Domain(format!(
                "lattice extent must be even for the checkerboard parity split, got {length}"
            )));
        }
        let torus = Torus::new(length, dim)?;
        if heights.len() != torus.sites() {
            return Err(Error::Domain(format!(
                "height array has {} entries, lattice has {}",
                heights.len(),
                torus.sites()
            )));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Domain("heights must be finite".into()));
        }
        if torus.sites() > u32::MAX as usize {
            return Err(Error::Domain("lattice too large for 32-bit site ids".into()));
        }
        let mut parity_sites = [Vec::new(), Vec::new()];
        for idx in 0..torus.sites() {
            parity_sites[torus.site_parity(idx)].push(idx as u32);
        }
        Ok(Self {
            heights,
            torus,
            round: 0,
            micro_steps: 0,
            parity_sites,
        })
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    /// Parity class `|i| mod 2` that the next half-sweep will write.
    pub fn next_parity(&self) -> usize {
        (self.round % 2) as usize
    }
}

/// Above this many updated sites a half-sweep fans out over rayon workers.
const PARALLEL_SWEEP_THRESHOLD: usize = 1 << 15;

/// One checkerboard half-sweep: resample every site with `|i| + round`
/// even from its heat-bath conditional, then advance the round counter.
///
/// The variate at a site depends only on `(seed, round, site)`, so the
/// result is identical no matter how many workers execute the sweep.
pub fn half_sweep(state: &mut InterfaceState, rng: &CounterRng) {
    let parity = state.next_parity();
    let d = state.torus.dim as f64;
    let inv2d = 1.0 / (2.0 * d);
    let sigma = inv2d.sqrt();
    let round = state.round;
    let torus = state.torus.clone();
    let sites = &state.parity_sites[parity];
    if sites.len() >= PARALLEL_SWEEP_THRESHOLD {
        let heights = &state.heights;
        let updates: Vec<f64> = sites
            .par_iter()
            .map(|&s| {
                let idx = s as usize;
                inv2d * torus.neighbor_sum(heights, idx)
                    + sigma * rng.site_normal(round, s as u64)
            })
            .collect();
        for (&s, v) in sites.iter().zip(updates) {
            state.heights[s as usize] = v;
        }
    } else {
        // resting-parity neighbors are never written, so in-place is safe
        for &s in sites {
            let idx = s as usize;
            let mean = inv2d * torus.neighbor_sum(&state.heights, idx);
            state.heights[idx] = mean + sigma * rng.site_normal(round, s as u64);
        }
    }
    state.round += 1;
}

/// `n_micro` random-sequential heat-bath updates from a sequential stream.
pub fn sequential_update(state: &mut InterfaceState, rng: &mut StreamRng, n_micro: u64) {
    let d = state.torus.dim as f64;
    let inv2d = 1.0 / (2.0 * d);
    let sigma = inv2d.sqrt();
    let n = state.torus.sites();
    for _ in 0..n_micro {
        let idx = rng.index(n);
        let mean = inv2d * state.torus.neighbor_sum(&state.heights, idx);
        state.heights[idx] = mean + sigma * rng.normal();
        state.micro_steps += 1;
    }
}

/// Run one replica: equilibrium start, warmup, then snapshots every
/// `snapshot_stride` rounds (the post-warmup state is snapshot zero).
///
/// The observer sees `measure_rounds / snapshot_stride + 1` snapshots.
pub fn run<F: FnMut(&InterfaceState)>(config: &SimConfig, mut observer: F) -> Result<()> {
    config.validate()?;
    let mut state = InterfaceState::from_equilibrium(
        config.length,
        config.dim,
        derive_seed(config.seed, TAG_INIT),
    )?;
    match config.dynamics {
        Dynamics::SublatticeParallel => {
            let rng = CounterRng::new(derive_seed(config.seed, TAG_SWEEP));
            for _ in 0..config.warmup_rounds {
                half_sweep(&mut state, &rng);
            }
            observer(&state);
            let mut done = 0;
            while done < config.measure_rounds {
                let burst = config.snapshot_stride.min(config.measure_rounds - done);
                for _ in 0..burst {
                    half_sweep(&mut state, &rng);
                }
                done += burst;
                if burst == config.snapshot_stride {
                    observer(&state);
                }
            }
        }
        Dynamics::RandomSequential => {
            let mut rng = StreamRng::seed_from_u64(derive_seed(config.seed, TAG_SEQ));
            let unit = state.torus.sites() as u64;
            for _ in 0..config.warmup_rounds {
                sequential_update(&mut state, &mut rng, unit);
            }
            observer(&state);
            let mut done = 0;
            while done < config.measure_rounds {
                let burst = config.snapshot_stride.min(config.measure_rounds - done);
                sequential_update(&mut state, &mut rng, burst * unit);
                done += burst;
                if burst == config.snapshot_stride {
                    observer(&state);
                }
            }
        }
    }
    Ok(())
}

/// Collect the emitted snapshots as height vectors.
pub fn collect_snapshots(config: &SimConfig) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    run(config, |state| out.push(state.heights().to_vec()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_input_keeps_the_mean_and_rests_the_other_parity() {
        let mut state = InterfaceState::flat(64, 1, 5.0).unwrap();
        let rng = CounterRng::new(9);
        half_sweep(&mut state, &rng);
        // round 0 sweeps even |i|; odd sites are bit-identical
        for idx in 0..64 {
            if idx % 2 == 1 {
                assert_eq!(state.heights()[idx], 5.0);
            } else {
                assert_ne!(state.heights()[idx], 5.0);
            }
        }
        assert_eq!(state.round, 1);
        assert_eq!(state.next_parity(), 1);
    }

    #[test]
    fn flat_input_conditional_moments_d1_and_d2() {
        // mean 5, variance 1/(2d), estimated over ~5e5 updated sites
        for (dim, l, var_expect) in [(1usize, 1usize << 19, 0.5), (2, 1 << 9, 0.25)] {
            let mut state = InterfaceState::flat(l, dim, 5.0).unwrap();
            let rng = CounterRng::new(4242);
            half_sweep(&mut state, &rng);
            let torus = state.torus().clone();
            let mut n = 0usize;
            let (mut s1, mut s2) = (0.0, 0.0);
            for idx in 0..torus.sites() {
                if torus.site_parity(idx) == 0 {
                    let z = state.heights()[idx] - 5.0;
                    s1 += z;
                    s2 += z * z;
                    n += 1;
                }
            }
            let mean = s1 / n as f64;
            let var = s2 / n as f64 - mean * mean;
            let sigma_mean = (var_expect / n as f64).sqrt();
            assert!(mean.abs() < 4.0 * sigma_mean, "d={dim} mean={mean}");
            let sigma_var = var_expect * (2.0 / n as f64).sqrt();
            assert!((var - var_expect).abs() < 4.0 * sigma_var, "d={dim} var={var}");
        }
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let build = || {
            let mut s = InterfaceState::from_equilibrium(1 << 16, 1, 77).unwrap();
            let rng = CounterRng::new(123);
            for _ in 0..4 {
                half_sweep(&mut s, &rng);
            }
            s.heights().to_vec()
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(build);
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(build);
        assert_eq!(single, multi);
    }

    #[test]
    fn sequential_update_touches_one_site_per_micro_step() {
        let mut state = InterfaceState::from_equilibrium(128, 1, 3).unwrap();
        let mut rng = StreamRng::seed_from_u64(8);
        let before = state.heights().to_vec();
        sequential_update(&mut state, &mut rng, 0);
        assert_eq!(state.heights(), &before[..]);
        sequential_update(&mut state, &mut rng, 1);
        let diff = state
            .heights()
            .iter()
            .zip(&before)
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diff, 1);
        assert_eq!(state.micro_steps, 1);
    }

    #[test]
    fn run_is_reproducible_and_counts_snapshots() {
        let config = SimConfig {
            length: 64,
            dim: 1,
            dynamics: Dynamics::SublatticeParallel,
            seed: 5,
            warmup_rounds: 2,
            measure_rounds: 10,
            snapshot_stride: 2,
            replicas: 1,
        };
        let a = collect_snapshots(&config).unwrap();
        let b = collect_snapshots(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);

        let seq = SimConfig {
            dynamics: Dynamics::RandomSequential,
            ..config.clone()
        };
        let c = collect_snapshots(&seq).unwrap();
        assert_eq!(c.len(), 6);
        assert_ne!(a[5], c[5]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = SimConfig {
            length: 63,
            dim: 1,
            dynamics: Dynamics::SublatticeParallel,
            seed: 0,
            warmup_rounds: 0,
            measure_rounds: 1,
            snapshot_stride: 1,
            replicas: 1,
        };
        assert!(config.validate().is_err());
        config.length = 64;
        config.snapshot_stride = 0;
        assert!(config.validate().is_err());
        config.snapshot_stride = 1;
        assert!(config.validate().is_ok());
        assert!(InterfaceState::flat(9, 1, 0.0).is_err());
    }

    #[test]
    fn two_dimensional_neighbors_wrap() {
        let torus = Torus::new(4, 2).unwrap();
        let mut h = vec![0.0; 16];
        for (i, v) in h.iter_mut().enumerate() {
            *v = i as f64;
        }
        // site (0,0): neighbors (1,0)=4, (3,0)=12, (0,1)=1, (0,3)=3
        assert_eq!(torus.neighbor_sum(&h, 0), 20.0);
        // site (2,3) = idx 11: neighbors (1,3)=7, (3,3)=15, (2,0)=8, (2,2)=10
        assert_eq!(torus.neighbor_sum(&h, 11), 40.0);
    }
}
