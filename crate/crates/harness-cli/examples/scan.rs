use harness::correlations::*;
use harness::estimators::*;
use harness::sim::*;
use rayon::prelude::*;

fn max_z(seed: u64, blocks: usize) -> (f64, f64, f64) {
    let l = 1usize << 16;
    let t_max = 8u64;
    let t1 = 200u64;
    let config = SimConfig {
        length: l, dim: 1, dynamics: Dynamics::SublatticeParallel, seed,
        warmup_rounds: 0, measure_rounds: 2 * (t1 + t_max + 1), snapshot_stride: 2, replicas: 1,
    };
    let snaps = collect_snapshots(&config).unwrap();
    let make = |kind: CorrelationKind, j_max: i64| {
        accumulate(&snaps, kind, EstimatorGrid::checkerboard(kind, t_max, j_max), t1, blocks).unwrap()
    };
    let g11 = make(CorrelationKind::SpaceSpace, 0);
    let g22 = make(CorrelationKind::TimeTime, 0);
    let g12 = make(CorrelationKind::SpaceTime, 1);
    let z = |acc: &PairCorrelationAccumulator, t: u64, j: i64, exact: f64| {
        (acc.estimate(t, j).unwrap() - exact).abs() / acc.stderr(t, j).unwrap()
    };
    let mut z11 = 0.0f64; let mut z22 = 0.0f64; let mut z12 = 0.0f64;
    for t in 1..=t_max {
        z11 = z11.max(z(&g11, t, 0, g11_exact(t, 0).unwrap()));
        z22 = z22.max(z(&g22, t, 0, g22_exact(t, 0).unwrap()));
        z12 = z12.max(z(&g12, t, 1, g12_exact(t, 1).unwrap()));
    }
    (z11, z22, z12)
}

fn main() {
    for blocks in [8usize, 10] {
        let rows: Vec<(u64, (f64, f64, f64))> = (0..10u64)
            .into_par_iter()
            .map(|s| (s, max_z(27_182_818 + s * 1000, blocks)))
            .collect();
        for (s, (a, b, c)) in rows {
            println!("blocks={blocks} seed+{}k: z11={a:.2} z22={b:.2} z12={c:.2}", s);
        }
    }
}
