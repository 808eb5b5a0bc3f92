//! Band sweep along the high-symmetry path: the rayon-backed `sweep_points`
//! against a plain sequential loop over the same k samples. With
//! `--no-default-features` both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dirac_fem::bands::{bands_at_k, sweep_points};
use dirac_fem::lattice::{kpath_mgkm, Vec2};
use dirac_fem::mesh::{build_mesh, CellGeometry};

fn sweeps(c: &mut Criterion) {
    let mesh = build_mesh(&CellGeometry::default(), 0, 2).unwrap();
    let ks: Vec<Vec2> = kpath_mgkm(4).unwrap().samples().iter().map(|s| s.k.k).collect();
    let mut grp = c.benchmark_group("path_sweep");
    grp.sample_size(10);
    grp.bench_function(if dirac_fem::par::is_parallel() { "rayon" } else { "fallback" }, |b| {
        b.iter(|| sweep_points(&mesh, black_box(100.0), &ks, 3).unwrap())
    });
    grp.bench_function("sequential", |b| {
        b.iter(|| {
            ks.iter()
                .map(|&k| bands_at_k(&mesh, black_box(100.0), k, 3, false).unwrap().0)
                .collect::<Vec<_>>()
        })
    });
    grp.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
