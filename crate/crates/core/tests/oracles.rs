//! Library results against independent brute-force and quadrature references.

mod common;

use common::*;
use num_complex::Complex64;
use pulsetrain::basis::{build_basis, ProcessKind};
use pulsetrain::dynamics::{find_next_global_max, ControlSpace};
use pulsetrain::kinematics::{build_target, duration_above, optimal_pairing, TargetScope};
use pulsetrain::operators::{
    cos2_theta_matrix, cos_theta_matrix, full_partition_function, h0_matrix, observable, thermal_state,
    DensityMatrix, ZMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Tr[O ρ(t_k)]` on `t_k = (k + offset)·π/samples`, stepping with one dense
/// matrix exponential.
fn dense_scan(rho: &CM, h0: &CM, o: &CM, samples: usize, offset: f64) -> Vec<(f64, f64)> {
    let dt = std::f64::consts::PI / samples as f64;
    let step = (h0 * Complex64::new(0.0, -dt)).exp();
    let first = (h0 * Complex64::new(0.0, -dt * offset)).exp();
    let mut r = &first * rho * first.adjoint();
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        out.push(((k as f64 + offset) * dt, expect(&r, o)));
        r = &step * r * step.adjoint();
    }
    out
}

fn expect(rho: &CM, o: &CM) -> f64 {
    (rho * o).trace().re
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let q = gauss_legendre(20);
    let s: f64 = q.iter().map(|&(x, w)| w * x.powi(10)).sum();
    assert!((s - 2.0 / 11.0).abs() < 1e-14);
    assert!((q.iter().map(|p| p.1).sum::<f64>() - 2.0).abs() < 1e-14);
}

#[test]
fn pairing_matches_permutation_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        // integer-valued draws give exact ties now and then
        let ties = rng.gen_bool(0.3);
        let draw = |rng: &mut ChaCha8Rng, lo: i32| {
            if ties {
                rng.gen_range(lo..=4) as f64 / 4.0
            } else {
                rng.gen_range(lo as f64 / 4.0..1.0)
            }
        };
        let w: Vec<f64> = (0..n).map(|_| draw(&mut rng, 0)).collect();
        let chi: Vec<f64> = (0..n).map(|_| draw(&mut rng, -4)).collect();
        let got = optimal_pairing(&w, &chi).unwrap();
        assert!((got.value - brute_force_pairing(&w, &chi)).abs() < 1e-12);
        let mut seen = got.permutation.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn angular_elements_match_quadrature() {
    let j_top = 6;
    let basis = build_basis(j_top);
    let c1 = cos_theta_matrix::<f64>(&basis);
    let c2 = cos2_theta_matrix::<f64>(&basis);
    let tables: Vec<ThetaTable> = (0..=j_top).map(|m| ThetaTable::new(m, j_top, 40)).collect();
    let mut worst: f64 = 0.0;
    for (a, sa) in basis.states().iter().enumerate() {
        for (b, sb) in basis.states().iter().enumerate() {
            let (e1, e2) = if sa.m == sb.m {
                let t = &tables[sa.m.unsigned_abs() as usize];
                (t.element(sa.j, sb.j, |x| x), t.element(sa.j, sb.j, |x| x * x))
            } else {
                (0.0, 0.0)
            };
            worst = worst.max((c1.matrix()[(a, b)] - e1).norm());
            worst = worst.max((c2.matrix()[(a, b)] - e2).norm());
        }
    }
    assert!(worst < 1e-9, "largest deviation {worst:e}");
}

#[test]
fn partition_function_direct_sum() {
    // LiCl at 5 K
    let beta = 0.70652 / (0.6950348 * 5.0);
    let z: f64 = (0..400).map(|j| (2 * j + 1) as f64 * (-beta * (j * (j + 1)) as f64).exp()).sum();
    assert!((full_partition_function(beta) - z).abs() < 1e-12 * z);
    let basis = build_basis(8);
    let rho = thermal_state::<f64>(&basis, beta, ZMode::Full).unwrap();
    let i = basis.index_of(0, 0).unwrap();
    assert!((rho.matrix()[(i, i)].re - 1.0 / z).abs() < 1e-15);
}

#[test]
fn global_max_against_dense_scan() {
    let space = ControlSpace::<f64>::idealized(3, ProcessKind::Orientation).unwrap();
    let basis = build_basis(3);
    let rho = thermal_state::<f64>(&basis, 0.4, ZMode::Truncated).unwrap();
    let kicked = rho.conjugated(&space.kick_unitary(1.7));
    let h0 = h0_matrix::<f64>(&basis);
    let o = space.observable.matrix();
    let p = find_next_global_max(&kicked, o, &h0, 0.0).unwrap();
    let (best_t, best_v) = dense_scan(kicked.matrix(), h0.matrix(), o, 200_000, 0.0)
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
    assert!(p.value >= best_v - 1e-12);
    assert!(p.value - best_v < 1e-8);
    assert!((p.time - best_t).abs() < 1e-4);
}

#[test]
fn duration_against_dense_scan() {
    for kind in [ProcessKind::Orientation, ProcessKind::Alignment] {
        let basis = build_basis(4);
        let rho0 = thermal_state::<f64>(&basis, 0.3, ZMode::Full).unwrap();
        let obs = observable::<f64>(&basis, kind);
        let target = build_target(&rho0, &obs, &basis, TargetScope::Linear(kind)).unwrap();
        let h0 = h0_matrix::<f64>(&basis);
        let threshold = 0.5;
        let d = duration_above(&target.rho, &obs, &h0, threshold).unwrap();
        let samples = 40_000;
        let above = dense_scan(target.rho.matrix(), h0.matrix(), obs.matrix(), samples, 0.5)
            .iter()
            .filter(|p| p.1 >= threshold)
            .count();
        let frac = above as f64 / samples as f64;
        // each crossing can shift the count by one sample
        assert!((d.total - frac).abs() < 1e-3, "{kind}: {} vs {frac}", d.total);
        assert!(d.longest <= d.total + 1e-12);
    }
}

#[test]
fn block_bound_matches_blockwise_pairing() {
    let basis = build_basis(4);
    let rho0 = thermal_state::<f64>(&basis, 0.25, ZMode::Full).unwrap();
    for kind in [ProcessKind::Orientation, ProcessKind::Alignment] {
        let obs = observable::<f64>(&basis, kind);
        let target = build_target(&rho0, &obs, &basis, TargetScope::Linear(kind)).unwrap();
        let blocks = pulsetrain::block_decomposition(&basis, kind);
        let mut total = 0.0;
        for b in &blocks.blocks {
            let w: Vec<f64> = b.members.iter().map(|&i| rho0.matrix()[(i, i)].re).collect();
            let sub = obs.restrict(&b.members);
            let chi: Vec<f64> = sub.symmetric_eigen().eigenvalues.iter().copied().collect();
            total += brute_force_pairing(&w, &chi);
        }
        assert!((target.expectation - total).abs() < 1e-12);
        let dens = DensityMatrix::new(target.rho.matrix().clone(), rho0.trace()).unwrap();
        assert!((dens.expectation(obs.matrix()) - total).abs() < 1e-12);
    }
}
