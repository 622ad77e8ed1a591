use super::*;
use crate::mesh::{generate_acute_triangulation, generate_cartesian, subdivide_to_nested, NestedMeshPair};
use crate::ops::Reconstruction;
use crate::problem::kkt_residual;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn nested_setup(kind: Reconstruction, steps: usize) -> TransportSetup {
    let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
    let centers = pair.coarse().centers().to_vec();
    let rin: Vec<f64> = centers.iter().map(|p| 1.0 + 0.5 * (3.0 * p[0]).sin()).collect();
    let rf: Vec<f64> = centers.iter().map(|p| 1.0 + 0.5 * (3.0 * p[1]).cos()).collect();
    let m = pair.coarse().measures();
    let (a, b): (f64, f64) = (
        rin.iter().zip(m).map(|(x, w)| x * w).sum(),
        rf.iter().zip(m).map(|(x, w)| x * w).sum(),
    );
    let rf = rf.iter().map(|v| v * a / b).collect();
    TransportSetup::new(pair, steps, kind, CellField(rin), CellField(rf)).unwrap()
}

fn random_state(setup: &TransportSetup, rng: &mut ChaCha8Rng) -> SpaceTimeState {
    let mut s = SpaceTimeState::initial(setup, 0.1);
    let n = s.rho.len();
    for p in &mut s.phi {
        p.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    }
    for r in &mut s.rho[1..n - 1] {
        r.iter_mut().for_each(|v| *v = rng.random_range(0.5..2.0));
    }
    for r in &mut s.s {
        r.iter_mut().for_each(|v| *v = rng.random_range(0.1..1.0));
    }
    s
}

fn random_direction(setup: &TransportSetup, rng: &mut ChaCha8Rng) -> Direction {
    let l = Layout::new(setup);
    let mut f = |len: usize| CellField((0..len).map(|_| rng.random_range(-1.0..1.0)).collect());
    Direction {
        phi: (0..=l.steps).map(|_| f(l.nf)).collect(),
        rho: (0..l.steps).map(|_| f(l.nc)).collect(),
        s: (0..l.steps).map(|_| f(l.nc)).collect(),
    }
}

fn shifted(state: &SpaceTimeState, d: &Direction, h: f64) -> SpaceTimeState {
    let mut s = state.clone();
    for (p, q) in s.phi.iter_mut().zip(&d.phi) {
        p.iter_mut().zip(q.iter()).for_each(|(x, y)| *x += h * y);
    }
    let n = s.rho.len();
    for (p, q) in s.rho[1..n - 1].iter_mut().zip(&d.rho) {
        p.iter_mut().zip(q.iter()).for_each(|(x, y)| *x += h * y);
    }
    for (p, q) in s.s.iter_mut().zip(&d.s) {
        p.iter_mut().zip(q.iter()).for_each(|(x, y)| *x += h * y);
    }
    s
}

fn flatten(r: &KKTResidual) -> Vec<f64> {
    r.continuity.iter().chain(&r.hj).chain(&r.comp).flat_map(|f| f.iter().copied()).collect()
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
        let setup = nested_setup(kind, 2);
        for _ in 0..5 {
            let state = random_state(&setup, &mut rng);
            let d = random_direction(&setup, &mut rng);
            let jv = flatten(&kkt_jacobian_apply(&setup, &state, &d).unwrap());
            let norm = jv.iter().map(|x| x * x).sum::<f64>().sqrt();
            let best = [1e-4, 1e-5, 1e-6, 1e-7]
                .iter()
                .map(|&h| {
                    let p = flatten(&kkt_residual(&setup, &shifted(&state, &d, h), 0.3).unwrap());
                    let m = flatten(&kkt_residual(&setup, &shifted(&state, &d, -h), 0.3).unwrap());
                    let err: f64 = p
                        .iter()
                        .zip(&m)
                        .zip(&jv)
                        .map(|((a, b), j)| ((a - b) / (2.0 * h) - j).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    err / norm
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-6, "{kind:?}: {best}");
        }
    }
}

#[test]
fn fraction_to_boundary_ratio_test() {
    let setup = TransportSetup::new(
        NestedMeshPair::identical(generate_cartesian(2, 1).unwrap()),
        1,
        Reconstruction::Linear,
        CellField(vec![1.0, 1.0]),
        CellField(vec![1.0, 1.0]),
    )
    .unwrap();
    let state = SpaceTimeState::initial(&setup, 1.0);
    let params = SolverParams::default();
    let mut d = Direction {
        phi: vec![CellField::zeros(2); 2],
        rho: vec![CellField(vec![0.5, 0.0])],
        s: vec![CellField(vec![0.0, 3.0])],
    };
    assert_eq!(fraction_to_boundary(&state, &d, &params).unwrap(), 1.0);
    d.rho[0] = CellField(vec![-2.0, 0.0]);
    assert!((fraction_to_boundary(&state, &d, &params).unwrap() - 0.475).abs() < 1e-15);
    d.rho[0] = CellField(vec![-20.0, 0.0]);
    assert!(matches!(fraction_to_boundary(&state, &d, &params), Err(Error::StepTooSmall { .. })));
}

#[test]
fn exact_barrier_solution_is_a_newton_fixed_point() {
    let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
    let c = CellField::constant(pair.coarse().num_cells(), 1.0 / pair.coarse().area());
    for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
        let setup = TransportSetup::new(pair.clone(), 3, kind, c.clone(), c.clone()).unwrap();
        let mu = 1e-2;
        let mut state = SpaceTimeState::initial(&setup, mu);
        let tau = setup.tau();
        for (k, p) in state.phi.iter_mut().enumerate() {
            p.fill(-(k as f64) * tau * mu);
        }
        let d = newton_direction(&setup, &state, mu).unwrap();
        let size = d.phi.iter().chain(&d.rho).chain(&d.s).flat_map(|f| f.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(size <= 1e-12, "{size}");
    }
}

#[test]
fn newton_converges_quadratically_near_a_solution() {
    for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
        let setup = nested_setup(kind, 3);
        let mu = 0.1;
        let params = SolverParams { eps_mu: 1e-13, ..SolverParams::default() };
        let (_, log) = solve_perturbed(&setup, SpaceTimeState::initial(&setup, 1.0), mu, &params).unwrap();
        let res: Vec<f64> = log.iter().map(|r| r.residual).filter(|&r| r > 1e-11).collect();
        // in the final phase each residual is bounded by a multiple of the
        // square of the previous one
        let tail = &res[res.len().saturating_sub(3)..];
        assert!(tail.len() == 3, "{res:?}");
        let c = tail[1] / (tail[0] * tail[0]);
        assert!(tail[2] <= 10.0 * c * tail[1] * tail[1], "{kind:?} {res:?}");
        assert!(tail[2] / tail[1] < tail[1] / tail[0], "{kind:?} {res:?}");
    }
}

#[test]
fn self_transport_has_zero_distance() {
    let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
    let rho: Vec<f64> = pair.coarse().centers().iter().map(|p| 1.0 + p[0] * p[1]).collect();
    for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
        let setup = TransportSetup::new(pair.clone(), 2, kind, CellField(rho.clone()), CellField(rho.clone())).unwrap();
        let sol = solve(&setup, &SolverParams::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.w2 <= 1e-6, "{}", sol.w2);
        // the potential is constant in space on every slice
        for p in &sol.state.phi {
            let mean = p.iter().zip(pair.fine().measures()).map(|(a, m)| a * m).sum::<f64>();
            let dev = p.iter().zip(pair.fine().measures()).map(|(a, m)| (a - mean).powi(2) * m).sum::<f64>().sqrt();
            assert!(dev <= 1e-6, "{dev}");
        }
    }
}

#[test]
fn solve_is_deterministic_and_interior() {
    let setup = nested_setup(Reconstruction::Harmonic, 2);
    let a = solve(&setup, &SolverParams::default()).unwrap();
    let b = solve(&setup, &SolverParams::default()).unwrap();
    assert!(a.converged);
    assert_eq!(a.w2.to_bits(), b.w2.to_bits());
    assert_eq!(a.state, b.state);
    for o in a.trace.outer.iter().filter(|o| o.accepted) {
        assert!(o.min_rho > 0.0 && o.min_s > 0.0);
    }
    let mus: Vec<f64> = a.trace.outer.iter().filter(|o| o.accepted).map(|o| o.mu).collect();
    assert!(mus.windows(2).all(|w| w[1] < w[0]));
    assert!(a.mu * 2.0 / 3.0 <= 1e-6);
}

#[test]
fn cold_start_at_tiny_weight_fails() {
    let setup = nested_setup(Reconstruction::Linear, 3);
    let state = SpaceTimeState::initial(&setup, 1e-9);
    let params = SolverParams { n_max: 3, ..SolverParams::default() };
    let err = solve_perturbed(&setup, state, 1e-9, &params).unwrap_err();
    assert!(matches!(err, Error::InnerFailure { .. } | Error::StepTooSmall { .. }), "{err:?}");
}

#[test]
fn zero_interior_steps() {
    let setup = TransportSetup::new(
        NestedMeshPair::identical(generate_cartesian(2, 1).unwrap()),
        0,
        Reconstruction::Linear,
        CellField(vec![1.5, 0.5]),
        CellField(vec![0.5, 1.5]),
    )
    .unwrap();
    let sol = solve(&setup, &SolverParams::default()).unwrap();
    assert!(sol.converged);
    assert_eq!(sol.trace.outer.len(), 1);
    // rho_mid = (1, 1), continuity forces F = 1/2 on the single face
    assert!((sol.fluxes[0][0] - 0.5).abs() < 1e-12);
    assert!((sol.w2 - 0.5f64.sqrt() * 0.5).abs() < 1e-12, "{}", sol.w2);
}

#[test]
fn scaled_jacobian_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
        let setup = nested_setup(kind, 3);
        let state = random_state(&setup, &mut rng);
        let data = crate::problem::SliceData::new(&setup, &state.rho, &state.phi);
        let e = assemble(&setup, &state, &data, true);
        let l = Layout::new(&setup);
        let w = jacobian::row_weights(&setup);
        let mut m = std::collections::HashMap::new();
        for (p, v) in e.idx.iter().zip(&e.val) {
            if p.row != l.border() && p.col != l.border() {
                *m.entry((p.row, p.col)).or_insert(0.0) += w[p.row] * v;
            }
        }
        let scale = m.values().fold(0.0f64, |a, v| a.max(v.abs()));
        for (&(r, c), v) in &m {
            let t = m.get(&(c, r)).copied().unwrap_or(0.0);
            assert!((v - t).abs() <= 1e-12 * scale, "{kind:?} ({r},{c}) {v} vs {t}");
        }
    }
}

#[test]
fn symmetric_and_pivoting_solves_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
        let setup = nested_setup(kind, 3);
        let state = random_state(&setup, &mut rng);
        let data = crate::problem::SliceData::new(&setup, &state.rho, &state.phi);
        let e = assemble(&setup, &state, &data, true);
        let l = Layout::new(&setup);
        let mut rhs: Vec<f64> = (0..l.size()).map(|_| rng.random_range(-1.0..1.0)).collect();
        // consistent right-hand side: continuity rows carry no net mass
        let mf = setup.pair().fine().measures();
        let net: f64 = (1..=l.steps + 1).flat_map(|k| (0..l.nf).map(move |i| (k, i))).map(|(k, i)| mf[i] * rhs[l.phi(k, i)]).sum();
        for k in 1..=l.steps + 1 {
            for i in 0..l.nf {
                rhs[l.phi(k, i)] -= net / ((l.steps + 1) as f64 * setup.area());
            }
        }
        rhs[l.border()] = 0.0;
        let mut solver = jacobian::LinearSolver::new(&setup);
        let a = solver.solve(&e, &rhs).unwrap();
        let b = solver.solve_with_lu(&e, &rhs).unwrap();
        let mean = |x: &[f64]| (0..l.nf).map(|i| mf[i] * x[l.phi(1, i)]).sum::<f64>() / setup.area();
        let (ma, mb) = (mean(&a), mean(&b));
        let nphi = (l.steps + 1) * l.nf;
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..l.border() {
            let (u, v) = if i < nphi { (a[i] - ma, b[i] - mb) } else { (a[i], b[i]) };
            assert!((u - v).abs() <= 1e-8 * scale, "{kind:?} {i}: {u} vs {v}");
        }
    }
}
