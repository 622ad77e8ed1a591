//! The discrete transport problem: action, constraints, optimality residuals,
//! distance and dual objective.
//!
//! Time is staggered with `tau = 1/(N+1)`: densities live on slices
//! `0..=N+1` of the coarse mesh (the two end slices pinned to the boundary
//! data), potentials and fluxes on slices `1..=N+1` of the fine mesh, and the
//! barrier slack on the interior density slices `1..=N`. Slice vectors are
//! stored zero-based, so `phi[k - 1]` holds slice `k`.

use crate::error::{Error, Result};
use crate::mesh::NestedMeshPair;
use crate::ops::{
    divergence_into, gradient_into, inject_adjoint_into, reconstruct_diff_adjoint_into,
    reconstruct_into, CellField, FluxField, Reconstruction,
};

/// Relative tolerance on the equality of the two boundary masses.
pub const MASS_TOL: f64 = 1e-12;

/// Boundary densities, mesh pair, number of interior time steps and reconstruction.
#[derive(Clone, Debug)]
pub struct TransportSetup {
    pair: NestedMeshPair,
    steps: usize,
    kind: Reconstruction,
    rho_in: CellField,
    rho_f: CellField,
}

fn mass(measures: &[f64], a: &[f64]) -> f64 {
    a.iter().zip(measures).map(|(x, m)| x * m).sum()
}

impl TransportSetup {
    /// `steps` is the number `N` of interior density slices.
    pub fn new(
        pair: NestedMeshPair,
        steps: usize,
        kind: Reconstruction,
        rho_in: CellField,
        rho_f: CellField,
    ) -> Result<Self> {
        let nc = pair.coarse().num_cells();
        for r in [&rho_in, &rho_f] {
            if r.len() != nc {
                return Err(Error::MeshMismatch { expected: nc, got: r.len() });
            }
            if let Some(cell) = r.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::NegativeDensity { cell, value: r[cell] });
            }
        }
        let m = pair.coarse().measures();
        let (a, b) = (mass(m, &rho_in), mass(m, &rho_f));
        if !(a > 0.0) || (a - b).abs() > MASS_TOL * a.max(b) {
            return Err(Error::MassMismatch(a, b));
        }
        Ok(Self { pair, steps, kind, rho_in, rho_f })
    }

    pub fn pair(&self) -> &NestedMeshPair {
        &self.pair
    }

    /// Number `N` of interior time slices.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        1.0 / (self.steps as f64 + 1.0)
    }

    pub fn kind(&self) -> Reconstruction {
        self.kind
    }

    pub fn rho_in(&self) -> &CellField {
        &self.rho_in
    }

    pub fn rho_f(&self) -> &CellField {
        &self.rho_f
    }

    /// Common total mass of the boundary densities.
    pub fn mass(&self) -> f64 {
        mass(self.pair.coarse().measures(), &self.rho_in)
    }

    /// `|Omega|`.
    pub fn area(&self) -> f64 {
        self.pair.coarse().area()
    }

    /// Same problem with another reconstruction.
    pub fn with_kind(&self, kind: Reconstruction) -> Self {
        Self { kind, ..self.clone() }
    }

    fn check_rho(&self, rho: &[CellField]) -> Result<()> {
        check_slices(rho, self.steps + 2, self.pair.coarse().num_cells())
    }

    fn check_phi(&self, phi: &[CellField]) -> Result<()> {
        check_slices(phi, self.steps + 1, self.pair.fine().num_cells())
    }
}

fn check_slices<T: std::ops::Deref<Target = [f64]>>(v: &[T], slices: usize, len: usize) -> Result<()> {
    if v.len() != slices {
        return Err(Error::MeshMismatch { expected: slices, got: v.len() });
    }
    for s in v {
        if s.len() != len {
            return Err(Error::MeshMismatch { expected: len, got: s.len() });
        }
    }
    Ok(())
}

/// The unknowns `(phi, rho, s)` of the barrier problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeState {
    /// `N + 1` fine slices.
    pub phi: Vec<CellField>,
    /// `N + 2` coarse slices, the first and last equal to the boundary data.
    pub rho: Vec<CellField>,
    /// `N` coarse slices of barrier slack.
    pub s: Vec<CellField>,
}

impl SpaceTimeState {
    /// Zero potential, uniform density `mass / |Omega|` and slack `mu / rho`.
    pub fn initial(setup: &TransportSetup, mu: f64) -> Self {
        let n = setup.steps;
        let nc = setup.pair.coarse().num_cells();
        let nf = setup.pair.fine().num_cells();
        let c = setup.mass() / setup.area();
        let mut rho = vec![setup.rho_in.clone()];
        rho.extend((0..n).map(|_| CellField::constant(nc, c)));
        rho.push(setup.rho_f.clone());
        Self {
            phi: vec![CellField::zeros(nf); n + 1],
            rho,
            s: vec![CellField::constant(nc, mu / c); n],
        }
    }

    /// Checks slice counts and lengths against the setup.
    pub fn check(&self, setup: &TransportSetup) -> Result<()> {
        setup.check_phi(&self.phi)?;
        setup.check_rho(&self.rho)?;
        check_slices(&self.s, setup.steps, setup.pair.coarse().num_cells())
    }

    /// Smallest interior density value (`+inf` without interior slices).
    pub fn min_interior_rho(&self) -> f64 {
        let n = self.rho.len();
        self.rho[1..n - 1].iter().flat_map(|r| r.iter().copied()).fold(f64::INFINITY, f64::min)
    }

    pub fn min_slack(&self) -> f64 {
        self.s.iter().flat_map(|r| r.iter().copied()).fold(f64::INFINITY, f64::min)
    }
}

/// Residual of the barrier optimality system.
#[derive(Clone, Debug)]
pub struct KKTResidual {
    /// Continuity equation, `N + 1` fine slices.
    pub continuity: Vec<CellField>,
    /// Discrete Hamilton-Jacobi equation with slack, `N` coarse slices.
    pub hj: Vec<CellField>,
    /// Complementarity `rho * s - mu`, `N` coarse slices.
    pub comp: Vec<CellField>,
    /// Per-block norms `sqrt(tau sum_k |r_k|^2)` with mesh-weighted norms.
    pub block_norms: [f64; 3],
    /// Largest block norm.
    pub norm: f64,
}

/// Fine midpoint density `I((rho^k + rho^{k-1}) / 2)` of slice `k >= 1`.
pub(crate) fn midpoint_into(pair: &NestedMeshPair, rho: &[CellField], k: usize, out: &mut [f64]) {
    let (a, b) = (&rho[k], &rho[k - 1]);
    for (o, &c) in out.iter_mut().zip(pair.containment()) {
        *o = 0.5 * (a[c] + b[c]);
    }
}

/// Per-slice quantities shared by residuals, distance and Jacobian.
pub(crate) struct SliceData {
    /// Fine midpoint densities, slice `k` at index `k - 1`.
    pub mid: Vec<Vec<f64>>,
    /// Gradients of the potentials.
    pub grad: Vec<Vec<f64>>,
    /// Reconstructed midpoint densities on the diamonds.
    pub recon: Vec<Vec<f64>>,
}

impl SliceData {
    pub(crate) fn new(setup: &TransportSetup, rho: &[CellField], phi: &[CellField]) -> Self {
        let fine = setup.pair.fine();
        let (nf, ne) = (fine.num_cells(), fine.num_internal_faces());
        let slices = setup.steps + 1;
        let mut mid = vec![vec![0.0; nf]; slices];
        let mut grad = vec![vec![0.0; ne]; slices];
        let mut recon = vec![vec![0.0; ne]; slices];
        for k in 1..=slices {
            midpoint_into(&setup.pair, rho, k, &mut mid[k - 1]);
            gradient_into(fine, &phi[k - 1], &mut grad[k - 1]);
            reconstruct_into(fine, &mid[k - 1], setup.kind, &mut recon[k - 1]);
        }
        Self { mid, grad, recon }
    }
}

fn weighted_sq(weights: &[f64], v: &[f64]) -> f64 {
    v.iter().zip(weights).map(|(x, w)| x * x * w).sum()
}

fn require_positive_mid(setup: &TransportSetup, mid: &[f64]) -> Result<()> {
    if setup.kind == Reconstruction::Harmonic {
        if let Some(f) = mid.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::ZeroDensity { cell: setup.pair.containment()[f] });
        }
    }
    Ok(())
}

/// `I^* (dR[a])^* (g^2)` on the coarse mesh.
fn hj_quadratic(setup: &TransportSetup, mid: &[f64], grad: &[f64], out: &mut [f64]) {
    let fine = setup.pair.fine();
    let sq: Vec<f64> = grad.iter().map(|g| g * g).collect();
    let mut tmp = vec![0.0; fine.num_cells()];
    reconstruct_diff_adjoint_into(fine, mid, &sq, setup.kind, &mut tmp);
    inject_adjoint_into(&setup.pair, &tmp, out);
}

/// Kinetic density `|q|^2 / 2p` with the lower semicontinuous extension at `p = 0`.
fn kinetic(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        0.5 * q * q / p
    } else if q == 0.0 && p == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Discrete kinetic action `sum_k tau sum_sigma B(R(I rho_mid^k), F^k) m d`.
///
/// Returns `+inf` for negative densities or for flux through a face whose
/// reconstructed density vanishes.
pub fn action(setup: &TransportSetup, rho: &[CellField], flux: &[FluxField]) -> Result<f64> {
    setup.check_rho(rho)?;
    check_slices(flux, setup.steps + 1, setup.pair.fine().num_internal_faces())?;
    if rho.iter().any(|r| r.iter().any(|&v| v < 0.0)) {
        return Ok(f64::INFINITY);
    }
    let fine = setup.pair.fine();
    let mut mid = vec![0.0; fine.num_cells()];
    let mut rec = vec![0.0; fine.num_internal_faces()];
    let mut total = 0.0;
    for k in 1..=setup.steps + 1 {
        midpoint_into(&setup.pair, rho, k, &mut mid);
        reconstruct_into(fine, &mid, setup.kind, &mut rec);
        for ((f, &p), &q) in fine.internal_faces().iter().zip(&rec).zip(flux[k - 1].iter()) {
            total += kinetic(p, q) * f.measure * f.dist;
        }
    }
    Ok(setup.tau() * total)
}

/// `I((rho^k - rho^{k-1}) / tau) + div F^k` for `k = 1..=N+1`.
pub fn continuity_residual(setup: &TransportSetup, rho: &[CellField], flux: &[FluxField]) -> Result<Vec<CellField>> {
    setup.check_rho(rho)?;
    check_slices(flux, setup.steps + 1, setup.pair.fine().num_internal_faces())?;
    let fine = setup.pair.fine();
    let tau = setup.tau();
    let mut out = Vec::with_capacity(setup.steps + 1);
    for k in 1..=setup.steps + 1 {
        let mut r = CellField::zeros(fine.num_cells());
        divergence_into(fine, &flux[k - 1], &mut r);
        for (v, &c) in r.iter_mut().zip(setup.pair.containment()) {
            *v += (rho[k][c] - rho[k - 1][c]) / tau;
        }
        out.push(r);
    }
    Ok(out)
}

/// Optimal fluxes `F^k = R(I rho_mid^k) * grad phi^k`.
pub fn flux_from_potential(setup: &TransportSetup, rho: &[CellField], phi: &[CellField]) -> Result<Vec<FluxField>> {
    setup.check_rho(rho)?;
    setup.check_phi(phi)?;
    let data = SliceData::new(setup, rho, phi);
    Ok(data
        .recon
        .iter()
        .zip(&data.grad)
        .map(|(r, g)| FluxField(r.iter().zip(g).map(|(a, b)| a * b).collect()))
        .collect())
}

/// Residual of the barrier optimality system at barrier weight `mu`.
///
/// With `mu = 0` and `s = -lambda` this is the residual of the unperturbed
/// system, complementarity included.
pub fn kkt_residual(setup: &TransportSetup, state: &SpaceTimeState, mu: f64) -> Result<KKTResidual> {
    state.check(setup)?;
    let data = SliceData::new(setup, &state.rho, &state.phi);
    Ok(kkt_residual_from(setup, state, mu, &data)?.0)
}

/// Residual plus the coarse quadratic terms `I^* dR^* g^2` per slice (reused by
/// the Jacobian).
pub(crate) fn kkt_residual_from(
    setup: &TransportSetup,
    state: &SpaceTimeState,
    mu: f64,
    data: &SliceData,
) -> Result<(KKTResidual, Vec<Vec<f64>>)> {
    let n = setup.steps;
    let pair = &setup.pair;
    let (coarse, fine) = (pair.coarse(), pair.fine());
    let nc = coarse.num_cells();
    let tau = setup.tau();

    let mut continuity = Vec::with_capacity(n + 1);
    let mut flux = vec![0.0; fine.num_internal_faces()];
    for k in 1..=n + 1 {
        for ((f, r), g) in flux.iter_mut().zip(&data.recon[k - 1]).zip(&data.grad[k - 1]) {
            *f = r * g;
        }
        let mut c = CellField::zeros(fine.num_cells());
        divergence_into(fine, &flux, &mut c);
        for (v, &p) in c.iter_mut().zip(pair.containment()) {
            *v += (state.rho[k][p] - state.rho[k - 1][p]) / tau;
        }
        continuity.push(c);
    }

    // quadratic HJ terms are only needed when interior slices exist
    let mut quad = Vec::new();
    if n > 0 {
        for k in 1..=n + 1 {
            require_positive_mid(setup, &data.mid[k - 1])?;
            let mut q = vec![0.0; nc];
            hj_quadratic(setup, &data.mid[k - 1], &data.grad[k - 1], &mut q);
            quad.push(q);
        }
    }

    let mut hj = Vec::with_capacity(n);
    let mut comp = Vec::with_capacity(n);
    let mut dphi = vec![0.0; fine.num_cells()];
    for k in 1..=n {
        for ((d, a), b) in dphi.iter_mut().zip(state.phi[k].iter()).zip(state.phi[k - 1].iter()) {
            *d = (a - b) / tau;
        }
        let mut h = CellField::zeros(nc);
        inject_adjoint_into(pair, &dphi, &mut h);
        for c in 0..nc {
            h[c] += 0.25 * quad[k - 1][c] + 0.25 * quad[k][c] + state.s[k - 1][c];
        }
        hj.push(h);
        let z: Vec<f64> = state.rho[k].iter().zip(state.s[k - 1].iter()).map(|(r, s)| r * s - mu).collect();
        comp.push(CellField(z));
    }

    let block = |fields: &[CellField], w: &[f64]| (tau * fields.iter().map(|f| weighted_sq(w, f)).sum::<f64>()).sqrt();
    let block_norms = [
        block(&continuity, fine.measures()),
        block(&hj, coarse.measures()),
        block(&comp, coarse.measures()),
    ];
    let norm = block_norms.iter().copied().fold(0.0, f64::max);
    Ok((KKTResidual { continuity, hj, comp, block_norms, norm }, quad))
}

/// Discrete Wasserstein distance `sqrt(tau sum_k <R(I rho_mid^k), (grad phi^k)^2>)`.
pub fn discrete_w2(setup: &TransportSetup, rho: &[CellField], phi: &[CellField]) -> Result<f64> {
    setup.check_rho(rho)?;
    setup.check_phi(phi)?;
    let data = SliceData::new(setup, rho, phi);
    Ok(w2_from(setup, &data))
}

pub(crate) fn w2_from(setup: &TransportSetup, data: &SliceData) -> f64 {
    let fine = setup.pair.fine();
    let mut total = 0.0;
    for (r, g) in data.recon.iter().zip(&data.grad) {
        for ((f, a), b) in fine.internal_faces().iter().zip(r).zip(g) {
            total += a * b * b * f.measure * f.dist;
        }
    }
    (setup.tau() * total).sqrt()
}

/// Dual objective of the linear-reconstruction problem:
/// `<I^* phi^{N+1} - tau/4 Q^{N+1}, rho_f> - <I^* phi^1 + tau/4 Q^1, rho_in>`
/// with `Q^k = I^* L^* (grad phi^k)^2`. Feasibility of `phi` is not checked.
pub fn dual_objective(setup: &TransportSetup, phi: &[CellField]) -> Result<f64> {
    if setup.kind != Reconstruction::Linear {
        return Err(Error::UnsupportedKind);
    }
    setup.check_phi(phi)?;
    let pair = &setup.pair;
    let (coarse, fine) = (pair.coarse(), pair.fine());
    let nc = coarse.num_cells();
    let tau = setup.tau();
    let ones = vec![1.0; fine.num_cells()];
    let mut grad = vec![0.0; fine.num_internal_faces()];
    let mut term = |k: usize, sign: f64, rho: &[f64]| {
        gradient_into(fine, &phi[k - 1], &mut grad);
        let mut q = vec![0.0; nc];
        hj_quadratic(setup, &ones, &grad, &mut q);
        let mut p = vec![0.0; nc];
        inject_adjoint_into(pair, &phi[k - 1], &mut p);
        let v: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - sign * 0.25 * tau * b).collect();
        mass(coarse.measures(), &v.iter().zip(rho).map(|(a, b)| a * b).collect::<Vec<_>>())
    };
    let last = term(setup.steps + 1, 1.0, &setup.rho_f);
    let first = term(1, -1.0, &setup.rho_in);
    Ok(last - first)
}

/// Logarithmic barrier `sum_{k=1..N} tau sum_K -log(rho^k_K) m_K`, `+inf` if
/// any interior value is not positive.
pub fn barrier_value(setup: &TransportSetup, rho: &[CellField]) -> Result<f64> {
    setup.check_rho(rho)?;
    let m = setup.pair.coarse().measures();
    let mut total = 0.0;
    for slice in &rho[1..=setup.steps] {
        for (&v, &w) in slice.iter().zip(m) {
            if !(v > 0.0) {
                return Ok(f64::INFINITY);
            }
            total -= v.ln() * w;
        }
    }
    Ok(setup.tau() * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_acute_triangulation, generate_cartesian, subdivide_to_nested};

    fn two_cell(n: usize, kind: Reconstruction, rho_in: [f64; 2], rho_f: [f64; 2]) -> TransportSetup {
        let pair = NestedMeshPair::identical(generate_cartesian(2, 1).unwrap());
        TransportSetup::new(pair, n, kind, CellField(rho_in.to_vec()), CellField(rho_f.to_vec())).unwrap()
    }

    #[test]
    fn setup_rejects_bad_boundary_data() {
        let pair = NestedMeshPair::identical(generate_cartesian(2, 1).unwrap());
        let r = TransportSetup::new(pair.clone(), 1, Reconstruction::Linear, CellField(vec![1.0, 1.0]), CellField(vec![1.0, 2.0]));
        assert!(matches!(r, Err(Error::MassMismatch(..))));
        let r = TransportSetup::new(pair.clone(), 1, Reconstruction::Linear, CellField(vec![-1.0, 3.0]), CellField(vec![1.0, 1.0]));
        assert!(matches!(r, Err(Error::NegativeDensity { cell: 0, .. })));
        let r = TransportSetup::new(pair, 1, Reconstruction::Linear, CellField(vec![1.0]), CellField(vec![1.0]));
        assert!(matches!(r, Err(Error::MeshMismatch { .. })));
    }

    #[test]
    fn action_hand_values() {
        let s = two_cell(0, Reconstruction::Linear, [1.0, 1.0], [1.0, 1.0]);
        let rho = vec![CellField(vec![1.0, 1.0]); 2];
        assert_eq!(action(&s, &rho, &[FluxField(vec![1.0])]).unwrap(), 0.25);
        assert_eq!(action(&s, &rho, &[FluxField(vec![0.0])]).unwrap(), 0.0);
        let neg = vec![CellField(vec![1.0, 1.0]), CellField(vec![-1.0, 3.0])];
        assert_eq!(action(&s, &neg, &[FluxField(vec![0.0])]).unwrap(), f64::INFINITY);
        let h = two_cell(0, Reconstruction::Harmonic, [2.0, 0.0], [2.0, 0.0]);
        let rho = vec![CellField(vec![2.0, 0.0]); 2];
        assert_eq!(action(&h, &rho, &[FluxField(vec![1.0])]).unwrap(), f64::INFINITY);
        assert_eq!(action(&h, &rho, &[FluxField(vec![0.0])]).unwrap(), 0.0);
    }

    #[test]
    fn flux_hand_value() {
        let s = two_cell(0, Reconstruction::Linear, [1.0, 2.0], [2.0, 1.0]);
        let rho = vec![s.rho_in().clone(), s.rho_f().clone()];
        let phi = vec![CellField(vec![0.0, 1.0])];
        assert_eq!(flux_from_potential(&s, &rho, &phi).unwrap()[0].0, vec![3.0]);
        let zero = vec![CellField(vec![0.0, 0.0]); 2];
        let z = two_cell(0, Reconstruction::Linear, [1.0, 1.0], [1.0, 1.0]);
        assert_eq!(flux_from_potential(&z, &zero, &phi).unwrap()[0].0, vec![0.0]);
    }

    #[test]
    fn constant_self_transport_solves_the_barrier_system() {
        let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
        let nc = pair.coarse().num_cells();
        for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
            let c = CellField::constant(nc, 0.8);
            let setup = TransportSetup::new(pair.clone(), 3, kind, c.clone(), c.clone()).unwrap();
            let mu = 1e-3;
            let mut state = SpaceTimeState::initial(&setup, mu);
            assert!((state.rho[1][0] - 0.8).abs() < 1e-15);
            // the slack is balanced by a potential decreasing linearly in time
            let tau = setup.tau();
            for (k, p) in state.phi.iter_mut().enumerate() {
                p.fill(-(k as f64 + 1.0) * tau * mu / 0.8);
            }
            let r = kkt_residual(&setup, &state, mu).unwrap();
            assert!(r.norm <= 1e-14, "{}", r.norm);
            state.s[0][0] *= 2.0;
            assert!(kkt_residual(&setup, &state, mu).unwrap().norm > 1e-6);
        }
    }

    #[test]
    fn w2_is_consistent_with_action() {
        let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
        let nc = pair.coarse().num_cells();
        let nf = pair.fine().num_cells();
        let rin = CellField((0..nc).map(|i| 1.0 + 0.1 * (i % 5) as f64).collect());
        let mut rf = rin.clone();
        rf.reverse();
        let scale = mass(pair.coarse().measures(), &rin) / mass(pair.coarse().measures(), &rf);
        rf.iter_mut().for_each(|v| *v *= scale);
        for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
            let setup = TransportSetup::new(pair.clone(), 2, kind, rin.clone(), rf.clone()).unwrap();
            let mut state = SpaceTimeState::initial(&setup, 1.0);
            for (k, p) in state.phi.iter_mut().enumerate() {
                *p = CellField((0..nf).map(|i| ((i * 7 + k) % 11) as f64 * 0.1).collect());
            }
            let w = discrete_w2(&setup, &state.rho, &state.phi).unwrap();
            let f = flux_from_potential(&setup, &state.rho, &state.phi).unwrap();
            let a = action(&setup, &state.rho, &f).unwrap();
            assert!((w * w / 2.0 - a).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn barrier_closed_forms() {
        let s = two_cell(1, Reconstruction::Linear, [2.0, 2.0], [2.0, 2.0]);
        let rho = vec![CellField(vec![2.0, 2.0]); 3];
        assert!((barrier_value(&s, &rho).unwrap() + 0.5 * 2f64.ln()).abs() < 1e-15);
        let ones = vec![CellField(vec![1.0, 1.0]); 3];
        assert_eq!(barrier_value(&s, &ones).unwrap(), 0.0);
        let mut z = ones.clone();
        z[1][0] = 0.0;
        assert_eq!(barrier_value(&s, &z).unwrap(), f64::INFINITY);
    }

    #[test]
    fn dual_objective_basics() {
        let s = two_cell(1, Reconstruction::Linear, [1.5, 0.5], [0.5, 1.5]);
        let phi = vec![CellField(vec![0.0, 0.0]); 2];
        assert_eq!(dual_objective(&s, &phi).unwrap(), 0.0);
        let shifted = vec![CellField(vec![3.0, 3.0]); 2];
        assert!(dual_objective(&s, &shifted).unwrap().abs() < 1e-14);
        let h = s.with_kind(Reconstruction::Harmonic);
        assert!(matches!(dual_objective(&h, &phi), Err(Error::UnsupportedKind)));
    }
}
