//! Primal-dual logarithmic barrier method: Newton steps on the perturbed
//! optimality system and continuation in the barrier weight.

mod jacobian;

use crate::error::{Error, Result};
use crate::ops::{CellField, FluxField};
use crate::problem::{
    action, flux_from_potential, kkt_residual_from, w2_from, KKTResidual, SliceData, SpaceTimeState, TransportSetup,
};

use jacobian::{assemble, Layout, LinearSolver};

/// Stopping quantity of the outer loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delta0Mode {
    /// Optimality gap bound `mu N/(N+1) |Omega|`.
    Gap,
    /// Residual of the unperturbed system with the slack clamped at zero.
    Residual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams {
    pub mu0: f64,
    /// Decay rate of the barrier weight.
    pub theta: f64,
    /// Outer tolerance.
    pub eps0: f64,
    /// Inner (Newton) tolerance on the residual norm.
    pub eps_mu: f64,
    pub alpha_min: f64,
    /// Newton steps allowed per barrier weight.
    pub n_max: usize,
    /// Upper bound for the decay rate after repeated inner failures.
    pub theta_max: f64,
    pub delta0_mode: Delta0Mode,
    /// The barrier weight never goes below this value.
    pub mu_floor: f64,
    /// Cap on outer iterations, backoffs included.
    pub max_outer: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            theta: 0.2,
            eps0: 1e-6,
            eps_mu: 1e-6,
            alpha_min: 0.1,
            n_max: 20,
            theta_max: 0.8,
            delta0_mode: Delta0Mode::Gap,
            mu_floor: 1e-11,
            max_outer: 200,
        }
    }
}

impl SolverParams {
    /// Tolerances used for convergence studies (`eps0 = eps_mu = 1e-8`).
    pub fn convergence() -> Self {
        Self { eps0: 1e-8, eps_mu: 1e-8, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.mu0 > 0.0) {
            return bad("mu0 must be positive");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad("theta must lie in (0, 1)");
        }
        if !(self.theta_max >= self.theta && self.theta_max < 1.0) {
            return bad("theta_max must lie in [theta, 1)");
        }
        if !(self.eps0 > 0.0 && self.eps_mu > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return bad("alpha_min must lie in (0, 1]");
        }
        if self.n_max == 0 || self.max_outer == 0 {
            return bad("iteration limits must be positive");
        }
        if !(self.mu_floor > 0.0) {
            return bad("mu_floor must be positive");
        }
        Ok(())
    }
}

/// Newton direction for `(phi, rho, s)`; `rho` holds the `N` interior slices.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub phi: Vec<CellField>,
    pub rho: Vec<CellField>,
    pub s: Vec<CellField>,
}

impl Direction {
    fn from_flat(layout: &Layout, x: &[f64]) -> Self {
        let phi = (1..=layout.steps + 1)
            .map(|k| CellField(x[layout.phi(k, 0)..layout.phi(k, 0) + layout.nf].to_vec()))
            .collect();
        let rho = (1..=layout.steps)
            .map(|k| CellField(x[layout.rho(k, 0)..layout.rho(k, 0) + layout.nc].to_vec()))
            .collect();
        Self { phi, rho, s: Vec::new() }
    }

    fn to_flat(&self, layout: &Layout) -> Vec<f64> {
        let mut x = vec![0.0; layout.size()];
        for (k, p) in self.phi.iter().enumerate() {
            x[layout.phi(k + 1, 0)..][..layout.nf].copy_from_slice(p);
        }
        for (k, r) in self.rho.iter().enumerate() {
            x[layout.rho(k + 1, 0)..][..layout.nc].copy_from_slice(r);
        }
        x
    }

    fn check(&self, setup: &TransportSetup) -> Result<()> {
        let l = Layout::new(setup);
        let ok = self.phi.len() == l.steps + 1
            && self.rho.len() == l.steps
            && self.s.len() == l.steps
            && self.phi.iter().all(|p| p.len() == l.nf)
            && self.rho.iter().chain(&self.s).all(|r| r.len() == l.nc);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("direction does not match the problem size".into()))
        }
    }
}

/// One Newton step.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerRecord {
    /// Residual before the step.
    pub residual: f64,
    pub step_norm: f64,
    pub alpha: f64,
}

/// One outer iteration (a barrier weight), accepted or backed off.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterRecord {
    pub mu: f64,
    pub theta: f64,
    pub newton_steps: usize,
    /// Final inner residual norm.
    pub residual: f64,
    pub alphas: Vec<f64>,
    /// `mu N/(N+1) |Omega|`.
    pub gap_bound: f64,
    /// Kinetic action of the iterate (accepted iterations only).
    pub action: f64,
    pub w2: f64,
    pub min_rho: f64,
    pub min_s: f64,
    pub accepted: bool,
    pub inner: Vec<InnerRecord>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub outer: Vec<OuterRecord>,
}

impl SolverTrace {
    pub fn backoffs(&self) -> usize {
        self.outer.iter().filter(|o| !o.accepted).count()
    }

    pub fn newton_steps(&self) -> usize {
        self.outer.iter().map(|o| o.newton_steps).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub state: SpaceTimeState,
    pub fluxes: Vec<FluxField>,
    pub w2: f64,
    /// Barrier weight of the returned iterate.
    pub mu: f64,
    pub trace: SolverTrace,
    pub converged: bool,
}

/// Reusable Newton machinery for one problem.
struct Newton<'a> {
    setup: &'a TransportSetup,
    layout: Layout,
    linear: LinearSolver,
}

impl<'a> Newton<'a> {
    fn new(setup: &'a TransportSetup) -> Self {
        Self { setup, layout: Layout::new(setup), linear: LinearSolver::new(setup) }
    }

    fn residual(&self, state: &SpaceTimeState, mu: f64) -> Result<(KKTResidual, SliceData)> {
        let data = SliceData::new(self.setup, &state.rho, &state.phi);
        let (r, _) = kkt_residual_from(self.setup, state, mu, &data)?;
        Ok((r, data))
    }

    fn direction(&mut self, state: &SpaceTimeState, res: &KKTResidual, data: &SliceData) -> Result<Direction> {
        let l = self.layout;
        let entries = assemble(self.setup, state, data, true);
        let mut rhs = vec![0.0; l.size()];
        for k in 1..=l.steps + 1 {
            for (i, v) in res.continuity[k - 1].iter().enumerate() {
                rhs[l.phi(k, i)] = -v;
            }
        }
        for k in 1..=l.steps {
            for c in 0..l.nc {
                rhs[l.rho(k, c)] = -res.hj[k - 1][c] + res.comp[k - 1][c] / state.rho[k][c];
            }
        }
        let mut x = self.linear.solve(&entries, &rhs)?;
        let mf = self.setup.pair().fine().measures();
        let shift = (0..l.nf).map(|i| mf[i] * x[l.phi(1, i)]).sum::<f64>() / self.setup.area();
        x[..(l.steps + 1) * l.nf].iter_mut().for_each(|v| *v -= shift);
        let mut d = Direction::from_flat(&l, &x);
        d.s = (1..=l.steps)
            .map(|k| {
                CellField(
                    (0..l.nc)
                        .map(|c| (-res.comp[k - 1][c] - state.s[k - 1][c] * d.rho[k - 1][c]) / state.rho[k][c])
                        .collect(),
                )
            })
            .collect();
        Ok(d)
    }

    fn step_norm(&self, d: &Direction) -> f64 {
        let pair = self.setup.pair();
        let tau = self.setup.tau();
        let block = |fields: &[CellField], w: &[f64]| {
            (tau * fields.iter().map(|f| f.iter().zip(w).map(|(x, m)| x * x * m).sum::<f64>()).sum::<f64>()).sqrt()
        };
        block(&d.phi, pair.fine().measures())
            .max(block(&d.rho, pair.coarse().measures()))
            .max(block(&d.s, pair.coarse().measures()))
    }
}

/// Newton direction of the barrier optimality system at `state`.
///
/// The additive constant of the potential is fixed by requiring the update of
/// the first potential slice to have zero weighted mean.
pub fn newton_direction(setup: &TransportSetup, state: &SpaceTimeState, mu: f64) -> Result<Direction> {
    state.check(setup)?;
    require_interior(state)?;
    let mut newton = Newton::new(setup);
    let (res, data) = newton.residual(state, mu)?;
    newton.direction(state, &res, &data)
}

/// Jacobian of [`crate::problem::kkt_residual`] with respect to `(phi, rho, s)`
/// applied to `dir`, returned in residual layout (norms left at zero).
pub fn kkt_jacobian_apply(setup: &TransportSetup, state: &SpaceTimeState, dir: &Direction) -> Result<KKTResidual> {
    state.check(setup)?;
    dir.check(setup)?;
    let l = Layout::new(setup);
    let data = SliceData::new(setup, &state.rho, &state.phi);
    let entries = assemble(setup, state, &data, false);
    let x = dir.to_flat(&l);
    let mut y = vec![0.0; l.size()];
    entries.apply(&l, &x, &mut y);
    let continuity = (1..=l.steps + 1).map(|k| CellField(y[l.phi(k, 0)..][..l.nf].to_vec())).collect();
    let hj = (1..=l.steps)
        .map(|k| CellField((0..l.nc).map(|c| y[l.rho(k, c)] + dir.s[k - 1][c]).collect()))
        .collect();
    let comp = (1..=l.steps)
        .map(|k| {
            CellField(
                (0..l.nc)
                    .map(|c| state.s[k - 1][c] * dir.rho[k - 1][c] + state.rho[k][c] * dir.s[k - 1][c])
                    .collect(),
            )
        })
        .collect();
    Ok(KKTResidual { continuity, hj, comp, block_norms: [0.0; 3], norm: 0.0 })
}

fn require_interior(state: &SpaceTimeState) -> Result<()> {
    let n = state.rho.len();
    for slice in &state.rho[1..n - 1] {
        if let Some(cell) = slice.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::ZeroDensity { cell });
        }
    }
    for slice in &state.s {
        if let Some(cell) = slice.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument(format!("slack not positive in cell {cell}")));
        }
    }
    Ok(())
}

/// Fraction-to-boundary step: `min(1, 0.95 alpha_max)` where `alpha_max` is the
/// largest step keeping interior densities and slacks positive.
pub fn fraction_to_boundary(state: &SpaceTimeState, dir: &Direction, params: &SolverParams) -> Result<f64> {
    let n = state.rho.len();
    let mut alpha_max = f64::INFINITY;
    let pairs = state.rho[1..n - 1].iter().zip(&dir.rho).chain(state.s.iter().zip(&dir.s));
    for (x, d) in pairs {
        for (&v, &dv) in x.iter().zip(d.iter()) {
            if dv < 0.0 {
                alpha_max = alpha_max.min(-v / dv);
            }
        }
    }
    let alpha = (0.95 * alpha_max).min(1.0);
    if alpha < params.alpha_min {
        Err(Error::StepTooSmall { alpha })
    } else {
        Ok(alpha)
    }
}

fn apply_step(state: &mut SpaceTimeState, dir: &Direction, alpha: f64, measures: &[f64]) {
    for (p, d) in state.phi.iter_mut().zip(&dir.phi) {
        p.iter_mut().zip(d.iter()).for_each(|(x, y)| *x += alpha * y);
    }
    let n = state.rho.len();
    for (r, d) in state.rho[1..n - 1].iter_mut().zip(&dir.rho) {
        r.iter_mut().zip(d.iter()).for_each(|(x, y)| *x += alpha * y);
    }
    for (s, d) in state.s.iter_mut().zip(&dir.s) {
        s.iter_mut().zip(d.iter()).for_each(|(x, y)| *x += alpha * y);
    }
    // keep the first slice at zero weighted mean; the same constant is
    // removed from every slice so the Hamilton-Jacobi rows are unaffected
    let area: f64 = measures.iter().sum();
    let mean = state.phi[0].iter().zip(measures).map(|(x, m)| x * m).sum::<f64>() / area;
    for p in &mut state.phi {
        p.iter_mut().for_each(|x| *x -= mean);
    }
}

fn inner_loop(
    newton: &mut Newton,
    mut state: SpaceTimeState,
    mu: f64,
    params: &SolverParams,
    log: &mut Vec<InnerRecord>,
) -> Result<(SpaceTimeState, f64)> {
    let measures = newton.setup.pair().fine().measures().to_vec();
    let mut steps = 0;
    loop {
        let (res, data) = newton.residual(&state, mu)?;
        if res.norm <= params.eps_mu {
            return Ok((state, res.norm));
        }
        if steps >= params.n_max {
            return Err(Error::InnerFailure { mu, iterations: steps, residual: res.norm });
        }
        let dir = newton.direction(&state, &res, &data)?;
        let step_norm = newton.step_norm(&dir);
        let alpha = match fraction_to_boundary(&state, &dir, params) {
            Ok(a) => a,
            Err(e) => {
                log.push(InnerRecord { residual: res.norm, step_norm, alpha: 0.0 });
                return Err(e);
            }
        };
        log.push(InnerRecord { residual: res.norm, step_norm, alpha });
        apply_step(&mut state, &dir, alpha, &measures);
        steps += 1;
    }
}

/// Newton iterations on the barrier system at fixed `mu` until the residual
/// norm drops below `eps_mu`.
pub fn solve_perturbed(
    setup: &TransportSetup,
    state: SpaceTimeState,
    mu: f64,
    params: &SolverParams,
) -> Result<(SpaceTimeState, Vec<InnerRecord>)> {
    params.validate()?;
    state.check(setup)?;
    require_interior(&state)?;
    let mut newton = Newton::new(setup);
    let mut log = Vec::new();
    let (state, _) = inner_loop(&mut newton, state, mu, params, &mut log)?;
    Ok((state, log))
}

fn gap_bound(setup: &TransportSetup, mu: f64) -> f64 {
    let n = setup.steps() as f64;
    mu * n / (n + 1.0) * setup.area()
}

/// Residual of the unperturbed system with `s` replaced by `max(s, 0)`.
fn unperturbed_residual(setup: &TransportSetup, state: &SpaceTimeState) -> Result<f64> {
    let mut s = state.clone();
    s.s.iter_mut().for_each(|f| f.iter_mut().for_each(|v| *v = v.max(0.0)));
    Ok(crate::problem::kkt_residual(setup, &s, 0.0)?.norm)
}

/// Barrier continuation: `mu <- theta mu` with warm starts until the outer
/// stopping quantity falls below `eps0`. Inner failures restore the last
/// accepted iterate and retry with a larger `theta`.
pub fn solve(setup: &TransportSetup, params: &SolverParams) -> Result<Solution> {
    solve_with(setup, params, |_| {})
}

/// [`solve`] with a callback invoked after every accepted barrier weight.
pub fn solve_with(
    setup: &TransportSetup,
    params: &SolverParams,
    mut on_accept: impl FnMut(&Snapshot),
) -> Result<Solution> {
    params.validate()?;
    let mut newton = Newton::new(setup);
    let mut trace = SolverTrace::default();

    // last accepted point; the starting point counts as accepted at mu0
    let mut good = SpaceTimeState::initial(setup, params.mu0);
    let mut good_mu = params.mu0;
    let mut accepted_any = false;
    let mut theta = params.theta;

    loop {
        if trace.outer.len() >= params.max_outer {
            return Err(Error::MaxOuterIterations { iterations: trace.outer.len(), mu: good_mu });
        }
        let mu = (theta * good_mu).max(params.mu_floor);
        let mut log = Vec::new();
        match inner_loop(&mut newton, good.clone(), mu, params, &mut log) {
            Ok((state, residual)) => {
                let data = SliceData::new(setup, &state.rho, &state.phi);
                let fluxes = fluxes_from(&data);
                let record = OuterRecord {
                    mu,
                    theta,
                    newton_steps: log.len(),
                    residual,
                    alphas: log.iter().map(|r| r.alpha).collect(),
                    gap_bound: gap_bound(setup, mu),
                    action: action(setup, &state.rho, &fluxes)?,
                    w2: w2_from(setup, &data),
                    min_rho: state.min_interior_rho(),
                    min_s: state.min_slack(),
                    accepted: true,
                    inner: log,
                };
                on_accept(&Snapshot { mu, state: &state, record: &record });
                trace.outer.push(record);
                good = state;
                good_mu = mu;
                accepted_any = true;
                theta = params.theta;
                let delta0 = match params.delta0_mode {
                    Delta0Mode::Gap => gap_bound(setup, mu),
                    Delta0Mode::Residual => unperturbed_residual(setup, &good)?,
                };
                if delta0 <= params.eps0 || mu <= params.mu_floor {
                    let w2 = w2_from(setup, &data);
                    return Ok(Solution {
                        state: good,
                        fluxes,
                        w2,
                        mu,
                        trace,
                        converged: delta0 <= params.eps0,
                    });
                }
            }
            Err(e @ (Error::InnerFailure { .. } | Error::StepTooSmall { .. } | Error::SingularSystem(_))) => {
                let residual = match &e {
                    Error::InnerFailure { residual, .. } => *residual,
                    _ => log.last().map_or(f64::NAN, |r| r.residual),
                };
                trace.outer.push(OuterRecord {
                    mu,
                    theta,
                    newton_steps: log.len(),
                    residual,
                    alphas: log.iter().map(|r| r.alpha).collect(),
                    gap_bound: gap_bound(setup, mu),
                    action: f64::NAN,
                    w2: f64::NAN,
                    min_rho: f64::NAN,
                    min_s: f64::NAN,
                    accepted: false,
                    inner: log,
                });
                if !accepted_any && theta >= params.theta_max {
                    // cannot get off the ground: start from a larger weight
                    good_mu *= 10.0;
                    good = SpaceTimeState::initial(setup, good_mu);
                    continue;
                }
                if theta >= params.theta_max && mu <= params.mu_floor {
                    return Err(e);
                }
                theta = params.theta_max.min(0.5 * (1.0 + theta));
            }
            Err(e) => return Err(e),
        }
    }
}

/// State handed to [`solve_with`] callbacks.
pub struct Snapshot<'a> {
    pub mu: f64,
    pub state: &'a SpaceTimeState,
    pub record: &'a OuterRecord,
}

fn fluxes_from(data: &SliceData) -> Vec<FluxField> {
    data.recon
        .iter()
        .zip(&data.grad)
        .map(|(r, g)| FluxField(r.iter().zip(g).map(|(a, b)| a * b).collect()))
        .collect()
}

/// Fluxes of a state, a thin wrapper kept next to the solver for callers
/// that only hold a [`SpaceTimeState`].
pub fn state_fluxes(setup: &TransportSetup, state: &SpaceTimeState) -> Result<Vec<FluxField>> {
    flux_from_potential(setup, &state.rho, &state.phi)
}

#[cfg(test)]
mod tests;
