//! Sampling of reference fields and error metrics of discrete solutions.

use crate::error::{Error, Result};
use crate::mesh::{geom, Mesh};
use crate::ops::{gradient_into, reconstruct_into, CellField};
use crate::problem::{midpoint_into, TransportSetup, MASS_TOL};
use crate::solver::Solution;

use super::cases::AnalyticCase;

/// How boundary densities are transferred to the mesh.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sampling {
    /// Point values at the cell centers.
    #[default]
    Center,
    /// Cell averages by a second-order quadrature.
    Average,
}

/// Boundary densities on the coarse mesh, each scaled to unit mass.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    pub rho_in: CellField,
    pub rho_f: CellField,
    /// The sampled masses differed by more than the mass tolerance.
    pub rescaled: bool,
}

/// Cell average of `f` on a polygon: fan triangles from the centroid with the
/// edge-midpoint rule on each.
pub(super) fn cell_average(poly: &[geom::Point], f: &dyn Fn(geom::Point) -> f64) -> f64 {
    let c = geom::centroid(poly);
    let mut total = 0.0;
    let mut area = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let t = geom::signed_area(&[c, a, b]);
        let q = (f(geom::midpoint(c, a)) + f(geom::midpoint(a, b)) + f(geom::midpoint(b, c))) / 3.0;
        total += q * t;
        area += t;
    }
    total / area
}

fn sample(mesh: &Mesh, sampling: Sampling, f: &dyn Fn(geom::Point) -> f64) -> CellField {
    CellField(match sampling {
        Sampling::Center => mesh.centers().iter().map(|&p| f(p)).collect(),
        Sampling::Average => (0..mesh.num_cells()).map(|c| cell_average(&mesh.cell_polygon(c), f)).collect(),
    })
}

/// Density at time `t` (only 0 and 1 for cases without an exact solution).
pub fn sample_density_bc(case: &AnalyticCase, mesh: &Mesh, t: f64, sampling: Sampling) -> Result<CellField> {
    let f: Box<dyn Fn(geom::Point) -> f64> = if t == 0.0 {
        Box::new(|p| case.rho_in(p))
    } else if t == 1.0 {
        Box::new(|p| case.rho_f(p))
    } else if case.has_exact() {
        Box::new(move |p| case.rho_exact(t, p).expect("exact case"))
    } else {
        return Err(Error::InvalidArgument(format!("case `{}` has no density at t = {t}", case.name())));
    };
    Ok(sample(mesh, sampling, &*f))
}

/// Both boundary densities, each scaled to unit discrete mass. The reference
/// distances and densities of the built-in cases are for unit mass, and the
/// sampled masses only agree up to the quadrature error.
pub fn boundary_densities(case: &AnalyticCase, mesh: &Mesh, sampling: Sampling) -> Result<BoundaryData> {
    let mut rho_in = sample_density_bc(case, mesh, 0.0, sampling)?;
    let mut rho_f = sample_density_bc(case, mesh, 1.0, sampling)?;
    let m = mesh.measures();
    let mass = |r: &CellField| r.iter().zip(m).map(|(a, b)| a * b).sum::<f64>();
    let (a, b) = (mass(&rho_in), mass(&rho_f));
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::MassMismatch(a, b));
    }
    let rescaled = (a - b).abs() > MASS_TOL * a.max(b);
    rho_in.iter_mut().for_each(|v| *v /= a);
    rho_f.iter_mut().for_each(|v| *v /= b);
    Ok(BoundaryData { rho_in, rho_f, rescaled })
}

/// Reference potentials and densities at the slice midpoints
/// `t = (k - 1/2) tau`, sampled at the fine cell centers.
pub fn sample_spacetime(case: &AnalyticCase, setup: &TransportSetup) -> Result<(Vec<CellField>, Vec<CellField>)> {
    if !case.has_exact() {
        return Err(Error::InvalidArgument(format!("case `{}` has no exact solution", case.name())));
    }
    let fine = setup.pair().fine();
    let tau = setup.tau();
    let mut phi = Vec::with_capacity(setup.steps() + 1);
    let mut rho = Vec::with_capacity(setup.steps() + 1);
    for k in 1..=setup.steps() + 1 {
        let t = (k as f64 - 0.5) * tau;
        phi.push(CellField(fine.centers().iter().map(|&p| case.phi_exact(t, p).expect("exact")).collect()));
        rho.push(CellField(fine.centers().iter().map(|&p| case.rho_exact(t, p).expect("exact")).collect()));
    }
    Ok((phi, rho))
}

/// Which mesh the density error is evaluated on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DensityErrorMesh {
    /// Discrete and exact densities on the coarse mesh (default).
    #[default]
    Coarse,
    /// Injected discrete density against fine-center samples.
    Fine,
}

/// The four error metrics of a discrete solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub eps_w2: f64,
    pub eps_phi: f64,
    pub eps_grad_phi: f64,
    pub eps_rho: f64,
}

impl ErrorReport {
    pub fn as_array(&self) -> [f64; 4] {
        [self.eps_w2, self.eps_phi, self.eps_grad_phi, self.eps_rho]
    }
}

/// Errors against an exact solution. The discrete potential is first shifted
/// by the constant that zeroes the density-weighted space-time mean of its
/// difference with the reference.
pub fn errors(solution: &Solution, case: &AnalyticCase, setup: &TransportSetup) -> Result<ErrorReport> {
    errors_on(solution, case, setup, DensityErrorMesh::Coarse)
}

pub fn errors_on(
    solution: &Solution,
    case: &AnalyticCase,
    setup: &TransportSetup,
    density_mesh: DensityErrorMesh,
) -> Result<ErrorReport> {
    let w2 = case
        .w2_exact()
        .ok_or_else(|| Error::InvalidArgument(format!("case `{}` has no exact solution", case.name())))?;
    solution.state.check(setup)?;
    let (phi_ref, rho_ref) = sample_spacetime(case, setup)?;
    let pair = setup.pair();
    let (coarse, fine) = (pair.coarse(), pair.fine());
    let tau = setup.tau();
    let rho = &solution.state.rho;
    let slices = setup.steps() + 1;

    let mut mids = vec![vec![0.0; fine.num_cells()]; slices];
    for k in 1..=slices {
        midpoint_into(pair, rho, k, &mut mids[k - 1]);
    }
    let diffs: Vec<Vec<f64>> = (0..slices)
        .map(|k| solution.state.phi[k].iter().zip(phi_ref[k].iter()).map(|(a, b)| a - b).collect())
        .collect();

    let mf = fine.measures();
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..slices {
        for i in 0..fine.num_cells() {
            num += diffs[k][i] * mids[k][i] * mf[i];
            den += mids[k][i] * mf[i];
        }
    }
    let shift = if den > 0.0 { num / den } else { 0.0 };
    let mut eps_phi = 0.0;
    for k in 0..slices {
        for i in 0..fine.num_cells() {
            eps_phi += (diffs[k][i] - shift).powi(2) * mids[k][i] * mf[i];
        }
    }
    // reported as a weighted norm, like the gradient error
    let eps_phi = (eps_phi * tau).sqrt();

    let ne = fine.num_internal_faces();
    let (mut grad, mut rec) = (vec![0.0; ne], vec![0.0; ne]);
    let mut g2 = 0.0;
    for k in 0..slices {
        gradient_into(fine, &diffs[k], &mut grad);
        reconstruct_into(fine, &mids[k], setup.kind(), &mut rec);
        for ((f, g), r) in fine.internal_faces().iter().zip(&grad).zip(&rec) {
            g2 += g * g * r * f.measure * f.dist;
        }
    }
    let eps_grad_phi = (tau * g2).sqrt();

    let mut eps_rho = 0.0;
    match density_mesh {
        DensityErrorMesh::Coarse => {
            for k in 1..=slices {
                let t = (k as f64 - 0.5) * tau;
                for (c, (&p, &m)) in coarse.centers().iter().zip(coarse.measures()).enumerate() {
                    let exact = case.rho_exact(t, p).expect("exact");
                    eps_rho += (exact - 0.5 * (rho[k][c] + rho[k - 1][c])).abs() * m;
                }
            }
        }
        DensityErrorMesh::Fine => {
            for k in 0..slices {
                for i in 0..fine.num_cells() {
                    eps_rho += (rho_ref[k][i] - mids[k][i]).abs() * mf[i];
                }
            }
        }
    }
    eps_rho *= tau;

    Ok(ErrorReport { eps_w2: (w2 - solution.w2).abs(), eps_phi, eps_grad_phi, eps_rho })
}

/// `sum_sigma m_sigma |a_L - a_K|` over the internal faces.
pub fn total_variation(mesh: &Mesh, a: &[f64]) -> f64 {
    mesh.internal_faces().iter().map(|f| f.measure * (a[f.cells[1]] - a[f.cells[0]]).abs()).sum()
}

/// Area-weighted average of each cell with its face neighbours.
pub fn smooth(mesh: &Mesh, a: &[f64]) -> Vec<f64> {
    let m = mesh.measures();
    let mut num: Vec<f64> = a.iter().zip(m).map(|(x, w)| x * w).collect();
    let mut den = m.to_vec();
    for f in mesh.internal_faces() {
        let [k, l] = f.cells;
        num[k] += a[l] * m[l];
        den[k] += m[l];
        num[l] += a[k] * m[k];
        den[l] += m[k];
    }
    num.iter().zip(&den).map(|(a, b)| a / b).collect()
}

/// Density at `t = 1/2`: the middle slice for odd `N`, otherwise the average
/// of the two slices around it.
pub fn midpoint_slice(solution: &Solution, setup: &TransportSetup) -> CellField {
    let n = setup.steps();
    let rho = &solution.state.rho;
    if n % 2 == 1 {
        rho[n.div_ceil(2)].clone()
    } else {
        let (a, b) = (&rho[n / 2], &rho[n / 2 + 1]);
        CellField(a.iter().zip(b.iter()).map(|(x, y)| 0.5 * (x + y)).collect())
    }
}

/// Spurious oscillation of the density at `t = 1/2`, on the coarse mesh:
/// `(TV(rho) - TV(reference))_+ / mass`. The reference is the exact
/// density when the case provides one, and otherwise a neighbour-averaged
/// copy of the discrete slice, which keeps smooth variation and removes
/// cell-to-cell oscillation.
pub fn oscillation_index(solution: &Solution, setup: &TransportSetup, case: Option<&AnalyticCase>) -> f64 {
    let coarse = setup.pair().coarse();
    let mid = midpoint_slice(solution, setup);
    let n = setup.steps();
    let t = if n % 2 == 1 { 0.5 } else { f64::NAN };
    let reference: Vec<f64> = match case {
        Some(c) if c.has_exact() && t == 0.5 => {
            coarse.centers().iter().map(|&p| c.rho_exact(0.5, p).expect("exact")).collect()
        }
        _ => smooth(coarse, &mid),
    };
    let excess = total_variation(coarse, &mid) - total_variation(coarse, &reference);
    excess.max(0.0) / setup.mass()
}
