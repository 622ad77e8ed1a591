//! Discrete spaces and operators on a TPFA mesh.
//!
//! Cell fields are weighted by the cell areas `m_K`, diamond fields and
//! fluxes by `m_sigma d_sigma` (the diamond measure counted `d = 2` times).
//! A [`FluxField`] stores one signed value per internal face in the face's
//! `K -> L` orientation, so conservativity `F_{K,sigma} + F_{L,sigma} = 0`
//! holds by construction.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::mesh::{InternalFace, Mesh, NestedMeshPair};

macro_rules! field {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, Default, PartialEq)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn constant(n: usize, value: f64) -> Self {
                Self(vec![value; n])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}

field!(
    /// One value per cell.
    CellField
);
field!(
    /// One value per internal face (diamond cell).
    DiamondField
);
field!(
    /// Signed conservative flux per internal face, `K -> L` orientation.
    FluxField
);

/// Reconstruction of cell values on the diamond cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reconstruction {
    /// `(d_K a_K + d_L a_L) / d`.
    Linear,
    /// `d a_K a_L / (d_K a_L + d_L a_K)`, zero when either value is zero.
    Harmonic,
}

impl Reconstruction {
    pub fn name(self) -> &'static str {
        match self {
            Reconstruction::Linear => "linear",
            Reconstruction::Harmonic => "harmonic",
        }
    }

    #[inline]
    pub(crate) fn mean(self, f: &InternalFace, ak: f64, al: f64) -> f64 {
        let [dk, dl] = f.dist_cell;
        match self {
            Reconstruction::Linear => (dk * ak + dl * al) / f.dist,
            Reconstruction::Harmonic => {
                let p = ak * al;
                if p == 0.0 {
                    0.0
                } else {
                    f.dist * p / (dk * al + dl * ak)
                }
            }
        }
    }

    /// `(dR/da_K, dR/da_L)`; harmonic requires positive values.
    #[inline]
    pub(crate) fn partials(self, f: &InternalFace, ak: f64, al: f64) -> [f64; 2] {
        let [dk, dl] = f.dist_cell;
        match self {
            Reconstruction::Linear => [dk / f.dist, dl / f.dist],
            Reconstruction::Harmonic => {
                let den = dk * al + dl * ak;
                let c = f.dist / (den * den);
                [c * dk * al * al, c * dl * ak * ak]
            }
        }
    }

    /// Second derivatives `[d2R/da_K2, d2R/da_K da_L, d2R/da_L2]`.
    #[inline]
    pub(crate) fn hessian(self, f: &InternalFace, ak: f64, al: f64) -> [f64; 3] {
        match self {
            Reconstruction::Linear => [0.0; 3],
            Reconstruction::Harmonic => {
                let [dk, dl] = f.dist_cell;
                let den = dk * al + dl * ak;
                let c = 2.0 * f.dist * dk * dl / (den * den * den);
                [-c * al * al, c * ak * al, -c * ak * ak]
            }
        }
    }
}

fn check(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::MeshMismatch { expected, got })
    }
}

fn require_positive(a: &[f64]) -> Result<()> {
    match a.iter().position(|&v| !(v > 0.0)) {
        Some(cell) => Err(Error::ZeroDensity { cell }),
        None => Ok(()),
    }
}

/// `sum_K a_K b_K m_K`.
pub fn inner_cell(mesh: &Mesh, a: &[f64], b: &[f64]) -> Result<f64> {
    check(mesh.num_cells(), a.len())?;
    check(mesh.num_cells(), b.len())?;
    Ok(a.iter().zip(b).zip(mesh.measures()).map(|((x, y), m)| x * y * m).sum())
}

/// `sum_sigma u_sigma v_sigma m_sigma d_sigma`.
pub fn inner_diamond(mesh: &Mesh, u: &[f64], v: &[f64]) -> Result<f64> {
    check(mesh.num_internal_faces(), u.len())?;
    check(mesh.num_internal_faces(), v.len())?;
    Ok(mesh
        .internal_faces()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(f, (x, y))| x * y * f.measure * f.dist)
        .sum())
}

/// Inner product of conservative fluxes; with one signed scalar per face this
/// is the diamond product.
pub fn inner_flux(mesh: &Mesh, f: &FluxField, g: &FluxField) -> Result<f64> {
    inner_diamond(mesh, f, g)
}

pub(crate) fn divergence_into(mesh: &Mesh, flux: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (f, &v) in mesh.internal_faces().iter().zip(flux) {
        let [k, l] = f.cells;
        out[k] += v * f.measure;
        out[l] -= v * f.measure;
    }
    for (o, m) in out.iter_mut().zip(mesh.measures()) {
        *o /= m;
    }
}

/// `div_K F = (1/m_K) sum_sigma F_{K,sigma} m_sigma`.
pub fn divergence(mesh: &Mesh, flux: &FluxField) -> Result<CellField> {
    check(mesh.num_internal_faces(), flux.len())?;
    let mut out = CellField::zeros(mesh.num_cells());
    divergence_into(mesh, flux, &mut out);
    Ok(out)
}

pub(crate) fn gradient_into(mesh: &Mesh, a: &[f64], out: &mut [f64]) {
    for (o, f) in out.iter_mut().zip(mesh.internal_faces()) {
        let [k, l] = f.cells;
        *o = (a[l] - a[k]) / f.dist;
    }
}

/// `grad_{K,sigma} a = (a_L - a_K) / d_sigma`, the negative adjoint of the divergence.
pub fn gradient(mesh: &Mesh, a: &CellField) -> Result<FluxField> {
    check(mesh.num_cells(), a.len())?;
    let mut out = FluxField::zeros(mesh.num_internal_faces());
    gradient_into(mesh, a, &mut out);
    Ok(out)
}

pub(crate) fn inject_into(pair: &NestedMeshPair, a: &[f64], out: &mut [f64]) {
    for (o, &c) in out.iter_mut().zip(pair.containment()) {
        *o = a[c];
    }
}

/// Piecewise-constant prolongation from the coarse to the fine mesh.
pub fn inject(pair: &NestedMeshPair, a: &CellField) -> Result<CellField> {
    check(pair.coarse().num_cells(), a.len())?;
    let mut out = CellField::zeros(pair.fine().num_cells());
    inject_into(pair, a, &mut out);
    Ok(out)
}

pub(crate) fn inject_adjoint_into(pair: &NestedMeshPair, b: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let fm = pair.fine().measures();
    for (f, &c) in pair.containment().iter().enumerate() {
        out[c] += b[f] * fm[f];
    }
    for (o, m) in out.iter_mut().zip(pair.coarse().measures()) {
        *o /= m;
    }
}

/// Area-weighted restriction, the adjoint of [`inject`].
pub fn inject_adjoint(pair: &NestedMeshPair, b: &CellField) -> Result<CellField> {
    check(pair.fine().num_cells(), b.len())?;
    let mut out = CellField::zeros(pair.coarse().num_cells());
    inject_adjoint_into(pair, b, &mut out);
    Ok(out)
}

pub(crate) fn reconstruct_into(mesh: &Mesh, a: &[f64], kind: Reconstruction, out: &mut [f64]) {
    for (o, f) in out.iter_mut().zip(mesh.internal_faces()) {
        let [k, l] = f.cells;
        *o = kind.mean(f, a[k], a[l]);
    }
}

/// Linear or harmonic mean of the two cell values on each diamond.
pub fn reconstruct(mesh: &Mesh, a: &CellField, kind: Reconstruction) -> Result<DiamondField> {
    check(mesh.num_cells(), a.len())?;
    if kind == Reconstruction::Harmonic {
        if let Some(cell) = a.iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeDensity { cell, value: a[cell] });
        }
    }
    let mut out = DiamondField::zeros(mesh.num_internal_faces());
    reconstruct_into(mesh, a, kind, &mut out);
    Ok(out)
}

pub(crate) fn reconstruct_diff_adjoint_into(
    mesh: &Mesh,
    a: &[f64],
    u: &[f64],
    kind: Reconstruction,
    out: &mut [f64],
) {
    out.fill(0.0);
    for (f, &uf) in mesh.internal_faces().iter().zip(u) {
        let [k, l] = f.cells;
        let [pk, pl] = kind.partials(f, a[k], a[l]);
        let w = uf * f.measure * f.dist;
        out[k] += pk * w;
        out[l] += pl * w;
    }
    for (o, m) in out.iter_mut().zip(mesh.measures()) {
        *o /= m;
    }
}

/// `(dR[a])^* u` with respect to the cell and diamond products.
pub fn reconstruct_diff_adjoint(
    mesh: &Mesh,
    a: &CellField,
    u: &DiamondField,
    kind: Reconstruction,
) -> Result<CellField> {
    check(mesh.num_cells(), a.len())?;
    check(mesh.num_internal_faces(), u.len())?;
    if kind == Reconstruction::Harmonic {
        require_positive(a)?;
    }
    let mut out = CellField::zeros(mesh.num_cells());
    reconstruct_diff_adjoint_into(mesh, a, u, kind, &mut out);
    Ok(out)
}

/// `I^* (dR[I a])^* u`, the coarse-grid reconstruction operator applied to `u`.
pub fn reconstruct_coarse_adjoint(
    pair: &NestedMeshPair,
    a: &CellField,
    u: &DiamondField,
    kind: Reconstruction,
) -> Result<CellField> {
    let fine_a = inject(pair, a)?;
    let fine = reconstruct_diff_adjoint(pair.fine(), &fine_a, u, kind)?;
    inject_adjoint(pair, &fine)
}

pub(crate) fn reconstruct_second_diff_action_into(
    mesh: &Mesh,
    a: &[f64],
    u: &[f64],
    da: &[f64],
    kind: Reconstruction,
    out: &mut [f64],
) {
    out.fill(0.0);
    if kind == Reconstruction::Linear {
        return;
    }
    for (f, &uf) in mesh.internal_faces().iter().zip(u) {
        let [k, l] = f.cells;
        let [hkk, hkl, hll] = kind.hessian(f, a[k], a[l]);
        let w = uf * f.measure * f.dist;
        out[k] += (hkk * da[k] + hkl * da[l]) * w;
        out[l] += (hkl * da[k] + hll * da[l]) * w;
    }
    for (o, m) in out.iter_mut().zip(mesh.measures()) {
        *o /= m;
    }
}

/// Directional derivative `d/de (dR[a + e da])^* u` at `e = 0`; zero for the
/// linear reconstruction.
pub fn reconstruct_second_diff_action(
    mesh: &Mesh,
    a: &CellField,
    u: &DiamondField,
    da: &CellField,
    kind: Reconstruction,
) -> Result<CellField> {
    check(mesh.num_cells(), a.len())?;
    check(mesh.num_cells(), da.len())?;
    check(mesh.num_internal_faces(), u.len())?;
    if kind == Reconstruction::Harmonic {
        require_positive(a)?;
    }
    let mut out = CellField::zeros(mesh.num_cells());
    reconstruct_second_diff_action_into(mesh, a, u, da, kind, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_acute_triangulation, generate_cartesian, subdivide_to_nested};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn two_cell_inner_products() {
        let m = generate_cartesian(2, 1).unwrap();
        assert_eq!(inner_cell(&m, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 5.5);
        assert_eq!(inner_cell(&m, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(inner_diamond(&m, &[1.0], &[1.0]).unwrap(), 0.5);
        let one = FluxField(vec![1.0]);
        assert_eq!(inner_flux(&m, &one, &one).unwrap(), 0.5);
        let neg = FluxField(vec![-1.0]);
        assert_eq!(inner_flux(&m, &neg, &neg).unwrap(), 0.5);
    }

    #[test]
    fn unit_square_mass() {
        let m = generate_cartesian(3, 5).unwrap();
        let one = vec![1.0; m.num_cells()];
        assert!((inner_cell(&m, &one, &one).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let m = generate_cartesian(2, 1).unwrap();
        assert!(matches!(inner_cell(&m, &[1.0], &[1.0, 2.0]), Err(Error::MeshMismatch { .. })));
    }

    #[test]
    fn two_cell_divergence_and_gradient() {
        let m = generate_cartesian(2, 1).unwrap();
        let div = divergence(&m, &FluxField(vec![3.0])).unwrap();
        assert_eq!(div.0, vec![6.0, -6.0]);
        let g = gradient(&m, &CellField(vec![0.0, 1.0])).unwrap();
        assert_eq!(g.0, vec![2.0]);
        let g = gradient(&m, &CellField(vec![7.0, 7.0])).unwrap();
        assert_eq!(g.0, vec![0.0]);
    }

    #[test]
    fn divergence_is_conservative() {
        let m = generate_acute_triangulation(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FluxField(random(&mut rng, m.num_internal_faces(), -1.0, 1.0));
        let div = divergence(&m, &f).unwrap();
        let total: f64 = div.iter().zip(m.measures()).map(|(d, w)| d * w).sum();
        let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(total.abs() <= 1e-14 * norm);
    }

    #[test]
    fn means_on_symmetric_face() {
        let m = generate_cartesian(2, 1).unwrap();
        let a = CellField(vec![1.0, 3.0]);
        assert_eq!(reconstruct(&m, &a, Reconstruction::Linear).unwrap().0, vec![2.0]);
        assert_eq!(reconstruct(&m, &a, Reconstruction::Harmonic).unwrap().0, vec![1.5]);
        let c = CellField(vec![0.7, 0.7]);
        for kind in [Reconstruction::Linear, Reconstruction::Harmonic] {
            assert!((reconstruct(&m, &c, kind).unwrap()[0] - 0.7).abs() < 1e-15);
        }
        let z = CellField(vec![2.0, 0.0]);
        assert_eq!(reconstruct(&m, &z, Reconstruction::Harmonic).unwrap().0, vec![0.0]);
    }

    #[test]
    fn harmonic_rejects_negative_and_zero_densities() {
        let m = generate_cartesian(2, 1).unwrap();
        let neg = CellField(vec![-1.0, 1.0]);
        assert!(matches!(
            reconstruct(&m, &neg, Reconstruction::Harmonic),
            Err(Error::NegativeDensity { cell: 0, .. })
        ));
        let zero = CellField(vec![1.0, 0.0]);
        let u = DiamondField(vec![1.0]);
        assert!(matches!(
            reconstruct_diff_adjoint(&m, &zero, &u, Reconstruction::Harmonic),
            Err(Error::ZeroDensity { cell: 1 })
        ));
        assert!(reconstruct_diff_adjoint(&m, &zero, &u, Reconstruction::Linear).is_ok());
    }

    #[test]
    fn linear_adjoint_of_ones_is_a_geometric_sum() {
        let m = generate_acute_triangulation(4).unwrap();
        let a = CellField::constant(m.num_cells(), 1.0);
        let u = DiamondField::constant(m.num_internal_faces(), 1.0);
        let out = reconstruct_diff_adjoint(&m, &a, &u, Reconstruction::Linear).unwrap();
        for c in 0..m.num_cells() {
            let expected: f64 = m
                .cell_faces(c)
                .iter()
                .map(|&fi| {
                    let f = &m.internal_faces()[fi];
                    let side = if f.cells[0] == c { 0 } else { 1 };
                    f.measure * f.dist_cell[side] / m.measures()[c]
                })
                .sum();
            assert!(rel(out[c], expected) < 1e-14);
        }
    }

    #[test]
    fn harmonic_adjoint_matches_linear_for_constant_density() {
        let m = generate_acute_triangulation(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = CellField::constant(m.num_cells(), 2.5);
        let u = DiamondField(random(&mut rng, m.num_internal_faces(), -1.0, 1.0));
        let lin = reconstruct_diff_adjoint(&m, &a, &u, Reconstruction::Linear).unwrap();
        let har = reconstruct_diff_adjoint(&m, &a, &u, Reconstruction::Harmonic).unwrap();
        for (x, y) in lin.iter().zip(har.iter()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn second_differential_vanishes_where_expected() {
        let m = generate_cartesian(3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = CellField(random(&mut rng, 9, 0.5, 2.0));
        let u = DiamondField(random(&mut rng, m.num_internal_faces(), -1.0, 1.0));
        let da = CellField(random(&mut rng, 9, -1.0, 1.0));
        let lin = reconstruct_second_diff_action(&m, &a, &u, &da, Reconstruction::Linear).unwrap();
        assert!(lin.iter().all(|&x| x == 0.0));
        let zero = CellField::zeros(9);
        let har = reconstruct_second_diff_action(&m, &a, &u, &zero, Reconstruction::Harmonic).unwrap();
        assert!(har.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn injection_on_nested_pair() {
        let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
        let nc = pair.coarse().num_cells();
        let a = CellField((0..nc).map(|c| c as f64).collect());
        let fa = inject(&pair, &a).unwrap();
        for (f, &c) in pair.containment().iter().enumerate() {
            assert_eq!(fa[f], c as f64);
        }
        let back = inject_adjoint(&pair, &fa).unwrap();
        for c in 0..nc {
            assert!((back[c] - c as f64).abs() <= 1e-13 * (1.0 + c as f64));
        }
        let mass_c = inner_cell(pair.coarse(), &a, &vec![1.0; nc]).unwrap();
        let mass_f = inner_cell(pair.fine(), &fa, &vec![1.0; fa.len()]).unwrap();
        assert!(rel(mass_c, mass_f) < 1e-13);
    }

    #[test]
    fn identical_pair_injection_is_identity() {
        let pair = NestedMeshPair::identical(generate_cartesian(3, 2).unwrap());
        let a = CellField(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(inject(&pair, &a).unwrap(), a);
        assert_eq!(inject_adjoint(&pair, &a).unwrap(), a);
        let u = DiamondField(vec![0.5; pair.fine().num_internal_faces()]);
        assert_eq!(
            reconstruct_coarse_adjoint(&pair, &a, &u, Reconstruction::Linear).unwrap(),
            reconstruct_diff_adjoint(pair.fine(), &a, &u, Reconstruction::Linear).unwrap()
        );
        let zero = DiamondField::zeros(u.len());
        assert!(reconstruct_coarse_adjoint(&pair, &a, &zero, Reconstruction::Harmonic)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }
}
