use super::geom;
use super::{Mesh, ADMISSIBILITY_TOL};
use crate::error::{Error, Result};

/// Measured regularity of a mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshQuality {
    /// Smallest `zeta` with `diam(K) <= zeta d_sigma <= zeta^2 diam(K)` and
    /// `dist(x_K, K) <= zeta diam(K)`.
    pub zeta: f64,
    /// Smallest `eta >= 0` with `sum_sigma m_sigma d_{K,sigma} n n^T <= m_K (1 + eta) Id` for every cell.
    pub eta_h: f64,
    /// Largest Frobenius distance between `sum_sigma m_sigma d_{K,sigma} n n^T / m_K` and `Id`.
    pub max_center_of_mass_defect: f64,
    pub h: f64,
    pub hbar: f64,
}

/// Checks orthogonality of every internal face and measures the regularity
/// constants. The face sums run over all faces of a cell, boundary included.
pub fn validate(mesh: &Mesh) -> Result<MeshQuality> {
    let mut offending = Vec::new();
    for (i, f) in mesh.internal_faces().iter().enumerate() {
        let [k, l] = f.cells;
        let d = geom::sub(mesh.centers()[l], mesh.centers()[k]);
        let tangent = [-f.normal[1], f.normal[0]];
        let ok = f.dist > 0.0
            && geom::dot(d, f.normal) > 0.0
            && geom::dot(d, tangent).abs() <= ADMISSIBILITY_TOL * f.dist;
        if !ok {
            offending.push(i);
        }
    }
    if !offending.is_empty() {
        return Err(Error::AdmissibilityViolation { faces: offending });
    }

    let n = mesh.num_cells();
    let mut tensors = vec![[0.0f64; 3]; n];
    let mut add = |cell: usize, w: f64, nrm: [f64; 2]| {
        let t = &mut tensors[cell];
        t[0] += w * nrm[0] * nrm[0];
        t[1] += w * nrm[0] * nrm[1];
        t[2] += w * nrm[1] * nrm[1];
    };
    for f in mesh.internal_faces() {
        add(f.cells[0], f.measure * f.dist_cell[0], f.normal);
        add(f.cells[1], f.measure * f.dist_cell[1], f.normal);
    }
    for f in mesh.boundary_faces() {
        add(f.cell, f.measure * f.dist_cell, f.normal);
    }

    let mut zeta = 0.0f64;
    let mut eta = 0.0f64;
    let mut defect = 0.0f64;
    let mut h = 0.0f64;
    for (c, tensor) in tensors.iter().enumerate().take(n) {
        let poly = mesh.cell_polygon(c);
        let diam = geom::diameter(&poly);
        h = h.max(diam);
        for &fi in mesh.cell_faces(c) {
            let d = mesh.internal_faces()[fi].dist;
            zeta = zeta.max(diam / d).max(d / diam);
        }
        zeta = zeta.max(geom::distance_to_polygon(mesh.centers()[c], &poly) / diam);

        let m = mesh.measures()[c];
        let [a, b, d] = tensor.map(|x| x / m);
        let (e0, e1) = (a - 1.0, d - 1.0);
        defect = defect.max((e0 * e0 + 2.0 * b * b + e1 * e1).sqrt());
        let lmax = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt();
        eta = eta.max(lmax - 1.0);
    }

    Ok(MeshQuality {
        zeta,
        eta_h: eta.max(0.0),
        max_center_of_mass_defect: defect,
        h,
        hbar: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_acute_triangulation, generate_cartesian};

    #[test]
    fn cartesian_centroids_satisfy_center_of_mass_condition() {
        let q = validate(&generate_cartesian(2, 2).unwrap()).unwrap();
        assert!(q.max_center_of_mass_defect <= 1e-12);
        assert!(q.eta_h <= 1e-12);
        assert!((q.zeta - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn circumcenter_triangulation_satisfies_center_of_mass_condition() {
        let q = validate(&generate_acute_triangulation(8).unwrap()).unwrap();
        assert!(q.max_center_of_mass_defect <= 1e-12, "{q:?}");
        assert!(q.eta_h <= 1e-12);
    }

    #[test]
    fn perturbed_center_breaks_admissibility() {
        let m = generate_cartesian(3, 3).unwrap();
        let mut centers = m.centers().to_vec();
        centers[4][0] += 0.01;
        centers[4][1] += 0.02;
        let bad = Mesh::new(m.vertices().to_vec(), m.cells().to_vec(), centers).unwrap();
        match validate(&bad) {
            Err(Error::AdmissibilityViolation { faces }) => assert!(!faces.is_empty()),
            other => panic!("expected admissibility violation, got {other:?}"),
        }
    }

    #[test]
    fn validate_is_pure() {
        let m = generate_acute_triangulation(6).unwrap();
        assert_eq!(validate(&m).unwrap(), validate(&m).unwrap());
    }
}
