use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use super::geom::{self, Point};
use super::{Mesh, PARTITION_TOL};
use crate::error::{Error, Result};

/// A coarse mesh carrying densities and a fine mesh carrying potentials,
/// every fine cell lying inside exactly one coarse cell.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedMeshPair {
    coarse: Mesh,
    fine: Mesh,
    containment: Vec<usize>,
    children: Vec<Vec<usize>>,
    identical: bool,
}

impl NestedMeshPair {
    /// The non-enriched configuration: both levels are the same mesh and the
    /// injection is the identity.
    pub fn identical(mesh: Mesh) -> Self {
        let n = mesh.num_cells();
        Self {
            fine: mesh.clone(),
            coarse: mesh,
            containment: (0..n).collect(),
            children: (0..n).map(|c| vec![c]).collect(),
            identical: true,
        }
    }

    /// Pairs two meshes through an explicit fine-to-coarse map and checks the
    /// nesting: fine cells inside their coarse cell, areas adding up.
    pub fn new(coarse: Mesh, fine: Mesh, containment: Vec<usize>) -> Result<Self> {
        if containment.len() != fine.num_cells() {
            return Err(Error::MeshMismatch {
                expected: fine.num_cells(),
                got: containment.len(),
            });
        }
        let mut children = vec![Vec::new(); coarse.num_cells()];
        for (f, &c) in containment.iter().enumerate() {
            if c >= coarse.num_cells() {
                return Err(Error::InvalidArgument(format!(
                    "fine cell {f} mapped to missing coarse cell {c}"
                )));
            }
            children[c].push(f);
        }
        for (c, kids) in children.iter().enumerate() {
            let sum: f64 = kids.iter().map(|&f| fine.measures()[f]).sum();
            let area = coarse.measures()[c];
            if kids.is_empty() || (sum - area).abs() > PARTITION_TOL * area.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "fine cells of coarse cell {c} cover {sum} instead of {area}"
                )));
            }
            let poly = coarse.cell_polygon(c);
            let tol = 1e-12 * coarse.cell_diameter(c);
            for &f in kids {
                for &v in &fine.cells()[f] {
                    if !geom::contains(&poly, fine.vertices()[v], tol) {
                        return Err(Error::InvalidArgument(format!(
                            "fine cell {f} leaves coarse cell {c}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            coarse,
            fine,
            containment,
            children,
            identical: false,
        })
    }

    pub fn coarse(&self) -> &Mesh {
        &self.coarse
    }

    pub fn fine(&self) -> &Mesh {
        &self.fine
    }

    /// Coarse cell containing each fine cell.
    pub fn containment(&self) -> &[usize] {
        &self.containment
    }

    pub fn children(&self, coarse_cell: usize) -> &[usize] {
        &self.children[coarse_cell]
    }

    pub fn is_identical(&self) -> bool {
        self.identical
    }
}

/// Splits every triangle of an acute circumcentered triangulation into three
/// quadrilaterals `(A, M_AB, O, M_CA)`, `O` the circumcenter and `M` the edge
/// midpoints.
///
/// Each quadrilateral has right angles at both midpoints, so it is inscribed
/// in the circle of diameter `AO` and its circumcenter is the midpoint of
/// `A` and `O`; that point is the fine cell center.
pub fn subdivide_to_nested(coarse: &Mesh) -> Result<NestedMeshPair> {
    let mut vertices: Vec<Point> = coarse.vertices().to_vec();
    let mut midpoint_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::with_capacity(3 * coarse.num_cells());
    let mut centers = Vec::with_capacity(3 * coarse.num_cells());
    let mut containment = Vec::with_capacity(3 * coarse.num_cells());

    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *midpoint_of.entry((a.min(b), a.max(b))).or_insert_with(|| {
            vertices.push(geom::midpoint(vertices[a], vertices[b]));
            vertices.len() - 1
        })
    };

    for (t, tri) in coarse.cells().iter().enumerate() {
        let &[a, b, c] = tri.as_slice() else {
            return Err(Error::InvalidArgument(format!("coarse cell {t} is not a triangle")));
        };
        let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
        let angle = geom::max_angle(pa, pb, pc);
        if angle >= FRAC_PI_2 {
            return Err(Error::NotAcute {
                cell: t,
                angle_deg: angle.to_degrees(),
            });
        }
        let o = coarse.centers()[t];
        let mab = midpoint(a, b, &mut vertices);
        let mbc = midpoint(b, c, &mut vertices);
        let mca = midpoint(c, a, &mut vertices);
        vertices.push(o);
        let io = vertices.len() - 1;
        for (corner, p, after, before) in [(a, pa, mab, mca), (b, pb, mbc, mab), (c, pc, mca, mbc)] {
            cells.push(vec![corner, after, io, before]);
            centers.push(geom::midpoint(p, o));
            containment.push(t);
        }
    }

    let fine = Mesh::new(vertices, cells, centers)?;
    NestedMeshPair::new(coarse.clone(), fine, containment)
}
