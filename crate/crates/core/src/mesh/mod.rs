//! Admissible TPFA meshes of planar polygonal domains.
//!
//! A [`Mesh`] is a polygonal partition together with one center per cell such
//! that the segment joining the centers of two neighbouring cells is
//! orthogonal to their common face. Faces are stored once, with a fixed
//! orientation `K -> L` and the unit normal pointing from `K` to `L`; every
//! signed quantity on faces (fluxes, gradients) uses this orientation.

mod generate;
pub mod geom;
mod io;
mod nested;
mod quality;

use std::collections::HashMap;

pub use generate::{acute_rows_for_hbar, generate_acute_triangulation, generate_cartesian};
pub use geom::Point;
pub use io::{format_mesh, load_mesh, load_nested, save_mesh, save_nested};
pub use nested::{subdivide_to_nested, NestedMeshPair};
pub use quality::{validate, MeshQuality};

use crate::error::{Error, Result};

/// Relative tolerance on the orthogonality of center segments to faces.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;
/// Relative tolerance on area partitions.
pub const PARTITION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct InternalFace {
    /// `[K, L]`; the normal points from `K` to `L`.
    pub cells: [usize; 2],
    /// End points, ordered counter-clockwise with respect to `K`.
    pub vertices: [usize; 2],
    /// Length of the face (`m_sigma`).
    pub measure: f64,
    /// Distance between the two cell centers (`d_sigma`).
    pub dist: f64,
    /// Distances from each center to the face line (`d_{K,sigma}`, `d_{L,sigma}`).
    pub dist_cell: [f64; 2],
    /// Unit normal, outward for `K`.
    pub normal: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    pub vertices: [usize; 2],
    pub measure: f64,
    pub dist_cell: f64,
    pub normal: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    centers: Vec<Point>,
    measures: Vec<f64>,
    internal_faces: Vec<InternalFace>,
    boundary_faces: Vec<BoundaryFace>,
    cell_faces: Vec<Vec<usize>>,
}

impl Mesh {
    /// Builds a mesh and its face geometry.
    ///
    /// Cells must be counter-clockwise polygons; the admissibility of the
    /// centers is not checked here (see [`validate`]).
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>, centers: Vec<Point>) -> Result<Self> {
        if centers.len() != cells.len() {
            return Err(Error::InvalidArgument(format!(
                "{} centers for {} cells",
                centers.len(),
                cells.len()
            )));
        }
        if cells.is_empty() {
            return Err(Error::InvalidArgument("mesh has no cells".into()));
        }
        let mut measures = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidArgument(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!("cell {c} references missing vertex {v}")));
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let area = geom::signed_area(&poly);
            if !(area > 0.0) {
                return Err(Error::InvalidArgument(format!("cell {c} is not counter-clockwise")));
            }
            measures.push(area);
        }

        // Faces are numbered in order of first appearance while sweeping the
        // cells, which makes the numbering a pure function of the input.
        let mut edge_owner: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
        let mut order: Vec<(usize, usize)> = Vec::new();
        let mut neighbour: HashMap<(usize, usize), usize> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..cell.len() {
                let a = cell[i];
                let b = cell[(i + 1) % cell.len()];
                let key = (a.min(b), a.max(b));
                if let Some(&(owner, _)) = edge_owner.get(&key) {
                    if neighbour.insert(key, c).is_some() || owner == c {
                        return Err(Error::InvalidArgument(format!(
                            "edge ({a}, {b}) is shared by more than two cells"
                        )));
                    }
                } else {
                    edge_owner.insert(key, (c, [a, b]));
                    order.push(key);
                }
            }
        }

        let mut internal_faces = Vec::new();
        let mut boundary_faces = Vec::new();
        let mut cell_faces = vec![Vec::new(); cells.len()];
        for key in order {
            let (k, [a, b]) = edge_owner[&key];
            let pa = vertices[a];
            let pb = vertices[b];
            let measure = geom::dist(pa, pb);
            let t = geom::sub(pb, pa);
            let normal = [t[1] / measure, -t[0] / measure];
            let dk = geom::dot(geom::sub(pa, centers[k]), normal);
            match neighbour.get(&key) {
                Some(&l) => {
                    let dl = geom::dot(geom::sub(centers[l], pa), normal);
                    cell_faces[k].push(internal_faces.len());
                    cell_faces[l].push(internal_faces.len());
                    internal_faces.push(InternalFace {
                        cells: [k, l],
                        vertices: [a, b],
                        measure,
                        dist: geom::dist(centers[k], centers[l]),
                        dist_cell: [dk, dl],
                        normal,
                    });
                }
                None => boundary_faces.push(BoundaryFace {
                    cell: k,
                    vertices: [a, b],
                    measure,
                    dist_cell: dk,
                    normal,
                }),
            }
        }

        Ok(Self {
            vertices,
            cells,
            centers,
            measures,
            internal_faces,
            boundary_faces,
            cell_faces,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_internal_faces(&self) -> usize {
        self.internal_faces.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn internal_faces(&self) -> &[InternalFace] {
        &self.internal_faces
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    /// Internal faces on the boundary of `cell`.
    pub fn cell_faces(&self, cell: usize) -> &[usize] {
        &self.cell_faces[cell]
    }

    pub fn cell_polygon(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_diameter(&self, cell: usize) -> f64 {
        geom::diameter(&self.cell_polygon(cell))
    }

    /// `h = max diam(K)`.
    pub fn size(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Total area `|Omega|`.
    pub fn area(&self) -> f64 {
        self.measures.iter().sum()
    }
}
