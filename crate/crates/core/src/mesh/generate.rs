use super::geom::{self, Point};
use super::Mesh;
use crate::error::{Error, Result};

/// Uniform `nx x ny` grid of the unit square with centroid centers.
pub fn generate_cartesian(nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("cartesian grid needs nx, ny >= 1".into()));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64 / nx as f64, j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            centers.push([
                (i as f64 + 0.5) / nx as f64,
                (j as f64 + 0.5) / ny as f64,
            ]);
        }
    }
    Mesh::new(vertices, cells, centers)
}

/// Structured all-acute triangulation of the unit square.
///
/// `rows` vertical strips of width `1/rows` are filled with isoceles
/// triangles of base `1/m`, `m = 3 rows / 4`, alternating apex directions.
/// On every other vertex column the two nodes next to the horizontal sides
/// are pulled inwards to `b = (h + s)/2` so that the triangles touching those
/// sides, which span two strips, stay acute. Cell centers are the
/// circumcenters. `rows` must be even and at least 4.
///
/// The strips run along `y`, so a compression along `x` crosses them.
pub fn generate_acute_triangulation(rows: usize) -> Result<Mesh> {
    if rows < 4 || !rows.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "acute triangulation needs an even row count >= 4, got {rows}"
        )));
    }
    let m = 3 * rows / 4;
    let h = 1.0 / rows as f64;
    let s = 1.0 / m as f64;
    let b = 0.5 * (h + s);

    let mut vertices: Vec<Point> = Vec::new();
    // row_nodes[j] lists the vertex ids of vertex column j from bottom to top.
    let mut row_nodes: Vec<Vec<usize>> = Vec::with_capacity(rows + 1);
    for j in 0..=rows {
        let across = if j == rows { 1.0 } else { j as f64 * h };
        let xs: Vec<f64> = if j % 2 == 0 {
            (0..=m).map(|i| if i == m { 1.0 } else { i as f64 * s }).collect()
        } else {
            (0..m)
                .map(|i| match i {
                    0 => b,
                    _ if i == m - 1 => 1.0 - b,
                    _ => (i as f64 + 0.5) * s,
                })
                .collect()
        };
        let ids = xs
            .into_iter()
            .map(|along| {
                vertices.push([across, along]);
                vertices.len() - 1
            })
            .collect();
        row_nodes.push(ids);
    }

    let mut cells: Vec<Vec<usize>> = Vec::with_capacity(2 * m * rows);
    let mut push = |tri: [usize; 3], vertices: &[Point]| {
        let [a, b, c] = tri;
        if geom::cross(geom::sub(vertices[b], vertices[a]), geom::sub(vertices[c], vertices[a])) > 0.0 {
            cells.push(vec![a, b, c]);
        } else {
            cells.push(vec![a, c, b]);
        }
    };
    for j in (1..rows).step_by(2) {
        let odd = &row_nodes[j];
        for even in [&row_nodes[j - 1], &row_nodes[j + 1]] {
            for i in 0..m {
                push([even[i], even[i + 1], odd[i]], &vertices);
            }
            for i in 0..m - 1 {
                push([odd[i], even[i + 1], odd[i + 1]], &vertices);
            }
        }
        push([row_nodes[j - 1][0], odd[0], row_nodes[j + 1][0]], &vertices);
        push([row_nodes[j - 1][m], row_nodes[j + 1][m], odd[m - 1]], &vertices);
    }

    let centers = cells
        .iter()
        .map(|c| {
            geom::circumcenter(vertices[c[0]], vertices[c[1]], vertices[c[2]])
                .expect("generated triangles are non-degenerate")
        })
        .collect();
    Mesh::new(vertices, cells, centers)
}

/// Even row count whose largest (boundary) triangles have the given nominal
/// coarse size: `h = 0.25, 0.125, 0.0625` map to 6, 12 and 24 rows, which
/// gives 48, 216 and 864 triangles.
pub fn acute_rows_for_hbar(hbar: f64) -> Result<usize> {
    if !(hbar > 0.0 && hbar <= 0.5) {
        return Err(Error::InvalidArgument(format!("mesh size {hbar} outside (0, 0.5]")));
    }
    let r = (1.5 / hbar).round() as usize;
    Ok((r + r % 2).max(4))
}
