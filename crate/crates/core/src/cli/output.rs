//! Files written by `solve` and `study`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::mesh::{format_mesh, Mesh};
use crate::ops::CellField;
use crate::solver::SolverTrace;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest.iter() {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// Hash of the mesh in its saved text form.
pub fn mesh_hash(mesh: &Mesh) -> String {
    sha256_hex(format_mesh(mesh).as_bytes())
}

/// `cell,value` rows.
pub fn field_csv(field: &CellField) -> String {
    let mut s = String::from("cell,value\n");
    for (i, v) in field.iter().enumerate() {
        writeln!(s, "{i},{v:.17e}").unwrap();
    }
    s
}

pub const TRACE_HEADER: &str =
    "outer,mu,theta,accepted,newton_steps,residual,gap_bound,action,w2,min_rho,min_s,min_alpha";

pub fn trace_csv(trace: &SolverTrace) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for (i, r) in trace.outer.iter().enumerate() {
        let min_alpha = r.alphas.iter().copied().fold(f64::INFINITY, f64::min);
        let min_alpha = if min_alpha.is_finite() { format!("{min_alpha:.6e}") } else { String::new() };
        writeln!(
            s,
            "{},{:.6e},{},{},{},{:.6e},{:.6e},{:.12e},{:.12e},{:.6e},{:.6e},{}",
            i + 1,
            r.mu,
            r.theta,
            r.accepted,
            r.newton_steps,
            r.residual,
            r.gap_bound,
            r.action,
            r.w2,
            r.min_rho,
            r.min_s,
            min_alpha
        )
        .unwrap();
    }
    s
}

/// Legacy ASCII VTK unstructured grid of polygons with one cell scalar.
pub fn vtk_cells(mesh: &Mesh, name: &str, values: &[f64], title: &str) -> String {
    let mut s = String::from("# vtk DataFile Version 3.0\n");
    writeln!(s, "{}", title.replace('\n', " ")).unwrap();
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", mesh.vertices().len()).unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]).unwrap();
    }
    let size: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    writeln!(s, "CELLS {} {size}", mesh.num_cells()).unwrap();
    for c in mesh.cells() {
        write!(s, "{}", c.len()).unwrap();
        for v in c {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "CELL_TYPES {}", mesh.num_cells()).unwrap();
    for c in mesh.cells() {
        // VTK_TRIANGLE, VTK_QUAD, VTK_POLYGON
        let t = match c.len() {
            3 => 5,
            4 => 9,
            _ => 7,
        };
        writeln!(s, "{t}").unwrap();
    }
    writeln!(s, "CELL_DATA {}", mesh.num_cells()).unwrap();
    writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
    for v in values {
        writeln!(s, "{v:.17e}").unwrap();
    }
    s
}

/// ParaView file series index.
pub fn vtk_series(frames: &[(String, f64)]) -> String {
    let mut s = String::from("{\n  \"file-series-version\": \"1.0\",\n  \"files\": [\n");
    for (i, (name, t)) in frames.iter().enumerate() {
        let sep = if i + 1 < frames.len() { "," } else { "" };
        writeln!(s, "    {{ \"name\": \"{name}\", \"time\": {t} }}{sep}").unwrap();
    }
    s.push_str("  ]\n}\n");
    s
}

/// Run manifest: version, the resolved configuration and input hashes.
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self { lines: Vec::new() };
        m.push("program", env!("CARGO_PKG_NAME"));
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut s = String::new();
        for (k, v) in &self.lines {
            writeln!(s, "{k} = {v}").unwrap();
        }
        fs::write(dir.join("manifest.txt"), s)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cartesian;

    #[test]
    fn vtk_counts_match_mesh() {
        let m = generate_cartesian(2, 1).unwrap();
        let s = vtk_cells(&m, "rho", &[1.0, 2.0], "t = 0");
        assert!(s.contains("CELLS 2 10\n"));
        assert!(s.contains("CELL_TYPES 2\n9\n9\n"));
        assert!(s.ends_with("2.00000000000000000e0\n"));
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn series_lists_frames_in_order() {
        let s = vtk_series(&[("a.vtk".into(), 0.0), ("b.vtk".into(), 0.5)]);
        assert!(s.find("a.vtk").unwrap() < s.find("b.vtk").unwrap());
        assert!(s.contains("\"time\": 0.5 }\n"));
    }
}
