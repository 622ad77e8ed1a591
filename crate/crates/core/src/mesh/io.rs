//! Line-oriented text format:
//!
//! ```text
//! tpfa-mesh 1
//! vertices <n>
//! <x> <y>            (n lines)
//! cells <m>
//! <i0> <i1> <i2> ... (m lines, counter-clockwise, 0-based)
//! centers <m>        (optional section)
//! <x> <y>            (m lines)
//! ```
//!
//! Blank lines and `#` comments are ignored. Without a `centers` section,
//! triangles get their circumcenter, axis-aligned rectangles their centroid
//! and other cocircular polygons their circumcenter.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::geom::{self, Point};
use super::{validate, Mesh, NestedMeshPair};
use crate::error::{Error, Result};

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            path,
            inner: it.peekable(),
            last: 0,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(self.err(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.inner.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    fn section(&mut self, keyword: &str) -> Result<(usize, usize)> {
        let (n, line) = self.next(keyword)?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(self.err(n, format!("expected `{keyword} <count>`")));
        }
        let count = it
            .next()
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or_else(|| self.err(n, format!("bad count in `{keyword}` header")))?;
        if it.next().is_some() {
            return Err(self.err(n, "trailing tokens"));
        }
        Ok((n, count))
    }

    fn point(&mut self) -> Result<(usize, Point)> {
        let (n, line) = self.next("a coordinate pair")?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(self.err(n, "expected two coordinates"));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| self.err(n, format!("bad number `{s}`")))
        };
        Ok((n, [parse(vals[0])?, parse(vals[1])?]))
    }
}

fn default_center(poly: &[Point]) -> Option<Point> {
    if poly.len() == 4 {
        let axis = |a: Point, b: Point| a[0] == b[0] || a[1] == b[1];
        if (0..4).all(|i| axis(poly[i], poly[(i + 1) % 4])) {
            return Some(geom::centroid(poly));
        }
    }
    let o = geom::circumcenter(poly[0], poly[1], poly[2])?;
    let r = geom::dist(o, poly[0]);
    poly.iter()
        .all(|&p| (geom::dist(o, p) - r).abs() <= 1e-10 * r)
        .then_some(o)
}

/// Reads a mesh, recomputes its face geometry and checks admissibility.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = Lines::new(path, &text);

    let (n, header) = lines.next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["tpfa-mesh", "1"] {
        return Err(lines.err(n, "expected header `tpfa-mesh 1`"));
    }

    let (_, nv) = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(lines.point()?.1);
    }

    let (_, nc) = lines.section("cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut cell_lines = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (n, line) = lines.next("a cell")?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| lines.err(n, format!("bad vertex index `{s}`"))))
            .collect::<Result<_>>()?;
        if idx.len() < 3 {
            return Err(lines.err(n, "a cell needs at least 3 vertices"));
        }
        if let Some(&v) = idx.iter().find(|&&v| v >= nv) {
            return Err(lines.err(n, format!("vertex index {v} out of range")));
        }
        let poly: Vec<Point> = idx.iter().map(|&v| vertices[v]).collect();
        if !(geom::signed_area(&poly) > 0.0) {
            return Err(lines.err(n, "cell is not counter-clockwise"));
        }
        cells.push(idx);
        cell_lines.push(n);
    }

    let centers = if lines.peek_keyword() == Some("centers") {
        let (n, count) = lines.section("centers")?;
        if count != nc {
            return Err(lines.err(n, format!("{count} centers for {nc} cells")));
        }
        let mut centers = Vec::with_capacity(nc);
        for _ in 0..nc {
            centers.push(lines.point()?.1);
        }
        centers
    } else {
        let mut centers = Vec::with_capacity(nc);
        for (c, cell) in cells.iter().enumerate() {
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let center = default_center(&poly)
                .ok_or_else(|| lines.err(cell_lines[c], "cell needs an explicit center"))?;
            centers.push(center);
        }
        centers
    };

    if let Some((n, _)) = lines.inner.next() {
        return Err(lines.err(n, "unexpected trailing content"));
    }

    let mesh = Mesh::new(vertices, cells, centers)?;
    validate(&mesh)?;
    Ok(mesh)
}

/// Text form written by [`save_mesh`].
pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("tpfa-mesh 1\n");
    let _ = writeln!(out, "vertices {}", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e}", p[0], p[1]);
    }
    let _ = writeln!(out, "cells {}", mesh.num_cells());
    for cell in mesh.cells() {
        let row: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let _ = writeln!(out, "centers {}", mesh.num_cells());
    for p in mesh.centers() {
        let _ = writeln!(out, "{:.16e} {:.16e}", p[0], p[1]);
    }
    out
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_mesh(mesh))?;
    Ok(())
}

fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "txt".into());
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

/// Writes `<stem>.coarse.<ext>`, `<stem>.fine.<ext>` and `<stem>.map.<ext>`
/// and returns their paths.
pub fn save_nested(pair: &NestedMeshPair, path: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
    let path = path.as_ref();
    let files = [sibling(path, "coarse"), sibling(path, "fine"), sibling(path, "map")];
    save_mesh(pair.coarse(), &files[0])?;
    save_mesh(pair.fine(), &files[1])?;
    let mut map = String::from("tpfa-map 1\n");
    let _ = writeln!(map, "cells {}", pair.containment().len());
    for c in pair.containment() {
        let _ = writeln!(map, "{c}");
    }
    fs::write(&files[2], map)?;
    Ok(files)
}

pub fn load_nested(path: impl AsRef<Path>) -> Result<NestedMeshPair> {
    let path = path.as_ref();
    let coarse = load_mesh(sibling(path, "coarse"))?;
    let fine = load_mesh(sibling(path, "fine"))?;
    let map_path = sibling(path, "map");
    let text = fs::read_to_string(&map_path)?;
    let mut lines = Lines::new(&map_path, &text);
    let (n, header) = lines.next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["tpfa-map", "1"] {
        return Err(lines.err(n, "expected header `tpfa-map 1`"));
    }
    let (_, count) = lines.section("cells")?;
    let mut containment = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, line) = lines.next("a coarse cell index")?;
        containment.push(line.parse::<usize>().map_err(|_| lines.err(n, "bad coarse cell index"))?);
    }
    NestedMeshPair::new(coarse, fine, containment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_acute_triangulation, generate_cartesian, subdivide_to_nested};

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for mesh in [generate_cartesian(2, 1).unwrap(), generate_acute_triangulation(6).unwrap()] {
            let p = dir.path().join("m.txt");
            save_mesh(&mesh, &p).unwrap();
            assert_eq!(load_mesh(&p).unwrap(), mesh);
        }
    }

    #[test]
    fn nested_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
        let files = save_nested(&pair, dir.path().join("m.txt")).unwrap();
        assert!(files[0].ends_with("m.coarse.txt"));
        assert!(files[2].ends_with("m.map.txt"));
        assert_eq!(load_nested(dir.path().join("m.txt")).unwrap(), pair);
    }

    #[test]
    fn clockwise_cell_reports_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        fs::write(
            &p,
            "tpfa-mesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 2 1\n",
        )
        .unwrap();
        match load_mesh(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn garbage_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        fs::write(&p, "tpfa-mesh 1\nvertices 2\n0 zero\n").unwrap();
        assert!(matches!(load_mesh(&p), Err(Error::Parse { line: 3, .. })));
        fs::write(&p, "not a mesh\n").unwrap();
        assert!(matches!(load_mesh(&p), Err(Error::Parse { line: 1, .. })));
    }
}
