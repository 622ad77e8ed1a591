use std::path::PathBuf;

use proptest::prelude::*;
use wassersolve::mesh::geom::{circumcenter, dist, dot, midpoint, sub};
use wassersolve::mesh::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn check_admissible(mesh: &Mesh) {
    let area: f64 = mesh.measures().iter().sum();
    assert!((area - mesh.area()).abs() <= 1e-12 * area);
    for f in mesh.internal_faces() {
        let [k, l] = f.cells;
        let d = sub(mesh.centers()[l], mesh.centers()[k]);
        let t = [-f.normal[1], f.normal[0]];
        assert!(dot(d, t).abs() <= 1e-10 * f.dist);
        assert!(f.dist > 0.0);
        assert!((f.dist_cell[0] + f.dist_cell[1] - f.dist).abs() <= 1e-12 * f.dist);
    }
}

#[test]
fn two_triangle_fixture_loads() {
    let mesh = load_mesh(fixture("two_acute.mesh")).unwrap();
    assert_eq!(mesh.num_cells(), 2);
    assert_eq!(mesh.num_internal_faces(), 1);
    check_admissible(&mesh);
    let q = validate(&mesh).unwrap();
    assert!(q.max_center_of_mass_defect <= 1e-12, "{q:?}");

    let pair = subdivide_to_nested(&mesh).unwrap();
    assert_eq!(pair.fine().num_cells(), 6);
    check_admissible(pair.fine());
    // fine centers are the midpoints of (coarse vertex, coarse circumcenter)
    for c in 0..2 {
        let o = mesh.centers()[c];
        let corners: Vec<_> = mesh.cells()[c].iter().map(|&v| mesh.vertices()[v]).collect();
        for &f in pair.children(c) {
            let x = pair.fine().centers()[f];
            assert!(corners.iter().any(|&a| dist(midpoint(a, o), x) <= 1e-14));
        }
    }
}

#[test]
fn nested_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pair = subdivide_to_nested(&generate_acute_triangulation(4).unwrap()).unwrap();
    let base = dir.path().join("level");
    save_nested(&pair, &base).unwrap();
    let back = load_nested(&base).unwrap();
    assert_eq!(back.containment(), pair.containment());
    assert_eq!(back.fine().centers(), pair.fine().centers());
}

#[test]
fn loader_reports_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.mesh");
    std::fs::write(&path, "tpfa-mesh 1\nvertices 3\n0 0\n1 0\n").unwrap();
    assert!(matches!(load_mesh(&path), Err(wassersolve::Error::Parse { .. })));
    assert!(matches!(load_mesh(dir.path().join("missing.mesh")), Err(wassersolve::Error::Io { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn acute_family_is_admissible_and_nests(half_rows in 2usize..9) {
        let coarse = generate_acute_triangulation(2 * half_rows).unwrap();
        check_admissible(&coarse);
        for t in coarse.cells() {
            let p: Vec<_> = t.iter().map(|&v| coarse.vertices()[v]).collect();
            prop_assert!(geom::max_angle(p[0], p[1], p[2]) < std::f64::consts::FRAC_PI_2);
        }
        let q = validate(&coarse).unwrap();
        prop_assert!(q.max_center_of_mass_defect <= 1e-12);

        let pair = subdivide_to_nested(&coarse).unwrap();
        check_admissible(pair.fine());
        prop_assert!(validate(pair.fine()).unwrap().max_center_of_mass_defect <= 1e-12);
        for c in 0..pair.fine().num_cells() {
            let x = pair.fine().centers()[c];
            let poly = pair.fine().cell_polygon(c);
            let r = dist(poly[0], x);
            for p in &poly {
                prop_assert!((dist(*p, x) - r).abs() <= 1e-10 * r);
            }
        }
        for c in 0..coarse.num_cells() {
            let s: f64 = pair.children(c).iter().map(|&f| pair.fine().measures()[f]).sum();
            prop_assert!((s - coarse.measures()[c]).abs() <= 1e-12 * coarse.measures()[c]);
        }
        prop_assert_eq!(validate(&coarse).unwrap(), q);
    }

    #[test]
    fn cartesian_grids_are_admissible(nx in 1usize..9, ny in 1usize..9) {
        let m = generate_cartesian(nx, ny).unwrap();
        check_admissible(&m);
        prop_assert_eq!(m.num_internal_faces(), (nx - 1) * ny + nx * (ny - 1));
        prop_assert!(validate(&m).unwrap().max_center_of_mass_defect <= 1e-12);
    }
}

#[test]
fn circumcenters_of_generated_triangles_are_interior() {
    let m = generate_acute_triangulation(6).unwrap();
    for (c, t) in m.cells().iter().enumerate() {
        let p: Vec<_> = t.iter().map(|&v| m.vertices()[v]).collect();
        let o = circumcenter(p[0], p[1], p[2]).unwrap();
        assert!(dist(o, m.centers()[c]) <= 1e-14);
        assert!(geom::contains(&p, o, 0.0));
    }
}
