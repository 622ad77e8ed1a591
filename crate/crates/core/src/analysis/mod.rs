//! Reference cases, error metrics and convergence studies.

mod cases;
mod metrics;
mod study;

pub use cases::{builtin_cases, AnalyticCase};
pub use metrics::{
    boundary_densities, errors, errors_on, midpoint_slice, oscillation_index, sample_density_bc, sample_spacetime,
    smooth, total_variation, BoundaryData, DensityErrorMesh, ErrorReport, Sampling,
};
pub use study::{
    convergence_study, default_levels, level_setup, run_ordered, ConvergenceTable, Level, LevelRun, Scheme,
    StudyOptions, TableRow, COMBINATIONS, CSV_HEADER,
};


#[cfg(test)]
mod metrics_test_hook {
    pub fn average(mesh: &crate::mesh::Mesh, c: usize, f: &dyn Fn(crate::mesh::Point) -> f64) -> f64 {
        super::metrics::cell_average(&mesh.cell_polygon(c), f)
    }
}
