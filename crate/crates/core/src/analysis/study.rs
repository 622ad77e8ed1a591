//! Convergence studies over refinement levels.

use std::fmt::Write as _;
use std::thread;

use crate::error::{Error, Result};
use crate::mesh::{acute_rows_for_hbar, generate_acute_triangulation, subdivide_to_nested, NestedMeshPair};
use crate::ops::Reconstruction;
use crate::problem::TransportSetup;
use crate::solver::{solve, Solution, SolverParams};

use super::cases::AnalyticCase;
use super::metrics::{boundary_densities, errors_on, DensityErrorMesh, ErrorReport, Sampling};

/// Potential space of the discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Potentials on the subdivision of the density mesh into quadrilaterals.
    Enriched,
    /// Potentials and densities on the same triangulation.
    NonEnriched,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Enriched => "enriched",
            Scheme::NonEnriched => "non-enriched",
        }
    }

    /// Mesh pair on the acute triangulation of nominal size `hbar`.
    pub fn build_pair(self, hbar: f64) -> Result<NestedMeshPair> {
        let coarse = generate_acute_triangulation(acute_rows_for_hbar(hbar)?)?;
        match self {
            Scheme::Enriched => subdivide_to_nested(&coarse),
            Scheme::NonEnriched => Ok(NestedMeshPair::identical(coarse)),
        }
    }
}

/// One refinement level: nominal coarse mesh size and number of interior steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub hbar: f64,
    pub steps: usize,
}

/// The first `count` levels of the sequence `hbar = 0.25 / 2^i`, `N = 2^{i+1} - 1`.
pub fn default_levels(count: usize) -> Vec<Level> {
    (0..count).map(|i| Level { hbar: 0.25 / (1u32 << i) as f64, steps: (2usize << i) - 1 }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub hbar: f64,
    pub steps: usize,
    pub errors: ErrorReport,
    /// `log2(e_prev / e_cur)`; absent on the first row.
    pub rates: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub case: String,
    pub scheme: Scheme,
    pub kind: Reconstruction,
    pub rows: Vec<TableRow>,
}

pub const CSV_HEADER: &str = "hbar,N,eps_w2,rate_w2,eps_phi,rate_phi,eps_gphi,rate_gphi,eps_rho,rate_rho";

impl ConvergenceTable {
    pub fn from_reports(
        case: &str,
        scheme: Scheme,
        kind: Reconstruction,
        levels: &[Level],
        reports: &[ErrorReport],
    ) -> Self {
        let mut rows = Vec::with_capacity(levels.len());
        for (i, (l, e)) in levels.iter().zip(reports).enumerate() {
            let rates = (i > 0).then(|| {
                let (p, c) = (reports[i - 1].as_array(), e.as_array());
                [0, 1, 2, 3].map(|j| (p[j] / c[j]).log2())
            });
            rows.push(TableRow { hbar: l.hbar, steps: l.steps, errors: *e, rates });
        }
        Self { case: case.to_string(), scheme, kind, rows }
    }

    pub fn title(&self) -> String {
        format!("{} scheme with {} reconstruction ({})", self.scheme.name(), self.kind.name(), self.case)
    }

    /// CSV with [`CSV_HEADER`]; rates of the first row are empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            write!(s, "{},{}", r.hbar, r.steps).unwrap();
            for j in 0..4 {
                let rate = r.rates.map(|x| format!("{:.6}", x[j])).unwrap_or_default();
                write!(s, ",{:.6e},{}", r.errors.as_array()[j], rate).unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.title());
        writeln!(
            s,
            "{:>6} {:>3} | {:>10} {:>6} | {:>10} {:>6} | {:>10} {:>6} | {:>10} {:>6}",
            "hbar", "N", "eps_W2", "rate", "eps_phi", "rate", "eps_gphi", "rate", "eps_rho", "rate"
        )
        .unwrap();
        for r in &self.rows {
            write!(s, "{:>6.3} {:>3}", r.hbar, r.steps).unwrap();
            for j in 0..4 {
                let rate = r.rates.map(|x| format!("{:.3}", x[j])).unwrap_or_else(|| "/".into());
                write!(s, " | {:>10.3e} {:>6}", r.errors.as_array()[j], rate).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// One solved level.
#[derive(Clone, Debug)]
pub struct LevelRun {
    pub level: Level,
    pub setup: TransportSetup,
    pub solution: Solution,
    pub errors: ErrorReport,
    /// Boundary data had to be rescaled to equal masses.
    pub rescaled: bool,
}

#[derive(Clone, Debug)]
pub struct StudyOptions {
    pub params: SolverParams,
    pub sampling: Sampling,
    pub density_mesh: DensityErrorMesh,
    /// Levels solved concurrently; results do not depend on this value.
    pub threads: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            params: SolverParams::convergence(),
            sampling: Sampling::Center,
            density_mesh: DensityErrorMesh::Coarse,
            threads: 1,
        }
    }
}

/// Problem setup for one level.
pub fn level_setup(
    case: &AnalyticCase,
    level: Level,
    scheme: Scheme,
    kind: Reconstruction,
    sampling: Sampling,
) -> Result<(TransportSetup, bool)> {
    let pair = scheme.build_pair(level.hbar)?;
    let bc = boundary_densities(case, pair.coarse(), sampling)?;
    let setup = TransportSetup::new(pair, level.steps, kind, bc.rho_in, bc.rho_f)?;
    Ok((setup, bc.rescaled))
}

fn run_level(
    case: &AnalyticCase,
    level: Level,
    scheme: Scheme,
    kind: Reconstruction,
    opts: &StudyOptions,
) -> Result<LevelRun> {
    let (setup, rescaled) = level_setup(case, level, scheme, kind, opts.sampling)?;
    let solution = solve(&setup, &opts.params)?;
    let errors = errors_on(&solution, case, &setup, opts.density_mesh)?;
    Ok(LevelRun { level, setup, solution, errors, rescaled })
}

/// Runs `jobs` on at most `threads` workers and returns results in job order.
pub fn run_ordered<T: Send, R: Send>(jobs: Vec<T>, threads: usize, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    let threads = threads.max(1).min(jobs.len().max(1));
    if threads == 1 {
        return jobs.into_iter().map(f).collect();
    }
    let n = jobs.len();
    let queue = std::sync::Mutex::new(jobs.into_iter().enumerate());
    let results = std::sync::Mutex::new((0..n).map(|_| None).collect::<Vec<Option<R>>>());
    thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let job = queue.lock().expect("queue lock").next();
                let Some((i, job)) = job else { break };
                let r = f(job);
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("results lock").into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Solves every level and assembles the error table.
pub fn convergence_study(
    case: &AnalyticCase,
    levels: &[Level],
    scheme: Scheme,
    kind: Reconstruction,
    opts: &StudyOptions,
) -> Result<(ConvergenceTable, Vec<LevelRun>)> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("a study needs at least one level".into()));
    }
    if !case.has_exact() {
        return Err(Error::InvalidArgument(format!("case `{}` has no exact solution", case.name())));
    }
    let runs = run_ordered(levels.to_vec(), opts.threads, |l| run_level(case, l, scheme, kind, opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<ErrorReport> = runs.iter().map(|r| r.errors).collect();
    Ok((ConvergenceTable::from_reports(case.name(), scheme, kind, levels, &reports), runs))
}

/// The four scheme/reconstruction combinations in table order.
pub const COMBINATIONS: [(Scheme, Reconstruction); 4] = [
    (Scheme::NonEnriched, Reconstruction::Linear),
    (Scheme::NonEnriched, Reconstruction::Harmonic),
    (Scheme::Enriched, Reconstruction::Linear),
    (Scheme::Enriched, Reconstruction::Harmonic),
];
