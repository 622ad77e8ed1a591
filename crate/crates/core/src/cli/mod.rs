//! The `wassersolve` command line: mesh generation and checks, single solves
//! with a full output bundle, and convergence studies.
//!
//! Every run flag can also be set in a `key = value` file passed with
//! `--config`; flags win over the file, the file wins over the defaults.
//! Exit codes: 0 success, 1 solver failure or rejected mesh, 2 usage or I/O.

mod config;
mod output;

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    boundary_densities, convergence_study, default_levels, errors, level_setup, AnalyticCase, DensityErrorMesh, Level,
    Sampling, Scheme, StudyOptions, COMBINATIONS,
};
use crate::error::Error;
use crate::mesh::{
    generate_acute_triangulation, generate_cartesian, load_mesh, save_mesh, save_nested, subdivide_to_nested, validate,
    NestedMeshPair,
};
use crate::ops::Reconstruction;
use crate::problem::TransportSetup;
use crate::solver::{solve, Delta0Mode, SolverParams};

pub use config::ConfigFile;
pub use output::{field_csv, mesh_hash, sha256_hex, trace_csv, vtk_cells, vtk_series, Manifest, TRACE_HEADER};

/// Environment variable read as the default worker count of `study` and as
/// an upper bound on it.
pub const THREADS_ENV: &str = "WASSERSOLVE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Inadmissible(String),
    #[error("{0}")]
    NotConverged(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Inadmissible(_) | CliError::NotConverged(_) => 1,
            CliError::Lib(e) => match e {
                Error::StepTooSmall { .. }
                | Error::InnerFailure { .. }
                | Error::MaxOuterIterations { .. }
                | Error::SingularSystem(_)
                | Error::NegativeDensity { .. }
                | Error::ZeroDensity { .. } => 1,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wassersolve", version, about = "Dynamic optimal transport on finite-volume meshes")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or check meshes.
    Mesh {
        #[command(subcommand)]
        command: MeshCommand,
    },
    /// Solve one transport problem and write the solution bundle.
    Solve(SolveArgs),
    /// Convergence study against a reference solution.
    Study(StudyArgs),
}

#[derive(Debug, Subcommand)]
enum MeshCommand {
    /// Write a generated mesh (or nested pair with `--subdivide`).
    Gen(GenArgs),
    /// Load a mesh and print its quality measures.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MeshKind {
    Cartesian,
    Acute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Enriched,
    NonEnriched,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Enriched => Scheme::Enriched,
            SchemeArg::NonEnriched => Scheme::NonEnriched,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Linear,
    Harmonic,
}

impl From<KindArg> for Reconstruction {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Linear => Reconstruction::Linear,
            KindArg::Harmonic => Reconstruction::Harmonic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SamplingArg {
    Center,
    Average,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Center => Sampling::Center,
            SamplingArg::Average => Sampling::Average,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DensityMeshArg {
    Coarse,
    Fine,
}

impl From<DensityMeshArg> for DensityErrorMesh {
    fn from(d: DensityMeshArg) -> Self {
        match d {
            DensityMeshArg::Coarse => DensityErrorMesh::Coarse,
            DensityMeshArg::Fine => DensityErrorMesh::Fine,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StopArg {
    Gap,
    Residual,
}

impl From<StopArg> for Delta0Mode {
    fn from(d: StopArg) -> Self {
        match d {
            StopArg::Gap => Delta0Mode::Gap,
            StopArg::Residual => Delta0Mode::Residual,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: MeshKind,
    /// Cells per side (cartesian) or rows of triangles (acute).
    #[arg(long)]
    n: usize,
    /// Rows of a cartesian grid, `n` by default.
    #[arg(long)]
    ny: Option<usize>,
    /// Split every triangle into three quadrilaterals and save the nested pair.
    #[arg(long)]
    subdivide: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    path: PathBuf,
}

/// Barrier method settings; unset values come from the config file or the
/// command's defaults.
#[derive(Debug, Args, Default)]
struct SolverFlags {
    /// Initial barrier weight.
    #[arg(long)]
    mu0: Option<f64>,
    /// Decay rate of the barrier weight.
    #[arg(long)]
    theta: Option<f64>,
    /// Outer tolerance.
    #[arg(long)]
    eps0: Option<f64>,
    /// Newton tolerance.
    #[arg(long)]
    eps_mu: Option<f64>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    theta_max: Option<f64>,
    /// Outer stopping quantity.
    #[arg(long, value_enum)]
    stop: Option<StopArg>,
    #[arg(long)]
    mu_floor: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// `key = value` file with defaults for any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// translation, compression, sinusoidal or cross.
    #[arg(long)]
    case: Option<String>,
    /// Compression factor of the compression case.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Nominal size of the generated acute triangulation.
    #[arg(long)]
    hbar: Option<f64>,
    /// Interior time steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Density mesh file used instead of the generated triangulation.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, value_enum)]
    sampling: Option<SamplingArg>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    /// Refinement levels, e.g. `1,2,3` or `1..3`. Level `i` has
    /// `hbar = 0.25 / 2^(i-1)` and `2^i - 1` interior steps.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Run all four scheme and reconstruction combinations.
    #[arg(long)]
    compare_schemes: bool,
    #[arg(long, value_enum)]
    sampling: Option<SamplingArg>,
    /// Mesh on which the density error is measured.
    #[arg(long, value_enum)]
    density_mesh: Option<DensityMeshArg>,
    /// Levels solved concurrently.
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for the CSV and text tables.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

/// Resolves one setting: flag, then config file, then nothing. The config key
/// is consumed even when the flag is set.
fn pick<T: FromStr>(flag: Option<T>, cfg: &mut ConfigFile, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: Display,
{
    let file = cfg.take(key)?;
    Ok(flag.or(file))
}

fn pick_enum<T: ValueEnum>(flag: Option<T>, cfg: &mut ConfigFile, key: &str) -> Result<Option<T>, CliError> {
    let file = cfg.take_with(key, |s| T::from_str(s, true))?;
    Ok(flag.or(file))
}

fn enum_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

impl SolverFlags {
    fn resolve(self, base: SolverParams, cfg: &mut ConfigFile, man: &mut Manifest) -> Result<SolverParams, CliError> {
        let mut p = base;
        macro_rules! set {
            ($field:ident, $key:literal) => {
                if let Some(v) = pick(self.$field, cfg, $key)? {
                    p.$field = v;
                }
                man.push($key, p.$field);
            };
        }
        set!(mu0, "mu0");
        set!(theta, "theta");
        set!(eps0, "eps0");
        set!(eps_mu, "eps-mu");
        set!(alpha_min, "alpha-min");
        set!(n_max, "n-max");
        set!(theta_max, "theta-max");
        set!(mu_floor, "mu-floor");
        set!(max_outer, "max-outer");
        if let Some(s) = pick_enum(self.stop, cfg, "stop")? {
            p.delta0_mode = s.into();
        }
        man.push("stop", if p.delta0_mode == Delta0Mode::Gap { "gap" } else { "residual" });
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

/// Parses `1,2,3`, `1..3` or a mix into 1-based level indices.
fn parse_levels(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad level list `{s}`"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("the level list is empty".into()));
    }
    if out.iter().any(|&i| i == 0 || i > 12) {
        return Err(CliError::Usage(format!("levels must lie in 1..=12, got `{s}`")));
    }
    Ok(out)
}

fn env_threads() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Lib(Error::Io(e)))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Lib(Error::Io(e)))
}

fn cmd_mesh_gen(a: GenArgs) -> Result<(), CliError> {
    if a.n == 0 || a.ny == Some(0) {
        return Err(CliError::Usage("mesh sizes must be positive".into()));
    }
    let mesh = match a.kind {
        MeshKind::Cartesian => generate_cartesian(a.n, a.ny.unwrap_or(a.n))?,
        MeshKind::Acute => {
            if a.ny.is_some() {
                return Err(CliError::Usage("--ny only applies to cartesian grids".into()));
            }
            generate_acute_triangulation(a.n)?
        }
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    if a.subdivide {
        if a.kind != MeshKind::Acute {
            return Err(CliError::Usage("--subdivide needs an acute triangulation".into()));
        }
        let pair = subdivide_to_nested(&mesh)?;
        for f in save_nested(&pair, &a.out)? {
            println!("wrote {}", f.display());
        }
        println!("{} coarse cells, {} fine cells", pair.coarse().num_cells(), pair.fine().num_cells());
    } else {
        save_mesh(&mesh, &a.out)?;
        println!("wrote {}", a.out.display());
        println!("{} cells, {} internal faces", mesh.num_cells(), mesh.num_internal_faces());
    }
    Ok(())
}

fn cmd_mesh_check(a: CheckArgs) -> Result<(), CliError> {
    let mesh = match load_mesh(&a.path) {
        Ok(m) => m,
        Err(e @ Error::AdmissibilityViolation { .. }) => return Err(CliError::Inadmissible(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let q = validate(&mesh).map_err(|e| CliError::Inadmissible(e.to_string()))?;
    println!("cells                    {}", mesh.num_cells());
    println!("internal faces           {}", mesh.num_internal_faces());
    println!("area                     {:.15}", mesh.area());
    println!("h                        {:.6e}", q.h);
    println!("zeta                     {:.6e}", q.zeta);
    println!("eta_h                    {:.6e}", q.eta_h);
    println!("center of mass defect    {:.6e}", q.max_center_of_mass_defect);
    println!("admissible               yes");
    Ok(())
}

fn case_from(case: Option<String>, c: Option<f64>, cfg: &mut ConfigFile, man: &mut Manifest) -> Result<AnalyticCase, CliError> {
    let name = pick(case, cfg, "case")?.unwrap_or_else(|| "translation".into());
    let c = pick(c, cfg, "c")?.unwrap_or(0.3);
    man.push("case", &name);
    if name == "compression" {
        man.push("c", c);
    }
    AnalyticCase::from_name(&name, c).map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_solve(a: SolveArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&a.config)?;
    let mut man = Manifest::new("solve");
    let case = case_from(a.case, a.c, &mut cfg, &mut man)?;
    let scheme = pick_enum(a.scheme, &mut cfg, "scheme")?.unwrap_or(SchemeArg::Enriched);
    let kind = pick_enum(a.kind, &mut cfg, "kind")?.unwrap_or(KindArg::Harmonic);
    let hbar: f64 = pick(a.hbar, &mut cfg, "hbar")?.unwrap_or(0.125);
    let steps: usize = pick(a.steps, &mut cfg, "steps")?.unwrap_or(3);
    let mesh_path: Option<PathBuf> = pick(a.mesh, &mut cfg, "mesh")?;
    let sampling = pick_enum(a.sampling, &mut cfg, "sampling")?.unwrap_or(SamplingArg::Center);
    let out: PathBuf = pick(a.out, &mut cfg, "out")?.ok_or_else(|| CliError::Usage("--out is required".into()))?;
    for (k, v) in [("scheme", enum_name(&scheme)), ("kind", enum_name(&kind)), ("sampling", enum_name(&sampling))] {
        man.push(k, v);
    }
    match &mesh_path {
        Some(p) => man.push("mesh", p.display()),
        None => man.push("hbar", hbar),
    }
    man.push("steps", steps);
    let params = a.solver.resolve(SolverParams::default(), &mut cfg, &mut man)?;
    cfg.finish()?;

    let setup = match &mesh_path {
        Some(p) => {
            let coarse = load_mesh(p)?;
            let pair = match scheme {
                SchemeArg::Enriched => subdivide_to_nested(&coarse)?,
                SchemeArg::NonEnriched => NestedMeshPair::identical(coarse),
            };
            let bc = boundary_densities(&case, pair.coarse(), sampling.into())?;
            TransportSetup::new(pair, steps, kind.into(), bc.rho_in, bc.rho_f)?
        }
        None => {
            if !(hbar > 0.0) {
                return Err(CliError::Usage("--hbar must be positive".into()));
            }
            level_setup(&case, Level { hbar, steps }, scheme.into(), kind.into(), sampling.into())?.0
        }
    };

    create_dir(&out)?;
    let solution = solve(&setup, &params)?;
    write_bundle(&out, &case, &setup, &solution, &mut man)?;
    println!(
        "W2 = {:.12e}  gap bound {:.3e}  mu {:.3e}  {} outer / {} Newton steps",
        solution.w2,
        solution.trace.outer.last().map_or(f64::NAN, |r| r.gap_bound),
        solution.mu,
        solution.trace.outer.len(),
        solution.trace.newton_steps()
    );
    println!("wrote {}", out.display());
    if !solution.converged {
        return Err(CliError::NotConverged(format!(
            "stopped at the barrier floor mu = {:e} before reaching eps0 = {:e}",
            solution.mu, params.eps0
        )));
    }
    Ok(())
}

fn write_bundle(
    out: &Path,
    case: &AnalyticCase,
    setup: &TransportSetup,
    solution: &crate::solver::Solution,
    man: &mut Manifest,
) -> Result<(), CliError> {
    let pair = setup.pair();
    let gap = solution.trace.outer.last().map_or(f64::NAN, |r| r.gap_bound);
    let mut w2 = format!(
        "w2 = {:.17e}\ngap_bound = {:.17e}\nmu = {:.17e}\nconverged = {}\n",
        solution.w2, gap, solution.mu, solution.converged
    );
    if let Some(exact) = case.w2_exact() {
        w2.push_str(&format!("w2_exact = {exact:.17e}\n"));
        let e = errors(solution, case, setup)?;
        w2.push_str(&format!(
            "eps_w2 = {:.6e}\neps_phi = {:.6e}\neps_grad_phi = {:.6e}\neps_rho = {:.6e}\n",
            e.eps_w2, e.eps_phi, e.eps_grad_phi, e.eps_rho
        ));
    }
    write(&out.join("w2.txt"), &w2)?;

    for (k, rho) in solution.state.rho.iter().enumerate() {
        write(&out.join(format!("rho_{k}.csv")), &field_csv(rho))?;
    }
    for (k, phi) in solution.state.phi.iter().enumerate() {
        write(&out.join(format!("phi_{}.csv", k + 1)), &field_csv(phi))?;
    }
    write(&out.join("trace.csv"), &trace_csv(&solution.trace))?;

    let frames_dir = out.join("frames");
    create_dir(&frames_dir)?;
    let tau = setup.tau();
    let mut frames = Vec::new();
    for (k, rho) in solution.state.rho.iter().enumerate() {
        let name = format!("rho_{k}.vtk");
        let t = k as f64 * tau;
        write(&frames_dir.join(&name), &vtk_cells(pair.coarse(), "rho", rho, &format!("density at t = {t}")))?;
        frames.push((format!("frames/{name}"), t));
    }
    write(&out.join("frames.vtk-series"), &vtk_series(&frames))?;

    save_nested(pair, out.join("mesh.txt"))?;
    man.push("coarse_mesh_sha256", mesh_hash(pair.coarse()));
    man.push("fine_mesh_sha256", mesh_hash(pair.fine()));
    man.push("converged", solution.converged);
    man.write(out)?;
    Ok(())
}

fn cmd_study(a: StudyArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&a.config)?;
    let mut man = Manifest::new("study");
    let case = case_from(a.case, a.c, &mut cfg, &mut man)?;
    let levels_spec: String = pick(a.levels, &mut cfg, "levels")?.unwrap_or_else(|| "1..3".into());
    let indices = parse_levels(&levels_spec)?;
    let scheme = pick_enum(a.scheme, &mut cfg, "scheme")?.unwrap_or(SchemeArg::Enriched);
    let kind = pick_enum(a.kind, &mut cfg, "kind")?.unwrap_or(KindArg::Harmonic);
    let compare = cfg.take::<bool>("compare-schemes")?.unwrap_or(false) || a.compare_schemes;
    let sampling = pick_enum(a.sampling, &mut cfg, "sampling")?.unwrap_or(SamplingArg::Center);
    let density_mesh = pick_enum(a.density_mesh, &mut cfg, "density-mesh")?.unwrap_or(DensityMeshArg::Coarse);
    let env = env_threads()?;
    let mut threads: usize = pick(a.threads, &mut cfg, "threads")?.or(env).unwrap_or(1);
    if let Some(cap) = env {
        threads = threads.min(cap);
    }
    if threads == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let out: Option<PathBuf> = pick(a.out, &mut cfg, "out")?;
    man.push("levels", &levels_spec);
    if compare {
        man.push("compare-schemes", true);
    } else {
        man.push("scheme", enum_name(&scheme));
        man.push("kind", enum_name(&kind));
    }
    man.push("sampling", enum_name(&sampling));
    man.push("density-mesh", enum_name(&density_mesh));
    let params = a.solver.resolve(SolverParams::convergence(), &mut cfg, &mut man)?;
    cfg.finish()?;

    let all = default_levels(*indices.iter().max().expect("nonempty"));
    let levels: Vec<Level> = indices.iter().map(|&i| all[i - 1]).collect();
    let combos: Vec<(Scheme, Reconstruction)> =
        if compare { COMBINATIONS.to_vec() } else { vec![(scheme.into(), kind.into())] };
    let opts = StudyOptions {
        params,
        sampling: sampling.into(),
        density_mesh: density_mesh.into(),
        threads,
    };
    if let Some(dir) = &out {
        create_dir(dir)?;
    }

    let mut unconverged = Vec::new();
    for (scheme, kind) in combos {
        let (table, runs) = convergence_study(&case, &levels, scheme, kind, &opts)?;
        print!("{}", table.to_text());
        println!();
        for r in &runs {
            if !r.solution.converged {
                unconverged.push(format!("{} {} hbar = {}", scheme.name(), kind.name(), r.level.hbar));
            }
        }
        if let Some(dir) = &out {
            let stem = format!("{}_{}_{}", case.name(), scheme.name(), kind.name());
            write(&dir.join(format!("{stem}.csv")), &table.to_csv())?;
            write(&dir.join(format!("{stem}.txt")), &table.to_text())?;
            for r in &runs {
                let tag = format!("{}_hbar{}", scheme.name(), r.level.hbar);
                man.push(&format!("{tag}_coarse_mesh_sha256"), mesh_hash(r.setup.pair().coarse()));
                man.push(&format!("{tag}_fine_mesh_sha256"), mesh_hash(r.setup.pair().fine()));
            }
        }
    }
    if let Some(dir) = &out {
        man.write(dir)?;
        println!("wrote {}", dir.display());
    }
    if !unconverged.is_empty() {
        return Err(CliError::NotConverged(format!("not converged: {}", unconverged.join("; "))));
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Mesh { command: MeshCommand::Gen(a) } => cmd_mesh_gen(a),
        Command::Mesh { command: MeshCommand::Check(a) } => cmd_mesh_check(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Study(a) => cmd_study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("1,2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_levels("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_levels("2, 4..5").unwrap(), vec![2, 4, 5]);
        for bad in ["", " , ", "0", "3..1", "a"] {
            assert_eq!(parse_levels(bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn flags_win_over_config() {
        let mut cfg = ConfigFile::parse("eps0 = 1e-4\ntheta = 0.5\n", None).unwrap();
        let mut man = Manifest::new("test");
        let flags = SolverFlags { eps0: Some(1e-8), ..Default::default() };
        let p = flags.resolve(SolverParams::default(), &mut cfg, &mut man).unwrap();
        assert_eq!(p.eps0, 1e-8);
        assert_eq!(p.theta, 0.5);
        assert_eq!(p.mu0, 1.0);
        cfg.finish().unwrap();
    }

    #[test]
    fn invalid_solver_settings_are_usage_errors() {
        let mut cfg = ConfigFile::default();
        let flags = SolverFlags { theta: Some(1.5), ..Default::default() };
        let e = flags.resolve(SolverParams::default(), &mut cfg, &mut Manifest::new("t")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn solver_failures_exit_with_one() {
        assert_eq!(CliError::Lib(Error::StepTooSmall { alpha: 0.0 }).exit_code(), 1);
        assert_eq!(CliError::Lib(Error::InvalidArgument(String::new())).exit_code(), 2);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "x");
        assert_eq!(CliError::Lib(Error::Io(io)).exit_code(), 2);
    }
}
