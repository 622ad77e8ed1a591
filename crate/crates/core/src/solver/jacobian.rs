//! Sparse Jacobian of the barrier optimality system.
//!
//! Unknowns are ordered as all potential slices (fine), then the interior
//! density slices (coarse), then one bordering multiplier that removes the
//! additive-constant nullspace of the potential. Rows follow the same
//! layout: continuity rows mirror the potential columns, Hamilton-Jacobi rows
//! mirror the density columns. The slack is eliminated through the
//! complementarity row before assembly.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::sparse::linalg::{cholesky, lu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Conj, Mat, Par, Side};

use crate::error::{Error, Result};
use crate::ops::Reconstruction;
use crate::problem::{SliceData, SpaceTimeState, TransportSetup};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub nf: usize,
    pub nc: usize,
    pub steps: usize,
}

impl Layout {
    pub fn new(setup: &TransportSetup) -> Self {
        Self {
            nf: setup.pair().fine().num_cells(),
            nc: setup.pair().coarse().num_cells(),
            steps: setup.steps(),
        }
    }

    /// Potential slice `k` in `1..=N+1`, also the continuity row.
    #[inline]
    pub fn phi(&self, k: usize, i: usize) -> usize {
        (k - 1) * self.nf + i
    }

    /// Interior density slice `k` in `1..=N`, also the Hamilton-Jacobi row.
    #[inline]
    pub fn rho(&self, k: usize, c: usize) -> usize {
        (self.steps + 1) * self.nf + (k - 1) * self.nc + c
    }

    #[inline]
    pub fn border(&self) -> usize {
        (self.steps + 1) * self.nf + self.steps * self.nc
    }

    pub fn size(&self) -> usize {
        self.border() + 1
    }

    fn interior(&self, k: usize) -> bool {
        k >= 1 && k <= self.steps
    }
}

/// Assembled entries in a value-independent order.
pub(crate) struct Entries {
    pub idx: Vec<Pair<usize, usize>>,
    pub val: Vec<f64>,
}

impl Entries {
    fn with_capacity(n: usize) -> Self {
        Self { idx: Vec::with_capacity(n), val: Vec::with_capacity(n) }
    }

    #[inline]
    fn push(&mut self, row: usize, col: usize, v: f64) {
        self.idx.push(Pair::new(row, col));
        self.val.push(v);
    }

    /// `y += A x` over all entries except the bordering row and column.
    pub fn apply(&self, layout: &Layout, x: &[f64], y: &mut [f64]) {
        let b = layout.border();
        for (p, v) in self.idx.iter().zip(&self.val) {
            if p.row != b && p.col != b {
                y[p.row] += v * x[p.col];
            }
        }
    }
}

/// Jacobian of continuity and Hamilton-Jacobi rows with respect to
/// `(phi, rho)`. With `eliminate` the slack is folded in as `-s/rho` on the
/// Hamilton-Jacobi diagonal and the bordering row/column is appended.
pub(crate) fn assemble(
    setup: &TransportSetup,
    state: &SpaceTimeState,
    data: &SliceData,
    eliminate: bool,
) -> Entries {
    let layout = Layout::new(setup);
    let pair = setup.pair();
    let (coarse, fine) = (pair.coarse(), pair.fine());
    let (mc, mf) = (coarse.measures(), fine.measures());
    let cont = pair.containment();
    let kind = setup.kind();
    let harmonic = kind == Reconstruction::Harmonic;
    let n = layout.steps;
    let tau = setup.tau();
    let faces = fine.internal_faces();

    let per_face = 4 + if n > 0 { 8 + 16 + if harmonic { 32 } else { 0 } } else { 0 };
    let mut e = Entries::with_capacity((n + 1) * (faces.len() * per_face + 3 * layout.nf) + layout.nf + 4 * n * layout.nc);

    for k in 1..=n + 1 {
        let (a, g, r) = (&data.mid[k - 1], &data.grad[k - 1], &data.recon[k - 1]);
        let dens: Vec<usize> = [k, k - 1].into_iter().filter(|&j| layout.interior(j)).collect();
        let hj: Vec<usize> = [k - 1, k].into_iter().filter(|&h| layout.interior(h)).collect();

        for (fi, f) in faces.iter().enumerate() {
            let [ck, cl] = f.cells;
            let (pk, pl) = (cont[ck], cont[cl]);
            let (rk, rl) = (layout.phi(k, ck), layout.phi(k, cl));

            // continuity: div(r grad dphi)
            let t = f.measure * r[fi] / f.dist;
            e.push(rk, rk, -t / mf[ck]);
            e.push(rk, rl, t / mf[ck]);
            e.push(rl, rk, t / mf[cl]);
            e.push(rl, rl, -t / mf[cl]);

            if n == 0 {
                continue;
            }
            let [dk, dl] = kind.partials(f, a[ck], a[cl]);

            // continuity: div(dR[a](I drho / 2) g)
            let q = 0.5 * f.measure * g[fi];
            for &j in &dens {
                e.push(rk, layout.rho(j, pk), q * dk / mf[ck]);
                e.push(rk, layout.rho(j, pl), q * dl / mf[ck]);
                e.push(rl, layout.rho(j, pk), -q * dk / mf[cl]);
                e.push(rl, layout.rho(j, pl), -q * dl / mf[cl]);
            }

            // Hamilton-Jacobi: 1/2 I^* dR[a]^* (g grad dphi)
            let wk = 0.5 * dk * g[fi] * f.measure / mc[pk];
            let wl = 0.5 * dl * g[fi] * f.measure / mc[pl];
            for &h in &hj {
                let (hk, hl) = (layout.rho(h, pk), layout.rho(h, pl));
                e.push(hk, rl, wk);
                e.push(hk, rk, -wk);
                e.push(hl, rl, wl);
                e.push(hl, rk, -wl);
            }

            // Hamilton-Jacobi: 1/4 I^* d2R[a](g^2, I drho / 2)
            if harmonic {
                let [hkk, hkl, hll] = kind.hessian(f, a[ck], a[cl]);
                let w = g[fi] * g[fi] * f.measure * f.dist / 8.0;
                for &h in &hj {
                    let (hk, hl) = (layout.rho(h, pk), layout.rho(h, pl));
                    for &j in &dens {
                        let (jk, jl) = (layout.rho(j, pk), layout.rho(j, pl));
                        e.push(hk, jk, hkk * w / mc[pk]);
                        e.push(hk, jl, hkl * w / mc[pk]);
                        e.push(hl, jk, hkl * w / mc[pl]);
                        e.push(hl, jl, hll * w / mc[pl]);
                    }
                }
            }
        }

        for i in 0..layout.nf {
            let row = layout.phi(k, i);
            let c = cont[i];
            // continuity: I (rho^k - rho^{k-1}) / tau
            if layout.interior(k) {
                e.push(row, layout.rho(k, c), 1.0 / tau);
            }
            if layout.interior(k - 1) {
                e.push(row, layout.rho(k - 1, c), -1.0 / tau);
            }
            // Hamilton-Jacobi: I^* (phi^{h+1} - phi^h) / tau
            let w = mf[i] / (mc[c] * tau);
            if layout.interior(k - 1) {
                e.push(layout.rho(k - 1, c), row, w);
            }
            if layout.interior(k) {
                e.push(layout.rho(k, c), row, -w);
            }
            if eliminate {
                e.push(row, layout.border(), mf[i]);
            }
        }
    }

    if eliminate {
        for k in 1..=n {
            for c in 0..layout.nc {
                let v = -state.s[k - 1][c] / state.rho[k][c];
                e.push(layout.rho(k, c), layout.rho(k, c), v);
            }
        }
        for (i, &v) in mf.iter().enumerate().take(layout.nf) {
            e.push(layout.border(), layout.phi(1, i), v);
        }
    }
    e
}

/// Row scaling that makes the reduced Jacobian symmetric: continuity rows by
/// `tau |cell|`, Hamilton-Jacobi rows by `-tau |cell|`. The scaled matrix is
/// quasi-definite (negative semidefinite potential block, positive definite
/// density block).
pub(crate) fn row_weights(setup: &TransportSetup) -> Vec<f64> {
    let l = Layout::new(setup);
    let tau = setup.tau();
    let (mf, mc) = (setup.pair().fine().measures(), setup.pair().coarse().measures());
    let mut w = vec![0.0; l.border()];
    for k in 1..=l.steps + 1 {
        for i in 0..l.nf {
            w[l.phi(k, i)] = tau * mf[i];
        }
    }
    for k in 1..=l.steps {
        for c in 0..l.nc {
            w[l.rho(k, c)] = -tau * mc[c];
        }
    }
    w
}

fn singular(msg: impl std::fmt::Display) -> Error {
    Error::SingularSystem(msg.to_string())
}

const REFINE_SWEEPS: usize = 4;
const REFINE_TOL: f64 = 1e-12;
const FALLBACK_TOL: f64 = 1e-9;

/// Newton system solver. The symmetric form is factored with `LDL^T` under a
/// minimum-degree ordering and polished by iterative refinement; if that
/// stalls the bordered system goes through a pivoting sparse LU. Symbolic
/// analyses are reused while the sparsity pattern stays the same.
pub(crate) struct LinearSolver {
    layout: Layout,
    weights: Vec<f64>,
    signs: Vec<i8>,
    sym: Option<SymCache>,
    lu: Option<LuCache>,
}

struct SymCache {
    idx: Vec<Pair<usize, usize>>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    chol: cholesky::SymbolicCholesky<usize>,
}

struct LuCache {
    idx: Vec<Pair<usize, usize>>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: lu::SymbolicLu<usize>,
}

impl LinearSolver {
    pub fn new(setup: &TransportSetup) -> Self {
        let layout = Layout::new(setup);
        let nphi = (layout.steps + 1) * layout.nf;
        let signs = (0..layout.border()).map(|i| if i < nphi { -1 } else { 1 }).collect();
        Self { layout, weights: row_weights(setup), signs, sym: None, lu: None }
    }

    /// Solves `J x = rhs` for the bordered system produced by
    /// [`assemble`] with `eliminate = true`. The potential part of the
    /// returned vector is determined up to an additive constant.
    pub fn solve(&mut self, entries: &Entries, rhs: &[f64]) -> Result<Vec<f64>> {
        match self.solve_symmetric(entries, rhs) {
            Ok(x) => Ok(x),
            Err(_) => self.solve_lu(entries, rhs),
        }
    }

    fn solve_symmetric(&mut self, entries: &Entries, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.layout.border();
        let nphi = (self.layout.steps + 1) * self.layout.nf;
        let keep = |p: &Pair<usize, usize>| p.row < n && p.col < n && p.row >= p.col;
        if self.sym.as_ref().is_none_or(|c| c.idx != entries.idx) {
            let lower: Vec<_> = entries.idx.iter().copied().filter(keep).collect();
            let (symbolic, argsort) =
                SymbolicSparseColMat::try_new_from_indices(n, n, &lower).map_err(|e| singular(format!("{e:?}")))?;
            let chol = cholesky::factorize_symbolic_cholesky(
                symbolic.as_ref(),
                Side::Lower,
                cholesky::SymmetricOrdering::Amd,
                Default::default(),
            )
            .map_err(|e| singular(format!("{e:?}")))?;
            self.sym = Some(SymCache { idx: entries.idx.clone(), symbolic, argsort, chol });
        }
        let c = self.sym.as_ref().expect("symbolic analysis cached above");
        let w = &self.weights;
        let vals: Vec<f64> =
            entries.idx.iter().zip(&entries.val).filter(|(p, _)| keep(p)).map(|(p, v)| w[p.row] * v).collect();
        let mat = SparseColMat::new_from_argsort(c.symbolic.clone(), &c.argsort, &vals)
            .map_err(|e| singular(format!("{e:?}")))?;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Pivots of the wrong sign or negligible size (the constant mode of
        // the potential) are replaced; refinement absorbs the perturbation.
        let reg = LdltRegularization {
            dynamic_regularization_signs: Some(&self.signs),
            dynamic_regularization_delta: 1e-9 * scale,
            dynamic_regularization_epsilon: 1e-14 * scale,
        };
        let par = Par::Seq;
        let mut values = vec![0.0; c.chol.len_val()];
        let mut buf = MemBuffer::try_new(c.chol.factorize_numeric_ldlt_scratch::<f64>(par, Default::default()))
            .map_err(|e| singular(format!("{e:?}")))?;
        let factors = c
            .chol
            .factorize_numeric_ldlt(&mut values, mat.as_ref(), Side::Lower, reg, par, MemStack::new(&mut buf), Default::default())
            .map_err(|e| singular(format!("{e:?}")))?;
        let mut buf = MemBuffer::try_new(c.chol.solve_in_place_scratch::<f64>(1, par)).map_err(|e| singular(format!("{e:?}")))?;

        // Scaled residual with its component along the nullspace removed;
        // that component reflects the mass mismatch of the boundary data.
        let scaled = |r: &[f64]| {
            let mut z: Vec<f64> = r.iter().zip(w).map(|(v, w)| v * w).collect();
            let mean = z[..nphi].iter().sum::<f64>() / nphi as f64;
            z[..nphi].iter_mut().for_each(|v| *v -= mean);
            z
        };
        let sup = |z: &[f64]| z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut r = scaled(&rhs[..n]);
        let target = REFINE_TOL * sup(&r);
        let mut x = vec![0.0; n + 1];
        let mut err = f64::INFINITY;
        for _ in 0..REFINE_SWEEPS {
            let mut z = Mat::from_fn(n, 1, |i, _| r[i]);
            factors.solve_in_place_with_conj(Conj::No, z.as_mut(), par, MemStack::new(&mut buf));
            for i in 0..n {
                x[i] += z[(i, 0)];
            }
            let mut jx = vec![0.0; n + 1];
            entries.apply(&self.layout, &x, &mut jx);
            let res: Vec<f64> = (0..n).map(|i| rhs[i] - jx[i]).collect();
            r = scaled(&res);
            err = sup(&r);
            if !(err > target) {
                break;
            }
        }
        if x.iter().all(|v| v.is_finite()) && err <= FALLBACK_TOL / REFINE_TOL * target {
            Ok(x)
        } else {
            Err(singular("symmetric factorization did not reach the refinement tolerance"))
        }
    }

    fn solve_lu(&mut self, entries: &Entries, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.layout.size();
        if self.lu.as_ref().is_none_or(|c| c.idx != entries.idx) {
            let (symbolic, argsort) =
                SymbolicSparseColMat::try_new_from_indices(n, n, &entries.idx).map_err(|e| singular(format!("{e:?}")))?;
            let lu = lu::factorize_symbolic_lu(symbolic.as_ref(), Default::default())
                .map_err(|e| singular(format!("{e:?}")))?;
            self.lu = Some(LuCache { idx: entries.idx.clone(), symbolic, argsort, lu });
        }
        let c = self.lu.as_ref().expect("symbolic analysis cached above");
        let mat = SparseColMat::new_from_argsort(c.symbolic.clone(), &c.argsort, &entries.val)
            .map_err(|e| singular(format!("{e:?}")))?;
        let par = Par::Seq;
        let mut numeric = lu::NumericLu::new();
        let mut buf = MemBuffer::try_new(c.lu.factorize_numeric_lu_scratch::<f64>(par, Default::default()))
            .map_err(|e| singular(format!("{e:?}")))?;
        let factors = c
            .lu
            .factorize_numeric_lu(&mut numeric, mat.as_ref(), par, MemStack::new(&mut buf), Default::default())
            .map_err(|e| singular(format!("{e:?}")))?;
        let mut x = Mat::from_fn(n, 1, |i, _| rhs[i]);
        let mut buf = MemBuffer::try_new(c.lu.solve_in_place_scratch::<f64>(1, par)).map_err(|e| singular(format!("{e:?}")))?;
        factors.solve_in_place_with_conj(Conj::No, x.as_mut(), par, MemStack::new(&mut buf));
        let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(singular("non-finite solution of the Newton system"))
        }
    }

    #[cfg(test)]
    pub fn solve_with_lu(&mut self, entries: &Entries, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_lu(entries, rhs)
    }
}
