//! Small dense semidefinite programming by a log-det barrier interior-point
//! method.
//!
//! Problems are stated as `min c^T x` subject to block constraints
//! `F_k(x) = F0_k + sum_i x_i Fi_k >= 0` with Hermitian data. The solver runs
//! damped Newton centering on `c^T x - mu sum_k logdet F_k(x)` with a
//! decade-per-step barrier schedule; the centered point yields the dual
//! certificate `Z_k = mu F_k(x)^{-1}` whose feasibility residual equals the
//! centering gradient, so every reported optimum carries a verifiable gap.
//! All arithmetic is deterministic pure f64.

use crate::error::{MetroError, Result};
use crate::numerics::{frobenius_norm, hermitian_eig, CMat};
use nalgebra::DMatrix;

/// One PSD constraint block `F0 + sum_i x_i Fi >= 0`.
#[derive(Debug, Clone)]
pub struct SdpBlock {
    pub f0: CMat,
    pub fi: Vec<CMat>,
}

/// Linear SDP in inequality form.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub nvars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<SdpBlock>,
}

/// Solver output: primal point, dual certificate and duality gap.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Dual matrices `Z_k`, one per block, PSD and complementary at optimum.
    pub dual_blocks: Vec<CMat>,
}

/// Post-hoc verification of an [`SdpSolution`] against its problem.
///
/// The dual matrices are `Z_k = mu F_k(x)^{-1}` at the final barrier weight,
/// so `dual_feas_residual` and the recomputed `gap` both carry an intrinsic
/// f64 noise floor of order `eps_mach / slack`; they certify the solution at
/// that resolution, while the primal value itself is accurate to the path
/// gap `mu * nu`.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    /// Minimum eigenvalue of each primal block at the solution.
    pub block_min_eigs: Vec<f64>,
    /// Frobenius norm of `Z_k F_k(x)` per block (complementary slackness).
    pub comp_slack: Vec<f64>,
    /// `max_i |c_i - sum_k tr(Z_k Fi_k)|` (dual feasibility).
    pub dual_feas_residual: f64,
    /// `|c^T x + sum_k tr(F0_k Z_k)|` (recomputed duality gap).
    pub gap: f64,
}

/// Default duality-gap tolerance.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;
/// Default Newton-iteration budget.
pub const DEFAULT_MAX_ITER: usize = 200;

impl SdpProblem {
    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.nvars {
            return Err(MetroError::DimensionMismatch {
                expected: self.nvars,
                got: self.objective.len(),
            });
        }
        for b in &self.blocks {
            if b.fi.len() != self.nvars {
                return Err(MetroError::DimensionMismatch {
                    expected: self.nvars,
                    got: b.fi.len(),
                });
            }
            let n = b.f0.nrows();
            if b.f0.ncols() != n {
                return Err(MetroError::DimensionMismatch { expected: n, got: b.f0.ncols() });
            }
            for m in &b.fi {
                if m.nrows() != n || m.ncols() != n {
                    return Err(MetroError::DimensionMismatch { expected: n, got: m.nrows() });
                }
            }
        }
        Ok(())
    }

    fn block_value(&self, k: usize, x: &[f64]) -> CMat {
        let b = &self.blocks[k];
        let mut f = b.f0.clone();
        for (i, m) in b.fi.iter().enumerate() {
            if x[i] != 0.0 {
                f += m.map(|z| z * x[i]);
            }
        }
        f
    }

    fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.f0.nrows()).sum()
    }
}

/// Pivot-checked Hermitian Cholesky: returns lower `L` with `m = L L^dagger`,
/// or None when any pivot is nonpositive (matrix not positive definite).
fn hermitian_cholesky(m: &CMat) -> Option<CMat> {
    let n = m.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut s = m[(j, j)].re;
        for k in 0..j {
            s -= l[(j, k)].norm_sqr();
        }
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        let piv = s.sqrt();
        l[(j, j)] = crate::numerics::c64(piv, 0.0);
        for i in (j + 1)..n {
            let mut z = m[(i, j)];
            for k in 0..j {
                z -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = z / piv;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
fn tri_lower_inverse(l: &CMat) -> CMat {
    let n = l.nrows();
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        inv[(col, col)] = crate::numerics::c64(1.0, 0.0) / l[(col, col)];
        for i in (col + 1)..n {
            let mut z = crate::numerics::c64(0.0, 0.0);
            for k in col..i {
                z -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = z / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
fn chol_inverse(l: &CMat) -> CMat {
    let linv = tri_lower_inverse(l);
    linv.adjoint() * linv
}

fn chol_logdet(l: &CMat) -> f64 {
    let mut s = 0.0;
    for i in 0..l.nrows() {
        s += l[(i, i)].re.ln();
    }
    2.0 * s
}

fn strictly_feasible_point(p: &SdpProblem, x: &[f64]) -> bool {
    if x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    (0..p.blocks.len()).all(|k| hermitian_cholesky(&p.block_value(k, x)).is_some())
}

/// Barrier objective `c^T x - mu sum_k logdet F_k(x)`; None outside the cone.
fn barrier_value(p: &SdpProblem, x: &[f64], mu: f64) -> Option<f64> {
    let mut val = 0.0;
    for (c, v) in p.objective.iter().zip(x) {
        val += c * v;
    }
    for k in 0..p.blocks.len() {
        let l = hermitian_cholesky(&p.block_value(k, x))?;
        val -= mu * chol_logdet(&l);
    }
    Some(val)
}

struct CenterOutcome {
    newton_steps: usize,
    inverses: Vec<CMat>,
}

/// Damped Newton centering at fixed mu. Returns block inverses at the final
/// point so the caller can form the dual certificate without refactorizing.
fn center(
    p: &SdpProblem,
    x: &mut Vec<f64>,
    mu: f64,
    budget: &mut usize,
) -> Result<CenterOutcome> {
    let n = p.nvars;
    let mut steps = 0usize;
    let mut prev_grad_inf = f64::INFINITY;
    loop {
        // Gradient and Hessian of the barrier at x.
        let mut inverses = Vec::with_capacity(p.blocks.len());
        for k in 0..p.blocks.len() {
            let f = p.block_value(k, x);
            let l = hermitian_cholesky(&f).ok_or_else(|| {
                MetroError::NumericalBreakdown("iterate left the cone during centering".into())
            })?;
            inverses.push(chol_inverse(&l));
        }
        let mut grad = p.objective.clone();
        for (k, inv) in inverses.iter().enumerate() {
            for i in 0..n {
                let t: f64 = (inv * &p.blocks[k].fi[i]).trace().re;
                grad[i] -= mu * t;
            }
        }
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for (k, inv) in inverses.iter().enumerate() {
            let g: Vec<CMat> = p.blocks[k].fi.iter().map(|m| inv * m).collect();
            for i in 0..n {
                for j in i..n {
                    let t: f64 = (&g[i] * &g[j]).trace().re;
                    hess[(i, j)] += mu * t;
                    if j != i {
                        hess[(j, i)] += mu * t;
                    }
                }
            }
        }
        // Newton direction with progressive ridge regularization.
        let mut ridge = 0.0f64;
        let base = hess.diagonal().iter().fold(0.0f64, |a, &d| a.max(d.abs())).max(1e-300);
        let delta: Vec<f64> = loop {
            let mut h = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = crate::numerics::c64(hess[(i, j)], 0.0);
                }
                h[(i, i)] += crate::numerics::c64(ridge * base, 0.0);
            }
            if let Some(l) = hermitian_cholesky(&h) {
                let hinv = chol_inverse(&l);
                let mut d = vec![0.0f64; n];
                for i in 0..n {
                    for j in 0..n {
                        d[i] -= hinv[(i, j)].re * grad[j];
                    }
                }
                break d;
            }
            ridge = if ridge == 0.0 { 1e-13 } else { ridge * 10.0 };
            if ridge > 1e-4 {
                return Err(MetroError::NumericalBreakdown(
                    "barrier Hessian not positive definite".into(),
                ));
            }
        };
        let descent: f64 = grad.iter().zip(delta.iter()).map(|(g, d)| g * d).sum();
        let decrement = -descent; // = delta^T H delta >= 0
        let grad_inf = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        let cscale = p.objective.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
        // Exit demands a small gradient, not just a small decrement: the
        // gradient is exactly the dual-feasibility residual of Z = mu F^{-1},
        // and at small mu the Hessian is huge, so the decrement alone can be
        // tiny while the dual is far from feasible. The gradient floor scales
        // like eps_mach / slack, so once progress stalls the center has been
        // resolved to working precision.
        let centered = decrement * 0.5 <= 1e-12;
        let stalled = grad_inf >= 0.9 * prev_grad_inf;
        if (centered && (grad_inf <= 1e-9 * cscale || stalled)) || steps >= 40 {
            return Ok(CenterOutcome { newton_steps: steps, inverses });
        }
        prev_grad_inf = grad_inf;
        if *budget == 0 {
            return Err(MetroError::MaxIterations(steps));
        }
        *budget -= 1;
        steps += 1;
        let mut accepted = false;
        if decrement * 0.5 <= 1e-9 {
            // Pure Newton phase: barrier differences are below f64 resolution,
            // so Armijo would stall; take the longest in-cone step.
            let mut t = 1.0f64;
            for _ in 0..60 {
                let cand: Vec<f64> = x.iter().zip(delta.iter()).map(|(v, d)| v + t * d).collect();
                if strictly_feasible_point(p, &cand) {
                    *x = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
        } else {
            // Backtracking: first into the cone, then Armijo with slope 0.25.
            let phi0 = barrier_value(p, x, mu).ok_or_else(|| {
                MetroError::NumericalBreakdown("barrier undefined at current iterate".into())
            })?;
            let mut t = 1.0f64;
            for _ in 0..60 {
                let cand: Vec<f64> = x.iter().zip(delta.iter()).map(|(v, d)| v + t * d).collect();
                if let Some(phi) = barrier_value(p, &cand, mu) {
                    if phi <= phi0 + 0.25 * t * descent {
                        *x = cand;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        if !accepted {
            // Step has stalled at numerical precision; report the current point.
            return Ok(CenterOutcome { newton_steps: steps, inverses });
        }
    }
}

/// Solve from a strictly feasible starting point.
pub fn solve_from(
    p: &SdpProblem,
    x0: &[f64],
    gap_tol: f64,
    max_iter: usize,
) -> Result<SdpSolution> {
    p.validate()?;
    if x0.len() != p.nvars {
        return Err(MetroError::DimensionMismatch { expected: p.nvars, got: x0.len() });
    }
    if !strictly_feasible_point(p, x0) {
        return Err(MetroError::SolverFailure(
            "starting point is not strictly feasible".into(),
        ));
    }
    let nu = p.total_dim() as f64;
    let mut x = x0.to_vec();
    let mut budget = max_iter;
    let mut iterations = 0usize;
    let cmax = p.objective.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    let mut mu = cmax.max(1.0);
    loop {
        let outcome = center(p, &mut x, mu, &mut budget)?;
        iterations += outcome.newton_steps;
        if mu * nu <= gap_tol * 0.5 {
            // Assemble the dual certificate from the centered inverses. For a
            // centered pair the duality gap is mu * nu exactly; recomputing it
            // as primal - dual in f64 would only measure cancellation noise of
            // order eps_mach / slack, so the path gap is what we report.
            let dual_blocks: Vec<CMat> =
                outcome.inverses.iter().map(|inv| inv.map(|z| z * mu)).collect();
            let primal: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            let gap = mu * nu;
            return Ok(SdpSolution {
                x,
                primal_value: primal,
                dual_value: primal - gap,
                gap,
                iterations,
                dual_blocks,
            });
        }
        mu /= 10.0;
    }
}

/// Solve, running a phase-I feasibility search when `x = 0` is not strictly
/// feasible. Errors with [`MetroError::Infeasible`] when no interior point
/// exists.
pub fn solve(p: &SdpProblem, gap_tol: f64, max_iter: usize) -> Result<SdpSolution> {
    p.validate()?;
    let zero = vec![0.0f64; p.nvars];
    if strictly_feasible_point(p, &zero) {
        return solve_from(p, &zero, gap_tol, max_iter);
    }
    let x0 = phase_one(p, max_iter)?;
    solve_from(p, &x0, gap_tol, max_iter)
}

/// Phase-I: minimize s subject to `F_k(x) + s I >= 0`, `s >= -1` and a large
/// box `|x_i| <= R` (the box keeps the barrier bounded along directions in
/// which the original feasible cone is unbounded). Stops as soon as the
/// iterate reaches `s < -1e-6`.
fn phase_one(p: &SdpProblem, max_iter: usize) -> Result<Vec<f64>> {
    let n = p.nvars;
    let mut blocks = Vec::with_capacity(p.blocks.len() + 1 + 2 * n);
    for b in &p.blocks {
        let dim = b.f0.nrows();
        let mut fi = b.fi.clone();
        fi.push(CMat::identity(dim, dim));
        blocks.push(SdpBlock { f0: b.f0.clone(), fi });
    }
    // 1x1 bound block: 1 + s >= 0 keeps the phase-I objective bounded below.
    let mut bound_fi = vec![CMat::zeros(1, 1); n];
    bound_fi.push(CMat::identity(1, 1));
    blocks.push(SdpBlock { f0: CMat::identity(1, 1), fi: bound_fi });
    // Box blocks R - x_i >= 0 and R + x_i >= 0.
    let radius = 1e6f64;
    for i in 0..n {
        for sign in [1.0f64, -1.0] {
            let mut fi = vec![CMat::zeros(1, 1); n + 1];
            fi[i] = CMat::identity(1, 1).map(|z| z * (-sign));
            blocks.push(SdpBlock {
                f0: CMat::identity(1, 1).map(|z| z * radius),
                fi,
            });
        }
    }
    let mut objective = vec![0.0f64; n];
    objective.push(1.0);
    let aux = SdpProblem { nvars: n + 1, objective, blocks };

    // Strictly feasible start: x = 0, s above the most negative block eigenvalue.
    let mut s0 = 0.0f64;
    for k in 0..p.blocks.len() {
        let eig = hermitian_eig(&p.block_value(k, &vec![0.0; n]))?;
        s0 = s0.max(-eig.eigenvalues[0]);
    }
    let mut x = vec![0.0f64; n];
    x.push(s0 + 1.0);
    if !strictly_feasible_point(&aux, &x) {
        return Err(MetroError::NumericalBreakdown(
            "phase-I starting point rejected".into(),
        ));
    }
    let nu = aux.total_dim() as f64;
    let mut budget = max_iter;
    let mut mu = 1.0f64.max(s0);
    loop {
        center(&aux, &mut x, mu, &mut budget)?;
        let s = x[n];
        if s < -1e-6 {
            let inner: Vec<f64> = x[..n].to_vec();
            if strictly_feasible_point(p, &inner) {
                return Ok(inner);
            }
        }
        if mu * nu <= 1e-10 {
            return Err(MetroError::Infeasible);
        }
        mu /= 10.0;
    }
}

/// Verify a solution: primal block eigenvalues, complementary slackness,
/// dual feasibility residual, and the recomputed duality gap.
pub fn check_certificate(p: &SdpProblem, s: &SdpSolution) -> Result<CertificateReport> {
    let mut block_min_eigs = Vec::with_capacity(p.blocks.len());
    let mut comp_slack = Vec::with_capacity(p.blocks.len());
    for k in 0..p.blocks.len() {
        let f = p.block_value(k, &s.x);
        let eig = hermitian_eig(&f)?;
        block_min_eigs.push(eig.eigenvalues[0]);
        comp_slack.push(frobenius_norm(&(&s.dual_blocks[k] * &f)));
    }
    let mut dual_feas_residual = 0.0f64;
    for i in 0..p.nvars {
        let mut lhs = 0.0f64;
        for (k, z) in s.dual_blocks.iter().enumerate() {
            lhs += (z * &p.blocks[k].fi[i]).trace().re;
        }
        dual_feas_residual = dual_feas_residual.max((p.objective[i] - lhs).abs());
    }
    let primal: f64 = p.objective.iter().zip(&s.x).map(|(c, v)| c * v).sum();
    let mut f0z = 0.0f64;
    for (k, z) in s.dual_blocks.iter().enumerate() {
        f0z += (&p.blocks[k].f0 * z).trace().re;
    }
    Ok(CertificateReport {
        block_min_eigs,
        comp_slack,
        dual_feas_residual,
        gap: (primal + f0z).abs(),
    })
}

/// Affine solution set of a real linear system `A v = b`.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    /// Minimum-norm particular solution (of the consistent part).
    pub particular: Vec<f64>,
    /// Orthonormal basis of the nullspace of `A`.
    pub basis: Vec<Vec<f64>>,
    /// `||A particular - b||_2`; nonzero means the system is inconsistent.
    pub residual: f64,
}

/// Row-pivoted modified Gram-Schmidt elimination of `A v = b`.
///
/// Rows with norm below `1e-12` times the largest initial row norm are
/// treated as dependent. The nullspace basis is completed from standard
/// basis vectors with two-pass reorthogonalization.
pub fn solve_affine(a: &[Vec<f64>], b: &[f64], nvars: usize) -> AffineSubspace {
    let m = a.len();
    debug_assert_eq!(b.len(), m);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut rows: Vec<Vec<f64>> = a.to_vec();
    let mut rhs: Vec<f64> = b.to_vec();
    let mut alive: Vec<usize> = (0..m).collect();
    let max_norm = rows.iter().map(|r| norm(r)).fold(0.0f64, f64::max);
    let cut = 1e-12 * max_norm.max(1e-300);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut qb: Vec<f64> = Vec::new();
    while let Some((pos, _)) = alive
        .iter()
        .enumerate()
        .map(|(pos, &idx)| (pos, norm(&rows[idx])))
        .filter(|&(_, n)| n > cut)
        .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
    {
        let idx = alive.remove(pos);
        let nrm = norm(&rows[idx]);
        for v in rows[idx].iter_mut() {
            *v /= nrm;
        }
        rhs[idx] /= nrm;
        let (qrow, qval) = (rows[idx].clone(), rhs[idx]);
        for &other in &alive {
            let dot: f64 = rows[other].iter().zip(&qrow).map(|(x, y)| x * y).sum();
            for (v, w) in rows[other].iter_mut().zip(&qrow) {
                *v -= dot * w;
            }
            rhs[other] -= dot * qval;
        }
        q.push(qrow);
        qb.push(qval);
    }
    let mut particular = vec![0.0f64; nvars];
    for (qrow, &qval) in q.iter().zip(&qb) {
        for (p, w) in particular.iter_mut().zip(qrow) {
            *p += qval * w;
        }
    }
    let mut residual = 0.0f64;
    for (row, &bi) in a.iter().zip(b) {
        let dot: f64 = row.iter().zip(&particular).map(|(x, y)| x * y).sum();
        residual += (dot - bi) * (dot - bi);
    }
    let residual = residual.sqrt();
    // Complete to an orthonormal basis of R^nvars; the completion spans null(A).
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..nvars {
        if q.len() + basis.len() == nvars {
            break;
        }
        let mut w = vec![0.0f64; nvars];
        w[i] = 1.0;
        for _pass in 0..2 {
            for qrow in q.iter().chain(basis.iter()) {
                let dot: f64 = w.iter().zip(qrow).map(|(x, y)| x * y).sum();
                for (v, u) in w.iter_mut().zip(qrow) {
                    *v -= dot * u;
                }
            }
        }
        let nrm = norm(&w);
        if nrm > 1e-8 {
            for v in w.iter_mut() {
                *v /= nrm;
            }
            basis.push(w);
        }
    }
    AffineSubspace { particular, basis, residual }
}
