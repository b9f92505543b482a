//! Channel-level precision measures and asymptotic bounding methods.
//!
//! The channel QFI is maximized over pure inputs directly; the extended
//! (entanglement-assisted) QFI, the channel-extension bound and its finite-N
//! refinement are computed as semidefinite programs over Kraus gauge
//! generators; the RLD bound is a closed-form expression on the Choi pair.
//! Inapplicability (extremal points, unsatisfiable constraints, non-scalar
//! noise rates) is reported as a state rather than an error so tabulation
//! over model grids stays total.

use crate::channels::{
    alpha_beta, partial_trace_out, rotate_kraus, ChoiMatrix, KrausSet,
};
use crate::error::{MetroError, Result};
use crate::fisher::{channel_output_state, qfi_state};
use crate::geometry::is_phi_nonextremal;
use crate::numerics::{
    c64, default_support_cut, hermitian_basis, hermitian_eig, operator_norm, CMat, CVec,
};
use crate::sdp::{solve_from, AffineSubspace, SdpBlock, SdpProblem, SdpSolution, DEFAULT_GAP_TOL, DEFAULT_MAX_ITER};

/// Why a bound value may be absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applicability {
    Ok,
    /// The Choi derivative leaves the Choi support; support-based methods
    /// (RLD, classical simulation) do not apply.
    PhiExtremal,
    /// No Kraus gauge annihilates beta; the asymptotic bound is unbounded.
    BetaConditionUnsatisfiable,
    /// The optimal gauge has a non-scalar alpha; quantum simulation is not
    /// certified by this route.
    AlphaNotScalar,
}

/// Which quantity a [`BoundReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ChannelQfi,
    ExtendedChannelQfi,
    Rld,
    ClassicalSimulation,
    QuantumSimulation,
    ChannelExtension,
    FiniteNChannelExtension,
}

/// Numerical evidence attached to a bound value.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Duality gap of the underlying SDP, scaled to the reported value.
    pub sdp_gap: Option<f64>,
    /// Operator norm of beta at the optimal gauge.
    pub beta_norm: Option<f64>,
    /// Eigenvalues of alpha at the optimal gauge, ascending.
    pub alpha_eigs: Option<Vec<f64>>,
    pub applicability: Applicability,
}

impl Certificate {
    pub(crate) fn ok() -> Self {
        Certificate { sdp_gap: None, beta_norm: None, alpha_eigs: None, applicability: Applicability::Ok }
    }

    fn inapplicable(applicability: Applicability) -> Self {
        Certificate { sdp_gap: None, beta_norm: None, alpha_eigs: None, applicability }
    }
}

/// A bound value with its provenance and certificate.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub method: Method,
    /// Absent when the certificate reports inapplicability.
    pub value: Option<f64>,
    /// Optimal gauge generator, when the method optimizes one.
    pub h_opt: Option<CMat>,
    /// Optimal input state, when the method optimizes one.
    pub input_opt: Option<CVec>,
    pub certificate: Certificate,
    pub note: Option<String>,
}

fn env_sdp_tol() -> f64 {
    std::env::var("METRO_SDP_TOL")
        .ok()
        .and_then(|v| v.parse::<f64>().ok())
        .filter(|t| *t > 0.0)
        .unwrap_or(DEFAULT_GAP_TOL)
}

/// Stacks the matrices `m_i` (each `d_out x d_in`) into one
/// `(r d_out) x d_in` matrix, row blocks in Kraus order.
fn stack_blocks(mats: &[CMat], d_out: usize, d_in: usize) -> CMat {
    let mut s = CMat::zeros(mats.len() * d_out, d_in);
    for (i, m) in mats.iter().enumerate() {
        for a in 0..d_out {
            for j in 0..d_in {
                s[(i * d_out + a, j)] = m[(a, j)];
            }
        }
    }
    s
}

/// `-i sum_j h_ij K_j` stacked over `i`: the gauge direction of the stacked
/// derivative vector.
fn stacked_gauge_dir(k: &KrausSet, h: &CMat) -> CMat {
    let r = k.num_kraus();
    let mats: Vec<CMat> = (0..r)
        .map(|i| {
            let mut m = CMat::zeros(k.d_out, k.d_in);
            for (j, kj) in k.kraus.iter().enumerate() {
                m += kj.map(|z| z * c64(0.0, -1.0) * h[(i, j)]);
            }
            m
        })
        .collect();
    stack_blocks(&mats, k.d_out, k.d_in)
}

/// `M(h) = sum_ij h_ij K_i^dag K_j`; Hermitian for Hermitian `h`.
fn gauge_image(k: &KrausSet, h: &CMat) -> CMat {
    let r = k.num_kraus();
    let mut m = CMat::zeros(k.d_in, k.d_in);
    for i in 0..r {
        for j in 0..r {
            m += (k.kraus[i].adjoint() * &k.kraus[j]).map(|z| z * h[(i, j)]);
        }
    }
    m
}

/// Hermitian matrix from coordinates in the fixed [`hermitian_basis`] order.
fn gauge_from_coords(coords: &[f64], basis: &[CMat], r: usize) -> CMat {
    let mut h = CMat::zeros(r, r);
    for (c, b) in coords.iter().zip(basis) {
        h += b.map(|z| z * *c);
    }
    h
}

/// Bordered block `[[diag_weight * I_top, off^dag], [off, fill * I_bottom]]`.
fn bordered(top: usize, bottom: usize, off: Option<&CMat>, diag_weight: f64, fill: f64) -> CMat {
    let n = top + bottom;
    let mut f = CMat::zeros(n, n);
    for i in 0..top {
        f[(i, i)] = c64(diag_weight, 0.0);
    }
    for i in 0..bottom {
        f[(top + i, top + i)] = c64(fill, 0.0);
    }
    if let Some(m) = off {
        for a in 0..bottom {
            for j in 0..top {
                f[(top + a, j)] = m[(a, j)];
                f[(j, top + a)] = m[(a, j)].conj();
            }
        }
    }
    f
}

struct GaugeSdp {
    solution: SdpSolution,
    h_opt: CMat,
}

/// Minimizes `lambda_a + weight_b * lambda_b` over gauge coordinates, with
/// `lambda_a >= ||alpha(h)||` as a Schur block and, when `weight_b > 0`,
/// `lambda_b >= ||beta(h)||^2` as a second block. The gauge is
/// `h = h0 + sum_m x_m dir_m`.
fn solve_gauge_sdp(
    k: &KrausSet,
    h0: &CMat,
    dirs: &[CMat],
    weight_b: f64,
    gap_tol: f64,
) -> Result<GaugeSdp> {
    let shifted = rotate_kraus(k, h0)?;
    let v0 = stack_blocks(&shifted.dkraus, k.d_out, k.d_in);
    let (alpha0, beta0) = alpha_beta(&shifted);
    let da = k.d_in + k.num_kraus() * k.d_out;
    let nb = dirs.len();
    let with_b = weight_b > 0.0;
    let nvars = nb + 1 + usize::from(with_b);
    let idx_la = nb;
    let idx_lb = nb + 1;

    let mut fi_a: Vec<CMat> = Vec::with_capacity(nvars);
    for d in dirs {
        let w = stacked_gauge_dir(k, d);
        fi_a.push(bordered(k.d_in, v0.nrows(), Some(&w), 0.0, 0.0));
    }
    fi_a.push(bordered(k.d_in, v0.nrows(), None, 1.0, 0.0));
    if with_b {
        fi_a.push(CMat::zeros(da, da));
    }
    let f0_a = bordered(k.d_in, v0.nrows(), Some(&v0), 0.0, 1.0);
    let mut blocks = vec![SdpBlock { f0: f0_a, fi: fi_a }];

    if with_b {
        let db = 2 * k.d_in;
        let mut fi_b: Vec<CMat> = Vec::with_capacity(nvars);
        for d in dirs {
            let m = gauge_image(k, d).map(|z| -z);
            fi_b.push(bordered(k.d_in, k.d_in, Some(&m), 0.0, 0.0));
        }
        fi_b.push(CMat::zeros(db, db));
        fi_b.push(bordered(k.d_in, k.d_in, None, 1.0, 0.0));
        let f0_b = bordered(k.d_in, k.d_in, Some(&beta0), 0.0, 1.0);
        blocks.push(SdpBlock { f0: f0_b, fi: fi_b });
    }

    let mut objective = vec![0.0; nvars];
    objective[idx_la] = 1.0;
    if with_b {
        objective[idx_lb] = weight_b;
    }
    let problem = SdpProblem { nvars, objective, blocks };
    let mut x0 = vec![0.0; nvars];
    x0[idx_la] = 2.0 * operator_norm(&alpha0)? + 1.0;
    if with_b {
        let bn = operator_norm(&beta0)?;
        x0[idx_lb] = 2.0 * bn * bn + 1.0;
    }
    let solution = solve_from(&problem, &x0, gap_tol, DEFAULT_MAX_ITER)
        .map_err(|e| MetroError::SolverFailure(format!("gauge SDP: {}", e)))?;
    let r = k.num_kraus();
    let mut h_opt = h0.clone();
    for (m, d) in dirs.iter().enumerate() {
        h_opt += d.map(|z| z * solution.x[m]);
    }
    debug_assert_eq!(h_opt.nrows(), r);
    Ok(GaugeSdp { solution, h_opt })
}

/// Certificate fields derived from the optimal gauge.
fn gauge_certificate(k: &KrausSet, h_opt: &CMat, sdp_gap: f64) -> Result<Certificate> {
    let rotated = rotate_kraus(k, h_opt)?;
    let (alpha, beta) = alpha_beta(&rotated);
    let eig = hermitian_eig(&alpha)?;
    Ok(Certificate {
        sdp_gap: Some(sdp_gap),
        beta_norm: Some(operator_norm(&beta)?),
        alpha_eigs: Some(eig.eigenvalues),
        applicability: Applicability::Ok,
    })
}

/// Maximal output QFI over pure inputs.
///
/// Qubit inputs scan a deterministic 90 x 180 Bloch grid refined by
/// Nelder-Mead (simplex diameter `1e-10`); inputs of dimension 3 or 4 use
/// seeded random restarts of the same refinement. Larger inputs are not
/// supported.
pub fn channel_qfi(k: &KrausSet) -> Result<BoundReport> {
    if k.d_in > 4 {
        return Err(MetroError::InvalidParameter(format!(
            "input optimization supports d_in <= 4, got {}",
            k.d_in
        )));
    }
    let qfi_of = |psi: &CVec| -> f64 {
        let rho = psi * psi.adjoint();
        match channel_output_state(k, &rho).and_then(|s| qfi_state(&s)) {
            Ok(f) => f,
            Err(_) => 0.0,
        }
    };
    let (best_psi, best_f) = if k.d_in == 2 {
        let bloch = |x: &[f64]| -> CVec {
            let (t, p) = (x[0], x[1]);
            CVec::from_vec(vec![
                c64((t / 2.0).cos(), 0.0),
                c64(0.0, p).exp() * (t / 2.0).sin(),
            ])
        };
        let neg = |x: &[f64]| -qfi_of(&bloch(x));
        let mut best = (vec![0.0, 0.0], f64::INFINITY);
        for i in 0..90 {
            let t = std::f64::consts::PI * (i as f64 + 0.5) / 90.0;
            for j in 0..180 {
                let p = 2.0 * std::f64::consts::PI * j as f64 / 180.0;
                let v = neg(&[t, p]);
                if v < best.1 {
                    best = (vec![t, p], v);
                }
            }
        }
        let (x, f) = nelder_mead(&neg, &best.0, 0.05, 1e-10, 400);
        (bloch(&x), -f)
    } else {
        // Real embedding of the complex amplitudes; normalized on evaluation.
        let d = k.d_in;
        let to_psi = |x: &[f64]| -> Option<CVec> {
            let v = CVec::from_fn(d, |i, _| c64(x[2 * i], x[2 * i + 1]));
            let n = v.norm();
            if n < 1e-8 {
                None
            } else {
                Some(v.map(|z| z / n))
            }
        };
        let neg = |x: &[f64]| to_psi(x).map_or(f64::INFINITY, |psi| -qfi_of(&psi));
        let mut rng = crate::numerics::SplitMix64::new(0x9d_5a_b3);
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _ in 0..30 {
            let x0: Vec<f64> = (0..2 * d).map(|_| rng.next_f64() - 0.5).collect();
            let (x, f) = nelder_mead(&neg, &x0, 0.3, 1e-10, 600);
            if best.as_ref().map_or(true, |b| f < b.1) {
                best = Some((x, f));
            }
        }
        let (x, f) = best.expect("at least one restart");
        (to_psi(&x).expect("normalizable optimum"), -f)
    };
    Ok(BoundReport {
        method: Method::ChannelQfi,
        value: Some(best_f),
        h_opt: None,
        input_opt: Some(best_psi),
        certificate: Certificate::ok(),
        note: None,
    })
}

/// QFI of a unitary channel with generator spectrum `h_eigs`:
/// the squared spectral spread.
pub fn unitary_channel_qfi(h_eigs: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &e in h_eigs {
        lo = lo.min(e);
        hi = hi.max(e);
    }
    if lo > hi {
        return 0.0;
    }
    (hi - lo) * (hi - lo)
}

/// Extended-channel QFI `F[Lambda (x) I] = 4 min_h ||alpha(h)||`, the N = 1
/// case of [`finite_n_ce`].
pub fn extended_channel_qfi(k: &KrausSet) -> Result<BoundReport> {
    extended_channel_qfi_with_tol(k, env_sdp_tol())
}

/// [`extended_channel_qfi`] with an explicit SDP duality-gap tolerance.
pub fn extended_channel_qfi_with_tol(k: &KrausSet, gap_tol: f64) -> Result<BoundReport> {
    let mut report = finite_n_ce_with_tol(k, 1, gap_tol)?;
    report.method = Method::ExtendedChannelQfi;
    if let Some(eigs) = report.certificate.alpha_eigs.as_ref() {
        let top = eigs.last().copied().unwrap_or(0.0);
        let next = if eigs.len() > 1 { eigs[eigs.len() - 2] } else { f64::NEG_INFINITY };
        report.note = Some(if top - next <= 1e-8 * (1.0 + top.abs()) {
            "top eigenvalue of alpha degenerate; optimal input may be mixed".into()
        } else {
            "top eigenvalue of alpha non-degenerate; optimal input is pure".into()
        });
    }
    Ok(report)
}

/// RLD-based upper bound `|| Tr_out( dOmega Omega^+ dOmega ) ||`, defined only
/// where the Choi derivative stays inside the Choi support.
pub fn rld_bound(c: &ChoiMatrix) -> Result<BoundReport> {
    if !is_phi_nonextremal(c, 0.0)? {
        return Ok(BoundReport {
            method: Method::Rld,
            value: None,
            h_opt: None,
            input_opt: None,
            certificate: Certificate::inapplicable(Applicability::PhiExtremal),
            note: Some("Choi derivative leaves the Choi support".into()),
        });
    }
    let eig = hermitian_eig(&c.omega)?;
    let cut = default_support_cut(&c.omega)?;
    let n = c.omega.nrows();
    let mut pinv = CMat::zeros(n, n);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cut {
            let col = eig.eigenvectors.column(i);
            for a in 0..n {
                for b in 0..n {
                    pinv[(a, b)] += col[a] * col[b].conj() / l;
                }
            }
        }
    }
    let core = &c.domega * pinv * &c.domega;
    let reduced = partial_trace_out(&core, c.d_out, c.d_in);
    let value = operator_norm(&reduced)?;
    Ok(BoundReport {
        method: Method::Rld,
        value: Some(value),
        h_opt: None,
        input_opt: None,
        certificate: Certificate::ok(),
        note: None,
    })
}

/// Assembles the real linear system `M(h) = beta_K` in the fixed Hermitian
/// basis and returns its affine solution set.
fn beta_condition_subspace(k: &KrausSet, basis: &[CMat]) -> (AffineSubspace, f64) {
    let (_, beta) = alpha_beta(k);
    let d = k.d_in;
    let images: Vec<CMat> = basis.iter().map(|b| gauge_image(k, b)).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d * d);
    let mut rhs: Vec<f64> = Vec::with_capacity(d * d);
    let mut push_eq = |take: &dyn Fn(&CMat) -> f64, b: f64| {
        rows.push(images.iter().map(|m| take(m)).collect());
        rhs.push(b);
    };
    for p in 0..d {
        push_eq(&|m: &CMat| m[(p, p)].re, beta[(p, p)].re);
    }
    for p in 0..d {
        for q in (p + 1)..d {
            push_eq(&|m: &CMat| m[(p, q)].re, beta[(p, q)].re);
            push_eq(&|m: &CMat| m[(p, q)].im, beta[(p, q)].im);
        }
    }
    let beta_scale = crate::numerics::frobenius_norm(&beta);
    (crate::sdp::solve_affine(&rows, &rhs, basis.len()), beta_scale)
}

/// Channel-extension bound `4 min_{h: beta(h) = 0} ||alpha(h)||`.
///
/// The linear constraint is eliminated exactly: the SDP runs over the affine
/// solution set of `M(h) = beta_K`. An inconsistent system (residual above
/// `1e-8 ||beta_K||`) means no gauge restores SQL-like scaling and the bound
/// is unbounded; this is reported, not raised.
pub fn ce_bound(k: &KrausSet) -> Result<BoundReport> {
    ce_bound_with_tol(k, env_sdp_tol())
}

/// [`ce_bound`] with an explicit SDP duality-gap tolerance.
pub fn ce_bound_with_tol(k: &KrausSet, gap_tol: f64) -> Result<BoundReport> {
    let r = k.num_kraus();
    let basis = hermitian_basis(r);
    let (subspace, beta_scale) = beta_condition_subspace(k, &basis);
    if subspace.residual > 1e-8 * beta_scale.max(1e-300) {
        return Ok(BoundReport {
            method: Method::ChannelExtension,
            value: None,
            h_opt: None,
            input_opt: None,
            certificate: Certificate::inapplicable(Applicability::BetaConditionUnsatisfiable),
            note: Some(format!(
                "no gauge annihilates beta (residual {:.3e}); bound diverges",
                subspace.residual
            )),
        });
    }
    let h0 = gauge_from_coords(&subspace.particular, &basis, r);
    let dirs: Vec<CMat> =
        subspace.basis.iter().map(|v| gauge_from_coords(v, &basis, r)).collect();
    let solved = solve_gauge_sdp(k, &h0, &dirs, 0.0, gap_tol)?;
    let value = 4.0 * solved.solution.primal_value;
    let certificate = gauge_certificate(k, &solved.h_opt, 4.0 * solved.solution.gap)?;
    Ok(BoundReport {
        method: Method::ChannelExtension,
        value: Some(value),
        h_opt: Some(solved.h_opt),
        input_opt: None,
        certificate,
        note: None,
    })
}

/// Quantum-simulation bound: the CE value, certified only when the optimal
/// gauge has scalar alpha (relative eigenvalue spread within `iso_tol`,
/// default `1e-4` when nonpositive).
pub fn qs_bound(k: &KrausSet, iso_tol: f64) -> Result<BoundReport> {
    qs_bound_with_tol(k, iso_tol, env_sdp_tol())
}

/// [`qs_bound`] with an explicit SDP duality-gap tolerance.
pub fn qs_bound_with_tol(k: &KrausSet, iso_tol: f64, gap_tol: f64) -> Result<BoundReport> {
    let tol = if iso_tol > 0.0 { iso_tol } else { 1e-4 };
    let mut report = ce_bound_with_tol(k, gap_tol)?;
    report.method = Method::QuantumSimulation;
    if report.certificate.applicability != Applicability::Ok {
        return Ok(report);
    }
    let eigs = report
        .certificate
        .alpha_eigs
        .as_ref()
        .expect("applicable CE bound carries alpha eigenvalues");
    let spread = eigs.last().unwrap() - eigs.first().unwrap();
    let scale = eigs.last().unwrap().abs().max(1e-300);
    if spread > tol * scale {
        report.value = None;
        report.certificate.applicability = Applicability::AlphaNotScalar;
        report.note = Some(format!(
            "alpha eigenvalue spread {:.3e} exceeds {:.1e} of scale; quantum simulation not certified",
            spread, tol
        ));
    } else {
        report.note = Some("alpha scalar at the optimal gauge; simulation-based bound certified".into());
    }
    Ok(report)
}

/// Finite-N channel-extension bound
/// `4 min_h ( ||alpha(h)|| + (N - 1) ||beta(h)||^2 )`.
pub fn finite_n_ce(k: &KrausSet, n: usize) -> Result<BoundReport> {
    finite_n_ce_with_tol(k, n, env_sdp_tol())
}

/// [`finite_n_ce`] with an explicit SDP duality-gap tolerance.
pub fn finite_n_ce_with_tol(k: &KrausSet, n: usize, gap_tol: f64) -> Result<BoundReport> {
    if n == 0 {
        return Err(MetroError::InvalidParameter("N must be at least 1".into()));
    }
    let r = k.num_kraus();
    let basis = hermitian_basis(r);
    let h0 = CMat::zeros(r, r);
    let weight_b = (n - 1) as f64;
    let solved = solve_gauge_sdp(k, &h0, &basis, weight_b, gap_tol)?;
    let value = 4.0 * solved.solution.primal_value;
    let certificate = gauge_certificate(k, &solved.h_opt, 4.0 * solved.solution.gap)?;
    Ok(BoundReport {
        method: if n == 1 { Method::ExtendedChannelQfi } else { Method::FiniteNChannelExtension },
        value: Some(value),
        h_opt: Some(solved.h_opt),
        input_opt: None,
        certificate,
        note: None,
    })
}

/// Maximal quantum enhancement `chi = sqrt(CE / channel QFI)`; errors when
/// the CE bound does not apply (the enhancement is then unbounded).
pub fn quantum_enhancement(k: &KrausSet) -> Result<f64> {
    let ce = ce_bound(k)?;
    let value = match (ce.value, ce.certificate.applicability) {
        (Some(v), Applicability::Ok) => v,
        _ => {
            return Err(MetroError::Divergent(
                "channel-extension bound inapplicable; enhancement unbounded".into(),
            ))
        }
    };
    let single = channel_qfi(k)?.value.expect("channel QFI always produces a value");
    Ok((value / single).sqrt())
}

/// Plain Nelder-Mead minimizer; returns the best vertex and its value.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let diam = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if diam < tol {
            break;
        }
        let worst = simplex[n].clone();
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let shift = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = shift(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = shift(2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = shift(-0.5);
            let fc = f(&xc);
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best)
                        .map(|(a, b)| b + 0.5 * (a - b))
                        .collect();
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_from_kraus, make_noise_channel, NoiseKind, NoiseModel, ParamLabel};
    use crate::numerics::frobenius_norm;

    fn phase_model(kind: NoiseKind, eta: f64) -> KrausSet {
        make_noise_channel(NoiseModel::new(kind, eta), ParamLabel::Phase, 0.0).unwrap()
    }

    fn value_of(r: &BoundReport) -> f64 {
        r.value.expect("bound applicable")
    }

    #[test]
    fn channel_qfi_closed_forms() {
        let r = channel_qfi(&phase_model(NoiseKind::Dephasing, 0.9)).unwrap();
        assert!((value_of(&r) - 0.81).abs() < 1e-7);
        let r = channel_qfi(&phase_model(NoiseKind::Loss, 0.9)).unwrap();
        assert!((value_of(&r) - 0.9).abs() < 1e-7);
        let strength =
            make_noise_channel(NoiseModel::new(NoiseKind::Dephasing, 0.6), ParamLabel::Strength, 0.6)
                .unwrap();
        let r = channel_qfi(&strength).unwrap();
        assert!((value_of(&r) - 1.5625).abs() < 1e-7);
    }

    #[test]
    fn unitary_qfi_spectral_spread() {
        assert!((unitary_channel_qfi(&[0.5, -0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(unitary_channel_qfi(&[0.0, 0.0, 0.0]), 0.0);
        let n = 7.0f64;
        assert!((unitary_channel_qfi(&[n / 2.0, -n / 2.0]) - n * n).abs() < 1e-12);
    }

    #[test]
    fn extended_qfi_closed_forms() {
        let cases = [
            (NoiseKind::Dephasing, 0.9, 0.81),
            (NoiseKind::Depolarization, 0.8, 2.0 * 0.64 / 1.8),
            (NoiseKind::Loss, 0.7, 0.7),
            (NoiseKind::SpontaneousEmission, 0.5, 4.0 * 0.5 / (1.0 + 0.5f64.sqrt()).powi(2)),
        ];
        for (kind, eta, want) in cases {
            let r = extended_channel_qfi(&phase_model(kind, eta)).unwrap();
            assert!(
                (value_of(&r) - want).abs() < 1e-6,
                "{:?}: got {} want {}",
                kind,
                value_of(&r),
                want
            );
        }
    }

    #[test]
    fn rld_closed_forms_and_extremality() {
        let c = choi_from_kraus(&phase_model(NoiseKind::Dephasing, 0.9));
        let r = rld_bound(&c).unwrap();
        assert!((value_of(&r) - 0.81 / 0.19).abs() < 1e-9);
        let c = choi_from_kraus(&phase_model(NoiseKind::Depolarization, 0.8));
        let r = rld_bound(&c).unwrap();
        let want = 2.0 * 0.64 * 1.8 / (0.2 * 3.4);
        assert!((value_of(&r) - want).abs() < 1e-9);
        let c = choi_from_kraus(&phase_model(NoiseKind::Loss, 0.9));
        let r = rld_bound(&c).unwrap();
        assert!(r.value.is_none());
        assert_eq!(r.certificate.applicability, Applicability::PhiExtremal);
    }

    #[test]
    fn ce_bound_closed_forms() {
        let r = ce_bound(&phase_model(NoiseKind::Dephasing, 0.9)).unwrap();
        assert!((value_of(&r) - 0.81 / 0.19).abs() < 1e-6);
        assert!(r.certificate.beta_norm.unwrap() < 1e-6);
        let r = ce_bound(&phase_model(NoiseKind::SpontaneousEmission, 0.5)).unwrap();
        assert!((value_of(&r) - 4.0).abs() < 1e-6);
        // Noiseless encoding admits no SQL-restoring gauge.
        let r = ce_bound(&phase_model(NoiseKind::Dephasing, 1.0)).unwrap();
        assert!(r.value.is_none());
        assert_eq!(r.certificate.applicability, Applicability::BetaConditionUnsatisfiable);
    }

    #[test]
    fn qs_bound_scalar_alpha_certification() {
        let r = qs_bound(&phase_model(NoiseKind::Loss, 0.9), 0.0).unwrap();
        assert!((value_of(&r) - 9.0).abs() < 1e-5);
        let r = qs_bound(&phase_model(NoiseKind::Depolarization, 0.8), 0.0).unwrap();
        assert!((value_of(&r) - 2.0 * 0.64 / (0.2 * 2.6)).abs() < 1e-5);
        let r = qs_bound(&phase_model(NoiseKind::SpontaneousEmission, 0.5), 0.0).unwrap();
        assert!(r.value.is_none());
        assert_eq!(r.certificate.applicability, Applicability::AlphaNotScalar);
    }

    #[test]
    fn finite_n_interpolates_to_asymptote() {
        let k = phase_model(NoiseKind::Dephasing, 0.9);
        let asym = value_of(&ce_bound(&k).unwrap());
        let n10 = value_of(&finite_n_ce(&k, 10).unwrap());
        let interp = 10.0 * asym / (10.0 + asym);
        assert!((n10 - interp).abs() < 1e-4, "{} vs {}", n10, interp);
        // N = 1 coincides with the extended-channel QFI.
        let n1 = value_of(&finite_n_ce(&k, 1).unwrap());
        let ext = value_of(&extended_channel_qfi(&k).unwrap());
        assert!((n1 - ext).abs() < 1e-7);
        // Monotone toward the asymptote, never beyond it.
        let mut prev = 0.0;
        for n in [1usize, 2, 5, 20, 60] {
            let v = value_of(&finite_n_ce(&k, n).unwrap());
            assert!(v + 1e-7 >= prev);
            assert!(v <= asym + 1e-7);
            prev = v;
        }
    }

    #[test]
    fn analytic_gauges_are_feasible_optima() {
        // Closed-form optimal gauges reproduce the table values exactly:
        // evaluating 4 ||alpha(h)|| at the analytic h must match, and for the
        // asymptotic bound the gauge must annihilate beta.
        let eval = |k: &KrausSet, h: &CMat| -> (f64, f64) {
            let rot = rotate_kraus(k, h).unwrap();
            let (alpha, beta) = alpha_beta(&rot);
            (4.0 * operator_norm(&alpha).unwrap(), operator_norm(&beta).unwrap())
        };
        let eta = 0.75f64;
        let s = eta.sqrt();

        let deph = phase_model(NoiseKind::Dephasing, eta);
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = c64(-(1.0 - eta * eta).sqrt() / 2.0, 0.0);
        h[(1, 0)] = h[(0, 1)];
        let (v, _) = eval(&deph, &h);
        assert!((v - eta * eta).abs() < 1e-9);
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = c64(-0.5 / (1.0 - eta * eta).sqrt(), 0.0);
        h[(1, 0)] = h[(0, 1)];
        let (v, b) = eval(&deph, &h);
        assert!((v - eta * eta / (1.0 - eta * eta)).abs() < 1e-9);
        assert!(b < 1e-12);

        let depol = phase_model(NoiseKind::Depolarization, eta);
        let xi = ((1.0 + 3.0 * eta) * (1.0 - eta)).sqrt() / (1.0 + eta);
        let gauge = |c: f64| {
            let mut h = CMat::zeros(4, 4);
            h[(0, 3)] = c64(-c * xi / 2.0, 0.0);
            h[(3, 0)] = h[(0, 3)];
            h[(1, 2)] = c64(0.0, c / 2.0);
            h[(2, 1)] = c64(0.0, -c / 2.0);
            h
        };
        let (v, _) = eval(&depol, &gauge(1.0));
        assert!((v - 2.0 * eta * eta / (1.0 + eta)).abs() < 1e-9);
        let c = (1.0 + eta) / ((1.0 + 2.0 * eta) * (1.0 - eta));
        let (v, b) = eval(&depol, &gauge(c));
        assert!((v - 2.0 * eta * eta / ((1.0 - eta) * (1.0 + 2.0 * eta))).abs() < 1e-9);
        assert!(b < 1e-12);

        let loss = phase_model(NoiseKind::Loss, eta);
        let diag3 = |w: f64| {
            CMat::from_diagonal(&CVec::from_vec(vec![
                c64(0.0, 0.0),
                c64(-w, 0.0),
                c64(w, 0.0),
            ]))
        };
        let (v, _) = eval(&loss, &diag3(0.5));
        assert!((v - eta).abs() < 1e-9);
        let (v, b) = eval(&loss, &diag3(0.5 / (1.0 - eta)));
        assert!((v - eta / (1.0 - eta)).abs() < 1e-9);
        assert!(b < 1e-12);

        let spem = phase_model(NoiseKind::SpontaneousEmission, eta);
        let diag2 = |a: f64, b_: f64| {
            CMat::from_diagonal(&CVec::from_vec(vec![c64(a, 0.0), c64(b_, 0.0)]))
        };
        // Extended gauge with the sign of the printed off-source corrected:
        // xi = -(1 - sqrt(eta)) / (1 + sqrt(eta)) makes alpha scalar and the
        // value 4 eta / (1 + sqrt(eta))^2; the positive variant maximizes.
        let xi = -(1.0 - s) / (1.0 + s);
        let (v, _) = eval(&spem, &diag2(xi / 2.0, 0.5));
        assert!((v - 4.0 * eta / (1.0 + s).powi(2)).abs() < 1e-9);
        let (v, b) = eval(&spem, &diag2(-0.5, (1.0 + eta) / (2.0 * (1.0 - eta))));
        assert!((v - 4.0 * eta / (1.0 - eta)).abs() < 1e-9);
        assert!(b < 1e-12);
    }

    #[test]
    fn enhancement_and_ordering_chain() {
        let loss = phase_model(NoiseKind::Loss, 0.75);
        assert!((quantum_enhancement(&loss).unwrap() - 2.0).abs() < 1e-6);
        assert!(quantum_enhancement(&phase_model(NoiseKind::Dephasing, 1.0)).is_err());

        // channel <= extended <= finite-N <= CE <= RLD <= CS where defined.
        let k = phase_model(NoiseKind::Dephasing, 0.5);
        let c = choi_from_kraus(&k);
        let slack = 1e-6;
        let single = value_of(&channel_qfi(&k).unwrap());
        let ext = value_of(&extended_channel_qfi(&k).unwrap());
        let n5 = value_of(&finite_n_ce(&k, 5).unwrap());
        let ce = value_of(&ce_bound(&k).unwrap());
        let rld = value_of(&rld_bound(&c).unwrap());
        let cs = value_of(&crate::geometry::cs_bound(&c).unwrap());
        assert!(single <= ext + slack);
        assert!(ext <= n5 + slack);
        assert!(n5 <= ce + slack);
        assert!(ce <= rld + slack);
        assert!(rld <= cs + slack);
    }

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0;
        let (x, v) = nelder_mead(&f, &[0.0, 0.0], 0.5, 1e-12, 500);
        assert!((x[0] - 1.5).abs() < 1e-6);
        assert!((x[1] + 0.5).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-10);
        assert!(frobenius_norm(&CMat::zeros(1, 1)) == 0.0);
    }
}
