//! State-level quantum and classical Fisher information.
//!
//! The quantum Fisher information is computed through the symmetric
//! logarithmic derivative on the numerically retained support of the state; a
//! purification-based variational form is provided as an independent route
//! that minimizes over Kraus gauges with a small semidefinite program.

use crate::channels::KrausSet;
use crate::error::{MetroError, Result};
use crate::numerics::{c64, hermitian_basis, hermitian_eig, CMat, CVec};
use crate::sdp::{solve_from, SdpBlock, SdpProblem, DEFAULT_GAP_TOL, DEFAULT_MAX_ITER};

/// A state and its derivative with respect to the working parameter.
#[derive(Debug, Clone)]
pub struct ParametrizedState {
    /// Density matrix, PSD with unit trace.
    pub rho: CMat,
    /// Parameter derivative, Hermitian and traceless.
    pub drho: CMat,
}

impl ParametrizedState {
    /// Validates trace and Hermiticity; eigenvalue positivity is checked at
    /// the point of use (the SLD eigendecomposition rejects indefinite input
    /// only through its support cut, so gross violations are caught here).
    pub fn new(rho: CMat, drho: CMat) -> Result<Self> {
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(MetroError::NotNormalized { norm: tr.re });
        }
        let dtr = drho.trace();
        if dtr.norm() > 1e-10 {
            return Err(MetroError::InvalidParameter(format!(
                "state derivative must be traceless, got trace {}",
                dtr.re
            )));
        }
        Ok(ParametrizedState { rho, drho })
    }
}

/// Output state of a parametrized channel on a fixed input:
/// `rho = sum K rho_in K^dag`, `drho = sum K' rho_in K^dag + K rho_in K'^dag`.
pub fn channel_output_state(k: &KrausSet, rho_in: &CMat) -> Result<ParametrizedState> {
    if rho_in.nrows() != k.d_in || rho_in.ncols() != k.d_in {
        return Err(MetroError::DimensionMismatch { expected: k.d_in, got: rho_in.nrows() });
    }
    let mut rho = CMat::zeros(k.d_out, k.d_out);
    let mut drho = CMat::zeros(k.d_out, k.d_out);
    for (kk, dk) in k.kraus.iter().zip(&k.dkraus) {
        rho += kk * rho_in * kk.adjoint();
        let cross = dk * rho_in * kk.adjoint();
        drho += &cross + cross.adjoint();
    }
    ParametrizedState::new(rho, drho)
}

/// Symmetric logarithmic derivative on the retained support:
/// `L_ij = 2 <e_i|drho|e_j> / (l_i + l_j)` over pairs with `l_i + l_j > tol`.
///
/// `tol <= 0` selects `1e-10 * trace(rho)`. If the derivative has weight on
/// discarded pairs the defining equation cannot be reproduced and the point
/// is flagged with `KernelDerivative` carrying the reconstruction residual.
pub fn sld(s: &ParametrizedState, tol: f64) -> Result<CMat> {
    let eig = hermitian_eig(&s.rho)?;
    let cut = if tol > 0.0 { tol } else { 1e-10 * s.rho.trace().re };
    let n = s.rho.nrows();
    let v = &eig.eigenvectors;
    let m = v.adjoint() * &s.drho * v;
    let mut lp = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
            if denom > cut {
                lp[(i, j)] = m[(i, j)] * (2.0 / denom);
            }
        }
    }
    let l = v * lp * v.adjoint();
    let recon = (&s.rho * &l + &l * &s.rho).map(|z| z * 0.5);
    let residual = crate::numerics::frobenius_norm(&(&recon - &s.drho))
        / (1.0 + crate::numerics::frobenius_norm(&s.drho));
    if residual > 1e-6 {
        return Err(MetroError::KernelDerivative { residual });
    }
    Ok(l)
}

/// Quantum Fisher information `F = tr(drho L)` (equal to `tr(rho L^2)`).
pub fn qfi_state(s: &ParametrizedState) -> Result<f64> {
    let l = sld(s, 0.0)?;
    Ok((&s.drho * &l).trace().re)
}

/// Spectral two-term form of the QFI, kept as an independent cross-check:
/// classical part `sum dl_i^2 / l_i` plus coherence part
/// `2 sum_{i<j} (l_i - l_j)^2 / (l_i + l_j) |<e_i|de_j>|^2`, which together
/// collapse to `sum_{ij} 2 |<e_i|drho|e_j>|^2 / (l_i + l_j)`.
pub fn qfi_state_spectral(s: &ParametrizedState) -> Result<f64> {
    let eig = hermitian_eig(&s.rho)?;
    let cut = 1e-10 * s.rho.trace().re;
    let m = eig.eigenvectors.adjoint() * &s.drho * &eig.eigenvectors;
    let n = s.rho.nrows();
    let mut f = 0.0;
    for i in 0..n {
        for j in 0..n {
            let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
            if denom > cut {
                f += 2.0 * m[(i, j)].norm_sqr() / denom;
            }
        }
    }
    Ok(f)
}

/// QFI of a pure parametrized state: `4 (<dpsi|dpsi> - |<psi|dpsi>|^2)`.
pub fn qfi_pure(psi: &CVec, dpsi: &CVec) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(MetroError::NotNormalized { norm });
    }
    let overlap = psi.dotc(dpsi);
    if overlap.re.abs() > 1e-9 {
        return Err(MetroError::NotNormalized { norm: 1.0 + 2.0 * overlap.re });
    }
    Ok(4.0 * (dpsi.dotc(dpsi).re - overlap.norm_sqr()))
}

/// Classical Fisher information `sum dp(x)^2 / p(x)`.
///
/// Vanishing outcomes (below `1e-15`) are admitted only when their derivative
/// also vanishes (below `1e-12`); otherwise the point is singular.
pub fn classical_fi(p: &[f64], dp: &[f64]) -> Result<f64> {
    if p.len() != dp.len() {
        return Err(MetroError::DimensionMismatch { expected: p.len(), got: dp.len() });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MetroError::NotNormalized { norm: total });
    }
    let dtotal: f64 = dp.iter().sum();
    if dtotal.abs() > 1e-9 {
        return Err(MetroError::InvalidParameter(format!(
            "probability derivative must sum to zero, got {}",
            dtotal
        )));
    }
    let mut f = 0.0;
    for (i, (&pi, &dpi)) in p.iter().zip(dp).enumerate() {
        if pi < 1e-15 {
            if dpi.abs() >= 1e-12 {
                return Err(MetroError::SingularPdf { index: i });
            }
            continue;
        }
        f += dpi * dpi / pi;
    }
    Ok(f)
}

/// QFI through the purification route: `4 min_h <psi| alpha(h) |psi>` over
/// Hermitian Kraus gauges `h`, solved as a semidefinite program on the
/// Schur-complement lifting of the stacked vector `v(h)_i = K'_i(h) |psi>`.
///
/// Equals [`qfi_state`] of the channel output; the agreement is the
/// cross-check used throughout the test suite. `tol <= 0` selects the default
/// duality-gap tolerance.
pub fn qfi_purification_min(k: &KrausSet, psi_in: &CVec, tol: f64) -> Result<f64> {
    if psi_in.len() != k.d_in {
        return Err(MetroError::DimensionMismatch { expected: k.d_in, got: psi_in.len() });
    }
    let norm = psi_in.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(MetroError::NotNormalized { norm });
    }
    let r = k.num_kraus();
    let dim = r * k.d_out;
    let stack = |set: &KrausSet| {
        let mut v = CVec::zeros(dim);
        for (i, dk) in set.dkraus.iter().enumerate() {
            let w = dk * psi_in;
            for a in 0..k.d_out {
                v[i * k.d_out + a] = w[a];
            }
        }
        v
    };
    let v0 = stack(k);
    // Basis directions: v(x) = v0 - i sum_m x_m w_m with w_m the stacked
    // action of the m-th Hermitian basis element on the Kraus list.
    let basis = hermitian_basis(r);
    let mut dirs = Vec::with_capacity(basis.len());
    for hm in &basis {
        let mut w = CVec::zeros(dim);
        for i in 0..r {
            let mut acc = CVec::zeros(k.d_out);
            for (j, kj) in k.kraus.iter().enumerate() {
                acc += (kj * psi_in).map(|z| z * hm[(i, j)]);
            }
            for a in 0..k.d_out {
                w[i * k.d_out + a] = acc[a];
            }
        }
        dirs.push(w.map(|z| z * c64(0.0, -1.0)));
    }
    // LMI [[t, v^dag], [v, I]] >= 0 iff t >= ||v||^2.
    let nvars = basis.len() + 1;
    let mut f0 = CMat::identity(dim + 1, dim + 1);
    f0[(0, 0)] = c64(0.0, 0.0);
    embed_vector(&mut f0, &v0);
    let mut fi = Vec::with_capacity(nvars);
    for w in &dirs {
        let mut f = CMat::zeros(dim + 1, dim + 1);
        embed_vector(&mut f, w);
        fi.push(f);
    }
    let mut ft = CMat::zeros(dim + 1, dim + 1);
    ft[(0, 0)] = c64(1.0, 0.0);
    fi.push(ft);
    let mut objective = vec![0.0; nvars];
    objective[nvars - 1] = 1.0;
    let problem = SdpProblem { nvars, objective, blocks: vec![SdpBlock { f0, fi }] };
    let mut x0 = vec![0.0; nvars];
    x0[nvars - 1] = v0.norm_squared() + 1.0;
    let gap_tol = if tol > 0.0 { tol } else { DEFAULT_GAP_TOL };
    let sol = solve_from(&problem, &x0, gap_tol, DEFAULT_MAX_ITER)
        .map_err(|e| MetroError::SolverFailure(format!("purification QFI SDP: {}", e)))?;
    Ok(4.0 * sol.primal_value)
}

/// Writes `v` into the first column and row of the bordered matrix `f`.
fn embed_vector(f: &mut CMat, v: &CVec) {
    for (a, &z) in v.iter().enumerate() {
        f[(a + 1, 0)] = z;
        f[(0, a + 1)] = z.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply, make_noise_channel, NoiseKind, NoiseModel, ParamLabel};
    use crate::numerics::{frobenius_norm, kron, SplitMix64};

    fn plus_state() -> CVec {
        CVec::from_vec(vec![c64(1.0, 0.0), c64(1.0, 0.0)]).map(|z| z / 2.0f64.sqrt())
    }

    fn pure_density(psi: &CVec) -> CMat {
        psi * psi.adjoint()
    }

    fn random_pure(rng: &mut SplitMix64, d: usize) -> CVec {
        let v = CVec::from_fn(d, |_, _| c64(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
        let n = v.norm();
        v.map(|z| z / n)
    }

    fn random_channel(rng: &mut SplitMix64, d: usize, r: usize) -> Vec<CMat> {
        // r Kraus operators from the first d columns of a random isometry.
        let g = CMat::from_fn(r * d, d, |_, _| c64(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
        let q = g.qr().q();
        (0..r).map(|i| q.rows(i * d, d).clone_owned()).collect()
    }

    #[test]
    fn classical_diagonal_state_reproduces_fi() {
        let p = 0.3f64;
        let dp = 0.17f64;
        let rho = CMat::from_diagonal(&CVec::from_vec(vec![c64(p, 0.0), c64(1.0 - p, 0.0)]));
        let drho = CMat::from_diagonal(&CVec::from_vec(vec![c64(dp, 0.0), c64(-dp, 0.0)]));
        let s = ParametrizedState::new(rho, drho).unwrap();
        let want = dp * dp / (p * (1.0 - p));
        assert!((qfi_state(&s).unwrap() - want).abs() < 1e-12);
        assert!((qfi_state_spectral(&s).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn sld_of_pure_unitary_family() {
        // |psi> = |+>, H = sigma_z/2, rho' = i[rho, H]; then L = 2 rho'.
        let psi = plus_state();
        let rho = pure_density(&psi);
        let h = CMat::from_diagonal(&CVec::from_vec(vec![c64(0.5, 0.0), c64(-0.5, 0.0)]));
        let comm = &rho * &h - &h * &rho;
        let drho = comm.map(|z| z * c64(0.0, 1.0));
        let s = ParametrizedState::new(rho, drho.clone()).unwrap();
        let l = sld(&s, 0.0).unwrap();
        assert!(frobenius_norm(&(&l - drho.map(|z| z * 2.0))) < 1e-10);
        assert!((qfi_state(&s).unwrap() - 1.0).abs() < 1e-10);
        // Zero derivative gives a zero SLD.
        let s0 = ParametrizedState::new(pure_density(&psi), CMat::zeros(2, 2)).unwrap();
        assert!(frobenius_norm(&sld(&s0, 0.0).unwrap()) < 1e-12);
        assert!(qfi_state(&s0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dephasing_output_qfi_routes_agree() {
        let k = make_noise_channel(NoiseModel::new(NoiseKind::Dephasing, 0.9), ParamLabel::Phase, 0.0)
            .unwrap();
        let s = channel_output_state(&k, &pure_density(&plus_state())).unwrap();
        let via_sld = qfi_state(&s).unwrap();
        let via_spectral = qfi_state_spectral(&s).unwrap();
        let l = sld(&s, 0.0).unwrap();
        let via_l2 = (&s.rho * &l * &l).trace().re;
        assert!((via_sld - 0.81).abs() < 1e-10);
        assert!((via_spectral - 0.81).abs() < 1e-10);
        assert!((via_l2 - 0.81).abs() < 1e-10);
    }

    #[test]
    fn pure_state_qfi_forms() {
        let psi = plus_state();
        // Pure gauge: dpsi = i a psi carries no information.
        let dpsi = psi.map(|z| z * c64(0.0, 0.73));
        assert!(qfi_pure(&psi, &dpsi).unwrap().abs() < 1e-12);
        // Phase encoding with H = sigma_z/2 on |+>: dpsi = -iH psi, F = 1.
        let dpsi = CVec::from_vec(vec![
            psi[0] * c64(0.0, -0.5),
            psi[1] * c64(0.0, 0.5),
        ]);
        assert!((qfi_pure(&psi, &dpsi).unwrap() - 1.0).abs() < 1e-12);
        let unnorm = psi.map(|z| z * 1.1);
        assert!(matches!(qfi_pure(&unnorm, &dpsi), Err(MetroError::NotNormalized { .. })));
    }

    #[test]
    fn classical_fi_known_distributions() {
        // Binomial phase statistics carry FI exactly N.
        let n = 5usize;
        let phi = 0.9f64;
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        let mut p = Vec::new();
        let mut dp = Vec::new();
        for k in 0..=n {
            let binom = (crate::numerics::ln_binomial(n, k)).exp();
            let pk = binom * c.powi(2 * k as i32) * s.powi(2 * (n - k) as i32);
            let logderiv = (n - k) as f64 / s * (c / 2.0) - k as f64 / c * (s / 2.0);
            p.push(pk);
            dp.push(pk * 2.0 * logderiv);
        }
        assert!((classical_fi(&p, &dp).unwrap() - n as f64).abs() < 1e-10);

        // Uniform with no parameter dependence.
        assert!(classical_fi(&[0.25; 4], &[0.0; 4]).unwrap().abs() < 1e-15);

        // Parity readout of the noiseless N-photon interferometer: F = N^2.
        let n = 3.0f64;
        let p = [(1.0 + (n * phi).cos()) / 2.0, (1.0 - (n * phi).cos()) / 2.0];
        let dp = [-n * (n * phi).sin() / 2.0, n * (n * phi).sin() / 2.0];
        assert!((classical_fi(&p, &dp).unwrap() - 9.0).abs() < 1e-10);

        assert!(matches!(
            classical_fi(&[1.0, 0.0], &[0.5, -0.5]),
            Err(MetroError::SingularPdf { index: 1 })
        ));
    }

    #[test]
    fn purification_min_matches_state_qfi() {
        let psi = plus_state();
        for (kind, eta) in [
            (NoiseKind::Dephasing, 0.9),
            (NoiseKind::Depolarization, 0.75),
            (NoiseKind::Loss, 0.8),
            (NoiseKind::SpontaneousEmission, 0.6),
        ] {
            let k = make_noise_channel(NoiseModel::new(kind, eta), ParamLabel::Phase, 0.0).unwrap();
            let direct = qfi_state(&channel_output_state(&k, &pure_density(&psi)).unwrap()).unwrap();
            let variational = qfi_purification_min(&k, &psi, 0.0).unwrap();
            assert!(
                (direct - variational).abs() < 1e-7,
                "{:?}: direct {} vs variational {}",
                kind,
                direct,
                variational
            );
        }
        // Unitary channel: the variational value equals the pure-state QFI.
        let noiseless =
            make_noise_channel(NoiseModel::new(NoiseKind::Dephasing, 1.0), ParamLabel::Phase, 0.0)
                .unwrap();
        let v = qfi_purification_min(&noiseless, &psi, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-7);
    }

    #[test]
    fn qfi_monotone_under_channels_and_convex() {
        let mut rng = SplitMix64::new(23);
        let k = make_noise_channel(NoiseModel::new(NoiseKind::Dephasing, 0.85), ParamLabel::Phase, 0.0)
            .unwrap();
        for _ in 0..10 {
            let psi = random_pure(&mut rng, 2);
            let s = channel_output_state(&k, &pure_density(&psi)).unwrap();
            let before = qfi_state(&s).unwrap();
            // A random parameter-independent channel can only lose information.
            let post = random_channel(&mut rng, 2, 2);
            let rho2: CMat = post.iter().map(|kk| kk * &s.rho * kk.adjoint()).sum();
            let drho2: CMat = post.iter().map(|kk| kk * &s.drho * kk.adjoint()).sum();
            let after = qfi_state(&ParametrizedState::new(rho2, drho2).unwrap()).unwrap();
            assert!(after <= before + 1e-8);

            // Convexity on a random binary mixture.
            let psi_b = random_pure(&mut rng, 2);
            let sb = channel_output_state(&k, &pure_density(&psi_b)).unwrap();
            let w = 0.25 + 0.5 * rng.next_f64();
            let mix = ParametrizedState::new(
                s.rho.map(|z| z * w) + sb.rho.map(|z| z * (1.0 - w)),
                s.drho.map(|z| z * w) + sb.drho.map(|z| z * (1.0 - w)),
            )
            .unwrap();
            let f_mix = qfi_state(&mix).unwrap();
            let f_avg = w * before + (1.0 - w) * qfi_state(&sb).unwrap();
            assert!(f_mix <= f_avg + 1e-8);
        }
    }

    #[test]
    fn qfi_additive_on_products() {
        let mut rng = SplitMix64::new(31);
        let ka = make_noise_channel(NoiseModel::new(NoiseKind::Dephasing, 0.8), ParamLabel::Phase, 0.0)
            .unwrap();
        let kb = make_noise_channel(NoiseModel::new(NoiseKind::Depolarization, 0.7), ParamLabel::Phase, 0.0)
            .unwrap();
        for _ in 0..5 {
            let sa = channel_output_state(&ka, &pure_density(&random_pure(&mut rng, 2))).unwrap();
            let sb = channel_output_state(&kb, &pure_density(&random_pure(&mut rng, 2))).unwrap();
            let rho = kron(&sa.rho, &sb.rho);
            let drho = kron(&sa.drho, &sb.rho) + kron(&sa.rho, &sb.drho);
            let joint = qfi_state(&ParametrizedState::new(rho, drho).unwrap()).unwrap();
            let separate = qfi_state(&sa).unwrap() + qfi_state(&sb).unwrap();
            assert!((joint - separate).abs() < 1e-8);
        }
    }

    #[test]
    fn output_state_dimension_guard() {
        let k = make_noise_channel(NoiseModel::new(NoiseKind::Loss, 0.5), ParamLabel::Phase, 0.0)
            .unwrap();
        assert!(channel_output_state(&k, &CMat::identity(3, 3)).is_err());
        let out = channel_output_state(&k, &pure_density(&plus_state())).unwrap();
        assert_eq!(out.rho.nrows(), 3);
        let _ = apply(&k, &pure_density(&plus_state())).unwrap();
    }
}
