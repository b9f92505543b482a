//! Kraus and Choi representations of parametrized noisy channels.
//!
//! Every channel family here depends on one real working parameter: either an
//! encoded phase (the unitary `U_phi = exp(-i sigma_z phi / 2)` followed by
//! noise) or the noise strength `eta` itself. Kraus sets carry matched
//! analytic derivatives so downstream bounds never need finite differences.
//! Vectorization is out-major: `|K>` has component `a * d_in + j = K[(a, j)]`,
//! and partial traces over the output contract the first factor.

use crate::error::{MetroError, Result};
use crate::numerics::{
    c64, default_support_cut, hermitian_eig, in_support, operator_norm_general, CMat, CVec,
};

/// Working parameter of a channel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamLabel {
    /// Encoded phase; noise acts after `U_phi = exp(-i sigma_z phi / 2)`.
    Phase,
    /// Noise strength `eta` of the pure-noise map.
    Strength,
}

/// Noise families with closed-form Kraus representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Dephasing,
    Depolarization,
    Loss,
    SpontaneousEmission,
    LossyInterferometer,
}

/// A noise model instance; `eta_b` is read only by the two-arm interferometer.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub eta: f64,
    pub eta_b: f64,
}

impl NoiseModel {
    /// Single-strength model; the interferometer gets equal arms.
    pub fn new(kind: NoiseKind, eta: f64) -> Self {
        NoiseModel { kind, eta, eta_b: eta }
    }

    /// Two-arm lossy interferometer with transmittances `eta_a`, `eta_b`.
    pub fn interferometer(eta_a: f64, eta_b: f64) -> Self {
        NoiseModel { kind: NoiseKind::LossyInterferometer, eta: eta_a, eta_b }
    }
}

/// Kraus operators of a channel together with matched parameter derivatives.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub d_in: usize,
    pub d_out: usize,
    /// `r` operators of shape `d_out x d_in`.
    pub kraus: Vec<CMat>,
    /// `dK_i/dp` at `point`, same shapes.
    pub dkraus: Vec<CMat>,
    pub param: ParamLabel,
    pub point: f64,
}

impl KrausSet {
    /// Number of Kraus operators (zero operators are kept, so this is the
    /// representation size, not the channel rank).
    pub fn num_kraus(&self) -> usize {
        self.kraus.len()
    }

    /// `||sum K_i^dag K_i - I||` (trace preservation residual).
    pub fn tp_residual(&self) -> f64 {
        let mut s = CMat::identity(self.d_in, self.d_in).map(|z| -z);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        operator_norm_general(&s).unwrap_or(f64::INFINITY)
    }

    /// `||sum K'_i^dag K_i + K_i^dag K'_i||` (TP preserved along parameter).
    pub fn dtp_residual(&self) -> f64 {
        let mut s = CMat::zeros(self.d_in, self.d_in);
        for (k, dk) in self.kraus.iter().zip(&self.dkraus) {
            s += dk.adjoint() * k + k.adjoint() * dk;
        }
        operator_norm_general(&s).unwrap_or(f64::INFINITY)
    }
}

/// Choi matrix of a channel and its parameter derivative.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    /// `Omega = sum_i |K_i><K_i|`, PSD with trace `d_in`.
    pub omega: CMat,
    /// `dOmega/dp`, Hermitian with vanishing partial trace over the output.
    pub domega: CMat,
    pub d_in: usize,
    pub d_out: usize,
    pub param: ParamLabel,
    pub point: f64,
}

fn pauli(i: usize) -> CMat {
    match i {
        1 => CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]),
        2 => CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)]),
        3 => CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)]),
        _ => CMat::identity(2, 2),
    }
}

/// `U_phi = exp(-i sigma_z phi / 2) = diag(e^{-i phi/2}, e^{i phi/2})`.
fn u_phase(phi: f64) -> CMat {
    let mut u = CMat::zeros(2, 2);
    u[(0, 0)] = c64(0.0, -phi / 2.0).exp();
    u[(1, 1)] = c64(0.0, phi / 2.0).exp();
    u
}

/// `dU_phi/dphi U_phi^dag |_{phi=0} = -i sigma_z / 2`, the phase generator.
fn phase_generator() -> CMat {
    pauli(3).map(|z| z * c64(0.0, -0.5))
}

/// Single elementary matrix `E[(r, c)] = 1` of shape `rows x cols`.
fn unit_matrix(rows: usize, cols: usize, r: usize, c: usize) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    m[(r, c)] = c64(1.0, 0.0);
    m
}

/// Pure-noise Kraus operators at strength `eta` for the four qubit families.
fn noise_operators(kind: NoiseKind, eta: f64) -> Vec<CMat> {
    match kind {
        NoiseKind::Dephasing => {
            let c1 = ((1.0 + eta) / 2.0).sqrt();
            let c2 = ((1.0 - eta) / 2.0).sqrt();
            vec![pauli(0).map(|z| z * c1), pauli(3).map(|z| z * c2)]
        }
        NoiseKind::Depolarization => {
            let c1 = ((1.0 + 3.0 * eta) / 4.0).sqrt();
            let c = ((1.0 - eta) / 4.0).sqrt();
            vec![
                pauli(0).map(|z| z * c1),
                pauli(1).map(|z| z * c),
                pauli(2).map(|z| z * c),
                pauli(3).map(|z| z * c),
            ]
        }
        NoiseKind::Loss => {
            // Qubit to qutrit: levels 0,1 survive with sqrt(eta); both decay
            // into the vacuum level 2 with sqrt(1 - eta).
            let mut j = CMat::zeros(3, 2);
            j[(0, 0)] = c64(eta.sqrt(), 0.0);
            j[(1, 1)] = c64(eta.sqrt(), 0.0);
            let s = (1.0 - eta).sqrt();
            vec![j, unit_matrix(3, 2, 2, 0).map(|z| z * s), unit_matrix(3, 2, 2, 1).map(|z| z * s)]
        }
        NoiseKind::SpontaneousEmission => {
            let mut k1 = CMat::zeros(2, 2);
            k1[(0, 0)] = c64(1.0, 0.0);
            k1[(1, 1)] = c64(eta.sqrt(), 0.0);
            let s = (1.0 - eta).sqrt();
            vec![k1, unit_matrix(2, 2, 0, 1).map(|z| z * s)]
        }
        NoiseKind::LossyInterferometer => unreachable!("handled by its own constructor"),
    }
}

/// Analytic `d/d eta` of [`noise_operators`]; requires `eta` in (0, 1).
fn noise_operator_derivatives(kind: NoiseKind, eta: f64) -> Vec<CMat> {
    match kind {
        NoiseKind::Dephasing => {
            let c1 = ((1.0 + eta) / 2.0).sqrt();
            let c2 = ((1.0 - eta) / 2.0).sqrt();
            vec![pauli(0).map(|z| z / (4.0 * c1)), pauli(3).map(|z| -z / (4.0 * c2))]
        }
        NoiseKind::Depolarization => {
            let c1 = ((1.0 + 3.0 * eta) / 4.0).sqrt();
            let c = ((1.0 - eta) / 4.0).sqrt();
            vec![
                pauli(0).map(|z| z * 3.0 / (8.0 * c1)),
                pauli(1).map(|z| -z / (8.0 * c)),
                pauli(2).map(|z| -z / (8.0 * c)),
                pauli(3).map(|z| -z / (8.0 * c)),
            ]
        }
        NoiseKind::Loss => {
            let mut j = CMat::zeros(3, 2);
            j[(0, 0)] = c64(1.0 / (2.0 * eta.sqrt()), 0.0);
            j[(1, 1)] = c64(1.0 / (2.0 * eta.sqrt()), 0.0);
            let s = -1.0 / (2.0 * (1.0 - eta).sqrt());
            vec![j, unit_matrix(3, 2, 2, 0).map(|z| z * s), unit_matrix(3, 2, 2, 1).map(|z| z * s)]
        }
        NoiseKind::SpontaneousEmission => {
            let mut k1 = CMat::zeros(2, 2);
            k1[(1, 1)] = c64(1.0 / (2.0 * eta.sqrt()), 0.0);
            let s = -1.0 / (2.0 * (1.0 - eta).sqrt());
            vec![k1, unit_matrix(2, 2, 0, 1).map(|z| z * s)]
        }
        NoiseKind::LossyInterferometer => unreachable!("handled by its own constructor"),
    }
}

/// Builds the Kraus set of a noise model in the requested parametrization.
///
/// Phase: `K_i(phi) = B_i U_phi` with derivative `K_i (-i sigma_z / 2)`,
/// evaluated at `phi = point`; any `eta` in [0, 1] is allowed and vanishing
/// operators are kept so the representation size is fixed per family.
/// Strength: operators and analytic `d/d eta` at `eta = point`, which must
/// equal the model's own `eta` and lie strictly inside (0, 1) so the
/// square-root derivatives stay finite.
pub fn make_noise_channel(m: NoiseModel, param: ParamLabel, point: f64) -> Result<KrausSet> {
    if m.kind == NoiseKind::LossyInterferometer {
        return match param {
            ParamLabel::Phase => lossy_interferometer_channel(m.eta, m.eta_b, point),
            ParamLabel::Strength => Err(MetroError::InvalidParameter(
                "strength parametrization is not defined for the two-arm interferometer".into(),
            )),
        };
    }
    if !(0.0..=1.0).contains(&m.eta) {
        return Err(MetroError::InvalidParameter(format!(
            "noise strength must lie in [0, 1], got {}",
            m.eta
        )));
    }
    let d_out = if m.kind == NoiseKind::Loss { 3 } else { 2 };
    match param {
        ParamLabel::Phase => {
            let u = u_phase(point);
            let gen = phase_generator();
            let kraus: Vec<CMat> = noise_operators(m.kind, m.eta).iter().map(|b| b * &u).collect();
            let dkraus: Vec<CMat> = kraus.iter().map(|k| k * &gen).collect();
            Ok(KrausSet { d_in: 2, d_out, kraus, dkraus, param, point })
        }
        ParamLabel::Strength => {
            if !(m.eta > 0.0 && m.eta < 1.0) {
                return Err(MetroError::InvalidParameter(format!(
                    "strength derivatives require eta in (0, 1), got {}",
                    m.eta
                )));
            }
            if (point - m.eta).abs() > 1e-12 {
                return Err(MetroError::InvalidParameter(format!(
                    "strength working point {} must equal the model eta {}",
                    point, m.eta
                )));
            }
            let kraus = noise_operators(m.kind, m.eta);
            let dkraus = noise_operator_derivatives(m.kind, m.eta);
            Ok(KrausSet { d_in: 2, d_out, kraus, dkraus, param, point })
        }
    }
}

/// Two-arm lossy interferometer: qubit (which-arm) to qutrit (arms + vacuum).
///
/// `K_1` transmits arm `a` (`b`) with `sqrt(eta_a)` (`sqrt(eta_b)`); `K_2`,
/// `K_3` scatter each arm into the vacuum level. All three are composed with
/// `U_phi` at `phi0`, so the derivative is `K_i (-i sigma_z / 2)`. The
/// representation always keeps `r = 3`, so a lossless arm contributes a zero
/// operator rather than shrinking the set.
pub fn lossy_interferometer_channel(eta_a: f64, eta_b: f64, phi0: f64) -> Result<KrausSet> {
    for eta in [eta_a, eta_b] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(MetroError::InvalidParameter(format!(
                "arm transmittance must lie in (0, 1], got {}",
                eta
            )));
        }
    }
    let mut b1 = CMat::zeros(3, 2);
    b1[(0, 0)] = c64(eta_a.sqrt(), 0.0);
    b1[(1, 1)] = c64(eta_b.sqrt(), 0.0);
    let b2 = unit_matrix(3, 2, 2, 0).map(|z| z * (1.0 - eta_a).sqrt());
    let b3 = unit_matrix(3, 2, 2, 1).map(|z| z * (1.0 - eta_b).sqrt());
    let u = u_phase(phi0);
    let gen = phase_generator();
    let kraus: Vec<CMat> = [b1, b2, b3].iter().map(|b| b * &u).collect();
    let dkraus: Vec<CMat> = kraus.iter().map(|k| k * &gen).collect();
    Ok(KrausSet { d_in: 2, d_out: 3, kraus, dkraus, param: ParamLabel::Phase, point: phi0 })
}

/// Out-major vectorization: component `a * d_in + j` is `K[(a, j)]`.
fn vec_out_major(k: &CMat) -> CVec {
    let (d_out, d_in) = k.shape();
    let mut v = CVec::zeros(d_out * d_in);
    for a in 0..d_out {
        for j in 0..d_in {
            v[a * d_in + j] = k[(a, j)];
        }
    }
    v
}

/// Inverse of [`vec_out_major`].
fn unvec_out_major(v: &CVec, d_out: usize, d_in: usize) -> CMat {
    let mut k = CMat::zeros(d_out, d_in);
    for a in 0..d_out {
        for j in 0..d_in {
            k[(a, j)] = v[a * d_in + j];
        }
    }
    k
}

/// Partial trace over the output (first) factor of a `d_out d_in` square
/// matrix, returning a `d_in x d_in` matrix.
pub fn partial_trace_out(m: &CMat, d_out: usize, d_in: usize) -> CMat {
    let mut t = CMat::zeros(d_in, d_in);
    for a in 0..d_out {
        for i in 0..d_in {
            for j in 0..d_in {
                t[(i, j)] += m[(a * d_in + i, a * d_in + j)];
            }
        }
    }
    t
}

/// Choi matrix `Omega = sum |K_i><K_i|` and derivative
/// `dOmega = sum |K'_i><K_i| + |K_i><K'_i|`.
pub fn choi_from_kraus(k: &KrausSet) -> ChoiMatrix {
    let d = k.d_in * k.d_out;
    let mut omega = CMat::zeros(d, d);
    let mut domega = CMat::zeros(d, d);
    for (kk, dk) in k.kraus.iter().zip(&k.dkraus) {
        let v = vec_out_major(kk);
        let dv = vec_out_major(dk);
        omega += &v * v.adjoint();
        domega += &dv * v.adjoint() + &v * dv.adjoint();
    }
    ChoiMatrix { omega, domega, d_in: k.d_in, d_out: k.d_out, param: k.param, point: k.point }
}

/// Canonical Kraus operators `K_i = sqrt(lambda_i) unvec(psi_i)` from the
/// spectral decomposition of the Choi matrix, eigenvalues descending.
///
/// Derivatives are recovered from the in-support expansion of `dOmega` with
/// the anti-Hermitian gauge set to zero: `<psi_b|K'_a> = mu_ba / (2
/// sqrt(lambda_a))` with `mu = psi^dag dOmega psi`. This is complete only if
/// `dOmega` lives on the support of `Omega`; otherwise the derivative has a
/// kernel component no gauge can remove and the function reports
/// `RankDeficientDerivative`, the operational signal of an extremal point.
/// `tol <= 0` selects the default support cut.
pub fn canonical_kraus(c: &ChoiMatrix, tol: f64) -> Result<KrausSet> {
    let eig = hermitian_eig(&c.omega)?;
    let cut = if tol > 0.0 { tol } else { default_support_cut(&c.omega)? };
    if let Some(&lmin) = eig.eigenvalues.first() {
        if lmin < -cut {
            return Err(MetroError::NegativeEigenvalue { lambda_min: lmin });
        }
    }
    if !in_support(&c.omega, &c.domega, 1e-8)? {
        return Err(MetroError::RankDeficientDerivative);
    }
    // Support indices, descending eigenvalue.
    let idx: Vec<usize> = (0..eig.eigenvalues.len()).rev().filter(|&i| eig.eigenvalues[i] > cut).collect();
    let r = idx.len();
    let psi: Vec<CVec> = idx.iter().map(|&i| CVec::from(eig.eigenvectors.column(i).clone_owned())).collect();
    let lam: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut kraus = Vec::with_capacity(r);
    let mut dkraus = Vec::with_capacity(r);
    for a in 0..r {
        kraus.push(unvec_out_major(&psi[a].map(|z| z * lam[a].sqrt()), c.d_out, c.d_in));
        let mut dv = CVec::zeros(c.d_in * c.d_out);
        for pb in &psi {
            let mu_ba = (pb.adjoint() * &c.domega * &psi[a])[(0, 0)];
            dv += pb.map(|z| z * mu_ba / (2.0 * lam[a].sqrt()));
        }
        dkraus.push(unvec_out_major(&dv, c.d_out, c.d_in));
    }
    Ok(KrausSet { d_in: c.d_in, d_out: c.d_out, kraus, dkraus, param: c.param, point: c.point })
}

/// Shifts the derivative pairs by an `r x r` Hermitian gauge generator:
/// `K_i` unchanged, `K'_i -> K'_i - i sum_j h_ij K_j`.
pub fn rotate_kraus(k: &KrausSet, h: &CMat) -> Result<KrausSet> {
    let r = k.num_kraus();
    if h.nrows() != r || h.ncols() != r {
        return Err(MetroError::DimensionMismatch { expected: r, got: h.nrows() });
    }
    let mut out = k.clone();
    for (i, dk) in out.dkraus.iter_mut().enumerate() {
        for (j, kj) in k.kraus.iter().enumerate() {
            *dk -= kj.map(|z| z * c64(0.0, 1.0) * h[(i, j)]);
        }
    }
    Ok(out)
}

/// `alpha = sum K'_i^dag K'_i` and `beta = i sum K'_i^dag K_i`, both
/// symmetrized; `beta` is Hermitian up to the TP-derivative residual.
pub fn alpha_beta(k: &KrausSet) -> (CMat, CMat) {
    let mut alpha = CMat::zeros(k.d_in, k.d_in);
    let mut beta = CMat::zeros(k.d_in, k.d_in);
    for (kk, dk) in k.kraus.iter().zip(&k.dkraus) {
        alpha += dk.adjoint() * dk;
        beta += (dk.adjoint() * kk).map(|z| z * c64(0.0, 1.0));
    }
    let alpha_h = (&alpha + alpha.adjoint()).map(|z| z * 0.5);
    let beta_h = (&beta + beta.adjoint()).map(|z| z * 0.5);
    (alpha_h, beta_h)
}

/// Channel action `sum K_i rho K_i^dag`.
pub fn apply(k: &KrausSet, rho: &CMat) -> Result<CMat> {
    if rho.nrows() != k.d_in || rho.ncols() != k.d_in {
        return Err(MetroError::DimensionMismatch { expected: k.d_in, got: rho.nrows() });
    }
    let mut out = CMat::zeros(k.d_out, k.d_out);
    for kk in &k.kraus {
        out += kk * rho * kk.adjoint();
    }
    Ok(out)
}
