//! Extremality analysis and classical-simulation geometry.
//!
//! A channel family is classically simulable at a point when the Choi
//! derivative stays inside the Choi support: the family then embeds in a
//! classical mixture of the two boundary channels `Omega - eps_plus dOmega`
//! and `Omega + eps_minus dOmega`, and estimating the mixing weight bounds
//! the QFI by `1 / (eps_plus eps_minus)`.

use crate::bounds::{Applicability, BoundReport, Certificate, Method};
use crate::channels::{ChoiMatrix, KrausSet, ParamLabel};
use crate::error::{MetroError, Result};
use crate::numerics::{c64, default_support_cut, hermitian_eig, in_support, CMat};

/// Reach of the channel family inside the channel set along `dOmega`, and
/// the resulting QFI bound.
#[derive(Debug, Clone, Copy)]
pub struct CsDecomposition {
    /// Largest `eps` with `Omega - eps dOmega` still a channel.
    pub eps_plus: f64,
    /// Largest `eps` with `Omega + eps dOmega` still a channel.
    pub eps_minus: f64,
    /// `1 / (eps_plus eps_minus)`.
    pub bound: f64,
}

/// Whether the channel is an extremal point of the channel set: the products
/// `K_i^dag K_j` of an independent Kraus representation must be linearly
/// independent. Zero or redundant operators in `k` lower the detected rank,
/// so canonicalize first when the representation is not known to be minimal.
pub fn is_extremal(k: &KrausSet, tol: f64) -> Result<bool> {
    let r = k.num_kraus();
    let products: Vec<CMat> = (0..r * r)
        .map(|idx| k.kraus[idx / r].adjoint() * &k.kraus[idx % r])
        .collect();
    let mut gram = CMat::zeros(r * r, r * r);
    for (a, pa) in products.iter().enumerate() {
        for (b, pb) in products.iter().enumerate() {
            gram[(a, b)] = (pa.adjoint() * pb).trace();
        }
    }
    let eig = hermitian_eig(&gram)?;
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0);
    let cut = if tol > 0.0 { tol } else { 1e-8 * top.max(1e-300) };
    let rank = eig.eigenvalues.iter().filter(|&&l| l > cut).count();
    Ok(rank == r * r)
}

/// Whether the Choi derivative stays inside the Choi support (the family is
/// not extremal in the direction of the parameter). `tol <= 0` selects the
/// default relative tolerance `1e-8`.
pub fn is_phi_nonextremal(c: &ChoiMatrix, tol: f64) -> Result<bool> {
    let t = if tol > 0.0 { tol } else { 1e-8 };
    in_support(&c.omega, &c.domega, t)
}

/// Classical-simulation reach along the derivative direction.
///
/// On the Choi support the derivative is expanded as
/// `m_ab = <psi_a| dOmega |psi_b> / sqrt(lambda_a lambda_b)`; the family
/// leaves the PSD cone at `eps_plus = 1 / lambda_max(m)` in the backward
/// direction and `eps_minus = 1 / |lambda_min(m)|` forward. Errors with
/// [`MetroError::NotClassicallySimulable`] at a derivative-extremal point
/// and [`MetroError::UnboundedEpsilon`] when `m` has no sign change (then no
/// finite mixture reproduces the family; unreachable for trace-preserving
/// families with a nonzero derivative).
pub fn cs_epsilons(c: &ChoiMatrix) -> Result<CsDecomposition> {
    if !is_phi_nonextremal(c, 0.0)? {
        return Err(MetroError::NotClassicallySimulable);
    }
    let eig = hermitian_eig(&c.omega)?;
    let cut = default_support_cut(&c.omega)?;
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > cut)
        .collect();
    let s = kept.len();
    let mut m = CMat::zeros(s, s);
    for (a, &ia) in kept.iter().enumerate() {
        for (b, &ib) in kept.iter().enumerate() {
            let va = eig.eigenvectors.column(ia);
            let vb = eig.eigenvectors.column(ib);
            let mut elem = c64(0.0, 0.0);
            for p in 0..c.domega.nrows() {
                for q in 0..c.domega.ncols() {
                    elem += va[p].conj() * c.domega[(p, q)] * vb[q];
                }
            }
            m[(a, b)] = elem / (eig.eigenvalues[ia] * eig.eigenvalues[ib]).sqrt();
        }
    }
    let meig = hermitian_eig(&m)?;
    let lmin = *meig.eigenvalues.first().expect("support is nonempty");
    let lmax = *meig.eigenvalues.last().expect("support is nonempty");
    let scale = lmax.abs().max(lmin.abs());
    let tiny = 1e-12 * (1.0 + scale);
    if lmax < tiny || -lmin < tiny {
        return Err(MetroError::UnboundedEpsilon);
    }
    Ok(CsDecomposition { eps_plus: 1.0 / lmax, eps_minus: 1.0 / (-lmin), bound: lmax * (-lmin) })
}

/// Classical-simulation bound as a [`BoundReport`].
///
/// A derivative-extremal point yields an inapplicable report rather than an
/// error, so tabulation over families stays total. For phase-type parameters
/// two-point mixing is optimal among classical simulations; for strength
/// parameters the value is a valid bound but not certified optimal.
pub fn cs_bound(c: &ChoiMatrix) -> Result<BoundReport> {
    match cs_epsilons(c) {
        Ok(dec) => Ok(BoundReport {
            method: Method::ClassicalSimulation,
            value: Some(dec.bound),
            h_opt: None,
            input_opt: None,
            certificate: Certificate {
                sdp_gap: None,
                beta_norm: None,
                alpha_eigs: None,
                applicability: Applicability::Ok,
            },
            note: Some(match c.param {
                ParamLabel::Phase => {
                    "two-point mixing is optimal for unitary parameter encodings".into()
                }
                ParamLabel::Strength => {
                    "valid simulation; two-point optimality not certified for strength parameters"
                        .into()
                }
            }),
        }),
        Err(MetroError::NotClassicallySimulable) => Ok(BoundReport {
            method: Method::ClassicalSimulation,
            value: None,
            h_opt: None,
            input_opt: None,
            certificate: Certificate {
                sdp_gap: None,
                beta_norm: None,
                alpha_eigs: None,
                applicability: Applicability::PhiExtremal,
            },
            note: Some("derivative leaves the Choi support; no mixing direction exists".into()),
        }),
        Err(e) => Err(e),
    }
}
