//! Lossy and noiseless Mach-Zehnder phase estimation.
//!
//! Frequentist side: exact block-diagonal output states at oracle scale, the
//! convexity upper bound on the output QFI (exact for single-arm losses),
//! simplex-constrained input optimization, the NOON closed form and the
//! finite-N / asymptotic loss bounds. Bayesian side: the flat-prior sine
//! cost, whose optimal input is the top eigenvector of a tridiagonal overlap
//! matrix, plus the coherent-input classical benchmark. The binomial suite
//! collects the worked single-phase estimator constructions.

use crate::error::{MetroError, Result};
use crate::fisher::{classical_fi, ParametrizedState};
use crate::numerics::{bell_half, c64, ln_gamma, tridiag_top_eigenpair, CMat, CVec};

/// Pure two-mode `N`-photon input `sum_n alpha_n |n, N - n>`.
#[derive(Debug, Clone)]
pub struct TwoModeState {
    /// Total photon number.
    pub n: usize,
    /// Coefficients over `|n, N - n>`, length `N + 1`, unit norm.
    pub alpha: CVec,
}

impl TwoModeState {
    pub fn new(alpha: CVec) -> Result<Self> {
        if alpha.is_empty() {
            return Err(MetroError::InvalidParameter("empty coefficient vector".into()));
        }
        let norm = alpha.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(MetroError::NotNormalized { norm });
        }
        Ok(TwoModeState { n: alpha.len() - 1, alpha })
    }

    /// `(|N, 0> + |0, N>) / sqrt(2)`.
    pub fn noon(n: usize) -> Self {
        let mut alpha = CVec::zeros(n + 1);
        alpha[0] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        alpha[n] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        if n == 0 {
            alpha[0] = c64(1.0, 0.0);
        }
        TwoModeState { n, alpha }
    }

    /// Coherent-light analogue: binomial coefficients of a 50:50 splitter.
    pub fn binomial(n: usize) -> Self {
        let alpha = CVec::from_fn(n + 1, |m, _| {
            c64((0.5 * (ln_binomial_f(n, m) - n as f64 * 2.0f64.ln())).exp(), 0.0)
        });
        TwoModeState { n, alpha }
    }

    /// Occupation probabilities `|alpha_n|^2`.
    pub fn weights(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn ln_binomial_f(n: usize, k: usize) -> f64 {
    crate::numerics::ln_binomial(n, k)
}

/// Transmission of the two arms and the photon budget.
#[derive(Debug, Clone, Copy)]
pub struct LossSetting {
    pub eta_a: f64,
    pub eta_b: f64,
    pub n: usize,
}

impl LossSetting {
    pub fn new(eta_a: f64, eta_b: f64, n: usize) -> Result<Self> {
        for eta in [eta_a, eta_b] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(MetroError::InvalidParameter(format!(
                    "transmission must lie in (0, 1], got {}",
                    eta
                )));
            }
        }
        Ok(LossSetting { eta_a, eta_b, n })
    }
}

/// First off-diagonal `A_{n,n-1}` of the Bayesian cost matrix.
#[derive(Debug, Clone)]
pub struct BayesCostMatrix {
    /// Entry `n - 1` holds `A_{n,n-1}`, `n = 1..N`; each lies in `[0, 1]`.
    pub offdiag: Vec<f64>,
}

/// `C(m, l) eta^(m-l) (1-eta)^l`, the chance of losing `l` of `m` photons.
fn arm_factor(m: usize, l: usize, eta: f64) -> f64 {
    if l > m {
        return 0.0;
    }
    if eta >= 1.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    (ln_binomial_f(m, l) + (m - l) as f64 * eta.ln() + l as f64 * (1.0 - eta).ln()).exp()
}

/// Probability that the component `|n, N - n>` loses exactly `l_a` photons
/// from arm `a` and `l_b` from arm `b`; zero outside `l_a <= n <= N - l_b`.
pub fn loss_coeff(n: usize, la: usize, lb: usize, s: &LossSetting) -> f64 {
    debug_assert!(n <= s.n);
    arm_factor(n, la, s.eta_a) * arm_factor(s.n - n, lb, s.eta_b)
}

const ORACLE_PHOTONS: usize = 10;

/// Index of `|m, N' - m>` inside the block-diagonal layout that stacks the
/// surviving-photon sectors `N' = 0..N`.
fn sector_index(n_prime: usize, m: usize) -> usize {
    n_prime * (n_prime + 1) / 2 + m
}

/// Exact interferometer output after two-arm loss, block-diagonal over
/// surviving-photon sectors (total dimension `(N+1)(N+2)/2`), with the phase
/// derivative when `with_derivative` is set. Oracle-scale only (`N <= 10`).
pub fn lossy_output_state(
    psi: &TwoModeState,
    s: &LossSetting,
    phi: f64,
    with_derivative: bool,
) -> Result<ParametrizedState> {
    if psi.n != s.n {
        return Err(MetroError::DimensionMismatch { expected: s.n, got: psi.n });
    }
    if s.n > ORACLE_PHOTONS {
        return Err(MetroError::ScaleLimit { requested: s.n, max: ORACLE_PHOTONS });
    }
    let nn = s.n;
    let dim = (nn + 1) * (nn + 2) / 2;
    let mut rho = CMat::zeros(dim, dim);
    let mut drho = CMat::zeros(dim, dim);
    for la in 0..=nn {
        for lb in 0..=(nn - la) {
            let n_prime = nn - la - lb;
            // Unnormalized component and its phase derivative.
            let mut xi = CVec::zeros(dim);
            let mut dxi = CVec::zeros(dim);
            for n in la..=(nn - lb) {
                let b = loss_coeff(n, la, lb, s);
                if b <= 0.0 {
                    continue;
                }
                let amp = psi.alpha[n] * b.sqrt() * c64(0.0, -(n as f64) * phi).exp();
                let idx = sector_index(n_prime, n - la);
                xi[idx] = amp;
                dxi[idx] = amp * c64(0.0, -(n as f64));
            }
            rho += &xi * xi.adjoint();
            if with_derivative {
                drho += &dxi * xi.adjoint() + &xi * dxi.adjoint();
            }
        }
    }
    ParametrizedState::new(rho, drho)
}

/// Per-component loss distributions `b_n` for every `(l_a, l_b)` pair with a
/// surviving photon, as rows over `n = 0..N`.
fn component_tables(s: &LossSetting) -> Vec<Vec<f64>> {
    let nn = s.n;
    let fa: Vec<Vec<f64>> =
        (0..=nn).map(|n| (0..=n).map(|la| arm_factor(n, la, s.eta_a)).collect()).collect();
    let fb: Vec<Vec<f64>> =
        (0..=nn).map(|m| (0..=m).map(|lb| arm_factor(m, lb, s.eta_b)).collect()).collect();
    let mut tables = Vec::new();
    for la in 0..=nn {
        if la > 0 && s.eta_a >= 1.0 {
            break;
        }
        for lb in 0..=(nn - la) {
            if lb > 0 && s.eta_b >= 1.0 {
                break;
            }
            let mut row = vec![0.0; nn + 1];
            for n in la..=(nn - lb) {
                row[n] = fa[n][la] * fb[nn - n][lb];
            }
            tables.push(row);
        }
    }
    tables
}

fn bound_from_weights(tables: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut total = 0.0;
    for b in tables {
        let (mut s0, mut s1, mut s2) = (0.0f64, 0.0, 0.0);
        for (n, (&bn, &xn)) in b.iter().zip(x).enumerate() {
            let w = bn * xn;
            s0 += w;
            s1 += w * n as f64;
            s2 += w * (n * n) as f64;
        }
        if s0 > 1e-300 {
            total += 4.0 * (s2 - s1 * s1 / s0);
        }
    }
    total
}

/// Convexity upper bound on the output QFI: each loss component contributes
/// its pure-state QFI. Exact whenever components never share a sector, in
/// particular for single-arm losses and for any loss at NOON inputs.
pub fn frequentist_bound(psi: &TwoModeState, s: &LossSetting) -> Result<f64> {
    if psi.n != s.n {
        return Err(MetroError::DimensionMismatch { expected: s.n, got: psi.n });
    }
    Ok(bound_from_weights(&component_tables(s), &psi.weights()))
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut theta = 0.0;
    let mut csum = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        csum += uk;
        let t = (csum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

const OPTIMIZER_PHOTONS: usize = 200;

/// Maximizes the QFI upper bound over input weights on the simplex
/// (projected gradient ascent with Armijo steps from the uniform start) and
/// returns the real-amplitude optimizer with its value.
pub fn optimize_frequentist_input(s: &LossSetting) -> Result<(TwoModeState, f64)> {
    if s.n > OPTIMIZER_PHOTONS {
        return Err(MetroError::ScaleLimit { requested: s.n, max: OPTIMIZER_PHOTONS });
    }
    if s.n == 0 {
        return Err(MetroError::InvalidParameter("need at least one photon".into()));
    }
    let tables = component_tables(s);
    let nb = s.n + 1;
    let grad = |x: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; nb];
        for b in &tables {
            let (mut s0, mut s1) = (0.0f64, 0.0);
            for (n, (&bn, &xn)) in b.iter().zip(x).enumerate() {
                s0 += bn * xn;
                s1 += bn * xn * n as f64;
            }
            if s0 <= 1e-300 {
                continue;
            }
            let mu = s1 / s0;
            for (n, (&bn, gi)) in b.iter().zip(g.iter_mut()).enumerate() {
                let d = n as f64 - mu;
                *gi += 4.0 * bn * d * d;
            }
        }
        g
    };
    let mut x = vec![1.0 / nb as f64; nb];
    let mut fx = bound_from_weights(&tables, &x);
    let mut converged = false;
    for _ in 0..5000 {
        let g = grad(&x);
        let gnorm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let probe = project_simplex(&x.iter().zip(&g).map(|(a, b)| a + b).collect::<Vec<_>>());
        let gap: f64 =
            probe.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if gap <= 1e-9 * (1.0 + gnorm) {
            converged = true;
            break;
        }
        let mut t = 1.0;
        let mut stepped = false;
        while t > 1e-18 {
            let y = project_simplex(
                &x.iter().zip(&g).map(|(a, b)| a + t * b).collect::<Vec<_>>(),
            );
            let moved: f64 =
                y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if moved <= 1e-15 * (1.0 + gnorm) {
                // Projection returned x itself; smaller steps cannot move either.
                break;
            }
            let fy = bound_from_weights(&tables, &y);
            let inner: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            if fy >= fx + 1e-4 * inner {
                x = y;
                fx = fy;
                stepped = true;
                break;
            }
            t *= 0.5;
        }
        if !stepped {
            // An Armijo stall on this concave objective means improvements are
            // below f64 resolution; accept if stationarity holds at the scale
            // set by the gradient itself.
            converged = gap <= 1e-5 * (1.0 + gnorm);
            break;
        }
    }
    if !converged {
        return Err(MetroError::ConvergenceFailure(
            "projected gradient did not reach the stationarity tolerance".into(),
        ));
    }
    let alpha = CVec::from_fn(nb, |i, _| c64(x[i].max(0.0).sqrt(), 0.0));
    let psi = TwoModeState::new(alpha.map(|z| z / alpha.norm()))?;
    Ok((psi, fx))
}

/// QFI of the NOON input under two-arm loss:
/// `2 (eta_a eta_b)^N / (eta_a^N + eta_b^N) * N^2`.
pub fn noon_qfi_lossy(s: &LossSetting) -> f64 {
    let nn = s.n as f64;
    let (lo, hi) = if s.eta_a <= s.eta_b { (s.eta_a, s.eta_b) } else { (s.eta_b, s.eta_a) };
    // log-space: N ln(eta_a eta_b) - ln(eta_a^N + eta_b^N).
    let ln_num = nn * (lo.ln() + hi.ln());
    let ln_den = nn * hi.ln() + (nn * (lo.ln() - hi.ln())).exp().ln_1p();
    2.0 * (ln_num - ln_den).exp() * nn * nn
}

/// Coefficient of the `1/N` classical (coherent-input) precision limit:
/// `Delta^2 phi >= (1/4)(1/sqrt(eta_a) + 1/sqrt(eta_b))^2 / N`.
pub fn classical_coherent_crb(s: &LossSetting) -> f64 {
    0.25 * (1.0 / s.eta_a.sqrt() + 1.0 / s.eta_b.sqrt()).powi(2)
}

/// Asymptotic per-photon QFI bound for the lossy interferometer,
/// `4 / (sqrt((1-eta_a)/eta_a) + sqrt((1-eta_b)/eta_b))^2`, with the diagonal
/// gauge generator that attains it on the single-photon channel.
pub fn asymptotic_loss_bound(s: &LossSetting) -> Result<(f64, CMat)> {
    if s.eta_a >= 1.0 && s.eta_b >= 1.0 {
        return Err(MetroError::Divergent(
            "noiseless interferometer has no asymptotic SQL-like bound".into(),
        ));
    }
    let ra = ((1.0 - s.eta_a) / s.eta_a).sqrt();
    let rb = ((1.0 - s.eta_b) / s.eta_b).sqrt();
    let value = 4.0 / (ra + rb).powi(2);
    let chi = value * (s.eta_a - s.eta_b) / (s.eta_a * s.eta_b);
    let h11 = if s.eta_a >= 1.0 {
        0.0
    } else {
        -(s.eta_a / (1.0 - s.eta_a)) * (4.0 / s.eta_a - chi) / 8.0
    };
    let h22 = if s.eta_b >= 1.0 {
        0.0
    } else {
        (s.eta_b / (1.0 - s.eta_b)) * (4.0 / s.eta_b + chi) / 8.0
    };
    let h = CMat::from_diagonal(&CVec::from_vec(vec![
        c64(-chi / 8.0, 0.0),
        c64(h11, 0.0),
        c64(h22, 0.0),
    ]));
    Ok((value, h))
}

/// Finite-N upper bound on the optimal-input QFI:
/// `(2N / (sqrt(1 + (1-eta_a)N/eta_a) + sqrt(1 + (1-eta_b)N/eta_b)))^2`.
pub fn escher_finite_n_bound(s: &LossSetting) -> f64 {
    let nn = s.n as f64;
    let ta = (1.0 + (1.0 - s.eta_a) * nn / s.eta_a).sqrt();
    let tb = (1.0 + (1.0 - s.eta_b) * nn / s.eta_b).sqrt();
    (2.0 * nn / (ta + tb)).powi(2)
}

/// Photon-number moments of the input: means and variances of the two arm
/// occupations and their covariance.
#[derive(Debug, Clone, Copy)]
pub struct JsMoments {
    pub mean_a: f64,
    pub var_a: f64,
    pub mean_b: f64,
    pub var_b: f64,
    pub cov: f64,
}

/// Moments of a definite-photon-number two-mode state (`n_b = N - n_a`).
pub fn two_mode_moments(psi: &TwoModeState) -> JsMoments {
    let x = psi.weights();
    let mean: f64 = x.iter().enumerate().map(|(n, w)| w * n as f64).sum();
    let sq: f64 = x.iter().enumerate().map(|(n, w)| w * (n * n) as f64).sum();
    let var = (sq - mean * mean).max(0.0);
    JsMoments {
        mean_a: mean,
        var_a: var,
        mean_b: psi.n as f64 - mean,
        var_b: var,
        cov: -var,
    }
}

/// Variational purification bound evaluated from input moments.
#[derive(Debug, Clone, Copy)]
pub struct JsBound {
    pub value: f64,
    /// Set when the quadratic was singular and the undressed value
    /// `Var(n_a - n_b)` was returned instead of a minimum.
    pub degenerate: bool,
}

/// Minimizes the dressed-generator variance
/// `u^2 var_a + w^2 var_b - 2 u w cov + (1-u)^2 c_a + (1-w)^2 c_b` with
/// `c_x = eta_x <n_x> / (1 - eta_x)`; `u = w = 1` is the noiseless point with
/// value `Var(n_a - n_b)`. A lossless arm pins its variable at 1; a singular
/// quadratic degrades to the noiseless value, flagged.
pub fn js_variational_bound(m: &JsMoments, s: &LossSetting) -> Result<JsBound> {
    if m.var_a < -1e-12 || m.var_b < -1e-12 {
        return Err(MetroError::InvalidParameter("negative variance".into()));
    }
    let scale = 1.0 + m.var_a.max(m.var_b).max(m.cov.abs());
    if m.cov.abs() > (m.var_a.max(0.0) * m.var_b.max(0.0)).sqrt() + 1e-9 * scale {
        return Err(MetroError::InvalidParameter("covariance violates Cauchy-Schwarz".into()));
    }
    let noiseless = (m.var_a + m.var_b - 2.0 * m.cov).max(0.0);
    let f = |u: f64, w: f64| {
        let mut v = u * u * m.var_a + w * w * m.var_b - 2.0 * u * w * m.cov;
        if s.eta_a < 1.0 {
            v += (1.0 - u) * (1.0 - u) * s.eta_a * m.mean_a / (1.0 - s.eta_a);
        }
        if s.eta_b < 1.0 {
            v += (1.0 - w) * (1.0 - w) * s.eta_b * m.mean_b / (1.0 - s.eta_b);
        }
        v
    };
    let tiny = 1e-12 * scale;
    let (value, degenerate) = if s.eta_a >= 1.0 && s.eta_b >= 1.0 {
        (noiseless, false)
    } else if s.eta_a >= 1.0 {
        let cb = s.eta_b * m.mean_b / (1.0 - s.eta_b);
        let q = m.var_b + cb;
        if q <= tiny {
            (noiseless, true)
        } else {
            (f(1.0, (m.cov + cb) / q), false)
        }
    } else if s.eta_b >= 1.0 {
        let ca = s.eta_a * m.mean_a / (1.0 - s.eta_a);
        let q = m.var_a + ca;
        if q <= tiny {
            (noiseless, true)
        } else {
            (f((m.cov + ca) / q, 1.0), false)
        }
    } else {
        let ca = s.eta_a * m.mean_a / (1.0 - s.eta_a);
        let cb = s.eta_b * m.mean_b / (1.0 - s.eta_b);
        let det = (m.var_a + ca) * (m.var_b + cb) - m.cov * m.cov;
        if det <= tiny * tiny.max(1.0) {
            (noiseless, true)
        } else {
            let u = (ca * (m.var_b + cb) + cb * m.cov) / det;
            let w = (cb * (m.var_a + ca) + ca * m.cov) / det;
            (f(u, w), false)
        }
    };
    Ok(JsBound { value: value.max(0.0), degenerate })
}

const BAYES_PHOTONS: usize = 5000;

/// Off-diagonal overlaps `A_{n,n-1} = sum_{l_a,l_b} sqrt(b_n b_{n-1})` of the
/// Bayesian sine-cost matrix; the double sum factorizes per arm.
pub fn bayes_cost_matrix(s: &LossSetting) -> Result<BayesCostMatrix> {
    if s.n > BAYES_PHOTONS {
        return Err(MetroError::ScaleLimit { requested: s.n, max: BAYES_PHOTONS });
    }
    let nn = s.n;
    // ln k! table so inner terms avoid repeated ln_gamma evaluations.
    let lf: Vec<f64> = {
        let mut v = vec![0.0f64; nn + 2];
        for k in 1..v.len() {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    };
    let ln_choose = |n: usize, k: usize| lf[n] - lf[k] - lf[n - k];
    // sum_l sqrt(f(m, l) f(m-1, l)) for one arm with transmission eta.
    let arm_overlap = |m: usize, eta: f64| -> f64 {
        if eta >= 1.0 {
            return 1.0;
        }
        let (le, l1e) = (eta.ln(), (1.0 - eta).ln());
        let mut total = 0.0;
        for l in 0..m {
            let ln_f_m = ln_choose(m, l) + (m - l) as f64 * le + l as f64 * l1e;
            let ln_f_m1 = ln_choose(m - 1, l) + (m - 1 - l) as f64 * le + l as f64 * l1e;
            total += (0.5 * (ln_f_m + ln_f_m1)).exp();
        }
        total
    };
    let offdiag: Vec<f64> = (1..=nn)
        .map(|n| (arm_overlap(n, s.eta_a) * arm_overlap(nn - n + 1, s.eta_b)).min(1.0))
        .collect();
    Ok(BayesCostMatrix { offdiag })
}

/// Minimal flat-prior average sine cost `2 - lambda_max(A)` and the optimal
/// input, the nonnegative top eigenvector of the cost matrix.
pub fn bayes_minimal_cost(s: &LossSetting) -> Result<(f64, TwoModeState)> {
    let a = bayes_cost_matrix(s)?;
    let (lam, vec) = tridiag_top_eigenpair(&a.offdiag)?;
    let alpha = CVec::from_fn(vec.len(), |i, _| c64(vec[i], 0.0));
    let norm = alpha.norm();
    Ok((2.0 - lam, TwoModeState::new(alpha.map(|z| z / norm))?))
}

/// Average sine cost of coherent light split `tau : 1 - tau` across the arms,
/// `2 - 2 B(N eta_a tau) B(N eta_b (1-tau)) / (N sqrt(eta_a tau eta_b (1-tau)))`
/// with `B` the order-1/2 Bell polynomial.
pub fn bayes_classical_cost(s: &LossSetting, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(MetroError::InvalidParameter(format!("tau must lie in (0, 1), got {}", tau)));
    }
    let nn = s.n as f64;
    let ba = bell_half(nn * s.eta_a * tau);
    let bb = bell_half(nn * s.eta_b * (1.0 - tau));
    Ok(2.0 - 2.0 * ba * bb / (nn * (s.eta_a * tau * s.eta_b * (1.0 - tau)).sqrt()))
}

/// Lower bound `2 [1 - max_n A_{n,n-1} cos(pi / (N + 2))]` on the minimal
/// Bayesian cost.
pub fn bayes_lower_bound(s: &LossSetting) -> Result<f64> {
    let a = bayes_cost_matrix(s)?;
    let top = a.offdiag.iter().fold(0.0f64, |acc, &v| acc.max(v));
    Ok(2.0 * (1.0 - top * (std::f64::consts::PI / (s.n as f64 + 2.0)).cos()))
}

/// Noiseless minimal Bayesian cost `2 (1 - cos(pi / (N + 2)))`.
pub fn noiseless_bayes_cost(n: usize) -> f64 {
    2.0 * (1.0 - (std::f64::consts::PI / (n as f64 + 2.0)).cos())
}

/// The sine-shaped input attaining the noiseless minimal Bayesian cost.
pub fn berry_wiseman_state(n: usize) -> TwoModeState {
    let denom = n as f64 + 2.0;
    let alpha = CVec::from_fn(n + 1, |m, _| {
        c64((2.0 / denom).sqrt() * ((m as f64 + 1.0) * std::f64::consts::PI / denom).sin(), 0.0)
    });
    let norm = alpha.norm();
    TwoModeState { n, alpha: alpha.map(|z| z / norm) }
}

/// Noiseless output QFI `4 Var(n)` of a two-mode input.
pub fn noiseless_two_mode_qfi(psi: &TwoModeState) -> f64 {
    let x = psi.weights();
    let s1: f64 = x.iter().enumerate().map(|(n, w)| w * n as f64).sum();
    let s2: f64 = x.iter().enumerate().map(|(n, w)| w * (n * n) as f64).sum();
    4.0 * (s2 - s1 * s1)
}

/// Flat-prior sine cost of the coherent-analogue (binomial) input without
/// loss: `2 (1 - 2^{-N} sum_n sqrt(C(N,n) C(N,n-1)))`.
pub fn classical_noiseless_bayes_cost(n: usize) -> f64 {
    let mut sum = 0.0;
    for m in 1..=n {
        sum += (0.5 * (ln_binomial_f(n, m) + ln_binomial_f(n, m - 1)) - n as f64 * 2.0f64.ln())
            .exp();
    }
    2.0 * (1.0 - sum)
}

/// Classical Fisher information of the parity observable after an `N`-photon
/// NOON interference: the two-outcome family `cos^2(N phi / 2), sin^2(...)`.
pub fn parity_fi(n: usize, phi: f64) -> Result<f64> {
    let nn = n as f64;
    let p = vec![(nn * phi / 2.0).cos().powi(2), (nn * phi / 2.0).sin().powi(2)];
    let dp = vec![-nn / 2.0 * (nn * phi).sin(), nn / 2.0 * (nn * phi).sin()];
    classical_fi(&p, &dp)
}

/// Estimator constructions for the binomial phase model
/// `p_k = C(N,k) cos^{2k}(phi/2) sin^{2(N-k)}(phi/2)`.
#[derive(Debug, Clone, Copy)]
pub struct BinomialSuite {
    /// Fisher information, `N` for every interior phase.
    pub fi: f64,
    /// Maximum-likelihood estimate (positive branch).
    pub ml: f64,
    /// Locally unbiased efficient estimate around `phi0`.
    pub local_efficient: f64,
    /// Bayesian circular-cost estimate.
    pub bayes_h: f64,
    /// Flat-prior average circular cost of the Bayesian estimator.
    pub avg_cost_h: f64,
    /// MMSE estimate of the outcome probability `p`.
    pub p_mmse: f64,
    /// Flat-prior average MSE of the `p`-estimator, `1/(6(N+2))`.
    pub p_avg_mse: f64,
}

/// `Gamma(k+1/2) Gamma(N-k+1/2) / (k! (N-k)!)`.
fn binomial_gamma_ratio(n: usize, k: usize) -> f64 {
    (ln_gamma(k as f64 + 0.5) + ln_gamma((n - k) as f64 + 0.5)
        - ln_gamma(k as f64 + 1.0)
        - ln_gamma((n - k) as f64 + 1.0))
        .exp()
}

/// Flat-prior average circular cost of the optimal Bayesian estimator,
/// `2 [1 - (1/(pi(N+1))) sum_k sqrt(4 + ((N-2k) ratio_k)^2)]`.
pub fn binomial_bayes_avg_cost(n: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..=n {
        let arg = (n as f64 - 2.0 * k as f64) * binomial_gamma_ratio(n, k);
        sum += (4.0 + arg * arg).sqrt();
    }
    2.0 * (1.0 - sum / (std::f64::consts::PI * (n as f64 + 1.0)))
}

/// Worked single-phase estimators at sample size `N`, outcome `k`, true
/// value `phi0`; the local efficient estimator requires `phi0` strictly
/// inside `(0, pi)`.
pub fn binomial_suite(n: usize, k: usize, phi0: f64) -> Result<BinomialSuite> {
    if n == 0 || k > n {
        return Err(MetroError::InvalidParameter(format!(
            "need 0 <= k <= N with N >= 1, got k = {}, N = {}",
            k, n
        )));
    }
    if phi0 <= 1e-12 || phi0 >= std::f64::consts::PI - 1e-12 {
        return Err(MetroError::PathologicalPoint { phi: phi0 });
    }
    let nn = n as f64;
    let kk = k as f64;
    let ml = 2.0 * (nn - kk).sqrt().atan2(kk.sqrt());
    let local_efficient = phi0 + 1.0 / (phi0 / 2.0).tan() - 2.0 * kk / (phi0.sin() * nn);
    let bayes_h = std::f64::consts::FRAC_PI_2
        - ((kk - nn / 2.0) * binomial_gamma_ratio(n, k)).atan();
    Ok(BinomialSuite {
        fi: nn,
        ml,
        local_efficient,
        bayes_h,
        avg_cost_h: binomial_bayes_avg_cost(n),
        p_mmse: (kk + 1.0) / (nn + 2.0),
        p_avg_mse: 1.0 / (6.0 * (nn + 2.0)),
    })
}
