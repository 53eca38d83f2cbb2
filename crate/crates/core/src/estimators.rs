//! Pose estimators for the linear measurement model `y = H x + ν`.
//!
//! * [`estimate_pinv`]: minimum Euclidean norm solution `H† y`.
//! * [`estimate_map_noiseless`]: the posture maximising the prior density
//!   subject to `H x = y`, via the Lagrangian closed form.
//! * [`estimate_map_nullspace`]: the same optimum found by minimising over
//!   the null-space parameterisation `x = H† y + N_h ξ`.
//! * [`estimate_conditional_gaussian`]: the same optimum for selection
//!   matrices, as the conditional mean of the unmeasured joints.
//! * [`estimate_mve`] / [`estimate_mve_information`]: posterior mean under
//!   Gaussian noise `ν ~ N(0, R)`, in gain form and information form.
//!
//! With `R = 0` every prior-based estimator returns the same posture.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand_model::{selected_columns, selection_matrix, HandModel};
use crate::linalg::{self, RowSpace};
use crate::prior::PriorModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Pinv,
    MapNoiseless,
    MapNullspace,
    ConditionalGaussian,
    MveInformation,
    MveSmw,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Pinv,
        Method::MapNoiseless,
        Method::MapNullspace,
        Method::ConditionalGaussian,
        Method::MveInformation,
        Method::MveSmw,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Pinv => "Pinv",
            Method::MapNoiseless => "MapNoiseless",
            Method::MapNullspace => "MapNullspace",
            Method::ConditionalGaussian => "ConditionalGaussian",
            Method::MveInformation => "MveInformation",
            Method::MveSmw => "MVE",
        }
    }

    /// Parses CLI-style names (`pinv`, `mve`, `conditional`, ...).
    pub fn parse(s: &str) -> Option<Method> {
        Some(match s.to_ascii_lowercase().as_str() {
            "pinv" => Method::Pinv,
            "mve" | "mve-smw" | "smw" => Method::MveSmw,
            "mve-information" | "information" => Method::MveInformation,
            "conditional" | "conditional-gaussian" => Method::ConditionalGaussian,
            "map" | "map-noiseless" | "lagrangian" => Method::MapNoiseless,
            "nullspace" | "map-nullspace" => Method::MapNullspace,
            _ => return None,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Measurement matrix `H` (m × n) and noise covariance `R` (m × m).
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementModel {
    h: DMatrix<f64>,
    r: DMatrix<f64>,
    selected: Option<Vec<usize>>,
}

impl MeasurementModel {
    /// Validates `H` (full row rank, `m ≤ n`) and `R` (symmetric PSD).
    pub fn new(h: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        let (m, n) = h.shape();
        if m > n {
            return Err(Error::InvalidModel(format!("{m} measurements exceed {n} DoFs")));
        }
        if r.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "noise covariance is {:?}, expected {m}x{m}",
                r.shape()
            )));
        }
        if h.iter().chain(r.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("measurement model".into()));
        }
        if !linalg::is_symmetric(&r, 1e-10) || !linalg::is_psd(&r, 1e-10) {
            return Err(Error::InvalidModel("noise covariance must be symmetric positive semidefinite".into()));
        }
        if m > 0 {
            let rank = linalg::rank(&h);
            if rank < m {
                return Err(Error::RankDeficient { rank, rows: m });
            }
        }
        let mut r = r;
        linalg::symmetrize(&mut r);
        let selected = selected_columns(&h);
        Ok(MeasurementModel { h, r, selected })
    }

    pub fn noiseless(h: DMatrix<f64>) -> Result<Self> {
        let m = h.nrows();
        Self::new(h, DMatrix::zeros(m, m))
    }

    /// Selection model over named DoFs with i.i.d. noise of `sigma` degrees.
    pub fn selection<S: AsRef<str>>(model: &HandModel, names: &[S], sigma: f64) -> Result<Self> {
        let h = selection_matrix(model, names)?;
        let m = h.nrows();
        Self::new(h, DMatrix::identity(m, m) * (sigma * sigma))
    }

    pub fn with_noise(self, r: DMatrix<f64>) -> Result<Self> {
        Self::new(self.h, r)
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn m(&self) -> usize {
        self.h.nrows()
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    pub fn is_selection(&self) -> bool {
        self.selected.is_some()
    }

    /// Joint index measured by each row, for selection models.
    pub fn selected_columns(&self) -> Option<&[usize]> {
        self.selected.as_deref()
    }

    pub fn is_noiseless(&self) -> bool {
        self.r.iter().all(|&v| v == 0.0)
    }
}

/// A reconstructed posture.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub x_hat: DVector<f64>,
    pub posterior_cov: Option<DMatrix<f64>>,
    pub method: Method,
}

fn check_y(h: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if y.len() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurements for a {}-row measurement matrix",
            y.len(),
            h.nrows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("measurement vector".into()));
    }
    Ok(())
}

fn check_prior(prior: &PriorModel, h: &DMatrix<f64>) -> Result<()> {
    if prior.n() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "prior has {} DoFs, measurement matrix has {} columns",
            prior.n(),
            h.ncols()
        )));
    }
    Ok(())
}

fn full_row_rank(h: &DMatrix<f64>) -> Result<RowSpace> {
    if h.nrows() > h.ncols() {
        return Err(Error::InvalidModel(format!("{} measurements exceed {} DoFs", h.nrows(), h.ncols())));
    }
    let rs = RowSpace::new(h);
    if rs.rank < h.nrows() {
        return Err(Error::RankDeficient { rank: rs.rank, rows: h.nrows() });
    }
    Ok(rs)
}

/// Minimum-norm solution `x̂ = H† y`; `Hᵀ y` for selection matrices.
pub fn estimate_pinv(h: &DMatrix<f64>, y: &DVector<f64>) -> Result<Estimate> {
    check_y(h, y)?;
    let x_hat = if selected_columns(h).is_some() {
        h.transpose() * y
    } else {
        full_row_rank(h)?.pinv * y
    };
    Ok(Estimate { x_hat, posterior_cov: None, method: Method::Pinv })
}

/// Orthonormal basis of the null space of a full-row-rank `H`.
pub fn null_space_basis(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(full_row_rank(h)?.null_basis)
}

/// `H† y + N_h ξ`, a solution of `H x = y` for every `ξ`.
///
/// `N_h` is the basis returned by [`null_space_basis`].
pub fn general_solution(h: &DMatrix<f64>, y: &DVector<f64>, xi: &DVector<f64>) -> Result<DVector<f64>> {
    check_y(h, y)?;
    let rs = full_row_rank(h)?;
    if xi.len() != rs.null_basis.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "free vector has {} entries, null space has dimension {}",
            xi.len(),
            rs.null_basis.ncols()
        )));
    }
    Ok(&rs.pinv * y + &rs.null_basis * xi)
}

/// `K = P Hᵀ S⁻¹` and `P − K H P` for the innovation matrix `S = H P Hᵀ + R`.
fn gain_and_posterior(
    cov: &DMatrix<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> std::result::Result<(DMatrix<f64>, DMatrix<f64>), f64> {
    let hp = h * cov;
    let mut s = &hp * h.transpose() + r;
    linalg::symmetrize(&mut s);
    let chol = linalg::spd_factor(&s)?;
    let gain = chol.solve(&hp).transpose();
    let mut post = cov - &gain * &hp;
    linalg::symmetrize(&mut post);
    Ok((gain, post))
}

/// Constrained maximum of the prior density subject to `H x = y`:
/// `x̂ = μ − P Hᵀ (H P Hᵀ)⁻¹ (H μ − y)`.
pub fn estimate_map_noiseless(prior: &PriorModel, h: &DMatrix<f64>, y: &DVector<f64>) -> Result<Estimate> {
    check_y(h, y)?;
    check_prior(prior, h)?;
    let m = h.nrows();
    let (gain, post) = gain_and_posterior(prior.cov(), h, &DMatrix::zeros(m, m)).map_err(Error::IllConditionedGram)?;
    let x_hat = prior.mu() - gain * (h * prior.mu() - y);
    Ok(Estimate { x_hat, posterior_cov: Some(post), method: Method::MapNoiseless })
}

/// The constrained optimum via the null-space parameterisation:
/// `ξ̂ = (N_hᵀ P⁻¹ N_h)⁻¹ N_hᵀ P⁻¹ (μ − H† y)`, `x̂ = H† y + N_h ξ̂`.
pub fn estimate_map_nullspace(prior: &PriorModel, h: &DMatrix<f64>, y: &DVector<f64>) -> Result<Estimate> {
    check_y(h, y)?;
    check_prior(prior, h)?;
    let rs = full_row_rank(h)?;
    let chol = linalg::spd_factor(prior.cov()).map_err(|_| Error::SingularPrior)?;
    let base = &rs.pinv * y;
    let nb = &rs.null_basis;
    let x_hat = if nb.ncols() == 0 {
        base
    } else {
        let p_inv_nb = chol.solve(nb);
        let reduced = nb.transpose() * &p_inv_nb;
        let reduced = linalg::spd_factor(&reduced).map_err(|_| Error::SingularPrior)?;
        let rhs = p_inv_nb.transpose() * (prior.mu() - &base);
        let xi = reduced.solve(&rhs);
        base + nb * xi
    };
    let m = h.nrows();
    let post = gain_and_posterior(prior.cov(), h, &DMatrix::zeros(m, m))
        .map(|(_, p)| p)
        .map_err(Error::IllConditionedGram)?;
    Ok(Estimate { x_hat, posterior_cov: Some(post), method: Method::MapNullspace })
}

/// Conditional mean of the unmeasured joints given the measured ones:
/// `x̂₂ = μ₂ + P₂₁ P₁₁⁻¹ (y − μ₁)`, with the measured joints set to `y`.
pub fn estimate_conditional_gaussian(
    prior: &PriorModel,
    model: &MeasurementModel,
    y: &DVector<f64>,
) -> Result<Estimate> {
    check_y(model.h(), y)?;
    check_prior(prior, model.h())?;
    let measured = model.selected_columns().ok_or(Error::NotSelectionMatrix)?;
    let n = prior.n();
    let unmeasured: Vec<usize> = (0..n).filter(|i| !measured.contains(i)).collect();
    let cov = prior.cov();
    let mu = prior.mu();

    let p11 = cov.select_rows(measured).select_columns(measured);
    let p21 = cov.select_rows(&unmeasured).select_columns(measured);
    let p22 = cov.select_rows(&unmeasured).select_columns(&unmeasured);
    let chol = linalg::spd_factor(&p11).map_err(|_| Error::SingularMeasuredBlock)?;

    let mu1 = DVector::from_iterator(measured.len(), measured.iter().map(|&i| mu[i]));
    let innovation = chol.solve(&(y - mu1));
    let x2 = p21.clone() * innovation;
    let mut x_hat = DVector::zeros(n);
    for (k, &i) in measured.iter().enumerate() {
        x_hat[i] = y[k];
    }
    for (k, &i) in unmeasured.iter().enumerate() {
        x_hat[i] = mu[i] + x2[k];
    }

    let mut cond_cov = &p22 - &p21 * chol.solve(&p21.transpose());
    linalg::symmetrize(&mut cond_cov);
    let mut post = DMatrix::zeros(n, n);
    for (a, &i) in unmeasured.iter().enumerate() {
        for (b, &j) in unmeasured.iter().enumerate() {
            post[(i, j)] = cond_cov[(a, b)];
        }
    }
    Ok(Estimate { x_hat, posterior_cov: Some(post), method: Method::ConditionalGaussian })
}

/// Precomputed minimum variance update for one prior / measurement model
/// pair, reusable across measurement vectors.
#[derive(Clone, Debug)]
pub struct MveGain {
    mu: DVector<f64>,
    h: DMatrix<f64>,
    gain: DMatrix<f64>,
    posterior: DMatrix<f64>,
    // measured columns when H selects joints and R = 0
    exact: Option<Vec<usize>>,
}

impl MveGain {
    pub fn new(prior: &PriorModel, model: &MeasurementModel) -> Result<Self> {
        check_prior(prior, model.h())?;
        let (gain, posterior) =
            gain_and_posterior(prior.cov(), model.h(), model.r()).map_err(Error::IllConditionedInnovation)?;
        let exact = if model.is_noiseless() { model.selected_columns().map(<[usize]>::to_vec) } else { None };
        Ok(MveGain { mu: prior.mu().clone(), h: model.h().clone(), gain, posterior, exact })
    }

    /// `x̂ = μ − K (H μ − y)`.
    pub fn apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_y(&self.h, y)?;
        let mut x = &self.mu - &self.gain * (&self.h * &self.mu - y);
        if let Some(cols) = &self.exact {
            for (k, &i) in cols.iter().enumerate() {
                x[i] = y[k];
            }
        }
        Ok(x)
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn posterior_cov(&self) -> &DMatrix<f64> {
        &self.posterior
    }
}

/// Minimum variance estimate `x̂ = μ − P Hᵀ (H P Hᵀ + R)⁻¹ (H μ − y)`.
pub fn estimate_mve(prior: &PriorModel, model: &MeasurementModel, y: &DVector<f64>) -> Result<Estimate> {
    let mve = MveGain::new(prior, model)?;
    let x_hat = mve.apply(y)?;
    Ok(Estimate { x_hat, posterior_cov: Some(mve.posterior), method: Method::MveSmw })
}

/// Information form `x̂ = (P⁻¹ + Hᵀ R⁻¹ H)⁻¹ (Hᵀ R⁻¹ y + P⁻¹ μ)`.
///
/// Needs both `P` and `R` invertible; it also accepts `m > n`.
pub fn estimate_mve_information(
    prior: &PriorModel,
    model: &MeasurementModel,
    y: &DVector<f64>,
) -> Result<Estimate> {
    check_y(model.h(), y)?;
    check_prior(prior, model.h())?;
    let p_chol = linalg::spd_factor(prior.cov()).map_err(|_| Error::SingularPrior)?;
    let r_chol = linalg::spd_factor(model.r()).map_err(|_| Error::SingularNoise)?;
    let h = model.h();
    let r_inv_h = r_chol.solve(h);
    let n = prior.n();
    let mut info = p_chol.inverse() + h.transpose() * &r_inv_h;
    linalg::symmetrize(&mut info);
    let info_chol = linalg::spd_factor(&info).map_err(|_| Error::SingularPrior)?;
    let rhs = r_inv_h.transpose() * y + p_chol.solve(prior.mu());
    let x_hat = info_chol.solve(&rhs);
    let mut post = info_chol.solve(&DMatrix::identity(n, n));
    linalg::symmetrize(&mut post);
    Ok(Estimate { x_hat, posterior_cov: Some(post), method: Method::MveInformation })
}

/// A posteriori covariance `P − P Hᵀ (H P Hᵀ + R)⁻¹ H P`.
pub fn posterior_covariance(prior: &PriorModel, model: &MeasurementModel) -> Result<DMatrix<f64>> {
    check_prior(prior, model.h())?;
    if model.m() == 0 {
        return Ok(prior.cov().clone());
    }
    gain_and_posterior(prior.cov(), model.h(), model.r())
        .map(|(_, p)| p)
        .map_err(Error::IllConditionedInnovation)
}

/// Runs `method` on one measurement vector.
pub fn estimate(
    method: Method,
    prior: &PriorModel,
    model: &MeasurementModel,
    y: &DVector<f64>,
) -> Result<Estimate> {
    match method {
        Method::Pinv => estimate_pinv(model.h(), y),
        Method::MapNoiseless => estimate_map_noiseless(prior, model.h(), y),
        Method::MapNullspace => estimate_map_nullspace(prior, model.h(), y),
        Method::ConditionalGaussian => estimate_conditional_gaussian(prior, model, y),
        Method::MveInformation => estimate_mve_information(prior, model, y),
        Method::MveSmw => estimate_mve(prior, model, y),
    }
}
