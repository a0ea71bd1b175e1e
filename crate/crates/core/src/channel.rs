//! Wiretap scenario definition, validation and noise pre-whitening.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_full_column_rank, frobenius, hermitian_eigen, ComplexMatrix, HermitianPD, CMat,
};

/// Relative Frobenius deviation of `M⁻¹E` from a multiple of the identity
/// below which the two channels count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-8;

/// One design instance: main and eavesdropper channels, power budget and
/// the eavesdropper MSE floor.
///
/// Fields are public so scalar sanity channels can be built directly; the
/// design routines call [`WiretapScenario::validate`] themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapScenario {
    pub h_m: ComplexMatrix,
    pub h_e: ComplexMatrix,
    pub p_avg: f64,
    pub gamma: f64,
}

impl WiretapScenario {
    /// Builds and validates a scenario.
    pub fn new(h_m: ComplexMatrix, h_e: ComplexMatrix, p_avg: f64, gamma: f64) -> Result<Self> {
        let s = Self {
            h_m,
            h_e,
            p_avg,
            gamma,
        };
        s.validate()?;
        Ok(s)
    }

    /// The scenario of the numerical study: a degraded 2x2 real channel pair.
    pub fn paper(p_avg: f64, gamma: f64) -> Self {
        Self {
            h_m: ComplexMatrix::from_real(2, 2, &[4.0, -1.0, 1.0, 2.0]).expect("finite"),
            h_e: ComplexMatrix::from_real(2, 2, &[2.0, -1.0, 1.0, 1.0]).expect("finite"),
            p_avg,
            gamma,
        }
    }

    /// Number of transmitted streams (columns of both channels).
    pub fn m(&self) -> usize {
        self.h_m.cols()
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self {
            gamma,
            ..self.clone()
        }
    }

    pub fn with_power(&self, p_avg: f64) -> Self {
        Self {
            p_avg,
            ..self.clone()
        }
    }

    /// Checks dimensions, rank, positivity of `P` and `γ`, and that the two
    /// channels are not multiples of each other.
    pub fn validate(&self) -> Result<()> {
        let m = self.h_m.cols();
        if self.h_e.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "h_m has {m} columns, h_e has {}",
                self.h_e.cols()
            )));
        }
        if self.h_m.rows() < m {
            return Err(Error::BadDimension(format!(
                "h_m is {}x{m}; need at least {m} receive antennas",
                self.h_m.rows()
            )));
        }
        if self.h_e.rows() < m {
            return Err(Error::BadDimension(format!(
                "h_e is {}x{m}; need at least {m} receive antennas",
                self.h_e.rows()
            )));
        }
        if !(self.p_avg > 0.0) || !self.p_avg.is_finite() {
            return Err(Error::NonPositivePower(self.p_avg));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::NonPositiveGamma(self.gamma));
        }
        check_full_column_rank(self.h_m.as_matrix())?;
        check_full_column_rank(self.h_e.as_matrix())?;
        let (mg, eg) = grams(self)?;
        check_not_collinear(&mg, &eg)
    }
}

/// Relative deviation `‖M⁻¹E − (tr{M⁻¹E}/m) I‖ / ‖M⁻¹E‖`.
pub fn collinearity_deviation(m: &HermitianPD, e: &HermitianPD) -> f64 {
    let k = m.inverse().matrix() * e.matrix();
    let n = k.nrows();
    let shift = k.trace() / n as f64;
    let dev = &k - CMat::identity(n, n) * shift;
    frobenius(&dev) / frobenius(&k)
}

pub(crate) fn check_not_collinear(m: &HermitianPD, e: &HermitianPD) -> Result<()> {
    let deviation = collinearity_deviation(m, e);
    if !(deviation > COLLINEAR_TOL) {
        return Err(Error::CollinearChannels { deviation });
    }
    Ok(())
}

fn grams(s: &WiretapScenario) -> Result<(HermitianPD, HermitianPD)> {
    Ok((
        HermitianPD::new(&s.h_m.as_matrix().gram())?,
        HermitianPD::new(&s.h_e.as_matrix().gram())?,
    ))
}

/// `(M, E) = (H_M†H_M, H_E†H_E)`.
pub fn gram_pair(s: &WiretapScenario) -> Result<(HermitianPD, HermitianPD)> {
    if s.h_m.cols() != s.h_e.cols() {
        return Err(Error::DimensionMismatch("channel column counts differ".into()));
    }
    grams(s)
}

/// `Σ_N^{-1/2} H̃`, normalizing the receiver noise to identity covariance.
pub fn whiten(h_raw: &ComplexMatrix, noise_cov: &HermitianPD) -> Result<ComplexMatrix> {
    if noise_cov.dim() != h_raw.rows() {
        return Err(Error::DimensionMismatch(format!(
            "noise covariance is {0}x{0}, channel has {1} rows",
            noise_cov.dim(),
            h_raw.rows()
        )));
    }
    ComplexMatrix::new(noise_cov.power(-0.5).matrix() * h_raw.as_matrix())
}

/// Smallest eigenvalue of `M − E`.
pub fn degradedness_margin(s: &WiretapScenario) -> Result<f64> {
    let (m, e) = gram_pair(s)?;
    let (values, _) = hermitian_eigen(&(m.matrix() - e.matrix()));
    Ok(values[values.len() - 1])
}

/// True when `M − E` is positive semidefinite up to round-off.
pub fn is_degraded(s: &WiretapScenario) -> Result<bool> {
    let (m, _) = gram_pair(s)?;
    Ok(degradedness_margin(s)? >= -1e-12 * m.max_eigenvalue())
}

type PairRows = Vec<Vec<[f64; 2]>>;

/// On-disk scenario format. Complex entries are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub h_m: PairRows,
    pub h_e: PairRows,
    pub p_avg: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_cov_m: Option<PairRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_cov_e: Option<PairRows>,
}

impl ScenarioFile {
    /// Whitens (when noise covariances are given) and validates.
    pub fn into_scenario(self) -> Result<WiretapScenario> {
        let mut h_m = ComplexMatrix::from_pairs(&self.h_m)?;
        let mut h_e = ComplexMatrix::from_pairs(&self.h_e)?;
        if let Some(cov) = &self.noise_cov_m {
            h_m = whiten(&h_m, &HermitianPD::from_matrix(&ComplexMatrix::from_pairs(cov)?)?)?;
        }
        if let Some(cov) = &self.noise_cov_e {
            h_e = whiten(&h_e, &HermitianPD::from_matrix(&ComplexMatrix::from_pairs(cov)?)?)?;
        }
        WiretapScenario::new(h_m, h_e, self.p_avg, self.gamma)
    }
}

impl From<&WiretapScenario> for ScenarioFile {
    fn from(s: &WiretapScenario) -> Self {
        Self {
            h_m: s.h_m.to_pairs(),
            h_e: s.h_e.to_pairs(),
            p_avg: s.p_avg,
            gamma: s.gamma,
            noise_cov_m: None,
            noise_cov_e: None,
        }
    }
}

/// Parses and validates a scenario from JSON text.
pub fn scenario_from_json(text: &str) -> Result<WiretapScenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_scenario()
}

pub fn scenario_to_json(s: &WiretapScenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from(s)).expect("serializable")
}

/// Which Wishart expected-inverse formula applies to a random channel.
///
/// For `n` i.i.d. rows with covariance `Σ`, `E{(H†H)⁻¹}` is `Σ⁻¹/(n − m)`
/// when the rows are circularly symmetric complex Gaussian and
/// `Σ⁻¹/(n − m − 1)` when they are real Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WishartConvention {
    #[default]
    Complex,
    Real,
}

impl WishartConvention {
    /// Offset `k` in the denominator `n − m − k`.
    pub fn offset(self) -> usize {
        match self {
            WishartConvention::Complex => 0,
            WishartConvention::Real => 1,
        }
    }
}

/// Second-order statistics of a random channel with i.i.d. rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub sigma: HermitianPD,
    pub n_rows: usize,
    pub convention: WishartConvention,
}

impl ChannelStats {
    pub fn new(sigma: HermitianPD, n_rows: usize, convention: WishartConvention) -> Result<Self> {
        let required = sigma.dim() + convention.offset();
        if n_rows <= required {
            return Err(Error::DegreesOfFreedom { n_rows, required });
        }
        Ok(Self {
            sigma,
            n_rows,
            convention,
        })
    }

    pub fn m(&self) -> usize {
        self.sigma.dim()
    }

    /// `n − m − k`, the positive denominator of the expected inverse.
    pub fn denominator(&self) -> usize {
        self.n_rows - self.m() - self.convention.offset()
    }
}

trait Gram {
    fn gram(&self) -> CMat;
}

impl Gram for CMat {
    fn gram(&self) -> CMat {
        self.adjoint() * self
    }
}
