//! Receive filters and closed-form performance metrics.

use serde::{Deserialize, Serialize};

use crate::channel::WiretapScenario;
use crate::error::{Error, Result};
use crate::linalg::{
    check_full_column_rank, hermitian_eigen, inverse_hpd, pseudo_inverse, real_trace,
    ComplexMatrix, HermitianPD, CMat,
};

/// An `m x m` transmit filter together with its Gram matrix `G = H_T H_T†`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFilter {
    h_t: ComplexMatrix,
    gram: HermitianPD,
}

impl TransmitFilter {
    pub fn new(h_t: ComplexMatrix) -> Result<Self> {
        if h_t.rows() != h_t.cols() {
            return Err(Error::DimensionMismatch(format!(
                "transmit filter must be square, got {}x{}",
                h_t.rows(),
                h_t.cols()
            )));
        }
        let gram = HermitianPD::new(&(h_t.as_matrix() * h_t.as_matrix().adjoint()))?;
        Ok(Self { h_t, gram })
    }

    /// The PSD square root of a Gram matrix, the canonical filter for `G`.
    pub fn from_gram(gram: &HermitianPD) -> Self {
        Self {
            h_t: gram.power(0.5).to_complex_matrix(),
            gram: gram.clone(),
        }
    }

    pub fn h_t(&self) -> &ComplexMatrix {
        &self.h_t
    }

    pub fn gram(&self) -> &HermitianPD {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.h_t.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceiverKind {
    ZeroForcing,
    Wiener,
}

fn check_cols(h: &ComplexMatrix, t: &TransmitFilter) -> Result<()> {
    if h.cols() != t.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} columns, filter is {}x{}",
            h.cols(),
            t.dim(),
            t.dim()
        )));
    }
    Ok(())
}

/// `(H H_T)⁺`, the zero-forcing receiver.
pub fn zf_receive(h: &ComplexMatrix, t: &TransmitFilter) -> Result<ComplexMatrix> {
    check_cols(h, t)?;
    pseudo_inverse(&(h * t.h_t()))
}

/// `H_T†H†(I + H G H†)⁻¹`, the linear MMSE receiver.
pub fn wiener_receive(h_e: &ComplexMatrix, t: &TransmitFilter) -> Result<ComplexMatrix> {
    check_cols(h_e, t)?;
    let h = h_e.as_matrix();
    let n = h.nrows();
    let cov = CMat::identity(n, n) + h * t.gram().matrix() * h.adjoint();
    let inv = inverse_hpd(&cov)?;
    let h_eff = h * t.h_t().as_matrix();
    ComplexMatrix::new(h_eff.adjoint() * inv)
}

/// `tr{(H_T†H†H H_T)⁻¹}`.
pub fn mse_zf(h: &ComplexMatrix, t: &TransmitFilter) -> Result<f64> {
    check_cols(h, t)?;
    let h_eff = h.as_matrix() * t.h_t().as_matrix();
    check_full_column_rank(&h_eff)?;
    let inv = inverse_hpd(&(h_eff.adjoint() * &h_eff)).map_err(|_| Error::RankDeficient { ratio: 0.0 })?;
    Ok(real_trace(&inv))
}

/// `tr{(I + H_E†H_E G)⁻¹}`, evaluated through the Hermitian
/// `I + H_T†H_E†H_E H_T`, which has the same spectrum.
pub fn mse_wiener(h_e: &ComplexMatrix, t: &TransmitFilter) -> Result<f64> {
    check_cols(h_e, t)?;
    let h_eff = h_e.as_matrix() * t.h_t().as_matrix();
    let m = t.dim();
    let k = CMat::identity(m, m) + h_eff.adjoint() * &h_eff;
    Ok(real_trace(&inverse_hpd(&k)?))
}

/// Transmit power `tr{G}`.
pub fn power_used(t: &TransmitFilter) -> f64 {
    t.gram().trace()
}

/// `log₂det(I + A)` for Hermitian PSD `A`.
pub(crate) fn log2det_i_plus(a: &CMat) -> f64 {
    let (values, _) = hermitian_eigen(a);
    values.iter().map(|&v| (1.0 + v.max(0.0)).log2()).sum()
}

/// `log₂det(I + H_M Q H_M†) − log₂det(I + H_E Q H_E†)` without the floor.
pub fn rate_difference(h_m: &ComplexMatrix, h_e: &ComplexMatrix, q: &CMat) -> f64 {
    let hm = h_m.as_matrix();
    let he = h_e.as_matrix();
    log2det_i_plus(&(hm * q * hm.adjoint())) - log2det_i_plus(&(he * q * he.adjoint()))
}

/// Achievable secrecy rate of a filter in bits per channel use, floored at 0.
pub fn achievable_secrecy_rate(s: &WiretapScenario, t: &TransmitFilter) -> f64 {
    rate_difference(&s.h_m, &s.h_e, t.gram().matrix()).max(0.0)
}

/// `tr{H_R H_R†}`: the ZF error covariance for unit noise.
pub fn mse_from_receiver(h_r: &ComplexMatrix) -> f64 {
    real_trace(&(h_r.as_matrix() * h_r.as_matrix().adjoint()))
}
