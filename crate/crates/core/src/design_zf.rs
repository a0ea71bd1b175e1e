//! Optimal transmit filter when both receivers are zero-forcing.
//!
//! In the variable `Z = G⁻¹` the problem reads
//! `min tr{AZ}  s.t.  tr{BZ} ≥ γ,  tr{Z⁻¹} ≤ P` with `A = M⁻¹`, `B = E⁻¹`.
//! The solver below works on `(A, B)` directly so the expected-inverse
//! variants in [`crate::uncertainty`] can feed it their own matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{check_not_collinear, gram_pair, WiretapScenario};
use crate::error::{Error, Result};
use crate::filters::TransmitFilter;
use crate::linalg::{
    c64, frobenius, hermitian_eigen, min_generalized_eigenvalue, real_trace, CMat, HermitianPD,
    PD_FLOOR,
};

/// Relative feasibility tolerance on the active constraints.
pub const FEAS_TOL: f64 = 1e-6;
/// Bound on `‖A − νB − μG²‖ / ‖A‖` for an accepted solution.
pub const KKT_TOL: f64 = 1e-6;

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_REL_WIDTH: f64 = 1e-12;

/// Which constraints are active at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SecrecyInactive,
    BothActive,
    PowerInactive,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::SecrecyInactive => "SecrecyInactive",
            Regime::BothActive => "BothActive",
            Regime::PowerInactive => "PowerInactive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub t: TransmitFilter,
    pub regime: Regime,
    /// Multiplier of the secrecy constraint.
    pub nu: f64,
    /// Multiplier of the power constraint.
    pub mu: f64,
    pub mse_main: f64,
    /// Eavesdropper MSE under the receiver model the design assumed.
    pub mse_eve: f64,
    pub power: f64,
    pub kkt_residual: f64,
}

/// `√(P / tr{M^{-1/2}}) M^{-1/4}`: the minimum-MSE filter under the power
/// constraint alone.
pub fn secrecy_inactive_filter(m_gram: &HermitianPD, p_avg: f64) -> Result<TransmitFilter> {
    check_power(p_avg)?;
    Ok(inverse_power_filter(&m_gram.inverse(), p_avg))
}

/// `√(P / tr{S^{1/2}}) S^{1/4}` for a PD `S`, so that `tr{G} = P`.
fn inverse_power_filter(s: &HermitianPD, p_avg: f64) -> TransmitFilter {
    let scale = p_avg / s.trace_power(0.5);
    let gram = s.power(0.5).scaled(scale).expect("positive scale");
    TransmitFilter::from_gram(&gram)
}

fn check_power(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::NonPositivePower(p));
    }
    Ok(())
}

/// `tr{A^{1/2}} · tr{B A^{-1/2}} / P`: the largest `γ` met with `ν = 0`.
pub fn zf_threshold_from_inverses(a: &HermitianPD, b: &HermitianPD, p_avg: f64) -> f64 {
    let a_isqrt = a.power(-0.5);
    a.trace_power(0.5) * real_trace(&(b.matrix() * a_isqrt.matrix())) / p_avg
}

/// `tr{M^{-1/2}} · tr{E⁻¹M^{1/2}} / P`.
pub fn zf_threshold(s: &WiretapScenario) -> Result<f64> {
    let (m, e) = gram_pair(s)?;
    check_power(s.p_avg)?;
    Ok(zf_threshold_from_inverses(&m.inverse(), &e.inverse(), s.p_avg))
}

/// The single-variable concave dual of the ZF-ZF problem on `[0, ν_max]`,
/// `ν_max = λ_min(B^{-1/2} A B^{-1/2})`.
#[derive(Debug, Clone)]
pub struct ZfDual {
    a: HermitianPD,
    b: HermitianPD,
    p_avg: f64,
    gamma: f64,
    nu_max: f64,
}

/// Spectrum of `S = A − νB`, eigenvalues descending.
struct Shifted {
    values: Vec<f64>,
    vectors: CMat,
}

impl Shifted {
    fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(f(v));
        }
        scaled * self.vectors.adjoint()
    }

    fn is_pd(&self) -> bool {
        let max = self.values[0];
        max > 0.0 && self.values[self.values.len() - 1] > PD_FLOOR * max
    }
}

impl ZfDual {
    pub fn new(a: HermitianPD, b: HermitianPD, p_avg: f64, gamma: f64) -> Result<Self> {
        check_power(p_avg)?;
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::NonPositiveGamma(gamma));
        }
        // λ_min(B^{-1/2} A B^{-1/2}) = λ_min of A B⁻¹, the (M, E) routine with
        // M = A⁻¹ and E = B⁻¹.
        let nu_max = min_generalized_eigenvalue(&a.inverse(), &b.inverse())?;
        Ok(Self {
            a,
            b,
            p_avg,
            gamma,
            nu_max,
        })
    }

    pub fn nu_max(&self) -> f64 {
        self.nu_max
    }

    fn shifted(&self, nu: f64) -> Shifted {
        let (values, vectors) = hermitian_eigen(&(self.a.matrix() - self.b.matrix() * c64(nu)));
        Shifted { values, vectors }
    }

    /// `(1/P)(tr{(A − νB)^{1/2}})² + νγ`, with the PSD square root clipped
    /// at zero so the upper endpoint stays finite.
    pub fn value(&self, nu: f64) -> Result<f64> {
        let s = self.shifted(nu);
        let floor = -PD_FLOOR * self.a.max_eigenvalue();
        if nu < 0.0 || s.values[s.values.len() - 1] < floor {
            return Err(Error::OutOfInterval {
                nu,
                upper: self.nu_max,
            });
        }
        let tr: f64 = s.values.iter().map(|&v| v.max(0.0).sqrt()).sum();
        Ok(tr * tr / self.p_avg + nu * self.gamma)
    }

    /// `γ − tr{S^{1/2}} tr{B S^{-1/2}} / P`, or `None` where `S` is not PD.
    fn slope(&self, s: &Shifted) -> Option<f64> {
        if !s.is_pd() {
            return None;
        }
        let tr_sqrt: f64 = s.values.iter().map(|v| v.sqrt()).sum();
        let s_isqrt = s.map(|v| 1.0 / v.sqrt());
        Some(self.gamma - tr_sqrt * real_trace(&(self.b.matrix() * s_isqrt)) / self.p_avg)
    }

    pub fn derivative(&self, nu: f64) -> Option<f64> {
        self.slope(&self.shifted(nu))
    }

    /// Maximizes the dual and assembles the primal solution.
    pub fn solve(&self) -> Result<DesignSolution> {
        let threshold = zf_threshold_from_inverses(&self.a, &self.b, self.p_avg);
        if threshold > self.gamma {
            let t = inverse_power_filter(&self.a, self.p_avg);
            let tr = self.a.trace_power(0.5);
            let mu = tr * tr / (self.p_avg * self.p_avg);
            return Ok(self.assemble(t, Regime::SecrecyInactive, 0.0, mu));
        }

        let (mut lo, mut hi) = (0.0, self.nu_max);
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= BISECTION_REL_WIDTH * self.nu_max {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match self.derivative(mid) {
                Some(d) if d > 0.0 => lo = mid,
                _ => hi = mid,
            }
        }
        // lo only ever moves to points where S is PD
        let nu = lo;
        let s = HermitianPD::new(&(self.a.matrix() - self.b.matrix() * c64(nu))).map_err(|e| {
            Error::BisectionFailed(format!("A - nu B lost definiteness at nu = {nu}: {e}"))
        })?;
        let tr = s.trace_power(0.5);
        let mu = tr * tr / (self.p_avg * self.p_avg);
        let t = inverse_power_filter(&s, self.p_avg);
        let sol = self.assemble(t, Regime::BothActive, nu, mu);
        if (sol.mse_eve - self.gamma).abs() > FEAS_TOL * self.gamma {
            return Err(Error::BisectionFailed(format!(
                "eavesdropper MSE {} misses gamma = {} at nu = {nu} (upper end {})",
                sol.mse_eve, self.gamma, self.nu_max
            )));
        }
        Ok(sol)
    }

    fn assemble(&self, t: TransmitFilter, regime: Regime, nu: f64, mu: f64) -> DesignSolution {
        let z = t.gram().inverse();
        let g2 = t.gram().power(2.0);
        let stationarity = self.a.matrix() - self.b.matrix() * c64(nu) - g2.matrix() * c64(mu);
        DesignSolution {
            regime,
            nu,
            mu,
            mse_main: real_trace(&(self.a.matrix() * z.matrix())),
            mse_eve: real_trace(&(self.b.matrix() * z.matrix())),
            power: t.gram().trace(),
            kkt_residual: frobenius(&stationarity) / frobenius(self.a.matrix()),
            t,
        }
    }
}

/// Evaluates the dual at `ν` for a scenario (no collinearity requirement).
pub fn dual_objective(nu: f64, s: &WiretapScenario) -> Result<f64> {
    let (m, e) = gram_pair(s)?;
    ZfDual::new(m.inverse(), e.inverse(), s.p_avg, s.gamma)?.value(nu)
}

/// Solves the ZF-ZF problem for general inverse-Gram pairs `(A, B)`.
pub fn solve_zf_from_inverses(
    a: &HermitianPD,
    b: &HermitianPD,
    p_avg: f64,
    gamma: f64,
) -> Result<DesignSolution> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("A and B differ in size".into()));
    }
    check_not_collinear(&a.inverse(), &b.inverse())?;
    ZfDual::new(a.clone(), b.clone(), p_avg, gamma)?.solve()
}

/// Optimal transmit filter against a zero-forcing eavesdropper.
pub fn design_zf_zf(s: &WiretapScenario) -> Result<DesignSolution> {
    s.validate()?;
    let (m, e) = gram_pair(s)?;
    ZfDual::new(m.inverse(), e.inverse(), s.p_avg, s.gamma)?.solve()
}
