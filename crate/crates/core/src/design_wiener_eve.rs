//! Optimal transmit filter for a zero-forcing legitimate receiver facing a
//! Wiener eavesdropper.
//!
//! With `Z = G⁻¹` and `R = (Z + E)⁻¹` the eavesdropper MSE is
//! `m − tr{ER}`, so the problem is
//! `min tr{AZ}  s.t.  tr{ER} ≤ m − γ,  tr{Z⁻¹} ≤ P`, which is convex in `Z`.
//! Depending on `(γ, P)` only the power constraint, only the secrecy
//! constraint, or both are active. The first two cases have closed forms;
//! the third is solved numerically and certified through its KKT system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::{gram_pair, WiretapScenario};
use crate::design_zf::{secrecy_inactive_filter, DesignSolution, Regime, FEAS_TOL, KKT_TOL};
use crate::error::{Error, Result};
use crate::filters::{mse_wiener, TransmitFilter};
use crate::linalg::{
    frobenius, inverse_hpd, real_trace, simultaneous_diagonalize, CMat, ComplexMatrix,
    HermitianPD, SimDiag,
};

fn check_gamma_below_m(s: &WiretapScenario) -> Result<()> {
    if s.gamma >= s.m() as f64 {
        return Err(Error::GammaTooLarge {
            gamma: s.gamma,
            m: s.m(),
        });
    }
    Ok(())
}

fn gamma_max_from(m: &HermitianPD, e: &HermitianPD, p_avg: f64) -> Result<f64> {
    let scale = m.trace_power(-0.5) / p_avg;
    let inner = m.power(0.5).matrix() * Complex64::new(scale, 0.0) + e.matrix();
    let inv = inverse_hpd(&inner)?;
    Ok(m.dim() as f64 - real_trace(&(e.matrix() * inv)))
}

/// `m − tr{E[(tr{M^{-1/2}}/P) M^{1/2} + E]⁻¹}`: the largest `γ` that the
/// power-only optimum already satisfies against a Wiener eavesdropper.
pub fn gamma_max_reg1(s: &WiretapScenario) -> Result<f64> {
    s.validate()?;
    let (m, e) = gram_pair(s)?;
    gamma_max_from(&m, &e, s.p_avg)
}

/// `α` and the diagonal `D = α Λ_M^{1/2} Λ_E^{1/2} − Λ_E` of the
/// power-inactive closed form.
fn theorem3_diagonal(sd: &SimDiag, gamma: f64) -> Result<(f64, Vec<f64>)> {
    let m = sd.lambda_m.len() as f64;
    let alpha = sd
        .lambda_e
        .iter()
        .zip(&sd.lambda_m)
        .map(|(e, m)| (e / m).sqrt())
        .sum::<f64>()
        / (m - gamma);
    let d: Vec<f64> = sd
        .lambda_e
        .iter()
        .zip(&sd.lambda_m)
        .map(|(e, m)| alpha * (m * e).sqrt() - e)
        .collect();
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::RegimeUndefined { index, value });
    }
    Ok((alpha, d))
}

/// `H_T = C D^{-1/2}` for a given simultaneous diagonalization. The result
/// does not depend on how the columns of `C` are scaled.
pub fn theorem3_from_simdiag(sd: &SimDiag, gamma: f64) -> Result<(TransmitFilter, f64)> {
    let (alpha, d) = theorem3_diagonal(sd, gamma)?;
    let mut h = sd.c.as_matrix().clone();
    for (j, &dj) in d.iter().enumerate() {
        h.column_mut(j).scale_mut(1.0 / dj.sqrt());
    }
    Ok((TransmitFilter::new(ComplexMatrix::new(h)?)?, alpha))
}

fn p_min_from(sd: &SimDiag, gamma: f64) -> Result<f64> {
    let (_, d) = theorem3_diagonal(sd, gamma)?;
    let c = sd.c.as_matrix();
    Ok(d.iter()
        .enumerate()
        .map(|(j, dj)| c.column(j).norm_squared() / dj)
        .sum())
}

/// `tr{C D⁻¹ C†}`: the smallest budget at which the power constraint stops
/// binding.
pub fn p_min_reg3(s: &WiretapScenario) -> Result<f64> {
    s.validate()?;
    check_gamma_below_m(s)?;
    let (m, e) = gram_pair(s)?;
    p_min_from(&simultaneous_diagonalize(&m, &e)?, s.gamma)
}

/// The power-only optimum, valid while `γ ≤ γ_max_reg1`.
pub fn theorem2_filter(s: &WiretapScenario) -> Result<TransmitFilter> {
    s.validate()?;
    let (m, e) = gram_pair(s)?;
    let limit = gamma_max_from(&m, &e, s.p_avg)?;
    if s.gamma > limit {
        return Err(Error::WrongRegime(format!(
            "gamma = {} exceeds the secrecy-inactive limit {limit}",
            s.gamma
        )));
    }
    secrecy_inactive_filter(&m, s.p_avg)
}

/// The secrecy-only optimum, valid while `P ≥ p_min_reg3`.
pub fn theorem3_filter(s: &WiretapScenario) -> Result<TransmitFilter> {
    s.validate()?;
    check_gamma_below_m(s)?;
    let (m, e) = gram_pair(s)?;
    let sd = simultaneous_diagonalize(&m, &e)?;
    let p_min = p_min_from(&sd, s.gamma)?;
    if s.p_avg < p_min {
        return Err(Error::WrongRegime(format!(
            "power budget {} is below the power-inactive threshold {p_min}",
            s.p_avg
        )));
    }
    Ok(theorem3_from_simdiag(&sd, s.gamma)?.0)
}

/// `‖A − νRER − μZ⁻²‖ / ‖A‖` at `Z = G⁻¹`.
fn kkt_residual(a: &CMat, e: &CMat, gram: &HermitianPD, nu: f64, mu: f64) -> Result<f64> {
    let z = gram.inverse();
    let r = inverse_hpd(&(z.matrix() + e))?;
    let g2 = gram.power(2.0);
    let stat = a - (&r * e * &r) * Complex64::new(nu, 0.0) - g2.matrix() * Complex64::new(mu, 0.0);
    Ok(frobenius(&stat) / frobenius(a))
}

fn assemble(
    s: &WiretapScenario,
    a: &CMat,
    e: &CMat,
    t: TransmitFilter,
    regime: Regime,
    nu: f64,
    mu: f64,
) -> Result<DesignSolution> {
    let z = t.gram().inverse();
    Ok(DesignSolution {
        regime,
        nu,
        mu,
        mse_main: real_trace(&(a * z.matrix())),
        mse_eve: mse_wiener(&s.h_e, &t)?,
        power: t.gram().trace(),
        kkt_residual: kkt_residual(a, e, t.gram(), nu, mu)?,
        t,
    })
}

/// Orthonormal basis of the real vector space of `m x m` Hermitian
/// matrices under `⟨X, Y⟩ = Re tr{XY}`.
fn hermitian_basis(m: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(m * m);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..m {
        let mut x = CMat::zeros(m, m);
        x[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(x);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut x = CMat::zeros(m, m);
            x[(i, j)] = Complex64::new(r, 0.0);
            x[(j, i)] = Complex64::new(r, 0.0);
            basis.push(x);
            let mut y = CMat::zeros(m, m);
            y[(i, j)] = Complex64::new(0.0, r);
            y[(j, i)] = Complex64::new(0.0, -r);
            basis.push(y);
        }
    }
    basis
}

fn inner(x: &CMat, y: &CMat) -> f64 {
    // Re tr{XY} without forming the product
    x.iter()
        .zip(y.transpose().iter())
        .map(|(a, b)| (a * b).re)
        .sum()
}

/// Constraint values and derivatives at a point `Z`.
struct Local {
    r: CMat,
    zi: CMat,
    ere: CMat,
    zi2: CMat,
    c1: f64,
    c2: f64,
}

impl Local {
    fn at(z: &CMat, e: &CMat) -> Option<Self> {
        let zi = inverse_hpd(z).ok()?;
        let r = inverse_hpd(&(z + e)).ok()?;
        let c1 = real_trace(&(e * &r));
        let c2 = real_trace(&zi);
        let ere = e * &r;
        let zi2 = &zi * &zi;
        Some(Self {
            r,
            zi,
            ere,
            zi2,
            c1,
            c2,
        })
    }

    /// `∇c1 = −RER`.
    fn g1(&self) -> CMat {
        -(&self.r * &self.ere)
    }

    /// `∇c2 = −Z⁻²`.
    fn g2(&self) -> CMat {
        -self.zi2.clone()
    }

    /// Directional derivative of `∇c1` along `D`: `RDRER + RERDR`.
    fn h1(&self, d: &CMat) -> CMat {
        let rdr = &self.r * d * &self.r;
        &rdr * &self.ere + (&self.r * &self.ere).adjoint() * d * &self.r
    }

    /// Directional derivative of `∇c2` along `D`: `Z⁻¹DZ⁻² + Z⁻²DZ⁻¹`.
    fn h2(&self, d: &CMat) -> CMat {
        &self.zi * d * &self.zi2 + &self.zi2 * d * &self.zi
    }
}

fn combine(basis: &[CMat], coeffs: &[f64]) -> CMat {
    let m = basis[0].nrows();
    basis
        .iter()
        .zip(coeffs)
        .fold(CMat::zeros(m, m), |acc, (x, &c)| acc + x * Complex64::new(c, 0.0))
}

const BARRIER_GROWTH: f64 = 10.0;
const BARRIER_MAX_OUTER: usize = 60;
const NEWTON_MAX_ITER: usize = 100;
const POLISH_MAX_ITER: usize = 30;

/// Interior-point solve of the both-active regime followed by Newton on
/// the KKT system. Returns `(Z, ν, μ)`.
fn regime2_core(a: &CMat, e: &CMat, p_avg: f64, gamma: f64) -> Result<(CMat, f64, f64)> {
    let m = a.nrows();
    let b1 = m as f64 - gamma;
    let basis = hermitian_basis(m);
    let n = basis.len();
    let eye = CMat::identity(m, m);

    let mut scale = 1.0;
    let mut z = loop {
        let z = &eye * Complex64::new(scale, 0.0);
        let local = Local::at(&z, e).ok_or_else(|| Error::ConvergenceFailed("bad start".into()))?;
        if local.c1 < 0.5 * b1 && local.c2 < 0.5 * p_avg {
            break z;
        }
        scale *= 2.0;
        if !scale.is_finite() || scale > 1e300 {
            return Err(Error::ConvergenceFailed("no strictly feasible start".into()));
        }
    };

    let objective = |z: &CMat| real_trace(&(a * z));
    let barrier = |z: &CMat, t: f64| -> f64 {
        match Local::at(z, e) {
            Some(l) if l.c1 < b1 && l.c2 < p_avg => {
                t * objective(z) - (b1 - l.c1).ln() - (p_avg - l.c2).ln()
            }
            _ => f64::INFINITY,
        }
    };

    let mut t = 2.0 / objective(&z);
    for _ in 0..BARRIER_MAX_OUTER {
        for _ in 0..NEWTON_MAX_ITER {
            let l = Local::at(&z, e).expect("iterate stays interior");
            let (s1, s2) = (b1 - l.c1, p_avg - l.c2);
            let (g1, g2) = (l.g1(), l.g2());
            let grad = a * Complex64::new(t, 0.0) + &g1 / Complex64::new(s1, 0.0)
                + &g2 / Complex64::new(s2, 0.0);
            let gv = DVector::from_iterator(n, basis.iter().map(|x| inner(&grad, x)));
            let mut hess = DMatrix::<f64>::zeros(n, n);
            for (col, y) in basis.iter().enumerate() {
                let hy = l.h1(y) / Complex64::new(s1, 0.0)
                    + l.h2(y) / Complex64::new(s2, 0.0)
                    + &g1 * Complex64::new(inner(&g1, y) / (s1 * s1), 0.0)
                    + &g2 * Complex64::new(inner(&g2, y) / (s2 * s2), 0.0);
                for (row, x) in basis.iter().enumerate() {
                    hess[(row, col)] = inner(x, &hy);
                }
            }
            let Some(dx) = hess.lu().solve(&(-&gv)) else {
                break;
            };
            let decrement = -gv.dot(&dx);
            if !(decrement / 2.0 >= 1e-14) {
                break;
            }
            let step = combine(&basis, dx.as_slice());
            let f0 = barrier(&z, t);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial = &z + &step * Complex64::new(alpha, 0.0);
                if barrier(&trial, t) <= f0 - 0.25 * alpha * decrement {
                    z = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if 2.0 / t < 1e-10 * objective(&z) {
            break;
        }
        t *= BARRIER_GROWTH;
    }

    let l = Local::at(&z, e).expect("interior");
    let mut nu = 1.0 / (t * (b1 - l.c1));
    let mut mu = 1.0 / (t * (p_avg - l.c2));

    // Newton on A + ν∇c1 + μ∇c2 = 0, c1 = m − γ, c2 = P.
    let a_norm = frobenius(a);
    let mut best = (z.clone(), nu, mu);
    for _ in 0..POLISH_MAX_ITER {
        let Some(l) = Local::at(&z, e) else { break };
        let (g1, g2) = (l.g1(), l.g2());
        let lag = a + &g1 * Complex64::new(nu, 0.0) + &g2 * Complex64::new(mu, 0.0);
        let mut f = DVector::<f64>::zeros(n + 2);
        for (k, x) in basis.iter().enumerate() {
            f[k] = inner(&lag, x) / a_norm;
        }
        f[n] = (l.c1 - b1) / b1;
        f[n + 1] = (l.c2 - p_avg) / p_avg;
        best = (z.clone(), nu, mu);
        if f.amax() < 1e-15 {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n + 2, n + 2);
        for (col, y) in basis.iter().enumerate() {
            let hy = l.h1(y) * Complex64::new(nu, 0.0) + l.h2(y) * Complex64::new(mu, 0.0);
            for (row, x) in basis.iter().enumerate() {
                jac[(row, col)] = inner(x, &hy) / a_norm;
            }
            jac[(n, col)] = inner(&g1, y) / b1;
            jac[(n + 1, col)] = inner(&g2, y) / p_avg;
        }
        for (row, x) in basis.iter().enumerate() {
            jac[(row, n)] = inner(x, &g1) / a_norm;
            jac[(row, n + 1)] = inner(x, &g2) / a_norm;
        }
        let Some(d) = jac.lu().solve(&(-&f)) else { break };
        let next = &z + combine(&basis, &d.as_slice()[..n]);
        if Local::at(&next, e).is_none() {
            break;
        }
        z = next;
        nu += d[n];
        mu += d[n + 1];
    }
    Ok(best)
}

/// Numerical solve of the regime where both constraints bind.
pub fn regime2_solve(s: &WiretapScenario) -> Result<DesignSolution> {
    s.validate()?;
    check_gamma_below_m(s)?;
    let (m, e) = gram_pair(s)?;
    let limit = gamma_max_from(&m, &e, s.p_avg)?;
    if s.gamma <= limit {
        return Err(Error::WrongRegime(format!(
            "gamma = {} is within the secrecy-inactive range (limit {limit})",
            s.gamma
        )));
    }
    let sd = simultaneous_diagonalize(&m, &e)?;
    if let Ok(p_min) = p_min_from(&sd, s.gamma) {
        if s.p_avg >= p_min {
            return Err(Error::WrongRegime(format!(
                "power budget {} reaches the power-inactive threshold {p_min}",
                s.p_avg
            )));
        }
    }
    solve_both_active(s, &m, &e)
}

fn solve_both_active(s: &WiretapScenario, m: &HermitianPD, e: &HermitianPD) -> Result<DesignSolution> {
    let a = m.inverse();
    let (z, nu, mu) = regime2_core(a.matrix(), e.matrix(), s.p_avg, s.gamma)?;
    let gram = HermitianPD::new(&inverse_hpd(&z)?)?;
    let sol = assemble(
        s,
        a.matrix(),
        e.matrix(),
        TransmitFilter::from_gram(&gram),
        Regime::BothActive,
        nu,
        mu,
    )?;
    let power_gap = (sol.power - s.p_avg).abs() / s.p_avg;
    let secrecy_gap = (sol.mse_eve - s.gamma).abs() / s.gamma;
    if sol.kkt_residual > KKT_TOL
        || power_gap > FEAS_TOL
        || secrecy_gap > FEAS_TOL
        || !(nu >= 0.0)
        || !(mu >= 0.0)
    {
        return Err(Error::ConvergenceFailed(format!(
            "certificate rejected: kkt {:.3e}, power gap {power_gap:.3e}, secrecy gap \
             {secrecy_gap:.3e}, nu {nu:.6e}, mu {mu:.6e}",
            sol.kkt_residual
        )));
    }
    Ok(sol)
}

/// Regime dispatch for the ZF-Wiener design.
pub fn design_zf_wiener(s: &WiretapScenario) -> Result<DesignSolution> {
    s.validate()?;
    check_gamma_below_m(s)?;
    let (m, e) = gram_pair(s)?;
    let a = m.inverse();

    if s.gamma <= gamma_max_from(&m, &e, s.p_avg)? {
        let t = secrecy_inactive_filter(&m, s.p_avg)?;
        let tr = a.trace_power(0.5);
        let mu = tr * tr / (s.p_avg * s.p_avg);
        return assemble(s, a.matrix(), e.matrix(), t, Regime::SecrecyInactive, 0.0, mu);
    }

    let sd = simultaneous_diagonalize(&m, &e)?;
    let p_min = match p_min_from(&sd, s.gamma) {
        Ok(p) => p,
        Err(Error::RegimeUndefined { .. }) => f64::INFINITY,
        Err(err) => return Err(err),
    };
    if s.p_avg >= p_min {
        let (t, alpha) = theorem3_from_simdiag(&sd, s.gamma)?;
        return assemble(
            s,
            a.matrix(),
            e.matrix(),
            t,
            Regime::PowerInactive,
            alpha * alpha,
            0.0,
        );
    }
    solve_both_active(s, &m, &e)
}
