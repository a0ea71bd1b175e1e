//! Numeric secrecy capacity of a degraded MIMO wiretap channel.
//!
//! When `M ⪰ E` the rate difference is concave in the input covariance `Q`,
//! so projected gradient ascent over `{Q ⪰ 0, tr{Q} ≤ P}` finds the
//! capacity. Random restarts guard against a poorly conditioned start.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::WiretapScenario;
use crate::error::{Error, Result};
use crate::filters::rate_difference;
use crate::linalg::{frobenius, hermitian_eigen, hermitian_part, inverse_hpd, real_trace, CMat, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Accuracy target in bits.
    pub opt_tol: f64,
    pub max_iter: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            opt_tol: 1e-4,
            max_iter: 5000,
        }
    }
}

/// Largest admissible number of streams.
pub const MAX_STREAMS: usize = 3;

/// Projects eigenvalues onto `{λ ≥ 0, Σλ ≤ P}`.
fn project_spectrum(values: &[f64], p: f64) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= p {
        return clipped;
    }
    // Euclidean projection onto the scaled simplex
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - p) / (k + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    values.iter().map(|v| (v - theta).max(0.0)).collect()
}

fn project(q: &CMat, p: f64) -> CMat {
    let (values, vectors) = hermitian_eigen(q);
    let projected = project_spectrum(&values, p);
    let mut scaled = vectors.clone();
    for (j, &v) in projected.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    hermitian_part(&(scaled * vectors.adjoint()))
}

/// `H†(I + HQH†)⁻¹H / ln 2`, the gradient of `log₂det(I + HQH†)`.
fn logdet_gradient(h: &CMat, q: &CMat) -> CMat {
    let n = h.nrows();
    let inv = inverse_hpd(&(CMat::identity(n, n) + h * q * h.adjoint())).expect("I + PSD is PD");
    (h.adjoint() * inv * h) / Complex64::new(std::f64::consts::LN_2, 0.0)
}

struct Ascent {
    value: f64,
    converged: bool,
}

fn ascend(h_m: &ComplexMatrix, h_e: &ComplexMatrix, p: f64, q0: CMat, opts: &CapacityOptions) -> Ascent {
    let f = |q: &CMat| rate_difference(h_m, h_e, q);
    let mut q = q0;
    let mut value = f(&q);
    let mut step = 1.0;
    for _ in 0..opts.max_iter {
        let grad = hermitian_part(&(logdet_gradient(h_m.as_matrix(), &q) - logdet_gradient(h_e.as_matrix(), &q)));
        // projected-gradient stationarity measure at unit step
        let probe = project(&(&q + &grad), p);
        if frobenius(&(&probe - &q)) < 1e-10 * p.max(1.0) {
            return Ascent { value, converged: true };
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial = project(&(&q + &grad * Complex64::new(step, 0.0)), p);
            let gain = real_trace(&(grad.adjoint() * (&trial - &q)));
            let fv = f(&trial);
            if fv >= value + 1e-4 * gain {
                let improvement = fv - value;
                q = trial;
                value = fv;
                accepted = true;
                step *= 2.0;
                if improvement < 1e-14 && gain < 1e-13 {
                    return Ascent { value, converged: true };
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Ascent { value, converged: true };
        }
    }
    Ascent { value, converged: false }
}

fn random_start(m: usize, p: f64, rng: &mut ChaCha8Rng) -> CMat {
    let w = CMat::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let q = &w * w.adjoint();
    let tr = real_trace(&q);
    q * Complex64::new(p / tr, 0.0)
}

/// `max_{Q ⪰ 0, tr Q ≤ P} log₂det(I + H_M Q H_M†) − log₂det(I + H_E Q H_E†)`
/// for a degraded scenario, in bits per channel use.
pub fn secrecy_capacity_degraded(s: &WiretapScenario, opts: &CapacityOptions) -> Result<f64> {
    let m = s.h_m.cols();
    if s.h_e.cols() != m {
        return Err(Error::DimensionMismatch("channel column counts differ".into()));
    }
    if m > MAX_STREAMS {
        return Err(Error::BadDimension(format!("at most {MAX_STREAMS} streams, got {m}")));
    }
    if !(s.p_avg > 0.0) || !s.p_avg.is_finite() {
        return Err(Error::NonPositivePower(s.p_avg));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let mg = s.h_m.as_matrix().adjoint() * s.h_m.as_matrix();
    let eg = s.h_e.as_matrix().adjoint() * s.h_e.as_matrix();
    let (diff, _) = hermitian_eigen(&(&mg - &eg));
    let min = diff[diff.len() - 1];
    let scale = frobenius(&mg).max(frobenius(&eg));
    if min < -1e-12 * scale {
        return Err(Error::NotDegraded { min_eigenvalue: min });
    }

    let p = s.p_avg;
    let runs: Vec<Ascent> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let q0 = if k == 0 {
                CMat::identity(m, m) * Complex64::new(p / m as f64, 0.0)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(k as u64);
                random_start(m, p, &mut rng)
            };
            ascend(&s.h_m, &s.h_e, p, q0, opts)
        })
        .collect();
    if !runs.iter().any(|r| r.converged && r.value.is_finite()) {
        return Err(Error::ConvergenceFailed("no restart reached stationarity".into()));
    }
    let best = runs
        .iter()
        .filter(|r| r.value.is_finite())
        .map(|r| r.value)
        .fold(0.0, f64::max);
    Ok(best)
}
