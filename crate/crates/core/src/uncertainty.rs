//! Designs for random channels against a zero-forcing eavesdropper.
//!
//! Averaging the ZF MSE over a random channel replaces `(H†H)⁻¹` by its
//! expectation, so both scenarios reduce to the ZF-ZF problem on effective
//! inverse-Gram matrices and reuse its dual solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelStats, WishartConvention};
use crate::design_zf::{solve_zf_from_inverses, DesignSolution};
use crate::error::{Error, Result};
use crate::linalg::{check_full_column_rank, inverse_hpd, CMat, ComplexMatrix, HermitianPD};

/// `E{(H†H)⁻¹} = Σ⁻¹ / (n − m − k)`, with `k` set by the Wishart convention.
pub fn expected_inverse_gram(stats: &ChannelStats) -> Result<HermitianPD> {
    let required = stats.m() + stats.convention.offset();
    if stats.n_rows <= required {
        return Err(Error::DegreesOfFreedom {
            n_rows: stats.n_rows,
            required,
        });
    }
    stats.sigma.inverse().scaled(1.0 / stats.denominator() as f64)
}

/// One `n x m` channel draw with i.i.d. rows of covariance `Σ`, built as
/// `W Σ^{1/2}` from a white `W` of the matching field.
pub fn sample_channel(sigma_sqrt: &HermitianPD, n_rows: usize, convention: WishartConvention, rng: &mut ChaCha8Rng) -> CMat {
    let m = sigma_sqrt.dim();
    let w = CMat::from_fn(n_rows, m, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        match convention {
            WishartConvention::Real => num_complex::Complex64::new(re, 0.0),
            WishartConvention::Complex => {
                let im: f64 = StandardNormal.sample(rng);
                num_complex::Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    });
    w * sigma_sqrt.matrix()
}

const DRAWS_PER_CHUNK: usize = 4096;

/// Sample mean of `(H†H)⁻¹` over `draws` channels drawn under the stats'
/// convention. Deterministic in `seed` regardless of thread count.
pub fn empirical_inverse_gram(stats: &ChannelStats, draws: usize, seed: u64) -> Result<CMat> {
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be positive".into()));
    }
    let root = stats.sigma.power(0.5);
    let m = stats.m();
    let chunks = draws.div_ceil(DRAWS_PER_CHUNK);
    let partial: Vec<Result<CMat>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = DRAWS_PER_CHUNK.min(draws - k * DRAWS_PER_CHUNK);
            let mut acc = CMat::zeros(m, m);
            for _ in 0..count {
                let h = sample_channel(&root, stats.n_rows, stats.convention, &mut rng);
                acc += inverse_hpd(&(h.adjoint() * &h))?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = CMat::zeros(m, m);
    for p in partial {
        total += p?;
    }
    Ok(total / num_complex::Complex64::new(draws as f64, 0.0))
}

/// Both channels random: minimize `tr{E[M⁻¹] Z}` subject to
/// `tr{E[E⁻¹] Z} ≥ γ` and `tr{Z⁻¹} ≤ P`.
pub fn design_scenario1_zf(
    stats_m: &ChannelStats,
    stats_e: &ChannelStats,
    p_avg: f64,
    gamma: f64,
) -> Result<DesignSolution> {
    if stats_m.m() != stats_e.m() {
        return Err(Error::DimensionMismatch("stream counts differ".into()));
    }
    let a = expected_inverse_gram(stats_m)?;
    let b = expected_inverse_gram(stats_e)?;
    solve_zf_from_inverses(&a, &b, p_avg, gamma)
}

/// Main channel known exactly, eavesdropper channel random.
pub fn design_scenario2_zf(
    h_m: &ComplexMatrix,
    stats_e: &ChannelStats,
    p_avg: f64,
    gamma: f64,
) -> Result<DesignSolution> {
    if h_m.cols() != stats_e.m() {
        return Err(Error::DimensionMismatch(format!(
            "h_m has {} columns, eavesdropper statistics are {}x{}",
            h_m.cols(),
            stats_e.m(),
            stats_e.m()
        )));
    }
    if h_m.rows() < h_m.cols() {
        return Err(Error::BadDimension(format!("h_m is {}x{}", h_m.rows(), h_m.cols())));
    }
    check_full_column_rank(h_m.as_matrix())?;
    let m = HermitianPD::new(&(h_m.as_matrix().adjoint() * h_m.as_matrix()))?;
    let b = expected_inverse_gram(stats_e)?;
    solve_zf_from_inverses(&m.inverse(), &b, p_avg, gamma)
}

type PairRows = Vec<Vec<[f64; 2]>>;

/// On-disk statistics format. `h_m` is only needed for the known-main-channel
/// scenario and `sigma_m`/`n_m` only for the fully random one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_m: Option<PairRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_m: Option<usize>,
    pub sigma_e: PairRows,
    pub n_e: usize,
    pub p_avg: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_m: Option<PairRows>,
    #[serde(default)]
    pub convention: WishartConvention,
}

impl StatsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    fn stats(&self, sigma: &PairRows, n: usize) -> Result<ChannelStats> {
        let sigma = HermitianPD::from_matrix(&ComplexMatrix::from_pairs(sigma)?)?;
        ChannelStats::new(sigma, n, self.convention)
    }

    pub fn stats_e(&self) -> Result<ChannelStats> {
        self.stats(&self.sigma_e, self.n_e)
    }

    pub fn stats_m(&self) -> Result<ChannelStats> {
        match (&self.sigma_m, self.n_m) {
            (Some(s), Some(n)) => self.stats(s, n),
            _ => Err(Error::Parse("scenario 1 needs sigma_m and n_m".into())),
        }
    }

    pub fn solve_scenario1(&self) -> Result<DesignSolution> {
        design_scenario1_zf(&self.stats_m()?, &self.stats_e()?, self.p_avg, self.gamma)
    }

    pub fn solve_scenario2(&self) -> Result<DesignSolution> {
        let h_m = self
            .h_m
            .as_ref()
            .ok_or_else(|| Error::Parse("scenario 2 needs h_m".into()))?;
        design_scenario2_zf(&ComplexMatrix::from_pairs(h_m)?, &self.stats_e()?, self.p_avg, self.gamma)
    }
}
