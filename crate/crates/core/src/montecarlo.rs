//! Monte Carlo validation: empirical MSE, BPSK bit error rate, the
//! conditional-mean eavesdropper and robustness to channel estimation error.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from a ChaCha8
//! generator seeded with `seed` on stream `k`, and partial sums are reduced
//! in chunk order, so results are bit-identical for any thread count.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::WiretapScenario;
use crate::design_wiener_eve::design_zf_wiener;
use crate::design_zf::design_zf_zf;
use crate::error::{Error, Result};
use crate::filters::{mse_wiener, mse_zf, wiener_receive, zf_receive, ReceiverKind, TransmitFilter};
use crate::linalg::{CMat, ComplexMatrix};

/// Trials per RNG stream.
pub const CHUNK: usize = 4096;
/// Largest number of hypotheses the exact CME will enumerate.
pub const MAX_CME_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constellation {
    Bpsk,
    Pam16,
    Gaussian,
}

impl Constellation {
    /// Unit-energy alphabet, or `None` for Gaussian input.
    pub fn points(self) -> Option<Vec<f64>> {
        match self {
            Constellation::Bpsk => Some(vec![-1.0, 1.0]),
            Constellation::Pam16 => {
                let norm = 85f64.sqrt();
                Some((0..16).map(|k| (2 * k - 15) as f64 / norm).collect())
            }
            Constellation::Gaussian => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Main,
    Eve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sumsq: f64, trials: usize, seed: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 {
            ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            trials,
            seed,
        }
    }

    /// True when `value` lies within `k` standard errors of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// Per-trial sums of `K` statistics, `(Σx, Σx²)` each.
type Sums<const K: usize> = [(f64, f64); K];

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `trials` trials in chunks; `body` fills the sums for one chunk.
fn run_chunked<const K: usize, F>(trials: usize, seed: u64, body: F) -> [McEstimate; K]
where
    F: Fn(&mut ChaCha8Rng, usize, &mut Sums<K>) + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Sums<K>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let mut sums = [(0.0, 0.0); K];
            body(&mut rng, CHUNK.min(trials - k * CHUNK), &mut sums);
            sums
        })
        .collect();
    let mut total = [(0.0, 0.0); K];
    for p in &partial {
        for (t, s) in total.iter_mut().zip(p) {
            t.0 += s.0;
            t.1 += s.1;
        }
    }
    total.map(|(s, ss)| McEstimate::from_sums(s, ss, trials, seed))
}

/// Row-major dense complex operator that applies without allocating.
#[derive(Debug, Clone)]
struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Dense {
    fn new(a: &CMat) -> Self {
        let (rows, cols) = a.shape();
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)])
            .collect();
        Self { rows, cols, data }
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Circular `CN(0, scale²)` sample.
fn complex_normal(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * (scale * std::f64::consts::FRAC_1_SQRT_2)
}

fn receiver(h: &ComplexMatrix, t: &TransmitFilter, rx: ReceiverKind) -> Result<ComplexMatrix> {
    match rx {
        ReceiverKind::ZeroForcing => zf_receive(h, t),
        ReceiverKind::Wiener => wiener_receive(h, t),
    }
}

fn check_trials(trials: usize, min: usize) -> Result<()> {
    if trials < min {
        return Err(Error::InvalidArgument(format!("need at least {min} trials, got {trials}")));
    }
    Ok(())
}

/// Empirical `E‖X − X̂‖²` for unit-variance Gaussian inputs and noise
/// `CN(0, noise_scale² I)`.
pub fn simulate_mse_scaled(
    s: &WiretapScenario,
    t: &TransmitFilter,
    rx: ReceiverKind,
    side: Side,
    trials: usize,
    seed: u64,
    noise_scale: f64,
) -> Result<McEstimate> {
    check_trials(trials, 1)?;
    let h = match side {
        Side::Main => &s.h_m,
        Side::Eve => &s.h_e,
    };
    let r = receiver(h, t, rx)?;
    let h_eff = Dense::new(&(h.as_matrix() * t.h_t().as_matrix()));
    let r = Dense::new(r.as_matrix());
    let (n, m) = (h_eff.rows, h_eff.cols);
    let [est] = run_chunked::<1, _>(trials, seed, |rng, count, sums| {
        let mut x = vec![Complex64::default(); m];
        let mut y = vec![Complex64::default(); n];
        let mut xh = vec![Complex64::default(); m];
        for _ in 0..count {
            x.iter_mut().for_each(|v| *v = complex_normal(rng, 1.0));
            h_eff.apply(&x, &mut y);
            y.iter_mut().for_each(|v| *v += complex_normal(rng, noise_scale));
            r.apply(&y, &mut xh);
            let err: f64 = x.iter().zip(&xh).map(|(a, b)| (a - b).norm_sqr()).sum();
            sums[0].0 += err;
            sums[0].1 += err * err;
        }
    });
    Ok(est)
}

/// Empirical MSE with unit-covariance noise.
pub fn simulate_mse(
    s: &WiretapScenario,
    t: &TransmitFilter,
    rx: ReceiverKind,
    side: Side,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials, 1000)?;
    simulate_mse_scaled(s, t, rx, side, trials, seed, 1.0)
}

/// Precomputed hypotheses `H_eff x` for the exact conditional-mean estimator.
struct CmeTable {
    n: usize,
    m: usize,
    symbols: Vec<f64>,
    images: Vec<Complex64>,
}

impl CmeTable {
    fn new(h_eff: &CMat, c: Constellation) -> Result<Self> {
        let points = c
            .points()
            .ok_or_else(|| Error::InvalidArgument("the CME needs a finite alphabet".into()))?;
        let (n, m) = h_eff.shape();
        let q = points.len();
        let terms = (0..m).try_fold(1usize, |acc, _| acc.checked_mul(q).filter(|&v| v <= MAX_CME_TERMS));
        let Some(terms) = terms else {
            return Err(Error::AlphabetTooLarge { points: q, streams: m });
        };
        let mut symbols = Vec::with_capacity(terms * m);
        let mut images = Vec::with_capacity(terms * n);
        for idx in 0..terms {
            let mut rest = idx;
            let start = symbols.len();
            for _ in 0..m {
                symbols.push(points[rest % q]);
                rest /= q;
            }
            let x = &symbols[start..];
            for i in 0..n {
                images.push((0..m).map(|j| h_eff[(i, j)] * x[j]).sum());
            }
        }
        Ok(Self {
            n,
            m,
            symbols,
            images,
        })
    }

    /// Posterior mean with weights `exp(−‖y − H x‖²)`, via log-sum-exp.
    fn estimate(&self, y: &[Complex64], log_w: &mut [f64], out: &mut [f64]) {
        let terms = self.images.len() / self.n;
        let mut best = f64::NEG_INFINITY;
        for (k, lw) in log_w.iter_mut().enumerate().take(terms) {
            let img = &self.images[k * self.n..(k + 1) * self.n];
            let d: f64 = img.iter().zip(y).map(|(a, b)| (b - a).norm_sqr()).sum();
            *lw = -d;
            best = best.max(-d);
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut norm = 0.0;
        for (k, lw) in log_w.iter().enumerate().take(terms) {
            let w = (lw - best).exp();
            norm += w;
            for (o, x) in out.iter_mut().zip(&self.symbols[k * self.m..(k + 1) * self.m]) {
                *o += w * x;
            }
        }
        out.iter_mut().for_each(|v| *v /= norm);
    }

    fn terms(&self) -> usize {
        self.images.len() / self.n
    }
}

/// Exact conditional-mean estimate of a real symbol vector from `y`.
pub fn cme_estimate(y: &[Complex64], h_eff: &ComplexMatrix, c: Constellation) -> Result<Vec<f64>> {
    if y.len() != h_eff.rows() {
        return Err(Error::DimensionMismatch(format!(
            "observation has {} entries, channel has {} rows",
            y.len(),
            h_eff.rows()
        )));
    }
    let table = CmeTable::new(h_eff.as_matrix(), c)?;
    let mut log_w = vec![0.0; table.terms()];
    let mut out = vec![0.0; table.m];
    table.estimate(y, &mut log_w, &mut out);
    Ok(out)
}

/// Paired eavesdropper MSEs of the CME and of the Wiener receiver on the
/// same finite-alphabet draws: `[cme, wiener, cme − wiener]`.
pub fn simulate_cme_vs_wiener(
    s: &WiretapScenario,
    t: &TransmitFilter,
    c: Constellation,
    trials: usize,
    seed: u64,
) -> Result<[McEstimate; 3]> {
    check_trials(trials, 1)?;
    let h_eff_mat = s.h_e.as_matrix() * t.h_t().as_matrix();
    let table = CmeTable::new(&h_eff_mat, c)?;
    let points = c.points().expect("finite alphabet checked");
    let h_eff = Dense::new(&h_eff_mat);
    let wiener = Dense::new(wiener_receive(&s.h_e, t)?.as_matrix());
    let (n, m) = (h_eff.rows, h_eff.cols);
    Ok(run_chunked::<3, _>(trials, seed, |rng, count, sums| {
        let mut x = vec![Complex64::default(); m];
        let mut y = vec![Complex64::default(); n];
        let mut xw = vec![Complex64::default(); m];
        let mut xc = vec![0.0; m];
        let mut log_w = vec![0.0; table.terms()];
        for _ in 0..count {
            x.iter_mut()
                .for_each(|v| *v = Complex64::new(points[rng.random_range(0..points.len())], 0.0));
            h_eff.apply(&x, &mut y);
            y.iter_mut().for_each(|v| *v += complex_normal(rng, 1.0));
            table.estimate(&y, &mut log_w, &mut xc);
            wiener.apply(&y, &mut xw);
            let ec: f64 = x.iter().zip(&xc).map(|(a, b)| (a.re - b).powi(2) + a.im.powi(2)).sum();
            let ew: f64 = x.iter().zip(&xw).map(|(a, b)| (a - b).norm_sqr()).sum();
            for (slot, v) in sums.iter_mut().zip([ec, ew, ec - ew]) {
                slot.0 += v;
                slot.1 += v * v;
            }
        }
    }))
}

/// Empirical eavesdropper MSE under the exact CME.
pub fn simulate_cme_mse(
    s: &WiretapScenario,
    t: &TransmitFilter,
    c: Constellation,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(simulate_cme_vs_wiener(s, t, c, trials, seed)?[0])
}

/// BPSK bit error rates `(main, eve)` with a sign slicer on the real part of
/// each receiver output, noise `CN(0, noise_scale² I)`.
pub fn simulate_ber_bpsk_scaled(
    s: &WiretapScenario,
    t: &TransmitFilter,
    rx_eve: ReceiverKind,
    trials: usize,
    seed: u64,
    noise_scale: f64,
) -> Result<(McEstimate, McEstimate)> {
    check_trials(trials, 1)?;
    let hm = Dense::new(&(s.h_m.as_matrix() * t.h_t().as_matrix()));
    let he = Dense::new(&(s.h_e.as_matrix() * t.h_t().as_matrix()));
    let rm = Dense::new(zf_receive(&s.h_m, t)?.as_matrix());
    let re = Dense::new(receiver(&s.h_e, t, rx_eve)?.as_matrix());
    let m = hm.cols;
    let [main, eve] = run_chunked::<2, _>(trials, seed, |rng, count, sums| {
        let mut x = vec![Complex64::default(); m];
        let mut ym = vec![Complex64::default(); hm.rows];
        let mut ye = vec![Complex64::default(); he.rows];
        let mut xh = vec![Complex64::default(); m];
        for _ in 0..count {
            x.iter_mut()
                .for_each(|v| *v = Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0));
            let mut errors = [0.0; 2];
            for (k, (h, r, y)) in [(&hm, &rm, &mut ym), (&he, &re, &mut ye)].into_iter().enumerate() {
                h.apply(&x, y);
                y.iter_mut().for_each(|v| *v += complex_normal(rng, noise_scale));
                r.apply(y, &mut xh);
                let wrong = x
                    .iter()
                    .zip(&xh)
                    .filter(|(a, b)| (b.re >= 0.0) != (a.re > 0.0))
                    .count();
                errors[k] = wrong as f64 / m as f64;
            }
            for (slot, v) in sums.iter_mut().zip(errors) {
                slot.0 += v;
                slot.1 += v * v;
            }
        }
    });
    Ok((main, eve))
}

/// BPSK bit error rates with unit-covariance noise.
pub fn simulate_ber_bpsk(
    s: &WiretapScenario,
    t: &TransmitFilter,
    rx_eve: ReceiverKind,
    trials: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    check_trials(trials, 10_000)?;
    simulate_ber_bpsk_scaled(s, t, rx_eve, trials, seed, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignKind {
    ZfZf,
    ZfWiener,
}

impl DesignKind {
    pub fn eve_receiver(self) -> ReceiverKind {
        match self {
            DesignKind::ZfZf => ReceiverKind::ZeroForcing,
            DesignKind::ZfWiener => ReceiverKind::Wiener,
        }
    }

    pub fn design(self, s: &WiretapScenario) -> Result<crate::design_zf::DesignSolution> {
        match self {
            DesignKind::ZfZf => design_zf_zf(s),
            DesignKind::ZfWiener => design_zf_wiener(s),
        }
    }
}

/// Averages over channel-estimation-error realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedOutcome {
    pub mse_main: McEstimate,
    pub mse_eve: McEstimate,
    /// Perturbed channels whose design failed and were redrawn.
    pub rejected: usize,
}

const MAX_REDRAWS: usize = 1000;

fn perturb(h: &ComplexMatrix, sigma: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let noise = CMat::from_fn(h.rows(), h.cols(), |_, _| complex_normal(rng, sigma));
    ComplexMatrix::new(h.as_matrix() + noise).expect("finite")
}

/// Designs on `H + Φ` and scores on the true channels. `Φ` has i.i.d.
/// circular entries of variance `σ²`; realization `r` uses RNG stream `r`.
pub fn perturbed_design_experiment(
    s: &WiretapScenario,
    kind: DesignKind,
    sigma2_m: f64,
    sigma2_e: f64,
    realizations: usize,
    seed: u64,
) -> Result<PerturbedOutcome> {
    if !(sigma2_m >= 0.0) || !(sigma2_e >= 0.0) {
        return Err(Error::InvalidArgument("perturbation variances must be nonnegative".into()));
    }
    check_trials(realizations, 1)?;
    s.validate()?;
    let (sm, se) = (sigma2_m.sqrt(), sigma2_e.sqrt());
    let rows: Vec<Result<(f64, f64, usize)>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, r as u64);
            for rejected in 0..MAX_REDRAWS {
                let trial = WiretapScenario {
                    h_m: perturb(&s.h_m, sm, &mut rng),
                    h_e: perturb(&s.h_e, se, &mut rng),
                    ..s.clone()
                };
                let Ok(sol) = kind.design(&trial) else { continue };
                let main = mse_zf(&s.h_m, &sol.t)?;
                let eve = match kind {
                    DesignKind::ZfZf => mse_zf(&s.h_e, &sol.t)?,
                    DesignKind::ZfWiener => mse_wiener(&s.h_e, &sol.t)?,
                };
                return Ok((main, eve, rejected));
            }
            Err(Error::ConvergenceFailed(format!(
                "realization {r}: {MAX_REDRAWS} perturbed designs in a row failed"
            )))
        })
        .collect();
    let (mut sm1, mut sm2, mut se1, mut se2, mut rejected) = (0.0, 0.0, 0.0, 0.0, 0);
    for row in rows {
        let (a, b, k) = row?;
        sm1 += a;
        sm2 += a * a;
        se1 += b;
        se2 += b * b;
        rejected += k;
    }
    Ok(PerturbedOutcome {
        mse_main: McEstimate::from_sums(sm1, sm2, realizations, seed),
        mse_eve: McEstimate::from_sums(se1, se2, realizations, seed),
        rejected,
    })
}
