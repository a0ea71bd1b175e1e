//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;

use sfd_core::capacity::{secrecy_capacity_degraded, CapacityOptions};
use sfd_core::design_wiener_eve::{
    design_zf_wiener, gamma_max_reg1, p_min_reg3, regime2_solve, theorem2_filter, theorem3_filter,
};
use sfd_core::design_zf::{dual_objective, design_zf_zf, zf_threshold};
use sfd_core::filters::{achievable_secrecy_rate, mse_wiener, mse_zf, power_used};
use sfd_core::linalg::frobenius;
use sfd_core::montecarlo::{
    cme_estimate, perturbed_design_experiment, simulate_ber_bpsk, simulate_cme_vs_wiener, simulate_mse,
    Constellation, DesignKind, Side,
};
use sfd_core::uncertainty::{empirical_inverse_gram, expected_inverse_gram};
use sfd_core::{
    ChannelStats, ComplexMatrix, Error, HermitianPD, ReceiverKind, Regime, TransmitFilter, WiretapScenario,
    WishartConvention,
};

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

// ---------------------------------------------------------------------------
// 2x2 closed-form oracles, independent of the library's eigen solvers.

#[derive(Clone, Copy, Debug)]
struct M2([[C; 2]; 2]);

impl M2 {
    fn of(m: &ComplexMatrix) -> Self {
        let a = m.as_matrix();
        M2([[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]])
    }
    fn adj(self) -> Self {
        let a = self.0;
        M2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.0, o.0);
        let mut r = [[C::default(); 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        M2(r)
    }
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.0, o.0);
        M2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
    fn scale(self, s: f64) -> Self {
        let a = self.0;
        M2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }
    fn eye(s: f64) -> Self {
        M2([[c(s), c(0.0)], [c(0.0), c(s)]])
    }
    fn tr(self) -> f64 {
        (self.0[0][0] + self.0[1][1]).re
    }
    fn det(self) -> f64 {
        let a = self.0;
        (a[0][0] * a[1][1] - a[0][1] * a[1][0]).re
    }
    fn gram(self) -> Self {
        self.adj().mul(self)
    }
    fn cofactor(self) -> Self {
        let a = self.0;
        M2([[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]])
    }
    fn inv(self) -> Self {
        self.cofactor().scale(1.0 / self.det())
    }
    /// PSD square root: `(S + √det I) / √(tr S + 2√det)`.
    fn sqrt(self) -> Self {
        let sd = self.det().max(0.0).sqrt();
        self.add(M2::eye(sd)).scale(1.0 / (self.tr() + 2.0 * sd).sqrt())
    }
    fn eigenvalues(self) -> (f64, f64) {
        let (t, d) = (self.tr(), self.det());
        let r = (t * t / 4.0 - d).max(0.0).sqrt();
        (t / 2.0 + r, t / 2.0 - r)
    }
}

/// Smallest root of `det(A − νB) = 0`.
fn min_gen_eig(a: M2, b: M2) -> f64 {
    let (x, y) = (a.0, b.0);
    let cross = (x[0][0] * y[1][1] + x[1][1] * y[0][0] - x[0][1] * y[1][0] - x[1][0] * y[0][1]).re;
    let (qa, qb, qc) = (b.det(), -cross, a.det());
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    // numerically stable small root
    2.0 * qc / (-qb + disc)
}

/// Brute-force ZF-ZF optimum. For each grid `ν`, the Lagrangian minimizer is
/// `Z(ν) = adj(S + √det S I) / (P √det S)` with `S = A − νB`; the answer is
/// the best `tr{AZ}` over grid points with `tr{BZ} ≥ γ`.
fn zf_grid_oracle(hm: M2, he: M2, p: f64, gamma: f64, points: usize) -> Option<f64> {
    let a = hm.gram().inv();
    let b = he.gram().inv();
    let nu_max = min_gen_eig(a, b);
    let mut best: Option<f64> = None;
    for k in 0..points {
        let nu = nu_max * k as f64 / points as f64;
        let s = a.add(b.scale(-nu));
        let sd = s.det();
        if sd <= 0.0 {
            continue;
        }
        let r = s.add(M2::eye(sd.sqrt())).cofactor();
        let scale = 1.0 / (p * sd.sqrt());
        let eve = a_trace(b, r) * scale;
        if eve >= gamma {
            let main = a_trace(a, r) * scale;
            best = Some(best.map_or(main, |v: f64| v.min(main)));
        }
    }
    best
}

fn a_trace(x: M2, y: M2) -> f64 {
    x.mul(y).tr()
}

// ---------------------------------------------------------------------------

fn paper(p: f64, gamma: f64) -> WiretapScenario {
    WiretapScenario::paper(p, gamma)
}

fn cn(rng: &mut ChaCha8Rng) -> C {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let rows: Vec<Vec<C>> = (0..rows).map(|_| (0..cols).map(|_| cn(rng)).collect()).collect();
    ComplexMatrix::from_rows(&rows).unwrap()
}

fn random_scenario(m: usize, rng: &mut ChaCha8Rng) -> WiretapScenario {
    loop {
        let s = WiretapScenario {
            h_m: random_matrix(m, m, rng),
            h_e: random_matrix(m, m, rng),
            p_avg: rng.random_range(0.5..5.0),
            gamma: 1.0,
        };
        // keep conditioning moderate so tolerances measure the solver
        let ok = [&s.h_m, &s.h_e].iter().all(|h| {
            let sv = sfd_core::linalg::singular_values(h.as_matrix());
            sv[sv.len() - 1] > 0.05 * sv[0]
        });
        if ok && s.validate().is_ok() {
            return s;
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn gram_gap(a: &TransmitFilter, b: &TransmitFilter) -> f64 {
    frobenius(&(a.gram().matrix() - b.gram().matrix())) / frobenius(b.gram().matrix())
}

/// `Q(x) = erfc(x/√2)/2`.
fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64))
        .collect()
}

type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> Verdict);

// ---------------------------------------------------------------------------

fn regime1_closed_form() -> Verdict {
    let s = paper(1.0, 0.5);
    let (l1, l2) = M2::of(&s.h_m).gram().eigenvalues();
    let oracle = (1.0 / l1.sqrt() + 1.0 / l2.sqrt()).powi(2);
    let sol = design_zf_zf(&s).unwrap();
    let mut times = Vec::new();
    for _ in 0..201 {
        let t0 = Instant::now();
        std::hint::black_box(design_zf_zf(std::hint::black_box(&s)).unwrap());
        times.push(t0.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    let err = rel(sol.mse_main, oracle);
    let ok = sol.regime == Regime::SecrecyInactive && err <= 1e-6 && (oracle - 0.49383).abs() < 1e-5 && median < 1e-3;
    (
        ok,
        format!("mse_main {:.8} oracle {oracle:.8} rel {err:.1e}, median runtime {:.1} us", sol.mse_main, median * 1e6),
    )
}

fn zf_regime_boundary() -> Verdict {
    let s = paper(1.0, 0.5);
    let m = M2::of(&s.h_m).gram();
    let e = M2::of(&s.h_e).gram();
    let (l1, l2) = m.eigenvalues();
    let oracle = (1.0 / l1.sqrt() + 1.0 / l2.sqrt()) * a_trace(e.inv(), m.sqrt()) / s.p_avg;
    let thr = zf_threshold(&s).unwrap();
    let base = design_zf_zf(&s).unwrap().mse_main;
    let gammas: Vec<f64> = (0..60).map(|k| 0.1 + 3.0 * k as f64 / 59.0).collect();
    let mut flat = true;
    let mut rising = true;
    let mut prev: Option<f64> = None;
    for &g in &gammas {
        let v = design_zf_zf(&s.with_gamma(g)).unwrap().mse_main;
        if g < thr {
            flat &= rel(v, base) <= 1e-12;
        } else {
            if let Some(p) = prev {
                rising &= v > p;
            }
            prev = Some(v);
        }
    }
    let ok = (thr - 1.45679).abs() <= 1e-4 && (thr - oracle).abs() <= 1e-4 && flat && rising;
    (ok, format!("threshold {thr:.6} oracle {oracle:.6}, flat below {flat}, strictly increasing above {rising}"))
}

fn strong_duality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t0 = Instant::now();
    let (mut worst_gap, mut worst_eve) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for k in 0..100 {
        let m = if k % 2 == 0 { 2 } else { 3 };
        let base = random_scenario(m, &mut rng);
        let thr = zf_threshold(&base).unwrap();
        let s = base.with_gamma(thr * rng.random_range(1.05..3.0));
        match design_zf_zf(&s) {
            Ok(sol) => {
                let dual = dual_objective(sol.nu, &s).unwrap();
                worst_gap = worst_gap.max(rel(dual, sol.mse_main));
                worst_eve = worst_eve.max(rel(sol.mse_eve, s.gamma));
                if sol.regime != Regime::BothActive {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = failures == 0 && worst_gap <= 1e-6 && worst_eve <= 1e-6 && elapsed < 5.0;
    (
        ok,
        format!("worst duality gap {worst_gap:.1e}, worst |mse_eve-γ|/γ {worst_eve:.1e}, failures {failures}, {elapsed:.2} s"),
    )
}

fn brute_force_grid() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut missing = 0;
    for _ in 0..25 {
        let base = random_scenario(2, &mut rng);
        let thr = zf_threshold(&base).unwrap();
        let s = base.with_gamma(thr * rng.random_range(1.1..2.5));
        let sol = design_zf_zf(&s).unwrap();
        match zf_grid_oracle(M2::of(&s.h_m), M2::of(&s.h_e), s.p_avg, s.gamma, 1_000_000) {
            Some(v) => worst = worst.max(rel(sol.mse_main, v)),
            None => missing += 1,
        }
    }
    (worst <= 1e-4 && missing == 0, format!("worst relative gap to grid optimum {worst:.2e}"))
}

fn expected_regime(s: &WiretapScenario, gmax: f64) -> Regime {
    if s.gamma <= gmax {
        return Regime::SecrecyInactive;
    }
    match p_min_reg3(s) {
        Ok(p) if s.p_avg >= p => Regime::PowerInactive,
        _ => Regime::BothActive,
    }
}

/// Bisection for the `γ` at which `p_min_reg3(γ) = P`.
fn power_boundary(s: &WiretapScenario, lo: f64, hi: f64) -> f64 {
    let above = |g: f64| match p_min_reg3(&s.with_gamma(g)) {
        Ok(p) => p > s.p_avg,
        Err(Error::RegimeUndefined { .. }) => true,
        Err(e) => panic!("{e}"),
    };
    let (mut lo, mut hi) = (lo, hi);
    assert!(above(lo) && !above(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn wiener_thresholds() -> Verdict {
    let s = paper(1.0, 0.5);
    let m = M2::of(&s.h_m).gram();
    let e = M2::of(&s.h_e).gram();
    let (l1, l2) = m.eigenvalues();
    let scale = (1.0 / l1.sqrt() + 1.0 / l2.sqrt()) / s.p_avg;
    let oracle = 2.0 - a_trace(e, m.sqrt().scale(scale).add(e).inv());
    let gmax = gamma_max_reg1(&s).unwrap();

    let mut mismatches = 0;
    let mut constraint_errors = 0;
    let mut counts = [0usize; 3];
    for k in 0..500 {
        let g = 2.0 * (k as f64 + 0.5) / 500.0;
        let sg = s.with_gamma(g);
        let want = expected_regime(&sg, gmax);
        match design_zf_wiener(&sg) {
            Ok(sol) => {
                if sol.regime != want {
                    mismatches += 1;
                }
                counts[sol.regime as usize] += 1;
                let eve_ok = match sol.regime {
                    Regime::SecrecyInactive => sol.mse_eve >= g * (1.0 - 1e-9),
                    _ => rel(sol.mse_eve, g) <= 1e-6,
                };
                let power_ok = match sol.regime {
                    Regime::PowerInactive => sol.power <= s.p_avg * (1.0 + 1e-9),
                    _ => rel(sol.power, s.p_avg) <= 1e-6,
                };
                if !(eve_ok && power_ok) {
                    constraint_errors += 1;
                }
            }
            Err(_) => mismatches += 1,
        }
    }

    let eps = 1e-7;
    let lower = gram_gap(
        &regime2_solve(&s.with_gamma(gmax + eps)).unwrap().t,
        &theorem2_filter(&s.with_gamma(gmax)).unwrap(),
    );
    let g2 = power_boundary(&s, gmax + 1e-3, 1.9);
    let upper = gram_gap(
        &regime2_solve(&s.with_gamma(g2 - eps)).unwrap().t,
        &theorem3_filter(&s.with_gamma(g2 + eps)).unwrap(),
    );
    let ok = (gmax - 0.82846).abs() <= 1e-4
        && (gmax - oracle).abs() <= 1e-4
        && mismatches == 0
        && constraint_errors == 0
        && lower <= 1e-4
        && upper <= 1e-4;
    (
        ok,
        format!(
            "γmax {gmax:.6} oracle {oracle:.6}; regimes {counts:?}, tag mismatches {mismatches}, constraint errors \
             {constraint_errors}; boundary gaps {lower:.1e} at γ={gmax:.5}, {upper:.1e} at γ={g2:.5}"
        ),
    )
}

fn regime3_tightness() -> Verdict {
    let mut worst = 0.0f64;
    let mut power_ok = true;
    for p in [1.0, 2.0] {
        for g in [1.2, 1.5, 1.8] {
            let s = paper(p, g);
            assert!(s.p_avg >= p_min_reg3(&s).unwrap());
            let t = theorem3_filter(&s).unwrap();
            worst = worst.max((mse_wiener(&s.h_e, &t).unwrap() - g).abs());
            power_ok &= power_used(&t) <= p * (1.0 + 1e-12);
        }
    }
    let diag = WiretapScenario {
        h_m: ComplexMatrix::from_diagonal(&[2.0, 1.0]),
        h_e: ComplexMatrix::identity(2),
        p_avg: 1.0,
        gamma: 1.5,
    };
    let t = theorem3_filter(&diag).unwrap();
    let want = ComplexMatrix::from_diagonal(&[0.2, 0.5]);
    let gap = frobenius(&(t.gram().matrix() - want.as_matrix()));
    let diag_mse = mse_wiener(&diag.h_e, &t).unwrap();
    let p_min = p_min_reg3(&diag).unwrap();
    let ok = worst <= 1e-8 && power_ok && gap <= 1e-12 && (diag_mse - 1.5).abs() <= 1e-8 && (p_min - 0.7).abs() < 1e-12;
    (
        ok,
        format!("worst |mse_wiener-γ| {worst:.1e}, diagonal example Gram error {gap:.1e}, p_min {p_min:.12}"),
    )
}

fn mc_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t0 = Instant::now();
    let (mut zf_hits, mut w_hits) = (0, 0);
    for k in 0..100u64 {
        let m = rng.random_range(2..=3);
        let n = m + rng.random_range(0..=1);
        let h = random_matrix(n, m, &mut rng);
        let h_t = random_matrix(m, m, &mut rng);
        let power: f64 = rng.random_range(0.5..5.0);
        let norm = h_t.norm();
        let t = TransmitFilter::new(h_t.scale(power.sqrt() / norm)).unwrap();
        let s = WiretapScenario {
            h_m: h.clone(),
            h_e: h.clone(),
            p_avg: power,
            gamma: 0.5,
        };
        let zf = simulate_mse(&s, &t, ReceiverKind::ZeroForcing, Side::Main, 100_000, 1000 + k).unwrap();
        let w = simulate_mse(&s, &t, ReceiverKind::Wiener, Side::Main, 100_000, 5000 + k).unwrap();
        zf_hits += zf.covers(mse_zf(&h, &t).unwrap(), 3.0) as usize;
        w_hits += w.covers(mse_wiener(&h, &t).unwrap(), 3.0) as usize;
    }
    let elapsed = t0.elapsed().as_secs_f64();
    (
        zf_hits >= 95 && w_hits >= 95 && elapsed < 60.0,
        format!("ZF within 3σ̂ in {zf_hits}/100, Wiener in {w_hits}/100, {elapsed:.1} s"),
    )
}

fn cme_properties() -> Verdict {
    let h = ComplexMatrix::identity(1);
    let mut tanh_err = 0.0f64;
    for k in 0..=1000 {
        let y = -5.0 + 10.0 * k as f64 / 1000.0;
        let v = cme_estimate(&[c(y)], &h, Constellation::Bpsk).unwrap()[0];
        tanh_err = tanh_err.max((v - (2.0 * y).tanh()).abs());
    }

    let mut dominance = true;
    let mut gaps = Vec::new();
    let mut details = Vec::new();
    for g in [1.0, 1.4, 1.8] {
        let s = paper(1.0, g);
        let t = design_zf_wiener(&s).unwrap().t;
        for c in [Constellation::Bpsk, Constellation::Pam16] {
            let [_, _, diff] = simulate_cme_vs_wiener(&s, &t, c, 100_000, 11).unwrap();
            dominance &= diff.mean <= 3.0 * diff.std_error;
            if c == Constellation::Bpsk {
                gaps.push(-diff.mean);
                details.push(format!("{:.4}", -diff.mean));
            }
        }
    }
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    (
        tanh_err <= 1e-12 && dominance && shrinking,
        format!(
            "tanh error {tanh_err:.1e}, CME ≤ Wiener+3σ̂ {dominance}, BPSK gap over γ=1.0,1.4,1.8: {}",
            details.join(" > ")
        ),
    )
}

fn wishart_expectation() -> Verdict {
    let cases = [(vec![1.0, 1.0], 4usize), (vec![2.0, 1.0], 5)];
    let mut errs = Vec::new();
    for (k, (diag, n)) in cases.iter().enumerate() {
        let sigma = HermitianPD::from_matrix(&ComplexMatrix::from_diagonal(diag)).unwrap();
        let stats = ChannelStats::new(sigma, *n, WishartConvention::Complex).unwrap();
        let want = expected_inverse_gram(&stats).unwrap();
        let got = empirical_inverse_gram(&stats, 100_000, 20 + k as u64).unwrap();
        errs.push(frobenius(&(&got - want.matrix())) / frobenius(want.matrix()));
    }
    (
        errs.iter().all(|&e| e <= 0.02),
        format!("relative Frobenius errors {:.4} and {:.4}", errs[0], errs[1]),
    )
}

fn ber_shape() -> Verdict {
    let mut scalar_ok = true;
    let mut scalar = Vec::new();
    for p in [0.5f64, 1.0, 2.0] {
        let s = WiretapScenario {
            h_m: ComplexMatrix::identity(1),
            h_e: ComplexMatrix::from_diagonal(&[0.5]),
            p_avg: p,
            gamma: 0.1,
        };
        let t = TransmitFilter::new(ComplexMatrix::from_diagonal(&[p.sqrt()])).unwrap();
        let (main, _) = simulate_ber_bpsk(&s, &t, ReceiverKind::ZeroForcing, 200_000, 31).unwrap();
        let q = q_function((2.0 * p).sqrt());
        scalar_ok &= main.covers(q, 3.0);
        scalar.push(format!("{:.2}σ̂", (main.mean - q) / main.std_error));
    }

    let mut eve_above = true;
    let mut rises = Vec::new();
    for kind in [DesignKind::ZfZf, DesignKind::ZfWiener] {
        let mut prev: Option<(f64, sfd_core::montecarlo::McEstimate)> = None;
        for p in geomspace(0.1, 10.0, 12) {
            let s = paper(p, 0.5);
            let t = kind.design(&s).unwrap().t;
            let (main, eve) = simulate_ber_bpsk(&s, &t, kind.eve_receiver(), 1_000_000, 41).unwrap();
            eve_above &= eve.mean > main.mean;
            if let Some((q, before)) = prev {
                if main.mean > before.mean {
                    let z = (main.mean - before.mean) / before.std_error.hypot(main.std_error);
                    rises.push(format!(
                        "{kind:?} {:.1e}→{:.1e} over P {q:.2}→{p:.2} ({z:.1}σ̂)",
                        before.mean, main.mean
                    ));
                }
            }
            prev = Some((p, main));
        }
    }
    let monotone = rises.is_empty();
    (
        scalar_ok && monotone && eve_above,
        format!(
            "scalar deviations {}; BER_eve above BER_main {eve_above}; BER_main nonincreasing {monotone}{}",
            scalar.join(", "),
            if monotone { String::new() } else { format!(" ({})", rises.join(", ")) }
        ),
    )
}

fn rate_dominance() -> Verdict {
    let powers = geomspace(0.1, 10.0, 20);
    let caps: Vec<f64> = powers
        .iter()
        .map(|&p| secrecy_capacity_degraded(&paper(p, 0.5), &CapacityOptions::default()).unwrap())
        .collect();
    let mut dominated = true;
    let mut nonneg = caps.iter().all(|&v| v >= 0.0);
    let cap_monotone = caps.windows(2).all(|w| w[1] >= w[0]);
    let mut notes = Vec::new();
    for kind in [DesignKind::ZfZf, DesignKind::ZfWiener] {
        let rates: Vec<f64> = powers
            .iter()
            .map(|&p| {
                let s = paper(p, 0.5);
                achievable_secrecy_rate(&s, &kind.design(&s).unwrap().t)
            })
            .collect();
        dominated &= rates.iter().zip(&caps).all(|(r, c)| *c >= r - 1e-4);
        nonneg &= rates.iter().all(|&r| r >= 0.0);
        let drop = powers
            .windows(2)
            .zip(rates.windows(2))
            .find(|(_, r)| r[1] < r[0])
            .map(|(p, r)| format!("{kind:?} rate falls {:.4}→{:.4} over P {:.2}→{:.2}", r[0], r[1], p[0], p[1]));
        notes.push(drop.unwrap_or_else(|| format!("{kind:?} rate nondecreasing")));
    }
    let rate_monotone = notes.iter().all(|n| n.ends_with("nondecreasing"));
    (
        dominated && nonneg && cap_monotone && rate_monotone,
        format!(
            "capacity ≥ rate−1e-4 {dominated}, nonnegative {nonneg}, capacity nondecreasing {cap_monotone}; {}",
            notes.join("; ")
        ),
    )
}

fn robustness() -> Verdict {
    let s = paper(1.0, 0.5);
    let mut above = true;
    let mut reproducible = true;
    let mut margin = f64::INFINITY;
    let thresholds = [
        (DesignKind::ZfZf, zf_threshold(&s).unwrap()),
        (DesignKind::ZfWiener, gamma_max_reg1(&s).unwrap()),
    ];
    for (kind, thr) in thresholds {
        for k in 1..=4 {
            let g = 0.8 * thr * k as f64 / 4.0;
            let sg = s.with_gamma(g);
            let a = perturbed_design_experiment(&sg, kind, 0.01, 0.01, 2000, 99).unwrap();
            let b = perturbed_design_experiment(&sg, kind, 0.01, 0.01, 2000, 99).unwrap();
            above &= a.mse_eve.mean > g;
            margin = margin.min(a.mse_eve.mean - g);
            reproducible &= a.mse_eve.mean.to_bits() == b.mse_eve.mean.to_bits()
                && a.mse_main.mean.to_bits() == b.mse_main.mean.to_bits()
                && a.rejected == b.rejected;
        }
    }
    (
        above && reproducible,
        format!("averaged eve MSE above γ {above} (smallest margin {margin:.4}), bit-identical rerun {reproducible}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("regime-1 closed form", regime1_closed_form),
        ("ZF-ZF regime boundary", zf_regime_boundary),
        ("strong duality certificate", strong_duality),
        ("brute-force grid equivalence", brute_force_grid),
        ("ZF-Wiener thresholds", wiener_thresholds),
        ("regime-3 tightness", regime3_tightness),
        ("Monte Carlo vs analytic MSE", mc_agreement),
        ("CME properties", cme_properties),
        ("Wishart expectation", wishart_expectation),
        ("BER sanity and shape", ber_shape),
        ("rate dominance", rate_dominance),
        ("robustness regression", robustness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (ok, detail) = run();
        failed += !ok as usize;
        println!(
            "{} {:>2} {name}: {detail} [{:.2} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t0.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
