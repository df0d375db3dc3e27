//! Rabi-flopping thermometry: Fock-state-resolved Rabi rates on the carrier
//! and motional sidebands, flopping-curve synthesis for thermal, coherent,
//! and arbitrary Fock distributions, and least-squares extraction of nbar.
//!
//! Conventions: the ion starts in the lower internal state and
//! `P(t) = sin^2(Omega t / 2)`, so a pi-pulse lasts `pi / Omega`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAIL_TOL: f64 = 1e-9;

/// Internal-state transition driven during flopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    Carrier,
    RedSideband,
    BlueSideband,
}

impl Transition {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "carrier" => Some(Transition::Carrier),
            "red" | "rsb" => Some(Transition::RedSideband),
            "blue" | "bsb" => Some(Transition::BlueSideband),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Transition::Carrier => "carrier",
            Transition::RedSideband => "red",
            Transition::BlueSideband => "blue",
        }
    }
}

/// Generalized Laguerre polynomial `L_n^alpha(x)` by the stable three-term
/// recurrence `(k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}`.
pub fn laguerre(n: usize, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    if n == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * l - (kf + a) * lm1) / (kf + 1.0);
        lm1 = l;
        l = next;
    }
    l
}

/// Rabi rate for Fock state `n` on the given transition:
/// `Omega = Omega0 e^{-eta^2/2} eta^{|dn|} sqrt(n_<! / n_>!) L_{n_<}^{|dn|}(eta^2)`.
///
/// The red sideband from `n = 0` has no lower state and returns rate 0 by
/// convention.
pub fn fock_rabi_rate(n: usize, transition: Transition, eta: f64, omega0: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!(
            "Lamb-Dicke parameter must be in (0, 1), got {eta}"
        )));
    }
    if !(omega0 >= 0.0) {
        return Err(Error::Domain(format!("base Rabi rate must be >= 0, got {omega0}")));
    }
    let x = eta * eta;
    let debye_waller = (-x / 2.0).exp();
    let rate = match transition {
        Transition::Carrier => omega0 * debye_waller * laguerre(n, 0, x),
        Transition::BlueSideband => {
            // n -> n+1: sqrt(n!/(n+1)!) = 1/sqrt(n+1)
            omega0 * debye_waller * eta / ((n as f64 + 1.0).sqrt()) * laguerre(n, 1, x)
        }
        Transition::RedSideband => {
            if n == 0 {
                return Ok(0.0);
            }
            // n -> n-1: sqrt((n-1)!/n!) = 1/sqrt(n)
            omega0 * debye_waller * eta / (n as f64).sqrt() * laguerre(n - 1, 1, x)
        }
    };
    Ok(rate.abs())
}

/// Kind of motional state assumed for a distribution or fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    Thermal,
    Coherent,
    Arbitrary,
}

impl StateKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "thermal" => Some(StateKind::Thermal),
            "coherent" => Some(StateKind::Coherent),
            "arbitrary" => Some(StateKind::Arbitrary),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Thermal => "thermal",
            StateKind::Coherent => "coherent",
            StateKind::Arbitrary => "arbitrary",
        }
    }
}

/// Truncated Fock-state occupation distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockDistribution {
    probabilities: Vec<f64>,
    pub kind: StateKind,
    /// Probability mass dropped by the truncation at n_max.
    pub truncated_tail: f64,
}

impl FockDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn from_probabilities(p: Vec<f64>, kind: StateKind) -> Result<Self> {
        if p.is_empty() || p.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("probabilities must be nonnegative".into()));
        }
        let total: f64 = p.iter().sum();
        if !(total > 1.0 - TAIL_TOL && total <= 1.0 + TAIL_TOL) {
            return Err(Error::Domain(format!(
                "probabilities must sum to 1 within {TAIL_TOL}, got {total}"
            )));
        }
        Ok(Self {
            probabilities: p,
            kind,
            truncated_tail: (1.0 - total).max(0.0),
        })
    }

    /// Mean occupation of the truncated distribution.
    pub fn nbar(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, &p)| n as f64 * p)
            .sum()
    }
}

/// Thermal or coherent-state occupation probabilities truncated at `n_max`.
///
/// Thermal: `p_n = nbar^n / (nbar+1)^{n+1}`. Coherent: Poisson with mean
/// `nbar`. Fails if the truncated tail mass exceeds 1e-9.
pub fn make_distribution(kind: StateKind, nbar: f64, n_max: usize) -> Result<FockDistribution> {
    if !(nbar >= 0.0) {
        return Err(Error::Domain(format!("nbar must be >= 0, got {nbar}")));
    }
    let mut p = Vec::with_capacity(n_max + 1);
    match kind {
        StateKind::Thermal => {
            let r = nbar / (nbar + 1.0);
            let mut pn = 1.0 / (nbar + 1.0);
            for _ in 0..=n_max {
                p.push(pn);
                pn *= r;
            }
        }
        StateKind::Coherent => {
            let mut pn = (-nbar).exp();
            for n in 0..=n_max {
                p.push(pn);
                pn *= nbar / (n as f64 + 1.0);
            }
        }
        StateKind::Arbitrary => {
            return Err(Error::Domain(
                "arbitrary distributions are built from explicit probabilities".into(),
            ))
        }
    }
    let total: f64 = p.iter().sum();
    let tail = 1.0 - total;
    if tail > TAIL_TOL {
        return Err(Error::Truncation(format!(
            "tail mass {tail:.3e} beyond n_max = {n_max} exceeds {TAIL_TOL}; increase n_max \
             (suggest {})",
            suggested_n_max(kind, nbar)
        )));
    }
    Ok(FockDistribution {
        probabilities: p,
        kind,
        truncated_tail: tail.max(0.0),
    })
}

/// Smallest n_max keeping the truncated tail below 1e-9.
pub fn suggested_n_max(kind: StateKind, nbar: f64) -> usize {
    if nbar <= 0.0 {
        return 1;
    }
    match kind {
        StateKind::Thermal => {
            // tail = (nbar/(nbar+1))^{n+1}
            let n = (TAIL_TOL.ln() / (nbar / (nbar + 1.0)).ln()).ceil() as usize;
            n + 1
        }
        // Poisson tails drop super-exponentially past the mean.
        _ => (nbar + 12.0 * nbar.sqrt().max(1.0) + 20.0).ceil() as usize,
    }
}

/// A synthesized flopping curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloppingCurve {
    pub times: Vec<f64>,
    /// Probability of having left the initial internal state.
    pub populations: Vec<f64>,
    pub transition: Transition,
    pub lamb_dicke: f64,
    pub base_rate: f64,
}

/// `P(t) = sum_n p_n sin^2(Omega_n t / 2)` over the distribution.
pub fn flopping_curve(
    dist: &FockDistribution,
    times: &[f64],
    transition: Transition,
    eta: f64,
    omega0: f64,
) -> Result<FloppingCurve> {
    let rates: Vec<f64> = (0..dist.probabilities().len())
        .map(|n| fock_rabi_rate(n, transition, eta, omega0))
        .collect::<Result<_>>()?;
    let populations = times
        .iter()
        .map(|&t| {
            dist.probabilities()
                .iter()
                .zip(&rates)
                .map(|(&p, &w)| {
                    let s = (0.5 * w * t).sin();
                    p * s * s
                })
                .sum()
        })
        .collect();
    Ok(FloppingCurve {
        times: times.to_vec(),
        populations,
        transition,
        lamb_dicke: eta,
        base_rate: omega0,
    })
}

/// Result of an nbar fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbarFit {
    pub nbar: f64,
    /// Root-mean-square residual of the fitted curve.
    pub residual_rms: f64,
    pub assumption: StateKind,
    /// Set when the arbitrary-state fit stalls without meeting its
    /// convergence target.
    pub ill_conditioned: bool,
    /// Fitted populations for the arbitrary assumption.
    pub populations: Option<Vec<f64>>,
}

const ARBITRARY_N_MAX: usize = 30;
const FIT_NBAR_MAX: f64 = 200.0;

/// Least-squares fit of `nbar` to sampled flopping data under the given
/// state assumption.
///
/// Thermal/coherent: deterministic coarse scan plus golden-section polish
/// over nbar. Arbitrary: projected least squares over the population vector
/// on the probability simplex (n_max = 30), with `nbar = sum n p_n`.
pub fn fit_nbar(
    samples: &[(f64, f64)],
    assumption: StateKind,
    transition: Transition,
    eta: f64,
    omega0: f64,
) -> Result<NbarFit> {
    if samples.len() < 20 {
        return Err(Error::Domain(format!(
            "need at least 20 samples, got {}",
            samples.len()
        )));
    }
    let t_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_max = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let w_ref = match transition {
        Transition::RedSideband => fock_rabi_rate(1, transition, eta, omega0)?,
        _ => fock_rabi_rate(0, transition, eta, omega0)?,
    };
    if w_ref <= 0.0 || (t_max - t_min) * w_ref < 2.0 * std::f64::consts::TAU {
        return Err(Error::Domain(
            "samples must span at least two flopping periods".into(),
        ));
    }
    match assumption {
        StateKind::Arbitrary => fit_arbitrary(samples, transition, eta, omega0),
        kind => fit_parametric(samples, kind, transition, eta, omega0),
    }
}

fn model_sse(
    samples: &[(f64, f64)],
    kind: StateKind,
    nbar: f64,
    transition: Transition,
    eta: f64,
    omega0: f64,
) -> Result<f64> {
    let dist = make_distribution(kind, nbar, suggested_n_max(kind, nbar))?;
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let curve = flopping_curve(&dist, &times, transition, eta, omega0)?;
    Ok(samples
        .iter()
        .zip(&curve.populations)
        .map(|((_, y), &m)| (y - m) * (y - m))
        .sum())
}

fn fit_parametric(
    samples: &[(f64, f64)],
    kind: StateKind,
    transition: Transition,
    eta: f64,
    omega0: f64,
) -> Result<NbarFit> {
    // Coarse scan: dense near zero where curves change fastest.
    let mut grid = vec![0.0];
    let n_grid = 240;
    for i in 0..=n_grid {
        let x = i as f64 / n_grid as f64;
        grid.push(0.01 * (FIT_NBAR_MAX / 0.01f64).powf(x));
    }
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let mut sses = Vec::with_capacity(grid.len());
    for (i, &nb) in grid.iter().enumerate() {
        let sse = model_sse(samples, kind, nb, transition, eta, omega0)?;
        sses.push(sse);
        if sse < best {
            best = sse;
            best_i = i;
        }
    }
    // Golden-section polish in the bracketing interval.
    let mut lo = grid[best_i.saturating_sub(1)];
    let mut hi = grid[(best_i + 1).min(grid.len() - 1)];
    if hi <= lo {
        hi = lo + 1e-6;
    }
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = model_sse(samples, kind, x1, transition, eta, omega0)?;
    let mut f2 = model_sse(samples, kind, x2, transition, eta, omega0)?;
    for _ in 0..90 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = model_sse(samples, kind, x1, transition, eta, omega0)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = model_sse(samples, kind, x2, transition, eta, omega0)?;
        }
    }
    let (nbar, sse) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(NbarFit {
        nbar,
        residual_rms: (sse / samples.len() as f64).sqrt(),
        assumption: kind,
        ill_conditioned: false,
        populations: None,
    })
}

fn fit_arbitrary(
    samples: &[(f64, f64)],
    transition: Transition,
    eta: f64,
    omega0: f64,
) -> Result<NbarFit> {
    let n_states = ARBITRARY_N_MAX + 1;
    let rates: Vec<f64> = (0..n_states)
        .map(|n| fock_rabi_rate(n, transition, eta, omega0))
        .collect::<Result<_>>()?;
    // Design matrix: a[t][n] = sin^2(Omega_n t / 2); the model is linear in p.
    let a: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(t, _)| {
            rates
                .iter()
                .map(|&w| {
                    let s = (0.5 * w * t).sin();
                    s * s
                })
                .collect()
        })
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1).collect();

    // Lipschitz constant of the gradient via power iteration on A^T A.
    let mut v = vec![1.0 / (n_states as f64).sqrt(); n_states];
    let mut lip = 1.0;
    for _ in 0..100 {
        let av: Vec<f64> = a.iter().map(|row| dot(row, &v)).collect();
        let mut atav = vec![0.0; n_states];
        for (row, &avi) in a.iter().zip(&av) {
            for (j, &r) in row.iter().enumerate() {
                atav[j] += r * avi;
            }
        }
        lip = dot(&atav, &atav).sqrt().max(1e-30);
        let norm = dot(&atav, &atav).sqrt().max(1e-30);
        for (vi, &ai) in v.iter_mut().zip(&atav) {
            *vi = ai / norm;
        }
    }

    // Projected gradient descent on the simplex.
    let mut p = vec![1.0 / n_states as f64; n_states];
    let step = 1.0 / lip;
    let max_iter = 20_000;
    let mut converged = false;
    let mut prev_sse = f64::INFINITY;
    for it in 0..max_iter {
        let resid: Vec<f64> = a.iter().zip(&y).map(|(row, &yi)| dot(row, &p) - yi).collect();
        let sse = dot(&resid, &resid);
        let mut grad = vec![0.0; n_states];
        for (row, &ri) in a.iter().zip(&resid) {
            for (j, &r) in row.iter().enumerate() {
                grad[j] += 2.0 * r * ri;
            }
        }
        for (pi, &gi) in p.iter_mut().zip(&grad) {
            *pi -= step * gi;
        }
        project_simplex(&mut p);
        if it % 50 == 0 {
            if (prev_sse - sse).abs() <= 1e-14 * sse.max(1e-14) {
                converged = true;
                break;
            }
            prev_sse = sse;
        }
    }
    let resid: Vec<f64> = a.iter().zip(&y).map(|(row, &yi)| dot(row, &p) - yi).collect();
    let sse = dot(&resid, &resid);
    let dist = FockDistribution::from_probabilities(p.clone(), StateKind::Arbitrary)?;
    Ok(NbarFit {
        nbar: dist.nbar(),
        residual_rms: (sse / samples.len() as f64).sqrt(),
        assumption: StateKind::Arbitrary,
        ill_conditioned: !converged,
        populations: Some(p),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(p: &mut [f64]) {
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (i as f64 + 1.0);
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    for x in p.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}
