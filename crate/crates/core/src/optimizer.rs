//! Gradient descent on the LQG cost with an Armijo backtracking line search,
//! over either all controller entries or the coefficients of the
//! controllable canonical form, plus initialization strategies and a
//! certificate for the terminal point.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::Serialize;

use crate::cost::{cost_difference, gradient_from, lqg_cost, CostEval, GradientTriple};
use crate::error::{Error, Result};
use crate::io::ControllerFile;
use crate::linalg::{self, ctrb, inverse, Mat, TimeDomain};
use crate::model::{canonical_form, companion, is_stabilizing, Controller, Direction, Plant};
use crate::synthesis::{analyze_stationary, riccati_controller, StationaryVerdict};

/// Which controller parameters descent moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parameterization {
    /// Every entry of `(A_K, B_K, C_K)`.
    Full,
    /// The `2q` coefficients of the controllable canonical form (SISO only).
    Canonical,
}

/// Line-search and stopping parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Sufficient-decrease fraction of the Armijo rule.
    pub alpha: f64,
    /// Backtracking factor.
    pub beta: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub parameterization: Parameterization,
    /// Seed recorded with the run; descent itself is deterministic.
    pub seed: u64,
    /// Keep a controller snapshot every this many iterations (0 disables).
    pub snapshot_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            alpha: 0.01,
            beta: 0.5,
            grad_tol: 1e-6,
            max_iters: 10_000,
            parameterization: Parameterization::Full,
            seed: 0,
            snapshot_every: 100,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Invalid(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        Ok(())
    }
}

/// Smallest trial step before the line search gives up.
pub const MIN_STEP: f64 = 1e-16;

/// State of the run after iteration `iter`; `step` is the accepted step
/// size (0 for the initial record).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub grad_norm: f64,
    pub step: f64,
}

/// Why descent stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Terminal {
    GradTolReached,
    MaxIters,
    /// No trial step down to [`MIN_STEP`] satisfied the Armijo rule.
    Stalled,
    /// The cost or gradient could not be evaluated at an accepted iterate.
    LeftFeasibleSet,
}

/// Full record of a descent run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub config: OptimizerConfig,
    pub records: Vec<IterRecord>,
    pub snapshots: Vec<(usize, Controller)>,
    pub terminal: Terminal,
    pub final_controller: Controller,
}

#[derive(Serialize)]
struct TraceDoc<'a> {
    config: &'a OptimizerConfig,
    terminal: Terminal,
    records: &'a [IterRecord],
    snapshots: Vec<SnapshotDoc>,
    final_controller: ControllerFile,
}

#[derive(Serialize)]
struct SnapshotDoc {
    iter: usize,
    controller: ControllerFile,
}

impl Trace {
    /// CSV with header `iter,J,grad_norm,step`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,J,grad_norm,step\n");
        for r in &self.records {
            out.push_str(&format!("{},{:e},{:e},{:e}\n", r.iter, r.j, r.grad_norm, r.step));
        }
        out
    }

    /// JSON with the configuration, records and controller snapshots.
    pub fn to_json(&self) -> String {
        let doc = TraceDoc {
            config: &self.config,
            terminal: self.terminal,
            records: &self.records,
            snapshots: self
                .snapshots
                .iter()
                .map(|(iter, k)| SnapshotDoc { iter: *iter, controller: ControllerFile::from_controller(k) })
                .collect(),
            final_controller: ControllerFile::from_controller(&self.final_controller),
        };
        serde_json::to_string_pretty(&doc).expect("trace documents always serialize")
    }

    pub fn final_record(&self) -> &IterRecord {
        self.records.last().expect("a trace always holds the initial record")
    }
}

/// Point of the search space with its cost and search direction.
struct Iterate {
    k: Controller,
    ev: CostEval,
    /// Cost tracked by accumulating accurate differences from the start.
    j: f64,
    /// Gradient with respect to the moved parameters.
    grad: Vec<f64>,
}

impl Iterate {
    fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Canonical coefficients `(b_0..b_{q-1}, a_0..a_{q-1})` of a canonical controller.
fn canonical_params(k: &Controller) -> Vec<f64> {
    let q = k.order();
    let mut theta: Vec<f64> = (0..q).map(|i| -k.a()[(q - 1, i)]).collect();
    theta.extend((0..q).map(|i| k.c()[(0, i)]));
    theta
}

fn canonical_controller(theta: &[f64]) -> Result<Controller> {
    let q = theta.len() / 2;
    let (a, b) = companion(&theta[..q]);
    Controller::new(a, b, Mat::from_row_slice(1, q, &theta[q..]))
}

fn restrict_gradient(param: Parameterization, g: &GradientTriple) -> Vec<f64> {
    match param {
        Parameterization::Full => g.to_direction().to_vector().iter().copied().collect(),
        Parameterization::Canonical => {
            let q = g.ga.nrows();
            let mut out: Vec<f64> = (0..q).map(|i| -g.ga[(q - 1, i)]).collect();
            out.extend((0..q).map(|i| g.gc[(0, i)]));
            out
        }
    }
}

fn evaluate(plant: &Plant, k: Controller, ev: CostEval, j: f64, param: Parameterization) -> Result<Iterate> {
    let g = gradient_from(plant, &k, &ev);
    if !j.is_finite() || !g.norm.is_finite() {
        return Err(Error::IllConditioned("non-finite cost or gradient".into()));
    }
    Ok(Iterate { grad: restrict_gradient(param, &g), j, ev, k })
}

fn trial_point(cur: &Iterate, s: f64, param: Parameterization) -> Result<Controller> {
    let k = &cur.k;
    match param {
        Parameterization::Full => {
            let dir = Direction::from_vector(&cur.grad, k.order(), k.outputs(), k.inputs())?;
            k.step(&dir, -s)
        }
        Parameterization::Canonical => {
            let theta: Vec<f64> = canonical_params(k).iter().zip(&cur.grad).map(|(t, g)| t - s * g).collect();
            canonical_controller(&theta)
        }
    }
}

/// Runs gradient descent from `k0`.
///
/// Every iteration starts the line search at step 1 and shrinks it by
/// `beta` until `J(K) - J(K') >= alpha s |grad|^2`; trial points that are
/// not stabilizing count as rejections, so every recorded iterate is
/// stabilizing and the cost never increases. The decrease is evaluated by
/// [`cost_difference`] and the recorded cost is the initial cost plus the
/// accepted decreases, which stays accurate after the decreases drop below
/// the rounding error of `J` itself. In canonical mode `k0` is
/// first brought to controllable canonical form (same cost) and only its
/// coefficients move.
pub fn descend(plant: &Plant, k0: &Controller, config: &OptimizerConfig) -> Result<Trace> {
    config.validate()?;
    let rep = is_stabilizing(plant, k0)?;
    if !rep.stable {
        return Err(Error::NotStabilizing { margin: rep.margin });
    }
    let param = config.parameterization;
    let start = match param {
        Parameterization::Full => k0.clone(),
        Parameterization::Canonical => {
            if !k0.is_strictly_proper() {
                return Err(Error::NotStrictlyProper);
            }
            canonical_form(k0)?.0
        }
    };
    let ev0 = lqg_cost(plant, &start)?;
    let j0 = ev0.j;
    let mut cur = evaluate(plant, start, ev0, j0, param)?;
    let mut records = vec![IterRecord { iter: 0, j: cur.j, grad_norm: cur.grad_norm(), step: 0.0 }];
    let mut snapshots = vec![(0, cur.k.clone())];
    let mut terminal = Terminal::MaxIters;
    for iter in 1..=config.max_iters {
        let gn = cur.grad_norm();
        if gn <= config.grad_tol {
            terminal = Terminal::GradTolReached;
            break;
        }
        let mut s = 1.0;
        let accepted = loop {
            if s < MIN_STEP {
                break None;
            }
            let candidate = trial_point(&cur, s, param)
                .ok()
                .filter(|k| is_stabilizing(plant, k).map(|r| r.stable).unwrap_or(false))
                .and_then(|k| cost_difference(plant, &cur.k, &cur.ev, &k).ok().map(|(ev, dj)| (k, ev, dj)));
            if let Some((k, ev, dj)) = candidate {
                if dj.is_finite() && -dj >= config.alpha * s * gn * gn {
                    break Some((k, ev, dj));
                }
            }
            s *= config.beta;
        };
        let Some((k, ev, dj)) = accepted else {
            terminal = Terminal::Stalled;
            break;
        };
        let j = cur.j + dj;
        cur = match evaluate(plant, k, ev, j, param) {
            Ok(next) => next,
            Err(_) => {
                terminal = Terminal::LeftFeasibleSet;
                break;
            }
        };
        records.push(IterRecord { iter, j: cur.j, grad_norm: cur.grad_norm(), step: s });
        if config.snapshot_every > 0 && iter % config.snapshot_every == 0 {
            snapshots.push((iter, cur.k.clone()));
        }
    }
    if terminal == Terminal::MaxIters && cur.grad_norm() <= config.grad_tol {
        terminal = Terminal::GradTolReached;
    }
    let last_iter = records.last().map_or(0, |r| r.iter);
    if snapshots.last().map(|(i, _)| *i) != Some(last_iter) {
        snapshots.push((last_iter, cur.k.clone()));
    }
    Ok(Trace { config: config.clone(), records, snapshots, terminal, final_controller: cur.k })
}

/// Coefficients `[c_0, ..., c_{n-1}]` of the monic polynomial with the given
/// real roots, `s^n + c_{n-1} s^{n-1} + ... + c_0`.
fn monic_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c.truncate(roots.len());
    c
}

/// Row gain `k` with `eig(A - b k) = poles` by Ackermann's formula.
fn ackermann(a: &Mat, b: &Mat, poles: &[f64]) -> Result<Mat> {
    let n = a.nrows();
    let wc = ctrb(a, b)?;
    if linalg::rcond(&wc) < 1e-12 {
        return Err(Error::PlacementFailed("controllability matrix is singular".into()));
    }
    let coeffs = monic_from_roots(poles);
    let mut phi = Mat::zeros(n, n);
    let mut power = Mat::identity(n, n);
    for c in &coeffs {
        phi += &power * *c;
        power = &power * a;
    }
    phi += power;
    let mut last = Mat::zeros(1, n);
    last[(0, n - 1)] = 1.0;
    Ok(last * inverse(&wc)? * phi)
}

fn placed_close(m: &Mat, poles: &[f64]) -> bool {
    let Ok(eig) = linalg::eigenvalues(m) else { return false };
    let mut want: Vec<f64> = poles.to_vec();
    want.sort_by(f64::total_cmp);
    let mut got: Vec<f64> = eig.iter().map(|z| z.re).collect();
    got.sort_by(f64::total_cmp);
    let scale = 1.0 + m.norm();
    eig.iter().all(|z| z.im.abs() <= 1e-6 * scale) && got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 1e-6 * scale)
}

/// Observer-based controller `A_K = A - BK - LC`, `B_K = L`, `C_K = -K` with
/// `eig(A - BK) = ctrl_poles` and `eig(A - LC) = obs_poles` (real poles).
///
/// Multi-input or multi-output plants are reduced to single channels with
/// the projection vectors `u` (inputs) and `v` (outputs):
/// `K = u k`, `L = l v^T`.
pub fn place_observer_controller(plant: &Plant, ctrl_poles: &[f64], obs_poles: &[f64], u: &Mat, v: &Mat) -> Result<Controller> {
    let n = plant.n();
    if ctrl_poles.len() != n || obs_poles.len() != n {
        return Err(Error::DimensionMismatch(format!("need {n} controller and {n} observer poles")));
    }
    if u.shape() != (plant.m(), 1) || v.shape() != (plant.p(), 1) {
        return Err(Error::DimensionMismatch("projection vectors must be m x 1 and p x 1".into()));
    }
    let (a, b, c) = (plant.a(), plant.b(), plant.c());
    let k = u * ackermann(a, &(b * u), ctrl_poles)?;
    let l = ackermann(&a.transpose(), &(c.transpose() * v), obs_poles)?.transpose() * v.transpose();
    if !placed_close(&(a - b * &k), ctrl_poles) || !placed_close(&(a - &l * c), obs_poles) {
        return Err(Error::PlacementFailed("placed poles are inaccurate".into()));
    }
    let controller = Controller::new(a - b * &k - &l * c, l, -k)?;
    if !is_stabilizing(plant, &controller)?.stable {
        return Err(Error::PlacementFailed("placed controller is not stabilizing".into()));
    }
    Ok(controller)
}

/// Attempts made by [`init_pole_placement`] before giving up.
pub const PLACEMENT_ATTEMPTS: usize = 20;

/// Observer-based controller with all `2n` closed-loop poles drawn uniformly
/// from `interval` (continuous: e.g. `(-2, -1)`; discrete: inside the unit
/// disk, e.g. `(0, 0.9)`).
pub fn init_pole_placement<R: Rng>(plant: &Plant, interval: (f64, f64), rng: &mut R) -> Result<Controller> {
    let (lo, hi) = interval;
    let valid = match plant.domain() {
        TimeDomain::Continuous => lo < hi && hi < 0.0,
        TimeDomain::Discrete => lo < hi && lo > -1.0 && hi < 1.0,
    };
    if !valid {
        return Err(Error::Invalid(format!("pole interval ({lo}, {hi}) is not inside the stability region")));
    }
    let n = plant.n();
    let dist = Uniform::new(lo, hi).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut last = String::new();
    for _ in 0..PLACEMENT_ATTEMPTS {
        let ctrl: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
        let obs: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
        let (u, v) = if plant.m() == 1 && plant.p() == 1 {
            (Mat::from_element(1, 1, 1.0), Mat::from_element(1, 1, 1.0))
        } else {
            let mut gauss = |r: usize| Mat::from_fn(r, 1, |_, _| StandardNormal.sample(rng));
            (gauss(plant.m()), gauss(plant.p()))
        };
        match place_observer_controller(plant, &ctrl, &obs, &u, &v) {
            Ok(k) => return Ok(k),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::PlacementFailed(format!("{PLACEMENT_ATTEMPTS} attempts failed, last: {last}")))
}

/// Attempts made by [`init_near_optimal`] before giving up.
pub const NEAR_OPTIMAL_ATTEMPTS: usize = 100;

/// Riccati optimum with every entry of `(A_K, B_K, C_K)` perturbed by an
/// independent Gaussian of variance `delta`, resampled until stabilizing.
pub fn init_near_optimal<R: Rng>(plant: &Plant, delta: f64, rng: &mut R) -> Result<Controller> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Invalid(format!("delta must be non-negative, got {delta}")));
    }
    let opt = riccati_controller(plant)?.controller;
    if delta == 0.0 {
        return Ok(opt);
    }
    let sd = delta.sqrt();
    let (q, m, p) = (opt.order(), opt.outputs(), opt.inputs());
    for _ in 0..NEAR_OPTIMAL_ATTEMPTS {
        let mut noise = |r: usize, c: usize| Mat::from_fn(r, c, |_, _| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng));
        let dir = Direction { da: noise(q, q), db: noise(q, p), dc: noise(m, q) };
        let k = opt.step(&dir, 1.0)?;
        if is_stabilizing(plant, &k)?.stable {
            return Ok(k);
        }
    }
    Err(Error::RetriesExhausted { attempts: NEAR_OPTIMAL_ATTEMPTS })
}

/// Relative singular-value threshold below which [`certify_limit`] treats
/// a controllability or observability matrix as rank deficient.
pub const LIMIT_RANK_TOL: f64 = 1e-3;

/// Classification of a terminal iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitVerdict {
    GlobalOptimum,
    NonMinimalLimit,
    NotConverged,
}

/// Verdict with the numbers it rests on.
#[derive(Debug, Clone, Serialize)]
pub struct LimitCertificate {
    pub verdict: LimitVerdict,
    pub j: Option<f64>,
    pub grad_norm: Option<f64>,
    /// Relative smallest singular values `(σ_c, σ_o)` of the controllability
    /// and observability matrices.
    pub sigma: Option<(f64, f64)>,
    pub stationary: Option<StationaryVerdict>,
    pub note: String,
}

/// Decides whether a terminal controller is a certified global optimum.
///
/// A stabilizing full-order controller with gradient norm at most `tol`
/// whose controllability and observability matrices have relative smallest
/// singular values above [`LIMIT_RANK_TOL`] is minimal and stationary, hence
/// globally optimal; the Riccati recovery of the stationarity analysis must
/// agree. A stationary point that fails the rank test is `NonMinimalLimit`.
/// Never errors: evaluation failures give `NotConverged` with a note.
pub fn certify_limit(plant: &Plant, k: &Controller, tol: f64) -> LimitCertificate {
    let mut cert = LimitCertificate {
        verdict: LimitVerdict::NotConverged,
        j: None,
        grad_norm: None,
        sigma: None,
        stationary: None,
        note: String::new(),
    };
    let ev = match lqg_cost(plant, k) {
        Ok(ev) => ev,
        Err(e) => {
            cert.note = format!("cost not available: {e}");
            return cert;
        }
    };
    let g = gradient_from(plant, k, &ev);
    cert.j = Some(ev.j);
    cert.grad_norm = Some(g.norm);
    let minimal = match k.minimality(LIMIT_RANK_TOL) {
        Ok(rep) => {
            cert.sigma = Some(rep.min_singular_values);
            rep.minimal
        }
        Err(e) => {
            cert.note = format!("minimality test failed: {e}");
            return cert;
        }
    };
    if g.norm > tol {
        cert.note = format!("gradient norm {:.3e} exceeds {tol:.3e}", g.norm);
        return cert;
    }
    if !minimal {
        cert.verdict = LimitVerdict::NonMinimalLimit;
        cert.note = "stationary but not minimal: global optimality is not certified".into();
        return cert;
    }
    if k.order() != plant.n() {
        cert.note = "minimal stationary point of reduced order: no certificate applies".into();
        return cert;
    }
    match analyze_stationary(plant, k, tol) {
        Ok(rep) => {
            cert.stationary = Some(rep.verdict);
            if rep.verdict == StationaryVerdict::GlobalOptimum {
                cert.verdict = LimitVerdict::GlobalOptimum;
                cert.note = "minimal stationary point; Riccati recovery agrees".into();
            } else {
                cert.note = format!("stationarity analysis returned {:?}", rep.verdict);
            }
        }
        Err(e) => cert.note = format!("stationarity analysis failed: {e}"),
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Mat {
        Mat::from_element(1, 1, x)
    }

    #[test]
    fn scalar_pole_placement() {
        let plant = Plant::new(s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), TimeDomain::Continuous).unwrap();
        let k = place_observer_controller(&plant, &[-1.5], &[-1.5], &s(1.0), &s(1.0)).unwrap();
        assert!((k.a()[(0, 0)] + 4.0).abs() < 1e-12);
        assert!((k.b()[(0, 0)] - 2.5).abs() < 1e-12);
        assert!((k.c()[(0, 0)] + 2.5).abs() < 1e-12);
    }

    #[test]
    fn monic_coefficients() {
        assert_eq!(monic_from_roots(&[-1.0, -2.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = OptimizerConfig { beta: 1.0, ..OptimizerConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
