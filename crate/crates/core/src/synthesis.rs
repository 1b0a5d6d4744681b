//! Riccati-based optimal controllers and the analysis of stationary points:
//! global-optimality certificates for minimal stationary points, stationary
//! points built by padding, and the Hessian classification of the zero
//! controller padded with stable dynamics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::cost::{gradient_from, lqg_cost};
use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, inverse, riccati_gain, riccati_residual, solve_care, Mat, TimeDomain, RANK_TOL};
use crate::model::{is_stabilizing, Controller, Plant};

/// Optimal output-feedback controller assembled from the two Riccati
/// equations, with the intermediate quantities.
#[derive(Debug, Clone)]
pub struct OptimalController {
    pub controller: Controller,
    /// Optimal cost.
    pub j: f64,
    /// Filter Riccati solution.
    pub p: Mat,
    /// Control Riccati solution.
    pub s: Mat,
    /// State-feedback gain `K`.
    pub k_gain: Mat,
    /// Estimator gain `L`.
    pub l_gain: Mat,
}

/// Filter Riccati solution `P` and estimator gain `L` by duality with the
/// control equation.
///
/// Continuous: `L = P C^T V^{-1}`; discrete: `L = A P C^T (C P C^T + V)^{-1}`.
pub fn filter_riccati(plant: &Plant) -> Result<(Mat, Mat)> {
    let dual = solve_care(
        &plant.a().transpose(),
        &plant.c().transpose(),
        plant.v(),
        plant.w(),
        plant.domain(),
    )
    .map_err(|e| match e {
        Error::NotStabilizable => Error::AssumptionViolated("(C, A) is not detectable".into()),
        other => other,
    })?;
    Ok((dual.s, dual.k.transpose()))
}

/// Globally optimal full-order controller `A_K = A - BK - LC`, `B_K = L`,
/// `C_K = -K`.
pub fn riccati_controller(plant: &Plant) -> Result<OptimalController> {
    let flags = plant.assumptions();
    if !flags.all() {
        return Err(Error::AssumptionViolated(format!(
            "(A,B) controllable: {}, (A,W^1/2) controllable: {}, (C,A) observable: {}, (Q^1/2,A) observable: {}",
            flags.ab_controllable, flags.aw_controllable, flags.ca_observable, flags.qa_observable
        )));
    }
    let ctrl = solve_care(plant.a(), plant.b(), plant.r(), plant.q(), plant.domain())?;
    let (p, l) = filter_riccati(plant)?;
    let a_k = plant.a() - plant.b() * &ctrl.k - &l * plant.c();
    let controller = Controller::new(a_k, l.clone(), -&ctrl.k)?;
    let j = lqg_cost(plant, &controller)?.j;
    Ok(OptimalController { controller, j, p, s: ctrl.s, k_gain: ctrl.k, l_gain: l })
}

/// Classification of a stabilizing full-order controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StationaryVerdict {
    GlobalOptimum,
    NonMinimalStationary,
    NotStationary,
    Inconclusive,
}

/// Quantities recovered from the Lyapunov blocks at a minimal stationary point.
#[derive(Debug, Clone, Serialize)]
pub struct Recovered {
    /// `T = Y22^{-1} Y12^T`. The stationary point equals
    /// `(T (A - BK - LC) T^{-1}, -T L, K T^{-1})`, so the similarity by
    /// `-T^{-1}` maps it onto the Riccati controller.
    #[serde(serialize_with = "crate::io::serialize_rows")]
    pub t: Mat,
    /// `P = X11 - X12 X22^{-1} X12^T`.
    #[serde(serialize_with = "crate::io::serialize_rows")]
    pub p: Mat,
    /// `S = Y11 - Y12 Y22^{-1} Y12^T`.
    #[serde(serialize_with = "crate::io::serialize_rows")]
    pub s: Mat,
    /// Relative residuals of the filter and control Riccati equations.
    pub riccati_residuals: (f64, f64),
    /// Whether `A - BK` and `A - LC` are stable for the gains built from `S`, `P`.
    pub gains_stabilizing: bool,
}

/// Outcome of [`analyze_stationary`].
#[derive(Debug, Clone, Serialize)]
pub struct StationaryReport {
    pub grad_norm: f64,
    pub j: f64,
    pub minimal: bool,
    pub recovered: Option<Recovered>,
    pub verdict: StationaryVerdict,
}

/// Relative Riccati residual accepted by the global-optimality certificate,
/// as a multiple of the stationarity tolerance.
const CERTIFICATE_FACTOR: f64 = 100.0;

/// Classifies a stabilizing full-order controller.
///
/// Non-stationary points are reported as such. At a stationary point that is
/// minimal, the Schur complements of the Lyapunov solutions must solve the
/// two Riccati equations; the point is certified globally optimal when their
/// residuals are within `max(1e-8, 100 tol)` and the corresponding gains
/// stabilize. Nearly singular `X22` or `Y22` blocks give `Inconclusive`.
pub fn analyze_stationary(plant: &Plant, k: &Controller, tol: f64) -> Result<StationaryReport> {
    if k.order() != plant.n() {
        return Err(Error::Invalid(format!(
            "stationarity analysis needs a full-order controller (q = {}, n = {})",
            k.order(),
            plant.n()
        )));
    }
    let ev = lqg_cost(plant, k)?;
    let grad = gradient_from(plant, k, &ev);
    let minimal = k.minimality(RANK_TOL)?.minimal;
    let mut report = StationaryReport {
        grad_norm: grad.norm,
        j: ev.j,
        minimal,
        recovered: None,
        verdict: StationaryVerdict::NotStationary,
    };
    if grad.norm > tol {
        return Ok(report);
    }
    if !minimal {
        report.verdict = StationaryVerdict::NonMinimalStationary;
        return Ok(report);
    }
    let (x11, x12, x22) = (ev.x11(), ev.x12(), ev.x22());
    let (y11, y12, y22) = (ev.y11(), ev.y12(), ev.y22());
    if linalg::rcond(&x22) < 1e-12 || linalg::rcond(&y22) < 1e-12 {
        report.verdict = StationaryVerdict::Inconclusive;
        return Ok(report);
    }
    let x22i = inverse(&x22)?;
    let y22i = inverse(&y22)?;
    let t = &y22i * y12.transpose();
    let p = linalg::symmetrize(&(&x11 - &x12 * &x22i * x12.transpose()));
    let s = linalg::symmetrize(&(&y11 - &y12 * &y22i * y12.transpose()));
    let dom = plant.domain();
    let (a, b, c) = (plant.a(), plant.b(), plant.c());
    let r_p = riccati_residual(&a.transpose(), &c.transpose(), plant.v(), plant.w(), &p, dom)?.norm() / (1.0 + p.norm());
    let r_s = riccati_residual(a, b, plant.r(), plant.q(), &s, dom)?.norm() / (1.0 + s.norm());
    let k_gain = riccati_gain(a, b, plant.r(), &s, dom)?;
    let l_gain = riccati_gain(&a.transpose(), &c.transpose(), plant.v(), &p, dom)?.transpose();
    let gains_stabilizing = linalg::stability(&(a - b * &k_gain), dom)?.stable
        && linalg::stability(&(a - &l_gain * c), dom)?.stable;
    let limit = (CERTIFICATE_FACTOR * tol).max(1e-8);
    report.verdict = if r_p <= limit && r_s <= limit && gains_stabilizing {
        StationaryVerdict::GlobalOptimum
    } else {
        StationaryVerdict::Inconclusive
    };
    report.recovered = Some(Recovered { t, p, s, riccati_residuals: (r_p, r_s), gains_stabilizing });
    Ok(report)
}

/// Pads a stationary controller with decoupled stable dynamics `Λ`:
/// `A = diag(A_K, Λ)`, `B = [B_K; 0]`, `C = [C_K, 0]`.
///
/// The padded states are neither driven nor observed, so the cost is
/// unchanged and the result is again stationary, now in dimension `q + q'`.
pub fn augment_stationary(plant: &Plant, k_star: &Controller, lambda: &Mat, tol: f64) -> Result<Controller> {
    let grad = gradient_from(plant, k_star, &lqg_cost(plant, k_star)?);
    if grad.norm > tol {
        return Err(Error::NotStationary { grad_norm: grad.norm });
    }
    if lambda.nrows() != lambda.ncols() {
        return Err(Error::NonSquare { rows: lambda.nrows(), cols: lambda.ncols() });
    }
    if !linalg::stability(lambda, plant.domain())?.stable {
        return Err(Error::UnstablePadding);
    }
    pad(k_star, lambda)
}

/// Block-embeds `Λ` below `A_K` without any coupling (no stationarity check).
pub fn pad(k: &Controller, lambda: &Mat) -> Result<Controller> {
    let extra = lambda.nrows();
    let a = block_diag(k.a(), lambda);
    let b = linalg::block2(k.b(), &Mat::zeros(k.order(), 0), &Mat::zeros(extra, k.inputs()), &Mat::zeros(extra, 0))?;
    let c = linalg::block2(k.c(), &Mat::zeros(k.outputs(), extra), &Mat::zeros(0, k.order()), &Mat::zeros(0, extra))?;
    Controller::proper(a, b, c, k.d().clone())
}

/// Hessian type of the padded zero controller `diag(0, Λ)` on a stable plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SaddleClass {
    /// The Hessian has eigenvalues of both signs (strict saddle).
    Indefinite,
    /// The Hessian vanishes identically.
    ZeroHessian,
}

/// Verdict and the evaluations of `G(s) = C X_op (sI - A^T)^{-1} Y_op B`.
#[derive(Debug, Clone)]
pub struct SaddleReport {
    pub classification: SaddleClass,
    /// `(s, G(s))` for each eigenvalue `s` of `-Λ`.
    pub g_values: Vec<(Complex64, DMatrix<Complex64>)>,
}

/// Open-loop Gramians `A X + X A^T + W = 0` and `A^T Y + Y A + Q = 0`.
pub fn open_loop_gramians(plant: &Plant) -> Result<(Mat, Mat)> {
    let dom = plant.domain();
    let x = linalg::solve_lyapunov(plant.a(), plant.w(), dom).map_err(|_| Error::PlantNotStable)?;
    let y = linalg::solve_lyapunov(&plant.a().transpose(), plant.q(), dom).map_err(|_| Error::PlantNotStable)?;
    Ok((x, y))
}

/// `G(s) = C X_op (sI - A^T)^{-1} Y_op B` for an open-loop stable plant.
pub fn zero_controller_g(plant: &Plant, s: Complex64) -> Result<DMatrix<Complex64>> {
    let (x, y) = open_loop_gramians(plant)?;
    let n = plant.n();
    let to_c = |m: &Mat| m.map(|v| Complex64::new(v, 0.0));
    let mut resolvent = -to_c(&plant.a().transpose());
    for i in 0..n {
        resolvent[(i, i)] += s;
    }
    let mid = resolvent.lu().solve(&to_c(&(y * plant.b()))).ok_or(Error::PoleHit)?;
    Ok(to_c(&(plant.c() * x)) * mid)
}

/// Eigen-decomposition of a real matrix through its complex Schur form,
/// returning eigenvalues and unit-norm eigenvectors (columns). Defective
/// eigenvalues yield a singular eigenvector matrix.
fn eigenvectors(m: &Mat) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let (u, t) = linalg::complex_schur(m)?;
    let scale = 1.0 + m.norm();
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * v[j];
            }
            let diag = t[(i, i)] - lam;
            v[i] = if diag.norm() > 1e-10 * scale {
                -acc / diag
            } else if acc.norm() <= 1e-10 * scale {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(f64::INFINITY, 0.0)
            };
        }
        let w = &u * v;
        let norm = w.norm();
        vecs.set_column(k, &(w / Complex64::new(norm, 0.0)));
    }
    Ok(((0..n).map(|i| t[(i, i)]).collect(), vecs))
}

/// Diagonalizability threshold on the eigenvector-matrix condition number.
pub const DIAGONALIZABLE_COND: f64 = 1e8;

/// Decides whether the Hessian at `diag(0, Λ)` vanishes or is indefinite.
///
/// The Hessian is indefinite exactly when `G(s)` is nonzero at some
/// eigenvalue `s` of `-Λ`. Only continuous-time plants are covered.
pub fn classify_zero_controller_saddle(plant: &Plant, lambda: &Mat) -> Result<SaddleReport> {
    if plant.domain() != TimeDomain::Continuous {
        return Err(Error::Invalid("saddle classification is stated for continuous time".into()));
    }
    if !linalg::stability(plant.a(), TimeDomain::Continuous)?.stable {
        return Err(Error::PlantNotStable);
    }
    if lambda.nrows() != lambda.ncols() {
        return Err(Error::NonSquare { rows: lambda.nrows(), cols: lambda.ncols() });
    }
    if !linalg::stability(lambda, TimeDomain::Continuous)?.stable {
        return Err(Error::UnstablePadding);
    }
    let (eig, vecs) = eigenvectors(lambda)?;
    let cond = if vecs.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        let sv = vecs.singular_values();
        if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY }
    } else {
        f64::INFINITY
    };
    if !(cond <= DIAGONALIZABLE_COND) {
        return Err(Error::NonDiagonalizable { cond });
    }
    let (x, y) = open_loop_gramians(plant)?;
    let scale = 1.0 + plant.c().norm() * x.norm() * y.norm() * plant.b().norm();
    let mut g_values = Vec::with_capacity(eig.len());
    let mut indefinite = false;
    for lam in eig {
        let s = -lam;
        let g = zero_controller_g(plant, s)?;
        if g.iter().any(|z| z.norm() > 1e-10 * scale) {
            indefinite = true;
        }
        g_values.push((s, g));
    }
    let classification = if indefinite { SaddleClass::Indefinite } else { SaddleClass::ZeroHessian };
    Ok(SaddleReport { classification, g_values })
}

/// Checks that a controller is stabilizing, mapping failure to an error.
pub(crate) fn require_stabilizing(plant: &Plant, k: &Controller) -> Result<()> {
    let rep = is_stabilizing(plant, k)?;
    if rep.stable {
        Ok(())
    } else {
        Err(Error::NotStabilizing { margin: rep.margin })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Mat {
        Mat::from_element(1, 1, x)
    }

    #[test]
    fn scalar_riccati_controller() {
        let one = s(1.0);
        let plant = Plant::new(one.clone(), one.clone(), one.clone(), one.clone(), one.clone(), one.clone(), one, TimeDomain::Continuous).unwrap();
        let opt = riccati_controller(&plant).unwrap();
        let r2 = 2f64.sqrt();
        assert!((opt.controller.a()[(0, 0)] + 1.0 + 2.0 * r2).abs() < 1e-12);
        assert!((opt.controller.b()[(0, 0)] - (1.0 + r2)).abs() < 1e-12);
        assert!((opt.controller.c()[(0, 0)] + (1.0 + r2)).abs() < 1e-12);
    }

    #[test]
    fn unstable_padding_rejected() {
        let plant = Plant::new(s(-1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), TimeDomain::Continuous).unwrap();
        let k = pad(&Controller::zeros(0, 1, 1), &s(-1.0)).unwrap();
        assert_eq!(k.a(), &s(-1.0));
        assert_eq!(augment_stationary(&plant, &k, &s(0.5), 1e-9), Err(Error::UnstablePadding));
    }

    #[test]
    fn defective_padding_rejected() {
        let plant = Plant::new(s(-1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), TimeDomain::Continuous).unwrap();
        let jordan = Mat::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        assert!(matches!(
            classify_zero_controller_saddle(&plant, &jordan),
            Err(Error::NonDiagonalizable { .. })
        ));
    }
}
