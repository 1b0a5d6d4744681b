//! LQG cost of a stabilizing controller, its exact gradient and Hessian, and
//! the condition number of the Hessian restricted to directions transversal
//! to the similarity orbit.
//!
//! For a strictly proper controller `K` of order `q` the closed loop `Acl`
//! has dimension `n + q`. The cost is `J = tr(Q_cl X) = tr(W_cl Y)` with
//! `Q_cl = diag(Q, C_K^T R C_K)`, `W_cl = diag(W, B_K V B_K^T)` and `X`, `Y`
//! the controllability and observability Gramian-type solutions of the
//! closed-loop Lyapunov equations in the plant's time domain.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, LyapunovSolver, Mat, TimeDomain};
use crate::model::{closed_loop, tangent_space, Controller, Direction, Plant};

/// Cost together with the closed-loop Lyapunov solutions.
#[derive(Debug, Clone)]
pub struct CostEval {
    /// Mean of the two trace expressions.
    pub j: f64,
    /// `|tr(Q_cl X) - tr(W_cl Y)| / (1 + |J|)`, a conditioning diagnostic.
    pub trace_gap: f64,
    /// Solution of the closed-loop equation driven by `W_cl`.
    pub x: Mat,
    /// Solution of the adjoint equation driven by `Q_cl`.
    pub y: Mat,
    n: usize,
    acl: Mat,
    solver: LyapunovSolver,
}

impl CostEval {
    pub fn x11(&self) -> Mat {
        self.x.view((0, 0), (self.n, self.n)).clone_owned()
    }
    pub fn x12(&self) -> Mat {
        self.x.view((0, self.n), (self.n, self.q())).clone_owned()
    }
    pub fn x22(&self) -> Mat {
        self.x.view((self.n, self.n), (self.q(), self.q())).clone_owned()
    }
    pub fn y11(&self) -> Mat {
        self.y.view((0, 0), (self.n, self.n)).clone_owned()
    }
    pub fn y12(&self) -> Mat {
        self.y.view((0, self.n), (self.n, self.q())).clone_owned()
    }
    pub fn y22(&self) -> Mat {
        self.y.view((self.n, self.n), (self.q(), self.q())).clone_owned()
    }
    /// Controller order.
    pub fn q(&self) -> usize {
        self.x.nrows() - self.n
    }
    /// Closed-loop matrix the solutions belong to.
    pub fn closed_loop(&self) -> &Mat {
        &self.acl
    }
}

fn require_strictly_proper(k: &Controller) -> Result<()> {
    if k.is_strictly_proper() {
        Ok(())
    } else {
        Err(Error::NotStrictlyProper)
    }
}

/// LQG cost of a strictly proper stabilizing controller.
pub fn lqg_cost(plant: &Plant, k: &Controller) -> Result<CostEval> {
    require_strictly_proper(k)?;
    let acl = closed_loop(plant, k)?;
    let dom = plant.domain();
    let report = linalg::stability(&acl, dom)?;
    if !report.stable {
        return Err(Error::NotStabilizing { margin: report.margin });
    }
    let not_stab = |e: Error| match e {
        Error::UnstableCoefficient { margin } => Error::NotStabilizing { margin },
        other => other,
    };
    let solver = LyapunovSolver::new(&acl, dom).map_err(not_stab)?;
    let w_cl = block_diag(plant.w(), &(k.b() * plant.v() * k.b().transpose()));
    let q_cl = block_diag(plant.q(), &(k.c().transpose() * plant.r() * k.c()));
    let x = solver.solve(&w_cl)?;
    let y = linalg::solve_lyapunov(&acl.transpose(), &q_cl, dom).map_err(not_stab)?;
    let jx = (&q_cl * &x).trace();
    let jy = (&w_cl * &y).trace();
    let j = 0.5 * (jx + jy);
    Ok(CostEval {
        j,
        trace_gap: (jx - jy).abs() / (1.0 + j.abs()),
        x,
        y,
        n: plant.n(),
        acl,
        solver,
    })
}

/// Cost at `k_new` together with `J(k_new) - J(k)` computed without
/// cancellation.
///
/// Subtracting two nearly equal costs loses all digits once the decrease
/// falls below the rounding error of `J`. Instead the change `D = X' - X`
/// of the Gramian solves a Lyapunov equation for the new closed loop whose
/// right-hand side only involves the parameter change, and
/// `J' - J = tr(Q_cl' D) + tr((Q_cl' - Q_cl) X)`.
pub fn cost_difference(plant: &Plant, k: &Controller, ev: &CostEval, k_new: &Controller) -> Result<(CostEval, f64)> {
    if k.order() != k_new.order() || k.outputs() != k_new.outputs() || k.inputs() != k_new.inputs() {
        return Err(Error::DimensionMismatch("controllers differ in shape".into()));
    }
    let ev_new = lqg_cost(plant, k_new)?;
    let n = plant.n();
    let q = k.order();
    let (b, c) = (plant.b(), plant.c());
    let da = k_new.a() - k.a();
    let db = k_new.b() - k.b();
    let dc = k_new.c() - k.c();
    let mut dacl = Mat::zeros(n + q, n + q);
    dacl.view_mut((0, n), (n, q)).copy_from(&(b * &dc));
    dacl.view_mut((n, 0), (q, n)).copy_from(&(&db * c));
    dacl.view_mut((n, n), (q, q)).copy_from(&da);
    let dw = block_diag(
        &Mat::zeros(n, n),
        &(&db * plant.v() * k_new.b().transpose() + k.b() * plant.v() * db.transpose()),
    );
    let dq = block_diag(
        &Mat::zeros(n, n),
        &(dc.transpose() * plant.r() * k_new.c() + k.c().transpose() * plant.r() * &dc),
    );
    let rhs = match plant.domain() {
        TimeDomain::Continuous => &dacl * &ev.x + &ev.x * dacl.transpose() + dw,
        TimeDomain::Discrete => {
            let sum = ev_new.closed_loop() + ev.closed_loop();
            (&dacl * &ev.x * sum.transpose() + &sum * &ev.x * dacl.transpose()) * 0.5 + dw
        }
    };
    let d = ev_new.solver.solve(&linalg::symmetrize(&rhs))?;
    let q_new = block_diag(plant.q(), &(k_new.c().transpose() * plant.r() * k_new.c()));
    let delta = (&q_new * &d).trace() + (&dq * &ev.x).trace();
    Ok((ev_new, delta))
}

/// Partial derivatives of the cost with respect to `(A_K, B_K, C_K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTriple {
    pub ga: Mat,
    pub gb: Mat,
    pub gc: Mat,
    /// Frobenius norm over all three blocks.
    pub norm: f64,
}

impl GradientTriple {
    fn new(ga: Mat, gb: Mat, gc: Mat) -> Self {
        let norm = (ga.norm_squared() + gb.norm_squared() + gc.norm_squared()).sqrt();
        Self { ga, gb, gc, norm }
    }

    /// The gradient as a [`Direction`], sharing its vector layout.
    pub fn to_direction(&self) -> Direction {
        Direction { da: self.ga.clone(), db: self.gb.clone(), dc: self.gc.clone() }
    }
}

/// Exact gradient of the LQG cost from an existing cost evaluation.
pub fn gradient_from(plant: &Plant, k: &Controller, ev: &CostEval) -> GradientTriple {
    let (a, b, c, v, r) = (plant.a(), plant.b(), plant.c(), plant.v(), plant.r());
    let (ak, bk, ck) = (k.a(), k.b(), k.c());
    let (x11, x12, x22) = (ev.x11(), ev.x12(), ev.x22());
    let (y11, y12, y22) = (ev.y11(), ev.y12(), ev.y22());
    let y12t = y12.transpose();
    let ct = c.transpose();
    let bt = b.transpose();
    match plant.domain() {
        TimeDomain::Continuous => {
            let ga = (&y12t * &x12 + &y22 * &x22) * 2.0;
            let gb = (&y22 * bk * v + &y22 * x12.transpose() * &ct + &y12t * &x11 * &ct) * 2.0;
            let gc = (r * ck * &x22 + &bt * &y11 * &x12 + &bt * &y12 * &x22) * 2.0;
            GradientTriple::new(ga, gb, gc)
        }
        TimeDomain::Discrete => {
            let ga = (&y12t * (a * &x12 + b * ck * &x22) + &y22 * ak * &x22 + &y22 * bk * c * &x12) * 2.0;
            let gb = (&y12t * (a * &x11 + b * ck * x12.transpose()) * &ct
                + &y22 * ak * x12.transpose() * &ct
                + &y22 * bk * (c * &x11 * &ct + v))
                * 2.0;
            let gc = (&bt * &y12 * (ak * &x22 + bk * c * &x12)
                + &bt * &y11 * a * &x12
                + (&bt * &y11 * b + r) * ck * &x22)
                * 2.0;
            GradientTriple::new(ga, gb, gc)
        }
    }
}

/// Exact gradient of the LQG cost.
pub fn lqg_gradient(plant: &Plant, k: &Controller) -> Result<GradientTriple> {
    let ev = lqg_cost(plant, k)?;
    Ok(gradient_from(plant, k, &ev))
}

/// First-order data of a direction reused by every Hessian entry involving it.
struct DirectionalData {
    dacl: Mat,
    dq: Mat,
    xp: Mat,
    dir: Direction,
}

fn closed_loop_perturbation(plant: &Plant, dir: &Direction) -> Result<Mat> {
    linalg::block2(
        &Mat::zeros(plant.n(), plant.n()),
        &(plant.b() * &dir.dc),
        &(&dir.db * plant.c()),
        &dir.da,
    )
}

fn directional(plant: &Plant, k: &Controller, ev: &CostEval, dir: &Direction) -> Result<DirectionalData> {
    let n = plant.n();
    let zero = Mat::zeros(n, n);
    let dacl = closed_loop_perturbation(plant, dir)?;
    let bvdb = k.b() * plant.v() * dir.db.transpose();
    let dw = block_diag(&zero, &(&bvdb + bvdb.transpose()));
    let crdc = k.c().transpose() * plant.r() * &dir.dc;
    let dq = block_diag(&zero, &(&crdc + crdc.transpose()));
    let m1 = match plant.domain() {
        TimeDomain::Continuous => &dacl * &ev.x + &ev.x * dacl.transpose() + dw,
        TimeDomain::Discrete => {
            let t = &dacl * &ev.x * ev.acl.transpose();
            &t + t.transpose() + dw
        }
    };
    let xp = ev.solver.solve(&m1)?;
    Ok(DirectionalData { dacl, dq, xp, dir: dir.clone() })
}

fn bilinear(plant: &Plant, ev: &CostEval, d1: &DirectionalData, d2: &DirectionalData) -> f64 {
    let n = plant.n();
    let zero = Mat::zeros(n, n);
    let c1rc2 = d1.dir.dc.transpose() * plant.r() * &d2.dir.dc;
    let q2 = block_diag(&zero, &(&c1rc2 + c1rc2.transpose()));
    let b1vb2 = &d1.dir.db * plant.v() * d2.dir.db.transpose();
    let w2 = block_diag(&zero, &(&b1vb2 + b1vb2.transpose()));
    let mut second = match plant.domain() {
        TimeDomain::Continuous => {
            let t = &d1.dacl * &d2.xp + &d2.dacl * &d1.xp;
            &t + t.transpose()
        }
        TimeDomain::Discrete => {
            let t = &d1.dacl * &d2.xp * ev.acl.transpose()
                + &d2.dacl * &d1.xp * ev.acl.transpose()
                + &d1.dacl * &ev.x * d2.dacl.transpose();
            &t + t.transpose()
        }
    };
    second += w2;
    (q2 * &ev.x).trace() + (&d1.dq * &d2.xp).trace() + (&d2.dq * &d1.xp).trace() + (&ev.y * second).trace()
}

/// Second directional derivative `d²/dt1 dt2 J(K + t1 Δ1 + t2 Δ2)` at zero.
pub fn hessian_bilinear(plant: &Plant, k: &Controller, d1: &Direction, d2: &Direction) -> Result<f64> {
    let ev = lqg_cost(plant, k)?;
    let a = directional(plant, k, &ev, d1)?;
    let b = directional(plant, k, &ev, d2)?;
    Ok(bilinear(plant, &ev, &a, &b))
}

/// Hessian quadratic form `Hess_K(Δ, Δ)`.
///
/// Solves one extra Lyapunov equation for the first-order perturbation of
/// `X` along `Δ` and assembles the trace terms.
pub fn hessian_quadratic_form(plant: &Plant, k: &Controller, dir: &Direction) -> Result<f64> {
    let ev = lqg_cost(plant, k)?;
    let d = directional(plant, k, &ev, dir)?;
    Ok(bilinear(plant, &ev, &d, &d))
}

/// Full Hessian over the `[vec(dC); vec(dB); vec(dA)]` layout.
///
/// Uses the bilinear form directly: one Lyapunov solve per coordinate
/// direction (sharing a single factorization of the closed loop) and then
/// `d(d+1)/2` trace evaluations. Entries are assembled in a fixed order, so
/// the result does not depend on scheduling.
pub fn hessian_matrix(plant: &Plant, k: &Controller) -> Result<Mat> {
    let ev = lqg_cost(plant, k)?;
    let (q, m, p) = (k.order(), k.outputs(), k.inputs());
    let d = q * q + q * p + m * q;
    let mut data = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        let dir = Direction::from_vector(&e, q, m, p)?;
        data.push(directional(plant, k, &ev, &dir)?);
    }
    let mut h = Mat::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = bilinear(plant, &ev, &data[i], &data[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Extremal eigenvalues of the Hessian restricted to the orthogonal
/// complement of the orbit tangent space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestrictedSpectrum {
    pub min_eig: f64,
    pub max_eig: f64,
    /// `min_eig / max_eig`.
    pub rcond: f64,
}

/// Stationarity threshold `|grad|_F <= 1e-6 (1 + |J|)` used by the
/// restricted condition number.
pub fn stationarity_tolerance(j: f64) -> f64 {
    1e-6 * (1.0 + j.abs())
}

/// Restricted Hessian spectrum at a minimal stationary controller.
pub fn restricted_rcond(plant: &Plant, k_star: &Controller) -> Result<RestrictedSpectrum> {
    let ev = lqg_cost(plant, k_star)?;
    let grad = gradient_from(plant, k_star, &ev);
    if grad.norm > stationarity_tolerance(ev.j) {
        return Err(Error::NotStationary { grad_norm: grad.norm });
    }
    let tb = tangent_space(k_star)?;
    let h = hessian_matrix(plant, k_star)?;
    let d = h.nrows();
    let mut p = Mat::zeros(d, tb.complement.len());
    for (col, dir) in tb.complement.iter().enumerate() {
        p.set_column(col, &dir.to_vector());
    }
    let hr = linalg::symmetrize(&(p.transpose() * h * &p));
    if hr.is_empty() {
        return Err(Error::Invalid("orbit tangent space fills the parameter space".into()));
    }
    let eig: DVector<f64> = hr.symmetric_eigenvalues();
    let (min_eig, max_eig) = (eig.min(), eig.max());
    Ok(RestrictedSpectrum { min_eig, max_eig, rcond: min_eig / max_eig })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Mat {
        Mat::from_element(1, 1, x)
    }

    #[test]
    fn scalar_family_cost_closed_form() {
        let plant = Plant::new(s(-1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), TimeDomain::Continuous).unwrap();
        let eps = 0.5;
        let k = Controller::new(s(0.0), s(-eps), s(eps)).unwrap();
        let ev = lqg_cost(&plant, &k).unwrap();
        let expected = (1.0 + 3.0 * eps * eps + eps.powi(4)) / 2.0;
        assert!((ev.j - expected).abs() < 1e-12);
        assert!(ev.trace_gap < 1e-12);
    }

    #[test]
    fn non_stabilizing_controller_rejected() {
        let plant = Plant::new(s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), TimeDomain::Continuous).unwrap();
        let k = Controller::new(s(-2.0), s(0.0), s(0.0)).unwrap();
        assert!(matches!(lqg_cost(&plant, &k), Err(Error::NotStabilizing { .. })));
    }
}
