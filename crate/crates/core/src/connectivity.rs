//! Convex lift of the set of stabilizing full-order controllers.
//!
//! A stabilizing controller `K` admits a Lyapunov certificate
//! `P = [[X, Π^T], [Π, X̂]] ≻ 0` for its closed loop. With
//! `[[Y, Ξ], [Ξ^T, Ŷ]] = P^{-1}` the change of variables
//!
//! ```text
//! M = Y A X + Ξ B_K C X + Y B C_K Π + Ξ A_K Π,   H = Ξ B_K,   F = C_K Π,   G = 0
//! ```
//!
//! maps `K` to a point whose `(X, Y, M, G, H, F)` part satisfies linear matrix
//! inequalities (a convex set) and whose `(Π, Ξ)` part satisfies
//! `Ξ Π = I - Y X`. The inverse map [`realize`] recovers a stabilizing
//! controller from any such point. Because the convex part is connected,
//! stabilizing controllers split into at most two families distinguished by
//! the sign of `det Π`, and paths inside one family are built by
//! interpolation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, block2, inverse, is_positive_definite, Mat, TimeDomain};
use crate::model::{closed_loop, is_stabilizing, Controller, Plant};
use crate::synthesis::{pad, require_stabilizing};

/// Lifted representation of a stabilizing full-order controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexLift {
    pub x: Mat,
    pub y: Mat,
    pub m: Mat,
    /// Feedthrough variable; identically zero for strictly proper controllers.
    pub g: Mat,
    pub h: Mat,
    pub f: Mat,
    pub pi: Mat,
    pub xi: Mat,
    /// Set when `Π` had to be nudged away from singularity.
    pub perturbed: bool,
}

/// Sign of `det Π` in a lift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComponentSign {
    Plus,
    Minus,
}

fn require_full_order(plant: &Plant, k: &Controller) -> Result<()> {
    if k.order() != plant.n() {
        return Err(Error::Invalid(format!(
            "convex lift needs a full-order controller (q = {}, n = {})",
            k.order(),
            plant.n()
        )));
    }
    if !k.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    Ok(())
}

fn split(p: &Mat, n: usize) -> (Mat, Mat, Mat, Mat) {
    (
        p.view((0, 0), (n, n)).clone_owned(),
        p.view((0, n), (n, n)).clone_owned(),
        p.view((n, 0), (n, n)).clone_owned(),
        p.view((n, n), (n, n)).clone_owned(),
    )
}

/// Strict Lyapunov inequality for the closed loop in the plant's domain.
fn lyapunov_inequality_holds(plant: &Plant, acl: &Mat, p: &Mat) -> bool {
    if !is_positive_definite(p) {
        return false;
    }
    match plant.domain() {
        TimeDomain::Continuous => linalg::max_sym_eigenvalue(&(acl * p + p * acl.transpose())) < 0.0,
        TimeDomain::Discrete => linalg::min_sym_eigenvalue(&(p - acl * p * acl.transpose())) > 0.0,
    }
}

fn lift_from_certificate(plant: &Plant, k: &Controller, p: &Mat, perturbed: bool) -> Result<ConvexLift> {
    let n = plant.n();
    let (x, _pit, pi, _xhat) = split(p, n);
    let pinv = linalg::symmetrize(&inverse(p)?);
    let (y, xi, _xit, _yhat) = split(&pinv, n);
    let (a, b, c) = (plant.a(), plant.b(), plant.c());
    let m = &y * a * &x + &xi * k.b() * c * &x + &y * b * k.c() * &pi + &xi * k.a() * &pi;
    Ok(ConvexLift {
        x: linalg::symmetrize(&x),
        y: linalg::symmetrize(&y),
        m,
        g: Mat::zeros(plant.m(), plant.p()),
        h: &xi * k.b(),
        f: k.c() * &pi,
        pi,
        xi,
        perturbed,
    })
}

/// Lifts a stabilizing full-order controller.
///
/// The certificate solves the closed-loop Lyapunov equation with identity
/// right-hand side, which makes the inequality strict. If its off-diagonal
/// block `Π` is numerically singular, the certificate is shifted by
/// `δ [[0, I], [I, 0]]` with `δ` small enough to keep it a strict
/// certificate; the result then carries `perturbed = true`.
pub fn lift(plant: &Plant, k: &Controller) -> Result<ConvexLift> {
    require_full_order(plant, k)?;
    require_stabilizing(plant, k)?;
    let n = plant.n();
    let acl = closed_loop(plant, k)?;
    let p = linalg::solve_lyapunov(&acl, &Mat::identity(2 * n, 2 * n), plant.domain())?;
    let pi = p.view((n, 0), (n, n)).clone_owned();
    if linalg::rcond(&pi) >= 1e-10 {
        return lift_from_certificate(plant, k, &p, false);
    }
    let mut swap = Mat::zeros(2 * n, 2 * n);
    swap.view_mut((n, 0), (n, n)).fill_with_identity();
    swap.view_mut((0, n), (n, n)).fill_with_identity();
    let drift = match plant.domain() {
        TimeDomain::Continuous => &acl * &swap + &swap * acl.transpose(),
        TimeDomain::Discrete => &swap - &acl * &swap * acl.transpose(),
    };
    let drift_norm = drift.svd(false, false).singular_values.max();
    let base = (0.5 * linalg::min_sym_eigenvalue(&p)).min(0.5 / drift_norm.max(f64::MIN_POSITIVE));
    let best = [1.0, -1.0, 0.5, -0.5, 0.25, -0.25]
        .iter()
        .map(|f| &p + &swap * (base * f))
        .filter(|cand| lyapunov_inequality_holds(plant, &acl, cand))
        .map(|cand| (linalg::rcond(&cand.view((n, 0), (n, n)).clone_owned()), cand))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((rc, cand)) if rc >= 1e-10 => lift_from_certificate(plant, k, &cand, true),
        _ => Err(Error::IllConditioned("cannot make Π invertible within the Lyapunov inequality".into())),
    }
}

fn lmi_block(plant: &Plant, z: &ConvexLift) -> Result<Mat> {
    let (a, b, c) = (plant.a(), plant.b(), plant.c());
    block2(&(a * &z.x + b * &z.f), &(a + b * &z.g * c), &z.m, &(&z.y * a + &z.h * c))
}

/// Verifies every defining condition of a lifted point.
pub fn check_lift(plant: &Plant, z: &ConvexLift) -> Result<()> {
    let n = plant.n();
    let eye = Mat::identity(n, n);
    let shapes = [
        (z.x.shape(), (n, n)),
        (z.y.shape(), (n, n)),
        (z.m.shape(), (n, n)),
        (z.g.shape(), (plant.m(), plant.p())),
        (z.h.shape(), (n, plant.p())),
        (z.f.shape(), (plant.m(), n)),
        (z.pi.shape(), (n, n)),
        (z.xi.shape(), (n, n)),
    ];
    if shapes.iter().any(|(got, want)| got != want) {
        return Err(Error::DimensionMismatch("lift blocks have inconsistent shapes".into()));
    }
    let coupling = block2(&z.x, &eye, &eye, &z.y)?;
    if !is_positive_definite(&coupling) {
        return Err(Error::InvariantViolated("[[X, I], [I, Y]] is not positive definite".into()));
    }
    let nblk = lmi_block(plant, z)?;
    let ok = match plant.domain() {
        TimeDomain::Continuous => linalg::max_sym_eigenvalue(&(&nblk + nblk.transpose())) < 0.0,
        TimeDomain::Discrete => {
            let big = block2(&coupling, &nblk, &nblk.transpose(), &coupling)?;
            linalg::min_sym_eigenvalue(&big) > 0.0
        }
    };
    if !ok {
        return Err(Error::InvariantViolated("stability matrix inequality fails".into()));
    }
    let gap = (&z.xi * &z.pi - (&eye - &z.y * &z.x)).norm();
    if gap > 1e-9 * (1.0 + z.y.norm() * z.x.norm()) {
        return Err(Error::InvariantViolated(format!("|ΞΠ - (I - YX)| = {gap:.3e}")));
    }
    if linalg::rcond(&z.pi) < 1e-14 || linalg::rcond(&z.xi) < 1e-14 {
        return Err(Error::InvariantViolated("Π or Ξ is singular".into()));
    }
    Ok(())
}

/// Maps a lifted point back to a controller:
/// `C_K = (F - G C X) Π^{-1}`, `B_K = Ξ^{-1} (H - Y B G)` and
/// `A_K = Ξ^{-1} (M - Y (A + B G C) X - Ξ B_K C X - Y B C_K Π) Π^{-1}`.
pub fn realize(plant: &Plant, z: &ConvexLift) -> Result<Controller> {
    check_lift(plant, z)?;
    let k = realize_unchecked(plant, z)?;
    let rep = is_stabilizing(plant, &k)?;
    if !rep.stable {
        return Err(Error::InvariantViolated(format!(
            "realized controller is not stabilizing (margin {:.3e})",
            rep.margin
        )));
    }
    Ok(k)
}

fn realize_unchecked(plant: &Plant, z: &ConvexLift) -> Result<Controller> {
    let (a, b, c) = (plant.a(), plant.b(), plant.c());
    let pii = inverse(&z.pi)?;
    let xii = inverse(&z.xi)?;
    let d_k = z.g.clone();
    let c_k = (&z.f - &d_k * c * &z.x) * &pii;
    let b_k = &xii * (&z.h - &z.y * b * &d_k);
    let a_k = &xii
        * (&z.m - &z.y * (a + b * &d_k * c) * &z.x - &z.xi * &b_k * c * &z.x - &z.y * b * &c_k * &z.pi)
        * &pii;
    if d_k.iter().all(|v| *v == 0.0) {
        Controller::new(a_k, b_k, c_k)
    } else {
        Controller::proper(a_k, b_k, c_k, d_k)
    }
}

/// Lift of `similarity(T, K)` obtained from a lift of `K`:
/// `Π -> T Π`, `Ξ -> Ξ T^{-1}`.
pub fn transform_lift(z: &ConvexLift, t: &Mat) -> Result<ConvexLift> {
    let ti = inverse(t)?;
    Ok(ConvexLift { pi: t * &z.pi, xi: &z.xi * ti, ..z.clone() })
}

fn sign_of(z: &ConvexLift) -> ComponentSign {
    if z.pi.determinant() > 0.0 {
        ComponentSign::Plus
    } else {
        ComponentSign::Minus
    }
}

/// Sign of `det Π` in the lift of `K`.
///
/// When the stabilizing set is disconnected the two signs label its two
/// components. When it is connected the images of both signs overlap, so
/// equal signs do not prove membership in one component and different
/// signs do not prove disconnection; [`path_between`] is the ground truth.
pub fn component_sign(plant: &Plant, k: &Controller) -> Result<ComponentSign> {
    Ok(sign_of(&lift(plant, k)?))
}

/// Sequence of stabilizing controllers joining two endpoints.
#[derive(Debug, Clone)]
pub struct ControllerPath {
    pub controllers: Vec<Controller>,
    /// Whether the path was routed through a padded reduced-order controller.
    pub bridged: bool,
    /// Number of samples that had to be moved because the verification of
    /// the nominal sample failed (expected to be zero).
    pub refinements: usize,
}

/// Principal logarithm of a rotation matrix, as a skew-symmetric matrix.
fn rotation_log(r: &Mat) -> Result<Mat> {
    let n = r.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let (z, t) = nalgebra::Schur::try_new(r.clone(), f64::EPSILON, 100 * n)
        .ok_or_else(|| Error::IllConditioned("Schur iteration did not converge on a rotation".into()))?
        .unpack();
    let mut l = Mat::zeros(n, n);
    let mut minus_one = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-12 {
            let theta = t[(i + 1, i)].atan2(t[(i, i)]);
            l[(i, i + 1)] = -theta;
            l[(i + 1, i)] = theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                minus_one.push(i);
            }
            i += 1;
        }
    }
    if minus_one.len() % 2 == 1 {
        return Err(Error::InvariantViolated("rotation path endpoints have opposite orientation".into()));
    }
    for pair in minus_one.chunks(2) {
        l[(pair[0], pair[1])] = -std::f64::consts::PI;
        l[(pair[1], pair[0])] = std::f64::consts::PI;
    }
    let full = &z * l * z.transpose();
    Ok((&full - full.transpose()) * 0.5)
}

/// Polar factors `Π = Q S` with `Q` orthogonal and `S` symmetric positive definite.
fn polar(pi: &Mat) -> (Mat, Mat) {
    let svd = pi.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s = vt.transpose() * Mat::from_diagonal(&svd.singular_values) * &vt;
    (u * vt, linalg::symmetrize(&s))
}

/// Interpolates between two lifts of the same sign and realizes the samples.
fn interpolate(plant: &Plant, z0: &ConvexLift, z1: &ConvexLift, steps: usize) -> Result<(Vec<Controller>, usize)> {
    let n = plant.n();
    let eye = Mat::identity(n, n);
    let (q0, s0) = polar(&z0.pi);
    let (q1, s1) = polar(&z1.pi);
    let log = rotation_log(&(q0.transpose() * &q1))?;
    let sample = |t: f64| -> Result<Controller> {
        let mix = |a: &Mat, b: &Mat| a * (1.0 - t) + b * t;
        let x = mix(&z0.x, &z1.x);
        let y = mix(&z0.y, &z1.y);
        let pi = &q0 * (&log * t).exp() * mix(&s0, &s1);
        let xi = (&eye - &y * &x) * inverse(&pi)?;
        let z = ConvexLift {
            x,
            y,
            m: mix(&z0.m, &z1.m),
            g: mix(&z0.g, &z1.g),
            h: mix(&z0.h, &z1.h),
            f: mix(&z0.f, &z1.f),
            pi,
            xi,
            perturbed: false,
        };
        realize(plant, &z)
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut refinements = 0;
    let h = 1.0 / steps as f64;
    for i in 0..=steps {
        let t = i as f64 * h;
        match sample(t) {
            Ok(k) => out.push(k),
            Err(first) => {
                // shift the sample within its cell; any success is recorded
                let retry = (1..=8).flat_map(|j| {
                    let dt = h / f64::from(1u32 << j);
                    [t - dt, t + dt]
                });
                let found = retry
                    .filter(|s| (0.0..=1.0).contains(s))
                    .find_map(|s| sample(s).ok());
                match found {
                    Some(k) => {
                        refinements += 1;
                        out.push(k);
                    }
                    None => return Err(first),
                }
            }
        }
    }
    Ok((out, refinements))
}

/// Connects two stabilizing full-order controllers by a path of stabilizing
/// controllers with `steps + 1` samples (endpoints included verbatim).
///
/// Endpoints whose lifts share the sign of `det Π` are joined inside the
/// lifted set: the convex variables move linearly while `Π` follows its
/// polar decomposition (rotation along a geodesic, positive factor
/// linearly), which keeps it invertible. Endpoints of opposite sign are
/// joined only through a supplied stabilizing controller of order `n - 1`:
/// padded with one decoupled stable state it is fixed by
/// `T = diag(I, -1)`, so it has lifts of both signs.
pub fn path_between(
    plant: &Plant,
    k0: &Controller,
    k1: &Controller,
    steps: usize,
    bridge: Option<&Controller>,
) -> Result<ControllerPath> {
    let steps = steps.max(1);
    let z0 = lift(plant, k0)?;
    let z1 = lift(plant, k1)?;
    let (s0, s1) = (sign_of(&z0), sign_of(&z1));
    let assemble = |parts: Vec<Vec<Controller>>| {
        let mut controllers: Vec<Controller> = Vec::new();
        for (idx, part) in parts.into_iter().enumerate() {
            let skip = usize::from(idx > 0);
            controllers.extend(part.into_iter().skip(skip));
        }
        let last = controllers.len() - 1;
        controllers[0] = k0.clone();
        controllers[last] = k1.clone();
        controllers
    };
    if s0 == s1 {
        let (samples, refinements) = interpolate(plant, &z0, &z1, steps)?;
        return Ok(ControllerPath { controllers: assemble(vec![samples]), bridged: false, refinements });
    }
    let Some(k_red) = bridge else {
        return Err(Error::NoPathFound(
            "endpoints lie in lifts of opposite sign and no reduced-order stabilizer was supplied".into(),
        ));
    };
    if k_red.order() + 1 != plant.n() {
        return Err(Error::Invalid(format!(
            "bridge controller must have order n - 1 = {}, got {}",
            plant.n() - 1,
            k_red.order()
        )));
    }
    let pad_value = match plant.domain() {
        TimeDomain::Continuous => -1.0,
        TimeDomain::Discrete => 0.0,
    };
    let kb = pad(k_red, &Mat::from_element(1, 1, pad_value))?;
    require_stabilizing(plant, &kb)?;
    let zb = lift(plant, &kb)?;
    let mut flip = Mat::identity(plant.n(), plant.n());
    flip[(plant.n() - 1, plant.n() - 1)] = -1.0;
    let zb_flipped = transform_lift(&zb, &flip)?;
    let (zb0, zb1) = if sign_of(&zb) == s0 { (zb, zb_flipped) } else { (zb_flipped, zb) };
    let first = steps / 2;
    let (a, ra) = interpolate(plant, &z0, &zb0, first.max(1))?;
    let (b, rb) = interpolate(plant, &zb1, &z1, (steps - first).max(1))?;
    Ok(ControllerPath { controllers: assemble(vec![a, b]), bridged: true, refinements: ra + rb })
}

/// Searches for a stabilizing controller of order `q`.
///
/// Stable plants get the padded zero controller directly. Otherwise the
/// search spends `budget` closed-loop stability evaluations: half on random
/// controllers with entries of random scale, half on a hill climb of the
/// stability margin from the best sample. A `None` result is not a proof
/// that no such controller exists.
pub fn reduced_order_search(plant: &Plant, q: usize, budget: usize, seed: u64) -> Result<Option<Controller>> {
    let (m, p) = (plant.m(), plant.p());
    let dom = plant.domain();
    if linalg::stability(plant.a(), dom)?.stable {
        let fill = match dom {
            TimeDomain::Continuous => -1.0,
            TimeDomain::Discrete => 0.0,
        };
        let k = Controller::new(Mat::identity(q, q) * fill, Mat::zeros(q, p), Mat::zeros(m, q))?;
        return Ok(Some(k));
    }
    if q == 0 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64| {
        Mat::from_fn(r, c, |_, _| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
    };
    let margin = |k: &Controller| is_stabilizing(plant, k).map(|r| r.margin).unwrap_or(f64::INFINITY);
    let mut best: Option<(f64, Controller)> = None;
    let explore = budget / 2;
    for _ in 0..explore {
        let scale = 10f64.powf(rng.random_range(-1.0..1.0));
        let k = Controller::new(gauss(&mut rng, q, q, scale), gauss(&mut rng, q, p, scale), gauss(&mut rng, m, q, scale))?;
        let mk = margin(&k);
        if mk < 0.0 {
            return Ok(Some(k));
        }
        if best.as_ref().is_none_or(|(mb, _)| mk < *mb) {
            best = Some((mk, k));
        }
    }
    let Some((mut best_margin, mut current)) = best else { return Ok(None) };
    let mut step = 0.1 * (1.0 + current.a().norm());
    for _ in explore..budget {
        let dir = crate::model::Direction {
            da: gauss(&mut rng, q, q, step),
            db: gauss(&mut rng, q, p, step),
            dc: gauss(&mut rng, m, q, step),
        };
        let trial = current.step(&dir, 1.0)?;
        let mt = margin(&trial);
        if mt < 0.0 {
            return Ok(Some(trial));
        }
        if mt < best_margin {
            best_margin = mt;
            current = trial;
            step *= 1.2;
        } else {
            step = (step * 0.9).max(1e-6);
        }
    }
    Ok(None)
}
