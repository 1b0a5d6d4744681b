//! Plant and controller data model: closed-loop assembly, stabilization
//! tests, similarity transforms, transfer evaluation, canonical forms and the
//! tangent space of a similarity orbit.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, ctrb, inverse, min_sym_eigenvalue, minimality, Mat, MinimalityReport, StabilityReport,
    TimeDomain, RANK_TOL,
};

/// Standing assumptions on a plant: `(A, B)` and `(A, W^{1/2})` controllable,
/// `(C, A)` and `(Q^{1/2}, A)` observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssumptionFlags {
    pub ab_controllable: bool,
    pub aw_controllable: bool,
    pub ca_observable: bool,
    pub qa_observable: bool,
}

impl AssumptionFlags {
    pub fn all(&self) -> bool {
        self.ab_controllable && self.aw_controllable && self.ca_observable && self.qa_observable
    }
}

/// Linear plant with Gaussian process/measurement noise and quadratic cost.
///
/// `A: n×n, B: n×m, C: p×n`; noise intensities `W: n×n ⪰ 0`, `V: p×p ≻ 0`;
/// weights `Q: n×n ⪰ 0`, `R: m×m ≻ 0`. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    a: Mat,
    b: Mat,
    c: Mat,
    w: Mat,
    v: Mat,
    q: Mat,
    r: Mat,
    domain: TimeDomain,
    flags: AssumptionFlags,
}

fn check_shape(name: &str, m: &Mat, shape: (usize, usize)) -> Result<()> {
    if m.shape() != shape {
        return Err(Error::DimensionMismatch(format!(
            "{name} is {}x{}, expected {}x{}",
            m.nrows(),
            m.ncols(),
            shape.0,
            shape.1
        )));
    }
    Ok(())
}

fn check_symmetric(name: &str, m: &Mat) -> Result<()> {
    if (m - m.transpose()).norm() > 1e-12 * (1.0 + m.norm()) {
        return Err(Error::Invalid(format!("{name} not symmetric")));
    }
    Ok(())
}

impl Plant {
    /// Validates shapes and the definiteness conditions, then records the
    /// standing-assumption flags (those are reported, not enforced).
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: Mat, b: Mat, c: Mat, w: Mat, v: Mat, q: Mat, r: Mat, domain: TimeDomain) -> Result<Self> {
        let n = a.nrows();
        check_shape("A", &a, (n, n))?;
        let m = b.ncols();
        let p = c.nrows();
        check_shape("B", &b, (n, m))?;
        check_shape("C", &c, (p, n))?;
        check_shape("W", &w, (n, n))?;
        check_shape("V", &v, (p, p))?;
        check_shape("Q", &q, (n, n))?;
        check_shape("R", &r, (m, m))?;
        for (name, mat) in [("W", &w), ("V", &v), ("Q", &q), ("R", &r)] {
            check_symmetric(name, mat)?;
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("{name} has non-finite entries")));
            }
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c)] {
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("{name} has non-finite entries")));
            }
        }
        for (name, mat) in [("W", &w), ("Q", &q)] {
            if min_sym_eigenvalue(mat) < -1e-12 * (1.0 + mat.norm()) {
                return Err(Error::Invalid(format!("{name} not positive semidefinite")));
            }
        }
        for (name, mat) in [("V", &v), ("R", &r)] {
            if !linalg::is_positive_definite(mat) {
                return Err(Error::Invalid(format!("{name} not positive definite")));
            }
        }
        // W^{1/2} and Q^{1/2} have the same range as W and Q, so the rank
        // tests can use the weights directly.
        let flags = AssumptionFlags {
            ab_controllable: minimality(&a, &b, &c, RANK_TOL)?.controllable,
            aw_controllable: minimality(&a, &w, &c, RANK_TOL)?.controllable,
            ca_observable: minimality(&a, &b, &c, RANK_TOL)?.observable,
            qa_observable: minimality(&a, &b, &q, RANK_TOL)?.observable,
        };
        Ok(Self { a, b, c, w, v, q, r, domain, flags })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn w(&self) -> &Mat {
        &self.w
    }
    pub fn v(&self) -> &Mat {
        &self.v
    }
    pub fn q(&self) -> &Mat {
        &self.q
    }
    pub fn r(&self) -> &Mat {
        &self.r
    }
    pub fn domain(&self) -> TimeDomain {
        self.domain
    }
    pub fn assumptions(&self) -> AssumptionFlags {
        self.flags
    }
    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Number of control inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    /// Number of measured outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
}

/// Dynamic output-feedback controller `(A_K, B_K, C_K, D_K)`.
///
/// `A_K: q×q, B_K: q×p, C_K: m×q, D_K: m×p`; strictly proper controllers
/// carry `D_K = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
}

impl Controller {
    /// Strictly proper controller.
    pub fn new(a: Mat, b: Mat, c: Mat) -> Result<Self> {
        let d = Mat::zeros(c.nrows(), b.ncols());
        Self::proper(a, b, c, d)
    }

    /// Controller with a feedthrough term.
    pub fn proper(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let q = a.nrows();
        check_shape("A_K", &a, (q, q))?;
        if b.nrows() != q || c.ncols() != q || d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "controller blocks A_K {:?}, B_K {:?}, C_K {:?}, D_K {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Zero controller of order `q` for a plant with `m` inputs and `p` outputs.
    pub fn zeros(q: usize, m: usize, p: usize) -> Self {
        Self { a: Mat::zeros(q, q), b: Mat::zeros(q, p), c: Mat::zeros(m, q), d: Mat::zeros(m, p) }
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn d(&self) -> &Mat {
        &self.d
    }
    /// Controller state dimension `q`.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    /// Number of plant inputs the controller drives (`m`).
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
    /// Number of plant measurements the controller reads (`p`).
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn is_strictly_proper(&self) -> bool {
        self.d.iter().all(|x| *x == 0.0)
    }

    /// Rank-based controllability/observability report of `(A_K, B_K, C_K)`.
    pub fn minimality(&self, rank_tol: f64) -> Result<MinimalityReport> {
        minimality(&self.a, &self.b, &self.c, rank_tol)
    }

    /// Strictly proper parameters as a [`Direction`] (the point itself in V_q).
    pub fn as_direction(&self) -> Direction {
        Direction { da: self.a.clone(), db: self.b.clone(), dc: self.c.clone() }
    }

    /// `K + t Δ`, keeping `D_K` unchanged.
    pub fn step(&self, dir: &Direction, t: f64) -> Result<Self> {
        if dir.da.shape() != self.a.shape() || dir.db.shape() != self.b.shape() || dir.dc.shape() != self.c.shape() {
            return Err(Error::DimensionMismatch("direction does not match controller".into()));
        }
        Ok(Self {
            a: &self.a + &dir.da * t,
            b: &self.b + &dir.db * t,
            c: &self.c + &dir.dc * t,
            d: self.d.clone(),
        })
    }

    fn check_host(&self, plant: &Plant) -> Result<()> {
        if self.outputs() != plant.m() || self.inputs() != plant.p() {
            return Err(Error::DimensionMismatch(format!(
                "controller maps {} outputs to {} inputs, plant has p = {}, m = {}",
                self.inputs(),
                self.outputs(),
                plant.p(),
                plant.m()
            )));
        }
        Ok(())
    }
}

/// Tangent vector in the space of strictly proper controllers of order `q`.
///
/// The vectorized layout used by every gradient and Hessian routine is
/// `[vec(dC); vec(dB); vec(dA)]` with column-major `vec`.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub da: Mat,
    pub db: Mat,
    pub dc: Mat,
}

impl Direction {
    pub fn zeros(q: usize, m: usize, p: usize) -> Self {
        Self { da: Mat::zeros(q, q), db: Mat::zeros(q, p), dc: Mat::zeros(m, q) }
    }

    /// Number of scalar parameters `q^2 + q p + m q`.
    pub fn dim(&self) -> usize {
        self.da.len() + self.db.len() + self.dc.len()
    }

    /// Column-major stacking `[vec(dC); vec(dB); vec(dA)]`.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(self.dc.as_slice());
        v.extend_from_slice(self.db.as_slice());
        v.extend_from_slice(self.da.as_slice());
        DVector::from_vec(v)
    }

    /// Inverse of [`Direction::to_vector`].
    pub fn from_vector(v: &[f64], q: usize, m: usize, p: usize) -> Result<Self> {
        let (nc, nb, na) = (m * q, q * p, q * q);
        if v.len() != nc + nb + na {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} does not match q = {q}, m = {m}, p = {p}",
                v.len()
            )));
        }
        Ok(Self {
            dc: Mat::from_column_slice(m, q, &v[..nc]),
            db: Mat::from_column_slice(q, p, &v[nc..nc + nb]),
            da: Mat::from_column_slice(q, q, &v[nc + nb..]),
        })
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Direction) -> f64 {
        self.da.dot(&other.da) + self.db.dot(&other.db) + self.dc.dot(&other.dc)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { da: &self.da * t, db: &self.db * t, dc: &self.dc * t }
    }

    pub fn plus(&self, other: &Direction) -> Self {
        Self { da: &self.da + &other.da, db: &self.db + &other.db, dc: &self.dc + &other.dc }
    }

    pub fn minus(&self, other: &Direction) -> Self {
        self.plus(&other.scaled(-1.0))
    }
}

/// Closed-loop matrix `[[A + B D_K C, B C_K], [B_K C, A_K]]`.
pub fn closed_loop(plant: &Plant, k: &Controller) -> Result<Mat> {
    k.check_host(plant)?;
    let top_left = plant.a() + plant.b() * k.d() * plant.c();
    linalg::block2(&top_left, &(plant.b() * k.c()), &(k.b() * plant.c()), k.a())
}

/// Stability of the closed loop in the plant's time domain.
pub fn is_stabilizing(plant: &Plant, k: &Controller) -> Result<StabilityReport> {
    linalg::stability(&closed_loop(plant, k)?, plant.domain())
}

/// Reciprocal condition number below which a transform counts as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Change of controller coordinates: `(T A_K T^{-1}, T B_K, C_K T^{-1}, D_K)`.
pub fn similarity(t: &Mat, k: &Controller) -> Result<Controller> {
    if t.shape() != (k.order(), k.order()) {
        return Err(Error::DimensionMismatch(format!(
            "transform is {:?} for a controller of order {}",
            t.shape(),
            k.order()
        )));
    }
    let rc = linalg::rcond(t);
    if !(rc > SINGULAR_RCOND) {
        return Err(Error::SingularTransform { rcond: rc });
    }
    let ti = inverse(t)?;
    Controller::proper(t * k.a() * &ti, t * k.b(), k.c() * &ti, k.d().clone())
}

/// Evaluates `C_K (sI - A_K)^{-1} B_K + D_K` at a complex point.
pub fn transfer_eval(k: &Controller, s: Complex64) -> Result<nalgebra::DMatrix<Complex64>> {
    let q = k.order();
    let to_c = |m: &Mat| m.map(|x| Complex64::new(x, 0.0));
    let d = to_c(k.d());
    if q == 0 {
        return Ok(d);
    }
    let scale = 1.0 + k.a().norm() + s.norm();
    for z in linalg::eigenvalues(k.a())? {
        if (z - s).norm() <= 1e-12 * scale {
            return Err(Error::PoleHit);
        }
    }
    let mut resolvent = -to_c(k.a());
    for i in 0..q {
        resolvent[(i, i)] += s;
    }
    let x = resolvent.lu().solve(&to_c(k.b())).ok_or(Error::PoleHit)?;
    Ok(to_c(k.c()) * x + d)
}

/// Controllable canonical form of a SISO controller and the transform that
/// produces it.
///
/// With characteristic polynomial `s^q + b_{q-1} s^{q-1} + ... + b_0`, the
/// canonical controller has companion `A_K` (ones on the superdiagonal, last
/// row `[-b_0, ..., -b_{q-1}]`), `B_K = e_q` and `C_K = [a_0, ..., a_{q-1}]`.
/// The returned `T` satisfies `similarity(T, K) = K_canon`.
pub fn canonical_form(k: &Controller) -> Result<(Controller, Mat)> {
    if k.inputs() != 1 || k.outputs() != 1 {
        return Err(Error::NotSiso);
    }
    let q = k.order();
    let rep = k.minimality(RANK_TOL)?;
    if !rep.controllable {
        return Err(Error::NotControllable);
    }
    let wc = ctrb(k.a(), k.b())?;
    // A_K^q B_K = -sum_i b_i A_K^i B_K
    let mut aqb = k.b().clone();
    for _ in 0..q {
        aqb = k.a() * aqb;
    }
    let coeffs = wc
        .clone()
        .lu()
        .solve(&(-aqb))
        .ok_or(Error::NotControllable)?;
    let (ac, bc) = companion(coeffs.as_slice());
    let t = ctrb(&ac, &bc)? * inverse(&wc)?;
    let cc = k.c() * inverse(&t)?;
    let canon = Controller::proper(ac, bc, cc, k.d().clone())?;
    Ok((canon, t))
}

/// Companion pair `(A_c, e_q)` for monic characteristic coefficients
/// `[b_0, ..., b_{q-1}]`.
pub fn companion(b: &[f64]) -> (Mat, Mat) {
    let q = b.len();
    let mut a = Mat::zeros(q, q);
    for i in 0..q.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for (j, bj) in b.iter().enumerate() {
        a[(q - 1, j)] = -bj;
    }
    let mut e = Mat::zeros(q, 1);
    if q > 0 {
        e[(q - 1, 0)] = 1.0;
    }
    (a, e)
}

/// Tangent space of the similarity orbit at a minimal controller.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    /// `(H A_K - A_K H, H B_K, -C_K H)` for `H = E_ij`, ordered column-major
    /// in `(i, j)`.
    pub basis: Vec<Direction>,
    /// Orthonormal basis of the orthogonal complement in V_q.
    pub complement: Vec<Direction>,
    /// Orthonormal basis of the tangent space itself.
    pub orthonormal: Vec<Direction>,
}

/// Tangent direction generated by an infinitesimal similarity `I + tH`.
pub fn tangent_direction(k: &Controller, h: &Mat) -> Direction {
    Direction { da: h * k.a() - k.a() * h, db: h * k.b(), dc: -(k.c() * h) }
}

/// Basis of the orbit tangent space and of its orthogonal complement.
///
/// Requires a minimal controller: otherwise the map `H -> tangent_direction`
/// is not injective and the orbit dimension is not `q^2`.
pub fn tangent_space(k: &Controller) -> Result<TangentBasis> {
    if !k.minimality(RANK_TOL)?.minimal {
        return Err(Error::NonMinimalController);
    }
    let (q, m, p) = (k.order(), k.outputs(), k.inputs());
    let mut basis = Vec::with_capacity(q * q);
    for j in 0..q {
        for i in 0..q {
            let mut h = Mat::zeros(q, q);
            h[(i, j)] = 1.0;
            basis.push(tangent_direction(k, &h));
        }
    }
    let d = q * q + q * p + m * q;
    let mut stacked = Mat::zeros(d, q * q);
    for (col, dir) in basis.iter().enumerate() {
        stacked.set_column(col, &dir.to_vector());
    }
    // eigenvectors of the Gram projector split V_q into the tangent space
    // (large eigenvalues) and its complement (zero eigenvalues)
    let eig = (&stacked * stacked.transpose()).symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(f64::MIN_POSITIVE);
    if q > 0 && eig.eigenvalues[order[q * q - 1]] <= (RANK_TOL * RANK_TOL) * top {
        return Err(Error::NonMinimalController);
    }
    let to_dir = |idx: usize| Direction::from_vector(eig.eigenvectors.column(idx).as_slice(), q, m, p);
    let orthonormal = order[..q * q].iter().map(|&i| to_dir(i)).collect::<Result<Vec<_>>>()?;
    let complement = order[q * q..].iter().map(|&i| to_dir(i)).collect::<Result<Vec<_>>>()?;
    Ok(TangentBasis { basis, complement, orthonormal })
}

/// Splits `dir` into its orbit-tangent component and the orthogonal remainder.
pub fn project_tangent(k: &Controller, dir: &Direction) -> Result<(Direction, Direction)> {
    let tb = tangent_space(k)?;
    let mut par = Direction::zeros(k.order(), k.outputs(), k.inputs());
    for e in &tb.orthonormal {
        par = par.plus(&e.scaled(e.inner(dir)));
    }
    let perp = dir.minus(&par);
    Ok((par, perp))
}

/// Residual of the complement characterization
/// `dA A_K^T - A_K^T dA + dB B_K^T - C_K^T dC`, zero exactly when `dir` is
/// orthogonal to the orbit tangent space.
pub fn complement_residual(k: &Controller, dir: &Direction) -> Mat {
    &dir.da * k.a().transpose() - k.a().transpose() * &dir.da + &dir.db * k.b().transpose()
        - k.c().transpose() * &dir.dc
}

/// Finds `T` with `similarity(T, k1) = k2`, or `None` when the controllers are
/// not similar.
///
/// Minimal realizations of the same transfer function are related by a
/// unique similarity, so the test compares the first `2q` Markov parameters
/// and then solves `T ctrb(k1) = ctrb(k2)`. Controllers whose `A_K` spectra
/// differ are never similar, which settles the non-minimal case when the
/// spectra disagree; other non-minimal inputs are refused.
pub fn orbit_match(k1: &Controller, k2: &Controller) -> Result<Option<Mat>> {
    let q = k1.order();
    if k2.order() != q || k1.inputs() != k2.inputs() || k1.outputs() != k2.outputs() {
        return Err(Error::DimensionMismatch("controllers have different shapes".into()));
    }
    let scale = 1.0 + k1.a().norm().max(k2.a().norm());
    let e1 = linalg::eigenvalues(k1.a())?;
    let e2 = linalg::eigenvalues(k2.a())?;
    if !spectra_match(&e1, &e2, 1e-6 * scale) {
        return Ok(None);
    }
    if !k1.minimality(RANK_TOL)?.minimal || !k2.minimality(RANK_TOL)?.minimal {
        return Err(Error::NonMinimalController);
    }
    let tol = 1e-8;
    if (k1.d() - k2.d()).norm() > tol * (1.0 + k1.d().norm()) {
        return Ok(None);
    }
    let (mut x1, mut x2) = (k1.b().clone(), k2.b().clone());
    for _ in 0..2 * q {
        let (h1, h2) = (k1.c() * &x1, k2.c() * &x2);
        if (&h1 - &h2).norm() > tol * (1.0 + h1.norm()) {
            return Ok(None);
        }
        x1 = k1.a() * x1;
        x2 = k2.a() * x2;
    }
    let w1 = ctrb(k1.a(), k1.b())?;
    let w2 = ctrb(k2.a(), k2.b())?;
    let t = &w2 * w1.transpose() * inverse(&(&w1 * w1.transpose()))?;
    let mapped = match similarity(&t, k1) {
        Ok(mapped) => mapped,
        Err(Error::SingularTransform { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let gap = (mapped.a() - k2.a()).norm() + (mapped.b() - k2.b()).norm() + (mapped.c() - k2.c()).norm();
    let size = k2.a().norm() + k2.b().norm() + k2.c().norm();
    Ok((gap <= 1e-7 * (1.0 + size)).then_some(t))
}

/// Unordered comparison of two spectra.
///
/// Each eigenvalue of `e1` claims the nearest unclaimed eigenvalue of `e2`.
/// Sorting alone is not enough because a conjugate pair computed from a
/// complex Schur form can carry real parts that differ in the last bits.
fn spectra_match(e1: &[Complex64], e2: &[Complex64], tol: f64) -> bool {
    if e1.len() != e2.len() {
        return false;
    }
    let mut used = vec![false; e2.len()];
    e1.iter().all(|a| {
        let nearest = e2
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, b)| (j, (a - b).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match nearest {
            Some((j, d)) if d <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Mat {
        Mat::from_element(1, 1, x)
    }

    fn unit_plant(a: f64) -> Plant {
        Plant::new(s(a), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), TimeDomain::Continuous).unwrap()
    }

    #[test]
    fn closed_loop_scalar_example() {
        let k = Controller::new(s(-2.0), s(-2.0), s(2.0)).unwrap();
        let acl = closed_loop(&unit_plant(1.0), &k).unwrap();
        assert_eq!(acl, Mat::from_row_slice(2, 2, &[1.0, 2.0, -2.0, -2.0]));
    }

    #[test]
    fn zero_controller_closed_loop() {
        let acl = closed_loop(&unit_plant(-1.0), &Controller::zeros(1, 1, 1)).unwrap();
        assert_eq!(acl, Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn plant_validation_names_the_invariant() {
        let err = Plant::new(s(1.0), s(1.0), s(1.0), s(1.0), s(0.0), s(1.0), s(1.0), TimeDomain::Continuous);
        assert_eq!(err, Err(Error::Invalid("V not positive definite".into())));
    }

    #[test]
    fn direction_vector_round_trip() {
        let dir = Direction {
            da: Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            db: Mat::from_row_slice(2, 1, &[5.0, 6.0]),
            dc: Mat::from_row_slice(1, 2, &[7.0, 8.0]),
        };
        let v = dir.to_vector();
        assert_eq!(v.as_slice(), &[7.0, 8.0, 5.0, 6.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(Direction::from_vector(v.as_slice(), 2, 1, 1).unwrap(), dir);
    }

    #[test]
    fn scalar_tangent_basis_commutes() {
        let k = Controller::new(s(-3.0), s(2.0), s(5.0)).unwrap();
        let tb = tangent_space(&k).unwrap();
        assert_eq!(tb.basis[0].da, s(0.0));
        assert_eq!(tb.basis[0].db, s(2.0));
        assert_eq!(tb.basis[0].dc, s(-5.0));
        assert_eq!(tb.complement.len(), 2);
    }

    #[test]
    fn companion_controller_has_identity_transform() {
        let (a, b) = companion(&[3.0, 4.0]);
        let k = Controller::new(a, b, Mat::from_row_slice(1, 2, &[1.0, 2.0])).unwrap();
        let (canon, t) = canonical_form(&k).unwrap();
        assert!((t - Mat::identity(2, 2)).norm() < 1e-12);
        assert!((canon.c() - k.c()).norm() < 1e-12);
    }

    #[test]
    fn transfer_pole_hit() {
        let k = Controller::new(s(-1.0), s(1.0), s(1.0)).unwrap();
        assert_eq!(transfer_eval(&k, Complex64::new(-1.0, 0.0)), Err(Error::PoleHit));
        let g = transfer_eval(&k, Complex64::new(0.0, 0.0)).unwrap();
        assert!((g[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
