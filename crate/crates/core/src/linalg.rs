//! Dense matrix-equation kernels: stability tests, Lyapunov and algebraic
//! Riccati solvers, and controllability/observability rank tests.
//!
//! Everything works on `DMatrix<f64>`. Sizes of interest are small (closed
//! loops of a few dozen states at most), so the solvers favour simple dense
//! algorithms with explicit residual checks over blocked or sparse schemes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real dense matrix used throughout the crate.
pub type Mat = DMatrix<f64>;
type CMat = DMatrix<Complex64>;

/// Default relative tolerance for Lyapunov and Riccati residuals.
pub const RTOL: f64 = 1e-9;
/// Default relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Continuous-time (`dx/dt = Ax`) or discrete-time (`x[t+1] = Ax[t]`) dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

/// Eigenvalue-based stability verdict for a square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Largest real part (continuous) or spectral radius minus one (discrete).
    pub margin: f64,
    /// `margin < 0`.
    pub stable: bool,
    /// Eigenvalues sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
}

fn check_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Iteration budget per eigenvalue for the shifted QR iteration.
const SCHUR_ITERS_PER_EIGENVALUE: usize = 100;

/// Householder reflection `I - 2 v v^T / |v|^2` with a deterministic,
/// attempt-dependent `v` whose entries are pairwise distinct.
fn scrambling_reflection(n: usize, attempt: usize) -> Mat {
    let v = DVector::from_fn(n, |i, _| 1.0 + ((i + 1) * (2 * attempt + 3)) as f64 * 0.618_033_988_749_895 % 1.0);
    Mat::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared())
}

/// Complex Schur factorization `m = U T U^*` with `T` upper triangular.
///
/// The shifted QR iteration deflates a subdiagonal entry once it drops below
/// `eps` times the neighbouring diagonal. Near-repeated eigenvalues can leave
/// such entries hovering just above `eps = ulp`, so the deflation threshold
/// is relaxed in steps up to `64 ulp`, which keeps the backward error at the
/// rounding level. Remaining stalls come from exact symmetries and are
/// retried on `H m H` for a few fixed reflections `H`. If every attempt
/// stalls the error is reported instead of iterating forever.
pub(crate) fn complex_schur(m: &Mat) -> Result<(CMat, CMat)> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let budget = SCHUR_ITERS_PER_EIGENVALUE * n;
    for ulps in [1.0, 4.0, 16.0, 64.0] {
        if let Some(schur) = nalgebra::Schur::try_new(to_complex(m), ulps * f64::EPSILON, budget) {
            return Ok(schur.unpack());
        }
    }
    for attempt in 0..4 {
        let h = scrambling_reflection(n, attempt);
        if let Some(schur) = nalgebra::Schur::try_new(to_complex(&(&h * m * &h)), 64.0 * f64::EPSILON, budget) {
            let (u, t) = schur.unpack();
            return Ok((to_complex(&h) * u, t));
        }
    }
    Err(Error::IllConditioned("Schur iteration did not converge".into()))
}

/// Returns `(X + X^T) / 2`.
pub fn symmetrize(x: &Mat) -> Mat {
    (x + x.transpose()) * 0.5
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Assembles `[[a, b], [c, d]]`, checking that the blocks line up.
pub fn block2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<Mat> {
    if a.nrows() != b.nrows()
        || c.nrows() != d.nrows()
        || a.ncols() != c.ncols()
        || b.ncols() != d.ncols()
    {
        return Err(Error::DimensionMismatch(format!(
            "blocks {:?} {:?} / {:?} {:?} do not tile",
            a.shape(),
            b.shape(),
            c.shape(),
            d.shape()
        )));
    }
    let (r0, c0) = a.shape();
    let mut out = Mat::zeros(r0 + c.nrows(), c0 + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, c0), b.shape()).copy_from(b);
    out.view_mut((r0, 0), c.shape()).copy_from(c);
    out.view_mut((r0, c0), d.shape()).copy_from(d);
    Ok(out)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Inverse through LU, failing with [`Error::IllConditioned`] when singular.
pub fn inverse(m: &Mat) -> Result<Mat> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    m.clone()
        .lu()
        .try_inverse()
        .filter(|inv| inv.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::IllConditioned("singular matrix in inverse".into()))
}

/// Reciprocal 2-norm condition number `σ_min / σ_max` (1 for empty input).
pub fn rcond(m: &Mat) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Cholesky-based positive definiteness test of the symmetric part.
pub fn is_positive_definite(m: &Mat) -> bool {
    m.nrows() == m.ncols() && symmetrize(m).cholesky().is_some()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &Mat) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    symmetrize(m).symmetric_eigenvalues().min()
}

/// Largest eigenvalue of the symmetric part of `m`.
pub fn max_sym_eigenvalue(m: &Mat) -> f64 {
    if m.is_empty() {
        return f64::NEG_INFINITY;
    }
    symmetrize(m).symmetric_eigenvalues().max()
}

/// Eigenvalues sorted by (real, imaginary) part.
pub fn eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let t = complex_schur(m)?.1;
    let mut eig: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    sort_complex(&mut eig);
    Ok(eig)
}

pub(crate) fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn margin_of(eig: &[Complex64], dom: TimeDomain) -> f64 {
    match dom {
        TimeDomain::Continuous => eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        TimeDomain::Discrete => eig.iter().map(|z| z.norm()).fold(f64::NEG_INFINITY, f64::max) - 1.0,
    }
}

/// Stability of `m` in the given time domain.
///
/// An empty matrix is reported stable with margin `-inf`.
pub fn stability(m: &Mat, dom: TimeDomain) -> Result<StabilityReport> {
    let eigenvalues = eigenvalues(m)?;
    let margin = margin_of(&eigenvalues, dom);
    Ok(StabilityReport { margin, stable: margin < 0.0, eigenvalues })
}

/// Residual of the Lyapunov equation: `MX + XM^T + S` (continuous) or
/// `MXM^T + S - X` (discrete).
pub fn lyapunov_residual(m: &Mat, x: &Mat, s: &Mat, dom: TimeDomain) -> Mat {
    match dom {
        TimeDomain::Continuous => m * x + x * m.transpose() + s,
        TimeDomain::Discrete => m * x * m.transpose() + s - x,
    }
}

/// Factored Lyapunov operator for a fixed stable coefficient matrix.
///
/// Solves `MX + XM^T + S = 0` (continuous) or `X = MXM^T + S` (discrete) for
/// many right-hand sides. The complex Schur form of `M` is computed once and
/// each solve is a triangular back substitution followed by residual-driven
/// refinement. When refinement cannot meet the tolerance the solver falls back
/// to the dense Kronecker system.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    m: Mat,
    dom: TimeDomain,
    u: CMat,
    t: CMat,
    rtol: f64,
}

impl LyapunovSolver {
    /// Factors `m`, failing with [`Error::UnstableCoefficient`] when `m` is
    /// not stable in `dom`.
    pub fn new(m: &Mat, dom: TimeDomain) -> Result<Self> {
        Self::with_tolerance(m, dom, RTOL)
    }

    pub fn with_tolerance(m: &Mat, dom: TimeDomain, rtol: f64) -> Result<Self> {
        let n = check_square(m)?;
        let (u, t) = complex_schur(m)?;
        let eig: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
        let margin = margin_of(&eig, dom);
        if n > 0 && !(margin < 0.0) {
            return Err(Error::UnstableCoefficient { margin });
        }
        Ok(Self { m: m.clone(), dom, u, t, rtol })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn domain(&self) -> TimeDomain {
        self.dom
    }

    /// Solves for `X` given the constant term `s`; the result is symmetric
    /// whenever `s` is.
    pub fn solve(&self, s: &Mat) -> Result<Mat> {
        let n = self.dim();
        if s.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Lyapunov constant term is {:?}, expected ({n}, {n})",
                s.shape()
            )));
        }
        if n == 0 {
            return Ok(Mat::zeros(0, 0));
        }
        let symmetric = (s - s.transpose()).norm() <= 1e-14 * (1.0 + s.norm());
        let finish = |x: Mat| if symmetric { symmetrize(&x) } else { x };

        let mut x = finish(self.triangular_solve(s));
        let mut res = lyapunov_residual(&self.m, &x, s, self.dom);
        for _ in 0..3 {
            if self.accept(&res, &x) {
                return Ok(x);
            }
            // residual correction: solve the same equation with the residual as constant term
            let dx = finish(self.triangular_solve(&res));
            let candidate = &x + dx;
            let cand_res = lyapunov_residual(&self.m, &candidate, s, self.dom);
            if cand_res.norm() >= res.norm() {
                break;
            }
            x = candidate;
            res = cand_res;
        }
        if self.accept(&res, &x) {
            return Ok(x);
        }
        let xk = finish(solve_lyapunov_kronecker(&self.m, s, self.dom)?);
        let rk = lyapunov_residual(&self.m, &xk, s, self.dom);
        if self.accept(&rk, &xk) {
            Ok(xk)
        } else {
            Err(Error::IllConditioned(format!(
                "Lyapunov residual {:.3e} exceeds tolerance for |X| = {:.3e}",
                rk.norm(),
                xk.norm()
            )))
        }
    }

    fn accept(&self, res: &Mat, x: &Mat) -> bool {
        let r = res.norm();
        r.is_finite() && r <= self.rtol * (1.0 + x.norm())
    }

    /// One pass of the Schur-based solve without refinement.
    fn triangular_solve(&self, s: &Mat) -> Mat {
        let n = self.dim();
        let t = &self.t;
        let st = self.u.adjoint() * to_complex(s) * &self.u;
        let mut x = CMat::zeros(n, n);
        match self.dom {
            TimeDomain::Continuous => {
                // T X + X T^H + S = 0, solved bottom-up and right-to-left
                for i in (0..n).rev() {
                    for j in (0..n).rev() {
                        let mut acc = -st[(i, j)];
                        for k in i + 1..n {
                            acc -= t[(i, k)] * x[(k, j)];
                        }
                        for l in j + 1..n {
                            acc -= x[(i, l)] * t[(j, l)].conj();
                        }
                        x[(i, j)] = acc / (t[(i, i)] + t[(j, j)].conj());
                    }
                }
            }
            TimeDomain::Discrete => {
                // X = T X T^H + S; w holds rows of X T^H once they are final
                let mut w = CMat::zeros(n, n);
                for i in (0..n).rev() {
                    for j in (0..n).rev() {
                        let mut acc = st[(i, j)];
                        for k in i + 1..n {
                            acc += t[(i, k)] * w[(k, j)];
                        }
                        let mut tail = Complex64::new(0.0, 0.0);
                        for l in j + 1..n {
                            tail += x[(i, l)] * t[(j, l)].conj();
                        }
                        acc += t[(i, i)] * tail;
                        x[(i, j)] = acc / (Complex64::new(1.0, 0.0) - t[(i, i)] * t[(j, j)].conj());
                    }
                    for j in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for l in j..n {
                            acc += x[(i, l)] * t[(j, l)].conj();
                        }
                        w[(i, j)] = acc;
                    }
                }
            }
        }
        (&self.u * x * self.u.adjoint()).map(|z| z.re)
    }
}

/// Solves `MX + XM^T + S = 0` (continuous) or `X = MXM^T + S` (discrete).
///
/// The output is symmetrized when `s` is symmetric and satisfies
/// `|residual| <= RTOL * (1 + |X|)` in the Frobenius norm.
pub fn solve_lyapunov(m: &Mat, s: &Mat, dom: TimeDomain) -> Result<Mat> {
    LyapunovSolver::new(m, dom)?.solve(s)
}

/// Reference Lyapunov solver: forms the `n^2 x n^2` Kronecker system and solves
/// it with a dense LU factorization.
///
/// Uses column-major vectorization, so `vec(MX) = (I ⊗ M) vec X` and
/// `vec(XM^T) = (M ⊗ I) vec X`.
pub fn solve_lyapunov_kronecker(m: &Mat, s: &Mat, dom: TimeDomain) -> Result<Mat> {
    let n = check_square(m)?;
    if s.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Lyapunov constant term shape".into()));
    }
    let margin = stability(m, dom)?.margin;
    if n > 0 && !(margin < 0.0) {
        return Err(Error::UnstableCoefficient { margin });
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let eye = Mat::identity(n, n);
    let (op, rhs) = match dom {
        TimeDomain::Continuous => (kron(&eye, m) + kron(m, &eye), -DVector::from_column_slice(s.as_slice())),
        TimeDomain::Discrete => (
            Mat::identity(n * n, n * n) - kron(m, m),
            DVector::from_column_slice(s.as_slice()),
        ),
    };
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned("singular Kronecker system".into()))?;
    Ok(Mat::from_column_slice(n, n, sol.as_slice()))
}

/// Stabilizing solution of an algebraic Riccati equation and its gain.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    /// Symmetric positive semidefinite stabilizing solution.
    pub s: Mat,
    /// Feedback gain; `A - BK` is stable.
    pub k: Mat,
}

/// Residual of the control Riccati equation for a candidate `s`.
///
/// Continuous: `A^T S + S A - S B R^{-1} B^T S + Q`.
/// Discrete: `A^T S A - S - A^T S B (B^T S B + R)^{-1} B^T S A + Q`.
pub fn riccati_residual(a: &Mat, b: &Mat, r: &Mat, q: &Mat, s: &Mat, dom: TimeDomain) -> Result<Mat> {
    Ok(match dom {
        TimeDomain::Continuous => {
            let k = inverse(r)? * b.transpose() * s;
            a.transpose() * s + s * a - s * b * k + q
        }
        TimeDomain::Discrete => {
            let k = riccati_gain(a, b, r, s, dom)?;
            a.transpose() * s * a - s - a.transpose() * s * b * k + q
        }
    })
}

/// Gain associated with a Riccati solution: `R^{-1} B^T S` (continuous) or
/// `(B^T S B + R)^{-1} B^T S A` (discrete).
pub fn riccati_gain(a: &Mat, b: &Mat, r: &Mat, s: &Mat, dom: TimeDomain) -> Result<Mat> {
    Ok(match dom {
        TimeDomain::Continuous => inverse(r)? * b.transpose() * s,
        TimeDomain::Discrete => inverse(&(b.transpose() * s * b + r))? * b.transpose() * s * a,
    })
}

fn is_unstable_mode(z: Complex64, dom: TimeDomain, tol: f64) -> bool {
    match dom {
        TimeDomain::Continuous => z.re >= -tol,
        TimeDomain::Discrete => z.norm() >= 1.0 - tol,
    }
}

/// Popov-Belevitch-Hautus test: every mode of `A` that is not stable in `dom`
/// must be controllable through `B`.
pub fn is_stabilizable(a: &Mat, b: &Mat, dom: TimeDomain) -> Result<bool> {
    let n = check_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch("B rows must match A".into()));
    }
    let scale = 1.0 + a.norm() + b.norm();
    for z in eigenvalues(a)? {
        if !is_unstable_mode(z, dom, 1e-10 * scale) {
            continue;
        }
        let mut pbh = CMat::zeros(n, n + b.ncols());
        for i in 0..n {
            for j in 0..n {
                pbh[(i, j)] = if i == j { z } else { Complex64::new(0.0, 0.0) } - a[(i, j)];
            }
            for j in 0..b.ncols() {
                pbh[(i, n + j)] = Complex64::new(b[(i, j)], 0.0);
            }
        }
        let sv = pbh.singular_values();
        if sv.min() <= RANK_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Stabilizing solution of the control algebraic Riccati equation.
///
/// Continuous: `A^T S + S A - S B R^{-1} B^T S + Q = 0`, gain `K = R^{-1} B^T S`.
/// Discrete: `S = A^T S A - A^T S B (B^T S B + R)^{-1} B^T S A + Q`, gain
/// `K = (B^T S B + R)^{-1} B^T S A`.
///
/// The continuous equation is solved through the matrix sign function of the
/// Hamiltonian (its stable invariant subspace), the discrete one through the
/// structure-preserving doubling iteration. Both are polished by Newton
/// steps (Kleinman and Hewer iterations) on the residual. The filter equation
/// follows by duality: `solve_care(A^T, C^T, V, W)`.
pub fn solve_care(a: &Mat, b: &Mat, r: &Mat, q: &Mat, dom: TimeDomain) -> Result<RiccatiSolution> {
    let n = check_square(a)?;
    let m = b.ncols();
    if b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "Riccati data A {:?}, B {:?}, R {:?}, Q {:?}",
            a.shape(),
            b.shape(),
            r.shape(),
            q.shape()
        )));
    }
    if !is_positive_definite(r) {
        return Err(Error::Invalid("R must be positive definite".into()));
    }
    if !is_stabilizable(a, b, dom)? {
        return Err(Error::NotStabilizable);
    }
    let initial = match dom {
        TimeDomain::Continuous => care_sign(a, b, r, q)?,
        TimeDomain::Discrete => dare_doubling(a, b, r, q)?,
    };
    let s = newton_refine(a, b, r, q, symmetrize(&initial), dom);
    let k = riccati_gain(a, b, r, &s, dom)?;
    let closed = a - b * &k;
    let report = stability(&closed, dom)?;
    if !report.stable {
        return Err(Error::NoStabilizingSolution(format!(
            "A - BK has margin {:.3e}",
            report.margin
        )));
    }
    let res = riccati_residual(a, b, r, q, &s, dom)?.norm();
    if !(res <= RTOL * (1.0 + s.norm())) {
        return Err(Error::NoStabilizingSolution(format!("Riccati residual {res:.3e}")));
    }
    if min_sym_eigenvalue(&s) < -1e-9 * (1.0 + s.norm()) {
        return Err(Error::NoStabilizingSolution("solution is not positive semidefinite".into()));
    }
    Ok(RiccatiSolution { s, k })
}

fn care_sign(a: &Mat, b: &Mat, r: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let g = b * inverse(r)? * b.transpose();
    let mut z = block2(a, &(-&g), &(-q), &(-a.transpose()))?;
    let fail = || Error::NoStabilizingSolution("Hamiltonian has eigenvalues on the imaginary axis".into());
    for _ in 0..100 {
        let lu = z.clone().lu();
        let log_det: f64 = (0..2 * n).map(|i| lu.u()[(i, i)].abs().ln()).sum();
        if !log_det.is_finite() {
            return Err(fail());
        }
        let zi = lu.try_inverse().ok_or_else(fail)?;
        let c = (log_det / (2 * n) as f64).exp();
        let next = (&z / c + zi * c) * 0.5;
        let delta = (&next - &z).norm();
        z = next;
        if delta <= 1e-13 * z.norm() {
            break;
        }
    }
    // stable invariant subspace [I; S] spans the null space of sign(H) + I
    let eye = Mat::identity(n, n);
    let w11 = z.view((0, 0), (n, n)).clone_owned();
    let w12 = z.view((0, n), (n, n)).clone_owned();
    let w21 = z.view((n, 0), (n, n)).clone_owned();
    let w22 = z.view((n, n), (n, n)).clone_owned();
    let lhs = block2(&w12, &Mat::zeros(n, 0), &(w22 + &eye), &Mat::zeros(n, 0))?;
    let rhs = -block2(&(w11 + &eye), &Mat::zeros(n, 0), &w21, &Mat::zeros(n, 0))?;
    let s = lhs
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::NoStabilizingSolution(e.to_string()))?;
    Ok(s)
}

fn dare_doubling(a: &Mat, b: &Mat, r: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let eye = Mat::identity(n, n);
    let mut ak = a.clone();
    let mut gk = b * inverse(r)? * b.transpose();
    let mut hk = q.clone();
    for _ in 0..200 {
        let w = inverse(&(&eye + &gk * &hk))
            .map_err(|_| Error::NoStabilizingSolution("doubling iteration broke down".into()))?;
        let a_next = &ak * &w * &ak;
        let g_next = &gk + &ak * &w * &gk * ak.transpose();
        let h_next = &hk + ak.transpose() * &hk * &w * &ak;
        let delta = (&h_next - &hk).norm();
        ak = a_next;
        gk = symmetrize(&g_next);
        hk = symmetrize(&h_next);
        if !hk.iter().all(|x| x.is_finite()) {
            return Err(Error::NoStabilizingSolution("doubling iteration diverged".into()));
        }
        if delta <= 1e-14 * (1.0 + hk.norm()) {
            break;
        }
    }
    Ok(hk)
}

/// Newton refinement of a Riccati solution: solve the closed-loop Lyapunov
/// equation for the current gain and keep the update while the residual
/// keeps falling.
fn newton_refine(a: &Mat, b: &Mat, r: &Mat, q: &Mat, mut s: Mat, dom: TimeDomain) -> Mat {
    let mut res = match riccati_residual(a, b, r, q, &s, dom) {
        Ok(res) => res.norm(),
        Err(_) => return s,
    };
    for _ in 0..20 {
        if res <= 1e-3 * RTOL * (1.0 + s.norm()) {
            break;
        }
        let Ok(k) = riccati_gain(a, b, r, &s, dom) else { break };
        let closed = a - b * &k;
        let constant = q + k.transpose() * r * &k;
        // both domains: the Lyapunov equation of the transposed closed loop
        let Ok(next) = solve_lyapunov(&closed.transpose(), &constant, dom) else { break };
        let Ok(next_res) = riccati_residual(a, b, r, q, &next, dom) else { break };
        let next_res = next_res.norm();
        if !(next_res < res) {
            break;
        }
        s = next;
        res = next_res;
    }
    s
}

/// Controllability matrix `[B, AB, ..., A^{n-1} B]`.
pub fn ctrb(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = check_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch("B rows must match A".into()));
    }
    let m = b.ncols();
    let mut out = Mat::zeros(n, n * m);
    let mut blk = b.clone();
    for i in 0..n {
        out.view_mut((0, i * m), (n, m)).copy_from(&blk);
        blk = a * blk;
    }
    Ok(out)
}

/// Observability matrix `[C; CA; ...; CA^{n-1}]`.
pub fn obsv(c: &Mat, a: &Mat) -> Result<Mat> {
    if c.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch("C columns must match A".into()));
    }
    Ok(ctrb(&a.transpose(), &c.transpose())?.transpose())
}

/// Outcome of the controllability/observability rank tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub controllable: bool,
    pub observable: bool,
    pub minimal: bool,
    /// `σ_n / σ_1` of the controllability and observability matrices.
    pub min_singular_values: (f64, f64),
}

fn full_rank_margin(m: &Mat, n: usize, rank_tol: f64) -> (bool, f64) {
    if n == 0 {
        return (true, f64::INFINITY);
    }
    if m.ncols() < n || m.nrows() < n {
        return (false, 0.0);
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let ratio = if sv[0] > 0.0 { sv[n - 1] / sv[0] } else { 0.0 };
    (ratio > rank_tol, ratio)
}

/// Rank tests on the controllability and observability matrices of
/// `(A, B, C)`; a rank is full when the n-th singular value exceeds
/// `rank_tol * σ_max`.
pub fn minimality(a: &Mat, b: &Mat, c: &Mat, rank_tol: f64) -> Result<MinimalityReport> {
    let n = check_square(a)?;
    let (controllable, sc) = full_rank_margin(&ctrb(a, b)?, n, rank_tol);
    let (observable, so) = full_rank_margin(&obsv(c, a)?, n, rank_tol);
    Ok(MinimalityReport {
        controllable,
        observable,
        minimal: controllable && observable,
        min_singular_values: (sc, so),
    })
}
