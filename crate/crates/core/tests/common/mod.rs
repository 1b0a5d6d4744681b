//! Random problem instances shared by the integration tests.
#![allow(dead_code)]

use lqg_landscape::linalg::{minimality, Mat, TimeDomain};
use lqg_landscape::cost::lqg_cost;
use lqg_landscape::model::{is_stabilizing, Controller, Direction, Plant};
use lqg_landscape::synthesis::riccati_controller;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `G G^T + 0.1 I`, comfortably positive definite.
pub fn spd(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = gaussian(rng, n, n);
    &g * g.transpose() / n as f64 + Mat::identity(n, n) * 0.1
}

pub fn domain(discrete: bool) -> TimeDomain {
    if discrete {
        TimeDomain::Discrete
    } else {
        TimeDomain::Continuous
    }
}

/// Random stable matrix: shifted left of the imaginary axis, or scaled into
/// the unit disc.
pub fn stable_matrix(rng: &mut ChaCha8Rng, n: usize, dom: TimeDomain) -> Mat {
    let m = gaussian(rng, n, n);
    let eig = lqg_landscape::linalg::eigenvalues(&m).unwrap();
    match dom {
        TimeDomain::Continuous => {
            let top = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            m - Mat::identity(n, n) * (top + 0.2 + rng.random::<f64>())
        }
        TimeDomain::Discrete => {
            let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-3);
            m * (rng.random_range(0.3..0.95) / rho)
        }
    }
}

/// Relative smallest singular value required of the controllability and
/// observability matrices of generated plants. Nearly uncontrollable plants
/// have huge costs and ill-conditioned lifts, which no finite-difference
/// oracle can check at the tolerances used here.
pub const PLANT_RANK_MARGIN: f64 = 0.05;

/// Largest optimal cost accepted for generated plants.
pub const MAX_OPTIMAL_COST: f64 = 1e3;

/// Random plant with `n <= 3` states, one or two inputs and outputs,
/// positive definite weights, `(A, B)` and `(C, A)` at least
/// [`PLANT_RANK_MARGIN`] away from losing rank, and optimal cost at most
/// [`MAX_OPTIMAL_COST`].
pub fn plant(rng: &mut ChaCha8Rng, discrete: bool) -> Plant {
    loop {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=2);
        let p = rng.random_range(1..=2);
        let mut a = gaussian(rng, n, n);
        if discrete {
            let rho = lqg_landscape::linalg::eigenvalues(&a).unwrap().iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-3);
            a *= rng.random_range(0.5..1.3) / rho;
        }
        let b = gaussian(rng, n, m);
        let c = gaussian(rng, p, n);
        let margins = minimality(&a, &b, &c, PLANT_RANK_MARGIN).expect("shapes agree");
        if !margins.minimal {
            continue;
        }
        let (w, v, q, r) = (spd(rng, n), spd(rng, p), spd(rng, n), spd(rng, m));
        let plant = Plant::new(a, b, c, w, v, q, r, domain(discrete)).expect("random plant is valid");
        if riccati_controller(&plant).is_ok_and(|opt| opt.j <= MAX_OPTIMAL_COST) {
            return plant;
        }
    }
}

pub fn direction(rng: &mut ChaCha8Rng, q: usize, m: usize, p: usize) -> Direction {
    let d = Direction { da: gaussian(rng, q, q), db: gaussian(rng, q, p), dc: gaussian(rng, m, q) };
    let n = d.norm();
    d.scaled(1.0 / n)
}

/// Closed-loop stability margin demanded of generated controllers, so that
/// finite differences stay well inside the stabilizing set. Plants whose
/// optimum is itself closer to the boundary get half the optimum's margin.
pub const MARGIN: f64 = 0.05;

/// Stabilizing full-order controller away from the optimum: the Riccati
/// controller moved along random directions until the move keeps the loop
/// stable with margin [`MARGIN`] and the cost below twice the optimum.
/// Panics when no such controller turns up.
pub fn stabilizing_controller(rng: &mut ChaCha8Rng, plant: &Plant) -> Controller {
    let opt = riccati_controller(plant).expect("random plant admits an optimum");
    let k = opt.controller;
    let margin = MARGIN.min(-0.5 * is_stabilizing(plant, &k).expect("optimum is stabilizing").margin);
    let scale = 0.3 * (1.0 + k.as_direction().norm());
    for attempt in 0..60 {
        let d = direction(rng, k.order(), k.outputs(), k.inputs());
        let t = scale * 0.8f64.powi(attempt);
        let cand = k.step(&d, t).expect("shapes agree");
        let inside = is_stabilizing(plant, &cand).map(|r| r.margin < -margin).unwrap_or(false);
        if inside && lqg_cost(plant, &cand).map(|ev| ev.j <= 2.0 * opt.j).unwrap_or(false) {
            return cand;
        }
    }
    panic!("no suboptimal stabilizing controller found near the optimum");
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
