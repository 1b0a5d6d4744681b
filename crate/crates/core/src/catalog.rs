//! Named example problems with their reference controllers.
//!
//! Names: `ex3.1`, `ex3.2`, `ex3.3`, `exB.3`, `ex4.1`, `ex4.2`, `ex4.3`,
//! `ex4.4`, `ex4.5` (optionally `ex4.5(eps)`, default `eps = 0.5`), `doyle`
//! and `exD.1`. Lookup is case-insensitive.

use crate::error::{Error, Result};
use crate::linalg::{Mat, TimeDomain};
use crate::model::{Controller, Direction, Plant};

/// A named plant with controllers and perturbation directions attached to it.
#[derive(Debug, Clone)]
pub struct Example {
    pub name: String,
    pub plant: Plant,
    pub controllers: Vec<(String, Controller)>,
    pub directions: Vec<(String, Direction)>,
}

impl Example {
    /// Controller registered under `label`.
    pub fn controller(&self, label: &str) -> Result<&Controller> {
        self.controllers
            .iter()
            .find(|(l, _)| l.eq_ignore_ascii_case(label))
            .map(|(_, k)| k)
            .ok_or_else(|| {
                let known: Vec<&str> = self.controllers.iter().map(|(l, _)| l.as_str()).collect();
                Error::Invalid(format!("example {} has no controller {label:?} (known: {})", self.name, known.join(", ")))
            })
    }

    /// Direction registered under `label`.
    pub fn direction(&self, label: &str) -> Result<&Direction> {
        self.directions
            .iter()
            .find(|(l, _)| l.eq_ignore_ascii_case(label))
            .map(|(_, d)| d)
            .ok_or_else(|| Error::Invalid(format!("example {} has no direction {label:?}", self.name)))
    }
}

/// All example identifiers.
pub const NAMES: [&str; 11] = ["ex3.1", "ex3.2", "ex3.3", "exB.3", "ex4.1", "ex4.2", "ex4.3", "ex4.4", "ex4.5", "doyle", "exD.1"];

fn m(rows: usize, cols: usize, data: &[f64]) -> Mat {
    Mat::from_row_slice(rows, cols, data)
}

fn s(x: f64) -> Mat {
    Mat::from_element(1, 1, x)
}

fn scalar_plant(a: f64, domain: TimeDomain) -> Result<Plant> {
    Plant::new(s(a), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), s(1.0), domain)
}

fn scalar_controller(a: f64, b: f64, c: f64) -> Result<Controller> {
    Controller::new(s(a), s(b), s(c))
}

fn named(pairs: Vec<(&str, Controller)>) -> Vec<(String, Controller)> {
    pairs.into_iter().map(|(l, k)| (l.to_string(), k)).collect()
}

/// Scalar plant `A = B = C = 1` with unit weights and the two stabilizers
/// `(A_K, B_K, C_K) = (-2, -2, 2)` and `(-2, 2, -2)` whose average is not
/// stabilizing.
fn unstable_scalar(name: &str) -> Result<Example> {
    let k1 = scalar_controller(-2.0, -2.0, 2.0)?;
    let k2 = scalar_controller(-2.0, 2.0, -2.0)?;
    Ok(Example {
        name: name.into(),
        plant: scalar_plant(1.0, TimeDomain::Continuous)?,
        controllers: named(vec![
            ("k1", k1.clone()),
            ("k2", k2.clone()),
            ("k-", k1),
            ("k+", k2),
            ("midpoint", scalar_controller(-2.0, 0.0, 0.0)?),
            ("optimal", scalar_controller(-1.0 - 2.0 * 2f64.sqrt(), 1.0 + 2f64.sqrt(), -1.0 - 2f64.sqrt())?),
        ]),
        directions: vec![],
    })
}

/// Stable scalar plant `A = -1`, `B = C = 1`, unit weights.
fn stable_scalar() -> Result<Plant> {
    scalar_plant(-1.0, TimeDomain::Continuous)
}

/// Second-order plant whose stabilizing set has no first-order member.
fn ex_b3() -> Result<Example> {
    let plant = Plant::new(
        m(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        m(2, 1, &[0.0, 1.0]),
        m(1, 2, &[0.0, 1.0]),
        Mat::identity(2, 2),
        s(1.0),
        Mat::identity(2, 2),
        s(1.0),
        TimeDomain::Continuous,
    )?;
    let k1 = Controller::new(m(2, 2, &[0.0, 1.0, 0.125, -1.0]), m(2, 1, &[0.0, 1.0]), m(1, 2, &[-1.5, -2.0]))?;
    let k2 = Controller::new(m(2, 2, &[0.0, -1.0, -0.125, -1.0]), m(2, 1, &[0.0, 1.0]), m(1, 2, &[1.5, -2.0]))?;
    let proper = Controller::proper(s(1.0), s(-3.0), s(2.0), s(-2.0))?;
    Ok(Example {
        name: "exB.3".into(),
        plant,
        controllers: named(vec![("k1", k1), ("k2", k2), ("proper", proper)]),
        directions: vec![],
    })
}

/// Controller `K_eps = (A_K, B_K, C_K) = (0, -eps, eps)` on the stable scalar plant.
pub fn ex4_1_controller(eps: f64) -> Result<Controller> {
    scalar_controller(0.0, -eps, eps)
}

/// Stationary point `(A_K, B_K, C_K) = (a, 0, 0)` on the stable scalar plant.
pub fn ex4_2_controller(a: f64) -> Result<Controller> {
    scalar_controller(a, 0.0, 0.0)
}

fn ex4_3() -> Result<Example> {
    let plant = Plant::new(
        m(2, 2, &[-1.0, 0.0, 1.0, -2.0]),
        m(2, 1, &[-1.0, 1.0]),
        m(1, 2, &[-2.0, 11.0]),
        Mat::identity(2, 2),
        s(1.0),
        Mat::identity(2, 2),
        s(1.0),
        TimeDomain::Continuous,
    )?;
    let kstar = Controller::new(-Mat::identity(2, 2), Mat::zeros(2, 1), Mat::zeros(1, 2))?;
    let delta = Direction {
        da: m(2, 2, &[1.0, 3.0, 0.0, 0.0]),
        db: m(2, 1, &[-1.0, 3.0]),
        dc: m(1, 2, &[2.0, 0.5]),
    };
    Ok(Example {
        name: "ex4.3".into(),
        plant,
        controllers: named(vec![("kstar", kstar)]),
        directions: vec![("delta".into(), delta)],
    })
}

fn ex4_4() -> Result<Example> {
    let plant = Plant::new(
        m(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        m(2, 1, &[1.0, 0.0]),
        m(1, 2, &[1.0, -1.0]),
        m(2, 2, &[1.0, -1.0, -1.0, 16.0]),
        s(1.0),
        m(2, 2, &[4.0, 0.0, 0.0, 0.0]),
        s(1.0),
        TimeDomain::Continuous,
    )?;
    let optimal = Controller::new(m(2, 2, &[-3.0, 0.0, 5.0, -4.0]), m(2, 1, &[1.0, -4.0]), m(1, 2, &[-2.0, 0.0]))?;
    let k2 = Controller::new(m(2, 2, &[-3.0, 0.0, 0.0, -1.0]), m(2, 1, &[1.0, 0.0]), m(1, 2, &[-2.0, 0.0]))?;
    let gd1 = Controller::new(m(2, 2, &[0.0, 1.0, -14.0912, -7.6970]), m(2, 1, &[0.0, 1.0]), m(1, 2, &[-9.3941, -1.9999]))?;
    let gd2 = Controller::new(m(2, 2, &[0.0, 1.0, -17.2130, -8.7375]), m(2, 1, &[0.0, 1.0]), m(1, 2, &[-11.4753, -1.9999]))?;
    Ok(Example {
        name: "ex4.4".into(),
        plant,
        controllers: named(vec![("optimal", optimal.clone()), ("k1", optimal), ("k2", k2), ("gd1", gd1), ("gd2", gd2)]),
        directions: vec![],
    })
}

/// Plant with a well-conditioned appearance but an ill-conditioned Hessian
/// at its optimum as `eps -> 0`.
pub fn ex4_5(eps: f64) -> Result<Example> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Invalid(format!("ex4.5 needs eps > 0, got {eps}")));
    }
    let e1 = 1.0 + eps;
    let plant = Plant::new(
        m(2, 2, &[-1.5, 0.0, 0.0, -1.5 * e1]),
        m(2, 1, &[1.0, e1]),
        m(1, 2, &[1.0, 1.0]),
        m(2, 2, &[4.0, e1, e1, 4.0 * e1 * e1]),
        s(1.0),
        m(2, 2, &[4.0, 1.0, 1.0, 4.0]),
        s(1.0),
        TimeDomain::Continuous,
    )?;
    let kstar = Controller::new(m(2, 2, &[-3.5, -2.0, -2.0 * e1, -3.5 * e1]), m(2, 1, &[1.0, e1]), m(1, 2, &[-1.0, -1.0]))?;
    let delta0 = Direction { da: m(2, 2, &[-0.5, 0.5, 0.5, -0.5]), db: Mat::zeros(2, 1), dc: Mat::zeros(1, 2) };
    let delta1 = Direction { da: Mat::zeros(2, 2), db: m(2, 1, &[0.5, 0.5]), dc: m(1, 2, &[-0.5, -0.5]) };
    Ok(Example {
        name: format!("ex4.5({eps})"),
        plant,
        controllers: named(vec![("kstar", kstar)]),
        directions: vec![("delta0".into(), delta0), ("delta1".into(), delta1)],
    })
}

fn doyle() -> Result<Example> {
    let five = Mat::from_element(2, 2, 5.0);
    let plant = Plant::new(
        m(2, 2, &[1.0, 1.0, 0.0, 1.0]),
        m(2, 1, &[0.0, 1.0]),
        m(1, 2, &[1.0, 0.0]),
        five.clone(),
        s(1.0),
        five,
        s(1.0),
        TimeDomain::Continuous,
    )?;
    let optimal = Controller::new(m(2, 2, &[-4.0, 1.0, -10.0, -4.0]), m(2, 1, &[5.0, 5.0]), m(1, 2, &[-5.0, -5.0]))?;
    let canonical = Controller::new(m(2, 2, &[0.0, 1.0, -26.0, -8.0]), m(2, 1, &[0.0, 1.0]), m(1, 2, &[25.0, -50.0]))?;
    Ok(Example {
        name: "doyle".into(),
        plant,
        controllers: named(vec![("optimal", optimal), ("canonical", canonical)]),
        directions: vec![],
    })
}

fn ex_d1() -> Result<Example> {
    Ok(Example {
        name: "exD.1".into(),
        plant: scalar_plant(1.1, TimeDomain::Discrete)?,
        controllers: named(vec![
            ("k1", scalar_controller(0.0, -0.5, 0.5)?),
            ("k2", scalar_controller(0.0, 0.5, -0.5)?),
            ("k-", scalar_controller(0.0, -0.5, 0.5)?),
            ("k+", scalar_controller(0.0, 0.5, -0.5)?),
            ("midpoint", scalar_controller(0.0, 0.0, 0.0)?),
        ]),
        directions: vec![],
    })
}

/// Splits `ex4.5(0.1)` into `("ex4.5", Some(0.1))`.
fn parse_name(name: &str) -> Result<(String, Option<f64>)> {
    let name = name.trim();
    match name.split_once('(') {
        None => Ok((name.to_ascii_lowercase(), None)),
        Some((base, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Invalid(format!("malformed example name {name:?}")))?;
            let value: f64 = arg
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("example parameter {arg:?} is not a number")))?;
            Ok((base.trim().to_ascii_lowercase(), Some(value)))
        }
    }
}

/// Expands a named example.
pub fn example(name: &str) -> Result<Example> {
    let (base, param) = parse_name(name)?;
    if param.is_some() && base != "ex4.5" {
        return Err(Error::Invalid(format!("example {base} takes no parameter")));
    }
    match base.as_str() {
        "ex3.1" | "ex3.2" => unstable_scalar(&base),
        "ex3.3" => Ok(Example {
            name: base.clone(),
            plant: stable_scalar()?,
            controllers: named(vec![
                ("k+", scalar_controller(-1.0, 1.0, -1.0)?),
                ("k-", scalar_controller(-1.0, -1.0, 1.0)?),
                ("optimal", scalar_controller(1.0 - 2.0 * 2f64.sqrt(), -1.0 + 2f64.sqrt(), 1.0 - 2f64.sqrt())?),
            ]),
            directions: vec![],
        }),
        "exb.3" => ex_b3(),
        "ex4.1" => Ok(Example {
            name: base.clone(),
            plant: stable_scalar()?,
            controllers: named(vec![("k", ex4_1_controller(0.5)?)]),
            directions: vec![],
        }),
        "ex4.2" => Ok(Example {
            name: base.clone(),
            plant: stable_scalar()?,
            controllers: named(vec![("kstar", ex4_2_controller(-1.0)?)]),
            directions: vec![],
        }),
        "ex4.3" => ex4_3(),
        "ex4.4" => ex4_4(),
        "ex4.5" => ex4_5(param.unwrap_or(0.5)),
        "doyle" => doyle(),
        "exd.1" => ex_d1(),
        _ => Err(Error::Invalid(format!("unknown example {name:?} (known: {})", NAMES.join(", ")))),
    }
}
