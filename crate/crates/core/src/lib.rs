//! Landscape analysis of the output-feedback LQG cost: closed-loop cost,
//! gradient and Hessian, Riccati synthesis, stationary-point certificates,
//! connectivity of the stabilizing set, and gradient descent.

pub mod catalog;
pub mod connectivity;
pub mod cost;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod scenarios;
pub mod synthesis;
