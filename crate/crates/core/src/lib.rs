//! Entropic optimal transport, Schrödinger bridges as mixtures of Brownian
//! bridges, and the large-deviation rate functionals that govern them in the
//! small-noise limit.
//!
//! The crate is organised bottom-up:
//!
//! * [`measures`] – discrete measures and the quadratic cost `|x - y|^2 / 2`.
//! * [`eot`] – log-domain Sinkhorn for the entropic problem, plans and potentials.
//! * [`ot_dual`] – exact zero-noise transport with Kantorovich potentials.
//! * [`paths`] – piecewise-linear paths, Brownian and Schrödinger bridge sampling.
//! * [`rates`] – rate functionals, Hopf-Lax propagation and rate infima over events.
//! * [`dynamics`] – the Föllmer drift, Euler–Maruyama, Langevin reweighting.
//! * [`ldp`] – Monte Carlo tube probabilities, slope extrapolation, experiment runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eot;
pub mod error;
pub mod ldp;
pub mod measures;
pub mod ot_dual;
pub mod paths;
pub mod rates;
pub mod rng;

pub use error::{Error, Result};
pub use measures::{cost_matrix, quad_cost, CostMatrix, DiscreteMeasure};
