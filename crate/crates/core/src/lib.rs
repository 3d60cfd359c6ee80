//! Fractional Heisenberg dynamics by Bochner-Phillips subordination.
//!
//! A fractional power `-(-L)^α` of a Hamiltonian generator `L` generates the
//! averaged evolution `Φ^(α)_t = ∫ f_α(t, s) Φ_s ds`, where `f_α` is the
//! one-sided stable density. The crate evaluates that kernel
//! ([`kernel`]), averages arbitrary trajectories against it
//! ([`subordinator`]), applies the result to finite-dimensional quantum
//! systems in closed spectral form ([`spectral`]), and works out the
//! oscillator and free-particle models ([`models`], [`states`]). The
//! `frachq` binary is a thin wrapper over [`cli`].
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod kernel;
pub mod models;
pub mod quad;
pub mod spectral;
pub mod states;
pub mod subordinator;
