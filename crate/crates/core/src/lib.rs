//! Fractal orbital-angular-momentum (OAM) link simulation with uniform circular
//! arrays.
//!
//! A six-element transmit UCA whose radius is much larger than the wavelength
//! produces a hexagonal lattice of OAM replicas on a distant receive plane. This
//! crate locates that lattice, evaluates the radiated field, builds the
//! free-space channel to a receive UCA parked on one replica, runs the IDFT/DFT
//! modem and reports per-mode SINR, sum capacity and BPSK bit error rate.
//!
//! Modules, bottom up:
//!
//! * [`geometry`]: points, UCA layouts and the fractal grid formulas.
//! * [`field`]: exact and paraxial field evaluation, two-layer arrays, rasters.
//! * [`channel`]: free-space channel matrices and the OAM-domain channel.
//! * [`modem`]: unit DFT pair, power allocation, AWGN, detection.
//! * [`metrics`]: SINR, capacity, `erfc`, analytic and Monte Carlo BER.
//! * [`harness`]: configuration, sweeps, file formats and the CLI.
//!
//! Data-parallel loops go through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is enabled (the default) and runs sequentially otherwise.

pub mod channel;
pub mod error;
pub mod exec;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod modem;

pub use error::{Error, Result};
pub use num_complex::Complex64;
