//! Link metrics: per-mode SINR, sum capacity and BPSK bit error rate.

mod erfc;
mod monte_carlo;

pub use erfc::{erf, erfc};
pub use monte_carlo::{ber_monte_carlo, LinkModel, MonteCarloBer, TRIALS_PER_BLOCK};

use serde::Serialize;

use crate::channel::OamChannel;
use crate::error::{Error, Result};
use crate::modem::PowerAllocation;

/// Modes averaged by [`ber_analytic`].
pub const BER_MODES: usize = 6;

/// γ_l = P_l|h′_l|² / (σ² + Σ_{k≠l} P_k|H′_{l,k}|²).
///
/// A mode with no signal power has γ = 0 even when the denominator vanishes; a
/// mode with signal but no noise or interference has γ = ∞.
pub fn sinr(oam: &OamChannel, p: &PowerAllocation, sigma2: f64) -> Result<Vec<f64>> {
    let n = oam.n_modes();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            context: "power allocation length",
            expected: n,
            actual: p.len(),
        });
    }
    let powers = p.powers();
    Ok((0..n)
        .map(|l| {
            let signal = powers[l] * oam.gain(l).norm_sqr();
            if signal == 0.0 {
                return 0.0;
            }
            let interference: f64 = (0..n)
                .filter(|&k| k != l)
                .map(|k| powers[k] * oam.entry(l, k).norm_sqr())
                .sum();
            signal / (sigma2 + interference)
        })
        .collect())
}

/// Σ_l log₂(1 + γ_l), bits/s/Hz.
pub fn capacity(gamma: &[f64]) -> f64 {
    gamma
        .iter()
        .map(|g| g.ln_1p() / std::f64::consts::LN_2)
        .sum()
}

/// Mode-averaged BPSK error probability (1/12)·Σ_{l=0}^{5} erfc(√γ_l).
pub fn ber_analytic(gamma: &[f64]) -> Result<f64> {
    if gamma.len() != BER_MODES {
        return Err(Error::ModeCountMismatch {
            expected: BER_MODES,
            actual: gamma.len(),
        });
    }
    Ok(gamma.iter().map(|g| erfc(g.sqrt())).sum::<f64>() / (2.0 * BER_MODES as f64))
}

/// Per-mode BPSK error probability (1/2)·erfc(√γ).
pub fn ber_bpsk(gamma: f64) -> f64 {
    0.5 * erfc(gamma.sqrt())
}

/// Everything reported for one link at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkResult {
    pub snr_db: f64,
    pub sinr: Vec<f64>,
    pub capacity: f64,
    pub ber_analytic: f64,
    pub ber_monte_carlo: Option<MonteCarloBer>,
}
