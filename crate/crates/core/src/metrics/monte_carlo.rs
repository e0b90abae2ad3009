//! End-to-end BPSK bit error simulation.

use rand::Rng;
use serde::Serialize;

use crate::channel::{to_oam_domain, ChannelMatrix};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::modem::{
    demodulate, detect, propagate_with_rng, stream_rng, transmit, Constellation, PowerAllocation,
    SymbolVector, UnitDftPair,
};

/// Trials sharing one RNG stream. Stream ids are block indices, so the draw for
/// a given trial never depends on how blocks are scheduled.
pub const TRIALS_PER_BLOCK: u64 = 1024;

/// A link as seen by the simulator.
#[derive(Debug, Clone)]
pub struct LinkModel {
    pub channel: ChannelMatrix,
    pub pair: UnitDftPair,
    pub powers: PowerAllocation,
    pub noise_variance: f64,
}

impl LinkModel {
    pub fn new(channel: ChannelMatrix, powers: PowerAllocation, noise_variance: f64) -> Self {
        let pair = UnitDftPair::new(channel.n_t(), channel.n_r());
        Self {
            channel,
            pair,
            powers,
            noise_variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloBer {
    pub trials: u64,
    pub errors: u64,
    pub bits: u64,
    pub per_mode_errors: Vec<u64>,
    pub probability: f64,
    pub std_error: f64,
}

impl MonteCarloBer {
    /// Error rate of mode `l` alone.
    pub fn mode_probability(&self, l: usize) -> f64 {
        self.per_mode_errors[l] as f64 / self.trials as f64
    }
}

/// Runs `trials` random BPSK vectors through transmit, propagate, demodulate and
/// detect, counting bit errors on active modes.
pub fn ber_monte_carlo(
    link: &LinkModel,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<MonteCarloBer> {
    if trials == 0 {
        return Err(Error::NonPositiveInput {
            name: "trials",
            value: 0.0,
        });
    }
    if !link.noise_variance.is_finite() || link.noise_variance < 0.0 {
        return Err(Error::NonPositiveInput {
            name: "noise variance",
            value: link.noise_variance,
        });
    }
    let oam = to_oam_domain(&link.channel, &link.pair)?;
    let n = oam.n_modes();
    if link.powers.len() != n {
        return Err(Error::DimensionMismatch {
            context: "power allocation length",
            expected: n,
            actual: link.powers.len(),
        });
    }
    let active: Vec<usize> = (0..n).filter(|&l| link.powers.is_active(l)).collect();
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);

    let counts = exec.try_map_indexed(blocks as usize, |b| -> Result<Vec<u64>> {
        let b = b as u64;
        let mut rng = stream_rng(seed, b);
        let len = TRIALS_PER_BLOCK.min(trials - b * TRIALS_PER_BLOCK);
        let mut errors = vec![0u64; n];
        let mut bits = vec![true; n];
        for _ in 0..len {
            for &l in &active {
                bits[l] = rng.random::<bool>();
            }
            let x = SymbolVector::bpsk(&bits);
            let s = transmit(&x, &link.powers, &link.pair)?;
            let r = propagate_with_rng(&s, &link.channel, link.noise_variance, &mut rng)?;
            let y = demodulate(&r, &link.pair)?;
            let decided = detect(&y, &oam, &link.powers, Constellation::Bpsk)?.bits();
            for &l in &active {
                errors[l] += u64::from(decided[l] != bits[l]);
            }
        }
        Ok(errors)
    })?;

    let mut per_mode_errors = vec![0u64; n];
    for block in counts {
        for (acc, e) in per_mode_errors.iter_mut().zip(block) {
            *acc += e;
        }
    }
    let errors: u64 = per_mode_errors.iter().sum();
    let bits = trials * active.len() as u64;
    let (probability, std_error) = if bits == 0 {
        (0.0, 0.0)
    } else {
        let p = errors as f64 / bits as f64;
        (p, (p * (1.0 - p) / bits as f64).sqrt())
    };
    Ok(MonteCarloBer {
        trials,
        errors,
        bits,
        per_mode_errors,
        probability,
        std_error,
    })
}
