//! Experiment harness: configuration, link evaluation, sweeps, file formats and
//! the command-line front end.

pub mod cli;
pub mod config;
pub mod io;
pub mod sweep;

use std::f64::consts::PI;

pub use config::{ConfigFile, ExperimentConfig, Placement, Scheme, SnrReference};
pub use io::CurveTable;
pub use sweep::{run_sweep, SweepParam, SweepSpec, SweepValue};

use crate::channel::{build_free_space, to_oam_domain, ChannelMatrix};
use crate::error::Result;
use crate::exec::Exec;
use crate::field::{composite_two_layer_layout, CompositeLayout, Excitation};
use crate::geometry::{UcaLayout, Wavelength};
use crate::metrics::{ber_analytic, ber_monte_carlo, capacity, sinr, LinkModel, LinkResult};
use crate::modem::{Constellation, UnitDftPair};

/// Transmit array of the configured scheme, in wavelengths.
#[derive(Debug, Clone)]
pub enum TransmitArray {
    Single(UcaLayout),
    TwoLayer(CompositeLayout),
}

impl TransmitArray {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match cfg.scheme {
            Scheme::Fractal | Scheme::Normal => TransmitArray::Single(UcaLayout::transmit(
                cfg.physical_transmit_radius(),
                config::MODES,
            )?),
            Scheme::TwoLayer => TransmitArray::TwoLayer(composite_two_layer_layout(
                cfg.transmit_radius,
                cfg.inner_radius,
                cfg.inner_elements,
            )?),
        })
    }

    /// Element drive for OAM mode `l` at `power`.
    pub fn mode_excitation(&self, l: usize, power: f64) -> Excitation {
        match self {
            TransmitArray::Single(uca) => Excitation::mode(l, uca.element_count(), power),
            TransmitArray::TwoLayer(c) => c.mode_excitation(l, power),
        }
    }
}

pub fn receive_array(cfg: &ExperimentConfig) -> Result<UcaLayout> {
    Ok(UcaLayout::new(
        cfg.receive_radius,
        cfg.receive_elements,
        cfg.receive_center()?,
    )?
    .with_angular_offset(cfg.angular_offset))
}

/// Channel from the six mode inputs' element drives to the receive elements.
///
/// For the two-layer scheme the 36-element channel is folded through the
/// Kronecker mode map, giving an N_r×6 matrix the ordinary modem can use.
pub fn build_channel(cfg: &ExperimentConfig) -> Result<ChannelMatrix> {
    let rx = receive_array(cfg)?;
    let lambda = Wavelength::new(1.0)?;
    let method = cfg.channel.into();
    match TransmitArray::from_config(cfg)? {
        TransmitArray::Single(tx) => build_free_space(&tx, &rx, lambda, method),
        TransmitArray::TwoLayer(tx) => {
            let full = build_free_space(&tx, &rx, lambda, method)?;
            let pair = UnitDftPair::new(config::MODES, rx.element_count());
            full.through_mode_map(&tx.mode_matrix(), &pair)
        }
    }
}

/// Noise variance per receive element at `snr_db`.
///
/// The reference power is the mean configured per-mode power. With the link
/// reference it is further scaled by the free-space gain (λ/(4π z_ref))².
pub fn noise_variance(cfg: &ExperimentConfig, snr_db: f64) -> f64 {
    let p = cfg.powers.powers();
    let p_ref = p.iter().sum::<f64>() / p.len() as f64;
    let gain = match cfg.snr_reference {
        SnrReference::Link => (1.0 / (4.0 * PI * cfg.reference_distance)).powi(2),
        SnrReference::Transmit => 1.0,
    };
    p_ref * gain / 10f64.powf(snr_db / 10.0)
}

/// Metrics for `channel` at every configured SNR.
pub fn evaluate_channel(
    cfg: &ExperimentConfig,
    channel: &ChannelMatrix,
    exec: Exec,
) -> Result<Vec<LinkResult>> {
    let pair = UnitDftPair::new(channel.n_t(), channel.n_r());
    let oam = to_oam_domain(channel, &pair)?;
    cfg.snr_db
        .iter()
        .map(|&snr_db| {
            let sigma2 = noise_variance(cfg, snr_db);
            let gamma = sinr(&oam, &cfg.powers, sigma2)?;
            let ber_monte_carlo = if cfg.trials > 0 && cfg.constellation == Constellation::Bpsk {
                let model = LinkModel::new(channel.clone(), cfg.powers.clone(), sigma2);
                Some(ber_monte_carlo(&model, cfg.trials, cfg.seed, exec)?)
            } else {
                None
            };
            Ok(LinkResult {
                snr_db,
                capacity: capacity(&gamma),
                ber_analytic: ber_analytic(&gamma)?,
                sinr: gamma,
                ber_monte_carlo,
            })
        })
        .collect()
}

/// Builds the configured link and evaluates it at every configured SNR.
pub fn run_link(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<LinkResult>> {
    evaluate_channel(cfg, &build_channel(cfg)?, exec)
}

/// Standard metadata block for output files.
pub fn metadata(cfg: &ExperimentConfig) -> io::Metadata {
    vec![
        ("config_hash".into(), cfg.hash.clone()),
        ("seed".into(), cfg.seed.to_string()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
    ]
}

/// Column names for link results: per-mode γ, capacity, BER and, when the
/// simulation ran, the Monte Carlo estimate and its standard error.
pub fn result_columns(modes: usize, monte_carlo: bool) -> Vec<String> {
    let mut c: Vec<String> = (0..modes).map(|l| format!("sinr_{l}")).collect();
    c.extend(["capacity".into(), "ber_analytic".into()]);
    if monte_carlo {
        c.extend(["ber_mc".into(), "ber_mc_stderr".into()]);
    }
    c
}

pub fn result_cells(r: &LinkResult, monte_carlo: bool) -> Vec<f64> {
    let mut v = r.sinr.clone();
    v.extend([r.capacity, r.ber_analytic]);
    if monte_carlo {
        match &r.ber_monte_carlo {
            Some(mc) => v.extend([mc.probability, mc.std_error]),
            None => v.extend([f64::NAN, f64::NAN]),
        }
    }
    v
}

/// `run_link` output as a table with one row per SNR.
pub fn link_table(cfg: &ExperimentConfig, results: &[LinkResult]) -> Result<CurveTable> {
    let mc = cfg.trials > 0;
    let modes = results.first().map_or(config::MODES, |r| r.sinr.len());
    let mut columns = vec!["snr_db".to_string()];
    columns.extend(result_columns(modes, mc));
    let mut table = CurveTable::new(columns, metadata(cfg));
    for r in results {
        let mut row = vec![r.snr_db];
        row.extend(result_cells(r, mc));
        table.push_row(row)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn cfg(sets: &[&str]) -> ExperimentConfig {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        ConfigFile::from_toml_str("", &sets)
            .unwrap()
            .resolve()
            .unwrap()
    }

    #[test]
    fn fractal_beats_normal_when_aligned() {
        let f = run_link(&cfg(&[]), Exec::default()).unwrap();
        let n = run_link(&cfg(&["transmit.scheme=normal"]), Exec::default()).unwrap();
        assert!(
            f[0].capacity > n[0].capacity,
            "{} vs {}",
            f[0].capacity,
            n[0].capacity
        );
    }

    #[test]
    fn identical_runs_give_identical_tables() {
        let c = cfg(&["monte_carlo.trials=2000", "link.snr_db=[0, 10]"]);
        let a = link_table(&c, &run_link(&c, Exec::Parallel).unwrap())
            .unwrap()
            .to_csv();
        let b = link_table(&c, &run_link(&c, Exec::Sequential).unwrap())
            .unwrap()
            .to_csv();
        assert_eq!(a, b);
        assert!(a.contains(&format!("# config_hash={}", c.hash)));
        assert!(a.contains("ber_mc_stderr"));
    }

    #[test]
    fn noise_reference() {
        let c = cfg(&["link.snr_db=[10]"]);
        let expected = (1.0 / (4.0 * PI * 1000.0)).powi(2) / 10.0;
        assert!((noise_variance(&c, 10.0) / expected - 1.0).abs() < 1e-14);
        let t = cfg(&["link.snr_reference=\"transmit\""]);
        assert!((noise_variance(&t, 20.0) - 0.01).abs() < 1e-16);
    }

    #[test]
    fn two_layer_link_runs() {
        let c = cfg(&["transmit.scheme=\"two-layer\""]);
        let h = build_channel(&c).unwrap();
        assert_eq!((h.n_r(), h.n_t()), (6, 6));
        let r = run_link(&c, Exec::default()).unwrap();
        assert!(r[0].capacity > 0.0);
    }

    #[test]
    fn gaussian_input_skips_detection() {
        let c = cfg(&["link.constellation=\"gaussian\""]);
        let r = run_link(&c, Exec::default()).unwrap();
        assert!(r[0].ber_monte_carlo.is_none());
        let bad = ConfigFile::from_toml_str(
            "",
            &[
                "link.constellation=\"gaussian\"".into(),
                "monte_carlo.trials=10".into(),
            ],
        )
        .unwrap()
        .resolve();
        assert!(matches!(bad, Err(Error::Config { .. })));
    }
}
