//! One-parameter sweeps over a base configuration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::GridIndex;
use crate::metrics::LinkResult;

use super::config::{ExperimentConfig, Placement};
use super::io::CurveTable;
use super::{metadata, result_cells, result_columns, run_link};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    Snr,
    ReceiveRadius,
    TransmitRadius,
    Distance,
    GridIndex,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Snr => "snr",
            SweepParam::ReceiveRadius => "receive_radius",
            SweepParam::TransmitRadius => "transmit_radius",
            SweepParam::Distance => "distance",
            SweepParam::GridIndex => "grid_index",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "snr" => SweepParam::Snr,
            "receive_radius" => SweepParam::ReceiveRadius,
            "transmit_radius" => SweepParam::TransmitRadius,
            "distance" => SweepParam::Distance,
            "grid_index" => SweepParam::GridIndex,
            other => {
                return Err(Error::config(
                    "sweep.param",
                    format!("unknown parameter `{other}`; expected snr, receive_radius, transmit_radius, distance or grid_index"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    /// dB for `snr`, configured length units otherwise.
    Scalar(f64),
    Grid(GridIndex),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<SweepValue>,
}

impl SweepSpec {
    /// Parses `start:step:stop` (inclusive), `a,b,c`, or for `grid_index`
    /// `m,n;m,n`.
    pub fn parse(param: SweepParam, values: &str) -> Result<Self> {
        let bad = |msg: String| Error::config("sweep.values", msg);
        let values = values.trim();
        let parsed = if param == SweepParam::GridIndex {
            values
                .split(';')
                .map(|pair| {
                    let (m, n) = pair
                        .split_once(',')
                        .ok_or_else(|| bad(format!("grid index `{pair}` must be `m,n`")))?;
                    let m = m
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad m in `{pair}`")))?;
                    let n = n
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad n in `{pair}`")))?;
                    Ok(SweepValue::Grid(GridIndex::new(m, n)))
                })
                .collect::<Result<Vec<_>>>()?
        } else if values.contains(':') {
            let parts: Vec<f64> = values
                .split(':')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| bad(format!("bad number `{p}`")))
                })
                .collect::<Result<_>>()?;
            let [start, step, stop] = parts[..] else {
                return Err(bad(format!("range `{values}` must be start:step:stop")));
            };
            if !step.is_finite()
                || !stop.is_finite()
                || !start.is_finite()
                || step <= 0.0
                || stop < start
            {
                return Err(bad(format!(
                    "range `{values}` needs step > 0 and stop >= start"
                )));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|i| SweepValue::Scalar(start + i as f64 * step))
                .collect()
        } else {
            values
                .split(',')
                .map(|p| {
                    let v: f64 = p
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad number `{p}`")))?;
                    if v.is_finite() {
                        Ok(SweepValue::Scalar(v))
                    } else {
                        Err(bad(format!("non-finite value `{p}`")))
                    }
                })
                .collect::<Result<_>>()?
        };
        if parsed.is_empty() {
            return Err(bad("no sweep values".into()));
        }
        Ok(Self {
            param,
            values: parsed,
        })
    }

    /// The base configuration with sweep point `value` applied and re-validated.
    pub fn apply(&self, base: &ExperimentConfig, value: SweepValue) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let path = format!("sweep value for {}", self.param);
        match (self.param, value) {
            (SweepParam::Snr, SweepValue::Scalar(v)) => cfg.snr_db = vec![v],
            (SweepParam::ReceiveRadius, SweepValue::Scalar(v)) => {
                cfg.receive_radius = cfg.from_unit(v)
            }
            (SweepParam::TransmitRadius, SweepValue::Scalar(v)) => {
                cfg.transmit_radius = cfg.from_unit(v)
            }
            (SweepParam::Distance, SweepValue::Scalar(v)) => cfg.distance = cfg.from_unit(v),
            (SweepParam::GridIndex, SweepValue::Grid(idx)) => cfg.placement = Placement::Grid(idx),
            _ => {
                return Err(Error::config(
                    path,
                    "value kind does not match the parameter",
                ))
            }
        }
        if self.param != SweepParam::ReceiveRadius {
            cfg.apply_tie();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn leading_columns(&self) -> Vec<String> {
        match self.param {
            SweepParam::Snr => vec!["snr_db".into()],
            SweepParam::GridIndex => vec!["m".into(), "n".into(), "snr_db".into()],
            p => vec![p.name().into(), "snr_db".into()],
        }
    }

    fn leading_cells(&self, value: SweepValue, snr_db: f64) -> Vec<f64> {
        match (self.param, value) {
            (SweepParam::Snr, _) => vec![snr_db],
            (_, SweepValue::Grid(idx)) => vec![idx.m as f64, idx.n as f64, snr_db],
            (_, SweepValue::Scalar(v)) => vec![v, snr_db],
        }
    }
}

/// Runs every sweep point (points in parallel under `exec`) and tabulates one
/// row per (value, configured SNR) in sweep order. Swept lengths are reported
/// in the configured unit.
pub fn run_sweep(base: &ExperimentConfig, spec: &SweepSpec, exec: Exec) -> Result<CurveTable> {
    let configs = spec
        .values
        .iter()
        .map(|&v| spec.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    // Monte Carlo inside a point stays sequential when points already fan out.
    let inner = if configs.len() > 1 {
        Exec::Sequential
    } else {
        exec
    };
    let results: Vec<Vec<LinkResult>> =
        exec.try_map_indexed(configs.len(), |i| run_link(&configs[i], inner))?;

    let mc = base.trials > 0;
    let modes = results
        .first()
        .and_then(|r| r.first())
        .map_or(6, |r| r.sinr.len());
    let mut columns = spec.leading_columns();
    columns.extend(result_columns(modes, mc));
    let mut meta = metadata(base);
    meta.push(("sweep".into(), spec.param.name().into()));
    meta.push(("length_unit".into(), base.unit.symbol().into()));
    if let Some(k) = base.tie_receive_radius {
        meta.push(("tie_receive_radius".into(), k.to_string()));
    }
    let mut table = CurveTable::new(columns, meta);
    for (&value, point) in spec.values.iter().zip(&results) {
        for r in point {
            let mut row = spec.leading_cells(value, r.snr_db);
            row.extend(result_cells(r, mc));
            table.push_row(row)?;
        }
    }
    Ok(table)
}
