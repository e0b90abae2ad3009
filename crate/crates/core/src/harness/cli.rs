//! `fractal-oam` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::exec::{init_thread_pool_from_env, Exec};
use crate::field::{render_field_map, FieldMethod, MapSpec};
use crate::geometry::Wavelength;

use super::config::{ChannelVariant, ConfigFile, ExperimentConfig};
use super::io::{export_field_map, import_channel_csv};
use super::sweep::{run_sweep, SweepParam, SweepSpec};
use super::{evaluate_channel, link_table, metadata, run_link, TransmitArray};

#[derive(Debug, Parser)]
#[command(
    name = "fractal-oam",
    version,
    about = "Fractal OAM UCA link simulator"
)]
pub struct Cli {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set link.snr_db=[0,10]`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Accept receive radii above the replica bound.
    #[arg(long, global = true)]
    pub allow_oversize_rx: bool,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the replica grid: cell radius, receive-radius bound and centers.
    Grid {
        #[arg(long, default_value_t = 2)]
        max_m: u32,
        #[arg(long, default_value_t = 2)]
        max_n: u32,
    },
    /// Render the transmit array's field for one OAM mode on the receive plane.
    Fieldmap {
        #[arg(long, default_value_t = 1)]
        mode: usize,
        /// Half-width of the square window in config length units
        /// (default: two cell radii).
        #[arg(long)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = 201)]
        pixels: usize,
        /// Field model; defaults to the configured channel variant.
        #[arg(long, value_enum)]
        method: Option<ChannelVariant>,
        /// Output prefix; writes `<out>.csv` and `<out>.pgm`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the configured link at each configured SNR.
    Link {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter of the configured link.
    Sweep {
        #[arg(long, value_enum)]
        param: Option<SweepParam>,
        /// `start:step:stop`, `a,b,c`, or `m,n;m,n` for grid_index.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        /// Tie the receive radius to R_r = k·λz/R_t at every point.
        #[arg(long)]
        tie_receive_radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the configured powers, SNRs and Monte Carlo on a measured channel.
    IngestChannel {
        /// CSV with header `nr,nt,re,im`.
        channel: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_thread_pool_from_env();
    match execute(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load(cli: &Cli, extra: &[String]) -> Result<(ConfigFile, ExperimentConfig)> {
    let mut sets = cli.set.clone();
    if cli.allow_oversize_rx {
        sets.push("receive.allow_oversize=true".into());
    }
    sets.extend_from_slice(extra);
    let file = ConfigFile::load(cli.config.as_deref(), &sets)?;
    let cfg = file.resolve()?;
    Ok((file, cfg))
}

fn emit(text: String, out: Option<&Path>) -> Result<String> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

/// Runs the parsed command and returns what goes to stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    match &cli.command {
        Command::Grid { max_m, max_n } => {
            let (_, cfg) = load(cli, &[])?;
            Ok(grid_report(&cfg, *max_m, *max_n)?)
        }
        Command::Fieldmap {
            mode,
            half_width,
            pixels,
            method,
            out,
        } => {
            let (_, cfg) = load(cli, &[])?;
            if *mode >= super::config::MODES {
                return Err(Error::config(
                    "--mode",
                    format!("must be below {}", super::config::MODES),
                ));
            }
            if *pixels == 0 {
                return Err(Error::config("--pixels", "must be at least 1"));
            }
            let grid = cfg.grid()?;
            let half = match half_width {
                Some(h) if *h > 0.0 && h.is_finite() => cfg.from_unit(*h),
                Some(h) => {
                    return Err(Error::config(
                        "--half-width",
                        format!("must be positive, got {h}"),
                    ))
                }
                None => 2.0 * grid.cell_radius(),
            };
            let method: FieldMethod = method.unwrap_or(cfg.channel).into();
            let spec = MapSpec::centered(cfg.distance, half, *pixels).with_method(method);
            let tx = TransmitArray::from_config(&cfg)?;
            let exc = tx.mode_excitation(*mode, cfg.powers.powers()[*mode]);
            let lambda = Wavelength::new(1.0)?;
            let mut map = match &tx {
                TransmitArray::Single(uca) => render_field_map(uca, &exc, lambda, &spec, exec)?,
                TransmitArray::TwoLayer(c) => render_field_map(c, &exc, lambda, &spec, exec)?,
            };
            let scale = cfg.lambda_in_unit;
            map.z *= scale;
            map.x_range = (map.x_range.0 * scale, map.x_range.1 * scale);
            map.y_range = (map.y_range.0 * scale, map.y_range.1 * scale);
            let mut meta = metadata(&cfg);
            meta.push(("mode".into(), mode.to_string()));
            meta.push(("length_unit".into(), cfg.unit.symbol().into()));
            export_field_map(&map, out, &meta)?;
            Ok(format!(
                "wrote {} and {}\n",
                out.with_extension("csv").display(),
                out.with_extension("pgm").display()
            ))
        }
        Command::Link { out } => {
            let (_, cfg) = load(cli, &[])?;
            let results = run_link(&cfg, exec)?;
            emit(link_table(&cfg, &results)?.to_csv(), out.as_deref())
        }
        Command::Sweep {
            param,
            values,
            tie_receive_radius,
            out,
        } => {
            let mut extra = Vec::new();
            if let Some(k) = tie_receive_radius {
                extra.push(format!("sweep.tie_receive_radius={k}"));
            }
            let (file, cfg) = load(cli, &extra)?;
            let param = match param {
                Some(p) => *p,
                None => file
                    .sweep
                    .param
                    .as_deref()
                    .ok_or_else(|| Error::config("sweep.param", "give --param or sweep.param"))?
                    .parse()?,
            };
            let values = values
                .clone()
                .or_else(|| file.sweep.values.clone())
                .ok_or_else(|| Error::config("sweep.values", "give --values or sweep.values"))?;
            let spec = SweepSpec::parse(param, &values)?;
            emit(run_sweep(&cfg, &spec, exec)?.to_csv(), out.as_deref())
        }
        Command::IngestChannel { channel, out } => {
            let (_, cfg) = load(cli, &[])?;
            let h = import_channel_csv(channel)?;
            let results = evaluate_channel(&cfg, &h, exec)?;
            let mut table = link_table(&cfg, &results)?;
            table
                .metadata
                .push(("channel".into(), format!("{}x{}", h.n_r(), h.n_t())));
            emit(table.to_csv(), out.as_deref())
        }
    }
}

/// Grid summary in configured length units.
pub fn grid_report(cfg: &ExperimentConfig, max_m: u32, max_n: u32) -> Result<String> {
    let grid = cfg.grid()?;
    let u = cfg.unit.symbol();
    let mut s = String::new();
    for (k, v) in metadata(cfg) {
        let _ = writeln!(s, "# {k}={v}");
    }
    let rows = [
        ("lambda", cfg.lambda_in_unit),
        ("transmit_radius", cfg.to_unit(cfg.transmit_radius)),
        ("distance", cfg.to_unit(cfg.distance)),
        ("cell_radius", cfg.to_unit(grid.cell_radius())),
        ("rr_bound", cfg.to_unit(grid.rr_bound())),
        ("pitch", cfg.to_unit(grid.pitch())),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k}: {v:.4} {u}");
    }
    let _ = writeln!(s, "m,n,x,y,z");
    for (idx, p) in grid.enumerate_centers(max_m, max_n) {
        let _ = writeln!(
            s,
            "{},{},{:.4},{:.4},{:.4}",
            idx.m,
            idx.n,
            cfg.to_unit(p.x),
            cfg.to_unit(p.y),
            cfg.to_unit(p.z)
        );
    }
    Ok(s)
}
