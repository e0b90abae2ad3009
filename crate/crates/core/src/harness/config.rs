//! Experiment configuration: the TOML schema, `--set` overrides, validation and
//! resolution to wavelength units.
//!
//! Lengths in the file are in `units.length`; every length is converted to
//! wavelengths on resolution, so the rest of the harness runs with λ = 1.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::FieldMethod;
use crate::geometry::{make_grid, FractalGrid, GridIndex, Point3};
use crate::modem::{Constellation, PowerAllocation};

pub const DEFAULT_WAVELENGTH_MM: f64 = 10.0;
pub const DEFAULT_TRANSMIT_RADIUS: f64 = 150.0;
pub const DEFAULT_RECEIVE_RADIUS: f64 = 1.67;
pub const DEFAULT_DISTANCE: f64 = 1000.0;
pub const DEFAULT_INNER_RADIUS: f64 = 0.5;
pub const NORMAL_TRANSMIT_RADIUS: f64 = 0.5;
pub const MODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthUnit {
    #[default]
    Mm,
    M,
    Lambda,
}

impl LengthUnit {
    pub fn symbol(self) -> &'static str {
        match self {
            LengthUnit::Mm => "mm",
            LengthUnit::M => "m",
            LengthUnit::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Fractal,
    /// Conventional UCA with R_t = λ/2.
    Normal,
    TwoLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ChannelVariant {
    #[default]
    Exact,
    Approx,
}

impl From<ChannelVariant> for FieldMethod {
    fn from(v: ChannelVariant) -> Self {
        match v {
            ChannelVariant::Exact => FieldMethod::Exact,
            ChannelVariant::Approx => FieldMethod::Approx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrReference {
    /// σ² = P·(λ/(4π z_ref))² / SNR: SNR measured at the receiver of a
    /// reference link at distance z_ref.
    #[default]
    Link,
    /// σ² = P / SNR.
    Transmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationTag {
    #[default]
    Bpsk,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsSection {
    pub length: LengthUnit,
    /// Wavelength in `length` units. Defaults to 10 mm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoLayerSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
    pub inner_elements: usize,
}

impl Default for TwoLayerSection {
    fn default() -> Self {
        Self {
            inner_radius: None,
            inner_elements: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmitSection {
    pub scheme: Scheme,
    /// Fractal transmit radius; sets the replica grid for every scheme.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub elements: usize,
    pub two_layer: TwoLayerSection,
}

impl Default for TransmitSection {
    fn default() -> Self {
        Self {
            scheme: Scheme::Fractal,
            radius: None,
            elements: MODES,
            two_layer: TwoLayerSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiveSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub elements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_index: Option<[i64; 2]>,
    /// Explicit (x, y) of the array center, instead of a grid index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Radians.
    pub angular_offset: f64,
    pub allow_oversize: bool,
}

impl Default for ReceiveSection {
    fn default() -> Self {
        Self {
            radius: None,
            elements: MODES,
            grid_index: None,
            center: None,
            angular_offset: 0.0,
            allow_oversize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    pub channel: ChannelVariant,
    /// Watts per mode; defaults to 1 W on each of the six modes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<f64>>,
    pub constellation: ConstellationTag,
    pub snr_db: Vec<f64>,
    pub snr_reference: SnrReference,
    /// z_ref for `snr_reference = "link"`; defaults to `distance`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_distance: Option<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            distance: None,
            channel: ChannelVariant::Exact,
            powers: None,
            constellation: ConstellationTag::Bpsk,
            snr_db: vec![20.0],
            snr_reference: SnrReference::Link,
            reference_distance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSection {
    /// BPSK vectors per SNR point; 0 disables the simulation.
    pub trials: u64,
    pub seed: u64,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { trials: 0, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    /// `"start:step:stop"`, `"a,b,c"` or `"m,n;m,n"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<String>,
    /// k in R_r = k·λz/R_t, re-applied at every sweep point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tie_receive_radius: Option<f64>,
}

/// The configuration document as written.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub units: UnitsSection,
    pub transmit: TransmitSection,
    pub receive: ReceiveSection,
    pub link: LinkSection,
    pub monte_carlo: MonteCarloSection,
    pub sweep: SweepSection,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(error_path(&e), e.message().to_string()))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::resolve(self)
    }
}

fn error_path(e: &toml::de::Error) -> String {
    // toml reports the failing key in the message; the span is not a path.
    let msg = e.message();
    msg.split('`')
        .nth(1)
        .filter(|_| msg.contains('`'))
        .unwrap_or("<document>")
        .to_string()
}

/// Applies `section.key=value`; the value is parsed as a TOML value and falls
/// back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Where the receive array sits on the receive plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    Grid(GridIndex),
    /// (x, y) in wavelengths.
    Center(f64, f64),
}

/// A validated configuration with every length in wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub unit: LengthUnit,
    /// Length of one wavelength in `unit`.
    pub lambda_in_unit: f64,
    pub scheme: Scheme,
    /// Fractal transmit radius; the replica grid always uses this value.
    pub transmit_radius: f64,
    pub inner_radius: f64,
    pub inner_elements: usize,
    pub receive_radius: f64,
    pub receive_elements: usize,
    pub placement: Placement,
    pub angular_offset: f64,
    pub allow_oversize: bool,
    pub distance: f64,
    pub channel: ChannelVariant,
    pub powers: PowerAllocation,
    pub constellation: Constellation,
    pub snr_db: Vec<f64>,
    pub snr_reference: SnrReference,
    pub reference_distance: f64,
    pub trials: u64,
    pub seed: u64,
    pub tie_receive_radius: Option<f64>,
    pub hash: String,
}

impl ExperimentConfig {
    fn resolve(file: &ConfigFile) -> Result<Self> {
        let unit = file.units.length;
        let lambda_in_unit = match (unit, file.units.wavelength) {
            (LengthUnit::Lambda, None | Some(1.0)) => 1.0,
            (LengthUnit::Lambda, Some(_)) => {
                return Err(Error::config(
                    "units.wavelength",
                    "must be 1 (or omitted) when lengths are in wavelengths",
                ))
            }
            (LengthUnit::Mm, w) => w.unwrap_or(DEFAULT_WAVELENGTH_MM),
            (LengthUnit::M, w) => w.unwrap_or(DEFAULT_WAVELENGTH_MM * 1e-3),
        };
        positive("units.wavelength", lambda_in_unit)?;
        let to_lambda = |path: &str, v: Option<f64>, default: f64| -> Result<f64> {
            match v {
                Some(v) => {
                    positive(path, v)?;
                    Ok(v / lambda_in_unit)
                }
                None => Ok(default),
            }
        };

        let t = &file.transmit;
        if t.elements != MODES {
            return Err(Error::config(
                "transmit.elements",
                format!(
                    "the modem is built for {MODES} transmit elements, got {}",
                    t.elements
                ),
            ));
        }
        let transmit_radius = to_lambda("transmit.radius", t.radius, DEFAULT_TRANSMIT_RADIUS)?;
        let inner_radius = to_lambda(
            "transmit.two_layer.inner_radius",
            t.two_layer.inner_radius,
            DEFAULT_INNER_RADIUS,
        )?;
        if t.two_layer.inner_elements == 0 {
            return Err(Error::config(
                "transmit.two_layer.inner_elements",
                "must be at least 1",
            ));
        }

        let r = &file.receive;
        let receive_radius = to_lambda("receive.radius", r.radius, DEFAULT_RECEIVE_RADIUS)?;
        if r.elements < MODES {
            return Err(Error::config(
                "receive.elements",
                format!("need at least {MODES} receive elements, got {}", r.elements),
            ));
        }
        let placement = match (r.grid_index, r.center) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "receive.center",
                    "give either receive.grid_index or receive.center, not both",
                ))
            }
            (Some([m, n]), None) => Placement::Grid(GridIndex::new(m, n)),
            (None, Some([x, y])) => {
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::config("receive.center", "must be finite"));
                }
                Placement::Center(x / lambda_in_unit, y / lambda_in_unit)
            }
            (None, None) => Placement::Grid(GridIndex::ORIGIN),
        };
        if !r.angular_offset.is_finite() {
            return Err(Error::config("receive.angular_offset", "must be finite"));
        }

        let l = &file.link;
        let distance = to_lambda("link.distance", l.distance, DEFAULT_DISTANCE)?;
        let reference_distance =
            to_lambda("link.reference_distance", l.reference_distance, distance)?;
        let powers = l.powers.clone().unwrap_or_else(|| vec![1.0; MODES]);
        if powers.len() != MODES {
            return Err(Error::config(
                "link.powers",
                format!("need {MODES} entries, got {}", powers.len()),
            ));
        }
        let powers = PowerAllocation::new(powers)
            .map_err(|e| Error::config("link.powers", e.to_string()))?;
        if powers.powers().iter().sum::<f64>() <= 0.0 {
            return Err(Error::config(
                "link.powers",
                "at least one mode must carry power",
            ));
        }
        if l.snr_db.is_empty() {
            return Err(Error::config("link.snr_db", "needs at least one value"));
        }
        if let Some(bad) = l.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::config(
                "link.snr_db",
                format!("non-finite value {bad}"),
            ));
        }
        let constellation = match l.constellation {
            ConstellationTag::Bpsk => Constellation::Bpsk,
            ConstellationTag::Gaussian => Constellation::Gaussian,
        };
        if constellation == Constellation::Gaussian && file.monte_carlo.trials > 0 {
            return Err(Error::config(
                "monte_carlo.trials",
                "Monte Carlo BER needs link.constellation = \"bpsk\"",
            ));
        }
        if let Some(k) = file.sweep.tie_receive_radius {
            positive("sweep.tie_receive_radius", k)?;
        }

        let cfg = ExperimentConfig {
            unit,
            lambda_in_unit,
            scheme: t.scheme,
            transmit_radius,
            inner_radius,
            inner_elements: t.two_layer.inner_elements,
            receive_radius,
            receive_elements: r.elements,
            placement,
            angular_offset: r.angular_offset,
            allow_oversize: r.allow_oversize,
            distance,
            channel: l.channel,
            powers,
            constellation,
            snr_db: l.snr_db.clone(),
            snr_reference: l.snr_reference,
            reference_distance,
            trials: file.monte_carlo.trials,
            seed: file.monte_carlo.seed,
            tie_receive_radius: file.sweep.tie_receive_radius,
            hash: file.hash(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the geometric constraints that sweeps can break.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        positive("receive.radius", self.receive_radius)?;
        if !self.allow_oversize && self.receive_radius > grid.rr_bound() * (1.0 + 1e-12) {
            return Err(Error::config(
                "receive.radius",
                format!(
                    "{:.6} {u} exceeds the replica bound {:.6} {u}; set receive.allow_oversize or pass --allow-oversize-rx",
                    self.to_unit(self.receive_radius),
                    self.to_unit(grid.rr_bound()),
                    u = self.unit.symbol()
                ),
            ));
        }
        if self.scheme == Scheme::TwoLayer && self.inner_radius >= self.transmit_radius {
            return Err(Error::config(
                "transmit.two_layer.inner_radius",
                "must be smaller than transmit.radius",
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<FractalGrid> {
        make_grid(1.0, self.transmit_radius, self.distance)
            .map_err(|e| Error::config("transmit.radius", e.to_string()))
    }

    /// Receive array center, in wavelengths.
    pub fn receive_center(&self) -> Result<Point3> {
        Ok(match self.placement {
            Placement::Grid(idx) => self.grid()?.center(idx),
            Placement::Center(x, y) => Point3::new(x, y, self.distance),
        })
    }

    /// Physical radius of the (outer) transmit array, in wavelengths.
    pub fn physical_transmit_radius(&self) -> f64 {
        match self.scheme {
            Scheme::Normal => NORMAL_TRANSMIT_RADIUS,
            Scheme::Fractal | Scheme::TwoLayer => self.transmit_radius,
        }
    }

    pub fn to_unit(&self, wavelengths: f64) -> f64 {
        wavelengths * self.lambda_in_unit
    }

    pub fn from_unit(&self, length: f64) -> f64 {
        length / self.lambda_in_unit
    }

    /// Applies the R_r = k·λz/R_t tie, if configured.
    pub fn apply_tie(&mut self) {
        if let Some(k) = self.tie_receive_radius {
            self.receive_radius = k * self.distance / self.transmit_radius;
        }
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            path,
            format!("must be positive and finite, got {v}"),
        ))
    }
}
