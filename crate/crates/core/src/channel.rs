//! Narrowband free-space channel between transmit and receive arrays, and its
//! OAM-domain form H′ = W′·H·W.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{element_response, FieldMethod, Radiator};
use crate::geometry::{UcaLayout, Wavelength};
use crate::modem::UnitDftPair;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    AnalyticApprox,
    AnalyticExact,
    Ingested,
}

/// N_r×N_t complex channel; entry (n_r, n_t) is the response at receive element
/// n_r to unit drive on transmit element n_t.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: CMatrix,
    provenance: Provenance,
}

impl ChannelMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n_r(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, n_r: usize, n_t: usize) -> Complex64 {
        self.entries[(n_r, n_t)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Folds a fixed element-drive map into the channel.
    ///
    /// For arrays driven through `t` (elements × modes) instead of the plain
    /// IDFT, returns H·T·Wᴴ so that the usual `W′(·)W` pipeline sees H·T.
    pub fn through_mode_map(&self, t: &CMatrix, pair: &UnitDftPair) -> Result<ChannelMatrix> {
        if t.nrows() != self.n_t() {
            return Err(Error::DimensionMismatch {
                context: "mode map rows",
                expected: self.n_t(),
                actual: t.nrows(),
            });
        }
        if t.ncols() != pair.n_t() {
            return Err(Error::DimensionMismatch {
                context: "mode map columns",
                expected: pair.n_t(),
                actual: t.ncols(),
            });
        }
        Ok(ChannelMatrix {
            entries: &self.entries * t * pair.idft.adjoint(),
            provenance: self.provenance,
        })
    }
}

/// Free-space channel from every transmit element to every receive element.
///
/// `Exact` uses λ/(4πd)·exp(−j2πd/λ) with the true distance; `Approx` is the
/// paraxial form with amplitude λ/(4πz).
pub fn build_free_space(
    tx: &impl Radiator,
    rx: &UcaLayout,
    lambda: Wavelength,
    method: FieldMethod,
) -> Result<ChannelMatrix> {
    let tx_pos = tx.element_positions();
    let rx_pos = rx.element_positions();
    let z = rx.center().z;
    if z.is_nan() || z <= 0.0 || tx_pos.iter().any(|p| p.z >= z) {
        return Err(Error::NonPositiveDistance(z));
    }
    let lambda = lambda.get();
    let entries = DMatrix::from_fn(rx_pos.len(), tx_pos.len(), |r, t| {
        element_response(tx_pos[t], rx_pos[r], lambda, method)
    });
    Ok(ChannelMatrix {
        entries,
        provenance: match method {
            FieldMethod::Exact => Provenance::AnalyticExact,
            FieldMethod::Approx => Provenance::AnalyticApprox,
        },
    })
}

/// Accepts an externally measured channel (for example the transmission block
/// of an S-parameter matrix), given row by row.
pub fn ingest_channel(rows: &[Vec<Complex64>]) -> Result<ChannelMatrix> {
    let n_r = rows.len();
    if n_r == 0 {
        return Err(Error::malformed(None, "channel has no rows"));
    }
    let n_t = rows[0].len();
    if n_t == 0 {
        return Err(Error::malformed(None, "channel has no columns"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n_t) {
        return Err(Error::malformed(
            None,
            format!("row {i} has {} entries, expected {n_t}", rows[i].len()),
        ));
    }
    ingest_matrix(DMatrix::from_fn(n_r, n_t, |r, c| rows[r][c]))
}

pub fn ingest_matrix(entries: CMatrix) -> Result<ChannelMatrix> {
    if entries.nrows() == 0 || entries.ncols() == 0 {
        return Err(Error::malformed(None, "channel matrix is empty"));
    }
    if entries
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::malformed(None, "channel has non-finite entries"));
    }
    Ok(ChannelMatrix {
        entries,
        provenance: Provenance::Ingested,
    })
}

/// Mode-domain channel. Row l1, column l2 is the gain from transmitted mode l2
/// to received mode l1. When N_r > N_t only the first N_t received modes are
/// used for detection.
#[derive(Debug, Clone, PartialEq)]
pub struct OamChannel {
    full: CMatrix,
    n_modes: usize,
}

impl OamChannel {
    /// The complete N_r×N_t matrix W′HW.
    pub fn full(&self) -> &CMatrix {
        &self.full
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// H′(l1, l2) inside the leading N_t×N_t block.
    pub fn entry(&self, l1: usize, l2: usize) -> Complex64 {
        self.full[(l1, l2)]
    }

    /// h′(l), the diagonal gain of mode l.
    pub fn gain(&self, l: usize) -> Complex64 {
        self.full[(l, l)]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n_modes).map(|l| self.gain(l)).collect()
    }

    /// Leading N_t×N_t block used by detection and SINR.
    pub fn block(&self) -> CMatrix {
        self.full
            .view((0, 0), (self.n_modes, self.n_modes))
            .into_owned()
    }
}

pub fn to_oam_domain(h: &ChannelMatrix, pair: &UnitDftPair) -> Result<OamChannel> {
    if h.n_t() != pair.n_t() {
        return Err(Error::DimensionMismatch {
            context: "transmit IDFT size",
            expected: h.n_t(),
            actual: pair.n_t(),
        });
    }
    if h.n_r() != pair.n_r() {
        return Err(Error::DimensionMismatch {
            context: "receive DFT size",
            expected: h.n_r(),
            actual: pair.n_r(),
        });
    }
    if h.n_r() < h.n_t() {
        return Err(Error::DimensionMismatch {
            context: "receive elements (need at least one per mode)",
            expected: h.n_t(),
            actual: h.n_r(),
        });
    }
    Ok(OamChannel {
        full: &pair.dft * h.entries() * &pair.idft,
        n_modes: h.n_t(),
    })
}
