//! IDFT/DFT modem: mode synthesis at the transmitter, AWGN, mode separation
//! and per-mode BPSK decisions at the receiver.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{CMatrix, ChannelMatrix, OamChannel};
use crate::error::{Error, Result};
use crate::field::Excitation;

/// Gains below this magnitude count as zero for equalization.
pub const ZERO_GAIN_THRESHOLD: f64 = 1e-300;

fn unit_root(n: usize, row: usize, col: usize, sign: f64) -> Complex64 {
    // reduce the exponent first so large indices keep full phase accuracy
    let k = (row * col) % n;
    Complex64::from_polar(1.0 / (n as f64).sqrt(), sign * TAU * k as f64 / n as f64)
}

/// Entry (row, col) of the n-point unit IDFT matrix, (1/√n)·exp(+j2π·row·col/n).
pub fn idft_entry(n: usize, row: usize, col: usize) -> Complex64 {
    unit_root(n, row, col, 1.0)
}

/// Entry (row, col) of the n-point unit DFT matrix, (1/√n)·exp(−j2π·row·col/n).
pub fn dft_entry(n: usize, row: usize, col: usize) -> Complex64 {
    unit_root(n, row, col, -1.0)
}

/// Transmit IDFT `W` (N_t×N_t) and receive DFT `W′` (N_r×N_r).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDftPair {
    pub idft: CMatrix,
    pub dft: CMatrix,
}

impl UnitDftPair {
    pub fn new(n_t: usize, n_r: usize) -> Self {
        Self {
            idft: DMatrix::from_fn(n_t, n_t, |r, c| idft_entry(n_t, r, c)),
            dft: DMatrix::from_fn(n_r, n_r, |r, c| dft_entry(n_r, r, c)),
        }
    }

    pub fn n_t(&self) -> usize {
        self.idft.nrows()
    }

    pub fn n_r(&self) -> usize {
        self.dft.nrows()
    }
}

/// Largest entry of |AᴴA − I|.
pub fn unitarity_error(a: &CMatrix) -> f64 {
    let n = a.ncols();
    (a.adjoint() * a - DMatrix::<Complex64>::identity(n, n)).camax()
}

/// Per-mode transmit powers P_l.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation(Vec<f64>);

impl PowerAllocation {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if let Some(&p) = powers.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::NonPositiveInput {
                name: "mode power",
                value: p,
            });
        }
        Ok(Self(powers))
    }

    pub fn uniform(n: usize, power: f64) -> Self {
        Self(vec![power; n])
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|p| p.sqrt())
    }

    pub fn is_active(&self, l: usize) -> bool {
        self.0[l] > 0.0
    }

    /// diag(√P_l).
    pub fn matrix(&self) -> CMatrix {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.len(),
            self.amplitudes().map(|a| Complex64::new(a, 0.0)),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constellation {
    #[default]
    Bpsk,
    /// Circular complex Gaussian input; analysis only, never detected.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVector {
    pub symbols: Vec<Complex64>,
    pub constellation: Constellation,
}

impl SymbolVector {
    /// BPSK vector, `true` ↦ +1 and `false` ↦ −1.
    pub fn bpsk(bits: &[bool]) -> Self {
        Self {
            symbols: bits
                .iter()
                .map(|&b| Complex64::new(if b { 1.0 } else { -1.0 }, 0.0))
                .collect(),
            constellation: Constellation::Bpsk,
        }
    }

    pub fn gaussian(symbols: Vec<Complex64>) -> Self {
        Self {
            symbols,
            constellation: Constellation::Gaussian,
        }
    }

    /// Unit symbol on mode `l`, zero elsewhere.
    pub fn unit(n: usize, l: usize) -> Self {
        let mut symbols = vec![Complex64::new(0.0, 0.0); n];
        symbols[l] = Complex64::new(1.0, 0.0);
        Self::gaussian(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn bits(&self) -> Vec<bool> {
        self.symbols.iter().map(|s| s.re > 0.0).collect()
    }
}

/// Circular complex AWGN: variance σ² per receive element, reproducible from `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::NonPositiveInput {
                name: "noise variance",
                value: variance,
            });
        }
        Ok(Self { variance, seed })
    }

    pub fn noiseless() -> Self {
        Self {
            variance: 0.0,
            seed: 0,
        }
    }
}

/// ChaCha8 keyed by `seed` on stream `stream`; distinct streams never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One CN(0, σ²) draw: real and imaginary parts each N(0, σ²/2).
pub fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let sd = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

fn check(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

/// s = W·diag(√P)·x.
pub fn transmit(x: &SymbolVector, p: &PowerAllocation, pair: &UnitDftPair) -> Result<Excitation> {
    check("symbol vector length", pair.n_t(), x.len())?;
    check("power allocation length", pair.n_t(), p.len())?;
    let scaled = DVector::from_iterator(
        x.len(),
        x.symbols.iter().zip(p.amplitudes()).map(|(s, a)| s * a),
    );
    Ok(Excitation::from((&pair.idft * scaled).as_slice().to_vec()))
}

/// r = H·s + n with n drawn from `noise.seed` (stream 0).
pub fn propagate(s: &Excitation, h: &ChannelMatrix, noise: &NoiseSpec) -> Result<Vec<Complex64>> {
    let mut rng = stream_rng(noise.seed, 0);
    propagate_with_rng(s, h, noise.variance, &mut rng)
}

pub fn propagate_with_rng(
    s: &Excitation,
    h: &ChannelMatrix,
    variance: f64,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    check("excitation length", h.n_t(), s.len())?;
    let s = DVector::from_column_slice(s.as_slice());
    let mut r = (h.entries() * s).as_slice().to_vec();
    if variance > 0.0 {
        for v in &mut r {
            *v += complex_gaussian(rng, variance);
        }
    }
    Ok(r)
}

/// y = W′·r.
pub fn demodulate(r: &[Complex64], pair: &UnitDftPair) -> Result<Vec<Complex64>> {
    check("received vector length", pair.n_r(), r.len())?;
    Ok((&pair.dft * DVector::from_column_slice(r))
        .as_slice()
        .to_vec())
}

/// Per-mode equalization ŷ_l = y_l / h′_l and minimum-distance decision.
///
/// With diagonal equalization the joint argmin over the constellation splits
/// into independent per-mode decisions; for BPSK that is the sign of Re{ŷ_l}.
/// Modes with zero power carry no data and decide +1.
pub fn detect(
    y: &[Complex64],
    oam: &OamChannel,
    p: &PowerAllocation,
    constellation: Constellation,
) -> Result<SymbolVector> {
    if constellation != Constellation::Bpsk {
        return Err(Error::UnsupportedConstellation);
    }
    let n = oam.n_modes();
    check("power allocation length", n, p.len())?;
    if y.len() < n {
        return Err(Error::DimensionMismatch {
            context: "mode-domain vector length",
            expected: n,
            actual: y.len(),
        });
    }
    let mut bits = Vec::with_capacity(n);
    for (l, &yl) in y.iter().take(n).enumerate() {
        if !p.is_active(l) {
            bits.push(true);
            continue;
        }
        let g = oam.gain(l);
        if g.norm() < ZERO_GAIN_THRESHOLD {
            return Err(Error::ZeroGain { mode: l });
        }
        bits.push((yl / g).re >= 0.0);
    }
    Ok(SymbolVector::bpsk(&bits))
}
