//! Ground-truth BLER generator.
//!
//! Clean BLER follows an exponential waterfall in linear SNR plus an
//! irreducible floor that grows with Doppler spread and shrinks with pilot
//! density:
//!
//! `BLER = clip(A * exp(-B * snr_lin^gamma) + floor(doppler, n_dmrs), 1e-12, 1)`
//!
//! The default floor is `floor_coeff * doppler / (n_dmrs + 1)`; any other
//! [`FloorModel`] can be planted instead. Optional noise is additive
//! Gaussian on `-ln(BLER)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{RawSample, BLER_FLOOR};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// ITS band carrier used when none is given.
pub const DEFAULT_CARRIER_HZ: f64 = 5.9e9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("invalid sample: {0}")]
    Sample(String),
    #[error("sweep dimension `{0}` is empty")]
    EmptySweep(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleParams {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub carrier_hz: f64,
    pub floor_coeff: f64,
    pub noise_std: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            a: 0.5,
            b: 1.0,
            gamma: 1.0,
            carrier_hz: DEFAULT_CARRIER_HZ,
            floor_coeff: 0.0,
            noise_std: 0.0,
        }
    }
}

impl OracleParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let positive = [
            ("a", self.a),
            ("gamma", self.gamma),
            ("carrier_hz", self.carrier_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SynthError::Param(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let nonneg = [
            ("b", self.b),
            ("floor_coeff", self.floor_coeff),
            ("noise_std", self.noise_std),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SynthError::Param(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Error-floor term added to the waterfall before clipping.
pub trait FloorModel: Sync {
    fn floor(&self, doppler_hz: f64, sample: &RawSample) -> f64;
}

/// `coeff * doppler / (n_dmrs + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerPerPilot {
    pub coeff: f64,
}

impl FloorModel for DopplerPerPilot {
    fn floor(&self, doppler_hz: f64, sample: &RawSample) -> f64 {
        self.coeff * doppler_hz / (sample.n_dmrs as f64 + 1.0)
    }
}

impl<F: Fn(f64, &RawSample) -> f64 + Sync> FloorModel for F {
    fn floor(&self, doppler_hz: f64, sample: &RawSample) -> f64 {
        self(doppler_hz, sample)
    }
}

/// Maximum Doppler shift in Hz for a relative speed in km/h.
pub fn doppler_spread(v_rel_kmph: f64, carrier_hz: f64) -> Result<f64, SynthError> {
    if !(v_rel_kmph >= 0.0) {
        return Err(SynthError::Param(format!(
            "velocity must be nonnegative, got {v_rel_kmph}"
        )));
    }
    if !(carrier_hz > 0.0) {
        return Err(SynthError::Param(format!(
            "carrier must be positive, got {carrier_hz}"
        )));
    }
    Ok(v_rel_kmph / 3.6 / SPEED_OF_LIGHT * carrier_hz)
}

/// Noise-free BLER with the default floor.
pub fn clean_bler(params: &OracleParams, sample: &RawSample) -> Result<f64, SynthError> {
    clean_bler_with(
        params,
        &DopplerPerPilot {
            coeff: params.floor_coeff,
        },
        sample,
    )
}

pub fn clean_bler_with<M: FloorModel + ?Sized>(
    params: &OracleParams,
    floor: &M,
    sample: &RawSample,
) -> Result<f64, SynthError> {
    sample.validate(false).map_err(SynthError::Sample)?;
    let doppler = doppler_spread(sample.v_rel_kmph, params.carrier_hz)?;
    let snr_lin = 10f64.powf(sample.snr_tb_db / 10.0);
    let waterfall = params.a * (-params.b * snr_lin.powf(params.gamma)).exp();
    let v = waterfall + floor.floor(doppler, sample);
    Ok(clip_bler(v))
}

fn clip_bler(v: f64) -> f64 {
    if v.is_nan() {
        return 1.0;
    }
    v.clamp(BLER_FLOOR, 1.0)
}

/// BLER for one sample (its `bler` field is ignored). With
/// `noise_std > 0` a Gaussian draw is added to `-ln(BLER)`.
pub fn oracle_bler<R: rand::Rng + ?Sized>(
    params: &OracleParams,
    sample: &RawSample,
    rng: &mut R,
) -> Result<f64, SynthError> {
    oracle_bler_with(
        params,
        &DopplerPerPilot {
            coeff: params.floor_coeff,
        },
        sample,
        rng,
    )
}

pub fn oracle_bler_with<M: FloorModel + ?Sized, R: rand::Rng + ?Sized>(
    params: &OracleParams,
    floor: &M,
    sample: &RawSample,
    rng: &mut R,
) -> Result<f64, SynthError> {
    let clean = clean_bler_with(params, floor, sample)?;
    if params.noise_std == 0.0 {
        return Ok(clean);
    }
    let normal =
        Normal::new(0.0, params.noise_std).map_err(|e| SynthError::Param(e.to_string()))?;
    let y = -clean.ln() + normal.sample(rng);
    Ok(clip_bler((-y).exp()))
}

/// Value sets for each feature; the grid is their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub snr_tb_db: Vec<f64>,
    pub mcs_code_rate: Vec<f64>,
    pub mcs_modulation_index: Vec<u32>,
    pub v_rel_kmph: Vec<f64>,
    pub n_sub: Vec<u32>,
    pub n_dmrs: Vec<u32>,
    pub flag_urban: Vec<u8>,
    pub flag_nlos: Vec<u8>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            snr_tb_db: vec![0.0],
            mcs_code_rate: vec![0.5],
            mcs_modulation_index: vec![2],
            v_rel_kmph: vec![0.0],
            n_sub: vec![12],
            n_dmrs: vec![2],
            flag_urban: vec![0],
            flag_nlos: vec![0],
        }
    }
}

impl SweepSpec {
    pub fn len(&self) -> usize {
        self.snr_tb_db.len()
            * self.mcs_code_rate.len()
            * self.mcs_modulation_index.len()
            * self.v_rel_kmph.len()
            * self.n_sub.len()
            * self.n_dmrs.len()
            * self.flag_urban.len()
            * self.flag_nlos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self) -> Result<(), SynthError> {
        let dims: [(&'static str, usize); 8] = [
            ("snr_tb_db", self.snr_tb_db.len()),
            ("mcs_code_rate", self.mcs_code_rate.len()),
            ("mcs_modulation_index", self.mcs_modulation_index.len()),
            ("v_rel_kmph", self.v_rel_kmph.len()),
            ("n_sub", self.n_sub.len()),
            ("n_dmrs", self.n_dmrs.len()),
            ("flag_urban", self.flag_urban.len()),
            ("flag_nlos", self.flag_nlos.len()),
        ];
        match dims.iter().find(|(_, n)| *n == 0) {
            Some((name, _)) => Err(SynthError::EmptySweep(name)),
            None => Ok(()),
        }
    }

    /// Grid points in canonical order (SNR varies slowest, NLOS flag fastest),
    /// with `bler` left at its default.
    pub fn points(&self) -> Result<Vec<RawSample>, SynthError> {
        self.check()?;
        let mut out = Vec::with_capacity(self.len());
        for &snr in &self.snr_tb_db {
            for &rate in &self.mcs_code_rate {
                for &m in &self.mcs_modulation_index {
                    for &v in &self.v_rel_kmph {
                        for &ns in &self.n_sub {
                            for &nd in &self.n_dmrs {
                                for &fu in &self.flag_urban {
                                    for &fl in &self.flag_nlos {
                                        let s = RawSample {
                                            snr_tb_db: snr,
                                            mcs_code_rate: rate,
                                            mcs_modulation_index: m,
                                            v_rel_kmph: v,
                                            n_sub: ns,
                                            n_dmrs: nd,
                                            flag_urban: fu,
                                            flag_nlos: fl,
                                            bler: 1.0,
                                        };
                                        s.validate(false).map_err(SynthError::Sample)?;
                                        out.push(s);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Labels every grid point with [`oracle_bler`]. Noise for point `i` is
/// drawn from stream `i` of a generator seeded with `seed`, so output is
/// independent of how the grid is chunked.
pub fn generate_grid(
    params: &OracleParams,
    sweep: &SweepSpec,
    seed: u64,
) -> Result<Vec<RawSample>, SynthError> {
    generate_grid_with(
        params,
        &DopplerPerPilot {
            coeff: params.floor_coeff,
        },
        sweep,
        seed,
    )
}

pub fn generate_grid_with<M: FloorModel + ?Sized>(
    params: &OracleParams,
    floor: &M,
    sweep: &SweepSpec,
    seed: u64,
) -> Result<Vec<RawSample>, SynthError> {
    params.validate()?;
    let mut points = sweep.points()?;
    for (i, p) in points.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        p.bler = oracle_bler_with(params, floor, p, &mut rng)?;
    }
    Ok(points)
}
