//! Core library for joint (V_A, beta) secret-key-rate optimization of
//! rate-adaptive CV-QKD reconciliation.
//!
//! The crate splits into an analytic side and a simulation side:
//!
//! - [`gaussian`]: covariance matrices, symplectic spectra and entropies in
//!   shot-noise units;
//! - [`channel`]: transmittance, per-quadrature SNR, mutual information,
//!   the trusted-receiver Holevo bound and the secret key rate;
//! - [`ldpc`]: protograph-lifted rate-adaptive codes with raptor-like
//!   degree-1 parity extension and one-pass systematic encoding;
//! - [`sim`]: reproducible Monte-Carlo FER measurement over BI-AWGN with a
//!   flooding sum-product decoder;
//! - [`surface`]: per-rate polynomial fits of the FER samples interpolated
//!   into a closed-form f_FER(s, R);
//! - [`optimizer`]: grid sweep plus coordinate refinement of the key rate
//!   over (V_A, beta), distance sweeps and the fixed-beta baseline.

pub mod channel;
pub mod gaussian;
pub mod ldpc;
pub mod optimizer;
pub mod sim;
pub mod surface;
