//! Rate-adaptive raptor-like LDPC codes built from protographs.

mod code;
mod protograph;

pub use code::{encode, extend_to_rate, lift, CodeView, LdpcError, LiftOptions, RateAdaptiveCode};
pub use protograph::{
    default_protograph, parse_protograph, Protograph, ProtographError, DEFAULT_PROTOGRAPH_TEXT,
};
