//! Closed-form FER surface: per-rate polynomial fits of the Monte-Carlo
//! samples plus cross-rate coefficient interpolation.
//!
//! Each rate's samples are fitted by weighted least squares (weights are
//! inverse squared CI widths) with a degree-`d` polynomial in the
//! domain-normalized coordinate `u = (s - s_min) / (s_max - s_min)`.
//! Normalizing per fit matters: adjacent rates occupy disjoint SNR windows,
//! so interpolating raw powers of `s` across rates would be meaningless,
//! while in `u` the waterfall shapes line up. Evaluation between two knot
//! rates linearly interpolates both the coefficient vectors and the domain
//! endpoints, evaluates the polynomial at the clamped, renormalized `s`, and
//! clamps the result into [0, 1]. At a knot this reduces exactly to that
//! knot's own curve.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::FerSample;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("need at least {need} samples for degree {degree}, got {got}")]
    Underdetermined {
        need: usize,
        got: usize,
        degree: usize,
    },
    #[error("samples mix rates {0} and {1}")]
    MixedRates(f64, f64),
    #[error("degenerate ladder: all samples at s = {0}")]
    DegenerateLadder(f64),
    #[error("least-squares solve failed")]
    SolveFailed,
    #[error("fit leaves [-0.1, 1.1] inside its domain (reached {0:.3})")]
    FitQuality(f64),
    #[error("need at least 2 fits, got {0}")]
    TooFewFits(usize),
    #[error("duplicate rate {0}")]
    DuplicateRate(f64),
    #[error("fits mix degrees or transforms")]
    MixedFits,
    #[error("rate {rate} outside surface range [{min_rate}, {max_rate}]")]
    RateOutOfRange {
        rate: f64,
        min_rate: f64,
        max_rate: f64,
    },
    #[error("unsupported surface schema version {0}")]
    SchemaVersion(u32),
    #[error("surface JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitTransform {
    /// Fit the FER values themselves.
    Direct,
    /// Fit log-odds of the FER; numerically robust near 0 and 1 and never
    /// evaluates to exactly 0 or 1.
    Logit,
}

/// Fitted FER curve of a single rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurveFit {
    pub rate: f64,
    pub degree: usize,
    /// Ascending powers of the domain-normalized coordinate `u`.
    pub coefficients: Vec<f64>,
    /// `[s_min, s_max]` of the fitted samples, linear SNR.
    pub domain: (f64, f64),
    pub transform: FitTransform,
    /// RMS residual in FER units over the fitted samples.
    pub residual_rms: f64,
}

impl RateCurveFit {
    fn poly(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coefficients.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    /// Curve value at linear SNR `s`, clamped into the domain and into
    /// [0, 1].
    pub fn eval(&self, s: f64) -> f64 {
        let (lo, hi) = self.domain;
        let u = if hi > lo {
            (s.clamp(lo, hi) - lo) / (hi - lo)
        } else {
            0.0
        };
        let y = self.poly(u);
        match self.transform {
            FitTransform::Direct => y.clamp(0.0, 1.0),
            FitTransform::Logit => sigmoid(y),
        }
    }

    /// Span of the fitted FER values; fits are most trustworthy when this
    /// covers most of the waterfall (roughly [0.02, 0.8]).
    pub fn fitted_fer_span(&self) -> (f64, f64) {
        (self.eval(self.domain.1), self.eval(self.domain.0))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// FER value in transformed space; logit clamps into the open interval
/// using the sample's own frame count so that 0 and 1 stay finite.
fn transform_fer(sample: &FerSample, transform: FitTransform) -> f64 {
    match transform {
        FitTransform::Direct => sample.fer,
        FitTransform::Logit => {
            let eps = 0.5 / (sample.frames as f64 + 1.0);
            let f = sample.fer.clamp(eps, 1.0 - eps);
            (f / (1.0 - f)).ln()
        }
    }
}

/// Weighted least-squares fit of one rate's samples.
///
/// Requires `degree + 2` samples at `degree + 1` distinct SNRs. Weights are
/// `1 / ci_width^2` (floored to avoid infinite weight on degenerate CIs).
pub fn fit_rate_curve(
    samples: &[FerSample],
    degree: usize,
    transform: FitTransform,
) -> Result<RateCurveFit, SurfaceError> {
    let need = degree + 2;
    if samples.len() < need {
        return Err(SurfaceError::Underdetermined {
            need,
            got: samples.len(),
            degree,
        });
    }
    let rate = samples[0].rate;
    if let Some(bad) = samples.iter().find(|x| x.rate != rate) {
        return Err(SurfaceError::MixedRates(rate, bad.rate));
    }
    let s_min = samples.iter().map(|x| x.s).fold(f64::INFINITY, f64::min);
    let s_max = samples.iter().map(|x| x.s).fold(f64::NEG_INFINITY, f64::max);
    let mut distinct: Vec<f64> = samples.iter().map(|x| x.s).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < degree + 1 {
        if distinct.len() == 1 {
            return Err(SurfaceError::DegenerateLadder(distinct[0]));
        }
        return Err(SurfaceError::Underdetermined {
            need: degree + 1,
            got: distinct.len(),
            degree,
        });
    }

    let n = samples.len();
    let cols = degree + 1;
    let mut a = DMatrix::zeros(n, cols);
    let mut b = DVector::zeros(n);
    for (i, sm) in samples.iter().enumerate() {
        let u = if s_max > s_min {
            (sm.s - s_min) / (s_max - s_min)
        } else {
            0.0
        };
        let w = 1.0 / (sm.ci_high - sm.ci_low).max(1e-6).powi(2);
        let sw = w.sqrt();
        let mut p = 1.0;
        for j in 0..cols {
            a[(i, j)] = sw * p;
            p *= u;
        }
        b[i] = sw * transform_fer(sm, transform);
    }
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-12).map_err(|_| SurfaceError::SolveFailed)?;
    let fit = RateCurveFit {
        rate,
        degree,
        coefficients: sol.iter().copied().collect(),
        domain: (s_min, s_max),
        transform,
        residual_rms: 0.0,
    };
    // Quality gate: the raw polynomial must stay near [0, 1] inside the
    // domain (only meaningful for direct fits; logit is bounded by
    // construction).
    if transform == FitTransform::Direct {
        for i in 0..=100 {
            let y = fit.poly(i as f64 / 100.0);
            if !(-0.1..=1.1).contains(&y) {
                return Err(SurfaceError::FitQuality(y));
            }
        }
    }
    let mut ss = 0.0;
    for sm in samples {
        let r = fit.eval(sm.s) - sm.fer;
        ss += r * r;
    }
    Ok(RateCurveFit {
        residual_rms: (ss / n as f64).sqrt(),
        ..fit
    })
}

/// Closed-form surface `f_FER(s, R)` over the fitted rate range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerSurface {
    /// Sorted ascending by rate.
    fits: Vec<RateCurveFit>,
    rate_range: (f64, f64),
}

/// Validates and assembles fits into a surface (sorted, distinct rates,
/// uniform degree and transform).
pub fn build_surface(mut fits: Vec<RateCurveFit>) -> Result<FerSurface, SurfaceError> {
    if fits.len() < 2 {
        return Err(SurfaceError::TooFewFits(fits.len()));
    }
    let degree = fits[0].degree;
    let transform = fits[0].transform;
    if fits
        .iter()
        .any(|f| f.degree != degree || f.transform != transform)
    {
        return Err(SurfaceError::MixedFits);
    }
    fits.sort_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap());
    for pair in fits.windows(2) {
        if pair[0].rate == pair[1].rate {
            return Err(SurfaceError::DuplicateRate(pair[0].rate));
        }
    }
    let rate_range = (fits[0].rate, fits[fits.len() - 1].rate);
    Ok(FerSurface { fits, rate_range })
}

impl FerSurface {
    pub fn rate_range(&self) -> (f64, f64) {
        self.rate_range
    }

    pub fn fits(&self) -> &[RateCurveFit] {
        &self.fits
    }

    pub fn contains_rate(&self, r: f64) -> bool {
        r >= self.rate_range.0 && r <= self.rate_range.1
    }

    /// FER at (linear SNR `s`, rate `r`).
    ///
    /// Rates outside the fitted range are a hard error (the code family
    /// does not exist there); the optimizer treats that as infeasibility,
    /// never as FER extrapolation.
    pub fn eval_fer(&self, s: f64, r: f64) -> Result<f64, SurfaceError> {
        if !self.contains_rate(r) {
            return Err(SurfaceError::RateOutOfRange {
                rate: r,
                min_rate: self.rate_range.0,
                max_rate: self.rate_range.1,
            });
        }
        let idx = match self
            .fits
            .binary_search_by(|f| f.rate.partial_cmp(&r).unwrap())
        {
            Ok(exact) => return Ok(self.fits[exact].eval(s)),
            Err(i) => i,
        };
        let lo = &self.fits[idx - 1];
        let hi = &self.fits[idx];
        let t = (r - lo.rate) / (hi.rate - lo.rate);
        let lerp = |a: f64, b: f64| (1.0 - t) * a + t * b;
        let dom = (lerp(lo.domain.0, hi.domain.0), lerp(lo.domain.1, hi.domain.1));
        let coefficients: Vec<f64> = lo
            .coefficients
            .iter()
            .zip(&hi.coefficients)
            .map(|(&a, &b)| lerp(a, b))
            .collect();
        let mid = RateCurveFit {
            rate: r,
            degree: lo.degree,
            coefficients,
            domain: dom,
            transform: lo.transform,
            residual_rms: 0.0,
        };
        Ok(mid.eval(s))
    }
}

/// Persisted JSON document: the surface plus a schema version.
#[derive(Debug, Serialize, Deserialize)]
struct SurfaceFile {
    schema_version: u32,
    surface: FerSurface,
}

pub const SURFACE_SCHEMA_VERSION: u32 = 1;

pub fn write_surface_json<W: Write>(w: W, surface: &FerSurface) -> Result<(), SurfaceError> {
    let doc = SurfaceFile {
        schema_version: SURFACE_SCHEMA_VERSION,
        surface: surface.clone(),
    };
    serde_json::to_writer_pretty(w, &doc)?;
    Ok(())
}

pub fn read_surface_json<R: Read>(r: R) -> Result<FerSurface, SurfaceError> {
    let doc: SurfaceFile = serde_json::from_reader(r)?;
    if doc.schema_version != SURFACE_SCHEMA_VERSION {
        return Err(SurfaceError::SchemaVersion(doc.schema_version));
    }
    Ok(doc.surface)
}
