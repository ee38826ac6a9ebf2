//! Posterior uncertainty of a latent column norm given its sample norm.
//!
//! With a GIID compression of rank `ℓ` and a Jeffreys prior on the latent
//! variance, `‖a‖²` given `‖b‖²` is inverse-gamma. Writing
//! `‖a‖² = φ·‖b‖²/(ℓ−2)` gives the density and CDF of the relative scaling
//! `φ` implemented here.

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};

fn check_sample_rank(l: usize) -> Result<f64> {
    if l <= 2 {
        return Err(Error::Domain(format!(
            "sample rank {l}: the posterior mean needs at least 3 rows"
        )));
    }
    Ok(l as f64)
}

/// `P(φ < τ) = Γ(ℓ/2, (ℓ−2)/(2τ)) / Γ(ℓ/2)`.
pub fn scaling_cdf(l: usize, tau: f64) -> Result<f64> {
    let lf = check_sample_rank(l)?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::Domain(format!("threshold {tau} must be positive")));
    }
    if tau.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_ur(lf / 2.0, (lf - 2.0) / (2.0 * tau)).clamp(0.0, 1.0))
}

/// `p(φ | ℓ) = ((ℓ−2)/2)^{ℓ/2} / (Γ(ℓ/2)·φ^{ℓ/2+1}) · exp(−(ℓ−2)/(2φ))`.
pub fn scaling_pdf(l: usize, phi: f64) -> Result<f64> {
    let lf = check_sample_rank(l)?;
    if phi.is_nan() || phi <= 0.0 {
        return Err(Error::Domain(format!("scaling {phi} must be positive")));
    }
    let half = lf / 2.0;
    let c = (lf - 2.0) / 2.0;
    let log_p = half * c.ln() - ln_gamma(half) - (half + 1.0) * phi.ln() - c / phi;
    Ok(log_p.exp())
}

/// Posterior mean of the latent squared norm, `‖b‖²/(ℓ−2)`.
pub fn expected_norm_sq(sample_norm_sq: f64, l: usize) -> Result<f64> {
    let lf = check_sample_rank(l)?;
    Ok(sample_norm_sq / (lf - 2.0))
}

/// Johnson–Lindenstrauss probability lower bound
/// `1 − 2·exp(−ℓ·ε²·(1−ε)/4)`, clamped to `[0, 1]`.
pub fn jl_bound(l: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!(
            "relative error {eps} outside (0, 1/2)"
        )));
    }
    let lf = l as f64;
    Ok((1.0 - 2.0 * (-lf * eps * eps * (1.0 - eps) / 4.0).exp()).clamp(0.0, 1.0))
}
