//! Coherence profile `mu(dx, tau)` linking detector separation and time lag
//! to the squared first-order coherence that the closed forms take as input.
//!
//! The profile is a separable Gaussian in both arguments, a Gaussian-Schell
//! style model for rotating-ground-glass pseudothermal light. `mu_peak < 1`
//! emulates imperfect coherence at zero separation and lag.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoherenceModel {
    /// Spatial coherence width, same unit as `dx`.
    pub sigma_x: f64,
    /// Coherence time, same unit as `tau`.
    pub tau_c: f64,
    /// Squared coherence at zero separation and lag, in `[0, 1]`.
    pub mu_peak: f64,
}

impl CoherenceModel {
    pub fn new(sigma_x: f64, tau_c: f64, mu_peak: f64) -> Result<Self> {
        if !(sigma_x > 0.0) || !sigma_x.is_finite() {
            return Err(Error::InvalidParams(format!(
                "sigma_x must be finite and > 0, got {sigma_x}"
            )));
        }
        if !(tau_c > 0.0) || !tau_c.is_finite() {
            return Err(Error::InvalidParams(format!(
                "tau_c must be finite and > 0, got {tau_c}"
            )));
        }
        if !(0.0..=1.0).contains(&mu_peak) {
            return Err(Error::InvalidParams(format!(
                "mu_peak must lie in [0, 1], got {mu_peak}"
            )));
        }
        Ok(Self {
            sigma_x,
            tau_c,
            mu_peak,
        })
    }

    /// `mu(dx, tau) = mu_peak exp(-(dx/sigma_x)^2) exp(-(tau/tau_c)^2)`.
    pub fn mu_at(&self, dx: f64, tau: f64) -> f64 {
        let sx = dx / self.sigma_x;
        let st = tau / self.tau_c;
        self.mu_peak * (-(sx * sx) - st * st).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        assert!(CoherenceModel::new(0.0, 1.0, 1.0).is_err());
        assert!(CoherenceModel::new(1.0, -1.0, 1.0).is_err());
        assert!(CoherenceModel::new(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn peak_at_origin() {
        let m = CoherenceModel::new(2.0, 3.0, 0.8).unwrap();
        assert_eq!(m.mu_at(0.0, 0.0), 0.8);
    }

    #[test]
    fn gaussian_point() {
        let m = CoherenceModel::new(1.0, 1.0, 1.0).unwrap();
        assert!((m.mu_at(1.0, 0.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn incoherent_limit() {
        let m = CoherenceModel::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.mu_at(1e6, 0.0), 0.0);
    }

    #[test]
    fn symmetric_in_sign() {
        let m = CoherenceModel::new(1.5, 2.5, 0.9).unwrap();
        assert_eq!(m.mu_at(0.7, -1.2), m.mu_at(-0.7, 1.2));
    }

    #[test]
    fn monotone_decay() {
        let m = CoherenceModel::new(1.0, 1.0, 1.0).unwrap();
        let mut prev = m.mu_at(0.0, 0.0);
        for i in 1..20 {
            let v = m.mu_at(0.1 * i as f64, 0.05 * i as f64);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn factorizes() {
        let m = CoherenceModel::new(1.3, 0.7, 0.85).unwrap();
        for &(dx, tau) in &[(0.2, 0.4), (1.0, 0.1), (2.5, 3.0)] {
            let lhs = m.mu_at(dx, tau);
            let rhs = m.mu_at(dx, 0.0) * m.mu_at(0.0, tau) / m.mu_peak;
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }
}
