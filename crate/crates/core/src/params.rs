//! Physical and reduced model parameters.

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters of the Potts-SOS model on the Cayley tree of order `k` with
/// spins in `{0, ..., m}`.
///
/// `theta = exp(J * beta)` and `r = exp(J_p * beta)` are the only
/// combinations the recursion sees. Parameters built with
/// [`ModelParams::from_theta_r`] use `beta = 1`, `J = ln theta` and
/// `J_p = ln r`, which reproduce the same Boltzmann weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub k: usize,
    pub m: usize,
    pub j: f64,
    pub j_p: f64,
    pub beta: f64,
    pub theta: f64,
    pub r: f64,
}

impl ModelParams {
    /// Builds parameters from couplings and inverse temperature.
    pub fn new(k: usize, m: usize, j: f64, j_p: f64, beta: f64) -> Result<Self> {
        check_orders(k, m)?;
        if !(j.is_finite() && j_p.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite input (J={j}, J_p={j_p}, beta={beta})"
            )));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if j == 0.0 || j_p == 0.0 {
            return Err(Error::InvalidParameter(
                "couplings J and J_p must be nonzero (use from_theta_r for theta = 1)".into(),
            ));
        }
        let theta = (j * beta).exp();
        let r = (j_p * beta).exp();
        if !(theta.is_finite() && r.is_finite() && theta > 0.0 && r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "exp(J*beta) or exp(J_p*beta) leaves the positive finite range (theta={theta}, r={r})"
            )));
        }
        Ok(Self { k, m, j, j_p, beta, theta, r })
    }

    /// Builds parameters directly from the reduced weights. `theta = 1`
    /// (vanishing SOS coupling, the pure Potts limit) is accepted.
    pub fn from_theta_r(k: usize, m: usize, theta: f64, r: f64) -> Result<Self> {
        check_orders(k, m)?;
        check_weights(theta, r)?;
        Ok(Self { k, m, j: theta.ln(), j_p: r.ln(), beta: 1.0, theta, r })
    }

    /// `theta = 1` makes the boundary-law map non-injective in general;
    /// solver output for such points is flagged.
    pub fn is_degenerate(&self) -> bool {
        self.theta == 1.0
    }
}

fn check_orders(k: usize, m: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter("tree order k must be at least 1".into()));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("maximal spin m must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_weights(theta: f64, r: f64) -> Result<()> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive and finite, got {theta}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive and finite, got {r}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_constructor_allows_potts_limit() {
        let p = ModelParams::from_theta_r(2, 2, 1.0, 1.0).unwrap();
        assert_eq!(p.theta, 1.0);
        assert_eq!(p.r, 1.0);
        assert!(p.is_degenerate());
    }

    #[test]
    fn exponentials_of_couplings() {
        let p = ModelParams::new(2, 2, -0.693147, -1.386294, 1.0).unwrap();
        assert!((p.theta - 0.5).abs() < 1e-6);
        assert!((p.r - 0.25).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ModelParams::new(2, 2, 1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(2, 2, 1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(2, 2, f64::NAN, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, 2, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, 2, 1000.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0, 2, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, 0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::from_theta_r(2, 2, 0.0, 1.0).is_err());
        assert!(ModelParams::from_theta_r(2, 2, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn reduced_constructor_reproduces_weights() {
        let p = ModelParams::from_theta_r(3, 2, 0.3, 0.09).unwrap();
        assert!(((p.j * p.beta).exp() - 0.3).abs() < 1e-15);
        assert!(((p.j_p * p.beta).exp() - 0.09).abs() < 1e-15);
    }
}
