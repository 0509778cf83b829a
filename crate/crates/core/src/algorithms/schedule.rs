use crate::error::{Error, Result};

/// Geometric tolerance schedule `ε_k = ε₀ ρᵏ`, summable to `ε₀/(1 − ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub rho: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        Self { eps0: 1e-6, rho: 0.9 }
    }
}

impl EpsSchedule {
    pub fn new(eps0: f64, rho: f64) -> Result<Self> {
        let s = Self { eps0, rho };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 >= 0.0 && self.eps0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eps0 must be finite and >= 0, got {}",
                self.eps0
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay rho must lie in (0, 1), got {}",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn at(&self, k: usize) -> f64 {
        epsilon_schedule(self.eps0, self.rho, k)
    }

    /// `Σ_k ε_k`.
    pub fn total(&self) -> f64 {
        self.eps0 / (1.0 - self.rho)
    }
}

pub fn epsilon_schedule(eps0: f64, rho: f64, k: usize) -> f64 {
    eps0 * rho.powi(k.min(i32::MAX as usize) as i32)
}
