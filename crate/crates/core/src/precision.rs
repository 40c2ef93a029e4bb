use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision and truncation policy shared by the analytic kernels.
///
/// Every operation that takes a `PrecisionConfig` is a deterministic function
/// of its inputs and this value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    /// Mantissa width of the extended-precision arithmetic, at least 53.
    pub mantissa_bits: u32,
    /// Absolute bound on truncation contributions (relative for products).
    pub tail_tolerance: f64,
    /// Maximum number of zeros a truncated product may enumerate.
    pub product_cutoff: usize,
}

impl PrecisionConfig {
    pub fn double() -> Self {
        Self::with_bits(53)
    }

    /// `bits`-bit mantissa with tail tolerance `2^-bits`.
    pub fn with_bits(bits: u32) -> Self {
        Self {
            mantissa_bits: bits,
            tail_tolerance: 2f64.powi(-(bits.min(1000) as i32)),
            product_cutoff: 4096,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mantissa_bits < 53 {
            return Err(Error::InvalidInput(format!(
                "mantissa_bits must be at least 53, got {}",
                self.mantissa_bits
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tail_tolerance must be positive, got {}",
                self.tail_tolerance
            )));
        }
        if self.product_cutoff < 1 {
            return Err(Error::InvalidInput("product_cutoff must be at least 1".into()));
        }
        Ok(())
    }

    /// True when plain double arithmetic honours the requested precision.
    pub fn is_double(&self) -> bool {
        self.mantissa_bits <= 53
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self::double()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = PrecisionConfig::double();
        cfg.mantissa_bits = 32;
        assert!(cfg.validate().is_err());
        let mut cfg = PrecisionConfig::double();
        cfg.tail_tolerance = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tail_tolerance = f64::NAN;
        assert!(cfg.validate().is_err());
        let mut cfg = PrecisionConfig::double();
        cfg.product_cutoff = 0;
        assert!(cfg.validate().is_err());
        assert!(PrecisionConfig::with_bits(256).validate().is_ok());
    }
}
