//! Observed convergence orders under grid halving.

use serde::Serialize;

use crate::chart::observed_order;

/// Residuals at or below this are treated as exact; no order is measured from them.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub coarse: f64,
    pub fine: f64,
    pub order: Option<f64>,
    pub at_noise_floor: bool,
}

impl Convergence {
    pub fn new(coarse: f64, fine: f64) -> Self {
        let at_noise_floor = coarse <= NOISE_FLOOR && fine <= NOISE_FLOOR;
        let order = (!at_noise_floor).then(|| observed_order(coarse, fine));
        Self { coarse, fine, order, at_noise_floor }
    }

    pub fn reaches(&self, min_order: f64) -> bool {
        self.at_noise_floor || self.order.is_some_and(|p| p >= min_order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        let c = Convergence::new(4e-3, 1e-3);
        assert_eq!(c.order, Some(2.0));
        assert!(c.reaches(1.8) && !c.reaches(2.1));
        let exact = Convergence::new(1e-14, 3e-14);
        assert!(exact.at_noise_floor && exact.reaches(1.8));
        assert!(!Convergence::new(1e-2, 0.95e-2).reaches(1.8));
    }
}
