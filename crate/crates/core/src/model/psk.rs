use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::C64;

/// M-PSK alphabet with symbols exp(j(2i+1)pi/M), i = 0..M-1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PskSymbolSet {
    order: usize,
}

impl PskSymbolSet {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(IsacError::InvalidConfig(vec![format!(
                "psk_order: {order} is not a power of two >= 2"
            )]));
        }
        Ok(PskSymbolSet { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Half-angle of a decision sector, pi/M.
    pub fn half_angle(&self) -> f64 {
        PI / self.order as f64
    }

    pub fn symbol(&self, index: usize) -> C64 {
        let i = index % self.order;
        C64::from_polar(1.0, (2 * i + 1) as f64 * PI / self.order as f64)
    }

    pub fn symbols(&self) -> Vec<C64> {
        (0..self.order).map(|i| self.symbol(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_symbols_sit_on_the_diagonals() {
        let set = PskSymbolSet::new(4).unwrap();
        let h = 0.5f64.sqrt();
        let expected = [(h, h), (-h, h), (-h, -h), (h, -h)];
        for (s, (re, im)) in set.symbols().iter().zip(expected) {
            assert!((s.re - re).abs() < 1e-15 && (s.im - im).abs() < 1e-15);
        }
        assert_eq!(set.half_angle(), PI / 4.0);
    }

    #[test]
    fn unit_modulus_for_every_order() {
        for m in [2, 4, 8, 16, 64] {
            let set = PskSymbolSet::new(m).unwrap();
            assert!(set.symbols().iter().all(|s| (s.norm() - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(PskSymbolSet::new(1).is_err());
        assert!(PskSymbolSet::new(6).is_err());
    }
}
