//! Pure-erasure photon loss.
//!
//! A photon either arrives untouched or disappears. `eta` is the honest
//! per-leg efficiency; `eta_prime` is the efficiency of the dishonest agent's
//! replacement line.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ChannelError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
}

fn check(name: &'static str, value: f64) -> Result<f64, ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ChannelError::OutOfRange { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub eta: f64,
    pub eta_prime: f64,
}

impl ChannelConfig {
    pub fn new(eta: f64, eta_prime: f64) -> Result<Self, ChannelError> {
        Ok(Self {
            eta: check("eta", eta)?,
            eta_prime: check("eta_prime", eta_prime)?,
        })
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        check("eta", self.eta)?;
        check("eta_prime", self.eta_prime)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered,
    Lost,
}

impl Delivery {
    pub fn delivered(self) -> bool {
        self == Delivery::Delivered
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Drop,
}

impl FilterDecision {
    pub fn kept(self) -> bool {
        self == FilterDecision::Keep
    }
}

pub fn transmit<R: Rng + ?Sized>(efficiency: f64, rng: &mut R) -> Result<Delivery, ChannelError> {
    let p = check("efficiency", efficiency)?;
    Ok(if rng.gen_bool(p) {
        Delivery::Delivered
    } else {
        Delivery::Lost
    })
}

/// Deliberate discard applied by the attacker to re-impose honest loss
/// statistics on photons it injects.
pub fn loss_filter<R: Rng + ?Sized>(keep_probability: f64, rng: &mut R) -> Result<FilterDecision, ChannelError> {
    let p = check("keep_probability", keep_probability)?;
    Ok(if rng.gen_bool(p) {
        FilterDecision::Keep
    } else {
        FilterDecision::Drop
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TRIALS: usize = 100_000;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x5eed)
    }

    #[test]
    fn extremes_are_deterministic() {
        let mut r = rng();
        for _ in 0..1000 {
            assert_eq!(transmit(1.0, &mut r).unwrap(), Delivery::Delivered);
            assert_eq!(transmit(0.0, &mut r).unwrap(), Delivery::Lost);
            assert_eq!(loss_filter(1.0, &mut r).unwrap(), FilterDecision::Keep);
        }
    }

    #[test]
    fn delivered_fraction_matches_efficiency() {
        let mut r = rng();
        let n = (0..TRIALS)
            .filter(|_| transmit(0.3, &mut r).unwrap().delivered())
            .count();
        assert!((n as f64 / TRIALS as f64 - 0.3).abs() < 0.01);
    }

    #[test]
    fn kept_fraction_matches_probability() {
        let mut r = rng();
        let n = (0..TRIALS).filter(|_| loss_filter(0.4, &mut r).unwrap().kept()).count();
        assert!((n as f64 / TRIALS as f64 - 0.4).abs() < 0.01);
    }

    #[test]
    fn composition_multiplies() {
        let mut r = rng();
        let n = (0..TRIALS)
            .filter(|_| transmit(1.0, &mut r).unwrap().delivered() && loss_filter(0.4, &mut r).unwrap().kept())
            .count();
        assert!((n as f64 / TRIALS as f64 - 0.4).abs() < 0.01);
        let n = (0..TRIALS)
            .filter(|_| transmit(0.8, &mut r).unwrap().delivered() && loss_filter(0.5, &mut r).unwrap().kept())
            .count();
        assert!((n as f64 / TRIALS as f64 - 0.4).abs() < 0.01);
    }

    #[test]
    fn out_of_range_rejected() {
        let mut r = rng();
        assert!(transmit(1.5, &mut r).is_err());
        assert!(transmit(-0.1, &mut r).is_err());
        assert!(loss_filter(f64::NAN, &mut r).is_err());
        assert!(ChannelConfig::new(0.3, 1.2).is_err());
    }
}
