//! Generalized rotating-wave approximation reference values.

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub e0_grwa: f64,
    pub mean_photon_grwa: f64,
}

/// `ω/2 − g²/ω − (Ω/2)·exp[−2(g/ω)²]`.
pub fn energy_grwa(params: &ModelParams) -> f64 {
    let a = params.atom_ratio();
    let c = params.coupling_ratio();
    params.omega * (0.5 - c * c - 0.5 * a * (-2.0 * c * c).exp())
}

/// `g²/ω²`, independent of Ω.
pub fn mean_photon_grwa(params: &ModelParams) -> f64 {
    let c = params.coupling_ratio();
    c * c
}

pub fn baseline(params: &ModelParams) -> BaselineResult {
    BaselineResult { e0_grwa: energy_grwa(params), mean_photon_grwa: mean_photon_grwa(params) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gvm::energy_explicit;

    #[test]
    fn energy_examples() {
        assert!((energy_grwa(&ModelParams::new(1.0, 0.0, 0.5)) - 0.25).abs() < 1e-16);
        assert_eq!(energy_grwa(&ModelParams::new(1.0, 1.0, 0.0)), 0.0);
        let e = energy_grwa(&ModelParams::new(1.0, 1.0, 0.2));
        assert!((e - (0.46 - 0.5 * (-0.08f64).exp())).abs() < 1e-16);
        assert!((e + 0.0015582).abs() < 1e-7);
    }

    #[test]
    fn photon_examples() {
        assert_eq!(mean_photon_grwa(&ModelParams::new(1.0, 1.0, 0.0)), 0.0);
        assert!((mean_photon_grwa(&ModelParams::new(1.0, 0.3, 0.6)) - 0.36).abs() < 1e-16);
        assert!((mean_photon_grwa(&ModelParams::new(2.0, 0.3, 0.6)) - 0.09).abs() < 1e-16);
    }

    #[test]
    fn photon_independent_of_atom_freq() {
        let reference = mean_photon_grwa(&ModelParams::new(1.0, 0.0, 0.6));
        for i in 0..=40 {
            let p = ModelParams::new(1.0, 0.05 * i as f64, 0.6);
            assert_eq!(mean_photon_grwa(&p), reference);
        }
    }

    #[test]
    fn coincides_with_explicit_energy_without_atom() {
        for &g in &[0.0, 0.1, 0.3, 0.77, 1.0] {
            let p = ModelParams::new(1.0, 0.0, g);
            assert_eq!(energy_grwa(&p), energy_explicit(&p));
        }
    }
}
