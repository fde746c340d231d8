//! Physical parameters and the basis labels of the displaced frame.

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};

/// Parameters of the Rabi Hamiltonian
/// `ω(a†a + ½) + ½Ωσ_z + g(σ₊ + σ₋)(a† + a)`.
///
/// All three share one energy unit; `omega` sets the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub atom_freq: f64,
    pub coupling: f64,
}

impl ModelParams {
    pub fn new(omega: f64, atom_freq: f64, coupling: f64) -> Self {
        Self { omega, atom_freq, coupling }
    }

    /// Parameters given in units of `omega = 1`.
    pub fn in_units_of_omega(atom_freq: f64, coupling: f64) -> Self {
        Self::new(1.0, atom_freq, coupling)
    }

    /// Checks every invariant and returns the parameters unchanged.
    pub fn validate(self) -> Result<Self> {
        validate(self)
    }

    /// Ω/ω.
    pub fn atom_ratio(&self) -> f64 {
        self.atom_freq / self.omega
    }

    /// g/ω.
    pub fn coupling_ratio(&self) -> f64 {
        self.coupling / self.omega
    }

    /// Multiplies all three frequencies by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.omega * s, self.atom_freq * s, self.coupling * s)
    }
}

pub fn validate(params: ModelParams) -> Result<ModelParams> {
    let ModelParams { omega, atom_freq, coupling } = params;
    if !omega.is_finite() || !atom_freq.is_finite() || !coupling.is_finite() {
        return Err(RabiError::Domain("parameters must be finite".into()));
    }
    if omega <= 0.0 {
        return Err(RabiError::Domain("omega must be positive".into()));
    }
    if atom_freq < 0.0 {
        return Err(RabiError::Domain("atom_freq must be non-negative".into()));
    }
    if coupling < 0.0 {
        return Err(RabiError::Domain("coupling must be non-negative".into()));
    }
    Ok(params)
}

/// Atomic branch of the displaced-frame basis, `|±⟩ = (|e⟩ ± |g⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// +1 for `Plus`, −1 for `Minus`.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Basis state `|branch, N⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub branch: Branch,
    pub photon_n: usize,
}

impl BasisLabel {
    pub fn new(branch: Branch, photon_n: usize) -> Self {
        Self { branch, photon_n }
    }

    pub fn plus(photon_n: usize) -> Self {
        Self::new(Branch::Plus, photon_n)
    }

    pub fn minus(photon_n: usize) -> Self {
        Self::new(Branch::Minus, photon_n)
    }

    /// The unperturbed ground state `|−, 0⟩`.
    pub fn ground() -> Self {
        Self::minus(0)
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let b = match self.branch {
            Branch::Plus => '+',
            Branch::Minus => '-',
        };
        write!(f, "|{}, {}>", b, self.photon_n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_legal_params() {
        assert!(validate(ModelParams::new(1.0, 1.0, 0.2)).is_ok());
        // free field plus bare atom
        assert!(validate(ModelParams::new(1.0, 0.0, 0.0)).is_ok());
    }

    #[test]
    fn validate_rejects_boundaries() {
        let err = validate(ModelParams::new(0.0, 1.0, 0.2)).unwrap_err();
        assert_eq!(err, RabiError::Domain("omega must be positive".into()));
        assert!(validate(ModelParams::new(1.0, -0.1, 0.2)).is_err());
        assert!(validate(ModelParams::new(1.0, 1.0, -0.2)).is_err());
        assert!(validate(ModelParams::new(f64::NAN, 1.0, 0.2)).is_err());
        assert!(validate(ModelParams::new(1.0, f64::INFINITY, 0.2)).is_err());
    }

    #[test]
    fn branch_sign_and_flip() {
        assert_eq!(Branch::Plus.sign(), 1.0);
        assert_eq!(Branch::Minus.flipped(), Branch::Plus);
        assert_eq!(BasisLabel::ground().to_string(), "|-, 0>");
    }
}
