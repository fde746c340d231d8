//! Generalized variational ground state.
//!
//! The Hamiltonian is rotated so the coupling reads `−gσ_z(a† + a)` and then
//! displaced by `U = exp[λσ_z(a† − a)]`. The diagonal of the displaced
//! Hamiltonian in the `|±, N⟩` basis is the unperturbed problem, λ minimizes
//! its ground energy, and the off-diagonal remainder is treated to second
//! order in the energy and first order in the state.
//!
//! Internally everything is evaluated in units of ω (`Ω/ω`, `g/ω`); energies
//! are multiplied by ω on the way out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::model::{validate, BasisLabel, ModelParams};
use crate::roots;
use crate::specfun::{laguerre_assoc, laguerre_sequence, scaled_power_term};

/// Number of grid cells scanned for stationary points of `E₀⁽⁰⁾(λ)`.
const ROOT_SCAN_CELLS: usize = 64;
const ROOT_MAX_ITER: usize = 200;

/// Truncation and tolerance settings for the perturbative sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Largest photon index kept in the sums over N.
    pub n_max: usize,
    /// Relative term size below which a sum is cut early.
    pub term_tol: f64,
    /// Bound on the stationarity residual, in units of ω.
    pub root_tol: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self { n_max: 60, term_tol: 1e-16, root_tol: 1e-13 }
    }
}

impl PerturbationConfig {
    pub fn validate(self) -> Result<Self> {
        if self.n_max < 2 {
            return Err(RabiError::Domain("n_max must be at least 2".into()));
        }
        if !(self.term_tol > 0.0) || !(self.root_tol > 0.0) {
            return Err(RabiError::Domain("tolerances must be positive".into()));
        }
        Ok(self)
    }
}

/// How λ is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMethod {
    /// Root of the stationarity condition minimizing `E₀⁽⁰⁾`.
    ExactRoot,
    /// `λ = −g/(ω + Ω)`.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub lam: f64,
    /// `F(λ) = −(Ω/2)·exp(−2λ²)`.
    pub f_lam: f64,
    pub e0_unperturbed: f64,
    /// `|λ[ω + Ω·exp(−2λ²)] + g|`.
    pub stationarity_residual: f64,
    pub method: LambdaMethod,
}

/// First-order expansion of the ground state in the displaced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionExpansion {
    pub lam: f64,
    pub coeffs: BTreeMap<BasisLabel, f64>,
    pub normalized: bool,
}

impl WavefunctionExpansion {
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    pub fn coeff(&self, label: BasisLabel) -> f64 {
        self.coeffs.get(&label).copied().unwrap_or(0.0)
    }

    /// Copy rescaled to unit norm.
    pub fn normalize(&self) -> Self {
        let norm = self.norm_sq().sqrt();
        Self {
            lam: self.lam,
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v / norm)).collect(),
            normalized: true,
        }
    }

    /// Terms other than `|−, 0⟩`.
    pub fn corrections(&self) -> impl Iterator<Item = (&BasisLabel, &f64)> {
        self.coeffs.iter().filter(|(k, _)| **k != BasisLabel::ground())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub solution: VariationalSolution,
    pub e0_order2: f64,
    pub e0_total: f64,
    pub wavefunction: WavefunctionExpansion,
    pub mean_photon_full: f64,
    pub mean_photon_approx: f64,
}

// Dimensionless parameters (Ω/ω, g/ω).
#[derive(Clone, Copy)]
struct Reduced {
    atom: f64,
    coupling: f64,
}

impl Reduced {
    fn of(params: &ModelParams) -> Self {
        Self { atom: params.atom_ratio(), coupling: params.coupling_ratio() }
    }

    fn f_lam(&self, lam: f64) -> f64 {
        -0.5 * self.atom * (-2.0 * lam * lam).exp()
    }

    // λ(1 + a·e^{−2λ²}) + c, half the derivative of E₀⁽⁰⁾
    fn stationarity(&self, lam: f64) -> f64 {
        lam * (1.0 + self.atom * (-2.0 * lam * lam).exp()) + self.coupling
    }

    // d/dλ of `stationarity`
    fn stationarity_slope(&self, lam: f64) -> f64 {
        1.0 + self.atom * (-2.0 * lam * lam).exp() * (1.0 - 4.0 * lam * lam)
    }

    // the |−,0⟩ diagonal element, L_0 = 1
    fn e0(&self, lam: f64) -> f64 {
        self.level(lam, BasisLabel::ground(), 1.0)
    }

    fn level(&self, lam: f64, label: BasisLabel, laguerre_n: f64) -> f64 {
        lam * lam + 2.0 * lam * self.coupling + (label.photon_n as f64 + 0.5)
            - label.branch.sign() * self.f_lam(lam) * laguerre_n
    }

    // (c + λ) − 2λF: coupling of |−,0⟩ to |+,1⟩ up to sign
    fn plus_one_numerator(&self, lam: f64) -> f64 {
        (self.coupling + lam) - 2.0 * lam * self.f_lam(lam)
    }

    // E_{+,1}⁽⁰⁾ − E₀⁽⁰⁾ = 1 − 2F(1 − 2λ²)
    fn plus_one_gap(&self, lam: f64) -> f64 {
        1.0 - 2.0 * self.f_lam(lam) * (1.0 - 2.0 * lam * lam)
    }
}

/// `F(λ) = −(Ω/2)·exp(−2λ²)` in energy units.
pub fn f_lambda(lam: f64, params: &ModelParams) -> f64 {
    params.omega * Reduced::of(params).f_lam(lam)
}

/// `λ[ω + Ω·exp(−2λ²)] + g`; half of `dE₀⁽⁰⁾/dλ`.
pub fn stationarity(lam: f64, params: &ModelParams) -> f64 {
    params.omega * Reduced::of(params).stationarity(lam)
}

fn solution(lam: f64, params: &ModelParams, method: LambdaMethod) -> VariationalSolution {
    let r = Reduced::of(params);
    VariationalSolution {
        lam,
        f_lam: params.omega * r.f_lam(lam),
        e0_unperturbed: params.omega * r.e0(lam),
        stationarity_residual: params.omega * r.stationarity(lam).abs(),
        method,
    }
}

/// λ minimizing the unperturbed ground energy.
///
/// All stationary points lie in `[−g/ω, 0]`. The interval is scanned for
/// sign changes of the stationarity function, each crossing from negative to
/// positive (a local minimum of `E₀⁽⁰⁾`) is refined with Brent's method, and
/// the lowest-energy one is returned.
pub fn solve_lambda_exact(params: &ModelParams, cfg: &PerturbationConfig) -> Result<VariationalSolution> {
    let params = validate(*params)?;
    let cfg = cfg.validate()?;
    let r = Reduced::of(&params);
    let method = LambdaMethod::ExactRoot;

    if r.coupling == 0.0 {
        return Ok(solution(0.0, &params, method));
    }
    if r.atom == 0.0 {
        return Ok(solution(-r.coupling, &params, method));
    }

    let lo = -r.coupling;
    let f = |lam: f64| r.stationarity(lam);
    let mut best: Option<f64> = None;
    for (left, right) in roots::scan_sign_changes(f, lo, 0.0, ROOT_SCAN_CELLS) {
        let lam = if left == right {
            // exact zero on a node; keep it only if it is a minimum
            if r.stationarity_slope(left) <= 0.0 {
                continue;
            }
            left
        } else {
            if f(left) > 0.0 {
                // positive to negative: a local maximum of E₀⁽⁰⁾
                continue;
            }
            roots::brent(f, left, right, ROOT_MAX_ITER)?
        };
        if best.is_none_or(|b| r.e0(lam) < r.e0(b)) {
            best = Some(lam);
        }
    }

    let lam = best.ok_or_else(|| {
        RabiError::Convergence(format!(
            "no stationary point of the unperturbed energy in [{lo}, 0]"
        ))
    })?;
    let residual = r.stationarity(lam).abs();
    if residual > cfg.root_tol {
        return Err(RabiError::Convergence(format!(
            "stationarity residual {residual:e} exceeds root_tol {:e}",
            cfg.root_tol
        )));
    }
    if r.stationarity_slope(lam) <= 0.0 {
        return Err(RabiError::Convergence(format!(
            "stationary point λ = {lam} is not a minimum"
        )));
    }
    Ok(solution(lam, &params, method))
}

/// `λ = −g/(ω + Ω)`, valid when `exp[−2g²/(ω+Ω)²] ≈ 1`.
pub fn lambda_closed_form(params: &ModelParams) -> VariationalSolution {
    let r = Reduced::of(params);
    let lam = -r.coupling / (1.0 + r.atom);
    solution(lam, params, LambdaMethod::ClosedForm)
}

/// Diagonal element `E_{±,N}⁽⁰⁾ = λ²ω + 2λg + ω(N + ½) ∓ F(λ)·L_N(4λ²)`.
pub fn unperturbed_energy(lam: f64, params: &ModelParams, label: BasisLabel) -> f64 {
    let r = Reduced::of(params);
    let lag = laguerre_assoc(label.photon_n, 0, 4.0 * lam * lam);
    params.omega * r.level(lam, label, lag)
}

// (2λ)^{n−m}·√(m!/n!) as a running product
fn displacement_prefactor(lam: f64, n: usize, m: usize) -> f64 {
    ((m + 1)..=n).fold(1.0, |acc, j| acc * 2.0 * lam / (j as f64).sqrt())
}

/// `F(λ)(2λ)^{N−M}√(M!/N!)·L_M^{N−M}(4λ²)` for `N > M`.
///
/// Branch signs are applied by the caller: for even `N − M` the element
/// between equal branches `s` is `−s` times this value, for odd `N − M`
/// the element `⟨N, s|H_Ω|M, −s⟩` is `s` times it.
pub fn offdiag_homega(lam: f64, params: &ModelParams, n: usize, m: usize) -> Result<f64> {
    if n <= m {
        return Err(RabiError::Domain(format!(
            "offdiag_homega needs n > m (got n = {n}, m = {m})"
        )));
    }
    let r = Reduced::of(params);
    let value = r.f_lam(lam)
        * displacement_prefactor(lam, n, m)
        * laguerre_assoc(m, n - m, 4.0 * lam * lam);
    Ok(params.omega * value)
}

/// `⟨N, ±|H_g|∓, M⟩ = −√N·(g + ωλ)·δ_{N,M+1}`.
pub fn offdiag_hg(lam: f64, params: &ModelParams, n: usize, m: usize) -> f64 {
    if n != m + 1 {
        return 0.0;
    }
    let r = Reduced::of(params);
    -params.omega * (n as f64).sqrt() * (r.coupling + lam)
}

/// Matrix element `⟨bra|H_u|ket⟩` of the displaced Hamiltonian.
pub fn transformed_element(lam: f64, params: &ModelParams, bra: BasisLabel, ket: BasisLabel) -> f64 {
    if bra.photon_n < ket.photon_n {
        return transformed_element(lam, params, ket, bra);
    }
    let (n, m) = (bra.photon_n, ket.photon_n);
    if n == m {
        return if bra.branch == ket.branch {
            unperturbed_energy(lam, params, bra)
        } else {
            0.0
        };
    }
    let q = offdiag_homega(lam, params, n, m).expect("n > m");
    let s = bra.branch.sign();
    if (n - m) % 2 == 0 {
        if bra.branch == ket.branch {
            -s * q
        } else {
            0.0
        }
    } else if bra.branch != ket.branch {
        s * q + offdiag_hg(lam, params, n, m)
    } else {
        0.0
    }
}

/// Intermediate state of the second-order sum at photon index `n ≥ 2`:
/// `|+, N⟩` for odd N, `|−, N⟩` for even N.
pub fn intermediate_label(n: usize) -> BasisLabel {
    if n % 2 == 1 {
        BasisLabel::plus(n)
    } else {
        BasisLabel::minus(n)
    }
}

// Per-N data shared by the energy and wavefunction sums, in units of ω.
struct SeriesEntry {
    n: usize,
    coupling: f64,
    gap: f64,
}

// Energy sums stop on the relative size of a term of E₀⁽²⁾; amplitude sums
// stop on the relative size of a coefficient, which decays as its square root.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Truncation {
    Energy,
    Amplitude,
}

fn series_entries(
    r: &Reduced,
    lam: f64,
    cfg: &PerturbationConfig,
    truncation: Truncation,
) -> Result<(f64, Vec<SeriesEntry>)> {
    let e0 = r.e0(lam);
    let f = r.f_lam(lam);
    let lags = laguerre_sequence(cfg.n_max, 0, 4.0 * lam * lam);
    let mut out = Vec::new();
    let mut e2 = 0.0;

    let gap1 = r.plus_one_gap(lam);
    if !(gap1 > 0.0) {
        return Err(RabiError::DegenerateDenominator { state: BasisLabel::plus(1).to_string(), gap: gap1 });
    }
    let v1 = -r.plus_one_numerator(lam);
    e2 -= v1 * v1 / gap1;
    let mut norm_sq = 1.0 + (v1 / gap1).powi(2);
    out.push(SeriesEntry { n: 1, coupling: v1, gap: gap1 });

    for n in 2..=cfg.n_max {
        let label = intermediate_label(n);
        let gap = r.level(lam, label, lags[n]) - e0;
        if !(gap > 0.0) {
            return Err(RabiError::DegenerateDenominator { state: label.to_string(), gap });
        }
        let t = scaled_power_term(n, 2.0 * lam);
        let term = f * f * t / gap;
        // ⟨k|H_r|−,0⟩ = F(2λ)^N/√N!
        let sign = if lam < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        let coupling = f * sign * t.sqrt();
        out.push(SeriesEntry { n, coupling, gap });
        e2 -= term;
        let c_sq = (coupling / gap).powi(2);
        norm_sq += c_sq;
        let negligible = match truncation {
            Truncation::Energy => term.abs() < cfg.term_tol * e2.abs(),
            Truncation::Amplitude => c_sq < cfg.term_tol * cfg.term_tol * norm_sq,
        };
        if negligible {
            break;
        }
    }
    Ok((e2, out))
}

/// Second-order energy `E₀⁽²⁾`, truncated at `n_max` or when a term falls
/// below `term_tol` relative to the running sum.
pub fn second_order_energy(sol: &VariationalSolution, params: &ModelParams, cfg: &PerturbationConfig) -> Result<f64> {
    let cfg = cfg.validate()?;
    let r = Reduced::of(params);
    let (e2, _) = series_entries(&r, sol.lam, &cfg, Truncation::Energy)?;
    Ok(params.omega * e2)
}

/// Closed-form energy, `E₀⁽⁰⁾` evaluated at `λ = −g/(ω + Ω)`:
/// `ω/2 − g²(ω + 2Ω)/(ω + Ω)² − (Ω/2)·exp[−2(g/(ω + Ω))²]`.
pub fn energy_explicit(params: &ModelParams) -> f64 {
    let r = Reduced::of(params);
    let denom = 1.0 + r.atom;
    let x = r.coupling / denom;
    params.omega
        * (0.5 - r.coupling * r.coupling * (1.0 + 2.0 * r.atom) / (denom * denom)
            - 0.5 * r.atom * (-2.0 * x * x).exp())
}

/// First-order ground state in the displaced frame (unnormalized).
pub fn first_order_wavefunction(
    sol: &VariationalSolution,
    params: &ModelParams,
    cfg: &PerturbationConfig,
) -> Result<WavefunctionExpansion> {
    let cfg = cfg.validate()?;
    let r = Reduced::of(params);
    let (_, entries) = series_entries(&r, sol.lam, &cfg, Truncation::Amplitude)?;
    Ok(wavefunction_from(sol.lam, &entries))
}

fn wavefunction_from(lam: f64, entries: &[SeriesEntry]) -> WavefunctionExpansion {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(BasisLabel::ground(), 1.0);
    for e in entries {
        let c = -e.coupling / e.gap;
        if c == 0.0 {
            continue;
        }
        let label = if e.n == 1 { BasisLabel::plus(1) } else { intermediate_label(e.n) };
        coeffs.insert(label, c);
    }
    WavefunctionExpansion { lam, coeffs, normalized: false }
}

/// `⟨a†a⟩ = ⟨Ψ|a†a + λ² − λσ_z(a† + a)|Ψ⟩` on the normalized displaced-frame
/// state, with `σ_z|±, N⟩ = |∓, N⟩`.
pub fn mean_photon_full(wavefunction: &WavefunctionExpansion) -> f64 {
    let lam = wavefunction.lam;
    let norm_sq = wavefunction.norm_sq();
    let mut number = 0.0;
    let mut field = 0.0;
    for (label, &c) in &wavefunction.coeffs {
        number += c * c * label.photon_n as f64;
        let up = BasisLabel::new(label.branch.flipped(), label.photon_n + 1);
        if let Some(&c_up) = wavefunction.coeffs.get(&up) {
            field += 2.0 * c * c_up * ((label.photon_n + 1) as f64).sqrt();
        }
    }
    (number - lam * field) / norm_sq + lam * lam
}

/// `g²/[ω + Ω·exp(−2g²/ω²)]²`.
pub fn mean_photon_approx(params: &ModelParams) -> f64 {
    let r = Reduced::of(params);
    let c2 = r.coupling * r.coupling;
    let d = 1.0 + r.atom * (-2.0 * c2).exp();
    c2 / (d * d)
}

/// Diagnostic variant of [`mean_photon_approx`] with `(ω + Ω)²` in the
/// exponent, i.e. `λ²` at the closed-form λ inserted into the exact
/// stationarity relation.
pub fn mean_photon_approx_variant(params: &ModelParams) -> f64 {
    let r = Reduced::of(params);
    let c2 = r.coupling * r.coupling;
    let x = r.coupling / (1.0 + r.atom);
    let d = 1.0 + r.atom * (-2.0 * x * x).exp();
    c2 / (d * d)
}

/// Weak-Ω expansion `g²/ω² − 2g²Ω·exp(−2g²/ω²)/ω³`.
pub fn mean_photon_weak_atom(params: &ModelParams) -> f64 {
    let r = Reduced::of(params);
    let c2 = r.coupling * r.coupling;
    c2 - 2.0 * c2 * r.atom * (-2.0 * c2).exp()
}

/// Full ground-state assembly: λ per `mode`, `E₀ = E₀⁽⁰⁾ + E₀⁽²⁾` (the
/// first-order correction vanishes), the first-order state and both
/// photon-number estimates.
pub fn ground_state(params: &ModelParams, cfg: &PerturbationConfig, mode: LambdaMethod) -> Result<GroundStateResult> {
    let params = validate(*params)?;
    let cfg = cfg.validate()?;
    let solution = match mode {
        LambdaMethod::ExactRoot => solve_lambda_exact(&params, &cfg)?,
        LambdaMethod::ClosedForm => lambda_closed_form(&params),
    };
    let r = Reduced::of(&params);
    let (e2, _) = series_entries(&r, solution.lam, &cfg, Truncation::Energy)?;
    let (_, entries) = series_entries(&r, solution.lam, &cfg, Truncation::Amplitude)?;
    let wavefunction = wavefunction_from(solution.lam, &entries);
    let e0_order2 = params.omega * e2;
    Ok(GroundStateResult {
        solution,
        e0_order2,
        e0_total: params.omega * (r.e0(solution.lam) + e2),
        mean_photon_full: mean_photon_full(&wavefunction),
        mean_photon_approx: mean_photon_approx(&params),
        wavefunction,
    })
}
