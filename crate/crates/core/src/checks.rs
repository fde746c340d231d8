//! Acceptance checks.
//!
//! Every check returns named measurements against pinned thresholds. The
//! suite is shared by the `acceptance` integration test and `rabi check`.
//! Regression bounds on the approximation errors were measured once against
//! the ED oracle and are locked below with headroom.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{energy_grwa, mean_photon_grwa};
use crate::ed::{build_dense, exact_ground, EdConfig};
use crate::error::Result;
use crate::gvm::{
    energy_explicit, first_order_wavefunction, ground_state, lambda_closed_form, mean_photon_approx,
    mean_photon_weak_atom, offdiag_hg, offdiag_homega, second_order_energy, solve_lambda_exact,
    transformed_element, unperturbed_energy, LambdaMethod, PerturbationConfig, VariationalSolution,
};
use crate::model::{BasisLabel, Branch, ModelParams};
use crate::sweep::{run_sweep, FigureId, Method, Observable, SweepSpec, DEFAULT_STEPS};

/// max |E_gvm − E_ED| over Ω ∈ [0, 2ω] at g = 0.2ω (measured 1.03e-4).
pub const BOUND_F1A_GVM: f64 = 1.25e-4;
/// max |E_gvm − E_ED| over Ω ∈ [0, 2ω] at g = 0.6ω (measured 9.98e-3).
pub const BOUND_F1B_GVM: f64 = 1.2e-2;
/// max |E_gvm − E_ED| over g ∈ [0, 0.8ω] at Ω = ω (measured 3.55e-2, at g = 0.8ω).
pub const BOUND_F2A_GVM: f64 = 4.3e-2;
/// max |E_gvm − E_ED| over g ∈ [0, 0.8ω] at Ω = 1.5ω (measured 3.30e-2, at g = 0.8ω).
pub const BOUND_F2B_GVM: f64 = 4.0e-2;
/// max |E_gvm_full − E_ED| over Ω ∈ [0, 2ω] at g = ω (measured 1.94e-2).
pub const BOUND_F3_GVM_FULL: f64 = 2.4e-2;
/// max |n_approx − n_ED| over Ω ∈ [0, 2ω] at g = 0.6ω (measured 2.87e-2).
pub const BOUND_F4_PHOTON: f64 = 3.5e-2;

const GRID_COUPLING: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const GRID_ATOM: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
const RANDOM_SEED: u64 = 20_101_011;

/// One measured quantity and its bound (`value ≤ threshold` passes).
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
}

impl Measurement {
    pub fn new(label: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { label: label.into(), value, threshold }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub measurements: Vec<Measurement>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        !self.measurements.is_empty() && self.measurements.iter().all(Measurement::passed)
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] #{:<2} {}", self.id, self.name)?;
        for m in &self.measurements {
            let mark = if m.passed() { "ok" } else { "!!" };
            write!(f, "\n       {mark} {:<52} {:>12.4e} <= {:.4e}", m.label, m.value, m.threshold)?;
        }
        Ok(())
    }
}

/// Functions under test that a harness may swap out.
#[derive(Clone, Copy)]
pub struct Evaluators {
    pub energy_explicit: fn(&ModelParams) -> f64,
}

impl Default for Evaluators {
    fn default() -> Self {
        Self { energy_explicit }
    }
}

/// Closed-form energy with the `g²` coefficient detuned by 1 %, used to
/// confirm the suite catches a broken formula.
pub fn faulty_energy_explicit(params: &ModelParams) -> f64 {
    let (a, g) = (params.atom_ratio(), params.coupling_ratio());
    let x = g / (1.0 + a);
    params.omega * (0.5 - 1.01 * g * g * (1.0 + 2.0 * a) / ((1.0 + a) * (1.0 + a)) - 0.5 * a * (-2.0 * x * x).exp())
}

fn rel_err(value: f64, reference: f64) -> f64 {
    if value == reference {
        0.0
    } else {
        (value - reference).abs() / reference.abs()
    }
}

fn count(flags: impl Iterator<Item = bool>) -> f64 {
    flags.filter(|b| *b).count() as f64
}

/// Dense second-order perturbation theory over `|±, N⟩, N ≤ n_max`, built
/// directly from the matrix-element operations. Independent of the
/// closed-form series used by the solver.
pub struct DensePerturbationOracle {
    pub basis: Vec<BasisLabel>,
    pub hamiltonian: DMatrix<f64>,
}

impl DensePerturbationOracle {
    pub fn assemble(lam: f64, params: &ModelParams, n_max: usize) -> Self {
        let basis: Vec<BasisLabel> = (0..=n_max)
            .flat_map(|n| [BasisLabel::minus(n), BasisLabel::plus(n)])
            .collect();
        let dim = basis.len();
        let mut h = DMatrix::zeros(dim, dim);
        for (i, bra) in basis.iter().enumerate() {
            h[(i, i)] = unperturbed_energy(lam, params, *bra);
            for (j, ket) in basis.iter().enumerate() {
                if ket.photon_n >= bra.photon_n {
                    continue;
                }
                let (n, m) = (bra.photon_n, ket.photon_n);
                let p = offdiag_homega(lam, params, n, m).expect("n > m");
                let s = bra.branch.sign();
                let same = bra.branch == ket.branch;
                let v = match ((n - m) % 2 == 0, same) {
                    (true, true) => -s * p,
                    (false, false) => s * p + offdiag_hg(lam, params, n, m),
                    _ => 0.0,
                };
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Self { basis, hamiltonian: h }
    }

    fn ground_index(&self) -> usize {
        self.basis.iter().position(|l| *l == BasisLabel::ground()).expect("ground in basis")
    }

    pub fn second_order_energy(&self) -> f64 {
        let g = self.ground_index();
        let e0 = self.hamiltonian[(g, g)];
        (0..self.basis.len())
            .filter(|&k| k != g)
            .map(|k| self.hamiltonian[(k, g)].powi(2) / (e0 - self.hamiltonian[(k, k)]))
            .sum()
    }

    /// First-order coefficients `⟨k|H_r|0⟩/(E₀ − E_k)`.
    pub fn first_order_coefficients(&self) -> Vec<(BasisLabel, f64)> {
        let g = self.ground_index();
        let e0 = self.hamiltonian[(g, g)];
        (0..self.basis.len())
            .filter(|&k| k != g)
            .map(|k| (self.basis[k], self.hamiltonian[(k, g)] / (e0 - self.hamiltonian[(k, k)])))
            .collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let h = &self.hamiltonian;
        (h - h.transpose()).amax()
    }
}

/// `⟨bra|U H_z U†|ket⟩` with `U = exp[λσ_z(a† − a)]` evaluated by matrix
/// exponentials in a `2 × fock_dim` spin⊗Fock space.
pub fn brute_force_transformed(lam: f64, params: &ModelParams, fock_dim: usize) -> impl Fn(BasisLabel, BasisLabel) -> f64 {
    let k = fock_dim;
    let mut a = DMatrix::<f64>::zeros(k, k);
    for n in 1..k {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    let ad = a.transpose();
    let eye = DMatrix::<f64>::identity(k, k);
    let number = &ad * &a;
    let field = &ad + &a;
    // spin order (e, g); σ_z = diag(1, −1), σ_x swaps
    let mut hz = DMatrix::<f64>::zeros(2 * k, 2 * k);
    let bare = (&number + &eye * 0.5) * params.omega;
    hz.view_mut((0, 0), (k, k)).copy_from(&(&bare - &field * params.coupling));
    hz.view_mut((k, k), (k, k)).copy_from(&(&bare + &field * params.coupling));
    hz.view_mut((0, k), (k, k)).copy_from(&(&eye * (0.5 * params.atom_freq)));
    hz.view_mut((k, 0), (k, k)).copy_from(&(&eye * (0.5 * params.atom_freq)));
    let gen = &ad - &a;
    let mut u = DMatrix::<f64>::zeros(2 * k, 2 * k);
    u.view_mut((0, 0), (k, k)).copy_from(&(&gen * lam).exp());
    u.view_mut((k, k), (k, k)).copy_from(&(&gen * (-lam)).exp());
    let hu = &u * hz * u.transpose();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    move |bra: BasisLabel, ket: BasisLabel| {
        let vec = |l: BasisLabel| {
            let mut v = nalgebra::DVector::<f64>::zeros(2 * k);
            v[l.photon_n] = r;
            v[k + l.photon_n] = match l.branch {
                Branch::Plus => r,
                Branch::Minus => -r,
            };
            v
        };
        vec(bra).dot(&(&hu * vec(ket)))
    }
}

#[derive(Default)]
pub struct CheckSuite {
    pub eval: Evaluators,
    pub pcfg: PerturbationConfig,
    pub ecfg: EdConfig,
}

impl CheckSuite {
    pub fn with_evaluators(eval: Evaluators) -> Self {
        Self { eval, ..Self::default() }
    }

    pub fn run_all(&self) -> Result<Vec<CheckOutcome>> {
        Ok(vec![
            self.polaron_anchor()?,
            self.decoupled_anchor()?,
            self.variational_bound()?,
            self.figure1()?,
            self.figure2_and_3()?,
            self.figure4()?,
            self.perturbation_oracle()?,
            self.stationarity()?,
            self.grwa_limit(),
            self.ed_certification()?,
            self.scale_invariance()?,
        ])
    }

    /// The exactly solvable anchors only.
    pub fn run_quick(&self) -> Result<Vec<CheckOutcome>> {
        Ok(vec![self.polaron_anchor()?, self.decoupled_anchor()?])
    }

    fn energy_explicit(&self, p: &ModelParams) -> f64 {
        (self.eval.energy_explicit)(p)
    }

    pub fn polaron_anchor(&self) -> Result<CheckOutcome> {
        let mut rel_closed = 0.0f64;
        let mut rel_full = 0.0f64;
        let mut ed_abs = 0.0f64;
        let mut photon = 0.0f64;
        let ecfg = EdConfig::with_n_fock(200);
        for &g in &[0.1, 0.25, 0.5, 0.75, 1.0] {
            let p = ModelParams::new(1.0, 0.0, g);
            let exact = 0.5 - g * g;
            rel_closed = rel_closed.max(rel_err(self.energy_explicit(&p), exact));
            rel_closed = rel_closed.max(rel_err(energy_grwa(&p), exact));
            let gs = ground_state(&p, &self.pcfg, LambdaMethod::ExactRoot)?;
            rel_full = rel_full.max(rel_err(gs.e0_total, exact));
            ed_abs = ed_abs.max((exact_ground(&p, &ecfg)?.energy - exact).abs());
            photon = photon.max((gs.mean_photon_full - g * g).abs());
            photon = photon.max((mean_photon_approx(&p) - g * g).abs());
        }
        Ok(CheckOutcome {
            id: 1,
            name: "polaron anchor (Ω = 0)",
            measurements: vec![
                Measurement::new("closed-form energies, relative error", rel_closed, 1e-12),
                Measurement::new("ground_state(full) energy, relative error", rel_full, 1e-12),
                Measurement::new("ED energy at n_fock = 200, absolute error", ed_abs, 1e-8),
                Measurement::new("photon numbers vs g²/ω²", photon, 1e-10),
            ],
        })
    }

    pub fn decoupled_anchor(&self) -> Result<CheckOutcome> {
        let mut energy = 0.0f64;
        let mut photon = 0.0f64;
        for &a in &GRID_ATOM {
            let p = ModelParams::new(1.0, a, 0.0);
            let exact = 0.5 - 0.5 * a;
            let gs = ground_state(&p, &self.pcfg, LambdaMethod::ExactRoot)?;
            let ed = exact_ground(&p, &self.ecfg)?;
            for e in [self.energy_explicit(&p), energy_grwa(&p), gs.e0_total, ed.energy] {
                energy = energy.max((e - exact).abs());
            }
            for n in [gs.mean_photon_full, mean_photon_approx(&p), mean_photon_grwa(&p), ed.mean_photon] {
                photon = photon.max(n.abs());
            }
        }
        Ok(CheckOutcome {
            id: 2,
            name: "decoupled anchor (g = 0)",
            measurements: vec![
                Measurement::new("energies vs ω/2 − Ω/2 (exact)", energy, 0.0),
                Measurement::new("photon numbers vs 0 (exact)", photon, 0.0),
            ],
        })
    }

    fn grid() -> impl Iterator<Item = ModelParams> {
        GRID_COUPLING
            .iter()
            .flat_map(|&g| GRID_ATOM.iter().map(move |&a| ModelParams::new(1.0, a, g)))
    }

    pub fn variational_bound(&self) -> Result<CheckOutcome> {
        let mut worst = f64::NEG_INFINITY;
        for p in Self::grid() {
            let sol = solve_lambda_exact(&p, &self.pcfg)?;
            let ed = exact_ground(&p, &self.ecfg)?;
            worst = worst.max(ed.energy - sol.e0_unperturbed);
        }
        Ok(CheckOutcome {
            id: 3,
            name: "variational bound E₀⁽⁰⁾(λ*) ≥ E_ED",
            measurements: vec![Measurement::new("max (E_ED − E₀⁽⁰⁾)", worst, 1e-9)],
        })
    }

    // ED values of a canonical figure sweep, with the closed-form gvm energy
    // recomputed through the evaluators
    fn figure_energies(&self, id: FigureId) -> Result<Vec<(f64, f64, f64, f64)>> {
        let spec: SweepSpec = id.spec(DEFAULT_STEPS);
        let points = run_sweep(&spec, &self.pcfg, &self.ecfg)?;
        Ok(points
            .iter()
            .map(|pt| {
                let p = spec.params_at(pt.x);
                let ed = pt.value(Method::Ed, Observable::Energy).unwrap_or(f64::NAN);
                (pt.x, self.energy_explicit(&p), energy_grwa(&p), ed)
            })
            .collect())
    }

    pub fn figure1(&self) -> Result<CheckOutcome> {
        let mut measurements = Vec::new();
        for (id, label, bound) in [(FigureId::F1a, "g = 0.2ω", BOUND_F1A_GVM), (FigureId::F1b, "g = 0.6ω", BOUND_F1B_GVM)] {
            let rows = self.figure_energies(id)?;
            let ordering = count(rows.iter().filter(|r| r.0 >= 1.1 - 1e-12).map(|r| (r.1 - r.3).abs() > (r.2 - r.3).abs()));
            let tail: Vec<f64> = rows.iter().filter(|r| r.0 >= 1.0 - 1e-12).map(|r| (r.2 - r.3).abs()).collect();
            let monotone = count(tail.windows(2).map(|w| w[1] < w[0]));
            let max_gvm = rows.iter().map(|r| (r.1 - r.3).abs()).fold(f64::NAN, f64::max);
            measurements.push(Measurement::new(format!("{label}: points with gvm error > grwa error, Ω ≥ 1.1ω"), ordering, 0.0));
            measurements.push(Measurement::new(format!("{label}: decreases of grwa error, Ω ≥ ω"), monotone, 0.0));
            measurements.push(Measurement::new(format!("{label}: max |E_gvm − E_ED|"), max_gvm, bound));
        }
        Ok(CheckOutcome { id: 4, name: "figures 1a/1b: energy ordering and accuracy", measurements })
    }

    pub fn figure2_and_3(&self) -> Result<CheckOutcome> {
        let mut measurements = Vec::new();
        for (id, label, bound) in [(FigureId::F2a, "Ω = ω", BOUND_F2A_GVM), (FigureId::F2b, "Ω = 1.5ω", BOUND_F2B_GVM)] {
            let rows = self.figure_energies(id)?;
            let max_gvm = rows.iter().map(|r| (r.1 - r.3).abs()).fold(f64::NAN, f64::max);
            measurements.push(Measurement::new(format!("{label}, g ≤ 0.8ω: max |E_gvm − E_ED|"), max_gvm, bound));
        }
        let spec = FigureId::F3.spec(DEFAULT_STEPS);
        let points = run_sweep(&spec, &self.pcfg, &self.ecfg)?;
        let failures = count(points.iter().map(|p| !p.failures.is_empty()));
        let max_full = points
            .iter()
            .map(|p| p.error(Method::GvmFull, Observable::Energy).unwrap_or(f64::NAN))
            .fold(f64::NAN, f64::max);
        measurements.push(Measurement::new("g = ω: failed points", failures, 0.0));
        measurements.push(Measurement::new("g = ω: max |E_gvm_full − E_ED|", max_full, BOUND_F3_GVM_FULL));
        Ok(CheckOutcome { id: 5, name: "figures 2a/2b/3: validity window and full expansion", measurements })
    }

    pub fn figure4(&self) -> Result<CheckOutcome> {
        let spec = FigureId::F4.spec(DEFAULT_STEPS);
        let points = run_sweep(&spec, &self.pcfg, &self.ecfg)?;
        let obs = Observable::MeanPhoton;
        let rows: Vec<(f64, f64, f64, f64)> = points
            .iter()
            .map(|p| {
                let v = |m| p.value(m, obs).unwrap_or(f64::NAN);
                (p.x, v(Method::Gvm), v(Method::Grwa), v(Method::Ed))
            })
            .collect();
        let max_err = rows.iter().map(|r| (r.1 - r.3).abs()).fold(f64::NAN, f64::max);
        let not_decreasing = count(rows.windows(2).map(|w| !(w[1].1 < w[0].1)));
        let grwa_spread = rows.iter().map(|r| (r.2 - rows[0].2).abs()).fold(0.0, f64::max) + (rows[0].2 - 0.36).abs();
        let ordering = count(rows.iter().filter(|r| r.0 >= 0.5 - 1e-12).map(|r| (r.1 - r.3).abs() > (r.2 - r.3).abs()));
        Ok(CheckOutcome {
            id: 6,
            name: "figure 4: photon number",
            measurements: vec![
                Measurement::new("max |n_approx − n_ED|", max_err, BOUND_F4_PHOTON),
                Measurement::new("non-decreasing steps of n_approx in Ω", not_decreasing, 0.0),
                Measurement::new("deviation of n_grwa from constant 0.36", grwa_spread, 1e-16),
                Measurement::new("points with approx error > grwa error, Ω ≥ 0.5ω", ordering, 0.0),
            ],
        })
    }

    pub fn perturbation_oracle(&self) -> Result<CheckOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
        let mut e2_rel = 0.0f64;
        let mut coeff_rel = 0.0f64;
        let mut brute = 0.0f64;
        let mut first_order = 0.0f64;
        let mut asym = 0.0f64;
        for _ in 0..20 {
            let p = ModelParams::new(1.0, rng.random_range(0.0..=2.0), rng.random_range(0.05..=0.8));
            let exact = solve_lambda_exact(&p, &self.pcfg)?;
            for sol in [exact, lambda_closed_form(&p)] {
                let oracle = DensePerturbationOracle::assemble(sol.lam, &p, self.pcfg.n_max);
                asym = asym.max(oracle.max_asymmetry());
                e2_rel = e2_rel.max(rel_err(second_order_energy(&sol, &p, &self.pcfg)?, oracle.second_order_energy()));
                coeff_rel = coeff_rel.max(self.coefficient_mismatch(&sol, &p, &oracle)?);
                let g = BasisLabel::ground();
                first_order = first_order.max((transformed_element(sol.lam, &p, g, g) - sol.e0_unperturbed).abs());
            }
            let h = brute_force_transformed(exact.lam, &p, 60);
            brute = brute.max((h(BasisLabel::ground(), BasisLabel::ground()) - exact.e0_unperturbed).abs());
        }
        Ok(CheckOutcome {
            id: 7,
            name: "second-order sums vs dense perturbation oracle",
            measurements: vec![
                Measurement::new("E₀⁽²⁾ relative error", e2_rel, 1e-10),
                Measurement::new("first-order coefficients, relative max-norm error", coeff_rel, 1e-10),
                Measurement::new("H_u asymmetry", asym, 1e-15),
                Measurement::new("first-order energy ⟨−,0|H_u|−,0⟩ − E₀⁽⁰⁾ (exact)", first_order, 0.0),
                Measurement::new("same, with U H U† from matrix exponentials", brute, 1e-12),
            ],
        })
    }

    fn coefficient_mismatch(&self, sol: &VariationalSolution, p: &ModelParams, oracle: &DensePerturbationOracle) -> Result<f64> {
        let wf = first_order_wavefunction(sol, p, &self.pcfg)?;
        let reference = oracle.first_order_coefficients();
        let scale = reference.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(wf.corrections().map(|(_, c)| c.abs()).fold(0.0, f64::max));
        }
        let worst = reference.iter().map(|(l, c)| (wf.coeff(*l) - c).abs()).fold(0.0, f64::max);
        Ok(worst / scale)
    }

    pub fn stationarity(&self) -> Result<CheckOutcome> {
        let h = 1e-6;
        let mut residual = 0.0f64;
        let mut derivative = 0.0f64;
        for p in Self::grid() {
            let sol = solve_lambda_exact(&p, &self.pcfg)?;
            residual = residual.max(sol.stationarity_residual / p.omega);
            let e = |l: f64| unperturbed_energy(l, &p, BasisLabel::ground());
            derivative = derivative.max(((e(sol.lam + h) - e(sol.lam - h)) / (2.0 * h)).abs() / p.omega);
        }
        Ok(CheckOutcome {
            id: 8,
            name: "stationarity of λ",
            measurements: vec![
                Measurement::new("max residual / ω", residual, 1e-12),
                Measurement::new("max |central difference dE₀⁽⁰⁾/dλ| / ω", derivative, 1e-8),
            ],
        })
    }

    pub fn grwa_limit(&self) -> CheckOutcome {
        let atoms = [0.2, 0.1, 0.05, 0.025, 0.0125];
        let diffs: Vec<f64> = atoms
            .iter()
            .map(|&a| {
                let p = ModelParams::new(1.0, a, 0.3);
                (self.energy_explicit(&p) - energy_grwa(&p)).abs()
            })
            .collect();
        let ratios: Vec<f64> = diffs.iter().zip(&atoms).map(|(d, a)| d / a).collect();
        let not_decreasing = count(diffs.windows(2).map(|w| !(w[1] < w[0])));
        // successive changes of d/Ω must shrink for the ratio to settle
        let steps: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let not_settling = count(steps.windows(2).map(|w| !(w[1] < w[0])));
        let ratio_bound = ratios.iter().copied().fold(0.0, f64::max);
        let last_quadratic = diffs[4] / (atoms[4] * atoms[4]);
        CheckOutcome {
            id: 9,
            name: "GRWA limit collapse (Ω → 0, g = 0.3ω)",
            measurements: vec![
                Measurement::new("non-decreasing steps of |E_explicit − E_grwa|", not_decreasing, 0.0),
                Measurement::new("non-shrinking changes of difference/Ω", not_settling, 0.0),
                Measurement::new("max difference/Ω (finite)", ratio_bound, 1.0),
                Measurement::new("difference/Ω² at Ω = 0.0125ω (finite)", last_quadratic, 10.0),
            ],
        }
    }

    pub fn ed_certification(&self) -> Result<CheckOutcome> {
        let mut dense_gap = 0.0f64;
        let mut doubling = 0.0f64;
        let chain64 = EdConfig::with_n_fock(64);
        let dense64 = EdConfig { use_parity_chains: false, ..chain64 };
        for p in Self::grid() {
            let a = exact_ground(&p, &chain64)?;
            let b = exact_ground(&p, &dense64)?;
            dense_gap = dense_gap.max((a.energy - b.energy).abs());
            let e200 = exact_ground(&p, &EdConfig::with_n_fock(200))?.energy;
            let e100 = exact_ground(&p, &EdConfig::with_n_fock(100))?.energy;
            doubling = doubling.max((e200 - e100).abs());
        }
        // the dense builder itself is the cross-validation matrix
        debug_assert_eq!(build_dense(&ModelParams::new(1.0, 1.0, 0.1), 8).nrows(), 18);
        Ok(CheckOutcome {
            id: 10,
            name: "ED self-certification",
            measurements: vec![
                Measurement::new("|E_chain − E_dense| at n_fock = 64", dense_gap, 1e-11),
                Measurement::new("|E(200) − E(100)|", doubling, 1e-10),
            ],
        })
    }

    pub fn scale_invariance(&self) -> Result<CheckOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED + 1);
        let mut energy = 0.0f64;
        let mut invariant = 0.0f64;
        for _ in 0..3 {
            let w: f64 = rng.random_range(0.5..=2.0);
            let p = ModelParams::new(w, w * rng.random_range(0.0..=2.0), w * rng.random_range(0.05..=0.8));
            let base = self.scale_sample(&p)?;
            for s in [0.5, 3.0] {
                let scaled = self.scale_sample(&p.scaled(s))?;
                for (e, es) in base.energies.iter().zip(&scaled.energies) {
                    energy = energy.max(rel_err(*es, s * e));
                }
                for (x, xs) in base.invariants.iter().zip(&scaled.invariants) {
                    invariant = invariant.max(rel_err(*xs, *x));
                }
            }
        }
        Ok(CheckOutcome {
            id: 11,
            name: "scale invariance",
            measurements: vec![
                Measurement::new("energies vs s·E, relative", energy, 1e-14),
                Measurement::new("λ and photon numbers, relative", invariant, 1e-14),
            ],
        })
    }

    fn scale_sample(&self, p: &ModelParams) -> Result<ScaleSample> {
        let gs = ground_state(p, &self.pcfg, LambdaMethod::ExactRoot)?;
        let cf = lambda_closed_form(p);
        let ed = exact_ground(p, &self.ecfg)?;
        Ok(ScaleSample {
            energies: vec![
                self.energy_explicit(p),
                energy_grwa(p),
                gs.solution.e0_unperturbed,
                gs.e0_order2,
                gs.e0_total,
                cf.e0_unperturbed,
                ed.energy,
            ],
            invariants: vec![
                gs.solution.lam,
                cf.lam,
                gs.mean_photon_full,
                mean_photon_approx(p),
                mean_photon_weak_atom(p),
                mean_photon_grwa(p),
                ed.mean_photon,
            ],
        })
    }
}

struct ScaleSample {
    energies: Vec<f64>,
    invariants: Vec<f64>,
}
