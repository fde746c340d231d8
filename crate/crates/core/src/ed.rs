//! Exact diagonalization of the Rabi Hamiltonian in a truncated Fock space.
//!
//! The conserved parity `−σ_z(−1)^{a†a}` splits the Hamiltonian into two
//! tridiagonal chains `|g,0⟩, |e,1⟩, |g,2⟩, …` (even) and
//! `|e,0⟩, |g,1⟩, |e,2⟩, …` (odd). Each chain's lowest eigenpair is found by
//! Sturm-sequence bisection followed by inverse iteration. A dense
//! spin⊗Fock build is kept as a cross-check.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::model::{validate, ModelParams};

const BISECTION_MAX_ITER: usize = 2000;
const INVERSE_ITERATIONS: usize = 5;
const RESIDUAL_TOL: f64 = 1e-10;
const START_SEED: u64 = 0x5eed_1234;

/// Default Fock truncation, overridable through `RABI_NFOCK` by front ends.
pub const DEFAULT_N_FOCK: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdConfig {
    /// Highest Fock index kept.
    pub n_fock: usize,
    /// Bound on `|E(n_fock) − E(n_fock/2)|` in units of ω.
    pub convergence_tol: f64,
    pub use_parity_chains: bool,
}

impl Default for EdConfig {
    fn default() -> Self {
        Self { n_fock: DEFAULT_N_FOCK, convergence_tol: 1e-10, use_parity_chains: true }
    }
}

impl EdConfig {
    pub fn with_n_fock(n_fock: usize) -> Self {
        Self { n_fock, ..Self::default() }
    }

    pub fn validate(self) -> Result<Self> {
        if self.n_fock < 8 {
            return Err(RabiError::Domain("n_fock must be at least 8".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(RabiError::Domain("convergence_tol must be positive".into()));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Chain starting at `|g, 0⟩`.
    Even,
    /// Chain starting at `|e, 0⟩`.
    Odd,
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(RabiError::Domain(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &o) in self.off.iter().enumerate() {
            m[(i, i + 1)] = o;
            m[(i + 1, i)] = o;
        }
        m
    }

    fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the spectrum.
    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the
    /// pivots of the LDLᵀ factorization of `A − xI`).
    pub fn sturm_count(&self, x: f64) -> usize {
        let guard = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let q_safe = if q == 0.0 { guard } else { q };
            q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / q_safe;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Parity chain of the truncated Hamiltonian: diagonal
/// `ω(n + ½) ∓ (Ω/2)(−1)^n` (upper sign even), off-diagonal `g√(n + 1)`.
pub fn build_parity_chain(params: &ModelParams, parity: Parity, n_fock: usize) -> SymTridiagonal {
    let spin = match parity {
        Parity::Even => -1.0,
        Parity::Odd => 1.0,
    };
    let diag = (0..=n_fock)
        .map(|n| {
            let alt = if n % 2 == 0 { 1.0 } else { -1.0 };
            params.omega * (n as f64 + 0.5) + spin * 0.5 * params.atom_freq * alt
        })
        .collect();
    let off = (0..n_fock).map(|n| params.coupling * ((n + 1) as f64).sqrt()).collect();
    SymTridiagonal { diag, off }
}

/// Dense `2(n_fock + 1)` spin⊗Fock matrix of the Hamiltonian. Index
/// `n` is `|e, n⟩`, index `n_fock + 1 + n` is `|g, n⟩`.
pub fn build_dense(params: &ModelParams, n_fock: usize) -> DMatrix<f64> {
    let k = n_fock + 1;
    let mut h = DMatrix::zeros(2 * k, 2 * k);
    for n in 0..k {
        let bare = params.omega * (n as f64 + 0.5);
        h[(n, n)] = bare + 0.5 * params.atom_freq;
        h[(k + n, k + n)] = bare - 0.5 * params.atom_freq;
        if n + 1 < k {
            let x = params.coupling * ((n + 1) as f64).sqrt();
            // σ_x(a + a†) couples |e,n⟩ ↔ |g,n+1⟩ and |g,n⟩ ↔ |e,n+1⟩
            h[(n, k + n + 1)] = x;
            h[(k + n + 1, n)] = x;
            h[(k + n, n + 1)] = x;
            h[(n + 1, k + n)] = x;
        }
    }
    h
}

/// Lowest eigenvalue by Sturm bisection to full precision.
pub fn lowest_eigenvalue(matrix: &SymTridiagonal) -> f64 {
    let (mut lo, mut hi) = matrix.gershgorin();
    // invariant: count(lo) == 0, count(hi) ≥ 1
    hi += f64::EPSILON * hi.abs().max(1.0);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if matrix.sturm_count(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

// LU factorization of a tridiagonal matrix with partial pivoting.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(matrix: &SymTridiagonal, shift: f64) -> Self {
        let n = matrix.dim();
        let mut dl = matrix.off.clone();
        let mut d: Vec<f64> = matrix.diag.iter().map(|x| x - shift).collect();
        let mut du = matrix.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        // an exactly singular pivot is replaced by a tiny one, the usual
        // treatment when the shift is an eigenvalue
        let tiny = f64::EPSILON * matrix.norm_inf().max(f64::MIN_POSITIVE);
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

// fix the overall sign: first significant component positive
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Lowest eigenvalue and its unit eigenvector.
///
/// The matrix is split into independent blocks at exactly vanishing
/// off-diagonals; the eigenvector is zero outside the block holding the
/// lowest eigenvalue.
pub fn ground_eigenpair(matrix: &SymTridiagonal) -> Result<(f64, Vec<f64>)> {
    let n = matrix.dim();
    if n < 2 || matrix.off.len() + 1 != n {
        return Err(RabiError::Domain("ground_eigenpair needs a tridiagonal matrix of dimension ≥ 2".into()));
    }
    let mut best: Option<(f64, usize, usize)> = None;
    let mut start = 0;
    for end in 1..=n {
        if end < n && matrix.off[end - 1] != 0.0 {
            continue;
        }
        let theta = if end - start == 1 {
            matrix.diag[start]
        } else {
            lowest_eigenvalue(&block(matrix, start, end))
        };
        if best.is_none_or(|(b, _, _)| theta < b) {
            best = Some((theta, start, end));
        }
        start = end;
    }
    let (theta, start, end) = best.expect("at least one block");
    let mut v = vec![0.0; n];
    if end - start == 1 {
        v[start] = 1.0;
    } else {
        let sub = inverse_iteration(&block(matrix, start, end), theta)?;
        v[start..end].copy_from_slice(&sub);
    }
    fix_sign(&mut v);
    Ok((theta, v))
}

fn block(matrix: &SymTridiagonal, start: usize, end: usize) -> SymTridiagonal {
    SymTridiagonal { diag: matrix.diag[start..end].to_vec(), off: matrix.off[start..end - 1].to_vec() }
}

fn inverse_iteration(matrix: &SymTridiagonal, theta: f64) -> Result<Vec<f64>> {
    let n = matrix.dim();
    let lu = TridiagLu::factor(matrix, theta);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);

    let tol = RESIDUAL_TOL * matrix.norm_inf().max(1.0);
    // a fixed number of sweeps: each one shrinks the unwanted components by
    // roughly (eigenvalue error)/(gap), so they end far below the tolerance
    for _ in 0..INVERSE_ITERATIONS {
        lu.solve(&mut v);
        normalize(&mut v);
    }
    let av = matrix.mul_vec(&v);
    let residual = av.iter().zip(&v).map(|(a, x)| (a - theta * x).powi(2)).sum::<f64>().sqrt();
    if residual <= tol {
        return Ok(v);
    }
    Err(RabiError::Convergence(format!(
        "inverse iteration residual {residual:e} above {tol:e}"
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdResult {
    /// Ground energy including the ω/2 zero-point.
    pub energy: f64,
    /// Chain coefficients (parity path) or spin⊗Fock coefficients (dense).
    pub eigenvector: Vec<f64>,
    pub mean_photon: f64,
    pub parity: Parity,
    pub converged: bool,
    pub n_fock: usize,
}

struct Solved {
    energy: f64,
    eigenvector: Vec<f64>,
    mean_photon: f64,
    parity: Parity,
}

fn solve_chains(unit: &ModelParams, n_fock: usize) -> Result<Solved> {
    let mut best: Option<Solved> = None;
    for parity in [Parity::Even, Parity::Odd] {
        let chain = build_parity_chain(unit, parity, n_fock);
        let (energy, v) = ground_eigenpair(&chain)?;
        if best.as_ref().is_none_or(|b| energy < b.energy) {
            let mean_photon = v.iter().enumerate().map(|(n, c)| n as f64 * c * c).sum();
            best = Some(Solved { energy, eigenvector: v, mean_photon, parity });
        }
    }
    Ok(best.expect("two chains solved"))
}

fn solve_dense(unit: &ModelParams, n_fock: usize) -> Result<Solved> {
    let k = n_fock + 1;
    let eig = SymmetricEigen::new(build_dense(unit, n_fock));
    let (idx, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| RabiError::Convergence("empty spectrum".into()))?;
    let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    fix_sign(&mut v);
    let mut mean_photon = 0.0;
    let mut parity_exp = 0.0;
    for n in 0..k {
        let (e, g) = (v[n] * v[n], v[k + n] * v[k + n]);
        mean_photon += n as f64 * (e + g);
        let alt = if n % 2 == 0 { 1.0 } else { -1.0 };
        // −σ_z(−1)^n
        parity_exp += alt * (g - e);
    }
    let parity = if parity_exp >= 0.0 { Parity::Even } else { Parity::Odd };
    Ok(Solved { energy, eigenvector: v, mean_photon, parity })
}

/// Ground state of the truncated Hamiltonian.
///
/// The problem is solved in units of ω and the energy rescaled. The
/// `converged` flag compares against the same solve at `n_fock / 2`.
pub fn exact_ground(params: &ModelParams, cfg: &EdConfig) -> Result<EdResult> {
    let params = validate(*params)?;
    let cfg = cfg.validate()?;
    let unit = ModelParams::in_units_of_omega(params.atom_ratio(), params.coupling_ratio());
    let solve = |n: usize| {
        if cfg.use_parity_chains {
            solve_chains(&unit, n)
        } else {
            solve_dense(&unit, n)
        }
    };
    let full = solve(cfg.n_fock)?;
    let half = solve(cfg.n_fock / 2)?;
    let converged = (full.energy - half.energy).abs() <= cfg.convergence_tol;
    Ok(EdResult {
        energy: params.omega * full.energy,
        eigenvector: full.eigenvector,
        mean_photon: full.mean_photon,
        parity: full.parity,
        converged,
        n_fock: cfg.n_fock,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // cyclic Jacobi rotations; dense oracle for small symmetric matrices
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn small_eigenpair_examples() {
        let m = SymTridiagonal::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0]).unwrap();
        let (e, v) = ground_eigenpair(&m).unwrap();
        assert_eq!(e, 1.0);
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);

        let m = SymTridiagonal::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let (e, v) = ground_eigenpair(&m).unwrap();
        assert!((e + 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-14 && (v[1] + h).abs() < 1e-14);
    }

    #[test]
    fn rejects_tiny_matrix() {
        let m = SymTridiagonal { diag: vec![1.0], off: vec![] };
        assert!(ground_eigenpair(&m).is_err());
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
    }

    #[test]
    fn chain_entries_by_hand() {
        let p = ModelParams::new(1.0, 1.0, 0.2);
        let even = build_parity_chain(&p, Parity::Even, 4);
        assert_eq!(even.diag, vec![0.0, 2.0, 2.0, 4.0, 4.0]);
        let odd = build_parity_chain(&p, Parity::Odd, 4);
        assert_eq!(odd.diag, vec![1.0, 1.0, 3.0, 3.0, 5.0]);
        let expected = [0.2, 0.2 * 2f64.sqrt(), 0.2 * 3f64.sqrt(), 0.4];
        for (a, b) in even.off.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
        assert_eq!(even.off, odd.off);
    }

    #[test]
    fn chain_eigenvalue_matches_jacobi() {
        let p = ModelParams::new(1.0, 1.0, 0.2);
        for parity in [Parity::Even, Parity::Odd] {
            let chain = build_parity_chain(&p, parity, 4);
            let dense: Vec<Vec<f64>> = (0..5)
                .map(|i| (0..5).map(|j| chain.to_dense()[(i, j)]).collect())
                .collect();
            let oracle = jacobi_eigenvalues(dense)[0];
            let (e, _) = ground_eigenpair(&chain).unwrap();
            assert!((e - oracle).abs() < 1e-12, "{e} vs {oracle}");
        }
    }

    #[test]
    fn chains_cover_the_dense_spectrum() {
        let p = ModelParams::new(1.0, 0.8, 0.45);
        let n_fock = 10;
        let dense: Vec<Vec<f64>> = {
            let d = build_dense(&p, n_fock);
            (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)]).collect()).collect()
        };
        let mut from_chains: Vec<f64> = [Parity::Even, Parity::Odd]
            .iter()
            .flat_map(|&par| {
                let c = build_parity_chain(&p, par, n_fock).to_dense();
                SymmetricEigen::new(c).eigenvalues.iter().copied().collect::<Vec<_>>()
            })
            .collect();
        from_chains.sort_by(f64::total_cmp);
        let oracle = jacobi_eigenvalues(dense);
        for (a, b) in from_chains.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn uncoupled_chain_is_diagonal() {
        let p = ModelParams::new(1.0, 0.6, 0.0);
        let chain = build_parity_chain(&p, Parity::Even, 12);
        assert!(chain.off.iter().all(|&o| o == 0.0));
        let min = chain.diag.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.5 - 0.3);
    }

    #[test]
    fn exact_ground_anchors() {
        let r = exact_ground(&ModelParams::new(1.0, 1.0, 0.0), &EdConfig::default()).unwrap();
        assert_eq!(r.energy, 0.0);
        assert!(r.mean_photon.abs() < 1e-20);
        assert!(r.converged);
        assert_eq!(r.parity, Parity::Even);

        let r = exact_ground(&ModelParams::new(1.0, 0.0, 0.5), &EdConfig::default()).unwrap();
        assert!((r.energy - 0.25).abs() < 1e-8);
        assert!((r.mean_photon - 0.25).abs() < 1e-8);
        let norm: f64 = r.eigenvector.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_and_chain_paths_agree() {
        for &(a, g) in &[(1.0, 0.6), (1.5, 0.9), (0.3, 0.2)] {
            let p = ModelParams::new(1.0, a, g);
            let cfg = EdConfig::with_n_fock(40);
            let chain = exact_ground(&p, &cfg).unwrap();
            let dense = exact_ground(&p, &EdConfig { use_parity_chains: false, ..cfg }).unwrap();
            assert!((chain.energy - dense.energy).abs() < 1e-11);
            assert!((chain.mean_photon - dense.mean_photon).abs() < 1e-10);
            assert_eq!(chain.parity, dense.parity);
        }
    }

    #[test]
    fn config_validation() {
        assert!(EdConfig::with_n_fock(7).validate().is_err());
        assert!(EdConfig::with_n_fock(8).validate().is_ok());
    }
}
