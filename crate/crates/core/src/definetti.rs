//! Permutation operators, exact Haar twirls, and operator-inequality
//! witnesses for symmetric-state dimension bounds.
//!
//! The `n`-fold Haar average `∫ U^{⊗n} X (U^{⊗n})† dU` lands in the span of
//! the permutation operators, so it can be evaluated exactly by solving a
//! small Gram system over `S_n` instead of sampling or building irreps. On
//! top of the twirl sits a witness generator for the symmetric-subspace
//! bound `ρ ≤ (n+1)^{d²-1}·τ`: it realizes the bounding operator `τ` from a
//! twirled maximally entangled power and probes it against random
//! permutation-invariant purifications.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, identity, kron, kron_power, matrix_sqrt, partial_trace, permute_systems,
    CMat, SystemDims,
};
use crate::states::{haar_unitary, split_seed};
use crate::typicality::composition_count;

/// Hard ceiling on any realized tensor-power dimension.
const DIM_CAP: usize = 4096;

/// Twirls use the full group algebra of `S_n`; `n! ≤ 24` keeps that exact.
const MAX_TWIRL_COPIES: usize = 4;

/// A permutation of `n` tensor slots, acting as
/// `P_σ|i_1 … i_n⟩ = |i_{σ⁻¹(1)} … i_{σ⁻¹(n)}⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermOperator {
    map: Vec<usize>,
}

impl PermOperator {
    pub fn new(map: &[usize]) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &v in map {
            if v >= map.len() || seen[v] {
                return Err(Error::OutOfRange {
                    context: "not a permutation".into(),
                });
            }
            seen[v] = true;
        }
        Ok(PermOperator { map: map.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PermOperator) -> PermOperator {
        let map = other.map.iter().map(|&k| self.map[k]).collect();
        PermOperator { map }
    }

    pub fn inverse(&self) -> PermOperator {
        let mut map = vec![0usize; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            map[v] = k;
        }
        PermOperator { map }
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.map.len()];
        let mut cycles = 0;
        for start in 0..self.map.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.map[k];
            }
        }
        cycles
    }

    /// Realizes the operator on `(C^d)^{⊗n}` (first slot most significant).
    pub fn matrix(&self, d: usize) -> Result<CMat> {
        let n = self.map.len();
        let total = checked_power(d, n)?;
        let inv = self.inverse();
        let mut out = CMat::zeros(total, total);
        let mut digits = vec![0usize; n];
        for col in 0..total {
            let mut rem = col;
            for k in (0..n).rev() {
                digits[k] = rem % d;
                rem /= d;
            }
            let mut row = 0usize;
            for k in 0..n {
                row = row * d + digits[inv.map[k]];
            }
            out[(row, col)] = linalg::creal(1.0);
        }
        Ok(out)
    }
}

fn checked_power(d: usize, n: usize) -> Result<usize> {
    let mut total = 1usize;
    for _ in 0..n {
        total = total.saturating_mul(d);
        if total > DIM_CAP {
            return Err(Error::TooLarge {
                context: format!("tensor power dimension {d}^{n} exceeds {DIM_CAP}"),
            });
        }
    }
    Ok(total)
}

/// All permutations of `n` slots in a deterministic order.
pub fn all_permutations(n: usize) -> Vec<PermOperator> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut raw = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut raw);
    raw.into_iter()
        .map(|map| PermOperator { map })
        .collect()
}

/// Number of `n`-fold symmetric basis states of a `d`-level system.
pub fn sym_dimension(d: usize, n: usize) -> u128 {
    composition_count(n, d)
}

/// Projector onto the symmetric subspace of `(C^d)^{⊗n}`.
pub fn sym_projector(d: usize, n: usize) -> Result<CMat> {
    if n == 0 {
        return Err(Error::OutOfRange {
            context: "symmetric projector requires n >= 1".into(),
        });
    }
    let total = checked_power(d, n)?;
    let perms = all_permutations(n);
    let weight = linalg::creal(1.0 / perms.len() as f64);
    let mut out = CMat::zeros(total, total);
    for perm in &perms {
        out += perm.matrix(d)? * weight;
    }
    Ok(out)
}

/// Gram data of the permutation operators on `(C^d)^{⊗n}` under the
/// Hilbert–Schmidt pairing, `gram[σ][π] = d^{#cycles(σ⁻¹π)}`.
#[derive(Debug, Clone)]
pub struct WeingartenTable {
    d: usize,
    n: usize,
    perms: Vec<PermOperator>,
    gram: DMatrix<f64>,
    /// Pseudo-inverse: for `d < n` the permutation operators are linearly
    /// dependent and the Gram matrix is singular, but any least-squares
    /// solution reproduces the same twirled operator.
    inverse: DMatrix<f64>,
}

impl WeingartenTable {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_TWIRL_COPIES {
            return Err(Error::OutOfRange {
                context: format!("twirl supports 1..={MAX_TWIRL_COPIES} copies, got {n}"),
            });
        }
        if d == 0 {
            return Err(Error::OutOfRange {
                context: "local dimension must be positive".into(),
            });
        }
        let perms = all_permutations(n);
        let m = perms.len();
        let mut gram = DMatrix::<f64>::zeros(m, m);
        for (i, s) in perms.iter().enumerate() {
            for (j, p) in perms.iter().enumerate() {
                let cycles = s.inverse().compose(p).cycle_count();
                gram[(i, j)] = (d as f64).powi(cycles as i32);
            }
        }
        let inverse = gram
            .clone()
            .pseudo_inverse(1e-9 * gram[(0, 0)])
            .map_err(|e| Error::SingularInput {
                context: format!("gram pseudo-inverse failed: {e}"),
            })?;
        Ok(WeingartenTable {
            d,
            n,
            perms,
            gram,
            inverse,
        })
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn copies(&self) -> usize {
        self.n
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }
}

/// Exact Haar average `∫ U^{⊗n} X (U^{⊗n})† dU` as a projection onto the
/// span of the permutation operators.
pub fn haar_twirl(x: &CMat, table: &WeingartenTable) -> Result<CMat> {
    let total = checked_power(table.d, table.n)?;
    if x.nrows() != total || x.ncols() != total {
        return Err(Error::DimMismatch {
            context: format!("twirl input is {}x{}, expected {total}", x.nrows(), x.ncols()),
        });
    }
    let mats: Vec<CMat> = table
        .perms
        .iter()
        .map(|p| p.matrix(table.d))
        .collect::<Result<_>>()?;
    let moments: Vec<Complex64> = mats.iter().map(|p| (p.adjoint() * x).trace()).collect();
    let m = table.perms.len();
    let mut out = CMat::zeros(total, total);
    for pi in 0..m {
        let mut c = Complex64::new(0.0, 0.0);
        for sigma in 0..m {
            c += table.inverse[(pi, sigma)] * moments[sigma];
        }
        out += &mats[pi] * c;
    }
    Ok(out)
}

fn interleaved_to_grouped(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(2 * n);
    for k in 0..n {
        order.push(2 * k);
    }
    for k in 0..n {
        order.push(2 * k + 1);
    }
    order
}

fn grouped_to_interleaved(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(2 * n);
    for k in 0..n {
        order.push(k);
        order.push(n + k);
    }
    order
}

fn copy_labels(n: usize) -> (Vec<String>, Vec<String>) {
    let d: Vec<String> = (0..n).map(|k| format!("D{k}")).collect();
    let e: Vec<String> = (0..n).map(|k| format!("E{k}")).collect();
    (d, e)
}

/// Haar average over the second tensor factor only:
/// `∫ (I_D ⊗ U)^{⊗n} X ((I_D ⊗ U)^{⊗n})† dU` for `X` on `(D ⊗ E)^{⊗n}`
/// with copy-interleaved slots.
pub fn bystander_twirl(x: &CMat, dim_d: usize, table: &WeingartenTable) -> Result<CMat> {
    let n = table.n;
    let dim_e = table.d;
    let d_pow = checked_power(dim_d, n)?;
    let e_pow = checked_power(dim_e, n)?;
    if d_pow.saturating_mul(e_pow) > DIM_CAP {
        return Err(Error::TooLarge {
            context: format!("composite dimension {} exceeds {DIM_CAP}", d_pow * e_pow),
        });
    }
    if x.nrows() != d_pow * e_pow {
        return Err(Error::DimMismatch {
            context: format!(
                "bystander input is {}x{}, expected {}",
                x.nrows(),
                x.ncols(),
                d_pow * e_pow
            ),
        });
    }
    let (d_names, e_names) = copy_labels(n);
    let mut labels: Vec<&str> = Vec::with_capacity(2 * n);
    let mut dims = Vec::with_capacity(2 * n);
    for k in 0..n {
        labels.push(&d_names[k]);
        labels.push(&e_names[k]);
        dims.push(dim_d);
        dims.push(dim_e);
    }
    let sys = SystemDims::new(&dims, &labels)?;
    let (grouped, grouped_sys) = permute_systems(x, &sys, &interleaved_to_grouped(n))?;

    let perm_mats: Vec<CMat> = table
        .perms
        .iter()
        .map(|p| p.matrix(dim_e))
        .collect::<Result<_>>()?;
    let eye_d = identity(d_pow);
    let keep: Vec<&str> = d_names.iter().map(String::as_str).collect();
    let mut moments = Vec::with_capacity(perm_mats.len());
    for p in &perm_mats {
        let lifted = kron(&eye_d, &p.adjoint());
        let (m_sigma, _) = partial_trace(&(lifted * &grouped), &grouped_sys, &keep)?;
        moments.push(m_sigma);
    }
    let m = table.perms.len();
    let mut grouped_out = CMat::zeros(grouped.nrows(), grouped.ncols());
    for pi in 0..m {
        let mut a = CMat::zeros(d_pow, d_pow);
        for sigma in 0..m {
            a += &moments[sigma] * linalg::creal(table.inverse[(pi, sigma)]);
        }
        grouped_out += kron(&a, &perm_mats[pi]);
    }
    let (back, _) = permute_systems(&grouped_out, &grouped_sys, &grouped_to_interleaved(n))?;
    Ok(back)
}

/// One probe of an operator inequality: the smallest eigenvalue of
/// `τ − ρ/constant`, i.e. the witness gap in units of the bound constant.
#[derive(Debug, Clone, Copy)]
pub struct WitnessRow {
    pub trial: u64,
    pub min_eigenvalue: f64,
}

/// Outcome of a witness campaign against `ρ ≤ constant·τ`.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub rows: Vec<WitnessRow>,
    pub bound_constant: f64,
    pub n: usize,
    /// Dimension entering the bound exponent.
    pub constant_dim: usize,
    pub worst: f64,
}

impl WitnessReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.worst >= -tol
    }
}

/// Shared pieces of a witness campaign: the bounding operator and the
/// per-copy ingredients of the permutation-invariant probes.
struct WitnessMachine {
    dim_e: usize,
    n: usize,
    sqrt_d: CMat,
    /// Unnormalized `Σ_i |i⟩_D|i⟩_E`.
    theta: CMat,
    /// `(σ_D^{⊗n} ⊗ I)^{1/2} · twirl(|θ⟩⟨θ|^{⊗n}) · (σ_D^{⊗n} ⊗ I)^{1/2}`,
    /// copy-interleaved.
    tau: CMat,
}

impl WitnessMachine {
    fn new(sigma_d: &CMat, dim_e: usize, n: usize) -> Result<Self> {
        let dim_d = sigma_d.nrows();
        if sigma_d.ncols() != dim_d || dim_d == 0 || dim_e < dim_d {
            return Err(Error::DimMismatch {
                context: "witness needs square σ_D and dim E ≥ dim D".into(),
            });
        }
        checked_power(dim_d * dim_e, n)?;
        let mut theta = CMat::zeros(dim_d * dim_e, 1);
        for i in 0..dim_d {
            theta[(i * dim_e + i, 0)] = linalg::creal(1.0);
        }
        let big_theta = kron_power(&theta, n);
        let table = WeingartenTable::new(dim_e, n)?;
        let twirled = bystander_twirl(&(&big_theta * big_theta.adjoint()), dim_d, &table)?;
        let sqrt_d = matrix_sqrt(sigma_d)?;
        let scale = kron_power(&kron(&sqrt_d, &identity(dim_e)), n);
        let tau = &scale * twirled * &scale;
        Ok(WitnessMachine {
            dim_e,
            n,
            sqrt_d,
            theta,
            tau,
        })
    }

    /// Normalized `|Ψ_V⟩⟨Ψ_V|` with `|Ψ_V⟩ = ((σ_D^{1/2} ⊗ V)|θ⟩)^{⊗n}`.
    fn pure_witness(&self, v: &CMat) -> Result<CMat> {
        if v.nrows() != self.dim_e || v.ncols() != self.dim_e {
            return Err(Error::DimMismatch {
                context: "witness rotation must act on the E factor".into(),
            });
        }
        let per_copy = kron(&self.sqrt_d, v) * &self.theta;
        let norm = per_copy.norm();
        if norm <= 0.0 {
            return Err(Error::InvalidState {
                context: "witness vector collapsed to zero".into(),
            });
        }
        let vec = kron_power(&(per_copy / linalg::creal(norm)), self.n);
        Ok(&vec * vec.adjoint())
    }

    fn gap(&self, rho: &CMat, constant: f64) -> Result<f64> {
        let probe = &self.tau - rho * linalg::creal(1.0 / constant);
        linalg::min_eigenvalue(&probe)
    }
}

/// Probes `ρ ≤ (n+1)^{d²−1}·τ` for pure permutation-invariant states on
/// `(D ⊗ E)^{⊗n}` with `dim E = dim D = d`; each trial uses a fresh Haar
/// rotation on `E`. Reported gaps are eigenvalues of `τ − ρ/constant`.
pub fn definetti_witness(
    sigma_d: &CMat,
    n: usize,
    seed: u64,
    trials: usize,
) -> Result<WitnessReport> {
    let d = sigma_d.nrows();
    let machine = WitnessMachine::new(sigma_d, d, n)?;
    let constant = (n as f64 + 1.0).powi((d * d) as i32 - 1);
    let mut rows = Vec::with_capacity(trials);
    let mut worst = f64::INFINITY;
    for trial in 0..trials as u64 {
        let v = haar_unitary(d, split_seed(seed, trial))?;
        let rho = machine.pure_witness(&v)?;
        let gap = machine.gap(&rho, constant)?;
        worst = worst.min(gap);
        rows.push(WitnessRow {
            trial,
            min_eigenvalue: gap,
        });
    }
    Ok(WitnessReport {
        rows,
        bound_constant: constant,
        n,
        constant_dim: d,
        worst: if trials == 0 { 0.0 } else { worst },
    })
}

/// Pieces of one mixed-extension probe: the bounding operator and the
/// probe state after the purifying factor is traced away.
struct MixedProbe {
    tau_traced: CMat,
    constant: f64,
}

fn mixed_machine(sigma_d: &CMat, n: usize) -> Result<(WitnessMachine, MixedProbe)> {
    let d = sigma_d.nrows();
    // purify over R ≅ D⊗E, so the bystander factor becomes E⊗R
    let dim_e_big = d * d * d;
    let machine = WitnessMachine::new(sigma_d, dim_e_big, n)?;
    let constant = (n as f64 + 1.0).powi((dim_e_big * dim_e_big) as i32 - 1);
    let tau_traced = trace_out_purifier(&machine.tau, d, n)?;
    Ok((
        machine,
        MixedProbe {
            tau_traced,
            constant,
        },
    ))
}

/// Traces the `R` part of every copy of `(D ⊗ (E⊗R))^{⊗n}`, returning an
/// operator on copy-interleaved `(D ⊗ E)^{⊗n}`.
fn trace_out_purifier(x: &CMat, d: usize, n: usize) -> Result<CMat> {
    let (d_names, e_names) = copy_labels(n);
    let r_names: Vec<String> = (0..n).map(|k| format!("R{k}")).collect();
    let mut labels: Vec<&str> = Vec::with_capacity(3 * n);
    let mut dims = Vec::with_capacity(3 * n);
    for k in 0..n {
        labels.push(&d_names[k]);
        labels.push(&e_names[k]);
        labels.push(&r_names[k]);
        dims.push(d);
        dims.push(d);
        dims.push(d * d);
    }
    let sys = SystemDims::new(&dims, &labels)?;
    let mut keep: Vec<&str> = Vec::with_capacity(2 * n);
    for k in 0..n {
        keep.push(&d_names[k]);
        keep.push(&e_names[k]);
    }
    let (out, _) = partial_trace(x, &sys, &keep)?;
    Ok(out)
}

/// Probes the mixed-state variant `ρ_{DⁿEⁿ} ≤ (n+1)^{d²−1}·τ` with
/// `d = dim(D)·dim(E)²`: probe states are mixed products obtained by
/// purifying into `R ≅ D⊗E`, rotating `E⊗R` by a Haar unitary, and tracing
/// `R` away again. Gaps are reported in units of the bound constant.
pub fn mixed_extension_witness(
    sigma_d: &CMat,
    n: usize,
    seed: u64,
    trials: usize,
) -> Result<WitnessReport> {
    let d = sigma_d.nrows();
    let (machine, probe) = mixed_machine(sigma_d, n)?;
    let mut rows = Vec::with_capacity(trials);
    let mut worst = f64::INFINITY;
    for trial in 0..trials as u64 {
        let v = haar_unitary(machine.dim_e, split_seed(seed, trial))?;
        let rho_big = machine.pure_witness(&v)?;
        let rho = trace_out_purifier(&rho_big, d, n)?;
        let diff = &probe.tau_traced - &rho * linalg::creal(1.0 / probe.constant);
        let gap = linalg::min_eigenvalue(&diff)?;
        worst = worst.min(gap);
        rows.push(WitnessRow {
            trial,
            min_eigenvalue: gap,
        });
    }
    Ok(WitnessReport {
        rows,
        bound_constant: probe.constant,
        n,
        constant_dim: d * d * d,
        worst: if trials == 0 { 0.0 } else { worst },
    })
}
