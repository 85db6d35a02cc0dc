//! Recovery channels acting on the conditioning subsystem, and the search
//! for rotations that maximize the reconstruction fidelity.
//!
//! The reference channel reconstructs a tripartite state from its first two
//! factors: it maps the middle subsystem `B` into `B ⊗ C` by conjugating
//! with the square root of the `BC` marginal after whitening with the
//! inverse square root of the `B` marginal. Rotations place unitaries
//! before the whitening and after the reconstruction. Any mass that the
//! whitening would lose (kernel of the `B` marginal) is routed to the
//! normalized `BC` marginal so the channel stays trace preserving.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropies::{cmi, fidelity};
use crate::error::{Error, Result};
use crate::linalg::{
    self, creal, hermitian_eig, identity, kron, matrix_inv_sqrt, matrix_sqrt, max_abs,
    support_projector, tol, CMat, SystemDims,
};
use crate::states::{haar_unitary_with, rng_from_seed, split_seed, MultipartiteState};

/// Completely positive map in Kraus form; each operator is
/// `dim_out x dim_in`.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMat>,
    dim_in: usize,
    dim_out: usize,
    output_dims: Vec<usize>,
    trace_preserving: bool,
}

impl QuantumChannel {
    /// Builds a channel from Kraus operators, checking shape consistency
    /// and measuring the trace defect `|| sum K†K - I ||`.
    pub fn new(kraus: Vec<CMat>, output_dims: &[usize]) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::DimMismatch {
                context: "channel needs at least one Kraus operator".into(),
            });
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        if output_dims.iter().product::<usize>() != dim_out {
            return Err(Error::DimMismatch {
                context: "output factorization does not match Kraus rows".into(),
            });
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::DimMismatch {
                    context: "inconsistent Kraus shapes".into(),
                });
            }
            if !linalg::all_finite(k) {
                return Err(Error::NonFinite);
            }
        }
        let mut gram = CMat::zeros(dim_in, dim_in);
        for k in &kraus {
            gram += k.adjoint() * k;
        }
        let defect = max_abs(&(&gram - identity(dim_in)));
        Ok(QuantumChannel {
            kraus,
            dim_in,
            dim_out,
            output_dims: output_dims.to_vec(),
            trace_preserving: defect <= 1e-9,
        })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn output_dims(&self) -> &[usize] {
        &self.output_dims
    }

    pub fn trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Action on an operator of the bare input dimension.
    pub fn apply_matrix(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.dim_in || x.ncols() != self.dim_in {
            return Err(Error::DimMismatch {
                context: format!("operator dim {} vs channel input {}", x.nrows(), self.dim_in),
            });
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        Ok(out)
    }
}

pub fn identity_channel(dim: usize) -> QuantumChannel {
    QuantumChannel {
        kraus: vec![identity(dim)],
        dim_in: dim,
        dim_out: dim,
        output_dims: vec![dim],
        trace_preserving: true,
    }
}

/// Random trace-preserving channel from a Haar isometry into
/// `output ⊗ environment`.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    seed: u64,
) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || kraus_count == 0 {
        return Err(Error::DimMismatch {
            context: "zero size in channel sampling".into(),
        });
    }
    if dim_out * kraus_count < dim_in {
        return Err(Error::DimMismatch {
            context: "environment too small for an isometry".into(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let big = haar_unitary_with(dim_out * kraus_count, &mut rng)?;
    let mut kraus = Vec::with_capacity(kraus_count);
    for e in 0..kraus_count {
        let mut k = CMat::zeros(dim_out, dim_in);
        for o in 0..dim_out {
            for i in 0..dim_in {
                k[(o, i)] = big[(o * kraus_count + e, i)];
            }
        }
        kraus.push(k);
    }
    QuantumChannel::new(kraus, &[dim_out])
}

/// Trace-non-increasing compression `X -> P X P` onto a random
/// rank-`rank` projector.
pub fn projector_compression(dim: usize, rank: usize, seed: u64) -> Result<QuantumChannel> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut rng = rng_from_seed(seed);
    let u = haar_unitary_with(dim, &mut rng)?;
    let mut p = CMat::zeros(dim, dim);
    for k in 0..rank {
        let col = u.column(k);
        for r in 0..dim {
            for c in 0..dim {
                p[(r, c)] += col[r] * col[c].conj();
            }
        }
    }
    QuantumChannel::new(vec![p], &[dim])
}

/// Applies a channel to one labeled subsystem, leaving the others alone.
/// The target factor is replaced by the channel's output factorization,
/// labeled by `out_labels`.
pub fn apply_channel(
    channel: &QuantumChannel,
    state: &MultipartiteState,
    target: &str,
    out_labels: &[&str],
) -> Result<MultipartiteState> {
    let dims = state.dims();
    let pos = dims.position(target)?;
    if dims.dims()[pos] != channel.dim_in {
        return Err(Error::DimMismatch {
            context: format!(
                "subsystem {target} has dim {}, channel input is {}",
                dims.dims()[pos],
                channel.dim_in
            ),
        });
    }
    if out_labels.len() != channel.output_dims.len() {
        return Err(Error::DimMismatch {
            context: "one label per output factor required".into(),
        });
    }
    let left: usize = dims.dims()[..pos].iter().product();
    let right: usize = dims.dims()[pos + 1..].iter().product();
    let n_out = left * channel.dim_out * right;
    let mut out = CMat::zeros(n_out, n_out);
    for k in channel.kraus() {
        let lifted = linalg::embed(k, left, right);
        out += &lifted * state.matrix() * lifted.adjoint();
    }
    let mut new_dims: Vec<usize> = dims.dims()[..pos].to_vec();
    new_dims.extend_from_slice(&channel.output_dims);
    new_dims.extend_from_slice(&dims.dims()[pos + 1..]);
    let labels = dims.labels();
    let mut new_labels: Vec<&str> = labels[..pos].to_vec();
    new_labels.extend_from_slice(out_labels);
    new_labels.extend_from_slice(&labels[pos + 1..]);
    Ok(MultipartiteState::from_parts_unchecked(
        out,
        SystemDims::new(&new_dims, &new_labels)?,
    ))
}

/// Unitary rotations applied before whitening (`u_b`) and after
/// reconstruction (`v_bc`).
#[derive(Debug, Clone)]
pub struct RotatedPetzParams {
    pub u_b: CMat,
    pub v_bc: CMat,
}

impl RotatedPetzParams {
    pub fn identity(dim_b: usize, dim_bc: usize) -> Self {
        RotatedPetzParams {
            u_b: identity(dim_b),
            v_bc: identity(dim_bc),
        }
    }
}

fn unitarity_defect(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}

/// Shared factors of the reconstruction map for a fixed `BC` marginal.
struct PetzCore {
    dim_b: usize,
    dim_c: usize,
    sqrt_bc: CMat,
    inv_sqrt_b: CMat,
    supp_b: CMat,
    /// Normalized `BC` marginal receiving any kernel mass.
    omega_eigen: Vec<(f64, CMat)>,
    has_kernel: bool,
}

impl PetzCore {
    fn new(rho_bc: &MultipartiteState) -> Result<Self> {
        if rho_bc.dims().len() != 2 {
            return Err(Error::DimMismatch {
                context: "marginal must have exactly two factors".into(),
            });
        }
        let dims = rho_bc.dims().dims();
        let (dim_b, dim_c) = (dims[0], dims[1]);
        let labels = rho_bc.dims().labels();
        let rho_b = rho_bc.marginal(&[labels[0]])?;
        let sqrt_bc = matrix_sqrt(rho_bc.matrix())?;
        let inv_sqrt_b = matrix_inv_sqrt(rho_b.matrix())?;
        let supp_b = support_projector(rho_b.matrix())?;
        let has_kernel = max_abs(&(&supp_b - identity(dim_b))) > 1e-12;
        let tr = rho_bc.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidState {
                context: "marginal has zero trace".into(),
            });
        }
        let sd = hermitian_eig(rho_bc.matrix())?;
        let cut = tol::SUPPORT_CUTOFF * sd.eigenvalues.first().map_or(0.0, |x| x.abs());
        let mut omega_eigen: Vec<(f64, CMat)> = Vec::new();
        for (i, &lambda) in sd.eigenvalues.iter().enumerate() {
            if lambda > cut {
                let col = sd.eigenvectors.column(i);
                let mut w = CMat::zeros(dim_b * dim_c, 1);
                for r in 0..dim_b * dim_c {
                    w[(r, 0)] = col[r];
                }
                omega_eigen.push((lambda / tr, w));
            }
        }
        Ok(PetzCore {
            dim_b,
            dim_c,
            sqrt_bc,
            inv_sqrt_b,
            supp_b,
            omega_eigen,
            has_kernel,
        })
    }

    /// Kraus operators for given rotations, including the kernel-routing
    /// completion when the `B` marginal is rank deficient.
    fn kraus(&self, params: &RotatedPetzParams) -> Vec<CMat> {
        let whiten = &self.inv_sqrt_b * &params.u_b;
        let front = &params.v_bc * &self.sqrt_bc;
        let mut kraus = Vec::with_capacity(self.dim_c + 1);
        for j in 0..self.dim_c {
            let mut ket = CMat::zeros(self.dim_c, 1);
            ket[(j, 0)] = creal(1.0);
            let lift = kron(&whiten, &ket);
            kraus.push(&front * lift);
        }
        if self.has_kernel {
            let kernel = identity(self.dim_b) - &self.supp_b;
            let deficiency = params.u_b.adjoint() * &kernel * &params.u_b;
            let sd = hermitian_eig(&deficiency).expect("deficiency eigen");
            for (i, &nu) in sd.eigenvalues.iter().enumerate() {
                if nu <= 1e-12 {
                    continue;
                }
                let f = sd.eigenvectors.column(i);
                for (mu, w) in &self.omega_eigen {
                    let mut l = CMat::zeros(self.dim_b * self.dim_c, self.dim_b);
                    let amp = creal((mu * nu).sqrt());
                    for r in 0..self.dim_b * self.dim_c {
                        for c in 0..self.dim_b {
                            l[(r, c)] = amp * w[(r, 0)] * f[c].conj();
                        }
                    }
                    kraus.push(l);
                }
            }
        }
        kraus
    }
}

/// Reconstruction channel determined by the `BC` marginal alone.
pub fn petz_map(rho_bc: &MultipartiteState) -> Result<QuantumChannel> {
    let core = PetzCore::new(rho_bc)?;
    let params = RotatedPetzParams::identity(core.dim_b, core.dim_b * core.dim_c);
    QuantumChannel::new(core.kraus(&params), &[core.dim_b, core.dim_c])
}

/// Reconstruction channel with explicit rotations; rejects parameters whose
/// unitarity defect exceeds `1e-9`.
pub fn rotated_petz_map(
    rho_bc: &MultipartiteState,
    params: &RotatedPetzParams,
) -> Result<QuantumChannel> {
    let core = PetzCore::new(rho_bc)?;
    let dim_bc = core.dim_b * core.dim_c;
    if params.u_b.nrows() != core.dim_b || params.v_bc.nrows() != dim_bc {
        return Err(Error::DimMismatch {
            context: "rotation dimensions do not match the marginal".into(),
        });
    }
    let defect = unitarity_defect(&params.u_b).max(unitarity_defect(&params.v_bc));
    if defect > 1e-9 {
        return Err(Error::NonUnitaryParams { defect });
    }
    QuantumChannel::new(core.kraus(params), &[core.dim_b, core.dim_c])
}

/// Fidelity between a tripartite state and the reconstruction obtained by
/// running `channel` on the middle factor of its first-two-factor marginal.
pub fn recovery_fidelity(
    rho_abc: &MultipartiteState,
    channel: &QuantumChannel,
) -> Result<f64> {
    let labels = rho_abc.dims().labels();
    if labels.len() != 3 {
        return Err(Error::DimMismatch {
            context: "tripartite state required".into(),
        });
    }
    let rho_ab = rho_abc.marginal(&[labels[0], labels[1]])?;
    let sigma = apply_channel(channel, &rho_ab, labels[1], &[labels[1], labels[2]])?;
    fidelity(rho_abc.matrix(), sigma.matrix())
}

/// Restart/iteration budget for the rotation search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RecoveryBudget {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for RecoveryBudget {
    fn default() -> Self {
        RecoveryBudget {
            restarts: 20,
            iterations: 500,
        }
    }
}

/// Outcome summary of one optimization run.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryCertificate {
    pub cmi_bits: f64,
    pub target_fidelity: f64,
    pub achieved_fidelity: f64,
    pub slack: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// Optimized rotations with their channel and certificate.
#[derive(Debug, Clone)]
pub struct RecoveryOptimum {
    pub params: RotatedPetzParams,
    pub channel: QuantumChannel,
    pub petz_fidelity: f64,
    pub certificate: RecoveryCertificate,
}

/// Hermitian coordinate basis used for the finite-difference gradient.
fn hermitian_basis_apply(dim: usize, coords: &[f64]) -> CMat {
    let mut h = CMat::zeros(dim, dim);
    let mut idx = 0;
    for d in 0..dim {
        h[(d, d)] = creal(coords[idx]);
        idx += 1;
    }
    for p in 0..dim {
        for q in p + 1..dim {
            let re = coords[idx];
            let im = coords[idx + 1];
            idx += 2;
            h[(p, q)] += Complex64::new(re, -im);
            h[(q, p)] += Complex64::new(re, im);
        }
    }
    h
}

/// exp(i s E) for a single coordinate of the Hermitian basis, in closed
/// form. The gradient loop calls this twice per coordinate per iteration,
/// so it avoids the spectral decomposition that `unitary_exp` would run.
fn basis_perturbation(dim: usize, k: usize, s: f64) -> CMat {
    let mut out = identity(dim);
    if k < dim {
        out[(k, k)] = Complex64::new(0.0, s).exp();
        return out;
    }
    let mut idx = dim;
    for p in 0..dim {
        for q in p + 1..dim {
            if k == idx || k == idx + 1 {
                let z = if k == idx {
                    Complex64::new(s, 0.0)
                } else {
                    Complex64::new(0.0, -s)
                };
                let r = s.abs();
                if r > 0.0 {
                    let ratio = Complex64::new(0.0, r.sin() / r);
                    out[(p, p)] = creal(r.cos());
                    out[(q, q)] = creal(r.cos());
                    out[(p, q)] = ratio * z;
                    out[(q, p)] = ratio * z.conj();
                }
                return out;
            }
            idx += 2;
        }
    }
    out
}

fn unitary_exp(h: &CMat) -> CMat {
    // exp(iH) for Hermitian H through the spectral decomposition
    let sd = hermitian_eig(h).expect("hermitian step generator");
    let n = h.nrows();
    let v = &sd.eigenvectors;
    let mut scaled = v.clone();
    for k in 0..n {
        let phase = Complex64::new(0.0, sd.eigenvalues[k]).exp();
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    &scaled * v.adjoint()
}

/// Shared per-state context for fast candidate evaluation.
struct OptContext {
    core: PetzCore,
    rho_ab: CMat,
    dims_a: usize,
    sqrt_abc: CMat,
    omega_bc: CMat,
}

impl OptContext {
    fn candidate_fidelity(&self, u: &CMat, v: &CMat) -> f64 {
        let core = &self.core;
        let da = self.dims_a;
        let whiten = &core.inv_sqrt_b * u;
        let g = {
            let lift = linalg::embed(&whiten, da, 1);
            &lift * &self.rho_ab * lift.adjoint()
        };
        let m = kron(&g, &identity(core.dim_c));
        let w = v * &core.sqrt_bc;
        let lifted_w = linalg::embed(&w, da, 1);
        let mut sigma = &lifted_w * m * lifted_w.adjoint();
        if core.has_kernel {
            let kernel = identity(core.dim_b) - &core.supp_b;
            let deficiency = u.adjoint() * kernel * u;
            let lift_def = linalg::embed(&deficiency, da, 1);
            let weighted = &lift_def * &self.rho_ab;
            // partial trace over B keeping A
            let db = core.dim_b;
            let mut y_a = CMat::zeros(da, da);
            for ra in 0..da {
                for ca in 0..da {
                    let mut acc = Complex64::default();
                    for b in 0..db {
                        acc += weighted[(ra * db + b, ca * db + b)];
                    }
                    y_a[(ra, ca)] = acc;
                }
            }
            sigma += kron(&y_a, &self.omega_bc);
        }
        let m2 = &self.sqrt_abc * sigma * &self.sqrt_abc;
        // eigenvalues-only path: the candidate is evaluated tens of
        // thousands of times per optimization
        let h = (&m2 + m2.adjoint()).scale(0.5);
        h.symmetric_eigenvalues()
            .iter()
            .map(|&x| if x > 0.0 { x.sqrt() } else { 0.0 })
            .sum()
    }
}

const GRADIENT_STEP: f64 = 1e-5;
const STALL_IMPROVEMENT: f64 = 1e-9;

fn ascend(
    ctx: &OptContext,
    mut u: CMat,
    mut v: CMat,
    iterations: usize,
) -> (f64, CMat, CMat) {
    let db = u.nrows();
    let dbc = v.nrows();
    let nu = db * db;
    let nv = dbc * dbc;
    let mut f_cur = ctx.candidate_fidelity(&u, &v);
    let mut step = 0.1f64;
    for _ in 0..iterations {
        let mut grad = vec![0.0f64; nu + nv];
        for k in 0..nu + nv {
            let eval = |sign: f64| {
                if k < nu {
                    let pert = basis_perturbation(db, k, sign * GRADIENT_STEP);
                    ctx.candidate_fidelity(&(pert * &u), &v)
                } else {
                    let pert = basis_perturbation(dbc, k - nu, sign * GRADIENT_STEP);
                    ctx.candidate_fidelity(&u, &(pert * &v))
                }
            };
            let fp = eval(1.0);
            let fm = eval(-1.0);
            grad[k] = (fp - fm) / (2.0 * GRADIENT_STEP);
        }
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let dir_u = hermitian_basis_apply(db, &grad[..nu]);
        let dir_v = hermitian_basis_apply(dbc, &grad[nu..]);
        let mut improved = false;
        let mut t = step;
        for _shrink in 0..30 {
            let cu = unitary_exp(&dir_u.scale(t)) * &u;
            let cv = unitary_exp(&dir_v.scale(t)) * &v;
            let f_new = ctx.candidate_fidelity(&cu, &cv);
            if f_new > f_cur {
                let gain = f_new - f_cur;
                u = cu;
                v = cv;
                f_cur = f_new;
                step = (t * 2.0).min(1.0);
                improved = gain >= STALL_IMPROVEMENT;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (f_cur, u, v)
}

/// Searches over rotations for the reconstruction fidelity of a tripartite
/// state, starting one restart from the unrotated map and the rest from
/// Haar-random rotations. Restarts run independently; the best result wins
/// with ties broken by restart index.
pub fn optimize_recovery(
    rho_abc: &MultipartiteState,
    budget: RecoveryBudget,
    seed: u64,
) -> Result<RecoveryOptimum> {
    if budget.restarts == 0 || budget.iterations == 0 {
        return Err(Error::BudgetZero);
    }
    let labels = rho_abc.dims().labels();
    if labels.len() != 3 {
        return Err(Error::DimMismatch {
            context: "tripartite state required".into(),
        });
    }
    let dims = rho_abc.dims().dims();
    let (da, db, dc) = (dims[0], dims[1], dims[2]);
    let rho_bc = rho_abc.marginal(&[labels[1], labels[2]])?;
    let rho_ab = rho_abc.marginal(&[labels[0], labels[1]])?;
    let core = PetzCore::new(&rho_bc)?;
    let omega_bc = rho_bc.matrix().scale(1.0 / rho_bc.trace());
    let ctx = OptContext {
        core,
        rho_ab: rho_ab.matrix().clone(),
        dims_a: da,
        sqrt_abc: matrix_sqrt(rho_abc.matrix())?,
        omega_bc,
    };
    let report = cmi(rho_abc)?;
    let target = (2.0f64).powf(-0.5 * report.cmi_bits);
    let dbc = db * dc;
    let petz_fidelity = ctx.candidate_fidelity(&identity(db), &identity(dbc));

    let results: Vec<(f64, CMat, CMat)> = (0..budget.restarts)
        .into_par_iter()
        .map(|restart| {
            let (u0, v0) = if restart == 0 {
                (identity(db), identity(dbc))
            } else {
                let mut rng = rng_from_seed(split_seed(seed, restart as u64));
                let u = haar_unitary_with(db, &mut rng).expect("haar start");
                let v = haar_unitary_with(dbc, &mut rng).expect("haar start");
                (u, v)
            };
            ascend(&ctx, u0, v0, budget.iterations)
        })
        .collect();
    let mut best = 0usize;
    for i in 1..results.len() {
        if results[i].0 > results[best].0 {
            best = i;
        }
    }
    let (achieved, u, v) = results.into_iter().nth(best).expect("nonempty restarts");
    let params = RotatedPetzParams {
        u_b: u,
        v_bc: v,
    };
    let channel = rotated_petz_map(&rho_bc, &params)?;
    Ok(RecoveryOptimum {
        params,
        channel,
        petz_fidelity,
        certificate: RecoveryCertificate {
            cmi_bits: report.cmi_bits,
            target_fidelity: target,
            achieved_fidelity: achieved,
            slack: achieved - target,
            restarts: budget.restarts,
            iterations: budget.iterations,
            seed,
        },
    })
}

/// Choi operator with the normalization `tr_out(choi) = I/dim_in`.
pub fn choi(channel: &QuantumChannel) -> CMat {
    let d_in = channel.dim_in;
    let d_out = channel.dim_out;
    let n = d_in * d_out;
    let mut j = CMat::zeros(n, n);
    let scale = 1.0 / d_in as f64;
    for k in channel.kraus() {
        let mut vk = CMat::zeros(n, 1);
        for i in 0..d_in {
            for o in 0..d_out {
                vk[(i * d_out + o, 0)] = k[(o, i)];
            }
        }
        j += (&vk * vk.adjoint()).scale(scale);
    }
    j
}

/// Reconstructs Kraus operators from a Choi operator, discarding
/// eigenvalues at or below the support cutoff and rejecting genuinely
/// negative ones.
pub fn channel_from_choi(
    choi_op: &CMat,
    dim_in: usize,
    output_dims: &[usize],
) -> Result<QuantumChannel> {
    let dim_out: usize = output_dims.iter().product();
    if choi_op.nrows() != dim_in * dim_out {
        return Err(Error::DimMismatch {
            context: "Choi dimension is not dim_in * dim_out".into(),
        });
    }
    let sd = hermitian_eig(choi_op)?;
    let scale = sd.eigenvalues.first().map_or(0.0, |x| x.abs());
    if let Some(&lambda) = sd
        .eigenvalues
        .iter()
        .find(|&&x| x < -tol::NEGATIVE_CLAMP * scale.max(1e-300))
    {
        return Err(Error::NotCP { eigenvalue: lambda });
    }
    let cut = tol::SUPPORT_CUTOFF * scale;
    let mut kraus = Vec::new();
    for (idx, &mu) in sd.eigenvalues.iter().enumerate() {
        if mu <= cut {
            continue;
        }
        let v = sd.eigenvectors.column(idx);
        let amp = (mu * dim_in as f64).sqrt();
        let mut k = CMat::zeros(dim_out, dim_in);
        for i in 0..dim_in {
            for o in 0..dim_out {
                k[(o, i)] = v[i * dim_out + o] * creal(amp);
            }
        }
        kraus.push(k);
    }
    QuantumChannel::new(kraus, output_dims)
}
