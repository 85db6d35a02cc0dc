//! Dense complex linear algebra on multipartite index structure.
//!
//! Every operator in this crate is a square [`CMat`] over `Complex<f64>`.
//! Composite indices are row-major: for subsystem dimensions `[d1, d2, d3]`
//! the basis index is `i1*d2*d3 + i2*d3 + i3`, so the first subsystem varies
//! slowest. This matches the Kronecker product convention `kron(A, B)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Tolerances shared across the crate, each scaled by the magnitude of the
/// operator it is applied to unless stated otherwise.
pub mod tol {
    /// Eigenvalues at or below this fraction of the largest eigenvalue
    /// magnitude are treated as kernel.
    pub const SUPPORT_CUTOFF: f64 = 1e-12;
    /// Maximum relative deviation from Hermitian symmetry accepted before
    /// symmetrizing an input.
    pub const HERMITICITY: f64 = 1e-9;
    /// Relative reconstruction error allowed for a spectral decomposition.
    pub const EIG_RECONSTRUCTION: f64 = 1e-10;
    /// Window in which slightly negative eigenvalues of nominally
    /// non-negative operators are clamped to zero.
    pub const NEGATIVE_CLAMP: f64 = 1e-10;
}

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn creal(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Largest absolute entry; used as the scale for relative tolerances.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn require_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Deviation from Hermitian symmetry, as the largest entry of `m - m†`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Real eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    /// Rebuilds the matrix as `V diag(f(lambda)) V†`.
    pub fn rebuild_with<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for k in 0..n {
            let fk = creal(f(self.eigenvalues[k]));
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        &scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.rebuild_with(|x| x)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }
}

/// Hermitian eigendecomposition.
///
/// The input is symmetrized as `(m + m†)/2` before factorization; a
/// deviation from symmetry above [`tol::HERMITICITY`] relative to the
/// largest entry is rejected instead of silently averaged away.
pub fn hermitian_eig(m: &CMat) -> Result<SpectralDecomposition> {
    let n = require_square(m)?;
    if !all_finite(m) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMat::zeros(0, 0),
        });
    }
    let scale = max_abs(m);
    let defect = hermiticity_defect(m);
    if defect > tol::HERMITICITY * scale.max(1e-300) {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let h = (m + m.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = CMat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        eigenvalues.push(se.eigenvalues[old]);
        eigenvectors.set_column(new, &se.eigenvectors.column(old));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Options for [`matrix_function`].
#[derive(Debug, Clone, Copy)]
pub struct FunctionOpts {
    /// Relative support cutoff; eigenvalues with magnitude at or below
    /// `support_cutoff * max |lambda|` are mapped to zero, not to `f(0)`.
    pub support_cutoff: f64,
    /// Reject eigenvalues below `-support_cutoff * max |lambda|`.
    pub require_nonnegative: bool,
}

impl Default for FunctionOpts {
    fn default() -> Self {
        FunctionOpts {
            support_cutoff: tol::SUPPORT_CUTOFF,
            require_nonnegative: false,
        }
    }
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
///
/// Kernel eigenvalues (relative magnitude at or below the cutoff) are mapped
/// to zero so that inverse-type functions act as pseudo-inverses on the
/// support.
pub fn matrix_function<F: Fn(f64) -> f64>(m: &CMat, f: F, opts: FunctionOpts) -> Result<CMat> {
    let sd = hermitian_eig(m)?;
    let scale = sd
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    let cut = opts.support_cutoff * scale;
    if opts.require_nonnegative {
        if let Some(&lambda) = sd
            .eigenvalues
            .iter()
            .find(|&&x| x < -(tol::NEGATIVE_CLAMP * scale.max(1e-300)).max(cut))
        {
            return Err(Error::NegativeEigenvalue { eigenvalue: lambda });
        }
    }
    Ok(sd.rebuild_with(|x| if x.abs() <= cut { 0.0 } else { f(x) }))
}

/// Square root of a non-negative operator; slightly negative eigenvalues
/// within the clamp window are zeroed.
pub fn matrix_sqrt(m: &CMat) -> Result<CMat> {
    matrix_function(
        m,
        |x| if x > 0.0 { x.sqrt() } else { 0.0 },
        FunctionOpts {
            require_nonnegative: true,
            ..Default::default()
        },
    )
}

/// Pseudo-inverse square root on the support of a non-negative operator.
pub fn matrix_inv_sqrt(m: &CMat) -> Result<CMat> {
    matrix_function(
        m,
        |x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 },
        FunctionOpts {
            require_nonnegative: true,
            ..Default::default()
        },
    )
}

/// Base-2 logarithm on the support; kernel directions are mapped to zero and
/// must be handled by the caller's support bookkeeping.
pub fn matrix_log2_support(m: &CMat) -> Result<CMat> {
    matrix_function(
        m,
        |x| if x > 0.0 { x.log2() } else { 0.0 },
        FunctionOpts {
            require_nonnegative: true,
            ..Default::default()
        },
    )
}

/// Projector onto the support of a non-negative operator.
pub fn support_projector(m: &CMat) -> Result<CMat> {
    matrix_function(
        m,
        |x| if x > 0.0 { 1.0 } else { 0.0 },
        FunctionOpts {
            require_nonnegative: true,
            ..Default::default()
        },
    )
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `n`-fold Kronecker power; `n = 0` gives the 1×1 identity.
pub fn kron_power(m: &CMat, n: usize) -> CMat {
    let mut out = identity(1);
    for _ in 0..n {
        out = kron(&out, m);
    }
    out
}

/// `I(left) ⊗ op ⊗ I(right)`.
pub fn embed(op: &CMat, left_dim: usize, right_dim: usize) -> CMat {
    let mut out = op.clone();
    if left_dim > 1 {
        out = kron(&identity(left_dim), &out);
    }
    if right_dim > 1 {
        out = kron(&out, &identity(right_dim));
    }
    out
}

/// Ordered factorization of a composite Hilbert space into labeled
/// subsystems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDims {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SystemDims {
    pub fn new(dims: &[usize], labels: &[&str]) -> Result<Self> {
        if dims.len() != labels.len() {
            return Err(Error::DimMismatch {
                context: format!("{} dims vs {} labels", dims.len(), labels.len()),
            });
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::DimMismatch {
                context: "zero subsystem dimension".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for l in labels {
            if !seen.insert(*l) {
                return Err(Error::DimMismatch {
                    context: format!("duplicate label {l}"),
                });
            }
        }
        Ok(SystemDims {
            dims: dims.to_vec(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Vec<&str> {
        self.labels.iter().map(|s| s.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::DimMismatch {
                context: format!("no subsystem labeled {label}"),
            })
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Row-major strides; the first subsystem varies slowest.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut s = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }
}

/// Partial trace keeping the labeled subsystems in their original order.
pub fn partial_trace(m: &CMat, dims: &SystemDims, keep: &[&str]) -> Result<(CMat, SystemDims)> {
    let n = require_square(m)?;
    if n != dims.total_dim() {
        return Err(Error::DimMismatch {
            context: format!("matrix dim {n} vs factor product {}", dims.total_dim()),
        });
    }
    let mut keep_mask = vec![false; dims.len()];
    for label in keep {
        keep_mask[dims.position(label)?] = true;
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| keep_mask[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|&k| !keep_mask[k]).collect();
    let strides = dims.strides();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims.dims[k]).collect();
    let kept_labels: Vec<&str> = kept.iter().map(|&k| dims.labels[k].as_str()).collect();
    let out_dims = SystemDims::new(&kept_dims, &kept_labels)?;
    let dk = out_dims.total_dim();
    let out_strides = out_dims.strides();

    // Offsets of every kept multi-index into the full index, and likewise
    // for the traced factors.
    let enumerate_offsets = |subset: &[usize]| -> Vec<usize> {
        let mut offsets = vec![0usize];
        for &k in subset {
            let mut next = Vec::with_capacity(offsets.len() * dims.dims[k]);
            for &base in &offsets {
                for i in 0..dims.dims[k] {
                    next.push(base + i * strides[k]);
                }
            }
            offsets = next;
        }
        offsets
    };
    let kept_offsets = enumerate_offsets(&kept);
    let traced_offsets = enumerate_offsets(&traced);
    debug_assert_eq!(kept_offsets.len(), dk);

    let mut out = CMat::zeros(dk, dk);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = czero();
            for &to in &traced_offsets {
                acc += m[(ro + to, co + to)];
            }
            out[(r, c)] = acc;
        }
    }
    let _ = out_strides;
    Ok((out, out_dims))
}

/// Conjugation by the permutation that places old subsystem `perm[i]` at new
/// position `i`.
pub fn permute_systems(m: &CMat, dims: &SystemDims, perm: &[usize]) -> Result<(CMat, SystemDims)> {
    let n = require_square(m)?;
    if n != dims.total_dim() {
        return Err(Error::DimMismatch {
            context: format!("matrix dim {n} vs factor product {}", dims.total_dim()),
        });
    }
    if perm.len() != dims.len() {
        return Err(Error::DimMismatch {
            context: "permutation length vs subsystem count".into(),
        });
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::DimMismatch {
                context: "not a permutation of subsystem positions".into(),
            });
        }
        seen[p] = true;
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims.dims[p]).collect();
    let new_labels: Vec<&str> = perm.iter().map(|&p| dims.labels[p].as_str()).collect();
    let out_dims = SystemDims::new(&new_dims, &new_labels)?;
    let old_strides = dims.strides();
    let new_strides = out_dims.strides();

    // index_map[new_index] = old_index
    let mut index_map = vec![0usize; n];
    let mut digits = vec![0usize; dims.len()];
    for (new_idx, entry) in index_map.iter_mut().enumerate() {
        let mut rem = new_idx;
        for k in 0..perm.len() {
            digits[k] = rem / new_strides[k];
            rem %= new_strides[k];
        }
        let mut old_idx = 0;
        for k in 0..perm.len() {
            old_idx += digits[k] * old_strides[perm[k]];
        }
        *entry = old_idx;
    }
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(r, c)] = m[(index_map[r], index_map[c])];
        }
    }
    Ok((out, out_dims))
}

/// Schatten 1-norm, computed from the singular values of the input.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    require_square(m)?;
    if !all_finite(m) {
        return Err(Error::NonFinite);
    }
    let gram = m.adjoint() * m;
    let sd = hermitian_eig(&gram)?;
    Ok(sd
        .eigenvalues
        .iter()
        .map(|&x| if x > 0.0 { x.sqrt() } else { 0.0 })
        .sum())
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &CMat) -> Result<f64> {
    require_square(m)?;
    if !all_finite(m) {
        return Err(Error::NonFinite);
    }
    let gram = m.adjoint() * m;
    let sd = hermitian_eig(&gram)?;
    Ok(sd.eigenvalues.first().map_or(0.0, |&x| x.max(0.0).sqrt()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    Ok(hermitian_eig(m)?.min_eigenvalue())
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn trace_re(m: &CMat) -> f64 {
    trace(m).re
}

/// Hilbert-Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    let mut acc = czero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}
