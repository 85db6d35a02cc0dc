//! Entropic quantities in bits, defined for general non-negative operators.
//!
//! Divergences return `f64::INFINITY` when a support condition fails;
//! infinities are values here, not errors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eig, matrix_inv_sqrt, matrix_sqrt, max_abs, tol, CMat,
};
use crate::states::MultipartiteState;

/// Relative mass of the first operator allowed outside the support of the
/// second before a divergence is declared infinite.
pub const SUPPORT_MASS_TOL: f64 = 1e-9;

/// Von Neumann entropy `-tr(rho log2 rho)` of a non-negative operator.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    let sd = hermitian_eig(rho)?;
    let scale = sd.eigenvalues.first().map_or(0.0, |x| x.abs());
    check_nonnegative(&sd.eigenvalues, scale)?;
    let cut = tol::SUPPORT_CUTOFF * scale;
    Ok(-sd
        .eigenvalues
        .iter()
        .filter(|&&x| x > cut)
        .map(|&x| x * x.log2())
        .sum::<f64>())
}

fn check_nonnegative(eigenvalues: &[f64], scale: f64) -> Result<()> {
    let floor = -tol::NEGATIVE_CLAMP * scale.max(1.0);
    if let Some(&lambda) = eigenvalues.iter().find(|&&x| x < floor) {
        return Err(Error::NegativeEigenvalue { eigenvalue: lambda });
    }
    Ok(())
}

/// Entropies of a tripartite state; the middle subsystem conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub h_a: f64,
    pub h_b: f64,
    pub h_c: f64,
    pub h_ab: f64,
    pub h_bc: f64,
    pub h_ac: f64,
    pub h_abc: f64,
    /// `H(AB) + H(BC) - H(B) - H(ABC)`, non-negative for states.
    pub cmi_bits: f64,
}

impl std::fmt::Display for EntropyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "H(A)    = {:.12}", self.h_a)?;
        writeln!(f, "H(B)    = {:.12}", self.h_b)?;
        writeln!(f, "H(C)    = {:.12}", self.h_c)?;
        writeln!(f, "H(AB)   = {:.12}", self.h_ab)?;
        writeln!(f, "H(BC)   = {:.12}", self.h_bc)?;
        writeln!(f, "H(AC)   = {:.12}", self.h_ac)?;
        writeln!(f, "H(ABC)  = {:.12}", self.h_abc)?;
        write!(f, "I(A:C|B) = {:.12}", self.cmi_bits)
    }
}

/// Conditional mutual information of a state with exactly three factors,
/// conditioning on the middle one.
pub fn cmi(state: &MultipartiteState) -> Result<EntropyReport> {
    let labels = state.dims().labels();
    if labels.len() != 3 {
        return Err(Error::DimMismatch {
            context: format!("expected 3 subsystems, found {}", labels.len()),
        });
    }
    let (a, b, c) = (labels[0], labels[1], labels[2]);
    let h = |keep: &[&str]| -> Result<f64> {
        von_neumann_entropy(state.marginal(keep)?.matrix())
    };
    let h_a = h(&[a])?;
    let h_b = h(&[b])?;
    let h_c = h(&[c])?;
    let h_ab = h(&[a, b])?;
    let h_bc = h(&[b, c])?;
    let h_ac = h(&[a, c])?;
    let h_abc = von_neumann_entropy(state.matrix())?;
    Ok(EntropyReport {
        h_a,
        h_b,
        h_c,
        h_ab,
        h_bc,
        h_ac,
        h_abc,
        cmi_bits: h_ab + h_bc - h_b - h_abc,
    })
}

/// `I(A:C|B)` for an arbitrary grouping of subsystem labels. The three
/// groups must be disjoint; labels not mentioned are traced out first.
pub fn cmi_partition(
    state: &MultipartiteState,
    group_a: &[&str],
    group_c: &[&str],
    group_b: &[&str],
) -> Result<f64> {
    let mut seen = std::collections::HashSet::new();
    for l in group_a.iter().chain(group_c).chain(group_b) {
        if !seen.insert(*l) {
            return Err(Error::DimMismatch {
                context: format!("label {l} appears in two groups"),
            });
        }
    }
    let in_original = |labels: &[&str]| -> Vec<&str> {
        state
            .dims()
            .labels()
            .into_iter()
            .filter(|l| labels.contains(l))
            .collect()
    };
    let ab: Vec<&str> = in_original(&[group_a, group_b].concat());
    let cb: Vec<&str> = in_original(&[group_c, group_b].concat());
    let b: Vec<&str> = in_original(group_b);
    let abc: Vec<&str> = in_original(&[group_a, group_b, group_c].concat());
    let h = |keep: &[&str]| -> Result<f64> {
        von_neumann_entropy(state.marginal(keep)?.matrix())
    };
    Ok(h(&ab)? + h(&cb)? - h(&b)? - h(&abc)?)
}

/// Mutual information `I(A:C) = H(A) + H(C) - H(AC)` over label groups.
pub fn mutual_information(
    state: &MultipartiteState,
    group_a: &[&str],
    group_c: &[&str],
) -> Result<f64> {
    cmi_partition(state, group_a, group_c, &[])
}

/// Relative entropy `tr(rho (log2 rho - log2 sigma))/tr(rho)`, infinite when
/// the support of `rho` leaks outside the support of `sigma`.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.nrows() != sigma.nrows() || rho.ncols() != sigma.ncols() {
        return Err(Error::DimMismatch {
            context: "operators of different dimension".into(),
        });
    }
    let sd_rho = hermitian_eig(rho)?;
    let sd_sigma = hermitian_eig(sigma)?;
    let scale_rho = sd_rho.eigenvalues.first().map_or(0.0, |x| x.abs());
    let scale_sigma = sd_sigma.eigenvalues.first().map_or(0.0, |x| x.abs());
    check_nonnegative(&sd_rho.eigenvalues, scale_rho)?;
    check_nonnegative(&sd_sigma.eigenvalues, scale_sigma)?;
    let tr_rho: f64 = sd_rho.eigenvalues.iter().filter(|&&x| x > 0.0).sum();
    if tr_rho <= 0.0 {
        return Err(Error::InvalidState {
            context: "first argument has zero trace".into(),
        });
    }
    let cut_rho = tol::SUPPORT_CUTOFF * scale_rho;
    let cut_sigma = tol::SUPPORT_CUTOFF * scale_sigma;

    // weight of rho on each eigenvector of sigma
    let mut on_support = 0.0f64;
    let mut cross = 0.0f64;
    for (j, &mu) in sd_sigma.eigenvalues.iter().enumerate() {
        if mu <= cut_sigma {
            continue;
        }
        let w = sd_sigma.eigenvectors.column(j);
        let weight = (w.adjoint() * rho * w)[(0, 0)].re.max(0.0);
        on_support += weight;
        cross += weight * mu.log2();
    }
    if tr_rho - on_support > SUPPORT_MASS_TOL * tr_rho {
        return Ok(f64::INFINITY);
    }
    let self_term: f64 = sd_rho
        .eigenvalues
        .iter()
        .filter(|&&x| x > cut_rho)
        .map(|&x| x * x.log2())
        .sum();
    Ok((self_term - cross) / tr_rho)
}

/// Fidelity `|| sqrt(rho) sqrt(sigma) ||_1` of non-negative operators.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.nrows() != sigma.nrows() {
        return Err(Error::DimMismatch {
            context: "operators of different dimension".into(),
        });
    }
    let root = matrix_sqrt(rho)?;
    let m = &root * sigma * &root;
    let sd = hermitian_eig(&m)?;
    let scale = sd.eigenvalues.first().map_or(0.0, |x| x.abs());
    check_nonnegative(&sd.eigenvalues, scale)?;
    Ok(sd
        .eigenvalues
        .iter()
        .map(|&x| if x > 0.0 { x.sqrt() } else { 0.0 })
        .sum())
}

/// Difference of two Hermitian operators, symmetrized so that subtraction
/// roundoff is judged against the inputs' magnitude rather than the
/// (possibly vanishing) difference itself.
fn hermitian_difference(rho: &CMat, sigma: &CMat) -> Result<CMat> {
    if rho.nrows() != sigma.nrows() {
        return Err(Error::DimMismatch {
            context: "operators of different dimension".into(),
        });
    }
    let scale = max_abs(rho).max(max_abs(sigma));
    let diff = rho - sigma;
    let defect = linalg::hermiticity_defect(&diff);
    if defect > tol::HERMITICITY * scale.max(1e-300) {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    Ok((&diff + diff.adjoint()).scale(0.5))
}

/// Generalized trace distance
/// `(||rho - sigma||_1 + |tr(rho - sigma)|) / 2`.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let diff = hermitian_difference(rho, sigma)?;
    let sd = hermitian_eig(&diff)?;
    let one_norm: f64 = sd.eigenvalues.iter().map(|x| x.abs()).sum();
    let tr: f64 = sd.eigenvalues.iter().sum();
    Ok(0.5 * one_norm + 0.5 * tr.abs())
}

/// Traces of the positive and negative parts of `rho - sigma`; their
/// maximum equals the generalized trace distance.
pub fn trace_distance_parts(rho: &CMat, sigma: &CMat) -> Result<(f64, f64)> {
    let diff = hermitian_difference(rho, sigma)?;
    let sd = hermitian_eig(&diff)?;
    let pos: f64 = sd.eigenvalues.iter().filter(|&&x| x > 0.0).sum();
    let neg: f64 = sd.eigenvalues.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    Ok((pos, neg))
}

/// Order-1/2 Renyi divergence `-2 log2(F(rho, sigma)/tr(rho))`; infinite
/// when the fidelity vanishes. Lower-bounds the relative entropy.
pub fn renyi_half_divergence(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    let tr = linalg::trace_re(rho);
    if tr <= 0.0 {
        return Err(Error::InvalidState {
            context: "first argument has zero trace".into(),
        });
    }
    if f == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-2.0 * (f / tr).log2())
}

/// Right-hand sides bounding the conditional mutual information by the
/// distance to a reconstructed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseBounds {
    pub cmi_bits: f64,
    pub delta: f64,
    /// `8 d log2(dimA) + 2 h2(2 d)` for distance `d <= 1/2`.
    pub af_bound: f64,
    /// `7 log2(dimA) sqrt(d)`, only valid for `d <= 1/11`.
    pub simplified_bound: Option<f64>,
}

impl ConverseBounds {
    pub fn af_holds(&self, slack: f64) -> bool {
        self.cmi_bits <= self.af_bound + slack
    }

    pub fn simplified_holds(&self, slack: f64) -> Option<bool> {
        self.simplified_bound.map(|b| self.cmi_bits <= b + slack)
    }
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Continuity-based converse bounds for a given distance between a state
/// and a reconstruction acting only on the conditioning side.
pub fn converse_bounds(cmi_bits: f64, delta: f64, dim_a: usize) -> Result<ConverseBounds> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::OutOfRange {
            context: format!("distance {delta} outside [0, 1/2]"),
        });
    }
    if dim_a == 0 {
        return Err(Error::OutOfRange {
            context: "zero dimension".into(),
        });
    }
    let log_da = (dim_a as f64).log2();
    let af_bound = 8.0 * delta * log_da - 2.0 * xlog2x(2.0 * delta) - 2.0 * xlog2x(1.0 - 2.0 * delta);
    let simplified_bound = if delta <= 1.0 / 11.0 {
        Some(7.0 * log_da * delta.sqrt())
    } else {
        None
    };
    Ok(ConverseBounds {
        cmi_bits,
        delta,
        af_bound,
        simplified_bound,
    })
}

fn pure_state_vector(state: &MultipartiteState) -> Result<Vec<Complex64>> {
    let sd = hermitian_eig(state.matrix())?;
    let tr: f64 = sd.eigenvalues.iter().sum();
    let top = sd.eigenvalues[0];
    if (top - tr).abs() > 1e-8 * tr.max(1.0) {
        return Err(Error::PreconditionViolated {
            context: format!("state is not pure (top eigenvalue {top:.6}, trace {tr:.6})"),
        });
    }
    let col = sd.eigenvectors.column(0);
    Ok(col.iter().map(|&z| z * Complex64::new(top.sqrt(), 0.0)).collect())
}

/// Transports a purification of `rho` to a purification of `sigma` that
/// attains the fidelity, acting only on the purified factors.
///
/// The purification's factors must start with the subsystems carrying
/// `rho`; everything after is reference. Both operators are shifted by
/// `1e-10` times their largest entry to make the polar factors well defined,
/// so near-singular inputs lose accuracy accordingly.
pub fn uhlmann_partner(
    rho: &CMat,
    sigma: &CMat,
    purification_of_rho: &MultipartiteState,
) -> Result<MultipartiteState> {
    let nd = rho.nrows();
    if sigma.nrows() != nd {
        return Err(Error::DimMismatch {
            context: "operators of different dimension".into(),
        });
    }
    let dims = purification_of_rho.dims();
    let total = dims.total_dim();
    let mut split = None;
    let mut acc = 1usize;
    for k in 0..dims.len() {
        acc *= dims.dims()[k];
        if acc == nd {
            split = Some(k + 1);
            break;
        }
        if acc > nd {
            break;
        }
    }
    let split = split.ok_or_else(|| Error::DimMismatch {
        context: format!("purification factors do not begin with a dim-{nd} block"),
    })?;
    let n_ref = total / nd;

    let marginal_labels: Vec<&str> = dims.labels()[..split].to_vec();
    let reduced = purification_of_rho.marginal(&marginal_labels)?;
    if max_abs(&(reduced.matrix() - rho)) > 1e-7 * max_abs(rho).max(1.0) {
        return Err(Error::PreconditionViolated {
            context: "purification does not reduce to the first argument".into(),
        });
    }

    let eps_rho = 1e-10 * max_abs(rho).max(1e-300);
    let eps_sigma = 1e-10 * max_abs(sigma).max(1e-300);
    let rho_r = rho + linalg::identity(nd).scale(eps_rho);
    let sigma_r = sigma + linalg::identity(nd).scale(eps_sigma);

    let sqrt_rho = matrix_sqrt(&rho_r)?;
    let sqrt_sigma = matrix_sqrt(&sigma_r)?;
    let inv_sqrt_rho = matrix_inv_sqrt(&rho_r)?;
    let cross = &sqrt_rho * sigma_r.clone() * &sqrt_rho;
    let q_inv = matrix_inv_sqrt(&cross)?;
    // left polar factor of sqrt(rho) sqrt(sigma)
    let u = &q_inv * &sqrt_rho * &sqrt_sigma;
    let op = &sqrt_sigma * u.adjoint() * &inv_sqrt_rho;

    let psi = pure_state_vector(purification_of_rho)?;
    // apply op ⊗ I on the reference block: reshape as nd x n_ref
    let mut phi = vec![Complex64::default(); total];
    for i_out in 0..nd {
        for r in 0..n_ref {
            let mut accum = Complex64::default();
            for i_in in 0..nd {
                accum += op[(i_out, i_in)] * psi[i_in * n_ref + r];
            }
            phi[i_out * n_ref + r] = accum;
        }
    }
    let mut m = CMat::zeros(total, total);
    for r in 0..total {
        for c in 0..total {
            m[(r, c)] = phi[r] * phi[c].conj();
        }
    }
    Ok(MultipartiteState::from_parts_unchecked(m, dims.clone()))
}

/// Overlap `|<psi|phi>|` of two pure states, used to compare purification
/// fidelities.
pub fn pure_overlap(a: &MultipartiteState, b: &MultipartiteState) -> Result<f64> {
    let va = pure_state_vector(a)?;
    let vb = pure_state_vector(b)?;
    if va.len() != vb.len() {
        return Err(Error::DimMismatch {
            context: "pure states of different dimension".into(),
        });
    }
    let mut acc = Complex64::default();
    for (x, y) in va.iter().zip(vb.iter()) {
        acc += x.conj() * y;
    }
    Ok(acc.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, kron, SystemDims};
    use crate::states::{canonical_state, random_state, MultipartiteState};

    fn diag(values: &[f64]) -> CMat {
        let n = values.len();
        CMat::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                Complex64::default()
            }
        })
    }

    #[test]
    fn entropy_reference_values() {
        assert!((von_neumann_entropy(&diag(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-12);
        let h = von_neumann_entropy(&diag(&[0.9, 0.1])).unwrap();
        assert!((h - 0.468995593589281).abs() < 1e-12);
        let pure = diag(&[1.0, 0.0, 0.0]);
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-10);
    }

    #[test]
    fn ghz_and_w_cmi() {
        let ghz = canonical_state("ghz", None).unwrap();
        let report = cmi(&ghz).unwrap();
        assert!((report.cmi_bits - 1.0).abs() < 1e-10);
        let w = canonical_state("w", None).unwrap();
        let report = cmi(&w).unwrap();
        assert!((report.cmi_bits - 0.918295834054490).abs() < 1e-9);
    }

    #[test]
    fn product_state_has_zero_cmi() {
        let p = canonical_state("product", None).unwrap();
        let report = cmi(&p).unwrap();
        assert!(report.cmi_bits.abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_reference_values() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.75, 0.25]);
        let d = relative_entropy(&rho, &sigma).unwrap();
        assert!((d - 0.207518749639422).abs() < 1e-12);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);
        let p0 = diag(&[1.0, 0.0]);
        let p1 = diag(&[0.0, 1.0]);
        assert!(relative_entropy(&p0, &p1).unwrap().is_infinite());
    }

    #[test]
    fn relative_entropy_scaling_shift() {
        let rho = random_state(&[4], &["S"], 21).unwrap().into_matrix();
        let sigma = random_state(&[4], &["S"], 22).unwrap().into_matrix();
        let d = relative_entropy(&rho, &sigma).unwrap();
        let d_scaled = relative_entropy(&rho.clone().scale(3.0), &sigma.clone().scale(0.5)).unwrap();
        assert!((d_scaled - (d + (3.0f64 / 0.5).log2())).abs() < 1e-9);
    }

    #[test]
    fn fidelity_reference_values() {
        let pure = diag(&[1.0, 0.0]);
        let mixed = diag(&[0.5, 0.5]);
        let f = fidelity(&pure, &mixed).unwrap();
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let rho = random_state(&[3], &["S"], 4).unwrap().into_matrix();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let sigma = random_state(&[3], &["S"], 5).unwrap().into_matrix();
        let ab = fidelity(&rho, &sigma).unwrap();
        let ba = fidelity(&sigma, &rho).unwrap();
        assert!((ab - ba).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_reference_values() {
        let p0 = diag(&[1.0, 0.0]);
        let p1 = diag(&[0.0, 1.0]);
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&p0, &p0).unwrap().abs() < 1e-14);
        // subnormalized second argument adds the trace gap
        let rho = random_state(&[3], &["S"], 9).unwrap().into_matrix();
        let half = rho.clone().scale(0.5);
        let d = trace_distance(&rho, &half).unwrap();
        assert!((d - 0.5).abs() < 1e-10);
        // max formulation
        let sigma = random_state(&[3], &["S"], 10).unwrap().into_matrix();
        let (pos, neg) = trace_distance_parts(&rho, &sigma).unwrap();
        let d = trace_distance(&rho, &sigma).unwrap();
        assert!((d - pos.max(neg)).abs() < 1e-10);
    }

    #[test]
    fn renyi_lower_bounds_relative_entropy() {
        for seed in 0..20u64 {
            let rho = random_state(&[4], &["S"], 100 + seed).unwrap().into_matrix();
            let sigma = random_state(&[4], &["S"], 200 + seed).unwrap().into_matrix();
            let d = relative_entropy(&rho, &sigma).unwrap();
            let d_half = renyi_half_divergence(&rho, &sigma).unwrap();
            assert!(d_half <= d + 1e-9, "renyi {d_half} vs relative {d}");
        }
    }

    #[test]
    fn converse_bound_reference_values() {
        let b = converse_bounds(0.1, 1.0 / 11.0, 2).unwrap();
        let simplified = b.simplified_bound.unwrap();
        assert!((simplified - 7.0 / 11f64.sqrt()).abs() < 1e-12);
        let at_zero = converse_bounds(0.0, 0.0, 2).unwrap();
        assert!(at_zero.af_bound.abs() < 1e-14);
        assert!(converse_bounds(0.0, 0.6, 2).is_err());
        assert!(converse_bounds(0.0, 0.2, 2).unwrap().simplified_bound.is_none());
    }

    #[test]
    fn chain_rule_for_cmi() {
        for seed in 0..10u64 {
            let s = random_state(&[2, 2, 2, 2], &["A1", "A2", "B", "C"], 300 + seed).unwrap();
            let joint = cmi_partition(&s, &["A1", "A2"], &["C"], &["B"]).unwrap();
            let first = cmi_partition(&s, &["A1"], &["C"], &["B"]).unwrap();
            let second = cmi_partition(&s, &["A2"], &["C"], &["B", "A1"]).unwrap();
            assert!((joint - (first + second)).abs() < 1e-8);
        }
    }

    #[test]
    fn uhlmann_partner_attains_fidelity() {
        for seed in 0..8u64 {
            let rho_state = random_state(&[2, 2], &["D1", "D2"], 400 + seed).unwrap();
            let sigma_state = random_state(&[2, 2], &["D1", "D2"], 500 + seed).unwrap();
            let psi = crate::states::purify(&rho_state).unwrap();
            let partner =
                uhlmann_partner(rho_state.matrix(), sigma_state.matrix(), &psi).unwrap();
            let reduced = partner
                .marginal(&["D1", "D2"])
                .unwrap();
            assert!(
                max_abs(&(reduced.matrix() - sigma_state.matrix())) < 1e-7,
                "partner marginal deviates"
            );
            let overlap = pure_overlap(&psi, &partner).unwrap();
            let f = fidelity(rho_state.matrix(), sigma_state.matrix()).unwrap();
            assert!((overlap - f).abs() < 1e-7, "overlap {overlap} vs fidelity {f}");
        }
    }

    #[test]
    fn uhlmann_partner_preserves_permutation_invariance() {
        // permutation-invariant rho and sigma on two qubit copies
        let one = random_state(&[2], &["S"], 601).unwrap().into_matrix();
        let two = random_state(&[2], &["S"], 602).unwrap().into_matrix();
        let rho = kron(&one, &one).scale(0.5) + kron(&two, &two).scale(0.5);
        let three = random_state(&[2], &["S"], 603).unwrap().into_matrix();
        let sigma = kron(&three, &three);
        let dims = SystemDims::new(&[2, 2], &["D1", "D2"]).unwrap();
        let rho_state = MultipartiteState::new(rho.clone(), dims).unwrap();
        let psi = crate::states::purify(&rho_state).unwrap();
        let partner = uhlmann_partner(&rho, &sigma, &psi).unwrap();
        // simultaneous swap of the two copies and their references
        let swapped = partner.permuted(&[1, 0, 3, 2]).unwrap();
        assert!(max_abs(&(swapped.matrix() - partner.matrix())) < 1e-7);
        let _ = identity(2);
    }
}
