//! Iterated-recovery construction of k-extendible approximations and the
//! quantitative faithfulness bounds they imply for squashed entanglement.
//!
//! Starting from an extension `ρ_ACE` and a reconstruction channel
//! `T: E → E⊗C`, the ladder `ρ^{i+1} = (I ⊗ T)(ρ^i)` grows one `C` factor
//! per step while moving the `(A, C_i, E)` marginal by at most
//! `δ = √(ln2 · I(A:C|E))` per step. Symmetrizing the final rung over its
//! `C` factors yields a k-extendible state whose distance from `ρ_AC` is
//! bounded by `(k−1)/2 · δ`, which in turn bounds the distance to the
//! separable set through the extendibility hierarchy.

use crate::definetti::all_permutations;
use crate::entropies::{cmi_partition, mutual_information, trace_distance};
use crate::error::{Error, Result};
use crate::linalg::{self, identity, kron, max_abs, CMat};
use crate::recovery::{apply_channel, QuantumChannel};
use crate::states::{random_density, split_seed, swap_operator, MultipartiteState};

const LN2: f64 = std::f64::consts::LN_2;
const DIM_CAP: usize = 4096;

/// Ladder of extensions `ρ^i` on `A ⊗ C_1…C_i ⊗ E` produced by iterating a
/// reconstruction channel on the conditioning factor.
#[derive(Debug, Clone)]
pub struct ExtensionLadder {
    states: Vec<MultipartiteState>,
    /// `Δ(ρ^i_{AC_iE}, ρ^{i+1}_{AC_{i+1}E})` for `i = 1..k-1`.
    step_distances: Vec<f64>,
    delta: f64,
    cmi_bits: f64,
}

impl ExtensionLadder {
    pub fn k(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[MultipartiteState] {
        &self.states
    }

    pub fn final_state(&self) -> &MultipartiteState {
        self.states.last().expect("ladder has at least one rung")
    }

    pub fn step_distances(&self) -> &[f64] {
        &self.step_distances
    }

    pub fn max_step_distance(&self) -> f64 {
        self.step_distances.iter().cloned().fold(0.0, f64::max)
    }

    /// `√(ln2 · I(A:C|E))` of the input extension.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cmi_bits(&self) -> f64 {
        self.cmi_bits
    }
}

fn c_label(i: usize) -> String {
    format!("C{i}")
}

/// Iterates `recovery: E → E⊗C` on a tripartite extension ordered
/// `(A, C, E)`, producing rungs `ρ^1 … ρ^k` with factors relabeled
/// `(A, C_1…C_i, E)`.
pub fn build_extension_ladder(
    rho_ace: &MultipartiteState,
    k: usize,
    recovery: &QuantumChannel,
) -> Result<ExtensionLadder> {
    let labels = rho_ace.dims().labels();
    if labels.len() != 3 {
        return Err(Error::DimMismatch {
            context: "ladder input must have exactly three factors".into(),
        });
    }
    if k == 0 {
        return Err(Error::OutOfRange {
            context: "ladder needs at least one rung".into(),
        });
    }
    let dims = rho_ace.dims().dims();
    let (dim_a, dim_c, dim_e) = (dims[0], dims[1], dims[2]);
    let mut final_dim = dim_a.saturating_mul(dim_e);
    for _ in 0..k {
        final_dim = final_dim.saturating_mul(dim_c);
        if final_dim > DIM_CAP {
            return Err(Error::TooLarge {
                context: format!("ladder dimension exceeds {DIM_CAP}"),
            });
        }
    }
    if recovery.dim_in() != dim_e || recovery.output_dims() != [dim_e, dim_c] {
        return Err(Error::DimMismatch {
            context: "recovery channel must map E to E⊗C for the ladder dims".into(),
        });
    }
    let cmi_bits = cmi_partition(rho_ace, &[labels[0]], &[labels[1]], &[labels[2]])?;
    let delta = (LN2 * cmi_bits.max(0.0)).sqrt();

    let first = rho_ace.relabeled(&["A", "C1", "E"])?;
    let mut states = vec![first];
    let mut step_distances = Vec::with_capacity(k.saturating_sub(1));
    for i in 1..k {
        let current = states.last().expect("nonempty ladder");
        let next_label = c_label(i + 1);
        let grown = apply_channel(recovery, current, "E", &["E", &next_label])?;
        // move the fresh C factor in front of E:
        // [A C1..Ci E C_{i+1}] → [A C1..C_{i+1} E]
        let slots = grown.dims().len();
        let mut order: Vec<usize> = (0..slots - 2).collect();
        order.push(slots - 1);
        order.push(slots - 2);
        let next = grown.permuted(&order)?;

        let here = c_label(i);
        let a = current.marginal(&["A", &here, "E"])?;
        let b = next.marginal(&["A", &next_label, "E"])?;
        step_distances.push(trace_distance(a.matrix(), b.matrix())?);
        states.push(next);
    }
    Ok(ExtensionLadder {
        states,
        step_distances,
        delta,
        cmi_bits,
    })
}

/// Symmetrizes the final rung over its `C` factors. Returns
/// `(ω_AC, ω̄_{AC_1…C_k})`; `ω_AC` is k-extendible with witness `ω̄`.
pub fn symmetrized_extension(
    ladder: &ExtensionLadder,
) -> Result<(MultipartiteState, MultipartiteState)> {
    let k = ladder.k();
    let last = ladder.final_state();
    let mut keep: Vec<String> = vec!["A".into()];
    for i in 1..=k {
        keep.push(c_label(i));
    }
    let keep_refs: Vec<&str> = keep.iter().map(String::as_str).collect();
    let no_e = last.marginal(&keep_refs)?;

    let perms = all_permutations(k);
    let weight = linalg::creal(1.0 / perms.len() as f64);
    let mut acc = CMat::zeros(no_e.matrix().nrows(), no_e.matrix().ncols());
    for pi in &perms {
        let mut order = Vec::with_capacity(k + 1);
        order.push(0usize);
        for j in 0..k {
            order.push(1 + pi.image(j));
        }
        acc += no_e.permuted(&order)?.matrix() * weight;
    }
    let witness = MultipartiteState::from_parts_unchecked(acc, no_e.dims().clone());
    let omega = witness.marginal(&["A", "C1"])?;
    Ok((omega, witness))
}

/// Upper bound on squashed entanglement from explicit extensions: the best
/// `I(A:C|E)/2` among the supplied `(A, C, E)` extensions and the trivial
/// one-dimensional extension.
pub fn squashed_upper_bound(
    rho_ac: &MultipartiteState,
    extensions: &[MultipartiteState],
) -> Result<f64> {
    let labels = rho_ac.dims().labels();
    if labels.len() != 2 {
        return Err(Error::DimMismatch {
            context: "squashed entanglement takes a bipartite state".into(),
        });
    }
    let mut best = mutual_information(rho_ac, &[labels[0]], &[labels[1]])? / 2.0;
    for ext in extensions {
        let ext_labels = ext.dims().labels();
        if ext_labels.len() != 3 {
            return Err(Error::DimMismatch {
                context: "extensions must have exactly three factors".into(),
            });
        }
        let marginal = ext.marginal(&[ext_labels[0], ext_labels[1]])?;
        if marginal.dims().dims() != rho_ac.dims().dims() {
            return Err(Error::MarginalMismatch {
                context: "extension AC dimensions do not match".into(),
            });
        }
        let deviation = max_abs(&(marginal.matrix() - rho_ac.matrix()));
        if deviation > 1e-7 {
            return Err(Error::MarginalMismatch {
                context: format!("extension AC marginal deviates by {deviation:.3e}"),
            });
        }
        let half_cmi =
            cmi_partition(ext, &[ext_labels[0]], &[ext_labels[1]], &[ext_labels[2]])? / 2.0;
        best = best.min(half_cmi);
    }
    Ok(best.max(0.0))
}

/// `(k−1)·√(ln2/2 · E_sq)`: distance to the nearest k-extendible state.
pub fn extendibility_distance_bound(e_sq: f64, k: usize) -> Result<f64> {
    if e_sq < 0.0 {
        return Err(Error::OutOfRange {
            context: format!("squashed entanglement must be non-negative, got {e_sq}"),
        });
    }
    if k == 0 {
        return Err(Error::OutOfRange {
            context: "extendibility order must be at least 1".into(),
        });
    }
    Ok((k as f64 - 1.0) * (LN2 / 2.0 * e_sq).sqrt())
}

/// Distance bound from the separable set, with the extendibility order the
/// formula inserts.
#[derive(Debug, Clone, Copy)]
pub struct SeparabilityBound {
    /// Reported bound, capped at 1 (a trace distance never exceeds it).
    pub bound: f64,
    /// Uncapped formula value `2·dimC·(2 ln2 · E_sq)^{1/4}`.
    pub raw_bound: f64,
    /// `⌈(8/(ln2·E_sq))^{1/4}·dimC⌉`; `None` when the state is exactly
    /// separable and no finite order is needed.
    pub k_used: Option<u64>,
    pub capped: bool,
    pub exactly_separable: bool,
}

pub fn separability_distance_bound(e_sq: f64, dim_c: usize) -> Result<SeparabilityBound> {
    if e_sq < 0.0 {
        return Err(Error::OutOfRange {
            context: format!("squashed entanglement must be non-negative, got {e_sq}"),
        });
    }
    if dim_c == 0 {
        return Err(Error::OutOfRange {
            context: "dim C must be positive".into(),
        });
    }
    if e_sq == 0.0 {
        return Ok(SeparabilityBound {
            bound: 0.0,
            raw_bound: 0.0,
            k_used: None,
            capped: false,
            exactly_separable: true,
        });
    }
    let raw = 2.0 * dim_c as f64 * (2.0 * LN2 * e_sq).powf(0.25);
    let k = ((8.0 / (LN2 * e_sq)).powf(0.25) * dim_c as f64).ceil();
    Ok(SeparabilityBound {
        bound: raw.min(1.0),
        raw_bound: raw,
        k_used: Some(k as u64),
        capped: raw > 1.0,
        exactly_separable: false,
    })
}

/// Product-state overlaps with the antisymmetric projector, and the
/// separability-distance floor they certify for the antisymmetric state.
#[derive(Debug, Clone, Copy)]
pub struct AntisymmetricReport {
    pub trials: usize,
    pub max_overlap: f64,
    /// `(tr(ρ_as Π_as) − max_overlap)/2`, at least 1/4 when the overlap
    /// bound 1/2 holds.
    pub distance_lower_bound: f64,
}

/// Samples product states `σ_A ⊗ σ_C` and evaluates `tr((σ_A⊗σ_C) Π_as)`.
pub fn antisymmetric_check(d: usize, trials: usize, seed: u64) -> Result<AntisymmetricReport> {
    if d < 2 {
        return Err(Error::OutOfRange {
            context: "antisymmetric check needs local dimension at least 2".into(),
        });
    }
    if d.saturating_pow(4) > DIM_CAP {
        return Err(Error::TooLarge {
            context: format!("local dimension {d} too large for the projector"),
        });
    }
    let projector = (identity(d * d) - swap_operator(d)) * linalg::creal(0.5);
    let mut max_overlap: f64 = 0.0;
    for t in 0..trials as u64 {
        let a = random_density(d, d, split_seed(seed, 2 * t))?;
        let c = random_density(d, d, split_seed(seed, 2 * t + 1))?;
        let overlap = (kron(a.matrix(), c.matrix()) * &projector).trace().re;
        max_overlap = max_overlap.max(overlap);
    }
    let normalization = projector.trace().re;
    let rho_as = &projector * linalg::creal(1.0 / normalization);
    let self_overlap = (&rho_as * &projector).trace().re;
    Ok(AntisymmetricReport {
        trials,
        max_overlap,
        distance_lower_bound: 0.5 * (self_overlap - max_overlap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SystemDims;
    use crate::recovery::{optimize_recovery, petz_map, RecoveryBudget};
    use crate::states::{
        canonical_state, qcq_markov_reconstruction, random_qcq_spec, random_state,
    };

    fn optimized_ladder_channel(rho_ace: &MultipartiteState, seed: u64) -> QuantumChannel {
        // reorder to (A, E, C) so the optimizer conditions on E
        let rotated = rho_ace.permuted(&[0, 2, 1]).unwrap();
        let budget = RecoveryBudget {
            restarts: 4,
            iterations: 150,
        };
        optimize_recovery(&rotated, budget, seed).unwrap().channel
    }

    #[test]
    fn markov_input_gives_a_flat_ladder() {
        let spec = random_qcq_spec(2, 2, 2, 2024).unwrap();
        let markov = qcq_markov_reconstruction(&spec).unwrap();
        // the chain's middle factor becomes the conditioning system E
        let ace = markov.permuted(&[0, 2, 1]).unwrap();
        let rho_ec = markov.marginal(&["B", "C"]).unwrap();
        let recovery = petz_map(&rho_ec).unwrap();
        let ladder = build_extension_ladder(&ace, 3, &recovery).unwrap();
        assert!(ladder.cmi_bits() < 1e-9);
        assert!(
            ladder.max_step_distance() <= 1e-7,
            "steps {:?}",
            ladder.step_distances()
        );
        let (omega, _) = symmetrized_extension(&ladder).unwrap();
        let rho_ac = ace.marginal(&["A", "C"]).unwrap();
        let d = trace_distance(rho_ac.matrix(), omega.matrix()).unwrap();
        assert!(d <= 1e-7, "markov distance {d}");
    }

    #[test]
    fn ladder_steps_stay_below_delta() {
        let rho = random_state(&[2, 2, 2], &["A", "C", "E"], 3111).unwrap();
        let recovery = optimized_ladder_channel(&rho, 3112);
        let ladder = build_extension_ladder(&rho, 3, &recovery).unwrap();
        let delta = ladder.delta();
        for (i, &step) in ladder.step_distances().iter().enumerate() {
            assert!(step <= delta + 1e-7, "step {i}: {step} vs delta {delta}");
        }
        // later steps never exceed the first: they are channel images
        assert!(ladder.step_distances()[1] <= ladder.step_distances()[0] + 1e-9);
    }

    #[test]
    fn telescoping_bounds_the_marginal_drift() {
        let rho = random_state(&[2, 2, 2], &["A", "C", "E"], 3211).unwrap();
        let recovery = optimized_ladder_channel(&rho, 3212);
        let ladder = build_extension_ladder(&rho, 3, &recovery).unwrap();
        let delta = ladder.delta();
        let rho_ac = rho.marginal(&["A", "C"]).unwrap();
        for j in 1..=ladder.k() {
            let label = c_label(j);
            let m = ladder.states()[j - 1].marginal(&["A", &label]).unwrap();
            let d = trace_distance(rho_ac.matrix(), m.matrix()).unwrap();
            assert!(
                d <= (j as f64 - 1.0) * delta + 1e-6,
                "j {j}: {d} vs {}",
                (j as f64 - 1.0) * delta
            );
        }
    }

    #[test]
    fn symmetrized_extension_is_permutation_invariant() {
        let rho = random_state(&[2, 2, 2], &["A", "C", "E"], 3311).unwrap();
        let recovery = optimized_ladder_channel(&rho, 3312);
        let ladder = build_extension_ladder(&rho, 3, &recovery).unwrap();
        let (omega, witness) = symmetrized_extension(&ladder).unwrap();
        // invariance under an explicit C-swap
        let swapped = witness.permuted(&[0, 2, 1, 3]).unwrap();
        assert!(max_abs(&(swapped.matrix() - witness.matrix())) < 1e-10);
        // all single-C marginals coincide with omega
        for i in 1..=3usize {
            let m = witness.marginal(&["A", &c_label(i)]).unwrap();
            assert!(max_abs(&(m.matrix() - omega.matrix())) < 1e-10);
        }
        // distance bound (k-1)/2 · delta
        let rho_ac = rho.marginal(&["A", "C"]).unwrap();
        let d = trace_distance(rho_ac.matrix(), omega.matrix()).unwrap();
        let bound = (3.0 - 1.0) / 2.0 * ladder.delta();
        assert!(d <= bound + 1e-6, "{d} vs {bound}");
    }

    #[test]
    fn single_rung_ladder_is_the_input() {
        let rho = random_state(&[2, 3, 2], &["A", "C", "E"], 3411).unwrap();
        let rho_ec = rho.marginal(&["C", "E"]).unwrap().permuted(&[1, 0]).unwrap();
        let recovery = petz_map(&rho_ec).unwrap();
        let ladder = build_extension_ladder(&rho, 1, &recovery).unwrap();
        assert_eq!(ladder.k(), 1);
        assert!(ladder.step_distances().is_empty());
        let (omega, _) = symmetrized_extension(&ladder).unwrap();
        let rho_ac = rho.marginal(&["A", "C"]).unwrap();
        assert!(max_abs(&(omega.matrix() - rho_ac.matrix())) < 1e-12);
    }

    #[test]
    fn squashed_upper_bound_uses_the_best_extension() {
        // classically flagged separable state: conditioning on the flag
        // kills the mutual information
        let mut m = CMat::zeros(8, 8);
        m[(0, 0)] = linalg::creal(0.5); // |0 0 flag0>
        m[(7, 7)] = linalg::creal(0.5); // |1 1 flag1>
        let sys = SystemDims::new(&[2, 2, 2], &["A", "C", "E"]).unwrap();
        let flagged = MultipartiteState::from_parts_unchecked(m, sys);
        let rho_ac = flagged.marginal(&["A", "C"]).unwrap();
        let e_sq = squashed_upper_bound(&rho_ac, std::slice::from_ref(&flagged)).unwrap();
        assert!(e_sq <= 1e-8, "flagged separable bound {e_sq}");
        // without the extension the trivial bound is I(A:C)/2 = 1/2
        let trivial = squashed_upper_bound(&rho_ac, &[]).unwrap();
        assert!((trivial - 0.5).abs() < 1e-9);
    }

    #[test]
    fn singlet_trivial_extension_gives_one_bit() {
        let singlet = canonical_state("singlet", None).unwrap();
        let e_sq = squashed_upper_bound(&singlet, &[]).unwrap();
        assert!((e_sq - 1.0).abs() < 1e-9, "singlet {e_sq}");
        let product = canonical_state("product", None)
            .unwrap()
            .marginal(&["A", "B"])
            .unwrap();
        let zero = squashed_upper_bound(&product, &[]).unwrap();
        assert!(zero.abs() < 1e-9);
    }

    #[test]
    fn mismatched_extensions_are_rejected() {
        let rho = random_state(&[2, 2, 2], &["A", "C", "E"], 3511).unwrap();
        let other = random_state(&[2, 2, 2], &["A", "C", "E"], 3512).unwrap();
        let rho_ac = rho.marginal(&["A", "C"]).unwrap();
        assert!(matches!(
            squashed_upper_bound(&rho_ac, std::slice::from_ref(&other)),
            Err(Error::MarginalMismatch { .. })
        ));
    }

    #[test]
    fn bound_formulas_match_frozen_arithmetic() {
        let v = extendibility_distance_bound(0.5, 3).unwrap();
        assert!((v - 0.8325546111576977).abs() < 1e-12);
        assert_eq!(extendibility_distance_bound(0.7, 1).unwrap(), 0.0);
        let sep = separability_distance_bound(0.01, 2).unwrap();
        assert!((sep.raw_bound - 1.372536351440194).abs() < 1e-12);
        assert_eq!(sep.bound, 1.0);
        assert!(sep.capped);
        assert_eq!(sep.k_used, Some(12));
        assert!(!sep.exactly_separable);
        let flat = separability_distance_bound(0.0, 5).unwrap();
        assert_eq!(flat.bound, 0.0);
        assert_eq!(flat.k_used, None);
        assert!(flat.exactly_separable);
        assert!(extendibility_distance_bound(-0.1, 2).is_err());
    }

    #[test]
    fn antisymmetric_overlap_stays_below_one_half() {
        let report = antisymmetric_check(2, 1000, 7171).unwrap();
        assert!(report.max_overlap <= 0.5 + 1e-9, "{}", report.max_overlap);
        assert!(
            report.distance_lower_bound >= 0.25 - 1e-9,
            "{}",
            report.distance_lower_bound
        );
        // the overlap has a closed form: (1 - tr(σ_A σ_C))/2
        let a = random_density(2, 2, 7272).unwrap();
        let c = random_density(2, 2, 7273).unwrap();
        let projector = (identity(4) - swap_operator(2)) * linalg::creal(0.5);
        let overlap = (kron(a.matrix(), c.matrix()) * &projector).trace().re;
        let closed = 0.5 * (1.0 - (a.matrix() * c.matrix()).trace().re);
        assert!((overlap - closed).abs() < 1e-12);
        // maximally mixed pair sits exactly at 1/4
        let mixed = identity(2) * linalg::creal(0.5);
        let mm = (kron(&mixed, &mixed) * &projector).trace().re;
        assert!((mm - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ladder_validates_inputs() {
        let rho = random_state(&[2, 2, 2], &["A", "C", "E"], 3611).unwrap();
        let rho_ec = rho.marginal(&["C", "E"]).unwrap().permuted(&[1, 0]).unwrap();
        let recovery = petz_map(&rho_ec).unwrap();
        assert!(matches!(
            build_extension_ladder(&rho, 0, &recovery),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            build_extension_ladder(&rho, 12, &recovery),
            Err(Error::TooLarge { .. })
        ));
        let odd = random_state(&[2, 3], &["X", "Y"], 3612).unwrap();
        let wrong = petz_map(&odd).unwrap();
        assert!(matches!(
            build_extension_ladder(&rho, 2, &wrong),
            Err(Error::DimMismatch { .. })
        ));
    }
}
