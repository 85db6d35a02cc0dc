//! Combinatorics of tensor-power spectra.
//!
//! Every eigenvalue of `ρ^{⊗n}` is a product `Π r^{n_r}` over the distinct
//! eigenvalues `r` of `ρ`, so spectral questions about the power reduce to
//! enumerating count vectors `(n_r)` — never the `d^n`-dimensional operator
//! itself. This module enumerates those type classes, sums the mass falling
//! inside an entropy-centered eigenvalue window, and bounds the number of
//! distinct eigenvalue products.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eig, partial_trace, tol, CMat, SystemDims};

pub(crate) const LN2: f64 = std::f64::consts::LN_2;

/// Enumeration refuses to visit more compositions than this.
pub(crate) const TYPE_CLASS_CAP: u128 = 10_000_000;

/// Eigenvalues closer than this (relatively) are treated as one class.
const GROUPING_REL_TOL: f64 = 1e-9;

/// Distinct eigenvalue products closer than this (relatively) are merged.
const PRODUCT_MERGE_REL_TOL: f64 = 1e-12;

pub(crate) fn log2_multinomial(n: usize, counts: &[usize]) -> f64 {
    let mut v = ln_gamma(n as f64 + 1.0);
    for &c in counts {
        v -= ln_gamma(c as f64 + 1.0);
    }
    v / LN2
}

/// Visits every composition of `n` over `r` slots.
pub(crate) fn for_each_composition<F: FnMut(&[usize])>(n: usize, r: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize])>(rest: usize, slot: usize, buf: &mut [usize], f: &mut F) {
        if slot + 1 == buf.len() {
            buf[slot] = rest;
            f(buf);
            return;
        }
        for k in 0..=rest {
            buf[slot] = k;
            rec(rest - k, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0usize; r];
    rec(n, 0, &mut buf, f);
}

pub(crate) fn composition_count(n: usize, r: usize) -> u128 {
    // binom(n + r - 1, r - 1)
    let mut acc: u128 = 1;
    for k in 0..(r - 1) as u128 {
        acc = acc.saturating_mul(n as u128 + k + 1) / (k + 1);
    }
    acc
}

/// One distinct eigenvalue of a spectrum together with its multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumClass {
    pub value: f64,
    pub multiplicity: usize,
}

/// Groups the spectrum of `rho` into distinct eigenvalue classes; classes at
/// the support cutoff are dropped.
pub fn distinct_spectrum(rho: &CMat) -> Result<Vec<SpectrumClass>> {
    let sd = hermitian_eig(rho)?;
    let top = sd.eigenvalues.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Err(Error::InvalidState {
            context: "spectrum has no positive part".into(),
        });
    }
    let cutoff = tol::SUPPORT_CUTOFF * top;
    let mut classes: Vec<SpectrumClass> = Vec::new();
    let mut anchor = f64::INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for &lambda in &sd.eigenvalues {
        if lambda < -tol::NEGATIVE_CLAMP * top {
            return Err(Error::NegativeEigenvalue { eigenvalue: lambda });
        }
        if count > 0 && anchor - lambda > GROUPING_REL_TOL * anchor {
            classes.push(SpectrumClass {
                value: sum / count as f64,
                multiplicity: count,
            });
            count = 0;
            sum = 0.0;
        }
        if count == 0 {
            anchor = lambda;
        }
        sum += lambda;
        count += 1;
    }
    if count > 0 {
        classes.push(SpectrumClass {
            value: sum / count as f64,
            multiplicity: count,
        });
    }
    classes.retain(|c| c.value > cutoff);
    Ok(classes)
}

/// Count vector of one eigenvalue class of the `n`-th tensor power, with its
/// eigenvalue and total spectral mass kept in log space.
#[derive(Debug, Clone)]
pub struct TypeClass {
    /// Copies assigned to each distinct eigenvalue, summing to `n`.
    pub counts: Vec<usize>,
    /// `log₂ Π r^{n_r}`
    pub log2_eigenvalue: f64,
    /// `log₂ [ multinomial(n; counts) · Π (d_r·r)^{n_r} ]`
    pub log2_mass: f64,
}

impl TypeClass {
    pub fn eigenvalue(&self) -> f64 {
        self.log2_eigenvalue.exp2()
    }

    pub fn mass(&self) -> f64 {
        self.log2_mass.exp2()
    }
}

/// Enumerates every type class of `rho^{⊗n}`.
pub fn spectrum_types(rho: &CMat, n: usize) -> Result<Vec<TypeClass>> {
    if n == 0 {
        return Err(Error::OutOfRange {
            context: "tensor power requires n >= 1".into(),
        });
    }
    let classes = distinct_spectrum(rho)?;
    let r = classes.len();
    let total = composition_count(n, r);
    if total > TYPE_CLASS_CAP {
        return Err(Error::TooManyTypes { count: total });
    }
    let log_vals: Vec<f64> = classes.iter().map(|c| c.value.log2()).collect();
    let log_weighted: Vec<f64> = classes
        .iter()
        .map(|c| (c.multiplicity as f64 * c.value).log2())
        .collect();
    let mut out = Vec::with_capacity(total as usize);
    for_each_composition(n, r, &mut |counts| {
        let mut log_eig = 0.0;
        let mut log_mass = log2_multinomial(n, counts);
        for (i, &k) in counts.iter().enumerate() {
            log_eig += k as f64 * log_vals[i];
            log_mass += k as f64 * log_weighted[i];
        }
        out.push(TypeClass {
            counts: counts.to_vec(),
            log2_eigenvalue: log_eig,
            log2_mass: log_mass,
        });
    });
    Ok(out)
}

/// Number of distinct eigenvalues of `rho^{⊗n}` after relative merging of
/// numerically equal products.
pub fn eigenvalue_product_count(rho: &CMat, n: usize) -> Result<usize> {
    let types = spectrum_types(rho, n)?;
    let mut logs: Vec<f64> = types.iter().map(|t| t.log2_eigenvalue).collect();
    logs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let merge = PRODUCT_MERGE_REL_TOL / LN2;
    let mut count = 0usize;
    let mut last = f64::INFINITY;
    for v in logs {
        if last - v > merge {
            count += 1;
            last = v;
        }
    }
    Ok(count)
}

fn entropy_bits(classes: &[SpectrumClass]) -> f64 {
    let mut h = 0.0;
    for c in classes {
        h -= c.multiplicity as f64 * c.value * c.value.log2();
    }
    h
}

struct WindowSums {
    inside: f64,
    outside_log2: f64,
}

/// Splits the power spectrum at the window
/// `[2^{-n(H+δ)}, 2^{-n(H-δ)}]` (closed; boundary ties included).
fn window_sums(rho: &CMat, n: usize, delta: f64) -> Result<WindowSums> {
    if delta <= 0.0 {
        return Err(Error::OutOfRange {
            context: "typical window requires delta > 0".into(),
        });
    }
    let classes = distinct_spectrum(rho)?;
    let h = entropy_bits(&classes);
    let nf = n as f64;
    let slack = 1e-9 * nf.max(1.0);
    let lo = -nf * (h + delta) - slack;
    let hi = -nf * (h - delta) + slack;
    let mut inside = 0.0;
    let mut outside_log2 = f64::NEG_INFINITY;
    for t in spectrum_types(rho, n)? {
        if t.log2_eigenvalue >= lo && t.log2_eigenvalue <= hi {
            inside += t.mass();
        } else {
            let m = outside_log2.max(t.log2_mass);
            outside_log2 = m
                + ((outside_log2 - m).exp2() + (t.log2_mass - m).exp2()).log2();
        }
    }
    Ok(WindowSums {
        inside,
        outside_log2,
    })
}

/// Spectral mass of `rho^{⊗n}` inside the typical window of width `delta`.
pub fn typical_mass(rho: &CMat, n: usize, delta: f64) -> Result<f64> {
    Ok(window_sums(rho, n, delta)?.inside)
}

/// `log₂` of the mass outside the typical window; `-inf` when the window
/// captures every class.
pub fn typical_complement_log2(rho: &CMat, n: usize, delta: f64) -> Result<f64> {
    Ok(window_sums(rho, n, delta)?.outside_log2)
}

/// Typical masses of a marginal/joint pair at a common power.
#[derive(Debug, Clone, Copy)]
pub struct PairMasses {
    pub mass_b: f64,
    pub mass_bc: f64,
}

/// Typical masses of `rho_b^{⊗n}` and `rho_bc^{⊗n}` with separate window
/// widths; `rho_b` must match the first marginal of `rho_bc`.
pub fn projector_pair_masses(
    rho_b: &CMat,
    rho_bc: &CMat,
    dims: (usize, usize),
    n: usize,
    delta_b: f64,
    delta_bc: f64,
) -> Result<PairMasses> {
    let (db, dc) = dims;
    if rho_b.nrows() != db || rho_bc.nrows() != db * dc {
        return Err(Error::DimMismatch {
            context: "pair masses: matrices do not match the declared split".into(),
        });
    }
    let sys = SystemDims::new(&[db, dc], &["B", "C"])?;
    let (traced, _) = partial_trace(rho_bc, &sys, &["B"])?;
    let deviation = linalg::max_abs(&(&traced - rho_b));
    if deviation > 1e-8 {
        return Err(Error::MarginalMismatch {
            context: format!("first marginal deviates by {deviation:.3e}"),
        });
    }
    Ok(PairMasses {
        mass_b: typical_mass(rho_b, n, delta_b)?,
        mass_bc: typical_mass(rho_bc, n, delta_bc)?,
    })
}

/// Smallest power `n ≤ n_max` at which both pair masses reach `1 - eta`,
/// if any.
pub fn smallest_joint_typical_n(
    rho_b: &CMat,
    rho_bc: &CMat,
    dims: (usize, usize),
    delta_b: f64,
    delta_bc: f64,
    eta: f64,
    n_max: usize,
) -> Result<Option<usize>> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::OutOfRange {
            context: format!("eta must lie in (0,1), got {eta}"),
        });
    }
    for n in 1..=n_max {
        let pm = projector_pair_masses(rho_b, rho_bc, dims, n, delta_b, delta_bc)?;
        if pm.mass_b >= 1.0 - eta && pm.mass_bc >= 1.0 - eta {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
