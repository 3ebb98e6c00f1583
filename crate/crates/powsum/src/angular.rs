//! The angular coupling coefficient V of the rational series.
//!
//! V is the normalized sphere average of a product of Gegenbauer kernels,
//! one per summand direction:
//!
//! ```text
//! V(l_1..l_N; ζ_1..ζ_N) = (1/S_M) ∫_{S^{M−1}} Π_i kernel(l_i, ζ_i·ζ) dΩ_ζ
//! kernel(l, M, c) = (l + M/2 − 1)/(M/2 − 1) · C_l^{M/2−1}(c)
//! ```
//!
//! Exact structure used before any sampling happens:
//!
//! * odd Σl integrates to zero exactly (the integrand is odd under ζ → −ζ);
//! * axes with l_i = 0 contribute a factor 1 and drop out;
//! * two surviving axes reduce to δ_{l₁,l₂} · kernel(l₁, ζ₁·ζ₂);
//! * fully collinear directions reduce the sphere average to a 1-d polar
//!   integral evaluated by Gauss–Legendre quadrature, deterministic to
//!   machine precision.
//!
//! Everything else is Monte-Carlo: batches of uniform sphere points from
//! per-batch ChaCha streams, batch-means error bars. Series drivers evaluate
//! every lattice point they need in one pass over a shared sample stream
//! ([`v_table_mc`]), which both reuses the kernel recurrences per sample and
//! keeps per-batch means available for correlation-aware error propagation.

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, mc_sphere_multi_batched, McMulti, McSpec};
use crate::special::gegenbauer;

/// Angular configuration: one nonnegative order and one unit direction per
/// summand.
#[derive(Debug, Clone)]
pub struct AngularConfig {
    pub l_vec: Vec<usize>,
    pub directions: Vec<Vec<f64>>,
    pub m: usize,
}

impl AngularConfig {
    pub fn new(l_vec: Vec<usize>, directions: Vec<Vec<f64>>, m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::ValidationError(format!(
                "angular coupling needs M >= 3, got {m}"
            )));
        }
        if l_vec.len() != directions.len() {
            return Err(Error::ValidationError(format!(
                "{} orders vs {} directions",
                l_vec.len(),
                directions.len()
            )));
        }
        for d in &directions {
            if d.len() != m {
                return Err(Error::ValidationError(format!(
                    "direction of dimension {} in M = {m}",
                    d.len()
                )));
            }
            let norm: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::ValidationError(format!(
                    "direction norm {norm} is not 1"
                )));
            }
        }
        Ok(AngularConfig {
            l_vec,
            directions,
            m,
        })
    }

    /// Σl parity; only even configurations survive integration.
    pub fn is_even(&self) -> bool {
        self.l_vec.iter().sum::<usize>() % 2 == 0
    }
}

/// Normalized Gegenbauer kernel (l + M/2 − 1)/(M/2 − 1) · C_l^{M/2−1}(c).
/// Equals (2l+1) P_l(c) at M = 3 and is identically 1 at l = 0.
pub fn kernel(l: usize, m: usize, c: f64) -> Result<f64> {
    if m < 3 {
        return Err(Error::DomainError(format!("kernel needs M >= 3, got {m}")));
    }
    if c.abs() > 1.0 + 1e-12 {
        return Err(Error::DomainError(format!("kernel cosine {c} outside [-1, 1]")));
    }
    let c = c.clamp(-1.0, 1.0);
    let alpha = 0.5 * m as f64 - 1.0;
    Ok((l as f64 + alpha) / alpha * gegenbauer(l, alpha, c))
}

/// Fill `out[0..=l_max]` with kernel(l, m, c) for l = 0..=l_max by running
/// the Gegenbauer recurrence once.
fn kernel_row(l_max: usize, m: usize, c: f64, out: &mut [f64]) {
    let alpha = 0.5 * m as f64 - 1.0;
    let c = c.clamp(-1.0, 1.0);
    let mut cm2 = 1.0;
    let mut cm1 = 2.0 * alpha * c;
    out[0] = 1.0;
    if l_max == 0 {
        return;
    }
    out[1] = (1.0 + alpha) / alpha * cm1;
    for l in 2..=l_max {
        let lf = l as f64;
        let cur = (2.0 * (lf + alpha - 1.0) * c * cm1 - (lf + 2.0 * alpha - 2.0) * cm2) / lf;
        out[l] = (lf + alpha) / alpha * cur;
        cm2 = cm1;
        cm1 = cur;
    }
}

/// Closed form of the two-axis coupling: δ_{l1,l2} · kernel(l1, M, c) with c
/// the cosine between the two directions.
pub fn v_pair_closed(l1: usize, l2: usize, m: usize, c: f64) -> Result<f64> {
    if l1 != l2 {
        return Ok(0.0);
    }
    kernel(l1, m, c)
}

/// Deterministic V for directions that are all collinear with one axis:
/// the sphere average collapses to a polar integral,
///
/// ```text
/// V = ∫_0^π Π_i kernel(l_i, s_i cos θ) sin^{M−2}θ dθ / ∫_0^π sin^{M−2}θ dθ
/// ```
///
/// with s_i = ±1 the orientation of each direction along the axis. Both
/// integrals share one Gauss–Legendre rule; the integrand is a polynomial in
/// cos θ times the weight, so the rule converges to machine precision.
pub fn v_collinear(l_vec: &[usize], signs: &[f64], m: usize) -> Result<f64> {
    if l_vec.len() != signs.len() {
        return Err(Error::ValidationError(
            "orders and signs must align".into(),
        ));
    }
    let total: usize = l_vec.iter().sum();
    if total % 2 == 1 {
        return Ok(0.0);
    }
    let l_max = *l_vec.iter().max().unwrap_or(&0);
    let nodes = (total / 2 + 12).max(24);
    let (x, w) = gauss_legendre(nodes);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut row = vec![0.0; l_max + 1];
    for (&xi, &wi) in x.iter().zip(&w) {
        let theta = 0.5 * std::f64::consts::PI * (xi + 1.0);
        let weight = wi * theta.sin().powi(m as i32 - 2);
        let c = theta.cos();
        kernel_row(l_max, m, c, &mut row);
        let mut prod = 1.0;
        for (&l, &s) in l_vec.iter().zip(signs) {
            let k = row[l];
            // kernel(l, −c) = (−1)^l kernel(l, c)
            prod *= if s < 0.0 && l % 2 == 1 { -k } else { k };
        }
        num += weight * prod;
        den += weight;
    }
    Ok(num / den)
}

/// Monte-Carlo estimate of V with its batch-means standard error.
///
/// Odd Σl returns (0, 0) exactly without sampling; an all-zero order vector
/// returns (1, 0) exactly (the integrand is the constant 1).
pub fn v_coefficient_mc(cfg: &AngularConfig, mc: &McSpec) -> Result<(f64, f64)> {
    if !cfg.is_even() {
        return Ok((0.0, 0.0));
    }
    if cfg.l_vec.iter().all(|&l| l == 0) {
        return Ok((1.0, 0.0));
    }
    let multi = v_table_mc(std::slice::from_ref(&cfg.l_vec), &cfg.directions, cfg.m, mc)?;
    Ok((multi.means[0], multi.stderrs[0]))
}

/// Estimate V for many order vectors over the same directions in one pass
/// over a shared sample stream.
///
/// The returned [`McMulti`] aligns output k with `l_vecs[k]`. Odd-parity
/// entries are exact zeros (mean and every batch mean). Per batch and per
/// sample, each axis runs its kernel recurrence once up to the largest order
/// any vector requests on that axis; individual V integrands are then
/// products of table rows. This is also the memoization layer: a series
/// driver asks for its whole lattice at once and never re-samples a vector.
pub fn v_table_mc(
    l_vecs: &[Vec<usize>],
    directions: &[Vec<f64>],
    m: usize,
    mc: &McSpec,
) -> Result<McMulti> {
    let n_axes = directions.len();
    for lv in l_vecs {
        if lv.len() != n_axes {
            return Err(Error::ValidationError(format!(
                "order vector of length {} vs {n_axes} directions",
                lv.len()
            )));
        }
    }
    let mut l_max_axis = vec![0usize; n_axes];
    for lv in l_vecs {
        for (ax, &l) in lv.iter().enumerate() {
            l_max_axis[ax] = l_max_axis[ax].max(l);
        }
    }
    let even: Vec<bool> = l_vecs
        .iter()
        .map(|lv| lv.iter().sum::<usize>() % 2 == 0)
        .collect();
    let multi = mc_sphere_multi_batched(m, mc, l_vecs.len(), || {
        let mut rows: Vec<Vec<f64>> = l_max_axis.iter().map(|&lm| vec![0.0; lm + 1]).collect();
        let l_max_axis = l_max_axis.clone();
        let even = even.clone();
        move |zeta: &[f64], out: &mut [f64]| {
            for (ax, dir) in directions.iter().enumerate() {
                let dot: f64 = dir.iter().zip(zeta).map(|(a, b)| a * b).sum();
                kernel_row(l_max_axis[ax], m, dot, &mut rows[ax]);
            }
            for (k, lv) in l_vecs.iter().enumerate() {
                out[k] = if even[k] {
                    lv.iter()
                        .enumerate()
                        .map(|(ax, &l)| rows[ax][l])
                        .product()
                } else {
                    0.0
                };
            }
        }
    })?;
    Ok(multi)
}

/// Check that dropping zero-order axes leaves V unchanged: the estimate for
/// the full configuration must agree with the estimate over only the axes
/// with l > 0, within three combined standard errors.
pub fn index_reduction_check(cfg: &AngularConfig, mc: &McSpec) -> Result<bool> {
    if !cfg.l_vec.iter().any(|&l| l == 0) {
        return Err(Error::ValidationError(
            "index reduction needs at least one zero order".into(),
        ));
    }
    let (full, se_full) = v_coefficient_mc(cfg, mc)?;
    let keep: Vec<usize> = (0..cfg.l_vec.len())
        .filter(|&i| cfg.l_vec[i] > 0)
        .collect();
    if keep.is_empty() {
        return Ok(full == 1.0);
    }
    let reduced = AngularConfig::new(
        keep.iter().map(|&i| cfg.l_vec[i]).collect(),
        keep.iter().map(|&i| cfg.directions[i].clone()).collect(),
        cfg.m,
    )?;
    let (red, se_red) = v_coefficient_mc(&reduced, mc)?;
    let combined = (se_full * se_full + se_red * se_red).sqrt();
    Ok((full - red).abs() <= 3.0 * combined.max(1e-12))
}
