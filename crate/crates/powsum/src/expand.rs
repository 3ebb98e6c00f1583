//! The two production evaluators for |r_1 + ... + r_N|^{−ν}, the direct
//! oracle they are checked against, and the Lauricella resummation of the
//! rational series' radial factor.
//!
//! ### Rational series
//!
//! Valid when one summand strictly dominates: with the largest norm moved to
//! position N and x_p = r_p / r_N,
//!
//! ```text
//! |Σ r|^{−ν} = r_N^{−ν} Σ_{l_vec} (−1)^{l_N} V(l_vec)
//!     Σ_{μ_vec} (ν/2)_{μ̃+l} ((ν−M+2)/2)_{μ̃+l−l_N}
//!               / Π_{p<N} ( (M/2)_{l_p+μ_p} μ_p! )
//!     · Π_{p<N} x_p^{l_p+2μ_p}
//! ```
//!
//! where l = Σl_p/2, μ̃ = Σμ_p, and V is the angular coupling of [`crate::angular`].
//! Convergence requires Σ_{p<N} r_p < r_N; odd Σl and order vectors violating
//! the coupling triangle rule vanish exactly. For ν = −2q the Pochhammer pair
//! truncates the lattice at total degree 2q and the sum is a finite polynomial
//! identity. Terms are accumulated by ascending total degree shells with
//! compensated summation; the tail estimate is the last shell's magnitude.
//!
//! ### Orthogonal-basis series
//!
//! Valid for 0 < ν < M with no norm-ratio restriction. Each term separates
//! into per-summand radial factors and one angular coupling:
//!
//! ```text
//! |Σ r|^{−ν} = Σ_{l_vec} V(l_vec) Σ_{n_vec} A(n_vec, l_vec)
//!              · Π_k (r_k²+1)^{(M−ν)/2} η_{n_k, l_k}(r_k)
//! A = 2 Γ((M−ν)/2) / (S_M^N Γ(ν/2) Γ(M/2)) · (−1)^{Σl/2}
//!     ∫_0^∞ u^{ν−1} Π_k ξ_{n_k, l_k}(u) du
//! ```
//!
//! The series converges but not absolutely: truncated partial sums oscillate
//! around the limit, so every index direction is resolved by binomial tail
//! averaging of its partial sums (depth 9 throughout) rather than plain
//! truncation. At N = 2 the u-integral collapses to the ξ orthogonality
//! Γ-ratio and the series becomes a diagonal (n, l) sum, which is the
//! production path [`ortho_pair`]; the quadrature assembly stays available at
//! any N for cross-validation.

use std::collections::HashMap;

use crate::angular::{kernel, v_collinear, v_pair_closed, v_table_mc};
use crate::error::{Error, Result};
use crate::numerics::{
    binomial_tail_average, gauss_legendre, CompensatedSum, McMulti, McSpec, QuadSpec,
};
use crate::radial::{eta, xi, RadialIndex};
use crate::special::{ln_gamma_pos, pochhammer, sphere_surface};

/// A vector in R^M carrying its cached norm and unit direction.
#[derive(Debug, Clone)]
pub struct MVector {
    components: Vec<f64>,
    norm: f64,
    direction: Vec<f64>,
}

impl MVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 3 {
            return Err(Error::ValidationError(format!(
                "vectors need at least 3 components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|x| !x.is_finite()) {
            return Err(Error::ValidationError("non-finite component".into()));
        }
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        let direction = if norm > 0.0 {
            components.iter().map(|x| x / norm).collect()
        } else {
            vec![0.0; components.len()]
        };
        Ok(MVector {
            components,
            norm,
            direction,
        })
    }

    /// Build from a norm and a unit direction.
    pub fn from_polar(norm: f64, direction: Vec<f64>) -> Result<Self> {
        if norm < 0.0 {
            return Err(Error::ValidationError(format!("negative norm {norm}")));
        }
        let d: f64 = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (d - 1.0).abs() > 1e-12 {
            return Err(Error::ValidationError(format!(
                "direction norm {d} is not 1"
            )));
        }
        MVector::new(direction.into_iter().map(|x| x * norm).collect())
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Unit direction; `None` for the zero vector.
    pub fn direction(&self) -> Option<&[f64]> {
        (self.norm > 0.0).then_some(self.direction.as_slice())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Global shape of an expansion problem.
#[derive(Debug, Clone, Copy)]
pub struct ExpansionParams {
    pub m: usize,
    pub n: usize,
    pub nu: f64,
}

impl ExpansionParams {
    pub fn new(m: usize, n: usize, nu: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::ValidationError(format!("M must be >= 3, got {m}")));
        }
        if n < 2 {
            return Err(Error::ValidationError(format!("N must be >= 2, got {n}")));
        }
        if !nu.is_finite() {
            return Err(Error::ValidationError(format!("nu = {nu}")));
        }
        Ok(ExpansionParams { m, n, nu })
    }

    pub(crate) fn check_vectors(&self, vectors: &[MVector]) -> Result<()> {
        if vectors.len() != self.n {
            return Err(Error::ValidationError(format!(
                "{} vectors for N = {}",
                vectors.len(),
                self.n
            )));
        }
        for v in vectors {
            if v.dim() != self.m {
                return Err(Error::ValidationError(format!(
                    "vector of dimension {} in M = {}",
                    v.dim(),
                    self.m
                )));
            }
        }
        Ok(())
    }

    /// The orthogonal-basis series requires 0 < ν < M.
    fn check_ortho(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < self.m as f64) {
            return Err(Error::ConvergenceDomain(format!(
                "orthogonal-basis series needs 0 < nu < M, got nu = {}, M = {}",
                self.nu, self.m
            )));
        }
        Ok(())
    }
}

/// Truncation box for the series lattices.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub l_max: usize,
    pub mu_max: usize,
    pub n_max: usize,
}

impl Truncation {
    /// Upper bound on the rational-series lattice the box spans (before the
    /// exact-zero skips), reported so callers can see the cost up front.
    pub fn rational_lattice_bound(&self, n_summands: usize) -> u128 {
        let l = (self.l_max + 1) as u128;
        let mu = (self.mu_max + 1) as u128;
        l.pow(n_summands as u32) * mu.pow(n_summands as u32 - 1)
    }
}

/// Outcome of a truncated series evaluation.
#[derive(Debug, Clone)]
pub struct SeriesEval {
    pub value: f64,
    pub terms_used: usize,
    /// Magnitude of the final shell's contribution.
    pub tail_estimate: f64,
    /// Batch-means standard error of the Monte-Carlo part, when any angular
    /// coupling was sampled rather than computed in closed form.
    pub mc_stderr: Option<f64>,
}

/// |Σ vectors|^{−ν} evaluated directly. The master oracle for everything
/// else.
pub fn direct_eval(vectors: &[MVector], nu: f64) -> Result<f64> {
    if vectors.is_empty() {
        return Err(Error::ValidationError("no vectors".into()));
    }
    let m = vectors[0].dim();
    let mut total = vec![0.0; m];
    for v in vectors {
        if v.dim() != m {
            return Err(Error::ValidationError("mixed vector dimensions".into()));
        }
        for (t, c) in total.iter_mut().zip(v.components()) {
            *t += c;
        }
    }
    let norm = total.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 && nu > 0.0 {
        return Err(Error::SingularPoint(
            "vector sum vanishes with nu > 0".into(),
        ));
    }
    Ok(norm.powf(-nu))
}

/// How couplings beyond the closed two-axis forms are evaluated.
enum VSource {
    /// All effective directions collinear: deterministic polar quadrature.
    Collinear,
    /// General position: Monte-Carlo over a shared sample stream.
    Mc,
}

struct VProvider<'a> {
    directions: Vec<Vec<f64>>,
    m: usize,
    source: VSource,
    mc: &'a McSpec,
    /// l_vecs that need sampling, in first-seen order, and their table index.
    pending: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl<'a> VProvider<'a> {
    fn new(directions: Vec<Vec<f64>>, m: usize, mc: &'a McSpec) -> Self {
        let n = directions.len();
        let mut collinear = true;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                let dot: f64 = directions[i]
                    .iter()
                    .zip(&directions[j])
                    .map(|(a, b)| a * b)
                    .sum();
                if (dot.abs() - 1.0).abs() > 1e-12 {
                    collinear = false;
                    break 'outer;
                }
            }
        }
        let source = if collinear {
            VSource::Collinear
        } else {
            VSource::Mc
        };
        VProvider {
            directions,
            m,
            source,
            mc,
            pending: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Exact-zero structure shared by every route: parity, the triangle rule,
    /// and reduction over l = 0 axes.
    fn structural_zero(l_vec: &[usize]) -> bool {
        let total: usize = l_vec.iter().sum();
        if total % 2 == 1 {
            return true;
        }
        l_vec.iter().any(|&l| 2 * l > total)
    }

    /// Register one order vector; closed forms resolve immediately, MC ones
    /// are deferred into a single shared-stream table pass.
    fn request(&mut self, l_vec: &[usize]) -> Option<f64> {
        if Self::structural_zero(l_vec) {
            return Some(0.0);
        }
        let live: Vec<usize> = (0..l_vec.len()).filter(|&i| l_vec[i] > 0).collect();
        match live.len() {
            0 => return Some(1.0),
            1 => return Some(0.0), // sphere average of a single kernel, l >= 1
            2 => {
                let (i, j) = (live[0], live[1]);
                let dot: f64 = self.directions[i]
                    .iter()
                    .zip(&self.directions[j])
                    .map(|(a, b)| a * b)
                    .sum();
                return Some(
                    v_pair_closed(l_vec[i], l_vec[j], self.m, dot.clamp(-1.0, 1.0))
                        .expect("validated dimension"),
                );
            }
            _ => {}
        }
        match self.source {
            VSource::Collinear => {
                let signs: Vec<f64> = self
                    .directions
                    .iter()
                    .map(|d| {
                        let dot: f64 = d.iter().zip(&self.directions[0]).map(|(a, b)| a * b).sum();
                        dot.signum()
                    })
                    .collect();
                Some(v_collinear(l_vec, &signs, self.m).expect("validated inputs"))
            }
            VSource::Mc => {
                if !self.index.contains_key(l_vec) {
                    self.index.insert(l_vec.to_vec(), self.pending.len());
                    self.pending.push(l_vec.to_vec());
                }
                None
            }
        }
    }

    /// Run the deferred table pass. Returns means plus the per-batch data
    /// needed for error propagation of weighted combinations.
    fn resolve(&self) -> Result<Option<McMulti>> {
        if self.pending.is_empty() {
            return Ok(None);
        }
        let multi = v_table_mc(&self.pending, &self.directions, self.m, self.mc)?;
        Ok(Some(multi))
    }
}

/// Iterate over all vectors in the box Π [0, caps_i], calling `f` on each.
fn for_each_lattice_point(caps: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; caps.len()];
    loop {
        f(&idx);
        let mut axis = 0;
        loop {
            if axis == caps.len() {
                return;
            }
            if idx[axis] < caps[axis] {
                idx[axis] += 1;
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

struct RationalPrep {
    /// Norms with the strict maximum moved to the last position.
    norms: Vec<f64>,
    directions: Vec<Vec<f64>>,
    q: Option<usize>,
}

fn rational_prepare(vectors: &[MVector], params: &ExpansionParams) -> Result<RationalPrep> {
    params.check_vectors(vectors)?;
    let mut max_idx = 0;
    for (i, v) in vectors.iter().enumerate() {
        if v.norm() > vectors[max_idx].norm() {
            max_idx = i;
        }
    }
    let r_max = vectors[max_idx].norm();
    let rest: f64 = vectors
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != max_idx)
        .map(|(_, v)| v.norm())
        .sum();
    if !(rest < r_max) {
        return Err(Error::ConvergenceDomain(format!(
            "rational series needs sum of the other norms ({rest}) below the largest norm ({r_max})"
        )));
    }
    let mut order: Vec<usize> = (0..vectors.len()).filter(|&i| i != max_idx).collect();
    order.push(max_idx);
    let fallback = vectors[max_idx].direction.clone();
    let norms: Vec<f64> = order.iter().map(|&i| vectors[i].norm()).collect();
    let directions: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| match vectors[i].direction() {
            Some(d) => d.to_vec(),
            None => fallback.clone(),
        })
        .collect();
    let q = if params.nu < 0.0 && params.nu == params.nu.round() && (params.nu as i64) % 2 == 0 {
        Some((-params.nu / 2.0) as usize)
    } else {
        None
    };
    Ok(RationalPrep {
        norms,
        directions,
        q,
    })
}

struct RationalShells {
    shells: Vec<f64>,
    terms_used: usize,
    mc_stderr: Option<f64>,
}

fn rational_series_core(
    vectors: &[MVector],
    params: &ExpansionParams,
    trunc: &Truncation,
    mc: &McSpec,
) -> Result<RationalShells> {
    let prep = rational_prepare(vectors, params)?;
    let n = params.n;
    let nf = params.nu;
    let mf = params.m as f64;
    let r_n = prep.norms[n - 1];
    let x: Vec<f64> = prep.norms[..n - 1].iter().map(|r| r / r_n).collect();

    // For nu = −2q the Pochhammer pair kills everything above total degree 2q
    // and the finite sum is exact; the box is widened to cover it in full.
    let (l_cap, mu_cap, degree_cap) = match prep.q {
        Some(q) => (2 * q, q, Some(2 * q)),
        None => (trunc.l_max, trunc.mu_max, None),
    };

    let mut provider = VProvider::new(prep.directions, params.m, mc);

    // axis caps: zero-norm summands only ever contribute at l = 0
    let l_caps: Vec<usize> = (0..n)
        .map(|k| if prep.norms[k] == 0.0 && k + 1 < n { 0 } else { l_cap })
        .collect();
    let mu_caps: Vec<usize> = (0..n - 1)
        .map(|k| if prep.norms[k] == 0.0 { 0 } else { mu_cap })
        .collect();

    // first pass: enumerate couplings so MC geometries sample once, together
    let mut l_vecs: Vec<Vec<usize>> = Vec::new();
    for_each_lattice_point(&l_caps, |l_vec| {
        if !VProvider::structural_zero(l_vec) {
            l_vecs.push(l_vec.to_vec());
        }
    });
    let mut v_closed: HashMap<Vec<usize>, f64> = HashMap::new();
    for lv in &l_vecs {
        if let Some(v) = provider.request(lv) {
            v_closed.insert(lv.clone(), v);
        }
    }
    let table = provider.resolve()?;

    let max_shell =
        l_caps[n - 1] + l_caps[..n - 1].iter().sum::<usize>() + 2 * mu_caps.iter().sum::<usize>();
    let mut shells = vec![0.0; max_shell + 1];
    // per-shell coupling weights for error propagation of the MC entries
    let mut mc_weights: Vec<Vec<f64>> = table
        .as_ref()
        .map(|t| vec![vec![0.0; t.means.len()]; max_shell + 1])
        .unwrap_or_default();
    let mut terms_used = 0usize;

    let r_n_pow = r_n.powf(-nf);
    for lv in &l_vecs {
        let mc_index = provider.index.get(lv).copied();
        let v_val = match v_closed.get(lv) {
            Some(&v) => v,
            None => {
                let t = table.as_ref().expect("pending couplings imply a table");
                t.means[mc_index.expect("uncached couplings were deferred")]
            }
        };
        if v_val == 0.0 && mc_index.is_none() {
            continue; // exact zero from a closed form
        }
        let l_n = lv[n - 1];
        let l_half = lv.iter().sum::<usize>() / 2;
        let sign = if l_n % 2 == 0 { 1.0 } else { -1.0 };
        let base_shell: usize = l_n + lv[..n - 1].iter().sum::<usize>();
        for_each_lattice_point(&mu_caps, |mu_vec| {
            let mu_tilde: usize = mu_vec.iter().sum();
            let shell = base_shell + 2 * mu_tilde;
            if let Some(cap) = degree_cap {
                if shell > cap {
                    return;
                }
            }
            let mut coef = pochhammer(0.5 * nf, mu_tilde + l_half)
                * pochhammer(0.5 * (nf - mf + 2.0), mu_tilde + l_half - l_n);
            if coef == 0.0 {
                return;
            }
            let mut radial = 1.0;
            for p in 0..n - 1 {
                coef /= pochhammer(0.5 * mf, lv[p] + mu_vec[p]) * pochhammer(1.0, mu_vec[p]);
                radial *= x[p].powi((lv[p] + 2 * mu_vec[p]) as i32);
            }
            let weight = sign * coef * radial * r_n_pow;
            terms_used += 1;
            shells[shell] += weight * v_val;
            if let Some(k) = mc_index {
                mc_weights[shell][k] += weight;
            }
        });
    }

    let mc_stderr = table.as_ref().map(|t| {
        // the series value is linear in the sampled couplings; combine the
        // per-shell weights and propagate through the shared-stream batches
        let dim = t.means.len();
        let mut coeffs = vec![0.0; dim];
        for row in &mc_weights {
            for (c, w) in coeffs.iter_mut().zip(row) {
                *c += w;
            }
        }
        t.weighted(&coeffs).1
    });

    Ok(RationalShells {
        shells,
        terms_used,
        mc_stderr,
    })
}

/// Rational-series evaluation of |Σ vectors|^{−ν}.
///
/// Reorders the input so the strictly largest norm sits on the distinguished
/// axis (ties break to the lowest index and then fail the strict domain
/// check). Returns the shell-summed value with the last shell magnitude as
/// tail estimate; `mc_stderr` is present when any coupling was sampled.
pub fn rational_series(
    vectors: &[MVector],
    params: &ExpansionParams,
    trunc: &Truncation,
    mc: &McSpec,
) -> Result<SeriesEval> {
    let core = rational_series_core(vectors, params, trunc, mc)?;
    let mut acc = CompensatedSum::new();
    for &s in &core.shells {
        acc.add(s);
    }
    let tail = core.shells.iter().rev().find(|s| **s != 0.0).copied();
    Ok(SeriesEval {
        value: acc.value(),
        terms_used: core.terms_used,
        tail_estimate: tail.map_or(0.0, f64::abs),
        mc_stderr: core.mc_stderr,
    })
}

/// Per-degree shell sums of the rational series, in ascending total degree.
/// Shell d collects every term with l_N + Σ_{p<N}(l_p + 2μ_p) = d; the series
/// value is the shell total.
pub fn rational_shell_sums(
    vectors: &[MVector],
    params: &ExpansionParams,
    trunc: &Truncation,
    mc: &McSpec,
) -> Result<Vec<f64>> {
    Ok(rational_series_core(vectors, params, trunc, mc)?.shells)
}

/// Lauricella F_C sum over a multi-index lattice:
///
/// ```text
/// F_C(a, b; c_vec; x_vec) = Σ_{m_vec} (a)_{|m|} (b)_{|m|}
///                            / Π_i ( (c_i)_{m_i} m_i! ) · Π_i x_i^{m_i}
/// ```
///
/// enumerated by total degree |m|, stopping once three consecutive degree
/// shells fall below `tol` relative to the running sum. Convergence requires
/// Σ √x_i < 1.
pub fn lauricella_fc(
    a: f64,
    b: f64,
    c_vec: &[f64],
    x_vec: &[f64],
    tol: f64,
    max_terms: usize,
) -> Result<f64> {
    if c_vec.len() != x_vec.len() || c_vec.is_empty() {
        return Err(Error::ValidationError(
            "parameter and argument lists must align".into(),
        ));
    }
    for &xi in x_vec {
        if xi < 0.0 {
            return Err(Error::DomainError(format!("negative argument {xi}")));
        }
    }
    let root_sum: f64 = x_vec.iter().map(|x| x.sqrt()).sum();
    if root_sum >= 1.0 {
        return Err(Error::ConvergenceDomain(format!(
            "Lauricella sum needs sum of sqrt(x) below 1, got {root_sum}"
        )));
    }
    let nvars = x_vec.len();

    // signed log Pochhammer ladders; a hit zero truncates the ladder exactly
    let ladder = |base: f64, len: usize| -> (Vec<f64>, Vec<f64>) {
        let mut lns = vec![0.0; len + 1];
        let mut signs = vec![1.0; len + 1];
        for k in 1..=len {
            let f = base + (k - 1) as f64;
            if signs[k - 1] == 0.0 || f == 0.0 {
                lns[k] = f64::NEG_INFINITY;
                signs[k] = 0.0;
            } else {
                lns[k] = lns[k - 1] + f.abs().ln();
                signs[k] = signs[k - 1] * f.signum();
            }
        }
        (lns, signs)
    };

    // inside the domain the shell ratio is at most (Σ√x)², so a few thousand
    // degrees cover anything short of the boundary; the visit counter below
    // still enforces the caller's budget
    let degree_cap = 4096;
    let (la, sa) = ladder(a, degree_cap);
    let (lb, sb) = ladder(b, degree_cap);
    let ladders_c: Vec<(Vec<f64>, Vec<f64>)> =
        c_vec.iter().map(|&c| ladder(c, degree_cap)).collect();
    let ln_x: Vec<f64> = x_vec
        .iter()
        .map(|&x| if x == 0.0 { f64::NEG_INFINITY } else { x.ln() })
        .collect();
    let mut ln_fact = vec![0.0; degree_cap + 1];
    for k in 1..=degree_cap {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }

    let mut sum = CompensatedSum::new();
    let mut visited = 0usize;
    let mut small_shells = 0;
    for degree in 0..=degree_cap {
        if sa[degree] == 0.0 || sb[degree] == 0.0 {
            // the numerator ladder terminated: the remaining shells vanish
            return Ok(sum.value());
        }
        let mut shell = CompensatedSum::new();
        let mut shell_abs = 0.0;
        // compositions of `degree` into nvars parts
        let mut parts = vec![0usize; nvars];
        parts[0] = degree;
        loop {
            visited += 1;
            if visited > max_terms {
                return Err(Error::NonConvergence(format!(
                    "Lauricella sum exceeded {max_terms} terms"
                )));
            }
            let mut ln_t = la[degree] + lb[degree];
            let mut sign = sa[degree] * sb[degree];
            for (i, &mi) in parts.iter().enumerate() {
                if mi == 0 {
                    continue; // (c)_0 = 0! = x^0 = 1
                }
                if ln_x[i] == f64::NEG_INFINITY {
                    sign = 0.0;
                    break;
                }
                let (ref lc, ref sc) = ladders_c[i];
                if sc[mi] == 0.0 {
                    return Err(Error::LowerParamPole(format!(
                        "lower parameter {} exhausted at index {mi}",
                        c_vec[i]
                    )));
                }
                ln_t += mi as f64 * ln_x[i] - lc[mi] - ln_fact[mi];
                sign *= sc[mi];
            }
            if sign != 0.0 {
                let t = sign * ln_t.exp();
                shell.add(t);
                shell_abs += t.abs();
            }
            // next composition: classic colex stepping
            if nvars == 1 {
                break;
            }
            let mut i = 0;
            while i < nvars - 1 && parts[i] == 0 {
                i += 1;
            }
            if i == nvars - 1 {
                break;
            }
            parts[i + 1] += 1;
            let head = parts[i] - 1;
            parts[i] = 0;
            parts[0] = head;
        }
        sum.add(shell.value());
        if shell_abs <= tol * sum.value().abs().max(f64::MIN_POSITIVE) {
            small_shells += 1;
            if small_shells >= 3 {
                return Ok(sum.value());
            }
        } else {
            small_shells = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "Lauricella sum did not settle within degree {degree_cap}"
    )))
}

/// Radial factor of one rational-series coupling channel, resummed through
/// the Lauricella function:
///
/// ```text
/// R(l_vec) = r_N^{−ν} (−1)^{l_N}
///            (ν/2)_l ((ν−M+2)/2)_{l−l_N} / Π_{p<N} (M/2)_{l_p}
///            · Π_{p<N} x_p^{l_p}
///            · F_C(ν/2+l, (ν−M+2)/2+l−l_N; {l_p+M/2}; {x_p²})
/// ```
///
/// The full series is then Σ_{l_vec} V(l_vec)·R(l_vec); see the resummation
/// test against the lattice form.
pub fn rational_radial(
    l_vec: &[usize],
    norms: &[f64],
    params: &ExpansionParams,
    tol: f64,
    max_terms: usize,
) -> Result<f64> {
    if l_vec.len() != params.n || norms.len() != params.n {
        return Err(Error::ValidationError(format!(
            "need {} orders and norms",
            params.n
        )));
    }
    let n = params.n;
    let r_n = norms[n - 1];
    let rest: f64 = norms[..n - 1].iter().sum();
    if !(rest < r_n) {
        return Err(Error::ConvergenceDomain(format!(
            "radial factor needs sum of leading norms ({rest}) below the last ({r_n})"
        )));
    }
    let total: usize = l_vec.iter().sum();
    if total % 2 == 1 {
        return Ok(0.0);
    }
    let (nf, mf) = (params.nu, params.m as f64);
    let l_half = total / 2;
    let l_n = l_vec[n - 1];
    if l_half < l_n {
        return Ok(0.0); // triangle rule: the coupling multiplying R vanishes
    }
    let sign = if l_n % 2 == 0 { 1.0 } else { -1.0 };
    let mut front = sign
        * r_n.powf(-nf)
        * pochhammer(0.5 * nf, l_half)
        * pochhammer(0.5 * (nf - mf + 2.0), l_half - l_n);
    let x: Vec<f64> = norms[..n - 1].iter().map(|r| r / r_n).collect();
    for p in 0..n - 1 {
        front /= pochhammer(0.5 * mf, l_vec[p]);
        front *= x[p].powi(l_vec[p] as i32);
    }
    if front == 0.0 {
        return Ok(0.0);
    }
    let a = 0.5 * nf + l_half as f64;
    let b = 0.5 * (nf - mf + 2.0) + (l_half - l_n) as f64;
    let c: Vec<f64> = l_vec[..n - 1]
        .iter()
        .map(|&lp| lp as f64 + 0.5 * mf)
        .collect();
    let y: Vec<f64> = x.iter().map(|xp| xp * xp).collect();
    // a terminating upper parameter truncates the sum exactly (nu = −2q)
    Ok(front * lauricella_fc(a, b, &c, &y, tol, max_terms)?)
}

fn shell_average_coefficients(shell_count: usize, depth: usize) -> Vec<f64> {
    let d = depth.min(shell_count - 1);
    let mut beta = vec![0.0; shell_count];
    let mut binom = 1.0;
    let scale = 0.5f64.powi(d as i32);
    for k in 0..=d {
        if k > 0 {
            binom = binom * (d - k + 1) as f64 / k as f64;
        }
        let j = shell_count - 1 - d + k;
        let w = binom * scale;
        for b in beta.iter_mut().take(j + 1) {
            *b += w;
        }
    }
    beta
}

/// Orthogonal-basis evaluation at N = 2: the u-integral collapses through ξ
/// orthogonality to a Γ-ratio and the sum is diagonal in n,
///
/// ```text
/// π^{M/2} Γ((M−ν)/2)/Γ(ν/2) · ((r₁²+1)(r₂²+1))^{(M−ν)/2}
///   · Σ_l (−1)^l kernel(l, M, cos ω)/S_M
///       Σ_n Γ(l+n+ν/2)/Γ(l+n+M−ν/2) η_{n,l}(r₁) η_{n,l}(r₂)
/// ```
///
/// Both index directions are binomially tail-averaged (depth 9): the terms do
/// not decay pointwise, and plain truncation stalls three orders of accuracy
/// short of the averaged value at the same cost.
pub fn ortho_pair(
    r1: &MVector,
    r2: &MVector,
    params: &ExpansionParams,
    trunc: &Truncation,
) -> Result<SeriesEval> {
    params.check_ortho()?;
    if params.n != 2 {
        return Err(Error::ValidationError(format!(
            "pair evaluator with N = {}",
            params.n
        )));
    }
    params.check_vectors(&[r1.clone(), r2.clone()])?;
    let (a, b) = (r1.norm(), r2.norm());
    let c = match (r1.direction(), r2.direction()) {
        (Some(d1), Some(d2)) => d1.iter().zip(d2).map(|(x, y)| x * y).sum::<f64>(),
        _ => 1.0, // a zero summand leaves only l = 0, where the angle is idle
    };
    let (mf, nf) = (params.m as f64, params.nu);
    if (a * a + b * b + 2.0 * a * b * c.clamp(-1.0, 1.0)).sqrt() == 0.0 {
        return Err(Error::SingularPoint("vector sum vanishes".into()));
    }
    let ln_pref = 0.5 * mf * std::f64::consts::PI.ln() + ln_gamma_pos(0.5 * (mf - nf))
        - ln_gamma_pos(0.5 * nf)
        + 0.5 * (mf - nf) * ((a * a + 1.0) * (b * b + 1.0)).ln();
    let pref = ln_pref.exp();
    let surf = sphere_surface(params.m);
    let depth = 9;

    let mut l_values = Vec::with_capacity(trunc.l_max + 1);
    let mut terms_used = 0usize;
    for l in 0..=trunc.l_max {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let ang = sign * kernel(l, params.m, c.clamp(-1.0, 1.0))? / surf;
        let mut partials = Vec::with_capacity(trunc.n_max + 1);
        let mut acc = CompensatedSum::new();
        for n in 0..=trunc.n_max {
            let idx = RadialIndex::new(n, l, params.m, nf)?;
            let lnf = (l + n) as f64;
            let w = (ln_gamma_pos(lnf + 0.5 * nf) - ln_gamma_pos(lnf + mf - 0.5 * nf)).exp();
            acc.add(w * eta(&idx, a)? * eta(&idx, b)?);
            partials.push(acc.value());
            terms_used += 1;
        }
        l_values.push(ang * binomial_tail_average(&partials, depth));
    }
    let mut cums = Vec::with_capacity(l_values.len());
    let mut acc = CompensatedSum::new();
    for v in &l_values {
        acc.add(*v);
        cums.push(acc.value());
    }
    let value = pref * binomial_tail_average(&cums, depth);
    let tail = if cums.len() > 1 {
        pref * (binomial_tail_average(&cums, depth)
            - binomial_tail_average(&cums[..cums.len() - 1], depth))
    } else {
        value
    };
    Ok(SeriesEval {
        value,
        terms_used,
        tail_estimate: tail.abs(),
        mc_stderr: None,
    })
}

/// How the per-channel u-integrals A(n_vec, l_vec) are produced inside the
/// assembled series.
pub(crate) enum ARoute {
    /// Shared Gauss–Legendre grid on [0, 16]; works for every N.
    Quadrature,
    /// N = 2 only: the exact diagonal Γ-ratio from ξ orthogonality. Used to
    /// isolate quadrature error when cross-validating the grid route.
    ClosedPairDiagonal,
}

/// Nested tail-averaged reduction of a dense tensor in row-major layout:
/// the last axis is cumulative-summed and binomially averaged, collapsing
/// one dimension; repeat until scalar.
fn nested_tail_average(mut data: Vec<f64>, mut dims: Vec<usize>, depth: usize) -> f64 {
    while let Some(last) = dims.pop() {
        let rows = data.len() / last;
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            let row = &mut data[r * last..(r + 1) * last];
            for i in 1..last {
                row[i] += row[i - 1];
            }
            out.push(binomial_tail_average(row, depth));
        }
        data = out;
    }
    debug_assert_eq!(data.len(), 1);
    data[0]
}

pub(crate) fn ortho_series_assembled(
    vectors: &[MVector],
    params: &ExpansionParams,
    trunc: &Truncation,
    quad: &QuadSpec,
    mc: &McSpec,
    route: ARoute,
) -> Result<SeriesEval> {
    params.check_ortho()?;
    params.check_vectors(vectors)?;
    if direct_eval(vectors, params.nu).is_err() {
        return Err(Error::SingularPoint("vector sum vanishes".into()));
    }
    if matches!(route, ARoute::ClosedPairDiagonal) && params.n != 2 {
        return Err(Error::ValidationError(
            "the closed diagonal route exists only at N = 2".into(),
        ));
    }
    let n_ax = params.n;
    let (mf, nf) = (params.m as f64, params.nu);
    let depth = 9;
    let n_cnt = trunc.n_max + 1;

    // shared radial grid: the integrands decay like e^{−2Nu}, so [0, 16] is
    // exhaustive and one 160-point rule resolves every (n, l) this box uses
    let (gx, gw) = gauss_legendre(160);
    let u_nodes: Vec<f64> = gx.iter().map(|x| 8.0 * (x + 1.0)).collect();
    let u_weights: Vec<f64> = gw
        .iter()
        .zip(&u_nodes)
        .map(|(w, u)| 8.0 * w * u.powf(nf - 1.0))
        .collect();
    let n_u = u_nodes.len();

    // ξ rows cache, shared across axes and order vectors
    let mut xi_rows: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
    let xi_row = |n: usize, l: usize, rows: &mut HashMap<(usize, usize), Vec<f64>>| -> Result<Vec<f64>> {
        if let Some(r) = rows.get(&(n, l)) {
            return Ok(r.clone());
        }
        let idx = RadialIndex::new(n, l, params.m, nf)?;
        let mut row = Vec::with_capacity(n_u);
        for &u in &u_nodes {
            row.push(xi(&idx, u, quad)?);
        }
        rows.insert((n, l), row.clone());
        Ok(row)
    };

    let fallback = vectors
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap()
        .direction
        .clone();
    let directions: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.direction().map_or(fallback.clone(), |d| d.to_vec()))
        .collect();
    let mut provider = VProvider::new(directions, params.m, mc);

    // l-lattice: per-axis cap, even total, triangle rule, and a total-degree
    // cap at 2·l_max so shell windows line up across different N
    let l_caps: Vec<usize> = vectors
        .iter()
        .map(|v| if v.norm() == 0.0 { 0 } else { trunc.l_max })
        .collect();
    let mut l_vecs: Vec<Vec<usize>> = Vec::new();
    for_each_lattice_point(&l_caps, |l_vec| {
        let total: usize = l_vec.iter().sum();
        if total <= 2 * trunc.l_max && !VProvider::structural_zero(l_vec) {
            l_vecs.push(l_vec.to_vec());
        }
    });
    let mut v_closed: HashMap<Vec<usize>, f64> = HashMap::new();
    for lv in &l_vecs {
        if let Some(v) = provider.request(lv) {
            v_closed.insert(lv.clone(), v);
        }
    }
    let table = provider.resolve()?;

    let ln_pref_a = (2.0f64).ln() + ln_gamma_pos(0.5 * (mf - nf))
        - (n_ax as f64) * sphere_surface(params.m).ln()
        - ln_gamma_pos(0.5 * nf)
        - ln_gamma_pos(0.5 * mf);
    let pref_a = ln_pref_a.exp();

    let shell_count = trunc.l_max + 1;
    let mut shells = vec![0.0; shell_count];
    let mut shell_weights: Vec<Vec<f64>> = table
        .as_ref()
        .map(|t| vec![vec![0.0; t.means.len()]; shell_count])
        .unwrap_or_default();
    let mut terms_used = 0usize;

    // per (axis, l) basis factor rows: eta(r_k)·(r_k²+1)^{(M−ν)/2} by ξ(u)
    let mut axis_rows: HashMap<(usize, usize), Vec<Vec<f64>>> = HashMap::new();

    for lv in &l_vecs {
        let mc_index = provider.index.get(lv).copied();
        let v_val = match v_closed.get(lv) {
            Some(&v) => v,
            None => {
                let t = table.as_ref().expect("pending couplings imply a table");
                t.means[mc_index.expect("uncached couplings were deferred")]
            }
        };
        if v_val == 0.0 && mc_index.is_none() {
            continue; // exact zero from a closed form
        }
        let l_half = lv.iter().sum::<usize>() / 2;
        let sign = if l_half % 2 == 0 { 1.0 } else { -1.0 };

        let tensor_value = match route {
            ARoute::Quadrature => {
                for (k, v) in vectors.iter().enumerate() {
                    let key = (k, lv[k]);
                    if !axis_rows.contains_key(&key) {
                        let r = v.norm();
                        let fac = (r * r + 1.0).powf(0.5 * (mf - nf));
                        let mut rows_k = Vec::with_capacity(n_cnt);
                        for n in 0..n_cnt {
                            let idx = RadialIndex::new(n, lv[k], params.m, nf)?;
                            let e = eta(&idx, r)? * fac;
                            let xr = xi_row(n, lv[k], &mut xi_rows)?;
                            rows_k.push(xr.iter().map(|x| x * e).collect::<Vec<f64>>());
                        }
                        axis_rows.insert(key, rows_k);
                    }
                }
                // dense tensor over n_vec of ∫ u^{ν−1} Π_k row_k(n_k, u) du,
                // built by recursive partial products over the grid
                let mut tensor = vec![0.0; n_cnt.pow(n_ax as u32)];
                {
                    let rows: Vec<&Vec<Vec<f64>>> =
                        (0..n_ax).map(|k| &axis_rows[&(k, lv[k])]).collect();
                    fn fill(
                        axis: usize,
                        offset: usize,
                        prod: &[f64],
                        rows: &[&Vec<Vec<f64>>],
                        n_cnt: usize,
                        tensor: &mut [f64],
                    ) {
                        let last = axis == rows.len() - 1;
                        let stride = n_cnt.pow((rows.len() - 1 - axis) as u32);
                        for n in 0..n_cnt {
                            let row = &rows[axis][n];
                            if last {
                                let mut dot = 0.0;
                                for (p, r) in prod.iter().zip(row) {
                                    dot += p * r;
                                }
                                tensor[offset + n] = dot;
                            } else {
                                let next: Vec<f64> =
                                    prod.iter().zip(row).map(|(p, r)| p * r).collect();
                                fill(axis + 1, offset + n * stride, &next, rows, n_cnt, tensor);
                            }
                        }
                    }
                    fill(0, 0, &u_weights, &rows, n_cnt, &mut tensor);
                }
                terms_used += tensor.len();
                nested_tail_average(tensor, vec![n_cnt; n_ax], depth)
            }
            ARoute::ClosedPairDiagonal => {
                // diagonal Γ-ratio tensor from ξ orthogonality, reduced with
                // the identical nested averaging
                let l = lv[0];
                debug_assert_eq!(lv[0], lv[1]);
                let mut tensor = vec![0.0; n_cnt * n_cnt];
                for n in 0..n_cnt {
                    let lnf = (l + n) as f64;
                    let gr = std::f64::consts::PI.powi(params.m as i32)
                        * (ln_gamma_pos(0.5 * nf + lnf) - ln_gamma_pos(mf - 0.5 * nf + lnf)).exp();
                    let mut prod = gr;
                    for v in vectors {
                        let r = v.norm();
                        let idx = RadialIndex::new(n, l, params.m, nf)?;
                        prod *= eta(&idx, r)? * (r * r + 1.0).powf(0.5 * (mf - nf));
                    }
                    tensor[n * n_cnt + n] = prod;
                }
                terms_used += n_cnt * n_cnt;
                nested_tail_average(tensor, vec![n_cnt; 2], depth)
            }
        };

        let weight = pref_a * sign * tensor_value;
        let shell = l_half; // Σl/2 indexes the even-total shells densely
        shells[shell] += weight * v_val;
        if let Some(k) = mc_index {
            shell_weights[shell][k] += weight;
        }
    }

    let mut cums = Vec::with_capacity(shell_count);
    let mut acc = CompensatedSum::new();
    for s in &shells {
        acc.add(*s);
        cums.push(acc.value());
    }
    let value = binomial_tail_average(&cums, depth);
    let tail = if cums.len() > 1 {
        (value - binomial_tail_average(&cums[..cums.len() - 1], depth)).abs()
    } else {
        value.abs()
    };
    let mc_stderr = table.as_ref().map(|t| {
        let beta = shell_average_coefficients(shell_count, depth);
        let dim = t.means.len();
        let mut coeffs = vec![0.0; dim];
        for (b, row) in beta.iter().zip(&shell_weights) {
            for (c, w) in coeffs.iter_mut().zip(row) {
                *c += b * w;
            }
        }
        t.weighted(&coeffs).1
    });
    Ok(SeriesEval {
        value,
        terms_used,
        tail_estimate: tail,
        mc_stderr,
    })
}

/// Orthogonal-basis evaluation of |Σ vectors|^{−ν} for any N ≥ 2 and
/// 0 < ν < M.
///
/// N = 2 takes the diagonal closed-form path of [`ortho_pair`]; larger N runs
/// the assembled series with per-channel u-integrals on a shared quadrature
/// grid and angular couplings from closed forms where the geometry allows,
/// Monte-Carlo otherwise.
pub fn ortho_series(
    vectors: &[MVector],
    params: &ExpansionParams,
    trunc: &Truncation,
    quad: &QuadSpec,
    mc: &McSpec,
) -> Result<SeriesEval> {
    if params.n == 2 {
        params.check_vectors(vectors)?;
        return ortho_pair(&vectors[0], &vectors[1], params, trunc);
    }
    ortho_series_assembled(vectors, params, trunc, quad, mc, ARoute::Quadrature)
}

/// The assembled-series route with quadrature u-integrals, exposed for
/// cross-validation (it is the production path for N ≥ 3; at N = 2 the
/// production path uses the closed diagonal form instead).
pub fn ortho_series_quadrature(
    vectors: &[MVector],
    params: &ExpansionParams,
    trunc: &Truncation,
    quad: &QuadSpec,
    mc: &McSpec,
) -> Result<SeriesEval> {
    ortho_series_assembled(vectors, params, trunc, quad, mc, ARoute::Quadrature)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn rel(a: f64, b: f64, tol: f64) {
        assert!((a / b - 1.0).abs() <= tol, "{a} vs {b} (rel tol {tol})");
    }

    fn vec3(x: f64, y: f64, z: f64) -> MVector {
        MVector::new(vec![x, y, z]).unwrap()
    }

    fn mc_small() -> McSpec {
        McSpec {
            samples: 200_000,
            seed: 42,
            batches: 25,
        }
    }

    fn quad() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn direct_eval_examples() {
        let v = direct_eval(&[vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0)], 2.0).unwrap();
        close(v, 0.5, 1e-15);
        let v = direct_eval(&[vec3(0.0, 0.3, 0.4)], 1.7).unwrap();
        rel(v, 0.5f64.powf(-1.7), 1e-14);
        let v = direct_eval(&[vec3(1.0, 2.0, 2.0), vec3(0.0, 0.0, 1.0)], -2.0).unwrap();
        close(v, 1.0 + 4.0 + 9.0, 1e-12);
        assert!(matches!(
            direct_eval(&[vec3(1.0, 0.0, 0.0), vec3(-1.0, 0.0, 0.0)], 1.0),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn rational_zero_summand_single_term() {
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 6,
            mu_max: 6,
            n_max: 0,
        };
        let out = rational_series(
            &[vec3(0.0, 0.0, 0.0), vec3(0.0, 0.0, 2.0)],
            &params,
            &trunc,
            &mc_small(),
        )
        .unwrap();
        close(out.value, 0.5, 1e-15);
        assert_eq!(out.terms_used, 1);
        assert!(out.mc_stderr.is_none());
    }

    #[test]
    fn rational_pair_matches_direct() {
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 24,
            mu_max: 24,
            n_max: 0,
        };
        let (s, c) = (std::f64::consts::FRAC_PI_3.sin(), 0.5);
        let vs = [vec3(0.4, 0.0, 0.0), vec3(c, s, 0.0)];
        let out = rational_series(&vs, &params, &trunc, &mc_small()).unwrap();
        let oracle = direct_eval(&vs, 1.0).unwrap();
        rel(out.value, oracle, 1e-8);
        assert!(out.tail_estimate < 1e-8);
    }

    #[test]
    fn rational_homogeneity_and_reordering() {
        let params = ExpansionParams::new(3, 2, 1.5).unwrap();
        let trunc = Truncation {
            l_max: 14,
            mu_max: 14,
            n_max: 0,
        };
        let vs = [vec3(0.0, 0.35, 0.0), vec3(0.8, 0.0, 0.6)];
        let base = rational_series(&vs, &params, &trunc, &mc_small()).unwrap();
        let t = 2.7;
        let scaled: Vec<MVector> = vs
            .iter()
            .map(|v| MVector::new(v.components().iter().map(|x| x * t).collect()).unwrap())
            .collect();
        let out = rational_series(&scaled, &params, &trunc, &mc_small()).unwrap();
        rel(out.value, base.value * t.powf(-1.5), 1e-12);
        let swapped = [vs[1].clone(), vs[0].clone()];
        let out = rational_series(&swapped, &params, &trunc, &mc_small()).unwrap();
        rel(out.value, base.value, 1e-12);
    }

    #[test]
    fn rational_negative_even_nu_is_exact() {
        let params = ExpansionParams::new(3, 2, -2.0).unwrap();
        let trunc = Truncation {
            l_max: 0,
            mu_max: 0,
            n_max: 0,
        }; // ignored: the finite cutoff governs
        let vs = [vec3(0.25, 0.15, 0.0), vec3(0.1, 0.9, 0.3)];
        let out = rational_series(&vs, &params, &trunc, &mc_small()).unwrap();
        rel(out.value, direct_eval(&vs, -2.0).unwrap(), 1e-13);

        let params = ExpansionParams::new(4, 3, -2.0).unwrap();
        let vs = [
            MVector::new(vec![0.2, 0.0, 0.0, 0.0]).unwrap(),
            MVector::new(vec![-0.3, 0.0, 0.0, 0.0]).unwrap(),
            MVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap(),
        ];
        let out = rational_series(&vs, &params, &trunc, &mc_small()).unwrap();
        rel(out.value, direct_eval(&vs, -2.0).unwrap(), 1e-12);
    }

    #[test]
    fn rational_domain_errors() {
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 4,
            mu_max: 4,
            n_max: 0,
        };
        // exact tie violates the strict domain
        let vs = [vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0)];
        assert!(matches!(
            rational_series(&vs, &params, &trunc, &mc_small()),
            Err(Error::ConvergenceDomain(_))
        ));
        let params3 = ExpansionParams::new(3, 3, 1.0).unwrap();
        let vs = [
            vec3(0.6, 0.0, 0.0),
            vec3(0.0, 0.5, 0.0),
            vec3(0.0, 0.0, 1.0),
        ];
        assert!(matches!(
            rational_series(&vs, &params3, &trunc, &mc_small()),
            Err(Error::ConvergenceDomain(_))
        ));
    }

    #[test]
    fn rational_three_body_collinear_matches_direct() {
        // collinear geometry: couplings by quadrature, fully deterministic
        let params = ExpansionParams::new(3, 3, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 10,
            mu_max: 10,
            n_max: 0,
        };
        let vs = [
            vec3(0.2, 0.0, 0.0),
            vec3(-0.25, 0.0, 0.0),
            vec3(1.0, 0.0, 0.0),
        ];
        let out = rational_series(&vs, &params, &trunc, &mc_small()).unwrap();
        rel(out.value, direct_eval(&vs, 1.0).unwrap(), 1e-9);
        assert!(out.mc_stderr.is_none());
    }

    #[test]
    fn lauricella_reference_values() {
        close(lauricella_fc(0.7, 1.3, &[1.1, 2.2], &[0.0, 0.0], 1e-14, 10_000).unwrap(), 1.0, 1e-14);
        // single variable: 2F1(1,1;2;x) = −ln(1−x)/x
        let v = lauricella_fc(1.0, 1.0, &[2.0], &[0.25], 1e-14, 100_000).unwrap();
        rel(v, -(0.75f64).ln() / 0.25, 1e-12);
        // two variables against a brute-force nested sum
        let (a, b) = (0.5, 1.2);
        let c = [1.5, 2.0];
        let x = [0.04, 0.09];
        let v = lauricella_fc(a, b, &c, &x, 1e-15, 1_000_000).unwrap();
        let mut brute = 0.0;
        for m1 in 0..30usize {
            for m2 in 0..30usize {
                brute += pochhammer(a, m1 + m2) * pochhammer(b, m1 + m2)
                    / (pochhammer(c[0], m1)
                        * pochhammer(c[1], m2)
                        * pochhammer(1.0, m1)
                        * pochhammer(1.0, m2))
                    * x[0].powi(m1 as i32)
                    * x[1].powi(m2 as i32);
            }
        }
        rel(v, brute, 1e-10);
        assert!(matches!(
            lauricella_fc(1.0, 1.0, &[2.0, 2.0], &[0.3, 0.3], 1e-12, 1000),
            Err(Error::ConvergenceDomain(_))
        ));
    }

    #[test]
    fn radial_factor_examples() {
        let params = ExpansionParams::new(3, 2, 1.4).unwrap();
        let v = rational_radial(&[0, 0], &[0.0, 1.0], &params, 1e-14, 100_000).unwrap();
        close(v, 1.0, 1e-14);
        let v = rational_radial(&[0, 0], &[0.0, 2.0], &params, 1e-14, 100_000).unwrap();
        rel(v, 2.0f64.powf(-1.4), 1e-13);
        // (−1)^{l_N} sign flip, all else equal in the prefactor structure
        let p = rational_radial(&[2, 2], &[0.3, 1.0], &params, 1e-13, 1_000_000).unwrap();
        assert!(p != 0.0);
        let params5 = ExpansionParams::new(3, 2, 5.0).unwrap();
        let even = rational_radial(&[2, 2], &[0.3, 1.0], &params5, 1e-13, 1_000_000).unwrap();
        let odd = rational_radial(&[3, 3], &[0.3, 1.0], &params5, 1e-13, 1_000_000).unwrap();
        assert!(even > 0.0 && odd < 0.0);
    }

    #[test]
    fn radial_resummation_matches_lattice() {
        // Σ_l V·R at N=2 must reproduce the lattice sum at matching cutoffs:
        // R's Lauricella lattice covers μ exhaustively, so compare against a
        // μ-exhaustive lattice evaluation
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let (r1, r2, c) = (0.35, 1.0, 0.42);
        let s = (1.0 - c * c as f64).sqrt();
        let vs = [vec3(0.35, 0.0, 0.0), vec3(r2 * c, r2 * s, 0.0)];
        let trunc = Truncation {
            l_max: 12,
            mu_max: 60,
            n_max: 0,
        };
        let lattice = rational_series(&vs, &params, &trunc, &mc_small()).unwrap();
        let mut by_radial = 0.0;
        for l in 0..=12usize {
            let v = v_pair_closed(l, l, 3, c).unwrap();
            let r = rational_radial(&[l, l], &[r1, r2], &params, 1e-16, 1_000_000).unwrap();
            by_radial += v * r;
        }
        rel(by_radial, lattice.value, 1e-10);
    }

    #[test]
    fn ortho_pair_matches_direct() {
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 20,
            mu_max: 0,
            n_max: 20,
        };
        let vs = [vec3(0.5, 0.0, 0.0), vec3(0.0, 1.0, 0.0)];
        let out = ortho_pair(&vs[0], &vs[1], &params, &trunc).unwrap();
        let oracle = direct_eval(&vs, 1.0).unwrap();
        rel(out.value, oracle, 1e-3);
    }

    #[test]
    fn ortho_pair_zero_summand_reduces_to_power() {
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 4,
            mu_max: 0,
            n_max: 40,
        };
        let out = ortho_pair(
            &vec3(0.0, 0.0, 0.0),
            &vec3(0.0, 0.0, 1.3),
            &params,
            &trunc,
        )
        .unwrap();
        rel(out.value, 1.0 / 1.3, 2e-3);
    }

    #[test]
    fn ortho_domain_checks() {
        let trunc = Truncation {
            l_max: 4,
            mu_max: 0,
            n_max: 4,
        };
        let params = ExpansionParams::new(3, 2, 3.5).unwrap();
        assert!(matches!(
            ortho_pair(&vec3(0.5, 0.0, 0.0), &vec3(0.0, 1.0, 0.0), &params, &trunc),
            Err(Error::ConvergenceDomain(_))
        ));
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        assert!(matches!(
            ortho_pair(&vec3(0.5, 0.0, 0.0), &vec3(-0.5, 0.0, 0.0), &params, &trunc),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn ortho_series_pair_delegation() {
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 8,
            mu_max: 0,
            n_max: 8,
        };
        let vs = [vec3(0.4, 0.1, 0.0), vec3(0.0, 0.9, 0.2)];
        let a = ortho_series(&vs, &params, &trunc, &quad(), &mc_small()).unwrap();
        let b = ortho_pair(&vs[0], &vs[1], &params, &trunc).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn ortho_assembled_matches_closed_diagonal_at_pair() {
        // same truncation, same nested averaging; only the A-integrals differ
        // (shared-grid quadrature vs exact Γ-ratio), isolating grid error
        let params = ExpansionParams::new(3, 2, 1.0).unwrap();
        let trunc = Truncation {
            l_max: 6,
            mu_max: 0,
            n_max: 6,
        };
        let vs = [vec3(0.3, 0.0, 0.0), vec3(0.5, 0.0, 0.0)];
        let grid = ortho_series_assembled(
            &vs,
            &params,
            &trunc,
            &quad(),
            &mc_small(),
            ARoute::Quadrature,
        )
        .unwrap();
        let closed = ortho_series_assembled(
            &vs,
            &params,
            &trunc,
            &quad(),
            &mc_small(),
            ARoute::ClosedPairDiagonal,
        )
        .unwrap();
        rel(grid.value, closed.value, 1e-6);
    }

    #[test]
    fn shell_average_coefficients_match_direct_average() {
        let shells = [0.3, -1.2, 0.9, 0.35, -0.1, 0.02, 0.5];
        let mut cums = Vec::new();
        let mut acc = 0.0;
        for s in shells {
            acc += s;
            cums.push(acc);
        }
        for depth in [0usize, 2, 9] {
            let direct = binomial_tail_average(&cums, depth);
            let beta = shell_average_coefficients(shells.len(), depth);
            let lin: f64 = beta.iter().zip(&shells).map(|(b, s)| b * s).sum();
            close(lin, direct, 1e-12);
        }
    }
}
