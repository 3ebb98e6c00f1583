//! Deterministic quadrature and Monte-Carlo primitives used by every other
//! module.
//!
//! Quadrature is an adaptive Gauss–Kronrod 7–15 rule with worst-interval-first
//! subdivision. Semi-infinite integrals are mapped to (0,1) by a selectable
//! substitution:
//!
//! ```text
//! exp_substitution:       x = -ln t       dx = dt / t
//! rational_substitution:  x = t/(1-t)     dx = dt / (1-t)^2
//! ```
//!
//! Sphere sampling draws M independent standard normals and normalizes, which
//! is exactly uniform on S^{M-1} in any dimension. Batches are seeded through
//! independent ChaCha streams (one stream index per batch), so the sample
//! stream for a given `McSpec` is reproducible regardless of how batches are
//! scheduled; reductions always run in batch-index order.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// How a semi-infinite integral is mapped onto a finite interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiInfiniteTransform {
    /// x = -ln t, suited to integrands with exponential decay.
    ExpSubstitution,
    /// x = t/(1-t), suited to integrands with algebraic decay.
    RationalSubstitution,
}

/// Deterministic quadrature configuration.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub transform: SemiInfiniteTransform,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_subdivisions: 400,
            transform: SemiInfiniteTransform::RationalSubstitution,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 || self.rel_tol > 0.0) {
            return Err(Error::ValidationError(
                "at least one of abs_tol, rel_tol must be positive".into(),
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::ValidationError(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Deterministic Monte-Carlo configuration.
#[derive(Debug, Clone, Copy)]
pub struct McSpec {
    pub samples: u64,
    pub seed: u64,
    pub batches: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            samples: 1_000_000,
            seed: 42,
            batches: 64,
        }
    }
}

impl McSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.batches == 0 || self.samples < self.batches {
            return Err(Error::ValidationError(
                "McSpec requires samples >= batches >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Derive a spec with a different seed, leaving budgets untouched.
    pub fn with_seed(&self, seed: u64) -> McSpec {
        McSpec { seed, ..*self }
    }
}

// 7-15 Gauss-Kronrod node set on [-1, 1]. Kronrod abscissae (positive half),
// Kronrod weights, and the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One Gauss-Kronrod pass over [a, b]: (kronrod value, |kronrod - gauss|).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut fv = [0.0_f64; 15];
    for (j, &x) in XGK.iter().enumerate() {
        let (lo, hi) = (mid - half * x, mid + half * x);
        let flo = f(lo);
        fv[j] = flo;
        if j < 7 {
            let fhi = f(hi);
            fv[14 - j] = fhi;
        }
    }
    for (j, v) in fv.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!(
                "integrand returned {v} at node {j} of [{a}, {b}]"
            )));
        }
    }
    let mut resk = WGK[7] * fv[7];
    let mut resg = WG[3] * fv[7];
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        resk += WGK[j] * pair;
        if j % 2 == 1 {
            resg += WG[j / 2] * pair;
        }
    }
    Ok((resk * half, (resk - resg).abs() * half.abs()))
}

/// Adaptive integration of `f` over the finite interval [a, b].
///
/// Returns the estimate and an error estimate. Subdivides the interval with
/// the largest local error first until the combined error estimate meets
/// `max(abs_tol, rel_tol * |value|)` or the subdivision budget is exhausted.
pub fn integrate_finite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(a < b) {
        return Err(Error::DomainError(format!("bad interval [{a}, {b}]")));
    }
    let (v, e) = gk15(&mut f, a, b)?;
    let mut segs: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    for _ in 0..spec.max_subdivisions {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok((total, err));
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (wa, wb, _, _) = segs.swap_remove(worst);
        let wm = 0.5 * (wa + wb);
        let (v1, e1) = gk15(&mut f, wa, wm)?;
        let (v2, e2) = gk15(&mut f, wm, wb)?;
        segs.push((wa, wm, v1, e1));
        segs.push((wm, wb, v2, e2));
    }
    let total: f64 = segs.iter().map(|s| s.2).sum();
    let err: f64 = segs.iter().map(|s| s.3).sum();
    if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
        Ok((total, err))
    } else {
        Err(Error::NonConvergence(format!(
            "quadrature error {err:.3e} above tolerance after {} subdivisions",
            spec.max_subdivisions
        )))
    }
}

/// Adaptive integration of `f` over (0, infinity) via the configured
/// substitution.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &QuadSpec,
) -> Result<(f64, f64)> {
    match spec.transform {
        SemiInfiniteTransform::ExpSubstitution => {
            integrate_finite(|t| f(-t.ln()) / t, 0.0, 1.0, spec)
        }
        SemiInfiniteTransform::RationalSubstitution => integrate_finite(
            |t| {
                let om = 1.0 - t;
                f(t / om) / (om * om)
            },
            0.0,
            1.0,
            spec,
        ),
    }
}

/// Gauss-Legendre nodes and weights of order `n` on [-1, 1], by Newton
/// iteration on the Legendre recurrence. Deterministic to machine precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least a two-point rule");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Neumaier-compensated accumulator. Keeps series summation stable when terms
/// span many orders of magnitude with mixed signs.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Binomial-weighted average of the trailing `depth + 1` partial sums.
///
/// ```text
/// avg = sum_{k=0}^{d} C(d, k) * S[len-1-d+k] / 2^d,   d = min(depth, len-1)
/// ```
///
/// This is iterated Euler tail averaging: for a sequence whose partial sums
/// oscillate around their limit without pointwise term decay, each averaging
/// level damps the dominant oscillation by another order. Plain truncation is
/// returned when fewer than two partials exist.
pub fn binomial_tail_average(partials: &[f64], depth: usize) -> f64 {
    assert!(!partials.is_empty(), "no partial sums to average");
    let d = depth.min(partials.len() - 1);
    if d == 0 {
        return partials[partials.len() - 1];
    }
    let tail = &partials[partials.len() - 1 - d..];
    let mut c = 1.0_f64;
    let mut acc = tail[0];
    for (k, s) in tail.iter().enumerate().skip(1) {
        c = c * (d - k + 1) as f64 / k as f64;
        acc += c * s;
    }
    acc / 2f64.powi(d as i32)
}

/// A reproducible stream of uniform points on the unit sphere S^{M-1}.
///
/// Construction: M independent standard normals, normalized to unit length.
pub struct UnitSphereStream {
    rng: ChaCha8Rng,
    m: usize,
}

impl UnitSphereStream {
    /// Stream for batch `batch_index` of the given spec. Each batch draws from
    /// an independent ChaCha stream, so batches can be generated in any order
    /// or in parallel without changing their contents.
    pub fn for_batch(m: usize, mc: &McSpec, batch_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        rng.set_stream(batch_index);
        UnitSphereStream { rng, m }
    }

    /// Write the next sample into `out` (length M). Renormalizes exactly once;
    /// the probability of drawing an exactly-zero normal vector is negligible
    /// but guarded anyway.
    pub fn next_into(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.m);
        loop {
            let mut norm2 = 0.0;
            for x in out.iter_mut() {
                let g: f64 = self.rng.sample(StandardNormal);
                *x = g;
                norm2 += g * g;
            }
            if norm2 > 1e-280 {
                let inv = 1.0 / norm2.sqrt();
                for x in out.iter_mut() {
                    *x *= inv;
                }
                return;
            }
        }
    }
}

/// Batch sizes for a spec: `samples` split as evenly as possible over
/// `batches`, remainder spread over the leading batches.
pub fn batch_sizes(mc: &McSpec) -> Vec<u64> {
    let base = mc.samples / mc.batches;
    let extra = mc.samples % mc.batches;
    (0..mc.batches)
        .map(|b| base + u64::from(b < extra))
        .collect()
}

/// Result of a multi-output sphere Monte-Carlo run.
pub struct McMulti {
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Per-batch means, indexed `[batch][output]`. Retained so callers can
    /// propagate errors through weighted combinations of outputs whose
    /// estimates share the same sample stream (and are therefore correlated).
    pub batch_means: Vec<Vec<f64>>,
    /// Samples drawn in each batch.
    pub batch_sizes: Vec<u64>,
}

impl McMulti {
    /// Mean and batch-means standard error of `sum_i coeff[i] * output_i`,
    /// accounting for cross-output correlation through the shared samples.
    pub fn weighted(&self, coeffs: &[f64]) -> (f64, f64) {
        assert_eq!(coeffs.len(), self.means.len());
        let per_batch: Vec<f64> = self
            .batch_means
            .iter()
            .map(|bm| bm.iter().zip(coeffs).map(|(v, c)| v * c).sum())
            .collect();
        mean_and_stderr(&per_batch, &self.batch_sizes)
    }
}

/// Size-weighted batch-means estimate: overall mean plus the standard error
/// of the mean computed from the spread of the per-batch means. The mean is
/// rebuilt as (sum of batch totals) / (total samples) so that a constant
/// integrand comes back without rounding from the weighting itself.
pub fn mean_and_stderr(batch_means: &[f64], batch_sizes: &[u64]) -> (f64, f64) {
    let b = batch_means.len();
    let total: u64 = batch_sizes.iter().sum();
    let mut num = CompensatedSum::new();
    for (m, &n) in batch_means.iter().zip(batch_sizes) {
        num.add(m * n as f64);
    }
    let mean = num.value() / total as f64;
    if b < 2 {
        return (mean, 0.0);
    }
    let var: f64 = batch_means
        .iter()
        .zip(batch_sizes)
        .map(|(m, &n)| n as f64 / total as f64 * (m - mean) * (m - mean))
        .sum();
    let stderr = (var / (b as f64 - 1.0)).sqrt();
    (mean, stderr)
}

/// Monte-Carlo estimate of the normalized sphere average of `g`:
/// the integral of g over S^{M-1} divided by the surface area.
pub fn mc_sphere_expectation<G>(g: G, m: usize, mc: &McSpec) -> Result<(f64, f64)>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let multi = mc_sphere_multi(m, mc, 1, |zeta, out| out[0] = g(zeta))?;
    Ok((multi.means[0], multi.stderrs[0]))
}

/// Multi-output sphere Monte-Carlo with one shared sample stream.
///
/// `fill` evaluates all `dim` outputs for a single sample. Batches run in
/// parallel; the reduction over batches is performed in batch-index order so
/// results do not depend on scheduling.
pub fn mc_sphere_multi<F>(m: usize, mc: &McSpec, dim: usize, fill: F) -> Result<McMulti>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    mc_sphere_multi_batched(m, mc, dim, || {
        |zeta: &[f64], out: &mut [f64]| fill(zeta, out)
    })
}

/// As [`mc_sphere_multi`], but `make` builds one evaluation closure per
/// batch, letting the evaluator keep per-batch scratch buffers without
/// synchronization.
pub fn mc_sphere_multi_batched<MF, G>(
    m: usize,
    mc: &McSpec,
    dim: usize,
    make: MF,
) -> Result<McMulti>
where
    MF: Fn() -> G + Sync,
    G: FnMut(&[f64], &mut [f64]),
{
    mc.validate()?;
    let sizes = batch_sizes(mc);
    let batch_means: Vec<Vec<f64>> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &nb)| {
            let mut stream = UnitSphereStream::for_batch(m, mc, b as u64);
            let mut fill = make();
            let mut zeta = vec![0.0; m];
            let mut vals = vec![0.0; dim];
            let mut acc = vec![CompensatedSum::new(); dim];
            for _ in 0..nb {
                stream.next_into(&mut zeta);
                fill(&zeta, &mut vals);
                for (a, v) in acc.iter_mut().zip(&vals) {
                    a.add(*v);
                }
            }
            acc.iter().map(|a| a.value() / nb as f64).collect()
        })
        .collect();
    for bm in &batch_means {
        for v in bm {
            if !v.is_finite() {
                return Err(Error::NonFinite("sphere integrand".into()));
            }
        }
    }
    let mut means = vec![0.0; dim];
    let mut stderrs = vec![0.0; dim];
    for k in 0..dim {
        let per: Vec<f64> = batch_means.iter().map(|bm| bm[k]).collect();
        let (mean, se) = mean_and_stderr(&per, &sizes);
        means[k] = mean;
        stderrs[k] = se;
    }
    Ok(McMulti {
        means,
        stderrs,
        batch_means,
        batch_sizes: sizes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn finite_constant_and_polynomial() {
        let spec = QuadSpec::default();
        let (v, _) = integrate_finite(|_| 1.0, 0.0, 1.0, &spec).unwrap();
        close(v, 1.0, 1e-14);
        let (v, _) = integrate_finite(|x| x, 0.0, 2.0, &spec).unwrap();
        close(v, 2.0, 1e-13);
    }

    #[test]
    fn finite_gaussian() {
        let spec = QuadSpec::default();
        let (v, _) = integrate_finite(|x| (-x * x).exp(), 0.0, 6.0, &spec).unwrap();
        close(v, 0.886_226_925_452_758, 1e-12);
    }

    #[test]
    fn quadrature_polynomial_exactness() {
        let spec = QuadSpec::default();
        for deg in [3usize, 7, 10, 13] {
            let (v, _) = integrate_finite(|x| x.powi(deg as i32), 0.0, 1.0, &spec).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v / exact - 1.0).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn semi_infinite_exponentials() {
        for transform in [
            SemiInfiniteTransform::ExpSubstitution,
            SemiInfiniteTransform::RationalSubstitution,
        ] {
            let spec = QuadSpec {
                transform,
                ..QuadSpec::default()
            };
            let (v, _) = integrate_semi_infinite(|x| (-x).exp(), &spec).unwrap();
            close(v, 1.0, 1e-11);
            let (v, _) = integrate_semi_infinite(|x| x * (-x).exp(), &spec).unwrap();
            close(v, 1.0, 1e-11);
        }
    }

    #[test]
    fn semi_infinite_macdonald_half_order() {
        // e^{-x - 1/x} x^{-1/2} integrates to sqrt(pi) e^{-2}.
        let spec = QuadSpec::default();
        let (v, _) =
            integrate_semi_infinite(|x| (-x - 1.0 / x).exp() / x.sqrt(), &spec).unwrap();
        close(v, std::f64::consts::PI.sqrt() * (-2.0_f64).exp(), 1e-10);
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        let mc = McSpec {
            samples: 1000,
            seed: 9,
            batches: 4,
        };
        let mut stream = UnitSphereStream::for_batch(5, &mc, 0);
        let mut z = vec![0.0; 5];
        for _ in 0..200 {
            stream.next_into(&mut z);
            let norm: f64 = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            close(norm, 1.0, 1e-12);
        }
    }

    #[test]
    fn sphere_mean_is_near_zero() {
        let mc = McSpec {
            samples: 1_000_000,
            seed: 3,
            batches: 50,
        };
        let multi = mc_sphere_multi(3, &mc, 3, |z, out| out.copy_from_slice(z)).unwrap();
        let norm: f64 = multi.means.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm <= 3e-3, "mean direction norm {norm}");
    }

    #[test]
    fn sphere_expectation_trivial_and_moments() {
        let mc = McSpec {
            samples: 400_000,
            seed: 11,
            batches: 40,
        };
        let (one, se) = mc_sphere_expectation(|_| 1.0, 3, &mc).unwrap();
        assert_eq!(one, 1.0);
        assert_eq!(se, 0.0);

        let (odd, se) = mc_sphere_expectation(|z| z[0], 3, &mc).unwrap();
        assert!(odd.abs() <= 3.0 * se.max(1e-6), "odd moment {odd} vs {se}");

        let (sq, se) = mc_sphere_expectation(|z| z[0] * z[0], 4, &mc).unwrap();
        assert!((sq - 0.25).abs() <= 3.0 * se, "second moment {sq} +- {se}");

        let (sq3, se3) = mc_sphere_expectation(|z| z[0] * z[0], 3, &mc).unwrap();
        assert!(
            (sq3 - 1.0 / 3.0).abs() <= 3.0 * se3,
            "second moment {sq3} +- {se3}"
        );
    }

    #[test]
    fn mc_reproducible() {
        let mc = McSpec {
            samples: 100_000,
            seed: 77,
            batches: 16,
        };
        let (a1, s1) = mc_sphere_expectation(|z| z[1] * z[1] * z[2], 4, &mc).unwrap();
        let (a2, s2) = mc_sphere_expectation(|z| z[1] * z[1] * z[2], 4, &mc).unwrap();
        assert_eq!(a1.to_bits(), a2.to_bits());
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        // degree-23 exactness: integral of x^22 over [-1,1] = 2/23
        let v: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(22)).sum();
        close(v, 2.0 / 23.0, 1e-13);
        let total: f64 = w.iter().sum();
        close(total, 2.0, 1e-13);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut c = CompensatedSum::new();
        c.add(1e16);
        for _ in 0..10_000 {
            c.add(0.1);
        }
        c.add(-1e16);
        close(c.value(), 1000.0, 1e-6);
    }

    #[test]
    fn binomial_average_damps_alternating_tail() {
        // partial sums of sum (-1)^k on k=0..: 1,0,1,0,... averaging to 1/2
        let partials: Vec<f64> = (0..40).map(|k| ((k + 1) % 2) as f64).collect();
        let avg = binomial_tail_average(&partials, 9);
        close(avg, 0.5, 1e-2);
        assert_eq!(binomial_tail_average(&[3.25], 9), 3.25);
    }
}
