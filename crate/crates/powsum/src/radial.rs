//! The two orthogonal radial families behind the orthogonal-basis expansion.
//!
//! `eta` is an orthonormal family on (0, ∞) with weight r^{M−1}:
//!
//! ```text
//! η_{n,l}(r) = 2^{2l+M−1} Γ(λ) sqrt( n! (n+λ) / (π Γ(n+2l+M−1)) )
//!              · r^l (r²+1)^{−l−M/2} C_n^λ(x),
//! λ = l + (M−1)/2,   x = (r²−1)/(r²+1)
//! ```
//!
//! `xi` is its weighted transform, orthogonal on (0, ∞) with weight u^{ν−1}.
//! Three independent routes to ξ are implemented and cross-checked:
//!
//! * `xi_via_k`: a finite sum of n+1 Macdonald-function terms, exact in n;
//! * `xi_real`: a semi-infinite integral of e^{−z−u²/z} z^{(M−ν)/2−1} against
//!   a terminating ₂F₂ kernel;
//! * `hankel_transform_eta`: the oscillatory Bessel-J transform of η itself.
//!
//! All three carry the same real-valued phase convention: the i^l phase of
//! the complex transform is stripped here and reappears as (−1)^{Σl/2} in the
//! series assembly, where every surviving index combination has even Σl.
//!
//! The K-sum is the default evaluation route but suffers catastrophic
//! cancellation once n grows (the n+1 terms reach ~1e4 times the result near
//! n = 15 and keep growing); `xi` therefore dispatches to the Hankel route
//! for n ≥ 15, which is oscillatory but cancellation-free.

use crate::error::{Error, Result};
use crate::numerics::{
    binomial_tail_average, integrate_finite, integrate_semi_infinite, CompensatedSum, QuadSpec,
};
use crate::special::{
    bessel_j, bessel_k, gegenbauer, hyp_terminating, ln_gamma_pos, pochhammer, sphere_surface,
};

/// Index of a radial basis element: degree n, angular order l, ambient
/// dimension M, and the exponent ν of the target power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIndex {
    pub n: usize,
    pub l: usize,
    pub m: usize,
    pub nu: f64,
}

impl RadialIndex {
    pub fn new(n: usize, l: usize, m: usize, nu: f64) -> Result<Self> {
        if m < 3 {
            return Err(Error::ValidationError(format!(
                "radial basis needs dimension M >= 3, got {m}"
            )));
        }
        if !nu.is_finite() {
            return Err(Error::ValidationError(format!("nu = {nu}")));
        }
        Ok(RadialIndex { n, l, m, nu })
    }

    /// ξ additionally requires 0 < ν < M.
    fn check_xi(&self) -> Result<()> {
        let mf = self.m as f64;
        if !(self.nu > 0.0 && self.nu < mf) {
            return Err(Error::ValidationError(format!(
                "xi requires 0 < nu < M, got nu = {}, M = {}",
                self.nu, self.m
            )));
        }
        Ok(())
    }
}

/// η_{n,l}^{(M)}(r) via the Gegenbauer form. Exact zero for r = 0, l ≥ 1.
pub fn eta(idx: &RadialIndex, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::DomainError(format!("eta at r = {r}")));
    }
    let (n, l, mf) = (idx.n, idx.l as f64, idx.m as f64);
    if r == 0.0 && idx.l > 0 {
        return Ok(0.0);
    }
    let lambda = l + 0.5 * (mf - 1.0);
    let ln_norm = (2.0 * l + mf - 1.0) * std::f64::consts::LN_2
        + ln_gamma_pos(lambda)
        + 0.5
            * (ln_gamma_pos(n as f64 + 1.0) + (n as f64 + lambda).ln()
                - std::f64::consts::PI.ln()
                - ln_gamma_pos(n as f64 + 2.0 * l + mf - 1.0));
    let r2p1 = r * r + 1.0;
    let x = (r * r - 1.0) / r2p1;
    let ln_radial = if idx.l == 0 { 0.0 } else { l * r.ln() } - (l + 0.5 * mf) * r2p1.ln();
    Ok((ln_norm + ln_radial).exp() * gegenbauer(n, lambda, x))
}

/// Unevaluated double-length float: value = hi + lo. Only what the
/// terminating cross-check series needs: error-free splits plus add, scale,
/// divide.
#[cfg_attr(not(test), allow(dead_code))]
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[cfg_attr(not(test), allow(dead_code))]
impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Dd::two_sum(s.hi, lo)
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = Dd::two_prod(self.hi, b);
        let lo = self.lo.mul_add(b, p.lo);
        Dd::two_sum(p.hi, lo)
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = Dd::two_prod(q1, b);
        let r = (self.hi - p.hi) + (self.lo - p.lo);
        Dd::two_sum(q1, r / b)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// The terminating-series form of η, kept as an independent cross-check of
/// the Gegenbauer route.
///
/// For this parameter pattern the argument reflection z → 1−z costs only a
/// factor (−1)^n, so the series is always summed at an argument ≤ 1/2; at
/// z → 1 the naive sum loses eight digits to cancellation by n = 15. Even
/// reflected, the alternating terms can exceed the sum by six orders near a
/// polynomial root, so the ascending sum runs in double-length arithmetic.
#[cfg_attr(not(test), allow(dead_code))]
fn eta_hyp(idx: &RadialIndex, r: f64) -> Result<f64> {
    let (n, l, mf) = (idx.n as f64, idx.l as f64, idx.m as f64);
    if r == 0.0 && idx.l > 0 {
        return Ok(0.0);
    }
    let r2p1 = r * r + 1.0;
    let ln_pref = std::f64::consts::LN_2 - ln_gamma_pos(l + 0.5 * mf)
        + 0.5
            * ((n + l + 0.5 * (mf - 1.0)).ln() + ln_gamma_pos(n + 2.0 * l + mf - 1.0)
                - ln_gamma_pos(n + 1.0));
    let ln_radial = if idx.l == 0 { 0.0 } else { l * r.ln() } - (l + 0.5 * mf) * r2p1.ln();
    let z = 1.0 / r2p1;
    if z == 0.5 && idx.n % 2 == 1 {
        // the reflection fixes F = −F at the symmetric argument
        return Ok(0.0);
    }
    let (arg, sign) = if z > 0.5 {
        (r * r / r2p1, if idx.n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (z, 1.0)
    };
    let (a2, c) = (n + 2.0 * l + mf - 1.0, l + 0.5 * mf);
    let mut term = Dd::from(1.0);
    let mut sum = term;
    for k in 0..idx.n {
        let kf = k as f64;
        term = term
            .mul_f64((kf - n) * (a2 + kf))
            .mul_f64(arg)
            .div_f64((c + kf) * (kf + 1.0));
        sum = sum.add(term);
    }
    Ok(sign * (ln_pref + ln_radial).exp() * sum.value())
}

/// ∫_0^∞ r^{M−1} η_{n1,l} η_{n2,l} dr. Equals δ_{n1,n2} up to quadrature
/// error; both indices must share l and M.
pub fn eta_orthogonality(idx1: &RadialIndex, idx2: &RadialIndex, quad: &QuadSpec) -> Result<f64> {
    if idx1.l != idx2.l || idx1.m != idx2.m {
        return Err(Error::ValidationError(
            "eta_orthogonality needs matching l and M".into(),
        ));
    }
    let mf = idx1.m as f64;
    let mut bad = None;
    let (val, _) = integrate_semi_infinite(
        |r| {
            let prod = eta(idx1, r).and_then(|a| eta(idx2, r).map(|b| a * b));
            match prod {
                Ok(p) => r.powf(mf - 1.0) * p,
                Err(e) => {
                    bad.get_or_insert(e);
                    0.0
                }
            }
        },
        quad,
    )?;
    match bad {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

fn xi_sqrt_ln(idx: &RadialIndex) -> f64 {
    let (n, l, mf) = (idx.n as f64, idx.l as f64, idx.m as f64);
    0.5 * ((n + l + 0.5 * (mf - 1.0)).ln() + ln_gamma_pos(n + 2.0 * l + mf - 1.0)
        - ln_gamma_pos(n + 1.0))
}

/// ξ through the finite Macdonald sum: exact in n, n+1 terms of the form
///
/// ```text
/// (−n)_m (n+2l+M−1)_m / ( (l+M/2)_m (l+M−ν/2)_m m! )
///        · u^{l+m+(M−ν)/2} K_{(M−ν)/2+m}(2u)
/// ```
///
/// Cancellation between the terms grows with n; prefer [`xi`] which switches
/// representation where this one degrades.
pub fn xi_via_k(idx: &RadialIndex, u: f64) -> Result<f64> {
    idx.check_xi()?;
    if u <= 0.0 {
        return Err(Error::DomainError(format!("xi at u = {u}")));
    }
    let (n, l, mf, nu) = (idx.n, idx.l as f64, idx.m as f64, idx.nu);
    let ln_pref = (4.0_f64).ln() + 0.5 * mf * std::f64::consts::PI.ln()
        - ln_gamma_pos(l + 0.5 * mf)
        - ln_gamma_pos(l + mf - 0.5 * nu)
        + xi_sqrt_ln(idx);
    let half_gap = 0.5 * (mf - nu);
    let mut sum = CompensatedSum::new();
    for mm in 0..=n {
        let coef = pochhammer(-(n as f64), mm) * pochhammer(n as f64 + 2.0 * l + mf - 1.0, mm)
            / (pochhammer(l + 0.5 * mf, mm)
                * pochhammer(l + mf - 0.5 * nu, mm)
                * pochhammer(1.0, mm));
        let term = coef
            * u.powf(l + mm as f64 + half_gap)
            * bessel_k(half_gap + mm as f64, 2.0 * u)?;
        sum.add(term);
    }
    let v = ln_pref.exp() * sum.value();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("xi_via_k({idx:?}, {u})")))
    }
}

/// ξ through the exponential-kernel integral against a terminating ₂F₂.
/// Independent of the K-sum route term by term; used for cross-validation.
pub fn xi_real(idx: &RadialIndex, u: f64, quad: &QuadSpec) -> Result<f64> {
    idx.check_xi()?;
    if u <= 0.0 {
        return Err(Error::DomainError(format!("xi at u = {u}")));
    }
    let (n, l, mf, nu) = (idx.n as f64, idx.l as f64, idx.m as f64, idx.nu);
    let ln_pref = (2.0_f64).ln() + 0.5 * mf * std::f64::consts::PI.ln() + l * u.ln()
        - ln_gamma_pos(l + 0.5 * mf)
        - ln_gamma_pos(l + mf - 0.5 * nu)
        + xi_sqrt_ln(idx);
    let half_gap = 0.5 * (mf - nu);
    let u2 = u * u;
    let mut bad = None;
    let (integral, _) = integrate_semi_infinite(
        |z| {
            let e = -z - u2 / z;
            if e < -745.0 {
                return 0.0;
            }
            match hyp_terminating(
                &[-n, n + 2.0 * l + mf - 1.0],
                &[l + 0.5 * mf, l + mf - 0.5 * nu],
                z,
            ) {
                Ok(f) => e.exp() * z.powf(half_gap - 1.0) * f,
                Err(err) => {
                    bad.get_or_insert(err);
                    0.0
                }
            }
        },
        quad,
    )?;
    if let Some(e) = bad {
        return Err(e);
    }
    Ok(ln_pref.exp() * integral)
}

/// ξ as the Bessel-J transform of η:
///
/// ```text
/// 2 π^{M/2} ∫_0^∞ r^{M−1} η_{n,l}(r) (r²+1)^{−(M−ν)/2}
///                · J_{l+M/2−1}(2ru) / (ru)^{M/2−1} dr
/// ```
///
/// The integrand oscillates with half-period π/(2u) and only decays
/// algebraically, so the tail is summed chunk by chunk over half-periods and
/// the chunk partial sums are binomially averaged.
pub fn hankel_transform_eta(idx: &RadialIndex, u: f64, quad: &QuadSpec) -> Result<f64> {
    idx.check_xi()?;
    if u <= 0.0 {
        return Err(Error::DomainError(format!("xi at u = {u}")));
    }
    let (l, mf, nu) = (idx.l as f64, idx.m as f64, idx.nu);
    let order = l + 0.5 * mf - 1.0;
    let chunk_quad = QuadSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-10,
        max_subdivisions: 30,
        ..*quad
    };
    let bad: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let mut f = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let pieces = eta(idx, r).and_then(|e| bessel_j(order, 2.0 * r * u).map(|j| (e, j)));
        match pieces {
            Ok((e, j)) => {
                r.powf(mf - 1.0) * e * (r * r + 1.0).powf(-0.5 * (mf - nu)) * j
                    / (r * u).powf(0.5 * mf - 1.0)
            }
            Err(err) => {
                bad.borrow_mut().get_or_insert(err);
                0.0
            }
        }
    };
    // chunk by the faster of the two oscillations: the Bessel factor has
    // half-period pi/(2u) in r, and the radial factor's polynomial part has
    // n roots packed ~pi/n apart near r = 1
    let width = std::f64::consts::FRAC_PI_2 / u.max(0.35 * (idx.n as f64 + 1.0));
    let max_chunks = 6000usize;
    let mut partials = Vec::with_capacity(512);
    let mut running = CompensatedSum::new();
    let mut prev_avg = f64::NAN;
    let mut stable = 0;
    for k in 0..max_chunks {
        let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
        let (v, _) = integrate_finite(&mut f, a, b, &chunk_quad)?;
        if let Some(e) = bad.borrow_mut().take() {
            return Err(e);
        }
        running.add(v);
        partials.push(running.value());
        if k >= 40 {
            let avg = binomial_tail_average(&partials, 9);
            let scale = avg.abs().max(1e-300);
            if (avg - prev_avg).abs() <= 1e-11 * scale {
                stable += 1;
                if stable >= 3 {
                    return Ok(2.0 * std::f64::consts::PI.powf(0.5 * mf) * avg);
                }
            } else {
                stable = 0;
            }
            prev_avg = avg;
        }
    }
    let avg = binomial_tail_average(&partials, 9);
    if (avg - prev_avg).abs() <= 1e-7 * avg.abs().max(1e-300) {
        Ok(2.0 * std::f64::consts::PI.powf(0.5 * mf) * avg)
    } else {
        Err(Error::NonConvergence(format!(
            "oscillatory transform tail not settled after {max_chunks} half-periods (idx {idx:?}, u = {u})"
        )))
    }
}

/// Default ξ evaluation: the exact finite K-sum while its cancellation is
/// benign, the oscillatory transform beyond.
pub fn xi(idx: &RadialIndex, u: f64, quad: &QuadSpec) -> Result<f64> {
    if idx.n <= 14 {
        xi_via_k(idx, u)
    } else {
        hankel_transform_eta(idx, u, quad)
    }
}

/// ∫_0^∞ u^{ν−1} ξ_{n1,l} ξ_{n2,l} du by quadrature.
pub fn xi_orthogonality(
    n1: usize,
    n2: usize,
    l: usize,
    m: usize,
    nu: f64,
    quad: &QuadSpec,
) -> Result<f64> {
    let idx1 = RadialIndex::new(n1, l, m, nu)?;
    let idx2 = RadialIndex::new(n2, l, m, nu)?;
    idx1.check_xi()?;
    let mut bad = None;
    let (val, _) = integrate_semi_infinite(
        |u| {
            let prod = xi_via_k(&idx1, u).and_then(|a| xi_via_k(&idx2, u).map(|b| a * b));
            match prod {
                Ok(p) => u.powf(nu - 1.0) * p,
                Err(e) => {
                    bad.get_or_insert(e);
                    0.0
                }
            }
        },
        quad,
    )?;
    match bad {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

/// Closed form the diagonal of [`xi_orthogonality`] must reproduce:
/// π^M Γ(ν/2+l+n) / Γ(M−ν/2+l+n).
pub fn xi_orthogonality_closed(n: usize, l: usize, m: usize, nu: f64) -> f64 {
    let (nf, lf, mf) = (n as f64, l as f64, m as f64);
    std::f64::consts::PI.powi(m as i32)
        * (ln_gamma_pos(0.5 * nu + lf + nf) - ln_gamma_pos(mf - 0.5 * nu + lf + nf)).exp()
}

/// ∫_0^∞ u^{ν−1} ξ_{n,0}(u) du by quadrature.
pub fn xi_moment(n: usize, m: usize, nu: f64, quad: &QuadSpec) -> Result<f64> {
    let idx = RadialIndex::new(n, 0, m, nu)?;
    idx.check_xi()?;
    let mut bad = None;
    let (val, _) = integrate_semi_infinite(
        |u| match xi_via_k(&idx, u) {
            Ok(x) => u.powf(nu - 1.0) * x,
            Err(e) => {
                bad.get_or_insert(e);
                0.0
            }
        },
        quad,
    )?;
    match bad {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

/// Closed form of the l = 0 moment:
/// (−1)^n π^{M/2} Γ(ν/2+n)/Γ(M−ν/2+n) · sqrt((n+(M−1)/2) Γ(n+M−1)/n!).
pub fn xi_moment_closed(n: usize, m: usize, nu: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * std::f64::consts::PI.powf(0.5 * mf)
        * (ln_gamma_pos(0.5 * nu + nf) - ln_gamma_pos(mf - 0.5 * nu + nf)
            + 0.5
                * ((nf + 0.5 * (mf - 1.0)).ln() + ln_gamma_pos(nf + mf - 1.0)
                    - ln_gamma_pos(nf + 1.0)))
        .exp()
}

/// Partial sums S_0 ..= S_{n_max} of the constant-function expansion
/// (1/S_M) Σ_n η_{n,0}(0) ξ_{n,0}(u). The limit is 1; the terms alternate
/// without pointwise decay, so consumers should tail-average the partials.
pub fn completeness_partial_sums(
    m: usize,
    nu: f64,
    u: f64,
    n_max: usize,
    quad: &QuadSpec,
) -> Result<Vec<f64>> {
    let surf = sphere_surface(m);
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let idx = RadialIndex::new(n, 0, m, nu)?;
        let term = eta(&idx, 0.0)? * xi(&idx, u, quad)? / surf;
        acc.add(term);
        out.push(acc.value());
    }
    Ok(out)
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

    fn quad() -> QuadSpec {
        QuadSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 400,
            ..QuadSpec::default()
        }
    }

    #[test]
    fn eta_at_origin() {
        let idx = RadialIndex::new(0, 0, 3, 1.0).unwrap();
        rel(
            eta(&idx, 0.0).unwrap(),
            4.0 / std::f64::consts::PI.sqrt(),
            1e-13,
        );
        for (n, l) in [(0usize, 1usize), (3, 2), (5, 1)] {
            let idx = RadialIndex::new(n, l, 3, 1.0).unwrap();
            assert_eq!(eta(&idx, 0.0).unwrap(), 0.0);
        }
        // general closed form at the origin: 2(−1)^n/Γ(M/2)·sqrt((n+(M−1)/2)Γ(n+M−1)/n!)
        for m in [3usize, 4, 5] {
            for n in 0..6usize {
                let idx = RadialIndex::new(n, 0, m, 1.0).unwrap();
                let mf = m as f64;
                let nf = n as f64;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let expect = sign * 2.0 / ln_gamma_pos(0.5 * mf).exp()
                    * (0.5
                        * ((nf + 0.5 * (mf - 1.0)).ln() + ln_gamma_pos(nf + mf - 1.0)
                            - ln_gamma_pos(nf + 1.0)))
                    .exp();
                rel(eta(&idx, 0.0).unwrap(), expect, 1e-12);
            }
        }
    }

    #[test]
    fn eta_two_forms_agree() {
        for m in [3usize, 4, 5] {
            for l in 0..=3usize {
                for n in [0usize, 1, 2, 5, 9, 15] {
                    let idx = RadialIndex::new(n, l, m, 1.0).unwrap();
                    for r in [0.1, 0.5, 1.0, 2.7] {
                        let a = eta(&idx, r).unwrap();
                        let b = eta_hyp(&idx, r).unwrap();
                        assert!(
                            (a - b).abs() <= 1e-10 * a.abs().max(1.0),
                            "n={n} l={l} m={m} r={r}: {a} vs {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn eta_orthonormal() {
        let q = quad();
        let mk = |n, l, m| RadialIndex::new(n, l, m, 1.0).unwrap();
        close(
            eta_orthogonality(&mk(0, 0, 3), &mk(0, 0, 3), &q).unwrap(),
            1.0,
            1e-8,
        );
        close(
            eta_orthogonality(&mk(0, 2, 4), &mk(1, 2, 4), &q).unwrap(),
            0.0,
            1e-8,
        );
        close(
            eta_orthogonality(&mk(3, 1, 5), &mk(3, 1, 5), &q).unwrap(),
            1.0,
            1e-8,
        );
        assert!(eta_orthogonality(&mk(0, 1, 3), &mk(0, 2, 3), &q).is_err());
    }

    #[test]
    fn xi_k_sum_reference_value() {
        // n=0, l=0 collapses to a single Macdonald term:
        // 2π^{3/2}/(Γ(3/2)Γ(5/2)) · 2 u K_1(2u) at u=1
        let idx = RadialIndex::new(0, 0, 3, 1.0).unwrap();
        let expect = 2.0 * std::f64::consts::PI.powf(1.5)
            / (ln_gamma_pos(1.5).exp() * ln_gamma_pos(2.5).exp())
            * 2.0
            * bessel_k(1.0, 2.0).unwrap();
        rel(xi_via_k(&idx, 1.0).unwrap(), expect, 1e-12);
        rel(xi_via_k(&idx, 1.0).unwrap(), 2.644_328_755_583_904_6, 1e-8);
    }

    #[test]
    fn xi_representations_agree() {
        let q = quad();
        let idx = RadialIndex::new(1, 0, 3, 1.0).unwrap();
        rel(
            xi_via_k(&idx, 0.5).unwrap(),
            xi_real(&idx, 0.5, &q).unwrap(),
            1e-8,
        );
        let idx = RadialIndex::new(2, 1, 3, 1.0).unwrap();
        rel(
            xi_via_k(&idx, 0.7).unwrap(),
            xi_real(&idx, 0.7, &q).unwrap(),
            1e-8,
        );
    }

    #[test]
    fn xi_hankel_route_agrees() {
        let q = quad();
        let idx = RadialIndex::new(0, 0, 3, 1.0).unwrap();
        rel(
            hankel_transform_eta(&idx, 1.0, &q).unwrap(),
            xi_real(&idx, 1.0, &q).unwrap(),
            1e-6,
        );
        let idx = RadialIndex::new(1, 1, 3, 1.0).unwrap();
        rel(
            hankel_transform_eta(&idx, 0.5, &q).unwrap(),
            xi_real(&idx, 0.5, &q).unwrap(),
            1e-6,
        );
        let idx = RadialIndex::new(0, 1, 4, 2.0).unwrap();
        rel(
            hankel_transform_eta(&idx, 1.0, &q).unwrap(),
            xi_via_k(&idx, 1.0).unwrap(),
            1e-6,
        );
    }

    #[test]
    fn xi_small_u_prefactor() {
        let idx = RadialIndex::new(0, 1, 3, 1.0).unwrap();
        let a = xi_via_k(&idx, 1e-3).unwrap();
        let b = xi_via_k(&idx, 2e-3).unwrap();
        // ∝ u^l with l = 1 near the origin
        rel(b / a, 2.0, 2e-2);
        assert!(a.abs() < 1e-1);
    }

    #[test]
    fn xi_orthogonality_gamma_ratio() {
        let q = QuadSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 300,
            ..QuadSpec::default()
        };
        let diag = xi_orthogonality(0, 0, 0, 3, 1.0, &q).unwrap();
        rel(diag, xi_orthogonality_closed(0, 0, 3, 1.0), 1e-6);
        rel(
            diag,
            std::f64::consts::PI.powi(3) * 4.0 / 3.0,
            1e-6,
        );
        let off = xi_orthogonality(0, 2, 1, 3, 1.0, &q).unwrap();
        assert!(off.abs() <= 1e-6 * xi_orthogonality_closed(2, 1, 3, 1.0));
        let diag = xi_orthogonality(1, 1, 0, 4, 2.0, &q).unwrap();
        rel(diag, std::f64::consts::PI.powi(4) / 6.0, 1e-6);
    }

    #[test]
    fn xi_moment_matches_closed_form() {
        let q = QuadSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 300,
            ..QuadSpec::default()
        };
        let v = xi_moment(0, 3, 1.0, &q).unwrap();
        rel(v, 4.0 / 3.0 * std::f64::consts::PI.powf(1.5), 1e-7);
        rel(v, xi_moment_closed(0, 3, 1.0), 1e-7);
        assert!(xi_moment(1, 3, 1.0, &q).unwrap() < 0.0);
        rel(xi_moment(2, 4, 2.0, &q).unwrap(), xi_moment_closed(2, 4, 2.0), 1e-6);
    }

    #[test]
    fn index_validation() {
        assert!(RadialIndex::new(0, 0, 2, 1.0).is_err());
        let idx = RadialIndex::new(0, 0, 3, 3.5).unwrap();
        assert!(xi_via_k(&idx, 1.0).is_err());
        let idx = RadialIndex::new(0, 0, 3, 1.0).unwrap();
        assert!(xi_via_k(&idx, 0.0).is_err());
        assert!(eta(&idx, -1.0).is_err());
    }
}
