//! Refinable step functions: `φ̂` from tree path products, `φ` by finite inversion, and the
//! checks behind the support and orthonormality theorems.
//!
//! A [`SpectrumTable`] on the window `[lo, hi)` holds a function on characters that is
//! constant on cosets of `G_lo^⊥` and supported in `G_hi^⊥`. A [`StepFunction`] on the same
//! window is supported in `G_lo` and constant on cosets of `G_hi`. The two are exchanged by
//! the Fourier transform, which on these windows is a `p`-ary Chrestenson transform.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{root_of_unity, DigitVector, Limits, Modulus, Tag, Window};
use crate::mask::{DeviationReport, MaskTable, ZERO_THRESHOLD};
use crate::tree::RootedTree;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Values of a character-side step function on cosets of `G_lo^⊥` inside `G_hi^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    p: Modulus,
    lo: i32,
    hi: i32,
    values: Vec<Complex64>,
}

impl SpectrumTable {
    pub fn new(p: Modulus, lo: i32, hi: i32, values: Vec<Complex64>) -> Result<Self> {
        let window = Window::new(p.get(), lo, hi)?;
        if values.len() != window.count() {
            return Err(Error::TableLength { got: values.len(), expected: window.count() });
        }
        Ok(SpectrumTable { p, lo, hi, values })
    }

    pub fn modulus(&self) -> Modulus {
        self.p
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn window(&self) -> Window {
        Window { p: self.p.get(), lo: self.lo, hi: self.hi }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value on the coset of the character `chi`; zero outside `G_hi^⊥`.
    pub fn value_at(&self, chi: &DigitVector) -> Complex64 {
        if chi.support().is_some_and(|(_, e)| e > self.hi) {
            return ZERO;
        }
        let w = self.window();
        let idx = (self.lo..self.hi).map(|pos| chi.digit(pos) as usize * w.place(pos)).sum::<usize>();
        self.values[idx]
    }

    /// `Σ |value|² · ν(G_lo^⊥)`, the squared `L₂` norm.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * (self.p.get() as f64).powi(self.lo)
    }
}

/// A point-side step function supported in `G_lo`, constant on cosets of `G_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    p: Modulus,
    lo: i32,
    hi: i32,
    values: Vec<Complex64>,
}

impl StepFunction {
    pub fn new(p: Modulus, support_level: i32, resolution_level: i32, values: Vec<Complex64>) -> Result<Self> {
        let window = Window::new(p.get(), support_level, resolution_level)?;
        if values.len() != window.count() {
            return Err(Error::TableLength { got: values.len(), expected: window.count() });
        }
        Ok(StepFunction { p, lo: support_level, hi: resolution_level, values })
    }

    pub fn zero(p: Modulus, support_level: i32, resolution_level: i32) -> Result<Self> {
        let window = Window::new(p.get(), support_level, resolution_level)?;
        Ok(StepFunction { p, lo: support_level, hi: resolution_level, values: vec![ZERO; window.count()] })
    }

    pub fn modulus(&self) -> Modulus {
        self.p
    }

    pub fn support_level(&self) -> i32 {
        self.lo
    }

    pub fn resolution_level(&self) -> i32 {
        self.hi
    }

    pub fn window(&self) -> Window {
        Window { p: self.p.get(), lo: self.lo, hi: self.hi }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at the point `x`; zero off `G_lo`.
    pub fn value_at(&self, x: &DigitVector) -> Complex64 {
        if x.support().is_some_and(|(s, _)| s < self.lo) {
            return ZERO;
        }
        let w = self.window();
        let idx = (self.lo..self.hi).map(|pos| x.digit(pos) as usize * w.place(pos)).sum::<usize>();
        self.values[idx]
    }

    /// `Σ |value|² · μ(G_hi)`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * (self.p.get() as f64).powi(-self.hi)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        StepFunction { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// The same function tabulated on the wider window `[lo, hi)`.
    pub fn refine_to(&self, lo: i32, hi: i32) -> Result<Self> {
        if lo > self.lo || hi < self.hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        self.dilate_translate_on(0, &DigitVector::zero(self.p, Tag::Point), lo, hi)
    }

    /// `x ↦ f(x ∸ h)`.
    pub fn translate(&self, h: &DigitVector) -> Result<Self> {
        self.dilate_translate(0, h)
    }

    /// `x ↦ f(𝒜ⁿx ∸ h)`, tabulated on its natural window
    /// `[min(lo, lowest digit of h) + n, hi + n)`.
    pub fn dilate_translate(&self, n: i32, h: &DigitVector) -> Result<Self> {
        let base = h.support().map_or(self.lo, |(s, _)| s.min(self.lo));
        self.dilate_translate_on(n, h, base + n, self.hi + n)
    }

    fn dilate_translate_on(&self, n: i32, h: &DigitVector, lo: i32, hi: i32) -> Result<Self> {
        if h.modulus() != self.p {
            return Err(Error::ModulusMismatch(h.modulus().get(), self.p.get()));
        }
        if h.tag() != Tag::Point {
            return Err(Error::TagMismatch);
        }
        let p = self.p.get();
        let out = Window::new(p, lo, hi)?;
        let src = self.window();
        let mut values = Vec::with_capacity(out.count());
        // y_ν = x_{ν+n} - h_ν for ν in [lo - n, hi - n).
        let y_lo = lo - n;
        let y_hi = hi - n;
        let h_digits: Vec<u32> = (y_lo..y_hi).map(|pos| h.digit(pos)).collect();
        // Digits of h below the window must be matched by zero digits of x, which is
        // impossible when they are nonzero.
        let h_below = h.support().is_some_and(|(s, _)| s < y_lo && s < self.lo);
        for idx in 0..out.count() {
            if h_below {
                values.push(ZERO);
                continue;
            }
            let x = out.digits(idx);
            let mut inside = true;
            let mut src_idx = 0usize;
            for (k, pos) in (y_lo..y_hi).enumerate() {
                let y = (x[k] + p - h_digits[k]) % p;
                if pos < self.lo {
                    if y != 0 {
                        inside = false;
                        break;
                    }
                } else if pos < self.hi {
                    src_idx += y as usize * src.place(pos);
                }
            }
            values.push(if inside { self.values[src_idx] } else { ZERO });
        }
        Ok(StepFunction { p: self.p, lo, hi, values })
    }

    /// `⟨f, g⟩ = ∫ f·conj(g) dμ`, summed exactly over the common cell refinement.
    pub fn inner(&self, other: &StepFunction) -> Result<Complex64> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p.get(), other.p.get()));
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let a = self.refine_to(lo, hi)?;
        let b = other.refine_to(lo, hi)?;
        let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum();
        Ok(s * (self.p.get() as f64).powi(-hi))
    }

    /// Largest cell-wise discrepancy after refining both functions to a common window.
    pub fn max_abs_diff(&self, other: &StepFunction) -> Result<f64> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p.get(), other.p.get()));
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let a = self.refine_to(lo, hi)?;
        let b = other.refine_to(lo, hi)?;
        Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

/// In-place separable `p`-ary transform: along every digit axis apply `v_a ← Σ_α v_α ω^{±aα}`.
fn chrestenson_in_place(values: &mut [Complex64], p: u32, width: u32, conjugate: bool) {
    let pu = p as usize;
    let roots: Vec<Complex64> = (0..p as u64)
        .map(|k| {
            let w = root_of_unity(p, k);
            if conjugate {
                w.conj()
            } else {
                w
            }
        })
        .collect();
    let mut scratch = vec![ZERO; pu];
    let mut stride = 1usize;
    for _ in 0..width {
        let block = stride * pu;
        for start in (0..values.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (a, out) in scratch.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for alpha in 0..pu {
                        acc += values[base + alpha * stride] * roots[(a * alpha) % pu];
                    }
                    *out = acc;
                }
                for (a, v) in scratch.iter().enumerate() {
                    values[base + a * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

/// Sums of roots of unity that vanish in exact arithmetic come out near `1e-16`; components
/// that small relative to the table maximum are set to exactly zero.
pub(crate) fn flush_roundoff(values: &mut [Complex64]) {
    let scale = values.iter().map(|v| v.re.abs().max(v.im.abs())).fold(0.0, f64::max);
    let thr = scale * 1e-13;
    for v in values.iter_mut() {
        if v.re.abs() < thr {
            v.re = 0.0;
        }
        if v.im.abs() < thr {
            v.im = 0.0;
        }
    }
}

/// `f(x) = ∫ f̂(χ)(χ, x) dν = p^{lo} Σ_α f̂(α) (α, x)` on the shared window.
pub fn inverse_transform(spec: &SpectrumTable) -> StepFunction {
    let mut values = spec.values.clone();
    chrestenson_in_place(&mut values, spec.p.get(), spec.window().width(), false);
    let w = (spec.p.get() as f64).powi(spec.lo);
    values.iter_mut().for_each(|v| *v *= w);
    flush_roundoff(&mut values);
    StepFunction { p: spec.p, lo: spec.lo, hi: spec.hi, values }
}

/// `f̂(χ) = ∫ f(x) conj((χ, x)) dμ = p^{-hi} Σ_x f(x) conj((α, x))`.
pub fn forward_transform(f: &StepFunction) -> SpectrumTable {
    let mut values = f.values.clone();
    chrestenson_in_place(&mut values, f.p.get(), f.window().width(), true);
    let w = (f.p.get() as f64).powi(-f.hi);
    values.iter_mut().for_each(|v| *v *= w);
    flush_roundoff(&mut values);
    SpectrumTable { p: f.p, lo: f.lo, hi: f.hi, values }
}

/// `φ̂` on `[-1, M)` by root-path products, `M = height - 2`.
///
/// For the vertex `v` with root path `(0, α_s, …, α₀, α₋₁ = v)` the only nonzero entry with
/// `α₋₁ = v` sits at the digit string `(α₋₁, α₀, …, α_s, 0, …)` and equals
/// `λ_{α₋₁+pα₀} ⋯ λ_{α_{s-1}+pα_s} · λ_{α_s}`.
pub fn phi_hat_from_tree(tree: &RootedTree, mask: &MaskTable, limits: &Limits) -> Result<SpectrumTable> {
    let p = mask.modulus();
    if tree.p() != p.as_usize() {
        return Err(Error::ModulusMismatch(tree.p() as u32, p.get()));
    }
    let m = tree.support_exponent();
    let window = Window::new(p.get(), -1, m as i32)?;
    let size = window.size(limits)?;
    let mut values = vec![ZERO; size];
    for v in 0..tree.p() {
        // Digits α₋₁, α₀, … : the root path read from v upwards, padded with zeros.
        let mut digits: Vec<u32> = tree.path_to(v).iter().rev().map(|&u| u as u32).collect();
        digits.pop();
        digits.resize(m + 2, 0);
        let value: Complex64 = (0..=m).map(|n| mask.entry(digits[n], digits[n + 1])).product();
        values[window.index(&digits[..m + 1])] = value;
    }
    Ok(SpectrumTable { p, lo: -1, hi: m as i32, values })
}

/// `φ̂(χ) = Π_{n=0}^{M+1} m₀(χ𝒜^{-n})` on `[-1, M)`, evaluated literally for every coset.
///
/// Factors with `n > M + 1` are `m₀` at the trivial coset; the truncation requires `λ₀ = 1`,
/// which is checked rather than assumed.
pub fn phi_hat_from_mask(mask: &MaskTable, m: usize, limits: &Limits) -> Result<SpectrumTable> {
    let p = mask.modulus();
    if (mask.lambda()[0] - ONE).norm() > ZERO_THRESHOLD {
        return Err(Error::MaskOrigin(format!("{}", mask.lambda()[0])));
    }
    let window = Window::new(p.get(), -1, m as i32)?;
    let size = window.size(limits)?;
    let mut values = Vec::with_capacity(size);
    for idx in 0..size as u64 {
        let chi = DigitVector::digits_of(idx, p, Tag::Character, -1, m as i32)?;
        let mut value = ONE;
        for n in 0..=(m as i32 + 1) {
            // χ𝒜^{-n} modulo G₋₁^⊥.
            let shifted = chi.dilate(-n).truncate_below(-1);
            value *= mask.eval(&shifted)?;
        }
        values.push(value);
    }
    Ok(SpectrumTable { p, lo: -1, hi: m as i32, values })
}

/// Which parts of the `(1, M)`-elementary set conditions hold for `supp φ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryReport {
    pub m: i32,
    /// `|φ̂|` takes only the values 0 and 1.
    pub indicator: bool,
    /// Number of cosets in the support.
    pub coset_count: usize,
    /// The `α₋₁` parts of the support cosets are distinct and cover all residues.
    pub xi_tiling: bool,
    /// `G₋₁^⊥` itself belongs to the support.
    pub contains_origin: bool,
    /// `shells[l]`: the support meets `G_l^⊥ ∖ G_{l-1}^⊥`, `l = 0, …, M`.
    pub shells: Vec<bool>,
}

impl ElementaryReport {
    pub fn passed(&self) -> bool {
        self.failure().is_none()
    }

    /// First failing condition, if any.
    pub fn failure(&self) -> Option<String> {
        if !self.indicator {
            return Some("|phi_hat| is not {0,1}-valued".into());
        }
        if !self.xi_tiling {
            return Some(format!("condition 1: {} cosets do not tile G_0^perp by their xi-parts", self.coset_count));
        }
        if !self.contains_origin {
            return Some("condition 1: G_{-1}^perp is not in the support".into());
        }
        if let Some(l) = self.shells.iter().position(|&met| !met) {
            return Some(format!("condition 2: shell l = {l} is not met"));
        }
        None
    }
}

/// Checks that `supp φ̂` is a `(1, M)`-elementary set, `M = hi` of the table.
pub fn check_elementary(spec: &SpectrumTable, tol: f64) -> ElementaryReport {
    let p = spec.p.as_usize();
    let window = spec.window();
    let m = spec.hi;
    let mut indicator = true;
    let mut per_residue = vec![0usize; p];
    let mut shells = vec![false; (m + 1).max(0) as usize];
    let mut coset_count = 0;
    for (idx, v) in spec.values.iter().enumerate() {
        let r = v.norm();
        if r > tol && (r - 1.0).abs() > tol {
            indicator = false;
        }
        if r <= tol {
            continue;
        }
        coset_count += 1;
        let digits = window.digits(idx);
        per_residue[digits[0] as usize] += 1;
        // Slot k holds position k - 1, so a top nonzero slot k puts the coset in
        // G_k^⊥ ∖ G_{k-1}^⊥, which is shell l = k.
        if let Some(top) = digits.iter().rposition(|&d| d != 0) {
            if top < shells.len() {
                shells[top] = true;
            }
        }
    }
    let contains_origin = spec.values.first().is_some_and(|v| v.norm() > tol);
    ElementaryReport {
        m,
        indicator,
        coset_count,
        xi_tiling: coset_count == p && per_residue.iter().all(|&c| c == 1),
        contains_origin,
        shells,
    }
}

/// For each `α₋₁`: `Σ_{α₀…α_{M-1}} |φ̂(…)|²`, which must equal 1 for orthonormal shifts.
pub fn check_orthonormality_spectral(spec: &SpectrumTable) -> DeviationReport {
    let p = spec.p.as_usize();
    let mut sums = vec![0.0; p];
    for (idx, v) in spec.values.iter().enumerate() {
        sums[idx % p] += v.norm_sqr();
    }
    DeviationReport::from_sums(sums, 1.0)
}

/// `G[h, h'] = ∫ f(x ∸ h) · conj(g(x ∸ h')) dμ(x)` over a set of shifts.
///
/// Translates of `f` live on cosets of `G_{f.lo}` and translates of `g` on cosets of
/// `G_{g.lo}`; when those cosets are disjoint the entry is exactly zero. Otherwise the sum
/// runs over every cell of the intersection at the finer of the two resolutions.
pub fn gram_matrix(
    f: &StepFunction,
    g: &StepFunction,
    shifts: &[DigitVector],
    limits: &Limits,
) -> Result<DMatrix<Complex64>> {
    if f.p != g.p {
        return Err(Error::ModulusMismatch(f.p.get(), g.p.get()));
    }
    let p = f.p.get();
    let pu = p as usize;
    for h in shifts {
        if h.modulus() != f.p {
            return Err(Error::ModulusMismatch(h.modulus().get(), p));
        }
    }
    let res = f.hi.max(g.hi);
    let coarse = f.lo.min(g.lo);
    let fine = f.lo.max(g.lo);
    let low = shifts.iter().filter_map(|h| h.support().map(|(s, _)| s)).min().unwrap_or(coarse).min(coarse);
    let n = shifts.len();
    // Pairs are scanned once; integration runs once per distinct difference, and the
    // differences of intersecting pairs only have digits in [coarse, 0).
    limits.check_count((n as u128) * (n as u128))?;
    limits.check_count((pu as u128).pow((-coarse).max(0) as u32) * (pu as u128).pow((res - fine) as u32))?;

    // Digits of each shift over [low, res).
    let width = (res - low) as usize;
    let digits: Vec<Vec<u32>> =
        shifts.iter().map(|h| (low..res).map(|pos| h.digit(pos)).collect()).collect();
    let cells = pu.pow((res - fine) as u32);
    let scale = (p as f64).powi(-res);
    let fw = f.window();
    let gw = g.window();
    let mut out = DMatrix::from_element(n, n, ZERO);
    let mut x = vec![0u32; width];
    let mut seen: HashMap<Vec<u32>, Complex64> = HashMap::new();
    for a in 0..n {
        for b in 0..n {
            let (ha, hb) = (&digits[a], &digits[b]);
            // Cosets intersect iff the shifts agree below `coarse`.
            if (0..(coarse - low) as usize).any(|k| ha[k] != hb[k]) {
                continue;
            }
            // The entry depends only on h ∸ h' (the measure is translation invariant), so
            // each distinct difference is integrated once.
            let diff: Vec<u32> = ha.iter().zip(hb).map(|(x, y)| (x + p - y) % p).collect();
            if let Some(v) = seen.get(&diff) {
                out[(a, b)] = *v;
                continue;
            }
            // Intersection is the smaller coset: fixed digits below `fine` from its shift.
            let anchor = if f.lo >= g.lo { ha } else { hb };
            x[..(fine - low) as usize].copy_from_slice(&anchor[..(fine - low) as usize]);
            let mut acc = ZERO;
            for t in 0..cells {
                let mut rest = t;
                for slot in x.iter_mut().skip((fine - low) as usize) {
                    *slot = (rest % pu) as u32;
                    rest /= pu;
                }
                let fv = lookup(f, &fw, &x, ha, low, p);
                if fv == ZERO {
                    continue;
                }
                let gv = lookup(g, &gw, &x, hb, low, p);
                acc += fv * gv.conj();
            }
            out[(a, b)] = acc * scale;
            seen.insert(diff, acc * scale);
        }
    }
    Ok(out)
}

/// `f(x ∸ h)` for digit arrays over `[low, …)`.
#[inline]
fn lookup(f: &StepFunction, w: &Window, x: &[u32], h: &[u32], low: i32, p: u32) -> Complex64 {
    let mut idx = 0usize;
    for pos in low..f.hi {
        let k = (pos - low) as usize;
        let d = (x[k] + p - h[k]) % p;
        if pos < f.lo {
            if d != 0 {
                return ZERO;
            }
        } else {
            idx += d as usize * w.place(pos);
        }
    }
    f.values[idx]
}

/// Largest entry-wise distance from the identity.
pub fn identity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::h0_shifts;
    use crate::mask::EdgePhases;

    fn p(n: u64) -> Modulus {
        Modulus::new(n).unwrap()
    }

    fn build(parent: &[usize]) -> (RootedTree, MaskTable, SpectrumTable) {
        let t = RootedTree::validate(parent, parent.len()).unwrap();
        let m = MaskTable::from_tree(&t, &EdgePhases::new()).unwrap();
        let s = phi_hat_from_tree(&t, &m, &Limits::default()).unwrap();
        (t, m, s)
    }

    /// Direct `O(N²)` inversion sum.
    fn naive_inverse(spec: &SpectrumTable) -> Vec<Complex64> {
        let w = spec.window();
        let pp = spec.modulus().get();
        (0..w.count())
            .map(|xi| {
                let x = w.digits(xi);
                let s: Complex64 = (0..w.count())
                    .map(|ai| {
                        let a = w.digits(ai);
                        let e: u64 = a.iter().zip(&x).map(|(&u, &v)| (u * v) as u64).sum();
                        spec.values()[ai] * root_of_unity(pp, e)
                    })
                    .sum();
                s * (pp as f64).powi(spec.lo())
            })
            .collect()
    }

    #[test]
    fn star_spectrum_is_indicator() {
        for n in [2usize, 3, 5, 7] {
            let (_, _, s) = build(&vec![0; n]);
            assert_eq!(s.hi(), 0);
            assert!(s.values().iter().all(|&v| v == ONE));
            let phi = inverse_transform(&s);
            // 𝟏_{G₀}: one on the cell a₋₁ = 0, zero elsewhere.
            for (k, v) in phi.values().iter().enumerate() {
                let want = if k == 0 { ONE } else { ZERO };
                assert!((v - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_spectrum() {
        let (_, _, s) = build(&[0, 0, 1]);
        assert_eq!((s.lo(), s.hi()), (-1, 1));
        let w = s.window();
        let support: Vec<usize> = [[0, 0], [1, 0], [2, 1]].iter().map(|d| w.index(d)).collect();
        for (k, v) in s.values().iter().enumerate() {
            if support.contains(&k) {
                assert_eq!(*v, ONE);
            } else {
                assert_eq!(*v, ZERO);
            }
        }
    }

    #[test]
    fn chain_phi_closed_form() {
        let (_, _, s) = build(&[0, 0, 1]);
        let phi = inverse_transform(&s);
        let w = phi.window();
        for k in 0..w.count() {
            let d = w.digits(k);
            let (a1, a0) = (d[0] as u64, d[1] as u64);
            let want = (ONE + root_of_unity(3, a1) + root_of_unity(3, 2 * a1 + a0)) / 3.0;
            assert!((phi.values()[k] - want).norm() < 1e-12);
        }
        assert!((phi.values()[0] - ONE).norm() < 1e-12);
        assert!(phi.values()[1].norm() < 1e-12);
    }

    #[test]
    fn figure_two_leaf_entry() {
        let (_, mask, s) = build(&[0, 3, 3, 0, 5, 0, 2]);
        let want = mask.lambda()[20] * mask.lambda()[23] * mask.lambda()[3];
        let chi = DigitVector::character(p(7), &[(-1, 6), (0, 2), (1, 3)]).unwrap();
        assert_eq!(s.value_at(&chi), want);
        assert_eq!(want, ONE);
    }

    #[test]
    fn fast_transform_matches_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (pp, lo, hi) in [(2u64, -1, 2), (3, -1, 1), (5, -1, 2), (7, -2, 0)] {
            let w = Window::new(pp as u32, lo, hi).unwrap();
            let vals: Vec<Complex64> =
                (0..w.count()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let spec = SpectrumTable::new(p(pp), lo, hi, vals).unwrap();
            let fast = inverse_transform(&spec);
            let slow = naive_inverse(&spec);
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
            let back = forward_transform(&fast);
            for (a, b) in back.values().iter().zip(spec.values()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn plancherel_for_phi() {
        for parent in [vec![0, 0, 1], vec![0, 3, 3, 0, 5, 0, 2], vec![0, 0, 1, 2, 3]] {
            let (_, _, s) = build(&parent);
            let phi = inverse_transform(&s);
            assert!((phi.norm_sq() - s.norm_sq()).abs() < 1e-12);
            assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn literal_product_matches_path_product() {
        for parent in [vec![0, 0, 0], vec![0, 0, 1], vec![0, 2, 0], vec![0, 3, 3, 0, 5, 0, 4]] {
            let (t, mask, s) = build(&parent);
            let lit = phi_hat_from_mask(&mask, t.support_exponent(), &Limits::default()).unwrap();
            assert_eq!(lit, s);
        }
    }

    #[test]
    fn elementary_examples() {
        let (_, _, chain) = build(&[0, 0, 1]);
        let r = check_elementary(&chain, 1e-10);
        assert!(r.passed(), "{:?}", r.failure());
        assert_eq!(r.shells, vec![true, true]);

        let (_, _, star) = build(&[0, 0, 0]);
        let r = check_elementary(&star, 1e-10);
        assert!(r.passed());
        assert_eq!(r.m, 0);

        // Two support cosets sharing α₋₁ = 1.
        let mut vals = chain.values().to_vec();
        let w = chain.window();
        vals[w.index(&[1, 0])] = ZERO;
        vals[w.index(&[1, 1])] = ONE;
        vals[w.index(&[2, 1])] = ZERO;
        vals[w.index(&[1, 2])] = ONE;
        let bad = SpectrumTable::new(p(3), -1, 1, vals).unwrap();
        let r = check_elementary(&bad, 1e-10);
        assert!(!r.xi_tiling);
        assert!(r.failure().unwrap().contains("condition 1"));
    }

    #[test]
    fn elementary_shell_failure() {
        // Support (0,0),(1,0),(2,0) inside a table claiming M = 1: shell 1 is empty.
        let w = Window::new(3, -1, 1).unwrap();
        let mut vals = vec![ZERO; 9];
        for d in [[0, 0], [1, 0], [2, 0]] {
            vals[w.index(&d)] = ONE;
        }
        let r = check_elementary(&SpectrumTable::new(p(3), -1, 1, vals).unwrap(), 1e-10);
        assert_eq!(r.shells, vec![true, false]);
        assert!(r.failure().unwrap().contains("condition 2"));
    }

    #[test]
    fn spectral_orthonormality_examples() {
        let (_, _, chain) = build(&[0, 0, 1]);
        let r = check_orthonormality_spectral(&chain);
        assert_eq!(r.sums, vec![1.0; 3]);

        let mut vals = chain.values().to_vec();
        vals[0] = ZERO;
        let r = check_orthonormality_spectral(&SpectrumTable::new(p(3), -1, 1, vals).unwrap());
        assert_eq!(r.sums[0], 0.0);
        assert!(!r.passed(1e-12));

        let mut vals = chain.values().to_vec();
        vals[Window::new(3, -1, 1).unwrap().index(&[1, 1])] = ONE;
        let r = check_orthonormality_spectral(&SpectrumTable::new(p(3), -1, 1, vals).unwrap());
        assert_eq!(r.sums[1], 2.0);
    }

    #[test]
    fn gram_identity_for_star_and_chain() {
        let limits = Limits::default();
        for parent in [vec![0, 0, 0], vec![0, 0, 1]] {
            let (_, _, s) = build(&parent);
            let phi = inverse_transform(&s);
            let shifts = h0_shifts(p(3), 2);
            let gram = gram_matrix(&phi, &phi, &shifts, &limits).unwrap();
            assert_eq!(gram.nrows(), 9);
            assert!(identity_deviation(&gram) < 1e-12);
        }
    }

    #[test]
    fn gram_agrees_with_inner_products() {
        let limits = Limits::default();
        let (_, _, s) = build(&[0, 0, 1]);
        let phi = inverse_transform(&s);
        let shifts = h0_shifts(p(3), 2);
        let gram = gram_matrix(&phi, &phi, &shifts, &limits).unwrap();
        for (a, ha) in shifts.iter().enumerate() {
            for (b, hb) in shifts.iter().enumerate() {
                let direct = phi.translate(ha).unwrap().inner(&phi.translate(hb).unwrap()).unwrap();
                assert!((gram[(a, b)] - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dilate_translate_matches_pointwise() {
        let (_, _, s) = build(&[0, 0, 1]);
        let phi = inverse_transform(&s);
        let pp = p(3);
        let h = DigitVector::point(pp, &[(-1, 2), (-2, 1)]).unwrap();
        let f = phi.dilate_translate(1, &h).unwrap();
        let w = f.window();
        for idx in 0..w.count() as u64 {
            let x = DigitVector::digits_of(idx, pp, Tag::Point, w.lo, w.hi).unwrap();
            let y = x.dilate(1).sub(&h).unwrap();
            assert_eq!(f.values()[idx as usize], phi.value_at(&y));
        }
    }

    #[test]
    fn table_length_checked() {
        assert_eq!(
            StepFunction::new(p(3), -1, 1, vec![ZERO; 4]).unwrap_err(),
            Error::TableLength { got: 4, expected: 9 }
        );
    }
}
