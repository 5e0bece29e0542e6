//! Multi-level analysis and synthesis over a tree-generated wavelet system.
//!
//! Coefficients of `V_n` are indexed by shifts `h ∈ H₀` against the basis
//! `p^{n/2} φ(𝒜ⁿx ∸ h)`. Shifts are stored by [`shift_key`](crate::group::shift_key), with
//! the digit at position `-1` least significant, so `𝒜g` has key `p·key(g)` and adding
//! `h ∈ H₀^{(2)}` touches only the two lowest key digits.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{shift_from_key, DigitVector, Limits, Modulus, Window};
use crate::refinable::StepFunction;
use crate::wavelet::WaveletSystem;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sparse coefficients `c_{n,h}` at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffGrid {
    pub p: Modulus,
    pub level: i32,
    pub entries: BTreeMap<u64, Complex64>,
}

impl CoeffGrid {
    pub fn new(p: Modulus, level: i32) -> Self {
        CoeffGrid { p, level, entries: BTreeMap::new() }
    }

    /// Direct coefficient ingestion: entries keyed by shift.
    pub fn from_shifts(p: Modulus, level: i32, coeffs: &[(DigitVector, Complex64)]) -> Result<Self> {
        let mut grid = CoeffGrid::new(p, level);
        for (h, c) in coeffs {
            if h.modulus() != p {
                return Err(Error::ModulusMismatch(h.modulus().get(), p.get()));
            }
            *grid.entries.entry(crate::group::shift_key(h)?).or_insert(ZERO) += c;
        }
        Ok(grid)
    }

    pub fn get(&self, key: u64) -> Complex64 {
        self.entries.get(&key).copied().unwrap_or(ZERO)
    }

    pub fn shift(&self, key: u64) -> DigitVector {
        shift_from_key(self.p, key)
    }

    pub fn energy(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    /// Number of shift digits needed to hold every key.
    pub fn key_width(&self) -> u32 {
        let p = self.p.get() as u64;
        let mut width = 0;
        let max = self.entries.keys().next_back().copied().unwrap_or(0);
        let mut span = 1u64;
        while span <= max {
            span = span.saturating_mul(p);
            width += 1;
        }
        width
    }

    /// `max_h |c_h - c'_h|` over the union of keys.
    pub fn max_abs_diff(&self, other: &CoeffGrid) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.entries {
            worst = worst.max((v - other.get(*k)).norm());
        }
        for (k, v) in &other.entries {
            if !self.entries.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    fn add(&mut self, key: u64, value: Complex64) {
        *self.entries.entry(key).or_insert(ZERO) += value;
    }
}

/// Approximation at the coarsest level plus detail bands for every level up to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPyramid {
    pub approx: CoeffGrid,
    /// `details[i][l - 1]` is `d^{(l)}` at level `approx.level + i`.
    pub details: Vec<Vec<CoeffGrid>>,
}

impl CoeffPyramid {
    pub fn energy(&self) -> f64 {
        self.approx.energy() + self.details.iter().flatten().map(CoeffGrid::energy).sum::<f64>()
    }

    /// Level of the grid this pyramid decomposes.
    pub fn top_level(&self) -> i32 {
        self.approx.level + self.details.len() as i32
    }
}

/// The analysis/synthesis filters `β`, `β^{(l)}`, each of length `p²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub p: Modulus,
    pub beta: Vec<Complex64>,
    pub beta_l: Vec<Vec<Complex64>>,
}

impl FilterBank {
    pub fn new(p: Modulus, beta: Vec<Complex64>, beta_l: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = p.as_usize() * p.as_usize();
        if beta.len() != n {
            return Err(Error::TableLength { got: beta.len(), expected: n });
        }
        if beta_l.len() != p.as_usize() - 1 {
            return Err(Error::BandCount { expected: p.as_usize() - 1, got: beta_l.len() });
        }
        if let Some(b) = beta_l.iter().find(|b| b.len() != n) {
            return Err(Error::TableLength { got: b.len(), expected: n });
        }
        Ok(FilterBank { p, beta, beta_l })
    }

    pub fn from_system(system: &WaveletSystem) -> Self {
        FilterBank { p: system.p, beta: system.beta.clone(), beta_l: system.beta_l.clone() }
    }

    fn filters(&self) -> impl Iterator<Item = &Vec<Complex64>> {
        std::iter::once(&self.beta).chain(self.beta_l.iter())
    }

    /// One analysis step `V_n → V_{n-1} ⊕ W_{n-1}`:
    /// `c_{n-1,g} = p^{-1/2} Σ_h conj(β_h) c_{n, 𝒜g∔h}` and likewise with `β^{(l)}`.
    pub fn analyze_level(&self, c: &CoeffGrid) -> Result<(CoeffGrid, Vec<CoeffGrid>)> {
        self.check_modulus(c.p)?;
        let p = self.p.get() as u64;
        let pu = p as usize;
        let norm = (p as f64).sqrt().recip();
        let mut outs: Vec<CoeffGrid> = (0..pu).map(|_| CoeffGrid::new(self.p, c.level - 1)).collect();
        for (&k, &value) in &c.entries {
            let k0 = k % p;
            let k1 = (k / p) % p;
            let rest = k / (p * p);
            // 𝒜g ∔ h = k: h₋₁ = k₋₁; for each h₋₂, g₋₁ = k₋₂ - h₋₂ and g's higher digits are `rest`.
            for h2 in 0..p {
                let j = (k0 + p * h2) as usize;
                let g = (k1 + p - h2) % p + p * rest;
                for (out, filter) in outs.iter_mut().zip(self.filters()) {
                    out.add(g, filter[j].conj() * value * norm);
                }
            }
        }
        let approx = outs.remove(0);
        Ok((approx, outs))
    }

    /// Adjoint of [`FilterBank::analyze_level`]:
    /// `c_{n,k} = p^{-1/2} Σ_{𝒜g∔h=k} [β_h a_g + Σ_l β_h^{(l)} d^{(l)}_g]`.
    pub fn synthesize_level(&self, approx: &CoeffGrid, details: &[CoeffGrid]) -> Result<CoeffGrid> {
        self.check_modulus(approx.p)?;
        if details.len() != self.beta_l.len() {
            return Err(Error::BandCount { expected: self.beta_l.len(), got: details.len() });
        }
        for d in details {
            self.check_modulus(d.p)?;
            if d.level != approx.level {
                return Err(Error::LevelMismatch(approx.level, d.level));
            }
        }
        let p = self.p.get() as u64;
        let norm = (p as f64).sqrt().recip();
        let mut out = CoeffGrid::new(self.p, approx.level + 1);
        let bands: Vec<&CoeffGrid> = std::iter::once(approx).chain(details.iter()).collect();
        for (band, filter) in bands.iter().zip(self.filters()) {
            for (&g, &value) in &band.entries {
                let g1 = g % p;
                let rest = g / p;
                for h2 in 0..p {
                    let k1 = (g1 + h2) % p;
                    for h1 in 0..p {
                        let j = (h1 + p * h2) as usize;
                        let k = h1 + p * k1 + p * p * rest;
                        out.add(k, filter[j] * value * norm);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `levels`-fold cascade of [`FilterBank::analyze_level`].
    pub fn analyze(&self, c: &CoeffGrid, levels: usize) -> Result<CoeffPyramid> {
        if levels == 0 {
            return Err(Error::Invalid("analysis needs at least one level".into()));
        }
        let mut approx = c.clone();
        let mut details = Vec::with_capacity(levels);
        for _ in 0..levels {
            let (a, d) = self.analyze_level(&approx)?;
            details.push(d);
            approx = a;
        }
        details.reverse();
        Ok(CoeffPyramid { approx, details })
    }

    pub fn synthesize(&self, pyramid: &CoeffPyramid) -> Result<CoeffGrid> {
        let mut approx = pyramid.approx.clone();
        for (i, d) in pyramid.details.iter().enumerate() {
            let level = pyramid.approx.level + i as i32;
            if approx.level != level {
                return Err(Error::LevelMismatch(level, approx.level));
            }
            approx = self.synthesize_level(&approx, d)?;
        }
        Ok(approx)
    }

    fn check_modulus(&self, p: Modulus) -> Result<()> {
        if p != self.p {
            return Err(Error::ModulusMismatch(p.get(), self.p.get()));
        }
        Ok(())
    }
}

/// Per-level energy bookkeeping: `‖c_n‖² = ‖c_{n-1}‖² + Σ_l ‖d^{(l)}_{n-1}‖²`.
pub fn parseval_deviations(bank: &FilterBank, c: &CoeffGrid, levels: usize) -> Result<Vec<f64>> {
    let mut approx = c.clone();
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let before = approx.energy();
        let (a, d) = bank.analyze_level(&approx)?;
        let after = a.energy() + d.iter().map(CoeffGrid::energy).sum::<f64>();
        out.push((before - after).abs());
        approx = a;
    }
    Ok(out)
}

/// `c_{J,h} = ⟨f, p^{J/2} φ(𝒜^J · ∸ h)⟩` for every `h` whose basis function meets `supp f`.
///
/// Needs `f` to resolve `G_{M+J}` cells so each inner product is an exact cell sum. For a
/// cell `x`, `φ(𝒜^J x ∸ h) ≠ 0` forces `h`'s digits at positions `≤ -2` to equal the digits
/// of `𝒜^J x` there, leaving `p` choices of `h₋₁`.
pub fn project(phi: &StepFunction, f: &StepFunction, level: i32, limits: &Limits) -> Result<CoeffGrid> {
    let p = phi.modulus();
    if f.modulus() != p {
        return Err(Error::ModulusMismatch(f.modulus().get(), p.get()));
    }
    let m = phi.resolution_level();
    let required = m + level;
    if f.resolution_level() < required {
        return Err(Error::ResolutionTooCoarse { got: f.resolution_level(), required, level });
    }
    let pu = p.as_usize();
    let w = f.window();
    limits.check_count(w.count() as u128 * pu as u128)?;
    let s = f.support_level();
    let r = f.resolution_level();
    let pw = (p.get() as f64).powf(level as f64 / 2.0);
    let cell = (p.get() as f64).powi(-r);
    let src = phi.window();
    let mut grid = CoeffGrid::new(p, level);
    // Lowest h position that can be nonzero: ν with ν + J ≥ s, i.e. ν ≥ s - J.
    let h_lo = (s - level).min(-1);
    for (idx, &fv) in f.values().iter().enumerate() {
        if fv == ZERO {
            continue;
        }
        let x = w.digits(idx);
        let xd = |pos: i32| -> u32 {
            if pos < s || pos >= r {
                0
            } else {
                x[(pos - s) as usize]
            }
        };
        // Key of the part of h at positions ≤ -2.
        let mut upper = 0u64;
        for pos in h_lo..=-2 {
            upper = upper * p.get() as u64 + xd(pos + level) as u64;
        }
        let phi_upper: usize = (0..m).map(|nu| xd(nu + level) as usize * src.place(nu)).sum();
        let y_top = xd(level - 1);
        for h1 in 0..pu {
            let y_m1 = (y_top as usize + pu - h1) % pu;
            let v = phi.values()[y_m1 + phi_upper];
            if v == ZERO {
                continue;
            }
            let key = h1 as u64 + p.get() as u64 * upper;
            grid.add(key, fv * (v * pw).conj() * cell);
        }
    }
    Ok(grid)
}

/// `f = Σ_h c_{J,h} p^{J/2} φ(𝒜^J x ∸ h)`, tabulated on `[lo, M + J)` where `lo` is low
/// enough to hold every translate.
pub fn reconstruct(phi: &StepFunction, grid: &CoeffGrid) -> Result<StepFunction> {
    let p = phi.modulus();
    if grid.p != p {
        return Err(Error::ModulusMismatch(grid.p.get(), p.get()));
    }
    let level = grid.level;
    let m = phi.resolution_level();
    let width = grid.key_width().max(1) as i32;
    // 𝒜^{-J}h has its lowest digit at -width + J; the basis support is G_{J-1}.
    let lo = (level - width).min(level - 1);
    let hi = m + level;
    let w = Window::new(p.get(), lo, hi)?;
    let pu = p.as_usize();
    let pw = (p.get() as f64).powf(level as f64 / 2.0);
    let src = phi.window();
    let mut values = vec![ZERO; w.count()];
    for (idx, slot) in values.iter_mut().enumerate() {
        let x = w.digits(idx);
        let xd = |pos: i32| -> u32 {
            if pos < lo || pos >= hi {
                0
            } else {
                x[(pos - lo) as usize]
            }
        };
        let mut upper = 0u64;
        for pos in (lo - level)..=-2 {
            upper = upper * p.get() as u64 + xd(pos + level) as u64;
        }
        let phi_upper: usize = (0..m).map(|nu| xd(nu + level) as usize * src.place(nu)).sum();
        let y_top = xd(level - 1) as usize;
        let mut acc = ZERO;
        for h1 in 0..pu {
            let c = grid.get(h1 as u64 + p.get() as u64 * upper);
            if c == ZERO {
                continue;
            }
            acc += c * phi.values()[(y_top + pu - h1) % pu + phi_upper] * pw;
        }
        *slot = acc;
    }
    StepFunction::new(p, lo, hi, values)
}
