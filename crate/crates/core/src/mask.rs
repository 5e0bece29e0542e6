//! The 1-elementary mask `m₀` generated by a rooted tree.
//!
//! `m₀` is constant on cosets of `G₋₁^⊥` and periodic under every `r_s^{α}` with `s ≥ 1`, so
//! it is a table of `p²` values `λ_{i+pj}` indexed by the digits `(α₋₁, α₀) = (i, j)`.
//! A tree edge `j → i` marks the nonzero entry `λ_{i+pj}`; `λ₀ = 1` marks the root.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{DigitVector, Limits, Modulus, Tag};
use crate::tree::RootedTree;

/// Edge phases in turns, keyed by `(parent, child)`.
pub type EdgePhases = BTreeMap<(usize, usize), f64>;

/// Entries with modulus below this are treated as zero when reading a mask's pattern.
pub const ZERO_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MaskTable {
    p: Modulus,
    lambda: Vec<Complex64>,
}

/// `exp(2πi · turns)`.
pub fn unit_phase(turns: f64) -> Complex64 {
    if turns == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::cis(TAU * turns)
}

/// A uniformly random phase in `[0, 1)` turns on every edge.
pub fn random_phases<R: rand::Rng + ?Sized>(tree: &RootedTree, rng: &mut R) -> EdgePhases {
    tree.edges().map(|e| (e, rng.gen::<f64>())).collect()
}

/// Validates a phase given in turns.
pub fn check_phase(turns: f64) -> Result<()> {
    if !turns.is_finite() || !(0.0..1.0).contains(&turns) {
        return Err(Error::InvalidPhase(turns));
    }
    Ok(())
}

impl MaskTable {
    /// Wraps raw values. Only the length is checked; the mask conditions are reported by
    /// [`MaskTable::check_row_condition`] and friends.
    pub fn new(p: Modulus, lambda: Vec<Complex64>) -> Result<Self> {
        let n = p.as_usize() * p.as_usize();
        if lambda.len() != n {
            return Err(Error::TableLength { got: lambda.len(), expected: n });
        }
        Ok(MaskTable { p, lambda })
    }

    /// `λ₀ = 1`, `λ_{i+pj} = exp(2πi·phase(j,i))` on edges `j → i`, zero elsewhere.
    pub fn from_tree(tree: &RootedTree, phases: &EdgePhases) -> Result<Self> {
        let p = Modulus::new(tree.p() as u64)?;
        for (&(parent, child), &turns) in phases {
            if !tree.is_edge(parent, child) {
                return Err(Error::PhaseOnNonEdge { parent, child });
            }
            check_phase(turns)?;
        }
        let n = tree.p();
        let mut lambda = vec![Complex64::new(0.0, 0.0); n * n];
        lambda[0] = Complex64::new(1.0, 0.0);
        for (j, i) in tree.edges() {
            let turns = phases.get(&(j, i)).copied().unwrap_or(0.0);
            lambda[i + n * j] = unit_phase(turns);
        }
        Ok(MaskTable { p, lambda })
    }

    pub fn modulus(&self) -> Modulus {
        self.p
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    /// `λ_{i+pj}`.
    #[inline]
    pub fn entry(&self, i: u32, j: u32) -> Complex64 {
        self.lambda[i as usize + self.p.as_usize() * j as usize]
    }

    /// Value of `m₀` at a character. Digits at positions `≥ 1` are ignored (periodicity);
    /// digits below `-1` make the value ill-defined as a table lookup and are rejected.
    pub fn eval(&self, chi: &DigitVector) -> Result<Complex64> {
        self.check_character(chi)?;
        Ok(self.entry(chi.digit(-1), chi.digit(0)))
    }

    /// `m_l(χ) = m₀(χ r₀^{-l})`.
    pub fn eval_shifted(&self, chi: &DigitVector, l: usize) -> Result<Complex64> {
        let p = self.p.get();
        check_wavelet_index(l, p as usize)?;
        self.check_character(chi)?;
        let a0 = (chi.digit(0) + p - l as u32 % p) % p;
        Ok(self.entry(chi.digit(-1), a0))
    }

    fn check_character(&self, chi: &DigitVector) -> Result<()> {
        if chi.modulus() != self.p {
            return Err(Error::ModulusMismatch(chi.modulus().get(), self.p.get()));
        }
        if chi.tag() != Tag::Character {
            return Err(Error::TagMismatch);
        }
        if let Some((lo, _)) = chi.support() {
            if lo < -1 {
                return Err(Error::BelowMaskWindow(lo));
            }
        }
        Ok(())
    }

    /// Recovers the generating tree and the edge phases.
    pub fn to_tree(&self) -> Result<(RootedTree, EdgePhases)> {
        let p = self.p.as_usize();
        for (k, v) in self.lambda.iter().enumerate() {
            let r = v.norm();
            if r > ZERO_THRESHOLD && (r - 1.0).abs() > ZERO_THRESHOLD {
                return Err(Error::MaskModulus { index: k, modulus: r });
            }
        }
        if (self.lambda[0] - Complex64::new(1.0, 0.0)).norm() > ZERO_THRESHOLD {
            return Err(Error::MaskOrigin(format!("{}", self.lambda[0])));
        }
        let mut parent = vec![0usize; p];
        let mut phases = EdgePhases::new();
        for (i, slot) in parent.iter_mut().enumerate() {
            let nonzero: Vec<usize> = (0..p).filter(|&j| self.lambda[i + p * j].norm() > ZERO_THRESHOLD).collect();
            if nonzero.len() != 1 || (i == 0 && nonzero[0] != 0) {
                return Err(Error::RowCondition { row: i, count: nonzero.len() });
            }
            let j = nonzero[0];
            *slot = j;
            if i != 0 {
                let turns = (self.lambda[i + p * j].arg() / TAU).rem_euclid(1.0);
                // rem_euclid can round up to exactly 1.0 for tiny negative angles.
                let turns = if turns >= 1.0 { 0.0 } else { turns };
                if turns != 0.0 {
                    phases.insert((j, i), turns);
                }
            }
        }
        let tree = RootedTree::validate(&parent, p)?;
        Ok((tree, phases))
    }

    /// Row sums `Σ_j |λ_{i+pj}|²` for each `i`.
    pub fn check_row_condition(&self) -> DeviationReport {
        let p = self.p.as_usize();
        let sums: Vec<f64> = (0..p).map(|i| (0..p).map(|j| self.lambda[i + p * j].norm_sqr()).sum()).collect();
        DeviationReport::from_sums(sums, 1.0)
    }

    /// Evaluates `Π_{k=0}^{M+1} m₀(χ𝒜^{-k})` on every coset of `G₋₁^⊥` in
    /// `G_{M+1}^⊥ ∖ G_M^⊥`, i.e. every digit string `(α₋₁, …, α_M)` with `α_M ≠ 0`.
    pub fn check_vanishing(&self, m: usize, limits: &Limits) -> Result<VanishingReport> {
        let p = self.p.get();
        let pu = p as usize;
        limits.check(p, m as u32 + 2)?;
        // digits[k] holds α_{k-1}; slot m+1 is α_M, slot m+2 is the zero tail.
        let mut digits = vec![0u32; m + 3];
        let mut report = VanishingReport { m, strings_checked: 0, max_abs: 0.0, worst: None };
        let prefix_count = pu.pow(m as u32 + 1);
        for top in 1..p {
            digits[m + 1] = top;
            for idx in 0..prefix_count {
                let mut rest = idx;
                for d in digits.iter_mut().take(m + 1) {
                    *d = (rest % pu) as u32;
                    rest /= pu;
                }
                let product: Complex64 = (0..=m + 1).map(|k| self.entry(digits[k], digits[k + 1])).product();
                report.strings_checked += 1;
                let a = product.norm();
                if a > report.max_abs {
                    report.max_abs = a;
                    report.worst = Some(digits[..m + 2].to_vec());
                }
            }
        }
        Ok(report)
    }
}

pub(crate) fn check_wavelet_index(l: usize, p: usize) -> Result<()> {
    if l == 0 || l >= p {
        return Err(Error::WaveletIndex { l, max: p - 1 });
    }
    Ok(())
}

/// Per-group sums compared against a target value.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub sums: Vec<f64>,
    pub max_deviation: f64,
}

impl DeviationReport {
    pub fn from_sums(sums: Vec<f64>, target: f64) -> Self {
        let max_deviation = sums.iter().map(|s| (s - target).abs()).fold(0.0, f64::max);
        DeviationReport { sums, max_deviation }
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation < tol
    }
}

/// Outcome of the exhaustive vanishing-product check.
#[derive(Debug, Clone, PartialEq)]
pub struct VanishingReport {
    pub m: usize,
    pub strings_checked: usize,
    /// Largest `|product|` seen; zero when the check passes.
    pub max_abs: f64,
    /// Digits `(α₋₁, …, α_M)` of the first string attaining `max_abs`, if nonzero.
    pub worst: Option<Vec<u32>>,
}

impl VanishingReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_abs <= tol
    }
}
