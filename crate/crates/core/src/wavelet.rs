//! Refinement coefficients and the wavelets `ψ₁, …, ψ_{p-1}`.
//!
//! Shifts of `H₀^{(2)}` are indexed `j = a₋₁ + p·a₋₂` for `h_j = a₋₁g₋₁ ∔ a₋₂g₋₂`, and mask
//! cosets `k = α₋₁ + p·α₀`. Then `(χ_k, 𝒜^{-1}h_j) = ω^{α₋₁a₋₂ + α₀a₋₁}` and the mask is
//! `m₀(χ_k) = p⁻¹ Σ_j β_j conj((χ_k, 𝒜^{-1}h_j))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{root_of_unity, Limits, Modulus, Window};
use crate::mask::{check_wavelet_index, EdgePhases, MaskTable};
use crate::refinable::{flush_roundoff, inverse_transform, phi_hat_from_tree, SpectrumTable, StepFunction};
use crate::tree::RootedTree;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the refinement coefficients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaMethod {
    /// Closed-form adjoint of the unitary character matrix.
    #[default]
    Adjoint,
    /// Dense LU solve of the same linear system.
    DenseSolve,
}

/// `(χ_k, 𝒜^{-1}h_j)` exponent `α₋₁a₋₂ + α₀a₋₁`.
#[inline]
fn exponent(p: usize, k: usize, j: usize) -> u64 {
    let (alpha_m1, alpha_0) = (k % p, k / p);
    let (a_m1, a_m2) = (j % p, j / p);
    (alpha_m1 * a_m2 + alpha_0 * a_m1) as u64
}

/// `β_j = p⁻¹ Σ_k m₀(χ_k) (χ_k, 𝒜^{-1}h_j)`.
pub fn solve_beta(mask: &MaskTable) -> Vec<Complex64> {
    let p = mask.modulus().get();
    let pu = p as usize;
    let n = pu * pu;
    let lambda = mask.lambda();
    let mut beta: Vec<Complex64> = (0..n)
        .map(|j| {
            let s: Complex64 = (0..n)
                .filter(|&k| lambda[k] != ZERO)
                .map(|k| lambda[k] * root_of_unity(p, exponent(pu, k, j)))
                .sum();
            s / p as f64
        })
        .collect();
    flush_roundoff(&mut beta);
    beta
}

/// The matrix `U[k, j] = p⁻¹ conj((χ_k, 𝒜^{-1}h_j))` mapping `β` to the mask values.
pub fn character_matrix(p: Modulus) -> DMatrix<Complex64> {
    let pu = p.as_usize();
    let n = pu * pu;
    DMatrix::from_fn(n, n, |k, j| root_of_unity(p.get(), exponent(pu, k, j)).conj() / p.get() as f64)
}

/// Solves `U β = λ` by LU decomposition.
pub fn solve_beta_dense(mask: &MaskTable) -> Result<Vec<Complex64>> {
    let u = character_matrix(mask.modulus());
    let rhs = DVector::from_column_slice(mask.lambda());
    u.lu()
        .solve(&rhs)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Invalid("character matrix is singular".into()))
}

pub fn solve_beta_with(mask: &MaskTable, method: BetaMethod) -> Result<Vec<Complex64>> {
    match method {
        BetaMethod::Adjoint => Ok(solve_beta(mask)),
        BetaMethod::DenseSolve => solve_beta_dense(mask),
    }
}

/// `max_k |m₀(χ_k) - p⁻¹ Σ_j β_j conj((χ_k, 𝒜^{-1}h_j))|`.
pub fn beta_residual(mask: &MaskTable, beta: &[Complex64]) -> Result<f64> {
    let p = mask.modulus().get();
    let pu = p as usize;
    let n = pu * pu;
    if beta.len() != n {
        return Err(Error::TableLength { got: beta.len(), expected: n });
    }
    let worst = (0..n)
        .map(|k| {
            let s: Complex64 = (0..n).map(|j| beta[j] * root_of_unity(p, exponent(pu, k, j)).conj()).sum();
            (mask.lambda()[k] - s / p as f64).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

/// `β_j^{(l)} = β_j (r₀^l, 𝒜^{-1}h_j) = β_j ω^{l·a₋₁}`.
pub fn beta_shifted(beta: &[Complex64], p: Modulus, l: usize) -> Result<Vec<Complex64>> {
    let pu = p.as_usize();
    check_wavelet_index(l, pu)?;
    if beta.len() != pu * pu {
        return Err(Error::TableLength { got: beta.len(), expected: pu * pu });
    }
    Ok(beta
        .iter()
        .enumerate()
        .map(|(j, b)| b * root_of_unity(p.get(), (l * (j % pu)) as u64))
        .collect())
}

/// `x ↦ Σ_{h ∈ H₀^{(2)}} c_h φ(𝒜x ∸ h)` on the window `[φ.lo, φ.hi + 1)`.
///
/// With `φ` supported in `G₋₁`, the term for `h` is nonzero only where the digit of `𝒜x` at
/// `-2` (that is, `x₋₁`) equals `a₋₂(h)`. Each cell therefore receives `p` translates.
pub fn refinement_sum(coeffs: &[Complex64], phi: &StepFunction) -> Result<StepFunction> {
    let p = phi.modulus();
    let pu = p.as_usize();
    if coeffs.len() != pu * pu {
        return Err(Error::TableLength { got: coeffs.len(), expected: pu * pu });
    }
    if phi.support_level() != -1 {
        return Err(Error::Invalid(format!("refinable function must be supported in G_-1, got G_{}", phi.support_level())));
    }
    let out = Window::new(p.get(), -1, phi.resolution_level() + 1)?;
    let src = phi.window();
    let mut values = vec![ZERO; out.count()];
    for (idx, slot) in values.iter_mut().enumerate() {
        // x digits at positions -1 .. hi; 𝒜x has x_{ν+1} at position ν.
        let x = out.digits(idx);
        let a_m2 = x[0] as usize;
        let mut acc = ZERO;
        for a_m1 in 0..pu {
            let c = coeffs[a_m1 + pu * a_m2];
            if c == ZERO {
                continue;
            }
            // y = 𝒜x ∸ h on [-1, hi): y₋₁ = x₀ - a₋₁, y_ν = x_{ν+1} for ν ≥ 0.
            let y_m1 = (x[1] as usize + pu - a_m1) % pu;
            let src_idx = y_m1 + pu * src.index(&x[2..]);
            acc += c * phi.values()[src_idx];
        }
        *slot = acc;
    }
    StepFunction::new(p, -1, phi.resolution_level() + 1, values)
}

/// `ψ_l(x) = Σ_h β_h^{(l)} φ(𝒜x ∸ h)`, on `[-1, M + 1)`.
pub fn psi_time(phi: &StepFunction, beta: &[Complex64], l: usize) -> Result<StepFunction> {
    let shifted = beta_shifted(beta, phi.modulus(), l)?;
    refinement_sum(&shifted, phi)
}

/// `ψ̂_l(χ) = m_l(χ) φ̂(χ𝒜^{-1})` on the character window `[-1, M + 1)`.
pub fn psi_hat(mask: &MaskTable, phi_hat: &SpectrumTable, l: usize) -> Result<SpectrumTable> {
    let p = mask.modulus();
    let pu = p.as_usize();
    check_wavelet_index(l, pu)?;
    if phi_hat.lo() != -1 {
        return Err(Error::Invalid(format!("spectrum must start at G_-1^perp cosets, got {}", phi_hat.lo())));
    }
    let out = Window::new(p.get(), -1, phi_hat.hi() + 1)?;
    let src = phi_hat.window();
    let mut values = Vec::with_capacity(out.count());
    for idx in 0..out.count() {
        let d = out.digits(idx);
        let a0 = (d[1] as usize + pu - l % pu) % pu;
        let m_l = mask.lambda()[d[0] as usize + pu * a0];
        // χ𝒜^{-1} modulo G₋₁^⊥ keeps the digits at positions 0 .. M, now at -1 .. M-1.
        let shifted = phi_hat.values()[src.index(&d[1..])];
        values.push(m_l * shifted);
    }
    SpectrumTable::new(p, -1, phi_hat.hi() + 1, values)
}

/// `ψ_l` obtained by inverting `ψ̂_l`.
pub fn psi_freq(mask: &MaskTable, phi_hat: &SpectrumTable, l: usize) -> Result<StepFunction> {
    Ok(inverse_transform(&psi_hat(mask, phi_hat, l)?))
}

/// Largest cell discrepancy in `φ(x) = Σ_h β_h φ(𝒜x ∸ h)`.
pub fn refinement_residual(phi: &StepFunction, beta: &[Complex64]) -> Result<f64> {
    refinement_sum(beta, phi)?.max_abs_diff(phi)
}

/// A tree-generated orthogonal wavelet system with every intermediate table.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSystem {
    pub p: Modulus,
    pub m: usize,
    pub tree: RootedTree,
    pub phases: EdgePhases,
    pub mask: MaskTable,
    pub beta: Vec<Complex64>,
    /// `beta_l[l - 1]` holds `β^{(l)}`.
    pub beta_l: Vec<Vec<Complex64>>,
    pub phi: StepFunction,
    /// `psi[l - 1]` holds `ψ_l`, built from `β^{(l)}` in the time domain.
    pub psi: Vec<StepFunction>,
    pub phi_hat: SpectrumTable,
}

impl WaveletSystem {
    pub fn build(tree: &RootedTree, phases: &EdgePhases, limits: &Limits) -> Result<Self> {
        Self::build_with(tree, phases, limits, BetaMethod::Adjoint)
    }

    pub fn build_with(tree: &RootedTree, phases: &EdgePhases, limits: &Limits, method: BetaMethod) -> Result<Self> {
        let p = Modulus::new(tree.p() as u64)?;
        let m = tree.support_exponent();
        // ψ tables are the largest: p^{M+2} cells.
        limits.check(p.get(), m as u32 + 2)?;
        let mask = MaskTable::from_tree(tree, phases)?;
        let phi_hat = phi_hat_from_tree(tree, &mask, limits)?;
        let phi = inverse_transform(&phi_hat);
        let beta = solve_beta_with(&mask, method)?;
        Self::assemble(p, m, tree.clone(), phases.clone(), mask, beta, phi, phi_hat)
    }

    /// Derives `β^{(l)}` and `ψ_l` from the given parts without validating them.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        p: Modulus,
        m: usize,
        tree: RootedTree,
        phases: EdgePhases,
        mask: MaskTable,
        beta: Vec<Complex64>,
        phi: StepFunction,
        phi_hat: SpectrumTable,
    ) -> Result<Self> {
        let pu = p.as_usize();
        let beta_l = (1..pu).map(|l| beta_shifted(&beta, p, l)).collect::<Result<Vec<_>>>()?;
        let psi = beta_l.iter().map(|b| refinement_sum(b, &phi)).collect::<Result<Vec<_>>>()?;
        Ok(WaveletSystem { p, m, tree, phases, mask, beta, beta_l, phi, psi, phi_hat })
    }

    /// Replaces `β` and rebuilds everything derived from it.
    pub fn with_beta(&self, beta: Vec<Complex64>) -> Result<Self> {
        Self::assemble(
            self.p,
            self.m,
            self.tree.clone(),
            self.phases.clone(),
            self.mask.clone(),
            beta,
            self.phi.clone(),
            self.phi_hat.clone(),
        )
    }

    pub fn wavelet_count(&self) -> usize {
        self.p.as_usize() - 1
    }

    pub fn psi(&self, l: usize) -> Result<&StepFunction> {
        check_wavelet_index(l, self.p.as_usize())?;
        Ok(&self.psi[l - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DigitVector;
    use crate::Tag;

    fn system(parent: &[usize]) -> WaveletSystem {
        let t = RootedTree::validate(parent, parent.len()).unwrap();
        WaveletSystem::build(&t, &EdgePhases::new(), &Limits::default()).unwrap()
    }

    fn omega3(k: u64) -> Complex64 {
        root_of_unity(3, k)
    }

    #[test]
    fn star_beta() {
        for n in [2usize, 3, 5, 7] {
            let s = system(&vec![0; n]);
            for (j, b) in s.beta.iter().enumerate() {
                let want = if j < n { 1.0 } else { 0.0 };
                assert!((b - Complex64::new(want, 0.0)).norm() < 1e-12, "p={n} j={j} b={b}");
            }
        }
    }

    #[test]
    fn chain_beta_closed_form() {
        let s = system(&[0, 0, 1]);
        for (j, b) in s.beta.iter().enumerate() {
            let (a1, a2) = ((j % 3) as u64, (j / 3) as u64);
            let want = (Complex64::new(1.0, 0.0) + omega3(a2) + omega3(2 * a2 + a1)) / 3.0;
            assert!((b - want).norm() < 1e-12);
        }
        assert!((s.beta[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(s.beta[3].norm() < 1e-12);
        assert!((s.beta[1] - (Complex64::new(2.0, 0.0) + omega3(1)) / 3.0).norm() < 1e-12);
    }

    #[test]
    fn dense_solve_agrees() {
        for parent in [vec![0, 0, 1], vec![0, 3, 3, 0, 5, 0, 2]] {
            let s = system(&parent);
            let dense = solve_beta_dense(&s.mask).unwrap();
            for (a, b) in dense.iter().zip(&s.beta) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn character_matrix_is_unitary() {
        for n in [2u64, 3, 5] {
            let u = character_matrix(Modulus::new(n).unwrap());
            let g = u.adjoint() * &u;
            assert!(crate::refinable::identity_deviation(&g) < 1e-12);
        }
    }

    #[test]
    fn residual_and_energy() {
        let s = system(&[0, 3, 3, 0, 5, 0, 2]);
        assert!(beta_residual(&s.mask, &s.beta).unwrap() < 1e-12);
        let energy: f64 = s.beta.iter().map(|b| b.norm_sqr()).sum();
        assert!((energy - 7.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_beta_examples() {
        let s = system(&[0, 0, 0]);
        let b1 = beta_shifted(&s.beta, s.p, 1).unwrap();
        let want = [omega3(0), omega3(1), omega3(2)];
        for j in 0..9 {
            let w = if j < 3 { want[j] } else { Complex64::new(0.0, 0.0) };
            assert!((b1[j] - w).norm() < 1e-12);
        }
        let c = system(&[0, 0, 1]);
        for l in 1..3 {
            let bl = beta_shifted(&c.beta, c.p, l).unwrap();
            // a₋₁ = 0 entries are untouched.
            for j in (0..9).step_by(3) {
                assert_eq!(bl[j], c.beta[j]);
            }
            let e0: f64 = c.beta.iter().map(|b| b.norm_sqr()).sum();
            let el: f64 = bl.iter().map(|b| b.norm_sqr()).sum();
            assert!((e0 - el).abs() < 1e-12);
        }
        assert_eq!(beta_shifted(&c.beta, c.p, 0), Err(Error::WaveletIndex { l: 0, max: 2 }));
    }

    #[test]
    fn haar_wavelet() {
        let s = system(&[0, 0, 0]);
        let psi = s.psi(1).unwrap();
        assert_eq!((psi.support_level(), psi.resolution_level()), (-1, 1));
        let pp = s.p;
        for idx in 0..9u64 {
            let x = DigitVector::digits_of(idx, pp, Tag::Point, -1, 1).unwrap();
            let want = if x.digit(-1) == 0 { omega3(x.digit(0) as u64) } else { Complex64::new(0.0, 0.0) };
            assert!((psi.value_at(&x) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn two_routes_agree_on_star() {
        let s = system(&[0, 0, 0]);
        let freq = psi_freq(&s.mask, &s.phi_hat, 1).unwrap();
        assert!(freq.max_abs_diff(&s.psi[0]).unwrap() < 1e-12);
    }

    #[test]
    fn two_routes_agree_on_figure_tree() {
        let s = system(&[0, 3, 3, 0, 5, 0, 2]);
        for l in 1..7 {
            let freq = psi_freq(&s.mask, &s.phi_hat, l).unwrap();
            assert!(freq.max_abs_diff(s.psi(l).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn psi_hat_support_disjoint_from_phi_hat() {
        let s = system(&[0, 0, 1]);
        let h = psi_hat(&s.mask, &s.phi_hat, 1).unwrap();
        let w = h.window();
        for (idx, v) in h.values().iter().enumerate() {
            if v.norm() == 0.0 {
                continue;
            }
            // Not in E: φ̂ vanishes on this coset (φ̂ lives on [-1, M), so the top digit
            // must be zero for membership).
            let d = w.digits(idx);
            let in_e = *d.last().unwrap() == 0 && s.phi_hat.values()[s.phi_hat.window().index(&d[..d.len() - 1])].norm() > 0.0;
            assert!(!in_e);
        }
    }

    #[test]
    fn refinement_identity() {
        for parent in [vec![0, 0, 0], vec![0, 0, 1], vec![0, 3, 3, 0, 5, 0, 4]] {
            let s = system(&parent);
            assert!(refinement_residual(&s.phi, &s.beta).unwrap() < 1e-12);
        }
    }

    #[test]
    fn psi_norms() {
        let s = system(&[0, 0, 1, 2, 0]);
        for l in 1..5 {
            assert!((s.psi(l).unwrap().norm_sq() - 1.0).abs() < 1e-12);
            assert!(s.psi(l).unwrap().inner(&s.phi).unwrap().norm() < 1e-12);
        }
    }
}
