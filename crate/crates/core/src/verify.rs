//! Verification of a wavelet system by exact finite computation.
//!
//! Every check recomputes its quantity from the stored tables rather than trusting derived
//! fields, so a corrupted system file shows up as a FAIL instead of a panic or a silent pass.

use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{h0_shifts, Limits};
use crate::mask::{random_phases, EdgePhases, MaskTable};
use crate::refinable::{
    check_elementary, check_orthonormality_spectral, gram_matrix, identity_deviation, inverse_transform, max_abs,
    phi_hat_from_mask,
};
use crate::tree::{enumerate_trees, RootedTree};
use crate::wavelet::{beta_residual, beta_shifted, psi_freq, refinement_sum, WaveletSystem};

/// One named check with its largest observed deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub detail: String,
    pub elapsed: Duration,
}

impl Check {
    fn line(&self, timings: bool) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {:<28} max_dev={:.3e}", self.name, self.max_deviation);
        if !self.detail.is_empty() {
            s.push_str("  ");
            s.push_str(&self.detail);
        }
        if timings {
            s.push_str(&format!("  ({:.3}s)", self.elapsed.as_secs_f64()));
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_deviation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line per check, then the overall verdict.
    pub fn render(&self, timings: bool) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.line(timings));
            out.push('\n');
        }
        out.push_str(if self.passed() { "overall: PASS\n" } else { "overall: FAIL\n" });
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VerifyLevel {
    /// Table-level identities on the mask and `φ̂`.
    #[default]
    Spectral,
    /// Adds time-domain identities and brute-force Gram oracles.
    Full,
}

/// What a single check computed: deviation, pass verdict, and a note.
struct Outcome {
    deviation: f64,
    passed: bool,
    detail: String,
}

impl Outcome {
    fn within(deviation: f64, tol: f64) -> Self {
        Outcome { deviation, passed: deviation.is_finite() && deviation < tol, detail: String::new() }
    }

    fn note(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

struct Runner {
    checks: Vec<Check>,
}

impl Runner {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<Outcome>) {
        let start = Instant::now();
        let check = match f() {
            Ok(o) => Check { name: name.into(), passed: o.passed, max_deviation: o.deviation, detail: o.detail, elapsed: start.elapsed() },
            Err(e) => Check {
                name: name.into(),
                passed: false,
                max_deviation: f64::INFINITY,
                detail: format!("error: {e}"),
                elapsed: start.elapsed(),
            },
        };
        self.checks.push(check);
    }
}

/// Runs every check of `level` against `system`.
pub fn verify_system(system: &WaveletSystem, level: VerifyLevel, tol: f64, limits: &Limits) -> VerificationReport {
    let mut r = Runner { checks: Vec::new() };
    let s = system;
    let p = s.p.as_usize();

    r.run("mask_tree_roundtrip", || {
        let (tree, phases) = s.mask.to_tree()?;
        if tree != s.tree {
            return Ok(Outcome { deviation: 1.0, passed: false, detail: format!("mask encodes parent {:?}", tree.parent()) });
        }
        let rebuilt = MaskTable::from_tree(&tree, &phases)?;
        let dev = max_diff(rebuilt.lambda(), s.mask.lambda())?;
        let expected = MaskTable::from_tree(&s.tree, &s.phases)?;
        let dev = dev.max(max_diff(expected.lambda(), s.mask.lambda())?);
        Ok(Outcome::within(dev, tol))
    });

    r.run("row_condition", || {
        let rep = s.mask.check_row_condition();
        let worst = rep.sums.iter().enumerate().max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()));
        let o = Outcome::within(rep.max_deviation, tol);
        Ok(match worst {
            Some((row, sum)) if !o.passed => o.note(format!("row {row} sums to {sum}")),
            _ => o,
        })
    });

    r.run("vanishing_product", || {
        let rep = s.mask.check_vanishing(s.m, limits)?;
        let o = Outcome { deviation: rep.max_abs, passed: rep.passed(tol), detail: format!("{} strings", rep.strings_checked) };
        Ok(match rep.worst {
            Some(w) if !o.passed => o.note(format!("nonzero at digits {w:?}")),
            _ => o,
        })
    });

    r.run("elementary_support", || {
        let m = s.tree.support_exponent();
        if s.m != m || s.phi_hat.hi() != m as i32 {
            return Ok(Outcome { deviation: 1.0, passed: false, detail: format!("M = {} but tree height gives {m}", s.m) });
        }
        if p >= 2 && m > p - 2 {
            return Ok(Outcome { deviation: 1.0, passed: false, detail: format!("M = {m} exceeds p - 2") });
        }
        let rep = check_elementary(&s.phi_hat, tol);
        let dev = s
            .phi_hat
            .values()
            .iter()
            .map(|v| {
                let a = v.norm();
                a.min((a - 1.0).abs())
            })
            .fold(0.0, f64::max);
        Ok(match rep.failure() {
            Some(why) => Outcome { deviation: dev.max(tol), passed: false, detail: why },
            None => Outcome::within(dev, tol).note(format!("M = {m}, {} cosets", rep.coset_count)),
        })
    });

    r.run("spectral_orthonormality", || Ok(Outcome::within(check_orthonormality_spectral(&s.phi_hat).max_deviation, tol)));

    r.run("phi_hat_product", || {
        let literal = phi_hat_from_mask(&s.mask, s.m, limits)?;
        Ok(Outcome::within(max_diff(literal.values(), s.phi_hat.values())?, tol))
    });

    r.run("beta_residual", || Ok(Outcome::within(beta_residual(&s.mask, &s.beta)?, tol)));

    r.run("beta_shifted", || {
        if s.beta_l.len() != p - 1 {
            return Err(Error::BandCount { expected: p - 1, got: s.beta_l.len() });
        }
        let mut dev = 0.0f64;
        for (i, stored) in s.beta_l.iter().enumerate() {
            dev = dev.max(max_diff(&beta_shifted(&s.beta, s.p, i + 1)?, stored)?);
        }
        Ok(Outcome::within(dev, tol))
    });

    r.run("shifted_mask_products", || Ok(Outcome::within(shifted_mask_violation(&s.mask), tol)));

    if level == VerifyLevel::Full {
        full_checks(&mut r, s, tol, limits);
    }
    VerificationReport { checks: r.checks }
}

fn full_checks(r: &mut Runner, s: &WaveletSystem, tol: f64, limits: &Limits) {
    let p = s.p;

    r.run("phi_inverse_transform", || s.phi.max_abs_diff(&inverse_transform(&s.phi_hat)).map(|d| Outcome::within(d, tol)));

    r.run("plancherel", || Ok(Outcome::within((s.phi.norm_sq() - s.phi_hat.norm_sq()).abs(), tol)));

    r.run("refinement_identity", || {
        let sum = refinement_sum(&s.beta, &s.phi)?;
        Ok(Outcome::within(sum.max_abs_diff(&s.phi)?, tol))
    });

    r.run("psi_definition", || {
        check_psi_count(s)?;
        let mut dev = 0.0f64;
        for (b, psi) in s.beta_l.iter().zip(&s.psi) {
            dev = dev.max(refinement_sum(b, &s.phi)?.max_abs_diff(psi)?);
        }
        Ok(Outcome::within(dev, tol))
    });

    r.run("psi_two_route", || {
        check_psi_count(s)?;
        let mut dev = 0.0f64;
        for (i, psi) in s.psi.iter().enumerate() {
            dev = dev.max(psi_freq(&s.mask, &s.phi_hat, i + 1)?.max_abs_diff(psi)?);
        }
        Ok(Outcome::within(dev, tol))
    });

    r.run("gram_phi", || {
        let g = gram_matrix(&s.phi, &s.phi, &h0_shifts(p, 2), limits)?;
        Ok(Outcome::within(identity_deviation(&g), tol).note("H0^(2)"))
    });

    // Shifts over H₀^{(3)} when the cap allows; translates differing at -3 have disjoint
    // supports (everything lives in G₋₁), so H₀^{(2)} already covers every nonzero entry.
    let shifts3 = h0_shifts(p, 3);
    let gram = |f, g| match gram_matrix(f, g, &shifts3, limits) {
        Err(Error::SizeCap { .. }) => gram_matrix(f, g, &h0_shifts(p, 2), limits).map(|m| (m, "H0^(2)")),
        other => other.map(|m| (m, "H0^(3)")),
    };

    r.run("wavelet_orthogonal_to_phi", || {
        check_psi_count(s)?;
        let mut dev = 0.0f64;
        let mut set = "H0^(3)";
        for psi in &s.psi {
            let (m, used) = gram(&s.phi, psi)?;
            dev = dev.max(max_abs(&m));
            set = used;
        }
        Ok(Outcome::within(dev, tol).note(set))
    });

    r.run("wavelets_mutually_orthogonal", || {
        check_psi_count(s)?;
        let mut dev = 0.0f64;
        let mut set = "H0^(3)";
        for k in 0..s.psi.len() {
            for l in k + 1..s.psi.len() {
                let (m, used) = gram(&s.psi[k], &s.psi[l])?;
                dev = dev.max(max_abs(&m));
                set = used;
            }
        }
        Ok(Outcome::within(dev, tol).note(set))
    });

    r.run("wavelet_shifts_orthonormal", || {
        check_psi_count(s)?;
        let mut dev = 0.0f64;
        let mut set = "H0^(3)";
        for psi in &s.psi {
            let (m, used) = gram(psi, psi)?;
            dev = dev.max(identity_deviation(&m));
            set = used;
        }
        Ok(Outcome::within(dev, tol).note(set))
    });
}

/// Verification of one tree under its default phases and several random phase draws.
#[derive(Debug, Clone)]
pub struct TreeOutcome {
    pub tree: RootedTree,
    /// `reports[0]` uses zero phases; the rest use seeded random phases.
    pub reports: Vec<VerificationReport>,
    /// Set when a system could not be built at all.
    pub build_error: Option<String>,
}

impl TreeOutcome {
    pub fn passed(&self) -> bool {
        self.build_error.is_none() && self.reports.iter().all(VerificationReport::passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.reports.iter().map(VerificationReport::max_deviation).fold(0.0, f64::max)
    }
}

/// Seed of the random-phase draw `draw` for tree number `index`; independent of scheduling.
pub fn draw_seed(seed: u64, index: usize, draw: usize) -> u64 {
    seed ^ ((index as u64) << 32 | draw as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Builds and verifies every tree on `p` vertices, each with zero phases plus `draws`
/// random phase draws. Trees are processed in parallel; results keep enumeration order.
pub fn verify_all_trees(
    p: usize,
    draws: usize,
    seed: u64,
    level: VerifyLevel,
    tol: f64,
    limits: &Limits,
) -> Result<Vec<TreeOutcome>> {
    let trees: Vec<RootedTree> = enumerate_trees(p)?.collect();
    Ok(trees
        .into_par_iter()
        .enumerate()
        .map(|(index, tree)| {
            let mut reports = Vec::with_capacity(draws + 1);
            for draw in 0..=draws {
                let phases = if draw == 0 {
                    EdgePhases::new()
                } else {
                    random_phases(&tree, &mut ChaCha8Rng::seed_from_u64(draw_seed(seed, index, draw)))
                };
                match WaveletSystem::build(&tree, &phases, limits) {
                    Ok(sys) => reports.push(verify_system(&sys, level, tol, limits)),
                    Err(e) => return TreeOutcome { tree, reports, build_error: Some(e.to_string()) },
                }
            }
            TreeOutcome { tree, reports, build_error: None }
        })
        .collect())
}

fn check_psi_count(s: &WaveletSystem) -> Result<()> {
    let want = s.p.as_usize() - 1;
    if s.psi.len() != want || s.beta_l.len() != want {
        return Err(Error::BandCount { expected: want, got: s.psi.len().min(s.beta_l.len()) });
    }
    Ok(())
}

/// `max |m_l m_k|` over `k ≠ l` plus `max ||m_l| - |m₀(· r₀^{-l})||`-style modulus defects,
/// exhaustively over cosets `(α₋₁, α₀)`, with `l, k` ranging over `0, …, p-1`.
///
/// For a tree mask each coset is hit by exactly one `l` with unit modulus.
pub fn shifted_mask_violation(mask: &MaskTable) -> f64 {
    let p = mask.modulus().as_usize();
    let lambda = mask.lambda();
    let at = |a_m1: usize, a0: usize, l: usize| lambda[a_m1 + p * ((a0 + p - l) % p)];
    let mut worst = 0.0f64;
    for a_m1 in 0..p {
        for a0 in 0..p {
            let mut total = 0.0;
            for l in 0..p {
                let ml = at(a_m1, a0, l);
                total += ml.norm_sqr();
                for k in l + 1..p {
                    worst = worst.max((ml * at(a_m1, a0, k)).norm());
                }
            }
            // Σ_l |m_l|² = 1 on every coset: exactly one shifted mask has modulus 1 there.
            worst = worst.max((total - 1.0).abs());
        }
    }
    worst
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::TableLength { got: b.len(), expected: a.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(parent: &[usize]) -> WaveletSystem {
        let t = RootedTree::validate(parent, parent.len()).unwrap();
        WaveletSystem::build(&t, &EdgePhases::new(), &Limits::default()).unwrap()
    }

    #[test]
    fn haar_passes_with_zero_violation() {
        let s = system(&[0, 0]);
        let rep = verify_system(&s, VerifyLevel::Full, 1e-12, &Limits::default());
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.max_deviation(), 0.0, "{rep}");
    }

    #[test]
    fn chain_and_figure_pass_full() {
        for parent in [vec![0, 0, 1], vec![0, 3, 3, 0, 5, 0, 2], vec![0, 3, 3, 0, 5, 0, 4]] {
            let rep = verify_system(&system(&parent), VerifyLevel::Full, 1e-12, &Limits::default());
            assert!(rep.passed(), "{parent:?}\n{rep}");
            assert_eq!(rep.check("wavelet_shifts_orthonormal").unwrap().detail, "H0^(3)");
        }
    }

    #[test]
    fn corrupted_beta_fails() {
        let s = system(&[0, 0, 1]);
        let mut beta = s.beta.clone();
        let j = beta.iter().position(|b| b.norm() > 0.5).unwrap();
        beta[j] = Complex64::new(0.0, 0.0);
        let bad = s.with_beta(beta).unwrap();
        let rep = verify_system(&bad, VerifyLevel::Full, 1e-12, &Limits::default());
        assert!(!rep.passed());
        assert!(!rep.check("beta_residual").unwrap().passed);
        assert!(rep.max_deviation() >= 1.0 / 3.0, "{rep}");
        assert!(rep.check("wavelet_shifts_orthonormal").unwrap().max_deviation >= 1.0 / 3.0);
    }

    #[test]
    fn corrupted_mask_fails_row_condition() {
        let s = system(&[0, 0, 1]);
        let mut lambda = s.mask.lambda().to_vec();
        let k = lambda.iter().position(|v| v.norm() == 0.0).unwrap();
        lambda[k] = Complex64::new(1.0, 0.0);
        let mut bad = s.clone();
        bad.mask = MaskTable::new(s.p, lambda).unwrap();
        let rep = verify_system(&bad, VerifyLevel::Spectral, 1e-12, &Limits::default());
        let row = rep.check("row_condition").unwrap();
        assert!(!row.passed);
        assert!(row.detail.contains("sums to 2"), "{}", row.detail);
        assert!(!rep.check("mask_tree_roundtrip").unwrap().passed);
    }

    #[test]
    fn truncated_tables_fail_without_panicking() {
        let mut s = system(&[0, 0, 1]);
        s.beta.truncate(4);
        s.psi.clear();
        let rep = verify_system(&s, VerifyLevel::Full, 1e-12, &Limits::default());
        assert!(!rep.passed());
        assert!(rep.check("beta_residual").unwrap().detail.starts_with("error:"));
        assert!(!rep.check("psi_two_route").unwrap().passed);
    }

    #[test]
    fn report_rendering() {
        let rep = verify_system(&system(&[0, 0, 0]), VerifyLevel::Spectral, 1e-10, &Limits::default());
        let text = rep.render(false);
        assert_eq!(text.lines().count(), rep.checks.len() + 1);
        assert!(text.lines().all(|l| l.starts_with("PASS") || l == "overall: PASS"));
        assert!(rep.render(true).contains("s)"));
    }

    #[test]
    fn batch_over_p3() {
        let out = verify_all_trees(3, 2, 11, VerifyLevel::Full, 1e-12, &Limits::default()).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|t| t.passed() && t.reports.len() == 3));
        let again = verify_all_trees(3, 2, 11, VerifyLevel::Full, 1e-12, &Limits::default()).unwrap();
        let devs = |v: &[TreeOutcome]| v.iter().map(|t| t.max_deviation()).collect::<Vec<_>>();
        assert_eq!(devs(&out), devs(&again));
    }

    #[test]
    fn shifted_masks_partition_cosets() {
        for parent in [vec![0, 0, 0], vec![0, 0, 1], vec![0, 2, 0]] {
            let s = system(&parent);
            assert_eq!(shifted_mask_violation(&s.mask), 0.0);
        }
    }

    #[test]
    fn gram_falls_back_under_tight_cap() {
        let s = system(&[0, 3, 3, 0, 5, 0, 2]);
        let limits = Limits { size_cap: 100_000 };
        let rep = verify_system(&s, VerifyLevel::Full, 1e-12, &limits);
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.check("wavelet_shifts_orthonormal").unwrap().detail, "H0^(2)");
    }
}
