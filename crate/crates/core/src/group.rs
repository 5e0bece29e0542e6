//! Elements and characters of the p-adic Vilenkin group over finite digit windows.
//!
//! A point is `x = Σ a_ν g_ν` and a character is `χ = Π r_ν^{α_ν}`; both are stored as
//! the digits at positions `lo ≤ ν < hi`. Digits outside the window are zero.
//!
//! Positions follow the usual chain orientation: a point lies in `G_n` iff its digits
//! below `n` vanish, a character lies in `G_n^⊥` iff its digits at and above `n` vanish.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the number of entries in any materialized table.
pub const DEFAULT_SIZE_CAP: u64 = 100_000_000;

/// Environment variable overriding [`DEFAULT_SIZE_CAP`].
pub const SIZE_CAP_ENV: &str = "VILWAV_SIZE_CAP";

/// Prime modulus `p` of the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u32);

impl Modulus {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(Error::NotPrime(p));
        }
        Ok(Modulus(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `exp(2πi k / p)`, with `k` reduced mod `p` first.
#[inline]
pub fn root_of_unity(p: u32, k: u64) -> Complex64 {
    let k = k % p as u64;
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == p as u64 {
        return Complex64::new(-1.0, 0.0);
    }
    Complex64::cis(TAU * k as f64 / p as f64)
}

/// `p^e`, or `None` on overflow.
pub fn checked_pow(p: u32, e: u32) -> Option<u64> {
    (p as u64).checked_pow(e)
}

/// Limits applied to every table the library materializes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub size_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { size_cap: DEFAULT_SIZE_CAP }
    }
}

impl Limits {
    /// Reads `VILWAV_SIZE_CAP`, falling back to the default when unset or unparsable.
    pub fn from_env() -> Self {
        let size_cap = std::env::var(SIZE_CAP_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .unwrap_or(DEFAULT_SIZE_CAP);
        Limits { size_cap }
    }

    /// Fails unless `p^width` entries fit under the cap.
    pub fn check(&self, p: u32, width: u32) -> Result<u64> {
        let requested = (p as u128).pow(width.min(127));
        match checked_pow(p, width) {
            Some(n) if n <= self.size_cap => Ok(n),
            _ => Err(Error::SizeCap { requested, cap: self.size_cap }),
        }
    }

    pub fn check_count(&self, requested: u128) -> Result<()> {
        if requested > self.size_cap as u128 {
            return Err(Error::SizeCap { requested, cap: self.size_cap });
        }
        Ok(())
    }
}

/// Whether a digit vector denotes a group point or a character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Point,
    Character,
}

/// A half-open range of digit positions `[lo, hi)` together with the modulus.
///
/// Enumerates the `p^(hi-lo)` digit strings of the window in little-endian order:
/// the digit at `lo` is least significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub p: u32,
    pub lo: i32,
    pub hi: i32,
}

impl Window {
    pub fn new(p: u32, lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Window { p, lo, hi })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        (self.hi - self.lo) as u32
    }

    /// Number of digit strings, capped by `limits`.
    pub fn size(&self, limits: &Limits) -> Result<usize> {
        limits.check(self.p, self.width()).map(|n| n as usize)
    }

    /// Number of digit strings without a cap check; panics on overflow.
    pub fn count(&self) -> usize {
        checked_pow(self.p, self.width()).expect("window size overflow") as usize
    }

    /// Digits of `index`, slot `k` holding position `lo + k`.
    pub fn digits(&self, mut index: usize) -> Vec<u32> {
        let p = self.p as usize;
        (0..self.width())
            .map(|_| {
                let d = index % p;
                index /= p;
                d as u32
            })
            .collect()
    }

    pub fn index(&self, digits: &[u32]) -> usize {
        let p = self.p as usize;
        digits.iter().rev().fold(0usize, |acc, &d| acc * p + d as usize)
    }

    /// Weight `p^(ν - lo)` of position `ν` in the index.
    #[inline]
    pub fn place(&self, position: i32) -> usize {
        (self.p as usize).pow((position - self.lo) as u32)
    }
}

/// Digits of a point or a character on a finite window.
#[derive(Clone)]
pub struct DigitVector {
    p: Modulus,
    tag: Tag,
    lo: i32,
    digits: Vec<u32>,
}

impl DigitVector {
    pub fn new(p: Modulus, tag: Tag, lo: i32, digits: Vec<u32>) -> Result<Self> {
        for (k, &d) in digits.iter().enumerate() {
            if d >= p.get() {
                return Err(Error::DigitOutOfRange { digit: d, position: lo + k as i32, p: p.get() });
            }
        }
        Ok(DigitVector { p, tag, lo, digits })
    }

    pub fn zero(p: Modulus, tag: Tag) -> Self {
        DigitVector { p, tag, lo: 0, digits: Vec::new() }
    }

    /// `digit · g_position` or `r_position^digit`.
    pub fn basis(p: Modulus, tag: Tag, position: i32, digit: u32) -> Result<Self> {
        Self::new(p, tag, position, vec![digit])
    }

    /// Builds a vector from `(position, digit)` pairs; repeated positions add.
    pub fn from_pairs(p: Modulus, tag: Tag, pairs: &[(i32, u32)]) -> Result<Self> {
        let mut v = Self::zero(p, tag);
        for &(pos, d) in pairs {
            v = v.add(&Self::basis(p, tag, pos, d % p.get())?)?;
        }
        Ok(v)
    }

    pub fn point(p: Modulus, pairs: &[(i32, u32)]) -> Result<Self> {
        Self::from_pairs(p, Tag::Point, pairs)
    }

    pub fn character(p: Modulus, pairs: &[(i32, u32)]) -> Result<Self> {
        Self::from_pairs(p, Tag::Character, pairs)
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.p
    }

    #[inline]
    pub fn tag(&self) -> Tag {
        self.tag
    }

    #[inline]
    pub fn lo(&self) -> i32 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> i32 {
        self.lo + self.digits.len() as i32
    }

    pub fn window(&self) -> Window {
        Window { p: self.p.get(), lo: self.lo, hi: self.hi() }
    }

    /// Digit at `position`; zero outside the window.
    #[inline]
    pub fn digit(&self, position: i32) -> u32 {
        if position < self.lo {
            return 0;
        }
        self.digits.get((position - self.lo) as usize).copied().unwrap_or(0)
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Positions of the lowest and one-past-highest nonzero digit.
    pub fn support(&self) -> Option<(i32, i32)> {
        let first = self.digits.iter().position(|&d| d != 0)?;
        let last = self.digits.iter().rposition(|&d| d != 0)?;
        Some((self.lo + first as i32, self.lo + last as i32 + 1))
    }

    /// Re-expresses the vector on `[lo, hi)`. Widening pads with zeros; narrowing fails
    /// if a nonzero digit would be dropped.
    pub fn with_window(&self, lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        if let Some((s, e)) = self.support() {
            if s < lo {
                return Err(Error::NonzeroDigitDropped { lo, hi, position: s });
            }
            if e > hi {
                return Err(Error::NonzeroDigitDropped { lo, hi, position: e - 1 });
            }
        }
        let digits = (lo..hi).map(|pos| self.digit(pos)).collect();
        Ok(DigitVector { p: self.p, tag: self.tag, lo, digits })
    }

    /// Minimal window holding every nonzero digit.
    pub fn trimmed(&self) -> Self {
        match self.support() {
            Some((s, e)) => self.with_window(s, e).expect("support window"),
            None => Self::zero(self.p, self.tag),
        }
    }

    /// Coset representative modulo the subgroup below `position`: digits at positions
    /// `< position` are discarded. For a character this is the class in `X / G_position^⊥`;
    /// for a point, the class in `G / G_position` is the complementary truncation
    /// ([`DigitVector::truncate_above`]).
    pub fn truncate_below(&self, position: i32) -> Self {
        let lo = self.lo.max(position);
        let hi = self.hi().max(lo);
        let digits = (lo..hi).map(|pos| self.digit(pos)).collect();
        DigitVector { p: self.p, tag: self.tag, lo, digits }
    }

    /// Drops digits at positions `>= position`.
    pub fn truncate_above(&self, position: i32) -> Self {
        let hi = self.hi().min(position);
        let lo = self.lo.min(hi);
        let digits = (lo..hi).map(|pos| self.digit(pos)).collect();
        DigitVector { p: self.p, tag: self.tag, lo, digits }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p.get(), other.p.get()));
        }
        if self.tag != other.tag {
            return Err(Error::TagMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u32, u32) -> u32) -> Result<Self> {
        self.check_compatible(other)?;
        if self.digits.is_empty() {
            let digits = other.digits.iter().map(|&b| f(0, b)).collect();
            return Ok(DigitVector { p: self.p, tag: self.tag, lo: other.lo, digits });
        }
        if other.digits.is_empty() {
            let digits = self.digits.iter().map(|&a| f(a, 0)).collect();
            return Ok(DigitVector { p: self.p, tag: self.tag, lo: self.lo, digits });
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let digits = (lo..hi).map(|pos| f(self.digit(pos), other.digit(pos))).collect();
        Ok(DigitVector { p: self.p, tag: self.tag, lo, digits })
    }

    /// Digitwise sum mod p, no carries. For characters this is the group product.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let p = self.p.get();
        self.zip_with(other, |a, b| (a + b) % p)
    }

    /// Digitwise difference mod p (`x ∸ y`); for characters, `χ · χ'^{-1}`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let p = self.p.get();
        self.zip_with(other, |a, b| (a + p - b) % p)
    }

    pub fn neg(&self) -> Self {
        let p = self.p.get();
        let digits = self.digits.iter().map(|&d| (p - d) % p).collect();
        DigitVector { p: self.p, tag: self.tag, lo: self.lo, digits }
    }

    /// `k · x` (the k-fold sum), or `χ^k`.
    pub fn scale(&self, k: u32) -> Self {
        let p = self.p.get() as u64;
        let digits = self.digits.iter().map(|&d| ((d as u64 * k as u64) % p) as u32).collect();
        DigitVector { p: self.p, tag: self.tag, lo: self.lo, digits }
    }

    /// Applies the dilation `k` times. Points: `𝒜^k` moves position `ν` to `ν - k`.
    /// Characters: `χ𝒜^k` moves position `ν` to `ν + k`, because `(χ𝒜, x) = (χ, 𝒜x)`.
    pub fn dilate(&self, k: i32) -> Self {
        let shift = match self.tag {
            Tag::Point => -k,
            Tag::Character => k,
        };
        DigitVector { p: self.p, tag: self.tag, lo: self.lo + shift, digits: self.digits.clone() }
    }

    /// Membership in `G_n` (points) or `G_n^⊥` (characters).
    pub fn in_subgroup(&self, n: i32) -> bool {
        match self.support() {
            None => true,
            Some((s, e)) => match self.tag {
                Tag::Point => s >= n,
                Tag::Character => e <= n,
            },
        }
    }

    /// Canonical index over the vector's own window.
    pub fn index_of(&self) -> u64 {
        let p = self.p.get() as u64;
        self.digits.iter().rev().fold(0u64, |acc, &d| acc * p + d as u64)
    }

    /// Inverse of [`DigitVector::index_of`] on the window `[lo, hi)`.
    pub fn digits_of(index: u64, p: Modulus, tag: Tag, lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        let width = (hi - lo) as u32;
        let size = checked_pow(p.get(), width);
        if let Some(size) = size {
            if index >= size {
                return Err(Error::IndexOutOfRange { index, size });
            }
        }
        let pp = p.get() as u64;
        let mut rest = index;
        let digits = (0..width)
            .map(|_| {
                let d = rest % pp;
                rest /= pp;
                d as u32
            })
            .collect();
        Ok(DigitVector { p, tag, lo, digits })
    }
}

impl PartialEq for DigitVector {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.tag != other.tag {
            return false;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..hi).all(|pos| self.digit(pos) == other.digit(pos))
    }
}

impl Eq for DigitVector {}

impl fmt::Debug for DigitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.tag {
            Tag::Point => "g",
            Tag::Character => "r",
        };
        write!(f, "DigitVector(p={}, ", self.p)?;
        let mut first = true;
        for (k, &d) in self.digits.iter().enumerate() {
            if d != 0 {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}{}^{}", sym, self.lo + k as i32, d)?;
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

/// Key of a shift `h = a₋₁g₋₁ ∔ a₋₂g₋₂ ∔ …` in `H₀`: `Σ_k a₋ₖ p^{k-1}`, so position `-1`
/// is least significant and the key does not depend on how many digits are stored.
pub fn shift_key(h: &DigitVector) -> Result<u64> {
    if h.tag() != Tag::Point {
        return Err(Error::TagMismatch);
    }
    let p = h.modulus().get() as u64;
    match h.support() {
        None => Ok(0),
        Some((lo, hi)) => {
            if hi > 0 {
                return Err(Error::NonzeroDigitDropped { lo: i32::MIN, hi: 0, position: hi - 1 });
            }
            let mut key = 0u64;
            for pos in lo..0 {
                key = key
                    .checked_mul(p)
                    .and_then(|k| k.checked_add(h.digit(pos) as u64))
                    .ok_or(Error::IndexOutOfRange { index: u64::MAX, size: u64::MAX })?;
            }
            Ok(key)
        }
    }
}

/// Inverse of [`shift_key`].
pub fn shift_from_key(p: Modulus, mut key: u64) -> DigitVector {
    let pp = p.get() as u64;
    let mut digits = Vec::new();
    while key > 0 {
        digits.push((key % pp) as u32);
        key /= pp;
    }
    let width = digits.len() as i32;
    digits.reverse();
    DigitVector { p, tag: Tag::Point, lo: -width, digits }
}

/// The `p^s` shifts of `H₀^{(s)}` (digits at positions `-s..-1`), ordered by [`shift_key`].
pub fn h0_shifts(p: Modulus, s: u32) -> Vec<DigitVector> {
    let n = (p.get() as u64).pow(s);
    (0..n).map(|k| shift_from_key(p, k)).collect()
}

/// The pairing `(χ, x) = exp((2πi/p) Σ α_ν a_ν)`.
pub fn pair(chi: &DigitVector, x: &DigitVector) -> Result<Complex64> {
    if chi.p != x.p {
        return Err(Error::ModulusMismatch(chi.p.get(), x.p.get()));
    }
    if chi.tag != Tag::Character || x.tag != Tag::Point {
        return Err(Error::TagMismatch);
    }
    let p = chi.p.get() as u64;
    let lo = chi.lo.max(x.lo);
    let hi = chi.hi().min(x.hi());
    let exponent = (lo..hi).fold(0u64, |acc, pos| (acc + chi.digit(pos) as u64 * x.digit(pos) as u64) % p);
    Ok(root_of_unity(chi.p.get(), exponent))
}

/// Haar-measure bookkeeping at level `n`: `μ(G_n) = p^{-n}`, `ν(G_n^⊥) = p^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureScale {
    pub p: u32,
    pub level: i32,
}

impl MeasureScale {
    pub fn new(p: Modulus, level: i32) -> Self {
        MeasureScale { p: p.get(), level }
    }

    pub fn mu_cell(&self) -> f64 {
        (self.p as f64).powi(-self.level)
    }

    pub fn nu_cell(&self) -> f64 {
        (self.p as f64).powi(self.level)
    }
}

/// Which Haar measure a cell table is integrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Cells are cosets of `G_n` with measure `p^{-n}`.
    Point,
    /// Cells are cosets of `G_n^⊥` with measure `p^n`.
    Character,
}

/// Sums a step function given cell-wise: `Σ values · (cell measure)`.
pub fn integrate_step(values: &[Complex64], p: Modulus, cell_level: i32, side: Side) -> Complex64 {
    let scale = MeasureScale::new(p, cell_level);
    let w = match side {
        Side::Point => scale.mu_cell(),
        Side::Character => scale.nu_cell(),
    };
    values.iter().sum::<Complex64>() * w
}
