//! JSON files for trees, wavelet systems, signals, and coefficient pyramids.
//!
//! Complex numbers are `[re, im]` pairs and every table is in canonical window order (digit
//! at the lowest position least significant). Edge phases are keyed `"parent->child"` and
//! measured in turns.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::group::{Limits, Modulus, Window};
use crate::mask::{check_phase, EdgePhases, MaskTable};
use crate::refinable::{SpectrumTable, StepFunction};
use crate::transform::{CoeffGrid, CoeffPyramid};
use crate::tree::RootedTree;
use crate::wavelet::WaveletSystem;

/// Why a file could not be turned into a value.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad format: {0}")]
    Format(String),
    /// Well-formed input describing an invalid mathematical object.
    #[error("{0}")]
    Invalid(Error),
}

impl LoadError {
    /// `1` for invalid objects, `2` for unreadable or malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            LoadError::Invalid(_) => 1,
            _ => 2,
        }
    }
}

fn format_err(e: Error) -> LoadError {
    LoadError::Format(e.to_string())
}

pub fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Read { path: path.display().to_string(), source })
}

type Pair = [f64; 2];

fn to_pairs(values: &[Complex64]) -> Vec<Pair> {
    values.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(values: &[Pair]) -> Result<Vec<Complex64>, LoadError> {
    values
        .iter()
        .map(|&[re, im]| {
            if re.is_finite() && im.is_finite() {
                Ok(Complex64::new(re, im))
            } else {
                Err(LoadError::Format("non-finite complex value".into()))
            }
        })
        .collect()
}

fn modulus(p: u64) -> Result<Modulus, LoadError> {
    Modulus::new(p).map_err(format_err)
}

// ---------------------------------------------------------------------------------------
// Trees

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub p: usize,
    pub parent: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub phases_turns: BTreeMap<String, f64>,
}

pub fn phases_to_map(phases: &EdgePhases) -> BTreeMap<String, f64> {
    phases.iter().map(|(&(j, i), &t)| (format!("{j}->{i}"), t)).collect()
}

pub fn phases_from_map(map: &BTreeMap<String, f64>) -> Result<EdgePhases, LoadError> {
    let mut out = EdgePhases::new();
    for (key, &turns) in map {
        let (j, i) = key
            .split_once("->")
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .ok_or_else(|| LoadError::Format(format!("phase key {key:?} is not \"parent->child\"")))?;
        check_phase(turns).map_err(LoadError::Invalid)?;
        out.insert((j, i), turns);
    }
    Ok(out)
}

impl TreeFile {
    pub fn new(tree: &RootedTree, phases: &EdgePhases) -> Self {
        TreeFile { p: tree.p(), parent: tree.parent().to_vec(), phases_turns: phases_to_map(phases) }
    }

    /// The validated tree and its phases; phases must sit on edges.
    pub fn resolve(&self) -> Result<(RootedTree, EdgePhases), LoadError> {
        // A labelled tree makes sense for any p; the group needs p prime.
        Modulus::new(self.p as u64).map_err(LoadError::Invalid)?;
        let tree = RootedTree::validate(&self.parent, self.p).map_err(LoadError::Invalid)?;
        let phases = phases_from_map(&self.phases_turns)?;
        for &(j, i) in phases.keys() {
            if !tree.is_edge(j, i) {
                return Err(LoadError::Invalid(Error::PhaseOnNonEdge { parent: j, child: i }));
            }
        }
        Ok((tree, phases))
    }
}

pub fn parse_tree(text: &str) -> Result<(RootedTree, EdgePhases), LoadError> {
    serde_json::from_str::<TreeFile>(text)?.resolve()
}

pub fn tree_to_json(tree: &RootedTree, phases: &EdgePhases) -> String {
    to_json(&TreeFile::new(tree, phases))
}

// ---------------------------------------------------------------------------------------
// Tables

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    /// Digit positions `[lo, hi)`.
    pub window: [i32; 2],
    pub values: Vec<Pair>,
}

impl TableFile {
    fn step(f: &StepFunction) -> Self {
        TableFile { window: [f.support_level(), f.resolution_level()], values: to_pairs(f.values()) }
    }

    fn spectrum(s: &SpectrumTable) -> Self {
        TableFile { window: [s.lo(), s.hi()], values: to_pairs(s.values()) }
    }

    fn checked(&self, p: Modulus, limits: &Limits) -> Result<Vec<Complex64>, LoadError> {
        let [lo, hi] = self.window;
        let w = Window::new(p.get(), lo, hi).map_err(format_err)?;
        let n = w.size(limits).map_err(format_err)?;
        if n != self.values.len() {
            return Err(format_err(Error::TableLength { got: self.values.len(), expected: n }));
        }
        from_pairs(&self.values)
    }

    fn to_step(&self, p: Modulus, limits: &Limits) -> Result<StepFunction, LoadError> {
        let values = self.checked(p, limits)?;
        StepFunction::new(p, self.window[0], self.window[1], values).map_err(format_err)
    }

    fn to_spectrum(&self, p: Modulus, limits: &Limits) -> Result<SpectrumTable, LoadError> {
        let values = self.checked(p, limits)?;
        SpectrumTable::new(p, self.window[0], self.window[1], values).map_err(format_err)
    }
}

// ---------------------------------------------------------------------------------------
// Wavelet systems

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub p: u64,
    #[serde(rename = "M")]
    pub m: usize,
    pub parent: Vec<usize>,
    #[serde(default)]
    pub phases_turns: BTreeMap<String, f64>,
    pub lambda: Vec<Pair>,
    pub beta: Vec<Pair>,
    pub beta_l: Vec<Vec<Pair>>,
    pub phi: TableFile,
    pub psi: Vec<TableFile>,
    pub phi_hat: TableFile,
}

impl SystemFile {
    pub fn new(s: &WaveletSystem) -> Self {
        SystemFile {
            p: s.p.get() as u64,
            m: s.m,
            parent: s.tree.parent().to_vec(),
            phases_turns: phases_to_map(&s.phases),
            lambda: to_pairs(s.mask.lambda()),
            beta: to_pairs(&s.beta),
            beta_l: s.beta_l.iter().map(|b| to_pairs(b)).collect(),
            phi: TableFile::step(&s.phi),
            psi: s.psi.iter().map(TableFile::step).collect(),
            phi_hat: TableFile::spectrum(&s.phi_hat),
        }
    }

    /// Rebuilds the in-memory system exactly as stored, without checking any identity;
    /// only shapes are validated so that every later computation is well defined.
    pub fn into_system(self, limits: &Limits) -> Result<WaveletSystem, LoadError> {
        let p = modulus(self.p)?;
        let pu = p.as_usize();
        let tree = RootedTree::validate(&self.parent, pu).map_err(LoadError::Invalid)?;
        let phases = phases_from_map(&self.phases_turns)?;
        let mask = MaskTable::new(p, from_pairs(&self.lambda)?).map_err(format_err)?;
        let beta = from_pairs(&self.beta)?;
        let beta_l = self.beta_l.iter().map(|b| from_pairs(b)).collect::<Result<Vec<_>, _>>()?;
        let phi = self.phi.to_step(p, limits)?;
        let psi = self.psi.iter().map(|t| t.to_step(p, limits)).collect::<Result<Vec<_>, _>>()?;
        let phi_hat = self.phi_hat.to_spectrum(p, limits)?;
        Ok(WaveletSystem { p, m: self.m, tree, phases, mask, beta, beta_l, phi, psi, phi_hat })
    }
}

pub fn system_to_json(s: &WaveletSystem) -> String {
    to_json(&SystemFile::new(s))
}

pub fn parse_system(text: &str, limits: &Limits) -> Result<WaveletSystem, LoadError> {
    serde_json::from_str::<SystemFile>(text)?.into_system(limits)
}

/// Mask values from either a system file or a bare `{"p", "lambda"}` file.
pub fn parse_mask(text: &str) -> Result<MaskTable, LoadError> {
    #[derive(Deserialize)]
    struct MaskOnly {
        p: u64,
        lambda: Vec<Pair>,
    }
    let raw: MaskOnly = serde_json::from_str(text)?;
    MaskTable::new(modulus(raw.p)?, from_pairs(&raw.lambda)?).map_err(format_err)
}

// ---------------------------------------------------------------------------------------
// Signals

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalFile {
    pub p: u64,
    pub support_level: i32,
    pub resolution_level: i32,
    pub values: Vec<Pair>,
}

pub fn signal_to_json(f: &StepFunction) -> String {
    to_json(&SignalFile {
        p: f.modulus().get() as u64,
        support_level: f.support_level(),
        resolution_level: f.resolution_level(),
        values: to_pairs(f.values()),
    })
}

pub fn parse_signal(text: &str, limits: &Limits) -> Result<StepFunction, LoadError> {
    let raw: SignalFile = serde_json::from_str(text)?;
    let p = modulus(raw.p)?;
    TableFile { window: [raw.support_level, raw.resolution_level], values: raw.values }.to_step(p, limits)
}

// ---------------------------------------------------------------------------------------
// Coefficient pyramids

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    /// Digits `[a₋₁, a₋₂, …]` of the shift, trailing zeros dropped.
    pub shift: Vec<u32>,
    pub value: Pair,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub level: i32,
    pub entries: Vec<EntryFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PyramidFile {
    pub p: u64,
    pub approx: GridFile,
    /// Coarse to fine; each level holds the `p - 1` detail bands `l = 1, …, p-1`.
    pub details: Vec<Vec<GridFile>>,
}

fn key_digits(p: u64, mut key: u64) -> Vec<u32> {
    let mut digits = Vec::new();
    while key > 0 {
        digits.push((key % p) as u32);
        key /= p;
    }
    digits
}

fn digits_key(p: u64, digits: &[u32]) -> Result<u64, LoadError> {
    let mut key = 0u64;
    for &d in digits.iter().rev() {
        if d as u64 >= p {
            return Err(LoadError::Format(format!("shift digit {d} out of range for p = {p}")));
        }
        key = key
            .checked_mul(p)
            .and_then(|k| k.checked_add(d as u64))
            .ok_or_else(|| LoadError::Format("shift has too many digits".into()))?;
    }
    Ok(key)
}

impl GridFile {
    pub fn new(g: &CoeffGrid) -> Self {
        let p = g.p.get() as u64;
        GridFile {
            level: g.level,
            entries: g.entries.iter().map(|(&k, v)| EntryFile { shift: key_digits(p, k), value: [v.re, v.im] }).collect(),
        }
    }

    pub fn to_grid(&self, p: Modulus) -> Result<CoeffGrid, LoadError> {
        let mut grid = CoeffGrid::new(p, self.level);
        for e in &self.entries {
            let key = digits_key(p.get() as u64, &e.shift)?;
            let value = from_pairs(&[e.value])?[0];
            if grid.entries.insert(key, value).is_some() {
                return Err(LoadError::Format(format!("shift {:?} listed twice", e.shift)));
            }
        }
        Ok(grid)
    }
}

pub fn pyramid_to_json(pyr: &CoeffPyramid) -> String {
    to_json(&PyramidFile {
        p: pyr.approx.p.get() as u64,
        approx: GridFile::new(&pyr.approx),
        details: pyr.details.iter().map(|bands| bands.iter().map(GridFile::new).collect()).collect(),
    })
}

pub fn parse_pyramid(text: &str) -> Result<CoeffPyramid, LoadError> {
    let raw: PyramidFile = serde_json::from_str(text)?;
    let p = modulus(raw.p)?;
    let approx = raw.approx.to_grid(p)?;
    let mut details = Vec::with_capacity(raw.details.len());
    for (i, bands) in raw.details.iter().enumerate() {
        if bands.len() != p.as_usize() - 1 {
            return Err(format_err(Error::BandCount { expected: p.as_usize() - 1, got: bands.len() }));
        }
        let level = approx.level + i as i32;
        let grids = bands.iter().map(|b| b.to_grid(p)).collect::<Result<Vec<_>, _>>()?;
        if let Some(g) = grids.iter().find(|g| g.level != level) {
            return Err(format_err(Error::LevelMismatch(level, g.level)));
        }
        details.push(grids);
    }
    Ok(CoeffPyramid { approx, details })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::FilterBank;

    fn system(parent: &[usize], phases: &EdgePhases) -> WaveletSystem {
        let t = RootedTree::validate(parent, parent.len()).unwrap();
        WaveletSystem::build(&t, phases, &Limits::default()).unwrap()
    }

    #[test]
    fn tree_round_trip() {
        let mut phases = EdgePhases::new();
        phases.insert((3, 2), 0.25);
        let t = RootedTree::validate(&[0, 3, 3, 0, 5, 0, 2], 7).unwrap();
        let text = tree_to_json(&t, &phases);
        assert!(text.contains("\"3->2\": 0.25"));
        assert_eq!(parse_tree(&text).unwrap(), (t, phases));
    }

    #[test]
    fn tree_errors_are_classified() {
        let cyc = parse_tree(r#"{"p": 3, "parent": [0, 2, 1]}"#).unwrap_err();
        assert_eq!(cyc.exit_code(), 1);
        assert!(cyc.to_string().contains("cycle: 1\u{2192}2\u{2192}1"));
        assert_eq!(parse_tree("{\"p\": 3,").unwrap_err().exit_code(), 2);
        assert_eq!(parse_tree(r#"{"p": 3, "parent": [0, 0, 1], "extra": 1}"#).unwrap_err().exit_code(), 2);
        let bad_key = parse_tree(r#"{"p": 3, "parent": [0, 0, 1], "phases_turns": {"0-1": 0.5}}"#).unwrap_err();
        assert_eq!(bad_key.exit_code(), 2);
        let off_edge = parse_tree(r#"{"p": 3, "parent": [0, 0, 1], "phases_turns": {"0->2": 0.5}}"#).unwrap_err();
        assert_eq!(off_edge.exit_code(), 1);
    }

    #[test]
    fn system_round_trip_is_exact() {
        let mut phases = EdgePhases::new();
        phases.insert((0, 1), 0.125);
        phases.insert((1, 2), 0.7);
        let s = system(&[0, 0, 1], &phases);
        let text = system_to_json(&s);
        let back = parse_system(&text, &Limits::default()).unwrap();
        assert_eq!(back, s);
        assert_eq!(system_to_json(&back), text);
        assert!(text.contains("\"M\": 1"));
    }

    #[test]
    fn system_shape_errors() {
        let s = system(&[0, 0, 1], &EdgePhases::new());
        let mut raw = SystemFile::new(&s);
        raw.phi.values.pop();
        assert_eq!(raw.into_system(&Limits::default()).unwrap_err().exit_code(), 2);
        let mut raw = SystemFile::new(&s);
        raw.p = 4;
        assert_eq!(raw.into_system(&Limits::default()).unwrap_err().exit_code(), 2);
        let mut raw = SystemFile::new(&s);
        raw.phi_hat.window = [-1, 40];
        assert!(raw.into_system(&Limits::default()).is_err());
    }

    #[test]
    fn mask_from_system_or_bare() {
        let s = system(&[0, 0, 1], &EdgePhases::new());
        assert_eq!(parse_mask(&system_to_json(&s)).unwrap(), s.mask);
        let bare = r#"{"p": 3, "lambda": [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#;
        assert_eq!(parse_mask(bare).unwrap().lambda()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn signal_round_trip() {
        let p = Modulus::new(5).unwrap();
        let values = (0..25).map(|k| Complex64::new(k as f64, -0.5)).collect();
        let f = StepFunction::new(p, -1, 1, values).unwrap();
        assert_eq!(parse_signal(&signal_to_json(&f), &Limits::default()).unwrap(), f);
        let short = r#"{"p": 5, "support_level": -1, "resolution_level": 1, "values": [[0, 0]]}"#;
        assert_eq!(parse_signal(short, &Limits::default()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn pyramid_round_trip() {
        let s = system(&[0, 0, 1], &EdgePhases::new());
        let mut c = CoeffGrid::new(s.p, 1);
        c.entries.insert(0, Complex64::new(1.0, 0.0));
        c.entries.insert(7, Complex64::new(0.0, -2.0));
        let pyr = FilterBank::from_system(&s).analyze(&c, 2).unwrap();
        let text = pyramid_to_json(&pyr);
        assert_eq!(parse_pyramid(&text).unwrap(), pyr);
        // Key 7 = 1 + 3·2 is stored as digits [a₋₁, a₋₂] = [1, 2].
        let g = GridFile::new(&c);
        assert_eq!(g.entries[1].shift, vec![1, 2]);
        assert_eq!(g.to_grid(s.p).unwrap(), c);
    }
}
