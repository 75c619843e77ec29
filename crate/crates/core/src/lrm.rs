//! Local resonator model.
//!
//! Every maximal single-species run of the scaled chain is treated as an
//! isolated open chain. A run of `n` sites contributes the levels
//! `ε + 2t cos(mπ/(n+1))`, `m = 1..=n`; the scaled chain of order `l` holds
//! one run of each species for every even size `2k`, `k = 1..=l`, plus the
//! leading single `A` site.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_integer::Integer;

use crate::chain::{scaled_chain_length, Symbol};
use crate::error::{invalid, Result};
use crate::export::fmt_f64;
use crate::hamiltonian::TbParams;
use crate::spectral::{detect_minigaps, spacings};

/// `m / (n + 1)` in lowest terms; the phase (in units of π) of a resonator mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModePhase {
    pub num: u64,
    pub den: u64,
}

impl ModePhase {
    pub fn new(mode: u64, size: u64) -> Self {
        let den = size + 1;
        let g = mode.gcd(&den);
        Self {
            num: mode / g,
            den: den / g,
        }
    }

    /// `cos(π num/den)`, evaluated from the reduced fraction so equal phases
    /// give bit-identical values.
    pub fn cos(&self) -> f64 {
        (PI * self.num as f64 / self.den as f64).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorLevel {
    pub species: Symbol,
    pub size: usize,
    pub mode: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrmSpectrum {
    /// Sorted by energy; ties keep generation order.
    levels: Vec<ResonatorLevel>,
    order: usize,
}

impl LrmSpectrum {
    pub fn levels(&self) -> &[ResonatorLevel] {
        &self.levels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// CSV rows `(species, size, mode, energy)`.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "species,size,mode,energy")?;
        for l in &self.levels {
            writeln!(
                w,
                "{},{},{},{}",
                l.species,
                l.size,
                l.mode,
                fmt_f64(l.energy)
            )?;
        }
        Ok(())
    }
}

fn resonator_energy(eps: f64, t: f64, phase: ModePhase) -> f64 {
    eps + 2.0 * t * phase.cos()
}

/// Union of the singleton `A` level and all `A`/`B` resonator spectra of sizes `2k`, `k ≤ l`.
pub fn lrm_spectrum(l: usize, params: &TbParams) -> Result<LrmSpectrum> {
    if l == 0 {
        return Err(invalid("resonator model order must be at least 1"));
    }
    params.validate()?;
    let mut levels = Vec::with_capacity(scaled_chain_length(l));
    levels.push(ResonatorLevel {
        species: Symbol::A,
        size: 1,
        mode: 1,
        energy: params.eps_a,
    });
    for k in 1..=l {
        let n = 2 * k;
        for species in [Symbol::A, Symbol::B] {
            let eps = params.onsite(species);
            for m in 1..=n {
                levels.push(ResonatorLevel {
                    species,
                    size: n,
                    mode: m,
                    energy: resonator_energy(eps, params.t, ModePhase::new(m as u64, n as u64)),
                });
            }
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(LrmSpectrum { levels, order: l })
}

/// Distance between the top of the `A` levels and the bottom of the `B`
/// levels: `(ε_B - 2|t| cos(π/(2l+1))) - (ε_A + 2|t| cos(π/(2l+1)))`.
/// Nonpositive once the gap has closed.
pub fn lrm_gap_width(l: usize, params: &TbParams) -> f64 {
    let c = (PI / (2 * l + 1) as f64).cos();
    let (lo, hi) = if params.eps_a <= params.eps_b {
        (params.eps_a, params.eps_b)
    } else {
        (params.eps_b, params.eps_a)
    };
    (hi - 2.0 * params.t.abs() * c) - (lo + 2.0 * params.t.abs() * c)
}

/// Base pair `(m, k)` and odd multiplier `α` generating the coincident mode
/// `αm` of the resonator with `α(2k+1) - 1` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegeneracyTuple {
    pub m: usize,
    pub k: usize,
    pub alpha: usize,
}

impl DegeneracyTuple {
    pub fn base(&self) -> (usize, usize) {
        (self.m, 2 * self.k)
    }

    /// `(mode, size)` of the implied level.
    pub fn implied(&self) -> (usize, usize) {
        (self.alpha * self.m, self.alpha * (2 * self.k + 1) - 1)
    }
}

/// Resonator modes of one species that share a cosine, hence an energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyGroup {
    pub phase: ModePhase,
    /// `(size, mode)` pairs, sorted.
    pub members: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub order: usize,
    /// Tuples with `α ≥ 3` whose implied resonator fits in the chain.
    pub tuples: Vec<DegeneracyTuple>,
    /// Groups of two or more coincident modes. Each group occurs once per
    /// species, at `ε_A + 2t cos(πφ)` and `ε_B + 2t cos(πφ)`.
    pub groups: Vec<DegeneracyGroup>,
}

impl DegeneracyReport {
    /// Number of degenerate pairs lost from the sorted spectrum of one species,
    /// i.e. zero spacings contributed per species.
    pub fn zero_spacings_per_species(&self) -> usize {
        self.groups.iter().map(|g| g.members.len() - 1).sum()
    }
}

/// Same-species level coincidences of the resonator model.
///
/// Tuples `(αm, α(2k+1))` with odd `α` and `m ≤ 2k`, `k ≤ l` are generated,
/// restricted to implied sizes `≤ 2l`, and joined into groups. Every link is
/// checked against equality of the reduced fractions `m/(n+1)`.
pub fn enumerate_degeneracies(l: usize) -> Result<DegeneracyReport> {
    if l == 0 {
        return Err(invalid("resonator model order must be at least 1"));
    }
    let max_size = 2 * l;
    let mut tuples = Vec::new();
    let mut groups: BTreeMap<ModePhase, Vec<(usize, usize)>> = BTreeMap::new();
    for k in 1..=l {
        for m in 1..=2 * k {
            let mut alpha = 3;
            while alpha * (2 * k + 1) - 1 <= max_size {
                let t = DegeneracyTuple { m, k, alpha };
                let (bm, bn) = t.base();
                let (im, in_) = t.implied();
                let phase = ModePhase::new(bm as u64, bn as u64);
                if phase != ModePhase::new(im as u64, in_ as u64) {
                    return Err(invalid(format!(
                        "tuple {t:?} does not preserve the mode phase"
                    )));
                }
                tuples.push(t);
                let g = groups.entry(phase).or_default();
                g.push((bn, bm));
                g.push((in_, im));
                alpha += 2;
            }
        }
    }
    let groups = groups
        .into_iter()
        .map(|(phase, mut members)| {
            members.sort_unstable();
            members.dedup();
            DegeneracyGroup { phase, members }
        })
        .collect();
    Ok(DegeneracyReport {
        order: l,
        tuples,
        groups,
    })
}

/// Pair of levels of different species that coincide within `tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSpeciesCoincidence {
    pub a: ResonatorLevel,
    pub b: ResonatorLevel,
}

/// Accidental `A`/`B` coincidences, `2t(c_A - c_B) = ε_B - ε_A` within `tol`.
pub fn cross_species_coincidences(
    spectrum: &LrmSpectrum,
    tol: f64,
) -> Vec<CrossSpeciesCoincidence> {
    let lv = spectrum.levels();
    let mut out = Vec::new();
    for i in 0..lv.len() {
        for j in i + 1..lv.len() {
            if lv[j].energy - lv[i].energy > tol {
                break;
            }
            if lv[i].species != lv[j].species {
                let (a, b) = if lv[i].species == Symbol::A {
                    (lv[i], lv[j])
                } else {
                    (lv[j], lv[i])
                };
                out.push(CrossSpeciesCoincidence { a, b });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrmComparison {
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub lrm_minigaps: Vec<usize>,
    pub tb_minigaps: Vec<usize>,
    /// LRM minigaps with a TB minigap at most one index away.
    pub matching_minigaps: usize,
    pub lrm_zero_spacings: usize,
    pub tb_min_spacing: f64,
}

impl LrmComparison {
    pub fn write_report<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "quantity,value")?;
        writeln!(w, "max_rank_deviation,{}", fmt_f64(self.max_deviation))?;
        writeln!(w, "mean_rank_deviation,{}", fmt_f64(self.mean_deviation))?;
        writeln!(w, "lrm_minigaps,{}", self.lrm_minigaps.len())?;
        writeln!(w, "tb_minigaps,{}", self.tb_minigaps.len())?;
        writeln!(w, "matching_minigaps,{}", self.matching_minigaps)?;
        writeln!(w, "lrm_zero_spacings,{}", self.lrm_zero_spacings)?;
        writeln!(w, "tb_min_spacing,{}", fmt_f64(self.tb_min_spacing))?;
        Ok(())
    }
}

/// Rank-wise comparison of the resonator model with a sorted TB spectrum.
pub fn compare_to_tb(
    lrm: &LrmSpectrum,
    tb: &[f64],
    window: usize,
    peak_factor: f64,
) -> Result<LrmComparison> {
    if lrm.len() != tb.len() {
        return Err(invalid(format!(
            "resonator model has {} levels, TB spectrum {}",
            lrm.len(),
            tb.len()
        )));
    }
    let lrm_e = lrm.energies();
    let dev: Vec<f64> = lrm_e.iter().zip(tb).map(|(a, b)| (a - b).abs()).collect();
    let max_deviation = dev.iter().cloned().fold(0.0, f64::max);
    let mean_deviation = dev.iter().sum::<f64>() / dev.len() as f64;

    let (lrm_minigaps, tb_minigaps, lrm_zero_spacings, tb_min_spacing) = if tb.len() >= 2 {
        let ls = spacings(&lrm_e)?;
        let ts = spacings(tb)?;
        (
            detect_minigaps(ls.as_slice(), window, peak_factor)?,
            detect_minigaps(ts.as_slice(), window, peak_factor)?,
            ls.as_slice().iter().filter(|&&s| s == 0.0).count(),
            ts.as_slice().iter().cloned().fold(f64::INFINITY, f64::min),
        )
    } else {
        (Vec::new(), Vec::new(), 0, f64::INFINITY)
    };
    let matching_minigaps = lrm_minigaps
        .iter()
        .filter(|&&m| tb_minigaps.iter().any(|&n| m.abs_diff(n) <= 1))
        .count();
    Ok(LrmComparison {
        max_deviation,
        mean_deviation,
        lrm_minigaps,
        tb_minigaps,
        matching_minigaps,
        lrm_zero_spacings,
        tb_min_spacing,
    })
}
