//! Diagnostics derived from a spectrum: level spacings, branches and cusps,
//! minigaps, density of states, inverse participation ratio and eigenstate
//! maps.
//!
//! Level and spacing indices in public results are 1-based: `Δ_m = E_{m+1} - E_m`.

use std::fmt;
use std::io::Write;

use crate::chain::{Symbol, SymbolChain};
use crate::eigen::SpectralResult;
use crate::error::{invalid, Result};
use crate::export::{fmt_f64, write_columns, write_pgm};
use crate::peaks::prominent_peaks;

/// Default multiple of the median spacing that marks a gap between branches.
pub const DEFAULT_GAP_THRESHOLD: f64 = 100.0;
/// Default centered window (levels) for minigap detection.
pub const DEFAULT_MINIGAP_WINDOW: usize = 21;
/// Default multiple of the local median spacing for a minigap.
pub const DEFAULT_MINIGAP_FACTOR: f64 = 8.0;
/// Default half-window (spacings on each side) for cusp detection.
pub const DEFAULT_CUSP_HALF_WINDOW: usize = 30;
/// Default ratio between the median spacings on both sides of a cusp.
pub const DEFAULT_CUSP_JUMP: f64 = 5.0;
/// Default bin count of the density of states.
pub const DEFAULT_DOS_BINS: usize = 200;

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingSequence {
    values: Vec<f64>,
}

impl SpacingSequence {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Δ_m`, 1-based.
    pub fn get(&self, m: usize) -> Option<f64> {
        m.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// 1-based index of the largest spacing (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best + 1
    }

    /// Rows `(m, Δ_m, log10 Δ_m)`; the log column is empty for zero spacings.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "m,spacing,log10_spacing")?;
        for (i, &s) in self.values.iter().enumerate() {
            if s > 0.0 {
                writeln!(w, "{},{},{}", i + 1, fmt_f64(s), fmt_f64(s.log10()))?;
            } else {
                writeln!(w, "{},{},", i + 1, fmt_f64(s))?;
            }
        }
        Ok(())
    }
}

/// Consecutive level spacings of a sorted spectrum.
pub fn spacings(eigenvalues: &[f64]) -> Result<SpacingSequence> {
    if eigenvalues.len() < 2 {
        return Err(invalid("spacings need at least two levels"));
    }
    Ok(SpacingSequence {
        values: eigenvalues.windows(2).map(|w| w[1] - w[0]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    /// First level, 1-based.
    pub start: usize,
    /// Last level, 1-based, inclusive.
    pub end: usize,
    pub e_min: f64,
    pub e_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    /// Last level of the branch below the gap (the spacing index), 1-based.
    pub below: usize,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecomposition {
    pub branches: Vec<Branch>,
    pub gaps: Vec<Gap>,
}

impl BranchDecomposition {
    pub fn count(&self) -> usize {
        self.branches.len()
    }
}

/// Splits the spectrum wherever `Δ_m > gap_threshold * median(Δ)`.
pub fn detect_branches(eigenvalues: &[f64], gap_threshold: f64) -> BranchDecomposition {
    let n = eigenvalues.len();
    let mut gaps = Vec::new();
    if n >= 2 {
        let s: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
        let cut = gap_threshold * median(&s);
        gaps = s
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > cut)
            .map(|(i, &d)| Gap {
                below: i + 1,
                width: d,
            })
            .collect();
    }
    let mut branches = Vec::with_capacity(gaps.len() + 1);
    let mut start = 1;
    for g in gaps.iter().map(|g| g.below).chain(std::iter::once(n)) {
        if n == 0 {
            break;
        }
        branches.push(Branch {
            start,
            end: g,
            e_min: eigenvalues[start - 1],
            e_max: eigenvalues[g - 1],
        });
        start = g + 1;
    }
    BranchDecomposition { branches, gaps }
}

/// Levels where the slope of the sorted spectrum changes abruptly.
///
/// Returns 1-based level indices `m` where the median of `Δ_{m-h+1..=m}` and
/// the median of `Δ_{m+1..=m+h}` differ by at least `jump`. Neighbouring hits
/// closer than `h` are merged; each merged group is represented by the
/// middle of its strongest stretch.
pub fn detect_cusps(eigenvalues: &[f64], half_window: usize, jump: f64) -> Vec<usize> {
    let h = half_window.max(1);
    if eigenvalues.len() < 2 * h + 1 || jump <= 1.0 {
        return Vec::new();
    }
    let s: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let threshold = jump.ln();
    let mut hits: Vec<(usize, f64)> = Vec::new();
    for m in h..=s.len() - h {
        let left = median(&s[m - h..m]);
        let right = median(&s[m..m + h]);
        if left > 0.0 && right > 0.0 {
            let r = (right / left).ln();
            if r.abs() >= threshold {
                hits.push((m, r.abs()));
            }
        }
    }
    let mut clusters: Vec<Vec<(usize, f64)>> = Vec::new();
    for hit in hits {
        match clusters.last_mut() {
            Some(c) if hit.0 - c[c.len() - 1].0 <= h => c.push(hit),
            _ => clusters.push(vec![hit]),
        }
    }
    clusters
        .iter()
        .map(|c| {
            let best = c.iter().map(|x| x.1).fold(0.0, f64::max);
            let top: Vec<usize> = c
                .iter()
                .filter(|x| x.1 >= best * (1.0 - 1e-9))
                .map(|x| x.0)
                .collect();
            top[top.len() / 2]
        })
        .collect()
}

/// Isolated anomalously large spacings.
///
/// `Δ_m` is reported (1-based `m`) when it is the maximum of the centered
/// window of `window` spacings and exceeds `peak_factor` times that window's
/// median. Windows are truncated at the ends of the sequence.
pub fn detect_minigaps(spacings: &[f64], window: usize, peak_factor: f64) -> Result<Vec<usize>> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(invalid(format!(
            "minigap window must be odd and >= 3, got {window}"
        )));
    }
    if peak_factor <= 1.0 {
        return Err(invalid("minigap peak factor must exceed 1"));
    }
    let h = window / 2;
    let n = spacings.len();
    let mut out = Vec::new();
    for m in 0..n {
        let lo = m.saturating_sub(h);
        let hi = (m + h + 1).min(n);
        let win = &spacings[lo..hi];
        let v = spacings[m];
        if win.iter().all(|&x| x <= v) && v > peak_factor * median(win) {
            out.push(m + 1);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DosHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DosHistogram {
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Bins that are local maxima with prominence above `min_fraction` of the
    /// tallest bin.
    pub fn peaks(&self, min_fraction: f64) -> Vec<usize> {
        let values: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        let tallest = values.iter().cloned().fold(0.0, f64::max);
        prominent_peaks(&values, 0.0, min_fraction * tallest)
            .into_iter()
            .map(|p| p.index)
            .collect()
    }

    /// Maximal runs of empty bins that touch neither end, as `(first, last)` bins.
    pub fn interior_empty_runs(&self) -> Vec<(usize, usize)> {
        let n = self.counts.len();
        let mut runs = Vec::new();
        let mut i = 0;
        while i < n {
            if self.counts[i] == 0 {
                let start = i;
                while i + 1 < n && self.counts[i + 1] == 0 {
                    i += 1;
                }
                if start > 0 && i + 1 < n {
                    runs.push((start, i));
                }
            }
            i += 1;
        }
        runs
    }

    pub fn write_csv<W: Write>(&self, w: W, header: &str) -> Result<()> {
        write_columns(
            w,
            header,
            ("bin_center", "count"),
            self.centers().into_iter().zip(self.counts.iter().copied()),
        )
    }
}

/// Uniform-bin histogram over `[min(E) - η, max(E) + η]`, `η = 1e-12 * range`.
pub fn dos(eigenvalues: &[f64], bins: usize) -> Result<DosHistogram> {
    if bins < 2 {
        return Err(invalid("density of states needs at least two bins"));
    }
    if eigenvalues.is_empty() {
        return Err(invalid("density of states of an empty spectrum"));
    }
    let lo_e = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_e = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let range = hi_e - lo_e;
    let eta = if range > 0.0 {
        1e-12 * range
    } else {
        1e-12 * lo_e.abs().max(1.0)
    };
    let lo = lo_e - eta;
    let hi = hi_e + eta;
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0usize; bins];
    for &e in eigenvalues {
        let b = (((e - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(DosHistogram { bin_edges, counts })
}

/// Inverse participation ratio `Σ|ψ_i|^4` of a normalized vector.
pub fn ipr(psi: &[f64]) -> Result<f64> {
    let norm2: f64 = psi.iter().map(|x| x * x).sum();
    if psi.is_empty() || (norm2 - 1.0).abs() > 1e-10 {
        return Err(invalid(format!(
            "vector is not normalized (norm^2 = {norm2})"
        )));
    }
    Ok(psi.iter().map(|x| x.powi(4)).sum())
}

/// IPR of every eigenvector in ascending eigenvalue order.
pub fn ipr_all(result: &SpectralResult) -> Result<Vec<f64>> {
    result.eigenvectors().map(ipr).collect()
}

pub fn write_ipr_csv<W: Write>(values: &[f64], w: W, header: &str) -> Result<()> {
    write_columns(
        w,
        header,
        ("m", "ipr"),
        values.iter().enumerate().map(|(i, &r)| (i + 1, r)),
    )
}

pub fn write_spectrum_csv<W: Write>(eigenvalues: &[f64], w: W, header: &str) -> Result<()> {
    write_columns(
        w,
        header,
        ("m", "energy"),
        eigenvalues.iter().enumerate().map(|(i, &e)| (i + 1, e)),
    )
}

/// `|ψ_i^(m)|` with sites as rows and states (ascending energy) as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateMap {
    n_sites: usize,
    n_states: usize,
    // row-major: site i, state m at i * n_states + m
    magnitudes: Vec<f64>,
}

impl EigenstateMap {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn get(&self, site: usize, state: usize) -> f64 {
        self.magnitudes[site * self.n_states + state]
    }

    pub fn column(&self, state: usize) -> Vec<f64> {
        (0..self.n_sites).map(|i| self.get(i, state)).collect()
    }

    pub fn max(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(0.0, f64::max)
    }

    /// Greyscale pixels `round(255 |ψ| / max|ψ|)`, one row per site.
    pub fn pixels(&self) -> Vec<u8> {
        let max = self.max();
        self.magnitudes
            .iter()
            .map(|&v| {
                if max > 0.0 {
                    (255.0 * v / max).round() as u8
                } else {
                    0
                }
            })
            .collect()
    }

    /// Binary PGM: width = number of states, height = number of sites.
    pub fn write_pgm<W: Write>(&self, w: W, comment: &str) -> Result<()> {
        write_pgm(w, comment, self.n_states, self.n_sites, &self.pixels())
    }

    /// CSV rows `(site, state, magnitude)`.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "site,state,magnitude")?;
        for i in 0..self.n_sites {
            for m in 0..self.n_states {
                writeln!(w, "{},{},{}", i + 1, m + 1, fmt_f64(self.get(i, m)))?;
            }
        }
        Ok(())
    }
}

pub fn eigenstate_map(result: &SpectralResult) -> EigenstateMap {
    let n = result.len();
    let mut magnitudes = vec![0.0; n * n];
    for (m, v) in result.eigenvectors().enumerate() {
        for (i, x) in v.iter().enumerate() {
            magnitudes[i * n + m] = x.abs();
        }
    }
    EigenstateMap {
        n_sites: n,
        n_states: n,
        magnitudes,
    }
}

/// Weight `Σ_{i ∈ A} |ψ_i|^2` of each eigenstate on the `A` sites.
pub fn species_weights(result: &SpectralResult, chain: &SymbolChain) -> Result<Vec<f64>> {
    if chain.len() != result.len() {
        return Err(invalid("chain and spectrum sizes differ"));
    }
    Ok(result
        .eigenvectors()
        .map(|v| {
            v.iter()
                .zip(chain.sites())
                .filter(|(_, &s)| s == Symbol::A)
                .map(|(x, _)| x * x)
                .sum()
        })
        .collect())
}

/// Signed gap between the `A`-dominated and `B`-dominated parts of the spectrum.
///
/// A state is `A`-dominated when at least half of its weight sits on `A`
/// sites. The result is `min E(B-dominated) - max E(A-dominated)`, which is
/// positive while the two branches are separated and negative once they
/// interpenetrate. `None` when either class is empty.
pub fn species_gap(result: &SpectralResult, chain: &SymbolChain) -> Result<Option<f64>> {
    let weights = species_weights(result, chain)?;
    let mut a_max = f64::NEG_INFINITY;
    let mut b_min = f64::INFINITY;
    for (&e, &w) in result.eigenvalues().iter().zip(&weights) {
        if w >= 0.5 {
            a_max = a_max.max(e);
        } else {
            b_min = b_min.min(e);
        }
    }
    Ok((a_max.is_finite() && b_min.is_finite()).then_some(b_min - a_max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchConfig {
    pub gap_threshold: f64,
    pub cusp_half_window: usize,
    pub cusp_jump: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            cusp_half_window: DEFAULT_CUSP_HALF_WINDOW,
            cusp_jump: DEFAULT_CUSP_JUMP,
        }
    }
}

/// Global shape of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumRegime {
    /// Branches separated by true gaps.
    Gapped {
        branches: usize,
    },
    /// The species gap has just closed; neither a gap nor cusps are resolved.
    Marginal,
    /// Gapless branches joined at cusps.
    Cusped {
        branches: usize,
    },
    Single,
}

impl SpectrumRegime {
    pub fn branch_count(&self) -> Option<usize> {
        match *self {
            SpectrumRegime::Gapped { branches } | SpectrumRegime::Cusped { branches } => {
                Some(branches)
            }
            SpectrumRegime::Single => Some(1),
            SpectrumRegime::Marginal => None,
        }
    }
}

impl fmt::Display for SpectrumRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.branch_count() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "marginal"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: SpectrumRegime,
    pub branches: BranchDecomposition,
    pub cusps: Vec<usize>,
    pub species_gap: Option<f64>,
    pub median_spacing: f64,
}

/// Classifies a sorted spectrum by gaps first, then by the species gap, then
/// by cusps.
pub fn classify_spectrum(
    eigenvalues: &[f64],
    species_gap: Option<f64>,
    cfg: &BranchConfig,
) -> Result<RegimeReport> {
    let s = spacings(eigenvalues)?;
    let median_spacing = median(s.as_slice());
    let branches = detect_branches(eigenvalues, cfg.gap_threshold);
    let cusps = detect_cusps(eigenvalues, cfg.cusp_half_window, cfg.cusp_jump);
    let marginal = species_gap
        .map(|g| g.abs() <= cfg.gap_threshold * median_spacing)
        .unwrap_or(false);
    let regime = if branches.count() > 1 {
        SpectrumRegime::Gapped {
            branches: branches.count(),
        }
    } else if marginal {
        SpectrumRegime::Marginal
    } else if !cusps.is_empty() {
        SpectrumRegime::Cusped {
            branches: cusps.len() + 1,
        }
    } else {
        SpectrumRegime::Single
    };
    Ok(RegimeReport {
        regime,
        branches,
        cusps,
        species_gap,
        median_spacing,
    })
}
