//! Coherent transmission through a finite chain between two semi-infinite
//! single-band leads.
//!
//! The leads are folded into the device as retarded self-energies on the end
//! sites. With a unit-amplitude wave arriving from the left, the device
//! wave function solves
//!
//! ```text
//! (E - H - Σ_L - Σ_R) ψ = s,   s_1 = t_LD (1 - λ_L²)
//! ```
//!
//! where `λ` is the outgoing Bloch factor of a lead and `Σ = t_couple² λ / t_lead`.
//! The first right-lead site then carries the transmitted amplitude
//! `τ = (t_DR λ_R / t_R) ψ_N`; this is the same unknown as in the system
//! extended by one lead site on each side. The transmission is
//! `T = (v_R / v_L) |τ|²` with lead group velocities `v = 2|t_lead| sin k`.
//! For identical leads the velocity ratio is one and `T = |τ|²`.
//!
//! [`transfer_matrix_transmission`] computes the same quantity by propagating
//! the wave function site by site with 2x2 transfer matrices and serves as an
//! independent cross-check.

use std::io::Write;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::write_columns;
use crate::hamiltonian::TridiagonalHamiltonian;
use crate::peaks::prominent_peaks;

/// Relative distance to a band edge below which an energy counts as singular.
const BAND_EDGE_TOL: f64 = 1e-12;

/// Default number of energies in a sweep.
pub const DEFAULT_GRID_POINTS: usize = 4001;
/// Default distance kept from the lead band edges.
pub const DEFAULT_EDGE_MARGIN: f64 = 1e-4;
/// A transmission peak must exceed this value.
pub const PEAK_MIN_HEIGHT: f64 = 0.5;
/// ... and rise this much above the higher of its flanking minima.
pub const PEAK_MIN_PROMINENCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadParams {
    pub eps: f64,
    pub t_lead: f64,
    /// Coupling between the lead and the adjacent device site.
    pub t_couple: f64,
}

impl Default for LeadParams {
    fn default() -> Self {
        Self {
            eps: 1.0,
            t_lead: 1.0,
            t_couple: 1.0,
        }
    }
}

/// A lead eigenmode at a given energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadMode {
    /// `arccos((E - ε) / 2t)`: real in `(0, π)` inside the band, with
    /// positive imaginary part outside it.
    pub k: Complex64,
    /// Bloch factor per site of the wave leaving the device.
    pub outgoing: Complex64,
    pub propagating: bool,
}

impl LeadParams {
    pub fn new(eps: f64, t_lead: f64, t_couple: f64) -> Result<Self> {
        let p = Self {
            eps,
            t_lead,
            t_couple,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.t_lead.is_finite() && self.t_couple.is_finite()) {
            return Err(invalid("lead parameters must be finite"));
        }
        if self.t_lead == 0.0 {
            return Err(invalid("lead hopping must be nonzero"));
        }
        Ok(())
    }

    /// Propagating window `[ε - 2|t|, ε + 2|t|]`.
    pub fn band(&self) -> (f64, f64) {
        let w = 2.0 * self.t_lead.abs();
        (self.eps - w, self.eps + w)
    }

    pub fn mode(&self, energy: f64) -> Result<LeadMode> {
        self.validate()?;
        let x = (energy - self.eps) / (2.0 * self.t_lead);
        if (x.abs() - 1.0).abs() <= BAND_EDGE_TOL {
            return Err(Error::SingularEnergy { energy });
        }
        if x.abs() < 1.0 {
            let k = x.acos();
            // Im(λ / t_lead) <= 0 makes the self-energy retarded.
            let sign = -self.t_lead.signum();
            Ok(LeadMode {
                k: Complex64::new(k, 0.0),
                outgoing: Complex64::new(k.cos(), sign * k.sin()),
                propagating: true,
            })
        } else {
            let kappa = x.abs().acosh();
            let re = if x > 0.0 { 0.0 } else { std::f64::consts::PI };
            let lambda = x - x.signum() * (x * x - 1.0).sqrt();
            Ok(LeadMode {
                k: Complex64::new(re, kappa),
                outgoing: Complex64::new(lambda, 0.0),
                propagating: false,
            })
        }
    }

    /// Retarded self-energy folded onto the adjacent device site.
    pub fn self_energy(&self, mode: &LeadMode) -> Complex64 {
        mode.outgoing * (self.t_couple * self.t_couple / self.t_lead)
    }

    /// Group velocity `2|t| sin k` of a propagating mode.
    pub fn velocity(&self, mode: &LeadMode) -> f64 {
        2.0 * self.t_lead.abs() * mode.k.re.sin()
    }
}

/// Complex wavenumber of a lead at energy `energy`.
pub fn lead_wavenumber(energy: f64, lead: &LeadParams) -> Result<Complex64> {
    lead.mode(energy).map(|m| m.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Leads {
    pub left: LeadParams,
    pub right: LeadParams,
}

impl Leads {
    pub fn new(left: LeadParams, right: LeadParams) -> Self {
        Self { left, right }
    }

    pub fn swapped(&self) -> Self {
        Self {
            left: self.right,
            right: self.left,
        }
    }

    /// Energies propagating in both leads.
    pub fn common_band(&self) -> (f64, f64) {
        let (a, b) = self.left.band();
        let (c, d) = self.right.band();
        (a.max(c), b.min(d))
    }

    fn propagating_modes(&self, energy: f64) -> Result<(LeadMode, LeadMode)> {
        let l = self.left.mode(energy)?;
        let r = self.right.mode(energy)?;
        if !(l.propagating && r.propagating) {
            return Err(Error::OutsideBand { energy });
        }
        Ok((l, r))
    }
}

/// Transmission probability at `energy` by self-energy folding.
pub fn transmission_at(energy: f64, device: &TridiagonalHamiltonian, leads: &Leads) -> Result<f64> {
    let (ml, mr) = leads.propagating_modes(energy)?;
    let (left, right) = (&leads.left, &leads.right);
    let n = device.len();

    let mut diag: Vec<Complex64> = device
        .diag()
        .iter()
        .map(|&d| Complex64::new(energy - d, 0.0))
        .collect();
    diag[0] -= left.self_energy(&ml);
    diag[n - 1] -= right.self_energy(&mr);
    let mut lower: Vec<Complex64> = device
        .offdiag()
        .iter()
        .map(|&t| Complex64::new(-t, 0.0))
        .collect();
    let mut upper = lower.clone();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let lambda_l = ml.outgoing;
    rhs[0] = (Complex64::new(1.0, 0.0) - lambda_l * lambda_l) * left.t_couple;

    solve_tridiagonal(&mut lower, &mut diag, &mut upper, &mut rhs)?;

    let tau = mr.outgoing * (right.t_couple / right.t_lead) * rhs[n - 1];
    Ok(right.velocity(&mr) / left.velocity(&ml) * tau.norm_sqr())
}

/// Transmission probability at `energy` from 2x2 transfer-matrix products.
///
/// A purely outgoing unit wave is placed in the right lead and propagated to
/// the left lead, where it is split into incoming and reflected parts.
/// Intended for moderate chain lengths: strongly evanescent energies grow the
/// wave exponentially and eventually overflow.
pub fn transfer_matrix_transmission(
    energy: f64,
    device: &TridiagonalHamiltonian,
    leads: &Leads,
) -> Result<f64> {
    let (ml, mr) = leads.propagating_modes(energy)?;
    let (left, right) = (&leads.left, &leads.right);
    let n = device.len();
    if left.t_couple == 0.0 || right.t_couple == 0.0 || device.offdiag().contains(&0.0) {
        return Err(invalid("transfer matrices need nonzero couplings"));
    }

    // Extended chain: site 0 is the last left-lead site, 1..=n the device,
    // n+1 the first right-lead site.
    let onsite = |j: usize| -> f64 {
        match j {
            0 => left.eps,
            j if j == n + 1 => right.eps,
            j => device.diag()[j - 1],
        }
    };
    // hop(j) couples sites j and j+1, for j = -1..=n+1 shifted by one.
    let hop = |j: isize| -> f64 {
        match j {
            -1 => left.t_lead,
            0 => left.t_couple,
            j if j == n as isize => right.t_couple,
            j if j == n as isize + 1 => right.t_lead,
            j => device.offdiag()[j as usize - 1],
        }
    };

    // (ψ_j, ψ_{j+1}) starting at j = n+1 with ψ_{n+1} = 1, ψ_{n+2} = λ_R
    let mut cur = Complex64::new(1.0, 0.0);
    let mut next = mr.outgoing;
    for j in (0..=n + 1).rev() {
        let e = energy - onsite(j);
        let prev = (cur * e - next * hop(j as isize)) / hop(j as isize - 1);
        if !(prev.re.is_finite() && prev.im.is_finite()) {
            return Err(Error::Overflow { site: j });
        }
        next = cur;
        cur = prev;
    }
    // now cur = ψ_{-1}, next = ψ_0
    let lambda = ml.outgoing;
    let incoming = (cur - lambda * next) / (lambda.inv() - lambda);
    Ok(right.velocity(&mr) / left.velocity(&ml) / incoming.norm_sqr())
}

/// Uniform energy grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl EnergyGrid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if points < 2 || !start.is_finite() || !end.is_finite() || end <= start {
            return Err(invalid(
                "energy grid needs at least two points and end > start",
            ));
        }
        Ok(Self { start, end, points })
    }

    /// The band shared by both leads, shrunk by `margin` at each edge.
    pub fn lead_window(leads: &Leads, points: usize, margin: f64) -> Result<Self> {
        let (lo, hi) = leads.common_band();
        Self::new(lo + margin, hi - margin, points)
    }

    pub fn energies(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionCurve {
    pub energies: Vec<f64>,
    pub transmission: Vec<f64>,
    /// Indices into `energies` of resonance peaks.
    pub peaks: Vec<usize>,
}

impl TransmissionCurve {
    pub fn peak_energies(&self) -> Vec<f64> {
        self.peaks.iter().map(|&i| self.energies[i]).collect()
    }

    pub fn max(&self) -> f64 {
        self.transmission.iter().cloned().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W, header: &str) -> Result<()> {
        write_columns(
            w,
            header,
            ("energy", "transmission"),
            self.energies
                .iter()
                .copied()
                .zip(self.transmission.iter().copied()),
        )
    }

    pub fn write_peaks_csv<W: Write>(&self, w: W, header: &str) -> Result<()> {
        write_columns(
            w,
            header,
            ("energy_peak", "transmission_peak"),
            self.peaks
                .iter()
                .map(|&i| (self.energies[i], self.transmission[i])),
        )
    }
}

/// Transmission resonances: local maxima above [`PEAK_MIN_HEIGHT`] with
/// prominence above [`PEAK_MIN_PROMINENCE`].
pub fn detect_transmission_peaks(transmission: &[f64]) -> Vec<usize> {
    prominent_peaks(transmission, PEAK_MIN_HEIGHT, PEAK_MIN_PROMINENCE)
        .into_iter()
        .map(|p| p.index)
        .collect()
}

/// Evaluates the transmission on every grid energy. Points on a band edge
/// are dropped with a warning; other failures abort the sweep.
pub fn transmission_sweep(
    grid: &EnergyGrid,
    device: &TridiagonalHamiltonian,
    leads: &Leads,
) -> Result<TransmissionCurve> {
    let energies = grid.energies();
    let values: Vec<Result<f64>> = energies
        .par_iter()
        .map(|&e| transmission_at(e, device, leads))
        .collect();
    let mut kept_e = Vec::with_capacity(energies.len());
    let mut kept_t = Vec::with_capacity(energies.len());
    for (e, v) in energies.into_iter().zip(values) {
        match v {
            Ok(t) => {
                kept_e.push(e);
                kept_t.push(t);
            }
            Err(Error::SingularEnergy { energy }) => {
                warn!("dropping band-edge energy {energy}");
            }
            Err(other) => return Err(other),
        }
    }
    let peaks = detect_transmission_peaks(&kept_t);
    Ok(TransmissionCurve {
        energies: kept_e,
        transmission: kept_t,
        peaks,
    })
}

/// Gaussian elimination with partial pivoting on a tridiagonal system.
/// `lower`, `diag` and `upper` are overwritten; the solution replaces `rhs`.
fn solve_tridiagonal(
    lower: &mut [Complex64],
    diag: &mut [Complex64],
    upper: &mut [Complex64],
    rhs: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..n.saturating_sub(1) {
        if diag[i].norm() >= lower[i].norm() {
            if diag[i] == zero {
                return Err(Error::LinearSolve { row: i });
            }
            let fact = lower[i] / diag[i];
            diag[i + 1] -= fact * upper[i];
            rhs[i + 1] -= fact * rhs[i];
            // lower[i] now stores the second superdiagonal entry of row i
            lower[i] = zero;
        } else {
            let fact = diag[i] / lower[i];
            diag[i] = lower[i];
            let tmp = diag[i + 1];
            diag[i + 1] = upper[i] - fact * tmp;
            if i + 2 < n {
                lower[i] = upper[i + 1];
                upper[i + 1] = -fact * lower[i];
            } else {
                lower[i] = zero;
            }
            upper[i] = tmp;
            let b = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = b - fact * rhs[i + 1];
        }
    }
    if diag[n - 1] == zero {
        return Err(Error::LinearSolve { row: n - 1 });
    }
    rhs[n - 1] /= diag[n - 1];
    if n > 1 {
        rhs[n - 2] = (rhs[n - 2] - upper[n - 2] * rhs[n - 1]) / diag[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1] - lower[i] * rhs[i + 2]) / diag[i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wavenumber_examples() {
        let lead = LeadParams::new(0.3, 1.0, 1.0).unwrap();
        assert!((lead_wavenumber(0.3, &lead).unwrap() - c(PI / 2.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            lead_wavenumber(2.3, &lead),
            Err(Error::SingularEnergy { .. })
        ));
        let lead = LeadParams::default();
        assert!((lead_wavenumber(2.0, &lead).unwrap() - c(PI / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evanescent_mode_decays() {
        let lead = LeadParams::default();
        for e in [3.5, -1.5, 10.0] {
            let m = lead.mode(e).unwrap();
            assert!(!m.propagating);
            assert!(m.outgoing.norm() < 1.0);
            assert!(m.k.im > 0.0);
            // dispersion holds for the complex wavenumber too
            let back = lead.eps + 2.0 * lead.t_lead * m.k.cos();
            assert!((back - c(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn self_energy_is_retarded() {
        for t in [1.0, -0.7] {
            let lead = LeadParams::new(0.0, t, 0.4).unwrap();
            for e in [-1.0, 0.0, 0.9] {
                let m = lead.mode(e).unwrap();
                assert!(lead.self_energy(&m).im <= 0.0);
                // outgoing factor solves t(λ + 1/λ) = E - ε
                let lhs = (m.outgoing + m.outgoing.inv()) * t;
                assert!((lhs - c(e, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matched_single_site_is_transparent() {
        let device = TridiagonalHamiltonian::uniform(1, 1.0, 1.0).unwrap();
        let leads = Leads::default();
        for e in [-0.5, 0.2, 1.0, 2.7] {
            assert!((transmission_at(e, &device, &leads).unwrap() - 1.0).abs() < 1e-12);
            assert!(
                (transfer_matrix_transmission(e, &device, &leads).unwrap() - 1.0).abs() < 1e-12
            );
        }
    }

    #[test]
    fn outside_band_is_rejected() {
        let device = TridiagonalHamiltonian::uniform(3, 1.0, 1.0).unwrap();
        assert!(matches!(
            transmission_at(3.5, &device, &Leads::default()),
            Err(Error::OutsideBand { .. })
        ));
        assert!(matches!(
            transmission_at(3.0, &device, &Leads::default()),
            Err(Error::SingularEnergy { .. })
        ));
    }

    #[test]
    fn pivoting_solver_matches_dense() {
        // zero leading diagonal forces a row interchange
        let n = 6;
        let mut lower: Vec<Complex64> = (0..n - 1).map(|i| c(1.0 + i as f64, 0.5)).collect();
        let mut diag: Vec<Complex64> = (0..n)
            .map(|i| c(if i == 0 { 0.0 } else { 0.1 * i as f64 }, -0.2))
            .collect();
        let mut upper: Vec<Complex64> = (0..n - 1).map(|i| c(-0.3, 0.1 * i as f64)).collect();
        let x_true: Vec<Complex64> = (0..n).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut rhs = vec![c(0.0, 0.0); n];
        for i in 0..n {
            rhs[i] = diag[i] * x_true[i];
            if i > 0 {
                rhs[i] += lower[i - 1] * x_true[i - 1];
            }
            if i + 1 < n {
                rhs[i] += upper[i] * x_true[i + 1];
            }
        }
        solve_tridiagonal(&mut lower, &mut diag, &mut upper, &mut rhs).unwrap();
        for (a, b) in rhs.iter().zip(&x_true) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_system_reports_row() {
        let mut lower = vec![c(0.0, 0.0)];
        let mut diag = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let mut upper = vec![c(0.0, 0.0)];
        let mut rhs = vec![c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            solve_tridiagonal(&mut lower, &mut diag, &mut upper, &mut rhs),
            Err(Error::LinearSolve { row: 0 })
        ));
    }

    #[test]
    fn grid_endpoints() {
        let g = EnergyGrid::lead_window(&Leads::default(), 5, 1e-4).unwrap();
        let e = g.energies();
        assert_eq!(e.len(), 5);
        assert_eq!(e[0], -1.0 + 1e-4);
        assert_eq!(e[4], 3.0 - 1e-4);
        assert!(EnergyGrid::new(1.0, 0.0, 10).is_err());
    }

    fn scaled_device(l: usize, t: f64) -> TridiagonalHamiltonian {
        let chain = crate::chain::scaled_chain(l).unwrap();
        crate::hamiltonian::build_hamiltonian(
            &chain,
            &crate::hamiltonian::TbParams::with_coupling(t),
        )
    }

    #[test]
    fn folding_matches_transfer_matrices() {
        let device = scaled_device(4, 0.8);
        let leads = Leads::new(
            LeadParams::new(1.1, 1.3, 0.6).unwrap(),
            LeadParams::new(0.9, -1.0, 0.9).unwrap(),
        );
        let grid = EnergyGrid::lead_window(&leads, 301, 1e-3).unwrap();
        for e in grid.energies() {
            let a = transmission_at(e, &device, &leads).unwrap();
            let b = transfer_matrix_transmission(e, &device, &leads).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a), "E={e}: {a} vs {b}");
            assert!((-1e-12..=1.0 + 1e-9).contains(&a));
        }
    }

    #[test]
    fn reciprocity() {
        let device = scaled_device(3, 0.5);
        let leads = Leads::new(
            LeadParams::new(1.0, 1.2, 0.7).unwrap(),
            LeadParams::new(1.2, 0.9, 1.1).unwrap(),
        );
        let mirrored = TridiagonalHamiltonian::new(
            device.diag().iter().rev().copied().collect(),
            device.offdiag().iter().rev().copied().collect(),
        )
        .unwrap();
        for e in [0.5, 1.0, 1.7, 2.4] {
            let a = transmission_at(e, &device, &leads).unwrap();
            let b = transmission_at(e, &mirrored, &leads.swapped()).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn single_impurity_closed_form() {
        // one detuned site δ in a matched chain: T = 4 sin²k / (4 sin²k + δ²)
        let delta = 0.6;
        let device = TridiagonalHamiltonian::new(vec![1.0 + delta], vec![]).unwrap();
        let leads = Leads::default();
        for e in [-0.2, 0.7, 1.5, 2.9] {
            let k = ((e - 1.0) / 2.0f64).acos();
            let s2 = 4.0 * k.sin().powi(2);
            let expected = s2 / (s2 + delta * delta);
            assert!((transmission_at(e, &device, &leads).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn strong_coupling_resonances() {
        let curve = transmission_sweep(
            &EnergyGrid::lead_window(&Leads::default(), 2001, DEFAULT_EDGE_MARGIN).unwrap(),
            &scaled_device(10, 50.0),
            &Leads::default(),
        )
        .unwrap();
        assert_eq!(curve.peaks.len(), 3);
        let weak = transmission_sweep(
            &EnergyGrid::lead_window(&Leads::default(), 401, DEFAULT_EDGE_MARGIN).unwrap(),
            &scaled_device(10, 0.3),
            &Leads::default(),
        )
        .unwrap();
        assert!(weak.max() < 1e-6);
        assert!(weak.peaks.is_empty());
    }
}
