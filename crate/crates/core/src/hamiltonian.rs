//! Open-boundary tight-binding Hamiltonian of a two-species chain.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain::{Symbol, SymbolChain};
use crate::error::{invalid, Result};
use crate::export::fmt_f64;

/// On-site energies of the two species and the nearest-neighbour coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TbParams {
    pub eps_a: f64,
    pub eps_b: f64,
    pub t: f64,
}

impl Default for TbParams {
    fn default() -> Self {
        Self {
            eps_a: 1.0,
            eps_b: 2.0,
            t: 1.0,
        }
    }
}

impl TbParams {
    pub fn new(eps_a: f64, eps_b: f64, t: f64) -> Result<Self> {
        let p = Self { eps_a, eps_b, t };
        p.validate()?;
        Ok(p)
    }

    /// Default on-site energies with coupling `t`.
    pub fn with_coupling(t: f64) -> Self {
        Self {
            t,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_a.is_finite() && self.eps_b.is_finite() && self.t.is_finite() {
            Ok(())
        } else {
            Err(invalid("tight-binding parameters must be finite"))
        }
    }

    pub fn onsite(&self, s: Symbol) -> f64 {
        match s {
            Symbol::A => self.eps_a,
            Symbol::B => self.eps_b,
        }
    }
}

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "off-diagonal has {} entries, expected {}",
                offdiag.len(),
                diag.len() - 1
            )));
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        Ok(Self { diag, offdiag })
    }

    /// Chain of `n` identical sites.
    pub fn uniform(n: usize, eps: f64, t: f64) -> Result<Self> {
        Self::new(vec![eps; n], vec![t; n.saturating_sub(1)])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// `max|diag| + 2 max|offdiag|`, an upper bound on the spectral radius.
    pub fn scale(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let e = self.offdiag.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        d + 2.0 * e
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len(), "vector length mismatch");
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            let e = self.offdiag[i];
            y[i] += e * x[i + 1];
            y[i + 1] += e * x[i];
        }
        y
    }

    /// Leading principal submatrix of dimension `n`.
    pub fn leading(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(invalid(format!(
                "submatrix size {n} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            diag: self.diag[..n].to_vec(),
            offdiag: self.offdiag[..n - 1].to_vec(),
        })
    }

    /// Same matrix with every diagonal entry shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + c).collect(),
            offdiag: self.offdiag.clone(),
        }
    }

    /// Dense row-major expansion. Meant for small matrices in tests and debugging.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.offdiag[i];
                m[i + 1][i] = self.offdiag[i];
            }
        }
        m
    }

    /// CSV rows `(i, diag_i, offdiag_i)`; the last row has an empty off-diagonal.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "i,diag_i,offdiag_i")?;
        for (i, d) in self.diag.iter().enumerate() {
            match self.offdiag.get(i) {
                Some(e) => writeln!(w, "{},{},{}", i + 1, fmt_f64(*d), fmt_f64(*e))?,
                None => writeln!(w, "{},{},", i + 1, fmt_f64(*d))?,
            }
        }
        Ok(())
    }
}

/// Maps each site to its on-site energy and couples neighbours with `t`.
/// Open boundaries: no coupling between the first and last site.
pub fn build_hamiltonian(chain: &SymbolChain, params: &TbParams) -> TridiagonalHamiltonian {
    let diag = chain.sites().iter().map(|&s| params.onsite(s)).collect();
    TridiagonalHamiltonian {
        diag,
        offdiag: vec![params.t; chain.len() - 1],
    }
}

/// CSV rows `(index, symbol, onsite_energy)` for a chain bound to parameters.
pub fn write_chain_csv<W: Write>(
    chain: &SymbolChain,
    params: &TbParams,
    mut w: W,
    header: &str,
) -> Result<()> {
    writeln!(w, "# {header}")?;
    writeln!(w, "index,symbol,onsite_energy")?;
    for (i, &s) in chain.sites().iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, s, fmt_f64(params.onsite(s)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::scaled_chain;

    #[test]
    fn dimer_mapping() {
        let h = build_hamiltonian(
            &"AB".parse().unwrap(),
            &TbParams::new(1.0, 2.0, 0.5).unwrap(),
        );
        assert_eq!(h.diag(), &[1.0, 2.0]);
        assert_eq!(h.offdiag(), &[0.5]);
    }

    #[test]
    fn site_counts_follow_chain() {
        let h = build_hamiltonian(&scaled_chain(10).unwrap(), &TbParams::with_coupling(0.3));
        assert_eq!(h.len(), 221);
        assert_eq!(h.diag().iter().filter(|&&d| d == 1.0).count(), 111);
        assert_eq!(h.diag().iter().filter(|&&d| d == 2.0).count(), 110);
        assert!(h.offdiag().iter().all(|&e| e == 0.3));
    }

    #[test]
    fn dense_is_symmetric_and_open() {
        let h = build_hamiltonian(&scaled_chain(3).unwrap(), &TbParams::with_coupling(0.7));
        let m = h.to_dense();
        let n = h.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        assert_eq!(m[0][n - 1], 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let h = build_hamiltonian(
            &scaled_chain(2).unwrap(),
            &TbParams::new(0.3, -1.2, 0.9).unwrap(),
        );
        let x: Vec<f64> = (0..h.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let dense = h.to_dense();
        let y = h.matvec(&x);
        for i in 0..h.len() {
            let expect: f64 = dense[i].iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((y[i] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(TridiagonalHamiltonian::new(vec![], vec![]).is_err());
        assert!(TridiagonalHamiltonian::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(TridiagonalHamiltonian::new(vec![1.0], vec![f64::NAN]).is_err());
        assert!(TbParams::new(f64::INFINITY, 2.0, 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let h = TridiagonalHamiltonian::new(vec![1.0, 2.0], vec![0.5]).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf, "test").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# test");
        assert_eq!(lines[1], "i,diag_i,offdiag_i");
        assert!(lines[2].starts_with("1,1.0000000000000000e0,5.0"));
        assert!(lines[3].ends_with(','));
    }
}
