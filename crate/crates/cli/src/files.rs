//! On-disk formats: density matrices as JSON with explicit real/imag
//! arrays, and CSV plot data for the density-matrix and fringe figures.

use std::io::Write;
use std::path::Path;

use ghzsim_core::photonic::{fringe_probability, ExperimentConfig};
use ghzsim_core::quantum::DensityMatrix;
use ghzsim_core::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type DMatrix = nalgebra::DMatrix<Complex64>;

/// Density matrix serialized as nested row-major real/imag arrays, qubit
/// order A, B, C; no complex literals, for cross-tool portability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub n_qubits: usize,
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl DensityMatrixFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let m = rho.matrix();
        let real = (0..d)
            .map(|r| (0..d).map(|c| m[(r, c)].re).collect())
            .collect();
        let imag = (0..d)
            .map(|r| (0..d).map(|c| m[(r, c)].im).collect())
            .collect();
        Self {
            n_qubits: rho.n_qubits(),
            real,
            imag,
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let d = 1usize << self.n_qubits;
        if self.real.len() != d || self.imag.len() != d {
            return Err(Error::InvalidData(format!(
                "density file claims {} qubits but holds {}x? arrays",
                self.n_qubits,
                self.real.len()
            )));
        }
        let mut m = DMatrix::zeros(d, d);
        for r in 0..d {
            if self.real[r].len() != d || self.imag[r].len() != d {
                return Err(Error::InvalidData(format!("ragged row {r} in density file")));
            }
            for c in 0..d {
                m[(r, c)] = Complex64::new(self.real[r][c], self.imag[r][c]);
            }
        }
        DensityMatrix::new(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Time-bin label of a basis index: one character per qubit, '1' for |t₁⟩
/// and '2' for |t₂⟩, qubit A first (e.g. "111").
pub fn bin_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| {
            if (index >> (n_qubits - 1 - q)) & 1 == 0 {
                '1'
            } else {
                '2'
            }
        })
        .collect()
}

/// CSV with one row per density-matrix element:
/// `row_label,col_label,real,imag`.
pub fn emit_density_figure_data<W: Write>(rho: &DensityMatrix, mut out: W) -> Result<()> {
    writeln!(out, "row_label,col_label,real,imag")?;
    let d = rho.dim();
    let n = rho.n_qubits();
    for r in 0..d {
        for c in 0..d {
            let v = rho.matrix()[(r, c)];
            writeln!(
                out,
                "{},{},{},{}",
                bin_label(r, n),
                bin_label(c, n),
                v.re,
                v.im
            )?;
        }
    }
    Ok(())
}

/// Re-parses a density-figure CSV back into a matrix (test/round-trip aid).
pub fn parse_density_figure_data<R: std::io::Read>(reader: R) -> Result<DensityMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut entries = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::InvalidData(e.to_string()))?;
        let label_to_index = |label: &str| -> Result<usize> {
            label.chars().try_fold(0usize, |acc, ch| match ch {
                '1' => Ok(acc << 1),
                '2' => Ok((acc << 1) | 1),
                _ => Err(Error::InvalidData(format!("bad bin label '{label}'"))),
            })
        };
        let r = label_to_index(&row[0])?;
        let c = label_to_index(&row[1])?;
        let re: f64 = row[2]
            .parse()
            .map_err(|_| Error::InvalidData("bad real value".into()))?;
        let im: f64 = row[3]
            .parse()
            .map_err(|_| Error::InvalidData("bad imag value".into()))?;
        entries.push((r, c, Complex64::new(re, im)));
    }
    let d = (entries.len() as f64).sqrt() as usize;
    let mut m = DMatrix::zeros(d, d);
    for (r, c, v) in entries {
        m[(r, c)] = v;
    }
    DensityMatrix::new(m)
}

/// Fringe plot data: normalized coincidence vs Charlie's phase at the
/// config's Bob phase and visibility. Columns `phase,normalized_count`.
pub fn emit_fringe_data<W: Write>(
    config: &ExperimentConfig,
    n_points: usize,
    mut out: W,
) -> Result<()> {
    writeln!(out, "phase,normalized_count")?;
    for k in 0..n_points {
        let phi_c = 2.0 * std::f64::consts::PI * k as f64 / n_points as f64;
        let p = fringe_probability(config.phase_b, phi_c, config.interference_visibility)?;
        writeln!(out, "{phi_c},{p}")?;
    }
    Ok(())
}
