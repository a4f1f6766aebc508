//! Frequency matrix of all `F_n ± D_0 ± ... ± D_{M-1}` combinations and the
//! coincidence analysis over its entries.
//!
//! Columns are tree-sorted: the `M`-bit expansion of the column index `d`
//! (most significant bit first) selects `+D_k` for a 1 bit and `-D_k` for a 0
//! bit. The same bit pattern fixes the total demodulation phase of the column,
//! see [`column_signs`].

use serde::Serialize;

use crate::error::{Cell, Error, Result};
use crate::model::{validate_demods, DemodStage, DetectionConfig, Scheme};

/// Upper limit on demodulation stages (2^20 columns per row).
pub const MAX_DEMODS: usize = 20;

/// Signs `s_k(d)` of every demodulation stage for column `d` of an `m`-stage
/// matrix: +1 where bit `k` (counted from the most significant end) is set.
pub fn column_signs(d: usize, m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |k| if (d >> (m - 1 - k)) & 1 == 1 { 1.0 } else { -1.0 })
}

/// Total demodulation phase of column `d`:
/// `phi(d) = -sum_k (-1)^{b_k} phi_k`.
pub fn demod_phase(d: usize, demods: &[DemodStage]) -> Result<f64> {
    let columns = 1usize << demods.len().min(MAX_DEMODS + 1);
    if demods.len() > MAX_DEMODS || d >= columns {
        return Err(Error::IndexOutOfRange { index: d, columns });
    }
    Ok(column_signs(d, demods.len())
        .zip(demods)
        .map(|(s, dm)| s * dm.phase_rad)
        .sum())
}

/// Demodulation frequency offset of column `d`, `sum_k s_k(d) D_k`.
pub fn demod_offset(d: usize, demods: &[DemodStage]) -> f64 {
    column_signs(d, demods.len())
        .zip(demods)
        .map(|(s, dm)| s * dm.freq_hz)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyMatrix {
    entries: Vec<f64>,
    n_components: usize,
    n_demods: usize,
}

impl FrequencyMatrix {
    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_demods(&self) -> usize {
        self.n_demods
    }

    pub fn n_columns(&self) -> usize {
        1 << self.n_demods
    }

    pub fn get(&self, (n, d): Cell) -> f64 {
        self.entries[n * self.n_columns() + d]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.n_columns();
        &self.entries[n * w..(n + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n_columns())
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        let w = self.n_columns();
        (0..self.n_components).flat_map(move |n| (0..w).map(move |d| (n, d)))
    }

    /// Largest `|F_nd|` in the matrix.
    pub fn max_abs_offset(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, f| m.max(f.abs()))
    }
}

pub fn build_frequency_matrix(scheme: &Scheme, demods: &[DemodStage]) -> Result<FrequencyMatrix> {
    validate_demods(demods)?;
    let m = demods.len();
    if m > MAX_DEMODS {
        return Err(Error::TooManyDemods(m));
    }
    let offsets: Vec<f64> = (0..1usize << m).map(|d| demod_offset(d, demods)).collect();
    let entries = scheme
        .components()
        .iter()
        .flat_map(|c| offsets.iter().map(move |o| c.offset_hz + o))
        .collect();
    Ok(FrequencyMatrix {
        entries,
        n_components: scheme.len(),
        n_demods: m,
    })
}

/// Matrix entries sharing one frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceGroup {
    /// Sorted by `(n, d)`; at least two members.
    pub members: Vec<Cell>,
    /// Frequency of the first member.
    pub freq_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Grouping {
    pub groups: Vec<CoincidenceGroup>,
    pub uniques: Vec<Cell>,
}

/// Partitions the matrix into coincidence groups and unique entries.
///
/// Entries closer than the coincidence tolerance are linked; linked chains
/// wider than the tolerance, or distinct entries whose detection bands
/// intersect (closer than `2B`), are a partial overlap.
pub fn group_entries(matrix: &FrequencyMatrix, config: &DetectionConfig) -> Result<Grouping> {
    let tol = config.coincidence_tol_hz;
    let two_b = 2.0 * config.bandwidth_hz;

    let mut cells: Vec<Cell> = matrix.cells().collect();
    cells.sort_by(|&a, &b| matrix.get(a).total_cmp(&matrix.get(b)).then(a.cmp(&b)));

    let mut clusters: Vec<Vec<Cell>> = Vec::new();
    for &cell in &cells {
        match clusters.last_mut() {
            Some(cl) if matrix.get(cell) - matrix.get(*cl.last().unwrap()) <= tol => cl.push(cell),
            _ => clusters.push(vec![cell]),
        }
    }

    let ordered = |a: Cell, b: Cell| if a <= b { (a, b) } else { (b, a) };
    for cl in &clusters {
        let (lo, hi) = (cl[0], *cl.last().unwrap());
        if matrix.get(hi) - matrix.get(lo) > tol {
            let (a, b) = ordered(lo, hi);
            return Err(Error::PartialOverlap(a, b));
        }
    }
    for pair in clusters.windows(2) {
        let (a, b) = (*pair[0].last().unwrap(), pair[1][0]);
        if matrix.get(b) - matrix.get(a) < two_b {
            let (a, b) = ordered(a, b);
            return Err(Error::PartialOverlap(a, b));
        }
    }

    let mut out = Grouping::default();
    for mut cl in clusters {
        cl.sort_unstable();
        if cl.len() == 1 {
            out.uniques.push(cl[0]);
        } else {
            out.groups.push(CoincidenceGroup {
                freq_hz: matrix.get(cl[0]),
                members: cl,
            });
        }
    }
    out.groups.sort_by(|a, b| a.members[0].cmp(&b.members[0]));
    out.uniques.sort_unstable();
    Ok(out)
}
