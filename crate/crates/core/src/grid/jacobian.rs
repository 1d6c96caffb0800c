use std::collections::HashMap;
use std::fmt;

use super::GridCase;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Which measurement classes make up the rows of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementSelection {
    pub include_from_flows: bool,
    pub include_to_flows: bool,
    pub include_injections: bool,
}

impl Default for MeasurementSelection {
    /// From-side branch flows plus all bus injections.
    fn default() -> Self {
        Self {
            include_from_flows: true,
            include_to_flows: false,
            include_injections: true,
        }
    }
}

impl MeasurementSelection {
    pub fn is_empty(&self) -> bool {
        !(self.include_from_flows || self.include_to_flows || self.include_injections)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementLabel {
    FromFlow { branch: usize, from: u32, to: u32 },
    ToFlow { branch: usize, from: u32, to: u32 },
    Injection { bus: u32 },
}

impl fmt::Display for MeasurementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MeasurementLabel::FromFlow { from, to, .. } => write!(f, "P{from}-{to}"),
            MeasurementLabel::ToFlow { from, to, .. } => write!(f, "P{to}-{from}"),
            MeasurementLabel::Injection { bus } => write!(f, "P{bus}"),
        }
    }
}

/// Linear measurement model `y = H x + z`, `z ~ N(0, σ² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    pub h: Matrix,
    pub sigma: f64,
    pub labels: Vec<MeasurementLabel>,
    /// Bus id of each state column.
    pub state_buses: Vec<u32>,
}

impl MeasurementModel {
    /// Wraps a precomputed `H` (e.g. loaded from CSV) with generic labels.
    pub fn from_matrix(h: Matrix, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::param("sigma", format!("must be >= 0, got {sigma}")));
        }
        let labels = (0..h.nrows())
            .map(|i| MeasurementLabel::Injection { bus: i as u32 + 1 })
            .collect();
        let state_buses = (0..h.ncols()).map(|j| j as u32 + 1).collect();
        Ok(Self {
            h,
            sigma,
            labels,
            state_buses,
        })
    }

    pub fn n_measurements(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_states(&self) -> usize {
        self.h.ncols()
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }
}

/// Builds the DC state-estimation Jacobian.
///
/// For a branch `(i, j)` with susceptance `b = 1/x` the from-side flow row
/// holds `+b` at `θ_i` and `−b` at `θ_j`; the to-side row is its negation and
/// a bus injection row is the signed sum of incident from-side flow rows.
/// The slack column is removed. The returned model has `sigma = 0`.
pub fn build_dc_jacobian(case: &GridCase, selection: MeasurementSelection) -> Result<MeasurementModel> {
    if selection.is_empty() {
        return Err(Error::param("selection", "no measurement class selected"));
    }
    case.validate()?;

    let slack = case.slack().expect("validated").id;
    let state_buses: Vec<u32> = case.buses.iter().map(|b| b.id).filter(|&id| id != slack).collect();
    let column: HashMap<u32, usize> = state_buses.iter().enumerate().map(|(c, &id)| (id, c)).collect();
    let bus_index: HashMap<u32, usize> = case.buses.iter().enumerate().map(|(k, b)| (b.id, k)).collect();
    let n = state_buses.len();

    // Full-width flow rows (one column per bus, slack included).
    let branches: Vec<(usize, &super::Branch)> =
        case.branches.iter().enumerate().filter(|(_, b)| b.in_service).collect();
    let nb = case.buses.len();
    let mut flows = Matrix::zeros(branches.len(), nb);
    for (r, (_, br)) in branches.iter().enumerate() {
        let b = 1.0 / br.reactance;
        flows[(r, bus_index[&br.from_bus])] += b;
        flows[(r, bus_index[&br.to_bus])] -= b;
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let drop_slack = |full: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (k, bus) in case.buses.iter().enumerate() {
            if let Some(&c) = column.get(&bus.id) {
                out[c] = full[k];
            }
        }
        out
    };

    if selection.include_from_flows {
        for (r, (k, br)) in branches.iter().enumerate() {
            let full: Vec<f64> = flows.row(r).iter().copied().collect();
            rows.push(drop_slack(&full));
            labels.push(MeasurementLabel::FromFlow {
                branch: *k,
                from: br.from_bus,
                to: br.to_bus,
            });
        }
    }
    if selection.include_to_flows {
        for (r, (k, br)) in branches.iter().enumerate() {
            let full: Vec<f64> = flows.row(r).iter().map(|v| -v).collect();
            rows.push(drop_slack(&full));
            labels.push(MeasurementLabel::ToFlow {
                branch: *k,
                from: br.from_bus,
                to: br.to_bus,
            });
        }
    }
    if selection.include_injections {
        for bus in &case.buses {
            let mut full = vec![0.0; nb];
            for (r, (_, br)) in branches.iter().enumerate() {
                let sign = if br.from_bus == bus.id {
                    1.0
                } else if br.to_bus == bus.id {
                    -1.0
                } else {
                    continue;
                };
                for (dst, src) in full.iter_mut().zip(flows.row(r).iter()) {
                    *dst += sign * src;
                }
            }
            rows.push(drop_slack(&full));
            labels.push(MeasurementLabel::Injection { bus: bus.id });
        }
    }

    let m = rows.len();
    let h = Matrix::from_fn(m, n, |i, j| rows[i][j]);
    Ok(MeasurementModel {
        h,
        sigma: 0.0,
        labels,
        state_buses,
    })
}
