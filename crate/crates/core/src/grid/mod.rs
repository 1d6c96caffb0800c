//! Network ingestion and the linearized (DC) measurement model.
//!
//! A [`GridCase`] is the minimal topology needed to build the DC
//! state-estimation Jacobian: bus ids, the slack bus, and branch
//! reactances. [`build_dc_jacobian`] turns it into a [`MeasurementModel`]
//! whose state vector is the bus voltage angles with the slack removed.

mod csv;
mod jacobian;
mod matpower;

pub use self::csv::{load_matrix_csv, parse_matrix_csv, write_matrix_csv};
pub use self::jacobian::{build_dc_jacobian, MeasurementLabel, MeasurementModel, MeasurementSelection};
pub use self::matpower::parse_matpower_case;

use std::collections::HashSet;

use crate::error::{Error, Result};

/// The IEEE 30-bus case in MATPOWER format, bundled with the crate.
pub const IEEE30_CASE: &str = include_str!("../../data/case30.m");

/// Parses the bundled IEEE 30-bus case.
pub fn ieee30() -> GridCase {
    parse_matpower_case(IEEE30_CASE).expect("bundled IEEE 30-bus case is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bus {
    pub id: u32,
    pub is_slack: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub from_bus: u32,
    pub to_bus: u32,
    /// Series reactance in per unit.
    pub reactance: f64,
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCase {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
}

impl GridCase {
    pub fn slack(&self) -> Option<&Bus> {
        self.buses.iter().find(|b| b.is_slack)
    }

    pub fn in_service_branches(&self) -> impl Iterator<Item = &Branch> {
        self.branches.iter().filter(|b| b.in_service)
    }

    /// Checks the structural invariants: one slack bus, unique ids, known
    /// branch endpoints and nonzero in-service reactances.
    pub fn validate(&self) -> Result<()> {
        let slack_count = self.buses.iter().filter(|b| b.is_slack).count();
        match slack_count {
            0 => return Err(Error::InvalidCase("no slack bus".into())),
            1 => {}
            _ => return Err(Error::InvalidCase("multiple slack buses".into())),
        }
        let mut ids = HashSet::with_capacity(self.buses.len());
        for bus in &self.buses {
            if !ids.insert(bus.id) {
                return Err(Error::InvalidCase(format!("duplicate bus id {}", bus.id)));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            for end in [br.from_bus, br.to_bus] {
                if !ids.contains(&end) {
                    return Err(Error::InvalidCase(format!(
                        "branch {} references unknown bus {end}",
                        k + 1
                    )));
                }
            }
            if br.in_service && (br.reactance == 0.0 || !br.reactance.is_finite()) {
                return Err(Error::InvalidCase(format!(
                    "branch {} ({}-{}) has zero reactance",
                    k + 1,
                    br.from_bus,
                    br.to_bus
                )));
            }
        }
        Ok(())
    }
}
