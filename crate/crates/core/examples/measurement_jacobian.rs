//! Build the DC measurement Jacobian for different measurement sets.
//!
//! ```text
//! cargo run --example measurement_jacobian [out.csv]
//! ```

use stealthbound::grid::{build_dc_jacobian, ieee30, write_matrix_csv, MeasurementSelection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = ieee30();
    let sets = [
        ("flows + injections", MeasurementSelection::default()),
        (
            "both flow ends",
            MeasurementSelection {
                include_from_flows: true,
                include_to_flows: true,
                include_injections: false,
            },
        ),
        (
            "injections only",
            MeasurementSelection {
                include_from_flows: false,
                include_to_flows: false,
                include_injections: true,
            },
        ),
    ];
    for (name, sel) in sets {
        let model = build_dc_jacobian(&case, sel)?;
        let rank = model.h.clone().svd(false, false).rank(1e-9);
        println!("{name:<20} H is {:>3} x {}  rank {rank}", model.n_measurements(), model.n_states());
    }

    let model = build_dc_jacobian(&case, MeasurementSelection::default())?;
    for (label, row) in model.labels.iter().zip(model.h.row_iter()).take(3) {
        let nz: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| format!("θ{}:{v:.3}", model.state_buses[j]))
            .collect();
        println!("{label:<8} {}", nz.join(" "));
    }

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, write_matrix_csv(&model.h))?;
        println!("wrote {path}");
    }
    Ok(())
}
