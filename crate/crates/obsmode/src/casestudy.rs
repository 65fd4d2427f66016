//! The three-grid robot benchmark.
//!
//! An enemy secretly picks one of three 5x5 grids; the robot starts in the
//! top-left corner without knowing which, and must reach the target cell
//! while avoiding dangerous cells. Two sensors of different price report
//! where neighbouring danger is.

use std::collections::BTreeMap;

use obsmode_core::model::{validate_model, NtsModel, RawMode, RawModel, RawTransition};

pub const SIZE: u8 = 5;
pub const START: (u8, u8) = (1, 1);
pub const TARGET: (u8, u8) = (5, 1);

/// Dangerous cells per grid, `(row, column)` counted from 1 at the top-left.
///
/// Transcribed from a raster drawing. Cells the drawing leaves ambiguous
/// were settled against the published route descriptions and graph sizes.
/// This table is the single place to change if the drawing is re-read.
pub const DANGEROUS: [&[(u8, u8)]; 3] = [
    &[(2, 1), (2, 5), (3, 3), (3, 4), (3, 5), (4, 3), (5, 3)],
    &[(1, 3), (3, 1), (3, 3), (5, 2)],
    &[(1, 3), (3, 1), (3, 2), (3, 4)],
];

pub const MOVES: [(&str, (i8, i8)); 4] = [("N", (-1, 0)), ("S", (1, 0)), ("E", (0, 1)), ("W", (0, -1))];

const NEIGHBOURS: [(&str, (i8, i8)); 8] = [
    ("N", (-1, 0)),
    ("S", (1, 0)),
    ("W", (0, -1)),
    ("E", (0, 1)),
    ("NW", (-1, -1)),
    ("NE", (-1, 1)),
    ("SW", (1, -1)),
    ("SE", (1, 1)),
];

/// Each quadrant sensor covers its diagonal and the two adjacent sides.
const QUADRANTS: [(&str, [&str; 3]); 4] = [
    ("NW", ["NW", "N", "W"]),
    ("NE", ["NE", "N", "E"]),
    ("SW", ["SW", "S", "W"]),
    ("SE", ["SE", "S", "E"]),
];

pub const OBSERVATIONS: [&str; 9] = ["N", "S", "W", "E", "NW", "NE", "SW", "SE", "det"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sensor {
    Quadrant,
    Exact,
}

/// Directions (from [`NEIGHBOURS`]) in which a dangerous cell lies.
pub fn dangerous_directions(dangerous: &[(u8, u8)], cell: (u8, u8)) -> Vec<&'static str> {
    NEIGHBOURS
        .iter()
        .filter(|(_, (dr, dc))| {
            let r = cell.0 as i8 + dr;
            let c = cell.1 as i8 + dc;
            r >= 1 && c >= 1 && dangerous.contains(&(r as u8, c as u8))
        })
        .map(|(d, _)| *d)
        .collect()
}

/// Sorted sensor reading for a neighbourhood with danger in `directions`.
pub fn sensor_reading(sensor: Sensor, directions: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = match sensor {
        Sensor::Exact => directions.iter().map(|d| d.to_string()).collect(),
        Sensor::Quadrant => QUADRANTS
            .iter()
            .filter(|(_, covers)| covers.iter().any(|c| directions.contains(c)))
            .map(|(q, _)| q.to_string())
            .collect(),
    };
    if !directions.is_empty() {
        out.push("det".to_string());
    }
    out.sort();
    out
}

fn cell_name(grid: usize, (r, c): (u8, u8)) -> String {
    format!("s_{}{}{}", grid + 1, r, c)
}

pub fn generate_grid_casestudy() -> NtsModel {
    generate_with(&DANGEROUS)
}

pub fn generate_with(dangerous: &[&[(u8, u8)]; 3]) -> NtsModel {
    validate_model(&grid_raw(dangerous)).expect("case study is well formed")
}

pub fn grid_raw(dangerous: &[&[(u8, u8)]; 3]) -> RawModel {
    let init = "s_init".to_string();
    let mut states = vec![init.clone()];
    let mut transitions = vec![RawTransition {
        from: init.clone(),
        action: "a".into(),
        to: (0..3).map(|g| cell_name(g, START)).collect(),
    }];
    let mut labels = BTreeMap::new();
    let mut quadrant = BTreeMap::new();
    let mut exact = BTreeMap::new();

    for (g, danger) in dangerous.iter().enumerate() {
        for r in 1..=SIZE {
            for c in 1..=SIZE {
                let name = cell_name(g, (r, c));
                states.push(name.clone());
                // moves off the grid are disabled; the target is not absorbing
                for (mv, (dr, dc)) in MOVES {
                    let (nr, nc) = (r as i8 + dr, c as i8 + dc);
                    if (1..=SIZE as i8).contains(&nr) && (1..=SIZE as i8).contains(&nc) {
                        transitions.push(RawTransition {
                            from: name.clone(),
                            action: mv.into(),
                            to: vec![cell_name(g, (nr as u8, nc as u8))],
                        });
                    }
                }
                let mut props = Vec::new();
                if danger.contains(&(r, c)) {
                    props.push("dang".to_string());
                }
                if (r, c) == TARGET {
                    props.push("target".to_string());
                }
                if !props.is_empty() {
                    labels.insert(name.clone(), props);
                }
                let dirs = dangerous_directions(danger, (r, c));
                quadrant.insert(name.clone(), sensor_reading(Sensor::Quadrant, &dirs));
                exact.insert(name, sensor_reading(Sensor::Exact, &dirs));
            }
        }
    }

    let mut actions = vec!["a".to_string()];
    actions.extend(MOVES.iter().map(|(m, _)| m.to_string()));
    RawModel {
        states,
        actions,
        transitions,
        init,
        ap: vec!["dang".into(), "target".into()],
        labels,
        observations: OBSERVATIONS.iter().map(|o| o.to_string()).collect(),
        modes: vec![
            RawMode { name: "m1".into(), cost: "0".into(), obs: BTreeMap::new() },
            RawMode { name: "m2".into(), cost: "1".into(), obs: quadrant },
            RawMode { name: "m3".into(), cost: "2".into(), obs: exact },
        ],
        init_mode: "m1".into(),
    }
}
