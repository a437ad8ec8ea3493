//! JSON map export: rows of `#` (wall) and `.` (free).

use navsim_core::world::{Cell, MapSpec, Point2, Pose};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<String>,
    pub start: [f64; 3],
    pub goal: [f64; 2],
    pub seed: u64,
}

impl From<&MapSpec> for MapJson {
    fn from(map: &MapSpec) -> Self {
        let cells = map
            .cells
            .chunks(map.width)
            .map(|row| row.iter().map(|c| if *c == Cell::Wall { '#' } else { '.' }).collect())
            .collect();
        MapJson {
            width: map.width,
            height: map.height,
            cells,
            start: [map.start.x, map.start.y, map.start.theta],
            goal: [map.goal.x, map.goal.y],
            seed: map.seed,
        }
    }
}

impl TryFrom<MapJson> for MapSpec {
    type Error = Error;

    fn try_from(j: MapJson) -> Result<MapSpec> {
        if j.cells.len() != j.height {
            return Err(Error::BadMap(format!("{} rows, expected {}", j.cells.len(), j.height)));
        }
        let mut cells = Vec::with_capacity(j.width * j.height);
        for row in &j.cells {
            if row.chars().count() != j.width {
                return Err(Error::BadMap(format!("row {row:?} is not {} cells wide", j.width)));
            }
            for ch in row.chars() {
                cells.push(match ch {
                    '#' => Cell::Wall,
                    '.' => Cell::Free,
                    other => return Err(Error::BadMap(format!("unknown cell {other:?}"))),
                });
            }
        }
        Ok(MapSpec {
            width: j.width,
            height: j.height,
            cells,
            start: Pose::new(j.start[0], j.start[1], j.start[2]),
            goal: Point2::new(j.goal[0], j.goal[1]),
            seed: j.seed,
        })
    }
}

pub fn to_json(map: &MapSpec) -> String {
    serde_json::to_string_pretty(&MapJson::from(map)).expect("map serialises")
}

pub fn from_json(s: &str) -> Result<MapSpec> {
    serde_json::from_str::<MapJson>(s)?.try_into()
}
