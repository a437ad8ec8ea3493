//! Debug image exports: P5 PGM for maps, P6 PPM for camera frames.

use navsim_core::sensors::{quantize, CameraFrame, LidarScan, IMAGE_SIZE};
use navsim_core::world::{Cell, MapSpec};

/// Binary PGM of the occupancy grid, one pixel per cell, walls black.
/// Row 0 of the image is grid row 0.
pub fn map_pgm(map: &MapSpec) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", map.width, map.height).into_bytes();
    out.extend(map.cells.iter().map(|c| match c {
        Cell::Wall => 0u8,
        Cell::Free => 255,
    }));
    out
}

pub fn frame_ppm(frame: &CameraFrame) -> Vec<u8> {
    let mut out = format!("P6\n{IMAGE_SIZE} {IMAGE_SIZE}\n255\n").into_bytes();
    out.extend(frame.pixels.iter().map(|&v| quantize(v)));
    out
}

pub fn lidar_json(scan: &LidarScan) -> String {
    serde_json::to_string(&scan.ranges).expect("f32 array serialises")
}
