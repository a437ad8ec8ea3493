//! Simulated range sensor and pseudo-3D camera.
//!
//! Both sensors are built on one DDA ray caster. LiDAR beam `i` points at
//! `theta + lidar_fov * (2i - 19) / 38`, so beams evenly span
//! `[-fov/2, +fov/2]` from the agent's right (beam 0) to its left (beam 19).
//! Camera column `c` looks along `theta + camera_hfov * (63 - 2c) / 128`:
//! column 0 is the left edge of the image.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::world::{MapSpec, Point2, Pose};

pub const LIDAR_BEAMS: usize = 20;
pub const IMAGE_SIZE: usize = 64;
pub const IMAGE_CHANNELS: usize = 3;
pub const IMAGE_LEN: usize = IMAGE_SIZE * IMAGE_SIZE * IMAGE_CHANNELS;
pub const ATTENUATION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SensorError {
    #[error("ray origin lies inside a wall cell")]
    OriginInWall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    /// A face lying on a horizontal grid line (crossed while stepping in y).
    WallNS,
    /// A face lying on a vertical grid line (crossed while stepping in x).
    WallEW,
    Goal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub surface: Surface,
}

pub type Rgb = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorConfig {
    pub lidar_max_range: f64,
    pub lidar_fov: f64,
    pub camera_hfov: f64,
    pub goal_color: Rgb,
    pub wall_color_ns: Rgb,
    pub wall_color_ew: Rgb,
    pub floor_color: Rgb,
    pub ceiling_color: Rgb,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            lidar_max_range: 8.0,
            lidar_fov: PI,
            camera_hfov: 66.0 * PI / 180.0,
            goal_color: [1.0, 0.0, 0.0],
            wall_color_ns: [0.62, 0.62, 0.66],
            wall_color_ew: [0.42, 0.42, 0.46],
            floor_color: [0.30, 0.24, 0.18],
            ceiling_color: [0.08, 0.08, 0.10],
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        let fov_ok = |f: f64| f > 0.0 && f <= 2.0 * PI;
        if !(self.lidar_max_range > 0.0) {
            return Err("lidar_max_range must be positive");
        }
        if !fov_ok(self.lidar_fov) || !fov_ok(self.camera_hfov) {
            return Err("fields of view must lie in (0, 2π]");
        }
        let colors = [self.goal_color, self.wall_color_ns, self.wall_color_ew, self.floor_color, self.ceiling_color];
        if colors.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err("colors must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn lidar_offset(&self, beam: usize) -> f64 {
        self.lidar_fov * (2.0 * beam as f64 - 19.0) / 38.0
    }

    pub fn camera_offset(&self, column: usize) -> f64 {
        self.camera_hfov * (63.0 - 2.0 * column as f64) / 128.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub ranges: [f32; LIDAR_BEAMS],
}

/// 64×64×3 image, row-major with channels last, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    pub pixels: Vec<f32>,
}

impl CameraFrame {
    pub fn pixel(&self, row: usize, col: usize) -> [f32; 3] {
        let k = (row * IMAGE_SIZE + col) * IMAGE_CHANNELS;
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }

    /// 8-bit quantisation, `round(v * 255)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().map(|&v| quantize(v)).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<CameraFrame> {
        (bytes.len() == IMAGE_LEN).then(|| CameraFrame { pixels: bytes.iter().map(|&b| f32::from(b) / 255.0).collect() })
    }
}

pub fn quantize(v: f32) -> u8 {
    libm::roundf(v.clamp(0.0, 1.0) * 255.0) as u8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub lidar: LidarScan,
    pub image: CameraFrame,
}

impl SensorFrame {
    pub fn is_valid(&self) -> bool {
        let in_unit = |v: &f32| (0.0..=1.0).contains(v);
        self.image.pixels.len() == IMAGE_LEN && self.lidar.ranges.iter().all(in_unit) && self.image.pixels.iter().all(in_unit)
    }
}

/// A sensor frame plus whether the goal showed up in any camera column.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub frame: SensorFrame,
    pub goal_visible: bool,
}

/// Casts a ray from `origin` along `angle` and returns the nearest wall face
/// or goal-disc intersection.
pub fn cast_ray(map: &MapSpec, origin: Point2, angle: f64, goal_radius: f64) -> Result<RayHit, SensorError> {
    let mut ci = libm::floor(origin.x) as isize;
    let mut cj = libm::floor(origin.y) as isize;
    if map.is_wall(ci, cj) {
        return Err(SensorError::OriginInWall);
    }
    let (dy, dx) = (libm::sin(angle), libm::cos(angle));
    let step_i: isize = if dx > 0.0 { 1 } else { -1 };
    let step_j: isize = if dy > 0.0 { 1 } else { -1 };
    let delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
    let delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };
    let mut next_x = if dx > 0.0 { ci as f64 + 1.0 - origin.x } else { origin.x - ci as f64 } * delta_x;
    let mut next_y = if dy > 0.0 { cj as f64 + 1.0 - origin.y } else { origin.y - cj as f64 } * delta_y;
    if dx == 0.0 {
        next_x = f64::INFINITY;
    }
    if dy == 0.0 {
        next_y = f64::INFINITY;
    }

    let wall = loop {
        if next_x < next_y {
            ci += step_i;
            next_x += delta_x;
            if map.is_wall(ci, cj) {
                let face = if step_i > 0 { ci as f64 } else { ci as f64 + 1.0 };
                break RayHit { distance: (face - origin.x) / dx, surface: Surface::WallEW };
            }
        } else {
            cj += step_j;
            next_y += delta_y;
            if map.is_wall(ci, cj) {
                let face = if step_j > 0 { cj as f64 } else { cj as f64 + 1.0 };
                break RayHit { distance: (face - origin.y) / dy, surface: Surface::WallNS };
            }
        }
    };

    match goal_intersection(origin, dx, dy, map.goal, goal_radius) {
        Some(t) if t < wall.distance => Ok(RayHit { distance: t, surface: Surface::Goal }),
        _ => Ok(wall),
    }
}

/// Entry distance of the ray into the goal disc; 0 when starting inside.
fn goal_intersection(origin: Point2, dx: f64, dy: f64, goal: Point2, radius: f64) -> Option<f64> {
    let (fx, fy) = (origin.x - goal.x, origin.y - goal.y);
    let b = fx * dx + fy * dy;
    let c = fx * fx + fy * fy - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - libm::sqrt(disc);
    (t >= 0.0).then_some(t)
}

/// Raw beam distances in cell units, beam order as documented above.
pub fn lidar_distances(map: &MapSpec, pose: &Pose, config: &SensorConfig, goal_radius: f64) -> Result<[f64; LIDAR_BEAMS], SensorError> {
    let mut out = [0.0; LIDAR_BEAMS];
    for (beam, d) in out.iter_mut().enumerate() {
        *d = cast_ray(map, pose.position(), pose.theta + config.lidar_offset(beam), goal_radius)?.distance;
    }
    Ok(out)
}

pub fn lidar_scan(map: &MapSpec, pose: &Pose, config: &SensorConfig, goal_radius: f64) -> Result<LidarScan, SensorError> {
    let raw = lidar_distances(map, pose, config, goal_radius)?;
    let mut ranges = [0f32; LIDAR_BEAMS];
    for (r, d) in ranges.iter_mut().zip(raw) {
        *r = (d.min(config.lidar_max_range) / config.lidar_max_range) as f32;
    }
    Ok(LidarScan { ranges })
}

/// Wall-strip height in rows for a perpendicular distance.
pub fn strip_height(perpendicular: f64) -> usize {
    if perpendicular <= 0.0 {
        return IMAGE_SIZE;
    }
    libm::round(IMAGE_SIZE as f64 / perpendicular).clamp(0.0, IMAGE_SIZE as f64) as usize
}

/// Renders the camera image and returns the per-column hits alongside it.
pub fn render_camera_detailed(
    map: &MapSpec,
    pose: &Pose,
    config: &SensorConfig,
    goal_radius: f64,
) -> Result<(CameraFrame, Vec<RayHit>), SensorError> {
    let mut pixels = vec![0f32; IMAGE_LEN];
    let mut hits = Vec::with_capacity(IMAGE_SIZE);
    for col in 0..IMAGE_SIZE {
        let offset = config.camera_offset(col);
        let hit = cast_ray(map, pose.position(), pose.theta + offset, goal_radius)?;
        let perp = hit.distance * libm::cos(offset);
        let h = strip_height(perp);
        let top = (IMAGE_SIZE - h) / 2;
        let base = match hit.surface {
            Surface::WallNS => config.wall_color_ns,
            Surface::WallEW => config.wall_color_ew,
            Surface::Goal => config.goal_color,
        };
        let shade = 1.0 / (1.0 + ATTENUATION * perp.max(0.0));
        let wall = base.map(|v| (v * shade) as f32);
        let ceiling = config.ceiling_color.map(|v| v as f32);
        let floor = config.floor_color.map(|v| v as f32);
        for row in 0..IMAGE_SIZE {
            let color = if row < top {
                ceiling
            } else if row < top + h {
                wall
            } else {
                floor
            };
            let k = (row * IMAGE_SIZE + col) * IMAGE_CHANNELS;
            pixels[k..k + 3].copy_from_slice(&color);
        }
        hits.push(RayHit { distance: hit.distance, surface: hit.surface });
    }
    Ok((CameraFrame { pixels }, hits))
}

pub fn render_camera(map: &MapSpec, pose: &Pose, config: &SensorConfig, goal_radius: f64) -> Result<CameraFrame, SensorError> {
    render_camera_detailed(map, pose, config, goal_radius).map(|(frame, _)| frame)
}

/// Runs both sensors at `pose`.
pub fn observe(map: &MapSpec, pose: &Pose, config: &SensorConfig, goal_radius: f64) -> Result<Observation, SensorError> {
    let lidar = lidar_scan(map, pose, config, goal_radius)?;
    let (image, hits) = render_camera_detailed(map, pose, config, goal_radius)?;
    let goal_visible = hits.iter().any(|h| h.surface == Surface::Goal);
    Ok(Observation { frame: SensorFrame { lidar, image }, goal_visible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Cell;
    use core::f64::consts::{FRAC_PI_4, SQRT_2};

    fn room(w: usize, h: usize, goal: Point2) -> MapSpec {
        let cells = (0..w * h)
            .map(|k| {
                let (i, j) = (k % w, k / w);
                if i == 0 || j == 0 || i == w - 1 || j == h - 1 {
                    Cell::Wall
                } else {
                    Cell::Free
                }
            })
            .collect();
        MapSpec { width: w, height: h, cells, start: Pose::new(1.5, 1.5, 0.0), goal, seed: 0 }
    }

    fn corridor() -> MapSpec {
        // row 1 is free from x = 1 to x = 6; wall face at x = 7
        let mut map = room(8, 3, Point2::new(100.0, 100.0));
        map.cells[8 + 7] = Cell::Wall;
        map
    }

    #[test]
    fn corridor_ray_hits_end_wall() {
        let hit = cast_ray(&corridor(), Point2::new(2.0, 1.5), 0.0, 0.3).unwrap();
        assert!((hit.distance - 5.0).abs() < 1e-9);
        assert_eq!(hit.surface, Surface::WallEW);
        let up = cast_ray(&corridor(), Point2::new(2.0, 1.5), PI / 2.0, 0.3).unwrap();
        assert!((up.distance - 0.5).abs() < 1e-9);
        assert_eq!(up.surface, Surface::WallNS);
    }

    #[test]
    fn diagonal_ray_hits_corner() {
        // interior free cells 1..=7, so wall faces at x = 8 and y = 8
        let map = room(9, 9, Point2::new(100.0, 100.0));
        let hit = cast_ray(&map, Point2::new(5.0, 5.0), FRAC_PI_4, 0.3).unwrap();
        assert!((hit.distance - 3.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn goal_disc_occludes_wall() {
        let map = room(12, 5, Point2::new(6.5, 2.5));
        let hit = cast_ray(&map, Point2::new(2.5, 2.5), 0.0, 0.5).unwrap();
        assert_eq!(hit.surface, Surface::Goal);
        assert!((hit.distance - 3.5).abs() < 1e-12);
        let inside = cast_ray(&map, Point2::new(6.6, 2.5), 0.0, 0.5).unwrap();
        assert_eq!(inside, RayHit { distance: 0.0, surface: Surface::Goal });
    }

    #[test]
    fn origin_in_wall_is_rejected() {
        assert_eq!(cast_ray(&corridor(), Point2::new(0.5, 0.5), 0.0, 0.3), Err(SensorError::OriginInWall));
    }

    #[test]
    fn far_walls_clip_to_one() {
        let cfg = SensorConfig { lidar_max_range: 1.0, ..SensorConfig::default() };
        let map = room(40, 40, Point2::new(100.0, 100.0));
        let scan = lidar_scan(&map, &Pose::new(20.0, 20.0, 0.3), &cfg, 0.3).unwrap();
        assert!(scan.ranges.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn half_range_wall_reads_one_half() {
        let cfg = SensorConfig::default();
        let map = room(40, 40, Point2::new(100.0, 100.0));
        // point beam 10 straight at the x = 39 wall face, 4 cells away
        let pose = Pose::new(35.0, 20.0, -cfg.lidar_offset(10));
        let scan = lidar_scan(&map, &pose, &cfg, 0.3).unwrap();
        assert!((scan.ranges[10] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn symmetric_corridor_gives_mirrored_scan() {
        let map = room(30, 5, Point2::new(100.0, 100.0));
        let cfg = SensorConfig::default();
        let scan = lidar_scan(&map, &Pose::new(4.0, 2.5, 0.0), &cfg, 0.3).unwrap();
        for i in 0..LIDAR_BEAMS {
            assert!((scan.ranges[i] - scan.ranges[LIDAR_BEAMS - 1 - i]).abs() <= 1e-9, "beam {i}");
        }
    }

    #[test]
    fn near_wall_fills_every_column() {
        let cfg = SensorConfig::default();
        let map = room(40, 40, Point2::new(100.0, 100.0));
        let (frame, hits) = render_camera_detailed(&map, &Pose::new(38.0, 20.0, 0.0), &cfg, 0.3).unwrap();
        assert!(hits.iter().all(|h| h.surface == Surface::WallEW));
        let floor = cfg.floor_color.map(|v| v as f32);
        let ceiling = cfg.ceiling_color.map(|v| v as f32);
        for row in 0..IMAGE_SIZE {
            for col in 0..IMAGE_SIZE {
                let p = frame.pixel(row, col);
                assert_ne!(p, floor);
                assert_ne!(p, ceiling);
            }
        }
    }

    #[test]
    fn strip_height_at_distance_four() {
        let cfg = SensorConfig::default();
        let map = room(40, 40, Point2::new(100.0, 100.0));
        let frame = render_camera(&map, &Pose::new(35.0, 20.0, 0.0), &cfg, 0.3).unwrap();
        let ceiling = cfg.ceiling_color.map(|v| v as f32);
        let floor = cfg.floor_color.map(|v| v as f32);
        for col in [31, 32] {
            let wall_rows: Vec<usize> =
                (0..IMAGE_SIZE).filter(|&r| frame.pixel(r, col) != ceiling && frame.pixel(r, col) != floor).collect();
            assert_eq!(wall_rows.len(), 16);
            assert_eq!(wall_rows[0], 24);
            assert_eq!(*wall_rows.last().unwrap(), 39);
        }
    }

    #[test]
    fn goal_absent_means_no_goal_pixels() {
        let cfg = SensorConfig::default();
        let map = room(20, 20, Point2::new(2.5, 2.5));
        // looking away from the goal
        let obs = observe(&map, &Pose::new(15.0, 15.0, 0.0), &cfg, 0.3).unwrap();
        assert!(!obs.goal_visible);
        assert!(obs.frame.image.pixels.chunks(3).all(|p| !(p[0] > 0.0 && p[1] == 0.0 && p[2] == 0.0)));
        let facing = observe(&map, &Pose::new(15.0, 15.0, 5.0 * PI / 4.0), &cfg, 0.3).unwrap();
        assert!(facing.goal_visible);
        assert!(facing.frame.image.pixels.chunks(3).any(|p| p[0] > 0.0 && p[1] == 0.0 && p[2] == 0.0));
    }

    #[test]
    fn quantization_round_trip_within_half_step() {
        let frame = CameraFrame { pixels: (0..IMAGE_LEN).map(|k| (k % 1000) as f32 / 999.0).collect() };
        let back = CameraFrame::from_bytes(&frame.to_bytes()).unwrap();
        for (a, b) in frame.pixels.iter().zip(&back.pixels) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-7);
        }
    }
}
