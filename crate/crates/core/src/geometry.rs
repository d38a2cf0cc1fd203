//! BEV coordinate frames, rigid 2D transforms, grid indexing, boxes, and
//! pillar occupancy.
//!
//! Everything tracking-related happens in bird's-eye view, so ego motion is
//! SE(2): `(x, y, yaw)` with z / pitch / roll ignored.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Normalize an angle to `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// A rigid 2D transform / pose: translation plus heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, normalized to `(-pi, pi]`.
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
        }
    }

    /// Compose two transforms: the result applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        Pose2D {
            x: self.x + c * other.x - s * other.y,
            y: self.y + s * other.x + c * other.y,
            yaw: normalize_angle(self.yaw + other.yaw),
        }
    }

    /// The inverse transform: `p.compose(&p.invert())` is the identity.
    pub fn invert(&self) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        Pose2D {
            x: -(c * self.x + s * self.y),
            y: -(-s * self.x + c * self.y),
            yaw: normalize_angle(-self.yaw),
        }
    }

    /// Apply the transform to a point.
    pub fn transform_point(&self, pt: (f64, f64)) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (
            self.x + c * pt.0 - s * pt.1,
            self.y + s * pt.0 + c * pt.1,
        )
    }

    /// Rotate a free vector (velocity, motion offset) without translating it.
    pub fn rotate_vec(&self, v: (f64, f64)) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (c * v.0 - s * v.1, s * v.0 + c * v.1)
    }
}

/// Transform taking coordinates expressed in `from`'s frame into `to`'s
/// frame, both poses being expressed in a common world frame.
pub fn relative_pose(from: &Pose2D, to: &Pose2D) -> Pose2D {
    to.invert().compose(from)
}

/// One LiDAR return: position, reflectance, and relative timestamp.
///
/// `dt` is 0 for current-sweep points and negative for past sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point5D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Reflectance in `[0, 1]`.
    pub r: f64,
    /// Relative timestamp in seconds, `<= 0`.
    pub dt: f64,
}

/// An upright 3D bounding box in BEV convention.
///
/// `l` runs along the heading axis, `w` across it. Velocity is an optional
/// annotation filled by trackers; it does not participate in equality.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Box3D {
    pub center: (f64, f64, f64),
    /// `(w, l, h)` in meters, all positive.
    pub size: (f64, f64, f64),
    /// Heading in radians, normalized to `(-pi, pi]`.
    pub yaw: f64,
    pub class_id: usize,
    pub velocity: Option<(f64, f64)>,
}

impl Box3D {
    pub fn new(center: (f64, f64, f64), size: (f64, f64, f64), yaw: f64, class_id: usize) -> Self {
        debug_assert!(size.0 > 0.0 && size.1 > 0.0 && size.2 > 0.0);
        Self {
            center,
            size,
            yaw: normalize_angle(yaw),
            class_id,
            velocity: None,
        }
    }

    pub fn bev_center(&self) -> (f64, f64) {
        (self.center.0, self.center.1)
    }
}

impl PartialEq for Box3D {
    // Velocity is tracker metadata, not part of box identity.
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center
            && self.size == other.size
            && self.yaw == other.yaw
            && self.class_id == other.class_id
    }
}

/// Euclidean distance between two box centers in BEV.
pub fn bev_center_distance(a: &Box3D, b: &Box3D) -> f64 {
    let dx = a.center.0 - b.center.0;
    let dy = a.center.1 - b.center.1;
    (dx * dx + dy * dy).sqrt()
}

/// A dense BEV grid layout: spatial extent, cell size, and class count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub range_min: (f64, f64),
    pub range_max: (f64, f64),
    pub cell_size: f64,
    pub height: usize,
    pub width: usize,
    pub num_classes: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("grid extent {0} is not an integer multiple of cell size {1}")]
    NonIntegralExtent(f64, f64),
    #[error("invalid grid parameter: {0}")]
    Invalid(&'static str),
}

impl GridSpec {
    pub fn new(
        range_min: (f64, f64),
        range_max: (f64, f64),
        cell_size: f64,
        num_classes: usize,
    ) -> Result<Self, GridError> {
        if cell_size <= 0.0 {
            return Err(GridError::Invalid("cell_size must be positive"));
        }
        if num_classes == 0 {
            return Err(GridError::Invalid("num_classes must be at least 1"));
        }
        let cells = |lo: f64, hi: f64| -> Result<usize, GridError> {
            let span = hi - lo;
            if span <= 0.0 {
                return Err(GridError::Invalid("range_max must exceed range_min"));
            }
            let n = span / cell_size;
            if (n - n.round()).abs() > 1e-9 {
                return Err(GridError::NonIntegralExtent(span, cell_size));
            }
            Ok(n.round() as usize)
        };
        let width = cells(range_min.0, range_max.0)?;
        let height = cells(range_min.1, range_max.1)?;
        Ok(Self {
            range_min,
            range_max,
            cell_size,
            height,
            width,
            num_classes,
        })
    }

    /// The default experiment grid: `[-51.2, 51.2]` m both axes at 0.8 m
    /// cells (128x128) with three classes.
    pub fn default_grid(num_classes: usize) -> Self {
        Self::new((-51.2, -51.2), (51.2, 51.2), 0.8, num_classes).expect("valid default grid")
    }

    /// Map a BEV point to its cell, or `None` when outside the grid.
    ///
    /// Cells are half-open `[low, high)` per axis, so a point exactly at
    /// `range_max` is out of grid. Rows index y, columns index x.
    pub fn world_to_cell(&self, pt: (f64, f64)) -> Option<CellIndex> {
        let col = ((pt.0 - self.range_min.0) / self.cell_size).floor();
        let row = ((pt.1 - self.range_min.1) / self.cell_size).floor();
        if row < 0.0 || col < 0.0 || row >= self.height as f64 || col >= self.width as f64 {
            return None;
        }
        Some(CellIndex {
            row: row as usize,
            col: col as usize,
        })
    }

    /// The BEV coordinates of a cell's center.
    pub fn cell_center(&self, idx: CellIndex) -> (f64, f64) {
        (
            self.range_min.0 + (idx.col as f64 + 0.5) * self.cell_size,
            self.range_min.1 + (idx.row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Continuous cell-space coordinates of a BEV point (cell centers sit at
    /// integer coordinates). Used for sub-cell distance checks.
    pub fn cell_coords(&self, pt: (f64, f64)) -> (f64, f64) {
        (
            (pt.1 - self.range_min.1) / self.cell_size - 0.5,
            (pt.0 - self.range_min.0) / self.cell_size - 0.5,
        )
    }

    pub fn n_cells(&self) -> usize {
        self.height * self.width
    }
}

/// A (row, col) grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Per-cell occupancy summary of a pillarized point cloud.
#[derive(Debug, Clone)]
pub struct PillarGrid {
    pub height: usize,
    pub width: usize,
    /// Number of points per cell, row-major.
    pub counts: Vec<u32>,
    /// Mean relative timestamp per cell; 0 where the cell is empty.
    pub mean_dt: Vec<f64>,
}

impl PillarGrid {
    pub fn at(&self, idx: CellIndex) -> (u32, f64) {
        let i = idx.row * self.width + idx.col;
        (self.counts[i], self.mean_dt[i])
    }

    pub fn total_points(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Rasterize a point cloud into per-cell counts and mean timestamps.
/// Points outside the grid are dropped.
pub fn pillarize(points: &[Point5D], grid: &GridSpec) -> PillarGrid {
    let n = grid.n_cells();
    let mut counts = vec![0u32; n];
    let mut dt_sum = vec![0f64; n];
    for p in points {
        if let Some(cell) = grid.world_to_cell((p.x, p.y)) {
            let i = cell.row * grid.width + cell.col;
            counts[i] += 1;
            dt_sum[i] += p.dt;
        }
    }
    let mean_dt = counts
        .iter()
        .zip(&dt_sum)
        .map(|(&c, &s)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    PillarGrid {
        height: grid.height,
        width: grid.width,
        counts,
        mean_dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_pose_close(a: &Pose2D, b: &Pose2D, tol: f64) {
        assert!(
            (a.x - b.x).abs() < tol
                && (a.y - b.y).abs() < tol
                && normalize_angle(a.yaw - b.yaw).abs() < tol,
            "poses differ: {a:?} vs {b:?}"
        );
    }

    fn random_pose(rng: &mut impl Rng) -> Pose2D {
        Pose2D::new(
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(-PI..PI),
        )
    }

    #[test]
    fn compose_identity() {
        let p = Pose2D::new(3.0, -2.0, 0.7);
        assert_pose_close(&Pose2D::identity().compose(&p), &p, 1e-12);
        assert_pose_close(&p.compose(&Pose2D::identity()), &p, 1e-12);
    }

    #[test]
    fn compose_rotation_then_translation() {
        // (1,0,pi/2) o (1,0,0): the inner translation is rotated by pi/2.
        let a = Pose2D::new(1.0, 0.0, PI / 2.0);
        let b = Pose2D::new(1.0, 0.0, 0.0);
        let c = a.compose(&b);
        assert_pose_close(&c, &Pose2D::new(1.0, 1.0, PI / 2.0), 1e-9);
    }

    #[test]
    fn invert_is_two_sided_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = random_pose(&mut rng);
            assert_pose_close(&p.compose(&p.invert()), &Pose2D::identity(), 1e-9);
            assert_pose_close(&p.invert().compose(&p), &Pose2D::identity(), 1e-9);
        }
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let c = random_pose(&mut rng);
            assert_pose_close(&a.compose(&b).compose(&c), &a.compose(&b.compose(&c)), 1e-9);
        }
    }

    #[test]
    fn relative_pose_identity_and_translation() {
        let a = Pose2D::new(4.0, 5.0, 1.0);
        let rel = relative_pose(&a, &a);
        let q = (3.3, -1.2);
        let out = rel.transform_point(q);
        assert!((out.0 - q.0).abs() < 1e-12 && (out.1 - q.1).abs() < 1e-12);

        let from = Pose2D::identity();
        let to = Pose2D::new(2.0, 0.0, 0.0);
        let rel = relative_pose(&from, &to);
        let out = rel.transform_point((3.0, 0.0));
        assert!((out.0 - 1.0).abs() < 1e-12 && out.1.abs() < 1e-12);
    }

    #[test]
    fn relative_pose_rotation() {
        let from = Pose2D::identity();
        let to = Pose2D::new(0.0, 0.0, PI / 2.0);
        let out = relative_pose(&from, &to).transform_point((1.0, 0.0));
        assert!((out.0 - 0.0).abs() < 1e-9 && (out.1 + 1.0).abs() < 1e-9);
    }

    #[test]
    fn relative_pose_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let a = random_pose(&mut rng);
            let b = random_pose(&mut rng);
            let c = random_pose(&mut rng);
            let direct = relative_pose(&a, &c);
            let chained = relative_pose(&b, &c).compose(&relative_pose(&a, &b));
            assert_pose_close(&direct, &chained, 1e-9);
        }
    }

    #[test]
    fn transform_point_cases() {
        let id = Pose2D::identity();
        assert_eq!(id.transform_point((3.0, 4.0)), (3.0, 4.0));
        let t = Pose2D::new(1.0, 2.0, 0.0);
        assert_eq!(t.transform_point((0.0, 0.0)), (1.0, 2.0));
        let r = Pose2D::new(0.0, 0.0, PI);
        let out = r.transform_point((1.0, 0.0));
        assert!((out.0 + 1.0).abs() < 1e-9 && out.1.abs() < 1e-9);
    }

    #[test]
    fn world_to_cell_corners_and_out_of_grid() {
        let g = GridSpec::default_grid(3);
        assert_eq!(g.height, 128);
        assert_eq!(g.width, 128);
        assert_eq!(
            g.world_to_cell((-51.2, -51.2)),
            Some(CellIndex::new(0, 0))
        );
        assert_eq!(g.world_to_cell((0.0, 0.0)), Some(CellIndex::new(64, 64)));
        assert_eq!(g.world_to_cell((60.0, 0.0)), None);
        // Half-open cells: exactly range_max is outside.
        assert_eq!(g.world_to_cell((51.2, 0.0)), None);
        assert_eq!(g.world_to_cell((51.2 - 1e-9, 0.0)).map(|c| c.col), Some(127));
    }

    #[test]
    fn cell_round_trip_within_half_cell() {
        let g = GridSpec::default_grid(1);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let pt = (
                rng.random_range(-51.2..51.2),
                rng.random_range(-51.2..51.2),
            );
            let cell = g.world_to_cell(pt).expect("in grid");
            let center = g.cell_center(cell);
            assert!((center.0 - pt.0).abs() <= g.cell_size / 2.0 + 1e-12);
            assert!((center.1 - pt.1).abs() <= g.cell_size / 2.0 + 1e-12);
            // Exact cell centers round-trip to the same cell.
            assert_eq!(g.world_to_cell(center), Some(cell));
        }
    }

    #[test]
    fn bev_distance_cases() {
        let mk = |x: f64, y: f64| Box3D::new((x, y, 0.5), (1.0, 1.0, 1.0), 0.0, 0);
        assert_eq!(bev_center_distance(&mk(0.0, 0.0), &mk(0.0, 0.0)), 0.0);
        assert!((bev_center_distance(&mk(0.0, 0.0), &mk(3.0, 4.0)) - 5.0).abs() < 1e-12);
        assert!(
            (bev_center_distance(&mk(1.0, 1.0), &mk(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-12
        );
    }

    #[test]
    fn box_equality_ignores_velocity() {
        let mut a = Box3D::new((1.0, 2.0, 0.5), (1.0, 2.0, 1.5), 0.3, 1);
        let b = a;
        a.velocity = Some((4.0, 0.0));
        assert_eq!(a, b);
    }

    #[test]
    fn pillarize_counts_and_mean_dt() {
        let g = GridSpec::default_grid(1);
        assert_eq!(pillarize(&[], &g).total_points(), 0);

        let p = |x: f64, y: f64, dt: f64| Point5D {
            x,
            y,
            z: 0.0,
            r: 0.5,
            dt,
        };
        let cloud = vec![p(0.1, 0.1, 0.0), p(0.2, 0.2, 0.0), p(0.3, 0.3, -0.1)];
        let grid = pillarize(&cloud, &g);
        let cell = g.world_to_cell((0.2, 0.2)).unwrap();
        let (count, mean_dt) = grid.at(cell);
        assert_eq!(count, 3);
        assert!((mean_dt - (-0.1 / 3.0)).abs() < 1e-12);

        // A point exactly at range_max is dropped.
        let edge = pillarize(&[p(51.2, 0.0, 0.0)], &g);
        assert_eq!(edge.total_points(), 0);
    }

    #[test]
    fn pillarize_conserves_in_grid_points() {
        let g = GridSpec::default_grid(1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cloud: Vec<Point5D> = (0..500)
            .map(|_| Point5D {
                x: rng.random_range(-60.0..60.0),
                y: rng.random_range(-60.0..60.0),
                z: 0.0,
                r: 0.5,
                dt: 0.0,
            })
            .collect();
        let in_grid = cloud
            .iter()
            .filter(|p| g.world_to_cell((p.x, p.y)).is_some())
            .count() as u64;
        assert_eq!(pillarize(&cloud, &g).total_points(), in_grid);
    }

    #[test]
    fn angle_normalization_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let a = normalize_angle(rng.random_range(-100.0..100.0));
            assert!(a > -PI && a <= PI);
        }
    }
}
