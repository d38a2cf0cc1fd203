//! Ground-truth target maps for a consecutive frame pair: the hybrid-time
//! centerness map, the motion map, and the box regression maps.
//!
//! Objects are keyed by their presence across the pair:
//!
//! * tracked (present in both frames) — heatmap rendered at the *previous*
//!   center, the first-appear location in the input window; the motion
//!   channel carries the offset to the current center.
//! * dead (previous frame only) — nothing is rendered; the location becomes
//!   a negative example.
//! * new-born (current frame only) — rendered at the current center with
//!   zero motion.
//!
//! Motion and regression values are written over each object's whole
//! Gaussian footprint (ownership resolved by proximity), which keeps
//! read-off robust to one-cell peak jitter; losses still read center cells
//! only.

use crate::geometry::{CellIndex, GridSpec};
use crate::scenario::FrameGroundTruth;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Dense row-major `height x width x channels` float grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MapBuffer {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl MapBuffer {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    #[inline]
    fn idx(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.width + col) * self.channels + ch
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.idx(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, v: f64) {
        let i = self.idx(row, col, ch);
        self.data[i] = v;
    }

    pub fn same_shape(&self, other: &MapBuffer) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }
}

/// Per-class BEV score grid; values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenternessMap(pub MapBuffer);

impl CenternessMap {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self(MapBuffer::zeros(grid.height, grid.width, grid.num_classes))
    }

    pub fn get(&self, cell: CellIndex, class_id: usize) -> f64 {
        self.0.get(cell.row, cell.col, class_id)
    }
}

/// Per-cell `(dx, dy)` motion in meters, ego frame of the current sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionMap(pub MapBuffer);

impl MotionMap {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self(MapBuffer::zeros(grid.height, grid.width, 2))
    }

    pub fn get(&self, cell: CellIndex) -> (f64, f64) {
        (
            self.0.get(cell.row, cell.col, 0),
            self.0.get(cell.row, cell.col, 1),
        )
    }
}

/// Regression channels per cell: `z, w, l, h, sin(yaw), cos(yaw)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionMaps(pub MapBuffer);

pub const REG_CHANNELS: usize = 6;

impl RegressionMaps {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self(MapBuffer::zeros(grid.height, grid.width, REG_CHANNELS))
    }

    pub fn get(&self, cell: CellIndex) -> [f64; REG_CHANNELS] {
        let mut out = [0.0; REG_CHANNELS];
        for (ch, o) in out.iter_mut().enumerate() {
            *o = self.0.get(cell.row, cell.col, ch);
        }
        out
    }
}

/// How an object relates to a consecutive frame pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignmentKind {
    Tracked,
    Dead,
    Newborn,
    Absent,
}

/// Presence across `(t-1, t)` to assignment category.
pub fn assignment_kind(present_prev: bool, present_cur: bool) -> AssignmentKind {
    match (present_prev, present_cur) {
        (true, true) => AssignmentKind::Tracked,
        (true, false) => AssignmentKind::Dead,
        (false, true) => AssignmentKind::Newborn,
        (false, false) => AssignmentKind::Absent,
    }
}

/// A rendered object's loss anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterRecord {
    pub class_id: usize,
    pub cell: CellIndex,
    pub track_id: u64,
    pub kind: AssignmentKind,
}

/// The full target stack for one frame pair.
#[derive(Debug, Clone)]
pub struct TargetMaps {
    pub centerness: CenternessMap,
    pub motion: MotionMap,
    pub regression: RegressionMaps,
    /// One record per rendered object, ordered by track id.
    pub centers: Vec<CenterRecord>,
    /// Track ids whose anchor fell outside the grid and were skipped.
    pub skipped: Vec<u64>,
}

/// Minimum rendered Gaussian radius in cells.
pub const MIN_RADIUS: usize = 2;
/// Default minimum-overlap parameter for the radius rule.
pub const DEFAULT_MIN_OVERLAP: f64 = 0.1;

/// Gaussian heatmap radius for a box of `l_cells x w_cells`, chosen so that
/// any corner displacement up to the radius keeps IoU with the original box
/// at or above `min_overlap`.
///
/// The three constraint cases (both corners out, both in, diagonally
/// shifted) are solved exactly and floored, then clamped to [`MIN_RADIUS`].
pub fn gaussian_radius(l_cells: f64, w_cells: f64, min_overlap: f64) -> usize {
    debug_assert!(l_cells >= 1.0 && w_cells >= 1.0);
    debug_assert!(min_overlap > 0.0 && min_overlap < 1.0);
    let (w, h, o) = (l_cells, w_cells, min_overlap);
    let area = w * h;
    let sum = w + h;

    // Detection grown outward: wh / ((w+2r)(h+2r)) >= o.
    let r_grow = {
        let disc = (o * sum).powi(2) + 4.0 * o * (1.0 - o) * area;
        (-o * sum + disc.sqrt()) / (4.0 * o)
    };
    // Detection shrunk inward: (w-2r)(h-2r) / wh >= o.
    let r_shrink = {
        let disc = sum * sum - 4.0 * (1.0 - o) * area;
        (sum - disc.sqrt()) / 4.0
    };
    // Detection shifted diagonally: overlap (w-r)(h-r) against union.
    let r_shift = {
        let disc = sum * sum - 4.0 * area * (1.0 - o) / (1.0 + o);
        (sum - disc.sqrt()) / 2.0
    };

    let r = r_grow.min(r_shrink).min(r_shift).max(0.0);
    (r.floor() as usize).max(MIN_RADIUS)
}

/// Splat a 2D Gaussian of the given peak onto one class channel,
/// merging with the existing map by elementwise max.
///
/// Returns `false` (a no-op) when the center is outside the grid.
pub fn render_gaussian(
    map: &mut CenternessMap,
    class_id: usize,
    center: CellIndex,
    radius: usize,
    peak: f64,
) -> bool {
    let (h, w) = (map.0.height, map.0.width);
    if center.row >= h || center.col >= w {
        return false;
    }
    let sigma = (2.0 * radius as f64 + 1.0) / 6.0;
    let denom = 2.0 * sigma * sigma;
    let r = radius as isize;
    let (cr, cc) = (center.row as isize, center.col as isize);
    for dr in -r..=r {
        for dc in -r..=r {
            let (row, col) = (cr + dr, cc + dc);
            if row < 0 || col < 0 || row >= h as isize || col >= w as isize {
                continue;
            }
            let g = (-((dr * dr + dc * dc) as f64) / denom).exp();
            let candidate = peak * g;
            let cur = map.0.get(row as usize, col as usize, class_id);
            if candidate > cur {
                map.0.set(row as usize, col as usize, class_id, candidate);
            }
        }
    }
    true
}

/// What gets rendered for one object; shared by targets and the oracle head.
#[derive(Debug, Clone, Copy)]
pub struct RenderedObject {
    pub class_id: usize,
    /// Anchor cell (first-appear location).
    pub cell: CellIndex,
    pub radius: usize,
    /// Centerness peak value in `(0, 1]` (0 suppresses the heatmap but
    /// still writes motion/regression over the footprint).
    pub peak: f64,
    /// Motion target in meters, ego frame of the current sweep.
    pub motion: (f64, f64),
    /// `z, w, l, h, sin, cos` of the current box.
    pub regression: [f64; REG_CHANNELS],
}

/// Render centerness, motion, and regression for one object.
///
/// `strength` is a per-cell ownership grid: the unit Gaussian (peak
/// ignored) decides which object's motion/regression a contested cell
/// carries, so occlusion-suppressed peaks keep their motion cues.
pub fn render_object(
    centerness: &mut CenternessMap,
    motion: &mut MotionMap,
    regression: &mut RegressionMaps,
    strength: &mut MapBuffer,
    obj: &RenderedObject,
) {
    let (h, w) = (centerness.0.height, centerness.0.width);
    let sigma = (2.0 * obj.radius as f64 + 1.0) / 6.0;
    let denom = 2.0 * sigma * sigma;
    let r = obj.radius as isize;
    let (cr, cc) = (obj.cell.row as isize, obj.cell.col as isize);
    for dr in -r..=r {
        for dc in -r..=r {
            let (row, col) = (cr + dr, cc + dc);
            if row < 0 || col < 0 || row >= h as isize || col >= w as isize {
                continue;
            }
            let (row, col) = (row as usize, col as usize);
            let g = (-((dr * dr + dc * dc) as f64) / denom).exp();
            let candidate = obj.peak * g;
            if candidate > centerness.0.get(row, col, obj.class_id) {
                centerness.0.set(row, col, obj.class_id, candidate);
            }
            if g > strength.get(row, col, 0) {
                strength.set(row, col, 0, g);
                motion.0.set(row, col, 0, obj.motion.0);
                motion.0.set(row, col, 1, obj.motion.1);
                for (ch, v) in obj.regression.iter().enumerate() {
                    regression.0.set(row, col, ch, *v);
                }
            }
        }
    }
}

/// Regression channel vector for a box.
pub fn regression_of(b: &crate::geometry::Box3D) -> [f64; REG_CHANNELS] {
    [
        b.center.2,
        b.size.0,
        b.size.1,
        b.size.2,
        b.yaw.sin(),
        b.yaw.cos(),
    ]
}

/// Radius for a box footprint on a grid.
pub fn radius_for_box(b: &crate::geometry::Box3D, grid: &GridSpec, min_overlap: f64) -> usize {
    let l_cells = (b.size.1 / grid.cell_size).max(1.0);
    let w_cells = (b.size.0 / grid.cell_size).max(1.0);
    gaussian_radius(l_cells, w_cells, min_overlap)
}

/// Build the target stack from a consecutive ground-truth frame pair.
///
/// Both frames must already be expressed in the ego frame of the current
/// sweep (the caller transforms `gt_prev` via the relative ego pose).
/// Objects whose anchor falls outside the grid are skipped and reported.
pub fn build_targets(
    gt_prev: &FrameGroundTruth,
    gt_cur: &FrameGroundTruth,
    grid: &GridSpec,
) -> TargetMaps {
    let mut centerness = CenternessMap::zeros(grid);
    let mut motion = MotionMap::zeros(grid);
    let mut regression = RegressionMaps::zeros(grid);
    let mut strength = MapBuffer::zeros(grid.height, grid.width, 1);
    let mut centers = Vec::new();
    let mut skipped = Vec::new();

    let prev: BTreeMap<u64, _> = gt_prev.boxes.iter().map(|b| (b.track_id, b)).collect();
    let cur: BTreeMap<u64, _> = gt_cur.boxes.iter().map(|b| (b.track_id, b)).collect();
    let mut ids: Vec<u64> = prev.keys().chain(cur.keys()).copied().collect();
    ids.sort_unstable();
    ids.dedup();

    for id in ids {
        let p = prev.get(&id);
        let c = cur.get(&id);
        let kind = assignment_kind(p.is_some(), c.is_some());
        let (anchor, motion_target, reg_box) = match kind {
            AssignmentKind::Tracked => {
                let (p, c) = (p.unwrap(), c.unwrap());
                let m = (
                    c.bbox.center.0 - p.bbox.center.0,
                    c.bbox.center.1 - p.bbox.center.1,
                );
                (p.bbox, m, c.bbox)
            }
            AssignmentKind::Newborn => {
                let c = c.unwrap();
                (c.bbox, (0.0, 0.0), c.bbox)
            }
            AssignmentKind::Dead | AssignmentKind::Absent => continue,
        };
        let Some(cell) = grid.world_to_cell(anchor.bev_center()) else {
            skipped.push(id);
            continue;
        };
        let radius = radius_for_box(&anchor, grid, DEFAULT_MIN_OVERLAP);
        render_object(
            &mut centerness,
            &mut motion,
            &mut regression,
            &mut strength,
            &RenderedObject {
                class_id: anchor.class_id,
                cell,
                radius,
                peak: 1.0,
                motion: motion_target,
                regression: regression_of(&reg_box),
            },
        );
        centers.push(CenterRecord {
            class_id: anchor.class_id,
            cell,
            track_id: id,
            kind,
        });
    }

    TargetMaps {
        centerness,
        motion,
        regression,
        centers,
        skipped,
    }
}

/// Targets for a single initial frame: every object is new-born.
pub fn build_targets_single(gt_0: &FrameGroundTruth, grid: &GridSpec) -> TargetMaps {
    build_targets(&FrameGroundTruth::empty(gt_0.frame), gt_0, grid)
}
