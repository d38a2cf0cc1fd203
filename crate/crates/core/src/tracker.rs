//! Online joint detection and tracking over head outputs.
//!
//! Each step transforms the previous sparse track map by ego motion,
//! rasterizes it, averages it cellwise with the current centerness map,
//! extracts peaks by threshold plus local-max NMS, reads identities off by
//! spatial coincidence, and advances matched tracks by the motion channel.
//! Births are unmatched peaks; deaths fall out of the averaged map once
//! their decaying score drops under the threshold. No box-to-box distance
//! between detections of different frames is ever computed.

use crate::geometry::{normalize_angle, Box3D, CellIndex, GridSpec, Pose2D};
use crate::oracle::HeadOutput;
use crate::targets::{CenternessMap, MapBuffer};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum TrackerError {
    #[error("head output grid does not match tracker state grid")]
    GridMismatch,
    #[error("outputs and ego poses have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("run_sequence needs at least one frame")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerConfig {
    /// Score threshold on the averaged map.
    pub tau: f64,
    /// NMS window side length in cells (odd).
    pub nms_window: usize,
    /// Read-off radius in cells (Euclidean, sub-cell centers).
    pub read_radius: f64,
    /// Report tracks that carried no current-frame evidence.
    pub emit_coasting: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            nms_window: 3,
            read_radius: 1.5,
            emit_coasting: true,
        }
    }
}

/// One live track: the sparse record behind the updated centerness map.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackEntry {
    pub track_id: u64,
    pub class_id: usize,
    /// Continuous center in the current ego frame, meters.
    pub center: (f64, f64),
    pub score: f64,
    pub bbox: Box3D,
    /// Motion read at the claimed peak this frame, meters per frame.
    pub last_motion: (f64, f64),
    /// Frames since birth.
    pub age: u32,
    /// True when the claimed peak had no current-frame evidence above tau.
    pub coasting: bool,
}

/// Sparse tracker state between frames.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pub entries: Vec<TrackEntry>,
    pub next_id: u64,
    pub frame: usize,
    pub grid: GridSpec,
}

/// One reported track for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackReport {
    pub track_id: u64,
    pub class_id: usize,
    pub center: (f64, f64),
    pub score: f64,
    pub bbox: Box3D,
    /// Meters per frame, current ego frame.
    pub motion: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTracks {
    pub frame: usize,
    pub tracks: Vec<TrackReport>,
}

/// A thresholded local maximum on a centerness map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub class_id: usize,
    pub cell: CellIndex,
    pub score: f64,
}

/// Threshold + NMS: cells that dominate their window (ties resolved toward
/// the lower (row, col)) and clear `tau`, sorted by descending score.
pub fn extract_peaks(map: &CenternessMap, cfg: &TrackerConfig) -> Vec<Peak> {
    let (h, w, classes) = (map.0.height, map.0.width, map.0.channels);
    let r = (cfg.nms_window / 2) as isize;
    let mut peaks = Vec::new();
    for class_id in 0..classes {
        for row in 0..h {
            for col in 0..w {
                let score = map.0.get(row, col, class_id);
                if score < cfg.tau {
                    continue;
                }
                let mut is_peak = true;
                'window: for dr in -r..=r {
                    for dc in -r..=r {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (row as isize + dr, col as isize + dc);
                        if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                            continue;
                        }
                        let neighbor = map.0.get(nr as usize, nc as usize, class_id);
                        if neighbor > score
                            || (neighbor == score && (nr as usize, nc as usize) < (row, col))
                        {
                            is_peak = false;
                            break 'window;
                        }
                    }
                }
                if is_peak {
                    peaks.push(Peak {
                        class_id,
                        cell: CellIndex::new(row, col),
                        score,
                    });
                }
            }
        }
    }
    peaks.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then_with(|| (a.class_id, a.cell.row, a.cell.col).cmp(&(b.class_id, b.cell.row, b.cell.col)))
    });
    peaks
}

fn assemble_box(
    reg: [f64; 6],
    center: (f64, f64),
    class_id: usize,
    fallback: Option<&Box3D>,
) -> Box3D {
    let [z, w, l, h, sin, cos] = reg;
    if w > 1e-6 && l > 1e-6 && h > 1e-6 {
        let mut b = Box3D::new((center.0, center.1, z), (w, l, h), sin.atan2(cos), class_id);
        b.velocity = None;
        b
    } else if let Some(prev) = fallback {
        // No regression support at this cell (spurious peak or decayed
        // echo): keep the last known extent.
        Box3D::new(
            (center.0, center.1, prev.center.2),
            prev.size,
            prev.yaw,
            class_id,
        )
    } else {
        Box3D::new((center.0, center.1, 0.5), (1.0, 1.0, 1.0), 0.0, class_id)
    }
}

fn reports(state: &TrackerState, cfg: &TrackerConfig) -> FrameTracks {
    FrameTracks {
        frame: state.frame,
        tracks: state
            .entries
            .iter()
            .filter(|e| cfg.emit_coasting || !e.coasting)
            .map(|e| TrackReport {
                track_id: e.track_id,
                class_id: e.class_id,
                center: e.center,
                score: e.score,
                bbox: e.bbox,
                motion: e.last_motion,
            })
            .collect(),
    }
}

/// Initialize tracking identities on the first frame's output.
///
/// Track centers start at peak cell centers; the motion update is not
/// applied on the initial frame.
pub fn init(out0: &HeadOutput, cfg: &TrackerConfig) -> (TrackerState, FrameTracks) {
    let peaks = extract_peaks(&out0.centerness, cfg);
    let mut entries = Vec::with_capacity(peaks.len());
    for (i, p) in peaks.iter().enumerate() {
        let center = out0.grid.cell_center(p.cell);
        let reg = out0.regression.get(p.cell);
        entries.push(TrackEntry {
            track_id: i as u64,
            class_id: p.class_id,
            center,
            score: p.score,
            bbox: assemble_box(reg, center, p.class_id, None),
            last_motion: out0.motion.get(p.cell),
            age: 0,
            coasting: false,
        });
    }
    let state = TrackerState {
        next_id: entries.len() as u64,
        entries,
        frame: 0,
        grid: out0.grid.clone(),
    };
    let tracks = reports(&state, cfg);
    (state, tracks)
}

/// One online step: ego-compensate the previous track map, average with the
/// current centerness map, read identities off, update by motion.
///
/// `ego_rel` maps coordinates in the previous ego frame into the current
/// ego frame.
pub fn step(
    state: &TrackerState,
    ego_rel: &Pose2D,
    out_t: &HeadOutput,
    cfg: &TrackerConfig,
) -> Result<(TrackerState, FrameTracks), TrackerError> {
    if state.grid != out_t.grid {
        return Err(TrackerError::GridMismatch);
    }
    let grid = &state.grid;

    // (1) Ego-motion compensation of the sparse map.
    let mut entries: Vec<TrackEntry> = state
        .entries
        .iter()
        .map(|e| {
            let center = ego_rel.transform_point(e.center);
            let mut bbox = e.bbox;
            bbox.center = (center.0, center.1, e.bbox.center.2);
            bbox.yaw = normalize_angle(e.bbox.yaw + ego_rel.yaw);
            TrackEntry {
                center,
                bbox,
                last_motion: ego_rel.rotate_vec(e.last_motion),
                ..e.clone()
            }
        })
        .collect();

    // (2) Rasterize the track map: score point masses, max-merged.
    let mut raster = MapBuffer::zeros(grid.height, grid.width, grid.num_classes);
    for e in entries.iter_mut() {
        if let Some(cell) = grid.world_to_cell(e.center) {
            let cur = raster.get(cell.row, cell.col, e.class_id);
            if e.score > cur {
                raster.set(cell.row, cell.col, e.class_id, e.score);
            }
        } else {
            // Left the grid: mark dead by making it unclaimable.
            e.score = -1.0;
        }
    }

    // (3) Cellwise average with the current hybrid-time map.
    let mut averaged = CenternessMap::zeros(grid);
    for (i, v) in averaged.0.data.iter_mut().enumerate() {
        *v = (out_t.centerness.0.data[i] + raster.data[i]) / 2.0;
    }

    // (4) Threshold + NMS on the averaged map.
    let peaks = extract_peaks(&averaged, cfg);

    // (5) Read-off, greedy over peaks by descending score.
    let mut claimed = vec![false; entries.len()];
    let mut next_entries: Vec<TrackEntry> = Vec::with_capacity(peaks.len());
    let mut next_id = state.next_id;
    for p in &peaks {
        let peak_coords = (p.cell.row as f64, p.cell.col as f64);
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in entries.iter().enumerate() {
            if claimed[i] || e.class_id != p.class_id || e.score < 0.0 {
                continue;
            }
            let ec = grid.cell_coords(e.center);
            let d = ((ec.0 - peak_coords.0).powi(2) + (ec.1 - peak_coords.1).powi(2)).sqrt();
            if d > cfg.read_radius {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bd)) => {
                    d < bd || (d == bd && e.track_id < entries[bi].track_id)
                }
            };
            if better {
                best = Some((i, d));
            }
        }

        let motion = out_t.motion.get(p.cell);
        let cell_center = grid.cell_center(p.cell);
        let center = (cell_center.0 + motion.0, cell_center.1 + motion.1);
        let reg = out_t.regression.get(p.cell);
        let raw = out_t.centerness.get(p.cell, p.class_id);
        let coasting = raw < cfg.tau;

        match best {
            Some((i, _)) => {
                claimed[i] = true;
                let prev = &entries[i];
                next_entries.push(TrackEntry {
                    track_id: prev.track_id,
                    class_id: prev.class_id,
                    center,
                    score: p.score,
                    bbox: assemble_box(reg, center, prev.class_id, Some(&prev.bbox)),
                    last_motion: motion,
                    age: prev.age + 1,
                    coasting,
                });
            }
            None => {
                next_entries.push(TrackEntry {
                    track_id: next_id,
                    class_id: p.class_id,
                    center,
                    score: p.score,
                    bbox: assemble_box(reg, center, p.class_id, None),
                    last_motion: motion,
                    age: 0,
                    coasting,
                });
                next_id += 1;
            }
        }
    }
    // Entries never claimed by a peak die here.

    let new_state = TrackerState {
        entries: next_entries,
        next_id,
        frame: state.frame + 1,
        grid: grid.clone(),
    };
    let tracks = reports(&new_state, cfg);
    Ok((new_state, tracks))
}

/// Run the full online loop over a sequence of head outputs.
///
/// `ego_poses` are absolute world-frame poses, one per frame.
pub fn run_sequence(
    outputs: &[HeadOutput],
    ego_poses: &[Pose2D],
    cfg: &TrackerConfig,
) -> Result<Vec<FrameTracks>, TrackerError> {
    if outputs.len() != ego_poses.len() {
        return Err(TrackerError::LengthMismatch(outputs.len(), ego_poses.len()));
    }
    if outputs.is_empty() {
        return Err(TrackerError::Empty);
    }
    let (mut state, first) = init(&outputs[0], cfg);
    let mut all = Vec::with_capacity(outputs.len());
    all.push(first);
    for t in 1..outputs.len() {
        let ego_rel = crate::geometry::relative_pose(&ego_poses[t - 1], &ego_poses[t]);
        let (next, tracks) = step(&state, &ego_rel, &outputs[t], cfg)?;
        state = next;
        all.push(tracks);
    }
    Ok(all)
}
