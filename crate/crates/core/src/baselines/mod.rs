//! Heuristic-matching tracking-by-detection baselines: a greedy
//! closest-distance matcher with velocity propagation and track-life
//! management, and a constant-velocity Kalman-filter tracker with
//! Hungarian assignment.
//!
//! Both consume the same detections as the joint tracker (extracted from
//! identical head outputs) so comparisons isolate the association logic.
//! Track state lives in the world frame; the sequence runner converts
//! detections in and reports out per ego pose.

pub mod hungarian;
pub mod kalman;

pub use hungarian::{hungarian, Assignment, CostMatrix};
pub use kalman::{kf_predict, kf_update, KfError, KfNoise, KfState};

use crate::geometry::{normalize_angle, Box3D, GridSpec, Pose2D};
use crate::oracle::HeadOutput;
use crate::tracker::{extract_peaks, FrameTracks, TrackReport, TrackerConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One detection handed to a baseline tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: Box3D,
    pub score: f64,
    pub class_id: usize,
    /// Estimated velocity in m/s.
    pub velocity: (f64, f64),
}

/// Gate width used for pairs that must never match.
const GATE_SENTINEL: f64 = 1e9;

/// Heuristic knobs: per-class match gates and track-life management.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Per-class maximum match distance in meters (keys are class ids).
    pub gates: BTreeMap<usize, f64>,
    /// Gate for classes without an explicit entry.
    pub default_gate: f64,
    /// Frames a track survives unmatched before deletion.
    pub max_age: u32,
    /// Consecutive hits before a track is reported.
    pub min_hits: u32,
    pub kf: KfNoise,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        // Car 4 m, pedestrian 1 m, bicycle 2.5 m.
        let gates = BTreeMap::from([(0, 4.0), (1, 1.0), (2, 2.5)]);
        Self {
            gates,
            default_gate: 4.0,
            max_age: 3,
            min_hits: 2,
            kf: KfNoise::default(),
        }
    }
}

impl BaselineConfig {
    pub fn gate(&self, class_id: usize) -> f64 {
        *self.gates.get(&class_id).unwrap_or(&self.default_gate)
    }
}

/// Turn a head output into detections at their current-frame locations.
///
/// Peaks live at first-appear locations, so each detection center is
/// advanced by the motion channel; velocity is that motion over the frame
/// interval.
pub fn detections_from_head(
    out: &HeadOutput,
    grid: &GridSpec,
    tau: f64,
    frame_dt: f64,
) -> Vec<Detection> {
    let cfg = TrackerConfig { tau, ..Default::default() };
    extract_peaks(&out.centerness, &cfg)
        .into_iter()
        .map(|p| {
            let cell_center = grid.cell_center(p.cell);
            let motion = out.motion.get(p.cell);
            let center = (cell_center.0 + motion.0, cell_center.1 + motion.1);
            let reg = out.regression.get(p.cell);
            let [z, w, l, h, sin, cos] = reg;
            let bbox = if w > 1e-6 && l > 1e-6 && h > 1e-6 {
                Box3D::new((center.0, center.1, z), (w, l, h), sin.atan2(cos), p.class_id)
            } else {
                Box3D::new((center.0, center.1, 0.5), (1.0, 1.0, 1.0), 0.0, p.class_id)
            };
            Detection {
                bbox,
                score: p.score,
                class_id: p.class_id,
                velocity: (motion.0 / frame_dt, motion.1 / frame_dt),
            }
        })
        .collect()
}

/// A baseline track (either flavor); position and velocity in world frame.
#[derive(Debug, Clone)]
struct BaseTrack {
    id: u64,
    class_id: usize,
    pos: (f64, f64),
    vel: (f64, f64),
    bbox: Box3D,
    score: f64,
    /// Consecutive hit streak.
    hits: u32,
    /// Frames since the last match.
    misses: u32,
    matched_this_frame: bool,
    kf: Option<KfState>,
}

/// Shared lifecycle state for both baselines.
#[derive(Debug, Clone, Default)]
pub struct BaselineState {
    tracks: Vec<BaseTrack>,
    next_id: u64,
}

impl BaselineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn live_count(&self) -> usize {
        self.tracks.len()
    }
}

/// One reported track in world coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub track_id: u64,
    pub class_id: usize,
    pub pos: (f64, f64),
    pub vel: (f64, f64),
    pub bbox: Box3D,
    pub score: f64,
}

fn report_matched(state: &BaselineState, cfg: &BaselineConfig) -> Vec<BaselineReport> {
    state
        .tracks
        .iter()
        .filter(|t| t.matched_this_frame && t.hits >= cfg.min_hits)
        .map(|t| BaselineReport {
            track_id: t.id,
            class_id: t.class_id,
            pos: t.pos,
            vel: t.vel,
            bbox: t.bbox,
            score: t.score,
        })
        .collect()
}

fn start_track(state: &mut BaselineState, det: &Detection, with_kf: bool, cfg: &BaselineConfig) {
    let pos = det.bbox.bev_center();
    state.tracks.push(BaseTrack {
        id: state.next_id,
        class_id: det.class_id,
        pos,
        vel: det.velocity,
        bbox: det.bbox,
        score: det.score,
        hits: 1,
        misses: 0,
        matched_this_frame: true,
        kf: with_kf.then(|| KfState::from_detection(pos, det.velocity, &cfg.kf)),
    });
    state.next_id += 1;
}

fn finish_lifecycle(state: &mut BaselineState, matched: &[bool], dt: f64, cfg: &BaselineConfig) {
    for (t, &m) in state.tracks.iter_mut().zip(matched) {
        if !m {
            t.misses += 1;
            t.hits = 0;
            t.matched_this_frame = false;
            // Coast at constant velocity while retained.
            t.pos = (t.pos.0 + t.vel.0 * dt, t.pos.1 + t.vel.1 * dt);
            t.bbox.center.0 = t.pos.0;
            t.bbox.center.1 = t.pos.1;
            if let Some(kf) = &t.kf {
                t.kf = Some(kf_predict(kf, dt, &cfg.kf));
            }
        }
    }
    let max_age = cfg.max_age;
    state.tracks.retain(|t| t.misses <= max_age);
}

/// Greedy closest-distance matching step.
///
/// Each detection is propagated backward by its velocity over `frame_dt`
/// and compared against track positions; pairs are claimed globally in
/// ascending distance within the per-class gate.
pub fn greedy_step(
    state: &mut BaselineState,
    dets: &[Detection],
    cfg: &BaselineConfig,
    frame_dt: f64,
) -> Vec<BaselineReport> {
    let back: Vec<(f64, f64)> = dets
        .iter()
        .map(|d| {
            let c = d.bbox.bev_center();
            (c.0 - d.velocity.0 * frame_dt, c.1 - d.velocity.1 * frame_dt)
        })
        .collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, t) in state.tracks.iter().enumerate() {
        for (di, d) in dets.iter().enumerate() {
            if t.class_id != d.class_id {
                continue;
            }
            let dist = ((t.pos.0 - back[di].0).powi(2) + (t.pos.1 - back[di].1).powi(2)).sqrt();
            if dist <= cfg.gate(d.class_id) {
                pairs.push((dist, ti, di));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut track_matched = vec![false; state.tracks.len()];
    let mut det_matched = vec![false; dets.len()];
    for (_, ti, di) in pairs {
        if track_matched[ti] || det_matched[di] {
            continue;
        }
        track_matched[ti] = true;
        det_matched[di] = true;
        let t = &mut state.tracks[ti];
        let d = &dets[di];
        t.pos = d.bbox.bev_center();
        t.vel = d.velocity;
        t.bbox = d.bbox;
        t.score = d.score;
        t.hits += 1;
        t.misses = 0;
        t.matched_this_frame = true;
    }

    finish_lifecycle(state, &track_matched, frame_dt, cfg);
    for (di, d) in dets.iter().enumerate() {
        if !det_matched[di] {
            start_track(state, d, false, cfg);
        }
    }
    report_matched(state, cfg)
}

/// Kalman-filter step: predict all tracks, assign via Hungarian on gated
/// center distance per class, update matched tracks.
pub fn kf_step(
    state: &mut BaselineState,
    dets: &[Detection],
    cfg: &BaselineConfig,
    frame_dt: f64,
) -> Vec<BaselineReport> {
    // Predict every track forward.
    for t in state.tracks.iter_mut() {
        let kf = t
            .kf
            .get_or_insert_with(|| KfState::from_detection(t.pos, t.vel, &cfg.kf));
        let predicted = kf_predict(kf, frame_dt, &cfg.kf);
        t.pos = predicted.position();
        t.vel = predicted.velocity();
        t.kf = Some(predicted);
    }

    let mut track_matched = vec![false; state.tracks.len()];
    let mut det_matched = vec![false; dets.len()];

    // Per-class rectangular assignment.
    let mut classes: Vec<usize> = state
        .tracks
        .iter()
        .map(|t| t.class_id)
        .chain(dets.iter().map(|d| d.class_id))
        .collect();
    classes.sort_unstable();
    classes.dedup();

    for class_id in classes {
        let t_idx: Vec<usize> = (0..state.tracks.len())
            .filter(|&i| state.tracks[i].class_id == class_id)
            .collect();
        let d_idx: Vec<usize> = (0..dets.len())
            .filter(|&i| dets[i].class_id == class_id)
            .collect();
        if t_idx.is_empty() || d_idx.is_empty() {
            continue;
        }
        let gate = cfg.gate(class_id);
        let costs = CostMatrix::from_fn(t_idx.len(), d_idx.len(), |r, c| {
            let t = &state.tracks[t_idx[r]];
            let d = dets[d_idx[c]].bbox.bev_center();
            let dist = ((t.pos.0 - d.0).powi(2) + (t.pos.1 - d.1).powi(2)).sqrt();
            if dist <= gate {
                dist
            } else {
                GATE_SENTINEL
            }
        });
        for (r, c) in hungarian(&costs).pairs {
            if costs.get(r, c) >= GATE_SENTINEL {
                continue;
            }
            let ti = t_idx[r];
            let di = d_idx[c];
            track_matched[ti] = true;
            det_matched[di] = true;
            let t = &mut state.tracks[ti];
            let d = &dets[di];
            let kf = t.kf.as_ref().expect("predicted above");
            let updated = kf_update(kf, d.bbox.bev_center(), &cfg.kf)
                .expect("innovation covariance stays invertible");
            t.pos = updated.position();
            t.vel = updated.velocity();
            t.kf = Some(updated);
            t.bbox = d.bbox;
            t.bbox.center.0 = t.pos.0;
            t.bbox.center.1 = t.pos.1;
            t.score = d.score;
            t.hits += 1;
            t.misses = 0;
            t.matched_this_frame = true;
        }
    }

    finish_lifecycle(state, &track_matched, frame_dt, cfg);
    for (di, d) in dets.iter().enumerate() {
        if !det_matched[di] {
            start_track(state, d, true, cfg);
        }
    }
    report_matched(state, cfg)
}

/// Which baseline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Greedy,
    Kalman,
}

/// Run a baseline over a sequence of head outputs.
///
/// Detections are lifted into the world frame via the ego poses, tracked
/// there, and reported back in each frame's ego frame using the same
/// record format as the joint tracker.
pub fn run_baseline(
    kind: BaselineKind,
    outputs: &[HeadOutput],
    ego_poses: &[Pose2D],
    cfg: &BaselineConfig,
    tau: f64,
    frame_dt: f64,
) -> Vec<FrameTracks> {
    assert_eq!(outputs.len(), ego_poses.len());
    let mut state = BaselineState::new();
    let mut all = Vec::with_capacity(outputs.len());
    for (t, out) in outputs.iter().enumerate() {
        let ego = &ego_poses[t];
        let dets: Vec<Detection> = detections_from_head(out, &out.grid, tau, frame_dt)
            .into_iter()
            .map(|d| to_world(d, ego))
            .collect();
        let reports = match kind {
            BaselineKind::Greedy => greedy_step(&mut state, &dets, cfg, frame_dt),
            BaselineKind::Kalman => kf_step(&mut state, &dets, cfg, frame_dt),
        };
        let ego_inv = ego.invert();
        all.push(FrameTracks {
            frame: t,
            tracks: reports
                .into_iter()
                .map(|r| {
                    let center = ego_inv.transform_point(r.pos);
                    let vel = ego_inv.rotate_vec(r.vel);
                    let mut bbox = r.bbox;
                    bbox.center = (center.0, center.1, r.bbox.center.2);
                    bbox.yaw = normalize_angle(r.bbox.yaw - ego.yaw);
                    TrackReport {
                        track_id: r.track_id,
                        class_id: r.class_id,
                        center,
                        score: r.score,
                        bbox,
                        motion: (vel.0 * frame_dt, vel.1 * frame_dt),
                    }
                })
                .collect(),
        });
    }
    all
}

fn to_world(mut d: Detection, ego: &Pose2D) -> Detection {
    let c = ego.transform_point(d.bbox.bev_center());
    d.bbox.center = (c.0, c.1, d.bbox.center.2);
    d.bbox.yaw = normalize_angle(d.bbox.yaw + ego.yaw);
    d.velocity = ego.rotate_vec(d.velocity);
    d
}
