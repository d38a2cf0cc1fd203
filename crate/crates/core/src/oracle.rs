//! A ground-truth-driven detection head: renders the `(Y, M, S)` map triple
//! a trained network would emit, degraded by a configurable noise model.
//!
//! Peak scores are scaled by the object's current-frame visibility, so an
//! occluded-but-alive object keeps its motion and regression cues while its
//! confidence collapses — the behavior the online tracker exploits to coast
//! through occlusion.

use crate::geometry::GridSpec;
use crate::scenario::FrameGroundTruth;
use crate::targets::{
    assignment_kind, radius_for_box, regression_of, render_gaussian, AssignmentKind,
    CenternessMap, MapBuffer, MotionMap, RegressionMaps, RenderedObject, DEFAULT_MIN_OVERLAP,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{self, Read, Write};

/// Degradation model for the oracle head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// One-sided multiplicative score noise: peak *= 1 - |N(0, sigma)|.
    pub score_sigma: f64,
    /// Center jitter in meters per axis before rasterization.
    pub center_sigma: f64,
    /// Probability of dropping an object entirely.
    pub drop_prob: f64,
    /// Expected false positives per frame (Poisson).
    pub fp_rate: f64,
    /// Additive motion noise in meters per channel.
    pub motion_sigma: f64,
    /// Lower clamp on the visibility factor; 1.0 disables visibility
    /// scaling entirely.
    pub visibility_floor: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            score_sigma: 0.0,
            center_sigma: 0.0,
            drop_prob: 0.0,
            fp_rate: 0.0,
            motion_sigma: 0.0,
            visibility_floor: 0.0,
        }
    }
}

impl NoiseConfig {
    /// Fully degenerate noise: the head reproduces the target maps exactly.
    pub fn none() -> Self {
        Self {
            visibility_floor: 1.0,
            ..Self::default()
        }
    }
}

/// One inference step's map triple.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutput {
    pub grid: GridSpec,
    pub centerness: CenternessMap,
    pub motion: MotionMap,
    pub regression: RegressionMaps,
}

impl HeadOutput {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            centerness: CenternessMap::zeros(grid),
            motion: MotionMap::zeros(grid),
            regression: RegressionMaps::zeros(grid),
        }
    }
}

/// Emulate the two-sweep network: hybrid-time centerness at first-appear
/// locations, motion to the current location, current-box regression.
///
/// `gt_prev` must already be expressed in the ego frame of the current
/// frame. Determinism follows the rng state.
pub fn predict_pair(
    gt_prev: &FrameGroundTruth,
    gt_cur: &FrameGroundTruth,
    grid: &GridSpec,
    noise: &NoiseConfig,
    rng: &mut ChaCha8Rng,
) -> HeadOutput {
    let mut out = HeadOutput::zeros(grid);
    let mut strength = MapBuffer::zeros(grid.height, grid.width, 1);

    let prev: BTreeMap<u64, _> = gt_prev.boxes.iter().map(|b| (b.track_id, b)).collect();
    let cur: BTreeMap<u64, _> = gt_cur.boxes.iter().map(|b| (b.track_id, b)).collect();
    let mut ids: Vec<u64> = prev.keys().chain(cur.keys()).copied().collect();
    ids.sort_unstable();
    ids.dedup();

    let score_noise = normal(noise.score_sigma);
    let center_noise = normal(noise.center_sigma);
    let motion_noise = normal(noise.motion_sigma);

    for id in ids {
        let p = prev.get(&id);
        let c = cur.get(&id);
        let (anchor, motion, reg_box, vis_t) = match assignment_kind(p.is_some(), c.is_some()) {
            AssignmentKind::Tracked => {
                let (p, c) = (p.unwrap(), c.unwrap());
                let m = (
                    c.bbox.center.0 - p.bbox.center.0,
                    c.bbox.center.1 - p.bbox.center.1,
                );
                (p.bbox, m, c.bbox, c.visibility)
            }
            AssignmentKind::Newborn => {
                let c = c.unwrap();
                (c.bbox, (0.0, 0.0), c.bbox, c.visibility)
            }
            AssignmentKind::Dead | AssignmentKind::Absent => continue,
        };

        if noise.drop_prob > 0.0 && rng.random::<f64>() < noise.drop_prob {
            continue;
        }

        let mut peak = vis_t.clamp(noise.visibility_floor, 1.0);
        if let Some(n) = &score_noise {
            peak *= 1.0 - n.sample(rng).abs();
        }
        let peak = peak.clamp(0.0, 1.0);

        let mut center = anchor.bev_center();
        if let Some(n) = &center_noise {
            center.0 += n.sample(rng);
            center.1 += n.sample(rng);
        }
        let Some(cell) = grid.world_to_cell(center) else { continue };

        let mut motion = motion;
        if let Some(n) = &motion_noise {
            motion.0 += n.sample(rng);
            motion.1 += n.sample(rng);
        }

        crate::targets::render_object(
            &mut out.centerness,
            &mut out.motion,
            &mut out.regression,
            &mut strength,
            &RenderedObject {
                class_id: anchor.class_id,
                cell,
                radius: radius_for_box(&anchor, grid, DEFAULT_MIN_OVERLAP),
                peak,
                motion,
                regression: regression_of(&reg_box),
            },
        );
    }

    inject_false_positives(&mut out, noise, rng);
    out
}

/// Single-sweep prediction for the initial frame: every object new-born.
pub fn predict_single(
    gt_0: &FrameGroundTruth,
    grid: &GridSpec,
    noise: &NoiseConfig,
    rng: &mut ChaCha8Rng,
) -> HeadOutput {
    predict_pair(&FrameGroundTruth::empty(gt_0.frame), gt_0, grid, noise, rng)
}

/// Drive the head over a whole scenario: single-sweep on frame 0, then
/// consecutive pairs with the previous ground truth ego-compensated into
/// the current frame.
pub fn predict_sequence(
    s: &crate::scenario::Scenario,
    grid: &GridSpec,
    noise: &NoiseConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<HeadOutput>, crate::scenario::ScenarioError> {
    use crate::geometry::normalize_angle;
    use crate::scenario::ground_truth_at;

    let mut outputs = Vec::with_capacity(s.frames);
    let mut prev_gt: Option<FrameGroundTruth> = None;
    for t in 0..s.frames {
        let gt = ground_truth_at(s, t)?;
        let out = match &prev_gt {
            None => predict_single(&gt, grid, noise, rng),
            Some(prev) => {
                let rel = crate::geometry::relative_pose(&s.ego[t - 1], &s.ego[t]);
                let mut moved = prev.clone();
                for b in moved.boxes.iter_mut() {
                    let c = rel.transform_point((b.bbox.center.0, b.bbox.center.1));
                    b.bbox.center = (c.0, c.1, b.bbox.center.2);
                    b.bbox.yaw = normalize_angle(b.bbox.yaw + rel.yaw);
                }
                predict_pair(&moved, &gt, grid, noise, rng)
            }
        };
        outputs.push(out);
        prev_gt = Some(gt);
    }
    Ok(outputs)
}

fn normal(sigma: f64) -> Option<Normal<f64>> {
    if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).expect("valid sigma"))
    } else {
        None
    }
}

/// Spurious isolated peaks: Poisson count, uniform cell, score U(0.1, 0.5),
/// radius 2, centerness only.
fn inject_false_positives(out: &mut HeadOutput, noise: &NoiseConfig, rng: &mut ChaCha8Rng) {
    if noise.fp_rate <= 0.0 {
        return;
    }
    let poisson = Poisson::new(noise.fp_rate).expect("valid rate");
    let count = poisson.sample(rng) as usize;
    for _ in 0..count {
        let cell = crate::geometry::CellIndex::new(
            rng.random_range(0..out.grid.height),
            rng.random_range(0..out.grid.width),
        );
        let class_id = rng.random_range(0..out.grid.num_classes);
        let score = rng.random_range(0.1..0.5);
        render_gaussian(&mut out.centerness, class_id, cell, 2, score);
    }
}

const TENSOR_MAGIC: &[u8; 8] = b"BEVHEAD1";

fn channel_names(grid: &GridSpec) -> Vec<String> {
    let mut names: Vec<String> = (0..grid.num_classes).map(|c| format!("cen_{c}")).collect();
    names.extend(["mot_dx", "mot_dy", "reg_z", "reg_w", "reg_l", "reg_h", "reg_sin", "reg_cos"]
        .iter()
        .map(|s| s.to_string()));
    names
}

/// Serialize a head output as a flat binary tensor: magic, dims, channel
/// names, then row-major little-endian f32 values with channels
/// interleaved per cell (centerness classes, motion, regression).
pub fn write_head_output<W: Write>(out: &HeadOutput, w: &mut W) -> io::Result<()> {
    let grid = &out.grid;
    let names = channel_names(grid);
    w.write_all(TENSOR_MAGIC)?;
    for dim in [grid.height as u32, grid.width as u32, names.len() as u32] {
        w.write_all(&dim.to_le_bytes())?;
    }
    for name in &names {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u16).to_le_bytes())?;
        w.write_all(bytes)?;
    }
    let mut buf = Vec::with_capacity(grid.n_cells() * names.len() * 4);
    for row in 0..grid.height {
        for col in 0..grid.width {
            for ch in 0..grid.num_classes {
                buf.extend_from_slice(&(out.centerness.0.get(row, col, ch) as f32).to_le_bytes());
            }
            for ch in 0..2 {
                buf.extend_from_slice(&(out.motion.0.get(row, col, ch) as f32).to_le_bytes());
            }
            for ch in 0..6 {
                buf.extend_from_slice(&(out.regression.0.get(row, col, ch) as f32).to_le_bytes());
            }
        }
    }
    w.write_all(&buf)
}

/// Read a head output written by [`write_head_output`]. The grid supplies
/// the geometry; its dimensions must match the stored tensor.
pub fn read_head_output<R: Read>(r: &mut R, grid: &GridSpec) -> io::Result<HeadOutput> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != TENSOR_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut dim = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> io::Result<u32> {
        r.read_exact(&mut dim)?;
        Ok(u32::from_le_bytes(dim))
    };
    let height = read_u32(r)? as usize;
    let width = read_u32(r)? as usize;
    let n_channels = read_u32(r)? as usize;
    let expected = channel_names(grid);
    if height != grid.height || width != grid.width || n_channels != expected.len() {
        return Err(bad("tensor dims do not match grid"));
    }
    for name in &expected {
        let mut len = [0u8; 2];
        r.read_exact(&mut len)?;
        let mut bytes = vec![0u8; u16::from_le_bytes(len) as usize];
        r.read_exact(&mut bytes)?;
        if bytes != name.as_bytes() {
            return Err(bad("unexpected channel name"));
        }
    }
    let mut out = HeadOutput::zeros(grid);
    let mut buf = vec![0u8; height * width * n_channels * 4];
    r.read_exact(&mut buf)?;
    let mut i = 0;
    let mut next = || {
        let v = f32::from_le_bytes([buf[i], buf[i + 1], buf[i + 2], buf[i + 3]]) as f64;
        i += 4;
        v
    };
    for row in 0..height {
        for col in 0..width {
            for ch in 0..grid.num_classes {
                out.centerness.0.set(row, col, ch, next());
            }
            for ch in 0..2 {
                out.motion.0.set(row, col, ch, next());
            }
            for ch in 0..6 {
                out.regression.0.set(row, col, ch, next());
            }
        }
    }
    Ok(out)
}
