//! Deterministic synthetic-world generation: object trajectories with
//! births and deaths, an ego trajectory, per-frame ground truth, and a
//! ray-cast LiDAR sampler that provides occlusion-aware visibility.
//!
//! Occlusion is resolved in 2D bearing bins: for each beam the nearest
//! intersected object footprint wins. Ground truth keeps occluded objects
//! (presence is not visibility); visibility is reported separately so a
//! detection head can scale its confidence by it.

use crate::geometry::{normalize_angle, Box3D, Point5D, Pose2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("frame {0} out of range (scenario has {1} frames)")]
    FrameOutOfRange(usize, usize),
    #[error("object {0} is not alive at frame {1}")]
    ObjectNotAlive(u64, usize),
    #[error("could not place object {0} after {1} attempts; relax min_separation or spawn_range")]
    PlacementFailed(usize, usize),
}

/// A trajectory key point: world-frame pose at a given frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// One object's life: class, size, alive span, and piecewise-linear motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub track_id: u64,
    pub class_id: usize,
    /// `(w, l, h)` meters.
    pub size: (f64, f64, f64),
    pub birth_frame: usize,
    pub death_frame: usize,
    /// Sorted by frame; covers `[birth_frame, death_frame]`.
    pub waypoints: Vec<Waypoint>,
}

impl ObjectSpec {
    pub fn alive_at(&self, frame: usize) -> bool {
        frame >= self.birth_frame && frame <= self.death_frame
    }

    /// World-frame pose at a frame, linear in position and yaw between
    /// waypoints. `None` when the object is not alive.
    pub fn pose_at(&self, frame: usize) -> Option<Pose2D> {
        if !self.alive_at(frame) || self.waypoints.is_empty() {
            return None;
        }
        let f = frame as f64;
        let first = self.waypoints.first().unwrap();
        let last = self.waypoints.last().unwrap();
        if f <= first.frame as f64 {
            return Some(Pose2D::new(first.x, first.y, first.yaw));
        }
        if f >= last.frame as f64 {
            return Some(Pose2D::new(last.x, last.y, last.yaw));
        }
        let i = self
            .waypoints
            .windows(2)
            .position(|w| (w[0].frame as f64) <= f && f <= (w[1].frame as f64))
            .unwrap();
        let (a, b) = (&self.waypoints[i], &self.waypoints[i + 1]);
        let span = (b.frame - a.frame) as f64;
        let u = if span > 0.0 { (f - a.frame as f64) / span } else { 0.0 };
        let dyaw = normalize_angle(b.yaw - a.yaw);
        Some(Pose2D::new(
            a.x + u * (b.x - a.x),
            a.y + u * (b.y - a.y),
            a.yaw + u * dyaw,
        ))
    }
}

/// Ray-cast sensor parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    /// Angular ray count over the full circle.
    pub num_beams: usize,
    pub max_range: f64,
    /// Samples emitted per struck surface segment.
    pub points_per_hit: usize,
    /// Gaussian position noise, truncated at 3 sigma.
    pub noise_sigma: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            num_beams: 720,
            max_range: 120.0,
            points_per_hit: 3,
            noise_sigma: 0.02,
        }
    }
}

/// A complete synthetic world: frame raster, ego trajectory, objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub frames: usize,
    /// Seconds per frame.
    pub dt: f64,
    /// One world-frame ego pose per frame.
    pub ego: Vec<Pose2D>,
    pub objects: Vec<ObjectSpec>,
    pub sensor: SensorConfig,
    /// RNG seed the scenario was generated from, kept for reproducibility.
    pub seed: u64,
}

/// One annotated object in a ground-truth frame, expressed in the ego frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    pub track_id: u64,
    pub class_id: usize,
    /// Box in the ego frame at this frame.
    pub bbox: Box3D,
    /// Velocity in m/s, rotated into the ego frame.
    pub velocity: (f64, f64),
    /// Fraction of subtended bearing bins where this object is nearest.
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameGroundTruth {
    pub frame: usize,
    pub boxes: Vec<GtBox>,
}

impl FrameGroundTruth {
    pub fn empty(frame: usize) -> Self {
        Self { frame, boxes: Vec::new() }
    }

    pub fn get(&self, track_id: u64) -> Option<&GtBox> {
        self.boxes.iter().find(|b| b.track_id == track_id)
    }
}

/// One class in the scenario mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    /// Canonical `(w, l, h)` meters.
    pub size: (f64, f64, f64),
    /// Sampling weight, positive.
    pub weight: f64,
    /// `[min, max]` speed in m/s.
    pub speed: (f64, f64),
}

fn default_classes() -> Vec<ClassSpec> {
    vec![
        ClassSpec {
            name: "car".into(),
            size: (1.9, 4.6, 1.7),
            weight: 0.5,
            speed: (0.0, 5.0),
        },
        ClassSpec {
            name: "pedestrian".into(),
            size: (0.7, 0.7, 1.7),
            weight: 0.3,
            speed: (0.0, 1.5),
        },
        ClassSpec {
            name: "bicycle".into(),
            size: (0.6, 1.8, 1.4),
            weight: 0.2,
            speed: (0.0, 4.0),
        },
    ]
}

/// Per-object probabilities of a mid-sequence birth or death.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifecycleConfig {
    pub birth_prob: f64,
    pub death_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub frames: usize,
    pub dt: f64,
    /// Inclusive `[min, max]` object count.
    pub n_objects: (usize, usize),
    pub classes: Vec<ClassSpec>,
    /// Objects stay within `[-spawn_range, spawn_range]` per axis, world frame.
    pub spawn_range: f64,
    /// Minimum pairwise object distance over all shared alive frames.
    pub min_separation: f64,
    pub lifecycle: LifecycleConfig,
    /// Ego forward speed in m/s.
    pub ego_speed: f64,
    /// Ego yaw rate in rad/s.
    pub ego_yaw_rate: f64,
    /// Number of large static occluder objects to add.
    pub occluders: usize,
    pub occluder_size: (f64, f64, f64),
    pub occluder_class: usize,
    pub sensor: SensorConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frames: 40,
            dt: 0.5,
            n_objects: (6, 12),
            classes: default_classes(),
            spawn_range: 38.0,
            min_separation: 3.0,
            lifecycle: LifecycleConfig::default(),
            ego_speed: 0.0,
            ego_yaw_rate: 0.0,
            occluders: 0,
            occluder_size: (1.0, 12.0, 3.0),
            occluder_class: 0,
            sensor: SensorConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |m: &str| Err(ScenarioError::InvalidConfig(m.to_string()));
        if self.frames == 0 {
            return err("frames must be at least 1");
        }
        if self.dt <= 0.0 {
            return err("dt must be positive");
        }
        if self.classes.is_empty() {
            return err("class mix must not be empty");
        }
        if self.classes.iter().any(|c| c.weight <= 0.0) {
            return err("class weights must be positive");
        }
        if self.classes.iter().any(|c| c.speed.0 < 0.0 || c.speed.1 < c.speed.0) {
            return err("class speed range must satisfy 0 <= min <= max");
        }
        if self.n_objects.0 > self.n_objects.1 {
            return err("n_objects range must satisfy min <= max");
        }
        if self.spawn_range <= 0.0 {
            return err("spawn_range must be positive");
        }
        if self.occluder_class >= self.classes.len() && self.occluders > 0 {
            return err("occluder_class out of range");
        }
        if self.sensor.num_beams == 0 {
            return err("sensor.num_beams must be at least 1");
        }
        Ok(())
    }
}

const PLACEMENT_ATTEMPTS: usize = 1000;
/// Objects keep this much clearance from every ego position on top of
/// `min_separation`, so the ray origin never sits inside a footprint.
const EGO_CLEARANCE: f64 = 2.0;

/// Generate a deterministic scenario from a config and seed.
pub fn generate(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario, ScenarioError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let ego = integrate_ego(cfg);

    let n = rng.random_range(cfg.n_objects.0..=cfg.n_objects.1);
    let weight_sum: f64 = cfg.classes.iter().map(|c| c.weight).sum();

    let mut objects: Vec<ObjectSpec> = Vec::with_capacity(n + cfg.occluders);
    for i in 0..n {
        let class_id = sample_class(&mut rng, &cfg.classes, weight_sum);
        let (birth, death) = sample_lifespan(&mut rng, cfg);
        let spec = place_object(
            &mut rng,
            cfg,
            &ego,
            &objects,
            i as u64,
            class_id,
            cfg.classes[class_id].size,
            cfg.classes[class_id].speed,
            birth,
            death,
        )?;
        objects.push(spec);
    }

    enforce_lifecycle_events(cfg, &mut objects);

    for k in 0..cfg.occluders {
        let spec = place_object(
            &mut rng,
            cfg,
            &ego,
            &objects,
            (n + k) as u64,
            cfg.occluder_class,
            cfg.occluder_size,
            (0.0, 0.0),
            0,
            cfg.frames - 1,
        )?;
        objects.push(spec);
    }

    Ok(Scenario {
        frames: cfg.frames,
        dt: cfg.dt,
        ego,
        objects,
        sensor: cfg.sensor.clone(),
        seed,
    })
}

fn integrate_ego(cfg: &ScenarioConfig) -> Vec<Pose2D> {
    let mut ego = Vec::with_capacity(cfg.frames);
    let mut pose = Pose2D::identity();
    for _ in 0..cfg.frames {
        ego.push(pose);
        let (s, c) = pose.yaw.sin_cos();
        pose = Pose2D::new(
            pose.x + cfg.ego_speed * c * cfg.dt,
            pose.y + cfg.ego_speed * s * cfg.dt,
            pose.yaw + cfg.ego_yaw_rate * cfg.dt,
        );
    }
    ego
}

fn sample_class(rng: &mut ChaCha8Rng, classes: &[ClassSpec], weight_sum: f64) -> usize {
    let mut pick = rng.random_range(0.0..weight_sum);
    for (i, c) in classes.iter().enumerate() {
        if pick < c.weight {
            return i;
        }
        pick -= c.weight;
    }
    classes.len() - 1
}

fn sample_lifespan(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> (usize, usize) {
    let last = cfg.frames - 1;
    let mut birth = 0;
    if cfg.lifecycle.birth_prob > 0.0
        && cfg.frames >= 2
        && rng.random::<f64>() < cfg.lifecycle.birth_prob
    {
        birth = rng.random_range(1..cfg.frames);
    }
    let mut death = last;
    if cfg.lifecycle.death_prob > 0.0
        && birth < last
        && rng.random::<f64>() < cfg.lifecycle.death_prob
    {
        death = rng.random_range(birth..last);
    }
    (birth, death)
}

/// Guarantee at least one mid-sequence birth and one death when the config
/// asks for lifecycle events.
fn enforce_lifecycle_events(cfg: &ScenarioConfig, objects: &mut [ObjectSpec]) {
    if objects.is_empty() || cfg.frames < 3 {
        return;
    }
    let last = cfg.frames - 1;
    if cfg.lifecycle.birth_prob > 0.0 && !objects.iter().any(|o| o.birth_frame > 0) {
        let o = &mut objects[0];
        let birth = (cfg.frames / 3).max(1).min(o.death_frame);
        shift_birth(o, birth);
    }
    if cfg.lifecycle.death_prob > 0.0 && !objects.iter().any(|o| o.death_frame < last) {
        // Prefer an object born early enough to die mid-sequence.
        let death = (2 * cfg.frames / 3).min(last - 1);
        if let Some(o) = objects.iter_mut().rev().find(|o| o.birth_frame <= death) {
            shift_death(o, death);
        }
    }
}

fn shift_birth(o: &mut ObjectSpec, birth: usize) {
    let fallback = o.waypoints[0];
    let pose = o
        .pose_at(birth.max(o.birth_frame))
        .unwrap_or(Pose2D::new(fallback.x, fallback.y, fallback.yaw));
    o.birth_frame = birth;
    o.waypoints.retain(|w| w.frame > birth);
    o.waypoints.insert(
        0,
        Waypoint { frame: birth, x: pose.x, y: pose.y, yaw: pose.yaw },
    );
}

fn shift_death(o: &mut ObjectSpec, death: usize) {
    let death = death.max(o.birth_frame);
    let pose = o.pose_at(death.min(o.death_frame)).unwrap_or_else(|| {
        let w = o.waypoints.last().unwrap();
        Pose2D::new(w.x, w.y, w.yaw)
    });
    o.death_frame = death;
    o.waypoints.retain(|w| w.frame < death);
    o.waypoints
        .push(Waypoint { frame: death, x: pose.x, y: pose.y, yaw: pose.yaw });
}

#[allow(clippy::too_many_arguments)]
fn place_object(
    rng: &mut ChaCha8Rng,
    cfg: &ScenarioConfig,
    ego: &[Pose2D],
    placed: &[ObjectSpec],
    track_id: u64,
    class_id: usize,
    size: (f64, f64, f64),
    speed: (f64, f64),
    birth: usize,
    death: usize,
) -> Result<ObjectSpec, ScenarioError> {
    let r = cfg.spawn_range;
    let duration = (death - birth) as f64 * cfg.dt;
    for _ in 0..PLACEMENT_ATTEMPTS {
        let start = (rng.random_range(-r..r), rng.random_range(-r..r));
        let v = if speed.1 > speed.0 {
            rng.random_range(speed.0..=speed.1)
        } else {
            speed.0
        };
        let heading = rng.random_range(-PI..PI);
        let end = (
            start.0 + v * duration * heading.cos(),
            start.1 + v * duration * heading.sin(),
        );
        if end.0.abs() > r || end.1.abs() > r {
            continue;
        }
        let candidate = ObjectSpec {
            track_id,
            class_id,
            size,
            birth_frame: birth,
            death_frame: death,
            waypoints: vec![
                Waypoint { frame: birth, x: start.0, y: start.1, yaw: heading },
                Waypoint { frame: death, x: end.0, y: end.1, yaw: heading },
            ],
        };
        if placement_ok(cfg, ego, placed, &candidate) {
            return Ok(candidate);
        }
    }
    Err(ScenarioError::PlacementFailed(track_id as usize, PLACEMENT_ATTEMPTS))
}

fn placement_ok(
    cfg: &ScenarioConfig,
    ego: &[Pose2D],
    placed: &[ObjectSpec],
    cand: &ObjectSpec,
) -> bool {
    for t in cand.birth_frame..=cand.death_frame {
        let p = cand.pose_at(t).unwrap();
        let e = &ego[t];
        let de = ((p.x - e.x).powi(2) + (p.y - e.y).powi(2)).sqrt();
        if de < cfg.min_separation + EGO_CLEARANCE {
            return false;
        }
        for other in placed {
            if let Some(q) = other.pose_at(t) {
                let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                if d < cfg.min_separation {
                    return false;
                }
            }
        }
    }
    true
}

/// Ground truth for one frame: boxes in the ego frame, finite-difference
/// velocities, and ray-cast visibility.
pub fn ground_truth_at(s: &Scenario, t: usize) -> Result<FrameGroundTruth, ScenarioError> {
    if t >= s.frames {
        return Err(ScenarioError::FrameOutOfRange(t, s.frames));
    }
    let ego = &s.ego[t];
    let ego_inv = ego.invert();
    let vis = visibility_all(s, t);

    let mut boxes = Vec::new();
    for obj in &s.objects {
        let Some(pose) = obj.pose_at(t) else { continue };
        let vel_world = world_velocity(s, obj, t);
        let vel_ego = ego_inv.rotate_vec(vel_world);
        let (cx, cy) = ego_inv.transform_point((pose.x, pose.y));
        let bbox = Box3D::new(
            (cx, cy, obj.size.2 / 2.0),
            obj.size,
            pose.yaw - ego.yaw,
            obj.class_id,
        );
        boxes.push(GtBox {
            track_id: obj.track_id,
            class_id: obj.class_id,
            bbox,
            velocity: vel_ego,
            visibility: *vis.get(&obj.track_id).unwrap_or(&0.0),
        });
    }
    Ok(FrameGroundTruth { frame: t, boxes })
}

/// Ground truth for every frame of a scenario.
pub fn ground_truth_sequence(s: &Scenario) -> Result<Vec<FrameGroundTruth>, ScenarioError> {
    (0..s.frames).map(|t| ground_truth_at(s, t)).collect()
}

/// Finite-difference world velocity: backward difference when the object
/// was alive at `t-1`, forward at its birth frame, zero for one-frame lives.
fn world_velocity(s: &Scenario, obj: &ObjectSpec, t: usize) -> (f64, f64) {
    let cur = obj.pose_at(t).expect("caller checked alive");
    if t > 0 {
        if let Some(prev) = obj.pose_at(t - 1) {
            return ((cur.x - prev.x) / s.dt, (cur.y - prev.y) / s.dt);
        }
    }
    if t + 1 < s.frames {
        if let Some(next) = obj.pose_at(t + 1) {
            return ((next.x - cur.x) / s.dt, (next.y - cur.y) / s.dt);
        }
    }
    (0.0, 0.0)
}

/// A BEV rectangle footprint in the world frame.
struct Footprint {
    center: (f64, f64),
    half_l: f64,
    half_w: f64,
    cos: f64,
    sin: f64,
}

impl Footprint {
    fn of(obj: &ObjectSpec, pose: &Pose2D) -> Self {
        let (sin, cos) = pose.yaw.sin_cos();
        Self {
            center: (pose.x, pose.y),
            half_l: obj.size.1 / 2.0,
            half_w: obj.size.0 / 2.0,
            cos,
            sin,
        }
    }

    /// Is a world point inside the footprint dilated by `margin`?
    fn contains(&self, pt: (f64, f64), margin: f64) -> bool {
        let dx = pt.0 - self.center.0;
        let dy = pt.1 - self.center.1;
        let lx = self.cos * dx + self.sin * dy;
        let ly = -self.sin * dx + self.cos * dy;
        lx.abs() <= self.half_l + margin && ly.abs() <= self.half_w + margin
    }

    /// Entry distance of a ray into the rectangle, if it hits at all.
    fn ray_entry(&self, origin: (f64, f64), dir: (f64, f64)) -> Option<f64> {
        // Slab test in the box frame.
        let dx = origin.0 - self.center.0;
        let dy = origin.1 - self.center.1;
        let o = (self.cos * dx + self.sin * dy, -self.sin * dx + self.cos * dy);
        let d = (
            self.cos * dir.0 + self.sin * dir.1,
            -self.sin * dir.0 + self.cos * dir.1,
        );
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        for (oc, dc, half) in [(o.0, d.0, self.half_l), (o.1, d.1, self.half_w)] {
            if dc.abs() < 1e-12 {
                if oc.abs() > half {
                    return None;
                }
                continue;
            }
            let t1 = (-half - oc) / dc;
            let t2 = (half - oc) / dc;
            let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            t_near = t_near.max(lo);
            t_far = t_far.min(hi);
            if t_near > t_far {
                return None;
            }
        }
        if t_far < 0.0 {
            return None;
        }
        Some(t_near.max(0.0))
    }
}

struct AliveObject<'a> {
    obj: &'a ObjectSpec,
    footprint: Footprint,
}

fn alive_objects(s: &Scenario, t: usize) -> Vec<AliveObject<'_>> {
    s.objects
        .iter()
        .filter_map(|obj| {
            obj.pose_at(t).map(|pose| AliveObject {
                obj,
                footprint: Footprint::of(obj, &pose),
            })
        })
        .collect()
}

/// Per-beam nearest hit: `(index into alive list, entry distance)`.
fn beam_hits(s: &Scenario, t: usize, alive: &[AliveObject<'_>]) -> Vec<Option<(usize, f64)>> {
    let ego = &s.ego[t];
    let origin = (ego.x, ego.y);
    let b = s.sensor.num_beams;
    let mut hits = vec![None; b];
    for (k, hit) in hits.iter_mut().enumerate() {
        let angle = ego.yaw - PI + k as f64 * TAU / b as f64;
        let dir = (angle.cos(), angle.sin());
        let mut best: Option<(usize, f64)> = None;
        for (i, a) in alive.iter().enumerate() {
            if let Some(dist) = a.footprint.ray_entry(origin, dir) {
                if dist <= s.sensor.max_range && best.map_or(true, |(_, d)| dist < d) {
                    best = Some((i, dist));
                }
            }
        }
        *hit = best;
    }
    hits
}

/// Visibility of every alive object at frame `t`.
pub fn visibility_all(s: &Scenario, t: usize) -> BTreeMap<u64, f64> {
    let alive = alive_objects(s, t);
    let ego = &s.ego[t];
    let origin = (ego.x, ego.y);
    let b = s.sensor.num_beams;

    let mut subtended = vec![0u32; alive.len()];
    let mut visible = vec![0u32; alive.len()];
    for k in 0..b {
        let angle = ego.yaw - PI + k as f64 * TAU / b as f64;
        let dir = (angle.cos(), angle.sin());
        let mut nearest: Option<(usize, f64)> = None;
        let mut touched: Vec<usize> = Vec::new();
        for (i, a) in alive.iter().enumerate() {
            if let Some(dist) = a.footprint.ray_entry(origin, dir) {
                if dist <= s.sensor.max_range {
                    touched.push(i);
                    if nearest.map_or(true, |(_, d)| dist < d) {
                        nearest = Some((i, dist));
                    }
                }
            }
        }
        for i in touched {
            subtended[i] += 1;
        }
        if let Some((i, _)) = nearest {
            visible[i] += 1;
        }
    }

    alive
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let v = if subtended[i] > 0 {
                visible[i] as f64 / subtended[i] as f64
            } else {
                0.0
            };
            (a.obj.track_id, v)
        })
        .collect()
}

/// Visibility of a single object; errors when the object is not alive.
pub fn visibility(s: &Scenario, t: usize, track_id: u64) -> Result<f64, ScenarioError> {
    if t >= s.frames {
        return Err(ScenarioError::FrameOutOfRange(t, s.frames));
    }
    visibility_all(s, t)
        .get(&track_id)
        .copied()
        .ok_or(ScenarioError::ObjectNotAlive(track_id, t))
}

/// Sample a LiDAR sweep at frame `t`, returned in the ego frame with `dt = 0`.
pub fn sample_lidar(
    s: &Scenario,
    t: usize,
    sensor: &SensorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point5D>, ScenarioError> {
    if t >= s.frames {
        return Err(ScenarioError::FrameOutOfRange(t, s.frames));
    }
    let mut working = s.clone();
    working.sensor = sensor.clone();
    let alive = alive_objects(&working, t);
    let hits = beam_hits(&working, t, &alive);

    let ego = &s.ego[t];
    let ego_inv = ego.invert();
    let origin = (ego.x, ego.y);
    let noise = if sensor.noise_sigma > 0.0 {
        Some(Normal::new(0.0, sensor.noise_sigma).expect("valid sigma"))
    } else {
        None
    };
    // Noise is clamped to norm 3 sigma so every point stays within the
    // footprint dilated by that amount, in any box orientation.
    let clamp = 3.0 * sensor.noise_sigma;

    let mut points = Vec::new();
    for (k, hit) in hits.iter().enumerate() {
        let Some((i, dist)) = hit else { continue };
        let angle = ego.yaw - PI + k as f64 * TAU / sensor.num_beams as f64;
        let hit_pt = (origin.0 + dist * angle.cos(), origin.1 + dist * angle.sin());
        let h = alive[*i].obj.size.2;
        for _ in 0..sensor.points_per_hit {
            let mut p = hit_pt;
            if let Some(n) = &noise {
                let (mut nx, mut ny) = (n.sample(rng), n.sample(rng));
                let norm = (nx * nx + ny * ny).sqrt();
                if norm > clamp {
                    nx *= clamp / norm;
                    ny *= clamp / norm;
                }
                p.0 += nx;
                p.1 += ny;
            }
            let (x, y) = ego_inv.transform_point(p);
            points.push(Point5D {
                x,
                y,
                z: rng.random_range(0.0..=h),
                r: rng.random_range(0.0..=1.0),
                dt: 0.0,
            });
        }
    }
    Ok(points)
}
