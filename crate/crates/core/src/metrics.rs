//! CLEAR-MOT accumulation and recall-averaged tracking metrics.
//!
//! Matching is class-aware and gated by BEV center distance. Each frame
//! first preserves still-valid pairings from the previous frame, then
//! resolves the rest with a minimum-cost assignment, per the original
//! CLEAR-MOT protocol. AMOTA follows the recall-normalized MOTAR
//! convention with a fixed target-recall grid.

use crate::baselines::{hungarian, CostMatrix};
use crate::scenario::FrameGroundTruth;
use crate::tracker::FrameTracks;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("prediction and ground-truth sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// One predicted box for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PredBox {
    pub track_id: u64,
    pub class_id: usize,
    pub center: (f64, f64),
    pub score: f64,
    pub velocity: (f64, f64),
}

/// One ground-truth box for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GtEvalBox {
    pub track_id: u64,
    pub class_id: usize,
    pub center: (f64, f64),
    pub velocity: (f64, f64),
}

/// Convert tracker output to evaluation records (`motion` per frame over
/// `dt` seconds becomes velocity).
pub fn preds_from_tracks(frames: &[FrameTracks], dt: f64) -> Vec<Vec<PredBox>> {
    frames
        .iter()
        .map(|f| {
            f.tracks
                .iter()
                .map(|t| PredBox {
                    track_id: t.track_id,
                    class_id: t.class_id,
                    center: t.center,
                    score: t.score,
                    velocity: (t.motion.0 / dt, t.motion.1 / dt),
                })
                .collect()
        })
        .collect()
}

/// Convert scenario ground truth to evaluation records.
pub fn gts_from_frames(frames: &[FrameGroundTruth]) -> Vec<Vec<GtEvalBox>> {
    frames
        .iter()
        .map(|f| {
            f.boxes
                .iter()
                .map(|b| GtEvalBox {
                    track_id: b.track_id,
                    class_id: b.class_id,
                    center: b.bbox.bev_center(),
                    velocity: b.velocity,
                })
                .collect()
        })
        .collect()
}

/// CLEAR-MOT tallies for one sequence (one class or merged).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotStats {
    pub mota: f64,
    /// Mean true-positive match distance in meters.
    pub motp: f64,
    pub false_positives: usize,
    pub misses: usize,
    pub id_switches: usize,
    pub fragmentations: usize,
    pub gt_count: usize,
    pub true_positives: usize,
    pub matches_per_frame: Vec<usize>,
}

impl MotStats {
    fn finalize(mut self, tp_dist_sum: f64) -> Self {
        self.mota = if self.gt_count > 0 {
            1.0 - (self.false_positives + self.misses + self.id_switches) as f64
                / self.gt_count as f64
        } else {
            0.0
        };
        self.motp = if self.true_positives > 0 {
            tp_dist_sum / self.true_positives as f64
        } else {
            0.0
        };
        self
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

const GATE_SENTINEL: f64 = 1e9;

/// Match one frame: preserve still-valid previous pairings, then assign
/// the rest by minimum total distance within the gate. Returns
/// `(pred_idx, gt_idx, distance)` triples.
///
/// `prev` maps gt track id to the prediction track id it was matched to
/// on the previous frame.
pub fn match_frame(
    preds: &[PredBox],
    gts: &[GtEvalBox],
    gate: f64,
    prev: &BTreeMap<u64, u64>,
) -> Vec<(usize, usize, f64)> {
    debug_assert!(gate > 0.0);
    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut matches = Vec::new();

    // Carry over previous pairings that are still within the gate.
    for (gi, gt) in gts.iter().enumerate() {
        let Some(&pid) = prev.get(&gt.track_id) else { continue };
        let Some(pi) = preds.iter().position(|p| {
            p.track_id == pid && p.class_id == gt.class_id
        }) else { continue };
        if pred_used[pi] {
            continue;
        }
        let d = dist(preds[pi].center, gt.center);
        if d <= gate {
            pred_used[pi] = true;
            gt_used[gi] = true;
            matches.push((pi, gi, d));
        }
    }

    // Assign the remainder per class by minimum total distance.
    let mut classes: Vec<usize> = preds
        .iter()
        .map(|p| p.class_id)
        .chain(gts.iter().map(|g| g.class_id))
        .collect();
    classes.sort_unstable();
    classes.dedup();
    for class_id in classes {
        let p_idx: Vec<usize> = (0..preds.len())
            .filter(|&i| !pred_used[i] && preds[i].class_id == class_id)
            .collect();
        let g_idx: Vec<usize> = (0..gts.len())
            .filter(|&i| !gt_used[i] && gts[i].class_id == class_id)
            .collect();
        if p_idx.is_empty() || g_idx.is_empty() {
            continue;
        }
        let costs = CostMatrix::from_fn(p_idx.len(), g_idx.len(), |r, c| {
            let d = dist(preds[p_idx[r]].center, gts[g_idx[c]].center);
            if d <= gate {
                d
            } else {
                GATE_SENTINEL
            }
        });
        for (r, c) in hungarian(&costs).pairs {
            let d = costs.get(r, c);
            if d >= GATE_SENTINEL {
                continue;
            }
            pred_used[p_idx[r]] = true;
            gt_used[g_idx[c]] = true;
            matches.push((p_idx[r], g_idx[c], d));
        }
    }
    matches.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    matches
}

/// Per-gt-track accumulation state across frames.
#[derive(Default, Clone)]
struct GtTrackState {
    last_matched_id: Option<u64>,
    had_match: bool,
    in_gap: bool,
}

/// Accumulate CLEAR-MOT statistics over a sequence for one class subset.
fn accumulate(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
) -> (MotStats, f64) {
    let mut stats = MotStats {
        mota: 0.0,
        motp: 0.0,
        false_positives: 0,
        misses: 0,
        id_switches: 0,
        fragmentations: 0,
        gt_count: 0,
        true_positives: 0,
        matches_per_frame: Vec::with_capacity(gt_seq.len()),
    };
    let mut tp_dist_sum = 0.0;
    let mut track_state: BTreeMap<u64, GtTrackState> = BTreeMap::new();
    let mut prev: BTreeMap<u64, u64> = BTreeMap::new();

    for (preds, gts) in pred_seq.iter().zip(gt_seq) {
        let matches = match_frame(preds, gts, gate, &prev);
        let mut gt_matched = vec![false; gts.len()];
        let mut pred_matched = vec![false; preds.len()];
        let mut next_prev = BTreeMap::new();

        for &(pi, gi, d) in &matches {
            gt_matched[gi] = true;
            pred_matched[pi] = true;
            tp_dist_sum += d;
            stats.true_positives += 1;
            let gt_id = gts[gi].track_id;
            let pred_id = preds[pi].track_id;
            let st = track_state.entry(gt_id).or_default();
            if let Some(last) = st.last_matched_id {
                if last != pred_id {
                    stats.id_switches += 1;
                }
            }
            if st.had_match && st.in_gap {
                stats.fragmentations += 1;
            }
            st.last_matched_id = Some(pred_id);
            st.had_match = true;
            st.in_gap = false;
            next_prev.insert(gt_id, pred_id);
        }

        for (gi, gt) in gts.iter().enumerate() {
            stats.gt_count += 1;
            if !gt_matched[gi] {
                stats.misses += 1;
                let st = track_state.entry(gt.track_id).or_default();
                if st.had_match {
                    st.in_gap = true;
                }
                // An unmatched frame keeps the previous pairing as the
                // carry-over candidate for later frames.
                if let Some(last) = st.last_matched_id {
                    next_prev.insert(gt.track_id, last);
                }
            }
        }
        stats.false_positives += pred_matched.iter().filter(|&&m| !m).count();
        stats.matches_per_frame.push(matches.len());
        prev = next_prev;
    }
    (stats, tp_dist_sum)
}

fn filter_class_preds(seq: &[Vec<PredBox>], class_id: usize) -> Vec<Vec<PredBox>> {
    seq.iter()
        .map(|f| f.iter().filter(|p| p.class_id == class_id).cloned().collect())
        .collect()
}

fn filter_class_gts(seq: &[Vec<GtEvalBox>], class_id: usize) -> Vec<Vec<GtEvalBox>> {
    seq.iter()
        .map(|f| f.iter().filter(|g| g.class_id == class_id).cloned().collect())
        .collect()
}

fn classes_in(gt_seq: &[Vec<GtEvalBox>], pred_seq: &[Vec<PredBox>]) -> Vec<usize> {
    let mut classes: Vec<usize> = gt_seq
        .iter()
        .flat_map(|f| f.iter().map(|g| g.class_id))
        .chain(pred_seq.iter().flat_map(|f| f.iter().map(|p| p.class_id)))
        .collect();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// CLEAR-MOT per class.
pub fn clear_mot_per_class(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
) -> Result<BTreeMap<usize, MotStats>, MetricsError> {
    if pred_seq.len() != gt_seq.len() {
        return Err(MetricsError::LengthMismatch(pred_seq.len(), gt_seq.len()));
    }
    let mut out = BTreeMap::new();
    for class_id in classes_in(gt_seq, pred_seq) {
        let (stats, dsum) = accumulate(
            &filter_class_preds(pred_seq, class_id),
            &filter_class_gts(gt_seq, class_id),
            gate,
        );
        out.insert(class_id, stats.finalize(dsum));
    }
    Ok(out)
}

/// CLEAR-MOT merged over all classes (counts summed, MOTP weighted by TP).
pub fn clear_mot(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
) -> Result<MotStats, MetricsError> {
    let per_class = clear_mot_per_class(pred_seq, gt_seq, gate)?;
    let frames = pred_seq.len();
    let mut merged = MotStats {
        mota: 0.0,
        motp: 0.0,
        false_positives: 0,
        misses: 0,
        id_switches: 0,
        fragmentations: 0,
        gt_count: 0,
        true_positives: 0,
        matches_per_frame: vec![0; frames],
    };
    let mut dist_sum = 0.0;
    for stats in per_class.values() {
        merged.false_positives += stats.false_positives;
        merged.misses += stats.misses;
        merged.id_switches += stats.id_switches;
        merged.fragmentations += stats.fragmentations;
        merged.gt_count += stats.gt_count;
        merged.true_positives += stats.true_positives;
        dist_sum += stats.motp * stats.true_positives as f64;
        for (m, v) in merged.matches_per_frame.iter_mut().zip(&stats.matches_per_frame) {
            *m += v;
        }
    }
    Ok(merged.finalize(dist_sum))
}

/// One operating point of a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub class_id: usize,
    pub threshold: f64,
    pub recall: f64,
    pub mota: f64,
    pub motp: f64,
    pub id_switches: usize,
    pub false_positives: usize,
    pub misses: usize,
    pub fragmentations: usize,
}

fn filter_by_score(seq: &[Vec<PredBox>], thresh: f64) -> Vec<Vec<PredBox>> {
    seq.iter()
        .map(|f| f.iter().filter(|p| p.score >= thresh).cloned().collect())
        .collect()
}

/// Threshold table for one class: stats at distinct scores, highest first.
///
/// When there are more than `cap` distinct scores the candidates are
/// evenly subsampled (extremes always kept), mirroring the benchmark
/// practice of evaluating a fixed number of operating points.
fn threshold_table(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
    class_id: usize,
    cap: usize,
) -> Vec<(f64, MotStats)> {
    let preds = filter_class_preds(pred_seq, class_id);
    let gts = filter_class_gts(gt_seq, class_id);
    let mut scores: Vec<f64> = preds.iter().flatten().map(|p| p.score).collect();
    scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scores.dedup();
    let cap = cap.max(2);
    if scores.len() > cap {
        let last = scores.len() - 1;
        let picked: Vec<f64> = (0..cap)
            .map(|i| scores[i * last / (cap - 1)])
            .collect();
        scores = picked;
        scores.dedup();
    }
    scores
        .into_iter()
        .map(|thresh| {
            let filtered = filter_by_score(&preds, thresh);
            let (stats, dsum) = accumulate(&filtered, &gts, gate);
            (thresh, stats.finalize(dsum))
        })
        .collect()
}

/// Recall-averaged tracking accuracy for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAmota {
    pub class_id: usize,
    pub amota: f64,
    pub amotp: f64,
    /// MOTAR per target recall (0 where the recall is unachievable).
    pub motar: Vec<f64>,
    /// The target recall grid `{1/n, ..., 1}`.
    pub recall_grid: Vec<f64>,
}

/// Aggregate AMOTA report: class mean plus per-class breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmotaReport {
    pub amota: f64,
    pub amotp: f64,
    pub per_class: BTreeMap<usize, ClassAmota>,
}

/// AMOTA / AMOTP over an `n_recalls`-point target recall grid.
///
/// For each target recall the highest score threshold that still reaches
/// it is selected; MOTAR there is `max(0, 1 - (IDS + FP + FN -
/// (1-r)P) / (rP))` with `r` the achieved recall and `P` the class gt
/// count. Unreachable targets contribute 0.
pub fn amota(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
    n_recalls: usize,
) -> Result<AmotaReport, MetricsError> {
    if pred_seq.len() != gt_seq.len() {
        return Err(MetricsError::LengthMismatch(pred_seq.len(), gt_seq.len()));
    }
    debug_assert!(n_recalls >= 1);
    let recall_grid: Vec<f64> = (1..=n_recalls)
        .map(|k| k as f64 / n_recalls as f64)
        .collect();

    let mut per_class = BTreeMap::new();
    for class_id in classes_in(gt_seq, &[]) {
        let cap = (2 * n_recalls).max(128);
        let table = threshold_table(pred_seq, gt_seq, gate, class_id, cap);
        let total_gt: usize = gt_seq
            .iter()
            .map(|f| f.iter().filter(|g| g.class_id == class_id).count())
            .sum();
        if total_gt == 0 {
            continue;
        }
        let p = total_gt as f64;
        let mut motar = Vec::with_capacity(n_recalls);
        let mut motp_sum = 0.0;
        let mut achieved = 0usize;
        for &target in &recall_grid {
            // Highest threshold whose recall clears the target.
            let pick = table.iter().find(|(_, s)| {
                s.true_positives as f64 / p >= target
            });
            match pick {
                Some((_, s)) => {
                    let r = s.true_positives as f64 / p;
                    // (1 - r) * P is exactly P - TP here (misses + TP = P
                    // per class), so the numerator stays integer-exact.
                    let num = (s.id_switches + s.false_positives + s.misses) as f64
                        - (total_gt - s.true_positives) as f64;
                    motar.push((1.0 - num / (r * p)).clamp(0.0, 1.0));
                    motp_sum += s.motp;
                    achieved += 1;
                }
                None => motar.push(0.0),
            }
        }
        let amota = motar.iter().sum::<f64>() / n_recalls as f64;
        let amotp = if achieved > 0 { motp_sum / achieved as f64 } else { 0.0 };
        per_class.insert(
            class_id,
            ClassAmota {
                class_id,
                amota,
                amotp,
                motar,
                recall_grid: recall_grid.clone(),
            },
        );
    }

    let k = per_class.len().max(1) as f64;
    let amota_mean = per_class.values().map(|c| c.amota).sum::<f64>() / k;
    let amotp_mean = per_class.values().map(|c| c.amotp).sum::<f64>() / k;
    Ok(AmotaReport {
        amota: amota_mean,
        amotp: amotp_mean,
        per_class,
    })
}

/// Per-threshold (recall, MOTA, IDS, ...) tabulation per class, at most
/// `n` operating points per class (evenly subsampled from the distinct
/// scores when there are more).
pub fn recall_curves(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
    n: usize,
) -> Result<Vec<CurvePoint>, MetricsError> {
    if pred_seq.len() != gt_seq.len() {
        return Err(MetricsError::LengthMismatch(pred_seq.len(), gt_seq.len()));
    }
    let mut out = Vec::new();
    for class_id in classes_in(gt_seq, pred_seq) {
        let total_gt: usize = gt_seq
            .iter()
            .map(|f| f.iter().filter(|g| g.class_id == class_id).count())
            .sum();
        if total_gt == 0 {
            continue;
        }
        let table = threshold_table(pred_seq, gt_seq, gate, class_id, n.max(2));
        for (thresh, s) in &table {
            out.push(CurvePoint {
                class_id,
                threshold: *thresh,
                recall: s.true_positives as f64 / total_gt as f64,
                mota: s.mota,
                motp: s.motp,
                id_switches: s.id_switches,
                false_positives: s.false_positives,
                misses: s.misses,
                fragmentations: s.fragmentations,
            });
        }
    }
    Ok(out)
}

/// Mean absolute velocity error over true positives scoring at or above
/// `score_thresh`, averaged per class and then over classes.
///
/// `None` when there are no true positives at all.
pub fn mave(
    pred_seq: &[Vec<PredBox>],
    gt_seq: &[Vec<GtEvalBox>],
    gate: f64,
    score_thresh: f64,
) -> Result<Option<f64>, MetricsError> {
    if pred_seq.len() != gt_seq.len() {
        return Err(MetricsError::LengthMismatch(pred_seq.len(), gt_seq.len()));
    }
    let mut per_class: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for class_id in classes_in(gt_seq, pred_seq) {
        let preds = filter_by_score(&filter_class_preds(pred_seq, class_id), score_thresh);
        let gts = filter_class_gts(gt_seq, class_id);
        let mut prev = BTreeMap::new();
        for (ps, gs) in preds.iter().zip(&gts) {
            let matches = match_frame(ps, gs, gate, &prev);
            let mut next_prev = BTreeMap::new();
            for &(pi, gi, _) in &matches {
                let pv = ps[pi].velocity;
                let gv = gs[gi].velocity;
                let err = ((pv.0 - gv.0).powi(2) + (pv.1 - gv.1).powi(2)).sqrt();
                let e = per_class.entry(class_id).or_insert((0.0, 0));
                e.0 += err;
                e.1 += 1;
                next_prev.insert(gs[gi].track_id, ps[pi].track_id);
            }
            prev = next_prev;
        }
    }
    let class_means: Vec<f64> = per_class
        .values()
        .filter(|(_, n)| *n > 0)
        .map(|(sum, n)| sum / *n as f64)
        .collect();
    if class_means.is_empty() {
        return Ok(None);
    }
    Ok(Some(class_means.iter().sum::<f64>() / class_means.len() as f64))
}
