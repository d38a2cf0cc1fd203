//! The training objective as pure numeric functions with analytic
//! gradients for verification.
//!
//! All three terms are anchored at the rendered object centers `d_i`: the
//! centerness focal term is evaluated over every class channel at each
//! anchor cell, and the motion / regression L1 terms read their own
//! channels at the anchor cell. `N` is the number of anchors (tracked plus
//! new-born objects).

use crate::targets::{CenterRecord, CenternessMap, MapBuffer, MotionMap, RegressionMaps};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LossError {
    #[error("prediction and target maps have different shapes")]
    ShapeMismatch,
    #[error("no rendered centers: the losses are undefined for N = 0")]
    NoCenters,
}

/// Loss hyper-parameters and term weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Focal exponent on the prediction.
    pub alpha: f64,
    /// Focal down-weighting exponent on soft negatives.
    pub beta: f64,
    pub w_cen: f64,
    pub w_mot: f64,
    pub w_reg: f64,
    /// Clamp for log arguments; predictions are clipped to `[eps, 1-eps]`.
    pub eps: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            beta: 4.0,
            w_cen: 1.0,
            w_mot: 1.0,
            w_reg: 0.25,
            eps: 1e-12,
        }
    }
}

/// Neumaier-compensated accumulator so reduction order cannot perturb
/// results beyond 1e-12.
#[derive(Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

fn check(pred: &MapBuffer, target: &MapBuffer, centers: &[CenterRecord]) -> Result<(), LossError> {
    if !pred.same_shape(target) {
        return Err(LossError::ShapeMismatch);
    }
    if centers.is_empty() {
        return Err(LossError::NoCenters);
    }
    Ok(())
}

/// Penalty-reduced focal loss over the class channels at the anchor cells.
///
/// Where the target is exactly 1 the positive branch `(1-Y)^a ln Y`
/// applies; everywhere else the prediction is pushed toward zero with the
/// soft weight `(1-Ytgt)^b`.
pub fn focal_loss(
    pred: &CenternessMap,
    target: &CenternessMap,
    centers: &[CenterRecord],
    cfg: &LossConfig,
) -> Result<f64, LossError> {
    check(&pred.0, &target.0, centers)?;
    let classes = pred.0.channels;
    let mut acc = Compensated::default();
    for c in centers {
        for ch in 0..classes {
            let ytgt = target.0.get(c.cell.row, c.cell.col, ch);
            let y = pred
                .0
                .get(c.cell.row, c.cell.col, ch)
                .clamp(cfg.eps, 1.0 - cfg.eps);
            if ytgt == 1.0 {
                acc.add((1.0 - y).powf(cfg.alpha) * y.ln());
            } else {
                acc.add((1.0 - ytgt).powf(cfg.beta) * y.powf(cfg.alpha) * (1.0 - y).ln());
            }
        }
    }
    Ok(-acc.value() / centers.len() as f64)
}

/// Analytic `d loss / d Y` as a map the shape of the prediction.
///
/// Nonzero only at evaluated (class, anchor) entries; clamped predictions
/// sit on the flat part of the clamp and get gradient zero.
pub fn focal_loss_grad(
    pred: &CenternessMap,
    target: &CenternessMap,
    centers: &[CenterRecord],
    cfg: &LossConfig,
) -> Result<MapBuffer, LossError> {
    check(&pred.0, &target.0, centers)?;
    let classes = pred.0.channels;
    let n = centers.len() as f64;
    let mut grad = MapBuffer::zeros(pred.0.height, pred.0.width, classes);
    for c in centers {
        for ch in 0..classes {
            let ytgt = target.0.get(c.cell.row, c.cell.col, ch);
            let raw = pred.0.get(c.cell.row, c.cell.col, ch);
            if raw < cfg.eps || raw > 1.0 - cfg.eps {
                continue;
            }
            let y = raw;
            let d = if ytgt == 1.0 {
                -(-cfg.alpha * (1.0 - y).powf(cfg.alpha - 1.0) * y.ln()
                    + (1.0 - y).powf(cfg.alpha) / y)
            } else {
                -((1.0 - ytgt).powf(cfg.beta)
                    * (cfg.alpha * y.powf(cfg.alpha - 1.0) * (1.0 - y).ln()
                        - y.powf(cfg.alpha) / (1.0 - y)))
            };
            let i = (c.cell.row * grad.width + c.cell.col) * classes + ch;
            grad.data[i] += d / n;
        }
    }
    Ok(grad)
}

/// Mean L1 motion error over the anchor cells.
pub fn motion_loss(
    pred: &MotionMap,
    target: &MotionMap,
    centers: &[CenterRecord],
) -> Result<f64, LossError> {
    check(&pred.0, &target.0, centers)?;
    let mut acc = Compensated::default();
    for c in centers {
        let p = pred.get(c.cell);
        let t = target.get(c.cell);
        acc.add((t.0 - p.0).abs());
        acc.add((t.1 - p.1).abs());
    }
    Ok(acc.value() / centers.len() as f64)
}

/// Mean L1 regression error over the anchor cells (six channels).
pub fn reg_loss(
    pred: &RegressionMaps,
    target: &RegressionMaps,
    centers: &[CenterRecord],
) -> Result<f64, LossError> {
    check(&pred.0, &target.0, centers)?;
    let mut acc = Compensated::default();
    for c in centers {
        let p = pred.get(c.cell);
        let t = target.get(c.cell);
        for ch in 0..p.len() {
            acc.add((t[ch] - p[ch]).abs());
        }
    }
    Ok(acc.value() / centers.len() as f64)
}

/// Weighted sum of the three loss terms.
pub fn total_loss(parts: (f64, f64, f64), cfg: &LossConfig) -> f64 {
    cfg.w_cen * parts.0 + cfg.w_mot * parts.1 + cfg.w_reg * parts.2
}
