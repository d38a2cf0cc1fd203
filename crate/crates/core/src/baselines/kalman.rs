//! Constant-velocity Kalman filter over BEV position, the classic state
//! estimator behind tracking-by-detection baselines.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum KfError {
    #[error("innovation covariance is not invertible (covariance lost positive definiteness)")]
    SingularInnovation,
}

/// Process / measurement noise scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KfNoise {
    /// Process noise density on position, per second.
    pub process_pos: f64,
    /// Process noise density on velocity, per second.
    pub process_vel: f64,
    /// Measurement variance on each position axis, m^2.
    pub measurement_var: f64,
}

impl Default for KfNoise {
    fn default() -> Self {
        Self {
            process_pos: 0.05,
            process_vel: 0.5,
            measurement_var: 0.25,
        }
    }
}

/// Filter state: `(x, y, vx, vy)` with full covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct KfState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl KfState {
    /// Initialize from a position measurement and a velocity prior.
    pub fn from_detection(pos: (f64, f64), vel: (f64, f64), noise: &KfNoise) -> Self {
        Self {
            mean: Vector4::new(pos.0, pos.1, vel.0, vel.1),
            cov: Matrix4::from_diagonal(&Vector4::new(
                noise.measurement_var,
                noise.measurement_var,
                1.0,
                1.0,
            )),
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.mean[0], self.mean[1])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.mean[2], self.mean[3])
    }
}

fn symmetrize(m: &mut Matrix4<f64>) {
    *m = (*m + m.transpose()) * 0.5;
}

/// Constant-velocity prediction over `dt` seconds.
pub fn kf_predict(s: &KfState, dt: f64, noise: &KfNoise) -> KfState {
    debug_assert!(dt > 0.0);
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    let q = Matrix4::from_diagonal(&Vector4::new(
        noise.process_pos * dt,
        noise.process_pos * dt,
        noise.process_vel * dt,
        noise.process_vel * dt,
    ));
    let mut cov = f * s.cov * f.transpose() + q;
    symmetrize(&mut cov);
    KfState { mean: f * s.mean, cov }
}

/// Position-measurement update in Joseph form.
pub fn kf_update(s: &KfState, z: (f64, f64), noise: &KfNoise) -> Result<KfState, KfError> {
    let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let r = Matrix2::from_diagonal(&Vector2::new(noise.measurement_var, noise.measurement_var));
    let innovation_cov = h * s.cov * h.transpose() + r;
    let s_inv = innovation_cov
        .try_inverse()
        .ok_or(KfError::SingularInnovation)?;
    let gain: Matrix4x2<f64> = s.cov * h.transpose() * s_inv;
    let residual = Vector2::new(z.0, z.1) - h * s.mean;
    let mean = s.mean + gain * residual;
    let ikh = Matrix4::identity() - gain * h;
    let mut cov = ikh * s.cov * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(&mut cov);
    Ok(KfState { mean, cov })
}
