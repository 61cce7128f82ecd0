//! Pure functions of the planar elliptic restricted three-body problem:
//! vector field, pulsating-frame geometry, frame transformations, Kepler
//! energy and the circular-problem energy landmarks.

use crate::error::{Error, Result};
use crate::model::{RelativeState, SynodicState, SystemParams};
use crate::Real;

/// df/dt of the primaries' true anomaly: (1 + e_p cos f)² / (1 − e_p²)^{3/2}.
#[inline]
pub fn anomaly_rate<T: Real>(f: T, e_p: T) -> T {
    let c = T::one() + e_p * f.cos();
    c * c / (T::one() - e_p * e_p).powf(T::lit(1.5))
}

/// Pulsating-frame scale factor k(f) = (1 − e_p²)/(1 + e_p cos f), the
/// instantaneous primaries' separation in physical (normalized) length.
#[inline]
pub fn pulsation<T: Real>(f: T, e_p: T) -> T {
    (T::one() - e_p * e_p) / (T::one() + e_p * f.cos())
}

/// Logarithmic derivative k'(f)/k(f) = e_p sin f / (1 + e_p cos f).
#[inline]
pub fn pulsation_log_rate<T: Real>(f: T, e_p: T) -> T {
    e_p * f.sin() / (T::one() + e_p * f.cos())
}

#[inline]
fn primary_distances<T: Real>(x: T, y: T, mu: T) -> Result<(T, T)> {
    let r1 = (x + mu).hypot(y);
    let r2 = (x + mu - T::one()).hypot(y);
    if r1 == T::zero() || r2 == T::zero() {
        return Err(Error::Singularity);
    }
    Ok((r1, r2))
}

/// Effective potential ω(x, y, f) of the pulsating-frame equations of motion.
pub fn omega<T: Real>(x: T, y: T, f: T, p: &SystemParams<T>) -> Result<T> {
    let (r1, r2) = primary_distances(x, y, p.mu)?;
    let half = T::lit(0.5);
    let bracket = half * (x * x + y * y)
        + (T::one() - p.mu) / r1
        + p.mu / r2
        + half * p.mu * (T::one() - p.mu);
    Ok(bracket / (T::one() + p.e_p * f.cos()))
}

/// Analytic partials (ω_x, ω_y).
pub fn omega_gradient<T: Real>(x: T, y: T, f: T, p: &SystemParams<T>) -> Result<(T, T)> {
    let (r1, r2) = primary_distances(x, y, p.mu)?;
    let r1c = r1 * r1 * r1;
    let r2c = r2 * r2 * r2;
    let one = T::one();
    let pre = one / (one + p.e_p * f.cos());
    let wx = pre * (x - (one - p.mu) * (x + p.mu) / r1c - p.mu * (x + p.mu - one) / r2c);
    let wy = pre * (y - (one - p.mu) * y / r1c - p.mu * y / r2c);
    Ok((wx, wy))
}

/// Right-hand side of the first-order system: d/df of (x, y, x', y').
pub fn eom_rhs<T: Real>(state: &SynodicState<T>, p: &SystemParams<T>) -> Result<[T; 4]> {
    let (wx, wy) = omega_gradient(state.x, state.y, state.f, p)?;
    let two = T::lit(2.0);
    Ok([
        state.xp,
        state.yp,
        wx + two * state.yp,
        wy - two * state.xp,
    ])
}

/// Transform a synodic state at anomaly `state.f` into the P₂-centered,
/// non-rotating frame oriented as the synodic frame at `f0`.
///
/// Positions are physical normalized lengths (pulsation applied); velocities
/// are with respect to the normalized time.
pub fn to_secondary_relative<T: Real>(
    state: &SynodicState<T>,
    f0: T,
    p: &SystemParams<T>,
) -> RelativeState<T> {
    let (dx, dy) = (state.x - p.x_secondary(), state.y);
    let k = pulsation(state.f, p.e_p);
    let nu = anomaly_rate(state.f, p.e_p);
    let krate = pulsation_log_rate(state.f, p.e_p);
    let theta = state.f - f0;
    let (st, ct) = theta.sin_cos();
    // radial pulsation rate + frame rotation + pulsating-frame velocity
    let ax = krate * dx - dy + state.xp;
    let ay = krate * dy + dx + state.yp;
    RelativeState {
        x: k * (ct * dx - st * dy),
        y: k * (st * dx + ct * dy),
        vx: nu * k * (ct * ax - st * ay),
        vy: nu * k * (st * ax + ct * ay),
    }
}

/// Inverse of [`to_secondary_relative`]: rebuild the synodic state at
/// anomaly `f` from a P₂-relative state referenced to `f0`.
pub fn from_secondary_relative<T: Real>(
    rel: &RelativeState<T>,
    f: T,
    f0: T,
    p: &SystemParams<T>,
) -> SynodicState<T> {
    let k = pulsation(f, p.e_p);
    let nu = anomaly_rate(f, p.e_p);
    let krate = pulsation_log_rate(f, p.e_p);
    let theta = f - f0;
    let (st, ct) = theta.sin_cos();
    // rotate back by θ and undo the pulsation scale
    let dx = (ct * rel.x + st * rel.y) / k;
    let dy = (-st * rel.x + ct * rel.y) / k;
    let ax = (ct * rel.vx + st * rel.vy) / (nu * k);
    let ay = (-st * rel.vx + ct * rel.vy) / (nu * k);
    SynodicState {
        f,
        x: p.x_secondary() + dx,
        y: dy,
        xp: ax - krate * dx + dy,
        yp: ay - krate * dy - dx,
    }
}

/// Two-body Kepler energy with respect to P₂: H = |V|²/2 − μ/|P|.
pub fn kepler_energy<T: Real>(rel: &RelativeState<T>, p: &SystemParams<T>) -> Result<T> {
    let r = rel.radius();
    if r == T::zero() {
        return Err(Error::Singularity);
    }
    let v2 = rel.vx * rel.vx + rel.vy * rel.vy;
    Ok(v2 / T::lit(2.0) - p.mu / r)
}

/// Jacobi constant of the circular problem:
/// C_J = x² + y² + 2(1−μ)/r₁ + 2μ/r₂ + μ(1−μ) − (x'² + y'²).
///
/// This is a CR3BP diagnostic; the configured e_p plays no role and the value
/// is conserved only along e_p = 0 trajectories.
pub fn jacobi_constant<T: Real>(state: &SynodicState<T>, p: &SystemParams<T>) -> Result<T> {
    let (r1, r2) = primary_distances(state.x, state.y, p.mu)?;
    let two = T::lit(2.0);
    let one = T::one();
    Ok(state.x * state.x + state.y * state.y
        + two * (one - p.mu) / r1
        + two * p.mu / r2
        + p.mu * (one - p.mu)
        - state.xp * state.xp
        - state.yp * state.yp)
}

/// Collinear Lagrange points of the circular problem and their Jacobi
/// constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLandmarks<T = f64> {
    pub x_l1: T,
    pub x_l2: T,
    pub x_l3: T,
    pub cj1: T,
    pub cj2: T,
    pub cj3: T,
}

/// On-axis force balance whose roots are the collinear equilibria.
#[inline]
fn collinear_residual<T: Real>(x: T, mu: T) -> T {
    let one = T::one();
    let u1 = x + mu;
    let u2 = x + mu - one;
    let a1 = u1.abs();
    let a2 = u2.abs();
    x - (one - mu) * u1 / (a1 * a1 * a1) - mu * u2 / (a2 * a2 * a2)
}

#[inline]
fn collinear_residual_deriv<T: Real>(x: T, mu: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let a1 = (x + mu).abs();
    let a2 = (x + mu - one).abs();
    one + two * (one - mu) / (a1 * a1 * a1) + two * mu / (a2 * a2 * a2)
}

fn newton_collinear<T: Real>(seed: T, mu: T) -> Result<T> {
    const MAX_ITER: usize = 100;
    let tol = T::lit(1e-14);
    let mut x = seed;
    for _ in 0..MAX_ITER {
        let r = collinear_residual(x, mu);
        if r.abs() <= tol {
            return Ok(x);
        }
        x = x - r / collinear_residual_deriv(x, mu);
        if !x.is_finite() {
            return Err(Error::NonFinite("collinear Newton iteration"));
        }
    }
    if collinear_residual(x, mu).abs() <= tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence(MAX_ITER))
    }
}

/// Locate L1, L2, L3 by Newton iteration seeded with the Hill approximation
/// (μ/3)^{1/3} for L1/L2 and the classical far-side estimate for L3, and
/// evaluate the Jacobi constant at each point at rest.
pub fn lagrange_points<T: Real>(p: &SystemParams<T>) -> Result<EnergyLandmarks<T>> {
    let one = T::one();
    let hill = (p.mu / T::lit(3.0)).powf(one / T::lit(3.0));
    let x_l1 = newton_collinear(one - p.mu - hill, p.mu)?;
    let x_l2 = newton_collinear(one - p.mu + hill, p.mu)?;
    let l3_seed = -p.mu - (one - T::lit(7.0 / 12.0) * p.mu);
    let x_l3 = newton_collinear(l3_seed, p.mu)?;

    let cj_at = |x: T| -> Result<T> {
        jacobi_constant(
            &SynodicState::new(T::zero(), x, T::zero(), T::zero(), T::zero()),
            p,
        )
    };
    Ok(EnergyLandmarks {
        x_l1,
        x_l2,
        x_l3,
        cj1: cj_at(x_l1)?,
        cj2: cj_at(x_l2)?,
        cj3: cj_at(x_l3)?,
    })
}
