//! Grid surveys: periapsis initial-condition generation, parallel
//! computation of descriptor and label fields, capture-set assembly and
//! region sampling.
//!
//! Work is distributed per grid point over the rayon pool; every point is a
//! pure function of the immutable request/config/params, so results are
//! bitwise independent of the worker count.

use crate::dynamics::{anomaly_rate, pulsation};
use crate::error::{Error, Result};
use crate::model::{EdgeMap, GridSpec, Label, LabelField, ScalarField, SynodicState, SystemParams};
use crate::propagate::{
    physical_radius, propagate, IntegratorConfig, PropagationOptions, Terminal,
};
use crate::Real;
use rayon::prelude::*;

/// Parameters of one grid survey.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyRequest<T = f64> {
    pub grid: GridSpec<T>,
    /// Initial anomaly [rad].
    pub f0: T,
    /// Backward extent, ≤ 0 [rad].
    pub f_b: T,
    /// Forward extent, ≥ 0 [rad].
    pub f_f: T,
    /// Osculating eccentricity of the generated initial conditions.
    pub e0: T,
    /// Descriptor norm exponent.
    pub gamma: T,
}

impl<T: Real> SurveyRequest<T> {
    pub fn validate(&self) -> Result<()> {
        if self.f_b > T::zero() || self.f_f < T::zero() {
            return Err(Error::Parameter {
                name: "f_b/f_f",
                reason: "need f_b <= 0 <= f_f".to_string(),
            });
        }
        if !(self.e0 >= T::zero() && self.e0 < T::one()) {
            return Err(Error::Parameter {
                name: "e0",
                reason: "need 0 <= e0 < 1".to_string(),
            });
        }
        Ok(())
    }
}

/// Build the synodic state of a particle at the periapsis of an osculating
/// prograde ellipse of eccentricity `e0` about P₂, at pulsating-frame offset
/// `(x0, y0)` from the body and anomaly `f0`.
///
/// The periapsis speed comes from the vis-viva law at the physical radius
/// k(f₀)·|offset|; the velocity points along the prograde tangent; the
/// conversion to anomaly derivatives divides by k·ν and removes the frame
/// rotation contribution.
pub fn generate_ic<T: Real>(
    offset: (T, T),
    f0: T,
    e0: T,
    params: &SystemParams<T>,
) -> Result<SynodicState<T>> {
    let (x0, y0) = offset;
    let r_g = x0.hypot(y0);
    if r_g == T::zero() {
        return Err(Error::DegenerateRadius);
    }
    let k = pulsation(f0, params.e_p);
    let nu = anomaly_rate(f0, params.e_p);
    let r_phys = k * r_g;
    let v_p = (params.mu * (T::one() + e0) / r_phys).sqrt();
    let scale = v_p / (k * nu) - r_g;
    // prograde tangent (-y, x)/r
    let xp = scale * (-y0) / r_g;
    let yp = scale * x0 / r_g;
    Ok(SynodicState::new(
        f0,
        params.x_secondary() + x0,
        y0,
        xp,
        yp,
    ))
}

/// Classify a single initial condition over `[f0, ff]`.
///
/// Returns the label and, for unstable/crash outcomes, the event anomaly.
pub fn classify_point<T: Real>(
    state0: &SynodicState<T>,
    f0: T,
    ff: T,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
) -> Result<(Label, Option<T>)> {
    if ff == f0 {
        return Err(Error::Parameter {
            name: "ff",
            reason: "classification interval must be nonzero".to_string(),
        });
    }
    if physical_radius(f0, state0.x, state0.y, params) < params.r_norm {
        return Ok((Label::InsideBody, None));
    }
    let out = propagate(
        state0,
        f0,
        ff,
        config,
        params,
        &PropagationOptions::classification(),
    )?;
    Ok(match out.terminal {
        Terminal::Impact => (Label::Crash, Some(out.f_end)),
        Terminal::Escape => (Label::Unstable, Some(out.f_end)),
        Terminal::ReachedEnd => (Label::WeaklyStable, None),
    })
}

/// Which leg of the survey interval a label field covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    /// Classification over [f0, f0 + f_b].
    Backward,
    /// Classification over [f0, f0 + f_f].
    Forward,
}

/// Classify every grid point over the requested leg.
///
/// Failed points are labeled [`Label::Error`] and the survey continues.
pub fn compute_label_field<T: Real>(
    req: &SurveyRequest<T>,
    leg: Leg,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
) -> Result<LabelField<T>> {
    req.validate()?;
    let extent = match leg {
        Leg::Backward => req.f_b,
        Leg::Forward => req.f_f,
    };
    if extent == T::zero() {
        return Err(Error::Parameter {
            name: "extent",
            reason: "chosen leg has zero extent".to_string(),
        });
    }
    let ff = req.f0 + extent;
    let n = req.grid.n;
    let nan = T::nan();

    let cells: Vec<(Label, T)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let offset = req.grid.offset(i, j);
            match point_label(offset, req, ff, config, params) {
                Ok((label, ev)) => (label, ev.unwrap_or(nan)),
                Err(_) => (Label::Error, nan),
            }
        })
        .collect();

    let (labels, event_anomaly) = cells.into_iter().unzip();
    Ok(LabelField {
        spec: req.grid,
        labels,
        event_anomaly,
        f0: req.f0,
        ff,
    })
}

fn point_label<T: Real>(
    offset: (T, T),
    req: &SurveyRequest<T>,
    ff: T,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
) -> Result<(Label, Option<T>)> {
    let r_g = offset.0.hypot(offset.1);
    if pulsation(req.f0, params.e_p) * r_g < params.r_norm {
        return Ok((Label::InsideBody, None));
    }
    let state0 = generate_ic(offset, req.f0, req.e0, params)?;
    classify_point(&state0, req.f0, ff, config, params)
}

/// The three descriptor fields of one survey: total plus its backward and
/// forward parts. `total = backward + forward` pointwise by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LdFieldSet<T = f64> {
    pub total: ScalarField<T>,
    pub backward: ScalarField<T>,
    pub forward: ScalarField<T>,
}

/// Compute the descriptor field over both legs of the request.
///
/// Each leg is truncated independently at impact; escapes never truncate.
/// Failed points carry NaN.
pub fn compute_ld_field<T: Real>(
    req: &SurveyRequest<T>,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
) -> Result<LdFieldSet<T>> {
    req.validate()?;
    let n = req.grid.n;
    let nan = T::nan();

    let pairs: Vec<(T, T)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let offset = req.grid.offset(i, j);
            point_ld(offset, req, config, params).unwrap_or((nan, nan))
        })
        .collect();

    let field = |values: Vec<T>, f_b: T, f_f: T| ScalarField {
        spec: req.grid,
        values,
        f0: req.f0,
        f_b,
        f_f,
        gamma: req.gamma,
    };
    let backward: Vec<T> = pairs.iter().map(|&(b, _)| b).collect();
    let forward: Vec<T> = pairs.iter().map(|&(_, f)| f).collect();
    let total: Vec<T> = pairs.iter().map(|&(b, f)| b + f).collect();
    Ok(LdFieldSet {
        total: field(total, req.f_b, req.f_f),
        backward: field(backward, req.f_b, T::zero()),
        forward: field(forward, T::zero(), req.f_f),
    })
}

fn point_ld<T: Real>(
    offset: (T, T),
    req: &SurveyRequest<T>,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
) -> Result<(T, T)> {
    let r_g = offset.0.hypot(offset.1);
    if pulsation(req.f0, params.e_p) * r_g < params.r_norm {
        // starts inside the body: both legs impact immediately
        return Ok((T::zero(), T::zero()));
    }
    let state0 = generate_ic(offset, req.f0, req.e0, params)?;
    let opts = PropagationOptions::descriptor(req.gamma);
    let leg = |extent: T| -> Result<T> {
        if extent == T::zero() {
            return Ok(T::zero());
        }
        let out = propagate(&state0, req.f0, req.f0 + extent, config, params, &opts)?;
        Ok(out.ld)
    };
    Ok((leg(req.f_b)?, leg(req.f_f)?))
}

/// Capture set 𝒞(f_B, f_F): unstable backward and weakly stable forward.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureSet<T = f64> {
    pub spec: GridSpec<T>,
    pub mask: Vec<bool>,
    pub f0: T,
    pub f_b: T,
    pub f_f: T,
}

pub fn capture_set<T: Real>(
    labels_backward: &LabelField<T>,
    labels_forward: &LabelField<T>,
) -> Result<CaptureSet<T>> {
    if labels_backward.spec != labels_forward.spec {
        return Err(Error::GridMismatch(
            "capture set needs identical grids".to_string(),
        ));
    }
    if labels_backward.f0 != labels_forward.f0 {
        return Err(Error::GridMismatch(
            "capture set needs identical f0".to_string(),
        ));
    }
    let mask = labels_backward
        .labels
        .iter()
        .zip(&labels_forward.labels)
        .map(|(b, f)| *b == Label::Unstable && *f == Label::WeaklyStable)
        .collect();
    Ok(CaptureSet {
        spec: labels_backward.spec,
        mask,
        f0: labels_backward.f0,
        f_b: labels_backward.ff - labels_backward.f0,
        f_f: labels_forward.ff - labels_forward.f0,
    })
}

/// One connected region of non-edge pixels and its representative.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample<T = f64> {
    pub region_id: usize,
    /// Grid indices (row, col) of the representative pixel.
    pub pixel: (usize, usize),
    /// Grid offset of the representative.
    pub offset: (T, T),
    pub label: Label,
    pub size: usize,
}

/// Split the grid into 4-connected components of non-edge pixels and pick
/// one representative per component: the member pixel closest to the
/// component centroid (smallest index on ties).
pub fn sample_region<T: Real>(
    labels: &LabelField<T>,
    edges: &EdgeMap<T>,
) -> Result<Vec<RegionSample<T>>> {
    if labels.spec != edges.spec {
        return Err(Error::GridMismatch(
            "label and edge grids differ".to_string(),
        ));
    }
    let n = labels.spec.n;
    let mut region = vec![usize::MAX; n * n];
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    let mut members: Vec<usize> = Vec::new();
    let mut next_id = 0usize;

    for start in 0..n * n {
        if region[start] != usize::MAX || edges.mask[start] {
            continue;
        }
        members.clear();
        region[start] = next_id;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            members.push(idx);
            let (i, j) = (idx / n, idx % n);
            let mut visit = |ni: usize, nj: usize| {
                let nidx = ni * n + nj;
                if region[nidx] == usize::MAX && !edges.mask[nidx] {
                    region[nidx] = next_id;
                    queue.push_back(nidx);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < n {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < n {
                visit(i, j + 1);
            }
        }

        // centroid in index space, snapped to the nearest member pixel
        let (mut si, mut sj) = (0usize, 0usize);
        for &m in &members {
            si += m / n;
            sj += m % n;
        }
        let ci = si as f64 / members.len() as f64;
        let cj = sj as f64 / members.len() as f64;
        let mut best = members[0];
        let mut best_d = f64::INFINITY;
        for &m in &members {
            let di = m / n;
            let dj = m % n;
            let d = (di as f64 - ci).powi(2) + (dj as f64 - cj).powi(2);
            if d < best_d || (d == best_d && m < best) {
                best_d = d;
                best = m;
            }
        }
        let pixel = (best / n, best % n);
        out.push(RegionSample {
            region_id: next_id,
            pixel,
            offset: labels.spec.offset(pixel.0, pixel.1),
            label: labels.labels[best],
            size: members.len(),
        });
        next_id += 1;
    }
    Ok(out)
}

/// The twelve sample orbits of the reference survey (named a through l):
/// grid offsets (X0, Y0) and the anomaly derivatives of their generated
/// states at f0 = 0, e0 = 0.9.
pub const SAMPLE_ICS: [(&str, f64, f64, f64, f64); 12] = [
    ("a", -5.170000e-5, -1.000000e-4, 6.258637e-2, -3.235715e-2),
    ("b", -7.575000e-5, 1.695000e-4, -4.999940e-2, -2.234486e-2),
    ("c", 4.509000e-4, 3.621000e-4, -1.913330e-2, 2.382548e-2),
    ("d", 4.533000e-4, 3.475000e-4, -1.871302e-2, 2.441039e-2),
    ("e", -7.094000e-5, 1.960000e-4, -4.856863e-2, -1.757887e-2),
    ("f", -1.719000e-4, -9.739000e-5, 2.616042e-2, -4.617492e-2),
    ("g", -1.551000e-4, -9.239000e-5, 2.842583e-2, -4.771994e-2),
    ("h", 1.094000e-4, -3.258000e-4, 3.796152e-2, 1.274705e-2),
    ("i", -1.286000e-4, 3.018000e-4, -3.772815e-2, -1.607634e-2),
    ("j", -6.373000e-5, 2.585000e-4, -4.429485e-2, -1.092035e-2),
    ("k", -4.990000e-4, 4.317000e-4, -1.863920e-2, -2.154496e-2),
    ("l", -1.719000e-4, 7.575000e-5, -2.195327e-2, -4.981872e-2),
];
