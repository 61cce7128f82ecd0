//! Adaptive integration of the pulsating-frame equations of motion with
//! impact/escape event detection and accumulation of the
//! Lagrangian-descriptor integral along the trajectory.
//!
//! The particle state is extended with the descriptor accumulator to a
//! 5-dimensional first-order system; the accumulator integrates
//! speed^γ ≥ 0 with the |df| measure, so descriptor legs are non-negative
//! for both integration directions.

use crate::dynamics::{eom_rhs, kepler_energy, pulsation, to_secondary_relative};
use crate::error::{Error, Result};
use crate::model::{SynodicState, SystemParams};
use crate::rk87::{self, Tableau};
use crate::Real;

/// Tolerances and step bounds of the embedded 8(7) integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T = f64> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Initial step in f [rad].
    pub h_init: T,
    pub h_min: T,
    pub h_max: T,
    pub max_steps: usize,
    /// Event-location tolerance in f [rad].
    pub event_tol: T,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_tol: T::lit(1e-12),
            h_init: T::lit(1e-3),
            h_min: T::lit(1e-13),
            h_max: T::lit(0.1),
            max_steps: 1_000_000,
            event_tol: T::lit(1e-12),
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Error::Parameter {
            name,
            reason: reason.to_string(),
        };
        if !(self.rel_tol > T::zero()) {
            return Err(bad("rel_tol", "must be positive"));
        }
        if !(self.abs_tol > T::zero()) {
            return Err(bad("abs_tol", "must be positive"));
        }
        if !(self.h_min > T::zero() && self.h_min <= self.h_max) {
            return Err(bad("h_min", "need 0 < h_min <= h_max"));
        }
        if !(self.event_tol > T::zero()) {
            return Err(bad("event_tol", "must be positive"));
        }
        Ok(())
    }
}

/// How a propagation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    ReachedEnd,
    Impact,
    Escape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOutcome<T = f64> {
    pub terminal: Terminal,
    /// Anomaly at termination.
    pub f_end: T,
    pub state_end: SynodicState<T>,
    /// Accumulated descriptor integral over this leg (0 when disabled).
    pub ld: T,
    /// First anomaly satisfying the escape condition, if any was seen.
    pub f_escape: Option<T>,
}

/// Caller-selected propagation behavior.
///
/// Classification runs terminate at the first escape; descriptor runs record
/// the escape anomaly but continue to the final anomaly. Impact always
/// terminates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions<T = f64> {
    pub with_ld: bool,
    /// Norm exponent of the descriptor integrand.
    pub gamma: T,
    pub stop_at_escape: bool,
}

impl<T: Real> PropagationOptions<T> {
    /// Descriptor accumulation: run to the final anomaly unless impacting.
    pub fn descriptor(gamma: T) -> Self {
        Self {
            with_ld: true,
            gamma,
            stop_at_escape: false,
        }
    }

    /// Stability classification: stop at the first escape or impact.
    pub fn classification() -> Self {
        Self {
            with_ld: false,
            gamma: T::lit(0.5),
            stop_at_escape: true,
        }
    }
}

/// Physical (pulsation-scaled) distance from P₂.
#[inline]
pub fn physical_radius<T: Real>(f: T, x: T, y: T, p: &SystemParams<T>) -> T {
    pulsation(f, p.e_p) * (x - p.x_secondary()).hypot(y)
}

/// Escape condition: positive Kepler energy outside the sphere of influence.
pub fn escape_condition<T: Real>(state: &SynodicState<T>, f0: T, p: &SystemParams<T>) -> bool {
    let rel = to_secondary_relative(state, f0, p);
    let r = rel.radius();
    if r <= T::zero() {
        return false;
    }
    let h = kepler_energy(&rel, p).unwrap_or(T::neg_infinity());
    h > T::zero() && r > p.rsoi_norm
}

/// Refine the anomaly where a truth-valued event function flips, by
/// bisection. The event must differ at the two bracket ends.
pub fn locate_event<T: Real, F>(
    bracket: (T, T),
    event_fn: F,
    config: &IntegratorConfig<T>,
) -> Result<T>
where
    F: Fn(T) -> bool,
{
    let (mut a, mut b) = bracket;
    let va = event_fn(a);
    if event_fn(b) == va {
        return Err(Error::Bracket(
            a.to_f64().unwrap_or(f64::NAN),
            b.to_f64().unwrap_or(f64::NAN),
        ));
    }
    while (b - a).abs() > config.event_tol {
        let mid = (a + b) / T::lit(2.0);
        if mid == a || mid == b {
            break;
        }
        if event_fn(mid) == va {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(b)
}

type Extended<T> = [T; 5];

struct ExtendedSystem<'a, T> {
    params: &'a SystemParams<T>,
    with_ld: bool,
    gamma: T,
    /// +1 forward, −1 backward: makes the accumulator grow with |f − f₀|.
    dir: T,
}

impl<T: Real> ExtendedSystem<'_, T> {
    #[inline]
    fn rhs(&self, f: T, y: &Extended<T>) -> Result<Extended<T>> {
        let state = SynodicState::new(f, y[0], y[1], y[2], y[3]);
        let d = eom_rhs(&state, self.params)?;
        let m = if self.with_ld {
            self.dir * y[2].hypot(y[3]).powf(self.gamma)
        } else {
            T::zero()
        };
        Ok([d[0], d[1], d[2], d[3], m])
    }
}

fn error_norm<T: Real>(
    err: &Extended<T>,
    y0: &Extended<T>,
    y1: &Extended<T>,
    cfg: &IntegratorConfig<T>,
) -> T {
    let mut acc = T::zero();
    for d in 0..5 {
        let scale = cfg.abs_tol + cfg.rel_tol * y0[d].abs().max(y1[d].abs()).max(T::one());
        let e = err[d] / scale;
        acc += e * e;
    }
    (acc / T::lit(5.0)).sqrt()
}

/// Bisect inside an accepted step for the first anomaly where `pred` becomes
/// true. Trial states are rebuilt by a single embedded step from the step
/// start. Returns the event anomaly and the state there.
fn refine_flip<T: Real, P>(
    tab: &Tableau<T>,
    sys: &ExtendedSystem<T>,
    f_start: T,
    y_start: &Extended<T>,
    f_hit: T,
    y_hit: &Extended<T>,
    event_tol: T,
    pred: P,
) -> Result<(T, Extended<T>)>
where
    P: Fn(T, &Extended<T>) -> bool,
{
    let mut a = f_start;
    let mut b = f_hit;
    let mut y_b = *y_hit;
    while (b - a).abs() > event_tol {
        let mid = (a + b) / T::lit(2.0);
        if mid == a || mid == b {
            break;
        }
        let (y_mid, _) = rk87::step(tab, &|f, y| sys.rhs(f, y), f_start, y_start, mid - f_start)?;
        if pred(mid, &y_mid) {
            b = mid;
            y_b = y_mid;
        } else {
            a = mid;
        }
    }
    Ok((b, y_b))
}

/// Integrate from `f0` to `f1` (either direction) with adaptive embedded
/// 8(7) steps.
///
/// Impact (physical distance below the body radius) always terminates, with
/// the impact anomaly located to `event_tol` and the descriptor truncated
/// there. The escape condition is recorded at first satisfaction; it
/// terminates only when `options.stop_at_escape` is set.
pub fn propagate<T: Real>(
    state0: &SynodicState<T>,
    f0: T,
    f1: T,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
    options: &PropagationOptions<T>,
) -> Result<PropagationOutcome<T>> {
    config.validate()?;
    if !state0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }

    let mk_state = |f: T, y: &Extended<T>| SynodicState::new(f, y[0], y[1], y[2], y[3]);
    let mut y: Extended<T> = [state0.x, state0.y, state0.xp, state0.yp, T::zero()];
    let mut f = f0;

    if f1 == f0 {
        return Ok(PropagationOutcome {
            terminal: Terminal::ReachedEnd,
            f_end: f0,
            state_end: mk_state(f0, &y),
            ld: T::zero(),
            f_escape: None,
        });
    }

    let dir = if f1 > f0 { T::one() } else { -T::one() };
    let sys = ExtendedSystem {
        params,
        with_ld: options.with_ld,
        gamma: options.gamma,
        dir,
    };
    let tab = Tableau::<T>::new();

    let impacted = |f: T, y: &Extended<T>| physical_radius(f, y[0], y[1], params) < params.r_norm;
    let escaped = |f: T, y: &Extended<T>| escape_condition(&mk_state(f, y), f0, params);

    if impacted(f0, &y) {
        return Ok(PropagationOutcome {
            terminal: Terminal::Impact,
            f_end: f0,
            state_end: mk_state(f0, &y),
            ld: T::zero(),
            f_escape: None,
        });
    }
    let mut f_escape = if escaped(f0, &y) { Some(f0) } else { None };
    if f_escape.is_some() && options.stop_at_escape {
        return Ok(PropagationOutcome {
            terminal: Terminal::Escape,
            f_end: f0,
            state_end: mk_state(f0, &y),
            ld: T::zero(),
            f_escape,
        });
    }

    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(5.0);
    let mut h = dir * config.h_init.max(config.h_min).min(config.h_max);
    let mut err_prev = T::lit(1e-4);

    for _ in 0..config.max_steps {
        if (f - f1) * dir >= T::zero() {
            return Ok(PropagationOutcome {
                terminal: Terminal::ReachedEnd,
                f_end: f,
                state_end: mk_state(f, &y),
                ld: y[4],
                f_escape,
            });
        }
        // never overshoot the final anomaly
        if (f + h - f1) * dir > T::zero() {
            h = f1 - f;
        }
        let (y_new, err_vec) = rk87::step(&tab, &|ff, yy| sys.rhs(ff, yy), f, &y, h)?;
        let err = error_norm(&err_vec, &y, &y_new, config);

        if err <= T::one() {
            let f_new = f + h;

            if impacted(f_new, &y_new) {
                let (f_i, y_i) = refine_flip(
                    &tab, &sys, f, &y, f_new, &y_new, config.event_tol, impacted,
                )?;
                return Ok(PropagationOutcome {
                    terminal: Terminal::Impact,
                    f_end: f_i,
                    state_end: mk_state(f_i, &y_i),
                    ld: y_i[4],
                    f_escape,
                });
            }
            if f_escape.is_none() && escaped(f_new, &y_new) {
                let (f_e, y_e) = refine_flip(
                    &tab, &sys, f, &y, f_new, &y_new, config.event_tol, escaped,
                )?;
                f_escape = Some(f_e);
                if options.stop_at_escape {
                    return Ok(PropagationOutcome {
                        terminal: Terminal::Escape,
                        f_end: f_e,
                        state_end: mk_state(f_e, &y_e),
                        ld: y_e[4],
                        f_escape,
                    });
                }
            }

            f = f_new;
            y = y_new;
            let e = err.max(T::lit(1e-10));
            let fac = (safety
                * e.powf(T::lit(-0.7 / 8.0))
                * err_prev.powf(T::lit(0.4 / 8.0)))
            .max(fac_min)
            .min(fac_max);
            h = dir * (h.abs() * fac).min(config.h_max);
            err_prev = e;
        } else {
            let fac = (safety * err.powf(T::lit(-1.0 / 8.0)))
                .max(fac_min)
                .min(T::one());
            h = h * fac;
            if h.abs() < config.h_min {
                return Err(Error::StepUnderflow(
                    config.h_min.to_f64().unwrap_or(f64::NAN),
                    f.to_f64().unwrap_or(f64::NAN),
                ));
            }
        }
    }
    Err(Error::MaxSteps(config.max_steps))
}

/// One exposed embedded step of the extended system, mostly useful for
/// convergence studies.
pub fn step_rk87<T: Real>(
    state: &SynodicState<T>,
    h: T,
    params: &SystemParams<T>,
    options: &PropagationOptions<T>,
) -> Result<(SynodicState<T>, T)> {
    if h == T::zero() {
        return Err(Error::Parameter {
            name: "h",
            reason: "step must be nonzero".to_string(),
        });
    }
    let sys = ExtendedSystem {
        params,
        with_ld: options.with_ld,
        gamma: options.gamma,
        dir: if h > T::zero() { T::one() } else { -T::one() },
    };
    let tab = Tableau::<T>::new();
    let y = [state.x, state.y, state.xp, state.yp, T::zero()];
    let (y_new, err) = rk87::step(&tab, &|f, yy| sys.rhs(f, yy), state.f, &y, h)?;
    let mut norm = T::zero();
    for e in err {
        norm = norm.max(e.abs());
    }
    Ok((
        SynodicState::new(state.f + h, y_new[0], y_new[1], y_new[2], y_new[3]),
        norm,
    ))
}

/// Integrate while invoking `observer` after every accepted interior sample
/// at fixed |Δf| spacing; used for trajectory export.
///
/// Sampling restarts the integrator at each sample anomaly, which is cheap
/// at export resolutions and keeps samples exactly on the requested comb.
pub fn propagate_sampled<T: Real>(
    state0: &SynodicState<T>,
    f0: T,
    f1: T,
    delta_f: T,
    config: &IntegratorConfig<T>,
    params: &SystemParams<T>,
    mut observer: impl FnMut(&SynodicState<T>),
) -> Result<PropagationOutcome<T>> {
    if !(delta_f > T::zero()) {
        return Err(Error::Parameter {
            name: "delta_f",
            reason: "sampling interval must be positive".to_string(),
        });
    }
    let dir = if f1 >= f0 { T::one() } else { -T::one() };
    let opts = PropagationOptions {
        with_ld: false,
        gamma: T::lit(0.5),
        stop_at_escape: false,
    };
    let mut current = *state0;
    observer(&current);
    let mut f = f0;
    let mut escape_first: Option<T> = None;
    loop {
        let remaining = (f1 - f) * dir;
        if remaining <= T::zero() {
            return Ok(PropagationOutcome {
                terminal: Terminal::ReachedEnd,
                f_end: f,
                state_end: current,
                ld: T::zero(),
                f_escape: escape_first,
            });
        }
        let step_to = if remaining < delta_f { f1 } else { f + dir * delta_f };
        let out = propagate(&current, f, step_to, config, params, &opts)?;
        if escape_first.is_none() {
            escape_first = out.f_escape;
        }
        current = out.state_end;
        f = out.f_end;
        observer(&current);
        if out.terminal == Terminal::Impact {
            return Ok(PropagationOutcome {
                terminal: Terminal::Impact,
                f_end: f,
                state_end: current,
                ld: T::zero(),
                f_escape: escape_first,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::jacobi_constant;
    use approx::assert_relative_eq;

    fn mars() -> SystemParams {
        SystemParams::sun_mars()
    }

    /// Table-2 orbit "b" initial offset, built inline to keep this module
    /// independent of the survey construction.
    fn orbit_b() -> SynodicState {
        let p = mars();
        SynodicState::new(
            0.0,
            1.0 - p.mu - 7.575000e-5,
            1.695000e-4,
            -4.999940e-2,
            -2.234486e-2,
        )
    }

    #[test]
    fn zero_length_interval() {
        let p = mars();
        let s = orbit_b();
        let out = propagate(
            &s,
            0.0,
            0.0,
            &IntegratorConfig::default(),
            &p,
            &PropagationOptions::descriptor(0.5),
        )
        .unwrap();
        assert_eq!(out.terminal, Terminal::ReachedEnd);
        assert_eq!(out.ld, 0.0);
        assert_eq!(out.f_end, 0.0);
    }

    #[test]
    fn impact_of_table2_orbit_b() {
        let p = mars();
        let cfg = IntegratorConfig::default();
        let out = propagate(
            &orbit_b(),
            0.0,
            -std::f64::consts::PI,
            &cfg,
            &p,
            &PropagationOptions::classification(),
        )
        .unwrap();
        assert_eq!(out.terminal, Terminal::Impact);
        assert!(out.f_end > -std::f64::consts::PI && out.f_end < 0.0);
        // terminal physical distance sits on the body radius
        let r = physical_radius(out.f_end, out.state_end.x, out.state_end.y, &p);
        assert!((r - p.r_norm).abs() < 1e-9, "residual {}", (r - p.r_norm).abs());
    }

    #[test]
    fn escape_recorded_without_truncating_ld() {
        // Table-2 orbit "d" escapes backward before -pi
        let p = mars();
        let s = SynodicState::new(
            0.0,
            1.0 - p.mu + 4.533000e-4,
            3.475000e-4,
            -1.871302e-2,
            2.441039e-2,
        );
        let cfg = IntegratorConfig::default();
        let out = propagate(
            &s,
            0.0,
            -std::f64::consts::PI,
            &cfg,
            &p,
            &PropagationOptions::descriptor(0.5),
        )
        .unwrap();
        assert_eq!(out.terminal, Terminal::ReachedEnd);
        let fe = out.f_escape.expect("escape must be recorded");
        assert!(fe < 0.0 && fe > -std::f64::consts::PI);
        assert!(out.ld > 0.0);

        let stopped = propagate(
            &s,
            0.0,
            -std::f64::consts::PI,
            &cfg,
            &p,
            &PropagationOptions::classification(),
        )
        .unwrap();
        assert_eq!(stopped.terminal, Terminal::Escape);
        assert_relative_eq!(stopped.f_end, fe, epsilon = 1e-5);
    }

    #[test]
    fn jacobi_conserved_in_circular_problem() {
        let mut p = mars();
        p.e_p = 0.0;
        // periapsis-style initial condition inside the survey domain
        let (x0, y0) = (3e-4, 1e-4);
        let rg = (x0 as f64).hypot(y0);
        let vp = (p.mu * 1.9 / rg).sqrt();
        let s = SynodicState::new(
            0.0,
            1.0 - p.mu + x0,
            y0,
            (vp / rg - rg) * -y0,
            (vp / rg - rg) * x0,
        );
        let c0 = jacobi_constant(&s, &p).unwrap();
        let cfg = IntegratorConfig::default();
        let out = propagate(
            &s,
            0.0,
            2.0 * std::f64::consts::PI,
            &cfg,
            &p,
            &PropagationOptions::descriptor(0.5),
        )
        .unwrap();
        if out.terminal == Terminal::ReachedEnd {
            let c1 = jacobi_constant(&out.state_end, &p).unwrap();
            assert!((c1 - c0).abs() <= 1e-9, "drift {}", (c1 - c0).abs());
        }
    }

    #[test]
    fn forward_backward_consistency() {
        let p = mars();
        let s = SynodicState::new(0.0, 1.0 - p.mu + 4.5e-4, 3.6e-4, -1.9e-2, 2.4e-2);
        let cfg = IntegratorConfig::default();
        let opts = PropagationOptions {
            with_ld: false,
            gamma: 0.5,
            stop_at_escape: false,
        };
        let fwd = propagate(&s, 0.0, 1.5, &cfg, &p, &opts).unwrap();
        assert_eq!(fwd.terminal, Terminal::ReachedEnd);
        let back = propagate(&fwd.state_end, 1.5, 0.0, &cfg, &p, &opts).unwrap();
        let tol = 100.0 * cfg.rel_tol;
        assert!((back.state_end.x - s.x).abs() < tol);
        assert!((back.state_end.y - s.y).abs() < tol);
        assert!((back.state_end.xp - s.xp).abs() < tol);
        assert!((back.state_end.yp - s.yp).abs() < tol);
    }

    #[test]
    fn ld_additive_and_nonnegative_both_directions() {
        let p = mars();
        let s = SynodicState::new(0.0, 1.0 - p.mu + 4.5e-4, 3.6e-4, -1.9e-2, 2.4e-2);
        let cfg = IntegratorConfig::default();
        let opts = PropagationOptions::descriptor(0.5);
        let a = propagate(&s, 0.0, 0.8, &cfg, &p, &opts).unwrap();
        let b = propagate(&a.state_end, 0.8, 1.7, &cfg, &p, &opts).unwrap();
        let whole = propagate(&s, 0.0, 1.7, &cfg, &p, &opts).unwrap();
        assert!(a.ld > 0.0 && b.ld > 0.0);
        assert_relative_eq!(a.ld + b.ld, whole.ld, max_relative = 1e-8);

        let back = propagate(&s, 0.0, -0.9, &cfg, &p, &opts).unwrap();
        assert!(back.ld > 0.0);
    }

    #[test]
    fn locate_event_synthetics() {
        let cfg = IntegratorConfig::default();
        let f: f64 = locate_event((0.0, 1.0), |x| x > 0.5, &cfg).unwrap();
        assert!((f - 0.5).abs() <= cfg.event_tol * 2.0);
        assert!(matches!(
            locate_event((0.0, 1.0), |_| false, &cfg),
            Err(Error::Bracket(_, _))
        ));
    }

    #[test]
    fn step_rejects_zero_h() {
        let p = mars();
        let s = orbit_b();
        assert!(step_rk87(&s, 0.0, &p, &PropagationOptions::classification()).is_err());
    }

    #[test]
    fn sampled_propagation_hits_comb() {
        let p = mars();
        let s = SynodicState::new(0.0, 1.0 - p.mu + 4.5e-4, 3.6e-4, -1.9e-2, 2.4e-2);
        let cfg = IntegratorConfig::default();
        let mut anomalies = Vec::new();
        let out = propagate_sampled(&s, 0.0, 0.5, 0.1, &cfg, &p, |st| anomalies.push(st.f))
            .unwrap();
        assert_eq!(out.terminal, Terminal::ReachedEnd);
        assert_eq!(anomalies.len(), 6);
        assert_relative_eq!(anomalies[3], 0.3, epsilon = 1e-14);
        assert_relative_eq!(*anomalies.last().unwrap(), 0.5, epsilon = 1e-14);
    }
}
