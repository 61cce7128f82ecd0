//! Physical constants, normalization and the grid/field/label containers
//! shared across the pipeline.
//!
//! Everything here is an immutable value object after construction and safe
//! to share across parallel workers.

use crate::error::{Error, Result};
use crate::Real;

/// Physical and normalized constants of a Sun–secondary elliptic restricted
/// three-body system.
///
/// Lengths are normalized by the primaries' semi-major axis; masses by the
/// total mass; the primaries' period by 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T = f64> {
    /// Mass parameter μ = m₂/(m₁+m₂).
    pub mu: T,
    /// Primaries' common eccentricity.
    pub e_p: T,
    /// Primaries' semi-major axis [AU].
    pub a_p: T,
    /// Target-body mean radius [km].
    pub r_km: T,
    /// R_SOI / R ratio.
    pub soi_factor: T,
    /// Kilometers per astronomical unit.
    pub au_km: T,
    /// Derived: a_p · au_km [km].
    pub length_unit_km: T,
    /// Derived: target radius in normalized length units.
    pub r_norm: T,
    /// Derived: sphere-of-influence radius in normalized length units.
    pub rsoi_norm: T,
}

/// Kilometers per AU (IAU 2012 definition).
pub const AU_KM: f64 = 1.495978707e8;

impl<T: Real> SystemParams<T> {
    pub fn new(mu: T, e_p: T, a_p: T, r_km: T, soi_factor: T, au_km: T) -> Result<Self> {
        let check = |ok: bool, name: &'static str, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Parameter {
                    name,
                    reason: reason.to_string(),
                })
            }
        };
        check(
            mu > T::zero() && mu < T::lit(0.5),
            "mu",
            "must satisfy 0 < mu < 1/2",
        )?;
        check(
            e_p >= T::zero() && e_p < T::one(),
            "e_p",
            "must satisfy 0 <= e_p < 1",
        )?;
        check(a_p > T::zero(), "a_p", "must be positive")?;
        check(r_km > T::zero(), "r_km", "must be positive")?;
        check(soi_factor > T::one(), "soi_factor", "must exceed 1")?;
        check(au_km > T::zero(), "au_km", "must be positive")?;

        let length_unit_km = a_p * au_km;
        let r_norm = r_km / length_unit_km;
        let rsoi_norm = soi_factor * r_norm;
        check(
            r_norm > T::zero() && r_norm < rsoi_norm && rsoi_norm < T::one(),
            "r_km",
            "normalized radii must satisfy 0 < R < R_SOI < 1",
        )?;
        Ok(Self {
            mu,
            e_p,
            a_p,
            r_km,
            soi_factor,
            au_km,
            length_unit_km,
            r_norm,
            rsoi_norm,
        })
    }

    /// Sun–Mars system of the reference study (Table-1 values).
    pub fn sun_mars() -> Self {
        Self::new(
            T::lit(3.226201e-7),
            T::lit(0.093418),
            T::lit(1.523688),
            T::lit(3397.0),
            T::lit(170.0),
            T::lit(AU_KM),
        )
        .expect("built-in parameters are valid")
    }

    /// x-coordinate of the secondary body P₂ in the synodic frame.
    #[inline]
    pub fn x_secondary(&self) -> T {
        T::one() - self.mu
    }
}

/// Particle state in the pulsating synodic frame; primes are derivatives
/// with respect to the primaries' true anomaly `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynodicState<T = f64> {
    /// True anomaly (independent variable) [rad].
    pub f: T,
    pub x: T,
    pub y: T,
    pub xp: T,
    pub yp: T,
}

impl<T: Real> SynodicState<T> {
    pub fn new(f: T, x: T, y: T, xp: T, yp: T) -> Self {
        Self { f, x, y, xp, yp }
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite()
            && self.x.is_finite()
            && self.y.is_finite()
            && self.xp.is_finite()
            && self.yp.is_finite()
    }
}

/// State relative to P₂ in the non-rotating frame oriented as the synodic
/// frame at the reference anomaly f₀. Velocities are with respect to the
/// normalized time, not the true anomaly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState<T = f64> {
    pub x: T,
    pub y: T,
    pub vx: T,
    pub vy: T,
}

impl<T: Real> RelativeState<T> {
    #[inline]
    pub fn radius(&self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn speed(&self) -> T {
        self.vx.hypot(self.vy)
    }
}

/// Square grid of initial-condition offsets centered at P₂.
///
/// Row `i` increases with `y`, column `j` with `x`; storage is row-major
/// with row 0 at the minimum `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T = f64> {
    /// Half-width ε of the square domain [normalized length].
    pub eps: T,
    /// Points per side.
    pub n: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(eps: T, n: usize) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::Parameter {
                name: "eps",
                reason: "must be positive".into(),
            });
        }
        if n < 2 {
            return Err(Error::Parameter {
                name: "n",
                reason: "need at least 2 points per side".into(),
            });
        }
        Ok(Self { eps, n })
    }

    /// Offset (X₀, Y₀) from P₂ of grid point (row `i`, column `j`).
    /// Corner offsets are exactly ±ε.
    #[inline]
    pub fn offset(&self, i: usize, j: usize) -> (T, T) {
        let two = T::lit(2.0);
        let den = T::usize(self.n - 1);
        let x = -self.eps + two * self.eps * T::usize(j) / den;
        let y = -self.eps + two * self.eps * T::usize(i) / den;
        (x, y)
    }

    /// Row-major index of (i, j).
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Grid point nearest to a continuous offset, or `None` outside the domain.
    pub fn nearest(&self, x: T, y: T) -> Option<(usize, usize)> {
        let den = T::usize(self.n - 1);
        let two = T::lit(2.0);
        let jf = ((x + self.eps) * den / (two * self.eps)).round();
        let i_f = ((y + self.eps) * den / (two * self.eps)).round();
        let nmax = T::usize(self.n - 1);
        if jf < T::zero() || i_f < T::zero() || jf > nmax || i_f > nmax {
            return None;
        }
        Some((i_f.to_usize()?, jf.to_usize()?))
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Stability classification of a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Label {
    /// Neither escaped nor impacted over the interval (set 𝒲).
    WeaklyStable = 0,
    /// Escaped: H > 0 and r > R_SOI at some anomaly in the interval (set 𝒳).
    Unstable = 1,
    /// Impacted the target surface (set 𝒦).
    Crash = 2,
    /// Initial condition starts below the target's surface radius.
    InsideBody = 3,
    /// Propagation failed; excluded from sets and metrics.
    Error = 4,
}

impl Label {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Label::WeaklyStable),
            1 => Some(Label::Unstable),
            2 => Some(Label::Crash),
            3 => Some(Label::InsideBody),
            4 => Some(Label::Error),
            _ => None,
        }
    }
}

/// Grid of Lagrangian-descriptor values with the anomalies defining the
/// integration legs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T = f64> {
    pub spec: GridSpec<T>,
    /// Row-major n×n values; non-negative where propagation succeeded,
    /// NaN where it failed.
    pub values: Vec<T>,
    pub f0: T,
    pub f_b: T,
    pub f_f: T,
    pub gamma: T,
}

impl<T: Real> ScalarField<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.spec.index(i, j)]
    }
}

/// Grid of stability labels with event anomalies where defined.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelField<T = f64> {
    pub spec: GridSpec<T>,
    pub labels: Vec<Label>,
    /// f_e (escape) or f_i (impact); NaN when the label has no event.
    pub event_anomaly: Vec<T>,
    pub f0: T,
    pub ff: T,
}

impl<T: Real> LabelField<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Label {
        self.labels[self.spec.index(i, j)]
    }
}

/// Binary separatrix mask together with the sensitivity threshold that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap<T = f64> {
    pub spec: GridSpec<T>,
    pub mask: Vec<bool>,
    pub sigma: T,
}

impl<T: Real> EdgeMap<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[self.spec.index(i, j)]
    }
}
