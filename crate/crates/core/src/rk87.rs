//! 13-stage embedded Runge–Kutta 8(7) pair (Fehlberg, NASA TR R-287).
//!
//! The 8th-order solution is propagated (local extrapolation); the embedded
//! 7th-order solution provides the error estimate. Generic over the scalar
//! type and the system dimension.

use crate::error::{Error, Result};
use crate::Real;

pub const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    1.0 / 2.0,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; 12] = [
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.0,
        0.0,
        0.0,
        -53.0 / 6.0,
        704.0 / 45.0,
        -107.0 / 9.0,
        67.0 / 90.0,
        3.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// 8th-order weights (stages 0 and 10 drop out; 11 and 12 enter).
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// Embedded 7th-order weights.
const B7: [f64; STAGES] = [
    41.0 / 840.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    41.0 / 840.0,
    0.0,
    0.0,
];

/// Butcher tableau converted into the working scalar type once per
/// integration run.
#[derive(Debug, Clone)]
pub struct Tableau<T> {
    pub c: [T; STAGES],
    pub a: [[T; 12]; 12],
    pub b8: [T; STAGES],
    pub b7: [T; STAGES],
}

impl<T: Real> Tableau<T> {
    pub fn new() -> Self {
        let mut c = [T::zero(); STAGES];
        let mut b8 = [T::zero(); STAGES];
        let mut b7 = [T::zero(); STAGES];
        let mut a = [[T::zero(); 12]; 12];
        for s in 0..STAGES {
            c[s] = T::lit(C[s]);
            b8[s] = T::lit(B8[s]);
            b7[s] = T::lit(B7[s]);
        }
        for (i, row) in A.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                a[i][j] = T::lit(*v);
            }
        }
        Self { c, a, b8, b7 }
    }
}

impl<T: Real> Default for Tableau<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// One embedded step of `y' = rhs(t, y)` from `t` with step `h`.
///
/// Returns the 8th-order solution and the componentwise embedded difference
/// (8th minus 7th order), the raw material for the error norm.
pub fn step<T: Real, const N: usize, F>(
    tab: &Tableau<T>,
    rhs: &F,
    t: T,
    y: &[T; N],
    h: T,
) -> Result<([T; N], [T; N])>
where
    F: Fn(T, &[T; N]) -> Result<[T; N]>,
{
    let mut k = [[T::zero(); N]; STAGES];
    k[0] = rhs(t, y)?;
    for s in 1..STAGES {
        let mut ys = *y;
        for j in 0..s {
            let aij = tab.a[s - 1][j];
            if aij != T::zero() {
                for d in 0..N {
                    ys[d] += h * aij * k[j][d];
                }
            }
        }
        k[s] = rhs(t + tab.c[s] * h, &ys)?;
    }
    let mut y_new = *y;
    let mut err = [T::zero(); N];
    for s in 0..STAGES {
        let (w8, w7) = (tab.b8[s], tab.b7[s]);
        if w8 != T::zero() || w7 != T::zero() {
            for d in 0..N {
                y_new[d] += h * w8 * k[s][d];
                err[d] += h * (w8 - w7) * k[s][d];
            }
        }
    }
    for d in 0..N {
        if !y_new[d].is_finite() {
            return Err(Error::NonFinite("Runge-Kutta stage"));
        }
    }
    Ok((y_new, err))
}
