//! Separatrix extraction from descriptor fields: min-max normalization,
//! Roberts-cross squared-difference gradient and sensitivity thresholding.
//!
//! The threshold applies to the squared-difference sum itself (no square
//! root, no thinning); σ values are meaningful on the normalized field.

use crate::error::{Error, Result};
use crate::model::{EdgeMap, GridSpec, ScalarField};
use crate::Real;

/// Affine min-max rescale of the finite values to [0, 1]; non-finite
/// (failed-point) pixels map to 0.
pub fn normalize_field<T: Real>(field: &ScalarField<T>) -> Result<ScalarField<T>> {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for &v in &field.values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(hi > lo) {
        return Err(Error::DegenerateRange);
    }
    let span = hi - lo;
    let values = field
        .values
        .iter()
        .map(|&v| {
            if v.is_finite() {
                (v - lo) / span
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(ScalarField {
        values,
        ..field.clone()
    })
}

/// Roberts-cross gradient: g(i,j) = (I(i,j) − I(i+1,j+1))² + (I(i+1,j) − I(i,j+1))²
/// on the (n−1)×(n−1) interior.
pub fn roberts_gradient<T: Real>(field: &ScalarField<T>) -> Vec<T> {
    let n = field.spec.n;
    let m = n - 1;
    let mut g = vec![T::zero(); m * m];
    for i in 0..m {
        for j in 0..m {
            let d1 = field.get(i, j) - field.get(i + 1, j + 1);
            let d2 = field.get(i + 1, j) - field.get(i, j + 1);
            g[i * m + j] = d1 * d1 + d2 * d2;
        }
    }
    g
}

/// Threshold the Roberts gradient at sensitivity `sigma`; the last row and
/// column (which have no gradient sample) are padded false to restore n×n.
pub fn detect_edges<T: Real>(field: &ScalarField<T>, sigma: T) -> Result<EdgeMap<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::Parameter {
            name: "sigma",
            reason: "sensitivity threshold must be positive".to_string(),
        });
    }
    let n = field.spec.n;
    let m = n - 1;
    let g = roberts_gradient(field);
    let mut mask = vec![false; n * n];
    for i in 0..m {
        for j in 0..m {
            mask[i * n + j] = g[i * m + j] > sigma;
        }
    }
    Ok(EdgeMap {
        spec: field.spec,
        mask,
        sigma,
    })
}

/// Pixel class in a forward/backward separatrix overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum OverlayPixel {
    None = 0,
    ForwardOnly = 1,
    BackwardOnly = 2,
    Both = 3,
}

/// Forward and backward separatrices combined into one three-valued image.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOverlay<T = f64> {
    pub spec: GridSpec<T>,
    pub pixels: Vec<OverlayPixel>,
    pub sigma_forward: T,
    pub sigma_backward: T,
}

pub fn compose_edges<T: Real>(
    forward: &EdgeMap<T>,
    backward: &EdgeMap<T>,
) -> Result<EdgeOverlay<T>> {
    if forward.spec != backward.spec {
        return Err(Error::GridMismatch(
            "overlay needs identical edge grids".to_string(),
        ));
    }
    let pixels = forward
        .mask
        .iter()
        .zip(&backward.mask)
        .map(|(&f, &b)| match (f, b) {
            (false, false) => OverlayPixel::None,
            (true, false) => OverlayPixel::ForwardOnly,
            (false, true) => OverlayPixel::BackwardOnly,
            (true, true) => OverlayPixel::Both,
        })
        .collect();
    Ok(EdgeOverlay {
        spec: forward.spec,
        pixels,
        sigma_forward: forward.sigma,
        sigma_backward: backward.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: usize, values: Vec<f64>) -> ScalarField {
        ScalarField {
            spec: GridSpec::new(1e-3, n).unwrap(),
            values,
            f0: 0.0,
            f_b: 0.0,
            f_f: 1.0,
            gamma: 0.5,
        }
    }

    #[test]
    fn normalize_rescales_and_zeroes_failures() {
        let f = field(2, vec![2.0, 4.0, 6.0, f64::NAN]);
        let n = normalize_field(&f).unwrap();
        assert_eq!(n.values, vec![0.0, 0.5, 1.0, 0.0]);

        let already = field(2, vec![0.0, 0.25, 0.75, 1.0]);
        assert_eq!(normalize_field(&already).unwrap().values, already.values);

        assert!(matches!(
            normalize_field(&field(2, vec![3.0; 4])),
            Err(Error::DegenerateRange)
        ));
    }

    #[test]
    fn roberts_hand_example() {
        assert_eq!(roberts_gradient(&field(2, vec![0.0, 0.0, 1.0, 1.0])), vec![2.0]);
        assert_eq!(roberts_gradient(&field(2, vec![5.0; 4])), vec![0.0]);
    }

    #[test]
    fn roberts_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 8;
            let values: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let f = field(n, values.clone());
            let g = roberts_gradient(&f);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    let a = values[i * n + j] - values[(i + 1) * n + j + 1];
                    let b = values[(i + 1) * n + j] - values[i * n + j + 1];
                    assert_eq!(g[i * (n - 1) + j], a * a + b * b);
                }
            }
        }
    }

    #[test]
    fn threshold_behavior() {
        let f = field(2, vec![0.0, 0.0, 1.0, 1.0]);
        let low = detect_edges(&f, 1.0).unwrap();
        assert_eq!(low.mask, vec![true, false, false, false]);
        let high = detect_edges(&f, 10.0).unwrap();
        assert!(high.mask.iter().all(|&m| !m));
        assert!(detect_edges(&f, 0.0).is_err());
    }

    #[test]
    fn sigma_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 12;
        let values: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = field(n, values);
        let m1 = detect_edges(&f, 0.05).unwrap();
        let m2 = detect_edges(&f, 0.2).unwrap();
        for (a, b) in m1.mask.iter().zip(&m2.mask) {
            assert!(*a || !*b, "mask(sigma2) must be a subset of mask(sigma1)");
        }
    }

    #[test]
    fn gradient_scale_quadratic() {
        let f = field(3, (0..9).map(|v| v as f64 * 0.1).collect());
        let g1 = roberts_gradient(&f);
        let scaled = field(3, f.values.iter().map(|v| v * 3.0).collect());
        let g2 = roberts_gradient(&scaled);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((b - a * 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn overlay_semantics() {
        let spec = GridSpec::<f64>::new(1e-3, 2).unwrap();
        let mk = |mask: Vec<bool>, sigma| EdgeMap { spec, mask, sigma };
        let fwd = mk(vec![true, false, true, false], 9e-3);
        let back = mk(vec![false, false, true, true], 4e-3);
        let ov = compose_edges(&fwd, &back).unwrap();
        assert_eq!(
            ov.pixels,
            vec![
                OverlayPixel::ForwardOnly,
                OverlayPixel::None,
                OverlayPixel::Both,
                OverlayPixel::BackwardOnly
            ]
        );
        let same = compose_edges(&fwd, &fwd).unwrap();
        assert!(same
            .pixels
            .iter()
            .all(|&p| p == OverlayPixel::Both || p == OverlayPixel::None));

        let other = EdgeMap {
            spec: GridSpec::new(1e-3, 3).unwrap(),
            mask: vec![false; 9],
            sigma: 1e-3,
        };
        assert!(compose_edges(&fwd, &other).is_err());
    }
}
