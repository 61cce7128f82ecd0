//! Agreement between extracted separatrices and stability-set boundaries:
//! boundary masks, Chebyshev-tolerance precision/recall and a
//! breadth-first distance transform.

use crate::error::{Error, Result};
use crate::model::{EdgeMap, Label, LabelField};
use crate::Real;

/// Boundary mask of a label field: a pixel is boundary iff any 4-neighbor
/// carries a different label. Error pixels are excluded entirely.
pub fn class_boundaries<T: Real>(labels: &LabelField<T>) -> Vec<bool> {
    let n = labels.spec.n;
    let mut mask = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let here = labels.get(i, j);
            if here == Label::Error {
                continue;
            }
            let differs = |ni: usize, nj: usize| {
                let other = labels.get(ni, nj);
                other != Label::Error && other != here
            };
            let b = (i > 0 && differs(i - 1, j))
                || (i + 1 < n && differs(i + 1, j))
                || (j > 0 && differs(i, j - 1))
                || (j + 1 < n && differs(i, j + 1));
            mask[i * n + j] = b;
        }
    }
    mask
}

/// Chebyshev (8-neighbor) distance to the nearest seed pixel, by
/// breadth-first expansion; `usize::MAX` where no seed exists.
pub fn chebyshev_distance_transform(seeds: &[bool], n: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; n * n];
    let mut frontier: Vec<usize> = Vec::new();
    for (idx, &s) in seeds.iter().enumerate() {
        if s {
            dist[idx] = 0;
            frontier.push(idx);
        }
    }
    let mut d = 0usize;
    let mut next = Vec::new();
    while !frontier.is_empty() {
        d += 1;
        next.clear();
        for &idx in &frontier {
            let (i, j) = (idx / n, idx % n);
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                        continue;
                    }
                    let nidx = ni as usize * n + nj as usize;
                    if dist[nidx] > d {
                        dist[nidx] = d;
                        next.push(nidx);
                    }
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
    }
    dist
}

/// Agreement metrics between an edge mask and a boundary mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    /// Fraction of edge pixels within distance d of a boundary pixel.
    pub precision: f64,
    /// Fraction of boundary pixels within distance d of an edge pixel.
    pub recall: f64,
    /// Median over edge pixels of the distance to the nearest boundary
    /// pixel; `None` when either mask is empty.
    pub median_distance: Option<f64>,
    pub edge_pixels: usize,
    pub boundary_pixels: usize,
}

/// Score an edge map against a boundary mask with pixel tolerance `d`
/// (Chebyshev metric).
pub fn agreement<T: Real>(
    edges: &EdgeMap<T>,
    boundary: &[bool],
    d: usize,
) -> Result<Agreement> {
    let n = edges.spec.n;
    if boundary.len() != n * n {
        return Err(Error::GridMismatch(format!(
            "boundary mask has {} pixels, grid needs {}",
            boundary.len(),
            n * n
        )));
    }
    let edge_pixels = edges.mask.iter().filter(|&&m| m).count();
    let boundary_pixels = boundary.iter().filter(|&&m| m).count();
    if edge_pixels == 0 || boundary_pixels == 0 {
        return Ok(Agreement {
            precision: 0.0,
            recall: 0.0,
            median_distance: None,
            edge_pixels,
            boundary_pixels,
        });
    }

    let dist_to_boundary = chebyshev_distance_transform(boundary, n);
    let dist_to_edge = chebyshev_distance_transform(&edges.mask, n);

    let mut hits = 0usize;
    let mut edge_dists: Vec<usize> = Vec::with_capacity(edge_pixels);
    for (idx, &e) in edges.mask.iter().enumerate() {
        if e {
            let dd = dist_to_boundary[idx];
            edge_dists.push(dd);
            if dd <= d {
                hits += 1;
            }
        }
    }
    let precision = hits as f64 / edge_pixels as f64;

    let recalled = boundary
        .iter()
        .enumerate()
        .filter(|&(idx, &b)| b && dist_to_edge[idx] <= d)
        .count();
    let recall = recalled as f64 / boundary_pixels as f64;

    edge_dists.sort_unstable();
    let median = if edge_dists.len() % 2 == 1 {
        edge_dists[edge_dists.len() / 2] as f64
    } else {
        (edge_dists[edge_dists.len() / 2 - 1] + edge_dists[edge_dists.len() / 2]) as f64 / 2.0
    };

    Ok(Agreement {
        precision,
        recall,
        median_distance: Some(median),
        edge_pixels,
        boundary_pixels,
    })
}
