//! Raster export: grayscale fields with percentile clipping, label palettes,
//! edge and capture masks. Rendering is a pure view of the stored data.
//!
//! Image row 0 is the TOP of the picture, grid row 0 the minimum y, so rows
//! are flipped on export to put +y up.

use image::{Rgb, RgbImage};
use ldcap::model::{EdgeMap, Label, LabelField, ScalarField};
use std::path::Path;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
/// Label palette: weakly stable white, unstable blue, crash green family
/// with the body disk darker.
const COLOR_UNSTABLE: Rgb<u8> = Rgb([66, 114, 230]);
const COLOR_CRASH: Rgb<u8> = Rgb([104, 190, 120]);
const COLOR_INSIDE: Rgb<u8> = Rgb([22, 110, 48]);
const COLOR_ERROR: Rgb<u8> = Rgb([210, 40, 40]);
const COLOR_CAPTURE: Rgb<u8> = Rgb([200, 40, 40]);

pub fn label_color(label: Label) -> Rgb<u8> {
    match label {
        Label::WeaklyStable => WHITE,
        Label::Unstable => COLOR_UNSTABLE,
        Label::Crash => COLOR_CRASH,
        Label::InsideBody => COLOR_INSIDE,
        Label::Error => COLOR_ERROR,
    }
}

fn save(img: RgbImage, path: &Path) -> Result<(), String> {
    if path.extension().and_then(|e| e.to_str()) == Some("pgm") {
        return save_pgm(&img, path);
    }
    img.save(path).map_err(|e| e.to_string())
}

/// Minimal binary PGM (P5) writer; colors collapse to luma.
fn save_pgm(img: &RgbImage, path: &Path) -> Result<(), String> {
    let (w, h) = img.dimensions();
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    for p in img.pixels() {
        let [r, g, b] = p.0;
        let luma =
            (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8;
        bytes.push(luma);
    }
    std::fs::write(path, bytes).map_err(|e| e.to_string())
}

/// Display range: [2nd, 98th] percentile of the finite values.
fn percentile_clip(values: &[f64]) -> (f64, f64) {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return (0.0, 1.0);
    }
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |q: f64| {
        let idx = ((finite.len() - 1) as f64 * q).round() as usize;
        finite[idx]
    };
    let (lo, hi) = (pick(0.02), pick(0.98));
    if hi > lo {
        (lo, hi)
    } else {
        (finite[0], finite[finite.len() - 1].max(finite[0] + 1.0))
    }
}

pub fn render_field(field: &ScalarField<f64>, path: &Path) -> Result<(), String> {
    let n = field.spec.n as u32;
    let (lo, hi) = percentile_clip(&field.values);
    let img = RgbImage::from_fn(n, n, |px, py| {
        let i = (n - 1 - py) as usize;
        let j = px as usize;
        let v = field.get(i, j);
        if !v.is_finite() {
            return COLOR_ERROR;
        }
        let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        let g = (t * 255.0).round() as u8;
        Rgb([g, g, g])
    });
    save(img, path)
}

pub fn render_labels(labels: &LabelField<f64>, path: &Path) -> Result<(), String> {
    let n = labels.spec.n as u32;
    let img = RgbImage::from_fn(n, n, |px, py| {
        label_color(labels.get((n - 1 - py) as usize, px as usize))
    });
    save(img, path)
}

pub fn render_edges(edges: &EdgeMap<f64>, path: &Path) -> Result<(), String> {
    let n = edges.spec.n as u32;
    let img = RgbImage::from_fn(n, n, |px, py| {
        if edges.get((n - 1 - py) as usize, px as usize) {
            BLACK
        } else {
            WHITE
        }
    });
    save(img, path)
}

pub fn render_mask(mask: &[bool], n: usize, path: &Path) -> Result<(), String> {
    let nu = n as u32;
    let img = RgbImage::from_fn(nu, nu, |px, py| {
        let i = (nu - 1 - py) as usize;
        if mask[i * n + px as usize] {
            COLOR_CAPTURE
        } else {
            WHITE
        }
    });
    save(img, path)
}
