//! Fixtures shared by the benchmarks.

use basedet::geometry::{LineSegment, Point};
use basedet::synth::{generate_page, SynthSpec, SyntheticPage};
use basedet::ProbabilityGrid;

/// A deterministic page of the given size with roughly one line per
/// `leading` pixels.
pub fn page(width: usize, height: usize, leading: f64) -> SyntheticPage {
    generate_page(&SynthSpec {
        page_w: width,
        page_h: height,
        n_lines: (height as f64 / leading) as usize,
        leading,
        seed: 17,
        ..SynthSpec::default()
    })
    .expect("valid fixture spec")
}

/// Binary mask of horizontal bands, `thickness` rows every `period` rows.
pub fn band_mask(width: usize, height: usize, period: usize, thickness: usize) -> ProbabilityGrid {
    ProbabilityGrid::from_fn(width, height, |x, y| {
        let in_band = y % period < thickness;
        let in_word = (x / 40) % 5 != 4;
        if in_band && in_word {
            1.0
        } else {
            0.0
        }
    })
}

/// A noisy band of `n` pixels along a shallow slope.
pub fn point_cloud(n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let x = i as f64 * 0.5;
            let jitter = ((i * 7919) % 11) as f64 / 11.0 - 0.5;
            Point::new(x, 0.02 * x + 2.0 * jitter)
        })
        .collect()
}

/// Text-like rows of segment pieces with small gaps.
pub fn segment_rows(rows: usize, per_row: usize) -> Vec<LineSegment> {
    let mut out = Vec::with_capacity(rows * per_row);
    for r in 0..rows {
        let y = 50.0 + 40.0 * r as f64;
        for k in 0..per_row {
            let x = 10.0 + 130.0 * k as f64 + (r % 3) as f64;
            out.push(LineSegment::from_coords(x, y + (k % 2) as f64, x + 120.0, y + 1.0));
        }
    }
    out
}
