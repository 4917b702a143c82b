//! Synthetic document pages with exact baseline and region groundtruth.
//!
//! Text is simulated by dark stroke blocks ("words") sitting on each
//! baseline. Layout follows a page grid: 8% margins, one or two columns with
//! a gutter of 15% of the page width, and lines spaced by the leading. The
//! whole layout is rotated about the page center by a random angle within
//! `±skew` degrees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::pixel_noise;
use crate::docmodel::DocumentProperties;
use crate::error::{Error, Result};
use crate::geometry::{Point, Polyline};
use crate::raster::ProbabilityGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub page_w: usize,
    pub page_h: usize,
    pub n_lines: usize,
    /// Baseline spacing in pixels.
    pub leading: f64,
    /// Maximum absolute page rotation in degrees.
    pub skew: f64,
    pub columns: u8,
    /// Adds short marginal notes in the left margin.
    pub margin_text: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            page_w: 1600,
            page_h: 2000,
            n_lines: 24,
            leading: 60.0,
            skew: 1.0,
            columns: 1,
            margin_text: false,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.page_w < 64 || self.page_h < 64 {
            return Err(Error::InvalidParameter(format!(
                "page must be at least 64x64, got {}x{}",
                self.page_w, self.page_h
            )));
        }
        if !(self.leading > 0.0 && self.leading.is_finite()) {
            return Err(Error::InvalidParameter(format!("leading must be positive, got {}", self.leading)));
        }
        if !(0.0..=45.0).contains(&self.skew) {
            return Err(Error::InvalidParameter(format!("skew must be within [0, 45], got {}", self.skew)));
        }
        if !matches!(self.columns, 1 | 2) {
            return Err(Error::InvalidParameter(format!("columns must be 1 or 2, got {}", self.columns)));
        }
        Ok(())
    }

    /// Leading property: 0 at 40 px, 1 at 120 px, linear in between.
    pub fn leading_property(&self) -> f64 {
        ((self.leading - 40.0) / 80.0).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPage {
    pub image: ProbabilityGrid,
    pub baselines: Vec<Polyline>,
    pub regions: Vec<Polyline>,
    pub props: DocumentProperties,
}

struct Stroke {
    baseline_y: f64,
    x0: f64,
    x1: f64,
    height: f64,
    ink: f64,
}

struct Rotation {
    cx: f64,
    cy: f64,
    cos: f64,
    sin: f64,
}

impl Rotation {
    fn forward(&self, p: Point) -> Point {
        let (dx, dy) = (p.x - self.cx, p.y - self.cy);
        Point::new(
            self.cx + dx * self.cos - dy * self.sin,
            self.cy + dx * self.sin + dy * self.cos,
        )
    }

    fn inverse(&self, p: Point) -> Point {
        let (dx, dy) = (p.x - self.cx, p.y - self.cy);
        Point::new(
            self.cx + dx * self.cos + dy * self.sin,
            self.cy - dx * self.sin + dy * self.cos,
        )
    }
}

/// Renders a page; identical specs give bit-identical pages.
///
/// If the lines do not fit above the bottom margin, the page holds fewer
/// than `n_lines` baselines.
pub fn generate_page(spec: &SynthSpec) -> Result<SyntheticPage> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.page_w as f64, spec.page_h as f64);
    let margin_x = (0.08 * w).round();
    let margin_y = (0.08 * h).round();
    let top = margin_y + spec.leading;
    let bottom = h - margin_y;
    let gutter = (0.15 * w).round();
    let columns: Vec<(f64, f64)> = if spec.columns == 2 {
        let col_w = ((w - 2.0 * margin_x - gutter) / 2.0).floor();
        vec![
            (margin_x, margin_x + col_w),
            (margin_x + col_w + gutter, margin_x + 2.0 * col_w + gutter),
        ]
    } else {
        vec![(margin_x, w - margin_x)]
    };

    let angle = if spec.skew > 0.0 {
        rng.gen_range(-spec.skew..=spec.skew).to_radians()
    } else {
        0.0
    };
    let rot = Rotation {
        cx: w / 2.0,
        cy: h / 2.0,
        cos: angle.cos(),
        sin: angle.sin(),
    };

    let pad = (0.5 * spec.leading).max(0.02 * w);
    let side_pad = 0.01 * w;
    let mut raw_lines: Vec<(Point, Point)> = Vec::new();
    let mut raw_regions: Vec<[Point; 4]> = Vec::new();
    let mut strokes: Vec<Stroke> = Vec::new();
    let mut body_heights: Vec<f64> = Vec::new();

    let per_column = |c: usize| {
        let n = spec.n_lines;
        if columns.len() == 1 {
            n
        } else if c == 0 {
            n.div_ceil(2)
        } else {
            n / 2
        }
    };

    for (c, &(left, right)) in columns.iter().enumerate() {
        let col_w = right - left;
        let mut ys = Vec::new();
        for i in 0..per_column(c) {
            let y = top + i as f64 * spec.leading;
            if y > bottom {
                break;
            }
            let x0 = left + rng.gen_range(0.0..0.03) * col_w;
            let x1 = if rng.gen_bool(0.15) {
                left + rng.gen_range(0.35..0.75) * col_w
            } else {
                right - rng.gen_range(0.0..0.06) * col_w
            };
            let body = rng.gen_range(0.3..0.5) * spec.leading;
            raw_lines.push((Point::new(x0.round(), y), Point::new(x1.round(), y)));
            body_heights.push(body);
            ys.push(y);
        }
        if let (Some(&first), Some(&last)) = (ys.first(), ys.last()) {
            raw_regions.push(rect(left - side_pad, first - spec.leading, right + side_pad, last + pad));
        }
    }

    if spec.margin_text && !raw_lines.is_empty() {
        let note_x0 = (0.012 * w).round();
        let note_x1 = (0.062 * w).round();
        let n_main = raw_lines.len();
        let mut note_ys = Vec::new();
        for _ in 0..2 {
            let k = rng.gen_range(0..n_main.min(per_column(0)));
            let y = (top + (k as f64 + 0.5) * spec.leading).min(bottom);
            if !note_ys.contains(&y) {
                note_ys.push(y);
            }
        }
        note_ys.sort_by(f64::total_cmp);
        for &y in &note_ys {
            raw_lines.push((Point::new(note_x0, y), Point::new(note_x1, y)));
            body_heights.push(0.3 * spec.leading);
        }
        let (first, last) = (note_ys[0], note_ys[note_ys.len() - 1]);
        raw_regions.push(rect(
            note_x0 - 0.25 * pad,
            first - spec.leading,
            note_x1 + 0.25 * pad,
            last + 0.5 * pad,
        ));
    }

    for (&(s, e), &body) in raw_lines.iter().zip(&body_heights) {
        let mut x = s.x;
        while x < e.x {
            let len = rng.gen_range(0.02..0.08) * w;
            let x_end = (x + len).min(e.x);
            strokes.push(Stroke {
                baseline_y: s.y,
                x0: x,
                x1: x_end,
                height: body * rng.gen_range(0.85..1.15),
                ink: rng.gen_range(0.05..0.3),
            });
            x = x_end + rng.gen_range(0.006..0.015) * w;
        }
    }

    let baselines = raw_lines
        .iter()
        .map(|&(s, e)| Polyline::new(vec![rot.forward(s), rot.forward(e)]))
        .collect::<Result<Vec<_>>>()?;
    let regions = raw_regions
        .iter()
        .map(|r| Polyline::new(r.iter().map(|&p| rot.forward(p)).collect()))
        .collect::<Result<Vec<_>>>()?;

    let image = render(spec, &strokes, &rot);
    let props = DocumentProperties {
        spac: spec.leading_property(),
        dblp: if spec.columns == 2 { 1.0 } else { 0.0 },
        lnds: if spec.page_w > spec.page_h { 1.0 } else { 0.0 },
        notxt: if baselines.is_empty() { 1.0 } else { 0.0 },
    };
    Ok(SyntheticPage {
        image,
        baselines,
        regions,
        props,
    })
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> [Point; 4] {
    [
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ]
}

fn render(spec: &SynthSpec, strokes: &[Stroke], rot: &Rotation) -> ProbabilityGrid {
    let background_seed = spec.seed ^ 0x5EED_0F_9A9E;
    let mut image = ProbabilityGrid::from_fn(spec.page_w, spec.page_h, |x, y| {
        0.9 + 0.1 * pixel_noise(background_seed, x as i64, y as i64)
    });
    let ink_seed = spec.seed ^ 0x1A4C_0000;
    let (w, h) = (spec.page_w as i64, spec.page_h as i64);
    for s in strokes {
        let corners = [
            Point::new(s.x0, s.baseline_y - s.height),
            Point::new(s.x1, s.baseline_y - s.height),
            Point::new(s.x0, s.baseline_y),
            Point::new(s.x1, s.baseline_y),
        ]
        .map(|p| rot.forward(p));
        let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor() as i64;
        let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor() as i64;
        let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        for py in min_y.max(0)..=max_y.min(h - 1) {
            for px in min_x.max(0)..=max_x.min(w - 1) {
                let q = rot.inverse(Point::new(px as f64, py as f64));
                if q.x >= s.x0 && q.x <= s.x1 && q.y >= s.baseline_y - s.height && q.y <= s.baseline_y {
                    let v = s.ink + 0.15 * pixel_noise(ink_seed, px, py);
                    image.set(px as usize, py as usize, v.min(1.0));
                }
            }
        }
    }
    image
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_in_polygon;

    #[test]
    fn blank_page() {
        let page = generate_page(&SynthSpec {
            n_lines: 0,
            ..SynthSpec::default()
        })
        .unwrap();
        assert!(page.baselines.is_empty());
        assert!(page.regions.is_empty());
        assert_eq!(page.props.notxt, 1.0);
        assert!(page.image.values().iter().all(|&v| v >= 0.9));
    }

    #[test]
    fn two_columns() {
        let page = generate_page(&SynthSpec {
            columns: 2,
            n_lines: 20,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(page.props.dblp, 1.0);
        assert_eq!(page.regions.len(), 2);
        let a = page.regions[0].points();
        let b = page.regions[1].points();
        assert!(a.iter().all(|&p| !point_in_polygon(p, b)));
        assert!(b.iter().all(|&p| !point_in_polygon(p, a)));
        let max_a = a.iter().map(|p| p.x).fold(f64::MIN, f64::max);
        let min_b = b.iter().map(|p| p.x).fold(f64::MAX, f64::min);
        assert!(max_a < min_b);
    }

    #[test]
    fn line_count_and_determinism() {
        let spec = SynthSpec {
            n_lines: 12,
            leading: 40.0,
            seed: 99,
            ..SynthSpec::default()
        };
        let a = generate_page(&spec).unwrap();
        assert_eq!(a.baselines.len(), 12);
        assert_eq!(a, generate_page(&spec).unwrap());
        let other = generate_page(&SynthSpec { seed: 100, ..spec }).unwrap();
        assert_ne!(a.image, other.image);
    }

    #[test]
    fn baselines_inside_regions() {
        for seed in 0..8 {
            let page = generate_page(&SynthSpec {
                seed,
                skew: 3.0,
                columns: 1 + (seed % 2) as u8,
                margin_text: seed % 3 == 0,
                ..SynthSpec::default()
            })
            .unwrap();
            for b in &page.baselines {
                assert!(
                    b.points()
                        .iter()
                        .all(|&p| page.regions.iter().any(|r| point_in_polygon(p, r.points()))),
                    "seed {seed}"
                );
            }
        }
    }

    #[test]
    fn properties_follow_spec() {
        let page = generate_page(&SynthSpec {
            page_w: 2400,
            page_h: 1600,
            leading: 120.0,
            n_lines: 6,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(page.props.lnds, 1.0);
        assert_eq!(page.props.spac, 1.0);
        assert_eq!(page.props.notxt, 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_page(&SynthSpec { columns: 3, ..SynthSpec::default() }).is_err());
        assert!(generate_page(&SynthSpec { leading: 0.0, ..SynthSpec::default() }).is_err());
        assert!(generate_page(&SynthSpec { page_w: 10, ..SynthSpec::default() }).is_err());
    }
}
