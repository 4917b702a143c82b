//! Document-level properties and per-document prescaling.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::ProbabilityGrid;

/// Auxiliary page-level predictions, each a probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DocumentProperties {
    /// Large leading (distance between successive baselines).
    pub spac: f64,
    /// Page spans two pages.
    pub dblp: f64,
    /// Landscape orientation.
    pub lnds: f64,
    /// No text on the page.
    pub notxt: f64,
}

impl DocumentProperties {
    pub fn new(spac: f64, dblp: f64, lnds: f64, notxt: f64) -> Result<Self> {
        let p = Self {
            spac,
            dblp,
            lnds,
            notxt,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in self.entries() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{key}={v} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `(key, value)` pairs in canonical file order.
    pub fn entries(&self) -> [(&'static str, f64); 4] {
        [
            ("spac", self.spac),
            ("dblp", self.dblp),
            ("lnds", self.lnds),
            ("notxt", self.notxt),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leading {
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinarizedProperties {
    pub landscape: bool,
    pub double_page: bool,
    pub no_text: bool,
    pub leading: Leading,
}

/// Crisp page classes: flags are `> 0.5`; leading is small up to 0.3,
/// medium up to 0.6, large above.
pub fn binarize_properties(props: &DocumentProperties) -> BinarizedProperties {
    let leading = if props.spac <= 0.3 {
        Leading::Small
    } else if props.spac <= 0.6 {
        Leading::Medium
    } else {
        Leading::Large
    };
    BinarizedProperties {
        landscape: props.lnds > 0.5,
        double_page: props.dblp > 0.5,
        no_text: props.notxt > 0.5,
        leading,
    }
}

/// Candidate prescale widths plus the document-width normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleLadder {
    widths: Vec<usize>,
    w_max: f64,
}

impl ScaleLadder {
    pub fn new(widths: Vec<usize>, w_max: f64) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::InvalidParameter("scale ladder is empty".into()));
        }
        if widths.windows(2).any(|w| w[0] >= w[1]) || widths[0] == 0 {
            return Err(Error::InvalidParameter(
                "scale ladder widths must be positive and strictly increasing".into(),
            ));
        }
        if !(w_max > 0.0) {
            return Err(Error::InvalidParameter(format!("w_max must be positive, got {w_max}")));
        }
        Ok(Self { widths, w_max })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }
}

impl Default for ScaleLadder {
    /// Seven widths from 512 to 1280 in steps of 128, `w_max = 8000`.
    fn default() -> Self {
        Self::new(vec![512, 640, 768, 896, 1024, 1152, 1280], 8000.0).expect("valid constants")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleChoice {
    /// Unclamped scale index value.
    pub raw: f64,
    pub index: usize,
    pub target_width: usize,
}

/// Picks the prescale width for a `w x h` document.
///
/// ```text
/// i_s = n_s w / w_max + n_s/4 (2 + lnds + dblp - 4 spac)
///       - n_s/4 notxt        if notxt > 0.7
///       - n_s/4 (w/h - 1)    if w/h > 2
/// index = clamp(floor(i_s), 0, n_s - 1)
/// ```
pub fn scale_index(
    w: usize,
    h: usize,
    props: &DocumentProperties,
    ladder: &ScaleLadder,
) -> Result<ScaleChoice> {
    if w == 0 || h == 0 {
        return Err(Error::InvalidDocument(format!("nonpositive size {w}x{h}")));
    }
    let ns = ladder.len() as f64;
    let quarter = ns / 4.0;
    let (wf, hf) = (w as f64, h as f64);
    let mut raw = ns * wf / ladder.w_max + quarter * (2.0 + props.lnds + props.dblp - 4.0 * props.spac);
    if props.notxt > 0.7 {
        raw -= quarter * props.notxt;
    }
    let aspect = wf / hf;
    if aspect > 2.0 {
        raw -= quarter * (aspect - 1.0);
    }
    let index = (raw.floor().max(0.0) as usize).min(ladder.len() - 1);
    Ok(ScaleChoice {
        raw,
        index,
        target_width: ladder.widths[index],
    })
}

/// Output height for rescaling a `w x h` image to `target_width`.
pub fn scaled_height(w: usize, h: usize, target_width: usize) -> usize {
    ((h as f64 * target_width as f64 / w as f64).round() as usize).max(1)
}

/// Bilinear resample to `target_width`, preserving aspect ratio.
///
/// Pixel centers are aligned (`src = (dst + 0.5) * scale - 0.5`) and edge
/// samples are clamped, so equal sizes give the identity and constants stay
/// constant.
pub fn scale_image(grid: &ProbabilityGrid, target_width: usize) -> Result<ProbabilityGrid> {
    if target_width == 0 {
        return Err(Error::InvalidParameter("target width must be >= 1".into()));
    }
    let (w, h) = (grid.width(), grid.height());
    if w == 0 || h == 0 {
        return Err(Error::InvalidDocument("cannot scale an empty image".into()));
    }
    let tw = target_width;
    let th = scaled_height(w, h, tw);
    if tw == w && th == h {
        return Ok(grid.clone());
    }
    let sx = w as f64 / tw as f64;
    let sy = h as f64 / th as f64;
    let axis = |dst: usize, scale: f64, len: usize| {
        let src = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = src.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, src - i0 as f64)
    };
    let cols: Vec<_> = (0..tw).map(|x| axis(x, sx, w)).collect();
    Ok(ProbabilityGrid::from_fn(tw, th, |x, y| {
        let (y0, y1, fy) = axis(y, sy, h);
        let (x0, x1, fx) = cols[x];
        let top = grid.get(x0, y0) * (1.0 - fx) + grid.get(x1, y0) * fx;
        let bottom = grid.get(x0, y1) * (1.0 - fx) + grid.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }))
}

/// Pixel-center coordinate mapping between an original page and its
/// prescaled copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMap {
    pub sx: f64,
    pub sy: f64,
}

impl ScaleMap {
    pub fn new(orig_w: usize, orig_h: usize, scaled_w: usize, scaled_h: usize) -> Self {
        Self {
            sx: orig_w as f64 / scaled_w as f64,
            sy: orig_h as f64 / scaled_h as f64,
        }
    }

    pub fn to_scaled(&self, p: Point) -> Point {
        Point::new((p.x + 0.5) / self.sx - 0.5, (p.y + 0.5) / self.sy - 0.5)
    }

    pub fn to_original(&self, p: Point) -> Point {
        Point::new((p.x + 0.5) * self.sx - 0.5, (p.y + 0.5) * self.sy - 0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(spac: f64, dblp: f64, lnds: f64, notxt: f64) -> DocumentProperties {
        DocumentProperties::new(spac, dblp, lnds, notxt).unwrap()
    }

    #[test]
    fn worked_scale_examples() {
        let ladder = ScaleLadder::default();
        let c = scale_index(2000, 3000, &props(0.0, 0.0, 0.0, 0.0), &ladder).unwrap();
        assert_eq!((c.raw, c.index, c.target_width), (5.25, 5, 1152));
        let c = scale_index(2000, 3000, &props(1.0, 0.0, 0.0, 0.0), &ladder).unwrap();
        assert_eq!((c.raw, c.index, c.target_width), (-1.75, 0, 512));
        let c = scale_index(6000, 2000, &props(0.0, 0.0, 0.0, 0.0), &ladder).unwrap();
        assert_eq!((c.raw, c.index, c.target_width), (5.25, 5, 1152));
    }

    #[test]
    fn notxt_and_upper_clamp() {
        let ladder = ScaleLadder::default();
        let c = scale_index(8000, 5000, &props(0.0, 1.0, 1.0, 0.0), &ladder).unwrap();
        assert_eq!(c.index, 6);
        assert_eq!(c.target_width, 1280);
        let base = scale_index(2000, 3000, &props(0.0, 0.0, 0.0, 0.7), &ladder).unwrap();
        assert_eq!(base.raw, 5.25);
        let empty = scale_index(2000, 3000, &props(0.0, 0.0, 0.0, 1.0), &ladder).unwrap();
        assert_eq!(empty.raw, 3.5);
    }

    #[test]
    fn rejects_empty_documents() {
        let ladder = ScaleLadder::default();
        assert!(matches!(
            scale_index(0, 10, &DocumentProperties::default(), &ladder),
            Err(Error::InvalidDocument(_))
        ));
    }

    #[test]
    fn binarization_boundaries() {
        assert_eq!(binarize_properties(&props(0.3, 0.0, 0.0, 0.0)).leading, Leading::Small);
        assert_eq!(binarize_properties(&props(0.6, 0.0, 0.0, 0.0)).leading, Leading::Medium);
        assert!(!binarize_properties(&props(0.0, 0.0, 0.5, 0.0)).landscape);
        let b = binarize_properties(&props(0.9, 0.8, 0.0, 0.0));
        assert_eq!(b.leading, Leading::Large);
        assert!(b.double_page);
    }

    #[test]
    fn property_validation() {
        assert!(DocumentProperties::new(1.2, 0.0, 0.0, 0.0).is_err());
        assert!(DocumentProperties::new(0.0, f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn ladder_validation() {
        assert!(ScaleLadder::new(vec![], 10.0).is_err());
        assert!(ScaleLadder::new(vec![10, 10], 10.0).is_err());
        assert!(ScaleLadder::new(vec![10, 20], 0.0).is_err());
    }

    #[test]
    fn resampling() {
        let g = ProbabilityGrid::from_fn(192, 100, |x, y| ((x * 3 + y) % 7) as f64 / 7.0);
        assert_eq!(scale_image(&g, 192).unwrap(), g);
        let big = ProbabilityGrid::filled(384, 384, 0.25);
        let small = scale_image(&big, 192).unwrap();
        assert_eq!((small.width(), small.height()), (192, 192));
        assert!(small.values().iter().all(|&v| (v - 0.25).abs() < 1e-12));
        let up = scale_image(&ProbabilityGrid::filled(10, 7, 0.6), 33).unwrap();
        assert_eq!((up.width(), up.height()), (33, 23));
        assert!(up.values().iter().all(|&v| (v - 0.6).abs() < 1e-12));
    }

    #[test]
    fn scale_map_roundtrip() {
        let m = ScaleMap::new(1600, 2000, 1024, 1280);
        let p = Point::new(123.0, 456.0);
        let q = m.to_original(m.to_scaled(p));
        assert!((q.x - p.x).abs() < 1e-9 && (q.y - p.y).abs() < 1e-9);
    }
}
