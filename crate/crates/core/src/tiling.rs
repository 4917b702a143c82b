//! Sliding-window placement and overlap aggregation.
//!
//! A window of side `window` is fed to a classifier, which predicts the
//! central `prediction x prediction` square. Only the central `crop x crop`
//! square of that prediction is aggregated. Crop squares are laid on a
//! lattice with spacing `stride` anchored at the image origin and extended in
//! every direction until the image is covered, so each pixel receives the
//! same number of predictions (`(crop / stride)^2` when `stride` divides
//! `crop`). Window parts that fall outside the image read as zero and
//! aggregated cells outside the image are discarded.

use rayon::prelude::*;

use crate::classifier::{PixelClassifier, Window};
use crate::error::{Error, Result};
use crate::raster::{threshold, ProbabilityGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowGeometry {
    pub window: usize,
    pub prediction: usize,
    pub crop: usize,
    pub stride: usize,
}

impl WindowGeometry {
    /// Region network inference: 160 px windows, full-window predictions,
    /// stride 40.
    pub const REGION: Self = Self {
        window: 160,
        prediction: 160,
        crop: 160,
        stride: 40,
    };

    /// Baseline network inference: 320 px windows predicting the central
    /// 160 px, of which the central 80 px are kept, stride 40.
    pub const BASELINE: Self = Self {
        window: 320,
        prediction: 160,
        crop: 80,
        stride: 40,
    };

    pub fn validate(&self) -> Result<()> {
        let Self {
            window,
            prediction,
            crop,
            stride,
        } = *self;
        if stride == 0 || crop == 0 {
            return Err(Error::InvalidPlan("stride and crop must be positive".into()));
        }
        if stride > window {
            return Err(Error::InvalidPlan(format!("stride {stride} exceeds window {window}")));
        }
        if !(crop <= prediction && prediction <= window) {
            return Err(Error::InvalidPlan(format!(
                "need crop <= prediction <= window, got {crop}, {prediction}, {window}"
            )));
        }
        if crop < stride {
            return Err(Error::InvalidPlan(format!(
                "crop {crop} smaller than stride {stride} leaves pixels uncovered"
            )));
        }
        if (window - prediction) % 2 != 0 || (prediction - crop) % 2 != 0 {
            return Err(Error::InvalidPlan(
                "prediction and crop must be centerable (even size differences)".into(),
            ));
        }
        Ok(())
    }

    /// Offset of the prediction square inside the window.
    pub fn prediction_offset(&self) -> usize {
        (self.window - self.prediction) / 2
    }

    /// Offset of the crop square inside the prediction square.
    pub fn crop_offset_in_prediction(&self) -> usize {
        (self.prediction - self.crop) / 2
    }

    /// Offset of the crop square inside the window.
    pub fn crop_offset(&self) -> usize {
        (self.window - self.crop) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    /// Window origin in image coordinates (may be negative).
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    geometry: WindowGeometry,
    image_w: usize,
    image_h: usize,
    placements: Vec<Placement>,
}

fn lattice(len: usize, crop: usize, stride: usize) -> Vec<i64> {
    let (len, crop, stride) = (len as i64, crop as i64, stride as i64);
    // Smallest k with k*stride + crop > 0 and largest with k*stride < len.
    let k_min = (-crop).div_euclid(stride) + 1;
    let k_max = (len - 1).div_euclid(stride);
    (k_min..=k_max).map(|k| k * stride).collect()
}

/// Lays out windows over a `image_w x image_h` image.
pub fn plan_windows(image_w: usize, image_h: usize, geometry: WindowGeometry) -> Result<WindowPlan> {
    geometry.validate()?;
    if image_w == 0 || image_h == 0 {
        return Err(Error::InvalidPlan(format!("empty image {image_w}x{image_h}")));
    }
    let off = geometry.crop_offset() as i64;
    let xs = lattice(image_w, geometry.crop, geometry.stride);
    let ys = lattice(image_h, geometry.crop, geometry.stride);
    let placements = ys
        .iter()
        .flat_map(|&cy| xs.iter().map(move |&cx| Placement { x: cx - off, y: cy - off }))
        .collect();
    Ok(WindowPlan {
        geometry,
        image_w,
        image_h,
        placements,
    })
}

impl WindowPlan {
    pub fn geometry(&self) -> WindowGeometry {
        self.geometry
    }

    pub fn image_size(&self) -> (usize, usize) {
        (self.image_w, self.image_h)
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// Image-space origin of the aggregated crop square of a placement.
    pub fn crop_origin(&self, p: Placement) -> (i64, i64) {
        let off = self.geometry.crop_offset() as i64;
        (p.x + off, p.y + off)
    }

    /// Number of crop squares covering each pixel, row-major.
    pub fn coverage_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.image_w * self.image_h];
        let crop = self.geometry.crop as i64;
        for &p in &self.placements {
            let (cx, cy) = self.crop_origin(p);
            for y in cy.max(0)..(cy + crop).min(self.image_h as i64) {
                for x in cx.max(0)..(cx + crop).min(self.image_w as i64) {
                    counts[y as usize * self.image_w + x as usize] += 1;
                }
            }
        }
        counts
    }
}

/// Per-pixel running maximum of cropped predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAccumulator {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl MaxAccumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn for_plan(plan: &WindowPlan) -> Self {
        Self::new(plan.image_w, plan.image_h)
    }

    /// Folds a square patch whose top-left corner is at `(x0, y0)`.
    pub fn add_patch(&mut self, x0: i64, y0: i64, patch: &ProbabilityGrid) {
        let (pw, ph) = (patch.width() as i64, patch.height() as i64);
        let (w, h) = (self.width as i64, self.height as i64);
        for py in y0.max(0)..(y0 + ph).min(h) {
            let row = py as usize * self.width;
            for px in x0.max(0)..(x0 + pw).min(w) {
                let v = patch.get((px - x0) as usize, (py - y0) as usize);
                let slot = &mut self.values[row + px as usize];
                if v > *slot {
                    *slot = v;
                }
            }
        }
    }

    pub fn merge(mut self, other: &MaxAccumulator) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            if b > *a {
                *a = b;
            }
        }
        self
    }

    pub fn into_grid(self) -> ProbabilityGrid {
        ProbabilityGrid::new(self.width, self.height, self.values).expect("maxima of [0, 1] values")
    }
}

/// Binary page mask from already-cropped per-window predictions: a pixel is
/// foreground iff some covering prediction exceeds `threshold`.
pub fn aggregate(
    plan: &WindowPlan,
    predictions: &[ProbabilityGrid],
    threshold_value: f64,
) -> Result<ProbabilityGrid> {
    if predictions.len() != plan.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} placements",
            predictions.len(),
            plan.len()
        )));
    }
    let crop = plan.geometry.crop;
    let mut acc = MaxAccumulator::for_plan(plan);
    for (&p, pred) in plan.placements.iter().zip(predictions) {
        if pred.width() != crop || pred.height() != crop {
            return Err(Error::Dimension(format!(
                "prediction is {}x{}, expected {crop}x{crop}",
                pred.width(),
                pred.height()
            )));
        }
        let (cx, cy) = plan.crop_origin(p);
        acc.add_patch(cx, cy, pred);
    }
    Ok(threshold(&acc.into_grid(), threshold_value))
}

/// Classifies the placements selected by `indices` and folds their cropped
/// predictions into `acc`.
pub fn classify_placements<C: PixelClassifier + ?Sized>(
    image: &ProbabilityGrid,
    classifier: &C,
    plan: &WindowPlan,
    indices: impl IntoIterator<Item = usize>,
    acc: &mut MaxAccumulator,
) -> Result<()> {
    let g = plan.geometry;
    let inner = g.crop_offset_in_prediction() as i64;
    for i in indices {
        let p = plan.placements[i];
        let window = Window::new(image, p.x, p.y, g.window);
        let pred = classifier.classify(&window).map_err(|e| Error::Classifier {
            x: p.x,
            y: p.y,
            msg: e.to_string(),
        })?;
        if pred.width() != g.prediction || pred.height() != g.prediction {
            return Err(Error::Classifier {
                x: p.x,
                y: p.y,
                msg: format!(
                    "prediction is {}x{}, expected {}x{}",
                    pred.width(),
                    pred.height(),
                    g.prediction,
                    g.prediction
                ),
            });
        }
        let cropped = pred.crop(inner, inner, g.crop, g.crop);
        let (cx, cy) = plan.crop_origin(p);
        acc.add_patch(cx, cy, &cropped);
    }
    Ok(())
}

/// Result of one sliding-window pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassOutput {
    /// Per-pixel maximum over covering predictions.
    pub maxima: ProbabilityGrid,
    /// `maxima > threshold`.
    pub mask: ProbabilityGrid,
}

/// Runs the classifier over every placement and aggregates the page mask.
///
/// With `parallel` the placements are split into contiguous batches
/// classified on the rayon pool; the output is identical either way.
pub fn run_pipeline_pass<C: PixelClassifier + ?Sized>(
    image: &ProbabilityGrid,
    classifier: &C,
    geometry: WindowGeometry,
    threshold_value: f64,
    parallel: bool,
) -> Result<PassOutput> {
    if classifier.window_size() != geometry.window || classifier.prediction_size() != geometry.prediction {
        return Err(Error::InvalidPlan(format!(
            "classifier takes {}px windows predicting {}px, plan needs {} and {}",
            classifier.window_size(),
            classifier.prediction_size(),
            geometry.window,
            geometry.prediction
        )));
    }
    let plan = plan_windows(image.width(), image.height(), geometry)?;
    let acc = if parallel {
        let batch = plan.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
        let indices: Vec<usize> = (0..plan.len()).collect();
        indices
            .par_chunks(batch)
            .map(|chunk| {
                let mut acc = MaxAccumulator::for_plan(&plan);
                classify_placements(image, classifier, &plan, chunk.iter().copied(), &mut acc)?;
                Ok::<_, Error>(acc)
            })
            .try_reduce(|| MaxAccumulator::for_plan(&plan), |a, b| Ok(a.merge(&b)))?
    } else {
        let mut acc = MaxAccumulator::for_plan(&plan);
        classify_placements(image, classifier, &plan, 0..plan.len(), &mut acc)?;
        acc
    };
    let maxima = acc.into_grid();
    let mask = threshold(&maxima, threshold_value);
    Ok(PassOutput { maxima, mask })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_count(plan: &WindowPlan) -> u32 {
        plan.coverage_counts().into_iter().max().unwrap()
    }

    #[test]
    fn single_window_image() {
        let g = WindowGeometry::REGION;
        let plan = plan_windows(160, 160, WindowGeometry { stride: 160, ..g }).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.placements()[0], Placement { x: 0, y: 0 });
    }

    #[test]
    fn region_config_multiplicity() {
        let plan = plan_windows(192, 270, WindowGeometry::REGION).unwrap();
        let counts = plan.coverage_counts();
        assert_eq!(max_count(&plan), 16);
        assert!(counts.iter().all(|&c| c == 16));
    }

    #[test]
    fn baseline_config_multiplicity() {
        let plan = plan_windows(1024, 1400, WindowGeometry::BASELINE).unwrap();
        let counts = plan.coverage_counts();
        assert_eq!(max_count(&plan), 4);
        assert!(counts.iter().all(|&c| c == 4));
        // Crop sits 120 px inside the window.
        let p = plan.placements()[0];
        assert_eq!(plan.crop_origin(p), (p.x + 120, p.y + 120));
    }

    #[test]
    fn uneven_stride_still_covers() {
        let g = WindowGeometry {
            window: 64,
            prediction: 48,
            crop: 30,
            stride: 7,
        };
        let plan = plan_windows(101, 37, g).unwrap();
        let counts = plan.coverage_counts();
        assert!(counts.iter().all(|&c| (16..=25).contains(&c)));
    }

    #[test]
    fn invalid_geometries() {
        let bad = |window, prediction, crop, stride| {
            plan_windows(
                100,
                100,
                WindowGeometry {
                    window,
                    prediction,
                    crop,
                    stride,
                },
            )
            .is_err()
        };
        assert!(bad(160, 160, 30, 40));
        assert!(bad(160, 160, 160, 0));
        assert!(bad(160, 161, 80, 40));
        assert!(bad(160, 159, 81, 40));
        assert!(plan_windows(0, 10, WindowGeometry::REGION).is_err());
    }

    fn plan_and_preds(values: &[f64]) -> (WindowPlan, Vec<ProbabilityGrid>) {
        let g = WindowGeometry {
            window: 4,
            prediction: 4,
            crop: 4,
            stride: 2,
        };
        let plan = plan_windows(2, 2, g).unwrap();
        assert_eq!(plan.len(), 4);
        let preds = values
            .iter()
            .map(|&v| ProbabilityGrid::filled(4, 4, v))
            .collect();
        (plan, preds)
    }

    #[test]
    fn aggregation_rules() {
        let (plan, preds) = plan_and_preds(&[0.0; 4]);
        assert_eq!(aggregate(&plan, &preds, 0.5).unwrap().count_foreground(), 0);
        let (plan, preds) = plan_and_preds(&[0.1, 0.6, 0.1, 0.1]);
        assert_eq!(aggregate(&plan, &preds, 0.5).unwrap().count_foreground(), 4);
        let (plan, preds) = plan_and_preds(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(aggregate(&plan, &preds, 0.5).unwrap().count_foreground(), 0);
        assert!(matches!(aggregate(&plan, &preds[..3], 0.5), Err(Error::Dimension(_))));
        let mut wrong = preds.clone();
        wrong[0] = ProbabilityGrid::zeros(3, 3);
        assert!(aggregate(&plan, &wrong, 0.5).is_err());
    }
}
