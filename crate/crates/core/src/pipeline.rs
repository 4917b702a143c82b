//! End-to-end baseline detection on one page.
//!
//! prescale -> optional region pass -> baseline pass -> components ->
//! segment fit -> region filter -> prune -> assemble. Segments are mapped
//! back to original page coordinates before the region filter, so all
//! post-processing distances are in document pixels.

use crate::classifier::{MapClassifier, OracleClassifier, OracleConfig, PixelClassifier};
use crate::docmodel::{scale_image, scale_index, scaled_height, DocumentProperties, ScaleChoice, ScaleLadder, ScaleMap};
use crate::error::Result;
use crate::geometry::{fit_segment, point_in_polygon, LineSegment, Polyline};
use crate::postproc::{assemble, derive_params, prune};
use crate::raster::{
    connected_components, draw_polyline, fill_polygon, polygonize_region, Connectivity, ProbabilityGrid,
};
use crate::synth::SyntheticPage;
use crate::tiling::{run_pipeline_pass, WindowGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub ladder: ScaleLadder,
    /// Width of the page copy the region network sees.
    pub region_width: usize,
    pub region_threshold: f64,
    pub region_min_component: usize,
    pub baseline_threshold: f64,
    pub baseline_min_component: usize,
    pub parallel: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            ladder: ScaleLadder::default(),
            region_width: 192,
            region_threshold: 0.5,
            region_min_component: 10,
            baseline_threshold: 0.5,
            baseline_min_component: 50,
            parallel: true,
        }
    }
}

/// Supplies the classifiers for one page, given the size of the prescaled
/// copy each one will see and the mapping back to page coordinates.
pub trait ClassifierSource {
    fn baseline_classifier(&self, w: usize, h: usize, map: &ScaleMap) -> Result<Box<dyn PixelClassifier>>;

    /// `None` skips the region pass.
    fn region_classifier(&self, w: usize, h: usize, map: &ScaleMap) -> Result<Option<Box<dyn PixelClassifier>>>;
}

/// Emission parameters shared by both oracle passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleNoise {
    pub p_fg: f64,
    pub p_bg: f64,
    pub flip_rate: f64,
    pub seed: u64,
}

impl OracleNoise {
    pub const EXACT: Self = Self {
        p_fg: 1.0,
        p_bg: 0.0,
        flip_rate: 0.0,
        seed: 0,
    };

    fn config(&self, groundtruth: ProbabilityGrid, stream: u64) -> Result<OracleConfig> {
        OracleConfig::new(
            groundtruth,
            self.p_fg,
            self.p_bg,
            self.flip_rate,
            self.seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F),
        )
    }
}

/// Baseline groundtruth is rendered as a band of this many pixels at the
/// prescaled resolution.
pub const ORACLE_BAND: f64 = 5.0;

/// Oracle classifiers built from page groundtruth in page coordinates.
#[derive(Debug, Clone)]
pub struct OracleSource {
    pub baselines: Vec<Polyline>,
    pub regions: Option<Vec<Polyline>>,
    pub noise: OracleNoise,
}

fn to_scaled(line: &Polyline, map: &ScaleMap) -> Option<Polyline> {
    Polyline::from_points_dedup(line.points().iter().map(|&p| map.to_scaled(p)).collect()).ok()
}

impl ClassifierSource for OracleSource {
    fn baseline_classifier(&self, w: usize, h: usize, map: &ScaleMap) -> Result<Box<dyn PixelClassifier>> {
        let mut gt = ProbabilityGrid::zeros(w, h);
        for line in self.baselines.iter().filter_map(|l| to_scaled(l, map)) {
            draw_polyline(&mut gt, &line, ORACLE_BAND)?;
        }
        let g = WindowGeometry::BASELINE;
        Ok(Box::new(OracleClassifier::new(self.noise.config(gt, 1)?, g.window, g.prediction)?))
    }

    fn region_classifier(&self, w: usize, h: usize, map: &ScaleMap) -> Result<Option<Box<dyn PixelClassifier>>> {
        let Some(regions) = &self.regions else {
            return Ok(None);
        };
        let mut gt = ProbabilityGrid::zeros(w, h);
        for poly in regions {
            let pts: Vec<_> = poly.points().iter().map(|&p| map.to_scaled(p)).collect();
            fill_polygon(&mut gt, &pts);
        }
        let g = WindowGeometry::REGION;
        Ok(Some(Box::new(OracleClassifier::new(self.noise.config(gt, 2)?, g.window, g.prediction)?)))
    }
}

/// Precomputed page-resolution probability maps, resampled to each pass.
#[derive(Debug, Clone)]
pub struct MapSource {
    pub baseline_map: ProbabilityGrid,
    pub region_map: Option<ProbabilityGrid>,
}

impl ClassifierSource for MapSource {
    fn baseline_classifier(&self, w: usize, _h: usize, _map: &ScaleMap) -> Result<Box<dyn PixelClassifier>> {
        let g = WindowGeometry::BASELINE;
        let map = scale_image(&self.baseline_map, w)?;
        Ok(Box::new(MapClassifier::new(map, g.window, g.prediction)?))
    }

    fn region_classifier(&self, w: usize, _h: usize, _map: &ScaleMap) -> Result<Option<Box<dyn PixelClassifier>>> {
        let Some(region) = &self.region_map else {
            return Ok(None);
        };
        let g = WindowGeometry::REGION;
        let map = scale_image(region, w)?;
        Ok(Some(Box::new(MapClassifier::new(map, g.window, g.prediction)?)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub baselines: Vec<Polyline>,
    /// Region polygons used for filtering, in page coordinates.
    pub regions: Option<Vec<Polyline>>,
    pub scale: ScaleChoice,
    /// Fitted segments in page coordinates, before any filtering.
    pub candidates: Vec<LineSegment>,
    /// Thresholded baseline mask at the prescaled resolution.
    pub baseline_mask: ProbabilityGrid,
    /// Thresholded region mask at the region resolution.
    pub region_mask: Option<ProbabilityGrid>,
}

/// Runs the region pass and turns its mask into page-coordinate polygons.
pub fn extract_regions(
    image: &ProbabilityGrid,
    source: &dyn ClassifierSource,
    cfg: &DetectConfig,
) -> Result<Option<(Vec<Polyline>, ProbabilityGrid)>> {
    let (w, h) = (image.width(), image.height());
    let rw = cfg.region_width;
    let rh = scaled_height(w, h, rw);
    let map = ScaleMap::new(w, h, rw, rh);
    let Some(classifier) = source.region_classifier(rw, rh, &map)? else {
        return Ok(None);
    };
    let small = scale_image(image, rw)?;
    let pass = run_pipeline_pass(&small, classifier.as_ref(), WindowGeometry::REGION, cfg.region_threshold, cfg.parallel)?;
    let comps = connected_components(&pass.mask, Connectivity::Four, cfg.region_min_component);
    let mut polygons = Vec::with_capacity(comps.len());
    for pixels in comps.pixel_lists() {
        let poly = polygonize_region(&pixels, rh)?;
        polygons.push(Polyline::new(poly.points().iter().map(|&p| map.to_original(p)).collect())?);
    }
    Ok(Some((polygons, pass.mask)))
}

fn inside_any(segment: &LineSegment, regions: &[Polyline]) -> bool {
    let m = segment.midpoint();
    regions.iter().any(|r| point_in_polygon(m, r.points()))
}

/// Detects the poly-baselines of a page.
///
/// Region polygons come from the source's region classifier when it has
/// one, otherwise from `regions`; with neither, no region filter applies.
pub fn detect(
    image: &ProbabilityGrid,
    props: &DocumentProperties,
    source: &dyn ClassifierSource,
    regions: Option<&[Polyline]>,
    cfg: &DetectConfig,
) -> Result<Detection> {
    props.validate()?;
    let (w, h) = (image.width(), image.height());
    let scale = scale_index(w, h, props, &cfg.ladder)?;
    let scaled = scale_image(image, scale.target_width)?;
    let map = ScaleMap::new(w, h, scaled.width(), scaled.height());

    let classifier = source.baseline_classifier(scaled.width(), scaled.height(), &map)?;
    let pass = run_pipeline_pass(
        &scaled,
        classifier.as_ref(),
        WindowGeometry::BASELINE,
        cfg.baseline_threshold,
        cfg.parallel,
    )?;
    let comps = connected_components(&pass.mask, Connectivity::Eight, cfg.baseline_min_component);
    let candidates = comps
        .pixel_lists()
        .iter()
        .map(|pixels| fit_segment(pixels).map(|s| s.map(|p| map.to_original(p))))
        .collect::<Result<Vec<_>>>()?;

    let (region_polys, region_mask) = match extract_regions(image, source, cfg)? {
        Some((polys, mask)) => (Some(polys), Some(mask)),
        None => (regions.map(<[Polyline]>::to_vec), None),
    };
    let kept: Vec<LineSegment> = match &region_polys {
        Some(polys) => candidates.iter().filter(|s| inside_any(s, polys)).copied().collect(),
        None => candidates.clone(),
    };

    let (prune_params, join_params) = derive_params(w as f64, props);
    let pruned = prune(&kept, &prune_params);
    let baselines = assemble(&pruned, &join_params);
    Ok(Detection {
        baselines,
        regions: region_polys,
        scale,
        candidates,
        baseline_mask: pass.mask,
        region_mask,
    })
}

/// Runs [`detect`] on a synthetic page with oracle classifiers built from
/// its own groundtruth, including the region pass.
pub fn detect_synthetic(page: &SyntheticPage, noise: OracleNoise, cfg: &DetectConfig) -> Result<Detection> {
    let source = OracleSource {
        baselines: page.baselines.clone(),
        regions: Some(page.regions.clone()),
        noise,
    };
    detect(&page.image, &page.props, &source, None, cfg)
}
