//! Per-window pixel classifiers.
//!
//! Trained networks are not part of this crate. [`OracleClassifier`] emits
//! probabilities derived from a groundtruth mask with deterministic,
//! coordinate-keyed label noise, and [`MapClassifier`] serves windows of a
//! precomputed page probability map (the adapter point for an external
//! model).

use crate::error::{Error, Result};
use crate::raster::ProbabilityGrid;

/// Read-only view of a square window of a page; cells outside the page read
/// as zero.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    image: &'a ProbabilityGrid,
    x: i64,
    y: i64,
    size: usize,
}

impl<'a> Window<'a> {
    pub fn new(image: &'a ProbabilityGrid, x: i64, y: i64, size: usize) -> Self {
        Self { image, x, y, size }
    }

    /// Window origin in page coordinates.
    pub fn origin(&self) -> (i64, i64) {
        (self.x, self.y)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, dx: usize, dy: usize) -> f64 {
        self.image.get_or_zero(self.x + dx as i64, self.y + dy as i64)
    }

    pub fn to_grid(&self) -> ProbabilityGrid {
        self.image.crop(self.x, self.y, self.size, self.size)
    }
}

/// A model mapping a `window_size` window to predictions for its central
/// `prediction_size` square.
///
/// Implementations must be deterministic for a given window (contents and
/// origin) and safe to call concurrently.
pub trait PixelClassifier: Send + Sync {
    fn window_size(&self) -> usize;
    fn prediction_size(&self) -> usize;
    fn classify(&self, window: &Window<'_>) -> Result<ProbabilityGrid>;
}

/// Counter-based uniform noise in `[0, 1)` keyed by seed and page pixel.
pub fn pixel_noise(seed: u64, x: i64, y: i64) -> f64 {
    // splitmix64 finalizer over a mixed key
    let mut z = seed
        .wrapping_add((x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Page-sized binary groundtruth.
    pub groundtruth: ProbabilityGrid,
    /// Emitted at groundtruth foreground.
    pub p_fg: f64,
    /// Emitted at groundtruth background.
    pub p_bg: f64,
    /// Probability of swapping `p_fg` and `p_bg` at a pixel.
    pub flip_rate: f64,
    pub seed: u64,
}

impl OracleConfig {
    pub fn new(groundtruth: ProbabilityGrid, p_fg: f64, p_bg: f64, flip_rate: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            groundtruth,
            p_fg,
            p_bg,
            flip_rate,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Noise-free oracle emitting exactly the groundtruth.
    pub fn exact(groundtruth: ProbabilityGrid) -> Self {
        Self {
            groundtruth,
            p_fg: 1.0,
            p_bg: 0.0,
            flip_rate: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_fg > 0.5 && self.p_fg <= 1.0 && self.p_bg >= 0.0 && self.p_bg <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "oracle needs 0.5 < p_fg <= 1 and 0 <= p_bg <= 0.5, got p_fg={} p_bg={}",
                self.p_fg, self.p_bg
            )));
        }
        if !(0.0..=1.0).contains(&self.flip_rate) {
            return Err(Error::InvalidParameter(format!(
                "flip_rate {} outside [0, 1]",
                self.flip_rate
            )));
        }
        Ok(())
    }

    /// Emission at a page pixel; pixels off the page count as background.
    pub fn emit(&self, x: i64, y: i64) -> f64 {
        let fg = self.groundtruth.get_or_zero(x, y) > 0.5;
        let flipped = self.flip_rate > 0.0 && pixel_noise(self.seed, x, y) < self.flip_rate;
        if fg != flipped {
            self.p_fg
        } else {
            self.p_bg
        }
    }
}

/// Groundtruth-backed classifier with per-page-pixel noise, so every window
/// covering a pixel sees the same emission there.
#[derive(Debug, Clone)]
pub struct OracleClassifier {
    cfg: OracleConfig,
    window_size: usize,
    prediction_size: usize,
}

impl OracleClassifier {
    pub fn new(cfg: OracleConfig, window_size: usize, prediction_size: usize) -> Result<Self> {
        cfg.validate()?;
        if prediction_size > window_size || (window_size - prediction_size) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "prediction {prediction_size} must fit centered in window {window_size}"
            )));
        }
        Ok(Self {
            cfg,
            window_size,
            prediction_size,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    /// Prediction for the window whose origin is `(x, y)`.
    pub fn classify_at(&self, x: i64, y: i64) -> ProbabilityGrid {
        let off = ((self.window_size - self.prediction_size) / 2) as i64;
        let (px, py) = (x + off, y + off);
        ProbabilityGrid::from_fn(self.prediction_size, self.prediction_size, |dx, dy| {
            self.cfg.emit(px + dx as i64, py + dy as i64)
        })
    }
}

impl PixelClassifier for OracleClassifier {
    fn window_size(&self) -> usize {
        self.window_size
    }

    fn prediction_size(&self) -> usize {
        self.prediction_size
    }

    fn classify(&self, window: &Window<'_>) -> Result<ProbabilityGrid> {
        if window.size() != self.window_size {
            return Err(Error::Dimension(format!(
                "window of {} px, classifier expects {}",
                window.size(),
                self.window_size
            )));
        }
        let (x, y) = window.origin();
        Ok(self.classify_at(x, y))
    }
}

/// Serves predictions from a page-aligned probability map.
#[derive(Debug, Clone)]
pub struct MapClassifier {
    map: ProbabilityGrid,
    window_size: usize,
    prediction_size: usize,
}

impl MapClassifier {
    pub fn new(map: ProbabilityGrid, window_size: usize, prediction_size: usize) -> Result<Self> {
        if prediction_size > window_size || (window_size - prediction_size) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "prediction {prediction_size} must fit centered in window {window_size}"
            )));
        }
        Ok(Self {
            map,
            window_size,
            prediction_size,
        })
    }
}

impl PixelClassifier for MapClassifier {
    fn window_size(&self) -> usize {
        self.window_size
    }

    fn prediction_size(&self) -> usize {
        self.prediction_size
    }

    fn classify(&self, window: &Window<'_>) -> Result<ProbabilityGrid> {
        let (x, y) = window.origin();
        let off = ((self.window_size - self.prediction_size) / 2) as i64;
        Ok(self
            .map
            .crop(x + off, y + off, self.prediction_size, self.prediction_size))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker(w: usize, h: usize) -> ProbabilityGrid {
        ProbabilityGrid::from_fn(w, h, |x, y| ((x / 3 + y / 2) % 2) as f64)
    }

    #[test]
    fn noise_is_uniformish_and_deterministic() {
        let n = 100_000;
        let mean: f64 = (0..n).map(|i| pixel_noise(7, i % 317, i / 317)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
        assert_eq!(pixel_noise(3, -4, 9), pixel_noise(3, -4, 9));
        assert_ne!(pixel_noise(3, -4, 9), pixel_noise(4, -4, 9));
    }

    #[test]
    fn zero_flip_maps_groundtruth() {
        let gt = checker(40, 40);
        let oracle = OracleClassifier::new(OracleConfig::new(gt.clone(), 0.9, 0.1, 0.0, 1).unwrap(), 20, 10).unwrap();
        let pred = oracle.classify_at(3, 7);
        for dy in 0..10 {
            for dx in 0..10 {
                let want = if gt.get(3 + 5 + dx, 7 + 5 + dy) > 0.5 { 0.9 } else { 0.1 };
                assert_eq!(pred.get(dx, dy), want);
            }
        }
    }

    #[test]
    fn full_flip_is_complement() {
        let gt = checker(30, 30);
        let oracle = OracleClassifier::new(OracleConfig::new(gt.clone(), 0.8, 0.2, 1.0, 5).unwrap(), 10, 10).unwrap();
        let pred = oracle.classify_at(10, 10);
        for dy in 0..10 {
            for dx in 0..10 {
                let want = if gt.get(10 + dx, 10 + dy) > 0.5 { 0.2 } else { 0.8 };
                assert_eq!(pred.get(dx, dy), want);
            }
        }
    }

    #[test]
    fn overlapping_windows_agree() {
        let gt = checker(200, 200);
        let oracle = OracleClassifier::new(OracleConfig::new(gt, 1.0, 0.0, 0.02, 11).unwrap(), 64, 32).unwrap();
        let a = oracle.classify_at(10, 20);
        let b = oracle.classify_at(30, 28);
        // a covers page [26, 58) x [36, 68); b covers [46, 78) x [44, 76)
        for y in 44..68 {
            for x in 46..58 {
                assert_eq!(a.get(x - 26, y - 36), b.get(x - 46, y - 44));
            }
        }
        assert_eq!(oracle.classify_at(10, 20), a);
    }

    #[test]
    fn config_validation() {
        let gt = ProbabilityGrid::zeros(4, 4);
        assert!(OracleConfig::new(gt.clone(), 0.5, 0.1, 0.0, 0).is_err());
        assert!(OracleConfig::new(gt.clone(), 0.9, 0.6, 0.0, 0).is_err());
        assert!(OracleConfig::new(gt.clone(), 0.9, 0.1, 1.5, 0).is_err());
        assert!(OracleClassifier::new(OracleConfig::exact(gt), 10, 7).is_err());
    }

    #[test]
    fn map_classifier_reads_centered_square() {
        let map = checker(50, 50);
        let c = MapClassifier::new(map.clone(), 20, 10).unwrap();
        let img = ProbabilityGrid::zeros(50, 50);
        let pred = c.classify(&Window::new(&img, -5, 12, 20)).unwrap();
        assert_eq!(pred, map.crop(0, 17, 10, 10));
    }
}
