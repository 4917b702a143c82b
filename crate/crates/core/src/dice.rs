//! Dice coefficient with an inner evaluation mask and a surrounding ring
//! on which groundtruth replaces the prediction.
//!
//! For `n x n` grids `H` (prediction) and `Y` (groundtruth), square masks
//! `M(a, b)` select `a <= i, j <= b` (1-based, inclusive). With the inner mask
//! `MI` and the surrounding mask `MY`:
//!
//! ```text
//! Ybar = Y . MY
//! Hbar = H . MI + Y . (MY - MI)
//! D    = (2 S(Ybar . Hbar) + gamma) / (S(Ybar) + S(Hbar) + gamma)
//! ```
//!
//! where `.` is the elementwise product and `S` sums all entries. Only the
//! inner square of `H` influences `D`.

use crate::error::{Error, Result};
use crate::raster::ProbabilityGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiceMaskSpec {
    n: usize,
    inner: (usize, usize),
    outer: (usize, usize),
    gamma: f64,
}

impl DiceMaskSpec {
    pub const DEFAULT_GAMMA: f64 = 1.0;

    /// `inner = (a_I, b_I)`, `outer = (a_Y, b_Y)`, 1-based inclusive bounds
    /// satisfying `1 <= a_Y <= a_I <= b_I <= b_Y <= n`.
    pub fn new(n: usize, inner: (usize, usize), outer: (usize, usize), gamma: f64) -> Result<Self> {
        let (ai, bi) = inner;
        let (ay, by) = outer;
        if !(1 <= ay && ay <= ai && ai <= bi && bi <= by && by <= n) {
            return Err(Error::InvalidMaskSpec(format!(
                "need 1 <= a_Y <= a_I <= b_I <= b_Y <= n, got a_Y={ay} a_I={ai} b_I={bi} b_Y={by} n={n}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidMaskSpec(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self {
            n,
            inner,
            outer,
            gamma,
        })
    }

    /// Full-image masks: plain smoothed dice over the whole grid.
    pub fn full(n: usize, gamma: f64) -> Result<Self> {
        Self::new(n, (1, n), (1, n), gamma)
    }

    /// The training configuration of the 160-pixel baseline prediction:
    /// inner `M(40, 120)`, surrounding `M(37, 123)`.
    pub fn baseline_training() -> Self {
        Self::new(160, (40, 120), (37, 123), Self::DEFAULT_GAMMA).expect("valid constants")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inner(&self) -> (usize, usize) {
        self.inner
    }

    pub fn outer(&self) -> (usize, usize) {
        self.outer
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    fn in_square((a, b): (usize, usize), i: usize, j: usize) -> bool {
        // i, j are 0-based here.
        a <= i + 1 && i < b && a <= j + 1 && j < b
    }
}

/// `M(a, b)` on an `n x n` grid as a binary grid.
pub fn make_mask(n: usize, a: usize, b: usize) -> Result<ProbabilityGrid> {
    if !(1 <= a && a <= b && b <= n) {
        return Err(Error::InvalidMask { n, a, b });
    }
    Ok(ProbabilityGrid::from_fn(n, n, |x, y| {
        if DiceMaskSpec::in_square((a, b), y, x) {
            1.0
        } else {
            0.0
        }
    }))
}

/// The three sums entering `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct DiceSums {
    overlap: f64,
    truth: f64,
    prediction: f64,
}

fn check(h: &ProbabilityGrid, y: &ProbabilityGrid, spec: &DiceMaskSpec) -> Result<()> {
    let n = spec.n;
    for (name, g) in [("prediction", h), ("groundtruth", y)] {
        if g.width() != n || g.height() != n {
            return Err(Error::Dimension(format!(
                "{name} is {}x{}, mask spec expects {n}x{n}",
                g.width(),
                g.height()
            )));
        }
    }
    Ok(())
}

fn sums(h: &ProbabilityGrid, y: &ProbabilityGrid, spec: &DiceMaskSpec) -> DiceSums {
    let n = spec.n;
    let mut s = DiceSums {
        overlap: 0.0,
        truth: 0.0,
        prediction: 0.0,
    };
    let (ay, by) = spec.outer;
    for i in (ay - 1)..by {
        for j in (ay - 1)..by {
            let yv = y.values()[i * n + j];
            let hbar = if DiceMaskSpec::in_square(spec.inner, i, j) {
                h.values()[i * n + j]
            } else {
                yv
            };
            s.truth += yv;
            s.prediction += hbar;
            s.overlap += yv * hbar;
        }
    }
    s
}

/// The modified dice coefficient `D(H, Y)`, in `[0, 1]`.
pub fn modified_dice(h: &ProbabilityGrid, y: &ProbabilityGrid, spec: &DiceMaskSpec) -> Result<f64> {
    check(h, y, spec)?;
    let s = sums(h, y, spec);
    Ok((2.0 * s.overlap + spec.gamma) / (s.truth + s.prediction + spec.gamma))
}

/// `1 - D(H, Y)`.
pub fn dice_error(h: &ProbabilityGrid, y: &ProbabilityGrid, spec: &DiceMaskSpec) -> Result<f64> {
    Ok(1.0 - modified_dice(h, y, spec)?)
}

/// Analytic `dD/dH_ij` as a row-major `n x n` array.
///
/// Entries outside the inner mask are exactly zero.
pub fn dice_gradient(h: &ProbabilityGrid, y: &ProbabilityGrid, spec: &DiceMaskSpec) -> Result<Vec<f64>> {
    check(h, y, spec)?;
    let n = spec.n;
    let s = sums(h, y, spec);
    let num = 2.0 * s.overlap + spec.gamma;
    let den = s.truth + s.prediction + spec.gamma;
    let den2 = den * den;
    let mut grad = vec![0.0; n * n];
    let (ai, bi) = spec.inner;
    for i in (ai - 1)..bi {
        for j in (ai - 1)..bi {
            // Inner mask lies within the surrounding mask, so Ybar = Y here.
            let ybar = y.values()[i * n + j];
            grad[i * n + j] = (2.0 * ybar * den - num) / den2;
        }
    }
    Ok(grad)
}
