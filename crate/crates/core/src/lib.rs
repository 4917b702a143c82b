//! Baseline detection for document images.
//!
//! A page is prescaled according to its document properties, classified by
//! sliding windows, reduced to straight candidate segments via connected
//! components and least-squares fits, and assembled into poly-baselines.
//! Trained networks are out of scope: classifiers are pluggable through
//! [`PixelClassifier`], with an oracle and a precomputed-map implementation
//! provided.

pub mod classifier;
pub mod dice;
pub mod docmodel;
pub mod error;
pub mod eval;
pub mod formats;
pub mod geometry;
pub mod netspec;
pub mod pgm;
pub mod pipeline;
pub mod postproc;
pub mod raster;
pub mod synth;
pub mod tiling;

pub use classifier::{MapClassifier, OracleClassifier, OracleConfig, PixelClassifier, Window};
pub use dice::{dice_error, dice_gradient, make_mask, modified_dice, DiceMaskSpec};
pub use docmodel::{scale_image, scale_index, DocumentProperties, ScaleChoice, ScaleLadder, ScaleMap};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalParams, EvalReport};
pub use geometry::{fit_segment, LineSegment, Point, Polyline};
pub use netspec::{compute_shapes, count_aux_heads, NetSpec};
pub use pipeline::{detect, detect_synthetic, DetectConfig, Detection, MapSource, OracleNoise, OracleSource};
pub use postproc::{assemble, derive_params, prune, JoinParams, PruneParams};
pub use raster::{connected_components, polygonize_region, Connectivity, ProbabilityGrid};
pub use synth::{generate_page, SynthSpec, SyntheticPage};
pub use tiling::{plan_windows, run_pipeline_pass, WindowGeometry, WindowPlan};
