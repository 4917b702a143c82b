//! Tolerance-based precision/recall of poly-baselines.
//!
//! Every polyline is sampled along its arc length. A sample is covered when
//! it lies within `tolerance` of some polyline of the other set. Any-coverage
//! matching is used: duplicate predictions are not penalized.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Point, Polyline};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub tolerance: f64,
    /// Fraction of covered samples needed to count a groundtruth line as
    /// matched.
    pub t_tf: f64,
    pub sample_step: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            tolerance: 20.0,
            t_tf: 0.75,
            sample_step: 1.0,
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.t_tf > 0.0 && self.t_tf <= 1.0) {
            return Err(Error::InvalidParameter(format!("tTF must be in (0, 1], got {}", self.t_tf)));
        }
        if !(self.sample_step > 0.0 && self.sample_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample step must be positive, got {}",
                self.sample_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub matched_gt: usize,
    pub gt_total: usize,
    /// Covered sample fraction per groundtruth line.
    pub line_coverage: Vec<f64>,
    pub gt_samples: usize,
    pub gt_covered: usize,
    pub pred_samples: usize,
    pub pred_covered: usize,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(covered: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        covered as f64 / total as f64
    }
}

impl EvalReport {
    fn from_counts(
        gt_samples: usize,
        gt_covered: usize,
        pred_samples: usize,
        pred_covered: usize,
        matched_gt: usize,
        line_coverage: Vec<f64>,
    ) -> Self {
        let precision = ratio(pred_covered, pred_samples);
        let recall = ratio(gt_covered, gt_samples);
        Self {
            precision,
            recall,
            f_score: harmonic(precision, recall),
            matched_gt,
            gt_total: line_coverage.len(),
            line_coverage,
            gt_samples,
            gt_covered,
            pred_samples,
            pred_covered,
        }
    }

    /// Micro-averaged combination over sample points.
    pub fn merge(&self, other: &EvalReport) -> EvalReport {
        let mut lines = self.line_coverage.clone();
        lines.extend_from_slice(&other.line_coverage);
        Self::from_counts(
            self.gt_samples + other.gt_samples,
            self.gt_covered + other.gt_covered,
            self.pred_samples + other.pred_samples,
            self.pred_covered + other.pred_covered,
            self.matched_gt + other.matched_gt,
            lines,
        )
    }

    /// `precision,recall,f,matched,total`
    pub fn machine_line(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{},{}",
            self.precision, self.recall, self.f_score, self.matched_gt, self.gt_total
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "precision  {:>8.4}", self.precision)?;
        writeln!(f, "recall     {:>8.4}", self.recall)?;
        writeln!(f, "f-score    {:>8.4}", self.f_score)?;
        write!(f, "matched    {:>8}/{}", self.matched_gt, self.gt_total)
    }
}

/// Points at multiples of `step` along the arc length, plus the final vertex.
pub fn sample_polyline(line: &Polyline, step: f64) -> Vec<Point> {
    let mut out = vec![line.first()];
    let mut next = step;
    let mut walked = 0.0;
    for (a, b) in line.edges() {
        let len = a.distance(b);
        while next <= walked + len {
            let t = (next - walked) / len;
            out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            next += step;
        }
        walked += len;
    }
    let last = line.last();
    if out.last().is_some_and(|p| p.distance(last) > 1e-9) {
        out.push(last);
    }
    out
}

struct Edges {
    edges: Vec<(Point, Point)>,
}

impl Edges {
    fn new(lines: &[Polyline]) -> Self {
        Self {
            edges: lines.iter().flat_map(|l| l.edges()).collect(),
        }
    }

    fn within(&self, p: Point, tol: f64) -> bool {
        self.edges.iter().any(|&(a, b)| {
            // cheap bounding-box rejection before the exact distance
            p.x >= a.x.min(b.x) - tol
                && p.x <= a.x.max(b.x) + tol
                && p.y >= a.y.min(b.y) - tol
                && p.y <= a.y.max(b.y) + tol
                && point_segment_distance(p, a, b) <= tol
        })
    }
}

fn coverage(lines: &[Polyline], other: &Edges, params: &EvalParams) -> (usize, usize, Vec<f64>) {
    let mut total = 0;
    let mut covered = 0;
    let mut per_line = Vec::with_capacity(lines.len());
    for line in lines {
        let samples = sample_polyline(line, params.sample_step);
        let hit = samples.iter().filter(|&&p| other.within(p, params.tolerance)).count();
        total += samples.len();
        covered += hit;
        per_line.push(hit as f64 / samples.len() as f64);
    }
    (total, covered, per_line)
}

pub fn evaluate(gt: &[Polyline], pred: &[Polyline], params: &EvalParams) -> Result<EvalReport> {
    params.validate()?;
    let (gt_samples, gt_covered, line_coverage) = coverage(gt, &Edges::new(pred), params);
    let (pred_samples, pred_covered, _) = coverage(pred, &Edges::new(gt), params);
    let matched = line_coverage.iter().filter(|&&c| c >= params.t_tf).count();
    Ok(EvalReport::from_counts(
        gt_samples,
        gt_covered,
        pred_samples,
        pred_covered,
        matched,
        line_coverage,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pts: &[(f64, f64)]) -> Polyline {
        Polyline::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn sampling_includes_endpoints() {
        let s = sample_polyline(&line(&[(0.0, 0.0), (100.0, 0.0)]), 1.0);
        assert_eq!(s.len(), 101);
        let s = sample_polyline(&line(&[(0.0, 0.0), (2.5, 0.0)]), 1.0);
        assert_eq!(s.len(), 4);
        assert_eq!(s[3], Point::new(2.5, 0.0));
        let s = sample_polyline(&line(&[(0.0, 0.0), (3.0, 0.0), (3.0, 4.0)]), 1.0);
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn identical_sets_score_one() {
        let gt = vec![line(&[(0.0, 0.0), (50.0, 3.0), (120.0, 1.0)]), line(&[(0.0, 60.0), (90.0, 60.0)])];
        let r = evaluate(&gt, &gt, &EvalParams::default()).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score), (1.0, 1.0, 1.0));
        assert_eq!((r.matched_gt, r.gt_total), (2, 2));
    }

    #[test]
    fn shifted_prediction_scores_zero() {
        let gt = vec![line(&[(0.0, 0.0), (100.0, 0.0)])];
        let pred = vec![line(&[(0.0, 30.0), (100.0, 30.0)])];
        let r = evaluate(&gt, &pred, &EvalParams::default()).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score, r.matched_gt), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn partial_cover() {
        let gt = vec![line(&[(0.0, 0.0), (100.0, 0.0)])];
        let pred = vec![line(&[(0.0, 0.0), (80.0, 0.0)])];
        let tight = EvalParams {
            tolerance: 0.5,
            ..EvalParams::default()
        };
        let r = evaluate(&gt, &pred, &tight).unwrap();
        assert!((r.recall - 81.0 / 101.0).abs() < 1e-12);
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.matched_gt, 1);
        // The 20 px tolerance reaches the uncovered tail.
        let r = evaluate(&gt, &pred, &EvalParams::default()).unwrap();
        assert_eq!(r.recall, 1.0);
    }

    #[test]
    fn empty_cases() {
        let gt = vec![line(&[(0.0, 0.0), (100.0, 0.0)])];
        let p = EvalParams::default();
        let r = evaluate(&gt, &[], &p).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score), (1.0, 0.0, 0.0));
        let r = evaluate(&[], &[], &p).unwrap();
        assert_eq!((r.precision, r.recall, r.f_score), (1.0, 1.0, 1.0));
        let r = evaluate(&[], &gt, &p).unwrap();
        assert_eq!((r.precision, r.f_score), (0.0, 0.0));
    }

    #[test]
    fn parameter_validation() {
        let bad = [
            EvalParams { tolerance: 0.0, ..EvalParams::default() },
            EvalParams { t_tf: 0.0, ..EvalParams::default() },
            EvalParams { t_tf: 1.1, ..EvalParams::default() },
            EvalParams { sample_step: -1.0, ..EvalParams::default() },
        ];
        for p in bad {
            assert!(evaluate(&[], &[], &p).is_err());
        }
    }

    #[test]
    fn merge_is_micro_average() {
        let gt = vec![line(&[(0.0, 0.0), (100.0, 0.0)])];
        let p = EvalParams::default();
        let a = evaluate(&gt, &gt, &p).unwrap();
        let b = evaluate(&gt, &[], &p).unwrap();
        let m = a.merge(&b);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.precision, 1.0);
        assert_eq!((m.matched_gt, m.gt_total), (1, 2));
        assert_eq!(m.machine_line(), "1.000000,0.500000,0.666667,1,2");
    }
}
