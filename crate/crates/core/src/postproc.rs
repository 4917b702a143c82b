//! Candidate segment pruning and joining into poly-baselines.

use std::cmp::Ordering;

use crate::docmodel::DocumentProperties;
use crate::geometry::{angle_to_horizontal, chord_angle, is_covered_by, LineSegment, Point, Polyline};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneParams {
    /// Upper bound on the length of a short segment.
    pub l_max: f64,
    /// Short segments steeper than this (degrees) are dropped.
    pub alpha_max: f64,
    /// Coverage distance threshold.
    pub d_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinParams {
    pub d_x: f64,
    pub d_y: f64,
    /// Maximum deviation of a join target from the horizontal, degrees.
    pub d_alpha: f64,
}

/// Post-processing thresholds for a page of width `page_width`.
///
/// Double pages (`dblp > 0.7`) halve the length and horizontal-gap bounds;
/// the leading property widens both distance thresholds.
pub fn derive_params(page_width: f64, props: &DocumentProperties) -> (PruneParams, JoinParams) {
    let double = props.dblp > 0.7;
    let leading_slack = 20.0 + 50.0 * props.spac;
    let prune = PruneParams {
        l_max: page_width * if double { 0.05 } else { 0.1 },
        alpha_max: 30.0,
        d_max: leading_slack,
    };
    let join = JoinParams {
        d_x: page_width * if double { 0.1 } else { 0.2 },
        d_y: leading_slack,
        d_alpha: 50.0,
    };
    (prune, join)
}

/// Length at or below which a candidate counts as short:
/// `min(0.2 * mean_length, l_max)`.
pub fn short_length(candidates: &[LineSegment], l_max: f64) -> f64 {
    if candidates.is_empty() {
        return 0.0;
    }
    let mean = candidates.iter().map(|l| l.length()).sum::<f64>() / candidates.len() as f64;
    (0.2 * mean).min(l_max)
}

/// Removes short segments that are steeper than `alpha_max`, then short
/// segments covered by a strictly longer survivor of the first step.
///
/// Shortness is decided once, from the mean length of the input.
pub fn prune(candidates: &[LineSegment], params: &PruneParams) -> Vec<LineSegment> {
    let limit = short_length(candidates, params.l_max);
    prune_with_short_length(candidates, params, limit)
}

/// [`prune`] with an explicit shortness threshold.
pub fn prune_with_short_length(
    candidates: &[LineSegment],
    params: &PruneParams,
    short_len: f64,
) -> Vec<LineSegment> {
    let is_short = |l: &LineSegment| l.length() <= short_len;
    // Zero-length segments have no orientation and are dropped with the
    // disoriented ones.
    let oriented: Vec<LineSegment> = candidates
        .iter()
        .filter(|l| {
            !is_short(l)
                || angle_to_horizontal(l).is_ok_and(|a| a <= params.alpha_max)
        })
        .copied()
        .collect();
    oriented
        .iter()
        .filter(|l1| {
            !is_short(l1)
                || !oriented.iter().any(|l2| {
                    l2.length() > l1.length()
                        && is_covered_by(l1, l2, params.d_max).unwrap_or(false)
                })
        })
        .copied()
        .collect()
}

/// Start and end point of a join candidate (a segment, or the first and last
/// vertex of an assembled polyline).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinEnds {
    pub s: Point,
    pub e: Point,
}

impl From<&LineSegment> for JoinEnds {
    fn from(l: &LineSegment) -> Self {
        Self {
            s: l.start(),
            e: l.end(),
        }
    }
}

impl From<&Polyline> for JoinEnds {
    fn from(p: &Polyline) -> Self {
        Self {
            s: p.first(),
            e: p.last(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinPass {
    /// Only joins without horizontal overlap.
    Rightward,
    /// Overlapping (leftward) joins are admitted as a fallback.
    LeftwardAllowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JoinKind {
    NonOverlapping,
    Leftward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinChoice {
    pub target: usize,
    pub kind: JoinKind,
    /// Vertical gap for non-overlapping joins, endpoint distance for
    /// leftward joins.
    pub metric: f64,
}

impl JoinChoice {
    fn rank(&self, candidates: &[JoinEnds], other: &JoinChoice) -> Ordering {
        self.kind
            .cmp(&other.kind)
            .then(self.metric.total_cmp(&other.metric))
            .then(candidates[self.target].s.x.total_cmp(&candidates[other.target].s.x))
            .then(self.target.cmp(&other.target))
    }
}

/// Classifies `l2` as a join target for `l1`, if it is one.
pub fn join_kind(l1: &JoinEnds, l2: &JoinEnds, params: &JoinParams, pass: JoinPass) -> Option<JoinChoice> {
    let angle_ok = chord_angle(l2.s, l2.e).is_ok_and(|a| a <= params.d_alpha);
    let gap_x = l2.s.x - l1.e.x;
    let gap_y = (l2.s.y - l1.e.y).abs();
    if !angle_ok || gap_x.abs() > params.d_x || gap_y > params.d_y {
        return None;
    }
    if gap_x >= 0.0 {
        return Some(JoinChoice {
            target: usize::MAX,
            kind: JoinKind::NonOverlapping,
            metric: gap_y,
        });
    }
    let reach = l2.s.distance(l1.e);
    if pass == JoinPass::LeftwardAllowed && l2.e.x > l1.e.x && reach > params.d_x / 3.0 {
        return Some(JoinChoice {
            target: usize::MAX,
            kind: JoinKind::Leftward,
            metric: reach,
        });
    }
    None
}

/// The preferred join target of `candidates[index]`.
///
/// Non-overlapping joins beat leftward joins; within a kind the smaller
/// vertical gap (non-overlapping) or endpoint distance (leftward) wins, then
/// the smaller start x, then the lower index.
pub fn preferred_join(
    index: usize,
    candidates: &[JoinEnds],
    params: &JoinParams,
    pass: JoinPass,
) -> Option<JoinChoice> {
    let l1 = &candidates[index];
    candidates
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != index)
        .filter_map(|(j, l2)| {
            join_kind(l1, l2, params, pass).map(|c| JoinChoice { target: j, ..c })
        })
        .min_by(|a, b| a.rank(candidates, b))
}

/// Groups candidates into chains following preferred joins.
///
/// When several candidates prefer the same target, only the best-ranked
/// join into it is kept. Chains start at candidates no kept join points to;
/// candidates on join cycles stay single. Chains are ordered by their first
/// member.
fn link(candidates: &[JoinEnds], params: &JoinParams, pass: JoinPass) -> Vec<Vec<usize>> {
    let n = candidates.len();
    let prefs: Vec<Option<JoinChoice>> = (0..n)
        .map(|i| preferred_join(i, candidates, params, pass))
        .collect();

    let mut incoming: Vec<Option<usize>> = vec![None; n];
    for (i, pref) in prefs.iter().enumerate() {
        let Some(choice) = pref else { continue };
        let t = choice.target;
        let better = match incoming[t] {
            None => true,
            Some(k) => {
                let current = prefs[k].as_ref().expect("kept join exists");
                choice
                    .kind
                    .cmp(&current.kind)
                    .then(choice.metric.total_cmp(&current.metric))
                    .then(i.cmp(&k))
                    == Ordering::Less
            }
        };
        if better {
            incoming[t] = Some(i);
        }
    }
    let mut next: Vec<Option<usize>> = vec![None; n];
    for (t, src) in incoming.iter().enumerate() {
        if let Some(i) = *src {
            next[i] = Some(t);
        }
    }

    let mut visited = vec![false; n];
    let mut chains = Vec::new();
    for start in 0..n {
        if incoming[start].is_some() {
            continue;
        }
        let mut chain = Vec::new();
        let mut cur = Some(start);
        while let Some(c) = cur {
            visited[c] = true;
            chain.push(c);
            cur = next[c];
        }
        chains.push(chain);
    }
    chains.extend((0..n).filter(|&i| !visited[i]).map(|i| vec![i]));
    chains.sort_by_key(|c| c[0]);
    chains
}

fn chain_polyline(points: Vec<Point>) -> Polyline {
    match Polyline::from_points_dedup(points.clone()) {
        Ok(p) => p,
        Err(_) => Polyline::from(LineSegment::new(points[0], points[0])),
    }
}

/// Assembled baselines together with the input indices each one consumed,
/// in joining order.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub polylines: Vec<Polyline>,
    pub members: Vec<Vec<usize>>,
}

/// Two-pass joining: rightward joins on the segments, then a second pass on
/// the resulting polylines that also admits leftward joins.
pub fn assemble_indexed(candidates: &[LineSegment], params: &JoinParams) -> Assembly {
    let ends: Vec<JoinEnds> = candidates.iter().map(JoinEnds::from).collect();
    let first = link(&ends, params, JoinPass::Rightward);
    let first_lines: Vec<Polyline> = first
        .iter()
        .map(|chain| {
            chain_polyline(
                chain
                    .iter()
                    .flat_map(|&i| [candidates[i].start(), candidates[i].end()])
                    .collect(),
            )
        })
        .collect();

    let ends: Vec<JoinEnds> = first_lines.iter().map(JoinEnds::from).collect();
    let second = link(&ends, params, JoinPass::LeftwardAllowed);
    let mut polylines = Vec::with_capacity(second.len());
    let mut members = Vec::with_capacity(second.len());
    for chain in second {
        let points = chain
            .iter()
            .flat_map(|&k| first_lines[k].points().iter().copied())
            .collect();
        polylines.push(chain_polyline(points));
        members.push(chain.iter().flat_map(|&k| first[k].iter().copied()).collect());
    }
    Assembly { polylines, members }
}

pub fn assemble(candidates: &[LineSegment], params: &JoinParams) -> Vec<Polyline> {
    assemble_indexed(candidates, params).polylines
}
