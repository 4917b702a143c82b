//! Probability grids, binary masks, connected components and region
//! polygons.

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Point, Polyline};

/// Row-major grid of per-pixel foreground probabilities in `[0, 1]`.
///
/// A grid whose values are all 0 or 1 doubles as a binary mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbabilityGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidGrid(format!("value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!((0.0..=1.0).contains(&value), "fill value outside [0, 1]");
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    /// Builds a grid from a per-pixel function of `(x, y)`; values are
    /// clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Value at signed coordinates, 0 outside the grid.
    #[inline]
    pub fn get_or_zero(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0.0
        } else {
            self.values[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        debug_assert!((0.0..=1.0).contains(&v));
        self.values[y * self.width + x] = v;
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn count_foreground(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn same_shape(&self, other: &ProbabilityGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copies the `w x h` sub-grid whose top-left corner is at signed
    /// `(x0, y0)`; cells outside the source are 0.
    pub fn crop(&self, x0: i64, y0: i64, w: usize, h: usize) -> ProbabilityGrid {
        ProbabilityGrid::from_fn(w, h, |x, y| self.get_or_zero(x0 + x as i64, y0 + y as i64))
    }
}

/// Binary mask: 1 where `grid > t` (strictly), else 0.
pub fn threshold(grid: &ProbabilityGrid, t: f64) -> ProbabilityGrid {
    ProbabilityGrid {
        width: grid.width,
        height: grid.height,
        values: grid
            .values
            .iter()
            .map(|&v| if v > t { 1.0 } else { 0.0 })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(Error::InvalidParameter(format!("connectivity must be 4 or 8, got {v}"))),
        }
    }
}

/// Labeled components of a binary mask.
///
/// Label 0 is background; component `k` carries label `k` (1-based) and
/// labels follow the row-major order of each component's first pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl ComponentSet {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Pixel count of the component with label `id` (1-based).
    pub fn size(&self, id: u32) -> usize {
        self.sizes[id as usize - 1]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Pixel centers of every component, indexed by `label - 1`, each in
    /// row-major order.
    pub fn pixel_lists(&self) -> Vec<Vec<Point>> {
        let mut out: Vec<Vec<Point>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &l) in self.labels.iter().enumerate() {
            if l != 0 {
                out[l as usize - 1].push(Point::new((i % self.width) as f64, (i / self.width) as f64));
            }
        }
        out
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // Slot 0 is unused so provisional labels start at 1.
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        // Smaller root wins so roots stay the earliest provisional label.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Two-pass union-find labeling of the foreground (`> 0`) pixels.
///
/// Components with fewer than `min_size` pixels become background.
pub fn connected_components(
    mask: &ProbabilityGrid,
    connectivity: Connectivity,
    min_size: usize,
) -> ComponentSet {
    let (w, h) = (mask.width, mask.height);
    let mut provisional = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if mask.values[i] <= 0.0 {
                continue;
            }
            let mut label = 0u32;
            let mut visit = |n: u32, sets: &mut DisjointSet| {
                if n != 0 {
                    label = if label == 0 { sets.find(n) } else { sets.union(label, n) };
                }
            };
            if x > 0 {
                visit(provisional[i - 1], &mut sets);
            }
            if y > 0 {
                visit(provisional[i - w], &mut sets);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        visit(provisional[i - w - 1], &mut sets);
                    }
                    if x + 1 < w {
                        visit(provisional[i - w + 1], &mut sets);
                    }
                }
            }
            provisional[i] = if label == 0 { sets.make() } else { label };
        }
    }

    // Resolve roots and count; roots are visited in first-pixel order because
    // each root is the smallest provisional label of its set.
    let mut root_size = vec![0usize; sets.parent.len()];
    for p in provisional.iter_mut() {
        if *p != 0 {
            *p = sets.find(*p);
            root_size[*p as usize] += 1;
        }
    }
    let mut first_seen = vec![u32::MAX; sets.parent.len()];
    let mut order = Vec::new();
    for &p in &provisional {
        if p != 0 && first_seen[p as usize] == u32::MAX {
            first_seen[p as usize] = 0;
            order.push(p);
        }
    }
    let mut final_label = vec![0u32; sets.parent.len()];
    let mut sizes = Vec::new();
    for root in order {
        let size = root_size[root as usize];
        if size >= min_size.max(1) {
            sizes.push(size);
            final_label[root as usize] = sizes.len() as u32;
        }
    }
    let labels = provisional
        .into_iter()
        .map(|p| final_label[p as usize])
        .collect();
    ComponentSet {
        width: w,
        height: h,
        labels,
        sizes,
    }
}

/// Row sampling step for region polygons: `image_height / 30`, rounded,
/// never below one row.
pub fn polygon_row_step(image_height: usize) -> usize {
    ((image_height as f64 / 30.0).round() as usize).max(1)
}

/// Approximates a pixel set by a closed polygon.
///
/// Rows are sampled every [`polygon_row_step`] rows starting at the top row
/// of the component, and the bottom row is always included. For each sampled
/// row the leftmost and rightmost pixels are recorded; the polygon runs down
/// the left chain and back up the right chain. A single-pixel component
/// becomes the four corners of that pixel's cell.
pub fn polygonize_region(component: &[Point], image_height: usize) -> Result<Polyline> {
    if component.is_empty() {
        return Err(Error::EmptyInput("cannot polygonize an empty component"));
    }
    let top = component.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) as i64;
    let bottom = component.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) as i64;
    let rows = (bottom - top + 1) as usize;
    let mut extent = vec![(f64::INFINITY, f64::NEG_INFINITY); rows];
    for p in component {
        let r = &mut extent[(p.y as i64 - top) as usize];
        r.0 = r.0.min(p.x);
        r.1 = r.1.max(p.x);
    }

    let step = polygon_row_step(image_height);
    let mut sampled: Vec<usize> = (0..rows).step_by(step).collect();
    if *sampled.last().unwrap() != rows - 1 {
        sampled.push(rows - 1);
    }
    // Non-convex components can miss a sampled row entirely.
    sampled.retain(|&r| extent[r].0.is_finite());

    let y_of = |r: usize| (top + r as i64) as f64;
    let mut points: Vec<Point> = sampled
        .iter()
        .map(|&r| Point::new(extent[r].0, y_of(r)))
        .collect();
    points.extend(sampled.iter().rev().map(|&r| Point::new(extent[r].1, y_of(r))));
    points.dedup();
    if points.len() == 1 {
        let p = points[0];
        points = vec![
            Point::new(p.x - 0.5, p.y - 0.5),
            Point::new(p.x + 0.5, p.y - 0.5),
            Point::new(p.x + 0.5, p.y + 0.5),
            Point::new(p.x - 0.5, p.y + 0.5),
        ];
    }
    Polyline::new(points)
}

/// Rasterizes a polyline as a band `thickness` pixels wide.
///
/// For mostly horizontal edges (|dx| >= |dy|) every pixel column whose
/// center lies within the edge's x-range gets the pixels with
/// `-thickness/2 <= row - y(col) < thickness/2`; steeper edges use the same
/// rule with rows and columns swapped. Thickness 1 therefore produces one
/// pixel per step, the midpoint-rounded trace. Parts outside the canvas are
/// clipped.
pub fn rasterize_polyline(
    line: &Polyline,
    thickness: f64,
    width: usize,
    height: usize,
) -> Result<ProbabilityGrid> {
    let mut grid = ProbabilityGrid::zeros(width, height);
    draw_polyline(&mut grid, line, thickness)?;
    Ok(grid)
}

/// Burns a polyline band into an existing grid (see [`rasterize_polyline`]).
pub fn draw_polyline(grid: &mut ProbabilityGrid, line: &Polyline, thickness: f64) -> Result<()> {
    if !(thickness >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rasterization thickness must be >= 1, got {thickness}"
        )));
    }
    let half = thickness / 2.0;
    let (w, h) = (grid.width as i64, grid.height as i64);
    for (a, b) in line.edges() {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        if dx.abs() >= dy.abs() {
            let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
            let c0 = (lo.x.ceil() as i64).max(0);
            let c1 = (hi.x.floor() as i64).min(w - 1);
            for c in c0..=c1 {
                let yc = lo.y + (c as f64 - lo.x) * (hi.y - lo.y) / (hi.x - lo.x);
                let r0 = ((yc - half).ceil() as i64).max(0);
                let r1 = ((yc + half).ceil() as i64 - 1).min(h - 1);
                for r in r0..=r1 {
                    grid.set(c as usize, r as usize, 1.0);
                }
            }
        } else {
            let (lo, hi) = if a.y <= b.y { (a, b) } else { (b, a) };
            let r0 = (lo.y.ceil() as i64).max(0);
            let r1 = (hi.y.floor() as i64).min(h - 1);
            for r in r0..=r1 {
                let xc = lo.x + (r as f64 - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
                let c0 = ((xc - half).ceil() as i64).max(0);
                let c1 = ((xc + half).ceil() as i64 - 1).min(w - 1);
                for c in c0..=c1 {
                    grid.set(c as usize, r as usize, 1.0);
                }
            }
        }
    }
    Ok(())
}

/// Sets every pixel whose center lies inside the closed polygon.
pub fn fill_polygon(grid: &mut ProbabilityGrid, polygon: &[Point]) {
    if polygon.len() < 3 {
        return;
    }
    let y_min = polygon.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let y_max = polygon.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let x_min = polygon.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let x_max = polygon.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let r0 = (y_min.floor() as i64).max(0);
    let r1 = (y_max.ceil() as i64).min(grid.height as i64 - 1);
    let c0 = (x_min.floor() as i64).max(0);
    let c1 = (x_max.ceil() as i64).min(grid.width as i64 - 1);
    for r in r0..=r1 {
        for c in c0..=c1 {
            if point_in_polygon(Point::new(c as f64, r as f64), polygon) {
                grid.set(c as usize, r as usize, 1.0);
            }
        }
    }
}
