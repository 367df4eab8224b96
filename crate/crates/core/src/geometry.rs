//! Planar geometry of the menu layouts.
//!
//! Every coordinate is a 2D position in degrees of visual angle on the menu
//! plane. Item directions follow a fixed convention: item 0 points straight up
//! (+y) and the remaining items proceed clockwise at equal angular steps.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("item index {index} out of range for breadth {breadth}")]
    IndexOutOfRange { index: usize, breadth: usize },
    #[error("label radius {radius} is not positive")]
    NonPositiveLabelRadius { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    /// Counterclockwise angle from +x in radians, in (-pi, pi].
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates counterclockwise by `radians`.
    pub fn rotate(self, radians: T) -> Self {
        let (s, c) = radians.sin_cos();
        Self::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    pub fn lerp(self, other: Self, t: T) -> Self {
        self + (other - self) * t
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> AddAssign for Point2<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Real> Neg for Point2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Geometric parameters of a menu layout, all in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LayoutParams<T> {
    /// Diameter of the rendered visual anchor.
    pub d1_anchor_width: T,
    /// Diameter of the circular item selection zone around each anchor.
    pub d2_zone_width: T,
    /// Distance from a submenu center to its anchors (the menu size).
    pub d3_effective_radius: T,
    /// Radius of the rendered pie.
    pub d4_pie_radius: T,
    /// Distance from a label center to the edge of its selection zone.
    pub label_zone_margin: T,
    /// Radial width of the pEYE crust annulus.
    pub crust_width: T,
}

impl<T: Real> LayoutParams<T> {
    /// Replication layout for a given menu size: 1.5° anchors, 4° zones,
    /// pie radius two degrees inside the effective radius, 3° label margin
    /// and a crust as wide as a selection zone.
    pub fn for_size(d3: T) -> Self {
        Self {
            d1_anchor_width: T::lit(1.5),
            d2_zone_width: T::lit(4.0),
            d3_effective_radius: d3,
            d4_pie_radius: d3 - T::lit(2.0),
            label_zone_margin: T::lit(3.0),
            crust_width: T::lit(4.0),
        }
    }

    pub fn with_label_margin(mut self, margin: T) -> Self {
        self.label_zone_margin = margin;
        self
    }

    pub fn zone_radius(&self) -> T {
        self.d2_zone_width / T::lit(2.0)
    }

    pub fn label_radius(&self) -> T {
        self.d3_effective_radius - self.zone_radius() - self.label_zone_margin
    }
}

impl<T: Real> Default for LayoutParams<T> {
    fn default() -> Self {
        Self::for_size(T::lit(10.0))
    }
}

fn check_index(index: usize, breadth: usize) -> Result<(), GeometryError> {
    if breadth == 0 || index >= breadth {
        Err(GeometryError::IndexOutOfRange { index, breadth })
    } else {
        Ok(())
    }
}

/// Angular width of one sector in radians.
pub fn sector_width<T: Real>(breadth: usize) -> T {
    T::TAU() / T::from_usize_lossy(breadth)
}

/// Counterclockwise angle (radians, from +x) of item `index`.
pub fn item_angle<T: Real>(index: usize, breadth: usize) -> T {
    T::FRAC_PI_2() - T::from_usize_lossy(index) * sector_width::<T>(breadth)
}

/// Unit vector pointing from a submenu center toward item `index`.
pub fn item_direction<T: Real>(index: usize, breadth: usize) -> Result<Point2<T>, GeometryError> {
    check_index(index, breadth)?;
    // Quarter turns are returned exactly so axis-aligned layouts stay exact.
    if (4 * index) % breadth == 0 {
        let (x, y) = [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)][4 * index / breadth];
        return Ok(Point2::new(T::lit(x), T::lit(y)));
    }
    let (s, c) = item_angle::<T>(index, breadth).sin_cos();
    Ok(Point2::new(c, s))
}

pub fn anchor_position<T: Real>(
    center: Point2<T>,
    index: usize,
    breadth: usize,
    params: &LayoutParams<T>,
) -> Result<Point2<T>, GeometryError> {
    Ok(center + item_direction(index, breadth)? * params.d3_effective_radius)
}

/// Cumulative anchor positions along `indices`; element `k` is the center of
/// the submenu shown at level `k + 2`.
pub fn lattice_points<T: Real>(
    root: Point2<T>,
    indices: &[usize],
    breadth: usize,
    params: &LayoutParams<T>,
) -> Result<Vec<Point2<T>>, GeometryError> {
    let mut center = root;
    let mut out = Vec::with_capacity(indices.len());
    for &index in indices {
        center = anchor_position(center, index, breadth, params)?;
        out.push(center);
    }
    Ok(out)
}

/// Inclusive disk test against the selection zone of `anchor`.
pub fn selection_zone_contains<T: Real>(p: Point2<T>, anchor: Point2<T>, params: &LayoutParams<T>) -> bool {
    (p - anchor).norm() <= params.zone_radius()
}

/// Inclusive disk test against the visual pie.
pub fn pie_contains<T: Real>(p: Point2<T>, center: Point2<T>, params: &LayoutParams<T>) -> bool {
    (p - center).norm() <= params.d4_pie_radius
}

/// Label center for item `index`, placed on the item's axis so that the
/// distance from the label center to the selection zone edge equals the
/// label margin.
pub fn label_position<T: Real>(
    center: Point2<T>,
    index: usize,
    breadth: usize,
    params: &LayoutParams<T>,
) -> Result<Point2<T>, GeometryError> {
    let dir = item_direction(index, breadth)?;
    let radius = params.label_radius();
    if radius <= T::zero() {
        return Err(GeometryError::NonPositiveLabelRadius { radius: radius.to_f64_lossy() });
    }
    Ok(center + dir * radius)
}

/// Distance from a label center to the nearest point of its own selection zone.
pub fn label_zone_distance<T: Real>(params: &LayoutParams<T>) -> T {
    (params.d3_effective_radius - params.label_radius()) - params.zone_radius()
}

/// Sector index containing the direction `offset` (relative to a submenu center).
///
/// Sector `i` spans item angle `i` plus or minus half a sector width. A
/// direction exactly on a boundary belongs to the lower of the two indices.
pub fn sector_index<T: Real>(offset: Point2<T>, breadth: usize) -> usize {
    let tau = T::TAU();
    // clockwise angle from +y, normalised to [0, tau)
    let mut cw = (T::FRAC_PI_2() - offset.angle()) % tau;
    if cw < T::zero() {
        cw = cw + tau;
    }
    if cw >= tau {
        cw = cw - tau;
    }
    let n = T::from_usize_lossy(breadth);
    let u = cw / sector_width::<T>(breadth) - T::lit(0.5);
    if u == n - T::one() {
        // boundary between the last sector and sector 0
        return 0;
    }
    let k = u.ceil().to_usize().unwrap_or(0);
    k % breadth
}

/// First crossing of the segment `p0 -> p1` out through the circle of
/// `radius` around `center`, together with the sector it exits through.
///
/// Returns `None` unless `p0` is inside or on the circle and `p1` strictly
/// outside it.
pub fn segment_circle_crossing<T: Real>(
    p0: Point2<T>,
    p1: Point2<T>,
    center: Point2<T>,
    radius: T,
    breadth: usize,
) -> Option<(Point2<T>, usize)> {
    let a0 = p0 - center;
    let a1 = p1 - center;
    let r2 = radius * radius;
    if a0.norm_sq() > r2 || a1.norm_sq() <= r2 {
        return None;
    }
    let d = a1 - a0;
    let a = d.norm_sq();
    let b = a0.dot(d);
    let c = a0.norm_sq() - r2;
    // c <= 0 < a, so the discriminant is non-negative and the larger root is in [0, 1].
    let disc = (b * b - a * c).max(T::zero()).sqrt();
    let t = if b >= T::zero() {
        // avoid cancellation: t = -c / (b + disc)
        let q = b + disc;
        if q > T::zero() {
            -c / q
        } else {
            T::zero()
        }
    } else {
        (disc - b) / a
    };
    let t = t.max(T::zero()).min(T::one());
    let on_segment = a0 + d * t;
    let norm = on_segment.norm();
    let rel = if norm > T::zero() { on_segment * (radius / norm) } else { d * (radius / a.sqrt()) };
    Some((center + rel, sector_index(rel, breadth)))
}

/// pEYE crust test: the sector index if `p` lies in the annulus
/// `[d3, d3 + crust_width]` around `center`.
pub fn crust_contains<T: Real>(
    p: Point2<T>,
    center: Point2<T>,
    breadth: usize,
    params: &LayoutParams<T>,
) -> Option<usize> {
    let rel = p - center;
    let r = rel.norm();
    let inner = params.d3_effective_radius;
    let outer = inner + params.crust_width;
    if r >= inner && r <= outer {
        Some(sector_index(rel, breadth))
    } else {
        None
    }
}

/// Distance from `p` to the segment `a -> b`.
pub fn point_segment_distance<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}

/// Distance from `p` to the nearest point of a polyline.
pub fn polyline_distance<T: Real>(p: Point2<T>, vertices: &[Point2<T>]) -> T {
    match vertices {
        [] => T::infinity(),
        [only] => p.distance(*only),
        _ => vertices
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(T::infinity(), T::min),
    }
}

pub const MIN_LABEL_ZONE_DISTANCE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// Anchor, zone and effective radius are not strictly increasing, or the
    /// pie is larger than the effective radius.
    ParameterOrder { detail: String },
    /// Neighbouring selection zones touch or overlap.
    SiblingZonesOverlap { spacing: f64, zone_width: f64 },
    NonPositiveLabelRadius { radius: f64 },
    /// Labels sit closer than 3° to their selection zones.
    LabelTooCloseToZone { distance: f64, minimum: f64 },
    /// The visual pie reaches into the selection zones.
    PieOverlapsZones { pie_radius: f64, limit: f64 },
    BreadthOutOfRange { breadth: usize },
}

impl Violation {
    /// Whether the layout is geometrically unusable. A label placed closer
    /// than the guideline distance still yields a working menu.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, Violation::LabelTooCloseToZone { .. })
    }
}

/// Checks a layout for geometric feasibility; an empty list means valid.
pub fn validate_layout<T: Real>(params: &LayoutParams<T>, breadth: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let p = params;
    let finite = [
        p.d1_anchor_width,
        p.d2_zone_width,
        p.d3_effective_radius,
        p.d4_pie_radius,
        p.label_zone_margin,
        p.crust_width,
    ]
    .iter()
    .all(|v| v.is_finite());
    if !finite {
        out.push(Violation::ParameterOrder { detail: "non-finite parameter".into() });
        return out;
    }
    if !(2..=12).contains(&breadth) {
        out.push(Violation::BreadthOutOfRange { breadth });
        return out;
    }
    if !(p.d1_anchor_width > T::zero() && p.d1_anchor_width < p.d2_zone_width && p.d2_zone_width < p.d3_effective_radius)
    {
        out.push(Violation::ParameterOrder {
            detail: format!(
                "expected 0 < d1 < d2 < d3, got d1={} d2={} d3={}",
                p.d1_anchor_width, p.d2_zone_width, p.d3_effective_radius
            ),
        });
    }
    if p.d4_pie_radius > p.d3_effective_radius {
        out.push(Violation::ParameterOrder {
            detail: format!("pie radius {} exceeds effective radius {}", p.d4_pie_radius, p.d3_effective_radius),
        });
    }
    let half = T::PI() / T::from_usize_lossy(breadth);
    let spacing = T::lit(2.0) * p.d3_effective_radius * half.sin();
    if spacing <= p.d2_zone_width {
        out.push(Violation::SiblingZonesOverlap {
            spacing: spacing.to_f64_lossy(),
            zone_width: p.d2_zone_width.to_f64_lossy(),
        });
    }
    let label_radius = p.label_radius();
    if label_radius <= T::zero() {
        out.push(Violation::NonPositiveLabelRadius { radius: label_radius.to_f64_lossy() });
    }
    let distance = label_zone_distance(p).to_f64_lossy();
    if distance < MIN_LABEL_ZONE_DISTANCE {
        out.push(Violation::LabelTooCloseToZone { distance, minimum: MIN_LABEL_ZONE_DISTANCE });
    }
    let limit = p.d3_effective_radius - p.zone_radius();
    if p.d4_pie_radius > limit {
        out.push(Violation::PieOverlapsZones {
            pie_radius: p.d4_pie_radius.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Point2<f64>;

    fn close(a: P, b: P) -> bool {
        a.distance(b) < 1e-9
    }

    fn params(d3: f64) -> LayoutParams<f64> {
        LayoutParams::for_size(d3)
    }

    #[test]
    fn directions_follow_clockwise_from_up() {
        assert!(close(item_direction(0, 4).unwrap(), P::new(0.0, 1.0)));
        assert!(close(item_direction(1, 4).unwrap(), P::new(1.0, 0.0)));
        let d = item_direction::<f64>(1, 6).unwrap();
        assert!((d.x - 0.8660254037844386).abs() < 1e-12 && (d.y - 0.5).abs() < 1e-12);
        assert_eq!(
            item_direction::<f64>(4, 4),
            Err(GeometryError::IndexOutOfRange { index: 4, breadth: 4 })
        );
    }

    #[test]
    fn anchors_and_lattice() {
        let p = params(10.0);
        let o = P::origin();
        assert!(close(anchor_position(o, 0, 4, &p).unwrap(), P::new(0.0, 10.0)));
        assert!(close(anchor_position(o, 2, 4, &p).unwrap(), P::new(0.0, -10.0)));
        assert!(close(anchor_position(P::new(0.0, 10.0), 1, 4, &p).unwrap(), P::new(10.0, 10.0)));

        let two = lattice_points(o, &[0, 0], 4, &p).unwrap();
        assert!(close(two[0], P::new(0.0, 10.0)) && close(two[1], P::new(0.0, 20.0)));
        let turn = lattice_points(o, &[0, 1], 4, &p).unwrap();
        assert!(close(turn[1], P::new(10.0, 10.0)));
        let three = lattice_points(o, &[0, 1, 2], 4, &p).unwrap();
        assert_eq!(three.len(), 3);
        assert!(close(three[2], P::new(10.0, 0.0)));
    }

    #[test]
    fn zone_and_pie_boundaries_are_inclusive() {
        let p = params(10.0);
        let anchor = P::new(0.0, 10.0);
        assert!(selection_zone_contains(P::new(0.0, 10.9), anchor, &p));
        assert!(!selection_zone_contains(P::new(0.0, 12.1), anchor, &p));
        assert!(selection_zone_contains(P::new(2.0, 10.0), anchor, &p));

        let pie = LayoutParams { d4_pie_radius: 8.0, ..p };
        assert!(pie_contains(P::new(0.0, 7.9), P::origin(), &pie));
        assert!(!pie_contains(P::new(0.0, 8.1), P::origin(), &pie));
        assert!(pie_contains(P::origin(), P::origin(), &pie));
    }

    #[test]
    fn labels_sit_margin_away_from_zone() {
        let p = params(10.0);
        assert!(close(label_position(P::origin(), 0, 4, &p).unwrap(), P::new(0.0, 5.0)));
        let small = params(8.0);
        assert!(close(label_position(P::origin(), 0, 4, &small).unwrap(), P::new(0.0, 3.0)));
        assert_eq!(label_zone_distance(&p), 3.0);
        let cramped = LayoutParams { d3_effective_radius: 5.0, ..p };
        assert!(matches!(
            label_position(P::origin(), 0, 4, &cramped),
            Err(GeometryError::NonPositiveLabelRadius { .. })
        ));
    }

    #[test]
    fn crossing_examples() {
        let (pt, idx) = segment_circle_crossing(P::new(0.0, 9.0), P::new(0.0, 11.0), P::origin(), 10.0, 4).unwrap();
        assert!(close(pt, P::new(0.0, 10.0)));
        assert_eq!(idx, 0);
        let (pt, idx) = segment_circle_crossing(P::origin(), P::new(8.8, 6.6), P::origin(), 10.0, 4).unwrap();
        assert!(close(pt, P::new(8.0, 6.0)));
        assert_eq!(idx, 1);
        assert!(segment_circle_crossing(P::new(0.0, 3.0), P::new(0.0, 6.0), P::origin(), 10.0, 4).is_none());
        // inward crossings are not exits
        assert!(segment_circle_crossing(P::new(0.0, 11.0), P::new(0.0, 9.0), P::origin(), 10.0, 4).is_none());
    }

    #[test]
    fn boundary_directions_resolve_to_lower_index() {
        // 45° clockwise from up separates items 0 and 1
        let diag = P::new(1.0, 1.0);
        assert_eq!(sector_index(diag, 4), 0);
        // between the last item and item 0
        assert_eq!(sector_index(P::new(-1.0, 1.0), 4), 0);
        assert_eq!(sector_index(P::new(1.0, -1.0), 4), 1);
        assert_eq!(sector_index(P::new(0.0, -1.0), 4), 2);
        assert_eq!(sector_index(P::new(-1.0, 0.0), 4), 3);
    }

    #[test]
    fn crust_examples() {
        let p = params(10.0);
        assert_eq!(crust_contains(P::new(0.0, 11.0), P::origin(), 4, &p), Some(0));
        assert_eq!(crust_contains(P::new(0.0, 15.0), P::origin(), 4, &p), None);
        assert_eq!(crust_contains(P::new(11.0, 0.0), P::origin(), 4, &p), Some(1));
        assert_eq!(crust_contains(P::new(0.0, 9.0), P::origin(), 4, &p), None);
    }

    #[test]
    fn validation_examples() {
        let ok = LayoutParams { d4_pie_radius: 6.0, ..params(8.0) };
        assert!(validate_layout(&ok, 6).is_empty());
        let tight = LayoutParams { d3_effective_radius: 3.0, d4_pie_radius: 1.0, ..params(8.0) };
        let v = validate_layout(&tight, 6);
        assert!(v.iter().any(|v| matches!(v, Violation::SiblingZonesOverlap { .. })), "{v:?}");
        assert!(params(8.0).label_radius() > 0.0);
        assert!(validate_layout(&params(8.0), 4).is_empty());

        let close_labels = params(10.0).with_label_margin(1.0);
        let v = validate_layout(&close_labels, 4);
        assert_eq!(v.len(), 1);
        assert!(!v[0].is_fatal());

        let fat_pie = LayoutParams { d4_pie_radius: 9.0, ..params(10.0) };
        assert!(validate_layout(&fat_pie, 4).iter().any(|v| matches!(v, Violation::PieOverlapsZones { .. })));
        assert!(matches!(validate_layout(&params(10.0), 13)[0], Violation::BreadthOutOfRange { .. }));
    }

    #[test]
    fn sibling_spacing_matches_pairwise_anchor_distances() {
        for breadth in [4usize, 6] {
            for d3 in [8.0, 10.0, 12.0] {
                let p = params(d3);
                let anchors: Vec<P> =
                    (0..breadth).map(|i| anchor_position(P::origin(), i, breadth, &p).unwrap()).collect();
                let mut min = f64::INFINITY;
                for i in 0..breadth {
                    for j in i + 1..breadth {
                        min = min.min(anchors[i].distance(anchors[j]));
                    }
                }
                assert!(min > p.d2_zone_width);
                assert!(validate_layout(&p, breadth).is_empty());
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let p = LayoutParams::<f32>::for_size(10.0);
        let a = anchor_position(Point2::<f32>::origin(), 1, 4, &p).unwrap();
        assert!((a.x - 10.0).abs() < 1e-5 && a.y.abs() < 1e-5);
        let hit = segment_circle_crossing(Point2::new(0.0f32, 9.0), Point2::new(0.0, 11.0), Point2::origin(), 10.0, 4);
        assert_eq!(hit.map(|h| h.1), Some(0));
    }

    #[test]
    fn polyline_distance_basics() {
        let line = [P::origin(), P::new(0.0, 10.0), P::new(10.0, 10.0)];
        assert_eq!(polyline_distance(P::new(0.0, 10.0), &line), 0.0);
        assert!((polyline_distance(P::new(5.0, 12.0), &line) - 2.0).abs() < 1e-12);
        assert!((polyline_distance(P::new(-3.0, 5.0), &line) - 3.0).abs() < 1e-12);
    }
}
