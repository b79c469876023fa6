//! Floor plans, virtual anchors and the small amount of planar geometry the
//! rest of the crate leans on.
//!
//! Virtual anchors (VAs) are mirror images of a physical anchor with respect
//! to the wall lines of the floor plan. Walls are treated as infinite lines;
//! no visibility test is made here.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default standard deviation of a-priori known VA positions (m).
pub const DEFAULT_VA_SIGMA: f64 = 0.05;

/// Positions closer than this are treated as the same VA.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn from_vector(v: &Vector2<f64>) -> Self {
        Self::new(v.x, v.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub endpoint_a: Point2,
    pub endpoint_b: Point2,
    pub id: i64,
}

impl Wall {
    pub fn new(endpoint_a: Point2, endpoint_b: Point2, id: i64) -> Result<Self> {
        let wall = Self {
            endpoint_a,
            endpoint_b,
            id,
        };
        wall.unit_normal()?;
        Ok(wall)
    }

    fn unit_normal(&self) -> Result<Point2> {
        let d = self.endpoint_b - self.endpoint_a;
        let len = d.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(MintError::DegenerateWall(self.id));
        }
        Ok(Point2::new(-d.y / len, d.x / len))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    walls: Vec<Wall>,
}

impl FloorPlan {
    pub fn new(walls: Vec<Wall>) -> Result<Self> {
        if walls.is_empty() {
            return Err(MintError::InvalidFloorPlan("no walls".into()));
        }
        let mut ids: Vec<i64> = walls.iter().map(|w| w.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(MintError::InvalidFloorPlan("duplicate wall id".into()));
        }
        for w in &walls {
            w.unit_normal()?;
        }
        Ok(Self { walls })
    }

    /// Axis-aligned rectangular room with wall ids 0..4 (bottom, right, top, left).
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let c = [
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ];
        let walls = (0..4)
            .map(|i| Wall::new(c[i], c[(i + 1) % 4], i as i64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(walls)
    }

    /// Builds a plan from `[[x1, y1], [x2, y2]]` segments; ids follow list order.
    pub fn from_segments(segments: &[[[f64; 2]; 2]]) -> Result<Self> {
        let walls = segments
            .iter()
            .enumerate()
            .map(|(i, s)| Wall::new(s[0].into(), s[1].into(), i as i64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(walls)
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    /// Axis-aligned bounding box `(min, max)` of all wall endpoints.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for w in &self.walls {
            for p in [w.endpoint_a, w.endpoint_b] {
                lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        (lo, hi)
    }
}

/// Identifies a VA across modules: `(anchor_id, va_index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VaKey {
    pub anchor_id: usize,
    pub va_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualAnchor {
    pub anchor_id: usize,
    pub va_index: usize,
    pub mean: Point2,
    pub cov: Matrix2<f64>,
    pub order: usize,
    pub wall_sequence: Vec<i64>,
}

impl VirtualAnchor {
    pub fn key(&self) -> VaKey {
        VaKey {
            anchor_id: self.anchor_id,
            va_index: self.va_index,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.order == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangingDirectionMatrix {
    pub m: Matrix2<f64>,
    pub angle: f64,
}

/// Reflects `p` across the infinite line through `wall`.
pub fn mirror_point(p: Point2, wall: &Wall) -> Result<Point2> {
    let n = wall.unit_normal()?;
    let dist = (p - wall.endpoint_a).dot(n);
    Ok(p - n * (2.0 * dist))
}

/// Image-source construction up to `max_order` with the default VA prior.
pub fn build_virtual_anchors(
    plan: &FloorPlan,
    anchor: Point2,
    anchor_id: usize,
    max_order: usize,
) -> Result<Vec<VirtualAnchor>> {
    build_virtual_anchors_with_prior(plan, anchor, anchor_id, max_order, DEFAULT_VA_SIGMA)
}

/// Image-source construction with an isotropic position prior `va_sigma² I`
/// on every VA of order ≥ 1. The physical anchor is exact (zero covariance).
///
/// Every wall sequence without consecutive repeats is expanded, including
/// sequences whose image coincides with an earlier one; only the emitted list
/// is deduplicated. Output is sorted by order, then wall sequence.
pub fn build_virtual_anchors_with_prior(
    plan: &FloorPlan,
    anchor: Point2,
    anchor_id: usize,
    max_order: usize,
    va_sigma: f64,
) -> Result<Vec<VirtualAnchor>> {
    let mut accepted: Vec<(Point2, Vec<i64>)> = vec![(anchor, Vec::new())];
    let mut frontier: Vec<(Point2, Vec<i64>)> = vec![(anchor, Vec::new())];

    for _ in 0..max_order {
        let mut next = Vec::with_capacity(frontier.len() * plan.walls().len());
        for (p, seq) in &frontier {
            for wall in plan.walls() {
                if seq.last() == Some(&wall.id) {
                    continue;
                }
                let mut s = seq.clone();
                s.push(wall.id);
                next.push((mirror_point(*p, wall)?, s));
            }
        }
        next.sort_by(|a, b| a.1.cmp(&b.1));
        for (p, seq) in &next {
            if accepted.iter().all(|(q, _)| q.distance(*p) > DEDUP_TOL) {
                accepted.push((*p, seq.clone()));
            }
        }
        frontier = next;
    }

    let prior = Matrix2::identity() * (va_sigma * va_sigma);
    Ok(accepted
        .into_iter()
        .enumerate()
        .map(|(va_index, (mean, wall_sequence))| VirtualAnchor {
            anchor_id,
            va_index,
            mean,
            cov: if wall_sequence.is_empty() {
                Matrix2::zeros()
            } else {
                prior
            },
            order: wall_sequence.len(),
            wall_sequence,
        })
        .collect())
}

/// Propagation delay from `p` to the VA in seconds.
pub fn expected_delay(p: Point2, va: &VirtualAnchor) -> f64 {
    p.distance(va.mean) / SPEED_OF_LIGHT
}

pub fn angle_to(p: Point2, a: Point2) -> Result<f64> {
    let d = a - p;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(MintError::CoincidentPoints);
    }
    Ok(d.y.atan2(d.x))
}

pub fn ranging_direction(angle: f64) -> RangingDirectionMatrix {
    let u = Vector2::new(angle.cos(), angle.sin());
    RangingDirectionMatrix {
        m: u * u.transpose(),
        angle,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn room() -> FloorPlan {
        FloorPlan::rectangle(0.0, 0.0, 5.0, 6.0).unwrap()
    }

    #[test]
    fn mirror_across_y_axis() {
        let w = Wall::new(Point2::new(0.0, -1.0), Point2::new(0.0, 3.0), 0).unwrap();
        let q = mirror_point(Point2::new(1.0, 2.0), &w).unwrap();
        assert!((q.x + 1.0).abs() < 1e-15 && (q.y - 2.0).abs() < 1e-15);
    }

    #[test]
    fn point_on_wall_is_fixed() {
        let w = Wall::new(Point2::new(0.0, 0.0), Point2::new(2.0, 1.0), 0).unwrap();
        let p = Point2::new(4.0, 2.0);
        assert!(mirror_point(p, &w).unwrap().distance(p) < 1e-12);
    }

    #[test]
    fn degenerate_wall_rejected() {
        let p = Point2::new(1.0, 1.0);
        assert_eq!(Wall::new(p, p, 7), Err(MintError::DegenerateWall(7)));
        let bad = Wall {
            endpoint_a: p,
            endpoint_b: p,
            id: 3,
        };
        assert!(mirror_point(p, &bad).is_err());
    }

    #[test]
    fn floor_plan_validation() {
        assert!(FloorPlan::new(vec![]).is_err());
        let w = Wall::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), 1).unwrap();
        assert!(FloorPlan::new(vec![w, w]).is_err());
    }

    #[test]
    fn first_order_rectangle() {
        let vas = build_virtual_anchors(&room(), Point2::new(1.0, 2.0), 0, 1).unwrap();
        assert_eq!(vas.len(), 5);
        assert_eq!(vas[0].order, 0);
        assert_eq!(vas[0].cov, Matrix2::zeros());
        let expected = [(1.0, -2.0), (9.0, 2.0), (1.0, 10.0), (-1.0, 2.0)];
        for (va, (x, y)) in vas[1..].iter().zip(expected) {
            assert_eq!(va.order, 1);
            assert!(va.mean.distance(Point2::new(x, y)) < 1e-12, "{:?}", va.mean);
            assert_eq!(va.cov, Matrix2::identity() * DEFAULT_VA_SIGMA.powi(2));
        }
    }

    #[test]
    fn order_zero_is_anchor_only() {
        let vas = build_virtual_anchors(&room(), Point2::new(1.0, 2.0), 3, 0).unwrap();
        assert_eq!(vas.len(), 1);
        assert_eq!(vas[0].anchor_id, 3);
        assert_eq!(vas[0].mean, Point2::new(1.0, 2.0));
    }

    #[test]
    fn second_order_rectangle_dedups_corner_images() {
        let vas = build_virtual_anchors(&room(), Point2::new(1.0, 2.0), 0, 2).unwrap();
        // 12 ordered pairs of distinct walls, 4 corner images found twice
        assert_eq!(vas.iter().filter(|v| v.order == 2).count(), 8);
        for v in &vas {
            assert_eq!(v.order, v.wall_sequence.len());
            assert!(v.wall_sequence.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn delays_and_angles() {
        let va = build_virtual_anchors(&room(), Point2::new(3.0, 4.0), 0, 0).unwrap()[0].clone();
        assert_eq!(expected_delay(Point2::new(3.0, 4.0), &va), 0.0);
        assert!((expected_delay(Point2::new(0.0, 0.0), &va) - 5.0 / SPEED_OF_LIGHT).abs() < 1e-24);
        let far = VirtualAnchor {
            mean: Point2::new(299.792458, 0.0),
            ..va
        };
        assert!((expected_delay(Point2::new(0.0, 0.0), &far) - 1e-6).abs() < 1e-18);

        let o = Point2::new(0.0, 0.0);
        assert_eq!(angle_to(o, Point2::new(1.0, 0.0)).unwrap(), 0.0);
        assert!((angle_to(o, Point2::new(0.0, 2.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((angle_to(Point2::new(1.0, 1.0), o).unwrap() + 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(angle_to(o, o), Err(MintError::CoincidentPoints));
    }

    #[test]
    fn ranging_direction_examples() {
        let m0 = ranging_direction(0.0).m;
        assert!((m0 - Matrix2::new(1.0, 0.0, 0.0, 0.0)).abs().max() < 1e-15);
        let m1 = ranging_direction(PI / 2.0).m;
        assert!((m1 - Matrix2::new(0.0, 0.0, 0.0, 1.0)).abs().max() < 1e-15);
        let m2 = ranging_direction(PI / 4.0).m;
        assert!((m2 - Matrix2::from_element(0.5)).abs().max() < 1e-15);
    }

    fn wall_strategy() -> impl Strategy<Value = Wall> {
        (-10.0..10.0f64, -10.0..10.0f64, 0.0..(2.0 * PI), 0.1..5.0f64).prop_map(|(x, y, t, l)| {
            let a = Point2::new(x, y);
            Wall::new(a, a + Point2::new(t.cos(), t.sin()) * l, 0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn mirror_is_involution(x in -20.0..20.0f64, y in -20.0..20.0f64, w in wall_strategy()) {
            let p = Point2::new(x, y);
            let back = mirror_point(mirror_point(p, &w).unwrap(), &w).unwrap();
            prop_assert!(back.distance(p) < 1e-12);
        }

        #[test]
        fn mirror_is_isometry(
            x1 in -20.0..20.0f64, y1 in -20.0..20.0f64,
            x2 in -20.0..20.0f64, y2 in -20.0..20.0f64,
            w in wall_strategy(),
        ) {
            let (p, q) = (Point2::new(x1, y1), Point2::new(x2, y2));
            let d = mirror_point(p, &w).unwrap().distance(mirror_point(q, &w).unwrap());
            prop_assert!((d - p.distance(q)).abs() < 1e-12);
        }

        #[test]
        fn ranging_direction_is_unit_rank_one(phi in -PI..PI) {
            let r = ranging_direction(phi);
            let u = Vector2::new(phi.cos(), phi.sin());
            prop_assert!((r.m.trace() - 1.0).abs() < 1e-12);
            prop_assert!(r.m.determinant().abs() < 1e-12);
            prop_assert!((r.m * u - u).norm() < 1e-12);
        }
    }
}
