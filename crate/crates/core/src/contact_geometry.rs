//! Contact-surface statics: traction fields, contact convex hulls, contact
//! centroids and the ZMP balance test.
//!
//! Tractions are expressed in the contact frame of a [`ContactPlane`]: the
//! first component is the pressure along the plane normal, the other two are
//! friction components along the in-plane axes `u` and `v`. Sample positions
//! are in-plane coordinates along the same axes. Wrenches are reported in the
//! world frame.

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};

/// Points closer than this are merged when building a hull [m].
pub const DEDUP_TOLERANCE: f64 = 1e-12;

/// Boundary tolerance of the closed-hull stability test [m].
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ContactPlane {
    origin: Vector3<f64>,
    normal: Vector3<f64>,
    u: Vector3<f64>,
    v: Vector3<f64>,
}

impl ContactPlane {
    /// Builds a plane through `origin` with the given normal (normalized here).
    ///
    /// The in-plane axes are chosen deterministically: `u` is the projection of
    /// the world axis least aligned with the normal, `v = normal × u`.
    pub fn new(origin: Vector3<f64>, normal: Vector3<f64>) -> Result<Self> {
        let norm = normal.norm();
        if !(norm.is_finite() && norm > 0.0) || !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("plane", "normal must be finite and nonzero"));
        }
        let normal = normal / norm;
        let mut helper = Vector3::x();
        let mut best = normal.x.abs();
        for (axis, component) in [(Vector3::y(), normal.y), (Vector3::z(), normal.z)] {
            if component.abs() < best {
                best = component.abs();
                helper = axis;
            }
        }
        let u = (helper - normal * helper.dot(&normal)).normalize();
        let v = normal.cross(&u);
        Ok(Self {
            origin,
            normal,
            u,
            v,
        })
    }

    /// Plane through the world origin whose normal is the world x axis, so
    /// that contact-frame and world-frame components coincide.
    pub fn contact_frame() -> Self {
        Self::new(Vector3::zeros(), Vector3::x()).expect("unit axis is a valid normal")
    }

    /// Horizontal ground through the origin (normal +z, u = x, v = y).
    pub fn ground() -> Self {
        Self::new(Vector3::zeros(), Vector3::z()).expect("unit axis is a valid normal")
    }

    pub fn origin(&self) -> &Vector3<f64> {
        &self.origin
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    pub fn axes(&self) -> (&Vector3<f64>, &Vector3<f64>) {
        (&self.u, &self.v)
    }

    pub fn embed(&self, p: &Vector2<f64>) -> Vector3<f64> {
        self.origin + self.u * p.x + self.v * p.y
    }

    /// Maps contact-frame components `(normal, u, v)` to a world vector.
    pub fn to_world(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.normal * local.x + self.u * local.y + self.v * local.z
    }

    /// In-plane coordinates of a world point; fails if the point is off the
    /// plane by more than [`DEDUP_TOLERANCE`].
    pub fn project(&self, point: &Vector3<f64>) -> Result<Vector2<f64>> {
        let d = point - self.origin;
        let off = d.dot(&self.normal);
        if off.abs() > DEDUP_TOLERANCE {
            return Err(Error::invalid(
                "position",
                format!("point lies {off:e} m off the contact plane"),
            ));
        }
        Ok(Vector2::new(d.dot(&self.u), d.dot(&self.v)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TractionSample {
    pub position: Vector2<f64>,
    /// `(P_x, P_y, P_z)`: pressure then the two friction components [N/m²].
    pub traction: Vector3<f64>,
    pub area_weight: f64,
}

impl TractionSample {
    pub fn new(position: Vector2<f64>, traction: Vector3<f64>, area_weight: f64) -> Result<Self> {
        if !(area_weight > 0.0 && area_weight.is_finite()) {
            return Err(Error::invalid("area_weight", "must be finite and > 0"));
        }
        if !position
            .iter()
            .chain(traction.iter())
            .all(|c| c.is_finite())
        {
            return Err(Error::invalid(
                "traction sample",
                "components must be finite",
            ));
        }
        Ok(Self {
            position,
            traction,
            area_weight,
        })
    }

    /// Pressure-only sample.
    pub fn normal(position: Vector2<f64>, pressure: f64, area_weight: f64) -> Result<Self> {
        Self::new(position, Vector3::new(pressure, 0.0, 0.0), area_weight)
    }
}

/// A discretized traction distribution over a planar contact region.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactRegion {
    samples: Vec<TractionSample>,
    plane: ContactPlane,
}

/// The traction field and the region it lives on are carried together.
pub type TractionField = ContactRegion;

impl ContactRegion {
    pub fn new(samples: Vec<TractionSample>, plane: ContactPlane) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyContactRegion);
        }
        Ok(Self { samples, plane })
    }

    pub fn samples(&self) -> &[TractionSample] {
        &self.samples
    }

    pub fn plane(&self) -> &ContactPlane {
        &self.plane
    }

    pub fn is_compressive(&self) -> bool {
        self.samples.iter().all(|s| s.traction.x >= 0.0)
    }

    pub fn positions(&self) -> Vec<Vector2<f64>> {
        self.samples.iter().map(|s| s.position).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HullShape {
    Point,
    Segment,
    Polygon,
}

/// Convex hull of a planar point set, counterclockwise, strictly convex.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexHullPolygon {
    vertices: Vec<Vector2<f64>>,
    shape: HullShape,
}

impl ConvexHullPolygon {
    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    pub fn shape(&self) -> HullShape {
        self.shape
    }

    pub fn is_degenerate(&self) -> bool {
        self.shape != HullShape::Polygon
    }

    /// Signed distance of `p` to the hull boundary, positive inside.
    ///
    /// Inside a polygon this is the distance to the nearest edge line; outside
    /// it is negative. Degenerate hulls have no interior, so the value is the
    /// negated Euclidean distance.
    pub fn signed_distance(&self, p: &Vector2<f64>) -> f64 {
        match self.shape {
            HullShape::Point => -(p - self.vertices[0]).norm(),
            HullShape::Segment => -segment_distance(p, &self.vertices[0], &self.vertices[1]),
            HullShape::Polygon => {
                let n = self.vertices.len();
                let mut min_edge = f64::INFINITY;
                let mut outside = f64::INFINITY;
                let mut is_outside = false;
                for i in 0..n {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    let edge = b - a;
                    let side = cross(&edge, &(p - a)) / edge.norm();
                    min_edge = min_edge.min(side);
                    if side < 0.0 {
                        is_outside = true;
                        outside = outside.min(segment_distance(p, a, b));
                    }
                }
                if is_outside {
                    -outside
                } else {
                    min_edge
                }
            }
        }
    }

    pub fn contains(&self, p: &Vector2<f64>, tolerance: f64) -> bool {
        self.signed_distance(p) >= -tolerance
    }

    /// Area centroid for polygons; midpoint or the point for degenerate hulls.
    pub fn centroid(&self) -> Vector2<f64> {
        match self.shape {
            HullShape::Point => self.vertices[0],
            HullShape::Segment => (self.vertices[0] + self.vertices[1]) * 0.5,
            HullShape::Polygon => {
                let n = self.vertices.len();
                let mut area2 = 0.0;
                let mut acc = Vector2::zeros();
                for i in 0..n {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    let w = cross(a, b);
                    area2 += w;
                    acc += (a + b) * w;
                }
                acc / (3.0 * area2)
            }
        }
    }

    pub fn area(&self) -> f64 {
        if self.shape != HullShape::Polygon {
            return 0.0;
        }
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| cross(&self.vertices[i], &self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }
}

/// A force/moment pair reduced at a reference point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultantWrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
    pub reference_point: Vector3<f64>,
}

impl ResultantWrench {
    /// The same wrench reduced at `point`: `M' = M + (p − p') × F`.
    pub fn about(&self, point: &Vector3<f64>) -> Self {
        Self {
            force: self.force,
            moment: self.moment + (self.reference_point - point).cross(&self.force),
            reference_point: *point,
        }
    }
}

/// Equivalent force system at the contact centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactCentroid {
    /// In-plane coordinates of the centroid [m].
    pub point: Vector2<f64>,
    /// Total pressure resultant along the plane normal [N].
    pub normal_force: f64,
    /// Moment about the centroid along the plane normal [N·m].
    pub normal_moment: f64,
    /// Full resultant force in the world frame, applied at `point` [N].
    pub force: Vector3<f64>,
}

impl ContactCentroid {
    /// The centroid force system as a wrench reduced at `reference`.
    pub fn wrench_about(&self, plane: &ContactPlane, reference: &Vector3<f64>) -> ResultantWrench {
        ResultantWrench {
            force: self.force,
            moment: plane.normal() * self.normal_moment,
            reference_point: plane.embed(&self.point),
        }
        .about(reference)
    }
}

/// Resultant wrench of a traction field about the plane origin.
pub fn resultant_of_field(field: &ContactRegion) -> ResultantWrench {
    let plane = field.plane();
    let origin = *plane.origin();
    let mut force = Vector3::zeros();
    let mut moment = Vector3::zeros();
    for s in field.samples() {
        let f = plane.to_world(&s.traction) * s.area_weight;
        force += f;
        moment += (plane.embed(&s.position) - origin).cross(&f);
    }
    ResultantWrench {
        force,
        moment,
        reference_point: origin,
    }
}

fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn turn(o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    cross(&(a - o), &(b - o))
}

fn segment_distance(p: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Monotone-chain convex hull.
///
/// Points within [`DEDUP_TOLERANCE`] are merged and vertices closer than that
/// to the line of their neighbours are dropped, so the result is strictly
/// convex. One distinct point yields a `Point` hull, collinear input a
/// `Segment` between the extremes.
pub fn convex_hull(points: &[Vector2<f64>]) -> Result<ConvexHullPolygon> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::invalid("points", "coordinates must be finite"));
    }
    let mut sorted: Vec<Vector2<f64>> = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut unique: Vec<Vector2<f64>> = Vec::with_capacity(sorted.len());
    for p in sorted {
        if !unique
            .iter()
            .rev()
            .take(4)
            .any(|q| (p - q).norm() <= DEDUP_TOLERANCE)
        {
            unique.push(p);
        }
    }
    if unique.len() == 1 {
        return Ok(ConvexHullPolygon {
            vertices: unique,
            shape: HullShape::Point,
        });
    }

    // Pop while the middle vertex is not strictly left of the chord.
    let keep = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        turn(o, a, b) > DEDUP_TOLERANCE * (b - o).norm()
    };
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * unique.len());
    for p in unique.iter() {
        while hull.len() >= 2 && !keep(&hull[hull.len() - 2], &hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in unique.iter().rev().skip(1) {
        while hull.len() >= lower_len && !keep(&hull[hull.len() - 2], &hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();

    if hull.len() <= 2 {
        let first = unique[0];
        let last = unique[unique.len() - 1];
        return Ok(ConvexHullPolygon {
            vertices: vec![first, last],
            shape: HullShape::Segment,
        });
    }
    Ok(ConvexHullPolygon {
        vertices: hull,
        shape: HullShape::Polygon,
    })
}

/// Pressure-weighted centroid of a compressive planar field, with the
/// equivalent single force and normal moment.
pub fn contact_centroid(field: &ContactRegion) -> Result<ContactCentroid> {
    let mut normal_force = 0.0;
    let mut weighted = Vector2::zeros();
    for s in field.samples() {
        let fn_i = s.traction.x * s.area_weight;
        normal_force += fn_i;
        weighted += s.position * fn_i;
    }
    if !field.is_compressive() || normal_force <= 0.0 {
        return Err(Error::NonCompressiveField {
            total_normal_force: normal_force,
        });
    }
    let point = weighted / normal_force;
    let plane = field.plane();
    let about_centroid = resultant_of_field(field).about(&plane.embed(&point));
    Ok(ContactCentroid {
        point,
        normal_force,
        normal_moment: about_centroid.moment.dot(plane.normal()),
        force: about_centroid.force,
    })
}

/// Point of `plane` about which the tangential moment of `wrench` vanishes.
///
/// Returns `None` when the force component along the plane normal is not
/// strictly positive.
pub fn zmp_on_plane(wrench: &ResultantWrench, plane: &ContactPlane) -> Option<Vector2<f64>> {
    let force = &wrench.force;
    let normal_force = force.dot(plane.normal());
    if !(normal_force > 0.0) {
        return None;
    }
    let (u, v) = plane.axes();
    let offset = plane.origin() - wrench.reference_point;
    let base = offset.cross(force);
    let x = -(wrench.moment.dot(v) - base.dot(v)) / normal_force;
    let y = (wrench.moment.dot(u) - base.dot(u)) / normal_force;
    Some(Vector2::new(x, y))
}

/// Closed-hull balance test: true iff `zmp` lies inside or on the hull.
pub fn stability_test(zmp: &Vector2<f64>, hull: &ConvexHullPolygon) -> bool {
    hull.contains(zmp, BOUNDARY_TOLERANCE)
}
