//! Direction frames, acquisition curves, plane-curve intersections and
//! sampled certificates for the acquisition conditions.

mod certify;
mod curve;
mod frame;
mod intersect;

pub use certify::{
    encompasses, fibonacci_sphere, kirillov_tuy_report, kirillov_tuy_report_with, plane_disc_points,
    random_directions, select_points, view_direction, EncompassReport, EncompassWitness, KTFailure,
    KTOptions, KTReport,
};
pub use curve::{great_circles_curve, planar_circle, Ball, Circle, CircleUnion, Curve, CurvePoint, PlaneCoords};
pub use frame::{angles_from_direction, Frame};
pub use intersect::{
    plane_curve_intersections, plane_curve_intersections_with, Intersection, IntersectionOptions, Intersections,
    DEFAULT_BISECTION_STEPS, DEFAULT_SAMPLES_PER_PIECE,
};
