//! Discrete groups acting on convex domains: scenarios, orbit balls,
//! element classification, and conjugacy-class enumeration.

pub mod classify;
pub mod conjugacy;
pub mod orbit;
pub mod presets;
pub mod scenario;
pub mod words;

pub use classify::{axis_endpoints, classify, translation_length, Classification, ElementClass};
pub use conjugacy::{
    nonarithmeticity_audit, primitive_conjugacy_classes, ConjugacyClass, ConjugacyClassList,
    NonarithmeticityReport,
};
pub use presets::{
    axis_boost, disk_from_sl2, list_presets, plane_boost_x, plane_boost_y, plane_rotation, preset,
};
pub use orbit::{
    kappa_distance_audit, orbit_ball, KappaAudit, OrbitBall, OrbitElement, OrbitStats,
    DEFAULT_ELEMENT_BUDGET,
};
pub use scenario::GroupScenario;
