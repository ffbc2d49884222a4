//! Poincaré series, critical exponents, Patterson-Sullivan densities, and
//! the counting / equidistribution experiments built on orbit balls.

pub mod counting;
pub mod exponent;
pub mod hopf;
pub mod measure;
pub mod shadows;

pub use counting::{
    equidistribution_experiment, geodesic_counting_experiment, orbit_counting_experiment,
    BoundaryCap, EquidistributionReport, EquidistributionRow, GeodesicCountReport,
    GeodesicCountRow, OrbitCountReport, OrbitCountRow,
};
pub use exponent::{
    critical_exponent, critical_exponent_at, exponent_from_ball, poincare_bracket,
    poincare_series, slope_fit, CriticalExponentEstimate, ExponentMethod, PoincareSeries,
};
pub use hopf::{
    basepoint_change_ratio, hopf_flip, hopf_footpoint, sullivan_density, HopfVector,
};
pub use measure::{
    conformality_audit, equivariance_audit, ps_density, supercritical_schedule, Atom,
    AtomicMeasure, ConformalityReport, EquivarianceReport, FAR_ATOM_REL_TOL, INTERIOR_MARGIN,
};
pub use shadows::{
    busemann_sandwich_audit, shadow_lemma_audit, SandwichReport, ShadowRatioReport,
    ShadowRow, DEFAULT_SHADOW_SAMPLE, SANDWICH_NUMERIC_FLOOR,
};
