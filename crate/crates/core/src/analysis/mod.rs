//! Wrench-set polytopes, cross-sections and response metrics.

mod hull;
pub mod metrics;
pub mod polytope;
pub mod section;
pub mod wrench_set;

pub use metrics::{detect_step, response_metrics, response_metrics_with_band, DetectedStep, ResponseMetrics};
pub use polytope::{Halfspace, Polytope};
pub use section::{cross_section, CrossSection};
pub use wrench_set::{
    acceleration_set, box_corner_images, inscribed_radius, lateral_force_radius, omni_radius, wrench_set,
    wrench_set_with, WrenchComponent, MAX_ROTORS,
};
