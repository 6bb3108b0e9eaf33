//! Configuration-space path planning for a three-section pneumatic continuum arm.
//!
//! The crate is organized as a pipeline:
//!
//! * [`kinematics`]: constant-curvature section and arm forward kinematics,
//!   actuator validity, and skeleton sampling.
//! * [`cspace`]: discretized per-section sample tables, flat configuration
//!   ids, batch tip enumeration, and workspace bucketing.
//! * [`cache`]: binary persistence for the enumerated configuration space.
//! * [`wgrid`]: the voxelized workspace: cube grid, sphere obstacles, and
//!   shortest/alternate cube routing.
//! * [`planner`]: layered shortest-path search over the configuration
//!   buckets induced by a cube path, with streaming relaxation and path
//!   validation.
//! * [`scene`]: scene files, random scenario generation, and result
//!   formatting for the `carm` command line tool.

pub mod cache;
pub mod cspace;
pub mod kinematics;
pub mod planner;
pub mod scene;
pub mod wgrid;
