//! In-silico support-polygon sweeps over a terrain catalog, compliance maps
//! and load galleries of the articulated foot, with CSV export.

pub mod export;
pub mod maps;
pub mod sweep;
pub mod terrain;

pub use export::{export_compliance_map, export_sweep, format_float, read_numeric_csv, write_csv};
pub use maps::{
    compliance_map, compression_fraction, configuration_gallery, log_grid, with_stiffness,
    ComplianceMap, Gallery, GalleryEntry,
};
pub use sweep::{
    bisect_boundary, cop_from_forces, softfoot_contact_positions, support_length, tilt_sweep,
    zmp_of_forces, FootModel, FootParams, RigidFootParams, SupportInterval, SupportReport,
    SweepRow, SweepSpec, SweepTable,
};
pub use terrain::{terrain_catalog, TerrainKind, TerrainProfile};
