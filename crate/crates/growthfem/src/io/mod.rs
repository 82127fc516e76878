pub mod checkpoint;
pub mod mesh_json;
pub mod summary;
pub mod timeseries;
pub mod vtu;
