//! Performance-based sizing optimization of planar reinforced-concrete
//! frames with shear walls.

pub mod sections;
pub mod frame;
pub mod analysis;
pub mod constraints;
pub mod abc;
