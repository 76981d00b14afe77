//! Static physics and measurement data: materials with their interaction
//! tables, decay schemes, component list and radioassay activities.

pub mod components;
pub mod materials;
pub mod nuclear;
pub mod radioassay;
pub mod table;

use std::path::Path;

pub use components::{load_components, ComponentSpec};
pub use materials::{load_materials, MaterialData, MaterialDb};
pub use nuclear::{decay_emissions, load_nuclear, DecayScheme, Emission, NuclearDb};
pub use radioassay::{load_radioassay, ActivityEntry, ActivityKind, RadioassayTable};

/// Materials and nuclear data loaded from one data directory.
#[derive(Debug)]
pub struct DataSet {
    pub materials: MaterialDb,
    pub nuclear: NuclearDb,
}

pub fn load_dataset(dir: &Path) -> crate::Result<DataSet> {
    Ok(DataSet { materials: load_materials(dir)?, nuclear: load_nuclear(dir)? })
}
