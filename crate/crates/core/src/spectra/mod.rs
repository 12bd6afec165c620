//! Eigenstructure, level diagrams, anti-crossing search, transition catalogs
//! and synthetic ODMR / ODNMR spectra.

mod coupling;
mod eigensystem;
mod levels;
mod odmr;
mod odnmr;
mod spectrum;
mod transitions;

pub use coupling::{c_nn, c_nn_for, d_nn, GyromagneticUnits};
pub use eigensystem::{eigh, Branch, EigenSystem, Ms, SectorWeights, StateLabel};
pub use levels::{find_lac, level_row, level_sweep, LevelRow, LAC_SEARCH_RANGE};
pub use odmr::{odmr_lines, odmr_spectrum, LineStrengths, OdmrLines, OdmrOptions};
pub use odnmr::{branch_populations, odnmr_lines, odnmr_spectrum, NmrOptions};
pub use spectrum::{FrequencyGrid, LineShape, Spectrum};
pub use transitions::{
    strongest_near, transition_catalog, transition_catalog_where, CatalogOptions, TransitionLine,
    DEFAULT_STRENGTH_FLOOR,
};
