pub mod cli;
pub mod error;
pub mod initvals;
mod linalg;
pub mod model;
pub mod oracle;
pub mod pmf;
mod poly;
pub mod roots;
pub mod survival;

pub use error::{Error, Result};
pub use model::{ModelClass, SeasonalModel};
pub use pmf::IntegerPmf;
pub use roots::{find_unit_disk_roots, DiskRoot, RootConfig, RootSet};
pub use survival::{survival_finite, survival_ultimate, SurvivalTable};
