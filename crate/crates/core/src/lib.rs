pub mod algebra;
pub mod cli;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod noiseless;
pub mod protectable;
pub mod report;
