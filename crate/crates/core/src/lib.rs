pub mod dataflow;
pub mod error;
pub mod graph;
pub mod report;
pub mod resources;
pub mod rules;
pub mod scan;
pub mod smali;
pub mod tagging;
pub mod taint;
pub mod taxonomy;

pub use error::{Diagnostic, Error, Result};
pub use report::{OutputFormat, Report};
pub use scan::{ScanConfig, Scanner};
