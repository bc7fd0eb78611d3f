//! Resource frontend: decoded layouts, string tables, manifest, R ids and
//! certificates shipped in the package.

mod certs;
mod layout;
mod manifest;
mod rtable;

use std::collections::BTreeMap;
use std::path::Path;

pub use certs::{extract_certificates, CertificateInfo, EmbeddedKey, PackageFiles};
pub use layout::{
    pair_labels, parse_layout_text, parse_layouts, parse_strings, LabelPair, Layout, PairKind, ViewElement, ViewKind,
};
pub use manifest::{load_manifest, parse_manifest, Component, IntentFilter, ManifestInfo};
pub use rtable::RTable;

use crate::error::{Diagnostic, Result};

/// Everything read from an app directory apart from code.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub manifest: ManifestInfo,
    pub strings: BTreeMap<String, String>,
    pub layouts: Vec<Layout>,
    pub package_files: PackageFiles,
    pub diagnostics: Vec<Diagnostic>,
}

impl Resources {
    /// Loads resources under `root`. Only a missing manifest is fatal.
    pub fn load(root: &Path) -> Result<Resources> {
        let mut diagnostics = Vec::new();
        let manifest = load_manifest(root, &mut diagnostics)?;
        let strings = parse_strings(root, &mut diagnostics);
        let layouts = parse_layouts(root, &strings, &mut diagnostics);
        let package_files = extract_certificates(root, &mut diagnostics);
        Ok(Resources { manifest, strings, layouts, package_files, diagnostics })
    }

    /// Label pairs of every layout, in file order.
    pub fn label_pairs(&self) -> Vec<LabelPair> {
        self.layouts.iter().flat_map(|l| pair_labels(&l.views)).collect()
    }
}
