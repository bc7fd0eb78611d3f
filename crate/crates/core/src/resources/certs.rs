use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use time::OffsetDateTime;
use walkdir::WalkDir;
use x509_parser::objects::{oid2sn, oid_registry};
use x509_parser::pem::Pem;
use x509_parser::prelude::{parse_x509_certificate, X509Certificate};

use super::layout::rel;
use crate::error::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateInfo {
    pub subject: String,
    pub issuer: String,
    #[serde(with = "time::serde::rfc3339")]
    pub not_before: OffsetDateTime,
    #[serde(with = "time::serde::rfc3339")]
    pub not_after: OffsetDateTime,
    pub signature_algorithm: String,
    pub source: String,
}

impl CertificateInfo {
    pub fn is_sha1(&self) -> bool {
        let a = self.signature_algorithm.to_ascii_lowercase();
        a.contains("sha1") || a.contains("sha-1") || a == "1.2.840.113549.1.1.5"
    }

    pub fn expired_at(&self, reference: OffsetDateTime) -> bool {
        self.not_after < reference
    }
}

/// A PEM private-key block shipped inside the package.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedKey {
    pub source: String,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PackageFiles {
    pub certificates: Vec<CertificateInfo>,
    pub private_keys: Vec<EmbeddedKey>,
}

const CERT_EXTENSIONS: &[&str] = &["pem", "crt", "cer", "der", "cert"];

/// Scans `assets/` and `res/raw/` for certificates and private keys.
pub fn extract_certificates(root: &Path, diags: &mut Vec<Diagnostic>) -> PackageFiles {
    let mut out = PackageFiles::default();
    for dir in ["assets", "res/raw"] {
        let base = root.join(dir);
        if !base.is_dir() {
            continue;
        }
        for entry in WalkDir::new(&base).sort_by_file_name().into_iter().flatten() {
            if !entry.file_type().is_file() {
                continue;
            }
            let path = entry.path();
            let Ok(bytes) = fs::read(path) else { continue };
            scan_file(&rel(root, path), path, &bytes, &mut out, diags);
        }
    }
    out
}

fn scan_file(name: &str, path: &Path, bytes: &[u8], out: &mut PackageFiles, diags: &mut Vec<Diagnostic>) {
    let looks_like_cert = path
        .extension()
        .is_some_and(|x| CERT_EXTENSIONS.contains(&x.to_string_lossy().to_ascii_lowercase().as_str()));

    if contains(bytes, b"-----BEGIN ") {
        for pem in Pem::iter_from_buffer(bytes) {
            match pem {
                Ok(pem) if pem.label == "CERTIFICATE" || pem.label == "X509 CERTIFICATE" => match pem.parse_x509() {
                    Ok(cert) => push_cert(name, &cert, out, diags),
                    Err(e) => diags.push(Diagnostic::new("certificates", name, format!("corrupt certificate: {e}"))),
                },
                Ok(pem) if pem.label.ends_with("PRIVATE KEY") => out.private_keys.push(EmbeddedKey {
                    source: name.to_string(),
                    label: pem.label.clone(),
                }),
                Ok(_) => {}
                Err(e) => {
                    diags.push(Diagnostic::new("certificates", name, format!("corrupt PEM block: {e:?}")));
                    break;
                }
            }
        }
        return;
    }

    // DER starts with a SEQUENCE tag
    if bytes.first() == Some(&0x30) {
        match parse_x509_certificate(bytes) {
            Ok((_, cert)) => push_cert(name, &cert, out, diags),
            Err(e) if looks_like_cert => {
                diags.push(Diagnostic::new("certificates", name, format!("corrupt certificate: {e}")))
            }
            Err(_) => {}
        }
    } else if looks_like_cert {
        diags.push(Diagnostic::new("certificates", name, "file has a certificate extension but is neither PEM nor DER"));
    }
}

fn push_cert(name: &str, cert: &X509Certificate<'_>, out: &mut PackageFiles, diags: &mut Vec<Diagnostic>) {
    let validity = cert.validity();
    let (Ok(not_before), Ok(not_after)) = (
        OffsetDateTime::from_unix_timestamp(validity.not_before.timestamp()),
        OffsetDateTime::from_unix_timestamp(validity.not_after.timestamp()),
    ) else {
        diags.push(Diagnostic::new("certificates", name, "validity out of range"));
        return;
    };
    if not_before > not_after {
        diags.push(Diagnostic::new("certificates", name, "notBefore is after notAfter"));
        return;
    }
    let oid = &cert.signature_algorithm.algorithm;
    let signature_algorithm = oid2sn(oid, oid_registry())
        .map(String::from)
        .unwrap_or_else(|_| oid.to_id_string());
    out.certificates.push(CertificateInfo {
        subject: cert.subject().to_string(),
        issuer: cert.issuer().to_string(),
        not_before,
        not_after,
        signature_algorithm,
        source: name.to_string(),
    });
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    hay.windows(needle.len()).any(|w| w == needle)
}
