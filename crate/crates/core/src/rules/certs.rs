use time::OffsetDateTime;

use crate::resources::CertificateInfo;
use crate::taxonomy::WeaknessType;

use super::{Location, PatternHit, RuleGroup};

/// Expired and SHA-1-signed certificates bundled in the package.
pub fn check_certificates(certs: &[CertificateInfo], reference: OffsetDateTime) -> Vec<PatternHit> {
    let mut out = Vec::new();
    for c in certs {
        let hit = |weakness, evidence: String| PatternHit {
            group: RuleGroup::InvalidCertificate,
            weakness,
            location: Location::file(&c.source),
            evidence,
            reachability: None,
            site: None,
        };
        if c.expired_at(reference) {
            out.push(hit(WeaknessType::CertificateExpired, format!("{} expired {}", c.subject, c.not_after.date())));
        }
        if c.is_sha1() {
            out.push(hit(WeaknessType::CertificateSha1, format!("{} signed with {}", c.subject, c.signature_algorithm)));
        }
    }
    out
}
