use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Error, Result};
use crate::smali::types::{is_class_descriptor, java_to_descriptor};
use crate::smali::ComponentKind;

const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentFilter {
    pub actions: Vec<String>,
    pub categories: Vec<String>,
    pub schemes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Class descriptor, e.g. `Lcom/bank/LoginActivity;`.
    pub class: String,
    pub kind: ComponentKind,
    pub exported: bool,
    /// True when `exported` came from the attribute rather than defaulting.
    pub exported_explicit: bool,
    pub intent_filters: Vec<IntentFilter>,
}

impl Component {
    pub fn is_launcher(&self) -> bool {
        self.intent_filters.iter().any(|f| {
            f.actions.iter().any(|a| a == "android.intent.action.MAIN")
                && f.categories.iter().any(|c| c == "android.intent.category.LAUNCHER")
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestInfo {
    pub package: String,
    pub version_name: Option<String>,
    pub version_code: Option<String>,
    pub min_sdk: Option<u32>,
    pub target_sdk: Option<u32>,
    /// `android:name` of `<application>`, as a descriptor.
    pub application_class: Option<String>,
    pub components: Vec<Component>,
    pub permissions: Vec<String>,
}

impl ManifestInfo {
    pub fn component(&self, class: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.class == class)
    }
}

/// Reads `AndroidManifest.xml` under `root`.
pub fn load_manifest(root: &Path, diags: &mut Vec<Diagnostic>) -> Result<ManifestInfo> {
    let path = root.join("AndroidManifest.xml");
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingInput(format!("{} not found", path.display())))
        }
        Err(e) => return Err(Error::io(&path, e)),
    };
    parse_manifest(&text, diags).map_err(|message| Error::Xml { path: path.display().to_string(), message })
}

pub fn parse_manifest(text: &str, diags: &mut Vec<Diagnostic>) -> std::result::Result<ManifestInfo, String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let root = doc.root_element();
    if !root.has_tag_name("manifest") {
        return Err(format!("root element is <{}>, expected <manifest>", root.tag_name().name()));
    }
    let a = |n: roxmltree::Node, name: &str| -> Option<String> {
        n.attribute((ANDROID_NS, name)).or_else(|| n.attribute(name)).map(String::from)
    };
    let package = root.attribute("package").unwrap_or_default().to_string();
    let mut info = ManifestInfo {
        package: package.clone(),
        version_name: a(root, "versionName"),
        version_code: a(root, "versionCode"),
        ..Default::default()
    };
    for n in root.children().filter(|n| n.is_element()) {
        match n.tag_name().name() {
            "uses-sdk" => {
                info.min_sdk = a(n, "minSdkVersion").and_then(|v| v.parse().ok());
                info.target_sdk = a(n, "targetSdkVersion").and_then(|v| v.parse().ok());
            }
            "uses-permission" | "uses-permission-sdk-23" => {
                if let Some(p) = a(n, "name") {
                    info.permissions.push(p);
                }
            }
            _ => {}
        }
    }
    let Some(app) = root.children().find(|n| n.has_tag_name("application")) else {
        return Ok(info);
    };
    info.application_class = a(app, "name").map(|n| java_to_descriptor(&qualify(&package, &n)));
    // platform default for providers flipped at API 17
    let sdk = info.target_sdk.or(info.min_sdk).unwrap_or(1);

    for n in app.children().filter(|n| n.is_element()) {
        let kind = match n.tag_name().name() {
            "activity" => ComponentKind::Activity,
            "service" => ComponentKind::Service,
            "receiver" => ComponentKind::Receiver,
            "provider" => ComponentKind::Provider,
            _ => continue,
        };
        let Some(name) = a(n, "name") else {
            diags.push(Diagnostic::new("manifest", "AndroidManifest.xml", format!("<{}> without android:name", n.tag_name().name())));
            continue;
        };
        let class = java_to_descriptor(&qualify(&package, &name));
        if !is_class_descriptor(&class) || class.contains(char::is_whitespace) || class.contains("//") {
            diags.push(Diagnostic::new("manifest", "AndroidManifest.xml", format!("invalid component class name `{name}`")));
            continue;
        }
        let intent_filters: Vec<IntentFilter> = n
            .children()
            .filter(|c| c.has_tag_name("intent-filter"))
            .map(|f| {
                let collect = |tag: &str, attr: &str| -> Vec<String> {
                    f.children().filter(|c| c.has_tag_name(tag)).filter_map(|c| a(c, attr)).collect()
                };
                IntentFilter {
                    actions: collect("action", "name"),
                    categories: collect("category", "name"),
                    schemes: collect("data", "scheme"),
                }
            })
            .collect();
        let explicit = a(n, "exported").map(|v| v == "true");
        let exported = match (explicit, kind) {
            (Some(v), _) => v,
            (None, ComponentKind::Provider) => sdk < 17,
            (None, _) => !intent_filters.is_empty(),
        };
        info.components.push(Component {
            class,
            kind,
            exported,
            exported_explicit: explicit.is_some(),
            intent_filters,
        });
    }
    Ok(info)
}

/// Resolves `.Foo` and bare `Foo` against the package.
fn qualify(package: &str, name: &str) -> String {
    if let Some(rest) = name.strip_prefix('.') {
        format!("{package}.{rest}")
    } else if !name.contains('.') {
        format!("{package}.{name}")
    } else {
        name.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MANIFEST: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="com.bank" android:versionName="2.1">
  <uses-sdk android:minSdkVersion="15" android:targetSdkVersion="28"/>
  <uses-permission android:name="android.permission.INTERNET"/>
  <application android:name=".BankApp">
    <activity android:name=".LoginActivity" android:exported="true"/>
    <activity android:name="com.bank.ui.Detail"/>
    <receiver android:name=".SmsReceiver">
      <intent-filter><action android:name="android.provider.Telephony.SMS_RECEIVED"/></intent-filter>
    </receiver>
    <provider android:name=".DataProvider" android:exported="false"/>
    <provider android:name=".OtherProvider"/>
    <service android:name="Sync"/>
  </application>
</manifest>"#;

    #[test]
    fn export_defaulting() {
        let m = parse_manifest(MANIFEST, &mut Vec::new()).unwrap();
        assert_eq!(m.package, "com.bank");
        assert_eq!(m.version_name.as_deref(), Some("2.1"));
        assert_eq!(m.application_class.as_deref(), Some("Lcom/bank/BankApp;"));
        let get = |c: &str| m.component(c).unwrap();
        assert!(get("Lcom/bank/LoginActivity;").exported);
        assert!(!get("Lcom/bank/ui/Detail;").exported);
        assert!(get("Lcom/bank/SmsReceiver;").exported);
        assert!(!get("Lcom/bank/SmsReceiver;").exported_explicit);
        assert!(!get("Lcom/bank/DataProvider;").exported);
        assert!(!get("Lcom/bank/OtherProvider;").exported);
        assert_eq!(get("Lcom/bank/Sync;").kind, ComponentKind::Service);
        assert_eq!(m.permissions, ["android.permission.INTERNET"]);
    }

    #[test]
    fn legacy_provider_default() {
        let xml = r#"<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="a"><uses-sdk android:targetSdkVersion="16"/><application><provider android:name=".P"/></application></manifest>"#;
        let m = parse_manifest(xml, &mut Vec::new()).unwrap();
        assert!(m.components[0].exported);
    }

    #[test]
    fn rejects_other_roots() {
        assert!(parse_manifest("<application/>", &mut Vec::new()).is_err());
        assert!(parse_manifest("<manifest", &mut Vec::new()).is_err());
    }
}
