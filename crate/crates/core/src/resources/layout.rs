use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::Diagnostic;

const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    TextView,
    EditText,
    Button,
    Other,
}

impl ViewKind {
    /// Classifies a layout tag such as `EditText`,
    /// `com.google.android.material.textfield.TextInputEditText` or
    /// `androidx.appcompat.widget.AppCompatTextView`.
    pub fn of_tag(tag: &str) -> ViewKind {
        let simple = tag.rsplit('.').next().unwrap_or(tag);
        if simple.ends_with("EditText") || simple.ends_with("AutoCompleteTextView") {
            ViewKind::EditText
        } else if simple.ends_with("Button") || simple == "CheckBox" || simple == "Switch" {
            ViewKind::Button
        } else if simple.ends_with("TextView") {
            ViewKind::TextView
        } else {
            ViewKind::Other
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewElement {
    pub view_kind: ViewKind,
    /// Symbolic id without the `@+id/` prefix.
    pub resource_id: Option<String>,
    pub label_text: Option<String>,
    pub hint: Option<String>,
    pub layout_file: String,
    /// Document order within the layout file.
    pub position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    #[serde(rename = "TextView,EditText")]
    TextViewEditText,
    #[serde(rename = "TextView,TextView")]
    TextViewTextView,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPair {
    pub label: String,
    pub target: String,
    pub pair_kind: PairKind,
    pub layout_file: String,
}

/// One parsed layout file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Layout {
    pub file: String,
    pub views: Vec<ViewElement>,
    /// Method names from `android:onClick` attributes.
    pub click_handlers: Vec<String>,
}

/// `res/values*/strings.xml` style string table. Default-locale entries
/// win; qualified directories only fill gaps.
pub fn parse_strings(root: &Path, diags: &mut Vec<Diagnostic>) -> BTreeMap<String, String> {
    let res = root.join("res");
    let mut dirs: Vec<_> = match fs::read_dir(&res) {
        Ok(rd) => rd
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("values")))
            .collect(),
        Err(_) => return BTreeMap::new(),
    };
    // `values` sorts before `values-xx`
    dirs.sort();
    let mut table = BTreeMap::new();
    for dir in dirs {
        let mut files: Vec<_> = fs::read_dir(&dir)
            .map(|rd| rd.flatten().map(|e| e.path()).filter(|p| p.extension().is_some_and(|x| x == "xml")).collect())
            .unwrap_or_default();
        files.sort();
        for file in files {
            let Ok(text) = fs::read_to_string(&file) else { continue };
            let doc = match roxmltree::Document::parse(&text) {
                Ok(d) => d,
                Err(e) => {
                    diags.push(Diagnostic::new("resources", rel(root, &file), format!("malformed xml: {e}")));
                    continue;
                }
            };
            for node in doc.descendants().filter(|n| n.has_tag_name("string")) {
                if let Some(name) = node.attribute("name") {
                    let value: String = node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect();
                    table.entry(name.to_string()).or_insert_with(|| unescape_resource(value.trim()));
                }
            }
        }
    }
    // one level of @string/ indirection
    let snapshot = table.clone();
    for v in table.values_mut() {
        if let Some(key) = v.strip_prefix("@string/") {
            if let Some(target) = snapshot.get(key) {
                *v = target.clone();
            }
        }
    }
    table
}

fn unescape_resource(s: &str) -> String {
    let s = s.strip_prefix('"').and_then(|x| x.strip_suffix('"')).unwrap_or(s);
    s.replace("\\'", "'").replace("\\\"", "\"").replace("\\n", "\n")
}

pub(crate) fn rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

/// Parses every `res/layout*/*.xml` file.
pub fn parse_layouts(
    root: &Path,
    strings: &BTreeMap<String, String>,
    diags: &mut Vec<Diagnostic>,
) -> Vec<Layout> {
    let res = root.join("res");
    let mut files: Vec<_> = WalkDir::new(&res)
        .min_depth(2)
        .max_depth(2)
        .sort_by_file_name()
        .into_iter()
        .flatten()
        .filter(|e| {
            e.file_type().is_file()
                && e.path().extension().is_some_and(|x| x == "xml")
                && e.path()
                    .parent()
                    .and_then(|p| p.file_name())
                    .is_some_and(|n| n.to_string_lossy().starts_with("layout"))
        })
        .map(|e| e.into_path())
        .collect();
    files.sort();
    let mut layouts = Vec::new();
    for file in files {
        let name = rel(root, &file);
        let text = match fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => {
                diags.push(Diagnostic::new("resources", &name, e.to_string()));
                continue;
            }
        };
        match parse_layout_text(&text, &name, strings) {
            Ok((layout, mut d)) => {
                diags.append(&mut d);
                layouts.push(layout);
            }
            Err(msg) => diags.push(Diagnostic::new("resources", &name, format!("malformed xml: {msg}"))),
        }
    }
    layouts
}

/// Parses one layout document.
pub fn parse_layout_text(
    text: &str,
    file: &str,
    strings: &BTreeMap<String, String>,
) -> Result<(Layout, Vec<Diagnostic>), String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let mut views = Vec::new();
    let mut diags = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut click_handlers = Vec::new();
    for node in doc.descendants().filter(|n| n.is_element()) {
        if let Some(h) = node.attribute((ANDROID_NS, "onClick")) {
            if !click_handlers.iter().any(|x| x == h) {
                click_handlers.push(h.to_string());
            }
        }
        let kind = ViewKind::of_tag(node.tag_name().name());
        if kind == ViewKind::Other {
            continue;
        }
        let attr = |name: &str| node.attribute((ANDROID_NS, name)).or_else(|| node.attribute(name));
        let mut resource_id = attr("id").and_then(id_name);
        let label_text = attr("text").and_then(|t| resolve_text(t, strings));
        let hint = attr("hint").and_then(|t| resolve_text(t, strings));
        if resource_id.is_none() && label_text.is_none() && hint.is_none() {
            continue;
        }
        if let Some(id) = &resource_id {
            if !seen_ids.insert(id.clone()) {
                diags.push(Diagnostic::new("resources", file, format!("duplicate view id `{id}`; later occurrence ignored")));
                resource_id = None;
            }
        }
        views.push(ViewElement {
            view_kind: kind,
            resource_id,
            label_text,
            hint,
            layout_file: file.to_string(),
            position: views.len(),
        });
    }
    Ok((Layout { file: file.to_string(), views, click_handlers }, diags))
}

fn id_name(raw: &str) -> Option<String> {
    let s = raw.trim();
    let name = s
        .strip_prefix("@+id/")
        .or_else(|| s.strip_prefix("@id/"))
        .or_else(|| s.strip_prefix("@android:id/"))?;
    (!name.is_empty()).then(|| name.to_string())
}

fn resolve_text(raw: &str, strings: &BTreeMap<String, String>) -> Option<String> {
    let t = raw.trim();
    if let Some(key) = t.strip_prefix("@string/") {
        return strings.get(key).cloned();
    }
    if t.starts_with('@') || t.starts_with('?') || t.is_empty() {
        return None;
    }
    Some(t.to_string())
}

/// Pairs labels with the views they describe.
///
/// A TextView carrying text becomes the pending label, replacing any earlier
/// one. The next EditText, or text-less TextView, with an id consumes it, so a
/// label describes at most one element.
/// Buttons and other views neither consume nor clear the pending label.
pub fn pair_labels(views: &[ViewElement]) -> Vec<LabelPair> {
    let mut pairs = Vec::new();
    let mut pending: Option<&ViewElement> = None;
    for v in views {
        match v.view_kind {
            ViewKind::EditText => {
                if let (Some(label), Some(id)) = (pending, &v.resource_id) {
                    pairs.push(make_pair(label, id, PairKind::TextViewEditText));
                    pending = None;
                }
            }
            ViewKind::TextView if v.label_text.is_some() => pending = Some(v),
            ViewKind::TextView => {
                if let (Some(label), Some(id)) = (pending, &v.resource_id) {
                    pairs.push(make_pair(label, id, PairKind::TextViewTextView));
                    pending = None;
                }
            }
            _ => {}
        }
    }
    pairs
}

fn make_pair(label: &ViewElement, target: &str, kind: PairKind) -> LabelPair {
    LabelPair {
        label: label.label_text.clone().unwrap_or_default(),
        target: target.to_string(),
        pair_kind: kind,
        layout_file: label.layout_file.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(kind: ViewKind, id: Option<&str>, text: Option<&str>, pos: usize) -> ViewElement {
        ViewElement {
            view_kind: kind,
            resource_id: id.map(String::from),
            label_text: text.map(String::from),
            hint: None,
            layout_file: "res/layout/a.xml".into(),
            position: pos,
        }
    }

    const LOGIN: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<LinearLayout xmlns:android="http://schemas.android.com/apk/res/android" android:id="@+id/root">
    <TextView android:layout_width="wrap_content" android:text="Password" />
    <EditText android:id="@+id/edit_pwd" android:inputType="textPassword" />
    <ImageView android:id="@+id/logo" />
    <TextView android:id="@+id/text_balance_label" android:text="@string/text_balance" />
</LinearLayout>"#;

    #[test]
    fn layout_views_in_document_order() {
        let strings = BTreeMap::from([("text_balance".to_string(), "Account balance".to_string())]);
        let (layout, diags) = parse_layout_text(LOGIN, "res/layout/login.xml", &strings).unwrap();
        assert!(diags.is_empty());
        let v = &layout.views;
        assert_eq!(v.len(), 3);
        assert_eq!(v[0].view_kind, ViewKind::TextView);
        assert_eq!(v[0].label_text.as_deref(), Some("Password"));
        assert_eq!(v[1].resource_id.as_deref(), Some("edit_pwd"));
        assert_eq!(v[1].view_kind, ViewKind::EditText);
        assert_eq!(v[2].label_text.as_deref(), Some("Account balance"));
        assert!(v.windows(2).all(|w| w[0].position < w[1].position));
    }

    #[test]
    fn layout_without_text_views_is_empty() {
        let xml = r#"<FrameLayout xmlns:android="http://schemas.android.com/apk/res/android"><ImageView android:id="@+id/x"/></FrameLayout>"#;
        let (layout, _) = parse_layout_text(xml, "f", &BTreeMap::new()).unwrap();
        assert!(layout.views.is_empty());
    }

    #[test]
    fn malformed_layout_is_an_error() {
        assert!(parse_layout_text("<LinearLayout>", "f", &BTreeMap::new()).is_err());
    }

    #[test]
    fn view_kinds() {
        assert_eq!(ViewKind::of_tag("com.google.android.material.textfield.TextInputEditText"), ViewKind::EditText);
        assert_eq!(ViewKind::of_tag("androidx.appcompat.widget.AppCompatTextView"), ViewKind::TextView);
        assert_eq!(ViewKind::of_tag("ImageButton"), ViewKind::Button);
        assert_eq!(ViewKind::of_tag("Spinner"), ViewKind::Other);
    }

    #[test]
    fn pairs_pin_label_with_field() {
        let views = [
            view(ViewKind::TextView, None, Some("PIN"), 0),
            view(ViewKind::EditText, Some("edit_PIN"), None, 1),
        ];
        let pairs = pair_labels(&views);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].label, "PIN");
        assert_eq!(pairs[0].target, "edit_PIN");
        assert_eq!(pairs[0].pair_kind, PairKind::TextViewEditText);
    }

    #[test]
    fn no_label_no_pair() {
        assert!(pair_labels(&[view(ViewKind::EditText, Some("e"), None, 0)]).is_empty());
    }

    #[test]
    fn label_is_consumed_once() {
        let views = [
            view(ViewKind::TextView, None, Some("Name"), 0),
            view(ViewKind::EditText, Some("e1"), None, 1),
            view(ViewKind::EditText, Some("e2"), None, 2),
        ];
        let pairs = pair_labels(&views);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].target, "e1");
    }

    #[test]
    fn text_view_pair_and_nearest_label() {
        let views = [
            view(ViewKind::TextView, None, Some("First"), 0),
            view(ViewKind::TextView, None, Some("Balance"), 1),
            view(ViewKind::Button, Some("btn"), Some("Go"), 2),
            view(ViewKind::TextView, Some("text_balance"), None, 3),
        ];
        let pairs = pair_labels(&views);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].label, "Balance");
        assert_eq!(pairs[0].pair_kind, PairKind::TextViewTextView);
    }

    #[test]
    fn string_values_keep_markup_text_once() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("res/values")).unwrap();
        std::fs::write(
            dir.path().join("res/values/strings.xml"),
            r#"<resources><string name="a">Password</string><string name="b">Card <b>number</b></string></resources>"#,
        )
        .unwrap();
        let t = parse_strings(dir.path(), &mut Vec::new());
        assert_eq!(t["a"], "Password");
        assert_eq!(t["b"], "Card number");
    }
}
