use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::Diagnostic;
use crate::smali::{Literal, SmaliProgram};

/// Numeric resource ids, from `res/values/public.xml` and the generated
/// `R$<type>` classes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RTable {
    by_name: BTreeMap<(String, String), i64>,
    by_value: BTreeMap<i64, (String, String)>,
}

impl RTable {
    pub fn insert(&mut self, ty: &str, name: &str, value: i64) {
        let key = (ty.to_string(), name.to_string());
        self.by_value.entry(value).or_insert_with(|| key.clone());
        self.by_name.entry(key).or_insert(value);
    }

    pub fn id_of(&self, ty: &str, name: &str) -> Option<i64> {
        self.by_name.get(&(ty.to_string(), name.to_string())).copied()
    }

    /// `(type, name)` for a numeric id.
    pub fn name_of(&self, value: i64) -> Option<(&str, &str)> {
        self.by_value.get(&value).map(|(t, n)| (t.as_str(), n.as_str()))
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    /// Builds the table from `public.xml` (if present) and `R$*` classes.
    pub fn load(root: &Path, program: &SmaliProgram, diags: &mut Vec<Diagnostic>) -> RTable {
        let mut table = RTable::default();
        let public = root.join("res/values/public.xml");
        if let Ok(text) = fs::read_to_string(&public) {
            match roxmltree::Document::parse(&text) {
                Ok(doc) => {
                    for n in doc.descendants().filter(|n| n.has_tag_name("public")) {
                        let (Some(ty), Some(name), Some(id)) = (n.attribute("type"), n.attribute("name"), n.attribute("id"))
                        else {
                            continue;
                        };
                        match parse_id(id) {
                            Some(v) => table.insert(ty, name, v),
                            None => diags.push(Diagnostic::new("resources", "res/values/public.xml", format!("bad id `{id}` for {name}"))),
                        }
                    }
                }
                Err(e) => diags.push(Diagnostic::new("resources", "res/values/public.xml", format!("malformed xml: {e}"))),
            }
        }
        for class in program.classes.values() {
            let Some(ty) = r_class_type(&class.name) else { continue };
            for f in class.fields.iter().filter(|f| f.is_static() && f.ty == "I") {
                if let Some(Literal::Int(v)) = f.initial {
                    table.insert(ty, &f.name, v);
                }
            }
        }
        table
    }
}

/// `Lcom/app/R$id;` -> `id`
fn r_class_type(desc: &str) -> Option<&str> {
    let inner = desc.strip_prefix('L')?.strip_suffix(';')?;
    let simple = inner.rsplit('/').next()?;
    simple.strip_prefix("R$")
}

fn parse_id(s: &str) -> Option<i64> {
    let s = s.trim();
    match s.strip_prefix("0x") {
        Some(h) => i64::from_str_radix(h, 16).ok(),
        None => s.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smali::parse_class;

    #[test]
    fn reads_r_id_fields() {
        let c = parse_class(".class public final Lcom/b/R$id;\n.super Ljava/lang/Object;\n.field public static final edit_PIN:I = 0x7f0a0042\n").unwrap();
        let p = SmaliProgram::from_classes([c]);
        let t = RTable::load(Path::new("/nonexistent"), &p, &mut Vec::new());
        assert_eq!(t.id_of("id", "edit_PIN"), Some(0x7f0a0042));
        assert_eq!(t.name_of(0x7f0a0042), Some(("id", "edit_PIN")));
    }
}
