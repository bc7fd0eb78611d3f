use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use super::{parse_class_at, SmaliProgram};
use crate::error::{Diagnostic, Error, Result};

/// Loads every `.smali` file under `root/smali*/`.
///
/// Per-file failures become diagnostics. Only a missing `smali/` tree is fatal.
pub fn load_program(root: &Path) -> Result<SmaliProgram> {
    let dirs = smali_dirs(root)?;
    if dirs.is_empty() {
        return Err(Error::MissingInput(format!("no smali/ directory under {}", root.display())));
    }

    let mut files: Vec<PathBuf> = Vec::new();
    for dir in &dirs {
        for entry in WalkDir::new(dir).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::MissingInput(e.to_string()))?;
            if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "smali") {
                files.push(entry.into_path());
            }
        }
    }

    let parsed: Vec<_> = files
        .par_iter()
        .map(|path| {
            let rel = path.strip_prefix(root).unwrap_or(path).to_path_buf();
            let result = fs::read(path)
                .map_err(|e| Error::io(path, e))
                .and_then(|bytes| {
                    let text = String::from_utf8_lossy(&bytes);
                    parse_class_at(&text, Some(&rel))
                });
            (rel, result)
        })
        .collect();

    let mut program = SmaliProgram { source_root: root.to_path_buf(), ..Default::default() };
    for (rel, result) in parsed {
        match result {
            Ok(class) => {
                if program.classes.contains_key(&class.name) {
                    program.diagnostics.push(Diagnostic::new(
                        "smali",
                        rel.display().to_string(),
                        format!("duplicate definition of {}; keeping the first", class.name),
                    ));
                } else {
                    program.classes.insert(class.name.clone(), class);
                }
            }
            Err(e) => program
                .diagnostics
                .push(Diagnostic::new("smali", rel.display().to_string(), e.to_string())),
        }
    }
    program.classify_components();
    Ok(program)
}

/// `smali/`, `smali_classes2/`, ... in dex order.
fn smali_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let rd = match fs::read_dir(root) {
        Ok(rd) => rd,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingInput(format!("{} does not exist", root.display())))
        }
        Err(e) => return Err(Error::io(root, e)),
    };
    let mut dirs: Vec<(u32, PathBuf)> = Vec::new();
    for entry in rd.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if !entry.path().is_dir() {
            continue;
        }
        let order = if name == "smali" {
            1
        } else if let Some(n) = name.strip_prefix("smali_classes") {
            match n.parse::<u32>() {
                Ok(n) => n,
                Err(_) => continue,
            }
        } else {
            continue;
        };
        dirs.push((order, entry.path()));
    }
    dirs.sort();
    if !dirs.iter().any(|(o, _)| *o == 1) {
        return Ok(Vec::new());
    }
    Ok(dirs.into_iter().map(|(_, p)| p).collect())
}
