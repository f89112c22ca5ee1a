//! Reading texts and category directories from disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use stylodist::classify::{Feature, TextInputs};
use stylodist::features::{parse_tagged_tsv, parse_trees};

/// File extension that carries each feature's input.
pub fn extension(feature: Feature) -> &'static str {
    match feature {
        Feature::Letters => "txt",
        Feature::Pos => "tsv",
        Feature::Grammar => "trees",
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Files directly inside `dir`, sorted by name.
fn files_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in
        fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?
    {
        let path = entry?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Checks one file on its own so diagnostics point at the right file and line.
fn check_file(path: &Path, feature: Feature, text: &str) -> Result<()> {
    let checked = match feature {
        Feature::Letters => Ok(()),
        Feature::Pos => parse_tagged_tsv(text).map(drop),
        Feature::Grammar => parse_trees(text).map(drop),
    };
    checked.with_context(|| path.display().to_string())
}

/// Loads every feature input found among `paths`. A directory contributes
/// its files; several files of one kind are concatenated in name order.
pub fn load(paths: &[PathBuf], terminators: &[char]) -> Result<TextInputs> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            files.extend(files_in(path)?);
        } else {
            files.push(path.clone());
        }
    }

    let mut inputs = TextInputs::new();
    let mut found = false;
    for feature in Feature::DEFAULT_ORDER {
        let mut joined = String::new();
        let mut matched = Vec::new();
        for file in &files {
            if file.extension().and_then(|e| e.to_str()) == Some(extension(feature)) {
                let text = read(file)?;
                check_file(file, feature, &text)?;
                joined.push_str(&text);
                joined.push_str("\n\n");
                matched.push(file.display().to_string());
            }
        }
        if matched.is_empty() {
            continue;
        }
        found = true;
        let sources = matched.join(", ");
        inputs = match feature {
            Feature::Letters => inputs.with_raw_text_terminated(&joined, terminators),
            Feature::Pos => inputs.with_tagged_tsv(&joined),
            Feature::Grammar => inputs.with_trees(&joined),
        }
        .with_context(|| sources)?;
    }
    if !found {
        let listed: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
        bail!("no .txt, .tsv or .trees input in {}", listed.join(", "));
    }
    Ok(inputs)
}

/// One category per subdirectory of `dir`, sorted by name.
pub fn load_categories(dir: &Path, terminators: &[char]) -> Result<Vec<(String, TextInputs)>> {
    if !dir.is_dir() {
        bail!("category directory {} does not exist", dir.display());
    }
    let mut subdirs = Vec::new();
    for entry in
        fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?
    {
        let path = entry?.path();
        if path.is_dir() {
            subdirs.push(path);
        }
    }
    subdirs.sort();
    if subdirs.is_empty() {
        bail!("{} has no category subdirectories", dir.display());
    }
    subdirs
        .into_iter()
        .map(|path| {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .with_context(|| format!("category name of {} is not valid UTF-8", path.display()))?
                .to_string();
            let inputs = load(&[path], terminators)?;
            Ok((name, inputs))
        })
        .collect()
}
