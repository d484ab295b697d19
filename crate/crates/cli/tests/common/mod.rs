#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap()
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub struct Outcome {
    pub code: i32,
    pub stderr: String,
}

/// Runs the `fluency` binary and returns its exit code and stderr.
pub fn fluency<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_fluency"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code().unwrap_or(-1),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs `fluency --config <config> --output <out> <command>` plus `extra`.
pub fn stage(config: &Path, out: &Path, command: &str, extra: &[&str]) -> Outcome {
    let mut args: Vec<std::ffi::OsString> = vec![
        "--config".into(),
        config.into(),
        "--output".into(),
        out.into(),
        command.into(),
    ];
    args.extend(extra.iter().map(|s| s.into()));
    fluency(args)
}

pub fn ok(o: &Outcome) {
    assert_eq!(o.code, 0, "command failed: {}", o.stderr);
}

/// Every file under `dir`, keyed by its path relative to `dir`.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

/// Quotes a path as a TOML string.
pub fn q(path: &Path) -> String {
    toml_string(&path.to_string_lossy())
}

pub fn toml_string(s: &str) -> String {
    format!("{:?}", s)
}

/// Config cleaning the dirty fixture with the recorded ConceptNet edges,
/// with every writable path inside `dir`.
pub fn cleaning_config(dir: &Path, dataset: &Path) -> PathBuf {
    let path = dir.join("clean.toml");
    let text = format!(
        "output_dir = {out}\n\n[dataset]\npath = {data}\n\n[cleaning]\nlexicon_cache = {cache}\nconceptnet_fixture = {edges}\nmax_distance = 3\n",
        out = q(&dir.join("out")),
        data = q(dataset),
        cache = q(&dir.join("lexicons.json")),
        edges = q(&fixture("cleaning/conceptnet_edges.json")),
    );
    fs::write(&path, text).unwrap();
    path
}

pub fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}
