//! `spgkf evaluate`: summary files in, P/R/F1 report out.
//!
//! Summaries are JSON objects `{"video": .., "frame_indices": [..]}`. A user
//! summary file may also hold an array of them. Inputs come either from a
//! manifest (`[{"video", "auto_path", "user_paths": [..]}]`, paths relative
//! to the manifest) or from `--auto` files plus a `--users` directory, in
//! which case users are matched to automatic summaries by video id.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use serde::Deserialize;

use spg_keyframes::eval::{aggregate_report, score_video, MatchConfig, Summary, DEFAULT_WINDOW};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// JSON manifest listing each video's automatic and user summaries.
    #[arg(long, conflicts_with_all = ["auto", "users"], required_unless_present = "auto")]
    manifest: Option<PathBuf>,
    /// Automatic summary files.
    #[arg(long, num_args = 1.., requires = "users")]
    auto: Vec<PathBuf>,
    /// Directory of user summary files (`*.json`).
    #[arg(long, requires = "auto")]
    users: Option<PathBuf>,
    /// Matching radius in frames.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Deserialize)]
struct ManifestEntry {
    video: String,
    auto_path: PathBuf,
    user_paths: Vec<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Summary),
    Many(Vec<Summary>),
}

fn read_summaries(path: &Path) -> Result<Vec<Summary>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: OneOrMany = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a summary or list of summaries", path.display()))?;
    Ok(match parsed {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

fn read_one(path: &Path) -> Result<Summary> {
    let mut all = read_summaries(path)?;
    ensure!(
        all.len() == 1,
        "{}: expected one summary, found {}",
        path.display(),
        all.len()
    );
    Ok(all.remove(0))
}

fn from_manifest(path: &Path) -> Result<Vec<(Summary, Vec<Summary>)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed manifest", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    entries
        .into_iter()
        .map(|e| {
            let auto = read_one(&base.join(&e.auto_path))?;
            ensure!(
                auto.video() == e.video,
                "manifest entry '{}' points at a summary for '{}'",
                e.video,
                auto.video()
            );
            let mut users = Vec::new();
            for p in &e.user_paths {
                users.extend(read_summaries(&base.join(p))?);
            }
            Ok((auto, users))
        })
        .collect()
}

fn from_directory(auto: &[PathBuf], users_dir: &Path) -> Result<Vec<(Summary, Vec<Summary>)>> {
    let mut by_video: BTreeMap<String, Vec<Summary>> = BTreeMap::new();
    let entries =
        fs::read_dir(users_dir).with_context(|| format!("reading {}", users_dir.display()))?;
    let mut paths: Vec<PathBuf> = entries
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    if paths.is_empty() {
        bail!("no user summaries (*.json) in {}", users_dir.display());
    }
    for p in &paths {
        for s in read_summaries(p)? {
            by_video.entry(s.video().to_owned()).or_default().push(s);
        }
    }
    auto.iter()
        .map(|p| {
            let a = read_one(p)?;
            let users = by_video
                .remove(a.video())
                .with_context(|| format!("no user summaries for video '{}'", a.video()))?;
            Ok((a, users))
        })
        .collect()
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let pairs = match (&args.manifest, &args.users) {
        (Some(m), _) => from_manifest(m)?,
        (None, Some(dir)) => from_directory(&args.auto, dir)?,
        (None, None) => unreachable!("clap requires a manifest or --auto with --users"),
    };
    let cfg = MatchConfig {
        window: args.window,
    };
    let scores = pairs
        .iter()
        .map(|(auto, users)| score_video(auto, users, &cfg))
        .collect::<spg_keyframes::Result<Vec<_>>>()?;
    let report = aggregate_report(scores)?;
    super::emit(
        args.output.as_deref(),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )
}
