//! Commit history ingestion and the labeled dataset file.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use git2::{DiffOptions, Oid, Repository, Sort};
use serde::{Deserialize, Serialize};

use crate::change::{build_pair_change, label_pair, PairChange};
use crate::distiller::parser::{parse, GrammarId};
use crate::error::{Error, Result};
use crate::linker::{align_pairs, extract_pairs};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedFile {
    pub path: String,
    /// Absent when the commit adds the file.
    pub old_source: Option<String>,
    /// Absent when the commit deletes the file.
    pub new_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub commit_id: String,
    pub timestamp: i64,
    pub changed_files: Vec<ChangedFile>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryScan {
    pub commits: Vec<CommitRecord>,
    /// Commits dropped because a blob could not be read as UTF-8 text.
    pub skipped: usize,
    pub merges: usize,
}

fn wanted(path: &str, extensions: &[String]) -> bool {
    if extensions.is_empty() {
        return true;
    }
    let ext = Path::new(path).extension().and_then(|e| e.to_str()).unwrap_or("");
    extensions.iter().any(|e| e.trim_start_matches('.') == ext)
}

fn blob_text(repo: &Repository, id: Oid) -> Result<Option<String>> {
    let blob = repo.find_blob(id)?;
    Ok(std::str::from_utf8(blob.content()).ok().map(str::to_string))
}

fn commit_record(repo: &Repository, commit: &git2::Commit, extensions: &[String]) -> Result<Option<CommitRecord>> {
    let tree = commit.tree()?;
    let parent_tree = match commit.parent_count() {
        0 => None,
        _ => Some(commit.parent(0)?.tree()?),
    };
    let mut opts = DiffOptions::new();
    opts.ignore_submodules(true);
    let diff = repo.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))?;
    let mut changed_files = Vec::new();
    for delta in diff.deltas() {
        let (old, new) = (delta.old_file(), delta.new_file());
        let Some(path) = new.path().or(old.path()).and_then(|p| p.to_str()) else {
            continue;
        };
        if !wanted(path, extensions) {
            continue;
        }
        let side = |f: &git2::DiffFile| -> Result<Option<Option<String>>> {
            if f.id().is_zero() || !f.exists() {
                return Ok(Some(None));
            }
            // A non-text blob poisons the whole commit.
            Ok(blob_text(repo, f.id())?.map(Some))
        };
        let (Some(old_source), Some(new_source)) = (side(&old)?, side(&new)?) else {
            return Ok(None);
        };
        if old_source.is_none() && new_source.is_none() {
            continue;
        }
        changed_files.push(ChangedFile {
            path: path.to_string(),
            old_source,
            new_source,
        });
    }
    Ok(Some(CommitRecord {
        commit_id: commit.id().to_string(),
        timestamp: commit.time().seconds(),
        changed_files,
    }))
}

/// All first-parent, non-merge commits reachable from HEAD, oldest first.
pub fn scan_history(repo_path: &Path, extensions: &[String]) -> Result<HistoryScan> {
    scan_commits(repo_path, extensions, None)
}

/// Like [`scan_history`], restricted to `range`: either `A..B` or a single
/// revision meaning just that commit.
pub fn scan_commits(repo_path: &Path, extensions: &[String], range: Option<&str>) -> Result<HistoryScan> {
    let repo = Repository::open(repo_path).map_err(|source| Error::Repository {
        path: repo_path.to_path_buf(),
        source,
    })?;
    let mut walk = repo.revwalk()?;
    walk.set_sorting(Sort::TOPOLOGICAL | Sort::TIME | Sort::REVERSE)?;
    match range {
        Some(r) if r.contains("..") => walk.push_range(r)?,
        Some(r) => {
            let commit = repo.revparse_single(r)?.peel_to_commit()?;
            walk.push(commit.id())?;
            if commit.parent_count() > 0 {
                walk.hide(commit.parent_id(0)?)?;
            }
        }
        None => match repo.head() {
            Ok(head) => walk.push(head.peel_to_commit()?.id())?,
            // Unborn HEAD: nothing committed yet.
            Err(e) if e.code() == git2::ErrorCode::UnbornBranch || e.code() == git2::ErrorCode::NotFound => {
                return Ok(HistoryScan::default())
            }
            Err(e) => return Err(e.into()),
        },
    }
    walk.simplify_first_parent()?;
    let mut scan = HistoryScan::default();
    for oid in walk {
        let commit = repo.find_commit(oid?)?;
        if commit.parent_count() > 1 {
            scan.merges += 1;
            continue;
        }
        match commit_record(&repo, &commit, extensions)? {
            Some(rec) => scan.commits.push(rec),
            None => {
                log::warn!("skipping commit {}: non-text source blob", commit.id());
                scan.skipped += 1;
            }
        }
    }
    // Stable, so commits sharing a second keep their topological order.
    scan.commits.sort_by_key(|c| c.timestamp);
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub pair_change: PairChange,
    pub project: String,
    pub commit_id: String,
    pub path: String,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineOptions {
    /// Keep aligned pairs whose comment changed while the code did not.
    pub include_comment_only: bool,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            include_comment_only: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinedCommit {
    pub records: Vec<DatasetRecord>,
    /// Files whose old or new revision failed to parse.
    pub unparsed_files: usize,
}

/// Aligned pair changes of one commit. Pairs whose code and comment both
/// stayed the same are not records.
pub fn mine_commit(commit: &CommitRecord, project: &str, options: &MineOptions) -> MinedCommit {
    let mut out = MinedCommit::default();
    for file in &commit.changed_files {
        let (Some(old_src), Some(new_src)) = (&file.old_source, &file.new_source) else {
            continue;
        };
        let ext = Path::new(&file.path).extension().and_then(|e| e.to_str()).unwrap_or("");
        let grammar = GrammarId::for_extension(ext).unwrap_or_default();
        let (old_tree, new_tree) = match (parse(old_src, grammar), parse(new_src, grammar)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                log::warn!("{}@{}: {e}", file.path, commit.commit_id);
                out.unparsed_files += 1;
                continue;
            }
        };
        let aligned = align_pairs(&extract_pairs(old_src, &old_tree), &extract_pairs(new_src, &new_tree));
        for a in aligned {
            let (Some(old), Some(new)) = (&a.old, &a.new) else {
                continue;
            };
            let code_changed = old.code_text() != new.code_text();
            let comment_changed = label_pair(&old.comment_text, &new.comment_text) == 1;
            if !code_changed && !(comment_changed && options.include_comment_only) {
                continue;
            }
            match build_pair_change(old, new, &old_tree, &new_tree, grammar) {
                Ok(pc) => out.records.push(DatasetRecord {
                    label: pc.label,
                    pair_change: pc,
                    project: project.to_string(),
                    commit_id: commit.commit_id.clone(),
                    path: file.path.clone(),
                }),
                Err(e) => {
                    log::warn!("{}@{}: {e}", file.path, commit.commit_id);
                    out.unparsed_files += 1;
                }
            }
        }
    }
    out
}

pub fn write_dataset<W: Write>(records: &[DatasetRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<dataset>", e))?;
    }
    Ok(())
}

pub fn persist_dataset(records: &[DatasetRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset(records, &mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads JSON Lines; blank lines are ignored.
pub fn read_dataset<R: BufRead>(input: R, path: &Path) -> Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: DatasetRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let pc = &rec.pair_change;
        let expected = label_pair(&pc.old_pair.comment_text, &pc.new_pair.comment_text);
        if rec.label != expected || pc.label != expected {
            return Err(bad(format!("label {} disagrees with the comments", rec.label)));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), path)
}
