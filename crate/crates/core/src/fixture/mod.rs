//! A small scripted Git history with known outdated-comment ground truth,
//! used by the end-to-end and acceptance tests.

use std::fs;
use std::path::Path;

use git2::{IndexAddOption, Repository, Signature, Time};

use crate::error::{Error, Result};

const INVENTORY_V1: &str = include_str!("inventory_v1.java");
const LEDGER_V1: &str = include_str!("ledger_v1.java");
const BASE_TIME: i64 = 1_700_000_000;

/// File path and its new content; `None` deletes the file.
type Edit = (&'static str, Option<String>);

fn replace(text: &str, from: &str, to: &str) -> String {
    assert!(text.contains(from), "fixture edit target missing: {from}");
    text.replacen(from, to, 1)
}

/// Snapshots of the ten commits, as cumulative edits.
pub fn history() -> Vec<(&'static str, Vec<Edit>)> {
    let inv1 = INVENTORY_V1.to_string();
    let inv2 = replace(&inv1, "\"full\"", "\"inventory full\"");
    let inv3 = replace(&inv2, "count = count - amount;", "count = Math.max(0, count - amount);");
    let inv4 = replace(
        &replace(&inv3, "// capacity minus count minus reserved", "// capacity minus count"),
        "capacity - count - reserved;",
        "capacity - count;",
    );
    let inv5 = replace(&inv4, "count = count + amount;", "count += amount;");
    let inv6 = replace(
        &replace(
            &replace(&inv5, "remove(int amount)", "remove(int quantity)"),
            "count - amount);",
            "count - quantity);",
        ),
        "// lower the count by the amount",
        "// lower the count by the quantity",
    );
    let led1 = LEDGER_V1.to_string();
    let led2 = led1
        .replace("Records a payment of the given value.", "Records a payment in cents.")
        .replace("record(long value)", "record(long cents)")
        .replace("add the value to", "add the cents to")
        .replace("total + value;", "total + cents;")
        .replace("log the payment value", "log the payment cents")
        .replace("\"paid \" + value", "\"paid \" + cents");
    let led3 = replace(&led2, "\"paid \"", "\"paid: \"");
    let led4 = replace(&led3, "private long total;", "private long total = 0;");
    let readme1 = "Inventory and ledger demo.\n".to_string();
    let readme2 = "Inventory and ledger demo, fixture history.\n".to_string();
    vec![
        ("Add inventory", vec![("src/Inventory.java", Some(inv1))]),
        ("Name the full state", vec![("src/Inventory.java", Some(inv2))]),
        ("Clamp removals at zero", vec![("src/Inventory.java", Some(inv3))]),
        ("Drop reservations", vec![("src/Inventory.java", Some(inv4))]),
        ("Use compound add", vec![("src/Inventory.java", Some(inv5))]),
        ("Rename removal parameter", vec![("src/Inventory.java", Some(inv6))]),
        (
            "Add ledger",
            vec![("src/Ledger.java", Some(led1)), ("README.md", Some(readme1))],
        ),
        ("Store cents", vec![("src/Ledger.java", Some(led2))]),
        ("Tweak payment log", vec![("src/Ledger.java", Some(led3))]),
        (
            "Initialize total",
            vec![("src/Ledger.java", Some(led4)), ("README.md", Some(readme2))],
        ),
    ]
}

/// The held-out change: `available` stops reading `count` but its comment
/// still mentions it.
pub fn held_out_edit(inventory: &str) -> String {
    replace(inventory, "int free = capacity - count;", "int free = capacity - stock.size();")
}

fn commit(repo: &Repository, message: &str, edits: &[Edit], index: i64) -> Result<String> {
    let root = repo.workdir().ok_or_else(|| Error::invalid("fixture repository is bare"))?;
    for (path, content) in edits {
        let full = root.join(path);
        match content {
            Some(text) => {
                if let Some(dir) = full.parent() {
                    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                }
                fs::write(&full, text).map_err(|e| Error::io(&full, e))?;
            }
            None => fs::remove_file(&full).map_err(|e| Error::io(&full, e))?,
        }
    }
    let mut idx = repo.index()?;
    idx.add_all(["*"], IndexAddOption::DEFAULT, None)?;
    idx.update_all(["*"], None)?;
    idx.write()?;
    let tree = repo.find_tree(idx.write_tree()?)?;
    let sig = Signature::new("Fixture Author", "fixture@example.com", &Time::new(BASE_TIME + index * 3600, 0))?;
    let parent = match repo.head() {
        Ok(h) => Some(h.peel_to_commit()?),
        Err(_) => None,
    };
    let parents: Vec<&git2::Commit> = parent.iter().collect();
    let id = repo.commit(Some("HEAD"), &sig, &sig, message, &tree, &parents)?;
    Ok(id.to_string())
}

/// Creates the ten-commit repository in `dir`; returns commit ids, oldest
/// first. Ids are stable across runs.
pub fn build_history_repo(dir: &Path) -> Result<Vec<String>> {
    let repo = Repository::init(dir).map_err(|source| Error::Repository {
        path: dir.to_path_buf(),
        source,
    })?;
    history()
        .iter()
        .enumerate()
        .map(|(i, (msg, edits))| commit(&repo, msg, edits, i as i64))
        .collect()
}

/// Appends the held-out commit to a repository made by
/// [`build_history_repo`]; returns its id.
pub fn add_held_out_commit(dir: &Path) -> Result<String> {
    let repo = Repository::open(dir).map_err(|source| Error::Repository {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join("src/Inventory.java");
    let current = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    commit(
        &repo,
        "Read stock size",
        &[("src/Inventory.java", Some(held_out_edit(&current)))],
        history().len() as i64,
    )
}
