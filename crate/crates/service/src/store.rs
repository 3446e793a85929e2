//! Append-only rating store.
//!
//! The log is a text file with one JSON object per line. Every line carries a
//! schema version `v` and a `kind`:
//!
//! ```text
//! {"v":1,"kind":"query","query":{...StoredQuery...}}
//! {"v":1,"kind":"rating","record":{...RatingRecord...}}
//! ```
//!
//! Replaying the log in order rebuilds the state; a later rating for the same
//! query id replaces the earlier one. Compaction rewrites the file with only
//! the live entries and swaps it in with a rename. A torn final line, left by
//! a crash mid-write, is dropped on open.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use altroute_core::study::{QueryPoints, RatingRecord};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

pub const SCHEMA_VERSION: u32 = 1;

/// Compaction kicks in once the log has this many lines and at least twice
/// as many lines as live entries.
const COMPACT_MIN_LINES: usize = 256;

/// What the service remembers about a query until it is rated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredQuery {
    pub query_id: String,
    pub sequence: u64,
    /// Unix seconds.
    pub created: u64,
    pub city: String,
    pub query: QueryPoints,
    /// Seconds.
    pub fastest_time: f64,
    /// Label shown to the participant -> approach id.
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Entry {
    Query { query: StoredQuery },
    Rating { record: RatingRecord },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Line {
    v: u32,
    #[serde(flatten)]
    entry: Entry,
}

fn encode(entry: Entry) -> Result<String, ServiceError> {
    let mut s = serde_json::to_string(&Line {
        v: SCHEMA_VERSION,
        entry,
    })
    .map_err(|e| ServiceError::Store(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug)]
pub struct RatingStore {
    path: PathBuf,
    file: File,
    queries: BTreeMap<String, StoredQuery>,
    ratings: BTreeMap<String, RatingRecord>,
    lines: usize,
}

impl RatingStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref().to_path_buf();
        let mut queries = BTreeMap::new();
        let mut ratings = BTreeMap::new();
        let mut lines = 0;
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            let raw: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
            let mut good_bytes = 0u64;
            for (i, text) in raw.iter().enumerate() {
                if text.trim().is_empty() {
                    good_bytes += text.len() as u64 + 1;
                    continue;
                }
                let line: Line = match serde_json::from_str(text) {
                    Ok(line) => line,
                    Err(_) if i + 1 == raw.len() => {
                        tracing::warn!(path = %path.display(), "dropping torn final line");
                        OpenOptions::new()
                            .write(true)
                            .open(&path)?
                            .set_len(good_bytes)?;
                        break;
                    }
                    Err(e) => {
                        return Err(ServiceError::Store(format!(
                            "{} line {}: {e}",
                            path.display(),
                            i + 1
                        )))
                    }
                };
                if line.v != SCHEMA_VERSION {
                    return Err(ServiceError::Store(format!(
                        "{} line {}: schema version {} is not supported",
                        path.display(),
                        i + 1,
                        line.v
                    )));
                }
                match line.entry {
                    Entry::Query { query } => {
                        queries.insert(query.query_id.clone(), query);
                    }
                    Entry::Rating { record } => {
                        ratings.insert(record.query_id.clone(), record);
                    }
                }
                lines += 1;
                good_bytes += text.len() as u64 + 1;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file,
            queries,
            ratings,
            lines,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&mut self, text: &str) -> Result<(), ServiceError> {
        self.file.write_all(text.as_bytes())?;
        self.file.flush()?;
        self.file.sync_data()?;
        self.lines += 1;
        let live = self.queries.len() + self.ratings.len();
        if self.lines >= COMPACT_MIN_LINES && self.lines >= 2 * live {
            self.compact(None)?;
        }
        Ok(())
    }

    pub fn put_query(&mut self, q: StoredQuery) -> Result<(), ServiceError> {
        let text = encode(Entry::Query { query: q.clone() })?;
        self.queries.insert(q.query_id.clone(), q);
        self.append(&text)
    }

    /// Stores `r`, replacing any earlier rating of the same query.
    pub fn put_rating(&mut self, r: RatingRecord) -> Result<(), ServiceError> {
        let text = encode(Entry::Rating { record: r.clone() })?;
        self.ratings.insert(r.query_id.clone(), r);
        self.append(&text)
    }

    pub fn query(&self, id: &str) -> Option<&StoredQuery> {
        self.queries.get(id)
    }

    pub fn rating(&self, query_id: &str) -> Option<&RatingRecord> {
        self.ratings.get(query_id)
    }

    /// All current ratings, ordered by query id.
    pub fn ratings(&self) -> Vec<RatingRecord> {
        self.ratings.values().cloned().collect()
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines
    }

    /// Rewrites the log with only live entries. Unrated queries created
    /// before `drop_unrated_before` (unix seconds) are forgotten.
    pub fn compact(&mut self, drop_unrated_before: Option<u64>) -> Result<(), ServiceError> {
        if let Some(cutoff) = drop_unrated_before {
            let ratings = &self.ratings;
            self.queries
                .retain(|id, q| q.created >= cutoff || ratings.contains_key(id));
        }
        let tmp = self.path.with_extension("compact.tmp");
        {
            let mut out = File::create(&tmp)?;
            for q in self.queries.values() {
                out.write_all(encode(Entry::Query { query: q.clone() })?.as_bytes())?;
            }
            for r in self.ratings.values() {
                out.write_all(encode(Entry::Rating { record: r.clone() })?.as_bytes())?;
            }
            out.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        self.lines = self.queries.len() + self.ratings.len();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use altroute_core::GeoPoint;

    fn query(id: &str, created: u64) -> StoredQuery {
        StoredQuery {
            query_id: id.into(),
            sequence: 0,
            created,
            city: "melbourne".into(),
            query: QueryPoints {
                source: GeoPoint {
                    lat: -37.8,
                    lon: 144.9,
                },
                target: GeoPoint {
                    lat: -37.8,
                    lon: 144.92,
                },
            },
            fastest_time: 240.0,
            labels: [("A".to_string(), "plateaus".to_string())].into(),
        }
    }

    fn rating(q: &str, score: u8) -> RatingRecord {
        RatingRecord {
            response_id: format!("r-{q}"),
            query_id: q.into(),
            city: "melbourne".into(),
            query: query(q, 0).query,
            fastest_time: 240.0,
            resident: true,
            scores: [("plateaus".to_string(), score)].into(),
            labels: [("plateaus".to_string(), "A".to_string())].into(),
            timestamp: 5,
        }
    }

    #[test]
    fn survives_reopen_and_keeps_latest_rating() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ratings.jsonl");
        {
            let mut s = RatingStore::open(&path).unwrap();
            s.put_query(query("q1", 100)).unwrap();
            s.put_rating(rating("q1", 2)).unwrap();
            s.put_rating(rating("q1", 4)).unwrap();
        }
        let s = RatingStore::open(&path).unwrap();
        assert_eq!(s.query("q1").unwrap(), &query("q1", 100));
        assert_eq!(s.ratings(), vec![rating("q1", 4)]);
        assert_eq!(s.line_count(), 3);
        let first = fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert!(first.starts_with("{\"v\":1,\"kind\":\"query\""), "{first}");
    }

    #[test]
    fn compaction_drops_stale_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ratings.jsonl");
        let mut s = RatingStore::open(&path).unwrap();
        s.put_query(query("old", 10)).unwrap();
        s.put_query(query("rated", 10)).unwrap();
        s.put_query(query("new", 1_000)).unwrap();
        s.put_rating(rating("rated", 1)).unwrap();
        s.put_rating(rating("rated", 5)).unwrap();
        s.compact(Some(500)).unwrap();
        assert!(s.query("old").is_none());
        assert!(s.query("rated").is_some());
        assert_eq!(s.line_count(), 3);
        s.put_query(query("later", 2_000)).unwrap();
        drop(s);
        let s = RatingStore::open(&path).unwrap();
        assert_eq!(s.query_count(), 3);
        assert_eq!(s.rating("rated").unwrap().scores["plateaus"], 5);
    }

    #[test]
    fn automatic_compaction_bounds_the_log() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ratings.jsonl");
        let mut s = RatingStore::open(&path).unwrap();
        s.put_query(query("q", 0)).unwrap();
        for i in 0..600 {
            s.put_rating(rating("q", (i % 5 + 1) as u8)).unwrap();
        }
        assert!(s.line_count() < COMPACT_MIN_LINES);
        drop(s);
        let s = RatingStore::open(&path).unwrap();
        assert_eq!(
            s.rating("q").unwrap().scores["plateaus"],
            (599 % 5 + 1) as u8
        );
    }

    #[test]
    fn torn_tail_is_dropped_and_bad_middle_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ratings.jsonl");
        {
            let mut s = RatingStore::open(&path).unwrap();
            s.put_query(query("q1", 1)).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"v\":1,\"kind\":\"rat").unwrap();
        drop(f);
        {
            let mut s = RatingStore::open(&path).unwrap();
            assert_eq!(s.query_count(), 1);
            s.put_query(query("q2", 2)).unwrap();
        }
        assert_eq!(RatingStore::open(&path).unwrap().query_count(), 2);

        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, format!("garbage\n{text}")).unwrap();
        assert!(matches!(
            RatingStore::open(&path),
            Err(ServiceError::Store(_))
        ));
        fs::write(&path, text.replace("\"v\":1", "\"v\":2")).unwrap();
        assert!(matches!(
            RatingStore::open(&path),
            Err(ServiceError::Store(_))
        ));
    }
}
