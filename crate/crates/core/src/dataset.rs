//! Four-split benchmark loading, validation and the ranking filter set.
//!
//! Files are UTF-8 TSV with one `head<TAB>relation<TAB>tail` triplet per line.
//! Validation and test files of a classification benchmark carry a fourth
//! label column (`1` for true triplets, `-1` or `0` for false ones).

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, TripleStore, Triplet, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    LinkPrediction,
    Classification,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::LinkPrediction => "lp",
            Task::Classification => "tc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledTriplet {
    pub triplet: Triplet,
    pub positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitKind {
    Train,
    Aux,
    Valid,
    Test,
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitKind::Train => "train",
            SplitKind::Aux => "aux",
            SplitKind::Valid => "valid",
            SplitKind::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPaths {
    pub train: PathBuf,
    pub aux: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
}

impl SplitPaths {
    /// `train.txt`, `aux.txt`, `valid.txt` and `test.txt` inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        SplitPaths {
            train: dir.join("train.txt"),
            aux: dir.join("aux.txt"),
            valid: dir.join("valid.txt"),
            test: dir.join("test.txt"),
        }
    }
}

/// A triplet by name, as it appears in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedTriplet {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub label: Option<bool>,
}

impl NamedTriplet {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>) -> Self {
        NamedTriplet {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
            label: None,
        }
    }

    pub fn labeled(mut self, positive: bool) -> Self {
        self.label = Some(positive);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkSplits {
    pub task: Task,
    pub vocab: Vocabulary,
    pub train: Vec<Triplet>,
    pub aux: Vec<Triplet>,
    pub valid: Vec<LabeledTriplet>,
    pub test: Vec<LabeledTriplet>,
    ikg_mask: Vec<bool>,
    ikg: Vec<EntityId>,
    ookg: Vec<EntityId>,
}

impl BenchmarkSplits {
    /// Interns names in file order (train, aux, valid, test) and derives the
    /// IKG/OOKG partition. Unlabeled valid/test records count as positives.
    pub fn from_named(
        task: Task,
        train: &[NamedTriplet],
        aux: &[NamedTriplet],
        valid: &[NamedTriplet],
        test: &[NamedTriplet],
    ) -> Self {
        let mut vocab = Vocabulary::new();
        let mut intern = |n: &NamedTriplet| {
            let head = vocab.intern_entity(&n.head);
            let relation = vocab.intern_relation(&n.relation);
            let tail = vocab.intern_entity(&n.tail);
            Triplet::new(head, relation, tail)
        };
        let train: Vec<Triplet> = train.iter().map(&mut intern).collect();
        let aux: Vec<Triplet> = aux.iter().map(&mut intern).collect();
        let mut labeled = |n: &NamedTriplet| LabeledTriplet {
            triplet: intern(n),
            positive: n.label.unwrap_or(true),
        };
        let valid: Vec<LabeledTriplet> = valid.iter().map(&mut labeled).collect();
        let test: Vec<LabeledTriplet> = test.iter().map(&mut labeled).collect();
        Self::from_parts(task, vocab, train, aux, valid, test)
    }

    pub fn from_parts(
        task: Task,
        vocab: Vocabulary,
        train: Vec<Triplet>,
        aux: Vec<Triplet>,
        valid: Vec<LabeledTriplet>,
        test: Vec<LabeledTriplet>,
    ) -> Self {
        let n = vocab.num_entities();
        let mut ikg_mask = vec![false; n];
        for t in &train {
            ikg_mask[t.head as usize] = true;
            ikg_mask[t.tail as usize] = true;
        }
        let mut ookg_mask = vec![false; n];
        for t in aux.iter().chain(test.iter().map(|l| &l.triplet)) {
            for e in [t.head, t.tail] {
                if !ikg_mask[e as usize] {
                    ookg_mask[e as usize] = true;
                }
            }
        }
        let ikg = (0..n as u32).filter(|&e| ikg_mask[e as usize]).collect();
        let ookg = (0..n as u32).filter(|&e| ookg_mask[e as usize]).collect();
        BenchmarkSplits {
            task,
            vocab,
            train,
            aux,
            valid,
            test,
            ikg_mask,
            ikg,
            ookg,
        }
    }

    pub fn num_entities(&self) -> usize {
        self.vocab.num_entities()
    }

    pub fn num_relations(&self) -> usize {
        self.vocab.num_relations()
    }

    /// Entities of the training graph, ascending.
    pub fn ikg_entities(&self) -> &[EntityId] {
        &self.ikg
    }

    /// Entities that appear only in aux/test, ascending.
    pub fn ookg_entities(&self) -> &[EntityId] {
        &self.ookg
    }

    pub fn is_ikg(&self, e: EntityId) -> bool {
        self.ikg_mask[e as usize]
    }

    /// OOKG share of all entities.
    pub fn ookg_ratio(&self) -> f64 {
        let total = self.ikg.len() + self.ookg.len();
        if total == 0 {
            0.0
        } else {
            self.ookg.len() as f64 / total as f64
        }
    }

    pub fn train_store(&self) -> TripleStore {
        TripleStore::build(self.num_entities(), self.num_relations(), self.train.iter().copied())
            .expect("split ids come from the vocabulary")
    }

    pub fn aux_store(&self) -> TripleStore {
        TripleStore::build(self.num_entities(), self.num_relations(), self.aux.iter().copied())
            .expect("split ids come from the vocabulary")
    }

    /// OOKG test entities with no IKG neighbor in the aux set.
    pub fn dangling_entities(&self) -> Vec<EntityId> {
        let aux = self.aux_store();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for l in &self.test {
            for e in [l.triplet.head, l.triplet.tail] {
                if self.is_ikg(e) || !seen.insert(e) {
                    continue;
                }
                if !aux.neighbors_of(e).any(|n| self.is_ikg(n.entity)) {
                    out.push(e);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut flag = |split, index, triplet, reason: &str| {
            violations.push(Violation {
                split,
                index,
                triplet,
                reason: reason.to_owned(),
            })
        };
        for (i, t) in self.aux.iter().enumerate() {
            match (self.is_ikg(t.head), self.is_ikg(t.tail)) {
                (true, true) => flag(SplitKind::Aux, i, *t, "aux triplet has no OOKG entity"),
                (false, false) => flag(SplitKind::Aux, i, *t, "aux triplet joins two OOKG entities"),
                _ => {}
            }
        }
        for (i, l) in self.valid.iter().enumerate() {
            let t = l.triplet;
            if !self.is_ikg(t.head) || !self.is_ikg(t.tail) {
                flag(SplitKind::Valid, i, t, "validation triplet has a non-training entity");
            }
        }
        for (i, l) in self.test.iter().enumerate() {
            let t = l.triplet;
            if self.is_ikg(t.head) && self.is_ikg(t.tail) {
                flag(SplitKind::Test, i, t, "test triplet has no OOKG entity");
            } else if self.aux.is_empty() {
                flag(SplitKind::Test, i, t, "OOKG entity has no auxiliary neighbors (aux set is empty)");
            }
        }
        ValidationReport {
            violations,
            dangling: self.dangling_entities(),
        }
    }

    /// Writes `train.txt`, `aux.txt`, `valid.txt` and `test.txt` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<SplitPaths> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = SplitPaths::in_dir(dir);
        let labels = self.task == Task::Classification;
        self.write_file(&paths.train, self.train.iter().map(|&t| (t, None)))?;
        self.write_file(&paths.aux, self.aux.iter().map(|&t| (t, None)))?;
        let lab = |l: &LabeledTriplet| (l.triplet, labels.then_some(l.positive));
        self.write_file(&paths.valid, self.valid.iter().map(lab))?;
        self.write_file(&paths.test, self.test.iter().map(lab))?;
        Ok(paths)
    }

    fn write_file(
        &self,
        path: &Path,
        rows: impl Iterator<Item = (Triplet, Option<bool>)>,
    ) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (t, label) in rows {
            let res = match label {
                None => writeln!(
                    w,
                    "{}\t{}\t{}",
                    self.vocab.entity_name(t.head),
                    self.vocab.relation_name(t.relation),
                    self.vocab.entity_name(t.tail)
                ),
                Some(p) => writeln!(
                    w,
                    "{}\t{}\t{}\t{}",
                    self.vocab.entity_name(t.head),
                    self.vocab.relation_name(t.relation),
                    self.vocab.entity_name(t.tail),
                    if p { "1" } else { "-1" }
                ),
            };
            res.map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub split: SplitKind,
    /// Zero-based row within the split.
    pub index: usize,
    pub triplet: Triplet,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub dangling: Vec<EntityId>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self, vocab: &Vocabulary) -> String {
        let mut s = format!("{} violation(s)", self.violations.len());
        for v in self.violations.iter().take(10) {
            s.push_str(&format!(
                "\n  {} line {}: {}\t{}\t{}: {}",
                v.split,
                v.index + 1,
                vocab.entity_name(v.triplet.head),
                vocab.relation_name(v.triplet.relation),
                vocab.entity_name(v.triplet.tail),
                v.reason
            ));
        }
        if self.violations.len() > 10 {
            s.push_str(&format!("\n  ... and {} more", self.violations.len() - 10));
        }
        s
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LabelColumn {
    Forbidden,
    Required,
}

fn parse_file(path: &Path, labels: LabelColumn) -> Result<Vec<NamedTriplet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            msg,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let label = match (cols.len(), labels) {
            (3, LabelColumn::Forbidden) => None,
            (4, LabelColumn::Required) => Some(match cols[3].trim() {
                "1" | "+1" => true,
                "-1" | "0" => false,
                other => return Err(parse_err(format!("bad label {other:?}, expected 1 or -1"))),
            }),
            (4, LabelColumn::Forbidden) => {
                return Err(parse_err("unexpected label column".into()));
            }
            (3, LabelColumn::Required) => {
                return Err(parse_err("missing label column".into()));
            }
            (n, _) => return Err(parse_err(format!("expected 3 or 4 tab-separated columns, got {n}"))),
        };
        if cols[..3].iter().any(|c| c.is_empty()) {
            return Err(parse_err("empty field".into()));
        }
        out.push(NamedTriplet {
            head: cols[0].to_owned(),
            relation: cols[1].to_owned(),
            tail: cols[2].to_owned(),
            label,
        });
    }
    Ok(out)
}

/// Parses the four files without checking the split invariants.
pub fn read_splits(paths: &SplitPaths, task: Task) -> Result<BenchmarkSplits> {
    let labels = match task {
        Task::LinkPrediction => LabelColumn::Forbidden,
        Task::Classification => LabelColumn::Required,
    };
    let train = parse_file(&paths.train, LabelColumn::Forbidden)?;
    let aux = parse_file(&paths.aux, LabelColumn::Forbidden)?;
    let valid = parse_file(&paths.valid, labels)?;
    let test = parse_file(&paths.test, labels)?;
    Ok(BenchmarkSplits::from_named(task, &train, &aux, &valid, &test))
}

/// Parses and validates. Dangling OOKG entities are logged, not fatal.
pub fn load_splits(paths: &SplitPaths, task: Task) -> Result<BenchmarkSplits> {
    let splits = read_splits(paths, task)?;
    let report = splits.validate();
    if !report.is_ok() {
        return Err(Error::Validation(report.summary(&splits.vocab)));
    }
    if !report.dangling.is_empty() {
        log::warn!(
            "{} OOKG test entities have no auxiliary neighbors",
            report.dangling.len()
        );
    }
    Ok(splits)
}

/// All known true triplets; ranking removes candidates found here.
#[derive(Debug, Clone, Default)]
pub struct FilterSet(HashSet<Triplet>);

impl FilterSet {
    pub fn contains(&self, t: &Triplet) -> bool {
        self.0.contains(t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Triplet> for FilterSet {
    fn from_iter<I: IntoIterator<Item = Triplet>>(iter: I) -> Self {
        FilterSet(iter.into_iter().collect())
    }
}

/// Union of train, aux and the positive valid/test triplets.
pub fn build_filter_set(splits: &BenchmarkSplits) -> FilterSet {
    let positives = |v: &[LabeledTriplet]| -> Vec<Triplet> {
        v.iter().filter(|l| l.positive).map(|l| l.triplet).collect()
    };
    splits
        .train
        .iter()
        .chain(splits.aux.iter())
        .copied()
        .chain(positives(&splits.valid))
        .chain(positives(&splits.test))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nt(h: &str, r: &str, t: &str) -> NamedTriplet {
        NamedTriplet::new(h, r, t)
    }

    fn tiny() -> BenchmarkSplits {
        BenchmarkSplits::from_named(
            Task::LinkPrediction,
            &[nt("a", "r0", "b"), nt("b", "r1", "c"), nt("c", "r0", "a")],
            &[nt("x", "r0", "a"), nt("b", "r1", "x")],
            &[nt("a", "r1", "c")],
            &[nt("x", "r1", "c")],
        )
    }

    #[test]
    fn partition_and_validation() {
        let s = tiny();
        assert_eq!(s.ikg_entities().len(), 3);
        assert_eq!(s.ookg_entities(), &[s.vocab.entity_id("x").unwrap()]);
        let rep = s.validate();
        assert!(rep.is_ok(), "{:?}", rep);
        assert!(rep.dangling.is_empty());
    }

    #[test]
    fn filter_set_is_disjoint_union() {
        let s = tiny();
        // 3 + 2 + 1 + 1, all distinct
        assert_eq!(build_filter_set(&s).len(), 7);
    }

    #[test]
    fn filter_set_dedups_across_splits() {
        let s = BenchmarkSplits::from_named(
            Task::LinkPrediction,
            &[nt("a", "r", "b"), nt("x", "r", "b")],
            &[nt("x", "r", "a")],
            &[],
            &[nt("x", "r", "b")],
        );
        assert_eq!(build_filter_set(&s).len(), 3);
    }

    #[test]
    fn negatives_are_not_filtered() {
        let s = BenchmarkSplits::from_named(
            Task::Classification,
            &[nt("a", "r", "b")],
            &[nt("x", "r", "a")],
            &[nt("a", "r", "a").labeled(false)],
            &[nt("x", "r", "b").labeled(true), nt("b", "r", "x").labeled(false)],
        );
        let f = build_filter_set(&s);
        assert_eq!(f.len(), 3);
    }

    #[test]
    fn empty_aux_with_test_is_invalid() {
        let s = BenchmarkSplits::from_named(
            Task::LinkPrediction,
            &[nt("a", "r", "b")],
            &[],
            &[],
            &[nt("x", "r", "a")],
        );
        let rep = s.validate();
        assert!(!rep.is_ok());
        assert_eq!(rep.dangling.len(), 1);
    }

    #[test]
    fn dangling_is_flagged_not_fatal() {
        let s = BenchmarkSplits::from_named(
            Task::LinkPrediction,
            &[nt("a", "r", "b")],
            &[nt("x", "r", "a")],
            &[],
            &[nt("x", "r", "b"), nt("y", "r", "b")],
        );
        let rep = s.validate();
        assert!(rep.is_ok());
        assert_eq!(rep.dangling, vec![s.vocab.entity_id("y").unwrap()]);
    }

    #[test]
    fn structural_violations() {
        let s = BenchmarkSplits::from_named(
            Task::LinkPrediction,
            &[nt("a", "r", "b")],
            &[nt("a", "r", "b"), nt("x", "r", "y")],
            &[nt("a", "r", "z")],
            &[nt("a", "r", "b")],
        );
        let rep = s.validate();
        let splits: Vec<SplitKind> = rep.violations.iter().map(|v| v.split).collect();
        assert_eq!(
            splits,
            vec![SplitKind::Aux, SplitKind::Aux, SplitKind::Valid, SplitKind::Test]
        );
    }

    #[test]
    fn file_round_trip_and_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let s = tiny();
        let paths = s.write(dir.path()).unwrap();
        let back = load_splits(&paths, Task::LinkPrediction).unwrap();
        assert_eq!(back, s);

        // lp data read as classification: label column missing
        assert!(matches!(
            read_splits(&paths, Task::Classification),
            Err(Error::Parse { line: 1, .. })
        ));

        fs::write(&paths.test, "x\tr1\tc\t1\n").unwrap();
        assert!(matches!(
            read_splits(&paths, Task::LinkPrediction),
            Err(Error::Parse { line: 1, .. })
        ));

        fs::write(&paths.train, "a\tr0\tb\na\tr0\n").unwrap();
        match read_splits(&paths, Task::LinkPrediction) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn classification_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = BenchmarkSplits::from_named(
            Task::Classification,
            &[nt("a", "r", "b"), nt("b", "r", "c")],
            &[nt("x", "r", "a")],
            &[nt("a", "r", "c").labeled(false), nt("a", "r", "b").labeled(true)],
            &[nt("x", "r", "b").labeled(true), nt("x", "r", "c").labeled(false)],
        );
        let paths = s.write(dir.path()).unwrap();
        let text = fs::read_to_string(&paths.valid).unwrap();
        assert_eq!(text, "a\tr\tc\t-1\na\tr\tb\t1\n");
        assert_eq!(load_splits(&paths, Task::Classification).unwrap(), s);
    }
}
