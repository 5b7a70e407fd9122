//! Tab-separated task-file parsing.
//!
//! Files carry a header row; we locate the id, sentence and target columns by
//! name so column order and extra columns do not matter. Values are plain
//! (no quoting or escaping), which matches how the task data is distributed.

use std::fs;
use std::path::Path;

use super::{Annotation, Corpus, CorpusError, Example, Language, TaskMode};

/// Which header names identify the id, sentence and target columns.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub id: Vec<String>,
    pub text: Vec<String>,
    pub target: Vec<String>,
}

impl Default for ColumnMap {
    fn default() -> ColumnMap {
        let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        ColumnMap {
            id: names(&["id", "ID"]),
            text: names(&["sentence", "text", "Sentence"]),
            target: names(&["label", "labels", "score", "avg", "Label"]),
        }
    }
}

impl ColumnMap {
    /// Resolve header indices, failing with the first missing column's
    /// preferred name.
    fn resolve(&self, header: &[&str]) -> Result<(usize, usize, usize), CorpusError> {
        let find = |names: &[String]| {
            names
                .iter()
                .find_map(|n| header.iter().position(|h| h == n))
                .ok_or_else(|| CorpusError::MissingColumn {
                    column: names.first().cloned().unwrap_or_default(),
                })
        };
        Ok((find(&self.id)?, find(&self.text)?, find(&self.target)?))
    }
}

/// Parse a tab-separated task file into a corpus.
///
/// `row` in errors is the 1-based line number in the file, so the first data
/// row is row 2.
pub fn parse_task_file(
    path: &Path,
    language: Language,
    mode: TaskMode,
    columns: &ColumnMap,
) -> Result<Corpus, CorpusError> {
    let raw = fs::read_to_string(path)?;
    parse_task_str(&raw, language, mode, columns)
}

/// [`parse_task_file`] over an in-memory string.
pub fn parse_task_str(
    raw: &str,
    language: Language,
    mode: TaskMode,
    columns: &ColumnMap,
) -> Result<Corpus, CorpusError> {
    let mut lines = raw.lines().enumerate();
    let (_, header_line) = lines.next().ok_or(CorpusError::EmptyCorpus)?;
    let header: Vec<&str> = split_row(header_line);
    let (id_col, text_col, target_col) = columns.resolve(&header)?;
    let width = id_col.max(text_col).max(target_col) + 1;

    let mut examples = Vec::new();
    for (i, line) in lines {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_row(line);
        if fields.len() < width {
            return Err(CorpusError::BadRow {
                row,
                message: format!("expected at least {width} columns, found {}", fields.len()),
            });
        }
        let text = fields[text_col].trim();
        if text.is_empty() {
            return Err(CorpusError::BadRow {
                row,
                message: "empty sentence".to_string(),
            });
        }
        let target = fields[target_col].trim();
        let annotation = parse_target(target, mode).map_err(|message| CorpusError::BadRow {
            row,
            message,
        })?;
        examples.push(Example {
            id: fields[id_col].trim().to_string(),
            text: text.to_string(),
            language,
            annotation,
        });
    }
    Corpus::new(language, examples)
}

fn split_row(line: &str) -> Vec<&str> {
    line.strip_suffix('\r').unwrap_or(line).split('\t').collect()
}

fn parse_target(raw: &str, mode: TaskMode) -> Result<Annotation, String> {
    match mode {
        TaskMode::Binary => match raw {
            "0" => Ok(Annotation::Label(0)),
            "1" => Ok(Annotation::Label(1)),
            other => Err(format!("label `{other}` is not 0 or 1")),
        },
        TaskMode::Likert => {
            let score: f64 = raw
                .parse()
                .map_err(|_| format!("score `{raw}` is not a number"))?;
            if !(1.0..=7.0).contains(&score) {
                return Err(format!("score `{raw}` outside [1, 7]"));
            }
            Ok(Annotation::Score(score))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(raw: &str, mode: TaskMode) -> Result<Corpus, CorpusError> {
        parse_task_str(raw, Language::En, mode, &ColumnMap::default())
    }

    #[test]
    fn reads_binary_rows() {
        let raw = "id\tsentence\tlabel\n1\tI like beer.\t1\n2\tI like not.\t0\n";
        let corpus = parse(raw, TaskMode::Binary).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.examples[0].id, "1");
        assert_eq!(corpus.examples[0].text, "I like beer.");
        assert_eq!(corpus.examples[0].label(), Some(1));
        assert_eq!(corpus.examples[1].label(), Some(0));
    }

    #[test]
    fn column_order_is_free() {
        let raw = "label\tid\tsentence\n1\ta\tSome text here\n";
        let corpus = parse(raw, TaskMode::Binary).unwrap();
        assert_eq!(corpus.examples[0].id, "a");
        assert_eq!(corpus.examples[0].text, "Some text here");
        assert_eq!(corpus.examples[0].label(), Some(1));
    }

    #[test]
    fn crlf_line_endings_accepted() {
        let raw = "id\tsentence\tlabel\r\n1\tText one\t0\r\n";
        let corpus = parse(raw, TaskMode::Binary).unwrap();
        assert_eq!(corpus.examples[0].text, "Text one");
    }

    #[test]
    fn missing_column_named_in_error() {
        let raw = "id\tsentence\n1\tText\n";
        match parse(raw, TaskMode::Binary) {
            Err(CorpusError::MissingColumn { column }) => assert_eq!(column, "label"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn bad_label_carries_row_number() {
        let raw = "id\tsentence\tlabel\n1\tFine\t1\n2\tBroken\t2\n";
        match parse(raw, TaskMode::Binary) {
            Err(CorpusError::BadRow { row, message }) => {
                assert_eq!(row, 3);
                assert!(message.contains('2'), "{message}");
            }
            other => panic!("expected BadRow, got {other:?}"),
        }
    }

    #[test]
    fn whitespace_only_sentence_rejected() {
        let raw = "id\tsentence\tlabel\n1\t   \t1\n";
        assert!(matches!(
            parse(raw, TaskMode::Binary),
            Err(CorpusError::BadRow { row: 2, .. })
        ));
    }

    #[test]
    fn likert_scores_parse_and_range_check() {
        let raw = "id\tsentence\tavg\n1\tText\t4.5\n";
        let corpus = parse(raw, TaskMode::Likert).unwrap();
        assert_eq!(corpus.examples[0].score(), Some(4.5));

        let raw = "id\tsentence\tavg\n1\tText\t8.0\n";
        assert!(matches!(
            parse(raw, TaskMode::Likert),
            Err(CorpusError::BadRow { row: 2, .. })
        ));
    }

    #[test]
    fn blank_lines_skipped() {
        let raw = "id\tsentence\tlabel\n1\tText\t1\n\n2\tMore\t0\n";
        let corpus = parse(raw, TaskMode::Binary).unwrap();
        assert_eq!(corpus.len(), 2);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train_en.tsv");
        std::fs::write(&path, "id\tsentence\tlabel\n1\tHello there\t1\n").unwrap();
        let corpus =
            parse_task_file(&path, Language::En, TaskMode::Binary, &ColumnMap::default()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(Language::from_path(&path), Some(Language::En));
    }
}
