use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Ham,
    Spam,
}

impl Label {
    /// Binary target: spam is the positive class.
    pub fn target(self) -> f64 {
        match self {
            Label::Ham => 0.0,
            Label::Spam => 1.0,
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "ham" => Some(Label::Ham),
            "spam" => Some(Label::Spam),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Ham => "ham",
            Label::Spam => "spam",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub label: Label,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCorpus {
    pub records: Vec<Record>,
}

impl RawCorpus {
    pub fn new(records: Vec<Record>) -> Self {
        RawCorpus { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.text.as_str())
    }

    /// Parse the UCI SMS Spam format: one `<label>\t<text>` record per line.
    pub fn parse(source: &str, origin: &str) -> Result<RawCorpus> {
        let mut records = Vec::new();
        for (idx, raw) in source.split('\n').enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message,
            };
            let (label, text) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `<label>\\t<text>`, found no tab".into()))?;
            let label = Label::parse(label)
                .ok_or_else(|| parse_err(format!("unknown label {label:?}")))?;
            records.push(Record {
                label,
                text: text.to_string(),
            });
        }
        Ok(RawCorpus { records })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        for r in &self.records {
            writeln!(out, "{}\t{}", r.label, r.text)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Load a corpus file in the UCI SMS Spam layout.
pub fn load_corpus(path: &Path) -> Result<RawCorpus> {
    if !path.is_file() {
        return Err(Error::DatasetMissing(path.to_path_buf()));
    }
    let bytes = fs::read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    RawCorpus::parse(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_records() {
        let c = RawCorpus::parse("ham\tOk lar...\nspam\tWIN now\n\n", "mem").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.records[0],
            Record {
                label: Label::Ham,
                text: "Ok lar...".into()
            }
        );
        assert_eq!(c.records[1].label, Label::Spam);
    }

    #[test]
    fn tabs_inside_text_are_kept() {
        let c = RawCorpus::parse("ham\ta\tb", "mem").unwrap();
        assert_eq!(c.records[0].text, "a\tb");
    }

    #[test]
    fn crlf_is_tolerated() {
        let c = RawCorpus::parse("ham\thi\r\nspam\tyo\r\n", "mem").unwrap();
        assert_eq!(c.records[0].text, "hi");
        assert_eq!(c.records[1].text, "yo");
    }

    #[test]
    fn missing_tab_names_line() {
        let err = RawCorpus::parse("ham\tfine\nno tab here\n", "x.txt").unwrap_err();
        match err {
            Error::Parse { line, path, .. } => {
                assert_eq!(line, 2);
                assert_eq!(path, "x.txt");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn labels_are_case_sensitive() {
        assert!(matches!(
            RawCorpus::parse("Ham\thello", "x").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(RawCorpus::parse("eggs\thello", "x").is_err());
    }

    #[test]
    fn missing_file_is_distinct() {
        let err = load_corpus(Path::new("/nonexistent/sms")).unwrap_err();
        assert!(matches!(err, Error::DatasetMissing(_)));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.txt");
        let c = RawCorpus::parse("ham\ta b\nspam\tc\n", "mem").unwrap();
        c.write_to(&path).unwrap();
        assert_eq!(load_corpus(&path).unwrap(), c);
    }
}
