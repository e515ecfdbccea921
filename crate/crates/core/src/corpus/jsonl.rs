use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::sentence::Sentence;

/// One rejected input line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

/// Parses every non-blank line, keeping valid sentences and reporting the rest.
pub fn parse_jsonl(text: &str) -> (Vec<Sentence>, Vec<Diagnostic>) {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Sentence>(line)
            .map_err(|e| e.to_string())
            .and_then(|s| s.validate().map(|_| s).map_err(|e| e.to_string()));
        match parsed {
            Ok(s) => good.push(s),
            Err(message) => bad.push(Diagnostic {
                line: i + 1,
                message,
            }),
        }
    }
    (good, bad)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

/// Strict reader: the first invalid line aborts with its line number.
pub fn read_jsonl(path: &Path) -> Result<Vec<Sentence>> {
    let (good, bad) = parse_jsonl(&read_text(path)?);
    if let Some(d) = bad.into_iter().next() {
        return Err(Error::Data {
            path: PathBuf::from(path),
            line: d.line,
            message: d.message,
        });
    }
    Ok(good)
}

pub fn read_jsonl_lenient(path: &Path) -> Result<(Vec<Sentence>, Vec<Diagnostic>)> {
    Ok(parse_jsonl(&read_text(path)?))
}

pub fn write_jsonl(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let mut out = Vec::new();
    for s in sentences {
        serde_json::to_writer(&mut out, s)?;
        out.push(b'\n');
    }
    let mut f =
        fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(&out)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Number;
    use proptest::prelude::*;

    #[test]
    fn empty_input() {
        let (g, b) = parse_jsonl("");
        assert!(g.is_empty() && b.is_empty());
    }

    #[test]
    fn length_mismatch_is_rejected_with_line_number() {
        let text = concat!(
            r#"{"tokens":["dogs","bark"],"pos":["NNS","VBP"],"supertags":null,"subject_index":0,"verb_index":1,"verb_number":"PL"}"#,
            "\n",
            r#"{"tokens":["dogs","bark"],"pos":["NNS"],"supertags":null,"subject_index":null,"verb_index":null,"verb_number":null}"#,
            "\n",
            r#"{"tokens":["dog","barked"],"pos":["NN","VBD"],"supertags":null,"subject_index":0,"verb_index":1,"verb_number":"SG"}"#,
            "\n"
        );
        let (g, b) = parse_jsonl(text);
        assert_eq!(g.len(), 1);
        assert_eq!(b.iter().map(|d| d.line).collect::<Vec<_>>(), vec![2, 3]);
        assert!(b[1].message.contains("VBD"));
    }

    #[test]
    fn strict_reader_reports_path_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        fs::write(&p, "{not json}\n").unwrap();
        match read_jsonl(&p).unwrap_err() {
            Error::Data { line, .. } => assert_eq!(line, 1),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let (_, b) = parse_jsonl(
            r#"{"tokens":["a"],"pos":["DT"],"supertags":null,"subject_index":null,"verb_index":null,"verb_number":null,"extra":1}"#,
        );
        assert_eq!(b.len(), 1);
    }

    fn arb_sentence() -> impl Strategy<Value = Sentence> {
        (1usize..8, any::<bool>(), any::<bool>(), "[a-z]{1,6}").prop_map(|(n, st, pl, w)| {
            let mut pos = vec!["NN".to_string(); n + 1];
            pos[n] = if pl { "VBP".into() } else { "VBZ".into() };
            Sentence {
                tokens: (0..=n).map(|i| format!("{w}{i}")).collect(),
                pos,
                supertags: st.then(|| vec!["N".to_string(); n + 1]),
                subject_index: Some(0),
                verb_index: Some(n),
                verb_number: Some(if pl { Number::Pl } else { Number::Sg }),
            }
        })
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(sents in prop::collection::vec(arb_sentence(), 0..10)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("c.jsonl");
            write_jsonl(&p, &sents).unwrap();
            prop_assert_eq!(read_jsonl(&p).unwrap(), sents);
        }
    }
}
