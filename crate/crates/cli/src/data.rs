//! Delimited input tables and score-replaced output tables.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};
use xorder_core::{Label, Sample};

use crate::format::fmt_f64;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Columns {
    pub score: String,
    pub label: String,
    pub group: String,
    /// Defaults to a column named `id` when one exists.
    pub id: Option<String>,
    pub delimiter: u8,
}

impl Default for Columns {
    fn default() -> Self {
        Columns {
            score: "score".into(),
            label: "label".into(),
            group: "group".into(),
            id: None,
            delimiter: b',',
        }
    }
}

/// A parsed table: the raw records, kept for rewriting, and one sample per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    headers: StringRecord,
    records: Vec<StringRecord>,
    score_idx: usize,
    delimiter: u8,
    pub samples: Vec<Sample>,
}

fn column(headers: &StringRecord, name: &str, source: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| CliError::Input(format!("{source}: missing column {name:?}")))
}

impl Dataset {
    pub fn read(path: &Path, cols: &Columns) -> Result<Dataset, CliError> {
        let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Dataset::from_reader(file, cols, &path.display().to_string())
    }

    pub fn from_reader(reader: impl Read, cols: &Columns, source: &str) -> Result<Dataset, CliError> {
        let mut rdr = ReaderBuilder::new().delimiter(cols.delimiter).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| CliError::Input(format!("{source}: {e}")))?
            .clone();
        let score_idx = column(&headers, &cols.score, source)?;
        let label_idx = column(&headers, &cols.label, source)?;
        let group_idx = column(&headers, &cols.group, source)?;
        let id_idx = match &cols.id {
            Some(name) => Some(column(&headers, name, source)?),
            None => headers.iter().position(|h| h.trim() == "id"),
        };

        let mut records = Vec::new();
        let mut samples = Vec::new();
        for result in rdr.records() {
            let rec = result.map_err(|e| CliError::Input(format!("{source}: {e}")))?;
            let row = records.len();
            let line = rec.position().map_or(row as u64 + 2, |p| p.line());
            let field = |idx: usize| rec.get(idx).unwrap_or("").trim();
            let at = |col: &str, msg: String| CliError::Input(format!("{source}: line {line}, column {col:?}: {msg}"));

            let score: f64 = field(score_idx)
                .parse()
                .map_err(|_| at(&cols.score, format!("cannot parse {:?} as a number", field(score_idx))))?;
            if !(0.0..=1.0).contains(&score) {
                return Err(at(&cols.score, format!("score {score} outside [0, 1]")));
            }
            let label = match field(label_idx) {
                "1" => Label::Positive,
                "0" => Label::Negative,
                other => return Err(at(&cols.label, format!("label {other:?} is not 0 or 1"))),
            };
            let group = field(group_idx);
            if group.is_empty() {
                return Err(at(&cols.group, "empty group token".into()));
            }
            let id = id_idx.map_or_else(|| format!("r{}", row + 1), |i| field(i).to_string());
            samples.push(Sample::new(row, score, label, group).with_id(id));
            records.push(rec);
        }
        if records.is_empty() {
            return Err(CliError::Input(format!("{source}: no data rows")));
        }
        Ok(Dataset {
            headers,
            records,
            score_idx,
            delimiter: cols.delimiter,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes the table with the score column replaced; `scores[row]`.
    pub fn write_scores(&self, out: impl Write, scores: &[f64]) -> Result<(), CliError> {
        let mut w = WriterBuilder::new().delimiter(self.delimiter).from_writer(out);
        let err = |e: csv::Error| CliError::Input(format!("writing table: {e}"));
        w.write_record(&self.headers).map_err(err)?;
        for (rec, &score) in self.records.iter().zip(scores) {
            let s = fmt_f64(score);
            let fields: Vec<&str> = rec
                .iter()
                .enumerate()
                .map(|(i, f)| if i == self.score_idx { s.as_str() } else { f })
                .collect();
            w.write_record(&fields).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Input(format!("writing table: {e}")))?;
        Ok(())
    }

    pub fn write_scores_to(&self, path: &Path, scores: &[f64]) -> Result<(), CliError> {
        let file = File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.write_scores(std::io::BufWriter::new(file), scores)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset, CliError> {
        Dataset::from_reader(text.as_bytes(), &Columns::default(), "t.csv")
    }

    #[test]
    fn reads_rows_and_ids() {
        let d = parse("id,score,label,group\nx,0.5,1,a\ny,0.25,0,b\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples[1].id, "y");
        assert_eq!(d.samples[1].label, Label::Negative);
    }

    #[test]
    fn errors_name_line_and_column() {
        let err = parse("score,label,group\n0.5,1,a\n1.5,0,b\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("\"score\""), "{err}");
        assert!(parse("score,label,group\n").is_err());
        assert!(parse("score,label\n0.1,1\n").is_err());
        assert!(parse("score,label,group\n0.1,2,a\n").is_err());
    }

    #[test]
    fn rewrite_keeps_other_columns() {
        let d = parse("group,score,label,note\na,0.5,1,keep me\n").unwrap();
        let mut buf = Vec::new();
        d.write_scores(&mut buf, &[0.7000000000000001]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "group,score,label,note\na,0.7,1,keep me\n"
        );
    }
}
