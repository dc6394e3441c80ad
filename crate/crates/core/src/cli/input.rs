//! Reading numeric input: newline-delimited reals, or CSV whose first row is
//! a header.

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    pub header: Option<Vec<String>>,
    /// `(line number, fields)` for every data row.
    pub rows: Vec<(u64, Vec<f64>)>,
}

impl InputTable {
    pub fn width(&self) -> usize {
        match (&self.header, self.rows.first()) {
            (Some(h), _) => h.len(),
            (None, Some((_, r))) => r.len(),
            (None, None) => 0,
        }
    }

    /// Index of the named column; requires a header.
    pub fn column_index(&self, name: &str) -> Result<usize, CliError> {
        let header = self.header.as_ref().ok_or_else(|| {
            CliError::Validation(format!(
                "--column '{name}' given but the input has no header row"
            ))
        })?;
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("no column named '{name}' in the header")))
    }
}

/// 1-based line of the first non-blank byte at or after `byte`; record
/// offsets include any skipped blank lines.
fn line_of(text: &str, byte: u64) -> u64 {
    let bytes = text.as_bytes();
    let mut end = (byte as usize).min(bytes.len());
    while end < bytes.len() && matches!(bytes[end], b'\n' | b'\r') {
        end += 1;
    }
    bytes[..end].iter().filter(|&&b| b == b'\n').count() as u64 + 1
}

fn parse_real(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok()
}

/// The first record is a header when any of its fields fails to parse as a
/// real; every later field must parse.
pub fn read_table(text: &str) -> Result<InputTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| line_of(text, p.byte()));
            CliError::Validation(format!("row {line}: malformed CSV: {e}"))
        })?;
        let line = record
            .position()
            .map_or(i as u64 + 1, |p| line_of(text, p.byte()));
        if record.iter().all(str::is_empty) {
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(CliError::Validation(format!(
                    "row {line}: expected {w} fields, found {}",
                    record.len()
                )));
            }
        }
        width = Some(record.len());
        if header.is_none() && rows.is_empty() && record.iter().any(|f| parse_real(f).is_none()) {
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let fields = record
            .iter()
            .map(|tok| {
                parse_real(tok).ok_or_else(|| {
                    CliError::Validation(format!("row {line}: cannot parse '{tok}' as a real"))
                })
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        rows.push((line, fields));
    }
    Ok(InputTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_reals() {
        let t = read_table("0.5\n-1\n\n0\n").unwrap();
        assert_eq!(t.header, None);
        let vals: Vec<f64> = t.rows.iter().map(|r| r.1[0]).collect();
        assert_eq!(vals, vec![0.5, -1.0, 0.0]);
        assert_eq!(t.rows[2].0, 4);
    }

    #[test]
    fn csv_with_header() {
        let t = read_table("id,value\n1,0.25\n2,-0.5\n").unwrap();
        assert_eq!(
            t.header.as_deref(),
            Some(&["id".to_string(), "value".to_string()][..])
        );
        assert_eq!(t.column_index("value").unwrap(), 1);
        assert!(t.column_index("age").is_err());
        assert_eq!(t.rows[1], (3, vec![2.0, -0.5]));
        assert_eq!(t.width(), 2);
    }

    #[test]
    fn reports_row_and_token() {
        let err = read_table("0.1\n0.2\nabc\n").unwrap_err();
        let CliError::Validation(msg) = err else {
            panic!()
        };
        assert!(msg.contains("row 3") && msg.contains("'abc'"), "{msg}");
        let err = read_table("a,b\n1,2\n3\n").unwrap_err();
        let CliError::Validation(msg) = err else {
            panic!()
        };
        assert!(msg.contains("row 3"), "{msg}");
    }
}
