//! Feature matrix text file: a header of feature names followed by one
//! comma-separated row per record, with the label in the last column.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

pub fn write_matrix<W: Write>(m: &FeatureMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{},label", m.names.join(","))?;
    for (row, label) in m.rows.iter().zip(&m.labels) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{}", cells.join(","), label)?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(input: R, path: &std::path::Path) -> Result<FeatureMatrix> {
    let bad = |line: usize, message: String| Error::MalformedRecord {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| Error::io(path, e))?,
        None => return Err(bad(1, "missing header".into())),
    };
    let mut names: Vec<String> = header.split(',').map(str::to_string).collect();
    if names.pop().as_deref() != Some("label") {
        return Err(bad(1, "last column must be `label`".into()));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() + 1 {
            return Err(bad(n, format!("expected {} columns, found {}", names.len() + 1, cells.len())));
        }
        let row = cells[..names.len()]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| bad(n, format!("not a number: {c:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        let label = match cells[names.len()] {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(n, format!("label must be 0 or 1, found {other:?}"))),
        };
        rows.push(row);
        labels.push(label);
    }
    Ok(FeatureMatrix { names, rows, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn round_trip_is_exact() {
        let m = FeatureMatrix {
            names: vec!["a".into(), "b".into()],
            rows: vec![vec![0.1 + 0.2, -1e-17], vec![3.0, f64::MAX]],
            labels: vec![1, 0],
        };
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("a,b,label\n"));
        assert_eq!(read_matrix(&buf[..], Path::new("m.csv")).unwrap(), m);
    }

    #[test]
    fn errors_name_the_line() {
        let err = read_matrix(&b"a,label\n1,0\nx,1\n"[..], Path::new("m.csv")).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { line: 3, .. }));
    }
}
