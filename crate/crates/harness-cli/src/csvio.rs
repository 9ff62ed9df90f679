//! Deterministic CSV output: `#`-prefixed metadata lines, UTF-8, LF line
//! endings, shortest-roundtrip float formatting.

use std::fmt::Write as _;

pub struct CsvBuilder {
    buf: String,
}

impl CsvBuilder {
    pub fn new() -> Self {
        Self { buf: String::new() }
    }

    /// One `# key: value` metadata line.
    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        writeln!(self.buf, "# {key}: {value}").unwrap();
        self
    }

    pub fn header(&mut self, columns: &[&str]) -> &mut Self {
        writeln!(self.buf, "{}", columns.join(",")).unwrap();
        self
    }

    pub fn row(&mut self, cells: &[CsvCell]) -> &mut Self {
        let mut first = true;
        for cell in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            match cell {
                CsvCell::Int(v) => write!(self.buf, "{v}").unwrap(),
                CsvCell::Float(v) => write!(self.buf, "{v}").unwrap(),
                CsvCell::Str(v) => write!(self.buf, "{v}").unwrap(),
            }
        }
        self.buf.push('\n');
        self
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

impl Default for CsvBuilder {
    fn default() -> Self {
        Self::new()
    }
}

pub enum CsvCell {
    Int(i64),
    Float(f64),
    Str(&'static str),
}

pub fn int(v: impl Into<i64>) -> CsvCell {
    CsvCell::Int(v.into())
}

pub fn float(v: f64) -> CsvCell {
    CsvCell::Float(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_metadata_and_rows() {
        let mut b = CsvBuilder::new();
        b.meta("seed", 7)
            .header(&["t", "value"])
            .row(&[int(1), float(0.5)])
            .row(&[int(2), float(-0.0625)]);
        let out = b.finish();
        assert_eq!(out, "# seed: 7\nt,value\n1,0.5\n2,-0.0625\n");
    }
}
