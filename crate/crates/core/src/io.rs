//! Surface files and CSV output.
//!
//! A surface file lists one term per line as `a b value`, meaning
//! `value · xᵃ yᵇ`. Blank lines and text after `#` are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::monge::MongeSurface;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses surface-file text; `path` is only used in error messages.
pub fn parse_surface_str(text: &str, path: &Path) -> Result<MongeSurface> {
    let mut terms: BTreeMap<(u32, u32), (f64, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_error(path, line, format!("expected `a b value`, found {} fields", fields.len())));
        }
        let exp = |s: &str, name: &str| {
            s.parse::<u32>()
                .map_err(|_| parse_error(path, line, format!("exponent {name} = `{s}` is not a nonnegative integer")))
        };
        let a = exp(fields[0], "a")?;
        let b = exp(fields[1], "b")?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| parse_error(path, line, format!("coefficient `{}` is not a number", fields[2])))?;
        if !v.is_finite() {
            return Err(parse_error(path, line, "coefficient is not finite"));
        }
        if a + b < 2 && v != 0.0 {
            let what = if a + b == 0 { "constant" } else { "linear" };
            return Err(parse_error(path, line, format!("nonzero {what} term; the tangent plane at the origin must be z = 0")));
        }
        if let Some(&(_, first)) = terms.get(&(a, b)) {
            return Err(parse_error(path, line, format!("duplicate term x^{a} y^{b} (first given on line {first})")));
        }
        terms.insert((a, b), (v, line));
    }
    if terms.is_empty() {
        return Err(parse_error(path, 0, "no terms"));
    }
    MongeSurface::new(terms.into_iter().map(|(k, (v, _))| (k, v))).map_err(|e| match e {
        Error::InvalidSurface(m) => parse_error(path, 0, m),
        other => other,
    })
}

pub fn parse_surface_file(path: &Path) -> Result<MongeSurface> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    parse_surface_str(&text, path)
}

/// Surface-file text for `s`; parses back to the same coefficients.
pub fn emit_surface(s: &MongeSurface) -> String {
    let mut out = String::new();
    for ((a, b), v) in s.terms() {
        out.push_str(&format!("{a} {b} {}\n", fmt_f64(v)));
    }
    out
}

/// Shortest decimal text that parses back to exactly `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Table of rows under a header, written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Writes `bytes` to `path`, naming the file in the error.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// `stem.ext` → `stem-tag.ext`.
pub fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{tag}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn parse(text: &str) -> Result<MongeSurface> {
        parse_surface_str(text, Path::new("test.txt"))
    }

    #[test]
    fn paraboloid() {
        let s = parse("2 0 1\n0 2 1").unwrap();
        assert_eq!(s, MongeSurface::from_terms(&[(2, 0, 1.0), (0, 2, 1.0)]).unwrap());
    }

    #[test]
    fn comments_and_blank_lines() {
        let s = parse("# header\n\n2 0 1   # x^2\n  0 2 -0.5\n").unwrap();
        assert_eq!(s.coeff(0, 2), -0.5);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("2 0 1\n0 0 1", 2, "constant"),
            ("2 0 1\n1 0 3", 2, "linear"),
            ("2 0 1\n\n2 0 3", 3, "duplicate"),
            ("2 0", 1, "fields"),
            ("2 0 1\n0 2 abc", 2, "number"),
            ("-1 2 1", 1, "exponent"),
            ("2 0 inf", 1, "finite"),
        ];
        for (text, line_no, needle) in cases {
            match parse(text) {
                Err(Error::Parse { line, message, .. }) => {
                    assert_eq!(line, line_no, "{text:?}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn zero_constant_is_allowed() {
        assert!(parse("0 0 0\n2 0 1\n0 2 1").is_ok());
    }

    #[test]
    fn degree_below_two_is_rejected() {
        assert!(matches!(parse("0 0 0"), Err(Error::Parse { .. })));
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), fmt_f64(0.1)]);
        assert_eq!(t.to_csv_string().unwrap(), "a,b\n1,0.1\n");
    }

    #[test]
    fn tagged_paths() {
        assert_eq!(tagged_path(Path::new("/x/out.csv"), "k1"), PathBuf::from("/x/out-k1.csv"));
        assert_eq!(tagged_path(Path::new("out"), "a"), PathBuf::from("out-a"));
    }

    proptest! {
        #[test]
        fn surface_round_trip(
            k1 in 0.1f64..3.0,
            k2 in -3.0f64..3.0,
            extra in proptest::collection::btree_map((0u32..6, 0u32..6), -1e6f64..1e6, 0..12),
        ) {
            let mut terms = vec![((2, 0), k1), ((0, 2), k2)];
            terms.extend(extra.into_iter().filter(|((a, b), _)| a + b >= 3));
            let s = MongeSurface::new(terms).unwrap();
            let back = parse(&emit_surface(&s)).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn f64_text_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
