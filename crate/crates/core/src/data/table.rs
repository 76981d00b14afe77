//! Plain-text tables: one header line, `#` comments, fields separated by
//! whitespace or commas.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Row {
    pub line: usize,
    pub fields: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TextTable {
    pub path: String,
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn split_fields(line: &str) -> Vec<String> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Non-empty, comment-free lines with their 1-based line numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_table(text: &str, path: &str) -> Result<TextTable> {
    let mut lines = content_lines(text);
    let header = match lines.next() {
        Some((_, l)) => split_fields(l),
        None => return Err(Error::parse(path, 0, "missing header line")),
    };
    let mut rows = Vec::new();
    for (line, l) in lines {
        let fields = split_fields(l);
        if fields.len() != header.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        rows.push(Row { line, fields });
    }
    Ok(TextTable { path: path.to_string(), header, rows })
}

impl TextTable {
    pub fn number(&self, row: &Row, col: usize) -> Result<f64> {
        let s = &row.fields[col];
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::parse(&self.path, row.line, format!("malformed number '{s}'"))),
        }
    }

    pub fn column(&self, col: usize) -> Result<Vec<f64>> {
        self.rows.iter().map(|r| self.number(r, col)).collect()
    }
}

fn canonical_token(tok: &str) -> String {
    match tok.parse::<f64>() {
        Ok(v) => format_number(v),
        Err(_) => tok.to_string(),
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

/// Canonical form of a table file: comments and blank lines dropped, fields
/// joined by single spaces, numbers in shortest round-trip form.
pub fn normalize(text: &str) -> String {
    let mut out = String::new();
    for (_, l) in content_lines(text) {
        let toks: Vec<String> = split_fields(l).iter().map(|t| canonical_token(t)).collect();
        out.push_str(&toks.join(" "));
        out.push('\n');
    }
    out
}

/// Writes a header and numeric rows in the canonical form produced by [`normalize`].
pub fn render(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(" ");
    out.push('\n');
    for r in rows {
        let toks: Vec<String> = r.into_iter().map(format_number).collect();
        out.push_str(&toks.join(" "));
        out.push('\n');
    }
    out
}

/// Tabulated function of energy with interpolation helpers.
#[derive(Clone, Debug)]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    lx: Vec<f64>,
    ly: Vec<f64>,
}

impl Curve {
    /// Requires at least two rows and a strictly increasing, positive grid.
    pub fn new(x: Vec<f64>, y: Vec<f64>, what: &str) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::Data(format!("{what}: need at least two rows")));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!("{what}: non-monotone grid")));
        }
        if x[0] <= 0.0 {
            return Err(Error::Data(format!("{what}: energies must be positive")));
        }
        let lx = x.iter().map(|v| v.ln()).collect();
        let ly = y.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        Ok(Curve { x, y, lx, ly })
    }

    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn ys(&self) -> &[f64] {
        &self.y
    }

    pub fn min_x(&self) -> f64 {
        self.x[0]
    }

    pub fn max_x(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Index `i` with `x[i] <= e < x[i+1]`, clamped to valid segments.
    #[inline]
    fn segment(&self, e: f64) -> usize {
        let i = self.x.partition_point(|v| *v <= e);
        i.clamp(1, self.x.len() - 1) - 1
    }

    pub fn check_range(&self, e: f64, what: &str) -> Result<()> {
        if !(e >= self.min_x() && e <= self.max_x()) {
            return Err(Error::OutOfRange {
                what: what.to_string(),
                value: e,
                lo: self.min_x(),
                hi: self.max_x(),
            });
        }
        Ok(())
    }

    /// Log-log interpolation; `e` is clamped to the grid.
    #[inline]
    pub fn loglog(&self, e: f64) -> f64 {
        let e = e.clamp(self.min_x(), self.max_x());
        let i = self.segment(e);
        if e == self.x[i] {
            return self.y[i];
        }
        if e == self.x[i + 1] {
            return self.y[i + 1];
        }
        let t = (e.ln() - self.lx[i]) / (self.lx[i + 1] - self.lx[i]);
        (self.ly[i] + t * (self.ly[i + 1] - self.ly[i])).exp()
    }

    /// Linear in `ln e`; safe for values that touch zero.
    #[inline]
    pub fn lin_log(&self, e: f64) -> f64 {
        let e = e.clamp(self.min_x(), self.max_x());
        let i = self.segment(e);
        if e == self.x[i] {
            return self.y[i];
        }
        let t = (e.ln() - self.lx[i]) / (self.lx[i + 1] - self.lx[i]);
        self.y[i] + t * (self.y[i + 1] - self.y[i])
    }

    /// Inverse of [`Curve::loglog`] for a strictly increasing positive curve.
    pub fn inverse_loglog(&self, y: f64) -> f64 {
        let n = self.y.len();
        if y <= self.y[0] {
            // Below the table: scale as a power law through the first segment.
            let slope = (self.ly[1] - self.ly[0]) / (self.lx[1] - self.lx[0]);
            if y <= 0.0 {
                return 0.0;
            }
            return (self.lx[0] + (y.ln() - self.ly[0]) / slope).exp();
        }
        if y >= self.y[n - 1] {
            return self.x[n - 1];
        }
        let i = self.y.partition_point(|v| *v <= y).clamp(1, n - 1) - 1;
        let t = (y.ln() - self.ly[i]) / (self.ly[i + 1] - self.ly[i]);
        (self.lx[i] + t * (self.lx[i + 1] - self.lx[i])).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_delimiters() {
        let t = parse_table("# c\nenergy, mu\n10 1 # trailing\n\n20,2\n", "t").unwrap();
        assert_eq!(t.header, vec!["energy", "mu"]);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].line, 5);
        assert_eq!(t.column(1).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn field_count_mismatch_reports_line() {
        let err = parse_table("a b\n1 2\n3\n", "f.txt").unwrap_err();
        assert_eq!(err.to_string(), "f.txt:3: expected 2 fields, found 1");
    }

    #[test]
    fn malformed_number_reports_line() {
        let t = parse_table("a b\n1 x\n", "f.txt").unwrap();
        let err = t.column(1).unwrap_err();
        assert!(err.to_string().starts_with("f.txt:2:"));
    }

    #[test]
    fn normalize_canonicalizes_numbers() {
        assert_eq!(normalize("# x\nE mu\n1e+06 0.87510\n"), "E mu\n1000000 0.8751\n");
    }

    #[test]
    fn duplicate_energy_is_non_monotone() {
        let e = Curve::new(vec![100.0, 100.0], vec![1.0, 2.0], "t").unwrap_err();
        assert!(e.to_string().contains("non-monotone grid"));
    }

    #[test]
    fn loglog_grid_points_and_midpoint() {
        let c = Curve::new(vec![10.0, 40.0, 160.0], vec![8.0, 2.0, 0.3], "t").unwrap();
        assert_eq!(c.loglog(40.0), 2.0);
        assert_eq!(c.loglog(160.0), 0.3);
        let mid = c.loglog(20.0);
        assert!((mid - 4.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_recovers_abscissa() {
        let c = Curve::new(vec![1.0, 10.0, 100.0], vec![0.01, 0.5, 20.0], "t").unwrap();
        for e in [1.0, 3.0, 10.0, 55.0, 100.0] {
            let back = c.inverse_loglog(c.loglog(e));
            assert!((back - e).abs() < 1e-9 * e, "{e} -> {back}");
        }
        assert!(c.inverse_loglog(0.001) < 1.0);
        assert_eq!(c.inverse_loglog(0.0), 0.0);
    }
}
