use std::fmt::Write;

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "yes" } else { "no" }.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        Table {
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Two-column `quantity, value` table.
    pub fn keyed(title: &str) -> Self {
        Self::new(title, &["quantity", "value"])
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }

    pub fn kv(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.row(vec![key.into(), value.into()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

/// Nine significant digits; fixed notation for moderate magnitudes.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // exponent after rounding, so 9.999999999 counts as 1e1
    let sci = format!("{x:.8e}");
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn cell_table(c: &Cell) -> String {
    match c {
        Cell::Num(x) => sig9(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn cell_csv(c: &Cell) -> String {
    match c {
        // shortest representation that parses back to the same f64
        Cell::Num(x) => format!("{x:?}"),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

pub fn render(tables: &[Table], format: Format) -> String {
    let mut out = String::new();
    for (k, t) in tables.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        match format {
            Format::Table => render_table(&mut out, t),
            Format::Csv => {
                if tables.len() > 1 {
                    let _ = writeln!(out, "# {}", t.title);
                }
                let _ = writeln!(out, "{}", t.columns.join(","));
                for r in &t.rows {
                    let cells: Vec<String> = r.iter().map(cell_csv).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
        }
    }
    out
}

fn render_table(out: &mut String, t: &Table) {
    let cells: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| r.iter().map(cell_table).collect())
        .collect();
    let mut width: Vec<usize> = t.columns.iter().map(|c| c.chars().count()).collect();
    for r in &cells {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let _ = writeln!(out, "{}", t.title);
    let line = |out: &mut String, items: &[String]| {
        let padded: Vec<String> = items
            .iter()
            .zip(&width)
            .map(|(s, &w)| format!("{s:<w$}"))
            .collect();
        let _ = writeln!(out, "  {}", padded.join("  ").trim_end());
    };
    line(out, &t.columns);
    let rule: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
    line(out, &rule);
    if cells.is_empty() {
        let _ = writeln!(out, "  (none)");
    }
    for r in &cells {
        line(out, r);
    }
}
