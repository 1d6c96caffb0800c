//! Reader for the subset of the MATPOWER case format used by the DC model.
//!
//! Supported grammar:
//!
//! ```text
//! case      := { statement }
//! statement := "function" ... EOL
//!            | NAME "=" value [";"]
//! value     := "[" rows "]" | "{" ... "}" | scalar-or-string
//! rows      := row { (";" | EOL) row }
//! row       := number { ("," | WS) number }
//! ```
//!
//! `%` starts a comment that runs to end of line, `...` continues a line.
//! Only `baseMVA`, `bus` and `branch` are interpreted; every other
//! assignment is skipped by bracket matching.

use std::collections::HashMap;

use super::{Branch, Bus, GridCase};
use crate::error::ParseError;

const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const REF_BUS_TYPE: f64 = 3.0;

const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_X: usize = 3;
const BR_STATUS: usize = 10;

#[derive(Debug, Clone)]
struct Cell {
    text: String,
    line: usize,
    column: usize,
}

impl Cell {
    fn number(&self) -> Result<f64, ParseError> {
        let t = self.text.as_str();
        let parsed = match t {
            "Inf" | "inf" | "+Inf" => Some(f64::INFINITY),
            "-Inf" | "-inf" => Some(f64::NEG_INFINITY),
            _ => t.parse::<f64>().ok(),
        };
        parsed.ok_or_else(|| {
            ParseError::new(self.line, self.column, format!("non-numeric field `{t}`"))
        })
    }

    fn integer(&self, what: &str) -> Result<u32, ParseError> {
        let v = self.number()?;
        if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
            return Err(ParseError::new(
                self.line,
                self.column,
                format!("{what} must be a non-negative integer, got `{}`", self.text),
            ));
        }
        Ok(v as u32)
    }
}

#[derive(Debug)]
struct Table {
    line: usize,
    column: usize,
    rows: Vec<Vec<Cell>>,
}

struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.bump() {
            if c == '\n' {
                break;
            }
        }
    }

    /// Skips spaces and tabs on the current line.
    fn skip_blanks(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.bump();
        }
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn skip_quoted(&mut self, quote: char) {
        self.bump();
        while let Some(c) = self.bump() {
            if c == quote || c == '\n' {
                break;
            }
        }
    }

    /// Skips a bracketed block, honoring nesting, comments and strings.
    fn skip_block(&mut self, open: char, close: char) -> Result<(), ParseError> {
        let (line, column) = (self.line, self.column);
        let mut depth = 0usize;
        while let Some(c) = self.peek() {
            match c {
                '%' => self.skip_line(),
                '\'' | '"' => self.skip_quoted(c),
                _ => {
                    self.bump();
                    if c == open {
                        depth += 1;
                    } else if c == close {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(());
                        }
                    }
                }
            }
        }
        Err(ParseError::new(line, column, format!("unterminated `{open}`")))
    }

    /// Consumes a scalar or string value up to `;` or end of line.
    fn scalar(&mut self) -> Cell {
        let (line, column) = (self.line, self.column);
        let mut text = String::new();
        while let Some(c) = self.peek() {
            match c {
                ';' | '\n' => break,
                '%' => break,
                '\'' | '"' => {
                    self.skip_quoted(c);
                    text.push_str("<string>");
                }
                _ => {
                    text.push(c);
                    self.bump();
                }
            }
        }
        Cell {
            text: text.trim().to_string(),
            line,
            column,
        }
    }

    fn matrix(&mut self) -> Result<Table, ParseError> {
        let (line, column) = (self.line, self.column);
        self.bump(); // '['
        let mut rows = Vec::new();
        let mut row: Vec<Cell> = Vec::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(ParseError::new(line, column, "unterminated `[`"));
            };
            match c {
                ']' => {
                    self.bump();
                    if !row.is_empty() {
                        rows.push(std::mem::take(&mut row));
                    }
                    return Ok(Table { line, column, rows });
                }
                ';' | '\n' => {
                    self.bump();
                    if !row.is_empty() {
                        rows.push(std::mem::take(&mut row));
                    }
                }
                '%' => self.skip_line_keep_newline(),
                ' ' | '\t' | '\r' | ',' => {
                    self.bump();
                }
                '.' if self.is_continuation() => {
                    // `...` joins the next line onto this row
                    self.skip_line();
                }
                _ => row.push(self.cell()),
            }
        }
    }

    fn skip_line_keep_newline(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn is_continuation(&self) -> bool {
        let mut it = self.chars.clone();
        it.next() == Some('.') && it.next() == Some('.') && it.next() == Some('.')
    }

    fn cell(&mut self) -> Cell {
        let (line, column) = (self.line, self.column);
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if matches!(c, ' ' | '\t' | '\r' | '\n' | ',' | ';' | ']' | '%') {
                break;
            }
            text.push(c);
            self.bump();
        }
        Cell { text, line, column }
    }
}

/// Parses a MATPOWER-style case into a [`GridCase`].
///
/// Bus type `3` marks the slack (reference) bus. Branch status defaults to
/// in service when the status column is absent.
pub fn parse_matpower_case(text: &str) -> Result<GridCase, ParseError> {
    let mut sc = Scanner::new(text);
    let mut base_mva: Option<f64> = None;
    let mut bus: Option<Table> = None;
    let mut branch: Option<Table> = None;

    loop {
        while matches!(sc.peek(), Some(c) if c.is_whitespace()) {
            sc.bump();
        }
        let Some(c) = sc.peek() else { break };
        if c == '%' {
            sc.skip_line();
            continue;
        }
        if c == ';' || c == ',' {
            sc.bump();
            continue;
        }
        if !(c.is_ascii_alphabetic() || c == '_') {
            return Err(ParseError::new(
                sc.line,
                sc.column,
                format!("unexpected character `{c}`"),
            ));
        }
        let (line, column) = (sc.line, sc.column);
        let name = sc.ident();
        sc.skip_blanks();
        if name == "function" || sc.peek() != Some('=') {
            sc.skip_line();
            continue;
        }
        sc.bump(); // '='
        sc.skip_blanks();
        let field = name.rsplit('.').next().unwrap_or(&name);
        match sc.peek() {
            Some('[') => {
                let table = sc.matrix()?;
                match field {
                    "bus" => bus = Some(table),
                    "branch" => branch = Some(table),
                    _ => {}
                }
            }
            Some('{') => sc.skip_block('{', '}')?,
            _ => {
                let cell = sc.scalar();
                if field == "baseMVA" {
                    base_mva = Some(cell.number()?);
                } else if field == "bus" || field == "branch" {
                    return Err(ParseError::new(
                        line,
                        column,
                        format!("`{name}` must be a numeric matrix"),
                    ));
                }
            }
        }
    }

    let end = (sc.line, sc.column);
    let bus = bus.ok_or_else(|| ParseError::new(end.0, end.1, "missing table `bus`"))?;
    let branch = branch.ok_or_else(|| ParseError::new(end.0, end.1, "missing table `branch`"))?;

    let buses = read_buses(&bus)?;
    let branches = read_branches(&branch, &buses)?;
    Ok(GridCase {
        base_mva: base_mva.unwrap_or(100.0),
        buses,
        branches,
    })
}

fn row_width(table: &Table, min: usize, what: &str) -> Result<usize, ParseError> {
    let Some(first) = table.rows.first() else {
        return Err(ParseError::new(table.line, table.column, format!("table `{what}` is empty")));
    };
    let width = first.len();
    for row in &table.rows {
        if row.len() != width {
            return Err(ParseError::new(
                row[0].line,
                row[0].column,
                format!("table `{what}`: row has {} columns, expected {width}", row.len()),
            ));
        }
    }
    if width < min {
        return Err(ParseError::new(
            first[0].line,
            first[0].column,
            format!("table `{what}` needs at least {min} columns, found {width}"),
        ));
    }
    Ok(width)
}

fn read_buses(table: &Table) -> Result<Vec<Bus>, ParseError> {
    row_width(table, 2, "bus")?;
    let mut seen: HashMap<u32, usize> = HashMap::new();
    let mut slack_line: Option<usize> = None;
    let mut buses = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let id = row[BUS_I].integer("bus id")?;
        let kind = row[BUS_TYPE].number()?;
        if let Some(prev) = seen.insert(id, row[BUS_I].line) {
            return Err(ParseError::new(
                row[BUS_I].line,
                row[BUS_I].column,
                format!("duplicate bus id {id} (first defined on line {prev})"),
            ));
        }
        let is_slack = kind == REF_BUS_TYPE;
        if is_slack {
            if slack_line.is_some() {
                return Err(ParseError::new(
                    row[BUS_TYPE].line,
                    row[BUS_TYPE].column,
                    "multiple slack buses",
                ));
            }
            slack_line = Some(row[BUS_TYPE].line);
        }
        buses.push(Bus { id, is_slack });
    }
    if slack_line.is_none() {
        return Err(ParseError::new(table.line, table.column, "no slack bus"));
    }
    Ok(buses)
}

fn read_branches(table: &Table, buses: &[Bus]) -> Result<Vec<Branch>, ParseError> {
    let width = row_width(table, BR_X + 1, "branch")?;
    let known: std::collections::HashSet<u32> = buses.iter().map(|b| b.id).collect();
    let mut branches = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let from_bus = row[F_BUS].integer("from bus")?;
        let to_bus = row[T_BUS].integer("to bus")?;
        for (cell, id) in [(&row[F_BUS], from_bus), (&row[T_BUS], to_bus)] {
            if !known.contains(&id) {
                return Err(ParseError::new(
                    cell.line,
                    cell.column,
                    format!("branch references unknown bus {id}"),
                ));
            }
        }
        let reactance = row[BR_X].number()?;
        let in_service = if width > BR_STATUS {
            row[BR_STATUS].number()? != 0.0
        } else {
            true
        };
        if in_service && (reactance == 0.0 || !reactance.is_finite()) {
            return Err(ParseError::new(
                row[BR_X].line,
                row[BR_X].column,
                format!("in-service branch {from_bus}-{to_bus} has zero reactance"),
            ));
        }
        branches.push(Branch {
            from_bus,
            to_bus,
            reactance,
            in_service,
        });
    }
    Ok(branches)
}
