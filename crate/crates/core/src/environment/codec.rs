use std::fmt::Write as _;

use thiserror::Error;

use super::{Cell, CellCode, CellCodeError, GridMap, OverlayError};

/// Errors raised while reading grid or obstacle-list text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("line {line}: expected header \"<width> <height>\"")]
    Header { line: usize },
    #[error("grid is empty")]
    Empty,
    #[error("line {line}: bad token {token:?} at row {row}, column {column}: {source}")]
    Token {
        line: usize,
        row: usize,
        column: usize,
        token: String,
        source: CellCodeError,
    },
    #[error("line {line}: row {row} has {found} tokens, expected {expected}")]
    RaggedRow {
        line: usize,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}: expected \"x y\", found {text:?}")]
    ObstacleLine { line: usize, text: String },
    #[error(transparent)]
    Overlay(#[from] OverlayError),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a grid file: a `"<width> <height>"` header followed by `height`
/// rows of `width` space-separated 3-character tokens. `#` lines are comments.
pub fn parse_grid(text: &str) -> Result<GridMap, GridError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(GridError::Empty)?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| GridError::Header { line: hline })?;
    let [width, height] = dims[..] else {
        return Err(GridError::Header { line: hline });
    };
    if width == 0 || height == 0 {
        return Err(GridError::Header { line: hline });
    }

    let mut cells = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (line, row_text) in lines {
        let row = rows;
        let tokens: Vec<&str> = row_text.split_whitespace().collect();
        if tokens.len() != width {
            return Err(GridError::RaggedRow {
                line,
                row,
                expected: width,
                found: tokens.len(),
            });
        }
        for (column, token) in tokens.into_iter().enumerate() {
            let code = CellCode::parse(token).map_err(|source| GridError::Token {
                line,
                row,
                column,
                token: token.to_string(),
                source,
            })?;
            cells.push(code);
        }
        rows += 1;
    }
    if rows != height {
        return Err(GridError::RowCount {
            expected: height,
            found: rows,
        });
    }
    Ok(GridMap::new(width, height, cells))
}

/// Writes the ground layer in the grid file format. The obstacle overlay is
/// not part of this file; see [`serialize_obstacles`].
pub fn serialize_grid(grid: &GridMap) -> String {
    let mut out = String::with_capacity(grid.len() * 4 + 16);
    writeln!(out, "{} {}", grid.width(), grid.height()).unwrap();
    for row in grid.codes().chunks(grid.width()) {
        for (i, code) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{code}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses an obstacle list: one `"x y"` pair per line.
pub fn parse_obstacles(text: &str) -> Result<Vec<Cell>, GridError> {
    content_lines(text)
        .map(|(line, l)| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            match parts[..] {
                [x, y] => match (x.parse(), y.parse()) {
                    (Ok(x), Ok(y)) => Ok(Cell::new(x, y)),
                    _ => Err(GridError::ObstacleLine {
                        line,
                        text: l.to_string(),
                    }),
                },
                _ => Err(GridError::ObstacleLine {
                    line,
                    text: l.to_string(),
                }),
            }
        })
        .collect()
}

pub fn serialize_obstacles(grid: &GridMap) -> String {
    let mut out = String::new();
    for c in grid.obstacles() {
        writeln!(out, "{} {}", c.x, c.y).unwrap();
    }
    out
}
