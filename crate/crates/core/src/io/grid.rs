use std::path::Path;

use crate::coverage::ShapeGrid;
use crate::error::{Result, SwarmError};

/// Parses ASCII art (`#` black, `.` white, rectangular, top row first) or a
/// plain-text `P2` graymap where 0 is black and anything else is white.
pub fn parse_grid(text: &str) -> Result<ShapeGrid> {
    let first = text.split_whitespace().next().unwrap_or("");
    if first.starts_with('P') {
        return if first == "P2" {
            parse_pgm(text)
        } else {
            Err(SwarmError::UnknownMagic(first.to_string()))
        };
    }
    let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
    let Some(width) = rows.first().map(|r| r.chars().count()) else {
        return Err(SwarmError::NoBlackCells);
    };
    let height = rows.len();
    let mut black = vec![false; width * height];
    for (r, line) in rows.iter().enumerate() {
        let got = line.chars().count();
        if got != width {
            return Err(SwarmError::RaggedGrid { row: r + 1, got, expected: width });
        }
        let y = height - 1 - r;
        for (x, ch) in line.chars().enumerate() {
            black[y * width + x] = match ch {
                '#' => true,
                '.' => false,
                other => {
                    return Err(SwarmError::Parse {
                        line: r + 1,
                        msg: format!("unexpected character {other:?}"),
                    })
                }
            };
        }
    }
    ShapeGrid::new(width, height, black)
}

fn parse_pgm(text: &str) -> Result<ShapeGrid> {
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        tokens.extend(content.split_whitespace().map(|t| (i + 1, t)));
    }
    let mut it = tokens.into_iter().skip(1);
    let mut next_num = |what: &str| -> Result<usize> {
        let (line, tok) = it.next().ok_or_else(|| SwarmError::Parse {
            line: 0,
            msg: format!("missing {what}"),
        })?;
        tok.parse().map_err(|_| SwarmError::Parse {
            line,
            msg: format!("bad {what}: {tok:?}"),
        })
    };
    let width = next_num("width")?;
    let height = next_num("height")?;
    let _max = next_num("max value")?;
    let mut black = vec![false; width * height];
    for r in 0..height {
        for x in 0..width {
            let v = next_num("pixel")?;
            black[(height - 1 - r) * width + x] = v == 0;
        }
    }
    ShapeGrid::new(width, height, black)
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<ShapeGrid> {
    parse_grid(&std::fs::read_to_string(path)?)
}
