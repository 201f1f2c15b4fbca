//! ASCII occupancy maps.
//!
//! A map file has an optional header followed by a line reading `map`.
//! Header lines are `; comment`, `legend <letter> <atom>` and
//! `cost <units>` (the default entry cost, 1 unless given).
//!
//! Map lines alternate between cell rows and wall rows. In a cell row the
//! characters at even columns are cells and those in between are
//! horizontal separators: ` ` (open), `|` (wall) or `:` (possible wall). In
//! a wall row the characters at even columns separate the cells above and
//! below: ` ` (open), `-` (wall) or `~` (possible wall). Empty lines inside
//! the map are open wall rows.
//!
//! Cell glyphs: `.` free, `#` solid, `I` the initial cell, a digit is a free
//! cell whose entry cost is that digit, and a lowercase letter is a free
//! cell carrying the atom named by its legend entry (or the letter itself).
//!
//! Moving into a cell costs that cell's entry cost. Labeled cells idle for
//! free. A possible wall makes both cells beside it unknown; each of them
//! gets one pattern per combination of its possible walls being open,
//! starting with all of them open and ending with all of them closed.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{Pkwts, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sep {
    Open,
    Wall,
    Possible,
}

#[derive(Debug, Clone)]
struct Cell {
    cost: Option<u64>,
    atom: Option<String>,
    initial: bool,
}

/// A map compiled to a model, with the cell coordinates of every state.
#[derive(Debug, Clone)]
pub struct GridMap {
    pub model: Pkwts,
    /// `(row, col)` of each state.
    pub cells: Vec<(usize, usize)>,
    /// Cell pairs separated by a possible wall, lower state first.
    pub possible_walls: Vec<(StateId, StateId)>,
}

impl GridMap {
    pub fn state_at(&self, row: usize, col: usize) -> Option<StateId> {
        self.cells.iter().position(|&c| c == (row, col))
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedGrid { line, msg: msg.into() }
}

pub fn grid_compile(text: &str) -> Result<GridMap> {
    let lines: Vec<&str> = text.lines().collect();
    let mut legend: BTreeMap<char, String> = BTreeMap::new();
    let mut unit = 1u64;
    let mut start = None;
    for (i, raw) in lines.iter().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["map"] => {
                start = Some(i + 1);
                break;
            }
            ["legend", l, atom] => {
                let mut cs = l.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) if c.is_ascii_lowercase() => {
                        legend.insert(c, atom.to_string());
                    }
                    _ => return Err(malformed(i + 1, format!("legend key `{l}` is not a lowercase letter"))),
                }
            }
            ["cost", n] => {
                unit = n.parse().ok().filter(|&u| u >= 1).ok_or_else(|| malformed(i + 1, format!("bad cost `{n}`")))?;
            }
            _ => return Err(malformed(i + 1, format!("unrecognized header line `{line}`"))),
        }
    }
    let start = start.ok_or_else(|| malformed(lines.len(), "missing `map` line"))?;
    let mut body: Vec<(usize, &str)> = lines[start..].iter().enumerate().map(|(i, l)| (start + i + 1, l.trim_end())).collect();
    while body.last().is_some_and(|(_, l)| l.is_empty()) {
        body.pop();
    }
    if body.is_empty() {
        return Err(malformed(start, "empty map"));
    }
    if body.len() % 2 == 0 {
        return Err(malformed(body.last().unwrap().0, "map ends with a wall row"));
    }

    let mut grid: Vec<Vec<Option<Cell>>> = Vec::new();
    let mut hsep: Vec<Vec<Sep>> = Vec::new();
    let mut vsep: Vec<Vec<Sep>> = Vec::new();
    let mut width = None;
    for (idx, &(ln, line)) in body.iter().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        if idx % 2 == 0 {
            let w = chars.len().div_ceil(2);
            if *width.get_or_insert(w) != w {
                return Err(malformed(ln, format!("row has {w} cells, expected {}", width.unwrap())));
            }
            let mut row = Vec::with_capacity(w);
            let mut seps = Vec::with_capacity(w.saturating_sub(1));
            for (c, &ch) in chars.iter().enumerate() {
                if c % 2 == 1 {
                    seps.push(match ch {
                        ' ' => Sep::Open,
                        '|' => Sep::Wall,
                        ':' => Sep::Possible,
                        _ => return Err(Error::UnknownGlyph { line: ln, col: c + 1, ch }),
                    });
                    continue;
                }
                let cell = |cost, atom| Some(Cell { cost, atom, initial: false });
                row.push(match ch {
                    '.' => cell(None, None),
                    '#' => None,
                    'I' => Some(Cell { cost: None, atom: None, initial: true }),
                    '1'..='9' => cell(Some(ch.to_digit(10).unwrap() as u64), None),
                    'a'..='z' => cell(None, Some(legend.get(&ch).cloned().unwrap_or_else(|| ch.to_string()))),
                    _ => return Err(Error::UnknownGlyph { line: ln, col: c + 1, ch }),
                });
            }
            grid.push(row);
            hsep.push(seps);
        } else {
            let w = width.unwrap();
            if chars.len() > 2 * w - 1 {
                return Err(malformed(ln, "wall row is wider than the map"));
            }
            let mut seps = vec![Sep::Open; w];
            for (c, &ch) in chars.iter().enumerate() {
                let s = match ch {
                    ' ' => Sep::Open,
                    '-' => Sep::Wall,
                    '~' => Sep::Possible,
                    _ => return Err(Error::UnknownGlyph { line: ln, col: c + 1, ch }),
                };
                if c % 2 == 1 && s != Sep::Open {
                    return Err(malformed(ln, format!("wall glyph at column {} is not under a cell", c + 1)));
                }
                if c % 2 == 0 {
                    seps[c / 2] = s;
                }
            }
            vsep.push(seps);
        }
    }

    let line_of_row = |r: usize| body[2 * r].0;
    let mut ids = BTreeMap::new();
    let mut cells = Vec::new();
    for (r, row) in grid.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if cell.is_some() {
                ids.insert((r, c), cells.len());
                cells.push((r, c));
            }
        }
    }
    let initials: Vec<StateId> = cells.iter().enumerate().filter(|(_, &(r, c))| grid[r][c].as_ref().unwrap().initial).map(|(i, _)| i).collect();
    let initial = match initials.as_slice() {
        [i] => *i,
        [] => return Err(malformed(start, "no initial cell `I`")),
        _ => return Err(malformed(line_of_row(cells[initials[1]].0), "more than one initial cell")),
    };

    let n = cells.len();
    let mut fixed: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); n];
    let mut optional: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut possible_walls = Vec::new();
    let mut link = |a: (usize, usize), b: Option<(usize, usize)>, sep: Sep, ln: usize| -> Result<()> {
        let x = ids.get(&a).copied();
        let y = b.and_then(|b| ids.get(&b).copied());
        match (x, y, sep) {
            (_, _, Sep::Wall) => Ok(()),
            (Some(x), Some(y), Sep::Open) => {
                fixed[x].insert(y);
                fixed[y].insert(x);
                Ok(())
            }
            (Some(x), Some(y), Sep::Possible) => {
                optional[x].push(y);
                optional[y].push(x);
                possible_walls.push((x.min(y), x.max(y)));
                Ok(())
            }
            (_, _, Sep::Possible) => Err(malformed(ln, "possible wall must separate two free cells")),
            _ => Ok(()),
        }
    };
    for r in 0..grid.len() {
        for c in 0..width.unwrap() {
            if c + 1 < width.unwrap() {
                link((r, c), Some((r, c + 1)), hsep[r][c], line_of_row(r))?;
            }
            if r + 1 < grid.len() {
                link((r, c), Some((r + 1, c)), vsep[r][c], body[2 * r + 1].0)?;
            }
        }
    }

    let mut labels = vec![Vec::new(); n];
    let mut weights = Vec::new();
    for (x, &(r, c)) in cells.iter().enumerate() {
        let cell = grid[r][c].as_ref().unwrap();
        if let Some(atom) = &cell.atom {
            labels[x].push(atom.clone());
            fixed[x].insert(x);
            weights.push(((x, x), 0));
        }
        for y in fixed[x].iter().chain(&optional[x]).copied().filter(|&y| y != x) {
            let (ry, cy) = cells[y];
            weights.push(((x, y), grid[ry][cy].as_ref().unwrap().cost.unwrap_or(unit)));
        }
    }

    let mut patterns = Vec::with_capacity(n);
    for x in 0..n {
        let ln = line_of_row(cells[x].0);
        if fixed[x].is_empty() && optional[x].is_empty() {
            return Err(malformed(ln, format!("cell {:?} has no neighbours", cells[x])));
        }
        if x == initial && !optional[x].is_empty() {
            return Err(malformed(ln, "the initial cell cannot touch a possible wall"));
        }
        let k = optional[x].len();
        if k > 16 {
            return Err(malformed(ln, format!("cell {:?} touches {k} possible walls", cells[x])));
        }
        let mut pats = Vec::with_capacity(1 << k);
        for i in 0..(1usize << k) {
            let mask = (1usize << k) - 1 - i;
            let mut p = fixed[x].clone();
            p.extend((0..k).filter(|i| mask >> i & 1 == 1).map(|i| optional[x][i]));
            if p.is_empty() {
                return Err(malformed(ln, format!("cell {:?} is sealed when its possible walls are closed", cells[x])));
            }
            pats.push(p.into_iter().collect());
        }
        patterns.push(pats);
    }
    let model = Pkwts::new(initial, patterns, weights, labels, 1)?;
    Ok(GridMap { model, cells, possible_walls })
}
