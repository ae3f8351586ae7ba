//! Warehouse geometry: occupancy grids and the stock layouts used by the
//! experiments (T-shaped corridor, open grid, maze).

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A cell position: `x` is the column, `y` the row (row 0 at the top).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Free,
    Wall,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("floor plan is empty")]
    Empty,
    #[error("line {line} has length {found}, expected {expected}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown character {ch:?} at line {line}, column {column}")]
    UnknownChar { ch: char, line: usize, column: usize },
    #[error("floor plan has no free cell")]
    NoFreeCell,
    #[error("invalid dimensions {width}x{height}")]
    Dimensions { width: usize, height: usize },
}

/// An immutable occupancy grid. Every agent and task coordinate of an episode
/// lies on one of its free cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct FloorPlan {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    free: Vec<Coord>,
}

impl FloorPlan {
    /// Builds a plan from row-major cells. Fails when the dimensions do not
    /// match or when no cell is free.
    pub fn from_cells(width: usize, height: usize, cells: Vec<CellKind>) -> Result<Self, ParseError> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(ParseError::Dimensions { width, height });
        }
        let free: Vec<Coord> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == CellKind::Free)
            .map(|(i, _)| Coord::new((i % width) as i32, (i / width) as i32))
            .collect();
        if free.is_empty() {
            return Err(ParseError::NoFreeCell);
        }
        Ok(Self {
            width,
            height,
            cells,
            free,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    /// Free cells in row-major order.
    pub fn free_cells(&self) -> &[Coord] {
        &self.free
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        self.in_bounds(c)
            .then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn cell(&self, c: Coord) -> Option<CellKind> {
        self.index(c).map(|i| self.cells[i])
    }

    pub fn is_free(&self, c: Coord) -> bool {
        self.cell(c) == Some(CellKind::Free)
    }

    /// Free 4-neighbours of `c` in the fixed order Up, Down, Left, Right.
    pub fn neighbors(&self, c: Coord) -> impl Iterator<Item = Coord> + '_ {
        const MOVES: [(i32, i32); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];
        MOVES
            .iter()
            .map(move |(dx, dy)| Coord::new(c.x + dx, c.y + dy))
            .filter(move |n| self.is_free(*n))
    }

    /// True when every free cell is reachable from every other.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.area()];
        let start = self.free[0];
        let mut queue = VecDeque::from([start]);
        seen[self.index(start).unwrap()] = true;
        let mut count = 1;
        while let Some(c) = queue.pop_front() {
            for n in self.neighbors(c) {
                let i = self.index(n).unwrap();
                if !seen[i] {
                    seen[i] = true;
                    count += 1;
                    queue.push_back(n);
                }
            }
        }
        count == self.free.len()
    }

    /// Rows of `'#'` and `'.'`, the inverse of [`parse_floorplan`].
    pub fn render_rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.width)
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        CellKind::Free => '.',
                        CellKind::Wall => '#',
                    })
                    .collect()
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = self.render_rows().join("\n");
        out.push('\n');
        out
    }
}

impl TryFrom<Vec<String>> for FloorPlan {
    type Error = ParseError;

    fn try_from(rows: Vec<String>) -> Result<Self, Self::Error> {
        parse_floorplan(&rows.join("\n"))
    }
}

impl From<FloorPlan> for Vec<String> {
    fn from(plan: FloorPlan) -> Self {
        plan.render_rows()
    }
}

/// Parses rows of `'#'` (wall) and `'.'` (free). A single trailing newline
/// is accepted; line numbers in errors are 1-based.
pub fn parse_floorplan(text: &str) -> Result<FloorPlan, ParseError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut width = None;
    let mut cells = Vec::new();
    let mut height = 0;
    for (li, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let len = line.chars().count();
        let expected = *width.get_or_insert(len);
        if len != expected || len == 0 {
            return Err(ParseError::Ragged {
                line: li + 1,
                expected,
                found: len,
            });
        }
        for (col, ch) in line.chars().enumerate() {
            cells.push(match ch {
                '.' => CellKind::Free,
                '#' => CellKind::Wall,
                ch => {
                    return Err(ParseError::UnknownChar {
                        ch,
                        line: li + 1,
                        column: col + 1,
                    })
                }
            });
        }
        height += 1;
    }
    FloorPlan::from_cells(width.unwrap_or(0), height, cells)
}

/// T-shaped corridor: a bar of `2 * arm_length + 1` cells on the top row and
/// a stem of `stem_length` cells hanging from its centre.
pub fn make_corridor(arm_length: usize, stem_length: usize) -> FloorPlan {
    assert!(arm_length >= 1 && stem_length >= 1, "corridor arms and stem must be non-empty");
    let width = 2 * arm_length + 1;
    let height = stem_length + 1;
    let mut cells = vec![CellKind::Wall; width * height];
    cells[..width].fill(CellKind::Free);
    for row in 1..height {
        cells[row * width + arm_length] = CellKind::Free;
    }
    FloorPlan::from_cells(width, height, cells).expect("corridor has free cells")
}

pub fn make_open_grid(width: usize, height: usize) -> FloorPlan {
    assert!(width >= 1 && height >= 1, "grid dimensions must be positive");
    FloorPlan::from_cells(width, height, vec![CellKind::Free; width * height])
        .expect("open grid has free cells")
}

/// Maze carved by a randomized depth-first backtracker over a lattice of
/// `ceil(width/2) x ceil(height/2)` rooms placed on even coordinates.
pub fn make_maze(width: usize, height: usize, seed: u64) -> FloorPlan {
    assert!(width >= 3 && height >= 3, "maze needs at least 3x3 cells");
    let lw = width.div_ceil(2);
    let lh = height.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![CellKind::Wall; width * height];
    let mut visited = vec![false; lw * lh];
    let open = |cells: &mut Vec<CellKind>, x: usize, y: usize| cells[y * width + x] = CellKind::Free;

    let mut stack = vec![(0usize, 0usize)];
    visited[0] = true;
    open(&mut cells, 0, 0);
    while let Some(&(cx, cy)) = stack.last() {
        let mut options: Vec<(usize, usize)> = Vec::with_capacity(4);
        if cy > 0 {
            options.push((cx, cy - 1));
        }
        if cy + 1 < lh {
            options.push((cx, cy + 1));
        }
        if cx > 0 {
            options.push((cx - 1, cy));
        }
        if cx + 1 < lw {
            options.push((cx + 1, cy));
        }
        options.retain(|&(x, y)| !visited[y * lw + x]);
        match options.choose(&mut rng) {
            Some(&(nx, ny)) => {
                visited[ny * lw + nx] = true;
                open(&mut cells, 2 * nx, 2 * ny);
                open(&mut cells, cx + nx, cy + ny);
                stack.push((nx, ny));
            }
            None => {
                stack.pop();
            }
        }
    }
    FloorPlan::from_cells(width, height, cells).expect("maze has free cells")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_small_plans() {
        let plan = parse_floorplan("..\n..").unwrap();
        assert_eq!((plan.width(), plan.height()), (2, 2));
        assert_eq!(plan.free_cells().len(), 4);

        let plan = parse_floorplan(".#\n..\n").unwrap();
        assert_eq!(plan.cell(Coord::new(1, 0)), Some(CellKind::Wall));
        assert_eq!(plan.free_cells().len(), 3);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_floorplan(".\n.."),
            Err(ParseError::Ragged {
                line: 2,
                expected: 1,
                found: 2
            })
        );
        assert_eq!(
            parse_floorplan("..\n.x"),
            Err(ParseError::UnknownChar {
                ch: 'x',
                line: 2,
                column: 2
            })
        );
        assert_eq!(parse_floorplan(""), Err(ParseError::Empty));
        assert_eq!(parse_floorplan("##\n##"), Err(ParseError::NoFreeCell));
    }

    #[test]
    fn corridor_cell_counts() {
        let plan = make_corridor(1, 1);
        assert_eq!(plan.free_cells().len(), 4);
        assert_eq!((plan.width(), plan.height()), (3, 2));
        let plan = make_corridor(2, 3);
        assert_eq!(plan.free_cells().len(), 8);
        assert!(plan.is_connected());
        assert_eq!(plan.render(), ".....\n##.##\n##.##\n##.##\n");
    }

    #[test]
    fn open_grids() {
        assert_eq!(make_open_grid(5, 5).free_cells().len(), 25);
        assert_eq!(make_open_grid(1, 1).free_cells().len(), 1);
        assert_eq!(make_open_grid(3, 2).free_cells().len(), 6);
    }

    #[test]
    fn maze_is_deterministic_and_connected() {
        let a = make_maze(5, 5, 0);
        assert_eq!(a, make_maze(5, 5, 0));
        assert!(a.is_connected());
        let b = make_maze(5, 5, 1);
        assert!(b.is_connected());
        // every lattice room is open
        assert_eq!(a.free_cells().len(), 9 + 8);
    }

    #[test]
    fn serde_uses_ascii_rows() {
        let plan = make_corridor(1, 2);
        let json = serde_json::to_string(&plan).unwrap();
        assert_eq!(json, r##"["...","#.#","#.#"]"##);
        let back: FloorPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
    }

    fn arb_plan() -> impl Strategy<Value = FloorPlan> {
        (1usize..8, 1usize..8)
            .prop_flat_map(|(w, h)| {
                (Just(w), Just(h), proptest::collection::vec(any::<bool>(), w * h))
            })
            .prop_filter_map("needs a free cell", |(w, h, bits)| {
                let cells = bits
                    .into_iter()
                    .map(|b| if b { CellKind::Wall } else { CellKind::Free })
                    .collect();
                FloorPlan::from_cells(w, h, cells).ok()
            })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(plan in arb_plan()) {
            prop_assert_eq!(parse_floorplan(&plan.render()).unwrap(), plan);
        }

        #[test]
        fn mazes_are_connected(w in 3usize..16, h in 3usize..16, seed in any::<u64>()) {
            let plan = make_maze(w, h, seed);
            prop_assert!(plan.is_connected());
            prop_assert_eq!(plan, make_maze(w, h, seed));
        }

        #[test]
        fn corridors_are_connected(arm in 1usize..8, stem in 1usize..8) {
            let plan = make_corridor(arm, stem);
            prop_assert!(plan.is_connected());
            prop_assert_eq!(plan.free_cells().len(), 2 * arm + 1 + stem);
        }
    }
}
