//! Shortest paths on a [`FloorPlan`] via A* with the Manhattan heuristic.
//!
//! Movement is 4-connected. Neighbours are expanded in the order Up, Down,
//! Left, Right and the open set pops the lowest f-score, oldest entry first,
//! so identical queries always yield identical step sequences.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::floorplan::{Coord, FloorPlan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("coordinate {0} is out of bounds or on a wall")]
    InvalidCoord(Coord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathResult {
    /// `None` when the target cannot be reached.
    pub distance: Option<u32>,
    /// Cells visited after leaving the source, ending at the target.
    pub steps: Vec<Coord>,
}

impl PathResult {
    pub fn unreachable() -> Self {
        Self {
            distance: None,
            steps: Vec::new(),
        }
    }

    pub fn is_reachable(&self) -> bool {
        self.distance.is_some()
    }

    pub fn first_step(&self) -> Option<Coord> {
        self.steps.first().copied()
    }
}

fn check(plan: &FloorPlan, c: Coord) -> Result<(), PathError> {
    if plan.is_free(c) {
        Ok(())
    } else {
        Err(PathError::InvalidCoord(c))
    }
}

pub fn astar(plan: &FloorPlan, source: Coord, target: Coord) -> Result<PathResult, PathError> {
    check(plan, source)?;
    check(plan, target)?;
    if source == target {
        return Ok(PathResult {
            distance: Some(0),
            steps: Vec::new(),
        });
    }

    let n = plan.area();
    let mut g = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut counter = 0u64;

    let si = plan.index(source).unwrap();
    let ti = plan.index(target).unwrap();
    g[si] = 0;
    open.push(Reverse((source.manhattan(target), counter, source)));

    while let Some(Reverse((_, _, cur))) = open.pop() {
        let ci = plan.index(cur).unwrap();
        if closed[ci] {
            continue;
        }
        if ci == ti {
            break;
        }
        closed[ci] = true;
        let next_g = g[ci] + 1;
        for nb in plan.neighbors(cur) {
            let ni = plan.index(nb).unwrap();
            if closed[ni] || next_g >= g[ni] {
                continue;
            }
            g[ni] = next_g;
            parent[ni] = ci;
            counter += 1;
            open.push(Reverse((next_g + nb.manhattan(target), counter, nb)));
        }
    }

    if g[ti] == u32::MAX {
        return Ok(PathResult::unreachable());
    }
    let width = plan.width();
    let mut steps = Vec::with_capacity(g[ti] as usize);
    let mut at = ti;
    while at != si {
        steps.push(Coord::new((at % width) as i32, (at / width) as i32));
        at = parent[at];
    }
    steps.reverse();
    Ok(PathResult {
        distance: Some(g[ti]),
        steps,
    })
}

/// Distances from `source` to each target slot; empty slots and unreachable
/// targets map to `sentinel`.
pub fn distance_row(
    plan: &FloorPlan,
    source: Coord,
    targets: &[Option<Coord>],
    sentinel: u32,
) -> Result<Vec<u32>, PathError> {
    check(plan, source)?;
    targets
        .iter()
        .map(|t| match t {
            None => Ok(sentinel),
            Some(t) => Ok(astar(plan, source, *t)?.distance.unwrap_or(sentinel)),
        })
        .collect()
}

/// Default sentinel for absent or unreachable tasks: one more than the number
/// of cells, which exceeds every feasible path length.
pub fn default_sentinel(plan: &FloorPlan) -> u32 {
    plan.area() as u32 + 1
}

/// Memoised A* queries for a single simulation step.
#[derive(Debug, Clone, Default)]
pub struct PathMemo {
    cache: HashMap<(Coord, Coord), PathResult>,
}

impl PathMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.cache.clear();
    }

    pub fn path(&mut self, plan: &FloorPlan, source: Coord, target: Coord) -> Result<&PathResult, PathError> {
        use std::collections::hash_map::Entry;
        match self.cache.entry((source, target)) {
            Entry::Occupied(e) => Ok(e.into_mut()),
            Entry::Vacant(e) => Ok(e.insert(astar(plan, source, target)?)),
        }
    }

    pub fn distance_or(&mut self, plan: &FloorPlan, source: Coord, target: Option<Coord>, sentinel: u32) -> Result<u32, PathError> {
        match target {
            None => Ok(sentinel),
            Some(t) => Ok(self.path(plan, source, t)?.distance.unwrap_or(sentinel)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorplan::{make_open_grid, parse_floorplan};

    #[test]
    fn open_grid_distance_is_manhattan() {
        let plan = make_open_grid(5, 5);
        let r = astar(&plan, Coord::new(0, 0), Coord::new(3, 4)).unwrap();
        assert_eq!(r.distance, Some(7));
        assert_eq!(r.steps.len(), 7);
        assert_eq!(*r.steps.last().unwrap(), Coord::new(3, 4));
    }

    #[test]
    fn identity_path_is_empty() {
        let plan = make_open_grid(5, 5);
        let r = astar(&plan, Coord::new(2, 2), Coord::new(2, 2)).unwrap();
        assert_eq!(r.distance, Some(0));
        assert!(r.steps.is_empty());
    }

    #[test]
    fn detours_around_a_wall() {
        // wall column with a gap at the bottom
        let plan = parse_floorplan(".#.\n.#.\n...").unwrap();
        let r = astar(&plan, Coord::new(0, 0), Coord::new(2, 0)).unwrap();
        assert_eq!(r.distance, Some(6));
        for w in std::iter::once(Coord::new(0, 0)).chain(r.steps.iter().copied()).collect::<Vec<_>>().windows(2) {
            assert_eq!(w[0].manhattan(w[1]), 1);
            assert!(plan.is_free(w[1]));
        }
    }

    #[test]
    fn walls_and_bounds_are_rejected() {
        let plan = parse_floorplan(".#\n..").unwrap();
        assert_eq!(
            astar(&plan, Coord::new(1, 0), Coord::new(0, 0)),
            Err(PathError::InvalidCoord(Coord::new(1, 0)))
        );
        assert_eq!(
            astar(&plan, Coord::new(0, 0), Coord::new(5, 0)),
            Err(PathError::InvalidCoord(Coord::new(5, 0)))
        );
    }

    #[test]
    fn unreachable_target() {
        let plan = parse_floorplan(".#.\n.#.").unwrap();
        let r = astar(&plan, Coord::new(0, 0), Coord::new(2, 1)).unwrap();
        assert_eq!(r, PathResult::unreachable());
    }

    #[test]
    fn distance_rows() {
        let plan = make_open_grid(5, 5);
        let src = Coord::new(0, 0);
        assert_eq!(
            distance_row(&plan, src, &[Some(Coord::new(3, 4)), Some(Coord::new(1, 1))], 999).unwrap(),
            vec![7, 2]
        );
        assert_eq!(distance_row(&plan, src, &[None, Some(src)], 999).unwrap(), vec![999, 0]);

        let walled = parse_floorplan("..#.\n..#.").unwrap();
        assert_eq!(
            distance_row(&walled, src, &[Some(Coord::new(3, 1))], 999).unwrap(),
            vec![999]
        );
        assert!(distance_row(&walled, src, &[Some(Coord::new(2, 0))], 999).is_err());
    }

    #[test]
    fn tie_breaking_is_stable() {
        let plan = make_open_grid(4, 4);
        let a = astar(&plan, Coord::new(0, 0), Coord::new(3, 3)).unwrap();
        let b = astar(&plan, Coord::new(0, 0), Coord::new(3, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn memo_matches_direct_queries() {
        let plan = make_open_grid(4, 4);
        let mut memo = PathMemo::new();
        let direct = astar(&plan, Coord::new(0, 1), Coord::new(3, 2)).unwrap();
        assert_eq!(memo.path(&plan, Coord::new(0, 1), Coord::new(3, 2)).unwrap(), &direct);
        assert_eq!(memo.path(&plan, Coord::new(0, 1), Coord::new(3, 2)).unwrap(), &direct);
        assert_eq!(memo.distance_or(&plan, Coord::new(0, 1), None, 17).unwrap(), 17);
    }
}
