//! Marching squares on a rectangular node grid, optionally periodic in
//! either axis, with contour stitching into polylines.

use std::collections::HashMap;

/// Node values `values[i * ny + j]` at grid coordinates `(i, j)`.
#[derive(Debug, Clone)]
pub struct NodeGrid {
    pub nx: usize,
    pub ny: usize,
    pub wrap_x: bool,
    pub wrap_y: bool,
    pub values: Vec<f64>,
}

impl NodeGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[(i % self.nx) * self.ny + (j % self.ny)]
    }

    fn cells(&self) -> (usize, usize) {
        (
            if self.wrap_x { self.nx } else { self.nx - 1 },
            if self.wrap_y { self.ny } else { self.ny - 1 },
        )
    }
}

/// Zero contour in grid coordinates. On periodic axes coordinates are
/// unwrapped along the line, so consecutive points never jump by a period.
#[derive(Debug, Clone, PartialEq)]
pub struct GridContour {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EdgeKey {
    // (i, j)–(i+1, j)
    X(usize, usize),
    // (i, j)–(i, j+1)
    Y(usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct Crossing {
    key: EdgeKey,
    pos: (f64, f64),
}

/// Fraction along an edge from node value `a` to node value `b` where the
/// zero lies. Receives the two end positions in grid coordinates.
pub type EdgeSolver<'a> = dyn Fn((f64, f64), (f64, f64), f64, f64) -> f64 + Sync + 'a;

pub fn linear_fraction(_: (f64, f64), _: (f64, f64), a: f64, b: f64) -> f64 {
    a / (a - b)
}

fn positive(v: f64) -> bool {
    v > 0.0
}

/// Extracts all zero contours.
///
/// Saddle cells are resolved by the sign of the mean of the four corners.
/// `solver` places each crossing on its edge (see [`linear_fraction`]).
pub fn zero_contours(grid: &NodeGrid, solver: &EdgeSolver<'_>) -> Vec<GridContour> {
    let (cx, cy) = grid.cells();
    let mut crossings: HashMap<EdgeKey, (f64, f64)> = HashMap::new();
    let mut crossing_at = |key: EdgeKey, a: (f64, f64), b: (f64, f64), va: f64, vb: f64| -> (f64, f64) {
        let base = *crossings.entry(key).or_insert_with(|| {
            let f = solver(a, b, va, vb).clamp(0.0, 1.0);
            (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1))
        });
        // crossing stored in canonical coordinates; shift into this cell's frame
        let shift = |v: f64, anchor: f64, n: usize| v + ((anchor - v) / n as f64).round() * n as f64;
        (shift(base.0, a.0, grid.nx), shift(base.1, a.1, grid.ny))
    };
    let mut segments: Vec<[Crossing; 2]> = Vec::new();
    for i in 0..cx {
        for j in 0..cy {
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v: Vec<f64> = c.iter().map(|&(a, b)| grid.value(a, b)).collect();
            let s: Vec<bool> = v.iter().map(|&x| positive(x)).collect();
            let pos = |k: usize| (c[k].0 as f64, c[k].1 as f64);
            let key = |e: usize| -> EdgeKey {
                let (nx, ny) = (grid.nx, grid.ny);
                match e {
                    0 => EdgeKey::X(i % nx, j % ny),
                    1 => EdgeKey::Y((i + 1) % nx, j % ny),
                    2 => EdgeKey::X(i % nx, (j + 1) % ny),
                    _ => EdgeKey::Y(i % nx, j % ny),
                }
            };
            // edge e joins corners (e, e+1 mod 4); edges 2 and 3 run toward lower corners
            let ends = |e: usize| -> (usize, usize) {
                match e {
                    0 => (0, 1),
                    1 => (1, 2),
                    2 => (3, 2),
                    _ => (0, 3),
                }
            };
            let mut cross = |e: usize| -> Crossing {
                let (a, b) = ends(e);
                Crossing {
                    key: key(e),
                    pos: crossing_at(key(e), pos(a), pos(b), v[a], v[b]),
                }
            };
            let active: Vec<usize> = (0..4)
                .filter(|&e| {
                    let (a, b) = ends(e);
                    s[a] != s[b]
                })
                .collect();
            match active.len() {
                2 => segments.push([cross(active[0]), cross(active[1])]),
                4 => {
                    let centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if positive(centre) == s[0] {
                        // corners 0 and 2 joined through the centre
                        segments.push([cross(0), cross(1)]);
                        segments.push([cross(2), cross(3)]);
                    } else {
                        segments.push([cross(0), cross(3)]);
                        segments.push([cross(1), cross(2)]);
                    }
                }
                _ => {}
            }
        }
    }
    stitch(&segments)
}

fn stitch(segments: &[[Crossing; 2]]) -> Vec<GridContour> {
    let mut by_edge: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for c in seg {
            by_edge.entry(c.key).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    // open chains first: start at edges touched by a single segment
    let mut starts: Vec<(usize, usize)> = Vec::new();
    for (s, seg) in segments.iter().enumerate() {
        for (end, c) in seg.iter().enumerate() {
            if by_edge[&c.key].len() == 1 {
                starts.push((s, end));
            }
        }
    }
    let order: Vec<(usize, usize, bool)> = starts
        .iter()
        .map(|&(s, e)| (s, e, false))
        .chain((0..segments.len()).map(|s| (s, 0, true)))
        .collect();
    for (s0, start_end, closed_pass) in order {
        if used[s0] {
            continue;
        }
        used[s0] = true;
        let first = segments[s0][start_end];
        let second = segments[s0][1 - start_end];
        let mut points = vec![first.pos, second.pos];
        let mut cur = s0;
        let mut tail = second;
        let mut closed = false;
        loop {
            let next = by_edge[&tail.key].iter().copied().find(|&t| t != cur && !used[t]);
            let Some(t) = next else {
                if closed_pass && tail.key == first.key {
                    closed = true;
                }
                break;
            };
            let seg = segments[t];
            let (near, far) = if seg[0].key == tail.key { (seg[0], seg[1]) } else { (seg[1], seg[0]) };
            let off = (tail.pos.0 - near.pos.0, tail.pos.1 - near.pos.1);
            let far_pos = (far.pos.0 + off.0, far.pos.1 + off.1);
            used[t] = true;
            cur = t;
            tail = Crossing { key: far.key, pos: far_pos };
            if closed_pass && far.key == first.key {
                closed = true;
                break;
            }
            points.push(far_pos);
        }
        out.push(GridContour { points, closed });
    }
    out
}
