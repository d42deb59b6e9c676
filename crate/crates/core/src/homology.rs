//! Persistent homology of grid-sampled scalar fields.
//!
//! Two ways of turning grid samples into a filtered complex are offered.
//! [`Construction::Top`] treats every sample as a pixel (voxel) entering at
//! its own value; pixels touching at a corner are adjacent, and the complex
//! is the nerve of the pixel cover (8-connectivity in the plane).
//! [`Construction::Vertex`] treats samples as vertices of the cubical grid,
//! each higher cell entering with its last vertex (axis connectivity).
//!
//! H0 is computed with a union-find sweep and the elder rule; in the plane H1
//! is computed by reducing the 2-cell boundary matrix over ℤ/2. Edges that
//! kill an H0 class are removed from the boundaries before reduction: their
//! rows can never be pivots of a 2-cell column.
//!
//! Equal values are ordered by linearized vertex index, so results are
//! deterministic.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::grid::{Direction, GridSpec, ScalarField};
use crate::{Error, Result};

/// One point of a persistence diagram.
///
/// For a superlevel filtration `upper` is the birth level and `lower` the
/// death level; for a sublevel filtration the roles swap. Either way
/// `lower < upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub lower: f64,
    pub upper: f64,
    pub essential: bool,
}

impl PersistencePair {
    pub fn finite(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            essential: false,
        }
    }

    #[inline]
    pub fn persistence(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub dim: usize,
    pub direction: Direction,
    pub pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(dim: usize, direction: Direction, pairs: Vec<PersistencePair>) -> Self {
        let mut d = Self {
            dim,
            direction,
            pairs,
        };
        d.canonicalize();
        d
    }

    pub fn empty(dim: usize, direction: Direction) -> Self {
        Self::new(dim, direction, Vec::new())
    }

    /// Finite-coordinate points `(lower, upper)`, optionally keeping essential ones.
    pub fn points(&self, include_essential: bool) -> Vec<(f64, f64)> {
        self.pairs
            .iter()
            .filter(|p| include_essential || !p.essential)
            .map(|p| (p.lower, p.upper))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.pairs.iter().filter(|p| p.essential).count()
    }

    /// The diagram of `-f` under the opposite filtration: `(l, u) ↦ (-u, -l)`.
    pub fn mirrored(&self) -> Self {
        Self::new(
            self.dim,
            self.direction.flipped(),
            self.pairs
                .iter()
                .map(|p| PersistencePair {
                    lower: -p.upper,
                    upper: -p.lower,
                    essential: p.essential,
                })
                .collect(),
        )
    }

    /// Sort pairs: essential first, then by decreasing `upper`, then
    /// increasing `lower`.
    pub fn canonicalize(&mut self) {
        self.pairs.sort_by(pair_order);
    }
}

fn pair_order(a: &PersistencePair, b: &PersistencePair) -> Ordering {
    b.essential
        .cmp(&a.essential)
        .then(b.upper.total_cmp(&a.upper))
        .then(a.lower.total_cmp(&b.lower))
}

/// Where the single essential H0 class of a nonnegative superlevel field dies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EssentialFloor {
    /// At level 0: the component persists until the threshold reaches zero.
    #[default]
    Zero,
    /// At the global minimum of the field.
    GlobalMin,
}

/// How grid samples are assembled into a filtered complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Construction {
    /// Samples are pixels; corner-adjacent samples are connected.
    #[default]
    Top,
    /// Samples are cubical vertices; only axis neighbours are connected.
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PersistenceOptions {
    pub essential_floor: EssentialFloor,
    pub construction: Construction,
}

/// Largest homology dimension supported on a grid of dimension `d`.
pub fn max_supported_dim(d: usize) -> usize {
    if d == 2 {
        1
    } else {
        0
    }
}

pub fn persistence(field: &ScalarField, max_dim: usize) -> Result<Vec<PersistenceDiagram>> {
    persistence_with(field, max_dim, &PersistenceOptions::default())
}

/// Persistence diagrams of dimensions `0..=max_dim`.
pub fn persistence_with(
    field: &ScalarField,
    max_dim: usize,
    opts: &PersistenceOptions,
) -> Result<Vec<PersistenceDiagram>> {
    let d = field.grid().dim();
    if max_dim > max_supported_dim(d) {
        return Err(Error::Unsupported(format!(
            "homology dimension {max_dim} on a {d}-dimensional grid"
        )));
    }
    match field.direction() {
        Direction::Superlevel => {
            let floor = match (field.is_nonneg(), opts.essential_floor) {
                (true, EssentialFloor::Zero) => Some(0.0),
                _ => None,
            };
            Ok(superlevel_diagrams(field.grid(), field.values(), max_dim, floor, opts.construction))
        }
        Direction::Sublevel => {
            let negated: Vec<f64> = field.values().iter().map(|v| -v).collect();
            Ok(superlevel_diagrams(field.grid(), &negated, max_dim, None, opts.construction)
                .iter()
                .map(PersistenceDiagram::mirrored)
                .collect())
        }
    }
}

/// Vertex ranks under the order (value descending, index ascending).
fn superlevel_order(values: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_by(|&a, &b| {
        values[b as usize]
            .total_cmp(&values[a as usize])
            .then(a.cmp(&b))
    });
    let mut rank = vec![0u32; values.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v as usize] = r as u32;
    }
    (order, rank)
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }
}

const NONE: u32 = u32::MAX;

// planar edge kinds: axis 0 (between rows), axis 1 (along a row), and the
// two diagonals of a 2x2 block
const AXIS0: usize = 0;
const AXIS1: usize = 1;
const MAIN: usize = 2;
const ANTI: usize = 3;

/// Neighbour offsets of the chosen construction as (kind, multi-offset).
fn neighbor_offsets(dim: usize, construction: Construction) -> Vec<(usize, Vec<i64>)> {
    let mut out = Vec::new();
    match construction {
        Construction::Vertex => {
            for k in 0..dim {
                for s in [-1i64, 1] {
                    let mut o = vec![0i64; dim];
                    o[k] = s;
                    out.push((k.min(AXIS1), o));
                }
            }
        }
        Construction::Top => {
            let total = 3usize.pow(dim as u32);
            for code in 0..total {
                let mut c = code;
                let mut o = vec![0i64; dim];
                for k in (0..dim).rev() {
                    o[k] = (c % 3) as i64 - 1;
                    c /= 3;
                }
                let nonzero = o.iter().filter(|&&x| x != 0).count();
                if nonzero == 0 {
                    continue;
                }
                let kind = if dim != 2 || nonzero == 1 {
                    if o[0] != 0 {
                        AXIS0
                    } else {
                        AXIS1
                    }
                } else if o[0] == o[1] {
                    MAIN
                } else {
                    ANTI
                };
                out.push((kind, o));
            }
        }
    }
    out
}

/// Key of the planar edge `{a, b}` of the given kind: its lower endpoint,
/// or the lower-left corner of its block for anti-diagonals.
#[inline]
fn edge_key(kind: usize, a: usize, b: usize) -> usize {
    let low = a.min(b);
    if kind == ANTI {
        low - 1
    } else {
        low
    }
}

fn superlevel_diagrams(
    grid: &GridSpec,
    values: &[f64],
    max_dim: usize,
    essential_floor: Option<f64>,
    construction: Construction,
) -> Vec<PersistenceDiagram> {
    let n = values.len();
    let dim = grid.dim();
    let strides = grid.strides();
    let res = &grid.resolution;
    let (order, rank) = superlevel_order(values);
    let offsets = neighbor_offsets(dim, construction);

    // union-find roots are always the eldest vertex of their component
    let mut uf = UnionFind::new(n);
    let mut h0 = Vec::new();
    // for H1: filtration index of each edge, keyed by (kind, edge_key)
    let track_edges = max_dim >= 1;
    let mut edge_index: Vec<Vec<u32>> = if track_edges {
        vec![vec![NONE; n]; 4]
    } else {
        Vec::new()
    };
    let mut edge_negative: Vec<bool> = Vec::new();
    let mut edge_value: Vec<f64> = Vec::new();

    let mut idx = vec![0usize; dim];
    let mut nbrs: Vec<(u32, usize, u32)> = Vec::with_capacity(offsets.len());
    for &v in &order {
        let v = v as usize;
        grid.multi_index(v, &mut idx);
        nbrs.clear();
        for (kind, off) in &offsets {
            let mut u = v as i64;
            let mut inside = true;
            for k in 0..dim {
                let c = idx[k] as i64 + off[k];
                if c < 0 || c as usize >= res[k] {
                    inside = false;
                    break;
                }
                u += off[k] * strides[k] as i64;
            }
            if !inside {
                continue;
            }
            let u = u as usize;
            if rank[u] < rank[v] {
                nbrs.push((rank[u], *kind, u as u32));
            }
        }
        // edges entering with v, ordered by their other endpoint
        nbrs.sort_unstable();
        for &(_, kind, u) in &nbrs {
            let ru = uf.find(u);
            let rv = uf.find(v as u32);
            let negative = ru != rv;
            if negative {
                let (elder, younger) = if rank[ru as usize] < rank[rv as usize] {
                    (ru, rv)
                } else {
                    (rv, ru)
                };
                uf.parent[younger as usize] = elder;
                let birth = values[younger as usize];
                let death = values[v];
                if death < birth {
                    h0.push(PersistencePair::finite(death, birth));
                }
            }
            if track_edges {
                edge_index[kind][edge_key(kind, u as usize, v)] = edge_value.len() as u32;
                edge_negative.push(negative);
                edge_value.push(values[v]);
            }
        }
    }

    let top = order[0] as usize;
    let global_max = values[top];
    let global_min = values[*order.last().unwrap() as usize];
    let floor = essential_floor.unwrap_or(global_min);
    if floor < global_max {
        h0.push(PersistencePair {
            lower: floor,
            upper: global_max,
            essential: true,
        });
    }

    let mut out = vec![PersistenceDiagram::new(0, Direction::Superlevel, h0)];
    if max_dim >= 1 {
        let cells = planar_cells(grid, values, &rank, &edge_index, construction);
        let h1 = reduce_h1(cells, &edge_negative, &edge_value);
        out.push(PersistenceDiagram::new(1, Direction::Superlevel, h1));
    }
    out
}

/// Symmetric difference of two ascending index lists.
fn xor_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// A planar 2-cell: filtration key, boundary edges and entry value.
struct Cell {
    entry: u32,
    key: u32,
    edges: [u32; 4],
    n_edges: usize,
    value: f64,
}

fn planar_cells(
    grid: &GridSpec,
    values: &[f64],
    rank: &[u32],
    edge_index: &[Vec<u32>],
    construction: Construction,
) -> Vec<Cell> {
    let (rows, cols) = (grid.resolution[0], grid.resolution[1]);
    let per_block = match construction {
        Construction::Vertex => 1,
        Construction::Top => 4,
    };
    let mut cells = Vec::with_capacity(per_block * (rows - 1) * (cols - 1));
    let cell = |verts: &[usize], edges: [u32; 4], n_edges: usize, key: usize| {
        let entry = verts.iter().map(|&u| rank[u]).max().unwrap();
        let value = verts
            .iter()
            .map(|&u| values[u])
            .fold(f64::INFINITY, f64::min);
        Cell {
            entry,
            key: key as u32,
            edges,
            n_edges,
            value,
        }
    };
    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let (a, b, c, d) = (i * cols + j, i * cols + j + 1, (i + 1) * cols + j, (i + 1) * cols + j + 1);
            let e = |kind: usize, key: usize| edge_index[kind][key];
            match construction {
                Construction::Vertex => {
                    let edges = [e(AXIS1, a), e(AXIS1, c), e(AXIS0, a), e(AXIS0, b)];
                    cells.push(cell(&[a, b, c, d], edges, 4, a));
                }
                Construction::Top => {
                    let tris = [
                        ([b, c, d], [e(AXIS0, b), e(AXIS1, c), e(ANTI, a)]),
                        ([a, c, d], [e(AXIS0, a), e(AXIS1, c), e(MAIN, a)]),
                        ([a, b, d], [e(AXIS1, a), e(AXIS0, b), e(MAIN, a)]),
                        ([a, b, c], [e(AXIS1, a), e(AXIS0, a), e(ANTI, a)]),
                    ];
                    for (t, (verts, [x, y, z])) in tris.into_iter().enumerate() {
                        cells.push(cell(&verts, [x, y, z, NONE], 3, 4 * a + t));
                    }
                }
            }
        }
    }
    cells.sort_unstable_by_key(|c| (c.entry, c.key));
    cells
}

fn reduce_h1(cells: Vec<Cell>, edge_negative: &[bool], edge_value: &[f64]) -> Vec<PersistencePair> {
    let mut pivot_owner: Vec<u32> = vec![NONE; edge_value.len()];
    let mut reduced: Vec<Vec<u32>> = Vec::new();
    let mut pairs = Vec::new();
    let mut col: Vec<u32> = Vec::with_capacity(4);
    let mut scratch: Vec<u32> = Vec::new();

    for cell in &cells {
        col.clear();
        for &e in &cell.edges[..cell.n_edges] {
            debug_assert_ne!(e, NONE);
            if !edge_negative[e as usize] {
                col.push(e);
            }
        }
        col.sort_unstable();
        while let Some(&pivot) = col.last() {
            let owner = pivot_owner[pivot as usize];
            if owner == NONE {
                break;
            }
            xor_sorted(&col, &reduced[owner as usize], &mut scratch);
            core::mem::swap(&mut col, &mut scratch);
        }
        if let Some(&pivot) = col.last() {
            pivot_owner[pivot as usize] = reduced.len() as u32;
            reduced.push(col.clone());
            let birth = edge_value[pivot as usize];
            if cell.value < birth {
                pairs.push(PersistencePair::finite(cell.value, birth));
            }
        }
    }
    pairs
}

/// Brute-force H0 by a threshold sweep over the distinct field values, with
/// components recomputed by flood fill at every level.
///
/// Shares no code with [`persistence`] beyond the grid neighbourhoods.
pub mod oracle {
    use super::*;

    pub fn h0_oracle(field: &ScalarField) -> PersistenceDiagram {
        h0_oracle_with(field, &PersistenceOptions::default())
    }

    pub fn h0_oracle_with(field: &ScalarField, opts: &PersistenceOptions) -> PersistenceDiagram {
        match field.direction() {
            Direction::Superlevel => {
                let floor = match (field.is_nonneg(), opts.essential_floor) {
                    (true, EssentialFloor::Zero) => Some(0.0),
                    _ => None,
                };
                sweep(field.grid(), field.values(), floor, opts.construction)
            }
            Direction::Sublevel => {
                let neg: Vec<f64> = field.values().iter().map(|v| -v).collect();
                sweep(field.grid(), &neg, None, opts.construction).mirrored()
            }
        }
    }

    #[derive(Clone, Copy)]
    struct Component {
        birth: f64,
        rep: usize,
    }

    impl Component {
        fn is_elder_than(&self, other: &Component) -> bool {
            self.birth > other.birth || (self.birth == other.birth && self.rep < other.rep)
        }
    }

    fn sweep(
        grid: &GridSpec,
        values: &[f64],
        floor: Option<f64>,
        construction: Construction,
    ) -> PersistenceDiagram {
        let n = values.len();
        let mut levels: Vec<f64> = values.to_vec();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();

        let mut pairs = Vec::new();
        // component of each vertex active at the previous level
        let mut prev: Vec<Option<Component>> = vec![None; n];
        for &level in &levels {
            let mut label = vec![usize::MAX; n];
            let mut next: Vec<Option<Component>> = vec![None; n];
            for seed in 0..n {
                if values[seed] < level || label[seed] != usize::MAX {
                    continue;
                }
                // flood fill one component of {f >= level}
                let mut members = vec![seed];
                label[seed] = seed;
                let mut head = 0;
                while head < members.len() {
                    let v = members[head];
                    head += 1;
                    let mut visit = |u: usize| {
                        if values[u] >= level && label[u] == usize::MAX {
                            label[u] = seed;
                            members.push(u);
                        }
                    };
                    match construction {
                        Construction::Top => grid.for_each_king_neighbor(v, &mut visit),
                        Construction::Vertex => grid.for_each_neighbor(v, &mut visit),
                    }
                }
                let mut olds: Vec<Component> = Vec::new();
                for &v in &members {
                    if let Some(c) = prev[v] {
                        if !olds.iter().any(|o| o.rep == c.rep) {
                            olds.push(c);
                        }
                    }
                }
                let survivor = if olds.is_empty() {
                    Component {
                        birth: level,
                        rep: *members.iter().min().unwrap(),
                    }
                } else {
                    let mut eldest = olds[0];
                    for c in &olds[1..] {
                        if c.is_elder_than(&eldest) {
                            eldest = *c;
                        }
                    }
                    for c in &olds {
                        if c.rep != eldest.rep && level < c.birth {
                            pairs.push(PersistencePair::finite(level, c.birth));
                        }
                    }
                    eldest
                };
                for &v in &members {
                    next[v] = Some(survivor);
                }
            }
            prev = next;
        }
        let global_max = levels[0];
        let global_min = *levels.last().unwrap();
        let floor = floor.unwrap_or(global_min);
        if floor < global_max {
            pairs.push(PersistencePair {
                lower: floor,
                upper: global_max,
                essential: true,
            });
        }
        PersistenceDiagram::new(0, Direction::Superlevel, pairs)
    }
}

pub use oracle::h0_oracle;
