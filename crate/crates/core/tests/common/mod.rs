#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use genus_iso::grid::{Cell, GenusGrid, Position, SegmentId, SegmentLayout};
use genus_iso::schema::Letter;
use genus_iso::{SchemaWord, SurfaceInvariants, UGraph};
use num_bigint::BigInt;

/// The unique interior neighbour of a non-corner border cell.
pub fn inward(l: &SegmentLayout, c: Cell) -> Cell {
    let cand = [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)];
    cand.iter()
        .map(|(dx, dy)| (c.x as i64 + dx, c.y as i64 + dy))
        .filter(|&(x, y)| x >= 1 && y >= 1)
        .map(|(x, y)| Cell::new(x as usize, y as usize))
        .find(|&n| l.is_interior(n))
        .expect("border cell with an interior neighbour")
}

/// Interior cell next to port `j` of `seg`.
pub fn port_inner(l: &SegmentLayout, seg: SegmentId, j: usize) -> Cell {
    inward(l, l.port_cell(seg, j).unwrap())
}

/// Shortest path of interior cells from `a` to `b` avoiding `avoid`.
pub fn interior_path(l: &SegmentLayout, a: Cell, b: Cell, avoid: &BTreeSet<Cell>) -> Vec<Cell> {
    let mut prev: BTreeMap<Cell, Cell> = BTreeMap::new();
    let mut queue = VecDeque::from([a]);
    let mut seen = BTreeSet::from([a]);
    while let Some(c) = queue.pop_front() {
        if c == b {
            let mut path = vec![b];
            let mut at = b;
            while at != a {
                at = prev[&at];
                path.push(at);
            }
            path.reverse();
            return path;
        }
        for (dx, dy) in [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)] {
            let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
            if x < 1 || y < 1 {
                continue;
            }
            let n = Cell::new(x as usize, y as usize);
            if l.is_interior(n) && !avoid.contains(&n) && seen.insert(n) {
                prev.insert(n, c);
                queue.push_back(n);
            }
        }
    }
    panic!("no interior path from {a} to {b}");
}

/// Grid edges along a cell path.
pub fn path_edges(path: &[Cell]) -> Vec<(Position, Position)> {
    path.windows(2).map(|w| (Position::Cell(w[0]), Position::Cell(w[1]))).collect()
}

/// A single cycle through the given ports of `seg`, in visiting order.
/// Even visits leave the grid through `seg`, odd visits come back in
/// through it; with an odd number of visits the last leg returns through
/// the interior.
pub fn crossing_cycle(l: &SegmentLayout, seg: SegmentId, ports: &[usize]) -> GenusGrid {
    let mut edges = Vec::new();
    let mut used = BTreeSet::new();
    let mut legs = Vec::new();
    for (k, &j) in ports.iter().enumerate() {
        let near = port_inner(l, seg, j);
        let far = port_inner(l, seg.partner(), j);
        edges.push((Position::Cell(near), Position::Port(seg, j)));
        edges.push((Position::Port(seg.partner(), j), Position::Cell(far)));
        used.insert(near);
        used.insert(far);
        legs.push((k, near, far));
    }
    // Leg k: from where visit k lands to where visit k+1 starts.
    let n = ports.len();
    let mut plans = Vec::new();
    for k in 0..n {
        let (from, to) = if k == n - 1 && n % 2 == 1 {
            (legs[k].2, legs[0].1)
        } else if k % 2 == 0 {
            (legs[k].2, legs[(k + 1) % n].2)
        } else {
            (legs[k].1, legs[(k + 1) % n].1)
        };
        plans.push((from, to));
    }
    // Short legs first so long detours route around them.
    plans.sort_by_key(|&(a, b)| a.x.abs_diff(b.x) + a.y.abs_diff(b.y));
    for (from, to) in plans {
        let mut avoid = used.clone();
        avoid.remove(&from);
        avoid.remove(&to);
        let p = interior_path(l, from, to, &avoid);
        used.extend(p.iter().copied());
        edges.extend(path_edges(&p));
    }
    GenusGrid::build(l.clone(), &edges).unwrap()
}

/// Number of simple cycles (length >= 3) by depth-first search over vertex
/// sequences rooted at their smallest vertex; each cycle is found twice.
pub fn count_cycles_dfs(g: &UGraph) -> u64 {
    fn go(g: &UGraph, root: usize, v: usize, len: usize, on: &mut [bool], count: &mut u64) {
        for &(w, _) in g.neighbors(v) {
            if w == root && len >= 3 {
                *count += 1;
            } else if w > root && !on[w] {
                on[w] = true;
                go(g, root, w, len + 1, on, count);
                on[w] = false;
            }
        }
    }
    let mut count = 0;
    let mut on = vec![false; g.vertex_count()];
    for root in 0..g.vertex_count() {
        on[root] = true;
        go(g, root, root, 1, &mut on, &mut count);
        on[root] = false;
    }
    count / 2
}

/// Perfect matchings as sorted edge lists: the smallest uncovered vertex is
/// matched first, so every matching is produced once.
pub fn perfect_matchings(g: &UGraph) -> Vec<Vec<usize>> {
    fn go(g: &UGraph, covered: &mut [bool], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            let mut m = cur.clone();
            m.sort_unstable();
            out.push(m);
            return;
        }
        let first = covered.iter().position(|&c| !c).unwrap();
        for e in 0..g.edge_count() {
            let (a, b) = g.edge(e);
            if (a != first && b != first) || covered[a] || covered[b] {
                continue;
            }
            covered[a] = true;
            covered[b] = true;
            cur.push(e);
            go(g, covered, left - 2, cur, out);
            cur.pop();
            covered[a] = false;
            covered[b] = false;
        }
    }
    let n = g.vertex_count();
    let mut out = Vec::new();
    if n.is_multiple_of(2) {
        go(g, &mut vec![false; n], n, &mut Vec::new(), &mut out);
    }
    out
}

/// Leibniz sign of the bijection rows -> columns a matching induces, rows
/// and columns being the two colour classes in increasing order.
pub fn leibniz_sign(g: &UGraph, colors: &[u8], m: &[usize]) -> i64 {
    let rows: Vec<usize> = (0..colors.len()).filter(|&v| colors[v] == 0).collect();
    let cols: Vec<usize> = (0..colors.len()).filter(|&v| colors[v] == 1).collect();
    let mut perm = vec![usize::MAX; rows.len()];
    for &e in m {
        let (a, b) = g.edge(e);
        let (r, c) = if colors[a] == 0 { (a, b) } else { (b, a) };
        let ri = rows.iter().position(|&x| x == r).unwrap();
        perm[ri] = cols.iter().position(|&x| x == c).unwrap();
    }
    // Sign by cycle decomposition.
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for s in 0..perm.len() {
        let mut len = 0;
        let mut v = s;
        while !seen[v] {
            seen[v] = true;
            v = perm[v];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// `sum_i (-1)^i w(e_i)` over a closed vertex walk, `i` from 1.
pub fn walk_circulation(g: &UGraph, verts: &[usize], w: impl Fn(usize) -> BigInt) -> BigInt {
    let n = verts.len();
    (0..n)
        .map(|i| {
            let e = g.edge_between(verts[i], verts[(i + 1) % n]).unwrap();
            if i % 2 == 0 {
                -w(e)
            } else {
                w(e)
            }
        })
        .sum()
}

pub fn weights_of(g: &GenusGrid) -> Vec<BigInt> {
    genus_iso::CombinedWeight::new(g).values().to_vec()
}

/// Corner classes by gluing tails to tails and heads to heads.
pub fn corner_classes_oracle(word: &SchemaWord) -> usize {
    let n = word.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    let ends = |t: usize, l: &Letter| if l.inv { ((t + 1) % n, t) } else { (t, (t + 1) % n) };
    let mut seen: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (t, l) in word.letters().iter().enumerate() {
        let (tail, head) = ends(t, l);
        if let Some(&(t0, h0)) = seen.get(l.label.as_str()) {
            for (a, b) in [(tail, t0), (head, h0)] {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            }
        } else {
            seen.insert(&l.label, (tail, head));
        }
    }
    (0..n).filter(|&x| root(&mut parent, x) == x).count()
}

pub fn invariants_oracle(word: &SchemaWord) -> SurfaceInvariants {
    let mut exps: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
    for l in word.letters() {
        exps.entry(&l.label).or_default().push(l.inv);
    }
    let orientable = exps.values().all(|v| v[0] != v[1]);
    let chi = corner_classes_oracle(word) as i64 - exps.len() as i64 + 1;
    let genus = if orientable { (2 - chi) / 2 } else { 2 - chi };
    SurfaceInvariants { orientable, euler_char: chi, genus }
}
