//! Sampled domains: point clouds with a background geodesic oracle.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::Write;

use crate::surfaces::FemMesh;

use super::{DiscretizeError, Result};

/// One sample point of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    /// Chart coordinates in the owning square (diagnostic only).
    pub chart: [f64; 2],
    /// Owning square of the generating mesh; `u32::MAX` for points created
    /// by collar extrusion.
    pub square: u32,
    /// Whether the point lies on the domain boundary.
    pub is_boundary: bool,
    /// Collar depth coordinate: 0 on the boundary, rising to just under 1
    /// at the innermost collar ring; `None` outside the collar.  A point
    /// is boundary exactly when this is `Some(0.0)`.
    pub collar_t: Option<f64>,
}

/// A surface sampled at background resolution.
///
/// Holds the sample points, a weighted neighbor graph whose shortest paths
/// realize geodesic distances (quad sides plus both diagonals, so the
/// worst-case metric distortion is the 8-neighbor stencil's ~8%), the
/// boundary circles as cyclic point chains, and the collar's ring ladder
/// used to locate depth-`t` copies of boundary points.
#[derive(Debug, Clone)]
pub struct SampledDomain {
    points: Vec<SamplePoint>,
    /// `adj[i]` sorted by neighbor id; every edge appears in both rows.
    adj: Vec<Vec<(u32, f64)>>,
    h_bg: f64,
    walks: Vec<Vec<u32>>,
    /// `rings[w][0]` is the collar seam (innermost), `rings[w][layers]`
    /// the boundary rim, matching `walks[w]` position by position.
    rings: Vec<Vec<Vec<u32>>>,
    collar_layers: usize,
}

/// Min-heap entry for Dijkstra sweeps; ties break on node id so queue
/// order never depends on insertion history.
#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SampledDomain {
    /// Samples a mesh: every node becomes a point, every cell contributes
    /// its four sides and both diagonals to the background graph.
    pub fn from_mesh(mesh: &FemMesh) -> Result<Self> {
        let n = mesh.n_nodes;
        if n == 0 || mesh.cells.is_empty() {
            return Err(DiscretizeError::BadInput("mesh has no cells".into()));
        }
        let mut square_of = vec![u32::MAX; n];
        let mut seen = vec![false; n];
        let mut emap: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let mut h_bg = 0.0f64;
        for cell in &mesh.cells {
            let [sw, se, ne, nw] = cell.corners;
            for &c in &cell.corners {
                if !seen[c as usize] {
                    seen[c as usize] = true;
                    square_of[c as usize] = cell.square;
                }
            }
            let diag = (cell.w * cell.w + cell.h * cell.h).sqrt();
            for (a, b, len) in [
                (sw, se, cell.w),
                (nw, ne, cell.w),
                (sw, nw, cell.h),
                (se, ne, cell.h),
                (sw, ne, diag),
                (se, nw, diag),
            ] {
                if a == b {
                    // Identified meshes can pinch a cell side to a point.
                    continue;
                }
                let key = (a.min(b), a.max(b));
                let e = emap.entry(key).or_insert(len);
                if len < *e {
                    *e = len;
                }
            }
            h_bg = h_bg.max(cell.w.max(cell.h));
        }

        let mut is_b = vec![false; n];
        for walk in &mesh.boundary_walks {
            for &v in walk {
                is_b[v as usize] = true;
            }
        }
        let layers = mesh.collar_layers;
        let mut collar_t = vec![None; n];
        if layers > 0 {
            for rings_w in &mesh.collar_rings {
                for (i, ring) in rings_w.iter().enumerate().skip(1) {
                    let t = (layers - i) as f64 / layers as f64;
                    for &v in ring {
                        collar_t[v as usize] = Some(t);
                    }
                }
            }
        } else {
            for v in 0..n {
                if is_b[v] {
                    collar_t[v] = Some(0.0);
                }
            }
        }

        let points: Vec<SamplePoint> = (0..n)
            .map(|v| SamplePoint {
                chart: mesh.coords[v],
                square: square_of[v],
                is_boundary: is_b[v],
                collar_t: collar_t[v],
            })
            .collect();
        let edges: Vec<(u32, u32, f64)> =
            emap.into_iter().map(|((a, b), len)| (a, b, len)).collect();
        Self::from_parts(
            points,
            &edges,
            mesh.boundary_walks.clone(),
            mesh.collar_rings.clone(),
            layers,
            h_bg,
        )
    }

    /// Assembles and validates a domain from raw parts; the constructor
    /// behind both [`SampledDomain::from_mesh`] and the text reader.
    pub fn from_parts(
        points: Vec<SamplePoint>,
        edges: &[(u32, u32, f64)],
        walks: Vec<Vec<u32>>,
        rings: Vec<Vec<Vec<u32>>>,
        collar_layers: usize,
        h_bg: f64,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(DiscretizeError::BadInput("domain needs at least one point".into()));
        }
        if !(h_bg > 0.0) || !h_bg.is_finite() {
            return Err(DiscretizeError::BadInput(format!(
                "edge step {h_bg} must be positive"
            )));
        }
        for (i, p) in points.iter().enumerate() {
            match p.collar_t {
                Some(t) if !(0.0..=1.0).contains(&t) => {
                    return Err(DiscretizeError::BadInput(format!(
                        "point {i}: collar depth {t} outside [0, 1]"
                    )));
                }
                Some(t) if (t == 0.0) != p.is_boundary => {
                    return Err(DiscretizeError::BadInput(format!(
                        "point {i}: boundary flag disagrees with collar depth {t}"
                    )));
                }
                None if p.is_boundary => {
                    return Err(DiscretizeError::BadInput(format!(
                        "point {i}: boundary point lacks its zero collar depth"
                    )));
                }
                _ => {}
            }
            if !p.chart.iter().all(|c| c.is_finite()) {
                return Err(DiscretizeError::BadInput(format!(
                    "point {i}: non-finite chart coordinates"
                )));
            }
        }

        let mut emap: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for &(a, b, len) in edges {
            if a as usize >= n || b as usize >= n || a == b {
                return Err(DiscretizeError::BadInput(format!(
                    "edge ({a}, {b}) invalid for {n} points"
                )));
            }
            if !(len > 0.0) || !len.is_finite() {
                return Err(DiscretizeError::BadInput(format!(
                    "edge ({a}, {b}) has non-positive length {len}"
                )));
            }
            let key = (a.min(b), a.max(b));
            let e = emap.entry(key).or_insert(len);
            if len < *e {
                *e = len;
            }
        }
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (&(a, b), &len) in &emap {
            adj[a as usize].push((b, len));
            adj[b as usize].push((a, len));
        }
        for row in adj.iter_mut() {
            row.sort_unstable_by_key(|&(j, _)| j);
        }

        // Boundary circles: cover every boundary point exactly once, run
        // along background edges.
        let mut walk_count = vec![0usize; n];
        for (w, walk) in walks.iter().enumerate() {
            if walk.is_empty() {
                return Err(DiscretizeError::BadInput(format!("walk {w} is empty")));
            }
            for &v in walk {
                if v as usize >= n {
                    return Err(DiscretizeError::BadInput(format!(
                        "walk {w} references point {v} of {n}"
                    )));
                }
                if !points[v as usize].is_boundary {
                    return Err(DiscretizeError::BadInput(format!(
                        "walk {w} passes through interior point {v}"
                    )));
                }
                walk_count[v as usize] += 1;
            }
            if walk.len() >= 2 {
                for i in 0..walk.len() {
                    let a = walk[i];
                    let b = walk[(i + 1) % walk.len()];
                    if adj[a as usize].binary_search_by_key(&b, |&(j, _)| j).is_err() {
                        return Err(DiscretizeError::BadInput(format!(
                            "walk {w}: consecutive points {a}, {b} not background-adjacent"
                        )));
                    }
                }
            }
        }
        for v in 0..n {
            let expected = usize::from(points[v].is_boundary);
            if walk_count[v] != expected {
                return Err(DiscretizeError::BadInput(format!(
                    "point {v} appears {} times in boundary walks, expected {expected}",
                    walk_count[v]
                )));
            }
        }

        if collar_layers == 0 {
            if !rings.is_empty() {
                return Err(DiscretizeError::BadInput(
                    "collar rings present but layer count is zero".into(),
                ));
            }
        } else {
            if rings.len() != walks.len() {
                return Err(DiscretizeError::BadInput(format!(
                    "{} ring ladders for {} walks",
                    rings.len(),
                    walks.len()
                )));
            }
            for (w, ladder) in rings.iter().enumerate() {
                if ladder.len() != collar_layers + 1 {
                    return Err(DiscretizeError::BadInput(format!(
                        "walk {w}: {} rings for {collar_layers} layers",
                        ladder.len()
                    )));
                }
                for (i, ring) in ladder.iter().enumerate() {
                    if ring.len() != walks[w].len() {
                        return Err(DiscretizeError::BadInput(format!(
                            "walk {w} ring {i}: {} points, walk has {}",
                            ring.len(),
                            walks[w].len()
                        )));
                    }
                    for &v in ring {
                        if v as usize >= n {
                            return Err(DiscretizeError::BadInput(format!(
                                "walk {w} ring {i} references point {v} of {n}"
                            )));
                        }
                    }
                    if i >= 1 {
                        let want = (collar_layers - i) as f64 / collar_layers as f64;
                        for &v in ring {
                            let got = points[v as usize].collar_t;
                            if got.map_or(true, |t| (t - want).abs() > 1e-12) {
                                return Err(DiscretizeError::BadInput(format!(
                                    "walk {w} ring {i}: point {v} depth {got:?}, expected {want}"
                                )));
                            }
                        }
                        // The ladder must be climbable: ring i sits one
                        // background edge above ring i - 1.
                        for (j, &v) in ring.iter().enumerate() {
                            let below = ladder[i - 1][j];
                            if adj[v as usize]
                                .binary_search_by_key(&below, |&(k, _)| k)
                                .is_err()
                            {
                                return Err(DiscretizeError::BadInput(format!(
                                    "walk {w} ring {i} position {j}: no edge to ring below"
                                )));
                            }
                        }
                    }
                }
                if ladder[collar_layers] != walks[w] {
                    return Err(DiscretizeError::BadInput(format!(
                        "walk {w}: outermost ring is not the boundary walk"
                    )));
                }
            }
        }

        // Background connectivity by plain BFS.
        let mut reached = vec![false; n];
        reached[0] = true;
        let mut stack = vec![0u32];
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u as usize] {
                if !reached[v as usize] {
                    reached[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(v) = reached.iter().position(|&r| !r) {
            return Err(DiscretizeError::Disconnected(v));
        }

        Ok(Self { points, adj, h_bg, walks, rings, collar_layers })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, i: usize) -> &SamplePoint {
        &self.points[i]
    }

    pub fn h_bg(&self) -> f64 {
        self.h_bg
    }

    pub fn boundary_walks(&self) -> &[Vec<u32>] {
        &self.walks
    }

    pub fn collar_rings(&self) -> &[Vec<Vec<u32>>] {
        &self.rings
    }

    pub fn collar_layers(&self) -> usize {
        self.collar_layers
    }

    /// Neighbors of a point with edge lengths, ascending by id.
    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.adj[i]
    }

    /// Shortest-path distance in the background graph.
    pub fn geodesic_distance(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.points.len();
        if i >= n || j >= n {
            return Err(DiscretizeError::BadInput(format!(
                "points ({i}, {j}) out of range for {n}"
            )));
        }
        if i == j {
            return Ok(0.0);
        }
        let mut dist = vec![f64::INFINITY; n];
        dist[i] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry { dist: 0.0, node: i as u32 });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            if node as usize == j {
                return Ok(d);
            }
            for &(v, len) in &self.adj[node as usize] {
                let nd = d + len;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        Err(DiscretizeError::Disconnected(j))
    }

    /// All points within `radius` of `source` (inclusive), with their
    /// distances, ascending by point id.
    pub fn distances_within(&self, source: usize, radius: f64) -> Vec<(u32, f64)> {
        let n = self.points.len();
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry { dist: 0.0, node: source as u32 });
        let mut hit: Vec<(u32, f64)> = Vec::new();
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            if d > radius {
                break;
            }
            hit.push((node, d));
            for &(v, len) in &self.adj[node as usize] {
                let nd = d + len;
                if nd < dist[v as usize] && nd <= radius {
                    dist[v as usize] = nd;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        hit.sort_unstable_by_key(|&(v, _)| v);
        hit
    }

    /// Distance from every point to the nearest of `sources`
    /// (`f64::INFINITY` when unreachable).
    pub fn multi_source_distances(&self, sources: &[usize]) -> Vec<f64> {
        let n = self.points.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            if dist[s] > 0.0 {
                dist[s] = 0.0;
                heap.push(HeapEntry { dist: 0.0, node: s as u32 });
            }
        }
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            for &(v, len) in &self.adj[node as usize] {
                let nd = d + len;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        dist
    }

    /// Arc-length prefix of walk `w`: `prefix[i]` is the rim distance
    /// from position 0 to position `i`; the second value is the total
    /// circumference.
    pub fn walk_prefix(&self, w: usize) -> (Vec<f64>, f64) {
        let walk = &self.walks[w];
        let mut prefix = Vec::with_capacity(walk.len());
        let mut acc = 0.0;
        for i in 0..walk.len() {
            prefix.push(acc);
            let a = walk[i] as usize;
            let b = walk[(i + 1) % walk.len()];
            let len = self.adj[a]
                .iter()
                .find(|&&(j, _)| j == b)
                .map(|&(_, l)| l)
                .unwrap_or(0.0);
            acc += len;
        }
        (prefix, acc)
    }

    /// Intrinsic circular distance between two positions of walk `w`.
    pub fn boundary_distance(&self, w: usize, i: usize, j: usize) -> f64 {
        let (prefix, total) = self.walk_prefix(w);
        let gap = (prefix[i] - prefix[j]).abs();
        gap.min(total - gap)
    }

    /// Writes the domain as a line-oriented text document; floats carry 17
    /// significant digits, so [`SampledDomain::read_text`] restores them
    /// bit-exactly.
    pub fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "sampled-domain v1")?;
        writeln!(out, "h_bg {:.16e}", self.h_bg)?;
        writeln!(out, "layers {}", self.collar_layers)?;
        writeln!(out, "points {}", self.points.len())?;
        for p in &self.points {
            let b = u8::from(p.is_boundary);
            match p.collar_t {
                Some(t) => writeln!(
                    out,
                    "{} {:.16e} {:.16e} {} {:.16e}",
                    p.square, p.chart[0], p.chart[1], b, t
                )?,
                None => writeln!(
                    out,
                    "{} {:.16e} {:.16e} {} -",
                    p.square, p.chart[0], p.chart[1], b
                )?,
            }
        }
        let mut edges: Vec<(u32, u32, f64)> = Vec::new();
        for (i, row) in self.adj.iter().enumerate() {
            for &(j, len) in row {
                if (i as u32) < j {
                    edges.push((i as u32, j, len));
                }
            }
        }
        writeln!(out, "edges {}", edges.len())?;
        for (a, b, len) in edges {
            writeln!(out, "{a} {b} {len:.16e}")?;
        }
        writeln!(out, "walks {}", self.walks.len())?;
        for walk in &self.walks {
            let ids: Vec<String> = walk.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", ids.join(" "))?;
        }
        let ring_lines: usize = self.rings.iter().map(|l| l.len()).sum();
        writeln!(out, "rings {ring_lines}")?;
        for (w, ladder) in self.rings.iter().enumerate() {
            for (i, ring) in ladder.iter().enumerate() {
                let ids: Vec<String> = ring.iter().map(|v| v.to_string()).collect();
                writeln!(out, "{w} {i} {}", ids.join(" "))?;
            }
        }
        Ok(())
    }

    /// Parses a document produced by [`SampledDomain::write_text`].
    pub fn read_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |ln: usize, what: &str| {
            DiscretizeError::BadInput(format!("domain text line {}: {what}", ln + 1))
        };
        let mut next = |want: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .ok_or_else(|| DiscretizeError::BadInput(format!("domain text ended before {want}")))
        };

        let (ln, header) = next("header")?;
        if header.trim() != "sampled-domain v1" {
            return Err(bad(ln, "expected header `sampled-domain v1`"));
        }
        let parse_kv = |ln: usize, line: &str, key: &str| -> Result<String> {
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(k), Some(v), None) if k == key => Ok(v.to_string()),
                _ => Err(bad(ln, &format!("expected `{key} <value>`"))),
            }
        };
        let (ln, line) = next("h_bg")?;
        let h_bg: f64 = parse_kv(ln, line, "h_bg")?
            .parse()
            .map_err(|_| bad(ln, "bad h_bg"))?;
        let (ln, line) = next("layers")?;
        let layers: usize = parse_kv(ln, line, "layers")?
            .parse()
            .map_err(|_| bad(ln, "bad layer count"))?;
        let (ln, line) = next("points")?;
        let n: usize = parse_kv(ln, line, "points")?
            .parse()
            .map_err(|_| bad(ln, "bad point count"))?;

        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = next("point row")?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(bad(ln, "point row needs 5 fields"));
            }
            let square: u32 = f[0].parse().map_err(|_| bad(ln, "bad square id"))?;
            let x: f64 = f[1].parse().map_err(|_| bad(ln, "bad x"))?;
            let y: f64 = f[2].parse().map_err(|_| bad(ln, "bad y"))?;
            let is_boundary = match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad(ln, "boundary flag must be 0 or 1")),
            };
            let collar_t = if f[4] == "-" {
                None
            } else {
                Some(f[4].parse().map_err(|_| bad(ln, "bad collar depth"))?)
            };
            points.push(SamplePoint { chart: [x, y], square, is_boundary, collar_t });
        }

        let (ln, line) = next("edges")?;
        let m: usize = parse_kv(ln, line, "edges")?
            .parse()
            .map_err(|_| bad(ln, "bad edge count"))?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = next("edge row")?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(ln, "edge row needs 3 fields"));
            }
            let a: u32 = f[0].parse().map_err(|_| bad(ln, "bad edge endpoint"))?;
            let b: u32 = f[1].parse().map_err(|_| bad(ln, "bad edge endpoint"))?;
            let len: f64 = f[2].parse().map_err(|_| bad(ln, "bad edge length"))?;
            edges.push((a, b, len));
        }

        let (ln, line) = next("walks")?;
        let k: usize = parse_kv(ln, line, "walks")?
            .parse()
            .map_err(|_| bad(ln, "bad walk count"))?;
        let mut walks = Vec::with_capacity(k);
        for _ in 0..k {
            let (ln, line) = next("walk row")?;
            let walk: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(ln, "bad walk id")))
                .collect::<Result<_>>()?;
            walks.push(walk);
        }

        let (ln, line) = next("rings")?;
        let r: usize = parse_kv(ln, line, "rings")?
            .parse()
            .map_err(|_| bad(ln, "bad ring count"))?;
        let mut rings: Vec<Vec<Vec<u32>>> = if layers == 0 {
            Vec::new()
        } else {
            vec![vec![Vec::new(); layers + 1]; k]
        };
        for _ in 0..r {
            let (ln, line) = next("ring row")?;
            let mut it = line.split_whitespace();
            let w: usize = it
                .next()
                .ok_or_else(|| bad(ln, "ring row needs a walk id"))?
                .parse()
                .map_err(|_| bad(ln, "bad ring walk"))?;
            let i: usize = it
                .next()
                .ok_or_else(|| bad(ln, "ring row needs a ring index"))?
                .parse()
                .map_err(|_| bad(ln, "bad ring index"))?;
            if w >= rings.len() || i >= layers + 1 {
                return Err(bad(ln, "ring indices out of range"));
            }
            rings[w][i] = it
                .map(|t| t.parse().map_err(|_| bad(ln, "bad ring id")))
                .collect::<Result<_>>()?;
        }
        if let Some((ln, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(bad(ln, &format!("unexpected trailing content `{line}`")));
        }
        Self::from_parts(points, &edges, walks, rings, layers, h_bg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::cylinder_mesh;
    use crate::surfaces::{attach_collar, complex_to_mesh, CarveRect, PieceComplex, PieceKind, Span};

    fn square_mesh(m: usize) -> FemMesh {
        let mut c = PieceComplex::default();
        c.pieces.push(PieceKind::Planar(0));
        c.add_square(0, [0.0, 0.0]);
        complex_to_mesh(&c, m).unwrap()
    }

    fn node_at(d: &SampledDomain, x: f64, y: f64) -> usize {
        (0..d.n_points())
            .find(|&i| {
                let c = d.point(i).chart;
                (c[0] - x).abs() < 1e-12 && (c[1] - y).abs() < 1e-12
            })
            .expect("no sample at requested coordinates")
    }

    #[test]
    fn square_sampling_counts_and_edge_lengths() {
        let d = SampledDomain::from_mesh(&square_mesh(4)).unwrap();
        assert_eq!(d.n_points(), 25);
        assert_eq!((0..25).filter(|&i| d.point(i).is_boundary).count(), 16);
        // 40 grid sides + 32 diagonals.
        let n_edges: usize = (0..25).map(|i| d.neighbors(i).len()).sum::<usize>() / 2;
        assert_eq!(n_edges, 72);
        // Adjacent points are at their edge length.
        let a = node_at(&d, 0.0, 0.0);
        let b = node_at(&d, 0.25, 0.0);
        let c = node_at(&d, 0.25, 0.25);
        assert!((d.geodesic_distance(a, b).unwrap() - 0.25).abs() < 1e-15);
        assert!((d.geodesic_distance(a, c).unwrap() - 0.25 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.collar_layers(), 0);
        assert!(d.point(a).collar_t == Some(0.0));
    }

    #[test]
    fn stencil_distortion_stays_under_nine_percent() {
        let d = SampledDomain::from_mesh(&square_mesh(32)).unwrap();
        let corner = node_at(&d, 0.0, 0.0);
        let far = node_at(&d, 1.0, 1.0);
        let diag = d.geodesic_distance(corner, far).unwrap();
        assert!((diag - 2f64.sqrt()).abs() / 2f64.sqrt() < 1e-12);
        // Worst direction for the 8-neighbor stencil: one part in two.
        let half = node_at(&d, 1.0, 0.5);
        let got = d.geodesic_distance(corner, half).unwrap();
        let true_dist = 1.25f64.sqrt();
        let distortion = (got - true_dist) / true_dist;
        assert!(distortion >= 0.0, "graph paths cannot beat straight lines");
        assert!(distortion < 0.09, "distortion {distortion}");
    }

    #[test]
    fn geodesics_detour_around_a_hole() {
        let mut c = PieceComplex::default();
        c.pieces.push(PieceKind::Planar(0));
        let s = c.add_square(0, [0.0, 0.0]);
        c.carves[s as usize].push(CarveRect { x: Span::MidBand, y: Span::MidBand });
        let mesh = complex_to_mesh(&c, 8).unwrap();
        let d = SampledDomain::from_mesh(&mesh).unwrap();
        let left = node_at(&d, 0.25, 0.5);
        let right = node_at(&d, 0.75, 0.5);
        let dist = d.geodesic_distance(left, right).unwrap();
        assert!(dist > 0.5 + 1e-6, "path through the hole: {dist}");
        // The hole is the convex square [3/8, 5/8]^2, so the shortest
        // detour runs diagonally to one top corner, along the rim, and
        // diagonally back down -- and the stencil realizes it exactly.
        let expect = 0.25 + 2f64.sqrt() / 4.0;
        assert!((dist - expect).abs() < 1e-12, "detour {dist}, expected {expect}");
    }

    #[test]
    fn collared_cylinder_rings_and_depths() {
        let mesh = attach_collar(&cylinder_mesh(4).unwrap(), 4).unwrap();
        let d = SampledDomain::from_mesh(&mesh).unwrap();
        assert_eq!(d.boundary_walks().len(), 2);
        assert_eq!(d.collar_layers(), 4);
        for w in 0..2 {
            let (_, total) = d.walk_prefix(w);
            assert!((total - 1.0).abs() < 1e-12);
            // Ring depths climb from the rim inward.
            for i in 1..=4usize {
                let t = (4 - i) as f64 / 4.0;
                for &v in &d.collar_rings()[w][i] {
                    assert_eq!(d.point(v as usize).collar_t, Some(t));
                }
            }
            // Seam points belong to the core.
            for &v in &d.collar_rings()[w][0] {
                assert_eq!(d.point(v as usize).collar_t, None);
            }
        }
        // Intrinsic rim distance wraps the circle.
        let len = d.boundary_walks()[0].len();
        assert_eq!(len, 4);
        assert!((d.boundary_distance(0, 0, 2) - 0.5).abs() < 1e-12);
        assert!((d.boundary_distance(0, 0, 3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mesh = attach_collar(&cylinder_mesh(3).unwrap(), 2).unwrap();
        let d = SampledDomain::from_mesh(&mesh).unwrap();
        let mut buf = Vec::new();
        d.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = SampledDomain::read_text(&text).unwrap();
        assert_eq!(d.n_points(), back.n_points());
        for i in 0..d.n_points() {
            assert_eq!(d.point(i), back.point(i), "point {i}");
            assert_eq!(d.neighbors(i), back.neighbors(i), "adjacency {i}");
        }
        assert_eq!(d.boundary_walks(), back.boundary_walks());
        assert_eq!(d.collar_rings(), back.collar_rings());
        assert_eq!(d.collar_layers(), back.collar_layers());
        assert_eq!(d.h_bg(), back.h_bg());
        // Second serialization is byte-identical.
        let mut buf2 = Vec::new();
        back.write_text(&mut buf2).unwrap();
        assert_eq!(text.as_bytes(), &buf2[..]);
    }

    #[test]
    fn construction_rejects_inconsistent_parts() {
        let p = |b: bool, t: Option<f64>| SamplePoint {
            chart: [0.0, 0.0],
            square: 0,
            is_boundary: b,
            collar_t: t,
        };
        // Boundary flag without zero depth.
        let e = SampledDomain::from_parts(
            vec![p(true, None)],
            &[],
            vec![vec![0]],
            vec![],
            0,
            1.0,
        );
        assert!(matches!(e, Err(DiscretizeError::BadInput(_))));
        // Depth above one.
        let e = SampledDomain::from_parts(vec![p(false, Some(1.5))], &[], vec![], vec![], 0, 1.0);
        assert!(matches!(e, Err(DiscretizeError::BadInput(_))));
        // Disconnected background.
        let e = SampledDomain::from_parts(
            vec![p(false, None), p(false, None)],
            &[],
            vec![],
            vec![],
            0,
            1.0,
        );
        assert!(matches!(e, Err(DiscretizeError::Disconnected(1))));
        // Walk points must be consecutive background neighbors.
        let pts = vec![p(true, Some(0.0)), p(true, Some(0.0)), p(true, Some(0.0))];
        let e = SampledDomain::from_parts(
            pts,
            &[(0, 1, 1.0), (1, 2, 1.0)],
            vec![vec![0, 2, 1]],
            vec![],
            0,
            1.0,
        );
        assert!(matches!(e, Err(DiscretizeError::BadInput(_))));
    }
}
