//! From a square complex to a conforming triangle mesh.
//!
//! Every unit square is subdivided into `m x m` cells, each cell into two
//! positively oriented triangles.  Glued sides share identification classes
//! computed by union-find over the per-square grids, so the mesh is
//! conforming by construction.  Boundary edges are exactly the cell sides
//! traversed by one cell; walking them yields the boundary circles.

use std::collections::BTreeMap;

use super::complex::{PieceComplex, Side};
use super::{Result, SurfaceError};

/// Axis-aligned quad cell.  `corners` are identification classes in the
/// order sw, se, ne, nw; `w` and `h` are the chart edge lengths (these carry
/// the geometry — node coordinates are diagnostic only).  `square` is the
/// owning square of the complex, or `u32::MAX` for collar cells.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub corners: [u32; 4],
    pub w: f64,
    pub h: f64,
    pub square: u32,
}

/// Directed boundary edge with its length and boundary-walk tag.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub from: u32,
    pub to: u32,
    pub len: f64,
    pub walk: u32,
}

/// Conforming quad/triangle mesh of a glued complex.
#[derive(Debug, Clone)]
pub struct FemMesh {
    pub n_nodes: usize,
    /// Chart position of each node's first instance (diagnostic).
    pub coords: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    /// Positively oriented corner triples, two per cell.
    pub triangles: Vec<[u32; 3]>,
    /// Ordered by walk, then along each walk.
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Closed node cycles, one per boundary component, each starting at its
    /// smallest node.
    pub boundary_walks: Vec<Vec<u32>>,
    /// For collar nodes: rings from the rim inward (rim = 0); `None` for
    /// nodes of the original mesh.
    pub collar_layer: Vec<Option<u32>>,
    /// Per original walk: rings of nodes from the seam (index 0) out to the
    /// rim (index = collar layer count), radially aligned.
    pub collar_rings: Vec<Vec<Vec<u32>>>,
    /// Number of collar layers (0 when no collar is attached).
    pub collar_layers: usize,
    /// Subdivision the mesh was built at.
    pub resolution: usize,
    /// Identification classes with at least two grid instances, as
    /// (node, [(square, i, j)]).
    pub identified: Vec<(u32, Vec<(u32, u16, u16)>)>,
}

impl FemMesh {
    /// Total area, the sum of cell areas.
    pub fn area(&self) -> f64 {
        self.cells.iter().map(|c| c.w * c.h).sum()
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// The smaller root wins, so class representatives are smallest ids.
    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
    }
}

/// Grid position of the `t`-th node along a side, following the side's
/// counterclockwise intrinsic direction.
fn side_node(m: usize, side: Side, t: usize) -> (usize, usize) {
    match side {
        Side::S => (t, 0),
        Side::E => (m, t),
        Side::N => (m - t, m),
        Side::W => (0, m - t),
    }
}

/// Meshes the complex at `m` subdivisions per unit square.
pub fn complex_to_mesh(c: &PieceComplex, m: usize) -> Result<FemMesh> {
    if m == 0 {
        return Err(SurfaceError::BadResolution {
            resolution: m,
            reason: "need at least one subdivision per square".into(),
        });
    }
    c.validate()?;
    let has_carves = c.carves.iter().any(|v| !v.is_empty());
    if has_carves && m % 8 != 0 {
        return Err(SurfaceError::BadResolution {
            resolution: m,
            reason: "carve rectangles are aligned to eighths; need a multiple of 8".into(),
        });
    }

    let ns = c.n_squares();
    let per = (m + 1) * (m + 1);
    let gid = |s: usize, i: usize, j: usize| (s * per + j * (m + 1) + i) as u32;

    let carved: Vec<Option<Vec<bool>>> = (0..ns)
        .map(|s| {
            if c.carves[s].is_empty() {
                return None;
            }
            let mut g = vec![false; m * m];
            for rect in &c.carves[s] {
                for j in rect.y.cells(m) {
                    for i in rect.x.cells(m) {
                        g[j * m + i] = true;
                    }
                }
            }
            Some(g)
        })
        .collect();
    let is_carved =
        |s: usize, i: usize, j: usize| carved[s].as_ref().is_some_and(|g| g[j * m + i]);

    let mut uf = UnionFind::new(ns * per);
    for g in &c.gluings {
        for t in 0..=m {
            let (ai, aj) = side_node(m, g.a.side, t);
            let tb = if g.reversed { m - t } else { t };
            let (bi, bj) = side_node(m, g.b.side, tb);
            uf.union(
                gid(g.a.square as usize, ai, aj),
                gid(g.b.square as usize, bi, bj),
            );
        }
    }

    // Cells over surviving grid squares; identification classes compressed
    // in first-seen order.
    let mut compact: BTreeMap<u32, u32> = BTreeMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    let side_len = 1.0 / m as f64;
    for s in 0..ns {
        for j in 0..m {
            for i in 0..m {
                if is_carved(s, i, j) {
                    continue;
                }
                let grid = [
                    gid(s, i, j),
                    gid(s, i + 1, j),
                    gid(s, i + 1, j + 1),
                    gid(s, i, j + 1),
                ];
                let mut ids = [0u32; 4];
                for (slot, g) in grid.into_iter().enumerate() {
                    let root = uf.find(g);
                    let next = compact.len() as u32;
                    ids[slot] = *compact.entry(root).or_insert(next);
                }
                for a in 0..4 {
                    for b in a + 1..4 {
                        if ids[a] == ids[b] {
                            return Err(SurfaceError::DegenerateCell {
                                square: s as u32,
                                x: i,
                                y: j,
                            });
                        }
                    }
                }
                cells.push(Cell {
                    corners: ids,
                    w: side_len,
                    h: side_len,
                    square: s as u32,
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(SurfaceError::BadInput("complex has no surviving cells".into()));
    }

    let n_nodes = compact.len();
    let mut coords = vec![[0.0f64; 2]; n_nodes];
    let mut seen = vec![false; n_nodes];
    let mut instances: Vec<Vec<(u32, u16, u16)>> = vec![Vec::new(); n_nodes];
    for s in 0..ns {
        for j in 0..=m {
            for i in 0..=m {
                let root = uf.find(gid(s, i, j));
                if let Some(&id) = compact.get(&root) {
                    if !seen[id as usize] {
                        seen[id as usize] = true;
                        let o = c.squares[s].origin;
                        coords[id as usize] =
                            [o[0] + i as f64 / m as f64, o[1] + j as f64 / m as f64];
                    }
                    instances[id as usize].push((s as u32, i as u16, j as u16));
                }
            }
        }
    }
    let identified: Vec<(u32, Vec<(u32, u16, u16)>)> = instances
        .into_iter()
        .enumerate()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(n, v)| (n as u32, v))
        .collect();

    let mut triangles = Vec::with_capacity(2 * cells.len());
    for cell in &cells {
        let [sw, se, ne, nw] = cell.corners;
        triangles.push([sw, se, ne]);
        triangles.push([sw, ne, nw]);
    }

    let (boundary_edges, boundary_walks) = trace_boundary(&cells)?;

    Ok(FemMesh {
        n_nodes,
        coords,
        cells,
        triangles,
        boundary_edges,
        boundary_walks,
        collar_layer: vec![None; n_nodes],
        collar_rings: Vec::new(),
        collar_layers: 0,
        resolution: m,
        identified,
    })
}

/// Classifies cell side edges by incidence and extracts the boundary walks.
pub(crate) fn trace_boundary(cells: &[Cell]) -> Result<(Vec<BoundaryEdge>, Vec<Vec<u32>>)> {
    #[derive(Clone, Copy)]
    struct SideEdge {
        key: u64,
        from: u32,
        to: u32,
        len: f64,
        square: u32,
    }
    let mut edges: Vec<SideEdge> = Vec::with_capacity(cells.len() * 4);
    for cell in cells {
        let [sw, se, ne, nw] = cell.corners;
        for (from, to, len) in [
            (sw, se, cell.w),
            (se, ne, cell.h),
            (ne, nw, cell.w),
            (nw, sw, cell.h),
        ] {
            let key = ((from.min(to) as u64) << 32) | from.max(to) as u64;
            edges.push(SideEdge {
                key,
                from,
                to,
                len,
                square: cell.square,
            });
        }
    }
    edges.sort_by_key(|e| e.key);

    let mut succ: BTreeMap<u32, (u32, f64)> = BTreeMap::new();
    let mut k = 0;
    while k < edges.len() {
        let mut run = k + 1;
        while run < edges.len() && edges[run].key == edges[k].key {
            run += 1;
        }
        match run - k {
            1 => {
                let e = edges[k];
                if succ.insert(e.from, (e.to, e.len)).is_some() {
                    return Err(SurfaceError::NonManifold(format!(
                        "boundary branches at node {}",
                        e.from
                    )));
                }
            }
            2 => {
                let (e1, e2) = (edges[k], edges[k + 1]);
                if !(e1.from == e2.to && e1.to == e2.from) {
                    return Err(SurfaceError::GluingOrientation {
                        square_a: e1.square,
                        square_b: e2.square,
                    });
                }
            }
            _ => {
                return Err(SurfaceError::NonManifold(format!(
                    "edge ({}, {}) borders {} cells",
                    edges[k].from,
                    edges[k].to,
                    run - k
                )));
            }
        }
        k = run;
    }

    let mut walks: Vec<Vec<u32>> = Vec::new();
    let mut visited: BTreeMap<u32, bool> = succ.keys().map(|&n| (n, false)).collect();
    let starts: Vec<u32> = succ.keys().copied().collect();
    for start in starts {
        if visited[&start] {
            continue;
        }
        let mut walk = vec![start];
        visited.insert(start, true);
        let mut cur = start;
        loop {
            let (next, _) = *succ.get(&cur).ok_or_else(|| {
                SurfaceError::InvalidTopology(format!("boundary walk stops at node {cur}"))
            })?;
            if next == start {
                break;
            }
            if *visited.get(&next).unwrap_or(&true) {
                return Err(SurfaceError::NonManifold(format!(
                    "boundary walks merge at node {next}"
                )));
            }
            visited.insert(next, true);
            walk.push(next);
            cur = next;
        }
        // Start each stored walk at its smallest node.
        let min_pos = walk
            .iter()
            .enumerate()
            .min_by_key(|(_, &n)| n)
            .map(|(p, _)| p)
            .unwrap();
        walk.rotate_left(min_pos);
        walks.push(walk);
    }
    walks.sort_by_key(|w| w[0]);

    let mut boundary_edges = Vec::with_capacity(succ.len());
    for (w, walk) in walks.iter().enumerate() {
        for t in 0..walk.len() {
            let u = walk[t];
            let v = walk[(t + 1) % walk.len()];
            let (s, len) = succ[&u];
            debug_assert_eq!(s, v);
            boundary_edges.push(BoundaryEdge {
                from: u,
                to: v,
                len,
                walk: w as u32,
            });
        }
    }
    Ok((boundary_edges, walks))
}

/// Boundary component count and lengths, longest first.
pub fn boundary_components(mesh: &FemMesh) -> (usize, Vec<f64>) {
    let mut lens = vec![0.0f64; mesh.boundary_walks.len()];
    for e in &mesh.boundary_edges {
        lens[e.walk as usize] += e.len;
    }
    lens.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (mesh.boundary_walks.len(), lens)
}

/// Euler characteristic, genus, and boundary component count of a connected
/// mesh.
///
/// Edges are the distinct cell sides plus one diagonal per cell; faces are
/// the triangles.  Fails if `2 - chi - b` is negative or odd, which would
/// mean the identifications do not describe one orientable surface.
pub fn euler_genus(mesh: &FemMesh) -> Result<(i64, usize, usize)> {
    let mut keys: Vec<u64> = Vec::with_capacity(mesh.cells.len() * 4);
    for cell in &mesh.cells {
        let [sw, se, ne, nw] = cell.corners;
        for (a, b) in [(sw, se), (se, ne), (ne, nw), (nw, sw)] {
            keys.push(((a.min(b) as u64) << 32) | a.max(b) as u64);
        }
    }
    keys.sort_unstable();
    keys.dedup();
    let e = keys.len() + mesh.cells.len();
    let chi = mesh.n_nodes as i64 - e as i64 + mesh.triangles.len() as i64;
    let b = mesh.boundary_walks.len();
    let t = 2 - chi - b as i64;
    if t < 0 || t % 2 != 0 {
        return Err(SurfaceError::InvalidTopology(format!(
            "chi = {chi} with {b} boundary components gives non-integer genus"
        )));
    }
    Ok((chi, (t / 2) as usize, b))
}

/// Extrudes `layers` quad layers of unit total depth along every boundary
/// walk.  The extruded cells are abstract (not embedded; collar node
/// coordinates repeat the seam), but carry exact widths and heights, so all
/// downstream geometry — areas, finite elements, path metrics — is exact.
/// Topology is unchanged; area grows by the boundary length.
pub fn attach_collar(mesh: &FemMesh, layers: usize) -> Result<FemMesh> {
    if layers == 0 {
        return Err(SurfaceError::BadInput("collar needs at least one layer".into()));
    }
    if mesh.collar_layers != 0 {
        return Err(SurfaceError::BadInput("collar already attached".into()));
    }
    let mut out = mesh.clone();
    out.collar_layers = layers;
    if mesh.boundary_walks.is_empty() {
        return Ok(out);
    }

    let mut edge_len: BTreeMap<u32, f64> = BTreeMap::new();
    for e in &mesh.boundary_edges {
        edge_len.insert(e.from, e.len);
    }

    let h = 1.0 / layers as f64;
    let mut next_id = mesh.n_nodes as u32;
    out.boundary_edges.clear();
    out.boundary_walks.clear();
    for (w, walk) in mesh.boundary_walks.iter().enumerate() {
        let l = walk.len();
        let mut rings: Vec<Vec<u32>> = vec![walk.clone()];
        for i in 1..=layers {
            let ring: Vec<u32> = (0..l).map(|j| next_id + j as u32).collect();
            next_id += l as u32;
            for &seam in walk {
                out.coords.push(mesh.coords[seam as usize]);
            }
            out.collar_layer
                .extend(std::iter::repeat(Some((layers - i) as u32)).take(l));
            for j in 0..l {
                let sw = ring[j];
                let se = ring[(j + 1) % l];
                let ne = rings[i - 1][(j + 1) % l];
                let nw = rings[i - 1][j];
                let cell = Cell {
                    corners: [sw, se, ne, nw],
                    w: edge_len[&walk[j]],
                    h,
                    square: u32::MAX,
                };
                out.cells.push(cell);
                out.triangles.push([sw, se, ne]);
                out.triangles.push([sw, ne, nw]);
            }
            rings.push(ring);
        }
        let rim = rings[layers].clone();
        for j in 0..l {
            out.boundary_edges.push(BoundaryEdge {
                from: rim[j],
                to: rim[(j + 1) % l],
                len: edge_len[&walk[j]],
                walk: w as u32,
            });
        }
        out.boundary_walks.push(rim);
        out.collar_rings.push(rings);
    }
    out.n_nodes = next_id as usize;
    Ok(out)
}

/// Writes the mesh in a line-based OFF-style text format with node
/// identifications and boundary tags.  Byte-stable for identical meshes.
pub fn write_mesh<W: std::io::Write>(mesh: &FemMesh, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "SOFF")?;
    writeln!(
        out,
        "nodes {} cells {} triangles {} boundary-edges {} walks {} resolution {} collar-layers {}",
        mesh.n_nodes,
        mesh.cells.len(),
        mesh.triangles.len(),
        mesh.boundary_edges.len(),
        mesh.boundary_walks.len(),
        mesh.resolution,
        mesh.collar_layers
    )?;
    for (n, c) in mesh.coords.iter().enumerate() {
        match mesh.collar_layer[n] {
            Some(layer) => writeln!(out, "v {:?} {:?} {layer}", c[0], c[1])?,
            None => writeln!(out, "v {:?} {:?} -", c[0], c[1])?,
        }
    }
    for c in &mesh.cells {
        let sq = if c.square == u32::MAX {
            "-".to_string()
        } else {
            c.square.to_string()
        };
        writeln!(
            out,
            "c {} {} {} {} {:?} {:?} {sq}",
            c.corners[0], c.corners[1], c.corners[2], c.corners[3], c.w, c.h
        )?;
    }
    for t in &mesh.triangles {
        writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
    }
    for e in &mesh.boundary_edges {
        writeln!(out, "e {} {} {:?} {}", e.from, e.to, e.len, e.walk)?;
    }
    for (w, walk) in mesh.boundary_walks.iter().enumerate() {
        write!(out, "walk {w}")?;
        for n in walk {
            write!(out, " {n}")?;
        }
        writeln!(out)?;
    }
    for (node, inst) in &mesh.identified {
        write!(out, "ident {node}")?;
        for (s, i, j) in inst {
            write!(out, " {s}:{i},{j}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::complex::{CarveRect, PieceComplex, PieceKind, SideRef, Span};
    use super::*;

    fn single_square() -> PieceComplex {
        let mut c = PieceComplex::default();
        c.pieces.push(PieceKind::Planar(0));
        c.add_square(0, [0.0, 0.0]);
        c
    }

    #[test]
    fn single_square_coarse_mesh() {
        let mesh = complex_to_mesh(&single_square(), 1).unwrap();
        assert_eq!(mesh.n_nodes, 4);
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(mesh.boundary_edges.len(), 4);
        let (chi, genus, b) = euler_genus(&mesh).unwrap();
        assert_eq!((chi, genus, b), (1, 0, 1));
        let (count, lens) = boundary_components(&mesh);
        assert_eq!(count, 1);
        assert!((lens[0] - 4.0).abs() < 1e-12);
        assert!((mesh.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_squares_share_a_side() {
        let mut c = PieceComplex::default();
        c.pieces.push(PieceKind::Planar(1));
        let a = c.add_square(0, [0.0, 0.0]);
        let b = c.add_square(0, [1.0, 0.0]);
        c.glue(SideRef::new(a, Side::E), SideRef::new(b, Side::W));
        let mesh = complex_to_mesh(&c, 2).unwrap();
        // 2 * 9 grid nodes minus 3 shared on the common edge.
        assert_eq!(mesh.n_nodes, 15);
        let (chi, genus, b) = euler_genus(&mesh).unwrap();
        assert_eq!((chi, genus, b), (1, 0, 1));
        let (_, lens) = boundary_components(&mesh);
        assert!((lens[0] - 6.0).abs() < 1e-12);
        // The three shared nodes appear in the identification table.
        assert_eq!(mesh.identified.len(), 3);
    }

    #[test]
    fn torus_from_one_square() {
        let mut c = single_square();
        c.glue(SideRef::new(0, Side::S), SideRef::new(0, Side::N));
        c.glue(SideRef::new(0, Side::E), SideRef::new(0, Side::W));
        let mesh = complex_to_mesh(&c, 4).unwrap();
        assert_eq!(mesh.n_nodes, 16);
        let (chi, genus, b) = euler_genus(&mesh).unwrap();
        assert_eq!((chi, genus, b), (0, 1, 0));
        assert!(mesh.boundary_edges.is_empty());
    }

    #[test]
    fn klein_gluing_is_rejected() {
        let mut c = single_square();
        c.glue(SideRef::new(0, Side::S), SideRef::new(0, Side::N));
        c.gluings.push(super::super::complex::Gluing {
            a: SideRef::new(0, Side::E),
            b: SideRef::new(0, Side::W),
            reversed: false,
        });
        match complex_to_mesh(&c, 4) {
            Err(SurfaceError::GluingOrientation { .. }) => {}
            other => panic!("expected orientation error, got {other:?}"),
        }
    }

    #[test]
    fn pillowcase_is_a_sphere() {
        // Two squares glued along all four sides with the mirrored pattern.
        for m in [1usize, 3] {
            let mut c = PieceComplex::default();
            c.pieces.push(PieceKind::Planar(0));
            let b = c.add_square(0, [0.0, 0.0]);
            let t = c.add_square(0, [2.0, 0.0]);
            c.glue(SideRef::new(b, Side::S), SideRef::new(t, Side::S));
            c.glue(SideRef::new(b, Side::N), SideRef::new(t, Side::N));
            c.glue(SideRef::new(b, Side::E), SideRef::new(t, Side::W));
            c.glue(SideRef::new(b, Side::W), SideRef::new(t, Side::E));
            let mesh = complex_to_mesh(&c, m).unwrap();
            let (chi, genus, b) = euler_genus(&mesh).unwrap();
            assert_eq!((chi, genus, b), (2, 0, 0), "m = {m}");
        }
    }

    #[test]
    fn torus_too_coarse_collapses() {
        let mut c = single_square();
        c.glue(SideRef::new(0, Side::S), SideRef::new(0, Side::N));
        c.glue(SideRef::new(0, Side::E), SideRef::new(0, Side::W));
        match complex_to_mesh(&c, 1) {
            Err(SurfaceError::DegenerateCell { .. }) => {}
            other => panic!("expected degenerate cell, got {other:?}"),
        }
    }

    #[test]
    fn corner_touching_carves_pinch() {
        let mut c = single_square();
        c.carves[0].push(CarveRect {
            x: Span::LowHalf,
            y: Span::LowHalf,
        });
        c.carves[0].push(CarveRect {
            x: Span::HighHalf,
            y: Span::HighHalf,
        });
        match complex_to_mesh(&c, 8) {
            Err(SurfaceError::NonManifold(_)) => {}
            other => panic!("expected non-manifold, got {other:?}"),
        }
    }

    #[test]
    fn carve_needs_aligned_resolution() {
        let mut c = single_square();
        c.carves[0].push(CarveRect {
            x: Span::MidBand,
            y: Span::Full,
        });
        assert!(matches!(
            complex_to_mesh(&c, 6),
            Err(SurfaceError::BadResolution { .. })
        ));
        c.carves[0].clear();
        c.carves[0].push(CarveRect {
            x: Span::MidBand,
            y: Span::MidBand,
        });
        // A centered 2x2-cell hole leaves an annulus.
        let mesh = complex_to_mesh(&c, 8).unwrap();
        assert_eq!(mesh.cells.len(), 64 - 4);
        let (chi, genus, b) = euler_genus(&mesh).unwrap();
        assert_eq!((chi, genus, b), (0, 0, 2));
        let (_, lens) = boundary_components(&mesh);
        assert!((lens[0] - 4.0).abs() < 1e-12);
        assert!((lens[1] - 1.0).abs() < 1e-12);
        assert!((mesh.area() - (1.0 - 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn collar_preserves_topology_and_adds_area() {
        let mesh = complex_to_mesh(&single_square(), 2).unwrap();
        let collared = attach_collar(&mesh, 2).unwrap();
        let (chi, genus, b) = euler_genus(&collared).unwrap();
        assert_eq!((chi, genus, b), (1, 0, 1));
        let (_, lens) = boundary_components(&collared);
        assert!((lens[0] - 4.0).abs() < 1e-12);
        assert!((collared.area() - 5.0).abs() < 1e-12);
        assert_eq!(collared.collar_rings.len(), 1);
        assert_eq!(collared.collar_rings[0].len(), 3);
        // Rim nodes are at layer 0, the ring inside at 1, seam nodes core.
        let rim = &collared.boundary_walks[0];
        assert!(rim.iter().all(|&n| collared.collar_layer[n as usize] == Some(0)));
        for &n in &collared.collar_rings[0][1] {
            assert_eq!(collared.collar_layer[n as usize], Some(1));
        }
        for &n in &collared.collar_rings[0][0] {
            assert_eq!(collared.collar_layer[n as usize], None);
        }
        assert!(attach_collar(&collared, 2).is_err());
    }

    #[test]
    fn mesh_writer_is_stable() {
        let mesh = complex_to_mesh(&single_square(), 2).unwrap();
        let mut a = Vec::new();
        write_mesh(&mesh, &mut a).unwrap();
        let mut b = Vec::new();
        write_mesh(&mesh, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("SOFF\nnodes 9 cells 4 triangles 8"));
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 9);
        assert_eq!(text.lines().filter(|l| l.starts_with("walk ")).count(), 1);
    }
}
