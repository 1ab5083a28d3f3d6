//! The three surface families: lattice puzzle domains, flat (doubled-cross)
//! surfaces over 4-regular graphs, and their carved connected-boundary
//! variants.

use crate::graphs::BoundaryGraph;

use super::complex::{CarveRect, PieceComplex, PieceKind, Port, Side, SideRef, Span};
use super::{Result, SurfaceError};

fn side_index(s: Side) -> usize {
    match s {
        Side::S => 0,
        Side::E => 1,
        Side::N => 2,
        Side::W => 3,
    }
}

/// Planar puzzle domain over the (l+1) x (l+1) grid lattice: one cross-shaped
/// piece per lattice vertex (a unit center square plus one unit arm per
/// lattice neighbor), arms glued tip-to-tip along lattice edges.  The result
/// is an axis-aligned polygonal domain with l^2 square holes.
pub fn build_lattice_domain(l: usize) -> Result<PieceComplex> {
    if l == 0 {
        return Err(SurfaceError::BadInput("lattice size must be at least 1".into()));
    }
    let side = l + 1;
    let idx = |a: usize, b: usize| a * side + b;
    let mut c = PieceComplex::default();
    let mut arm: Vec<[Option<u32>; 4]> = vec![[None; 4]; side * side];
    let mut port_at: Vec<[Option<u32>; 4]> = vec![[None; 4]; side * side];

    for a in 0..side {
        for b in 0..side {
            let v = idx(a, b);
            let dirs: Vec<Side> = Side::ALL
                .into_iter()
                .filter(|d| match d {
                    Side::E => a < l,
                    Side::W => a > 0,
                    Side::N => b < l,
                    Side::S => b > 0,
                })
                .collect();
            c.pieces.push(PieceKind::Planar(dirs.len() as u8));
            let origin = [3.0 * a as f64, 3.0 * b as f64];
            let center = c.add_square(v as u32, origin);
            for &d in &dirs {
                let off = d.offset();
                let sq = c.add_square(v as u32, [origin[0] + off[0], origin[1] + off[1]]);
                arm[v][side_index(d)] = Some(sq);
                c.glue(SideRef::new(center, d), SideRef::new(sq, d.opposite()));
                port_at[v][side_index(d)] = Some(c.ports.len() as u32);
                c.ports.push(Port {
                    piece: v as u32,
                    direction: d,
                    sides: vec![SideRef::new(sq, d)],
                    glued_to: None,
                });
            }
        }
    }

    for a in 0..side {
        for b in 0..side {
            let v = idx(a, b);
            if a < l {
                let u = idx(a + 1, b);
                glue_ports(
                    &mut c,
                    port_at[v][side_index(Side::E)].unwrap(),
                    port_at[u][side_index(Side::W)].unwrap(),
                );
            }
            if b < l {
                let u = idx(a, b + 1);
                glue_ports(
                    &mut c,
                    port_at[v][side_index(Side::N)].unwrap(),
                    port_at[u][side_index(Side::S)].unwrap(),
                );
            }
        }
    }
    Ok(c)
}

/// Glues two ports side-by-side: matching entries of their side lists are
/// identified with the standard reversed convention.
fn glue_ports(c: &mut PieceComplex, p: u32, q: u32) {
    let (ps, qs) = (
        c.ports[p as usize].sides.clone(),
        c.ports[q as usize].sides.clone(),
    );
    assert_eq!(ps.len(), qs.len(), "port arities must match");
    for (a, b) in ps.into_iter().zip(qs) {
        c.glue(a, b);
    }
    c.ports[p as usize].glued_to = Some(q);
    c.ports[q as usize].glued_to = Some(p);
}

/// Square ids callers of [`add_doubled_cross`] need afterwards: the
/// optional top center and the top arms (indexed by [`side_index`]).
pub(crate) struct CrossSquares {
    pub t_center: Option<u32>,
    pub t_arm: [u32; 4],
}

/// Adds a doubled cross for `piece`, charted in a column at `x0`.  The top
/// sheet is the mirror image of the bottom one (east and west swap), which
/// is what makes the doubled surface orientable; `with_top_center` selects
/// the closed variant (true) or the punctured one whose top-center hole
/// becomes a length-4 boundary circle (false).
pub(crate) fn add_doubled_cross(
    c: &mut PieceComplex,
    piece: u32,
    x0: f64,
    with_top_center: bool,
) -> CrossSquares {
    let b_center = c.add_square(piece, [x0, 0.0]);
    let mut b_arm = [0u32; 4];
    for d in Side::ALL {
        let off = d.offset();
        b_arm[side_index(d)] = c.add_square(piece, [x0 + off[0], off[1]]);
    }
    let t_center = if with_top_center {
        Some(c.add_square(piece, [x0, 4.0]))
    } else {
        None
    };
    let mut t_arm = [0u32; 4];
    for d in Side::ALL {
        let off = d.offset();
        t_arm[side_index(d)] = c.add_square(piece, [x0 + off[0], 4.0 + off[1]]);
    }

    // Sheet-internal arm gluings.
    for d in Side::ALL {
        c.glue(
            SideRef::new(b_center, d),
            SideRef::new(b_arm[side_index(d)], d.opposite()),
        );
        if let Some(tc) = t_center {
            c.glue(
                SideRef::new(tc, d),
                SideRef::new(t_arm[side_index(d)], d.opposite()),
            );
        }
    }
    // Outline doubling: each lateral side of a bottom arm meets the mirrored
    // lateral side of the mirrored top arm.
    for d in Side::ALL {
        let laterals = match d {
            Side::N | Side::S => [Side::E, Side::W],
            Side::E | Side::W => [Side::N, Side::S],
        };
        for x in laterals {
            c.glue(
                SideRef::new(b_arm[side_index(d)], x),
                SideRef::new(t_arm[side_index(d.mirrored())], x.mirrored()),
            );
        }
    }
    // Ports: the outer bottom side plus the mirrored outer top side.
    for d in Side::ALL {
        c.ports.push(Port {
            piece,
            direction: d,
            sides: vec![
                SideRef::new(b_arm[side_index(d)], d),
                SideRef::new(t_arm[side_index(d.mirrored())], d.mirrored()),
            ],
            glued_to: None,
        });
    }
    CrossSquares { t_center, t_arm }
}

fn require_four_regular(g: &BoundaryGraph) -> Result<()> {
    if !g.is_connected() {
        return Err(SurfaceError::Disconnected);
    }
    for v in 0..g.n_vertices() {
        let d = g.degree(v);
        if d != 4 {
            return Err(SurfaceError::NotFourRegular { vertex: v, degree: d });
        }
    }
    Ok(())
}

/// Directions assigned to a vertex's neighbors: ascending neighbor order
/// maps to N, E, S, W.
fn arm_directions(g: &BoundaryGraph, v: usize) -> Vec<(usize, Side)> {
    let mut nbrs: Vec<usize> = g.neighbors(v).collect();
    nbrs.sort_unstable();
    nbrs.into_iter()
        .zip([Side::N, Side::E, Side::S, Side::W])
        .collect()
}

fn direction_of(dirs: &[(usize, Side)], neighbor: usize) -> Side {
    dirs.iter()
        .find(|(u, _)| *u == neighbor)
        .map(|(_, d)| *d)
        .expect("neighbor must be listed")
}

/// One punctured doubled cross per vertex of a connected 4-regular graph,
/// all four ports of every piece glued along the graph's edges.  The surface
/// has genus `l + 1` and one length-4 boundary circle per vertex.
pub fn build_flat_surface(g: &BoundaryGraph) -> Result<PieceComplex> {
    require_four_regular(g)?;
    let l = g.n_vertices();
    let mut c = PieceComplex::default();
    for v in 0..l {
        c.pieces.push(PieceKind::DoubledCross);
        add_doubled_cross(&mut c, v as u32, 6.0 * v as f64 + 1.0, false);
    }
    glue_cross_ports(&mut c, g);
    Ok(c)
}

fn glue_cross_ports(c: &mut PieceComplex, g: &BoundaryGraph) {
    let dirs: Vec<Vec<(usize, Side)>> =
        (0..g.n_vertices()).map(|v| arm_directions(g, v)).collect();
    // Ports were pushed four per vertex in Side::ALL order.
    let port_id = |v: usize, d: Side| (4 * v + side_index(d)) as u32;
    for (u, v) in g.edges() {
        let du = direction_of(&dirs[u], v);
        let dv = direction_of(&dirs[v], u);
        glue_ports(c, port_id(u, du), port_id(v, dv));
    }
}

/// Deterministic spanning tree: breadth-first from vertex 0 with ascending
/// neighbor order, edges reported as (parent, child) in discovery order.
pub fn maximal_tree(g: &BoundaryGraph) -> Result<Vec<(usize, usize)>> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(SurfaceError::BadInput("empty graph".into()));
    }
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    let mut edges = Vec::with_capacity(n - 1);
    while let Some(v) = queue.pop_front() {
        let mut nbrs: Vec<usize> = g.neighbors(v).collect();
        nbrs.sort_unstable();
        for u in nbrs {
            if !seen[u] {
                seen[u] = true;
                edges.push((v, u));
                queue.push_back(u);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(SurfaceError::Disconnected);
    }
    Ok(edges)
}

/// The closed doubled surface over `g` carved open along `tree`: every piece
/// is a full doubled cross, and a centered slit is cut through the top sheet
/// from each piece's center to its tree ports.  Slits meet across tree
/// gluings, so the carved boundary is one closed curve around the tree.
pub fn build_connected_boundary_surface(
    g: &BoundaryGraph,
    tree: &[(usize, usize)],
) -> Result<PieceComplex> {
    require_four_regular(g)?;
    let l = g.n_vertices();
    if tree.len() != l - 1 {
        return Err(SurfaceError::TreeMismatch(format!(
            "{} edges for {} vertices",
            tree.len(),
            l
        )));
    }
    let mut present: Vec<(usize, usize)> = g.edges().map(|(u, v)| (u.min(v), u.max(v))).collect();
    present.sort_unstable();
    let mut reach: Vec<usize> = (0..l).collect();
    fn root(r: &mut [usize], mut x: usize) -> usize {
        while r[x] != x {
            r[x] = r[r[x]];
            x = r[x];
        }
        x
    }
    for &(u, v) in tree {
        if u >= l || v >= l || present.binary_search(&(u.min(v), u.max(v))).is_err() {
            return Err(SurfaceError::TreeMismatch(format!(
                "edge ({u}, {v}) is not in the graph"
            )));
        }
        let (ru, rv) = (root(&mut reach, u), root(&mut reach, v));
        if ru == rv {
            return Err(SurfaceError::TreeMismatch(format!(
                "edge ({u}, {v}) closes a cycle"
            )));
        }
        reach[ru.max(rv)] = ru.min(rv);
    }

    let mut tree_deg = vec![0u8; l];
    for &(u, v) in tree {
        tree_deg[u] += 1;
        tree_deg[v] += 1;
    }
    let mut c = PieceComplex::default();
    let mut crosses = Vec::with_capacity(l);
    for v in 0..l {
        c.pieces.push(PieceKind::CarvedCross(tree_deg[v]));
        crosses.push(add_doubled_cross(&mut c, v as u32, 6.0 * v as f64 + 1.0, true));
    }

    // Carve the slits on the top sheet.  A tree arm in geometric direction d
    // appears on the mirrored side of the top sheet.
    let dirs: Vec<Vec<(usize, Side)>> =
        (0..g.n_vertices()).map(|v| arm_directions(g, v)).collect();
    for &(u, v) in tree {
        for (at, to) in [(u, v), (v, u)] {
            let d = direction_of(&dirs[at], to).mirrored();
            let cross = &crosses[at];
            let tc = cross.t_center.unwrap() as usize;
            let (center_rect, arm_rect) = match d {
                Side::N => (
                    CarveRect { x: Span::MidBand, y: Span::HighHalf },
                    CarveRect { x: Span::MidBand, y: Span::Full },
                ),
                Side::S => (
                    CarveRect { x: Span::MidBand, y: Span::LowHalf },
                    CarveRect { x: Span::MidBand, y: Span::Full },
                ),
                Side::E => (
                    CarveRect { x: Span::HighHalf, y: Span::MidBand },
                    CarveRect { x: Span::Full, y: Span::MidBand },
                ),
                Side::W => (
                    CarveRect { x: Span::LowHalf, y: Span::MidBand },
                    CarveRect { x: Span::Full, y: Span::MidBand },
                ),
            };
            c.carves[tc].push(center_rect);
            c.carves[cross.t_arm[side_index(d)] as usize].push(arm_rect);
        }
    }

    glue_cross_ports(&mut c, g);
    Ok(c)
}
