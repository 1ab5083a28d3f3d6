//! Combinatorial description of a surface as glued unit squares.

use super::{Result, SurfaceError};

/// Side of a unit square, named by compass direction in its own chart.
///
/// Sides carry an intrinsic orientation, counterclockwise around the square:
/// S runs in +x, E in +y, N in -x, W in -y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    S,
    E,
    N,
    W,
}

impl Side {
    /// All four sides in fixed order.
    pub const ALL: [Side; 4] = [Side::S, Side::E, Side::N, Side::W];

    /// The opposite compass direction.
    pub fn opposite(self) -> Side {
        match self {
            Side::S => Side::N,
            Side::E => Side::W,
            Side::N => Side::S,
            Side::W => Side::E,
        }
    }

    /// Reflection through a vertical axis (E and W swap, N and S stay).
    pub fn mirrored(self) -> Side {
        match self {
            Side::E => Side::W,
            Side::W => Side::E,
            s => s,
        }
    }

    /// Unit chart offset of the neighboring square in this direction.
    pub fn offset(self) -> [f64; 2] {
        match self {
            Side::S => [0.0, -1.0],
            Side::E => [1.0, 0.0],
            Side::N => [0.0, 1.0],
            Side::W => [-1.0, 0.0],
        }
    }
}

/// One side of one square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SideRef {
    pub square: u32,
    pub side: Side,
}

impl SideRef {
    pub fn new(square: u32, side: Side) -> Self {
        SideRef { square, side }
    }
}

/// Identification of two square sides.
///
/// `reversed` means parameter `t` on side `a` matches `1 - t` on side `b`;
/// this is the orientation-preserving convention for counterclockwise charts
/// and the only one the builders emit.  A non-reversed gluing is accepted
/// here but will be flagged during meshing when it makes the surface
/// non-orientable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub a: SideRef,
    pub b: SideRef,
    pub reversed: bool,
}

/// Axis-aligned span of a carve rectangle, in eighths of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Span {
    /// The whole interval [0, 1].
    Full,
    /// [0, 1/2).
    LowHalf,
    /// [1/2, 1).
    HighHalf,
    /// The centered band [3/8, 5/8).
    MidBand,
}

impl Span {
    /// Cell range covered at subdivision `m` (requires `m % 8 == 0` for
    /// `MidBand` to land on cell lines).
    pub fn cells(self, m: usize) -> std::ops::Range<usize> {
        match self {
            Span::Full => 0..m,
            Span::LowHalf => 0..m / 2,
            Span::HighHalf => m / 2..m,
            Span::MidBand => 3 * m / 8..5 * m / 8,
        }
    }

    /// Geometric width.
    pub fn width(self) -> f64 {
        match self {
            Span::Full => 1.0,
            Span::LowHalf | Span::HighHalf => 0.5,
            Span::MidBand => 0.25,
        }
    }
}

/// Rectangle of cells removed from a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarveRect {
    pub x: Span,
    pub y: Span,
}

/// What a piece is, for reporting and sanity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    /// Single-sheet cross with the given number of arms (lattice pieces).
    Planar(u8),
    /// Two-sheet cross, top center removed, four open two-sided ports.
    DoubledCross,
    /// Two-sheet cross with slits carved along the given number of arms.
    CarvedCross(u8),
}

/// A port: the place where a piece can be glued to a neighbor.  `sides`
/// lists the square sides forming the port (one for planar pieces, a
/// bottom/top pair for doubled ones).
#[derive(Debug, Clone)]
pub struct Port {
    pub piece: u32,
    pub direction: Side,
    pub sides: Vec<SideRef>,
    /// Index of the partner port, if glued.
    pub glued_to: Option<u32>,
}

/// Chart placement and ownership of one unit square.
#[derive(Debug, Clone, Copy)]
pub struct SquareInfo {
    pub origin: [f64; 2],
    pub piece: u32,
}

/// A finite collection of unit squares with side identifications.
#[derive(Debug, Clone, Default)]
pub struct PieceComplex {
    pub pieces: Vec<PieceKind>,
    pub squares: Vec<SquareInfo>,
    pub gluings: Vec<Gluing>,
    /// Carve rectangles per square (empty for most squares).
    pub carves: Vec<Vec<CarveRect>>,
    pub ports: Vec<Port>,
}

impl PieceComplex {
    /// Appends a square owned by `piece` at chart position `origin`.
    pub(crate) fn add_square(&mut self, piece: u32, origin: [f64; 2]) -> u32 {
        self.squares.push(SquareInfo { origin, piece });
        self.carves.push(Vec::new());
        (self.squares.len() - 1) as u32
    }

    /// Records an orientation-preserving (reversed) identification.
    pub(crate) fn glue(&mut self, a: SideRef, b: SideRef) {
        self.gluings.push(Gluing { a, b, reversed: true });
    }

    pub fn n_squares(&self) -> usize {
        self.squares.len()
    }

    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Number of glued port pairs.
    pub fn glued_port_pairs(&self) -> usize {
        self.ports.iter().filter(|p| p.glued_to.is_some()).count() / 2
    }

    /// Ports still open (these become surface boundary).
    pub fn open_ports(&self) -> impl Iterator<Item = (usize, &Port)> + '_ {
        self.ports
            .iter()
            .enumerate()
            .filter(|(_, p)| p.glued_to.is_none())
    }

    /// Exact area: total squares minus carved cells, evaluated on the
    /// coarsest grid on which all carve rectangles are cell-aligned.
    pub fn area(&self) -> f64 {
        let den = 8usize;
        let mut total = 0.0;
        for (s, _) in self.squares.iter().enumerate() {
            if self.carves[s].is_empty() {
                total += 1.0;
                continue;
            }
            let mut kept = den * den;
            for cy in 0..den {
                'cell: for cx in 0..den {
                    for rect in &self.carves[s] {
                        if rect.x.cells(den).contains(&cx) && rect.y.cells(den).contains(&cy) {
                            kept -= 1;
                            continue 'cell;
                        }
                    }
                }
            }
            total += kept as f64 / (den * den) as f64;
        }
        total
    }

    /// Cheap structural validation: side indices in range, no side glued
    /// twice, ports consistent.
    pub fn validate(&self) -> Result<()> {
        let n = self.squares.len() as u32;
        let mut seen: Vec<SideRef> = Vec::with_capacity(self.gluings.len() * 2);
        for g in &self.gluings {
            for sr in [g.a, g.b] {
                if sr.square >= n {
                    return Err(SurfaceError::BadInput(format!(
                        "gluing references square {} of {}",
                        sr.square, n
                    )));
                }
                seen.push(sr);
            }
        }
        seen.sort();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                return Err(SurfaceError::BadInput(format!(
                    "side {:?} of square {} glued more than once",
                    w[0].side, w[0].square
                )));
            }
        }
        for (i, p) in self.ports.iter().enumerate() {
            if let Some(j) = p.glued_to {
                let back = self
                    .ports
                    .get(j as usize)
                    .and_then(|q| q.glued_to)
                    .map(|k| k as usize);
                if back != Some(i) {
                    return Err(SurfaceError::BadInput(format!(
                        "port {i} glued to {j} without reciprocation"
                    )));
                }
            }
        }
        Ok(())
    }
}
