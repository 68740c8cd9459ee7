//! Reduced skein spaces: the solid torus with its `phi_a` and `t_b` bases,
//! and handlebodies with the standard labeled-spine bases, Gram pairing and
//! coefficient extraction.
//!
//! A diagram in the handlebody (a thickened holed disc) is rendered into a
//! closed slice word in the 3-sphere by the doubling construction: the
//! mirror copy of the pairing partner is drawn in a lower layer, every
//! strand winding hole i runs through a return corridor, and a 0-framed
//! `Omega`-summed surgery ring encircles each corridor.

use rayon::prelude::*;

use crate::engine::{self, EvalOpts, GraphDiagram, RingHint, Slice};
use crate::matrix::Mat;
use crate::recoupling::{self, emit_ring};
use crate::scalars::{Ctx, CycloScalar};
use crate::Result;
use crate::SkeinError;

/// Maximum genus with a fixed spine for basis enumeration.
pub const MAX_GENUS_BASIS: usize = 3;
/// Maximum genus with rendered pairing geometry (Gram matrix, express).
pub const MAX_GENUS_GEOMETRY: usize = 2;

// ---------------------------------------------------------------------------
// the solid torus: phi basis, Chebyshev reduction, t_b vectors
// ---------------------------------------------------------------------------

/// Coefficient vector in the `phi_a` basis of the reduced solid torus,
/// length r - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RtVector {
    pub coeffs: Vec<CycloScalar>,
}

impl RtVector {
    pub fn zero(ctx: &Ctx) -> Self {
        RtVector {
            coeffs: vec![ctx.field.zero(); (ctx.r() - 1) as usize],
        }
    }

    pub fn basis(ctx: &Ctx, a: u8) -> Self {
        let mut v = Self::zero(ctx);
        v.coeffs[a as usize] = ctx.field.one();
        v
    }
}

/// Reduce a polynomial in the core curve `alpha` (dense coefficients,
/// `poly[k]` multiplying `alpha^k`) to the `phi` basis: rewrite powers by
/// the Chebyshev recursion `phi_{a+1} = alpha phi_a - phi_{a-1}` and fold
/// indices past the quotient by `phi_{r-1} = 0`,
/// `phi_{r-1+j} = -phi_{r-1-j}`.
pub fn chebyshev_reduce(ctx: &Ctx, poly: &[CycloScalar]) -> RtVector {
    let f = &ctx.field;
    let deg = poly.len();
    // alpha^k in the unreduced phi basis, built by alpha * phi_j =
    // phi_{j+1} + phi_{j-1}
    let mut power = vec![f.zero(); 1]; // alpha^0 = phi_0
    power[0] = f.one();
    let mut acc: Vec<CycloScalar> = Vec::new();
    for k in 0..deg {
        if !poly[k].is_zero() {
            if acc.len() < power.len() {
                acc.resize(power.len(), f.zero());
            }
            for (j, c) in power.iter().enumerate() {
                if !c.is_zero() {
                    acc[j] = f.add(&acc[j], &f.mul(c, &poly[k]));
                }
            }
        }
        if k + 1 < deg {
            let mut nxt = vec![f.zero(); power.len() + 1];
            for (j, c) in power.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                nxt[j + 1] = f.add(&nxt[j + 1], c);
                if j >= 1 {
                    nxt[j - 1] = f.add(&nxt[j - 1], c);
                }
            }
            power = nxt;
        }
    }
    // fold into 0..=r-2
    let rm1 = (ctx.r() - 1) as i64;
    fn fold(k: i64, rm1: i64) -> Option<(usize, bool)> {
        // returns (index, negate)
        if k < 0 {
            if k == -1 {
                return None;
            }
            return fold(-k - 2, rm1).map(|(i, s)| (i, !s));
        }
        if k < rm1 {
            return Some((k as usize, false));
        }
        if k == rm1 {
            return None;
        }
        fold(2 * rm1 - k, rm1).map(|(i, s)| (i, !s))
    }
    let mut out = RtVector::zero(ctx);
    for (j, c) in acc.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if let Some((i, neg)) = fold(j as i64, rm1) {
            let t = if neg { f.neg(&c) } else { c };
            out.coeffs[i] = f.add(&out.coeffs[i], &t);
        }
    }
    out
}

/// `phi_a` as a polynomial in `alpha` (Chebyshev recursion, exact integer
/// coefficients).
pub fn phi_polynomial(ctx: &Ctx, a: usize) -> Vec<CycloScalar> {
    let f = &ctx.field;
    let mut prev = vec![f.one()]; // phi_0
    if a == 0 {
        return prev;
    }
    let mut cur = vec![f.zero(), f.one()]; // phi_1 = alpha
    for _ in 1..a {
        let mut nxt = vec![f.zero(); cur.len() + 1];
        for (j, c) in cur.iter().enumerate() {
            nxt[j + 1] = f.add(&nxt[j + 1], c);
        }
        for (j, c) in prev.iter().enumerate() {
            nxt[j] = f.sub(&nxt[j], c);
        }
        prev = cur;
        cur = nxt;
    }
    cur
}

fn poly_mul(ctx: &Ctx, a: &[CycloScalar], b: &[CycloScalar]) -> Vec<CycloScalar> {
    let f = &ctx.field;
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    out
}

/// The vector `t_b`: b parallel -1-framed copies of `Omega`, expanded as
/// `eta sum_c Delta(c) xi_c^{-1} phi_c` per copy, multiplied in the
/// alpha-polynomial algebra and reduced to the `phi` basis.
pub fn t_vector(ctx: &Ctx, b: usize) -> Result<RtVector> {
    let max = (ctx.r() - 2) as usize;
    if b > max {
        return Err(SkeinError::OutOfRange {
            what: "t_b index",
            value: b as i64,
            max: max as i64,
        });
    }
    let f = &ctx.field;
    let eta = f.eta();
    // one -1-framed Omega copy as an alpha-polynomial
    let mut omega_poly = vec![f.zero()];
    for c in 0..=(ctx.r() - 2) as u8 {
        let w = f.mul(
            &f.mul(&eta, &recoupling::delta(ctx, c)?),
            &recoupling::xi_pow(ctx, c, -1),
        );
        let p = phi_polynomial(ctx, c as usize);
        if omega_poly.len() < p.len() {
            omega_poly.resize(p.len(), f.zero());
        }
        for (j, x) in p.iter().enumerate() {
            omega_poly[j] = f.add(&omega_poly[j], &f.mul(x, &w));
        }
    }
    let mut prod = vec![f.one()];
    for _ in 0..b {
        prod = poly_mul(ctx, &prod, &omega_poly);
    }
    Ok(chebyshev_reduce(ctx, &prod))
}

/// The Lemma 1 change-of-basis matrix `M[b][a] = xi_a^b Delta(a)`.
pub fn lemma1_matrix(ctx: &Ctx) -> Mat {
    let n = (ctx.r() - 1) as usize;
    Mat::from_fn(&ctx.field, n, n, |b, a| {
        let xab = recoupling::xi_pow(ctx, a as u8, b as i64);
        ctx.field
            .mul(&xab, &recoupling::delta_unchecked(ctx, a as i64))
    })
}

/// Bilinear extension of the Hopf pairing `H(a, b)` (gluing two solid tori
/// to the 3-sphere); the primitive values come from the diagram engine.
pub fn hopf_pairing(ctx: &Ctx, x: &RtVector, y: &RtVector) -> Result<CycloScalar> {
    let f = &ctx.field;
    let mut acc = f.zero();
    for (a, xa) in x.coeffs.iter().enumerate() {
        if xa.is_zero() {
            continue;
        }
        for (b, yb) in y.coeffs.iter().enumerate() {
            if yb.is_zero() {
                continue;
            }
            let h = recoupling::hopf_value(ctx, a as u8, b as u8)?;
            acc = f.add(&acc, &f.mul(&f.mul(xa, yb), &h));
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// spines and standard bases
// ---------------------------------------------------------------------------

/// Trivalent spine of a genus-g handlebody: an edge list with vertex
/// triples (edge indices may repeat at loop edges).
#[derive(Debug, Clone)]
pub struct Spine {
    pub genus: usize,
    pub num_edges: usize,
    pub vertex_triples: Vec<[usize; 3]>,
}

/// The fixed spine per genus: a single loop for genus 1, the theta graph
/// (two vertices joined by three edges) for genus 2, and a caterpillar
/// (loop - bridge - double edge - bridge - loop) for genus 3.
pub fn spine(genus: usize) -> Result<Spine> {
    match genus {
        1 => Ok(Spine {
            genus,
            num_edges: 1,
            vertex_triples: vec![],
        }),
        2 => Ok(Spine {
            genus,
            num_edges: 3,
            vertex_triples: vec![[0, 1, 2], [0, 1, 2]],
        }),
        3 => Ok(Spine {
            genus,
            num_edges: 6,
            // edges: 0 loop, 1 bridge, 2 & 3 parallel pair, 4 bridge, 5 loop
            vertex_triples: vec![[0, 0, 1], [1, 2, 3], [2, 3, 4], [4, 5, 5]],
        }),
        g => Err(SkeinError::UnsupportedGenus {
            genus: g,
            max: MAX_GENUS_BASIS,
        }),
    }
}

/// An admissible labeling of the spine edges, in fixed edge order.
pub type Labeling = Vec<u8>;

/// All admissible labelings of the genus-g spine, lexicographically ordered.
pub fn enumerate_basis(ctx: &Ctx, genus: usize) -> Result<Vec<Labeling>> {
    let sp = spine(genus)?;
    let max = (ctx.r() - 2) as u8;
    fn go(
        ctx: &Ctx,
        sp: &Spine,
        max: u8,
        cur: &mut Labeling,
        edge: usize,
        out: &mut Vec<Labeling>,
    ) {
        if edge == sp.num_edges {
            let ok = sp
                .vertex_triples
                .iter()
                .all(|t| recoupling::admissible(ctx.r(), cur[t[0]], cur[t[1]], cur[t[2]]));
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=max {
            cur[edge] = c;
            go(ctx, sp, max, cur, edge + 1, out);
        }
        cur[edge] = 0;
    }
    let mut out = Vec::new();
    let mut cur: Labeling = vec![0; sp.num_edges];
    go(ctx, &sp, max, &mut cur, 0, &mut out);
    Ok(out)
}

/// Numeric Verlinde dimension `sum_a (eta Delta(a))^{2 - 2g}` for
/// cross-checking basis counts.
pub fn verlinde_dimension_numeric(ctx: &Ctx, genus: usize) -> f64 {
    let mut sum = 0.0;
    for a in 0..=(ctx.r() - 2) as u8 {
        let s0a = ctx.field.embed(&ctx.field.mul(
            &ctx.field.eta(),
            &recoupling::delta_unchecked(ctx, a as i64),
        ));
        sum += s0a.norm().powi(2 - 2 * genus as i32);
    }
    sum
}

// ---------------------------------------------------------------------------
// handlebody diagrams and their doubled closed words
// ---------------------------------------------------------------------------

/// Ring item in a solid-torus diagram: a color-u circle with the given
/// framing encircling the loops with indices in `over` (a contiguous range).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusRing {
    pub color: u8,
    pub framing: i64,
    pub over: (usize, usize),
}

/// A diagram in the solid torus (thickened annulus): concentric loops
/// around the hole (each a color and a framing, radial order irrelevant)
/// plus rings encircling loop sub-bundles (the meridian-disc direction).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TorusDiagram {
    pub loops: Vec<(u8, i64)>,
    pub rings: Vec<TorusRing>,
}

/// Curve inserted on a genus-2 standard vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Insertion2 {
    /// Ring around spine edge `edge` (a pants curve), color u, framing f.
    PantsRing { edge: usize, color: u8, framing: i64 },
    /// Loop winding hole `hole` (1 or 2), parallel to the spine, color u,
    /// framing f.
    HandleLoop { hole: usize, color: u8, framing: i64 },
}

/// A diagram in the genus-2 handlebody: a standard labeled theta vector
/// with at most one inserted curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Genus2Diagram {
    pub labels: [u8; 3],
    pub insertion: Option<Insertion2>,
}

/// A diagram in a handlebody, in the holed-disc projection.
#[derive(Debug, Clone, PartialEq)]
pub enum HbDiagram {
    Torus(TorusDiagram),
    Genus2(Genus2Diagram),
}

/// Closed word: the torus diagram `x` paired against the mirror of
/// `phi_w`, with a u-colored 0-framed surgery ring around the corridor.
/// With `surgery = None` the two tori are glued to the 3-sphere instead
/// (the Lemma 1 pairing), turning the partner into a ring.
fn torus_pair_word(r: u32, x: &TorusDiagram, w: u8, surgery: Option<u8>) -> GraphDiagram {
    let mut slices: Vec<Slice> = Vec::new();
    let mut hints: Vec<RingHint> = Vec::new();
    let mut framings: Vec<i64> = Vec::new();
    match surgery {
        Some(u) => {
            // doubled pairing: w is a mirror-layer loop, the surgery ring
            // encircles everything through the corridor
            let mut loops: Vec<(u8, i64)> = x.loops.clone();
            loops.push((w, 0));
            let k = loops.len();
            for (i, (c, f)) in loops.iter().enumerate() {
                slices.push(Slice::Cup { pos: i, color: *c });
                framings.push(*f);
            }
            for ring in &x.rings {
                emit_ring(&mut slices, &mut hints, ring.over, ring.color);
                framings.push(ring.framing);
            }
            emit_ring(&mut slices, &mut hints, (0, k), u);
            framings.push(0);
            for i in (0..k).rev() {
                slices.push(Slice::Cap { pos: i });
            }
        }
        None => {
            // S^3 gluing: w becomes a ring around the whole x bundle
            let k = x.loops.len();
            for (i, (c, f)) in x.loops.iter().enumerate() {
                slices.push(Slice::Cup { pos: i, color: *c });
                framings.push(*f);
            }
            for ring in &x.rings {
                emit_ring(&mut slices, &mut hints, ring.over, ring.color);
                framings.push(ring.framing);
            }
            if k == 0 {
                // empty diagram paired with phi_w: a lone w-unknot
                slices.push(Slice::Cup { pos: 0, color: w });
                slices.push(Slice::Cap { pos: 0 });
                framings.push(0);
            } else {
                emit_ring(&mut slices, &mut hints, (0, k), w);
                framings.push(0);
            }
            for i in (0..k).rev() {
                slices.push(Slice::Cap { pos: i });
            }
        }
    }
    GraphDiagram {
        r,
        slices,
        framings,
        hints,
    }
}

/// Closed word for the genus-2 doubled pairing of `x` (a labeled theta
/// vector with at most one inserted curve) against the mirror of the
/// standard vector `w`, with surgery ring colors (u1, u2) on the two hole
/// corridors.
///
/// Layout: positions `[R1 | M1 | M2 | R2]` where R1/R2 are the two return
/// corridors. The mirror copy of w runs in a lower layer (its cables cross
/// under x's wherever they meet); the inserted curve, drawn in a boundary
/// collar, is either a ring around a spine edge or a corridor-parallel
/// loop. The framings list tracks pure components in first-cup order:
/// handle loops, then the two surgery rings, then any pants ring; the
/// engine's FramingCount validation guards this bookkeeping.
fn genus2_pair_word(r: u32, x: &Genus2Diagram, w: [u8; 3], u1: u8, u2: u8) -> GraphDiagram {
    use engine::Sign;
    let [a1, a2, a3] = x.labels;
    let [b1, b2, b3] = w;
    let (loop1, loop2) = match &x.insertion {
        Some(Insertion2::HandleLoop {
            hole: 1,
            color,
            framing,
        }) => (Some((*color, *framing)), None),
        Some(Insertion2::HandleLoop {
            hole: 2,
            color,
            framing,
        }) => (None, Some((*color, *framing))),
        _ => (None, None),
    };
    let h1 = loop1.is_some() as usize;
    let h2 = loop2.is_some() as usize;
    let k1 = 2 + h1;
    let k2 = 2 + h2;
    let mut slices: Vec<Slice> = Vec::new();
    let mut hints: Vec<RingHint> = Vec::new();
    let mut framings: Vec<i64> = Vec::new();
    // corridor 1 cups: emission [a1, b1, c1?] gives R1 = [a1, b1, c1?],
    // M1 = [c1?, b1, a1]
    let mut stage_a: Vec<u8> = vec![a1, b1];
    if let Some((c, f)) = loop1 {
        stage_a.push(c);
        framings.push(f); // the only pure component among stage-A cups
    }
    for (i, c) in stage_a.iter().enumerate() {
        slices.push(Slice::Cup { pos: i, color: *c });
    }
    // corridor 2 cups at base 2 k1: emission [a3, b3, c2?] gives
    // M2 = [a3, b3, c2?], R2 = [c2?, b3, a3]
    let base2 = 2 * k1;
    let mut stage_b: Vec<u8> = vec![a3, b3];
    if let Some((c, f)) = loop2 {
        stage_b.push(c);
        framings.push(f);
    }
    for (i, c) in stage_b.iter().enumerate() {
        slices.push(Slice::Cup {
            pos: base2 + i,
            color: *c,
        });
    }
    // surgery rings around the corridors
    emit_ring(&mut slices, &mut hints, (0, k1), u1);
    framings.push(0);
    emit_ring(&mut slices, &mut hints, (base2 + k2, base2 + 2 * k2), u2);
    framings.push(0);
    // middle block positions: [c1?, b1, a1 | a3, b3, c2?] at m0..
    let m0 = k1;
    let i_b1 = m0 + h1;
    let i_a1 = i_b1 + 1;
    let i_a3 = i_a1 + 1;
    // mirror-layer tangle of w: bring b1, b3 inward (under x's cables),
    // fuse through b2, split, and return
    slices.push(Slice::Cross {
        pos: i_b1,
        sign: Sign::Negative,
    }); // b1 right across a1, w under
    slices.push(Slice::Cross {
        pos: i_a3,
        sign: Sign::Positive,
    }); // b3 left across a3, x over
    slices.push(Slice::Vertex {
        pos: i_b1 + 1,
        a: b1,
        b: b3,
        c: b2,
    });
    slices.push(Slice::Cup {
        pos: i_b1 + 2,
        color: b3,
    });
    slices.push(Slice::Vertex {
        pos: i_b1 + 1,
        a: b2,
        b: b3,
        c: b1,
    });
    slices.push(Slice::Cross {
        pos: i_b1,
        sign: Sign::Positive,
    }); // a1 left over b1
    slices.push(Slice::Cross {
        pos: i_a3,
        sign: Sign::Negative,
    }); // b3 right across a3, w under
    // upper-layer tangle of x: optional edge rings, fuse a1, a3 through a2
    if let Some(Insertion2::PantsRing {
        edge: 0,
        color,
        framing,
    }) = &x.insertion
    {
        emit_ring(&mut slices, &mut hints, (i_a1, i_a1 + 1), *color);
        framings.push(*framing);
    }
    if let Some(Insertion2::PantsRing {
        edge: 2,
        color,
        framing,
    }) = &x.insertion
    {
        emit_ring(&mut slices, &mut hints, (i_a3, i_a3 + 1), *color);
        framings.push(*framing);
    }
    slices.push(Slice::Vertex {
        pos: i_a1,
        a: a1,
        b: a3,
        c: a2,
    });
    if let Some(Insertion2::PantsRing {
        edge: 1,
        color,
        framing,
    }) = &x.insertion
    {
        emit_ring(&mut slices, &mut hints, (i_a1, i_a1 + 1), *color);
        framings.push(*framing);
    }
    slices.push(Slice::Cup {
        pos: i_a1 + 1,
        color: a3,
    });
    slices.push(Slice::Vertex {
        pos: i_a1,
        a: a2,
        b: a3,
        c: a1,
    });
    // corridor caps, inner first
    for i in 0..k2 {
        slices.push(Slice::Cap {
            pos: base2 + k2 - 1 - i,
        });
    }
    for i in 0..k1 {
        slices.push(Slice::Cap { pos: k1 - 1 - i });
    }
    GraphDiagram {
        r,
        slices,
        framings,
        hints,
    }
}

fn eval_value(ctx: &Ctx, d: &GraphDiagram, accel: bool) -> Result<CycloScalar> {
    let opts = EvalOpts::default();
    let res = if accel {
        engine::eval_accel(ctx, d, &opts)?
    } else {
        engine::eval_naive(ctx, d, &opts)?
    };
    Ok(res.value)
}

/// Doubled pairing of a torus diagram against every `phi_w`, summing the
/// surgery ring over `Omega`.
fn pairing_vector_g1(ctx: &Ctx, x: &TorusDiagram, accel: bool) -> Result<Vec<CycloScalar>> {
    let n = (ctx.r() - 1) as usize;
    let om = recoupling::omega(ctx);
    (0..n)
        .into_par_iter()
        .map(|w| {
            let mut acc = ctx.field.zero();
            for u in 0..n {
                let d = torus_pair_word(ctx.r(), x, w as u8, Some(u as u8));
                let v = eval_value(ctx, &d, accel)?;
                acc = ctx.field.add(&acc, &ctx.field.mul(&om[u], &v));
            }
            Ok(acc)
        })
        .collect()
}

/// Doubled pairing of a genus-2 diagram against every standard vector,
/// summing both surgery rings over `Omega`.
fn pairing_vector_g2(
    ctx: &Ctx,
    x: &Genus2Diagram,
    basis: &[Labeling],
    accel: bool,
) -> Result<Vec<CycloScalar>> {
    let n = (ctx.r() - 1) as usize;
    let om = recoupling::omega(ctx);
    basis
        .par_iter()
        .map(|w| {
            let wl = [w[0], w[1], w[2]];
            let mut acc = ctx.field.zero();
            for u1 in 0..n {
                for u2 in 0..n {
                    let d = genus2_pair_word(ctx.r(), x, wl, u1 as u8, u2 as u8);
                    let v = eval_value(ctx, &d, accel)?;
                    let w12 = ctx.field.mul(&om[u1], &om[u2]);
                    acc = ctx.field.add(&acc, &ctx.field.mul(&w12, &v));
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Doubled pairing of a handlebody diagram against the whole standard
/// basis of `RH_g`.
pub fn pairing_vector(ctx: &Ctx, genus: usize, d: &HbDiagram) -> Result<Vec<CycloScalar>> {
    pairing_vector_strategy(ctx, genus, d, true)
}

pub(crate) fn pairing_vector_strategy(
    ctx: &Ctx,
    genus: usize,
    d: &HbDiagram,
    accel: bool,
) -> Result<Vec<CycloScalar>> {
    match (genus, d) {
        (1, HbDiagram::Torus(x)) => pairing_vector_g1(ctx, x, accel),
        (2, HbDiagram::Genus2(x)) => {
            let basis = enumerate_basis(ctx, 2)?;
            pairing_vector_g2(ctx, x, &basis, accel)
        }
        (g, _) => Err(SkeinError::UnsupportedGenus {
            genus: g,
            max: MAX_GENUS_GEOMETRY,
        }),
    }
}

/// The standard-vector diagram of a basis labeling.
pub fn standard_vector_diagram(genus: usize, labeling: &Labeling) -> Result<HbDiagram> {
    match genus {
        1 => Ok(HbDiagram::Torus(TorusDiagram {
            loops: vec![(labeling[0], 0)],
            rings: vec![],
        })),
        2 => Ok(HbDiagram::Genus2(Genus2Diagram {
            labels: [labeling[0], labeling[1], labeling[2]],
            insertion: None,
        })),
        g => Err(SkeinError::UnsupportedGenus {
            genus: g,
            max: MAX_GENUS_GEOMETRY,
        }),
    }
}

/// Gram matrix of the doubled pairing on the standard basis.
pub fn gram_matrix(ctx: &Ctx, genus: usize) -> Result<Mat> {
    gram_matrix_strategy(ctx, genus, true)
}

pub(crate) fn gram_matrix_strategy(ctx: &Ctx, genus: usize, accel: bool) -> Result<Mat> {
    if genus > MAX_GENUS_GEOMETRY {
        return Err(SkeinError::UnsupportedGenus {
            genus,
            max: MAX_GENUS_GEOMETRY,
        });
    }
    let basis = enumerate_basis(ctx, genus)?;
    let rows: Vec<Vec<CycloScalar>> = basis
        .iter()
        .map(|v| {
            let d = standard_vector_diagram(genus, v)?;
            pairing_vector_strategy(ctx, genus, &d, accel)
        })
        .collect::<Result<_>>()?;
    Ok(Mat::from_fn(&ctx.field, basis.len(), basis.len(), |i, j| {
        rows[i][j].clone()
    }))
}

/// Express a handlebody diagram (a formal linear combination of rendered
/// diagrams) in the standard basis: the unique `c` with `G c = <d, w>_w`,
/// solved exactly.
pub fn express(
    ctx: &Ctx,
    genus: usize,
    terms: &[(HbDiagram, CycloScalar)],
) -> Result<Vec<CycloScalar>> {
    express_with_gram(ctx, genus, terms, &gram_matrix(ctx, genus)?)
}

/// `express` against a precomputed Gram matrix (callers reuse it across
/// many columns).
pub fn express_with_gram(
    ctx: &Ctx,
    genus: usize,
    terms: &[(HbDiagram, CycloScalar)],
    gram: &Mat,
) -> Result<Vec<CycloScalar>> {
    let f = &ctx.field;
    let n = gram.rows();
    let mut rhs = vec![f.zero(); n];
    for (d, w) in terms {
        let p = pairing_vector(ctx, genus, d)?;
        for i in 0..n {
            rhs[i] = f.add(&rhs[i], &f.mul(&p[i], w));
        }
    }
    gram.solve(f, &rhs).map_err(|_| SkeinError::SingularGram {
        genus,
        r: ctx.r(),
    })
}

/// Engine-evaluated Lemma 1 pairing `<t_b, phi_a>`: b parallel -1-framed
/// `Omega` loops in one solid torus glued against `phi_a` in the other.
pub fn t_pairing_engine(ctx: &Ctx, b: usize, a: u8) -> Result<CycloScalar> {
    let n = (ctx.r() - 1) as usize;
    let f = &ctx.field;
    let eta = f.eta();
    // sum over the color tuple of the b Omega copies
    let mut total = f.zero();
    let mut tuple = vec![0usize; b];
    loop {
        let mut weight = f.one();
        for &c in &tuple {
            let dc = recoupling::delta_unchecked(ctx, c as i64);
            weight = f.mul(&weight, &f.mul(&eta, &dc));
        }
        let x = TorusDiagram {
            loops: tuple.iter().map(|&c| (c as u8, -1)).collect(),
            rings: vec![],
        };
        let d = torus_pair_word(ctx.r(), &x, a, None);
        let v = eval_value(ctx, &d, true)?;
        total = f.add(&total, &f.mul(&weight, &v));
        // next tuple
        let mut i = 0;
        loop {
            if i == b {
                return Ok(total);
            }
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// The anomaly unit: exact value of a single -1-framed `Omega` unknot,
/// `kappa = eta sum_c Delta(c)^2 xi_c^{-1}`.
pub fn anomaly_kappa(ctx: &Ctx) -> CycloScalar {
    let f = &ctx.field;
    let mut acc = f.zero();
    for c in 0..=(ctx.r() - 2) as u8 {
        let d = recoupling::delta_unchecked(ctx, c as i64);
        let t = f.mul(&f.mul(&d, &d), &recoupling::xi_pow(ctx, c, -1));
        acc = f.add(&acc, &t);
    }
    f.mul(&f.eta(), &acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Ctx;

    fn ctx(r: u32) -> Ctx {
        Ctx::new(r).unwrap()
    }

    #[test]
    fn chebyshev_basics() {
        let c = ctx(5);
        let f = &c.field;
        // p = 1 -> (1, 0, 0, 0)
        let v = chebyshev_reduce(&c, &[f.one()]);
        assert_eq!(v, RtVector::basis(&c, 0));
        // p = alpha^2 = phi_2 + phi_0
        let v = chebyshev_reduce(&c, &[f.zero(), f.zero(), f.one()]);
        let mut want = RtVector::zero(&c);
        want.coeffs[0] = f.one();
        want.coeffs[2] = f.one();
        assert_eq!(v, want);
        // r=3: alpha^2 = phi_0 since phi_2 = 0
        let c3 = ctx(3);
        let v = chebyshev_reduce(&c3, &[c3.field.zero(), c3.field.zero(), c3.field.one()]);
        assert_eq!(v, RtVector::basis(&c3, 0));
    }

    #[test]
    fn chebyshev_quotient_against_engine() {
        // <alpha^k, phi_a> via the engine (k bare loops against an a-ring)
        // equals the Hopf pairing of the reduced vector
        for r in [3u32, 5] {
            let c = ctx(r);
            let f = &c.field;
            for k in 0..=(r + 2) as usize {
                let mut poly = vec![f.zero(); k + 1];
                poly[k] = f.one();
                let reduced = chebyshev_reduce(&c, &poly);
                for a in 0..=(r - 2) as u8 {
                    let direct = {
                        let x = TorusDiagram {
                            loops: vec![(1, 0); k],
                            rings: vec![],
                        };
                        let d = torus_pair_word(r, &x, a, None);
                        eval_value(&c, &d, false).unwrap()
                    };
                    let via_basis =
                        hopf_pairing(&c, &reduced, &RtVector::basis(&c, a)).unwrap();
                    assert_eq!(direct, via_basis, "alpha^{k} vs phi_{a} at r={r}");
                }
            }
        }
    }

    #[test]
    fn t_vector_values() {
        let c = ctx(5);
        let f = &c.field;
        // b = 0: unit vector
        assert_eq!(t_vector(&c, 0).unwrap(), RtVector::basis(&c, 0));
        // b = 1: entries eta Delta(a) xi_a^{-1}
        let t1 = t_vector(&c, 1).unwrap();
        for a in 0..=3u8 {
            let want = f.mul(
                &f.mul(&f.eta(), &recoupling::delta(&c, a).unwrap()),
                &recoupling::xi_pow(&c, a, -1),
            );
            assert_eq!(t1.coeffs[a as usize], want, "t_1 entry {a}");
        }
        assert!(t_vector(&c, 4).is_err());
    }

    #[test]
    fn lemma1_matrix_r3() {
        let c = ctx(3);
        let f = &c.field;
        let m = lemma1_matrix(&c);
        // [[1, -1], [1, i]] with i = A^3
        assert_eq!(*m.at(0, 0), f.one());
        assert_eq!(*m.at(0, 1), f.int(-1));
        assert_eq!(*m.at(1, 0), f.one());
        assert_eq!(*m.at(1, 1), f.pow_a(3));
        let det = m.det(f).unwrap();
        assert_eq!(det, f.add(&f.one(), &f.pow_a(3)), "det = 1 + i");
        assert!(!det.is_zero());
    }

    #[test]
    fn lemma1_invertible_at_primes() {
        for r in [3u32, 5, 7] {
            let c = ctx(r);
            let m = lemma1_matrix(&c);
            assert!(
                !m.det(&c.field).unwrap().is_zero(),
                "Lemma 1 basis at r={r}"
            );
        }
    }

    #[test]
    fn basis_counts() {
        let c5 = ctx(5);
        assert_eq!(enumerate_basis(&c5, 1).unwrap().len(), 4);
        assert_eq!(enumerate_basis(&c5, 2).unwrap().len(), 20);
        let c3 = ctx(3);
        assert_eq!(enumerate_basis(&c3, 1).unwrap().len(), 2);
        assert_eq!(enumerate_basis(&c3, 2).unwrap().len(), 4);
        assert!(enumerate_basis(&c3, 4).is_err());
        // Verlinde cross-check, numeric
        for r in [3u32, 5] {
            let c = ctx(r);
            for g in 1..=3usize {
                let count = enumerate_basis(&c, g).unwrap().len() as f64;
                let verlinde = verlinde_dimension_numeric(&c, g);
                assert!(
                    (count - verlinde).abs() < 1e-6,
                    "Verlinde at g={g} r={r}: {count} vs {verlinde}"
                );
            }
        }
    }

    #[test]
    fn hopf_pairing_bilinear() {
        let c = ctx(5);
        let f = &c.field;
        // <phi_0, phi_0> = 1
        let p = hopf_pairing(&c, &RtVector::basis(&c, 0), &RtVector::basis(&c, 0)).unwrap();
        assert_eq!(p, f.one());
        // H(0, b) = Delta(b)
        for b in 0..=3u8 {
            let p = hopf_pairing(&c, &RtVector::basis(&c, 0), &RtVector::basis(&c, b)).unwrap();
            assert_eq!(p, recoupling::delta(&c, b).unwrap());
        }
    }

    #[test]
    fn t_pairing_is_kappa_xi_delta() {
        // <t_b, phi_a> = kappa^b xi_a^b Delta(a), with kappa the anomaly
        // unit of one -1-framed Omega unknot (the per-copy normalization
        // recorded alongside Lemma 1).
        let c = ctx(3);
        let f = &c.field;
        let kappa = anomaly_kappa(&c);
        // |kappa| = 1 numerically
        assert!((f.embed(&kappa).norm() - 1.0).abs() < 1e-10);
        for b in 0..=1usize {
            for a in 0..=1u8 {
                let engine = t_pairing_engine(&c, b, a).unwrap();
                let alg =
                    hopf_pairing(&c, &t_vector(&c, b).unwrap(), &RtVector::basis(&c, a)).unwrap();
                assert_eq!(engine, alg, "engine vs bilinear at b={b} a={a}");
                let mut want = recoupling::delta_unchecked(&c, a as i64);
                want = f.mul(&want, &recoupling::xi_pow(&c, a, b as i64));
                want = f.mul(&want, &f.pow(&kappa, b as u32));
                assert_eq!(engine, want, "kappa^b xi_a^b Delta(a) at b={b} a={a}");
            }
        }
    }

    #[test]
    fn gram_g1_diagonal_nondegenerate() {
        for r in [3u32, 5] {
            let c = ctx(r);
            let g = gram_matrix_strategy(&c, 1, false).unwrap();
            assert!(g.is_diagonal(), "genus-1 Gram diagonal at r={r}");
            for i in 0..g.rows() {
                assert!(!g.at(i, i).is_zero(), "nondegenerate at r={r}");
            }
            // strategies agree
            let ga = gram_matrix_strategy(&c, 1, true).unwrap();
            assert_eq!(g, ga, "gram strategies at r={r}");
        }
    }

    #[test]
    fn express_round_trips_basis_g1() {
        let c = ctx(5);
        let f = &c.field;
        for a in 0..=3u8 {
            let d = standard_vector_diagram(1, &vec![a]).unwrap();
            let coeffs = express(&c, 1, &[(d, f.one())]).unwrap();
            for (i, x) in coeffs.iter().enumerate() {
                if i == a as usize {
                    assert_eq!(x, &f.one(), "round trip phi_{a}");
                } else {
                    assert!(x.is_zero(), "round trip phi_{a} entry {i}");
                }
            }
        }
        // empty diagram -> vacuum
        let empty = HbDiagram::Torus(TorusDiagram::default());
        let coeffs = express(&c, 1, &[(empty, f.one())]).unwrap();
        assert_eq!(coeffs[0], f.one());
        assert!(coeffs[1..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn express_t_b_matches_t_vector() {
        // two independent computation paths: engine doubling + Gram solve
        // vs Chebyshev algebra
        let c = ctx(5);
        let f = &c.field;
        let eta = f.eta();
        let gram = gram_matrix(&c, 1).unwrap();
        for b in 0..=2usize {
            // the t_b diagram: sum over color tuples with eta Delta weights
            let n = (c.r() - 1) as usize;
            let mut terms: Vec<(HbDiagram, CycloScalar)> = Vec::new();
            let mut tuple = vec![0usize; b];
            'outer: loop {
                let mut weight = f.one();
                for &cc in &tuple {
                    let dc = recoupling::delta_unchecked(&c, cc as i64);
                    weight = f.mul(&weight, &f.mul(&eta, &dc));
                }
                terms.push((
                    HbDiagram::Torus(TorusDiagram {
                        loops: tuple.iter().map(|&cc| (cc as u8, -1)).collect(),
                        rings: vec![],
                    }),
                    weight,
                ));
                let mut i = 0;
                loop {
                    if i == b {
                        break 'outer;
                    }
                    tuple[i] += 1;
                    if tuple[i] < n {
                        break;
                    }
                    tuple[i] = 0;
                    i += 1;
                }
            }
            let coeffs = express_with_gram(&c, 1, &terms, &gram).unwrap();
            let want = t_vector(&c, b).unwrap();
            assert_eq!(coeffs, want.coeffs, "express(t_{b}) = t_vector({b})");
        }
    }

    #[test]
    fn gram_g2_diagonal_r3() {
        let c = ctx(3);
        let g = gram_matrix_strategy(&c, 2, false).unwrap();
        assert_eq!(g.rows(), 4);
        assert!(g.is_diagonal(), "genus-2 Gram diagonal at r=3");
        for i in 0..4 {
            assert!(!g.at(i, i).is_zero());
        }
        let ga = gram_matrix_strategy(&c, 2, true).unwrap();
        assert_eq!(g, ga, "gram strategies agree at (2,3)");
    }

    #[test]
    fn express_round_trips_basis_g2_r3() {
        let c = ctx(3);
        let f = &c.field;
        let basis = enumerate_basis(&c, 2).unwrap();
        let gram = gram_matrix(&c, 2).unwrap();
        for (bi, lab) in basis.iter().enumerate() {
            let d = standard_vector_diagram(2, lab).unwrap();
            let coeffs = express_with_gram(&c, 2, &[(d, f.one())], &gram).unwrap();
            for (i, x) in coeffs.iter().enumerate() {
                if i == bi {
                    assert_eq!(x, &f.one(), "round trip {lab:?}");
                } else {
                    assert!(x.is_zero(), "round trip {lab:?} entry {i}");
                }
            }
        }
    }
}
