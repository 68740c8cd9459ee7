//! Exact evaluation of colored framed link and trivalent graph diagrams in
//! the 3-sphere.
//!
//! A diagram is a *slice word*: an ordered list of elementary slices acting
//! bottom-to-top on a running list of colored cables. A color-c cable stands
//! for c parallel strands carrying the Jones-Wenzl idempotent `f^(c)`
//! (color-1 cables are bare strands, so unprojected multi-strand cabling is
//! expressed with parallel color-1 cables). The word of a closed diagram
//! starts and ends with the empty cable list.
//!
//! `eval_naive` lowers the word to bare strands, expands projectors into
//! Temperley-Lieb sums, resolves crossings by the Kauffman relation and
//! absorbs each closed loop as a factor `delta`, sweeping a sparse transfer
//! state of noncrossing half-diagrams up the word. `eval_accel` first
//! removes encircling rings and large cable crossings by local recoupling
//! rewrites (channel sums whose coefficients come from small `eval_naive`
//! runs), then finishes on the naive path. Both strategies return identical
//! values; the naive path is the single source of truth.

use std::collections::HashMap;

use rand::Rng;

use crate::recoupling;
use crate::scalars::{Ctx, CycloScalar};
use crate::tl::{jones_wenzl, TLDiagram};
use crate::Result;
use crate::SkeinError;

/// Crossing sign. `positive: true` is the sign for which a single kink
/// (cup, crossing, cap) on a bare strand evaluates to `-A^3 = xi_1`, i.e. a
/// positive curl.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// One elementary slice acting on the running cable list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slice {
    /// Insert two adjacent color-c cable ends at position `pos`.
    Cup { pos: usize, color: u8 },
    /// Close the adjacent cables at `pos`, `pos + 1` (colors must match).
    Cap { pos: usize },
    /// Cross cables at `pos`, `pos + 1`.
    Cross { pos: usize, sign: Sign },
    /// Trivalent vertex: consume cables colored (a, b) at `pos`, `pos+1`,
    /// produce a cable colored c.
    Vertex { pos: usize, a: u8, b: u8, c: u8 },
    /// Gather consecutive cables starting at `pos` with total color `color`
    /// into a single projected cable.
    Proj { pos: usize, color: u8 },
}

/// Hint recorded by diagram builders: slices `start..end` form a canonical
/// ring of the given color encircling the cable block `block`. Advisory for
/// `eval_accel`; carries no semantics of its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingHint {
    pub start: usize,
    pub end: usize,
    pub block: (usize, usize),
    pub color: u8,
}

/// A colored framed diagram in the 3-sphere, encoded as a slice word.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDiagram {
    pub r: u32,
    pub slices: Vec<Slice>,
    /// Framing integer per closed pure-cable component, in order of each
    /// component's first cup slice. Empty means all zero.
    pub framings: Vec<i64>,
    pub hints: Vec<RingHint>,
}

impl GraphDiagram {
    pub fn new(r: u32) -> Self {
        GraphDiagram {
            r,
            slices: Vec::new(),
            framings: Vec::new(),
            hints: Vec::new(),
        }
    }
}

/// Structural defects reported by `validate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Defect {
    BadPosition { slice: usize },
    ColorMismatch { slice: usize },
    VertexColorMismatch { slice: usize },
    InadmissibleVertex { slice: usize },
    ColorOutOfRange { slice: usize },
    ProjMismatch { slice: usize },
    NotClosed { leftover: usize },
    FramingCount { expected: usize, got: usize },
}

impl std::fmt::Display for Defect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Defect::BadPosition { slice } => write!(f, "bad position at slice {slice}"),
            Defect::ColorMismatch { slice } => write!(f, "cap color mismatch at slice {slice}"),
            Defect::VertexColorMismatch { slice } => {
                write!(f, "vertex input colors differ from declaration at slice {slice}")
            }
            Defect::InadmissibleVertex { slice } => {
                write!(f, "inadmissible vertex at slice {slice}")
            }
            Defect::ColorOutOfRange { slice } => write!(f, "color exceeds r-2 at slice {slice}"),
            Defect::ProjMismatch { slice } => {
                write!(f, "projector cannot gather its strands at slice {slice}")
            }
            Defect::NotClosed { leftover } => {
                write!(f, "diagram not closed: {leftover} cables remain")
            }
            Defect::FramingCount { expected, got } => {
                write!(f, "framing list has {got} entries, diagram has {expected} components")
            }
        }
    }
}

/// Whether a defect makes evaluation impossible (as opposed to forcing the
/// value zero, which inadmissible vertices do).
fn is_fatal(d: &Defect) -> bool {
    !matches!(d, Defect::InadmissibleVertex { .. })
}

/// Evaluation statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub crossings_resolved: u64,
    pub loops_removed: u64,
    pub rewrites_applied: u64,
    pub peak_terms: u64,
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: CycloScalar,
    pub stats: EvalStats,
}

/// Evaluation options.
#[derive(Debug, Clone, Copy)]
pub struct EvalOpts {
    /// Maximum number of live transfer terms times slices processed.
    pub budget: u64,
}

impl Default for EvalOpts {
    fn default() -> Self {
        EvalOpts {
            budget: default_budget(),
        }
    }
}

pub fn default_budget() -> u64 {
    std::env::var("SKEINREP_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000_000)
}

// ---------------------------------------------------------------------------
// validation and component analysis
// ---------------------------------------------------------------------------

struct CableWalk {
    /// colors of live cables
    colors: Vec<u8>,
    /// component id of each live cable
    comp: Vec<usize>,
    /// per component: (first cup slice, color, touches_vertex, closed)
    components: Vec<(usize, u8, bool, bool)>,
}

impl CableWalk {
    fn new() -> Self {
        CableWalk {
            colors: Vec::new(),
            comp: Vec::new(),
            components: Vec::new(),
        }
    }
}

/// Walk the word, checking typing and collecting link components.
/// Returns the walk result or the first fatal defect encountered; all
/// defects (fatal or not) are appended to `defects`.
fn walk_word(d: &GraphDiagram, defects: &mut Vec<Defect>) -> Option<CableWalk> {
    let max_color = (d.r - 2) as u8;
    let mut w = CableWalk::new();
    for (idx, s) in d.slices.iter().enumerate() {
        match *s {
            Slice::Cup { pos, color } => {
                if pos > w.colors.len() {
                    defects.push(Defect::BadPosition { slice: idx });
                    return None;
                }
                if color > max_color {
                    defects.push(Defect::ColorOutOfRange { slice: idx });
                    return None;
                }
                let cid = w.components.len();
                w.components.push((idx, color, false, false));
                w.colors.insert(pos, color);
                w.colors.insert(pos, color);
                w.comp.insert(pos, cid);
                w.comp.insert(pos, cid);
            }
            Slice::Cap { pos } => {
                if pos + 1 >= w.colors.len() {
                    defects.push(Defect::BadPosition { slice: idx });
                    return None;
                }
                if w.colors[pos] != w.colors[pos + 1] {
                    defects.push(Defect::ColorMismatch { slice: idx });
                    return None;
                }
                let (c1, c2) = (w.comp[pos], w.comp[pos + 1]);
                if c1 == c2 {
                    w.components[c1].3 = true; // closed
                } else {
                    // merge c2 into c1, keeping the earlier first-cup
                    let keep = if w.components[c1].0 <= w.components[c2].0 {
                        c1
                    } else {
                        c2
                    };
                    let drop = if keep == c1 { c2 } else { c1 };
                    let touched = w.components[drop].2;
                    w.components[keep].2 |= touched;
                    for c in w.comp.iter_mut() {
                        if *c == drop {
                            *c = keep;
                        }
                    }
                }
                w.colors.drain(pos..pos + 2);
                w.comp.drain(pos..pos + 2);
            }
            Slice::Cross { pos, .. } => {
                if pos + 1 >= w.colors.len() {
                    defects.push(Defect::BadPosition { slice: idx });
                    return None;
                }
                w.colors.swap(pos, pos + 1);
                w.comp.swap(pos, pos + 1);
            }
            Slice::Vertex { pos, a, b, c } => {
                if pos + 1 >= w.colors.len() {
                    defects.push(Defect::BadPosition { slice: idx });
                    return None;
                }
                if w.colors[pos] != a || w.colors[pos + 1] != b {
                    defects.push(Defect::VertexColorMismatch { slice: idx });
                    return None;
                }
                if c > max_color || a > max_color || b > max_color {
                    defects.push(Defect::ColorOutOfRange { slice: idx });
                    return None;
                }
                if !recoupling::admissible(d.r, a, b, c) {
                    defects.push(Defect::InadmissibleVertex { slice: idx });
                }
                // vertices end link components
                let (c1, c2) = (w.comp[pos], w.comp[pos + 1]);
                w.components[c1].2 = true;
                w.components[c2].2 = true;
                let cid = w.components.len();
                w.components.push((idx, c, true, false));
                w.colors.drain(pos..pos + 2);
                w.comp.drain(pos..pos + 2);
                w.colors.insert(pos, c);
                w.comp.insert(pos, cid);
            }
            Slice::Proj { pos, color } => {
                if pos >= w.colors.len() {
                    defects.push(Defect::BadPosition { slice: idx });
                    return None;
                }
                if color > max_color {
                    defects.push(Defect::ColorOutOfRange { slice: idx });
                    return None;
                }
                let mut total = 0u32;
                let mut end = pos;
                while end < w.colors.len() && total < color as u32 {
                    total += w.colors[end] as u32;
                    end += 1;
                }
                if total != color as u32 {
                    defects.push(Defect::ProjMismatch { slice: idx });
                    return None;
                }
                // gathered cables become one; projector joins components
                let keep = w.comp[pos.min(w.comp.len().saturating_sub(1))];
                for i in pos..end {
                    let c = w.comp[i];
                    if c != keep {
                        // a projector welds strands into one edge
                        let touched = w.components[c].2;
                        w.components[keep].2 |= touched;
                        for cc in w.comp.iter_mut() {
                            if *cc == c {
                                *cc = keep;
                            }
                        }
                    }
                }
                w.colors.drain(pos..end);
                w.comp.drain(pos..end);
                w.colors.insert(pos, color);
                w.comp.insert(pos, keep);
            }
        }
    }
    if !w.colors.is_empty() {
        defects.push(Defect::NotClosed {
            leftover: w.colors.len(),
        });
        return None;
    }
    Some(w)
}

/// Pure closed link components (no vertex), in first-cup order:
/// (color, first cup slice index).
fn pure_components(walk: &CableWalk) -> Vec<(u8, usize)> {
    let mut out: Vec<(u8, usize)> = walk
        .components
        .iter()
        .filter(|(_, _, touches_vertex, closed)| *closed && !*touches_vertex)
        .map(|(first, color, _, _)| (*color, *first))
        .collect();
    out.sort_by_key(|(_, first)| *first);
    out
}

/// Check the word; an empty defect list means the diagram is well typed,
/// closed, within color range, and all vertices admissible.
pub fn validate(d: &GraphDiagram) -> Vec<Defect> {
    let mut defects = Vec::new();
    let walk = walk_word(d, &mut defects);
    if let Some(w) = walk {
        let pure = pure_components(&w);
        if !d.framings.is_empty() && d.framings.len() != pure.len() {
            defects.push(Defect::FramingCount {
                expected: pure.len(),
                got: d.framings.len(),
            });
        }
    }
    defects
}

// ---------------------------------------------------------------------------
// lowering to bare strands
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum RawSlice {
    Cup(usize),
    Cap(usize),
    Cross(usize, Sign),
    /// Apply `f^(color)` across `color` strands starting at a raw position.
    Jw(usize, u8),
}

/// Lower the cable word to bare strands. Returns None when a vertex admits
/// no planar triad (parity or triangle failure), in which case the diagram
/// evaluates to zero.
fn lower(d: &GraphDiagram) -> Option<Vec<RawSlice>> {
    let mut colors: Vec<u8> = Vec::new();
    let mut out: Vec<RawSlice> = Vec::new();
    let offset = |colors: &[u8], pos: usize| -> usize {
        colors[..pos].iter().map(|&c| c as usize).sum()
    };
    for s in &d.slices {
        match *s {
            Slice::Cup { pos, color } => {
                let p = offset(&colors, pos);
                let c = color as usize;
                for k in 0..c {
                    out.push(RawSlice::Cup(p + k));
                }
                if color >= 2 {
                    out.push(RawSlice::Jw(p, color));
                }
                colors.insert(pos, color);
                colors.insert(pos, color);
            }
            Slice::Cap { pos } => {
                let p = offset(&colors, pos);
                let c = colors[pos] as usize;
                for k in 0..c {
                    out.push(RawSlice::Cap(p + c - 1 - k));
                }
                colors.drain(pos..pos + 2);
            }
            Slice::Cross { pos, sign } => {
                let p = offset(&colors, pos);
                let x = colors[pos] as usize;
                let y = colors[pos + 1] as usize;
                // move each strand of the right cable across the left cable
                for k in 0..y {
                    for j in 0..x {
                        out.push(RawSlice::Cross(p + k + x - 1 - j, sign));
                    }
                }
                colors.swap(pos, pos + 1);
            }
            Slice::Vertex { pos, a, b, c } => {
                let (a, b, c) = (a as i64, b as i64, c as i64);
                if (a + b + c) % 2 != 0 {
                    return None;
                }
                let k = (a + b - c) / 2;
                if k < 0 || a - k < 0 || b - k < 0 {
                    return None;
                }
                let p = offset(&colors, pos);
                let (a, k) = (a as usize, k as usize);
                for t in 0..k {
                    out.push(RawSlice::Cap(p + a - 1 - t));
                }
                if c >= 2 {
                    out.push(RawSlice::Jw(p, c as u8));
                }
                colors.drain(pos..pos + 2);
                colors.insert(pos, c as u8);
            }
            Slice::Proj { pos, color } => {
                let p = offset(&colors, pos);
                if color >= 2 {
                    out.push(RawSlice::Jw(p, color));
                }
                let mut total = 0u32;
                let mut end = pos;
                while total < color as u32 {
                    total += colors[end] as u32;
                    end += 1;
                }
                colors.drain(pos..end);
                colors.insert(pos, color);
            }
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// transfer state over noncrossing half-diagrams
// ---------------------------------------------------------------------------

type Half = Vec<u8>;

fn hd_cup(h: &Half, p: usize) -> Half {
    let m = h.len();
    let mut out = vec![0u8; m + 2];
    let remap = |x: usize| -> usize { if x < p { x } else { x + 2 } };
    for x in 0..m {
        out[remap(x)] = remap(h[x] as usize) as u8;
    }
    out[p] = (p + 1) as u8;
    out[p + 1] = p as u8;
    out
}

/// Cap points p, p+1; returns (new half, loop_formed).
fn hd_cap(h: &Half, p: usize) -> (Half, bool) {
    let m = h.len();
    let q1 = h[p] as usize;
    let q2 = h[p + 1] as usize;
    let looped = q1 == p + 1;
    let remap = |x: usize| -> usize { if x < p { x } else { x - 2 } };
    let mut out = vec![0u8; m - 2];
    for x in 0..m {
        if x == p || x == p + 1 {
            continue;
        }
        let mut partner = h[x] as usize;
        if partner == p {
            partner = q2;
        } else if partner == p + 1 {
            partner = q1;
        }
        out[remap(x)] = remap(partner) as u8;
    }
    (out, looped)
}

/// Compose a TL diagram into positions p..p+a of a half-diagram.
/// Returns (new half, loops formed).
fn hd_apply_tl(h: &Half, p: usize, tl: &TLDiagram) -> (Half, usize) {
    let m = h.len();
    let a = tl.strands();
    debug_assert!(p + a <= m);
    // node space: 0..m old points, m..m+a new top points
    let mut e1 = vec![usize::MAX; m + a]; // h edges
    let mut e2 = vec![usize::MAX; m + a]; // tl edges
    for x in 0..m {
        e1[x] = h[x] as usize;
    }
    let map_tl = |leg: usize| -> usize {
        if leg < a {
            p + leg // bottom leg attaches to old point
        } else {
            m + (leg - a) // top leg is a new point
        }
    };
    for leg in 0..2 * a {
        let q = tl.partner(leg);
        let (x, y) = (map_tl(leg), map_tl(q));
        e2[x] = y;
        e2[y] = x;
    }
    // result boundary: old out-of-range points keep index; top j -> p + j
    let res_index = |node: usize| -> usize {
        if node < m {
            debug_assert!(node < p || node >= p + a);
            node
        } else {
            p + (node - m)
        }
    };
    let is_boundary = |node: usize| -> bool { node >= m || node < p || node >= p + a };
    let mut visited = vec![false; m + a];
    let mut out = vec![0u8; m];
    for start in (0..m + a).filter(|&x| is_boundary(x)) {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        // first edge: old points leave via e1, new tops via e2
        let mut use_e1 = start < m;
        let mut cur = start;
        loop {
            let next = if use_e1 { e1[cur] } else { e2[cur] };
            debug_assert_ne!(next, usize::MAX, "broken walk");
            visited[next] = true;
            if is_boundary(next) {
                let (ri, rj) = (res_index(start), res_index(next));
                out[ri] = rj as u8;
                out[rj] = ri as u8;
                break;
            }
            // internal node: arrived via one edge type, leave via the other
            use_e1 = !use_e1;
            cur = next;
        }
    }
    // remaining unvisited internal nodes form loops; each internal node has
    // exactly one edge of each type, so a cycle visits it once
    let mut loops = 0;
    for start in p..p + a {
        if visited[start] {
            continue;
        }
        loops += 1;
        let mut cur = start;
        let mut use_e1 = true;
        loop {
            visited[cur] = true;
            cur = if use_e1 { e1[cur] } else { e2[cur] };
            use_e1 = !use_e1;
            if cur == start {
                break;
            }
        }
    }
    (out, loops)
}

// ---------------------------------------------------------------------------
// naive evaluation
// ---------------------------------------------------------------------------

fn framing_factor(ctx: &Ctx, d: &GraphDiagram, walk: &CableWalk) -> CycloScalar {
    let pure = pure_components(walk);
    let mut f = ctx.field.one();
    for (i, (color, _)) in pure.iter().enumerate() {
        let fr = d.framings.get(i).copied().unwrap_or(0);
        if fr != 0 {
            f = ctx.field.mul(&f, &recoupling::xi_pow(ctx, *color, fr));
        }
    }
    f
}

fn cache_key(d: &GraphDiagram) -> Vec<u8> {
    let mut k = Vec::with_capacity(8 + d.slices.len() * 5);
    k.extend_from_slice(&d.r.to_le_bytes());
    for s in &d.slices {
        match *s {
            Slice::Cup { pos, color } => {
                k.push(1);
                k.extend_from_slice(&(pos as u32).to_le_bytes());
                k.push(color);
            }
            Slice::Cap { pos } => {
                k.push(2);
                k.extend_from_slice(&(pos as u32).to_le_bytes());
            }
            Slice::Cross { pos, sign } => {
                k.push(if sign == Sign::Positive { 3 } else { 4 });
                k.extend_from_slice(&(pos as u32).to_le_bytes());
            }
            Slice::Vertex { pos, a, b, c } => {
                k.push(5);
                k.extend_from_slice(&(pos as u32).to_le_bytes());
                k.push(a);
                k.push(b);
                k.push(c);
            }
            Slice::Proj { pos, color } => {
                k.push(6);
                k.extend_from_slice(&(pos as u32).to_le_bytes());
                k.push(color);
            }
        }
    }
    k.push(7);
    for f in &d.framings {
        k.extend_from_slice(&f.to_le_bytes());
    }
    k
}

/// Exact Kauffman bracket value of the closed diagram by full strand-level
/// expansion (with immediate loop absorption and sparse state merging).
pub fn eval_naive(ctx: &Ctx, d: &GraphDiagram, opts: &EvalOpts) -> Result<EvalResult> {
    eval_common(ctx, d, opts, false)
}

/// Same value as `eval_naive`, computed after local recoupling rewrites:
/// encircling rings become channel sums and large cable crossings become
/// half-twist channel expansions; residual pieces fall back to the naive
/// sweep.
pub fn eval_accel(ctx: &Ctx, d: &GraphDiagram, opts: &EvalOpts) -> Result<EvalResult> {
    eval_common(ctx, d, opts, true)
}

fn eval_common(ctx: &Ctx, d: &GraphDiagram, opts: &EvalOpts, accel: bool) -> Result<EvalResult> {
    let mut defects = Vec::new();
    let walk = walk_word(d, &mut defects);
    if let Some(fatal) = defects.iter().find(|df| is_fatal(df)) {
        return Err(SkeinError::InvalidDiagram(fatal.to_string()));
    }
    let walk = walk.expect("no fatal defects, walk succeeds");
    let pure = pure_components(&walk);
    if !d.framings.is_empty() && d.framings.len() != pure.len() {
        return Err(SkeinError::InvalidDiagram(
            Defect::FramingCount {
                expected: pure.len(),
                got: d.framings.len(),
            }
            .to_string(),
        ));
    }
    let framing = framing_factor(ctx, d, &walk);
    // framing handled; evaluate the 0-framed word
    let mut zero_framed = d.clone();
    zero_framed.framings.clear();
    let res = if accel {
        eval_rewrite(ctx, &zero_framed, opts, 0)?
    } else {
        eval_sweep(ctx, &zero_framed, opts)?
    };
    Ok(EvalResult {
        value: ctx.field.mul(&res.value, &framing),
        stats: res.stats,
    })
}

/// The transfer sweep over bare strands (memoized).
fn eval_sweep(ctx: &Ctx, d: &GraphDiagram, opts: &EvalOpts) -> Result<EvalResult> {
    debug_assert!(d.framings.is_empty());
    let mut key = vec![0u8];
    key.extend(cache_key(d));
    if let Some(v) = ctx.eval_cache.lock().unwrap().get(&key) {
        return Ok(EvalResult {
            value: v.clone(),
            stats: EvalStats {
                cached: true,
                ..Default::default()
            },
        });
    }
    let mut stats = EvalStats::default();
    let Some(raw) = lower(d) else {
        // no planar triad: the diagram is the zero skein element
        return Ok(EvalResult {
            value: ctx.field.zero(),
            stats,
        });
    };
    let delta = ctx.field.delta_loop();
    let mut state: HashMap<Half, CycloScalar> = HashMap::new();
    state.insert(Vec::new(), ctx.field.one());
    let mut processed: u64 = 0;
    for rs in &raw {
        processed += state.len() as u64;
        if processed > opts.budget {
            return Err(SkeinError::ResourceLimit {
                terms: processed,
                budget: opts.budget,
            });
        }
        let mut next: HashMap<Half, CycloScalar> = HashMap::with_capacity(state.len() * 2);
        let mut push = |ctx: &Ctx, h: Half, c: CycloScalar| {
            if c.is_zero() {
                return;
            }
            match next.entry(h) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    let s = ctx.field.add(e.get(), &c);
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = s;
                    }
                }
            }
        };
        match rs {
            RawSlice::Cup(p) => {
                for (h, c) in &state {
                    push(ctx, hd_cup(h, *p), c.clone());
                }
            }
            RawSlice::Cap(p) => {
                for (h, c) in &state {
                    let (h2, looped) = hd_cap(h, *p);
                    let c2 = if looped {
                        stats.loops_removed += 1;
                        ctx.field.mul(c, &delta)
                    } else {
                        c.clone()
                    };
                    push(ctx, h2, c2);
                }
            }
            RawSlice::Cross(p, sign) => {
                // positive: A^{-1} id + A (cap;cup) ; negative: mirror
                let (c_id, c_turn) = match sign {
                    Sign::Positive => (ctx.field.pow_a(-1), ctx.field.pow_a(1)),
                    Sign::Negative => (ctx.field.pow_a(1), ctx.field.pow_a(-1)),
                };
                for (h, c) in &state {
                    stats.crossings_resolved += 1;
                    push(ctx, h.clone(), ctx.field.mul(c, &c_id));
                    let (h2, looped) = hd_cap(h, *p);
                    let h3 = hd_cup(&h2, *p);
                    let mut c2 = ctx.field.mul(c, &c_turn);
                    if looped {
                        stats.loops_removed += 1;
                        c2 = ctx.field.mul(&c2, &delta);
                    }
                    push(ctx, h3, c2);
                }
            }
            RawSlice::Jw(p, color) => {
                let f = jones_wenzl(ctx, *color as usize)?;
                for (h, c) in &state {
                    for (tl, coeff) in f.terms() {
                        let (h2, loops) = hd_apply_tl(h, *p, tl);
                        let mut c2 = ctx.field.mul(c, coeff);
                        for _ in 0..loops {
                            stats.loops_removed += 1;
                            c2 = ctx.field.mul(&c2, &delta);
                        }
                        push(ctx, h2, c2);
                    }
                }
            }
        }
        state = next;
        stats.peak_terms = stats.peak_terms.max(state.len() as u64);
    }
    let value = state
        .remove(&Vec::new())
        .unwrap_or_else(|| ctx.field.zero());
    debug_assert!(state.is_empty(), "nonempty residual transfer state");
    ctx.eval_cache
        .lock()
        .unwrap()
        .insert(key, value.clone());
    Ok(EvalResult { value, stats })
}

// ---------------------------------------------------------------------------
// accelerated evaluation: ring and crossing rewrites
// ---------------------------------------------------------------------------

/// Cable crossings with at least this many strand crossings get replaced by
/// channel sums.
const CROSSING_REWRITE_THRESHOLD: usize = 4;

fn eval_rewrite(ctx: &Ctx, d: &GraphDiagram, opts: &EvalOpts, depth: usize) -> Result<EvalResult> {
    debug_assert!(d.framings.is_empty());
    let mut key = vec![1u8];
    key.extend(cache_key(d));
    if let Some(v) = ctx.eval_cache.lock().unwrap().get(&key) {
        return Ok(EvalResult {
            value: v.clone(),
            stats: EvalStats {
                cached: true,
                ..Default::default()
            },
        });
    }
    let hints = if d.hints.is_empty() {
        scan_rings(d)
    } else {
        d.hints.clone()
    };
    let mut stats = EvalStats::default();
    let value = if let Some((h, rest)) = hints.split_first() {
        let v = rewrite_ring(ctx, d, h, rest, opts, depth, &mut stats)?;
        stats.rewrites_applied += 1;
        v
    } else if let Some((idx, a, b)) = find_big_crossing(d) {
        let v = rewrite_crossing(ctx, d, idx, a, b, opts, depth, &mut stats)?;
        stats.rewrites_applied += 1;
        v
    } else {
        let res = eval_sweep(ctx, d, opts)?;
        stats = res.stats;
        res.value
    };
    ctx.eval_cache
        .lock()
        .unwrap()
        .insert(key, value.clone());
    Ok(EvalResult { value, stats })
}

/// Find the canonical ring pattern emitted by diagram builders:
/// `Cup(q, u)` followed by k crosses walking the left ring cable across a
/// block to its left and k crosses walking it back, then `Cap(q)`. All 2k
/// crossings must share one sign: that is a genuine clasp (opposite signs
/// on the two passes cancel by Reidemeister II and are not a ring).
fn scan_rings(d: &GraphDiagram) -> Vec<RingHint> {
    let mut out = Vec::new();
    let n = d.slices.len();
    for i in 0..n {
        let Slice::Cup { pos: q, color } = d.slices[i] else {
            continue;
        };
        // try every block width k
        'width: for k in 1..=q {
            let len = 2 * k + 2;
            if i + len > n {
                break;
            }
            // expected: crosses at q-1, q-2, .., q-k then q-k, .., q-1
            let mut sign0 = None;
            for j in 0..k {
                let Slice::Cross { pos, sign } = d.slices[i + 1 + j] else {
                    continue 'width;
                };
                if pos != q - 1 - j || *sign0.get_or_insert(sign) != sign {
                    continue 'width;
                }
            }
            for j in 0..k {
                let Slice::Cross { pos, sign } = d.slices[i + 1 + k + j] else {
                    continue 'width;
                };
                if pos != q - k + j || sign0 != Some(sign) {
                    continue 'width;
                }
            }
            let Slice::Cap { pos } = d.slices[i + 1 + 2 * k] else {
                continue 'width;
            };
            if pos != q {
                continue 'width;
            }
            out.push(RingHint {
                start: i,
                end: i + len,
                block: (q - k, q),
                color,
            });
            break;
        }
    }
    out
}

/// Block cable colors at the time a given slice index is reached.
fn colors_before_slice(d: &GraphDiagram, slice_idx: usize) -> Vec<u8> {
    let sub = GraphDiagram {
        r: d.r,
        slices: d.slices[..slice_idx].to_vec(),
        framings: Vec::new(),
        hints: Vec::new(),
    };
    let mut colors: Vec<u8> = Vec::new();
    for s in &sub.slices {
        match *s {
            Slice::Cup { pos, color } => {
                colors.insert(pos, color);
                colors.insert(pos, color);
            }
            Slice::Cap { pos } => {
                colors.drain(pos..pos + 2);
            }
            Slice::Cross { pos, .. } => colors.swap(pos, pos + 1),
            Slice::Vertex { pos, c, .. } => {
                colors.drain(pos..pos + 2);
                colors.insert(pos, c);
            }
            Slice::Proj { pos, color } => {
                let mut total = 0u32;
                let mut end = pos;
                while total < color as u32 {
                    total += colors[end] as u32;
                    end += 1;
                }
                colors.drain(pos..end);
                colors.insert(pos, color);
            }
        }
    }
    colors
}

/// Replace an encircling ring by its channel expansion: fuse the encircled
/// block into total channels m, weight by the encirclement eigenvalue
/// `H(u, m)/Delta(m)` and fusion-tree factors, and delete the ring.
fn rewrite_ring(
    ctx: &Ctx,
    d: &GraphDiagram,
    hint: &RingHint,
    remaining_hints: &[RingHint],
    opts: &EvalOpts,
    depth: usize,
    stats: &mut EvalStats,
) -> Result<CycloScalar> {
    let colors = colors_before_slice(d, hint.start);
    let (s, e) = hint.block;
    let block: Vec<u8> = colors[s..e].to_vec();
    debug_assert!(!block.is_empty());
    debug_assert!(remaining_hints
        .iter()
        .all(|h| h.start >= hint.end || h.end <= hint.start));
    let mut total = ctx.field.zero();
    // enumerate left-fold fusion trees of the block
    let mut trees: Vec<(Vec<u8>, CycloScalar)> = vec![(vec![block[0]], ctx.field.one())];
    for &c in &block[1..] {
        let mut next_trees = Vec::new();
        for (chain, coef) in &trees {
            let prev = *chain.last().unwrap();
            for m in 0..=(ctx.r() - 2) as u8 {
                if !recoupling::admissible(ctx.r(), prev, c, m) {
                    continue;
                }
                let th = recoupling::theta(ctx, prev, c, m)?;
                if th.is_zero() {
                    continue;
                }
                let dm = recoupling::delta(ctx, m)?;
                let w = ctx.field.div(&dm, &th)?;
                let mut chain2 = chain.clone();
                chain2.push(m);
                next_trees.push((chain2, ctx.field.mul(coef, &w)));
            }
        }
        trees = next_trees;
    }
    for (chain, coef) in trees {
        let m = *chain.last().unwrap();
        // encirclement eigenvalue of a u-colored 0-framed circle around an
        // m-cable
        let h_um = recoupling::hopf_value(ctx, hint.color, m)?;
        let dm = recoupling::delta(ctx, m)?;
        let eig = ctx.field.div(&h_um, &dm)?;
        let weight = ctx.field.mul(&coef, &eig);
        if weight.is_zero() {
            continue;
        }
        // gadget: fuse chain then split back
        let mut gadget: Vec<Slice> = Vec::new();
        for (j, &c) in block[1..].iter().enumerate() {
            gadget.push(Slice::Vertex {
                pos: s,
                a: chain[j],
                b: c,
                c: chain[j + 1],
            });
        }
        for j in (1..block.len()).rev() {
            // split chain[j] -> (chain[j-1], block[j])
            gadget.push(Slice::Cup {
                pos: s + 1,
                color: block[j],
            });
            gadget.push(Slice::Vertex {
                pos: s,
                a: chain[j],
                b: block[j],
                c: chain[j - 1],
            });
        }
        let mut slices = Vec::with_capacity(d.slices.len() - (hint.end - hint.start) + gadget.len());
        slices.extend_from_slice(&d.slices[..hint.start]);
        let gadget_len = gadget.len();
        slices.extend(gadget);
        slices.extend_from_slice(&d.slices[hint.end..]);
        let shift = |idx: usize| -> usize {
            if idx >= hint.end {
                idx + gadget_len - (hint.end - hint.start)
            } else {
                idx
            }
        };
        let hints2: Vec<RingHint> = remaining_hints
            .iter()
            .map(|h| RingHint {
                start: shift(h.start),
                end: shift(h.end),
                block: h.block,
                color: h.color,
            })
            .collect();
        let d2 = GraphDiagram {
            r: d.r,
            slices,
            framings: Vec::new(),
            hints: hints2,
        };
        let sub = eval_rewrite(ctx, &d2, opts, depth + 1)?;
        stats.crossings_resolved += sub.stats.crossings_resolved;
        stats.loops_removed += sub.stats.loops_removed;
        stats.rewrites_applied += sub.stats.rewrites_applied;
        stats.peak_terms = stats.peak_terms.max(sub.stats.peak_terms);
        total = ctx.field.add(&total, &ctx.field.mul(&weight, &sub.value));
    }
    Ok(total)
}

/// Find a cable crossing worth replacing by a channel sum.
fn find_big_crossing(d: &GraphDiagram) -> Option<(usize, u8, u8)> {
    let mut best: Option<(usize, u8, u8)> = None;
    for (idx, s) in d.slices.iter().enumerate() {
        if let Slice::Cross { pos, .. } = s {
            let colors = colors_before_slice(d, idx);
            let (a, b) = (colors[*pos], colors[*pos + 1]);
            let work = a as usize * b as usize;
            if work >= CROSSING_REWRITE_THRESHOLD {
                match best {
                    Some((_, ba, bb)) if (ba as usize * bb as usize) >= work => {}
                    _ => best = Some((idx, a, b)),
                }
            }
        }
    }
    best
}

fn rewrite_crossing(
    ctx: &Ctx,
    d: &GraphDiagram,
    idx: usize,
    a: u8,
    b: u8,
    opts: &EvalOpts,
    depth: usize,
    stats: &mut EvalStats,
) -> Result<CycloScalar> {
    let Slice::Cross { pos, sign } = d.slices[idx] else {
        unreachable!()
    };
    let mut total = ctx.field.zero();
    for c in 0..=(ctx.r() - 2) as u8 {
        if !recoupling::admissible(ctx.r(), a, b, c) {
            continue;
        }
        let th = recoupling::theta(ctx, a, b, c)?;
        if th.is_zero() {
            continue;
        }
        let dm = recoupling::delta(ctx, c)?;
        let lam = recoupling::half_twist(ctx, a, b, c, sign == Sign::Positive)?;
        let weight = ctx.field.mul(&ctx.field.div(&dm, &th)?, &lam);
        if weight.is_zero() {
            continue;
        }
        // fuse (a,b) -> c then split c -> (b,a)
        let gadget = vec![
            Slice::Vertex { pos, a, b, c },
            Slice::Cup {
                pos: pos + 1,
                color: a,
            },
            Slice::Vertex {
                pos,
                a: c,
                b: a,
                c: b,
            },
        ];
        let mut slices = Vec::with_capacity(d.slices.len() + gadget.len() - 1);
        slices.extend_from_slice(&d.slices[..idx]);
        let gadget_len = gadget.len();
        slices.extend(gadget);
        slices.extend_from_slice(&d.slices[idx + 1..]);
        let shift = |i: usize| -> usize {
            if i > idx {
                i + gadget_len - 1
            } else {
                i
            }
        };
        let hints2: Vec<RingHint> = d
            .hints
            .iter()
            .map(|h| RingHint {
                start: shift(h.start),
                end: shift(h.end),
                block: h.block,
                color: h.color,
            })
            .collect();
        let d2 = GraphDiagram {
            r: d.r,
            slices,
            framings: Vec::new(),
            hints: hints2,
        };
        let sub = eval_rewrite(ctx, &d2, opts, depth + 1)?;
        stats.crossings_resolved += sub.stats.crossings_resolved;
        stats.loops_removed += sub.stats.loops_removed;
        stats.rewrites_applied += sub.stats.rewrites_applied;
        stats.peak_terms = stats.peak_terms.max(sub.stats.peak_terms);
        total = ctx.field.add(&total, &ctx.field.mul(&weight, &sub.value));
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

/// Render in the diagram file format. Colored cups are lowered to bare
/// `CUP` lines plus `PROJ` lines; everything else is verbatim.
pub fn to_text(d: &GraphDiagram) -> String {
    let mut out = String::new();
    out.push_str(&format!("R {}\n", d.r));
    // track cable list to know raw positions of colored cups
    let mut colors: Vec<u8> = Vec::new();
    for s in &d.slices {
        match *s {
            Slice::Cup { pos, color } => {
                if color == 1 {
                    out.push_str(&format!("CUP {pos}\n"));
                } else {
                    for k in 0..color as usize {
                        out.push_str(&format!("CUP {}\n", pos + k));
                    }
                    if color >= 2 {
                        out.push_str(&format!("PROJ {pos} {color}\n"));
                        out.push_str(&format!("PROJ {} {color}\n", pos + 1));
                    }
                }
                colors.insert(pos, color);
                colors.insert(pos, color);
            }
            Slice::Cap { pos } => {
                out.push_str(&format!("CAP {pos}\n"));
                colors.drain(pos..pos + 2);
            }
            Slice::Cross { pos, sign } => {
                let tag = if sign == Sign::Positive { "X+" } else { "X-" };
                out.push_str(&format!("{tag} {pos}\n"));
                colors.swap(pos, pos + 1);
            }
            Slice::Vertex { pos, a, b, c } => {
                out.push_str(&format!("V {pos} {a} {b} {c}\n"));
                colors.drain(pos..pos + 2);
                colors.insert(pos, c);
            }
            Slice::Proj { pos, color } => {
                out.push_str(&format!("PROJ {pos} {color}\n"));
                let mut total = 0u32;
                let mut end = pos;
                while total < color as u32 {
                    total += colors[end] as u32;
                    end += 1;
                }
                colors.drain(pos..end);
                colors.insert(pos, color);
            }
        }
    }
    if !d.framings.is_empty() {
        let f: Vec<String> = d.framings.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("FRAMING {}\n", f.join(" ")));
    }
    out
}

/// Parse the diagram file format. `CUP i` creates a bare color-1 pair;
/// higher colors are introduced with `PROJ`. Lines starting with `#` are
/// comments.
pub fn from_text(text: &str) -> Result<GraphDiagram> {
    let mut r: Option<u32> = None;
    let mut slices = Vec::new();
    let mut framings = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap();
        let mut arg = |what: &str| -> Result<i64> {
            it.next()
                .ok_or_else(|| {
                    SkeinError::Parse(format!("line {}: missing {what}", lineno + 1))
                })?
                .parse::<i64>()
                .map_err(|e| SkeinError::Parse(format!("line {}: {e}", lineno + 1)))
        };
        match tag {
            "R" => r = Some(arg("level")? as u32),
            "CUP" => slices.push(Slice::Cup {
                pos: arg("position")? as usize,
                color: 1,
            }),
            "CAP" => slices.push(Slice::Cap {
                pos: arg("position")? as usize,
            }),
            "X+" => slices.push(Slice::Cross {
                pos: arg("position")? as usize,
                sign: Sign::Positive,
            }),
            "X-" => slices.push(Slice::Cross {
                pos: arg("position")? as usize,
                sign: Sign::Negative,
            }),
            "V" => slices.push(Slice::Vertex {
                pos: arg("position")? as usize,
                a: arg("a")? as u8,
                b: arg("b")? as u8,
                c: arg("c")? as u8,
            }),
            "PROJ" => slices.push(Slice::Proj {
                pos: arg("position")? as usize,
                color: arg("color")? as u8,
            }),
            "FRAMING" => {
                framings = line
                    .split_whitespace()
                    .skip(1)
                    .map(|t| {
                        t.parse::<i64>().map_err(|e| {
                            SkeinError::Parse(format!("line {}: {e}", lineno + 1))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
            other => {
                return Err(SkeinError::Parse(format!(
                    "line {}: unknown slice {other}",
                    lineno + 1
                )))
            }
        }
    }
    let r = r.ok_or_else(|| SkeinError::Parse("missing R header".into()))?;
    Ok(GraphDiagram {
        r,
        slices,
        framings,
        hints: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// small standard diagrams and the randomized corpus
// ---------------------------------------------------------------------------

/// Unknot colored `a` with the given framing.
pub fn colored_unknot(r: u32, a: u8, framing: i64) -> GraphDiagram {
    GraphDiagram {
        r,
        slices: vec![Slice::Cup { pos: 0, color: a }, Slice::Cap { pos: 0 }],
        framings: vec![framing],
        hints: Vec::new(),
    }
}

/// Theta network with edge colors (a, b, c).
pub fn theta_diagram(r: u32, a: u8, b: u8, c: u8) -> GraphDiagram {
    GraphDiagram {
        r,
        slices: vec![
            Slice::Cup { pos: 0, color: c },
            Slice::Cup { pos: 1, color: b },
            Slice::Vertex {
                pos: 0,
                a: c,
                b,
                c: a,
            },
            Slice::Vertex { pos: 0, a, b, c },
            Slice::Cap { pos: 0 },
        ],
        framings: Vec::new(),
        hints: Vec::new(),
    }
}

/// Tetrahedral network. Label convention: edges (a, b, e, c, d, f) with
/// vertices (a,b,e), (c,d,e), (a,d,f), (b,c,f).
pub fn tet_diagram(r: u32, labels: [u8; 6]) -> GraphDiagram {
    let [a, b, e, c, d, f] = labels;
    GraphDiagram {
        r,
        slices: vec![
            Slice::Cup { pos: 0, color: f },
            // split left f -> (a, d) at vertex (a,d,f)
            Slice::Cup { pos: 1, color: d },
            Slice::Vertex {
                pos: 0,
                a: f,
                b: d,
                c: a,
            },
            // split right f -> (c, b) at vertex (b,c,f)
            Slice::Cup { pos: 2, color: c },
            Slice::Vertex {
                pos: 3,
                a: c,
                b: f,
                c: b,
            },
            // now [a, d, c, b]; fuse (d, c) -> e at vertex (c,d,e)
            Slice::Vertex {
                pos: 1,
                a: d,
                b: c,
                c: e,
            },
            // now [a, e, b]; fuse (a, e) -> b at vertex (a,b,e)
            Slice::Vertex {
                pos: 0,
                a,
                b: e,
                c: b,
            },
            Slice::Cap { pos: 0 },
        ],
        framings: Vec::new(),
        hints: Vec::new(),
    }
}

/// The twisted theta used to solve half-twist channel coefficients:
/// split c -> (a, b), cross, fuse back to c.
pub fn twisted_theta_diagram(r: u32, a: u8, b: u8, c: u8, positive: bool) -> GraphDiagram {
    GraphDiagram {
        r,
        slices: vec![
            Slice::Cup { pos: 0, color: c },
            Slice::Cup { pos: 1, color: b },
            Slice::Vertex {
                pos: 0,
                a: c,
                b,
                c: a,
            },
            Slice::Cross {
                pos: 0,
                sign: if positive { Sign::Positive } else { Sign::Negative },
            },
            Slice::Vertex { pos: 0, a: b, b: a, c },
            Slice::Cap { pos: 0 },
        ],
        framings: Vec::new(),
        hints: Vec::new(),
    }
}

/// Random small closed colored diagram for the strategy-agreement corpus:
/// bounded crossings and colors, valid by construction.
pub fn random_small_diagram<R: Rng>(rng: &mut R, r: u32) -> GraphDiagram {
    let max_color = 3u8.min((r - 2) as u8);
    'retry: loop {
        let mut slices: Vec<Slice> = Vec::new();
        let mut colors: Vec<u8> = Vec::new();
        let mut crossings = 0usize;
        let n_ops = rng.gen_range(3..10);
        for _ in 0..n_ops {
            let choice = rng.gen_range(0..10);
            match choice {
                0..=3 => {
                    let color = rng.gen_range(1..=max_color);
                    let pos = rng.gen_range(0..=colors.len());
                    slices.push(Slice::Cup { pos, color });
                    colors.insert(pos, color);
                    colors.insert(pos, color);
                }
                4..=6 if colors.len() >= 2 && crossings < 6 => {
                    let pos = rng.gen_range(0..colors.len() - 1);
                    let work = colors[pos] as usize * colors[pos + 1] as usize;
                    if crossings + work > 6 {
                        continue;
                    }
                    crossings += work;
                    let sign = if rng.gen_bool(0.5) {
                        Sign::Positive
                    } else {
                        Sign::Negative
                    };
                    slices.push(Slice::Cross { pos, sign });
                    colors.swap(pos, pos + 1);
                }
                7..=8 if colors.len() >= 2 => {
                    let pos = rng.gen_range(0..colors.len() - 1);
                    let (a, b) = (colors[pos], colors[pos + 1]);
                    if a == b && rng.gen_bool(0.5) {
                        slices.push(Slice::Cap { pos });
                        colors.drain(pos..pos + 2);
                    } else {
                        let candidates: Vec<u8> = (0..=(r - 2) as u8)
                            .filter(|&c| recoupling::admissible(r, a, b, c))
                            .collect();
                        if candidates.is_empty() {
                            continue;
                        }
                        let c = candidates[rng.gen_range(0..candidates.len())];
                        slices.push(Slice::Vertex { pos, a, b, c });
                        colors.drain(pos..pos + 2);
                        colors.insert(pos, c);
                    }
                }
                _ => {}
            }
        }
        // close the diagram
        let mut guard = 0;
        while !colors.is_empty() {
            guard += 1;
            if guard > 100 {
                continue 'retry;
            }
            if colors.len() == 1 {
                if colors[0] == 0 {
                    // fuse a zero cable away with a cup and vertex
                    slices.push(Slice::Cup { pos: 1, color: 0 });
                    slices.push(Slice::Cap { pos: 0 });
                    colors.clear();
                } else {
                    continue 'retry;
                }
                break;
            }
            let pos = 0;
            let (a, b) = (colors[pos], colors[pos + 1]);
            if a == b {
                slices.push(Slice::Cap { pos });
                colors.drain(pos..pos + 2);
            } else {
                let c = a.abs_diff(b);
                if !recoupling::admissible(r, a, b, c) {
                    continue 'retry;
                }
                slices.push(Slice::Vertex { pos, a, b, c });
                colors.drain(pos..pos + 2);
                colors.insert(pos, c);
            }
        }
        let d0 = GraphDiagram {
            r,
            slices,
            framings: Vec::new(),
            hints: Vec::new(),
        };
        let mut defects = Vec::new();
        let Some(walk) = walk_word(&d0, &mut defects) else {
            continue 'retry;
        };
        if defects.iter().any(is_fatal) {
            continue 'retry;
        }
        let pure = pure_components(&walk).len();
        let framings = (0..pure).map(|_| rng.gen_range(-2..=2)).collect();
        return GraphDiagram { framings, ..d0 };
    }
}
