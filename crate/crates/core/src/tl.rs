//! Temperley-Lieb algebras `TL_n` over the exact scalar field, with the
//! Jones-Wenzl idempotents `f^(a)`.
//!
//! A diagram on n strands is a noncrossing perfect matching of 2n boundary
//! points: 0..n-1 along the bottom (left to right) and n..2n-1 along the top
//! (left to right). Diagrams never carry closed loops; loops produced by
//! composition are absorbed immediately as factors of
//! `delta = -A^2 - A^{-2}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::recoupling;
use crate::scalars::{Ctx, CycloScalar};
use crate::Result;
use crate::SkeinError;

/// Noncrossing perfect matching of the 2n boundary points of a rectangle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TLDiagram {
    n: u8,
    partner: Vec<u8>,
}

impl TLDiagram {
    pub fn strands(&self) -> usize {
        self.n as usize
    }

    pub fn partner(&self, p: usize) -> usize {
        self.partner[p] as usize
    }

    pub fn identity(n: usize) -> Self {
        let mut partner = vec![0u8; 2 * n];
        for i in 0..n {
            partner[i] = (i + n) as u8;
            partner[i + n] = i as u8;
        }
        TLDiagram {
            n: n as u8,
            partner,
        }
    }

    /// Hook generator `e_i` (0-based): bottom pair (i, i+1), top pair
    /// (n+i, n+i+1), all other strands vertical.
    pub fn hook(n: usize, i: usize) -> Self {
        assert!(i + 1 < n);
        let mut d = TLDiagram::identity(n);
        d.partner[i] = (i + 1) as u8;
        d.partner[i + 1] = i as u8;
        d.partner[n + i] = (n + i + 1) as u8;
        d.partner[n + i + 1] = (n + i) as u8;
        d
    }

    /// Tensor with m identity strands on the right.
    pub fn tensor_id(&self, m: usize) -> Self {
        let n = self.n as usize;
        let nn = n + m;
        let remap = |p: usize| -> usize {
            if p < n {
                p
            } else {
                p + m
            }
        };
        let mut partner = vec![0u8; 2 * nn];
        for p in 0..2 * n {
            partner[remap(p)] = remap(self.partner(p)) as u8;
        }
        for k in 0..m {
            partner[n + k] = (nn + n + k) as u8;
            partner[nn + n + k] = (n + k) as u8;
        }
        TLDiagram {
            n: nn as u8,
            partner,
        }
    }

    /// Balanced-parenthesis style rendering for debugging: bottom points as
    /// listed pairs.
    pub fn render(&self) -> String {
        let pairs: Vec<String> = (0..2 * self.n as usize)
            .filter(|&p| self.partner(p) > p)
            .map(|p| format!("({},{})", p, self.partner(p)))
            .collect();
        format!("TL{}[{}]", self.n, pairs.join(""))
    }

    /// Compose self (below) with other (above); returns the resulting
    /// diagram and the number of closed loops absorbed.
    pub fn compose_raw(&self, other: &TLDiagram) -> Result<(TLDiagram, usize)> {
        let n = self.n as usize;
        if other.n != self.n {
            return Err(SkeinError::StrandMismatch {
                left: n,
                right: other.n as usize,
            });
        }
        // Point universe: 0..n (result bottom), n..2n (middle), 2n..3n (result top).
        // self: bottom 0..n, top -> middle; other: bottom -> middle, top -> 2n..3n.
        let mut link_a = vec![usize::MAX; 3 * n]; // edge from self's matching
        let mut link_b = vec![usize::MAX; 3 * n]; // edge from other's matching
        for p in 0..2 * n {
            let q = self.partner(p);
            if q < p {
                continue;
            }
            // self's points: bottom i -> i, top i -> n + (i - n) + n = i + ... top stays n..2n
            link_a[p] = q;
            link_a[q] = p;
        }
        for p in 0..2 * n {
            let q = other.partner(p);
            if q < p {
                continue;
            }
            // other's points: bottom i -> middle n + i, top i -> n + i + n
            let mp = p + n;
            let mq = q + n;
            link_b[mp] = mq;
            link_b[mq] = mp;
        }
        let mut visited = vec![false; 3 * n];
        let boundary = |p: usize| p < n || p >= 2 * n;
        let mut partner = vec![0u8; 2 * n];
        for start in (0..n).chain(2 * n..3 * n) {
            if visited[start] {
                continue;
            }
            // walk: alternate between link_a and link_b edges
            let mut cur = start;
            visited[cur] = true;
            // first step: bottom points use link_a, top points use link_b
            let mut use_a = cur < n;
            loop {
                let next = if use_a { link_a[cur] } else { link_b[cur] };
                debug_assert_ne!(next, usize::MAX);
                visited[next] = true;
                if boundary(next) {
                    let rp = if next < n { next } else { next - n };
                    let rs = if start < n { start } else { start - n };
                    partner[rs] = rp as u8;
                    partner[rp] = rs as u8;
                    break;
                }
                cur = next;
                use_a = !use_a;
            }
        }
        // unvisited middle points form closed loops; each middle point has
        // exactly one edge from each matching, so a cycle visits it once
        let mut loops = 0;
        for start in n..2 * n {
            if visited[start] {
                continue;
            }
            let mut cur = start;
            let mut use_a = true;
            loop {
                visited[cur] = true;
                cur = if use_a { link_a[cur] } else { link_b[cur] };
                use_a = !use_a;
                if cur == start {
                    break;
                }
            }
            loops += 1;
        }
        Ok((
            TLDiagram {
                n: self.n,
                partner,
            },
            loops,
        ))
    }

    /// Loops formed by the trace closure (bottom i joined to top i around).
    pub fn closure_loops(&self) -> usize {
        let n = self.n as usize;
        if n == 0 {
            return 0;
        }
        let mut visited = vec![false; 2 * n];
        let mut loops = 0;
        for start in 0..2 * n {
            if visited[start] {
                continue;
            }
            loops += 1;
            let mut cur = start;
            let mut via_matching = true;
            loop {
                visited[cur] = true;
                cur = if via_matching {
                    self.partner(cur)
                } else if cur < n {
                    cur + n
                } else {
                    cur - n
                };
                via_matching = !via_matching;
                if cur == start && via_matching {
                    break;
                }
            }
        }
        loops
    }
}

/// Enumerate all noncrossing perfect matchings on n strands (Catalan(n)).
pub fn enumerate_diagrams(n: usize) -> Vec<TLDiagram> {
    // Circular boundary order: bottom left-to-right then top right-to-left.
    let m = 2 * n;
    let circle_to_rect = |p: usize| -> usize {
        if p < n {
            p
        } else {
            3 * n - 1 - p
        }
    };
    fn matchings(points: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if points.is_empty() {
            return vec![Vec::new()];
        }
        let first = points[0];
        let mut out = Vec::new();
        for k in (1..points.len()).step_by(2) {
            for inner in matchings(&points[1..k]) {
                for outer in matchings(&points[k + 1..]) {
                    let mut pairing = vec![(first, points[k])];
                    pairing.extend_from_slice(&inner);
                    pairing.extend_from_slice(&outer);
                    out.push(pairing);
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    for pairing in matchings(&(0..m).collect::<Vec<_>>()) {
        let mut partner = vec![0u8; m];
        for (a, b) in pairing {
            let ra = circle_to_rect(a);
            let rb = circle_to_rect(b);
            partner[ra] = rb as u8;
            partner[rb] = ra as u8;
        }
        out.push(TLDiagram {
            n: n as u8,
            partner,
        });
    }
    out.sort();
    out.dedup();
    out
}

/// Formal linear combination of TL diagrams on a common strand count.
#[derive(Debug, Clone, PartialEq)]
pub struct TLElement {
    n: usize,
    terms: BTreeMap<TLDiagram, CycloScalar>,
}

impl TLElement {
    pub fn zero(n: usize) -> Self {
        TLElement {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_diagram(ctx: &Ctx, d: TLDiagram) -> Self {
        let n = d.strands();
        let mut terms = BTreeMap::new();
        terms.insert(d, ctx.field.one());
        TLElement { n, terms }
    }

    pub fn identity(ctx: &Ctx, n: usize) -> Self {
        Self::from_diagram(ctx, TLDiagram::identity(n))
    }

    pub fn hook(ctx: &Ctx, n: usize, i: usize) -> Self {
        Self::from_diagram(ctx, TLDiagram::hook(n, i))
    }

    pub fn strands(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TLDiagram, &CycloScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, d: &TLDiagram) -> Option<&CycloScalar> {
        self.terms.get(d)
    }

    fn add_term(&mut self, ctx: &Ctx, d: TLDiagram, c: CycloScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(d) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = ctx.field.add(e.get(), &c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, ctx: &Ctx, other: &TLElement) -> Result<TLElement> {
        if self.n != other.n {
            return Err(SkeinError::StrandMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(ctx, d.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, ctx: &Ctx, c: &CycloScalar) -> TLElement {
        if c.is_zero() {
            return TLElement::zero(self.n);
        }
        let mut out = TLElement::zero(self.n);
        for (d, x) in &self.terms {
            out.terms.insert(d.clone(), ctx.field.mul(x, c));
        }
        out
    }

    pub fn tensor_id(&self, m: usize) -> TLElement {
        let mut out = TLElement::zero(self.n + m);
        for (d, c) in &self.terms {
            out.terms.insert(d.tensor_id(m), c.clone());
        }
        out
    }
}

/// Vertical stacking `x` below `y`; closed loops contribute `delta` each.
pub fn tl_compose(ctx: &Ctx, x: &TLElement, y: &TLElement) -> Result<TLElement> {
    if x.n != y.n {
        return Err(SkeinError::StrandMismatch {
            left: x.n,
            right: y.n,
        });
    }
    let delta = ctx.field.delta_loop();
    let mut out = TLElement::zero(x.n);
    for (dx, cx) in &x.terms {
        for (dy, cy) in &y.terms {
            let (d, loops) = dx.compose_raw(dy)?;
            let mut c = ctx.field.mul(cx, cy);
            for _ in 0..loops {
                c = ctx.field.mul(&c, &delta);
            }
            out.add_term(ctx, d, c);
        }
    }
    Ok(out)
}

/// Trace closure in the 3-sphere: every resulting loop contributes `delta`.
pub fn markov_trace(ctx: &Ctx, x: &TLElement) -> CycloScalar {
    let delta = ctx.field.delta_loop();
    let mut acc = ctx.field.zero();
    for (d, c) in &x.terms {
        let loops = d.closure_loops();
        let mut t = c.clone();
        for _ in 0..loops {
            t = ctx.field.mul(&t, &delta);
        }
        acc = ctx.field.add(&acc, &t);
    }
    acc
}

/// The Jones-Wenzl idempotent `f^(a)`, `0 <= a <= r-1`, by the Wenzl
/// recursion `f^(k+1) = f^(k) x 1 - (D_{k-1}/D_k) (f^(k) x 1) e_k (f^(k) x 1)`
/// with `D_k = Delta(k)`. Memoized per (a, r).
pub fn jones_wenzl(ctx: &Ctx, a: usize) -> Result<Arc<TLElement>> {
    let r = ctx.r() as usize;
    if a > r - 1 {
        return Err(SkeinError::OutOfRange {
            what: "Jones-Wenzl color",
            value: a as i64,
            max: (r - 1) as i64,
        });
    }
    if let Some(f) = ctx.jw_cache.lock().unwrap().get(&(a as u8)) {
        return Ok(f.clone());
    }
    let mut cur = Arc::new(TLElement::identity(ctx, 0)); // f^(0)
    for k in 0..a {
        // build f^(k+1) from f^(k)
        let fk1 = cur.tensor_id(1);
        let next = if k == 0 {
            fk1 // f^(1) = single strand
        } else {
            let dk = recoupling::delta_unchecked(ctx, k as i64);
            let dkm1 = recoupling::delta_unchecked(ctx, k as i64 - 1);
            if dk.is_zero() {
                return Err(SkeinError::DegenerateDenominator { stage: k });
            }
            let coef = ctx.field.div(&dkm1, &dk)?;
            // hook on the last two strands of TL_{k+1}
            let ek = TLElement::hook(ctx, k + 1, k - 1);
            let t1 = tl_compose(ctx, &fk1, &ek)?;
            let t2 = tl_compose(ctx, &t1, &fk1)?;
            let sub = t2.scale(ctx, &coef);
            let neg = sub.scale(ctx, &ctx.field.int(-1));
            fk1.add(ctx, &neg)?
        };
        cur = Arc::new(next);
    }
    ctx.jw_cache
        .lock()
        .unwrap()
        .insert(a as u8, cur.clone());
    Ok(cur)
}
