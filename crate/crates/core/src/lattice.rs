//! Geometry and combinatorics of the scaled acute triangular lattice, and
//! carving of simply connected subcomplexes inside a compact region.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::{Complex, Error, Result};

/// One of the six lattice directions, `1..=6`. Direction `k+3` is the
/// opposite of direction `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dir(pub(crate) u8);

impl Dir {
    pub const ALL: [Dir; 6] = [Dir(1), Dir(2), Dir(3), Dir(4), Dir(5), Dir(6)];

    /// Constructs a direction from a 1-based index; panics outside `1..=6`.
    pub fn new(k: u8) -> Dir {
        assert!((1..=6).contains(&k), "direction index {k} out of range");
        Dir(k)
    }

    /// 1-based index.
    pub fn index(self) -> u8 {
        self.0
    }

    /// 0-based index for array lookups.
    pub fn idx(self) -> usize {
        (self.0 - 1) as usize
    }

    /// Direction shifted cyclically by `offset` (indices mod 6).
    pub fn cycle(self, offset: i32) -> Dir {
        let k = (self.0 as i32 - 1 + offset).rem_euclid(6);
        Dir(k as u8 + 1)
    }

    /// The opposite direction `k+3`.
    pub fn opposite(self) -> Dir {
        self.cycle(3)
    }
}

/// Lattice vertex in integer coordinates: the vertex at
/// `eps * (n L_1 omega_1 + m L_2 omega_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub n: i64,
    pub m: i64,
}

impl VertexId {
    pub const ORIGIN: VertexId = VertexId { n: 0, m: 0 };

    pub fn new(n: i64, m: i64) -> VertexId {
        VertexId { n, m }
    }

    /// Integer offset realizing the translation along direction `k`.
    pub fn offset(k: Dir) -> (i64, i64) {
        // tau_3 = tau_2 - tau_1 by the closure relation L1 w1 - L2 w2 + L3 w3 = 0.
        match k.index() {
            1 => (1, 0),
            2 => (0, 1),
            3 => (-1, 1),
            4 => (-1, 0),
            5 => (0, -1),
            _ => (1, -1),
        }
    }

    /// The neighbor `tau_k v`.
    pub fn neighbor(self, k: Dir) -> VertexId {
        let (dn, dm) = Self::offset(k);
        VertexId::new(self.n + dn, self.m + dm)
    }
}

/// Shape data of the acute lattice triangle together with the mesh size:
/// angles, edge directions, edge lengths, reference cross-ratios and the
/// Laplacian constant.
#[derive(Debug, Clone)]
pub struct LatticeParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    lengths: [f64; 6],
    omegas: [Complex; 6],
    qs: [Complex; 6],
    /// `C_{alpha beta gamma} = (sin 2a + sin 2b + sin 2c)/2`.
    pub c_abg: f64,
}

impl LatticeParams {
    /// Builds the lattice parameters for a strictly acute triangle with
    /// angles `alpha`, `beta` (and `gamma = pi - alpha - beta`) at mesh
    /// size `epsilon`.
    pub fn new(alpha: f64, beta: f64, epsilon: f64) -> Result<LatticeParams> {
        let gamma = std::f64::consts::PI - alpha - beta;
        let half_pi = std::f64::consts::FRAC_PI_2;
        let acute = |x: f64| x > 0.0 && x < half_pi;
        if !(acute(alpha) && acute(beta) && acute(gamma)) {
            return Err(Error::NonAcuteAngles { alpha, beta, gamma });
        }
        if !(epsilon > 0.0) {
            return Err(Error::NonPositiveEpsilon(epsilon));
        }

        let l1 = alpha.sin();
        let l2 = gamma.sin();
        let l3 = beta.sin();
        let lengths = [l1, l2, l3, l1, l2, l3];
        let w1 = Complex::new(1.0, 0.0);
        let w2 = Complex::from_polar(1.0, beta);
        let w3 = Complex::from_polar(1.0, alpha + beta);
        let omegas = [w1, w2, w3, -w1, -w2, -w3];

        // Q_k = (w_{k-1} L_{k-1})^2 / (w_{k+1} L_{k+1})^2, indices mod 6.
        let mut qs = [Complex::new(0.0, 0.0); 6];
        for k in 0..6 {
            let prev = (k + 5) % 6;
            let next = (k + 1) % 6;
            let a = omegas[prev] * lengths[prev];
            let b = omegas[next] * lengths[next];
            qs[k] = (a * a) / (b * b);
        }

        let c_abg = ((2.0 * alpha).sin() + (2.0 * beta).sin() + (2.0 * gamma).sin()) / 2.0;

        Ok(LatticeParams {
            alpha,
            beta,
            gamma,
            epsilon,
            lengths,
            omegas,
            qs,
            c_abg,
        })
    }

    /// Same triangle shape at another mesh size.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<LatticeParams> {
        LatticeParams::new(self.alpha, self.beta, epsilon)
    }

    /// Unscaled edge length `L_k`.
    pub fn length(&self, k: Dir) -> f64 {
        self.lengths[k.idx()]
    }

    /// Unit edge direction `omega_k`.
    pub fn omega(&self, k: Dir) -> Complex {
        self.omegas[k.idx()]
    }

    /// Reference cross-ratio `Q_k` of the lattice.
    pub fn q(&self, k: Dir) -> Complex {
        self.qs[k.idx()]
    }

    /// The translation step `eps L_k omega_k`.
    pub fn step(&self, k: Dir) -> Complex {
        self.omegas[k.idx()] * (self.epsilon * self.lengths[k.idx()])
    }

    /// Position of a lattice vertex in the plane.
    pub fn position(&self, v: VertexId) -> Complex {
        self.step(Dir(1)) * (v.n as f64) + self.step(Dir(2)) * (v.m as f64)
    }

    /// The interior angle of the lattice triangle opposite to edges in
    /// direction `k` (alpha for k=1,4, gamma for k=2,5, beta for k=3,6).
    pub fn opposite_angle(&self, k: Dir) -> f64 {
        match k.idx() % 3 {
            0 => self.alpha,
            1 => self.gamma,
            _ => self.beta,
        }
    }
}

/// Compact region given as a membership predicate plus a bounding box.
///
/// Implementations are expected to describe compact sets whose boundary has
/// positive reach; this is not checked algorithmically. The built-in discs
/// and rectangles satisfy it.
pub trait Region {
    fn contains(&self, p: Complex) -> bool;
    /// `(xmin, xmax, ymin, ymax)` enclosing the region.
    fn bounding_box(&self) -> (f64, f64, f64, f64);
}

/// Closed disc `|p - center| <= radius`.
#[derive(Debug, Clone, Copy)]
pub struct Disc {
    pub center: Complex,
    pub radius: f64,
}

impl Region for Disc {
    fn contains(&self, p: Complex) -> bool {
        (p - self.center).norm() <= self.radius
    }
    fn bounding_box(&self) -> (f64, f64, f64, f64) {
        (
            self.center.re - self.radius,
            self.center.re + self.radius,
            self.center.im - self.radius,
            self.center.im + self.radius,
        )
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Region for Rect {
    fn contains(&self, p: Complex) -> bool {
        p.re >= self.xmin && p.re <= self.xmax && p.im >= self.ymin && p.im <= self.ymax
    }
    fn bounding_box(&self) -> (f64, f64, f64, f64) {
        (self.xmin, self.xmax, self.ymin, self.ymax)
    }
}

/// Lattice face, anchored at its lowest vertex. The two congruence classes:
/// `Up` is the triangle `[v, tau_1 v, tau_2 v]`, `Down` is `[v, tau_2 v,
/// tau_3 v]`; both are counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face {
    pub anchor: VertexId,
    pub up: bool,
}

impl Face {
    pub fn up(anchor: VertexId) -> Face {
        Face { anchor, up: true }
    }

    pub fn down(anchor: VertexId) -> Face {
        Face { anchor, up: false }
    }

    /// Vertices in counterclockwise order.
    pub fn vertices(&self) -> [VertexId; 3] {
        let v = self.anchor;
        if self.up {
            [v, v.neighbor(Dir(1)), v.neighbor(Dir(2))]
        } else {
            [v, v.neighbor(Dir(2)), v.neighbor(Dir(3))]
        }
    }

    /// The three undirected edges, each with sorted endpoints.
    pub fn edges(&self) -> [(VertexId, VertexId); 3] {
        let [a, b, c] = self.vertices();
        [sorted_edge(a, b), sorted_edge(b, c), sorted_edge(c, a)]
    }

    /// The three faces sharing an edge with `self`.
    pub fn edge_neighbors(&self) -> [Face; 3] {
        let v = self.anchor;
        if self.up {
            [
                Face::down(v.neighbor(Dir(6))),
                Face::down(v.neighbor(Dir(1))),
                Face::down(v),
            ]
        } else {
            [
                Face::up(v),
                Face::up(v.neighbor(Dir(3))),
                Face::up(v.neighbor(Dir(4))),
            ]
        }
    }

    /// The six faces of the flower around `v`, counterclockwise starting
    /// with the face spanned by directions 1 and 2.
    pub fn flower(v: VertexId) -> [Face; 6] {
        [
            Face::up(v),
            Face::down(v),
            Face::up(v.neighbor(Dir(4))),
            Face::down(v.neighbor(Dir(5))),
            Face::up(v.neighbor(Dir(5))),
            Face::down(v.neighbor(Dir(6))),
        ]
    }
}

fn sorted_edge(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A simply connected piece of the scaled lattice: vertices, oriented faces,
/// edges, boundary/interior classification and interiority depth.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Subcomplex {
    params: LatticeParams,
    vertices: Vec<VertexId>,
    vertex_index: HashMap<VertexId, usize>,
    faces: Vec<Face>,
    face_set: HashSet<Face>,
    edges: Vec<(VertexId, VertexId)>,
    interior: Vec<bool>,
    depth: Vec<u32>,
}

impl Subcomplex {
    /// Carves the maximal simply connected subcomplex inside `region`:
    /// the edge-connected component, through the face fan of the origin, of
    /// all lattice faces whose closed triangles lie in the region.
    ///
    /// For the convex built-in regions vertex containment of a triangle is
    /// equivalent to containment of the closed triangle; for general
    /// predicate regions the vertex test is an approximation.
    pub fn carve(params: &LatticeParams, region: &dyn Region) -> Result<Subcomplex> {
        let candidates = candidate_faces(params, region);

        // Seed: a face of the origin's flower.
        let seed = Face::flower(VertexId::ORIGIN)
            .into_iter()
            .find(|f| candidates.contains(f))
            .ok_or(Error::NoInteriorOrigin)?;

        // Closure under edge-adjacent growth inside the candidate set.
        let mut face_set: HashSet<Face> = HashSet::new();
        let mut queue = vec![seed];
        face_set.insert(seed);
        while let Some(f) = queue.pop() {
            for g in f.edge_neighbors() {
                if candidates.contains(&g) && face_set.insert(g) {
                    queue.push(g);
                }
            }
        }

        Subcomplex::from_faces(params.clone(), face_set)
    }

    /// Builds a subcomplex from an explicit face set, verifying the
    /// closed-disc property.
    pub fn from_faces(params: LatticeParams, face_set: HashSet<Face>) -> Result<Subcomplex> {
        let mut faces: Vec<Face> = face_set.iter().copied().collect();
        faces.sort();

        let mut vertex_set: BTreeSet<VertexId> = BTreeSet::new();
        let mut edge_count: BTreeMap<(VertexId, VertexId), u32> = BTreeMap::new();
        for f in &faces {
            for v in f.vertices() {
                vertex_set.insert(v);
            }
            for e in f.edges() {
                *edge_count.entry(e).or_insert(0) += 1;
            }
        }
        let vertices: Vec<VertexId> = vertex_set.into_iter().collect();
        let vertex_index: HashMap<VertexId, usize> =
            vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let edges: Vec<(VertexId, VertexId)> = edge_count.keys().copied().collect();

        // Euler characteristic of a closed disc.
        let (nv, ne, nf) = (vertices.len() as i64, edges.len() as i64, faces.len() as i64);
        if nv - ne + nf != 1 {
            return Err(Error::NotADisc(format!(
                "Euler characteristic V-E+F = {}",
                nv - ne + nf
            )));
        }

        // Boundary edges (incident to exactly one face) must form a single
        // closed cycle with every boundary vertex of boundary-degree two.
        let boundary_edges: Vec<(VertexId, VertexId)> = edge_count
            .iter()
            .filter(|(_, c)| **c == 1)
            .map(|(e, _)| *e)
            .collect();
        let mut bdy_adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for (a, b) in &boundary_edges {
            bdy_adj.entry(*a).or_default().push(*b);
            bdy_adj.entry(*b).or_default().push(*a);
        }
        if bdy_adj.values().any(|nbrs| nbrs.len() != 2) {
            return Err(Error::NotADisc("boundary vertex of degree != 2".into()));
        }
        if let Some((&start, _)) = bdy_adj.iter().next() {
            let mut visited = 1usize;
            let mut prev = start;
            let mut cur = bdy_adj[&start][0];
            while cur != start {
                let nbrs = &bdy_adj[&cur];
                let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
                prev = cur;
                cur = next;
                visited += 1;
                if visited > boundary_edges.len() {
                    break;
                }
            }
            if visited != bdy_adj.len() {
                return Err(Error::NotADisc("boundary is not a single cycle".into()));
            }
        }

        // Interior vertices carry their full face fan.
        let interior: Vec<bool> = vertices
            .iter()
            .map(|v| Face::flower(*v).iter().all(|f| face_set.contains(f)))
            .collect();

        // Interiority depth: W^(0) = all vertices, W^(l) = interior (in the
        // vertex-set sense) of W^(l-1); depth(v) = max l with v in W^(l).
        let mut depth = vec![0u32; vertices.len()];
        let mut current: HashSet<VertexId> = vertices.iter().copied().collect();
        let mut level = 0u32;
        while !current.is_empty() {
            level += 1;
            let next: HashSet<VertexId> = current
                .iter()
                .copied()
                .filter(|v| Dir::ALL.iter().all(|k| current.contains(&v.neighbor(*k))))
                .collect();
            for v in &next {
                depth[vertex_index[v]] = level;
            }
            if next.len() == current.len() {
                // Cannot happen for a finite complex; guard against looping.
                break;
            }
            current = next;
        }

        let sub = Subcomplex {
            params,
            vertices,
            vertex_index,
            faces,
            face_set,
            edges,
            interior,
            depth,
        };
        if !sub.is_interior(VertexId::ORIGIN) {
            return Err(Error::NoInteriorOrigin);
        }
        Ok(sub)
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    /// Vertices in lexicographic `(n, m)` order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertex_index.contains_key(&v)
    }

    pub fn contains_face(&self, f: &Face) -> bool {
        self.face_set.contains(f)
    }

    /// True if all six incident faces of `v` are present.
    pub fn is_interior(&self, v: VertexId) -> bool {
        self.vertex_index.get(&v).map_or(false, |i| self.interior[*i])
    }

    /// True if `[v, tau_k v]` is an interior edge (both adjacent faces present).
    pub fn is_interior_edge(&self, v: VertexId, k: Dir) -> bool {
        let (f1, f2) = edge_faces(v, k);
        self.face_set.contains(&f1) && self.face_set.contains(&f2)
    }

    /// Interiority depth of `v` (0 if absent).
    pub fn vertex_depth(&self, v: VertexId) -> u32 {
        self.vertex_index.get(&v).map_or(0, |i| self.depth[*i])
    }

    /// The set `W^(l)`: `l`-fold interior of the vertex set.
    pub fn interior_depth_set(&self, l: u32) -> Vec<VertexId> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| self.depth[*i] >= l)
            .map(|(_, v)| *v)
            .collect()
    }

    /// Interior vertices (full face fan present), in lexicographic order.
    pub fn interior_vertices(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| self.interior[*i])
            .map(|(_, v)| *v)
            .collect()
    }

    /// Boundary vertices, in lexicographic order.
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.interior[*i])
            .map(|(_, v)| *v)
            .collect()
    }

    /// Faces incident to `v` that are present, counterclockwise.
    pub fn incident_faces(&self, v: VertexId) -> Vec<Face> {
        Face::flower(v)
            .into_iter()
            .filter(|f| self.face_set.contains(f))
            .collect()
    }
}

/// The two faces adjacent to the lattice edge `[v, tau_k v]`: first the one
/// on the counterclockwise side (`[v, tau_k v, tau_{k+1} v]`), then the one
/// on the clockwise side (`[v, tau_{k-1} v, tau_k v]`).
pub fn edge_faces(v: VertexId, k: Dir) -> (Face, Face) {
    let canonical = |a: VertexId, b: VertexId, c: VertexId| -> Face {
        // Identify which of the two congruence classes the triple belongs to.
        for f in [
            Face::up(a),
            Face::up(b),
            Face::up(c),
            Face::down(a),
            Face::down(b),
            Face::down(c),
        ] {
            let vs = f.vertices();
            let mut sorted = vs;
            sorted.sort();
            let mut inp = [a, b, c];
            inp.sort();
            if sorted == inp {
                return f;
            }
        }
        unreachable!("triple is not a lattice face")
    };
    let ccw = canonical(v, v.neighbor(k), v.neighbor(k.cycle(1)));
    let cw = canonical(v, v.neighbor(k.cycle(-1)), v.neighbor(k));
    (ccw, cw)
}

fn candidate_faces(params: &LatticeParams, region: &dyn Region) -> HashSet<Face> {
    let (xmin, xmax, ymin, ymax) = region.bounding_box();
    let eps = params.epsilon;
    let l1 = params.length(Dir(1));
    let l2 = params.length(Dir(2));
    let beta = params.beta;

    // p(n, m) = eps (n l1 + m l2 e^{i beta}); invert with a safety margin.
    let m_lo = (ymin / (eps * l2 * beta.sin())).floor() as i64 - 2;
    let m_hi = (ymax / (eps * l2 * beta.sin())).ceil() as i64 + 2;
    let mut set = HashSet::new();
    for m in m_lo..=m_hi {
        let x_off = m as f64 * eps * l2 * beta.cos();
        let n_lo = ((xmin - x_off) / (eps * l1)).floor() as i64 - 2;
        let n_hi = ((xmax - x_off) / (eps * l1)).ceil() as i64 + 2;
        for n in n_lo..=n_hi {
            let v = VertexId::new(n, m);
            for f in [Face::up(v), Face::down(v)] {
                if f.vertices()
                    .iter()
                    .all(|w| region.contains(params.position(*w)))
                {
                    set.insert(f);
                }
            }
        }
    }
    set
}
