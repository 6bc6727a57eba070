//! Surface models: gluing words, flat square models, the two-disc sphere, and
//! the involutions and projections relating them.
//!
//! Square coordinates are rationals in units of π, so `[0, 2)` covers a full
//! side and every map below is exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::{q, qi, rem, Affine2, Q};
use crate::pin2::{AngleForm, O2PathElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("unknown surface `{0}`")]
    UnknownFamily(String),
    #[error("{0} is already orientable")]
    AlreadyOrientable(String),
    #[error("{0} has no boundary")]
    Closed(String),
    #[error("{0} carries only combinatorial data")]
    FamilyOnly(String),
    #[error("no model for {0}")]
    Unsupported(String),
    #[error("the sphere model only lifts along the equator")]
    OffEquator,
    #[error("linear part of {0} is not an isometry")]
    NotAnIsometry(String),
    #[error("malformed gluing word: {0}")]
    BadWord(String),
}

/// One side of a polygon: edge index and exponent ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Side {
    pub edge: usize,
    pub inverse: bool,
}

impl Side {
    pub fn exponent(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// Polygons with paired sides. Sides on the boundary occur once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingWord {
    names: Vec<String>,
    faces: Vec<Vec<Side>>,
    boundary: BTreeSet<usize>,
}

impl GluingWord {
    /// Single polygon from `(letter, exponent)` pairs; `boundary` lists letters left unglued.
    pub fn single(sides: &[(&str, i64)], boundary: &[&str]) -> Result<Self, SurfaceError> {
        let mut names: Vec<String> = Vec::new();
        let mut face = Vec::new();
        for &(name, exp) in sides {
            if exp != 1 && exp != -1 {
                return Err(SurfaceError::BadWord(format!("exponent {exp} on {name}")));
            }
            let edge = match names.iter().position(|n| n == name) {
                Some(i) => i,
                None => {
                    names.push(name.to_string());
                    names.len() - 1
                }
            };
            face.push(Side { edge, inverse: exp < 0 });
        }
        let boundary = boundary
            .iter()
            .map(|b| names.iter().position(|n| n == b).ok_or_else(|| SurfaceError::BadWord(format!("{b} not in word"))))
            .collect::<Result<_, _>>()?;
        Self::from_parts(names, vec![face], boundary)
    }

    pub fn from_parts(
        names: Vec<String>,
        faces: Vec<Vec<Side>>,
        boundary: BTreeSet<usize>,
    ) -> Result<Self, SurfaceError> {
        let word = GluingWord { names, faces, boundary };
        let mut count = vec![0usize; word.names.len()];
        for side in word.faces.iter().flatten() {
            count[side.edge] += 1;
        }
        for (e, &c) in count.iter().enumerate() {
            let want = if word.boundary.contains(&e) { 1 } else { 2 };
            if c != want {
                return Err(SurfaceError::BadWord(format!("{} occurs {c} times, expected {want}", word.names[e])));
            }
        }
        Ok(word)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn faces(&self) -> &[Vec<Side>] {
        &self.faces
    }

    pub fn edge_count(&self) -> usize {
        self.names.len()
    }

    pub fn is_boundary(&self, edge: usize) -> bool {
        self.boundary.contains(&edge)
    }

    pub fn boundary_edges(&self) -> &BTreeSet<usize> {
        &self.boundary
    }

    /// `(face, side)` positions of each occurrence of `edge`, in word order.
    pub fn occurrences(&self, edge: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            for (i, s) in face.iter().enumerate() {
                if s.edge == edge {
                    out.push((f, i));
                }
            }
        }
        out
    }

    /// Letters glued with matching exponents: crossing them flips orientation.
    pub fn reversing_edges(&self) -> BTreeSet<usize> {
        (0..self.edge_count())
            .filter(|&e| {
                let occ = self.occurrences(e);
                occ.len() == 2 && {
                    let a = self.faces[occ[0].0][occ[0].1];
                    let b = self.faces[occ[1].0][occ[1].1];
                    a.inverse == b.inverse
                }
            })
            .collect()
    }

    /// Vertex classes: `(count, corner -> vertex)` where corner `(f, i)` starts side `i` of face `f`.
    pub fn vertices(&self) -> (usize, BTreeMap<(usize, usize), usize>) {
        let corners: Vec<(usize, usize)> =
            self.faces.iter().enumerate().flat_map(|(f, face)| (0..face.len()).map(move |i| (f, i))).collect();
        let index: BTreeMap<(usize, usize), usize> = corners.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let mut parent: Vec<usize> = (0..corners.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        let ends = |f: usize, i: usize| {
            let n = self.faces[f].len();
            let (a, b) = ((f, i), (f, (i + 1) % n));
            if self.faces[f][i].inverse {
                (b, a)
            } else {
                (a, b)
            }
        };
        for e in 0..self.edge_count() {
            let occ = self.occurrences(e);
            if occ.len() == 2 {
                let (s0, t0) = ends(occ[0].0, occ[0].1);
                let (s1, t1) = ends(occ[1].0, occ[1].1);
                for (x, y) in [(s0, s1), (t0, t1)] {
                    let (rx, ry) = (find(&mut parent, index[&x]), find(&mut parent, index[&y]));
                    parent[rx] = ry;
                }
            }
        }
        let mut label = BTreeMap::new();
        let mut out = BTreeMap::new();
        for (k, &c) in corners.iter().enumerate() {
            let r = find(&mut parent, k);
            let next = label.len();
            let v = *label.entry(r).or_insert(next);
            out.insert(c, v);
        }
        (label.len(), out)
    }

    /// `(start, end)` vertices of each edge.
    pub fn edge_endpoints(&self) -> Vec<(usize, usize)> {
        let (_, corner) = self.vertices();
        (0..self.edge_count())
            .map(|e| {
                let (f, i) = self.occurrences(e)[0];
                let n = self.faces[f].len();
                let a = corner[&(f, i)];
                let b = corner[&(f, (i + 1) % n)];
                if self.faces[f][i].inverse {
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let (v, _) = self.vertices();
        v as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Number of boundary circles, from the cycle structure of boundary edges.
    pub fn boundary_components(&self) -> usize {
        let ends = self.edge_endpoints();
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        fn find(p: &mut BTreeMap<usize, usize>, x: usize) -> usize {
            let mut r = x;
            while let Some(&n) = p.get(&r) {
                if n == r {
                    break;
                }
                r = n;
            }
            r
        }
        for &e in &self.boundary {
            let (a, b) = ends[e];
            parent.entry(a).or_insert(a);
            parent.entry(b).or_insert(b);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent.insert(ra, rb);
        }
        let roots: BTreeSet<usize> =
            parent.keys().copied().collect::<Vec<_>>().into_iter().map(|v| find(&mut parent, v)).collect();
        roots.len()
    }

    /// Every letter appears with both exponents within the complex.
    pub fn is_orientable(&self) -> bool {
        self.reversing_edges().is_empty()
    }

    /// The orientation double cover as a cell complex: two copies of every cell,
    /// the second polygon mirrored, with sides of orientation-reversing letters
    /// crossing between sheets.
    pub fn orientation_cover(&self) -> CellularCover {
        let reversing = self.reversing_edges();
        let mut names = Vec::new();
        for n in &self.names {
            names.push(format!("{n}0"));
            names.push(format!("{n}1"));
        }
        let copy = |e: usize, s: usize| 2 * e + s;
        let mut faces = Vec::new();
        let mut face_base = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            for sheet in 0..2 {
                let mut sides = Vec::new();
                for (i, side) in face.iter().enumerate() {
                    let occ = self.occurrences(side.edge);
                    let which = occ.iter().position(|&o| o == (f, i)).unwrap();
                    let s = if reversing.contains(&side.edge) { (sheet + which) % 2 } else { sheet };
                    sides.push(Side { edge: copy(side.edge, s), inverse: side.inverse });
                }
                if sheet == 1 {
                    sides.reverse();
                    for s in &mut sides {
                        s.inverse = !s.inverse;
                    }
                }
                faces.push(sides);
                face_base.push((f, if sheet == 0 { 1 } else { -1 }));
            }
        }
        let boundary = self.boundary.iter().flat_map(|&e| [copy(e, 0), copy(e, 1)]).collect();
        let word = GluingWord::from_parts(names, faces, boundary).expect("cover of a valid word is valid");
        let edge_base = (0..2 * self.edge_count()).map(|e| e / 2).collect();
        let deck_edge = (0..2 * self.edge_count()).map(|e| e ^ 1).collect();
        let deck_face = (0..2 * self.faces.len()).map(|f| f ^ 1).collect();
        let (_, cover_corner) = word.vertices();
        let (nv, _) = word.vertices();
        let (_, base_corner) = self.vertices();
        let mut vertex_base = vec![usize::MAX; nv];
        for (cf, face) in word.faces.iter().enumerate() {
            let (bf, sign) = face_base[cf];
            let k = face.len();
            for i in 0..k {
                // mirrored copy reads corners backwards
                let bi = if sign > 0 { i } else { (k - i) % k };
                vertex_base[cover_corner[&(cf, i)]] = base_corner[&(bf, bi)];
            }
        }
        CellularCover { word, vertex_base, edge_base, face_base, deck_edge, deck_face }
    }
}

impl fmt::Display for GluingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let faces: Vec<String> = self
            .faces
            .iter()
            .map(|face| {
                face.iter()
                    .map(|s| if s.inverse { format!("{}⁻¹", self.names[s.edge]) } else { self.names[s.edge].clone() })
                    .collect::<String>()
            })
            .collect();
        write!(f, "{}", faces.join(" | "))
    }
}

/// Orientation double cover of a gluing word with its cellular projection and deck map.
#[derive(Debug, Clone)]
pub struct CellularCover {
    pub word: GluingWord,
    /// Base vertex under each cover vertex.
    pub vertex_base: Vec<usize>,
    /// Base edge under each cover edge (orientation preserved).
    pub edge_base: Vec<usize>,
    /// Base face and orientation sign under each cover face.
    pub face_base: Vec<(usize, i64)>,
    pub deck_edge: Vec<usize>,
    pub deck_face: Vec<usize>,
}

/// Edge identifications of the square `[0, 2π]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum SquareGluing {
    /// `(0,y) ~ (2π,y)`, `(x,0) ~ (x,2π)`.
    Torus,
    /// `(0,y) ~ (2π,y)`, `(x,0) ~ (2π-x,2π)`.
    Klein,
    /// `(0,y) ~ (2π,y)`; the lines `y = 0, 2π` are boundary.
    Cylinder,
    /// `(0,y) ~ (2π,2π-y)`; the lines `y = 0, 2π` are boundary.
    Moebius,
}

impl SquareGluing {
    /// Canonical representative with `x` in `[0, 2)` (and `y` in `[0, 2)` when periodic),
    /// or `None` outside a bounded strip.
    pub fn normalize(self, p: [Q; 2]) -> Option<[Q; 2]> {
        let two = qi(2);
        let [x, y] = p;
        match self {
            SquareGluing::Torus => Some([rem(x, two), rem(y, two)]),
            SquareGluing::Klein => {
                let k = (y / two).floor();
                let y = y - k * two;
                let odd = !rem(k, two).is_zero();
                let x = if odd { two - x } else { x };
                Some([rem(x, two), y])
            }
            SquareGluing::Cylinder => (y >= Q::zero() && y <= two).then(|| [rem(x, two), y]),
            SquareGluing::Moebius => {
                let k = (x / two).floor();
                let x = x - k * two;
                let odd = !rem(k, two).is_zero();
                let y = if odd { two - y } else { y };
                (y >= Q::zero() && y <= two).then_some([x, y])
            }
        }
    }

    pub fn has_boundary(self) -> bool {
        matches!(self, SquareGluing::Cylinder | SquareGluing::Moebius)
    }

    /// `n x n` grid of canonical points (`n + 1` rows when the strip has boundary).
    pub fn grid(self, n: i64) -> Vec<[Q; 2]> {
        let rows = if self.has_boundary() { n + 1 } else { n };
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..rows {
                out.push([q(2 * i, n), q(2 * j, n)]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Family {
    Sphere,
    ProjectivePlane,
    Torus,
    Klein,
    Cylinder,
    Moebius,
    /// Closed orientable surface of genus g.
    Orientable(u32),
    /// Connected sum of Σ_g with RP² (`crosscaps = 1`) or with K² (`crosscaps = 2`).
    NonOrientable {
        genus: u32,
        crosscaps: u32,
    },
}

impl Family {
    pub fn parse(name: &str) -> Result<Family, SurfaceError> {
        let bad = || SurfaceError::UnknownFamily(name.to_string());
        let s = name.trim().to_ascii_lowercase();
        let args = |inner: &str| -> Result<Vec<u32>, SurfaceError> {
            inner.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad())).collect()
        };
        let fam = match s.as_str() {
            "s2" => Family::Sphere,
            "rp2" => Family::ProjectivePlane,
            "t2" => Family::Torus,
            "k2" => Family::Klein,
            "cyl" => Family::Cylinder,
            "moebius" | "m2" => Family::Moebius,
            _ => {
                if let Some(inner) = s.strip_prefix("sigma(").and_then(|r| r.strip_suffix(')')) {
                    match args(inner)?.as_slice() {
                        [g] => Family::Orientable(*g),
                        _ => return Err(bad()),
                    }
                } else if let Some(inner) = s.strip_prefix("n(").and_then(|r| r.strip_suffix(')')) {
                    match args(inner)?.as_slice() {
                        [g, k] if *k == 1 || *k == 2 => Family::NonOrientable { genus: *g, crosscaps: *k },
                        _ => return Err(bad()),
                    }
                } else {
                    return Err(bad());
                }
            }
        };
        Ok(fam.canonical())
    }

    /// Collapses small-genus family members onto the named base surfaces.
    pub fn canonical(self) -> Family {
        match self {
            Family::Orientable(0) => Family::Sphere,
            Family::Orientable(1) => Family::Torus,
            Family::NonOrientable { genus: 0, crosscaps: 1 } => Family::ProjectivePlane,
            Family::NonOrientable { genus: 0, crosscaps: 2 } => Family::Klein,
            other => other,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Family::Sphere => "S2".into(),
            Family::ProjectivePlane => "RP2".into(),
            Family::Torus => "T2".into(),
            Family::Klein => "K2".into(),
            Family::Cylinder => "Cyl".into(),
            Family::Moebius => "M2".into(),
            Family::Orientable(g) => format!("Sigma_{g}"),
            Family::NonOrientable { genus, crosscaps } => format!("N_{{{genus},{crosscaps}}}"),
        }
    }

    pub fn cli_name(&self) -> String {
        match self {
            Family::Sphere => "s2".into(),
            Family::ProjectivePlane => "rp2".into(),
            Family::Torus => "t2".into(),
            Family::Klein => "k2".into(),
            Family::Cylinder => "cyl".into(),
            Family::Moebius => "moebius".into(),
            Family::Orientable(g) => format!("sigma({g})"),
            Family::NonOrientable { genus, crosscaps } => format!("n({genus},{crosscaps})"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Geometry {
    FlatSquare(SquareGluing),
    /// Two discs glued along `|z| = 1` by `w = -1/z`.
    TwoDisc,
    /// Quotient of the two-disc sphere by `z -> -1/conj(z)`.
    TwoDiscQuotient,
    FamilyOnly,
}

#[derive(Debug, Clone)]
pub struct SurfaceModel {
    pub family: Family,
    pub geometry: Geometry,
    pub word: GluingWord,
    pub orientable: bool,
    pub boundary_components: usize,
}

fn orientable_part(g: u32) -> Vec<(String, i64)> {
    let mut out = Vec::new();
    for i in 1..=g {
        let (a, b) = (format!("a{i}"), format!("b{i}"));
        out.extend([(a.clone(), 1), (b.clone(), 1), (a, -1), (b, -1)]);
    }
    out
}

fn word_of(sides: Vec<(String, i64)>, boundary: &[&str]) -> GluingWord {
    let borrowed: Vec<(&str, i64)> = sides.iter().map(|(n, e)| (n.as_str(), *e)).collect();
    GluingWord::single(&borrowed, boundary).expect("family words are valid")
}

fn named(sides: &[(&str, i64)], boundary: &[&str]) -> GluingWord {
    GluingWord::single(sides, boundary).expect("family words are valid")
}

impl SurfaceModel {
    pub fn build(family: Family) -> Result<SurfaceModel, SurfaceError> {
        let family = family.canonical();
        let (geometry, word) = match family {
            Family::Sphere => (Geometry::TwoDisc, named(&[("a", 1), ("a", -1)], &[])),
            Family::ProjectivePlane => (Geometry::TwoDiscQuotient, named(&[("x", 1), ("x", 1)], &[])),
            Family::Torus => {
                (Geometry::FlatSquare(SquareGluing::Torus), named(&[("a", 1), ("b", 1), ("a", -1), ("b", -1)], &[]))
            }
            Family::Klein => {
                (Geometry::FlatSquare(SquareGluing::Klein), named(&[("a", 1), ("b", 1), ("a", 1), ("b", -1)], &[]))
            }
            Family::Cylinder => (
                Geometry::FlatSquare(SquareGluing::Cylinder),
                named(&[("c", 1), ("a", 1), ("d", -1), ("a", -1)], &["c", "d"]),
            ),
            Family::Moebius => (
                Geometry::FlatSquare(SquareGluing::Moebius),
                named(&[("c", 1), ("a", 1), ("d", -1), ("a", 1)], &["c", "d"]),
            ),
            Family::Orientable(g) => (Geometry::FamilyOnly, word_of(orientable_part(g), &[])),
            Family::NonOrientable { genus, crosscaps } => {
                let mut sides = orientable_part(genus);
                if crosscaps == 1 {
                    sides.extend([("x".to_string(), 1), ("x".to_string(), 1)]);
                } else {
                    sides.extend([
                        ("x".to_string(), 1),
                        ("y".to_string(), 1),
                        ("x".to_string(), 1),
                        ("y".to_string(), -1),
                    ]);
                }
                (Geometry::FamilyOnly, word_of(sides, &[]))
            }
        };
        Ok(SurfaceModel {
            family,
            geometry,
            orientable: word.is_orientable(),
            boundary_components: word.boundary_components(),
            word,
        })
    }

    pub fn parse(name: &str) -> Result<SurfaceModel, SurfaceError> {
        Self::build(Family::parse(name)?)
    }

    pub fn name(&self) -> String {
        self.family.label()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.word.euler_characteristic()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_components == 0
    }

    pub fn square(&self) -> Option<SquareGluing> {
        match self.geometry {
            Geometry::FlatSquare(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_geometric(&self) -> bool {
        self.geometry != Geometry::FamilyOnly
    }
}

/// How an involution acts.
#[derive(Debug, Clone, PartialEq)]
pub enum InvolutionMap {
    /// `p -> M p + c` on a square model.
    Affine { map: Affine2, domain: SquareGluing },
    /// `z -> -1/conj(z)` on the two-disc sphere; on the equator `θ -> θ + π`.
    Antipodal,
    /// Deck transformation of a cellular cover (edge and face permutations).
    Cellular { edges: Vec<usize>, faces: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    pub name: String,
    pub map: InvolutionMap,
    pub fixed_point_free: bool,
    pub orientation_reversing: bool,
}

/// Grid resolution used to decide fixed points of affine involutions.
pub const FIXED_POINT_GRID: i64 = 64;

impl Involution {
    pub fn affine(name: &str, map: Affine2, domain: SquareGluing) -> Self {
        let mut inv = Involution {
            name: name.to_string(),
            map: InvolutionMap::Affine { map, domain },
            fixed_point_free: false,
            orientation_reversing: map.det() < Q::zero(),
        };
        inv.fixed_point_free = inv.fixed_points_on_grid(FIXED_POINT_GRID).is_empty();
        inv
    }

    pub fn antipodal() -> Self {
        Involution {
            name: "tau".into(),
            map: InvolutionMap::Antipodal,
            fixed_point_free: true,
            orientation_reversing: true,
        }
    }

    pub fn affine_map(&self) -> Option<(Affine2, SquareGluing)> {
        match &self.map {
            InvolutionMap::Affine { map, domain } => Some((*map, *domain)),
            _ => None,
        }
    }

    /// Image of a square point, normalized in the domain.
    pub fn apply(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        let (map, domain) = self.affine_map()?;
        domain.normalize(map.apply(domain.normalize(p)?))
    }

    pub fn fixed_points_on_grid(&self, n: i64) -> Vec<[Q; 2]> {
        match &self.map {
            InvolutionMap::Affine { domain, .. } => {
                domain.grid(n).into_iter().filter(|&p| self.apply(p) == Some(p)).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `τ(τ(p)) = p` on every grid point (exact).
    pub fn is_involution_on_grid(&self, n: i64) -> bool {
        match &self.map {
            InvolutionMap::Affine { domain, .. } => {
                domain.grid(n).into_iter().all(|p| self.apply(p).and_then(|r| self.apply(r)) == Some(p))
            }
            InvolutionMap::Antipodal => (0..n).all(|i| {
                let t = q(2 * i, n);
                rem(t + qi(2), qi(2)) == t
            }),
            InvolutionMap::Cellular { edges, faces } => {
                edges.iter().enumerate().all(|(i, &j)| edges[j] == i)
                    && faces.iter().enumerate().all(|(i, &j)| faces[j] == i)
            }
        }
    }

    /// Images of edge-midpoint representatives agree, so the formula is well defined on the quotient.
    pub fn respects_identifications(&self, n: i64) -> bool {
        let Some((map, domain)) = self.affine_map() else { return true };
        let two = qi(2);
        let mut pairs = Vec::new();
        for i in 0..=n {
            let t = q(2 * i, n);
            match domain {
                SquareGluing::Torus => {
                    pairs.push(([Q::zero(), t], [two, t]));
                    pairs.push(([t, Q::zero()], [t, two]));
                }
                SquareGluing::Klein => {
                    pairs.push(([Q::zero(), t], [two, t]));
                    pairs.push(([t, Q::zero()], [two - t, two]));
                }
                SquareGluing::Cylinder => pairs.push(([Q::zero(), t], [two, t])),
                SquareGluing::Moebius => pairs.push(([Q::zero(), t], [two, two - t])),
            }
        }
        pairs.into_iter().all(|(a, b)| domain.normalize(map.apply(a)) == domain.normalize(map.apply(b)))
    }
}

/// Differential of `τ` as an O(2)-valued function of the coordinates.
pub fn jacobian_path(tau: &Involution) -> Result<O2PathElement, SurfaceError> {
    match &tau.map {
        InvolutionMap::Affine { map, .. } => signed_permutation_to_o2(map, &tau.name),
        InvolutionMap::Antipodal => Ok(O2PathElement::reflection(AngleForm::new(Q::one(), Q::zero(), q(1, 2)))),
        InvolutionMap::Cellular { .. } => Err(SurfaceError::FamilyOnly(tau.name.clone())),
    }
}

/// Point of a model, for `jacobian`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfacePoint {
    Square([Q; 2]),
    /// Chart-0 point of the two-disc sphere in polar form `r·e^{iθ}`, θ in units of π.
    Disc {
        radius: Q,
        angle: Q,
    },
}

/// Differential of `τ` at a point: constant on flat models; on the sphere
/// equator the reflection fixing the line through `(cos θ, sin θ)`.
pub fn jacobian(tau: &Involution, point: SurfacePoint) -> Result<O2PathElement, SurfaceError> {
    let path = jacobian_path(tau)?;
    match (&tau.map, point) {
        (InvolutionMap::Antipodal, SurfacePoint::Disc { radius, angle }) => {
            if !radius.is_one() {
                return Err(SurfaceError::OffEquator);
            }
            let a = path.angle();
            Ok(O2PathElement::reflection(AngleForm::constant(a.theta * angle + a.pi)))
        }
        (InvolutionMap::Antipodal, _) => Err(SurfaceError::OffEquator),
        _ => Ok(path),
    }
}

fn signed_permutation_to_o2(map: &Affine2, name: &str) -> Result<O2PathElement, SurfaceError> {
    if !map.is_signed_permutation() {
        return Err(SurfaceError::NotAnIsometry(name.to_string()));
    }
    let m = map.m;
    let i = |x: Q| *x.numer();
    // reflection(t) has matrix [[-cos 2t, -sin 2t], [-sin 2t, cos 2t]]
    let candidates: [(O2PathElement, [[i64; 2]; 2]); 8] = [
        (O2PathElement::rotation(AngleForm::constant(qi(0))), [[1, 0], [0, 1]]),
        (O2PathElement::rotation(AngleForm::constant(q(1, 2))), [[0, -1], [1, 0]]),
        (O2PathElement::rotation(AngleForm::constant(qi(1))), [[-1, 0], [0, -1]]),
        (O2PathElement::rotation(AngleForm::constant(q(3, 2))), [[0, 1], [-1, 0]]),
        (O2PathElement::reflection(AngleForm::constant(qi(0))), [[-1, 0], [0, 1]]),
        (O2PathElement::reflection(AngleForm::constant(q(1, 2))), [[1, 0], [0, -1]]),
        (O2PathElement::reflection(AngleForm::constant(q(1, 4))), [[0, -1], [-1, 0]]),
        (O2PathElement::reflection(AngleForm::constant(q(3, 4))), [[0, 1], [1, 0]]),
    ];
    let want = [[i(m[0][0]), i(m[0][1])], [i(m[1][0]), i(m[1][1])]];
    candidates
        .into_iter()
        .find(|(_, mat)| *mat == want)
        .map(|(g, _)| g)
        .ok_or_else(|| SurfaceError::NotAnIsometry(name.to_string()))
}

/// Projection of a double cover.
#[derive(Debug, Clone)]
pub enum Projection {
    /// Square-to-square map given by a function pointer on canonical points.
    Square { from: SquareGluing, to: SquareGluing, map: fn([Q; 2]) -> [Q; 2] },
    /// Two-disc sphere onto its antipodal quotient.
    Antipodal,
    /// Cellular projection of a mechanically built cover.
    Cellular(Box<CellularCover>),
}

impl Projection {
    pub fn apply(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        match self {
            Projection::Square { from, to, map } => to.normalize(map(from.normalize(p)?)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DoubleCover {
    pub base: SurfaceModel,
    pub cover: SurfaceModel,
    pub deck: Involution,
    pub projection: Projection,
}

fn klein_projection(p: [Q; 2]) -> [Q; 2] {
    [p[1], qi(2) * p[0]]
}

fn moebius_projection(p: [Q; 2]) -> [Q; 2] {
    [qi(2) * p[0], p[1]]
}

/// The deck involution of T² over K²: `(x, y) -> (x + π, -y)`.
pub fn klein_deck() -> Involution {
    Involution::affine("tau", Affine2::new([[1, 0], [0, -1]], [qi(1), qi(0)]), SquareGluing::Torus)
}

pub fn tau1() -> Involution {
    Involution::affine("tau1", Affine2::new([[1, 0], [0, -1]], [qi(1), qi(2)]), SquareGluing::Cylinder)
}

pub fn tau2() -> Involution {
    Involution::affine("tau2", Affine2::new([[-1, 1], [0, 1]], [qi(0), qi(0)]), SquareGluing::Klein)
}

pub fn tau3() -> Involution {
    Involution::affine("tau3", Affine2::new([[-1, 0], [0, 1]], [qi(0), qi(0)]), SquareGluing::Torus)
}

pub fn tau4() -> Involution {
    Involution::affine("tau4", Affine2::new([[-1, 0], [0, 1]], [qi(1), qi(1)]), SquareGluing::Torus)
}

pub fn tau34() -> Involution {
    let (t3, _) = tau3().affine_map().unwrap();
    let (t4, _) = tau4().affine_map().unwrap();
    Involution::affine("tau34", t3.compose(&t4), SquareGluing::Torus)
}

pub fn orientation_double_cover(x: &SurfaceModel) -> Result<DoubleCover, SurfaceError> {
    if x.orientable {
        return Err(SurfaceError::AlreadyOrientable(x.name()));
    }
    let cover_of = |fam| SurfaceModel::build(fam).expect("base families build");
    Ok(match x.family {
        Family::Klein => DoubleCover {
            base: x.clone(),
            cover: cover_of(Family::Torus),
            deck: klein_deck(),
            projection: Projection::Square {
                from: SquareGluing::Torus,
                to: SquareGluing::Klein,
                map: klein_projection,
            },
        },
        Family::ProjectivePlane => DoubleCover {
            base: x.clone(),
            cover: cover_of(Family::Sphere),
            deck: Involution::antipodal(),
            projection: Projection::Antipodal,
        },
        Family::Moebius => DoubleCover {
            base: x.clone(),
            cover: cover_of(Family::Cylinder),
            deck: tau1(),
            projection: Projection::Square {
                from: SquareGluing::Cylinder,
                to: SquareGluing::Moebius,
                map: moebius_projection,
            },
        },
        Family::NonOrientable { genus, crosscaps } => {
            let cell = x.word.orientation_cover();
            let cover_genus = 2 * genus + crosscaps - 1;
            let cover = SurfaceModel {
                family: Family::Orientable(cover_genus),
                geometry: Geometry::FamilyOnly,
                orientable: cell.word.is_orientable(),
                boundary_components: cell.word.boundary_components(),
                word: cell.word.clone(),
            };
            DoubleCover {
                base: x.clone(),
                cover,
                deck: Involution {
                    name: "tau".into(),
                    map: InvolutionMap::Cellular { edges: cell.deck_edge.clone(), faces: cell.deck_face.clone() },
                    fixed_point_free: true,
                    orientation_reversing: true,
                },
                projection: Projection::Cellular(Box::new(cell)),
            }
        }
        _ => return Err(SurfaceError::Unsupported(x.name())),
    })
}

impl DoubleCover {
    /// On a grid of the cover: `π∘τ = π`, and two grid points share an image only when
    /// they are related by `τ`.
    pub fn check_quotient(&self, n: i64) -> bool {
        let Some(from) = self.cover.square() else { return true };
        let points = from.grid(n);
        let mut fibres: BTreeMap<[Q; 2], Vec<[Q; 2]>> = BTreeMap::new();
        for &p in &points {
            let (Some(img), Some(tp)) = (self.projection.apply(p), self.deck.apply(p)) else { return false };
            if self.projection.apply(tp) != Some(img) {
                return false;
            }
            fibres.entry(img).or_default().push(p);
        }
        fibres.values().all(|ps| ps.iter().all(|&p| ps.iter().all(|&r| r == p || self.deck.apply(p) == Some(r))))
    }
}

/// Double of a surface with boundary, with the embedding of the original as one half.
#[derive(Debug, Clone)]
pub struct Doubled {
    pub base: SurfaceModel,
    pub double: SurfaceModel,
    pub reflection: Involution,
    pub embedding: fn([Q; 2]) -> [Q; 2],
}

fn cylinder_embedding(p: [Q; 2]) -> [Q; 2] {
    [p[1] / qi(2), p[0]]
}

fn moebius_embedding(p: [Q; 2]) -> [Q; 2] {
    [(p[0] + p[1]) / qi(2), p[0]]
}

pub fn double(x: &SurfaceModel) -> Result<Doubled, SurfaceError> {
    if x.is_closed() {
        return Err(SurfaceError::Closed(x.name()));
    }
    type Embedding = fn([Q; 2]) -> [Q; 2];
    let (fam, reflection, embedding): (Family, Involution, Embedding) = match x.family {
        Family::Cylinder => (Family::Torus, tau3(), cylinder_embedding),
        Family::Moebius => (Family::Klein, tau2(), moebius_embedding),
        _ => return Err(SurfaceError::Unsupported(x.name())),
    };
    Ok(Doubled { base: x.clone(), double: SurfaceModel::build(fam)?, reflection, embedding })
}

impl Doubled {
    pub fn embed(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        let from = self.base.square()?;
        let to = self.double.square()?;
        to.normalize((self.embedding)(from.normalize(p)?))
    }

    /// The reflection fixes exactly the image of the boundary, checked on a grid of the double.
    pub fn fixes_exactly_boundary(&self, n: i64) -> bool {
        let (Some(from), Some(to)) = (self.base.square(), self.double.square()) else { return false };
        // the embedding may halve coordinates, so sample the boundary twice as finely
        let boundary: BTreeSet<[Q; 2]> = from
            .grid(2 * n)
            .into_iter()
            .filter(|p| p[1].is_zero() || p[1] == qi(2))
            .filter_map(|p| self.embed(p))
            .collect();
        let boundary_fixed = boundary.iter().all(|&p| self.reflection.apply(p) == Some(p));
        let fixed_on_boundary =
            to.grid(n).into_iter().all(|p| self.reflection.apply(p) != Some(p) || boundary.contains(&p));
        boundary_fixed && fixed_on_boundary
    }

    /// `χ(X^d) = 2χ(X) - χ(∂X)`; boundary circles have `χ = 0`.
    pub fn euler_additive(&self) -> bool {
        self.double.euler_characteristic() == 2 * self.base.euler_characteristic()
    }
}

/// The five-surface diagram over the Möbius strip: `X = M²`, `X̃ = Cyl`,
/// `X^d = K²`, `X̃^d = T²` and `X' = T²/τ34`.
#[derive(Debug, Clone)]
pub struct CoverDiagram {
    pub x: SurfaceModel,
    pub x_cover: SurfaceModel,
    pub x_double: SurfaceModel,
    pub cover_double: SurfaceModel,
    pub tau1: Involution,
    pub tau2: Involution,
    pub tau3: Involution,
    pub tau4: Involution,
    pub tau34: Involution,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub points: usize,
    pub failures: usize,
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        self.failures == 0 && self.points > 0
    }
}

pub fn cover_diagram(x: &SurfaceModel) -> Result<CoverDiagram, SurfaceError> {
    if x.family != Family::Moebius {
        return Err(SurfaceError::Unsupported(x.name()));
    }
    Ok(CoverDiagram {
        x: x.clone(),
        x_cover: SurfaceModel::build(Family::Cylinder)?,
        x_double: SurfaceModel::build(Family::Klein)?,
        cover_double: SurfaceModel::build(Family::Torus)?,
        tau1: tau1(),
        tau2: tau2(),
        tau3: tau3(),
        tau4: tau4(),
        tau34: tau34(),
    })
}

impl CoverDiagram {
    /// `π1: Cyl -> M²`.
    pub fn pi1(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        SquareGluing::Moebius.normalize(moebius_projection(SquareGluing::Cylinder.normalize(p)?))
    }

    /// `π2: K² -> M²`, folding along the fixed circle of τ2.
    pub fn pi2(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        let [x, y] = SquareGluing::Klein.normalize(p)?;
        let s = rem(x - y / qi(2), qi(2));
        let v = if s <= Q::one() { qi(2) * s } else { qi(4) - qi(2) * s };
        SquareGluing::Moebius.normalize([y, v])
    }

    /// `π3: T² -> Cyl`, folding along the fixed circles of τ3.
    pub fn pi3(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        let [x, y] = SquareGluing::Torus.normalize(p)?;
        let folded = if x <= Q::one() { x } else { qi(2) - x };
        SquareGluing::Cylinder.normalize([y, qi(2) * folded])
    }

    /// `π4: T² -> K²`, the quotient by τ4.
    pub fn pi4(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        let [x, y] = SquareGluing::Torus.normalize(p)?;
        let image = if y < Q::one() { [x + y, qi(2) * y] } else { [y - x, qi(2) * y - qi(2)] };
        SquareGluing::Klein.normalize(image)
    }

    /// Embedding `Cyl -> T²` as the half `0 ≤ x ≤ π`.
    pub fn cover_embedding(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        SquareGluing::Torus.normalize(cylinder_embedding(SquareGluing::Cylinder.normalize(p)?))
    }

    /// Embedding `M² -> K²` as a fundamental domain of τ2.
    pub fn base_embedding(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        SquareGluing::Klein.normalize(moebius_embedding(SquareGluing::Moebius.normalize(p)?))
    }

    /// `π34: T² -> X'`, as the orbit representative with `x` in `[0, π)`.
    pub fn pi34(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        let p = SquareGluing::Torus.normalize(p)?;
        if p[0] < Q::one() {
            Some(p)
        } else {
            self.tau34.apply(p)
        }
    }

    /// `τ'` on `X'`, induced by τ3.
    pub fn tau_prime(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        self.pi34(self.tau3.apply(p)?)
    }

    /// `π': X' -> M²`.
    pub fn pi_prime(&self, p: [Q; 2]) -> Option<[Q; 2]> {
        self.pi1(self.pi3(p)?)
    }

    /// Every relation of the diagram on an `n x n` grid (exact rational arithmetic).
    pub fn verify(&self, n: i64) -> Vec<RelationCheck> {
        let torus = SquareGluing::Torus.grid(n);
        let cyl = SquareGluing::Cylinder.grid(n);
        let check = |name: &str, points: &[[Q; 2]], ok: &dyn Fn([Q; 2]) -> bool| RelationCheck {
            relation: name.to_string(),
            points: points.len(),
            failures: points.iter().filter(|&&p| !ok(p)).count(),
        };
        let (t3, t4, t34) = (&self.tau3, &self.tau4, &self.tau34);
        let compose = |f: &Involution, g: &Involution, p| g.apply(p).and_then(|r| f.apply(r));
        vec![
            check("pi1∘pi3 = pi2∘pi4", &torus, &|p| {
                self.pi3(p).and_then(|r| self.pi1(r)) == self.pi4(p).and_then(|r| self.pi2(r))
            }),
            check("pi4|Cyl = pi1", &cyl, &|p| {
                self.cover_embedding(p).and_then(|r| self.pi4(r)) == self.pi1(p).and_then(|r| self.base_embedding(r))
            }),
            check("tau4|Cyl = tau1", &cyl, &|p| {
                self.cover_embedding(p).and_then(|r| t4.apply(r))
                    == self.tau1.apply(p).and_then(|r| self.cover_embedding(r))
            }),
            check("tau3∘tau4 = tau4∘tau3", &torus, &|p| compose(t3, t4, p) == compose(t4, t3, p)),
            check("tau34 fixed-point free", &torus, &|p| t34.apply(p) != Some(p)),
            check("pi3∘tau3 = pi3", &torus, &|p| t3.apply(p).and_then(|r| self.pi3(r)) == self.pi3(p)),
            check("pi4∘tau4 = pi4", &torus, &|p| t4.apply(p).and_then(|r| self.pi4(r)) == self.pi4(p)),
            check("pi1∘tau1 = pi1", &cyl, &|p| self.tau1.apply(p).and_then(|r| self.pi1(r)) == self.pi1(p)),
            check("pi2∘tau2 = pi2", &SquareGluing::Klein.grid(n), &|p| {
                self.tau2.apply(p).and_then(|r| self.pi2(r)) == self.pi2(p)
            }),
            check("pi4∘tau3 = tau2∘pi4", &torus, &|p| {
                t3.apply(p).and_then(|r| self.pi4(r)) == self.pi4(p).and_then(|r| self.tau2.apply(r))
            }),
            check("tau3, tau4 induce tau'", &torus, &|p| {
                t3.apply(p).and_then(|r| self.pi34(r)) == t4.apply(p).and_then(|r| self.pi34(r))
            }),
            check("pi'∘tau' = pi'", &torus, &|p| {
                self.pi34(p).and_then(|r| self.tau_prime(r)).and_then(|r| self.pi_prime(r))
                    == self.pi34(p).and_then(|r| self.pi_prime(r))
            }),
            check("pi'∘pi34 = pi1∘pi3", &torus, &|p| {
                self.pi34(p).and_then(|r| self.pi_prime(r)) == self.pi3(p).and_then(|r| self.pi1(r))
            }),
        ]
    }

    /// `X' = T²/τ34` is closed and orientable: τ34 preserves orientation.
    pub fn quotient_is_oriented(&self) -> bool {
        !self.tau34.orientation_reversing && self.tau34.fixed_point_free && self.cover_double.is_closed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_and_euler_characteristics() {
        let cases = [
            ("s2", 2, true, 0),
            ("rp2", 1, false, 0),
            ("t2", 0, true, 0),
            ("k2", 0, false, 0),
            ("cyl", 0, true, 2),
            ("moebius", 0, false, 1),
            ("sigma(3)", -4, true, 0),
            ("n(2,1)", -3, false, 0),
            ("n(2,2)", -4, false, 0),
        ];
        for (name, chi, orientable, boundary) in cases {
            let m = SurfaceModel::parse(name).unwrap();
            assert_eq!(m.euler_characteristic(), chi, "{name}");
            assert_eq!(m.orientable, orientable, "{name}");
            assert_eq!(m.boundary_components, boundary, "{name}");
        }
        assert_eq!(SurfaceModel::parse("k2").unwrap().word.to_string(), "abab⁻¹");
        assert!(SurfaceModel::parse("n(1,3)").is_err());
        assert!(SurfaceModel::parse("banana").is_err());
    }

    #[test]
    fn klein_identifications() {
        let k = SquareGluing::Klein;
        assert_eq!(k.normalize([q(1, 2), qi(0)]), k.normalize([q(3, 2), qi(2)]));
        assert_eq!(k.normalize([qi(0), q(1, 3)]), k.normalize([qi(2), q(1, 3)]));
        let m = SquareGluing::Moebius;
        assert_eq!(m.normalize([qi(0), q(1, 2)]), m.normalize([qi(2), q(3, 2)]));
        assert_eq!(SquareGluing::Cylinder.normalize([qi(0), q(5, 2)]), None);
    }

    #[test]
    fn involutions_are_exact() {
        for t in [klein_deck(), tau1(), tau2(), tau3(), tau4(), tau34()] {
            assert!(t.is_involution_on_grid(64), "{}", t.name);
            assert!(t.respects_identifications(64), "{}", t.name);
        }
        assert!(klein_deck().fixed_point_free && klein_deck().orientation_reversing);
        assert!(tau1().fixed_point_free);
        assert!(!tau2().fixed_point_free);
        assert!(!tau3().fixed_point_free);
        assert!(tau4().fixed_point_free);
        assert!(tau34().fixed_point_free && !tau34().orientation_reversing);
    }

    #[test]
    fn jacobians() {
        assert_eq!(jacobian(&tau4(), SurfacePoint::Square([qi(0), qi(0)])).unwrap(), O2PathElement::j1());
        assert_eq!(jacobian(&klein_deck(), SurfacePoint::Square([qi(0), qi(0)])).unwrap(), O2PathElement::j2());
        let eq = jacobian(&Involution::antipodal(), SurfacePoint::Disc { radius: qi(1), angle: q(1, 3) }).unwrap();
        assert_eq!(eq, O2PathElement::reflection(AngleForm::constant(q(1, 3) + q(1, 2))));
        assert!(jacobian(&Involution::antipodal(), SurfacePoint::Disc { radius: q(1, 2), angle: qi(0) }).is_err());
        assert!(matches!(jacobian_path(&tau2()), Err(SurfaceError::NotAnIsometry(_))));
    }

    #[test]
    fn double_covers() {
        let k = SurfaceModel::parse("k2").unwrap();
        let cover = orientation_double_cover(&k).unwrap();
        assert_eq!(cover.cover.family, Family::Torus);
        assert!(cover.check_quotient(32));
        let m = SurfaceModel::parse("moebius").unwrap();
        assert!(orientation_double_cover(&m).unwrap().check_quotient(32));
        assert!(orientation_double_cover(&SurfaceModel::parse("t2").unwrap()).is_err());
        let n = SurfaceModel::parse("n(2,1)").unwrap();
        let c = orientation_double_cover(&n).unwrap();
        assert!(c.cover.orientable);
        assert_eq!(c.cover.euler_characteristic(), 2 * n.euler_characteristic());
        assert_eq!(c.cover.family, Family::Orientable(4));
    }

    #[test]
    fn doubles() {
        let cyl = double(&SurfaceModel::parse("cyl").unwrap()).unwrap();
        assert_eq!(cyl.double.family, Family::Torus);
        assert!(cyl.fixes_exactly_boundary(32));
        assert!(cyl.euler_additive());
        let m = double(&SurfaceModel::parse("moebius").unwrap()).unwrap();
        assert_eq!(m.double.family, Family::Klein);
        assert!(m.fixes_exactly_boundary(32));
        assert!(double(&SurfaceModel::parse("t2").unwrap()).is_err());
    }

    #[test]
    fn moebius_diagram_relations() {
        let d = cover_diagram(&SurfaceModel::parse("moebius").unwrap()).unwrap();
        for r in d.verify(16) {
            assert!(r.holds(), "{r:?}");
        }
        assert!(d.quotient_is_oriented());
    }
}
