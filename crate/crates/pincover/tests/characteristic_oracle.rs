use std::collections::{BTreeMap, BTreeSet, VecDeque};

use pincover::characteristic::{obstructions, w1, w1_cup_w1, w2};
use pincover::homology::induced_maps;
use pincover::surface::{orientation_double_cover, Family, SurfaceModel};

type Tri = [usize; 3];

/// Triangulated closed surface with a mod-2 cup product computed simplex by simplex.
struct Triangulation {
    triangles: Vec<Tri>,
}

impl Triangulation {
    fn new(mut triangles: Vec<Tri>) -> Self {
        for t in &mut triangles {
            t.sort();
            assert!(t[0] < t[1] && t[1] < t[2], "degenerate triangle");
        }
        let set: BTreeSet<Tri> = triangles.iter().copied().collect();
        assert_eq!(set.len(), triangles.len(), "repeated triangle");
        let tri = Triangulation { triangles };
        for (_, ts) in tri.edge_map() {
            assert_eq!(ts.len(), 2, "edge must lie on exactly two triangles");
        }
        tri
    }

    fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
                m.entry((a, b)).or_default().push(i);
            }
        }
        m
    }

    fn euler(&self) -> i64 {
        let verts: BTreeSet<usize> = self.triangles.iter().flatten().copied().collect();
        verts.len() as i64 - self.edge_map().len() as i64 + self.triangles.len() as i64
    }

    /// +1 when `a -> b` runs along the boundary of triangle `t` taken with sign `s`
    /// relative to its sorted vertex order.
    fn direction(&self, t: usize, s: i8, a: usize, b: usize) -> i8 {
        let v = self.triangles[t];
        let pos = |x| v.iter().position(|&y| y == x).unwrap();
        let forward = (pos(a) + 1) % 3 == pos(b);
        if forward {
            s
        } else {
            -s
        }
    }

    /// Coherent orientation of the triangles around vertex `v`, by walking the star.
    fn star_orientation(&self, v: usize) -> BTreeMap<usize, i8> {
        let edges = self.edge_map();
        let star: Vec<usize> = (0..self.triangles.len()).filter(|&t| self.triangles[t].contains(&v)).collect();
        let mut sign = BTreeMap::new();
        sign.insert(star[0], 1i8);
        let mut queue = VecDeque::from([star[0]]);
        while let Some(t) = queue.pop_front() {
            for &x in self.triangles[t].iter().filter(|&&x| x != v) {
                let key = (v.min(x), v.max(x));
                for &other in &edges[&key] {
                    if other == t || sign.contains_key(&other) {
                        continue;
                    }
                    let s = -self.direction(t, sign[&t], v, x) * self.direction(other, 1, v, x);
                    sign.insert(other, s);
                    queue.push_back(other);
                }
            }
        }
        sign
    }

    /// Orientation character: compare the star orientations of an edge's ends.
    fn w1(&self) -> BTreeMap<(usize, usize), u8> {
        let verts: BTreeSet<usize> = self.triangles.iter().flatten().copied().collect();
        let stars: BTreeMap<usize, BTreeMap<usize, i8>> =
            verts.iter().map(|&v| (v, self.star_orientation(v))).collect();
        self.edge_map()
            .into_iter()
            .map(|((a, b), ts)| {
                let t = ts[0];
                ((a, b), u8::from(stars[&a][&t] != stars[&b][&t]))
            })
            .collect()
    }

    /// Whether `w = δf` for some vertex labelling `f`, by propagating labels along edges.
    fn is_coboundary(w: &BTreeMap<(usize, usize), u8>) -> bool {
        let mut label: BTreeMap<usize, u8> = BTreeMap::new();
        let mut changed = true;
        while changed {
            changed = false;
            for (&(a, b), &bit) in w {
                match (label.get(&a).copied(), label.get(&b).copied()) {
                    (Some(x), Some(y)) if x ^ y != bit => return false,
                    (Some(x), None) => {
                        label.insert(b, x ^ bit);
                        changed = true;
                    }
                    (None, Some(y)) => {
                        label.insert(a, y ^ bit);
                        changed = true;
                    }
                    (None, None) if label.is_empty() => {
                        label.insert(a, 0);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        true
    }

    fn cup_square(&self) -> u8 {
        let w = self.w1();
        self.triangles.iter().fold(0, |acc, t| acc ^ (w[&(t[0], t[1])] & w[&(t[1], t[2])]))
    }
}

fn rp2_six_vertices() -> Triangulation {
    Triangulation::new(vec![
        [0, 1, 2],
        [0, 2, 3],
        [0, 3, 4],
        [0, 4, 5],
        [0, 5, 1],
        [1, 2, 4],
        [2, 3, 5],
        [3, 4, 1],
        [4, 5, 2],
        [5, 1, 3],
    ])
}

/// `n x n` grid on the square with the top edge glued to the bottom either straight
/// or flipped.
fn square_grid(n: usize, flip: bool) -> Triangulation {
    let label = |i: usize, j: usize| {
        let (i, j) = if j >= n && flip { ((n - i % n) % n, j - n) } else { (i % n, j % n) };
        (j % n) * n + (i % n)
    };
    let mut tris = Vec::new();
    for i in 0..n {
        for j in 0..n {
            tris.push([label(i, j), label(i + 1, j), label(i + 1, j + 1)]);
            tris.push([label(i, j), label(i + 1, j + 1), label(i, j + 1)]);
        }
    }
    Triangulation::new(tris)
}

#[test]
fn simplicial_oracle_values() {
    let rp2 = rp2_six_vertices();
    assert_eq!(rp2.euler(), 1);
    assert!(!Triangulation::is_coboundary(&rp2.w1()));
    assert_eq!(rp2.cup_square(), 1);
    let k2 = square_grid(4, true);
    assert_eq!(k2.euler(), 0);
    assert!(!Triangulation::is_coboundary(&k2.w1()));
    assert_eq!(k2.cup_square(), 0);
    let t2 = square_grid(4, false);
    assert!(Triangulation::is_coboundary(&t2.w1()));
    assert_eq!(t2.cup_square(), 0);
}

#[test]
fn intersection_form_agrees_with_oracle() {
    let cases = [("rp2", rp2_six_vertices()), ("k2", square_grid(4, true)), ("t2", square_grid(4, false))];
    for (name, oracle) in cases {
        let x = SurfaceModel::parse(name).unwrap();
        assert_eq!(w1_cup_w1(&x).unwrap(), oracle.cup_square(), "{name}");
        assert_eq!(w2(&x).unwrap(), oracle.euler().rem_euclid(2) as u8, "{name}");
    }
}

fn closed_families() -> Vec<Family> {
    let mut out = vec![Family::Sphere, Family::ProjectivePlane, Family::Torus, Family::Klein];
    for g in 0..=4 {
        out.push(Family::Orientable(g));
        out.push(Family::NonOrientable { genus: g, crosscaps: 1 });
        out.push(Family::NonOrientable { genus: g, crosscaps: 2 });
    }
    out
}

#[test]
fn wu_relation_and_existence_pattern() {
    for fam in closed_families() {
        let x = SurfaceModel::build(fam).unwrap();
        let r = obstructions(&x).unwrap();
        assert_eq!(r.w2, r.w1_cup_w1, "{}", x.name());
        assert!(r.pin_minus_exists, "{}", x.name());
        assert_eq!(r.pin_plus_exists, x.euler_characteristic() % 2 == 0, "{}", x.name());
        assert_eq!(r.w1.is_zero(), x.orientable, "{}", x.name());
        if r.pin_plus_exists {
            assert_eq!(r.count_pin_plus, r.count_pin_minus);
        }
    }
}

#[test]
fn orientation_character_spans_pullback_kernel() {
    for fam in closed_families() {
        let x = SurfaceModel::build(fam).unwrap();
        if x.orientable {
            continue;
        }
        let maps = induced_maps(&orientation_double_cover(&x).unwrap()).unwrap();
        assert_eq!(maps.pull_kernel, vec![w1(&x).on_generators], "{}", x.name());
    }
}
