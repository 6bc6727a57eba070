//! Stiefel–Whitney data of surface tangent bundles and the pin± existence and
//! counting predicates.

use serde::Serialize;
use thiserror::Error;

use crate::homology::{ChainComplex, Z2Group};
use crate::surface::{GluingWord, SurfaceModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacteristicError {
    #[error("{0} has boundary")]
    NotClosed(String),
    #[error("intersection form needs a single polygon")]
    MultiplePolygons,
}

/// A class in H¹(X, Z₂): an edge cochain and its values on the H₁(X, Z₂) generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Z2Cocycle {
    /// `(letter, bit)` for every edge of the gluing word.
    pub letters: Vec<(String, u8)>,
    /// Values on the Z₂ homology generators.
    pub on_generators: Vec<u8>,
}

impl Z2Cocycle {
    pub fn cochain(&self) -> Vec<u8> {
        self.letters.iter().map(|(_, b)| *b).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.on_generators.iter().all(|&b| b == 0)
    }

    pub fn letter(&self, name: &str) -> Option<u8> {
        self.letters.iter().find(|(n, _)| n == name).map(|(_, b)| *b)
    }
}

fn z2_group(word: &GluingWord) -> Z2Group {
    ChainComplex::from_word(word).expect("gluing words give chain complexes").mod2(1)
}

/// Cochain of the orientation character: an edge gets 1 when its lift, started
/// on a fixed sheet over its initial vertex, ends on the other sheet over its final vertex.
pub fn orientation_character(word: &GluingWord) -> Vec<u8> {
    let cover = word.orientation_cover();
    let (nv, _) = word.vertices();
    let ends = cover.word.edge_endpoints();
    let mut section = vec![usize::MAX; nv];
    for (cv, &bv) in cover.vertex_base.iter().enumerate() {
        if section[bv] == usize::MAX {
            section[bv] = cv;
        }
    }
    (0..word.edge_count())
        .map(|e| {
            let (start, _) = word.edge_endpoints()[e];
            let first = 2 * e;
            let lift = if ends[first].0 == section[start] { first } else { cover.deck_edge[first] };
            let (_, end) = word.edge_endpoints()[e];
            u8::from(ends[lift].1 != section[end])
        })
        .collect()
}

pub fn w1(x: &SurfaceModel) -> Z2Cocycle {
    let bits = orientation_character(&x.word);
    let group = z2_group(&x.word);
    Z2Cocycle {
        letters: x.word.names().iter().cloned().zip(bits.iter().copied()).collect(),
        on_generators: group.evaluate(&bits),
    }
}

/// Mod-2 intersection numbers of the curves dual to each letter: chords joining the
/// two sides carrying that letter. Distinct chords meet once when their ends interlace
/// around the polygon; a chord meets its push-off once when the gluing reverses orientation.
pub fn intersection_form(word: &GluingWord) -> Result<Vec<Vec<u8>>, CharacteristicError> {
    if word.faces().len() != 1 {
        return Err(CharacteristicError::MultiplePolygons);
    }
    let n = word.edge_count();
    let reversing = word.reversing_edges();
    let chords: Vec<Option<(usize, usize)>> = (0..n)
        .map(|e| {
            let occ = word.occurrences(e);
            (occ.len() == 2).then(|| (occ[0].1, occ[1].1))
        })
        .collect();
    let mut q = vec![vec![0u8; n]; n];
    for (e, row) in q.iter_mut().enumerate() {
        let Some((a, b)) = chords[e] else { continue };
        row[e] = u8::from(reversing.contains(&e));
        for (f, cell) in row.iter_mut().enumerate() {
            let Some((c, d)) = chords[f].filter(|_| f != e) else { continue };
            let inside = |p: usize| a < p && p < b;
            *cell = u8::from(inside(c) != inside(d));
        }
    }
    Ok(q)
}

pub fn w1_cup_w1(x: &SurfaceModel) -> Result<u8, CharacteristicError> {
    if !x.is_closed() {
        return Err(CharacteristicError::NotClosed(x.name()));
    }
    let q = intersection_form(&x.word)?;
    let u = orientation_character(&x.word);
    let mut total = 0u8;
    for (i, row) in q.iter().enumerate() {
        for (j, &qij) in row.iter().enumerate() {
            total ^= u[i] & u[j] & qij;
        }
    }
    Ok(total)
}

pub fn w2(x: &SurfaceModel) -> Result<u8, CharacteristicError> {
    if !x.is_closed() {
        return Err(CharacteristicError::NotClosed(x.name()));
    }
    Ok(x.euler_characteristic().rem_euclid(2) as u8)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub surface: String,
    pub w1: Z2Cocycle,
    pub w1_cup_w1: u8,
    pub w2: u8,
    pub pin_plus_exists: bool,
    pub pin_minus_exists: bool,
    pub count_pin_plus: u64,
    pub count_pin_minus: u64,
}

pub fn obstructions(x: &SurfaceModel) -> Result<ObstructionReport, CharacteristicError> {
    let w2 = w2(x)?;
    let cup = w1_cup_w1(x)?;
    let torsor = 1u64 << z2_group(&x.word).dim();
    let plus = w2 == 0;
    let minus = (w2 ^ cup) == 0;
    Ok(ObstructionReport {
        surface: x.name(),
        w1: w1(x),
        w1_cup_w1: cup,
        w2,
        pin_plus_exists: plus,
        pin_minus_exists: minus,
        count_pin_plus: if plus { torsor } else { 0 },
        count_pin_minus: if minus { torsor } else { 0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn klein_character_on_letters() {
        let k = SurfaceModel::parse("k2").unwrap();
        let w = w1(&k);
        assert_eq!(w.letter("a"), Some(0));
        assert_eq!(w.letter("b"), Some(1));
        assert!(w1(&SurfaceModel::parse("t2").unwrap()).is_zero());
        assert_eq!(w1(&SurfaceModel::parse("rp2").unwrap()).letter("x"), Some(1));
    }

    #[test]
    fn reports() {
        let rp2 = obstructions(&SurfaceModel::parse("rp2").unwrap()).unwrap();
        assert!(!rp2.pin_plus_exists && rp2.pin_minus_exists);
        assert_eq!((rp2.count_pin_plus, rp2.count_pin_minus), (0, 2));
        let k2 = obstructions(&SurfaceModel::parse("k2").unwrap()).unwrap();
        assert_eq!((k2.count_pin_plus, k2.count_pin_minus), (4, 4));
        let t2 = obstructions(&SurfaceModel::parse("t2").unwrap()).unwrap();
        assert_eq!((t2.count_pin_plus, t2.count_pin_minus), (4, 4));
        assert!(obstructions(&SurfaceModel::parse("cyl").unwrap()).is_err());
    }
}
