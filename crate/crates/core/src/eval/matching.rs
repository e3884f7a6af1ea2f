use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::descriptor::Descriptor;

/// A tentative correspondence between descriptor `a` of the first set and `b` of the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub a: usize,
    pub b: usize,
    pub distance: u32,
}

/// Rows of `a` handled per task; each task also keeps its own column minima over `b`.
const CHUNK: usize = 64;

/// `(distance, index)` packed so that `min` picks the smaller distance, then the lower index.
#[inline]
fn key(distance: u32, index: usize) -> u64 {
    u64::from(distance) << 32 | index as u64
}

/// Mutual nearest neighbours by Hamming distance, ordered by index in `a`.
///
/// Ties go to the lower index on either side. Each distance is computed once.
pub fn match_descriptors(a: &[Descriptor], b: &[Descriptor]) -> Vec<Match> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let partial: Vec<(Vec<u64>, Vec<u64>)> = a
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut cols = vec![u64::MAX; b.len()];
            let rows = chunk
                .iter()
                .enumerate()
                .map(|(r, da)| {
                    let i = c * CHUNK + r;
                    let mut best = u64::MAX;
                    for (j, (db, col)) in b.iter().zip(cols.iter_mut()).enumerate() {
                        let d = da.hamming(db);
                        best = best.min(key(d, j));
                        *col = (*col).min(key(d, i));
                    }
                    best
                })
                .collect();
            (rows, cols)
        })
        .collect();

    let mut backward = vec![u64::MAX; b.len()];
    for (_, cols) in &partial {
        for (best, &c) in backward.iter_mut().zip(cols) {
            *best = (*best).min(c);
        }
    }
    partial
        .iter()
        .flat_map(|(rows, _)| rows)
        .enumerate()
        .filter_map(|(i, &k)| {
            let (j, distance) = ((k & 0xffff_ffff) as usize, (k >> 32) as u32);
            (backward[j] & 0xffff_ffff == i as u64).then_some(Match {
                a: i,
                b: j,
                distance,
            })
        })
        .collect()
}
