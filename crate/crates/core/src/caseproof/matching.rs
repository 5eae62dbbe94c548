use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Edge;
use crate::lattice::Point;

/// A perfect matching of the unit-distance graph induced on a region.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OneFactor {
    pub edges: Vec<Edge>,
}

/// All perfect matchings of the region, each with edges sorted, in the
/// order produced by always matching the least unmatched vertex first and
/// trying its partners in increasing order.
pub fn enumerate_one_factors(region: &[Point]) -> Vec<OneFactor> {
    let cells: BTreeSet<Point> = region.iter().cloned().collect();
    if cells.len() % 2 == 1 {
        return Vec::new();
    }
    let cells: Vec<Point> = cells.into_iter().collect();
    let adj: Vec<Vec<usize>> = cells
        .iter()
        .map(|p| {
            let mut v: Vec<usize> =
                p.neighbors().filter_map(|q| cells.binary_search(&q).ok()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let mut used = vec![false; cells.len()];
    let mut current = Vec::new();
    let mut out = Vec::new();
    extend(&adj, &mut used, &mut current, &mut out);
    out.into_iter()
        .map(|pairs| {
            let mut edges: Vec<Edge> = pairs
                .into_iter()
                .map(|(a, b)| Edge::new(cells[a].clone(), cells[b].clone()).unwrap())
                .collect();
            edges.sort();
            OneFactor { edges }
        })
        .collect()
}

fn extend(adj: &[Vec<usize>], used: &mut [bool], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    let Some(v) = used.iter().position(|u| !u) else {
        out.push(current.clone());
        return;
    };
    used[v] = true;
    for &w in &adj[v] {
        if !used[w] {
            used[w] = true;
            current.push((v, w));
            extend(adj, used, current, out);
            current.pop();
            used[w] = false;
        }
    }
    used[v] = false;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_regions() {
        let two = [Point::from([0, 0, 0]), Point::from([1, 0, 0])];
        assert_eq!(enumerate_one_factors(&two).len(), 1);
        assert!(enumerate_one_factors(&two[..1]).is_empty());
        let square: Vec<Point> = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]].map(Point::from).to_vec();
        assert_eq!(enumerate_one_factors(&square).len(), 2);
        let apart = [Point::from([0, 0, 0]), Point::from([2, 0, 0])];
        assert!(enumerate_one_factors(&apart).is_empty());
        assert_eq!(enumerate_one_factors(&[]).len(), 1);
    }
}
