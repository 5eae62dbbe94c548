//! Algorithm X over dancing links.
//!
//! Items are `0..n_items`; every item is primary. The item with the fewest
//! live options is branched on first, ties going to the lowest item index.

pub struct ExactCover {
    n_items: usize,
    // node arrays; nodes 0..=n_items are the header ring (0 is the root)
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    column: Vec<usize>,
    row_of: Vec<usize>,
    len: Vec<usize>,
    row_start: Vec<usize>,
}

/// Statistics and termination reason of a search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub solutions: u64,
    pub capped: bool,
    pub budget_exhausted: bool,
}

impl ExactCover {
    pub fn new(n_items: usize) -> Self {
        let h = n_items + 1;
        let mut s = ExactCover {
            n_items,
            left: (0..h).map(|i| if i == 0 { n_items } else { i - 1 }).collect(),
            right: (0..h).map(|i| if i == n_items { 0 } else { i + 1 }).collect(),
            up: (0..h).collect(),
            down: (0..h).collect(),
            column: (0..h).collect(),
            row_of: vec![usize::MAX; h],
            len: vec![0; h],
            row_start: Vec::new(),
        };
        if n_items == 0 {
            s.left[0] = 0;
            s.right[0] = 0;
        }
        s
    }

    pub fn n_options(&self) -> usize {
        self.row_start.len()
    }

    /// Adds an option covering `items` (distinct, each `< n_items`).
    pub fn add_option(&mut self, items: &[usize]) -> usize {
        let row = self.row_start.len();
        let first = self.left.len();
        self.row_start.push(first);
        for (k, &item) in items.iter().enumerate() {
            debug_assert!(item < self.n_items);
            let col = item + 1;
            let node = self.left.len();
            let prev = if k == 0 { node } else { node - 1 };
            self.left.push(prev);
            self.right.push(first);
            if k > 0 {
                self.right[prev] = node;
                self.left[first] = node;
            }
            let above = self.up[col];
            self.up.push(above);
            self.down.push(col);
            self.down[above] = node;
            self.up[col] = node;
            self.column.push(col);
            self.row_of.push(row);
            self.len[col] += 1;
        }
        row
    }

    fn cover(&mut self, col: usize) {
        let (l, r) = (self.left[col], self.right[col]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[col];
        while i != col {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.len[self.column[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, col: usize) {
        let mut i = self.up[col];
        while i != col {
            let mut j = self.left[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                self.len[self.column[j]] += 1;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[col], self.right[col]);
        self.right[l] = col;
        self.left[r] = col;
    }

    fn select_row_node(&mut self, node: usize) {
        let mut j = self.right[node];
        while j != node {
            self.cover(self.column[j]);
            j = self.right[j];
        }
    }

    fn unselect_row_node(&mut self, node: usize) {
        let mut j = self.left[node];
        while j != node {
            self.uncover(self.column[j]);
            j = self.left[j];
        }
    }

    /// Enumerates exact covers that contain every option in `forced`.
    ///
    /// `visit` receives each solution as a sorted list of option indices and
    /// returns `false` to stop. `max_nodes` bounds the number of search
    /// nodes. Returns `None` if a forced option conflicts with another.
    pub fn solve<F>(&mut self, forced: &[usize], max_nodes: Option<u64>, mut visit: F) -> Option<SearchStats>
    where
        F: FnMut(&[usize]) -> bool,
    {
        let mut stats = SearchStats::default();
        let mut covered_forced = Vec::new();
        for &row in forced {
            let node = self.row_start[row];
            let mut members = vec![node];
            let mut j = self.right[node];
            while j != node {
                members.push(j);
                j = self.right[j];
            }
            // every node of the option must still sit in a live column
            let live = members.iter().all(|&m| self.is_live_column(self.column[m]) && self.column_has_node(self.column[m], m));
            if !live {
                for &(c, n) in covered_forced.iter().rev() {
                    self.unselect_row_node(n);
                    self.uncover(c);
                }
                return None;
            }
            let c = self.column[node];
            self.cover(c);
            self.select_row_node(node);
            covered_forced.push((c, node));
        }
        let mut partial: Vec<usize> = forced.to_vec();
        self.search(&mut partial, &mut stats, max_nodes, &mut visit);
        for &(c, n) in covered_forced.iter().rev() {
            self.unselect_row_node(n);
            self.uncover(c);
        }
        Some(stats)
    }

    fn is_live_column(&self, col: usize) -> bool {
        let mut c = self.right[0];
        while c != 0 {
            if c == col {
                return true;
            }
            c = self.right[c];
        }
        false
    }

    fn column_has_node(&self, col: usize, node: usize) -> bool {
        let mut i = self.down[col];
        while i != col {
            if i == node {
                return true;
            }
            i = self.down[i];
        }
        false
    }

    /// Returns false when the caller asked to stop.
    fn search<F>(&mut self, partial: &mut Vec<usize>, stats: &mut SearchStats, max_nodes: Option<u64>, visit: &mut F) -> bool
    where
        F: FnMut(&[usize]) -> bool,
    {
        stats.nodes += 1;
        if max_nodes.is_some_and(|m| stats.nodes > m) {
            stats.budget_exhausted = true;
            return false;
        }
        if self.right[0] == 0 {
            stats.solutions += 1;
            let mut sol = partial.clone();
            sol.sort_unstable();
            if !visit(&sol) {
                stats.capped = true;
                return false;
            }
            return true;
        }
        let mut best = self.right[0];
        let mut c = self.right[best];
        while c != 0 {
            if self.len[c] < self.len[best] {
                best = c;
            }
            c = self.right[c];
        }
        if self.len[best] == 0 {
            return true;
        }
        self.cover(best);
        let mut r = self.down[best];
        let mut keep_going = true;
        while r != best {
            partial.push(self.row_of[r]);
            self.select_row_node(r);
            keep_going = self.search(partial, stats, max_nodes, visit);
            self.unselect_row_node(r);
            partial.pop();
            if !keep_going {
                break;
            }
            r = self.down[r];
        }
        self.uncover(best);
        keep_going
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_solutions(ec: &mut ExactCover, forced: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        ec.solve(forced, None, |s| {
            out.push(s.to_vec());
            true
        });
        out
    }

    #[test]
    fn knuth_example() {
        // Knuth's seven-item example; the unique cover is options {0, 3, 4}.
        let mut ec = ExactCover::new(7);
        ec.add_option(&[2, 4]);
        ec.add_option(&[0, 3, 6]);
        ec.add_option(&[1, 2, 5]);
        ec.add_option(&[0, 3, 5]);
        ec.add_option(&[1, 6]);
        ec.add_option(&[3, 4, 6]);
        assert_eq!(all_solutions(&mut ec, &[]), vec![vec![0, 3, 4]]);
        assert_eq!(all_solutions(&mut ec, &[3]), vec![vec![0, 3, 4]]);
        assert!(ec.solve(&[1], None, |_| true).unwrap().solutions == 0);
        assert!(ec.solve(&[1, 3], None, |_| true).is_none());
        // state restored after forced runs
        assert_eq!(all_solutions(&mut ec, &[]), vec![vec![0, 3, 4]]);
    }

    #[test]
    fn dominoes_on_a_cycle() {
        // perfect matchings of a 6-cycle: exactly two
        let mut ec = ExactCover::new(6);
        for i in 0..6 {
            ec.add_option(&[i, (i + 1) % 6]);
        }
        assert_eq!(all_solutions(&mut ec, &[]).len(), 2);
        let stats = ec.solve(&[], None, |_| false).unwrap();
        assert!(stats.capped);
    }
}
