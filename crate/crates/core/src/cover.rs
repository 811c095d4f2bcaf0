//! Greedy set cover over the visibility table.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::field::CellId;
use crate::raycast::VisibilityTable;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverSolution {
    /// Selected location ids, in selection order.
    pub selected: Vec<usize>,
    /// Cells newly covered by each selection.
    pub covered_per_step: Vec<usize>,
    /// Cells no candidate location can see.
    pub uncoverable: BTreeSet<CellId>,
    pub n_candidates: usize,
    pub n_cells: usize,
}

impl CoverSolution {
    /// Fraction of candidate locations removed by the selection.
    pub fn reduction(&self) -> f64 {
        if self.n_candidates == 0 {
            return 0.0;
        }
        1.0 - self.selected.len() as f64 / self.n_candidates as f64
    }

    /// Share of the coverable cells that the selection covers.
    pub fn covered_fraction(&self) -> f64 {
        let coverable = self.n_cells - self.uncoverable.len();
        if coverable == 0 {
            return 1.0;
        }
        self.covered_per_step.iter().sum::<usize>() as f64 / coverable as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,location_id,newly_covered\n");
        for (i, (id, n)) in self.selected.iter().zip(&self.covered_per_step).enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, id, n);
        }
        out
    }

    /// Reads the selected ids back from [`CoverSolution::to_csv`] output.
    pub fn selected_from_csv(text: &str) -> crate::Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        for (ln, line) in crate::data_lines(text).skip(1) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    crate::Error::Format(format!("cover csv line {ln}: bad integer {s:?}"))
                })
            };
            if f.len() != 3 {
                return Err(crate::Error::Format(format!(
                    "cover csv line {ln}: expected 3 fields"
                )));
            }
            out.push((parse(f[1])?, parse(f[2])?));
        }
        Ok(out)
    }
}

/// Repeatedly picks the location that sees the most not-yet-covered cells
/// (ties to the lowest location id) until no location adds coverage.
/// Visibility is binary: any positive hit count covers the cell.
pub fn greedy_cover(table: &VisibilityTable) -> CoverSolution {
    let n_loc = table.n_locations();
    let n_cells = table.n_cells();
    let mut covered = vec![false; n_cells];
    let mut used = vec![false; n_loc];
    let mut selected = Vec::new();
    let mut covered_per_step = Vec::new();

    loop {
        let mut best: Option<(usize, usize)> = None;
        for l in (0..n_loc).filter(|&l| !used[l]) {
            let gain = table
                .row(l)
                .iter()
                .zip(&covered)
                .filter(|(&c, &done)| c > 0 && !done)
                .count();
            if gain == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bl, bg)) => {
                    gain > bg || (gain == bg && table.location_ids[l] < table.location_ids[bl])
                }
            };
            if better {
                best = Some((l, gain));
            }
        }
        let Some((l, gain)) = best else { break };
        used[l] = true;
        for (c, &count) in table.row(l).iter().enumerate() {
            if count > 0 {
                covered[c] = true;
            }
        }
        selected.push(table.location_ids[l]);
        covered_per_step.push(gain);
    }

    let uncoverable = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| table.cells[i])
        .collect();
    CoverSolution {
        selected,
        covered_per_step,
        uncoverable,
        n_candidates: n_loc,
        n_cells,
    }
}

/// Greedy selection padded or truncated to exactly `k` locations. Extra
/// picks beyond full coverage go to the most visible cells, ties to the
/// lowest id.
pub fn greedy_cover_with_size(table: &VisibilityTable, k: usize) -> CoverSolution {
    let mut sol = greedy_cover(table);
    sol.selected.truncate(k);
    sol.covered_per_step.truncate(k);
    if sol.selected.len() < k {
        let scores = table.scores();
        let mut rest: Vec<usize> = (0..table.n_locations())
            .filter(|&l| !sol.selected.contains(&table.location_ids[l]))
            .collect();
        rest.sort_by(|&a, &b| {
            scores[b]
                .cmp(&scores[a])
                .then(table.location_ids[a].cmp(&table.location_ids[b]))
        });
        for l in rest.into_iter().take(k - sol.selected.len()) {
            sol.selected.push(table.location_ids[l]);
            sol.covered_per_step.push(0);
        }
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PlotId;

    pub(crate) fn table_from_sets(n_cells: usize, sets: &[&[usize]]) -> VisibilityTable {
        let cells = (0..n_cells)
            .map(|i| CellId {
                plot: PlotId { row: 0, plot: 0 },
                cell: [i, 0, 0],
            })
            .collect();
        let mut counts = vec![0u32; sets.len() * n_cells];
        for (l, s) in sets.iter().enumerate() {
            for &c in *s {
                counts[l * n_cells + c] = 1;
            }
        }
        VisibilityTable::from_counts((1..=sets.len()).collect(), cells, counts).unwrap()
    }

    #[test]
    fn single_location_covers_all() {
        let t = table_from_sets(4, &[&[0, 1], &[0, 1, 2, 3]]);
        let s = greedy_cover(&t);
        assert_eq!(s.selected, vec![2]);
        assert_eq!(s.covered_per_step, vec![4]);
        assert!(s.uncoverable.is_empty());
    }

    #[test]
    fn hand_traced_instance() {
        // U = {1..5}: L1 {1,2,3}, L2 {3,4}, L3 {4,5}
        let t = table_from_sets(5, &[&[0, 1, 2], &[2, 3], &[3, 4]]);
        let s = greedy_cover(&t);
        assert_eq!(s.selected, vec![1, 3]);
        assert_eq!(s.covered_per_step, vec![3, 2]);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let t = table_from_sets(2, &[&[1], &[0]]);
        assert_eq!(greedy_cover(&t).selected, vec![1, 2]);
    }

    #[test]
    fn hidden_cells_are_reported() {
        let t = table_from_sets(3, &[&[0], &[0]]);
        let s = greedy_cover(&t);
        assert_eq!(s.selected, vec![1]);
        assert_eq!(s.uncoverable.len(), 2);
    }

    #[test]
    fn forced_size() {
        let t = table_from_sets(5, &[&[0, 1, 2], &[2, 3], &[3, 4], &[0]]);
        assert_eq!(greedy_cover_with_size(&t, 1).selected, vec![1]);
        let padded = greedy_cover_with_size(&t, 3);
        assert_eq!(padded.selected, vec![1, 3, 2]);
        assert_eq!(padded.covered_per_step, vec![3, 2, 0]);
    }

    #[test]
    fn csv_round_trip() {
        let t = table_from_sets(5, &[&[0, 1, 2], &[2, 3], &[3, 4]]);
        let s = greedy_cover(&t);
        let back = CoverSolution::selected_from_csv(&s.to_csv()).unwrap();
        assert_eq!(back, vec![(1, 3), (3, 2)]);
    }
}
