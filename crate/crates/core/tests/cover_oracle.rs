use proptest::prelude::*;
use tls_planner::cover::greedy_cover;
use tls_planner::field::{CellId, PlotId};
use tls_planner::raycast::VisibilityTable;

fn table(n_loc: usize, n_cells: usize, bits: &[bool]) -> VisibilityTable {
    let cells = (0..n_cells)
        .map(|c| CellId {
            plot: PlotId { row: 0, plot: 0 },
            cell: [c, 0, 0],
        })
        .collect();
    let counts = bits[..n_loc * n_cells]
        .iter()
        .map(|&b| u32::from(b))
        .collect();
    VisibilityTable::from_counts((1..=n_loc).collect(), cells, counts).unwrap()
}

/// Size of the smallest subset covering every coverable cell.
fn optimum(t: &VisibilityTable) -> usize {
    let n = t.n_locations();
    let masks: Vec<u64> = (0..n)
        .map(|l| {
            t.row(l)
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .fold(0u64, |m, (i, _)| m | 1 << i)
        })
        .collect();
    let all = masks.iter().fold(0, |a, m| a | m);
    (0u32..1 << n)
        .filter(|s| {
            (0..n)
                .filter(|l| s & 1 << l != 0)
                .fold(0, |a, l| a | masks[l])
                == all
        })
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|k| 1.0 / k as f64).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn greedy_within_harmonic_bound(
        n_loc in 1usize..=10,
        n_cells in 1usize..=24,
        bits in prop::collection::vec(prop::bool::weighted(0.3), 240),
    ) {
        let t = table(n_loc, n_cells, &bits);
        let sol = greedy_cover(&t);
        let opt = optimum(&t);
        let largest = (0..n_loc).map(|l| t.row(l).iter().filter(|&&c| c > 0).count()).max().unwrap();
        prop_assert!(sol.selected.len() as f64 <= harmonic(largest.max(1)) * opt as f64 + 1e-9,
            "greedy {} opt {} m {}", sol.selected.len(), opt, largest);

        // the selection covers every coverable cell and nothing else is left
        let covered: usize = sol.covered_per_step.iter().sum();
        prop_assert_eq!(covered + sol.uncoverable.len(), n_cells);
        for c in 0..n_cells {
            let seen = (0..n_loc).any(|l| t.count(l, c) > 0);
            prop_assert_eq!(!seen, sol.uncoverable.contains(&t.cells[c]));
        }
        // gains never increase
        prop_assert!(sol.covered_per_step.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn classic_bad_case_stays_within_bound() {
    // two disjoint halves cover everything; greedy is lured by wide sets
    let n_cells = 14;
    let mut rows = vec![vec![0u32; n_cells]; 5];
    for c in 0..n_cells {
        rows[c % 2][c] = 1;
    }
    for (i, range) in [(2, 0..2), (3, 2..6), (4, 6..14)] {
        for c in range {
            rows[i][c] = 1;
        }
    }
    let cells = (0..n_cells)
        .map(|c| CellId {
            plot: PlotId { row: 0, plot: 0 },
            cell: [c, 0, 0],
        })
        .collect();
    let t = VisibilityTable::from_counts((1..=5).collect(), cells, rows.concat()).unwrap();
    let sol = greedy_cover(&t);
    assert_eq!(optimum(&t), 2);
    assert_eq!(sol.selected, vec![5, 4, 3]);
    assert!(sol.selected.len() as f64 <= harmonic(8) * 2.0);
}
