mod common;

use credhier::catalog::credible_catalog;
use credhier::oracle::{brute_force_catalog, DEFAULT_N_CAP};
use credhier::trim::{trim_all, underivable_entries, unsound_marks};

#[test]
fn pipeline_matches_brute_force_on_the_grid() {
    let grid = common::grid(1);
    assert!(grid.len() >= 48);
    for inst in &grid {
        let s = inst.samples();
        let fast = credible_catalog(&s, &inst.threshold(), inst.mid()).unwrap();
        let slow = brute_force_catalog(&s, &inst.threshold(), inst.mid(), DEFAULT_N_CAP).unwrap();
        let fast = fast.supported();
        if fast != slow.entries {
            let extra: Vec<_> = fast.iter().filter(|e| !slow.entries.contains(e)).collect();
            let missing: Vec<_> = slow.entries.iter().filter(|e| !fast.contains(e)).collect();
            panic!("{inst}\nonly in pipeline: {extra:?}\nonly in oracle: {missing:?}");
        }
    }
}

#[test]
fn marks_are_sound_and_trims_are_derivable() {
    for inst in common::grid(1) {
        let s = inst.samples();
        let c = credible_catalog(&s, &inst.threshold(), inst.mid()).unwrap();
        let (trimmed, report) = trim_all(&c, &s).unwrap();
        let bad = unsound_marks(&c, &report.marks, &s);
        assert!(bad.is_empty(), "{inst}: {bad:?}");
        assert!(underivable_entries(&trimmed, &report).is_empty(), "{inst}");
        for e in &trimmed.entries {
            assert_eq!(e.redundant, !e.trimmed_by.is_empty(), "{inst}");
        }
    }
}

#[test]
fn partial_search_pruning_changes_nothing() {
    use credhier::partial::{uncover_partial_hierarchies, PartialSearchOptions};
    for inst in common::grid(1).iter().filter(|i| i.n >= 5) {
        let s = inst.samples();
        let run = |suffix_pruning| {
            uncover_partial_hierarchies(&s, &inst.threshold(), inst.mid(), PartialSearchOptions { suffix_pruning })
                .unwrap()
        };
        let (plain, pruned) = (run(false), run(true));
        assert_eq!(plain.credible, pruned.credible, "{inst}");
        let total = |v: &[(usize, usize)]| v.iter().map(|p| p.1).sum::<usize>();
        assert!(total(&pruned.evaluated_per_size) <= total(&plain.evaluated_per_size));
    }
}
