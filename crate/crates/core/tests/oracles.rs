mod common;

use common::{reach_oracle, taint_oracle};

#[test]
fn taint_matches_path_enumeration() {
    let mut flows = 0;
    for seed in 0..200 {
        let p = taint_oracle::generate(seed);
        assert!(p.instruction_count() <= 200);
        let want = p.oracle();
        assert_eq!(p.engine(), want, "seed {seed}\n{}", p.smali());
        flows += want.len();
    }
    assert!(flows > 100, "only {flows} flows generated");
}

#[test]
fn oracle_sees_dead_sources_as_clean() {
    use taint_oracle::{MiniProgram, G};
    let p = MiniProgram {
        seed: 0,
        ops: vec![
            G::Goto { to: 2 },
            G::View { dst: 0, tagged: true },
            G::Log { tag: 1, msg: 0 },
            G::View { dst: 2, tagged: true },
            G::Concat { dst: 3, a: 1, b: 2 },
            G::Leak { src: 3 },
        ],
    };
    let want: std::collections::BTreeSet<_> = [(1, taint_oracle::LEAK)].into();
    assert_eq!(p.oracle(), want);
    assert_eq!(p.engine(), want);
}

#[test]
fn reachability_matches_closure() {
    for seed in 0..200 {
        let g = reach_oracle::generate(seed);
        assert!(g.nodes.len() <= 30);
        let bad = g.check();
        assert!(bad.is_empty(), "{bad:#?}");
    }
}

#[test]
fn acceptance_sized_runs() {
    for check in [common::criteria::taint_oracle, common::criteria::reach_oracle] {
        if let Err(p) = check() {
            panic!("{p:#?}");
        }
    }
}
