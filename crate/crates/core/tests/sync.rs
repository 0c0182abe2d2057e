mod common;

#[path = "common/excursion.rs"]
mod excursion;

use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn excursions_leave_no_ghost_entries() {
    for file in common::FILES {
        let script = common::commands(&common::source(file));
        for seed in 0..3 {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut s = common::session();
            let w = excursion::walk(&mut s, &script, 400, &mut rng);
            assert!(w.undos > 0 && w.failures > 0, "{w:?}");
            excursion::compare_with_replay(&s, common::session()).unwrap();
        }
    }
}

#[test]
fn completing_the_script_after_a_walk_matches_compilation() {
    let script = common::commands(&common::source("lists"));
    let mut rng = StdRng::seed_from_u64(11);
    let mut s = common::session();
    excursion::walk(&mut s, &script, 200, &mut rng);
    let keep = s.commands().zip(&script).take_while(|(a, b)| a.trim_end_matches('.') == b.as_str()).count();
    s.undo(s.position() - keep).unwrap();
    for c in &script[keep..] {
        s.execute(c).unwrap();
    }
    let unit = tacit_core::document::compile(
        "lists",
        &common::source("lists"),
        common::resolver(),
        &tacit_core::document::SessionConfig::default(),
    )
    .unwrap();
    assert_eq!(s.state().digest(), unit.digest());
}
