use std::collections::BTreeSet;

use flipview::bounds::gkks_network;
use flipview::bst::{static_balanced_trace, validate_trace};
use flipview::Family;

#[test]
fn static_trace_is_valid_across_sizes() {
    for n in [1, 2, 3, 17, 64] {
        let x = flipview::generate(flipview::FamilySpec::new(Family::Random, n, Some(n as u64)))
            .unwrap();
        let t = static_balanced_trace(&x);
        assert_eq!(validate_trace(&t, &x).unwrap(), t.cost());
    }
}

#[test]
fn gkks_points_lie_on_split_columns() {
    let x = flipview::generate(flipview::FamilySpec::new(Family::Random, 40, Some(3))).unwrap();
    let g = gkks_network(&x);
    let cols: BTreeSet<u32> = g.columns.iter().copied().collect();
    assert!(g
        .network
        .points()
        .iter()
        .all(|p| x.contains(*p) || cols.contains(&p.x)));
}
