//! Multistart section optimizer against a brute-force grid search.

#[path = "common/grid_oracle.rs"]
mod grid_oracle;

use dvlab::ConvexBody;
use grid_oracle::max_relative_error;

#[test]
fn cube_sections_match_grid_search() {
    let (d, r) = max_relative_error(&ConvexBody::cube(10).unwrap(), 11);
    assert!(d < 1e-4 && r < 1e-4, "diameter {d:e}, inradius {r:e}");
}

#[test]
fn cross_polytope_sections_match_grid_search() {
    let (d, r) = max_relative_error(&ConvexBody::cross_polytope(10).unwrap(), 12);
    assert!(d < 1e-4 && r < 1e-4, "diameter {d:e}, inradius {r:e}");
}
