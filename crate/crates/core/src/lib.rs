//! Four equivalent views of the dynamic BST problem on permutation inputs:
//! rotation traces, satisfied supersets, rectangulation flips and monotone
//! tree relaxation, with transforms between them and the lower-bound tools
//! used to check them on small inputs.
//!
//! Coordinates are exact integers on the `(n+2) x (n+2)` grid `0..=n+1`;
//! input point `i` sits at `(x_i, i)`.

pub mod bounds;
pub mod bst;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod rect;
pub mod satisfied;
pub mod transforms;
pub mod tree;

pub use error::{Error, Result};
pub use geometry::{
    generate, parse_permutation, Family, FamilySpec, GridFrame, PermutationPointSet, Point, Rect,
};
pub use rect::{AllowedElbows, FlipSequence, RectState, Segment, Step};
pub use satisfied::{PointSuperset, Sign};
pub use tree::{EdgeFlip, EdgeFlipSequence, HeuristicPolicy, MonotoneTree};
