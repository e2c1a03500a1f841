//! Sheaves on finite posets with the Alexandrov topology.
//!
//! Opens are up-sets. A sheaf is a functor on the poset: the map for `p ≤ q`
//! goes from the stalk at `p` to the stalk at `q`, and sections over an open
//! `U` are the limit of the stalks in `U`.

mod format;
mod poset;
mod presheaf;
mod resolution;
mod sheaf;

pub use format::{matrix_literal, parse_matrix_literal, parse_poset_sheaf, write_poset_sheaf};
pub(crate) use format::{content_lines, parse_cellular_block};
pub use poset::{mask_diff, mask_intersect, mask_subset, mask_union, FinitePoset, Mask, MAX_ENUMERATED};
pub use presheaf::Presheaf;
pub use resolution::{
    elementary_injective, ext_dim, ext_dims, injective_hull, injective_resolution, injective_sum, socle,
    InjectiveResolution,
};
pub use sheaf::{hom_post, hom_pre, hom_space, sheaf_hom, sum_structure, CellularSheaf, HomSpace, Sections, SheafMap};
