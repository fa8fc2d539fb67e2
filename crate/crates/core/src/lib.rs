pub mod analysis;
pub mod bench;
pub mod compression;
pub mod error;
pub mod index_sets;
pub mod io;
pub mod lattice;
pub mod model;
pub mod special;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/index_sets.md")]
    mod index_sets {}
    #[doc = include_str!("../../../book/src/compression.md")]
    mod compression {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
