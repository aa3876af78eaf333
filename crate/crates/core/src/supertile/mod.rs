//! Supertile generation: superwords, superblocks, interval patches, fusion
//! patches and the admitted language.

mod block;
mod fusion;
mod interval;
mod language;
mod word;

pub use block::{superblock, Block};
pub(crate) use block::{substitute as substitute_block, superblock_of};
pub use fusion::{
    fusion_supertile, fusion_type_names, fusion_volumes, level_patches, vector_fusion_state,
    ComposedSupertile, LatticePatch, VectorFusionState,
};
pub(crate) use fusion::compose as compose_level;
pub use interval::{supertile_interval, IntervalPatch, IntervalTile};
pub use language::{complexity, legal_words, repetitivity_radius, Language, Repetitivity};
pub use word::{fixed_point_prefix, sadic_superword, superword, Word};

/// Size caps for materialized supertiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of letters or cells a single supertile may hold.
    pub max_cells: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_cells: 100_000_000,
        }
    }
}

impl Limits {
    pub(crate) fn check(&self, requested: u128) -> crate::Result<()> {
        if requested > self.max_cells as u128 {
            Err(crate::Error::LevelOverflow {
                requested: requested.to_string(),
                limit: self.max_cells,
            })
        } else {
            Ok(())
        }
    }
}
