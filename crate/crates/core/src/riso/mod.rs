//! Risometries, canonical forms of colored balls and translatability.

mod canon;
mod risometry;
mod translate;

use thiserror::Error;

use crate::defset::DefsetError;
use crate::geometry::GeometryError;
use crate::padic::PadicError;

pub use canon::{
    canonical_form_of_tree, canonicalize, random_automorphism, riso_equiv, CanonTable,
    CanonicalForm, ColoredTree, RisoWitness,
};
pub use risometry::{is_risometry, is_rv_preserving, Risometry};
pub use translate::{
    check_straightener, decide_translatable, fibers_equivalent, is_translatable,
    pointwise_translatable, translatability, tsp, Filter, Straightener, Translatability,
    TranslateOptions, Translater, TranslaterDefect, TspTable,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RisoError {
    #[error("map is not a risometry of the ball")]
    NotRisometry,
    #[error("labels do not match the ball's tree")]
    BadLabels,
    #[error("balls have different depths")]
    DepthMismatch,
    #[error("colorings live in different dimensions or contexts")]
    DimensionMismatch,
    #[error("ball is not inside the coloring's domain")]
    DomainMismatch,
    #[error("projection does not exhibit the subspace")]
    NotExhibiting,
    #[error("vectors do not lift a basis of the subspace")]
    BadLift,
    #[error(transparent)]
    Defset(#[from] DefsetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}
