pub mod balltree;
pub mod defset;
pub mod geometry;
pub mod jacobian;
pub mod padic;
pub mod riso;
pub mod tstrat;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/padic.md")]
    mod padic {}
    #[doc = include_str!("../../../book/src/balls.md")]
    mod balls {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/translatability.md")]
    mod translatability {}
    #[doc = include_str!("../../../book/src/tstrat.md")]
    mod tstrat {}
    #[doc = include_str!("../../../book/src/trees.md")]
    mod trees {}
    #[doc = include_str!("../../../book/src/jacobian.md")]
    mod jacobian {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
