//! File formats, gap experiments and the command line for
//! [`cloudview_core`].

pub mod bench;
pub mod cli;
pub mod formats;
