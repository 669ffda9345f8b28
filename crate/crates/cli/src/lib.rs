//! Library half of the `qpix` command: image files, report schema and the
//! command implementations the binary dispatches to.

pub mod commands;
pub mod image_io;
pub mod report;
