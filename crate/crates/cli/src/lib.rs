//! Library side of the command-line front end: config parsing and SVG
//! rendering, split out so the fuzz targets can drive the parser directly.

use std::fmt;

pub mod configfile;
pub mod svg;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(arp_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<arp_core::Error> for CliError {
    fn from(e: arp_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// A config mistake stays a config mistake when a scan or phase-average
/// wrapper reports it.
fn root_is_config(e: &arp_core::Error) -> bool {
    match e {
        arp_core::Error::InvalidConfig(_) => true,
        arp_core::Error::ScanPoint { source, .. }
        | arp_core::Error::PhaseSample { source, .. } => root_is_config(source),
        _ => false,
    }
}

impl CliError {
    /// 2 for anything the user wrote wrong, 3 for a numerical failure at
    /// runtime, 1 for plain I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if root_is_config(e) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
