//! Input formats, bundled scenarios and result reports.
//!
//! All input files are line-oriented text. The first non-comment line is a
//! header naming the format and its version, e.g. `fleetgrid-grid 1`.
//! Everything after `#` on a line is a comment. Errors carry the source
//! name and 1-based line number.

mod fleet_file;
mod grid_file;
mod matpower;
mod report;
mod scenario;
mod transport_file;

use std::path::PathBuf;

use thiserror::Error;

use crate::grid::GridError;
use crate::transport::TransportError;

pub use fleet_file::{parse_fleets, write_fleets};
pub use grid_file::{parse_grid, write_grid};
pub use matpower::parse_matpower;
pub use report::{parse_report, render_human, render_json, Report, REPORT_FORMAT_VERSION};
pub use scenario::{bundled_names, load_bundled, load_scenario, load_scenario_file, parse_manifest, Manifest, Scenario};
pub use transport_file::{parse_transport, write_transport};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown bundled scenario `{name}`; available: {}", bundled_names().join(", "))]
    UnknownScenario { name: String },
    #[error("{0}")]
    CrossReference(String),
    #[error("{source_name}: {source}")]
    Grid {
        source_name: String,
        #[source]
        source: GridError,
    },
    #[error("{source_name}: {source}")]
    Transport {
        source_name: String,
        #[source]
        source: TransportError,
    },
}

/// A content line with its 1-based number and whitespace-split fields.
pub(crate) struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

pub(crate) struct Reader<'a> {
    source_name: &'a str,
    records: Vec<Record<'a>>,
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Splits `text` into records and checks the `<kind> <version>` header.
    pub fn new(text: &'a str, source_name: &'a str, kind: &str, version: u32) -> Result<Self, LoadError> {
        let records: Vec<Record<'a>> = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let content = raw.split('#').next().unwrap_or("").trim();
                (!content.is_empty()).then(|| Record {
                    line: i + 1,
                    fields: content.split_whitespace().collect(),
                })
            })
            .collect();
        let mut reader = Self {
            source_name,
            records,
            pos: 0,
        };
        let Some(head) = reader.records.first() else {
            return Err(reader.error(1, format!("empty file; expected header `{kind} {version}`")));
        };
        let line = head.line;
        match head.fields.as_slice() {
            [k, v] if *k == kind => match v.parse::<u32>() {
                Ok(found) if found == version => {}
                _ => return Err(reader.error(line, format!("unsupported {kind} version `{v}`; this build reads {version}"))),
            },
            _ => return Err(reader.error(line, format!("expected header `{kind} {version}`"))),
        }
        reader.pos = 1;
        Ok(reader)
    }

    pub fn next(&mut self) -> Option<Record<'a>> {
        let slot = self.records.get_mut(self.pos)?;
        self.pos += 1;
        Some(std::mem::replace(slot, Record { line: 0, fields: Vec::new() }))
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> LoadError {
        LoadError::Parse {
            source_name: self.source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn source_name(&self) -> &str {
        self.source_name
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(reader: &Reader, line: usize, field: &str, what: &str) -> Result<T, LoadError> {
    field
        .parse()
        .map_err(|_| reader.error(line, format!("cannot parse {what} from `{field}`")))
}

pub(crate) fn expect_fields(reader: &Reader, rec: &Record, range: std::ops::RangeInclusive<usize>, layout: &str) -> Result<(), LoadError> {
    if range.contains(&rec.fields.len()) {
        Ok(())
    } else {
        Err(reader.error(rec.line, format!("expected `{layout}`, found {} fields", rec.fields.len())))
    }
}
