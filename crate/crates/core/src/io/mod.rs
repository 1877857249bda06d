//! File formats: JSON configuration, metrics CSV, field snapshots and SVG plots.

pub mod config;
pub mod csv;
pub mod snapshot;
pub mod svg;

pub use config::{parse_config, ConfigDocument, ConfigError, ConfigErrorKind, ConfigErrors, ConventionPreset};
pub use csv::{format_metrics_csv, parse_metrics_csv, read_metrics_csv, write_metrics_csv};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot};
pub use svg::{render_plot_svg, write_plot_svg, PlotOptions};
