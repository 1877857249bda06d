use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which of the three per-neuron state variables a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Potential,
    Recovery,
    Memductance,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Component::Potential => "u",
            Component::Recovery => "w",
            Component::Memductance => "rho",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {component}[{neuron}] at grid point ({x}, {y})")]
    NonFinite {
        component: Component,
        neuron: usize,
        x: usize,
        y: usize,
    },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("synchronization threshold undefined: Gronwall rate mu is zero")]
    ThresholdUndefined,

    #[error("tail window contains no samples")]
    EmptyTail,

    #[error("nonpositive value {value:e} at t = {time}; truncate the fit window before this sample")]
    NonPositive { time: f64, value: f64 },

    #[error("fit window holds {got} samples, at least {need} required")]
    WindowTooShort { got: usize, need: usize },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("no columns selected")]
    EmptySelection,

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("malformed metrics csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
