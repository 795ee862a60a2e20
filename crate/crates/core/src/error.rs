use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("simulation diverged at t = {time} s: channel `{channel}` is not finite")]
    Divergence { channel: String, time: f64 },

    #[error("desired force magnitude {0:.3e} N is too small to define a thrust direction")]
    DegenerateDirection(f64),

    #[error("airframe has no end-effector")]
    MissingEndEffector,

    #[error("polytope has affine dimension {0}, operation needs a full-dimensional set")]
    DegeneratePolytope(usize),

    #[error("{rotors} rotors exceed the vertex-enumeration limit of {limit}; use a sampling method instead")]
    TooManyRotors { rotors: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("unknown channel `{name}`{}", suggestion_suffix(.suggestions))]
    UnknownChannel { name: String, suggestions: Vec<String> },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

fn suggestion_suffix(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", suggestions.join(", "))
    }
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 2,
            _ => 1,
        }
    }
}
