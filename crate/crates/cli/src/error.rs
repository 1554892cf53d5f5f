use serde::Serialize;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorClass {
    Config,
    Solver,
    Assertion,
}

impl ErrorClass {
    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Solver => "solver",
            ErrorClass::Assertion => "assertion",
        }
    }

    pub fn code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Solver => 3,
            ErrorClass::Assertion => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub class: ErrorClass,
    /// Library error variant or a short tag.
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorClass::Config, "Config", message)
    }

    pub fn assertion(kind: &str, message: impl Into<String>) -> Self {
        Self::new(ErrorClass::Assertion, kind, message)
    }

    pub fn io(e: std::io::Error) -> Self {
        Self::new(ErrorClass::Solver, "Io", e.to_string())
    }

    fn new(class: ErrorClass, kind: &str, message: impl Into<String>) -> Self {
        Self {
            class,
            kind: kind.into(),
            message: message.into(),
        }
    }

    /// Classifies a library error: bad inputs are configuration errors,
    /// failed structural checks are assertions, everything else is a solver
    /// failure.
    pub fn from_library(e: selfsim::Error) -> Self {
        use selfsim::Error as E;
        let root = e.root();
        let class = match root {
            E::InvalidInput(_)
            | E::StateOutOfBall { .. }
            | E::BandsOverlap { .. }
            | E::DomainViolation(_)
            | E::MissingFlux
            | E::ResonanceSingular { .. } => ErrorClass::Config,
            E::PlateauNotFlat { .. } | E::FlatnessUnachievable { .. } => ErrorClass::Assertion,
            _ => ErrorClass::Solver,
        };
        let debug = format!("{root:?}");
        let kind = debug
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or("Error")
            .to_string();
        Self::new(class, &kind, e.to_string())
    }

    pub fn code(&self) -> i32 {
        self.class.code()
    }

    /// One-line JSON for the error stream.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "class": self.class,
                "code": self.code(),
                "kind": self.kind,
                "message": self.message,
            }
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} error ({}): {}", self.class.name(), self.kind, self.message)
    }
}

impl std::error::Error for CliError {}
