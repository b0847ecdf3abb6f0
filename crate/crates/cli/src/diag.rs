//! Error classification and span-annotated diagnostics.

use std::fmt;
use std::process::ExitCode;

use distcheck::chase::ChaseError;
use distcheck::implication::ImplicationError;
use distcheck::parser::ParseError;
use distcheck::pc::PcError;
use distcheck::schemes::SchemeError;
use distcheck::verify::AtmError;
use distcheck::ModelError;

/// Exit statuses; verdicts only ever use `Positive` and `Negative`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Positive = 0,
    Negative = 1,
    Input = 2,
    Fragment = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}

/// A failure that ends the command before a verdict.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { status: Status::Input, message: message.into() }
    }

    pub fn fragment(message: impl Into<String>) -> Self {
        Failure { status: Status::Fragment, message: message.into() }
    }

    /// A parse error with the offending source line and a caret under the column.
    pub fn parse(e: &ParseError, source: &str) -> Self {
        let mut message = e.to_string();
        // Errors at end of input point past the last line; mark its end instead.
        let shown = match source.lines().nth(e.span.line.saturating_sub(1)) {
            Some(line) => Some((line, e.span.column.saturating_sub(1))),
            None => source.lines().last().map(|l| (l, l.chars().count())),
        };
        if let Some((line, col)) = shown {
            message.push_str(&format!("\n  | {line}\n  | {}^", " ".repeat(col)));
        }
        Failure::input(message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotDataFull(_) => Failure::fragment(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<ChaseError> for Failure {
    fn from(e: ChaseError) -> Self {
        match e {
            ChaseError::NotDataFull(_) | ChaseError::ComparisonsInIdentifyMode | ChaseError::NotNormalized => {
                Failure::fragment(e.to_string())
            }
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<ImplicationError> for Failure {
    fn from(e: ImplicationError) -> Self {
        match e {
            ImplicationError::NotDataFull { .. } => Failure::fragment(e.to_string()),
            ImplicationError::Model(m) => m.into(),
            ImplicationError::Chase(c) => c.into(),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<PcError> for Failure {
    fn from(e: PcError) -> Self {
        match e {
            PcError::Implication(i) => i.into(),
            PcError::Model(m) => m.into(),
            PcError::Consistency(_) => Failure::fragment(e.to_string()),
            PcError::BudgetExceeded(_) => Failure::input(e.to_string()),
        }
    }
}

impl From<SchemeError> for Failure {
    fn from(e: SchemeError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<AtmError> for Failure {
    fn from(e: AtmError) -> Self {
        Failure::input(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use distcheck::parser::{parse_constraints_with, ParseOptions};

    #[test]
    fn parse_errors_point_at_the_column() {
        let src = "R(x) -> S(x).\nR(x) -> S(x,y.\n";
        let e = parse_constraints_with(src, &ParseOptions::file("s.dc")).unwrap_err();
        let f = Failure::parse(&e, src);
        assert_eq!(f.status, Status::Input);
        let lines: Vec<&str> = f.message.lines().collect();
        assert!(lines[0].starts_with("s.dc:2:"), "{}", f.message);
        assert_eq!(lines[1], "  | R(x) -> S(x,y.");
        let caret = lines[2].find('^').unwrap() - 4;
        assert_eq!(caret + 1, e.span.column);
    }

    #[test]
    fn gates_map_to_fragment_status() {
        let e = ImplicationError::NotDataFull { index: 0, var: distcheck::Var::new("y") };
        assert_eq!(Failure::from(e).status, Status::Fragment);
        assert_eq!(Failure::from(PcError::Consistency(1)).status, Status::Fragment);
        assert_eq!(Failure::from(ImplicationError::Overflow).status, Status::Input);
    }
}
