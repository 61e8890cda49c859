use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integrand evaluated to a non-finite value at x = {abscissa}")]
    Evaluation { abscissa: f64 },

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations (bracket width {width:e})")]
    NonConvergence { iterations: usize, width: f64 },

    #[error("level rho = {rho} is below the admissible minimum rho0 = {rho0}")]
    BelowSeparatrix { rho: f64, rho0: f64 },

    #[error("point ({x1}, {x2}) lies outside the outer region H > {level}")]
    OutsideDomain { x1: f64, x2: f64, level: f64 },

    #[error("orbit integration drifted in energy by {drift:e} (relative); use more steps per period")]
    Accuracy { drift: f64 },

    #[error("resonance condition has no solution at t = {t}; the first admissible time is about {t_min}")]
    PreAsymptotic { t: f64, t_min: f64 },

    #[error("degenerate locked phase at theta = {theta}: |P'| = {slope:e}")]
    DegenerateRoot { theta: f64, slope: f64 },

    #[error("state exceeded the overflow guard at t = {t} (last finite step at t = {last_valid})")]
    BlowUp { t: f64, last_valid: f64 },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("malformed orbit table: {0}")]
    TableFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(csv::Error),
}

impl From<csv::Error> for Error {
    /// I/O failures inside the CSV layer surface as [`Error::Io`] so callers can inspect the kind.
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            if let csv::ErrorKind::Io(io) = e.into_kind() {
                return Error::Io(io);
            }
            unreachable!("is_io_error implies an Io kind");
        }
        Error::Csv(e)
    }
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Unsupported(_)
                | Error::BelowSeparatrix { .. }
                | Error::OutsideDomain { .. }
                | Error::PreAsymptotic { .. }
                | Error::TableFormat(_)
                | Error::Json(_)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_io_failures_become_io_errors() {
        let io = std::io::Error::new(std::io::ErrorKind::BrokenPipe, "closed");
        match Error::from(csv::Error::from(io)) {
            Error::Io(e) => assert_eq!(e.kind(), std::io::ErrorKind::BrokenPipe),
            other => panic!("expected Io, got {other:?}"),
        }
        let parse = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader("1,2\n3\n".as_bytes())
            .records()
            .find_map(|r| r.err())
            .expect("ragged rows are rejected");
        assert!(matches!(Error::from(parse), Error::Csv(_)));
    }
}
