use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: x has {x_rows} rows but y has {y_len} entries")]
    DimensionMismatch { x_rows: usize, y_len: usize },

    #[error("too few observations: n={n} but at least {min} are required")]
    TooFewObservations { n: usize, min: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: String },

    #[error("duplicate observation label {label}")]
    DuplicateLabel { label: usize },

    #[error("brute-force guard violated: n={n}, p={p} exceeds n<=15, p<=3")]
    BruteForceGuard { n: usize, p: usize },

    #[error("all candidate interpolating systems are singular")]
    AllSystemsSingular,

    #[error("all residuals are zero; dataset is degenerate")]
    AllResidualsZero,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("LAD solver failed: {0}")]
    SolverFailure(String),

    #[error("unknown bundled dataset {name:?}; valid names: telephone, hawkins, scottish")]
    UnknownBundled { name: String },

    #[error("unknown generated dataset {name:?}; valid names: twovariables, threevariables")]
    UnknownGenerated { name: String },

    #[error("response column {column:?} not found in header {header:?}")]
    ResponseColumnNotFound { column: String, header: Vec<String> },

    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("CSV parse error in {path}: {source}")]
    Csv { path: String, source: csv::Error },

    #[error("non-numeric or empty cell at row {row}, column {col:?}: {value:?}")]
    BadCell {
        row: usize,
        col: String,
        value: String,
    },

    #[error("duplicate header column {name:?}")]
    DuplicateHeader { name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code class: 2 for data problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverFailure(_)
            | Error::RankDeficient
            | Error::AllResidualsZero
            | Error::AllSystemsSingular => 3,
            _ => 2,
        }
    }
}
