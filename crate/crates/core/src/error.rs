use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("spline order k = {k} requires k > d/2 = {half_d} on a {d}-dimensional manifold")]
    OrderTooSmall { k: u32, d: u32, half_d: f64 },

    #[error("matrix is not positive definite: nonpositive pivot at index {pivot} (1-based)")]
    NotPositiveDefinite { pivot: usize },

    #[error("mass matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e} below -{tol:.3e}")]
    MassNotPsd { min_eigenvalue: f64, tol: f64 },

    #[error(
        "order k = {k} too large for N = {n} nodes at {scalar} precision: \
         interpolation residual {residual:.3e} exceeds {gate:.3e} \
         (condition estimate {condition:.3e}); reduce k or use the dd scalar"
    )]
    IllConditioned {
        k: u32,
        n: usize,
        scalar: &'static str,
        residual: f64,
        gate: f64,
        condition: f64,
    },

    #[error("eigenfunction descriptor {descriptor} does not belong to manifold {manifold}")]
    DescriptorMismatch {
        descriptor: String,
        manifold: String,
    },

    #[error("associated Legendre degree l = {l} exceeds the stable recurrence cap {cap}")]
    DegreeCap { l: u32, cap: u32 },

    #[error("zeta series requires Re s >= d/2 + 0.1 = {abscissa}; got Re s = {re}")]
    ZetaDomain { re: f64, abscissa: f64 },

    #[error("degenerate Ritz spectrum: no eigenvalue above the zero tolerance {zero_tol:.3e}")]
    DegenerateSpectrum { zero_tol: f64 },

    #[error("jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("spectral content at eigenvalue {lambda} exceeds the space cutoff {cutoff}")]
    BeyondCutoff { lambda: f64, cutoff: f64 },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of numerical nature (as opposed to bad parameters
    /// or i/o); the CLI maps these to a distinct exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::MassNotPsd { .. }
                | Error::IllConditioned { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::NoConvergence(_)
                | Error::Precondition(_)
        )
    }
}
