//! Text definitions of T-functions on `Z_p^k`.
//!
//! ```text
//! p=2 k=2; f0 = x1; f1 = x0 + (x1 * x1)
//! ```
//!
//! Operators are `+ - *` for any prime and `xor and or not` for `p = 2`.
//! There are no right shifts or divisions: those are not 1-Lipschitz.

mod ast;
mod parser;

pub use ast::{BinOp, Expr, MapSpec};
pub use parser::{parse, ParseError, ParseErrorKind};
