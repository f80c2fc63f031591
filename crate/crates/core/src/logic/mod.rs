//! Graded template modal logic GML(T).

pub mod charform;
pub mod eval;
mod formula;
mod parser;
pub mod random;

pub use charform::{
    char_formula_bounded, char_formula_unbounded, class_defining_formula, BoundedCharacteristic,
    UnboundedCharacteristic,
};
pub use eval::{eval, eval_all, Evaluator, SatVector};
pub use formula::{Formula, FormulaDisplay, Node, SubformulaTable};
pub use parser::{parse_formula, ParseError, ParseErrorKind};
