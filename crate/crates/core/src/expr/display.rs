// Pretty-printing in the program file grammar. Output reparses to an
// identical Program.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{AffineExpr, AffineInequality, BoundExpr, Program};

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, c) in &self.coeffs {
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
            first = false;
        }
        if first {
            return write!(f, "{}", self.constant);
        }
        if !self.constant.is_zero() {
            let sep = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sep} {}", self.constant.abs())?;
        }
        Ok(())
    }
}

impl fmt::Display for AffineInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation.symbol(), self.rhs)
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundExpr::Affine(a) => write!(f, "{a}"),
            BoundExpr::Max(cs) | BoundExpr::Min(cs) => {
                let name = if matches!(self, BoundExpr::Max(_)) { "max" } else { "min" };
                write!(f, "{name}(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            BoundExpr::If {
                condition,
                then,
                otherwise,
            } => write!(f, "if({condition}; {then}; {otherwise})"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.variables.join(" "))?;
        for (name, value) in &self.constants {
            writeln!(f, "const {name} = {value}")?;
        }
        for c in &self.constraints {
            writeln!(f, "constraint {c}")?;
        }
        for b in &self.bounds {
            writeln!(f, "bound {b}")?;
        }
        Ok(())
    }
}
