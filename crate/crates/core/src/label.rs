//! The three-level offensive-language taxonomy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    A,
    B,
    C,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::A, Level::B, Level::C];

    /// Classes of this level in tie-breaking order.
    pub fn classes(self) -> &'static [ClassLabel] {
        match self {
            Level::A => &[ClassLabel::Off, ClassLabel::Not],
            Level::B => &[ClassLabel::Tin, ClassLabel::Unt],
            Level::C => &[ClassLabel::Ind, ClassLabel::Grp, ClassLabel::Oth],
        }
    }

    /// The class whose confidence is aggregated at Levels A and B.
    pub fn positive_class(self) -> Option<ClassLabel> {
        match self {
            Level::A => Some(ClassLabel::Off),
            Level::B => Some(ClassLabel::Unt),
            Level::C => None,
        }
    }

    /// Class predicted when an instance carries no evidence at all.
    pub fn fallback_class(self) -> ClassLabel {
        match self {
            Level::A => ClassLabel::Not,
            Level::B => ClassLabel::Unt,
            Level::C => ClassLabel::Ind,
        }
    }

    pub fn index_of(self, class: ClassLabel) -> Option<usize> {
        self.classes().iter().position(|&c| c == class)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::A => "A",
            Level::B => "B",
            Level::C => "C",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Level::A),
            "B" | "b" => Ok(Level::B),
            "C" | "c" => Ok(Level::C),
            other => Err(Error::invalid(format!("unknown level `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassLabel {
    Off,
    Not,
    Tin,
    Unt,
    Ind,
    Grp,
    Oth,
}

impl ClassLabel {
    pub fn level(self) -> Level {
        match self {
            ClassLabel::Off | ClassLabel::Not => Level::A,
            ClassLabel::Tin | ClassLabel::Unt => Level::B,
            ClassLabel::Ind | ClassLabel::Grp | ClassLabel::Oth => Level::C,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Off => "OFF",
            ClassLabel::Not => "NOT",
            ClassLabel::Tin => "TIN",
            ClassLabel::Unt => "UNT",
            ClassLabel::Ind => "IND",
            ClassLabel::Grp => "GRP",
            ClassLabel::Oth => "OTH",
        }
    }

    /// Parses a class name and checks that it belongs to `level`.
    pub fn parse_for(level: Level, s: &str) -> Result<Self> {
        let class: ClassLabel = s.parse()?;
        if class.level() != level {
            return Err(Error::invalid(format!(
                "class `{s}` is not a Level {level} class"
            )));
        }
        Ok(class)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "OFF" => ClassLabel::Off,
            "NOT" => ClassLabel::Not,
            "TIN" => ClassLabel::Tin,
            "UNT" => ClassLabel::Unt,
            "IND" => ClassLabel::Ind,
            "GRP" => ClassLabel::Grp,
            "OTH" => ClassLabel::Oth,
            other => return Err(Error::invalid(format!("unknown label `{other}`"))),
        })
    }
}

/// A full three-level label. Deeper levels are `None` where the taxonomy
/// does not apply (the `NULL` cells of the gold files).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HierLabel {
    pub a: ClassLabel,
    pub b: Option<ClassLabel>,
    pub c: Option<ClassLabel>,
}

impl HierLabel {
    /// Builds a label, enforcing NULL propagation:
    /// NOT has no B/C, UNT has no C, and C requires TIN.
    pub fn new(a: ClassLabel, b: Option<ClassLabel>, c: Option<ClassLabel>) -> Result<Self> {
        if a.level() != Level::A {
            return Err(Error::invalid(format!("`{a}` is not a Level A class")));
        }
        if let Some(b) = b {
            if b.level() != Level::B {
                return Err(Error::invalid(format!("`{b}` is not a Level B class")));
            }
            if a != ClassLabel::Off {
                return Err(Error::invalid(format!("{a} cannot carry a Level B label")));
            }
        }
        if let Some(c) = c {
            if c.level() != Level::C {
                return Err(Error::invalid(format!("`{c}` is not a Level C class")));
            }
            if b != Some(ClassLabel::Tin) {
                return Err(Error::invalid("a Level C label requires TIN at Level B"));
            }
        }
        Ok(HierLabel { a, b, c })
    }

    pub fn not() -> Self {
        HierLabel {
            a: ClassLabel::Not,
            b: None,
            c: None,
        }
    }

    pub fn at(&self, level: Level) -> Option<ClassLabel> {
        match level {
            Level::A => Some(self.a),
            Level::B => self.b,
            Level::C => self.c,
        }
    }

    pub fn is_valid(&self) -> bool {
        HierLabel::new(self.a, self.b, self.c).is_ok()
    }
}
