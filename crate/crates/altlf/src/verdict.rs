use std::fmt;
use std::str::FromStr;

/// Anticipatory verdict of a prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    /// Permanently satisfied: every extension satisfies the property.
    PS,
    /// Currently satisfied: the prefix satisfies it, some extension does not.
    CS,
    /// Currently violated: the prefix does not, some extension does.
    CV,
    /// Permanently violated.
    PV,
}

impl Verdict {
    pub fn is_satisfied(self) -> bool {
        matches!(self, Verdict::PS | Verdict::CS)
    }

    pub fn is_permanent(self) -> bool {
        matches!(self, Verdict::PS | Verdict::PV)
    }

    /// The verdict from current satisfaction and the existence of an
    /// extension with the opposite outcome.
    pub fn from_parts(satisfied: bool, can_flip: bool) -> Verdict {
        match (satisfied, can_flip) {
            (true, false) => Verdict::PS,
            (true, true) => Verdict::CS,
            (false, true) => Verdict::CV,
            (false, false) => Verdict::PV,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PS => "PS",
            Verdict::CS => "CS",
            Verdict::CV => "CV",
            Verdict::PV => "PV",
        })
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "PS" => Ok(Verdict::PS),
            "CS" => Ok(Verdict::CS),
            "CV" => Ok(Verdict::CV),
            "PV" => Ok(Verdict::PV),
            _ => Err(format!("unknown verdict `{s}`")),
        }
    }
}
