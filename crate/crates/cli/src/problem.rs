//! Problem-file grammar: versioned header, keyword-introduced blocks,
//! infix polynomial expressions with exact rational and decimal
//! literals. Parsing keeps expression ASTs; polynomial normal forms are
//! produced per parameter instantiation (inertia-style declarations
//! divide by parameters, which only becomes rational arithmetic once
//! values are substituted).

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use stabcert_core::symbolic::rat::{self, Rat};
use stabcert_core::symbolic::{
    OdeSystem, Polynomial, Rel, SemiAlgebraicFormula, TargetSet, VarSet,
};
use stabcert_core::rules::cartesian_grid;

pub const GRAMMAR_VERSION: &str = "v1";
pub const HEADER: &str = "stabcert-problem";

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProblemError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdent { line: u32, col: u32, name: String },
    #[error("{line}:{col}: non-polynomial construct `{name}`: express it with a differential ghost variable (an auxiliary state with a polynomial ODE) instead")]
    NonPolynomial { line: u32, col: u32, name: String },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

fn syn(line: u32, col: u32, msg: impl Into<String>) -> ProblemError {
    ProblemError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------------
// Expressions and formulas (ASTs preserved for normalized printing).
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rat),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var(_) => 5,
        }
    }

    /// Canonical normalized rendering; reparsing it reproduces the AST.
    pub fn render(&self) -> String {
        fn child(e: &Expr, min_prec: u8) -> String {
            if e.prec() < min_prec {
                format!("({})", e.render())
            } else {
                e.render()
            }
        }
        match self {
            Expr::Num(r) => {
                if r < &rat::zero() {
                    // Negative literals print through Neg to stay
                    // reparse-stable.
                    format!("(-{})", rat::display(&(-r.clone())))
                } else {
                    rat::display(r)
                }
            }
            Expr::Var(n) => n.clone(),
            Expr::Neg(a) => format!("-{}", child(a, 3)),
            Expr::Add(a, b) => format!("{} + {}", child(a, 1), child(b, 2)),
            Expr::Sub(a, b) => format!("{} - {}", child(a, 1), child(b, 2)),
            Expr::Mul(a, b) => format!("{}*{}", child(a, 2), child(b, 3)),
            Expr::Div(a, b) => format!("{}/{}", child(a, 2), child(b, 3)),
            Expr::Pow(a, k) => format!("{}^{}", child(a, 5), k),
        }
    }

    /// Expands to a polynomial over the state table, with parameters
    /// substituted from `env`. Division requires a nonzero constant
    /// divisor after substitution.
    pub fn to_polynomial(
        &self,
        vars: &VarSet,
        env: &BTreeMap<String, Rat>,
    ) -> Result<Polynomial, ProblemError> {
        let n = vars.len();
        Ok(match self {
            Expr::Num(r) => Polynomial::constant(n, r.clone()),
            Expr::Var(name) => {
                if let Some(idx) = vars.index_of(name) {
                    Polynomial::var(n, idx)
                } else if let Some(val) = env.get(name) {
                    Polynomial::constant(n, val.clone())
                } else {
                    return Err(ProblemError::Invalid(format!(
                        "unknown identifier `{name}` in expression"
                    )));
                }
            }
            Expr::Neg(a) => -&a.to_polynomial(vars, env)?,
            Expr::Add(a, b) => &a.to_polynomial(vars, env)? + &b.to_polynomial(vars, env)?,
            Expr::Sub(a, b) => &a.to_polynomial(vars, env)? - &b.to_polynomial(vars, env)?,
            Expr::Mul(a, b) => &a.to_polynomial(vars, env)? * &b.to_polynomial(vars, env)?,
            Expr::Div(a, b) => {
                let denom = b.to_polynomial(vars, env)?;
                match denom.as_constant() {
                    Some(c) if !c.is_zero() => {
                        a.to_polynomial(vars, env)?.scale(&(rat::one() / c))
                    }
                    Some(_) => {
                        return Err(ProblemError::Invalid("division by zero".into()));
                    }
                    None => {
                        return Err(ProblemError::Invalid(
                            "division by a non-constant expression".into(),
                        ))
                    }
                }
            }
            Expr::Pow(a, k) => a.to_polynomial(vars, env)?.pow(*k),
        })
    }

    /// Constant value (parameters only), for grids and config entries.
    pub fn to_rat(&self, env: &BTreeMap<String, Rat>) -> Result<Rat, ProblemError> {
        let vars = VarSet::states(Vec::<String>::new());
        let p = self.to_polynomial(&vars, env)?;
        p.as_constant()
            .ok_or_else(|| ProblemError::Invalid("expected a constant expression".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormulaAst {
    True,
    False,
    Cmp(Expr, Rel, Expr),
    And(Box<FormulaAst>, Box<FormulaAst>),
    Or(Box<FormulaAst>, Box<FormulaAst>),
    Not(Box<FormulaAst>),
}

impl FormulaAst {
    pub fn render(&self) -> String {
        fn prec(f: &FormulaAst) -> u8 {
            match f {
                FormulaAst::Or(..) => 0,
                FormulaAst::And(..) => 1,
                _ => 2,
            }
        }
        fn child(f: &FormulaAst, min: u8) -> String {
            if prec(f) < min {
                format!("({})", f.render())
            } else {
                f.render()
            }
        }
        match self {
            FormulaAst::True => "true".into(),
            FormulaAst::False => "false".into(),
            FormulaAst::Cmp(a, r, b) => format!("{} {} {}", a.render(), r.symbol(), b.render()),
            FormulaAst::And(a, b) => format!("{} & {}", child(a, 1), child(b, 1)),
            FormulaAst::Or(a, b) => format!("{} | {}", child(a, 0), child(b, 0)),
            FormulaAst::Not(a) => format!("!({})", a.render()),
        }
    }

    pub fn to_formula(
        &self,
        vars: &VarSet,
        env: &BTreeMap<String, Rat>,
    ) -> Result<SemiAlgebraicFormula, ProblemError> {
        Ok(match self {
            FormulaAst::True => SemiAlgebraicFormula::True,
            FormulaAst::False => SemiAlgebraicFormula::False,
            FormulaAst::Cmp(a, rel, b) => {
                let p = &a.to_polynomial(vars, env)? - &b.to_polynomial(vars, env)?;
                SemiAlgebraicFormula::atom(p, *rel)
            }
            FormulaAst::And(a, b) => {
                SemiAlgebraicFormula::and(a.to_formula(vars, env)?, b.to_formula(vars, env)?)
            }
            FormulaAst::Or(a, b) => {
                SemiAlgebraicFormula::or(a.to_formula(vars, env)?, b.to_formula(vars, env)?)
            }
            FormulaAst::Not(a) => SemiAlgebraicFormula::not(a.to_formula(vars, env)?),
        })
    }
}

// ---------------------------------------------------------------------
// Declarations.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub values: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetDecl {
    Origin,
    Subspace(Vec<String>),
    Formula { formula: FormulaAst, compact: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyDecl {
    Stab,
    Attr,
    AStab,
    ExpStab,
    GlobalAStab,
    GlobalExpStab,
    SetStab,
    SetAStab,
    GlobalSetAStab,
    EpsStab(Rat),
    GeneralStabBall(Rat),
    GeneralStabOrigin,
}

impl PropertyDecl {
    pub fn keyword(&self) -> String {
        match self {
            PropertyDecl::Stab => "stab;".into(),
            PropertyDecl::Attr => "attr;".into(),
            PropertyDecl::AStab => "astab;".into(),
            PropertyDecl::ExpStab => "expstab;".into(),
            PropertyDecl::GlobalAStab => "global_astab;".into(),
            PropertyDecl::GlobalExpStab => "global_expstab;".into(),
            PropertyDecl::SetStab => "set_stab;".into(),
            PropertyDecl::SetAStab => "set_astab;".into(),
            PropertyDecl::GlobalSetAStab => "global_set_astab;".into(),
            PropertyDecl::EpsStab(e) => format!("eps_stab eps = {};", rat::display(e)),
            PropertyDecl::GeneralStabBall(r) => {
                format!("general_stab radius = {};", rat::display(r))
            }
            PropertyDecl::GeneralStabOrigin => "general_stab origin;".into(),
        }
    }
}

/// Candidate block: an expression, an explicitly external slot, or
/// absent.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateV {
    None,
    /// Declared REQUIRED-EXTERNAL: the file is runnable only once a
    /// candidate is supplied through the API.
    External,
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDecl {
    pub v: CandidateV,
    pub k1: Option<Rat>,
    pub k2: Option<Rat>,
    pub k3: Option<Rat>,
    pub gamma: Option<Rat>,
}

impl Default for CandidateDecl {
    fn default() -> Self {
        CandidateDecl {
            v: CandidateV::None,
            k1: None,
            k2: None,
            k3: None,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDecl {
    pub budget: Option<u64>,
    pub seed: u64,
    pub horizon: Option<Rat>,
    pub eps_schedule: Option<Vec<Rat>>,
    pub gamma_schedule: Option<Vec<Rat>>,
    pub samples: Option<u32>,
    pub cutoff: Option<Rat>,
    pub tolerance: Option<Rat>,
    pub evidence: bool,
    pub energy: Option<Expr>,
}

impl Default for ConfigDecl {
    fn default() -> Self {
        ConfigDecl {
            budget: None,
            seed: 0,
            horizon: None,
            eps_schedule: None,
            gamma_schedule: None,
            samples: None,
            cutoff: None,
            tolerance: None,
            evidence: false,
            energy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub state_vars: Vec<String>,
    pub params: Vec<ParamDecl>,
    pub constraints: Vec<FormulaAst>,
    /// One right-hand side per state variable, in declaration order.
    pub rhs: Vec<Expr>,
    pub domain: Option<FormulaAst>,
    pub target: TargetDecl,
    pub property: PropertyDecl,
    pub candidate: CandidateDecl,
    pub config: ConfigDecl,
}

/// One parameter instantiation, fully expanded to polynomials over the
/// state variables.
#[derive(Debug, Clone)]
pub struct Instance {
    pub param_values: BTreeMap<String, Rat>,
    pub ode: OdeSystem,
    pub target: TargetSet,
    pub v: Option<Polynomial>,
    pub energy: Option<Polynomial>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile, ProblemError> {
        Parser::new(text)?.parse_file()
    }

    /// Cartesian parameter grid filtered by the declared constraints.
    pub fn grid(&self) -> Result<Vec<BTreeMap<String, Rat>>, ProblemError> {
        let axes: Vec<Vec<Rat>> = self.params.iter().map(|p| p.values.clone()).collect();
        let mut out = Vec::new();
        for row in cartesian_grid(&axes) {
            let env: BTreeMap<String, Rat> = self
                .params
                .iter()
                .map(|p| p.name.clone())
                .zip(row.iter().cloned())
                .collect();
            let mut ok = true;
            for c in &self.constraints {
                let f = c.to_formula(&VarSet::states(Vec::<String>::new()), &env)?;
                if !f.holds_at(&[]) {
                    ok = false;
                    break;
                }
            }
            if ok {
                out.push(env);
            }
        }
        Ok(out)
    }

    /// Expands every admissible grid point into a parameter-free system
    /// with instantiated candidate, target and energy polynomials.
    pub fn instances(&self) -> Result<Vec<Instance>, ProblemError> {
        let vars = VarSet::states(self.state_vars.clone());
        let mut out = Vec::new();
        for env in self.grid()? {
            let rhs = self
                .rhs
                .iter()
                .map(|e| e.to_polynomial(&vars, &env))
                .collect::<Result<Vec<_>, _>>()?;
            let domain = match &self.domain {
                None => None,
                Some(f) => Some(f.to_formula(&vars, &env)?),
            };
            let ode = OdeSystem::new(vars.clone(), rhs, domain)
                .map_err(|e| ProblemError::Invalid(e.to_string()))?;
            let target = match &self.target {
                TargetDecl::Origin => TargetSet::Origin,
                TargetDecl::Subspace(names) => {
                    let idx = names
                        .iter()
                        .map(|n| {
                            vars.index_of(n).ok_or_else(|| {
                                ProblemError::Invalid(format!("unknown state variable `{n}`"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    TargetSet::subspace(idx, &vars)
                        .map_err(|e| ProblemError::Invalid(e.to_string()))?
                }
                TargetDecl::Formula { formula, compact } => TargetSet::Formula {
                    formula: formula.to_formula(&vars, &env)?,
                    compact: *compact,
                },
            };
            let v = match &self.candidate.v {
                CandidateV::Expr(e) => Some(e.to_polynomial(&vars, &env)?),
                _ => None,
            };
            let energy = match &self.config.energy {
                Some(e) => Some(e.to_polynomial(&vars, &env)?),
                None => None,
            };
            out.push(Instance {
                param_values: env,
                ode,
                target,
                v,
                energy,
            });
        }
        Ok(out)
    }

    pub fn candidate_required_external(&self) -> bool {
        matches!(self.candidate.v, CandidateV::External)
    }
}

impl fmt::Display for ProblemFile {
    /// Normalized printing: `parse(print(parse(text))) == parse(text)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{HEADER} {GRAMMAR_VERSION}")?;
        writeln!(f)?;
        writeln!(f, "system {{")?;
        writeln!(f, "  state {};", self.state_vars.join(", "))?;
        for p in &self.params {
            if p.values.len() == 1 {
                writeln!(f, "  param {} = {};", p.name, rat::display(&p.values[0]))?;
            } else {
                let vals: Vec<String> = p.values.iter().map(rat::display).collect();
                writeln!(f, "  param {} = {{{}}};", p.name, vals.join(", "))?;
            }
        }
        for c in &self.constraints {
            writeln!(f, "  constraint {};", c.render())?;
        }
        for (name, rhs) in self.state_vars.iter().zip(&self.rhs) {
            writeln!(f, "  {}' = {};", name, rhs.render())?;
        }
        if let Some(d) = &self.domain {
            writeln!(f, "  domain {};", d.render())?;
        }
        writeln!(f, "}}")?;
        writeln!(f)?;
        match &self.target {
            TargetDecl::Origin => writeln!(f, "target {{ origin; }}")?,
            TargetDecl::Subspace(names) => {
                writeln!(f, "target {{ subspace {}; }}", names.join(", "))?
            }
            TargetDecl::Formula { formula, compact } => writeln!(
                f,
                "target {{ formula {}{}; }}",
                formula.render(),
                if *compact { " compact" } else { "" }
            )?,
        }
        writeln!(f)?;
        writeln!(f, "property {{ {} }}", self.property.keyword())?;
        writeln!(f)?;
        writeln!(f, "candidate {{")?;
        match &self.candidate.v {
            CandidateV::None => {}
            CandidateV::External => writeln!(f, "  v = external;")?,
            CandidateV::Expr(e) => writeln!(f, "  v = {};", e.render())?,
        }
        for (name, val) in [
            ("k1", &self.candidate.k1),
            ("k2", &self.candidate.k2),
            ("k3", &self.candidate.k3),
            ("gamma", &self.candidate.gamma),
        ] {
            if let Some(v) = val {
                writeln!(f, "  {} = {};", name, rat::display(v))?;
            }
        }
        writeln!(f, "}}")?;
        writeln!(f)?;
        writeln!(f, "config {{")?;
        if let Some(b) = self.config.budget {
            writeln!(f, "  budget = {b};")?;
        }
        writeln!(f, "  seed = {};", self.config.seed)?;
        if let Some(h) = &self.config.horizon {
            writeln!(f, "  horizon = {};", rat::display(h))?;
        }
        for (name, sched) in [
            ("eps_schedule", &self.config.eps_schedule),
            ("gamma_schedule", &self.config.gamma_schedule),
        ] {
            if let Some(s) = sched {
                let vals: Vec<String> = s.iter().map(rat::display).collect();
                writeln!(f, "  {} = {{{}}};", name, vals.join(", "))?;
            }
        }
        if let Some(s) = self.config.samples {
            writeln!(f, "  samples = {s};")?;
        }
        if let Some(c) = &self.config.cutoff {
            writeln!(f, "  cutoff = {};", rat::display(c))?;
        }
        if let Some(t) = &self.config.tolerance {
            writeln!(f, "  tolerance = {};", rat::display(t))?;
        }
        if self.config.evidence {
            writeln!(f, "  evidence = true;")?;
        }
        if let Some(e) = &self.config.energy {
            writeln!(f, "  energy = {};", e.render())?;
        }
        writeln!(f, "}}")?;
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Lexer.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rat),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Amp,
    Pipe,
    Bang,
    Prime,
    RelEq,
    RelNe,
    RelGe,
    RelGt,
    RelLe,
    RelLt,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ProblemError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: l0, col: c0 });
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '#' => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '{' => push(Tok::LBrace),
            '}' => push(Tok::RBrace),
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            ',' => push(Tok::Comma),
            ';' => push(Tok::Semi),
            '+' => push(Tok::Plus),
            '-' => push(Tok::Minus),
            '*' => push(Tok::Star),
            '/' => push(Tok::Slash),
            '^' => push(Tok::Caret),
            '&' => push(Tok::Amp),
            '|' => push(Tok::Pipe),
            '\'' => push(Tok::Prime),
            '!' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    push(Tok::RelNe);
                    i += 1;
                    col += 1;
                } else {
                    push(Tok::Bang);
                }
            }
            '=' => push(Tok::RelEq),
            '<' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    push(Tok::RelLe);
                    i += 1;
                    col += 1;
                } else {
                    push(Tok::RelLt);
                }
            }
            '>' => {
                if i + 1 < bytes.len() && bytes[i + 1] == '=' {
                    push(Tok::RelGe);
                    i += 1;
                    col += 1;
                } else {
                    push(Tok::RelGt);
                }
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut int_part: String = bytes[start..i].iter().collect();
                let mut frac_digits = 0u32;
                if i < bytes.len() && bytes[i] == '.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == fs {
                        return Err(syn(l0, c0, "expected digits after decimal point"));
                    }
                    frac_digits = (i - fs) as u32;
                    let frac: String = bytes[fs..i].iter().collect();
                    int_part.push_str(&frac);
                }
                let mut exp: i64 = 0;
                if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                    let save = i;
                    let mut j = i + 1;
                    let neg = j < bytes.len() && (bytes[j] == '-' || bytes[j] == '+');
                    let sign = if neg && bytes[j] == '-' { -1 } else { 1 };
                    if neg {
                        j += 1;
                    }
                    let ds = j;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j > ds {
                        let digits: String = bytes[ds..j].iter().collect();
                        exp = sign
                            * digits.parse::<i64>().map_err(|_| {
                                syn(l0, c0, "exponent out of range")
                            })?;
                        i = j;
                    } else {
                        i = save;
                    }
                }
                let digits: Rat = int_part
                    .parse::<num_bigint_shim::BigIntShim>()
                    .map(|b| b.0)
                    .map_err(|_| syn(l0, c0, "bad number"))?;
                let scale = exp - frac_digits as i64;
                let value = if scale >= 0 {
                    digits * rat::pow(&rat::int(10), scale as u32)
                } else {
                    digits / rat::pow(&rat::int(10), (-scale) as u32)
                };
                let consumed = i - start;
                out.push(Spanned {
                    tok: Tok::Num(value),
                    line: l0,
                    col: c0,
                });
                col += consumed as u32;
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let name: String = bytes[start..i].iter().collect();
                let consumed = i - start;
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    line: l0,
                    col: c0,
                });
                col += consumed as u32;
                continue;
            }
            other => {
                return Err(syn(line, col, format!("unexpected character `{other}`")));
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Exact big-integer parsing without pulling the bigint API into the
/// lexer signature.
mod num_bigint_shim {
    use std::str::FromStr;

    use stabcert_core::symbolic::rat::Rat;

    pub struct BigIntShim(pub Rat);

    impl FromStr for BigIntShim {
        type Err = ();
        fn from_str(s: &str) -> Result<Self, ()> {
            let n = num_bigint::BigInt::from_str(s).map_err(|_| ())?;
            Ok(BigIntShim(Rat::from_integer(n)))
        }
    }
}

// ---------------------------------------------------------------------
// Parser.
// ---------------------------------------------------------------------

const FUNCTIONS: &[&str] = &[
    "sin", "cos", "tan", "exp", "log", "ln", "sqrt", "abs", "sinh", "cosh", "tanh",
];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ProblemError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Spanned {
        let s = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Spanned, ProblemError> {
        let s = self.next();
        if s.tok == tok {
            Ok(s)
        } else {
            Err(syn(s.line, s.col, format!("expected {what}")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, u32, u32), ProblemError> {
        let s = self.next();
        match s.tok {
            Tok::Ident(n) => Ok((n, s.line, s.col)),
            _ => Err(syn(s.line, s.col, format!("expected {what}"))),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> Result<(), ProblemError> {
        let s = self.next();
        match &s.tok {
            Tok::Ident(n) if n == kw => Ok(()),
            _ => Err(syn(s.line, s.col, format!("expected keyword `{kw}`"))),
        }
    }

    fn parse_file(&mut self) -> Result<ProblemFile, ProblemError> {
        // Header: `stabcert-problem v1` lexes as idents and a minus.
        self.parse_header()?;

        let mut state_vars = Vec::new();
        let mut params = Vec::new();
        let mut constraints = Vec::new();
        let mut rhs_map: BTreeMap<String, Expr> = BTreeMap::new();
        let mut rhs_order: Vec<String> = Vec::new();
        let mut domain = None;
        let mut target = None;
        let mut property = None;
        let mut candidate = CandidateDecl::default();
        let mut config = ConfigDecl::default();

        loop {
            let s = self.next();
            match &s.tok {
                Tok::Eof => break,
                Tok::Ident(block) => match block.as_str() {
                    "system" => self.parse_system(
                        &mut state_vars,
                        &mut params,
                        &mut constraints,
                        &mut rhs_map,
                        &mut rhs_order,
                        &mut domain,
                    )?,
                    "target" => target = Some(self.parse_target()?),
                    "property" => property = Some(self.parse_property()?),
                    "candidate" => candidate = self.parse_candidate()?,
                    "config" => config = self.parse_config()?,
                    other => {
                        return Err(syn(s.line, s.col, format!("unknown block `{other}`")));
                    }
                },
                _ => return Err(syn(s.line, s.col, "expected a block keyword")),
            }
        }

        let target =
            target.ok_or_else(|| ProblemError::Invalid("missing target block".into()))?;
        let property =
            property.ok_or_else(|| ProblemError::Invalid("missing property block".into()))?;
        if state_vars.is_empty() {
            return Err(ProblemError::Invalid("no state variables declared".into()));
        }
        let mut rhs = Vec::new();
        for name in &state_vars {
            match rhs_map.remove(name) {
                Some(e) => rhs.push(e),
                None => {
                    return Err(ProblemError::Invalid(format!(
                        "missing equation for `{name}'`"
                    )))
                }
            }
        }
        for leftover in rhs_order {
            if !state_vars.contains(&leftover) {
                return Err(ProblemError::Invalid(format!(
                    "equation for undeclared variable `{leftover}'`"
                )));
            }
        }
        Ok(ProblemFile {
            state_vars,
            params,
            constraints,
            rhs,
            domain,
            target,
            property,
            candidate,
            config,
        })
    }

    fn parse_header(&mut self) -> Result<(), ProblemError> {
        // `stabcert` `-` `problem` `v1`
        let (name, l, c) = self.expect_ident("problem header")?;
        if name != "stabcert" {
            return Err(syn(l, c, "expected `stabcert-problem v1` header"));
        }
        self.expect(Tok::Minus, "`-` in header")?;
        let (word, l2, c2) = self.expect_ident("`problem` in header")?;
        if word != "problem" {
            return Err(syn(l2, c2, "expected `stabcert-problem v1` header"));
        }
        let (ver, l3, c3) = self.expect_ident("grammar version")?;
        if ver != GRAMMAR_VERSION {
            return Err(syn(
                l3,
                c3,
                format!("unsupported grammar version `{ver}` (expected {GRAMMAR_VERSION})"),
            ));
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn parse_system(
        &mut self,
        state_vars: &mut Vec<String>,
        params: &mut Vec<ParamDecl>,
        constraints: &mut Vec<FormulaAst>,
        rhs_map: &mut BTreeMap<String, Expr>,
        rhs_order: &mut Vec<String>,
        domain: &mut Option<FormulaAst>,
    ) -> Result<(), ProblemError> {
        self.expect(Tok::LBrace, "`{`")?;
        loop {
            let s = self.next();
            match &s.tok {
                Tok::RBrace => break,
                Tok::Ident(word) => match word.as_str() {
                    "state" => loop {
                        let (name, _, _) = self.expect_ident("state variable name")?;
                        state_vars.push(name);
                        let t = self.next();
                        match t.tok {
                            Tok::Comma => continue,
                            Tok::Semi => break,
                            _ => return Err(syn(t.line, t.col, "expected `,` or `;`")),
                        }
                    },
                    "param" => {
                        let (name, _, _) = self.expect_ident("parameter name")?;
                        self.expect(Tok::RelEq, "`=`")?;
                        let values = if self.peek().tok == Tok::LBrace {
                            self.next();
                            let mut vals = Vec::new();
                            loop {
                                let e = self.parse_expr()?;
                                vals.push(e.to_rat(&BTreeMap::new())?);
                                let t = self.next();
                                match t.tok {
                                    Tok::Comma => continue,
                                    Tok::RBrace => break,
                                    _ => return Err(syn(t.line, t.col, "expected `,` or `}`")),
                                }
                            }
                            vals
                        } else {
                            let e = self.parse_expr()?;
                            vec![e.to_rat(&BTreeMap::new())?]
                        };
                        self.expect(Tok::Semi, "`;`")?;
                        params.push(ParamDecl { name, values });
                    }
                    "constraint" => {
                        let f = self.parse_formula()?;
                        self.expect(Tok::Semi, "`;`")?;
                        constraints.push(f);
                    }
                    "domain" => {
                        let f = self.parse_formula()?;
                        self.expect(Tok::Semi, "`;`")?;
                        *domain = Some(f);
                    }
                    name => {
                        // `name' = expr;`
                        self.expect(Tok::Prime, "`'` after variable name")?;
                        self.expect(Tok::RelEq, "`=`")?;
                        let e = self.parse_expr()?;
                        self.expect(Tok::Semi, "`;`")?;
                        if rhs_map.insert(name.to_string(), e).is_some() {
                            return Err(syn(
                                s.line,
                                s.col,
                                format!("duplicate equation for `{name}'`"),
                            ));
                        }
                        rhs_order.push(name.to_string());
                    }
                },
                _ => return Err(syn(s.line, s.col, "expected a system declaration")),
            }
        }
        Ok(())
    }

    fn parse_target(&mut self) -> Result<TargetDecl, ProblemError> {
        self.expect(Tok::LBrace, "`{`")?;
        let (kind, l, c) = self.expect_ident("target kind")?;
        let decl = match kind.as_str() {
            "origin" => {
                self.expect(Tok::Semi, "`;`")?;
                TargetDecl::Origin
            }
            "subspace" => {
                let mut names = Vec::new();
                loop {
                    let (name, _, _) = self.expect_ident("state variable name")?;
                    names.push(name);
                    let t = self.next();
                    match t.tok {
                        Tok::Comma => continue,
                        Tok::Semi => break,
                        _ => return Err(syn(t.line, t.col, "expected `,` or `;`")),
                    }
                }
                TargetDecl::Subspace(names)
            }
            "formula" => {
                let f = self.parse_formula()?;
                let mut compact = false;
                if let Tok::Ident(word) = &self.peek().tok {
                    if word == "compact" {
                        self.next();
                        compact = true;
                    }
                }
                self.expect(Tok::Semi, "`;`")?;
                TargetDecl::Formula {
                    formula: f,
                    compact,
                }
            }
            other => return Err(syn(l, c, format!("unknown target kind `{other}`"))),
        };
        self.expect(Tok::RBrace, "`}`")?;
        Ok(decl)
    }

    fn parse_property(&mut self) -> Result<PropertyDecl, ProblemError> {
        self.expect(Tok::LBrace, "`{`")?;
        let (kind, l, c) = self.expect_ident("property name")?;
        let decl = match kind.as_str() {
            "stab" => PropertyDecl::Stab,
            "attr" => PropertyDecl::Attr,
            "astab" => PropertyDecl::AStab,
            "expstab" => PropertyDecl::ExpStab,
            "global_astab" => PropertyDecl::GlobalAStab,
            "global_expstab" => PropertyDecl::GlobalExpStab,
            "set_stab" => PropertyDecl::SetStab,
            "set_astab" => PropertyDecl::SetAStab,
            "global_set_astab" => PropertyDecl::GlobalSetAStab,
            "eps_stab" => {
                self.eat_keyword("eps")?;
                self.expect(Tok::RelEq, "`=`")?;
                let e = self.parse_expr()?.to_rat(&BTreeMap::new())?;
                PropertyDecl::EpsStab(e)
            }
            "general_stab" => {
                let (word, _, _) = self.expect_ident("`radius` or `origin`")?;
                match word.as_str() {
                    "origin" => PropertyDecl::GeneralStabOrigin,
                    "radius" => {
                        self.expect(Tok::RelEq, "`=`")?;
                        let r = self.parse_expr()?.to_rat(&BTreeMap::new())?;
                        PropertyDecl::GeneralStabBall(r)
                    }
                    other => {
                        return Err(syn(l, c, format!("unknown general_stab form `{other}`")))
                    }
                }
            }
            other => return Err(syn(l, c, format!("unknown property `{other}`"))),
        };
        self.expect(Tok::Semi, "`;`")?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(decl)
    }

    fn parse_candidate(&mut self) -> Result<CandidateDecl, ProblemError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut decl = CandidateDecl::default();
        loop {
            let s = self.next();
            match &s.tok {
                Tok::RBrace => break,
                Tok::Ident(word) => {
                    self.expect(Tok::RelEq, "`=`")?;
                    match word.as_str() {
                        "v" => {
                            if let Tok::Ident(w) = &self.peek().tok {
                                if w == "external" {
                                    self.next();
                                    self.expect(Tok::Semi, "`;`")?;
                                    decl.v = CandidateV::External;
                                    continue;
                                }
                            }
                            let e = self.parse_expr()?;
                            self.expect(Tok::Semi, "`;`")?;
                            decl.v = CandidateV::Expr(e);
                        }
                        "k1" | "k2" | "k3" | "gamma" => {
                            let val = self.parse_expr()?.to_rat(&BTreeMap::new())?;
                            self.expect(Tok::Semi, "`;`")?;
                            match word.as_str() {
                                "k1" => decl.k1 = Some(val),
                                "k2" => decl.k2 = Some(val),
                                "k3" => decl.k3 = Some(val),
                                _ => decl.gamma = Some(val),
                            }
                        }
                        other => {
                            return Err(syn(
                                s.line,
                                s.col,
                                format!("unknown candidate field `{other}`"),
                            ))
                        }
                    }
                }
                _ => return Err(syn(s.line, s.col, "expected a candidate field")),
            }
        }
        Ok(decl)
    }

    fn parse_config(&mut self) -> Result<ConfigDecl, ProblemError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut cfg = ConfigDecl::default();
        loop {
            let s = self.next();
            match &s.tok {
                Tok::RBrace => break,
                Tok::Ident(word) => {
                    self.expect(Tok::RelEq, "`=`")?;
                    match word.as_str() {
                        "budget" => {
                            let v = self.parse_expr()?.to_rat(&BTreeMap::new())?;
                            cfg.budget = Some(rat_to_u64(&v)?);
                        }
                        "seed" => {
                            let v = self.parse_expr()?.to_rat(&BTreeMap::new())?;
                            cfg.seed = rat_to_u64(&v)?;
                        }
                        "horizon" => {
                            cfg.horizon = Some(self.parse_expr()?.to_rat(&BTreeMap::new())?)
                        }
                        "samples" => {
                            let v = self.parse_expr()?.to_rat(&BTreeMap::new())?;
                            cfg.samples = Some(rat_to_u64(&v)? as u32);
                        }
                        "cutoff" => {
                            cfg.cutoff = Some(self.parse_expr()?.to_rat(&BTreeMap::new())?)
                        }
                        "tolerance" => {
                            cfg.tolerance = Some(self.parse_expr()?.to_rat(&BTreeMap::new())?)
                        }
                        "evidence" => {
                            let (w, l, c) = self.expect_ident("true/false")?;
                            cfg.evidence = match w.as_str() {
                                "true" => true,
                                "false" => false,
                                _ => return Err(syn(l, c, "expected true or false")),
                            };
                        }
                        "energy" => cfg.energy = Some(self.parse_expr()?),
                        "eps_schedule" | "gamma_schedule" => {
                            self.expect(Tok::LBrace, "`{`")?;
                            let mut vals = Vec::new();
                            loop {
                                let e = self.parse_expr()?;
                                vals.push(e.to_rat(&BTreeMap::new())?);
                                let t = self.next();
                                match t.tok {
                                    Tok::Comma => continue,
                                    Tok::RBrace => break,
                                    _ => return Err(syn(t.line, t.col, "expected `,` or `}`")),
                                }
                            }
                            if word == "eps_schedule" {
                                cfg.eps_schedule = Some(vals);
                            } else {
                                cfg.gamma_schedule = Some(vals);
                            }
                        }
                        other => {
                            return Err(syn(
                                s.line,
                                s.col,
                                format!("unknown config field `{other}`"),
                            ))
                        }
                    }
                    self.expect(Tok::Semi, "`;`")?;
                }
                _ => return Err(syn(s.line, s.col, "expected a config field")),
            }
        }
        Ok(cfg)
    }

    // Expressions: standard precedence climbing.
    fn parse_expr(&mut self) -> Result<Expr, ProblemError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ProblemError> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.next();
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Expr, ProblemError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            let inner = self.parse_factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ProblemError> {
        let base = self.parse_primary()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let s = self.next();
            match s.tok {
                Tok::Num(r) => {
                    if !r.is_integer() || r < rat::zero() {
                        return Err(syn(s.line, s.col, "exponent must be a non-negative integer"));
                    }
                    let k = rat_to_u64(&r)? as u32;
                    return Ok(Expr::Pow(Box::new(base), k));
                }
                _ => return Err(syn(s.line, s.col, "expected an integer exponent")),
            }
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> Result<Expr, ProblemError> {
        let s = self.next();
        match s.tok {
            Tok::Num(r) => Ok(Expr::Num(r)),
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    if FUNCTIONS.contains(&name.as_str()) {
                        return Err(ProblemError::NonPolynomial {
                            line: s.line,
                            col: s.col,
                            name,
                        });
                    }
                    return Err(syn(
                        s.line,
                        s.col,
                        format!("`{name}(` looks like a function application; the term language is polynomial"),
                    ));
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(syn(s.line, s.col, "expected a number, variable or `(`")),
        }
    }

    // Formulas.
    fn parse_formula(&mut self) -> Result<FormulaAst, ProblemError> {
        let mut lhs = self.parse_formula_and()?;
        while self.peek().tok == Tok::Pipe {
            self.next();
            let rhs = self.parse_formula_and()?;
            lhs = FormulaAst::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_formula_and(&mut self) -> Result<FormulaAst, ProblemError> {
        let mut lhs = self.parse_formula_atom()?;
        while self.peek().tok == Tok::Amp {
            self.next();
            let rhs = self.parse_formula_atom()?;
            lhs = FormulaAst::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_formula_atom(&mut self) -> Result<FormulaAst, ProblemError> {
        match &self.peek().tok {
            Tok::Bang => {
                self.next();
                let inner = self.parse_formula_atom()?;
                return Ok(FormulaAst::Not(Box::new(inner)));
            }
            Tok::Ident(w) if w == "true" => {
                self.next();
                return Ok(FormulaAst::True);
            }
            Tok::Ident(w) if w == "false" => {
                self.next();
                return Ok(FormulaAst::False);
            }
            Tok::LParen => {
                // Could be a parenthesized formula or a parenthesized
                // arithmetic expression starting a comparison: try the
                // formula reading first, backtrack on failure.
                let save = self.pos;
                self.next();
                if let Ok(f) = self.parse_formula() {
                    if self.peek().tok == Tok::RParen {
                        // Peek past `)` — if a relation follows, this was
                        // arithmetic after all.
                        let after = self.toks[(self.pos + 1).min(self.toks.len() - 1)].clone();
                        if !matches!(
                            after.tok,
                            Tok::RelEq | Tok::RelNe | Tok::RelGe | Tok::RelGt | Tok::RelLe | Tok::RelLt
                        ) && !matches!(after.tok, Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret)
                        {
                            self.next();
                            return Ok(f);
                        }
                    }
                }
                self.pos = save;
            }
            _ => {}
        }
        let lhs = self.parse_expr()?;
        let s = self.next();
        let rel = match s.tok {
            Tok::RelEq => Rel::Eq,
            Tok::RelNe => Rel::Ne,
            Tok::RelGe => Rel::Ge,
            Tok::RelGt => Rel::Gt,
            Tok::RelLe => Rel::Le,
            Tok::RelLt => Rel::Lt,
            _ => return Err(syn(s.line, s.col, "expected a comparison operator")),
        };
        let rhs = self.parse_expr()?;
        Ok(FormulaAst::Cmp(lhs, rel, rhs))
    }
}

fn rat_to_u64(r: &Rat) -> Result<u64, ProblemError> {
    use num_traits::ToPrimitive;
    if !r.is_integer() || r < &rat::zero() {
        return Err(ProblemError::Invalid(
            "expected a non-negative integer".into(),
        ));
    }
    r.numer()
        .to_u64()
        .ok_or_else(|| ProblemError::Invalid("integer out of range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabcert_core::symbolic::rat::{frac, int};

    const PENDULUM: &str = r#"
stabcert-problem v1

system {
  state theta, omega;
  param a = {1/2, 1, 2};
  param b = {0, 1/2, 1};
  constraint a > 0;
  constraint b >= 0;
  theta' = omega;
  omega' = -a*theta - b*omega;
}

target { origin; }

property { stab; }

candidate {
  v = a*theta^2/2 + ((b*theta + omega)^2 + omega^2)/4;
}

config { seed = 7; }
"#;

    #[test]
    fn parses_pendulum_and_builds_nine_instances() {
        let pf = ProblemFile::parse(PENDULUM).unwrap();
        assert_eq!(pf.state_vars, vec!["theta", "omega"]);
        let instances = pf.instances().unwrap();
        assert_eq!(instances.len(), 9);
        // One rhs check: a = 1, b = 1 gives omega' = -theta - omega.
        let inst = instances
            .iter()
            .find(|i| i.param_values["a"] == int(1) && i.param_values["b"] == int(1))
            .unwrap();
        let theta = Polynomial::var(2, 0);
        let omega = Polynomial::var(2, 1);
        assert_eq!(inst.ode.rhs()[1], &(-&theta) - &omega);
    }

    #[test]
    fn decimal_literals_are_exact() {
        let pf = ProblemFile::parse(
            "stabcert-problem v1\nsystem { state x; x' = -x; }\ntarget { origin; }\nproperty { stab; }\ncandidate { v = 0.25*x^2; }\nconfig { }",
        )
        .unwrap();
        let inst = pf.instances().unwrap();
        let v = inst[0].v.as_ref().unwrap();
        assert_eq!(v.coeff(&[2]), frac(1, 4));
    }

    #[test]
    fn scientific_literals_are_exact() {
        let pf = ProblemFile::parse(
            "stabcert-problem v1\nsystem { state x; x' = -x; }\ntarget { origin; }\nproperty { eps_stab eps = 1e-10; }\ncandidate { }\nconfig { }",
        )
        .unwrap();
        match pf.property {
            PropertyDecl::EpsStab(e) => {
                assert_eq!(e, frac(1, 10_000_000_000));
            }
            _ => panic!("wrong property"),
        }
    }

    #[test]
    fn trigonometric_rhs_is_diagnosed_not_crashed() {
        let err = ProblemFile::parse(
            "stabcert-problem v1\nsystem { state x; x' = sin(x); }\ntarget { origin; }\nproperty { stab; }",
        )
        .unwrap_err();
        match err {
            ProblemError::NonPolynomial { name, .. } => assert_eq!(name, "sin"),
            other => panic!("expected non-polynomial diagnostic, got {other}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = ProblemFile::parse("stabcert-problem v1\nsystem { state x; x' = ; }").unwrap_err();
        match err {
            ProblemError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn parse_print_parse_is_identity() {
        let pf = ProblemFile::parse(PENDULUM).unwrap();
        let printed = pf.to_string();
        let reparsed = ProblemFile::parse(&printed).unwrap();
        assert_eq!(pf, reparsed);
    }

    #[test]
    fn division_by_parameter_resolves_at_instantiation() {
        let text = "stabcert-problem v1\nsystem { state x; param c = {2, 4}; constraint c > 0; x' = -x/c; }\ntarget { origin; }\nproperty { stab; }\ncandidate { v = x^2; }\nconfig { }";
        let pf = ProblemFile::parse(text).unwrap();
        let instances = pf.instances().unwrap();
        assert_eq!(instances.len(), 2);
        assert_eq!(instances[0].ode.rhs()[0].coeff(&[1]), frac(-1, 2));
    }

    #[test]
    fn constraints_filter_grid() {
        let text = "stabcert-problem v1\nsystem { state x; param c = {-1, 1, 3}; constraint c > 0; x' = -c*x; }\ntarget { origin; }\nproperty { stab; }\ncandidate { v = x^2; }\nconfig { }";
        let pf = ProblemFile::parse(text).unwrap();
        assert_eq!(pf.instances().unwrap().len(), 2);
    }
}
