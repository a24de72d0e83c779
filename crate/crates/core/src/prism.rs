//! A small PRISM front end: `mdp` models with one module of bounded integer
//! variables, guarded probabilistic commands, constants, and labels.
//!
//! The reachable state space is enumerated explicitly. Declared labels
//! become the atomic propositions (in declaration order), and every
//! transition emits the letter of its *source* state's label valuation, so
//! the letter an automaton reads is known before the probabilistic successor
//! is sampled.

use std::collections::HashMap;

use crate::automata::Letter;
use crate::mdp::{LabeledMDP, MdpAction, MdpTransition};
use crate::{Error, Result};

/// Largest number of reachable states the enumerator accepts.
pub const STATE_SPACE_LIMIT: usize = 1_000_000;

/// States up to this count get readable `var=value` names.
const NAMED_STATE_LIMIT: usize = 10_000;

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::MalformedModel {
        line,
        msg: msg.into(),
    })
}

// ---------------------------------------------------------------------------
// Tokens

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Double(f64),
    Str(String),
    Punct(&'static str),
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(v) => write!(f, "{v}"),
            Tok::Double(v) => write!(f, "{v}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Punct(p) => write!(f, "{p}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                chars.next();
                if chars.peek() == Some(&'/') {
                    while let Some(&d) = chars.peek() {
                        if d == '\n' {
                            break;
                        }
                        chars.next();
                    }
                } else {
                    toks.push((Tok::Punct("/"), line));
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\n') | None => return err(line, "unterminated string"),
                        Some(d) => s.push(d),
                    }
                }
                toks.push((Tok::Str(s), line));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                // A dot starts a fractional part unless it begins `..`.
                let mut is_double = false;
                if chars.peek() == Some(&'.') {
                    let mut ahead = chars.clone();
                    ahead.next();
                    if ahead.peek() != Some(&'.') {
                        is_double = true;
                        s.push('.');
                        chars.next();
                        while let Some(&d) = chars.peek() {
                            if d.is_ascii_digit() {
                                s.push(d);
                                chars.next();
                            } else {
                                break;
                            }
                        }
                    }
                }
                if is_double {
                    match s.parse::<f64>() {
                        Ok(v) => toks.push((Tok::Double(v), line)),
                        Err(_) => return err(line, format!("bad number {s:?}")),
                    }
                } else {
                    match s.parse::<i64>() {
                        Ok(v) => toks.push((Tok::Int(v), line)),
                        Err(_) => return err(line, format!("integer {s:?} out of range")),
                    }
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), line));
            }
            _ => {
                chars.next();
                let two = |n: &mut std::iter::Peekable<std::str::Chars>, second: char| {
                    if n.peek() == Some(&second) {
                        n.next();
                        true
                    } else {
                        false
                    }
                };
                let p: &'static str = match c {
                    '-' if two(&mut chars, '>') => "->",
                    '.' if two(&mut chars, '.') => "..",
                    '<' if two(&mut chars, '=') => "<=",
                    '>' if two(&mut chars, '=') => ">=",
                    '!' if two(&mut chars, '=') => "!=",
                    '-' => "-",
                    '.' => ".",
                    '<' => "<",
                    '>' => ">",
                    '!' => "!",
                    '+' => "+",
                    '*' => "*",
                    '=' => "=",
                    '(' => "(",
                    ')' => ")",
                    '[' => "[",
                    ']' => "]",
                    '?' => "?",
                    ':' => ":",
                    ';' => ";",
                    ',' => ",",
                    '&' => "&",
                    '|' => "|",
                    '\'' => "'",
                    other => return err(line, format!("unexpected character {other:?}")),
                };
                toks.push((Tok::Punct(p), line));
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Expressions

#[derive(Debug, Clone)]
enum Expr {
    Int(i64),
    Double(f64),
    Bool(bool),
    Name(String),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(&'static str, Box<Expr>, Box<Expr>),
    Mod(Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
}

/// A runtime value; integers stay exact until a `/` promotes them.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Int(i64),
    Double(f64),
    Bool(bool),
}

impl Value {
    fn as_f64(self, line: usize) -> Result<f64> {
        match self {
            Value::Int(v) => Ok(v as f64),
            Value::Double(v) => Ok(v),
            Value::Bool(_) => err(line, "expected a number, found a boolean"),
        }
    }

    fn as_bool(self, line: usize) -> Result<bool> {
        match self {
            Value::Bool(b) => Ok(b),
            _ => err(line, "expected a boolean, found a number"),
        }
    }

    fn as_int(self, line: usize) -> Result<i64> {
        match self {
            Value::Int(v) => Ok(v),
            Value::Double(v) if v.fract() == 0.0 => Ok(v as i64),
            Value::Double(v) => err(line, format!("expected an integer, found {v}")),
            Value::Bool(_) => err(line, "expected an integer, found a boolean"),
        }
    }
}

struct Env<'a> {
    consts: &'a HashMap<String, Value>,
    var_names: &'a [String],
    var_values: &'a [i64],
}

impl Env<'_> {
    fn lookup(&self, name: &str, line: usize) -> Result<Value> {
        if let Some(v) = self.consts.get(name) {
            return Ok(*v);
        }
        if let Some(i) = self.var_names.iter().position(|n| n == name) {
            return Ok(Value::Int(self.var_values[i]));
        }
        err(line, format!("unknown identifier {name:?}"))
    }
}

fn eval(e: &Expr, env: &Env, line: usize) -> Result<Value> {
    Ok(match e {
        Expr::Int(v) => Value::Int(*v),
        Expr::Double(v) => Value::Double(*v),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Name(n) => env.lookup(n, line)?,
        Expr::Not(a) => Value::Bool(!eval(a, env, line)?.as_bool(line)?),
        Expr::Neg(a) => match eval(a, env, line)? {
            Value::Int(v) => Value::Int(-v),
            Value::Double(v) => Value::Double(-v),
            Value::Bool(_) => return err(line, "cannot negate a boolean"),
        },
        Expr::Mod(a, b) => {
            let a = eval(a, env, line)?.as_int(line)?;
            let b = eval(b, env, line)?.as_int(line)?;
            if b <= 0 {
                return err(line, "mod needs a positive modulus");
            }
            Value::Int(a.rem_euclid(b))
        }
        Expr::Ternary(c, a, b) => {
            if eval(c, env, line)?.as_bool(line)? {
                eval(a, env, line)?
            } else {
                eval(b, env, line)?
            }
        }
        Expr::Bin(op, a, b) => {
            let a = eval(a, env, line)?;
            let b = eval(b, env, line)?;
            match *op {
                "&" => Value::Bool(a.as_bool(line)? && b.as_bool(line)?),
                "|" => Value::Bool(a.as_bool(line)? || b.as_bool(line)?),
                "/" => Value::Double(a.as_f64(line)? / b.as_f64(line)?),
                "+" | "-" | "*" => match (a, b) {
                    (Value::Int(x), Value::Int(y)) => Value::Int(match *op {
                        "+" => x + y,
                        "-" => x - y,
                        _ => x * y,
                    }),
                    _ => {
                        let (x, y) = (a.as_f64(line)?, b.as_f64(line)?);
                        Value::Double(match *op {
                            "+" => x + y,
                            "-" => x - y,
                            _ => x * y,
                        })
                    }
                },
                "=" | "!=" => {
                    let equal = match (a, b) {
                        (Value::Bool(x), Value::Bool(y)) => x == y,
                        (Value::Int(x), Value::Int(y)) => x == y,
                        _ => a.as_f64(line)? == b.as_f64(line)?,
                    };
                    Value::Bool(if *op == "=" { equal } else { !equal })
                }
                "<" | "<=" | ">" | ">=" => {
                    // Exact when both sides are integers.
                    let holds = match (a, b) {
                        (Value::Int(x), Value::Int(y)) => match *op {
                            "<" => x < y,
                            "<=" => x <= y,
                            ">" => x > y,
                            _ => x >= y,
                        },
                        _ => {
                            let (x, y) = (a.as_f64(line)?, b.as_f64(line)?);
                            match *op {
                                "<" => x < y,
                                "<=" => x <= y,
                                ">" => x > y,
                                _ => x >= y,
                            }
                        }
                    };
                    Value::Bool(holds)
                }
                other => return err(line, format!("unsupported operator {other}")),
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Model structure

struct VarDecl {
    name: String,
    lo: i64,
    hi: i64,
    init: i64,
}

struct Branch {
    prob: Option<Expr>,
    /// `(variable, new value)` assignments; empty means no change.
    updates: Vec<(String, Expr)>,
    line: usize,
}

struct Command {
    action: String,
    guard: Expr,
    branches: Vec<Branch>,
    line: usize,
}

struct LabelDecl {
    name: String,
    expr: Expr,
    line: usize,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|&(_, l)| l)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek() == Some(&Tok::Punct(match_punct(p))) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<()> {
        let line = self.line();
        match self.next() {
            Some(Tok::Punct(q)) if q == p => Ok(()),
            Some(t) => err(line, format!("expected `{p}`, found `{t}`")),
            None => err(line, format!("expected `{p}`, found end of input")),
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        let line = self.line();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(t) => err(line, format!("expected a name, found `{t}`")),
            None => err(line, "expected a name, found end of input"),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == kw {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        let line = self.line();
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            err(line, format!("expected `{kw}`"))
        }
    }

    // Expression grammar, loosest binding first:
    // ternary > or > and > not > comparison > additive > multiplicative >
    // unary minus > atoms.
    fn expr(&mut self) -> Result<Expr> {
        let cond = self.or_expr()?;
        if self.eat_punct("?") {
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let mut e = self.and_expr()?;
        while self.eat_punct("|") {
            let rhs = self.and_expr()?;
            e = Expr::Bin("|", Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut e = self.not_expr()?;
        while self.eat_punct("&") {
            let rhs = self.not_expr()?;
            e = Expr::Bin("&", Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr> {
        if self.eat_punct("!") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr> {
        let lhs = self.additive()?;
        for op in ["<=", ">=", "!=", "<", ">", "="] {
            if self.eat_punct(op) {
                let rhs = self.additive()?;
                return Ok(Expr::Bin(match_punct(op), Box::new(lhs), Box::new(rhs)));
            }
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut e = self.multiplicative()?;
        loop {
            if self.eat_punct("+") {
                let rhs = self.multiplicative()?;
                e = Expr::Bin("+", Box::new(e), Box::new(rhs));
            } else if self.eat_punct("-") {
                let rhs = self.multiplicative()?;
                e = Expr::Bin("-", Box::new(e), Box::new(rhs));
            } else {
                return Ok(e);
            }
        }
    }

    fn multiplicative(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat_punct("*") {
                let rhs = self.unary()?;
                e = Expr::Bin("*", Box::new(e), Box::new(rhs));
            } else if self.eat_punct("/") {
                let rhs = self.unary()?;
                e = Expr::Bin("/", Box::new(e), Box::new(rhs));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_punct("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let line = self.line();
        match self.next() {
            Some(Tok::Int(v)) => Ok(Expr::Int(v)),
            Some(Tok::Double(v)) => Ok(Expr::Double(v)),
            Some(Tok::Punct("(")) => {
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                "mod" => {
                    self.expect_punct("(")?;
                    let a = self.expr()?;
                    self.expect_punct(",")?;
                    let b = self.expr()?;
                    self.expect_punct(")")?;
                    Ok(Expr::Mod(Box::new(a), Box::new(b)))
                }
                _ => Ok(Expr::Name(s)),
            },
            Some(t) => err(line, format!("expected an expression, found `{t}`")),
            None => err(line, "expected an expression, found end of input"),
        }
    }

    /// `true` (no change) or `(v'=expr) & (v'=expr) & ...`; fails without
    /// consuming a committed prefix, so callers can backtrack.
    fn updates(&mut self) -> Result<Vec<(String, Expr)>> {
        if self.eat_keyword("true") {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        loop {
            let line = self.line();
            self.expect_punct("(")?;
            let var = self.expect_ident()?;
            self.expect_punct("'")?;
            self.expect_punct("=")?;
            let e = self.expr()?;
            self.expect_punct(")")?;
            if out.iter().any(|(v, _)| v == &var) {
                return err(line, format!("variable {var:?} assigned twice in one update"));
            }
            out.push((var, e));
            if !self.eat_punct("&") {
                return Ok(out);
            }
        }
    }

    fn branch(&mut self) -> Result<Branch> {
        let line = self.line();
        // Try the probability-less form first; rewind if it is not one.
        let save = self.pos;
        if let Ok(updates) = self.updates() {
            if matches!(self.peek(), Some(Tok::Punct(";")) | Some(Tok::Punct("+")) | None) {
                return Ok(Branch {
                    prob: None,
                    updates,
                    line,
                });
            }
        }
        self.pos = save;
        let prob = self.expr()?;
        self.expect_punct(":")?;
        let updates = self.updates()?;
        Ok(Branch {
            prob: Some(prob),
            updates,
            line,
        })
    }

    fn command(&mut self) -> Result<Command> {
        let line = self.line();
        self.expect_punct("[")?;
        let action = if let Some(Tok::Ident(_)) = self.peek() {
            self.expect_ident()?
        } else {
            String::new()
        };
        self.expect_punct("]")?;
        let guard = self.expr()?;
        self.expect_punct("->")?;
        let mut branches = vec![self.branch()?];
        while self.eat_punct("+") {
            branches.push(self.branch()?);
        }
        self.expect_punct(";")?;
        Ok(Command {
            action,
            guard,
            branches,
            line,
        })
    }
}

fn match_punct(p: &str) -> &'static str {
    match p {
        "->" => "->",
        ".." => "..",
        "<=" => "<=",
        ">=" => ">=",
        "!=" => "!=",
        "-" => "-",
        "." => ".",
        "<" => "<",
        ">" => ">",
        "!" => "!",
        "+" => "+",
        "*" => "*",
        "=" => "=",
        "(" => "(",
        ")" => ")",
        "[" => "[",
        "]" => "]",
        "?" => "?",
        ":" => ":",
        ";" => ";",
        "," => ",",
        "&" => "&",
        "|" => "|",
        "'" => "'",
        "/" => "/",
        _ => unreachable!("unknown punct {p}"),
    }
}

/// Parses the PRISM subset and enumerates the reachable state space into an
/// explicit MDP.
///
/// Supported: the `mdp` model type; `const int|double NAME = expr;`; one
/// module with bounded integer variables `v : [lo..hi] init e;` and guarded
/// commands `[act] guard -> p1:(updates) + ... ;` (probability omitted means
/// 1, `true` as an update means no change); `label "name" = boolexpr;`.
/// Expressions combine `+ - * /` (division is always real), `mod(x,y)`,
/// ternary `c ? a : b`, comparisons, and `& | !`.
///
/// Labels become the propositions, in declaration order, and each transition
/// carries the letter of its source state's label valuation. Errors name
/// unsupported constructs with their line; models growing past
/// [`STATE_SPACE_LIMIT`] reachable states are refused; an update leaving a
/// variable's range or a reachable deadlock state is an error.
pub fn parse_prism_subset(text: &str) -> Result<LabeledMDP> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    {
        let line = p.line();
        let kind = p.expect_ident()?;
        if kind != "mdp" {
            return err(line, format!("unsupported model type {kind:?}, only mdp"));
        }
    }
    let mut consts: HashMap<String, Value> = HashMap::new();
    let mut vars: Vec<VarDecl> = Vec::new();
    let mut commands: Vec<Command> = Vec::new();
    let mut labels: Vec<LabelDecl> = Vec::new();
    let mut seen_module = false;
    while let Some(tok) = p.peek() {
        let line = p.line();
        let kw = match tok {
            Tok::Ident(s) => s.clone(),
            t => return err(line, format!("expected a declaration, found `{t}`")),
        };
        match kw.as_str() {
            "const" => {
                p.next();
                let ty = p.expect_ident()?;
                if ty != "int" && ty != "double" {
                    return err(line, format!("unsupported const type {ty:?}"));
                }
                let name = p.expect_ident()?;
                p.expect_punct("=")?;
                let e = p.expr()?;
                p.expect_punct(";")?;
                let env = Env {
                    consts: &consts,
                    var_names: &[],
                    var_values: &[],
                };
                let v = eval(&e, &env, line)?;
                let v = match ty.as_str() {
                    "int" => Value::Int(v.as_int(line)?),
                    _ => Value::Double(v.as_f64(line)?),
                };
                if consts.insert(name.clone(), v).is_some() {
                    return err(line, format!("constant {name:?} declared twice"));
                }
            }
            "module" => {
                if seen_module {
                    return err(line, "only one module is supported");
                }
                seen_module = true;
                p.next();
                let _module_name = p.expect_ident()?;
                loop {
                    let line = p.line();
                    if p.eat_keyword("endmodule") {
                        break;
                    }
                    match p.peek() {
                        Some(Tok::Punct("[")) => commands.push(p.command()?),
                        Some(Tok::Ident(_)) => {
                            let name = p.expect_ident()?;
                            p.expect_punct(":")?;
                            p.expect_punct("[")?;
                            let lo = p.expr()?;
                            p.expect_punct("..")?;
                            let hi = p.expr()?;
                            p.expect_punct("]")?;
                            p.expect_keyword("init")?;
                            let init = p.expr()?;
                            p.expect_punct(";")?;
                            let env = Env {
                                consts: &consts,
                                var_names: &[],
                                var_values: &[],
                            };
                            let lo = eval(&lo, &env, line)?.as_int(line)?;
                            let hi = eval(&hi, &env, line)?.as_int(line)?;
                            let init = eval(&init, &env, line)?.as_int(line)?;
                            if lo > hi {
                                return err(line, format!("empty range [{lo}..{hi}]"));
                            }
                            if init < lo || init > hi {
                                return err(line, format!("init {init} outside [{lo}..{hi}]"));
                            }
                            if consts.contains_key(&name)
                                || vars.iter().any(|v| v.name == name)
                            {
                                return err(line, format!("name {name:?} declared twice"));
                            }
                            vars.push(VarDecl {
                                name,
                                lo,
                                hi,
                                init,
                            });
                        }
                        Some(t) => {
                            return err(line, format!("expected a variable or command, found `{t}`"))
                        }
                        None => return err(line, "module not closed with endmodule"),
                    }
                }
            }
            "label" => {
                p.next();
                let name = match p.next() {
                    Some(Tok::Str(s)) => s,
                    _ => return err(line, "label needs a quoted name"),
                };
                p.expect_punct("=")?;
                let e = p.expr()?;
                p.expect_punct(";")?;
                if labels.iter().any(|l| l.name == name) {
                    return err(line, format!("label {name:?} declared twice"));
                }
                labels.push(LabelDecl {
                    name,
                    expr: e,
                    line,
                });
            }
            other => {
                return err(line, format!("unsupported construct {other:?}"));
            }
        }
    }
    if !seen_module {
        return err(0, "no module declared");
    }
    build_states(&consts, &vars, &commands, &labels)
}

fn build_states(
    consts: &HashMap<String, Value>,
    vars: &[VarDecl],
    commands: &[Command],
    labels: &[LabelDecl],
) -> Result<LabeledMDP> {
    let var_names: Vec<String> = vars.iter().map(|v| v.name.clone()).collect();
    let init: Vec<i64> = vars.iter().map(|v| v.init).collect();
    let mut states: Vec<Vec<i64>> = vec![init.clone()];
    let mut index: HashMap<Vec<i64>, usize> = HashMap::from([(init, 0usize)]);
    let mut actions: Vec<Vec<MdpAction>> = Vec::new();
    let mut next = 0usize;
    while next < states.len() {
        let valuation = states[next].clone();
        let env = Env {
            consts,
            var_names: &var_names,
            var_values: &valuation,
        };
        // The letter this state emits: its label valuation.
        let mut letter: Letter = 0;
        for (i, l) in labels.iter().enumerate() {
            if eval(&l.expr, &env, l.line)?.as_bool(l.line)? {
                letter |= 1 << i;
            }
        }
        let mut acts: Vec<MdpAction> = Vec::new();
        for cmd in commands {
            if !eval(&cmd.guard, &env, cmd.line)?.as_bool(cmd.line)? {
                continue;
            }
            // Successor distribution; branches landing on the same valuation
            // merge their mass.
            let mut dist: Vec<(Vec<i64>, f64)> = Vec::new();
            for br in &cmd.branches {
                let prob = match &br.prob {
                    Some(e) => eval(e, &env, br.line)?.as_f64(br.line)?,
                    None => 1.0,
                };
                if prob == 0.0 {
                    continue;
                }
                if !(prob > 0.0 && prob <= 1.0 + 1e-9) {
                    return err(br.line, format!("branch probability {prob} out of range"));
                }
                let mut succ = valuation.clone();
                for (var, e) in &br.updates {
                    let vi = match var_names.iter().position(|n| n == var) {
                        Some(i) => i,
                        None => return err(br.line, format!("unknown variable {var:?}")),
                    };
                    let value = eval(e, &env, br.line)?.as_int(br.line)?;
                    if value < vars[vi].lo || value > vars[vi].hi {
                        return err(
                            br.line,
                            format!(
                                "update sets {} to {value}, outside [{}..{}]",
                                var, vars[vi].lo, vars[vi].hi
                            ),
                        );
                    }
                    succ[vi] = value;
                }
                match dist.iter_mut().find(|(v, _)| *v == succ) {
                    Some((_, mass)) => *mass += prob,
                    None => dist.push((succ, prob)),
                }
            }
            if dist.is_empty() {
                return err(cmd.line, "command has no branches with positive probability");
            }
            let mut transitions = Vec::with_capacity(dist.len());
            for (succ, prob) in dist {
                let dst = match index.get(&succ) {
                    Some(&i) => i,
                    None => {
                        if states.len() >= STATE_SPACE_LIMIT {
                            return Err(Error::StateSpaceExceeded {
                                limit: STATE_SPACE_LIMIT,
                            });
                        }
                        states.push(succ.clone());
                        index.insert(succ, states.len() - 1);
                        states.len() - 1
                    }
                };
                transitions.push(MdpTransition { prob, dst, letter });
            }
            acts.push(MdpAction {
                name: cmd.action.clone(),
                transitions,
            });
        }
        if acts.is_empty() {
            let rendered = render_valuation(&var_names, &valuation);
            return err(0, format!("deadlock: no command enabled in state {rendered}"));
        }
        actions.push(acts);
        next += 1;
    }
    let state_names = if states.len() <= NAMED_STATE_LIMIT {
        states
            .iter()
            .map(|v| Some(render_valuation(&var_names, v)))
            .collect()
    } else {
        vec![]
    };
    let ap_list: Vec<String> = labels.iter().map(|l| l.name.clone()).collect();
    LabeledMDP::new(ap_list, 0, actions, state_names)
}

fn render_valuation(names: &[String], values: &[i64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MILK: &str = "\
mdp
const int M = 12;

module m
  b : [0..M] init M;
  [a] true -> (b' = b > 0 ? b-1 : b);
endmodule

label \"p0\" = b > 0;
label \"p1\" = b > 1;
label \"p2\" = b > 2;
label \"p3\" = b > 3;
label \"p4\" = b = 0;
";

    const CHOCOLATES: &str = "\
mdp
const int N = 5;
const int M = 12;

module pluck
  b0 : [0..M] init M;
  b1 : [0..M] init M;
  b2 : [0..M] init M;
  b3 : [0..M] init M;
  b4 : [0..M] init M;
  [a0] true -> (b0' = b0 > 0 ? b0-1 : b0);
  [a1] true -> (b1' = b1 > 0 ? b1-1 : b1);
  [a2] true -> (b2' = b2 > 0 ? b2-1 : b2);
  [a3] true -> (b3' = b3 > 0 ? b3-1 : b3);
  [a4] true -> (b4' = b4 > 0 ? b4-1 : b4);
endmodule

label \"odd\" = mod(b0+b1+b2+b3+b4,2) = 1;
";

    const FORGIVENESS: &str = "\
mdp
const double p = 1/2;
const double q = 0.1;
const int N = 5;

module m
  s : [0..7] init 0;
  d : [0..N] init N;
  [a] s=0 -> p : (s'=1) + (1-p) : (s'=2);
  [b] s=0 -> p : (s'=2) + (1-p) : (s'=3);
  [c] (s=1 | s=2) & d > 0 -> q : (d'=d-1) + (1-q) : true;
  [c] (s=1 | s=2) & d = 0 -> (s'=s+3);
  [c] s=3 -> true;
  [a] s=4 | s=5 -> q : (s'=s+2) + (1-q) : true;
  [b] s=4 | s=5 -> true;
  [c] s=6 | s=7 -> (s'=s-2);
endmodule

label \"x\" = s=1 | s=5;
label \"y\" = s=2 | s=6;
";

    #[test]
    fn counter_chain_enumerates_all_counter_values() {
        let m = parse_prism_subset(MILK).unwrap();
        assert_eq!(m.num_states(), 13);
        assert_eq!(m.ap_list(), ["p0", "p1", "p2", "p3", "p4"]);
        assert_eq!(m.state_name(0), Some("b=12"));
        // One action everywhere, stepping the counter down to 0 and then
        // looping.
        for s in 0..13 {
            assert_eq!(m.actions(s).len(), 1);
            assert_eq!(m.actions(s)[0].name, "a");
            assert_eq!(m.actions(s)[0].transitions.len(), 1);
        }
        // b=12 satisfies p0..p3; b=0 satisfies only p4.
        assert_eq!(m.actions(0)[0].transitions[0].letter, 0b01111);
        let zero = (0..13).find(|&s| m.state_name(s) == Some("b=0")).unwrap();
        assert_eq!(m.actions(zero)[0].transitions[0].letter, 0b10000);
        assert_eq!(m.actions(zero)[0].transitions[0].dst, zero);
        // b=2 satisfies p0 and p1.
        let two = (0..13).find(|&s| m.state_name(s) == Some("b=2")).unwrap();
        assert_eq!(m.actions(two)[0].transitions[0].letter, 0b00011);
    }

    #[test]
    fn five_counters_enumerate_the_full_grid() {
        let m = parse_prism_subset(CHOCOLATES).unwrap();
        assert_eq!(m.num_states(), 13usize.pow(5));
        assert_eq!(m.ap_list(), ["odd"]);
        assert_eq!(m.actions(0).len(), 5);
        // The initial sum 60 is even; plucking any box makes it odd.
        assert_eq!(m.actions(0)[0].transitions[0].letter, 0);
        let succ = m.actions(0)[2].transitions[0].dst;
        assert_eq!(m.actions(succ)[0].transitions[0].letter, 1);
    }

    #[test]
    fn probabilistic_branches_build_two_point_distributions() {
        let m = parse_prism_subset(FORGIVENESS).unwrap();
        assert_eq!(m.num_states(), 18);
        assert_eq!(m.ap_list(), ["x", "y"]);
        assert_eq!(m.state_name(m.initial()), Some("s=0,d=5"));
        let acts = m.actions(m.initial());
        assert_eq!(acts.len(), 2);
        assert_eq!(acts[0].name, "a");
        assert_eq!(acts[0].transitions.len(), 2);
        assert!((acts[0].transitions[0].prob - 0.5).abs() < 1e-15);
        assert!((acts[0].transitions[1].prob - 0.5).abs() < 1e-15);
        // The d-decrement command keeps mass 0.9 in place.
        let s1 = acts[0].transitions[0].dst;
        assert_eq!(m.state_name(s1), Some("s=1,d=5"));
        let c = &m.actions(s1)[0];
        assert_eq!(c.name, "c");
        let stay = c.transitions.iter().find(|t| t.dst == s1).unwrap();
        assert!((stay.prob - 0.9).abs() < 1e-12);
        // Source-state labeling: everything leaving s=1 reads the x-letter.
        assert!(c.transitions.iter().all(|t| t.letter == 0b01));
    }

    #[test]
    fn branches_merging_on_the_same_successor_add_up() {
        let text = "\
mdp
module m
  x : [0..1] init 0;
  [go] true -> 0.25 : (x'=1) + 0.25 : (x'=1-x) + 0.5 : true;
endmodule
label \"one\" = x = 1;
";
        let m = parse_prism_subset(text).unwrap();
        let t = &m.actions(0)[0].transitions;
        assert_eq!(t.len(), 2);
        assert!((t.iter().find(|b| b.dst != 0).unwrap().prob - 0.5).abs() < 1e-15);
    }

    #[test]
    fn real_division_in_integer_constant_is_an_error() {
        let text = "mdp\nconst int k = 1/2;\nmodule m\nx : [0..0] init 0;\n[a] true -> true;\nendmodule\n";
        let e = parse_prism_subset(text).unwrap_err();
        assert!(e.to_string().contains("integer"));
    }

    #[test]
    fn updates_outside_the_declared_range_are_errors() {
        let text = "mdp\nmodule m\nx : [0..2] init 0;\n[a] true -> (x'=x+1);\nendmodule\n";
        let e = parse_prism_subset(text).unwrap_err();
        assert!(e.to_string().contains("outside [0..2]"), "{e}");
    }

    #[test]
    fn reachable_deadlocks_are_errors() {
        let text = "mdp\nmodule m\nx : [0..1] init 0;\n[a] x=0 -> (x'=1);\nendmodule\n";
        let e = parse_prism_subset(text).unwrap_err();
        assert!(e.to_string().contains("deadlock"), "{e}");
        assert!(e.to_string().contains("x=1"), "{e}");
    }

    #[test]
    fn unsupported_constructs_are_named() {
        for (text, needle) in [
            ("dtmc\n", "unsupported model type"),
            ("mdp\nrewards\n", "unsupported construct \"rewards\""),
            (
                "mdp\nmodule a\nendmodule\nmodule b\nendmodule\n",
                "one module",
            ),
            ("mdp\nconst bool b = true;\nmodule m\nx : [0..0] init 0;\n[a] true -> true;\nendmodule\n", "unsupported const type"),
        ] {
            let e = parse_prism_subset(text).unwrap_err();
            assert!(e.to_string().contains(needle), "{text:?} gave {e}");
        }
    }

    #[test]
    fn state_space_guard_stops_runaway_models() {
        let text = "\
mdp
module m
  x : [0..3000000] init 0;
  [a] true -> (x' = x < 2999999 ? x+1 : x);
endmodule
";
        assert!(matches!(
            parse_prism_subset(text),
            Err(Error::StateSpaceExceeded { limit: STATE_SPACE_LIMIT })
        ));
    }

    #[test]
    fn expression_corner_cases_evaluate_exactly() {
        // Precedence: ternary binds loosest, mod is a call, unary minus and
        // mixed comparisons behave.
        let text = "\
mdp
const int a = 2 + 3 * 4;          // 14
const int b = mod(14, 4);         // 2
const double c = 1/4 + 0.25;      // 0.5
const int d = a > 10 & b = 2 ? -1 : 1;
module m
  x : [-2..2] init d;
  [go] x < 2 -> (x' = x + 1);
  [stay] x = 2 -> true;
endmodule
label \"neg\" = x < 0;
";
        let m = parse_prism_subset(text).unwrap();
        assert_eq!(m.state_name(0), Some("x=-1"));
        assert_eq!(m.num_states(), 4);
        // x=-1 satisfies the label, x=0 onwards does not.
        assert_eq!(m.actions(0)[0].transitions[0].letter, 1);
        assert_eq!(m.actions(1)[0].transitions[0].letter, 0);
    }

    #[test]
    fn comments_and_unnamed_actions_parse() {
        let text = "\
mdp
// a tiny model
module m
  x : [0..1] init 0; // the only variable
  [] true -> 0.5 : (x'=0) + 0.5 : (x'=1);
endmodule
label \"hi\" = x = 1;
";
        let m = parse_prism_subset(text).unwrap();
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.actions(0)[0].name, "");
        assert_eq!(m.actions(0)[0].transitions.len(), 2);
    }

    #[test]
    fn probability_expressions_may_use_constants() {
        let text = "\
mdp
const double q = 0.125;
module m
  x : [0..1] init 0;
  [a] true -> q : (x'=1) + 1 - q*1 : (x'=0);
endmodule
";
        // No labels at all: a single letter alphabet.
        let m = parse_prism_subset(text).unwrap();
        assert_eq!(m.ap_list().len(), 0);
        assert_eq!(m.num_letters(), 1);
        let t = &m.actions(0)[0].transitions;
        assert!((t.iter().map(|b| b.prob).sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
