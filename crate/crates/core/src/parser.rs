//! Lexer and recursive-descent parser for source files.
//!
//! A file is a sequence of declarations terminated by `;;`:
//!
//! ```text
//! val comp(f, g) = lambda (x) f(g(x)) ;;
//! rec map(f) = lambda (xs) if xs = nil then nil else f(head(xs)) : map(f)(tail(xs)) ;;
//! val BK_addOne(x) = x + 1 ;;
//! PEx (1) => 9 ;;
//! Synthesize (Int) => Int ;;
//! ```
//!
//! Binary operators, loosest first: `=` and `<`, then `:` (right), `+` and
//! `-`, `*`, and `.` (composition, right). Application binds tightest.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Declaration, Expr, Ident};
use crate::types::{Type, TypeVar};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Token {
    Val,
    Rec,
    Lambda,
    If,
    Then,
    Else,
    PEx,
    NEx,
    Synthesize,
    True,
    False,
    Nil,
    Ident(String),
    Num(i64),
    Char(char),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Eq,
    FatArrow,
    Arrow,
    SemiSemi,
    Plus,
    Minus,
    Star,
    Lt,
    Dot,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Val => "val",
            Token::Rec => "rec",
            Token::Lambda => "lambda",
            Token::If => "if",
            Token::Then => "then",
            Token::Else => "else",
            Token::PEx => "PEx",
            Token::NEx => "NEx",
            Token::Synthesize => "Synthesize",
            Token::True => "true",
            Token::False => "false",
            Token::Nil => "nil",
            Token::Ident(s) => return write!(f, "identifier `{s}`"),
            Token::Num(n) => return write!(f, "number {n}"),
            Token::Char(c) => return write!(f, "character {c:?}"),
            Token::LParen => "(",
            Token::RParen => ")",
            Token::LBracket => "[",
            Token::RBracket => "]",
            Token::Comma => ",",
            Token::Colon => ":",
            Token::Eq => "=",
            Token::FatArrow => "=>",
            Token::Arrow => "->",
            Token::SemiSemi => ";;",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Star => "*",
            Token::Lt => "<",
            Token::Dot => ".",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Spanned {
    pub token: Token,
    pub line: usize,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: unexpected character {ch:?}")]
    Lexical { line: usize, ch: char },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no Synthesize declaration")]
    MissingGoal,
    #[error("line {line}: second Synthesize declaration")]
    DuplicateGoal { line: usize },
    #[error("line {line}: template `{name}` takes no parameters")]
    NullaryTemplate { name: Ident, line: usize },
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Lexical { line, .. }
            | ParseError::Syntax { line, .. }
            | ParseError::DuplicateGoal { line }
            | ParseError::NullaryTemplate { line, .. } => Some(*line),
            ParseError::MissingGoal => None,
        }
    }
}

fn keyword(word: &str) -> Option<Token> {
    Some(match word {
        "val" => Token::Val,
        "rec" => Token::Rec,
        "lambda" => Token::Lambda,
        "if" => Token::If,
        "then" => Token::Then,
        "else" => Token::Else,
        "PEx" | "Pex" => Token::PEx,
        "NEx" | "Nex" => Token::NEx,
        "Synthesize" => Token::Synthesize,
        "true" => Token::True,
        "false" => Token::False,
        "nil" => Token::Nil,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line = 1;
    while let Some(c) = chars.next() {
        let token = match c {
            '\n' => {
                line += 1;
                continue;
            }
            c if c.is_whitespace() => continue,
            '-' if chars.peek() == Some(&'-') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
                continue;
            }
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                Token::Arrow
            }
            '=' if chars.peek() == Some(&'>') => {
                chars.next();
                Token::FatArrow
            }
            '=' if chars.peek() == Some(&'=') => {
                chars.next();
                Token::Eq
            }
            ';' if chars.peek() == Some(&';') => {
                chars.next();
                Token::SemiSemi
            }
            '(' => Token::LParen,
            ')' => Token::RParen,
            '[' => Token::LBracket,
            ']' => Token::RBracket,
            ',' => Token::Comma,
            ':' => Token::Colon,
            '=' => Token::Eq,
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '<' => Token::Lt,
            '.' => Token::Dot,
            '\'' => {
                let ch = match chars.next() {
                    Some('\\') => match chars.next() {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('\\') => '\\',
                        Some('\'') => '\'',
                        Some(other) => return Err(ParseError::Lexical { line, ch: other }),
                        None => return Err(ParseError::Lexical { line, ch: '\\' }),
                    },
                    Some('\n') | None => return Err(ParseError::Lexical { line, ch: '\'' }),
                    Some(ch) => ch,
                };
                if chars.next() != Some('\'') {
                    return Err(ParseError::Lexical { line, ch: '\'' });
                }
                Token::Char(ch)
            }
            c if c.is_ascii_digit() => {
                let mut s = c.to_string();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(*d);
                    chars.next();
                }
                let n = s.parse().map_err(|_| ParseError::Syntax {
                    line,
                    message: format!("integer literal {s} out of range"),
                })?;
                Token::Num(n)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = c.to_string();
                while let Some(d) = chars.peek().filter(|d| d.is_alphanumeric() || **d == '_' || **d == '\'') {
                    s.push(*d);
                    chars.next();
                }
                keyword(&s).unwrap_or(Token::Ident(s))
            }
            other => return Err(ParseError::Lexical { line, ch: other }),
        };
        out.push(Spanned { token, line });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub declarations: Vec<Declaration>,
    pub path: String,
}

/// Name the `.` operator desugars to.
pub const COMPOSE_NAME: &str = "comp";

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos).map(|t| &t.token)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.line)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { line: self.line(), message: message.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Token) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&t.to_string())
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek() {
            Some(Token::Ident(s)) => {
                self.pos += 1;
                Ok(Ident::new(s))
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn param_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        self.expect(&Token::LParen)?;
        let mut params = vec![self.ident()?];
        while self.eat(&Token::Comma) {
            params.push(self.ident()?);
        }
        self.expect(&Token::RParen)?;
        for (i, p) in params.iter().enumerate() {
            if params[..i].contains(p) {
                return self.error(format!("parameter `{p}` repeated"));
            }
        }
        Ok(params)
    }

    fn declaration(&mut self) -> Result<Declaration, ParseError> {
        let line = self.line();
        let decl = match self.bump() {
            Some(t @ (Token::Val | Token::Rec)) => {
                let name = self.ident()?;
                let params = if self.peek() == Some(&Token::LParen) { Some(self.param_list()?) } else { None };
                self.expect(&Token::Eq)?;
                let mut body = self.expr()?;
                if let Some(params) = params {
                    body = Expr::lambda(params, body);
                }
                if *t == Token::Val {
                    Declaration::Val { name, body, line }
                } else {
                    Declaration::Rec { name, body, line }
                }
            }
            Some(t @ (Token::PEx | Token::NEx)) => {
                let input = self.expr()?;
                self.expect(&Token::FatArrow)?;
                let output = self.expr()?;
                if *t == Token::PEx {
                    Declaration::PosExample { input, output, line }
                } else {
                    Declaration::NegExample { input, output, line }
                }
            }
            Some(Token::Synthesize) => {
                let mut vars = BTreeMap::new();
                let input = self.ty(&mut vars)?;
                self.expect(&Token::FatArrow)?;
                let output = self.ty(&mut vars)?;
                Declaration::Synthesize { input, output, line }
            }
            _ => {
                self.pos -= 1;
                return self.unexpected("a declaration");
            }
        };
        self.expect(&Token::SemiSemi)?;
        Ok(decl)
    }

    fn ty(&mut self, vars: &mut BTreeMap<String, TypeVar>) -> Result<Type, ParseError> {
        let a = self.ty_atom(vars)?;
        if self.eat(&Token::Arrow) {
            Ok(Type::arrow(a, self.ty(vars)?))
        } else {
            Ok(a)
        }
    }

    fn ty_atom(&mut self, vars: &mut BTreeMap<String, TypeVar>) -> Result<Type, ParseError> {
        match self.peek() {
            Some(Token::LParen) => {
                self.pos += 1;
                let t = self.ty(vars)?;
                self.expect(&Token::RParen)?;
                Ok(t)
            }
            Some(Token::LBracket) => {
                self.pos += 1;
                let t = self.ty(vars)?;
                self.expect(&Token::RBracket)?;
                Ok(Type::list(t))
            }
            Some(Token::Ident(s)) => {
                self.pos += 1;
                match s.as_str() {
                    "Int" => Ok(Type::Int),
                    "Char" => Ok(Type::Char),
                    "Bool" => Ok(Type::Bool),
                    v if v.starts_with(|c: char| c.is_lowercase()) => {
                        let next = TypeVar(vars.len() as u32);
                        Ok(Type::Var(*vars.entry(v.to_string()).or_insert(next)))
                    }
                    other => {
                        self.pos -= 1;
                        self.error(format!("unknown type `{other}`"))
                    }
                }
            }
            _ => self.unexpected("a type"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Lambda) => {
                self.pos += 1;
                let params = self.param_list()?;
                let body = self.expr()?;
                Ok(Expr::lambda(params, body))
            }
            Some(Token::If) => {
                self.pos += 1;
                let c = self.expr()?;
                self.expect(&Token::Then)?;
                let t = self.expr()?;
                self.expect(&Token::Else)?;
                let e = self.expr()?;
                Ok(Expr::if_then_else(c, t, e))
            }
            _ => self.comparison(),
        }
    }

    /// Parses a trailing `lambda` or `if` as the right operand, so that
    /// `x : if c then a else b` works without parentheses.
    fn operand(&mut self, next: fn(&mut Self) -> Result<Expr, ParseError>) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Lambda | Token::If) => self.expr(),
            _ => next(self),
        }
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.cons()?;
        let op = match self.peek() {
            Some(Token::Eq) => "=",
            Some(Token::Lt) => "<",
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.operand(Self::cons)?;
        Ok(Expr::binop(op, lhs, rhs))
    }

    fn cons(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        if self.eat(&Token::Colon) {
            let rhs = self.operand(Self::cons)?;
            Ok(Expr::binop(":", lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => "+",
                Some(Token::Minus) => "-",
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.operand(Self::multiplicative)?;
            lhs = Expr::binop(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.composition()?;
        while self.eat(&Token::Star) {
            let rhs = self.operand(Self::composition)?;
            lhs = Expr::binop("*", lhs, rhs);
        }
        Ok(lhs)
    }

    fn composition(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.application()?;
        if self.eat(&Token::Dot) {
            let rhs = self.composition()?;
            Ok(Expr::apply_all(Expr::var(COMPOSE_NAME), [lhs, rhs]))
        } else {
            Ok(lhs)
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Token::Ident(_)
                    | Token::Num(_)
                    | Token::Char(_)
                    | Token::True
                    | Token::False
                    | Token::Nil
                    | Token::LParen
                    | Token::LBracket
            )
        )
    }

    fn application(&mut self) -> Result<Expr, ParseError> {
        let mut f = self.atom()?;
        while self.starts_atom() {
            if self.peek() == Some(&Token::LParen) {
                // `f(a, b)` passes both arguments
                for a in self.paren_group()? {
                    f = Expr::apply(f, a);
                }
            } else {
                f = Expr::apply(f, self.atom()?);
            }
        }
        Ok(f)
    }

    /// `( e1, ..., en )` with n >= 1, or a parenthesized operator `(+)`.
    fn paren_group(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect(&Token::LParen)?;
        let op = match self.peek() {
            Some(Token::Plus) => Some("+"),
            Some(Token::Minus) => Some("-"),
            Some(Token::Star) => Some("*"),
            Some(Token::Eq) => Some("="),
            Some(Token::Lt) => Some("<"),
            Some(Token::Colon) => Some(":"),
            Some(Token::Dot) => Some(COMPOSE_NAME),
            _ => None,
        };
        if let Some(op) = op {
            if self.toks.get(self.pos + 1).map(|t| &t.token) == Some(&Token::RParen) {
                self.pos += 2;
                return Ok(vec![Expr::var(op)]);
            }
        }
        let mut items = vec![self.expr()?];
        while self.eat(&Token::Comma) {
            items.push(self.expr()?);
        }
        self.expect(&Token::RParen)?;
        Ok(items)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(*n))
            }
            Some(Token::Minus) if matches!(self.toks.get(self.pos + 1).map(|t| &t.token), Some(Token::Num(_))) => {
                self.pos += 1;
                let Some(Token::Num(n)) = self.bump() else { unreachable!() };
                Ok(Expr::Num(-*n))
            }
            Some(Token::Char(c)) => {
                self.pos += 1;
                Ok(Expr::Char(*c))
            }
            Some(Token::True) => {
                self.pos += 1;
                Ok(Expr::Bool(true))
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Expr::Bool(false))
            }
            Some(Token::Nil) => {
                self.pos += 1;
                Ok(Expr::var("nil"))
            }
            Some(Token::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::var(s))
            }
            Some(Token::LParen) => {
                let mut items = self.paren_group()?;
                if items.len() != 1 {
                    return self.error("tuples are not supported");
                }
                Ok(items.pop().unwrap())
            }
            Some(Token::LBracket) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(&Token::RBracket) {
                    items.push(self.expr()?);
                    while self.eat(&Token::Comma) {
                        items.push(self.expr()?);
                    }
                    self.expect(&Token::RBracket)?;
                }
                Ok(Expr::list(items))
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Parses a whole file. Exactly one `Synthesize` declaration is required.
pub fn parse_file(tokens: &[Spanned], path: &str) -> Result<SourceFile, ParseError> {
    let mut p = Parser { toks: tokens, pos: 0 };
    let mut declarations = Vec::new();
    let mut goal_seen = false;
    while p.peek().is_some() {
        let d = p.declaration()?;
        if let Declaration::Synthesize { line, .. } = d {
            if goal_seen {
                return Err(ParseError::DuplicateGoal { line });
            }
            goal_seen = true;
        }
        declarations.push(d);
    }
    if !goal_seen {
        return Err(ParseError::MissingGoal);
    }
    Ok(SourceFile { declarations, path: path.to_string() })
}

pub fn parse_source(src: &str, path: &str) -> Result<SourceFile, ParseError> {
    parse_file(&tokenize(src)?, path)
}

/// Parses a single expression, as printed by `Expr`'s `Display`.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.unexpected("end of input");
    }
    Ok(e)
}

/// Parses a type such as `[Char] -> Int`.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let t = p.ty(&mut BTreeMap::new())?;
    if p.peek().is_some() {
        return p.unexpected("end of input");
    }
    Ok(t)
}

/// Prefix that marks background functions.
pub const BACKGROUND_PREFIX: &str = "BK_";

/// Prefix of auxiliary definitions: usable by later definitions, but
/// neither templates nor hole fillers.
pub const AUXILIARY_PREFIX: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawExample {
    pub input: Expr,
    pub output: Expr,
    pub line: usize,
}

/// Examples and goal as written in the file, before evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawExamples {
    pub positives: Vec<RawExample>,
    pub negatives: Vec<RawExample>,
    pub input_type: Type,
    pub output_type: Type,
}

impl RawExamples {
    /// `input -> output`
    pub fn goal_type(&self) -> Type {
        Type::arrow(self.input_type.clone(), self.output_type.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Knowledge {
    pub templates: Vec<Declaration>,
    pub background: Vec<Declaration>,
    pub auxiliary: Vec<Declaration>,
    pub examples: RawExamples,
}

/// Number of parameters a template combinator takes, i.e. its hole count.
pub fn combinator_arity(body: &Expr) -> usize {
    match body {
        Expr::Lambda(params, _) => params.len(),
        _ => 0,
    }
}

/// Separates template combinators, background functions and examples.
pub fn split_knowledge(file: &SourceFile) -> Result<Knowledge, ParseError> {
    let mut templates = Vec::new();
    let mut background = Vec::new();
    let mut auxiliary = Vec::new();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut goal = None;
    for d in &file.declarations {
        match d {
            Declaration::Val { name, body, line } | Declaration::Rec { name, body, line } => {
                if name.starts_with(BACKGROUND_PREFIX) {
                    background.push(d.clone());
                } else if name.starts_with(AUXILIARY_PREFIX) {
                    auxiliary.push(d.clone());
                } else if combinator_arity(body) == 0 {
                    return Err(ParseError::NullaryTemplate { name: name.clone(), line: *line });
                } else {
                    templates.push(d.clone());
                }
            }
            Declaration::PosExample { input, output, line } => {
                positives.push(RawExample { input: input.clone(), output: output.clone(), line: *line })
            }
            Declaration::NegExample { input, output, line } => {
                negatives.push(RawExample { input: input.clone(), output: output.clone(), line: *line })
            }
            Declaration::Synthesize { input, output, .. } => goal = Some((input.clone(), output.clone())),
        }
    }
    let (input_type, output_type) = goal.ok_or(ParseError::MissingGoal)?;
    Ok(Knowledge {
        templates,
        background,
        auxiliary,
        examples: RawExamples { positives, negatives, input_type, output_type },
    })
}
