use crate::kernel::{Direction, Name};
use crate::tactic::{MatchArm, TacticDef, TacticExpr, KEYWORDS};

use super::command::{Command, FixpointSrc, InductiveSrc, NotationSrc, PredicateSrc, RuleSrc};
use super::lexer::{lex, skip_comment, ParseError, Tok, Token};
use super::surface::{Binder, Expr};

const EXPR_KEYWORDS: &[&str] = &["forall", "match", "with", "end", "where"];

struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
    /// Offset reported for errors at end of input.
    end: usize,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], end: usize) -> Self {
        Parser { toks, i: 0, end }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.i + k).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let found = match self.peek() {
            Some(t) => format!(", found {t}"),
            None => ", found end of input".to_string(),
        };
        Err(ParseError::new(self.pos(), format!("{}{found}", message.into())))
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.i += 1;
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.at_kw(k);
        if hit {
            self.i += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`"))
        }
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn ident(&mut self, reserved: &[&str]) -> Result<Name, ParseError> {
        match self.peek() {
            Some(Tok::Ident(x)) if !reserved.contains(&x.as_str()) => {
                self.i += 1;
                Ok(Name::new(x))
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                self.i += 1;
                Ok(s.clone())
            }
            _ => self.err("expected a string"),
        }
    }

    // ------------------------------------------------------------------
    // expressions

    fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("forall") {
            let binders = self.binders()?;
            if binders.is_empty() {
                return self.err("expected a binder");
            }
            self.expect_sym(",")?;
            let body = self.expr()?;
            return Ok(Expr::Forall(binders, Box::new(body)));
        }
        let lhs = self.eqn()?;
        if self.eat_sym("->") {
            let rhs = self.expr()?;
            return Ok(Expr::Arrow(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    /// `x y (z w : T)`.
    fn binders(&mut self) -> Result<Vec<Binder>, ParseError> {
        let mut out = Vec::new();
        loop {
            if self.at_sym("(") && matches!(self.peek_at(1), Some(Tok::Ident(_))) {
                self.i += 1;
                let mut names = vec![self.ident(EXPR_KEYWORDS)?];
                while matches!(self.peek(), Some(Tok::Ident(_))) {
                    names.push(self.ident(EXPR_KEYWORDS)?);
                }
                self.expect_sym(":")?;
                let ty = self.ident(EXPR_KEYWORDS)?;
                self.expect_sym(")")?;
                out.extend(names.into_iter().map(|name| Binder { name, ty: Some(ty.clone()) }));
            } else if matches!(self.peek(), Some(Tok::Ident(x)) if !EXPR_KEYWORDS.contains(&x.as_str())) {
                let name = self.ident(EXPR_KEYWORDS)?;
                out.push(Binder { name, ty: None });
            } else {
                break;
            }
        }
        Ok(out)
    }

    /// Binders followed by a trailing `: T` that types all of them.
    fn binders_with_trailing_type(&mut self) -> Result<Vec<Binder>, ParseError> {
        let mut binders = self.binders()?;
        if !binders.is_empty() && binders.iter().all(|b| b.ty.is_none()) && self.eat_sym(":") {
            let ty = self.ident(EXPR_KEYWORDS)?;
            for b in &mut binders {
                b.ty = Some(ty.clone());
            }
        }
        Ok(binders)
    }

    fn eqn(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.list()?;
        if self.eat_sym("=") {
            let rhs = self.list()?;
            return Ok(Expr::Eq(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn list(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.app()?;
        if self.eat_sym("::") {
            return Ok(Expr::Cons(Box::new(lhs), Box::new(self.list()?)));
        }
        if self.eat_sym("++") {
            return Ok(Expr::Append(Box::new(lhs), Box::new(self.list()?)));
        }
        Ok(lhs)
    }

    fn at_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(x)) => !EXPR_KEYWORDS.contains(&x.as_str()),
            Some(Tok::Num(_)) | Some(Tok::PatVar(_)) => true,
            Some(Tok::Sym(s)) => matches!(*s, "[" | "_" | "("),
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Ident(x)) = self.peek() {
            if !EXPR_KEYWORDS.contains(&x.as_str()) {
                let head = self.ident(EXPR_KEYWORDS)?;
                let mut args = Vec::new();
                while self.at_atom() {
                    args.push(self.atom()?);
                }
                return Ok(if args.is_empty() { Expr::Ident(head) } else { Expr::App(head, args) });
            }
        }
        let a = self.atom()?;
        if self.at_atom() {
            return self.err("only a name can be applied");
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Ident(x)) if !EXPR_KEYWORDS.contains(&x.as_str()) => {
                self.i += 1;
                Ok(Expr::Ident(Name::new(x)))
            }
            Some(Tok::Num(n)) => {
                self.i += 1;
                Ok(Expr::Num(*n))
            }
            Some(Tok::PatVar(x)) => {
                self.i += 1;
                Ok(Expr::PatVar(Name::new(x)))
            }
            Some(Tok::Sym("_")) => {
                self.i += 1;
                Ok(Expr::Wild)
            }
            Some(Tok::Sym("[")) => {
                self.i += 1;
                self.expect_sym("]")?;
                Ok(Expr::Nil)
            }
            Some(Tok::Sym("(")) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => self.err("expected an expression"),
        }
    }

    // ------------------------------------------------------------------
    // tactics

    fn tactic(&mut self) -> Result<TacticExpr, ParseError> {
        let mut t = self.alt()?;
        while self.eat_sym(";") {
            let rhs = self.alt()?;
            t = TacticExpr::seq(t, rhs);
        }
        Ok(t)
    }

    fn alt(&mut self) -> Result<TacticExpr, ParseError> {
        let mut t = self.primary()?;
        while self.eat_sym("+") {
            let rhs = self.primary()?;
            t = TacticExpr::alt(t, rhs);
        }
        Ok(t)
    }

    fn tactic_arg(&mut self) -> Result<Name, ParseError> {
        self.ident(KEYWORDS)
    }

    fn primary(&mut self) -> Result<TacticExpr, ParseError> {
        if self.eat_sym("(") {
            let t = self.tactic()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        let word = match self.peek() {
            Some(Tok::Ident(w)) => w.as_str(),
            _ => return self.err("expected a tactic"),
        };
        let simple = match word {
            "intros" => Some(TacticExpr::Intros),
            "reflexivity" => Some(TacticExpr::Reflexivity),
            "symmetry" => Some(TacticExpr::Symmetry),
            "assumption" => Some(TacticExpr::Assumption),
            "f_equal" => Some(TacticExpr::FEqual),
            "simpl" => Some(TacticExpr::Simpl),
            "auto" => Some(TacticExpr::Auto),
            "fail" => Some(TacticExpr::Fail),
            _ => None,
        };
        if let Some(t) = simple {
            self.i += 1;
            return Ok(t);
        }
        self.i += 1;
        Ok(match word {
            "intro" => match self.peek() {
                Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) => TacticExpr::Intro(Some(self.tactic_arg()?)),
                _ => TacticExpr::Intro(None),
            },
            "apply" => TacticExpr::Apply(self.tactic_arg()?),
            "exact" => TacticExpr::Exact(self.tactic_arg()?),
            "induction" => TacticExpr::Induction(self.tactic_arg()?),
            "destruct" => TacticExpr::Destruct(self.tactic_arg()?),
            "rewrite" => {
                let dir = if self.eat_sym("<-") {
                    Direction::Backward
                } else {
                    self.eat_sym("->");
                    Direction::Forward
                };
                TacticExpr::Rewrite(dir, self.tactic_arg()?)
            }
            "solve" => {
                self.expect_sym("[")?;
                let t = self.tactic()?;
                self.expect_sym("]")?;
                TacticExpr::Solve(Box::new(t))
            }
            "repeat" => TacticExpr::Repeat(Box::new(self.primary()?)),
            "match" => {
                self.expect_kw("goal")?;
                self.expect_kw("with")?;
                let mut arms = Vec::new();
                self.eat_sym("|");
                loop {
                    self.expect_sym("|-")?;
                    let pattern = self.expr()?;
                    self.expect_sym("=>")?;
                    let body = self.tactic()?;
                    arms.push(MatchArm { pattern, body });
                    if !self.eat_sym("|") {
                        break;
                    }
                }
                self.expect_kw("end")?;
                TacticExpr::MatchGoal(arms)
            }
            w if KEYWORDS.contains(&w) => {
                self.i -= 1;
                return self.err("expected a tactic");
            }
            w => TacticExpr::Call(Name::new(w)),
        })
    }

    // ------------------------------------------------------------------
    // vernacular

    fn command(&mut self) -> Result<Command, ParseError> {
        let word = match self.peek() {
            Some(Tok::Ident(w)) => w.as_str(),
            _ => return Ok(Command::Tactic(self.tactic()?)),
        };
        let cmd = match word {
            "Require" => {
                self.i += 1;
                if !self.eat_kw("Import") {
                    self.eat_kw("Export");
                }
                Command::Require(self.ident(&[])?)
            }
            "Inductive" => {
                self.i += 1;
                self.inductive()?
            }
            "Notation" => {
                self.i += 1;
                Command::Notation(self.notation()?)
            }
            "Fixpoint" => {
                self.i += 1;
                self.fixpoint()?
            }
            "Ltac" => {
                self.i += 1;
                let name = self.ident(KEYWORDS)?;
                self.expect_sym(":=")?;
                Command::Ltac(TacticDef { name, body: self.tactic()? })
            }
            "Lemma" | "Theorem" | "Example" => {
                self.i += 1;
                let name = self.ident(&[])?;
                let binders = self.binders()?;
                self.expect_sym(":")?;
                Command::Lemma { name, binders, statement: self.expr()? }
            }
            "Proof" => {
                self.i += 1;
                Command::Proof
            }
            "Qed" => {
                self.i += 1;
                Command::Qed
            }
            "suggest" => {
                self.i += 1;
                Command::Suggest
            }
            "search" => {
                self.i += 1;
                if self.eat_kw("failing") {
                    self.expect_sym("(")?;
                    let t = self.tactic()?;
                    self.expect_sym(")")?;
                    Command::SearchFailing(t.seq_items().into_iter().cloned().collect())
                } else {
                    Command::Search
                }
            }
            _ => Command::Tactic(self.tactic()?),
        };
        self.expect_end()?;
        Ok(cmd)
    }

    fn inductive(&mut self) -> Result<Command, ParseError> {
        let name = self.ident(&[])?;
        let sig = if self.eat_sym(":") { Some(self.expr()?) } else { None };
        self.expect_sym(":=")?;
        self.eat_sym("|");
        let mut items = Vec::new();
        loop {
            let item = self.ident(&[])?;
            let binders = self.binders()?;
            self.expect_sym(":")?;
            let ty = self.expr()?;
            items.push((item, binders, ty));
            if !self.eat_sym("|") {
                break;
            }
        }
        match sig {
            None => {
                let mut ctors = Vec::new();
                for (n, binders, ty) in items {
                    if !binders.is_empty() {
                        return Err(ParseError::new(self.pos(), "constructor binders are not supported"));
                    }
                    ctors.push((n, ty));
                }
                Ok(Command::Inductive(InductiveSrc { name, ctors }))
            }
            Some(sig) => Ok(Command::Predicate(PredicateSrc {
                name,
                sig,
                rules: items.into_iter().map(|(name, binders, statement)| RuleSrc { name, binders, statement }).collect(),
            })),
        }
    }

    fn notation(&mut self) -> Result<NotationSrc, ParseError> {
        let pattern = self.string()?;
        self.expect_sym(":=")?;
        let body = self.expr()?;
        Ok(NotationSrc { pattern, body })
    }

    fn fixpoint(&mut self) -> Result<Command, ParseError> {
        let name = self.ident(&[])?;
        let params = self.binders()?;
        let ret = if self.eat_sym(":") { Some(self.ident(EXPR_KEYWORDS)?) } else { None };
        self.expect_sym(":=")?;
        self.expect_kw("match")?;
        let scrutinee = self.ident(EXPR_KEYWORDS)?;
        self.expect_kw("with")?;
        self.eat_sym("|");
        let mut branches = Vec::new();
        loop {
            let pattern = self.list()?;
            self.expect_sym("=>")?;
            let body = self.expr()?;
            branches.push((pattern, body));
            if !self.eat_sym("|") {
                break;
            }
        }
        self.expect_kw("end")?;
        let notation = if self.eat_kw("where") { Some(self.notation()?) } else { None };
        Ok(Command::Fixpoint(FixpointSrc { name, params, ret, scrutinee, branches, notation }))
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser::new(&toks, text.len());
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

pub fn parse_binders(text: &str) -> Result<Vec<Binder>, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser::new(&toks, text.len());
    let b = p.binders_with_trailing_type()?;
    p.expect_end()?;
    Ok(b)
}

pub fn parse_tactic(text: &str) -> Result<TacticExpr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser::new(&toks, text.len());
    let t = p.tactic()?;
    p.expect_end()?;
    Ok(t)
}

/// Parses one command, given without its terminating `.`.
pub fn parse_command(text: &str) -> Result<Command, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError::new(0, "empty command"));
    }
    Parser::new(&toks, text.len()).command()
}

/// The text of one command, with its byte offset in the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub pos: usize,
}

/// Splits source text into `.`-terminated commands, skipping comments and
/// stripping proof bullets (`-`, `+`, `*`).
pub fn split_sentences(src: &str) -> Result<Vec<Sentence>, ParseError> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().expect("nonempty");
        if rest.starts_with("(*") {
            i = skip_comment(src, i)?;
            continue;
        }
        if c == '"' {
            let end = rest[1..].find('"').ok_or_else(|| ParseError::new(i, "unterminated string"))?;
            start.get_or_insert(i);
            i += end + 2;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if start.is_none() && matches!(c, '-' | '+' | '*') {
            // bullets: a run of one bullet character followed by whitespace
            let run = rest.chars().take_while(|x| *x == c).count();
            if rest[run..].chars().next().is_some_and(char::is_whitespace) {
                i += run;
                continue;
            }
        }
        if c == '.' && rest[1..].chars().next().is_none_or(char::is_whitespace) {
            let s = start.ok_or_else(|| ParseError::new(i, "empty command"))?;
            out.push(Sentence { text: strip_comments(&src[s..i])?, pos: s });
            start = None;
            i += 1;
            continue;
        }
        start.get_or_insert(i);
        i += c.len_utf8();
    }
    if let Some(s) = start {
        return Err(ParseError::new(s, "command is missing its terminating `.`"));
    }
    Ok(out)
}

/// Replaces comments by spaces, keeping byte offsets.
fn strip_comments(text: &str) -> Result<String, ParseError> {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        if rest.starts_with("(*") {
            let end = skip_comment(text, i)?;
            out.extend(std::iter::repeat_n(' ', end - i));
            i = end;
        } else {
            let c = rest.chars().next().expect("nonempty");
            out.push(c);
            i += c.len_utf8();
        }
    }
    Ok(out.trim_end().to_string())
}
