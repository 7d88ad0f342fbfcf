use super::ast::*;
use super::lexer::{Tok, Token};
use super::{Diagnostic, ErrorCode};
use crate::schema::is_identifier;

const TOP_LEVEL: [&str; 4] = ["var", "monitor", "scenario", "group"];

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    diags: &'a mut Vec<Diagnostic>,
}

type PResult<T> = Result<T, ()>;

/// Builds the syntax tree, reporting errors and resynchronizing at the next
/// top-level keyword.
pub fn parse_tokens(toks: &[Token], diags: &mut Vec<Diagnostic>) -> Spec {
    let mut p = Parser {
        toks,
        pos: 0,
        diags,
    };
    let mut spec = Spec::default();
    while !p.at_eof() {
        let start = p.pos;
        match p.item() {
            Ok(item) => spec.items.push(item),
            Err(()) => p.recover(start),
        }
    }
    spec
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&mut self, span: Span, msg: impl Into<String>) -> PResult<T> {
        self.diags
            .push(Diagnostic::error(ErrorCode::Syntax, span, msg.into()));
        Err(())
    }

    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let t = self.peek().clone();
        self.error(
            t.span,
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn recover(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        while !self.at_eof() {
            if let Tok::Word(w) = &self.peek().tok {
                if TOP_LEVEL.contains(&w.as_str()) {
                    return;
                }
            }
            self.bump();
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn keyword(&mut self, w: &str) -> PResult<Span> {
        if self.is_word(w) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{w}`"))
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn word(&mut self, what: &str) -> PResult<Ident> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Word(w) => {
                self.bump();
                Ok(Ident {
                    name: w,
                    span: t.span,
                })
            }
            _ => self.unexpected(what),
        }
    }

    fn name(&mut self, what: &str) -> PResult<Ident> {
        let id = self.word(what)?;
        if !is_identifier(&id.name) {
            return self.error(id.span, format!("`{}` is not a valid {what}", id.name));
        }
        Ok(id)
    }

    fn item(&mut self) -> PResult<Item> {
        let t = self.peek().clone();
        let item = match &t.tok {
            Tok::Word(w) if w == "var" => Item::Var(self.var()?),
            Tok::Word(w) if w == "monitor" => Item::Monitor(self.monitor()?),
            Tok::Word(w) if w == "scenario" => Item::Scenario(self.scenario()?),
            Tok::Word(w) if w == "group" => Item::Group(self.group()?),
            _ => return self.unexpected("`var`, `monitor`, `scenario` or `group`"),
        };
        self.eat(Tok::Semi);
        Ok(item)
    }

    /// `{ a, b, ... }` with an optional trailing comma.
    fn word_set(&mut self, what: &str) -> PResult<(Span, Vec<Ident>)> {
        let span = self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        loop {
            if self.eat(Tok::RBrace) {
                return Ok((span, items));
            }
            items.push(self.word(what)?);
            if !self.eat(Tok::Comma) {
                self.expect(Tok::RBrace)?;
                return Ok((span, items));
            }
        }
    }

    fn var(&mut self) -> PResult<VarDecl> {
        self.keyword("var")?;
        let name = self.name("variable name")?;
        self.keyword("in")?;
        let (_, values) = self.word_set("value")?;
        Ok(VarDecl { name, values })
    }

    fn monitor(&mut self) -> PResult<MonitorDef> {
        self.keyword("monitor")?;
        let name = self.name("monitor name")?;
        if self.is_word("fsm") {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut stmts = Vec::new();
            while !self.eat(Tok::RBrace) {
                if self.at_eof() {
                    return self.unexpected("`}`");
                }
                stmts.push(self.fsm_stmt()?);
            }
            Ok(MonitorDef {
                name,
                body: MonitorBody::Fsm(stmts),
            })
        } else if self.eat(Tok::Eq) {
            let template = self.name("template name")?;
            self.expect(Tok::LParen)?;
            let mut args = Vec::new();
            if !self.eat(Tok::RParen) {
                loop {
                    args.push(self.arg()?);
                    if self.eat(Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            Ok(MonitorDef {
                name,
                body: MonitorBody::Template(TemplateCall { template, args }),
            })
        } else {
            self.unexpected("`fsm` or `=`")
        }
    }

    fn arg(&mut self) -> PResult<Arg> {
        let key = if matches!(self.peek().tok, Tok::Word(_)) && *self.peek_at(1) == Tok::Eq {
            let k = self.name("argument name")?;
            self.bump();
            Some(k)
        } else {
            None
        };
        let value = if self.peek().tok == Tok::LBrace {
            let (span, items) = self.word_set("value")?;
            ArgValue::Set { span, items }
        } else {
            ArgValue::Word(self.word("argument")?)
        };
        Ok(Arg { key, value })
    }

    fn fsm_stmt(&mut self) -> PResult<FsmStmt> {
        let t = self.peek().clone();
        let stmt = match &t.tok {
            Tok::Word(w) if w == "vars" => {
                self.bump();
                let mut vars = vec![self.name("variable name")?];
                while self.eat(Tok::Comma) {
                    vars.push(self.name("variable name")?);
                }
                FsmStmt::Vars(vars)
            }
            Tok::Word(w) if w == "state" => {
                self.bump();
                let name = self.name("state name")?;
                let initial = if self.is_word("initial") {
                    self.bump();
                    true
                } else {
                    false
                };
                FsmStmt::State { name, initial }
            }
            Tok::Word(w) if w == "on" => {
                let span = self.bump().span;
                let mut pattern = Vec::new();
                if !self.eat(Tok::Star) {
                    loop {
                        let v = self.name("variable name")?;
                        self.expect(Tok::Eq)?;
                        let x = self.word("value")?;
                        pattern.push((v, x));
                        if !self.eat(Tok::Comma) {
                            break;
                        }
                    }
                }
                self.keyword("from")?;
                let from = self.name("state name")?;
                self.keyword("to")?;
                let to = self.name("state name")?;
                FsmStmt::On {
                    span,
                    pattern,
                    from,
                    to,
                }
            }
            _ => return self.unexpected("`vars`, `state`, `on` or `}`"),
        };
        self.expect(Tok::Semi)?;
        Ok(stmt)
    }

    fn scenario(&mut self) -> PResult<ScenarioDef> {
        let span = self.keyword("scenario")?;
        let name = if self.peek().tok == Tok::Eq {
            None
        } else {
            Some(self.name("scenario name")?)
        };
        self.expect(Tok::Eq)?;
        let mut terms = vec![self.name("monitor name")?];
        while self.eat(Tok::Amp) {
            terms.push(self.name("monitor name")?);
        }
        Ok(ScenarioDef { span, name, terms })
    }

    fn group(&mut self) -> PResult<GroupDef> {
        self.keyword("group")?;
        let name = self.name("group name")?;
        self.expect(Tok::Eq)?;
        let (_, members) = self.word_set("monitor name")?;
        Ok(GroupDef { name, members })
    }
}
