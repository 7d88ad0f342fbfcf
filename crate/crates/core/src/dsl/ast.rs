/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Spec {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Var(VarDecl),
    Monitor(MonitorDef),
    Scenario(ScenarioDef),
    Group(GroupDef),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Ident,
    pub values: Vec<Ident>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonitorDef {
    pub name: Ident,
    pub body: MonitorBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonitorBody {
    Fsm(Vec<FsmStmt>),
    Template(TemplateCall),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FsmStmt {
    Vars(Vec<Ident>),
    State { name: Ident, initial: bool },
    /// `pattern` is empty for `*`.
    On {
        span: Span,
        pattern: Vec<(Ident, Ident)>,
        from: Ident,
        to: Ident,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateCall {
    pub template: Ident,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arg {
    pub key: Option<Ident>,
    pub value: ArgValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgValue {
    Word(Ident),
    Set { span: Span, items: Vec<Ident> },
}

impl ArgValue {
    pub fn span(&self) -> Span {
        match self {
            ArgValue::Word(w) => w.span,
            ArgValue::Set { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioDef {
    pub span: Span,
    pub name: Option<Ident>,
    pub terms: Vec<Ident>,
}

/// Names a set of monitors for reporting. Independence is always computed
/// from variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDef {
    pub name: Ident,
    pub members: Vec<Ident>,
}

impl Spec {
    pub fn vars(&self) -> impl Iterator<Item = &VarDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Var(v) => Some(v),
            _ => None,
        })
    }

    pub fn monitors(&self) -> impl Iterator<Item = &MonitorDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Monitor(m) => Some(m),
            _ => None,
        })
    }

    pub fn scenarios(&self) -> impl Iterator<Item = &ScenarioDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Scenario(s) => Some(s),
            _ => None,
        })
    }

    pub fn groups(&self) -> impl Iterator<Item = &GroupDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Group(g) => Some(g),
            _ => None,
        })
    }

    /// Copy with every source position reset, for structural comparison.
    pub fn without_spans(&self) -> Spec {
        let mut s = self.clone();
        for item in &mut s.items {
            item.clear_spans();
        }
        s
    }
}

fn clear(ids: &mut [Ident]) {
    for i in ids {
        i.span = Span::default();
    }
}

impl Item {
    fn clear_spans(&mut self) {
        match self {
            Item::Var(v) => {
                v.name.span = Span::default();
                clear(&mut v.values);
            }
            Item::Monitor(m) => {
                m.name.span = Span::default();
                match &mut m.body {
                    MonitorBody::Fsm(stmts) => {
                        for s in stmts {
                            match s {
                                FsmStmt::Vars(v) => clear(v),
                                FsmStmt::State { name, .. } => name.span = Span::default(),
                                FsmStmt::On {
                                    span,
                                    pattern,
                                    from,
                                    to,
                                } => {
                                    *span = Span::default();
                                    for (v, x) in pattern {
                                        v.span = Span::default();
                                        x.span = Span::default();
                                    }
                                    from.span = Span::default();
                                    to.span = Span::default();
                                }
                            }
                        }
                    }
                    MonitorBody::Template(call) => {
                        call.template.span = Span::default();
                        for a in &mut call.args {
                            if let Some(k) = &mut a.key {
                                k.span = Span::default();
                            }
                            match &mut a.value {
                                ArgValue::Word(w) => w.span = Span::default(),
                                ArgValue::Set { span, items } => {
                                    *span = Span::default();
                                    clear(items);
                                }
                            }
                        }
                    }
                }
            }
            Item::Scenario(s) => {
                s.span = Span::default();
                if let Some(n) = &mut s.name {
                    n.span = Span::default();
                }
                clear(&mut s.terms);
            }
            Item::Group(g) => {
                g.name.span = Span::default();
                clear(&mut g.members);
            }
        }
    }
}
