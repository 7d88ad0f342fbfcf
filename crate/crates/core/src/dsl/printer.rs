use std::fmt::Write;

use super::ast::*;
use super::PRAGMA;

fn join(ids: &[Ident]) -> String {
    ids.iter()
        .map(|i| i.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn arg_value(v: &ArgValue) -> String {
    match v {
        ArgValue::Word(w) => w.name.clone(),
        ArgValue::Set { items, .. } => format!("{{{}}}", join(items)),
    }
}

/// Canonical source text for `spec`. Parsing the output yields the same
/// tree up to source positions.
pub fn pretty_print(spec: &Spec) -> String {
    let mut out = String::new();
    out.push_str(PRAGMA);
    out.push('\n');
    for item in &spec.items {
        match item {
            Item::Var(v) => {
                let _ = writeln!(out, "var {} in {{{}}}", v.name.name, join(&v.values));
            }
            Item::Monitor(m) => match &m.body {
                MonitorBody::Fsm(stmts) => {
                    let _ = writeln!(out, "monitor {} fsm {{", m.name.name);
                    for s in stmts {
                        match s {
                            FsmStmt::Vars(v) => {
                                let _ = writeln!(out, "  vars {};", join(v));
                            }
                            FsmStmt::State { name, initial } => {
                                let init = if *initial { " initial" } else { "" };
                                let _ = writeln!(out, "  state {}{init};", name.name);
                            }
                            FsmStmt::On {
                                pattern, from, to, ..
                            } => {
                                let pat = if pattern.is_empty() {
                                    "*".to_string()
                                } else {
                                    pattern
                                        .iter()
                                        .map(|(v, x)| format!("{}={}", v.name, x.name))
                                        .collect::<Vec<_>>()
                                        .join(", ")
                                };
                                let _ = writeln!(
                                    out,
                                    "  on {pat} from {} to {};",
                                    from.name, to.name
                                );
                            }
                        }
                    }
                    out.push_str("}\n");
                }
                MonitorBody::Template(call) => {
                    let args: Vec<String> = call
                        .args
                        .iter()
                        .map(|a| match &a.key {
                            Some(k) => format!("{} = {}", k.name, arg_value(&a.value)),
                            None => arg_value(&a.value),
                        })
                        .collect();
                    let _ = writeln!(
                        out,
                        "monitor {} = {}({})",
                        m.name.name,
                        call.template.name,
                        args.join(", ")
                    );
                }
            },
            Item::Scenario(s) => {
                let terms: Vec<&str> = s.terms.iter().map(|t| t.name.as_str()).collect();
                match &s.name {
                    Some(n) => {
                        let _ = writeln!(out, "scenario {} = {}", n.name, terms.join(" & "));
                    }
                    None => {
                        let _ = writeln!(out, "scenario = {}", terms.join(" & "));
                    }
                }
            }
            Item::Group(g) => {
                let _ = writeln!(out, "group {} = {{{}}}", g.name.name, join(&g.members));
            }
        }
    }
    out
}
