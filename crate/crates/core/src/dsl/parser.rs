use std::collections::HashMap;

use crate::hilbert::{Register, C64, EPS_NORM};
use crate::policies::Policy;
use crate::scenarios::{
    validate_scenario, Agent, BasisSpec, Check, CheckKind, Event, Item, Preparation, Scenario,
    UnitarySpec, DEFAULT_TOL,
};

use super::lexer::{lex_line, Tok, Token};
use super::{ParseDiagnostic, ParseOutput, SourceSpan};

type PResult<T> = Result<T, ParseDiagnostic>;

const STATEMENTS: &str = "SCENARIO, SYSTEM, AGENT, STATE, POLICY, EVENT or CHECK";

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    lineno: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span_here(&self) -> SourceSpan {
        match self.toks.get(self.pos) {
            Some(t) => t.span,
            None => {
                let column = self
                    .toks
                    .last()
                    .map_or(1, |t| t.span.column + t.span.length);
                SourceSpan {
                    line: self.lineno,
                    column,
                    length: 1,
                }
            }
        }
    }

    fn fail<T>(&self, message: impl Into<String>, hint: &str) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => format!(", found {}", t.describe()),
            None => ", found end of line".to_string(),
        };
        Err(
            ParseDiagnostic::error(self.span_here(), format!("{}{found}", message.into()))
                .with_hint(hint),
        )
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> PResult<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.fail(format!("expected `{sym}`"), &format!("`{sym}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => self.fail(format!("expected {what}"), what),
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == word => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{word}`"), &format!("`{word}`")),
        }
    }

    fn end(&self) -> PResult<()> {
        if self.pos >= self.toks.len() {
            Ok(())
        } else {
            self.fail("unexpected trailing input", "end of line")
        }
    }

    /// Outcome label: an identifier or digits as written.
    fn label(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) | Some(Tok::Number(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => self.fail(
                "expected an outcome label",
                "outcome label such as `1` or `PhiPlus`",
            ),
        }
    }

    /// Identifiers separated by commas.
    fn ident_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while self.eat(",") {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    /// Identifiers separated by spaces or commas, up to the end of line.
    fn ident_run(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while self.pos < self.toks.len() {
            self.eat(",");
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn number(&self, text: &str, span: SourceSpan) -> PResult<f64> {
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            Ok(_) => Err(ParseDiagnostic::error(
                span,
                format!("number `{text}` is out of range"),
            )),
            Err(_) => Err(ParseDiagnostic::error(
                span,
                format!("malformed number `{text}`"),
            )),
        }
    }

    fn sign(&mut self) -> f64 {
        if self.eat("-") {
            -1.0
        } else {
            self.eat("+");
            1.0
        }
    }

    fn real(&mut self) -> PResult<f64> {
        let sign = self.sign();
        match self.toks.get(self.pos) {
            Some(Token {
                tok: Tok::Number(s),
                span,
            }) => {
                let x = self.number(s, *span)?;
                self.pos += 1;
                Ok(sign * x)
            }
            _ => self.fail("expected a number", "real number"),
        }
    }

    /// One signed real or imaginary part.
    fn part(&mut self, sign: f64) -> PResult<C64> {
        match self.toks.get(self.pos) {
            Some(Token {
                tok: Tok::Number(s),
                span,
            }) => {
                let x = self.number(s, *span)?;
                self.pos += 1;
                Ok(C64::new(sign * x, 0.0))
            }
            Some(Token {
                tok: Tok::Imag(s),
                span,
            }) => {
                let x = self.number(s, *span)?;
                self.pos += 1;
                Ok(C64::new(0.0, sign * x))
            }
            _ => self.fail(
                "expected a number",
                "number such as `0.5`, `2i` or `(0.5+0.5i)`",
            ),
        }
    }

    /// `x`, `yi`, or `(x+yi)` with optional leading sign.
    fn complex(&mut self) -> PResult<C64> {
        let sign = self.sign();
        if self.eat("(") {
            let inner = self.sign();
            let mut z = self.part(inner)?;
            if matches!(self.peek(), Some(Tok::Sym("+")) | Some(Tok::Sym("-"))) {
                let s = self.sign();
                z += self.part(s)?;
            }
            self.expect(")")?;
            Ok(z * sign)
        } else {
            self.part(sign)
        }
    }

    fn basis(&mut self) -> PResult<BasisSpec> {
        let hint = "computational, bell, total_spin or spin(angle,...)";
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                match s.as_str() {
                    "computational" => Ok(BasisSpec::Computational),
                    "bell" => Ok(BasisSpec::Bell),
                    "total_spin" => Ok(BasisSpec::TotalSpin),
                    "spin" => {
                        self.expect("(")?;
                        let mut angles = vec![self.real()?];
                        while self.eat(",") {
                            angles.push(self.real()?);
                        }
                        self.expect(")")?;
                        Ok(BasisSpec::Spin(angles))
                    }
                    _ => {
                        self.pos -= 1;
                        self.fail("unknown basis", hint)
                    }
                }
            }
            _ => self.fail("expected a basis", hint),
        }
    }

    fn unitary(&mut self) -> PResult<UnitarySpec> {
        let hint = "IDENT, HADAMARD, CORRELATE, FLIP or a matrix `[a, b; c, d]`";
        if self.eat("[") {
            let mut rows = vec![vec![self.complex()?]];
            loop {
                if self.eat(",") {
                    let z = self.complex()?;
                    rows.last_mut().expect("nonempty").push(z);
                } else if self.eat(";") {
                    rows.push(vec![self.complex()?]);
                } else {
                    self.expect("]")?;
                    return Ok(UnitarySpec::Literal(rows));
                }
            }
        }
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let u = match s.as_str() {
                    "IDENT" => UnitarySpec::Ident,
                    "HADAMARD" => UnitarySpec::Hadamard,
                    "CORRELATE" => UnitarySpec::Correlate,
                    "FLIP" => UnitarySpec::Flip,
                    _ => return self.fail("unknown unitary", hint),
                };
                self.pos += 1;
                Ok(u)
            }
            _ => self.fail("expected a unitary", hint),
        }
    }
}

/// `key=value` options in any order; each key at most once.
#[derive(Default)]
struct Options {
    basis: Option<BasisSpec>,
    targets: Option<Vec<String>>,
    agents: Option<Vec<String>>,
    record: Option<String>,
    tol: Option<f64>,
}

fn options(c: &mut Cursor<'_>, allowed: &[&str]) -> PResult<Options> {
    let mut o = Options::default();
    let hint = allowed
        .iter()
        .map(|k| format!("{k}="))
        .collect::<Vec<_>>()
        .join(", ");
    while c.pos < c.toks.len() {
        let span = c.span_here();
        let key = match c.peek() {
            Some(Tok::Ident(k)) if allowed.contains(&k.as_str()) => k.clone(),
            _ => return c.fail("expected an option", &hint),
        };
        c.pos += 1;
        c.expect("=")?;
        let dup = match key.as_str() {
            "basis" => o.basis.replace(c.basis()?).is_some(),
            "targets" => o.targets.replace(c.ident_list("subsystem")?).is_some(),
            "agents" => o.agents.replace(c.ident_list("agent")?).is_some(),
            "record" => o.record.replace(c.ident("record name")?).is_some(),
            "tol" => {
                let t = c.real()?;
                o.tol.replace(t).is_some()
            }
            _ => unreachable!("filtered by allowed"),
        };
        if dup {
            return Err(ParseDiagnostic::error(
                span,
                format!("option `{key}` given twice"),
            ));
        }
    }
    Ok(o)
}

fn required<T>(c: &Cursor<'_>, value: Option<T>, key: &str) -> PResult<T> {
    value.ok_or_else(|| {
        ParseDiagnostic::error(c.span_here(), format!("missing option `{key}=`"))
            .with_hint(&format!("{key}=..."))
    })
}

struct RawState {
    targets: Vec<String>,
    terms: Vec<(C64, String, SourceSpan)>,
}

enum Stmt {
    Scenario(String),
    System(String, usize),
    Agent(Agent),
    State(RawState),
    Policy(Policy),
    Event(Event),
    Check(Check),
}

fn statement(c: &mut Cursor<'_>) -> PResult<Stmt> {
    let head_span = c.span_here();
    let head = match c.peek() {
        Some(Tok::Ident(s)) => s.clone(),
        _ => return c.fail("expected a statement keyword", STATEMENTS),
    };
    c.pos += 1;
    let stmt = match head.as_str() {
        "SCENARIO" => Stmt::Scenario(c.ident("scenario name")?),
        "SYSTEM" => {
            let label = c.ident("subsystem label")?;
            c.keyword("dim")?;
            c.expect("=")?;
            let span = c.span_here();
            let dim = match c.bump() {
                Some(Token {
                    tok: Tok::Number(s),
                    ..
                }) => s.parse::<usize>().map_err(|_| {
                    ParseDiagnostic::error(span, format!("dimension `{s}` is not a whole number"))
                })?,
                _ => {
                    c.pos -= 1;
                    return c.fail("expected a dimension", "whole number");
                }
            };
            Stmt::System(label, dim)
        }
        "AGENT" => {
            let name = c.ident("agent name")?;
            c.keyword("observes")?;
            Stmt::Agent(Agent {
                name,
                observes: c.ident_run("subsystem")?,
            })
        }
        "STATE" => {
            let targets = c.ident_list("subsystem")?;
            let mut terms = Vec::new();
            let mut first = true;
            loop {
                let sign = if first || c.eat("+") {
                    1.0
                } else if c.eat("-") {
                    -1.0
                } else if c.pos >= c.toks.len() {
                    break;
                } else {
                    return c.fail("expected `+` or `-` between terms", "`+`");
                };
                first = false;
                let amp = if matches!(c.peek(), Some(Tok::Ket(_))) {
                    C64::new(1.0, 0.0)
                } else {
                    c.complex()?
                };
                let span = c.span_here();
                match c.bump() {
                    Some(Token {
                        tok: Tok::Ket(k), ..
                    }) => terms.push((amp * sign, k.clone(), span)),
                    _ => {
                        c.pos -= 1;
                        return c.fail("expected a ket", "`|label>`");
                    }
                }
            }
            Stmt::State(RawState { targets, terms })
        }
        "POLICY" => {
            let name = c.ident("policy")?;
            match name.as_str() {
                "unitary_only" => Stmt::Policy(Policy::UnitaryOnly),
                "collapse_at" => {
                    c.expect(":")?;
                    Stmt::Policy(Policy::collapse_at(c.ident_list("agent")?))
                }
                _ => {
                    c.pos -= 1;
                    return c.fail(
                        "unknown policy",
                        "unitary_only or collapse_at:AGENT[,AGENT...]",
                    );
                }
            }
        }
        "EVENT" => {
            let kind_span = c.span_here();
            let kind = c.ident("event kind")?;
            match kind.as_str() {
                "unitary" => {
                    let unitary = c.unitary()?;
                    Stmt::Event(Event::Unitary {
                        unitary,
                        targets: c.ident_run("subsystem")?,
                    })
                }
                "measure" => {
                    let agent = c.ident("agent name")?;
                    let o = options(c, &["basis", "targets", "record"])?;
                    Stmt::Event(Event::Measure {
                        agent,
                        basis: required(c, o.basis, "basis")?,
                        targets: required(c, o.targets, "targets")?,
                        record: required(c, o.record, "record")?,
                    })
                }
                "signal" => {
                    c.keyword("when")?;
                    let record = c.ident("record name")?;
                    c.expect("==")?;
                    let outcome = c.label()?;
                    c.keyword("apply")?;
                    let unitary = c.unitary()?;
                    Stmt::Event(Event::Signal {
                        record,
                        outcome,
                        unitary,
                        targets: c.ident_run("subsystem")?,
                    })
                }
                "noop" => Stmt::Event(Event::Noop),
                _ => {
                    return Err(ParseDiagnostic::error(
                        kind_span,
                        format!("unknown event kind `{kind}`"),
                    )
                    .with_hint("unitary, measure, signal or noop"))
                }
            }
        }
        "CHECK" => {
            let kind_span = c.span_here();
            let kind = c.ident("check kind")?;
            match kind.as_str() {
                "outcome" => {
                    let targets = c.ident_list("subsystem")?;
                    c.expect("==")?;
                    let outcome = c.label()?;
                    let o = options(c, &["basis", "agents", "tol"])?;
                    Stmt::Check(Check {
                        kind: CheckKind::Outcome { outcome },
                        basis: o.basis.unwrap_or(BasisSpec::Computational),
                        targets,
                        agents: required(c, o.agents, "agents")?,
                        tol: o.tol.unwrap_or(DEFAULT_TOL),
                    })
                }
                "distribution" | "definite" | "witness" => {
                    let o = options(c, &["basis", "targets", "agents", "tol"])?;
                    Stmt::Check(Check {
                        kind: match kind.as_str() {
                            "distribution" => CheckKind::Distribution,
                            "definite" => CheckKind::Definite,
                            _ => CheckKind::Witness,
                        },
                        basis: required(c, o.basis, "basis")?,
                        targets: required(c, o.targets, "targets")?,
                        agents: required(c, o.agents, "agents")?,
                        tol: o.tol.unwrap_or(DEFAULT_TOL),
                    })
                }
                _ => {
                    return Err(ParseDiagnostic::error(
                        kind_span,
                        format!("unknown check kind `{kind}`"),
                    )
                    .with_hint("outcome, distribution, definite or witness"))
                }
            }
        }
        _ => {
            return Err(
                ParseDiagnostic::error(head_span, format!("unknown statement `{head}`"))
                    .with_hint(STATEMENTS),
            )
        }
    };
    c.end()?;
    Ok(stmt)
}

fn ket_digits(label: &str, dims: &[usize]) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = if label.contains('.') {
        label.split('.').collect()
    } else if dims.iter().all(|&d| d <= 10) {
        label
            .char_indices()
            .map(|(i, ch)| &label[i..i + ch.len_utf8()])
            .collect()
    } else {
        vec![label]
    };
    if parts.len() != dims.len() {
        return Err(format!(
            "ket |{label}> has {} digit(s) for {} subsystem(s)",
            parts.len(),
            dims.len()
        ));
    }
    parts
        .iter()
        .zip(dims)
        .map(|(p, &d)| match p.parse::<usize>() {
            Ok(v) if v < d => Ok(v),
            Ok(v) => Err(format!("digit {v} in ket |{label}> exceeds dimension {d}")),
            Err(_) => Err(format!("ket |{label}> must be made of digits")),
        })
        .collect()
}

fn line_span(toks: &[Token], lineno: usize) -> SourceSpan {
    match (toks.first(), toks.last()) {
        (Some(a), Some(b)) => SourceSpan {
            line: lineno,
            column: a.span.column,
            length: b.span.column + b.span.length - a.span.column,
        },
        _ => SourceSpan {
            line: lineno,
            column: 1,
            length: 1,
        },
    }
}

/// Parses a whole file, collecting every diagnostic.
pub(crate) fn parse(text: &str) -> ParseOutput {
    let mut diagnostics = Vec::new();
    let mut stmts: Vec<(Stmt, SourceSpan)> = Vec::new();
    let mut syntax_ok = true;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = match lex_line(raw, lineno) {
            Ok(t) => t,
            Err(d) => {
                diagnostics.push(d);
                syntax_ok = false;
                continue;
            }
        };
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            toks: &toks,
            pos: 0,
            lineno,
        };
        match statement(&mut c) {
            Ok(s) => stmts.push((s, line_span(&toks, lineno))),
            Err(d) => {
                diagnostics.push(d);
                syntax_ok = false;
            }
        }
    }

    let header = match stmts.first() {
        Some((Stmt::Scenario(name), span)) => Some((name.clone(), *span)),
        _ => None,
    };
    let Some((name, header_span)) = header else {
        let span = stmts.first().map_or(
            SourceSpan {
                line: 1,
                column: 1,
                length: 1,
            },
            |(_, s)| *s,
        );
        diagnostics.insert(
            0,
            ParseDiagnostic::error(span, "missing SCENARIO header")
                .with_hint("`SCENARIO name` as the first statement"),
        );
        return ParseOutput {
            scenario: None,
            diagnostics,
        };
    };

    let mut systems: Vec<(String, usize)> = Vec::new();
    let mut lines: HashMap<Item, SourceSpan> = HashMap::new();
    lines.insert(Item::Scenario, header_span);
    let mut agents = Vec::new();
    let mut raw_states = Vec::new();
    let mut policies = Vec::new();
    let mut events = Vec::new();
    let mut checks = Vec::new();
    for (stmt, span) in stmts.into_iter().skip(1) {
        match stmt {
            Stmt::Scenario(_) => {
                diagnostics.push(ParseDiagnostic::error(span, "duplicate SCENARIO header"));
                syntax_ok = false;
            }
            Stmt::System(label, dim) => {
                if let Some(prev) = systems.iter().position(|(l, _)| *l == label) {
                    diagnostics.push(ParseDiagnostic::error(
                        span,
                        format!(
                            "subsystem `{label}` already declared on line {}",
                            lines[&Item::System(prev)].line
                        ),
                    ));
                    syntax_ok = false;
                } else if dim < 2 {
                    diagnostics.push(ParseDiagnostic::error(
                        span,
                        format!("subsystem `{label}` needs dimension at least 2"),
                    ));
                    syntax_ok = false;
                } else {
                    lines.insert(Item::System(systems.len()), span);
                    systems.push((label, dim));
                }
            }
            Stmt::Agent(a) => {
                lines.insert(Item::Agent(agents.len()), span);
                agents.push(a);
            }
            Stmt::State(s) => raw_states.push((s, span)),
            Stmt::Policy(p) => {
                lines.insert(Item::Policy(policies.len()), span);
                policies.push(p);
            }
            Stmt::Event(e) => {
                lines.insert(Item::Event(events.len()), span);
                events.push(e);
            }
            Stmt::Check(c) => {
                lines.insert(Item::Check(checks.len()), span);
                checks.push(c);
            }
        }
    }

    let register = match Register::new(systems.iter().cloned()) {
        Ok(r) => r,
        Err(e) => {
            let span = match systems.len() {
                0 => header_span,
                n => lines[&Item::System(n - 1)],
            };
            let message = if systems.is_empty() {
                "no SYSTEM declared".to_string()
            } else {
                e.to_string()
            };
            diagnostics.push(ParseDiagnostic::error(span, message));
            return ParseOutput {
                scenario: None,
                diagnostics,
            };
        }
    };

    let mut preparation = Vec::new();
    for (raw, span) in raw_states {
        let dims: Option<Vec<usize>> = raw.targets.iter().map(|t| register.dim_of(t)).collect();
        let Some(dims) = dims else {
            let unknown = raw
                .targets
                .iter()
                .find(|t| !register.contains(t))
                .expect("some target is unknown");
            diagnostics.push(ParseDiagnostic::error(
                span,
                format!("unknown subsystem `{unknown}`"),
            ));
            syntax_ok = false;
            continue;
        };
        let mut terms = Vec::with_capacity(raw.terms.len());
        let mut ok = true;
        for (amp, ket, ket_span) in &raw.terms {
            match ket_digits(ket, &dims) {
                Ok(d) => terms.push((*amp, d)),
                Err(msg) => {
                    diagnostics.push(ParseDiagnostic::error(*ket_span, msg));
                    ok = false;
                }
            }
        }
        if !ok {
            syntax_ok = false;
            continue;
        }
        let norm: f64 = terms.iter().map(|(a, _)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > EPS_NORM && norm > 0.0 {
            diagnostics.push(ParseDiagnostic::warning(
                span,
                format!("state amplitudes have squared norm {norm}; they are rescaled to 1"),
            ));
        }
        lines.insert(Item::State(preparation.len()), span);
        preparation.push(Preparation {
            targets: raw.targets,
            terms,
        });
    }

    if !syntax_ok {
        return ParseOutput {
            scenario: None,
            diagnostics,
        };
    }
    let scenario = Scenario {
        name,
        register,
        agents,
        preparation,
        policies,
        events,
        checks,
    };
    match validate_scenario(&scenario) {
        Ok(()) => ParseOutput {
            scenario: Some(scenario),
            diagnostics,
        },
        Err(errors) => {
            for e in errors {
                let span = lines.get(&e.item).copied().unwrap_or(header_span);
                diagnostics.push(ParseDiagnostic::error(span, e.message));
            }
            ParseOutput {
                scenario: None,
                diagnostics,
            }
        }
    }
}
