//! Reader for the Turtle subset this crate writes: prefix/base directives,
//! IRIs, prefixed names, `a`, literals, and `;`/`,` lists. Blank nodes and
//! collections are rejected.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::{vocab, vocab_iri, Term, Triple};
use crate::model::{Iri, Label, Ontology, OntologyClass, OntologyProperty, SubclassEdge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unresolved reference: {0}")]
    UnresolvedReference(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fail on unresolved domain/range/edge references instead of adding a
    /// placeholder class.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct ParsedTurtle {
    pub ontology: Ontology,
    /// Every triple in the document, sorted, including unknown annotations.
    pub triples: Vec<Triple>,
    pub warnings: Vec<ParseWarning>,
}

pub fn parse_turtle(text: &str) -> Result<ParsedTurtle, TurtleError> {
    parse_turtle_with(text, ParseOptions::default())
}

pub fn parse_turtle_with(text: &str, options: ParseOptions) -> Result<ParsedTurtle, TurtleError> {
    let mut reader = Reader::new(text);
    reader.document()?;
    let Reader { triples, prefixes, base, .. } = reader;
    let mut triples = triples;
    triples.sort();
    triples.dedup();
    let base_iri = prefixes
        .get("")
        .or(base.as_ref())
        .and_then(|s| Iri::new(s.clone()).ok());
    build_ontology(triples, base_iri, options)
}

const DEFAULT_BASE: &str = "https://example.org/onto#";

#[derive(Debug, Clone, PartialEq)]
enum Token {
    IriRef(String),
    PName(String, String),
    Str(String),
    LangTag(String),
    Number(String, &'static str),
    Bool(bool),
    DoubleCaret,
    Dot,
    Semicolon,
    Comma,
    A,
    PrefixDirective { sparql: bool },
    BaseDirective { sparql: bool },
}

struct Reader {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    peeked: Option<(Token, usize, usize)>,
    prefixes: BTreeMap<String, String>,
    base: Option<String>,
    triples: Vec<Triple>,
}

impl Reader {
    fn new(src: &str) -> Self {
        Reader {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            peeked: None,
            prefixes: BTreeMap::new(),
            base: None,
            triples: Vec::new(),
        }
    }

    fn error_at(&self, line: usize, column: usize, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax { line, column, message: message.into() }
    }

    fn error(&self, message: impl Into<String>) -> TurtleError {
        self.error_at(self.line, self.column, message)
    }

    fn cur(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.cur()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.cur() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.cur() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Result<Option<&Token>, TurtleError> {
        if self.peeked.is_none() {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            if let Some(tok) = self.lex()? {
                self.peeked = Some((tok, line, column));
            }
        }
        Ok(self.peeked.as_ref().map(|(t, _, _)| t))
    }

    fn next(&mut self) -> Result<Option<(Token, usize, usize)>, TurtleError> {
        self.peek()?;
        Ok(self.peeked.take())
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), TurtleError> {
        match self.next()? {
            Some((tok, _, _)) if tok == want => Ok(()),
            Some((tok, line, column)) => Err(self.error_at(line, column, format!("expected {what}, found {tok:?}"))),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }

    fn lex(&mut self) -> Result<Option<Token>, TurtleError> {
        let Some(c) = self.cur() else { return Ok(None) };
        let tok = match c {
            '<' => Token::IriRef(self.lex_iri()?),
            '"' | '\'' => Token::Str(self.lex_string()?),
            '.' if !self.at(1).is_some_and(|d| d.is_ascii_digit()) => {
                self.bump();
                Token::Dot
            }
            ';' => {
                self.bump();
                Token::Semicolon
            }
            ',' => {
                self.bump();
                Token::Comma
            }
            '^' => {
                self.bump();
                if self.cur() != Some('^') {
                    return Err(self.error("expected '^^'"));
                }
                self.bump();
                Token::DoubleCaret
            }
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
                match word.as_str() {
                    "prefix" => Token::PrefixDirective { sparql: false },
                    "base" => Token::BaseDirective { sparql: false },
                    "" => return Err(self.error("empty language tag")),
                    _ => Token::LangTag(word),
                }
            }
            '[' | '(' => return Err(self.error("blank nodes and collections are not supported")),
            '_' if self.at(1) == Some(':') => return Err(self.error("blank nodes are not supported")),
            c if c.is_ascii_digit() || ((c == '+' || c == '-' || c == '.') && self.at(1).is_some_and(|d| d.is_ascii_digit() || d == '.')) => {
                self.lex_number()?
            }
            c if c.is_alphanumeric() || c == ':' || c == '_' => self.lex_name()?,
            other => return Err(self.error(format!("unexpected character {other:?}"))),
        };
        Ok(Some(tok))
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.cur() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn lex_iri(&mut self) -> Result<String, TurtleError> {
        let (line, column) = (self.line, self.column);
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(line, column, "unterminated IRI")),
                Some('>') => break,
                Some('\\') => s.push(self.lex_unicode_escape()?),
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(self.error_at(line, column, format!("unterminated IRI (invalid character {c:?})")))
                }
                Some(c) => s.push(c),
            }
        }
        self.resolve(s, line, column)
    }

    fn resolve(&self, iri: String, line: usize, column: usize) -> Result<String, TurtleError> {
        if Iri::new(iri.clone()).is_ok() {
            return Ok(iri);
        }
        match &self.base {
            Some(base) => Ok(format!("{base}{iri}")),
            None => Err(self.error_at(line, column, format!("relative IRI <{iri}> without @base"))),
        }
    }

    fn lex_unicode_escape(&mut self) -> Result<char, TurtleError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        self.hex_char(width)
    }

    fn hex_char(&mut self, width: usize) -> Result<char, TurtleError> {
        let mut hex = String::new();
        for _ in 0..width {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return Err(self.error("invalid unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error("invalid unicode code point"))
    }

    fn lex_string(&mut self) -> Result<String, TurtleError> {
        let (line, column) = (self.line, self.column);
        let quote = self.bump().expect("caller checked quote");
        let long = self.cur() == Some(quote) && self.at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        } else if self.cur() == Some(quote) {
            self.bump();
            return Ok(String::new());
        }
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(line, column, "unterminated string literal")),
                Some(c) if c == quote => {
                    if !long {
                        break;
                    }
                    if self.cur() == Some(quote) && self.at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        // A long string may end with extra quote characters.
                        while self.cur() == Some(quote) {
                            s.push(quote);
                            self.bump();
                        }
                        break;
                    }
                    s.push(c);
                }
                Some('\n') | Some('\r') if !long => {
                    return Err(self.error_at(line, column, "unterminated string literal"))
                }
                Some('\\') => {
                    let escaped = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_char(4)?,
                        Some('U') => self.hex_char(8)?,
                        _ => return Err(self.error("invalid string escape")),
                    };
                    s.push(escaped);
                }
                Some(c) => s.push(c),
            }
        }
        Ok(s)
    }

    fn lex_number(&mut self) -> Result<Token, TurtleError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.cur() {
            s.push(c);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut kind = "integer";
        if self.cur() == Some('.') && self.at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            s.push('.');
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            kind = "decimal";
        }
        if let Some(e @ ('e' | 'E')) = self.cur() {
            s.push(e);
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.cur() {
                s.push(sign);
                self.bump();
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(self.error("malformed exponent"));
            }
            s.push_str(&exp);
            kind = "double";
        }
        Ok(Token::Number(s, kind))
    }

    fn lex_name(&mut self) -> Result<Token, TurtleError> {
        let prefix = self.take_while(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.');
        if self.cur() != Some(':') {
            return match prefix.as_str() {
                "a" => Ok(Token::A),
                "true" => Ok(Token::Bool(true)),
                "false" => Ok(Token::Bool(false)),
                p if p.eq_ignore_ascii_case("prefix") => Ok(Token::PrefixDirective { sparql: true }),
                p if p.eq_ignore_ascii_case("base") => Ok(Token::BaseDirective { sparql: true }),
                p => Err(self.error(format!("unexpected bare word {p:?}"))),
            };
        }
        self.bump();
        let mut local = String::new();
        loop {
            match self.cur() {
                Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | ':') => {
                    local.push(c);
                    self.bump();
                }
                Some('.') if self.at(1).is_some_and(|n| n.is_alphanumeric() || matches!(n, '_' | '-' | ':')) => {
                    local.push('.');
                    self.bump();
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return Err(self.error("invalid local name escape")),
                    }
                }
                Some('%') => {
                    local.push('%');
                    self.bump();
                    for _ in 0..2 {
                        match self.bump() {
                            Some(h) if h.is_ascii_hexdigit() => local.push(h),
                            _ => return Err(self.error("invalid percent escape")),
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(Token::PName(prefix, local))
    }

    fn expand(&self, prefix: &str, local: &str, line: usize, column: usize) -> Result<Iri, TurtleError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| self.error_at(line, column, format!("undeclared prefix {prefix:?}")))?;
        Iri::new(format!("{ns}{local}")).map_err(|e| self.error_at(line, column, e.to_string()))
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        while let Some((tok, line, column)) = self.next()? {
            match tok {
                Token::PrefixDirective { sparql } => {
                    let (name, pl, pc) = match self.next()? {
                        Some((Token::PName(p, l), pl, pc)) if l.is_empty() => (p, pl, pc),
                        Some((_, pl, pc)) => return Err(self.error_at(pl, pc, "expected prefix name")),
                        None => return Err(self.error("expected prefix name")),
                    };
                    let ns = match self.next()? {
                        Some((Token::IriRef(ns), _, _)) => ns,
                        _ => return Err(self.error_at(pl, pc, "expected namespace IRI")),
                    };
                    self.prefixes.insert(name, ns);
                    if !sparql {
                        self.expect(Token::Dot, "'.' after @prefix")?;
                    }
                }
                Token::BaseDirective { sparql } => {
                    match self.next()? {
                        Some((Token::IriRef(b), _, _)) => self.base = Some(b),
                        _ => return Err(self.error_at(line, column, "expected base IRI")),
                    }
                    if !sparql {
                        self.expect(Token::Dot, "'.' after @base")?;
                    }
                }
                tok => {
                    let subject = match self.term_iri(tok, line, column)? {
                        Some(iri) => iri,
                        None => return Err(self.error_at(line, column, "expected subject IRI")),
                    };
                    self.predicate_object_list(subject)?;
                    self.expect(Token::Dot, "'.' at end of statement")?;
                }
            }
        }
        Ok(())
    }

    fn term_iri(&self, tok: Token, line: usize, column: usize) -> Result<Option<Iri>, TurtleError> {
        match tok {
            Token::IriRef(s) => Iri::new(s).map(Some).map_err(|e| self.error_at(line, column, e.to_string())),
            Token::PName(p, l) => self.expand(&p, &l, line, column).map(Some),
            _ => Ok(None),
        }
    }

    fn predicate_object_list(&mut self, subject: Iri) -> Result<(), TurtleError> {
        loop {
            let (tok, line, column) = self.next()?.ok_or_else(|| self.error("expected predicate"))?;
            let predicate = match tok {
                Token::A => vocab_iri(vocab::RDF_TYPE),
                tok => self
                    .term_iri(tok.clone(), line, column)?
                    .ok_or_else(|| self.error_at(line, column, format!("expected predicate, found {tok:?}")))?,
            };
            loop {
                let object = self.object()?;
                self.triples.push(Triple { subject: subject.clone(), predicate: predicate.clone(), object });
                if self.peek()? == Some(&Token::Comma) {
                    self.next()?;
                    continue;
                }
                break;
            }
            if self.peek()? != Some(&Token::Semicolon) {
                return Ok(());
            }
            // `;` may repeat and may precede the final `.`
            while self.peek()? == Some(&Token::Semicolon) {
                self.next()?;
            }
            if self.peek()? == Some(&Token::Dot) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let (tok, line, column) = self.next()?.ok_or_else(|| self.error("expected object"))?;
        match tok {
            Token::IriRef(_) | Token::PName(..) => Ok(Term::Iri(self.term_iri(tok, line, column)?.expect("iri token"))),
            Token::Str(value) => {
                let datatype = match self.peek()? {
                    Some(Token::LangTag(_)) => {
                        self.next()?;
                        None
                    }
                    Some(Token::DoubleCaret) => {
                        self.next()?;
                        let (dt, l, c) = self.next()?.ok_or_else(|| self.error("expected datatype IRI"))?;
                        Some(self.term_iri(dt, l, c)?.ok_or_else(|| self.error_at(l, c, "expected datatype IRI"))?)
                    }
                    _ => None,
                };
                Ok(Term::Literal { value, datatype })
            }
            Token::Number(value, kind) => Ok(Term::Literal {
                value,
                datatype: Some(vocab_iri(&format!("{}{kind}", vocab::XSD))),
            }),
            Token::Bool(b) => Ok(Term::Literal {
                value: b.to_string(),
                datatype: Some(vocab_iri(&format!("{}boolean", vocab::XSD))),
            }),
            other => Err(self.error_at(line, column, format!("expected object, found {other:?}"))),
        }
    }
}

fn label_for(iri: &Iri, labels: &BTreeMap<&Iri, Vec<&str>>) -> Label {
    labels
        .get(iri)
        .and_then(|ls| ls.iter().find_map(|l| Label::new(l).ok()))
        .or_else(|| Label::new(iri.local_name()).ok())
        .or_else(|| Label::new(iri.as_str()).ok())
        .expect("an IRI always contains an alphanumeric scheme")
}

fn build_ontology(
    triples: Vec<Triple>,
    base: Option<Iri>,
    options: ParseOptions,
) -> Result<ParsedTurtle, TurtleError> {
    use vocab::*;

    let mut warnings = Vec::new();
    let mut class_iris = BTreeSet::new();
    let mut property_iris = BTreeSet::new();
    let mut labels: BTreeMap<&Iri, Vec<&str>> = BTreeMap::new();
    let mut comments: BTreeMap<&Iri, Vec<&str>> = BTreeMap::new();
    let mut datatypes = BTreeSet::new();
    let mut domains: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    let mut ranges: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    let mut edges = Vec::new();

    for t in &triples {
        match (t.predicate.as_str(), &t.object) {
            (RDF_TYPE, Term::Iri(o)) if o.as_str() == OWL_CLASS || o.as_str() == RDFS_CLASS => {
                class_iris.insert(&t.subject);
            }
            (RDF_TYPE, Term::Iri(o)) if o.as_str() == OWL_OBJECT_PROPERTY => {
                property_iris.insert(&t.subject);
            }
            (RDFS_LABEL, Term::Literal { value, .. }) => labels.entry(&t.subject).or_default().push(value),
            (RDFS_COMMENT, Term::Literal { value, .. }) => comments.entry(&t.subject).or_default().push(value),
            (RDFS_SEE_ALSO, Term::Iri(o)) if o.as_str() == SCHEMA_DATATYPE => {
                datatypes.insert(&t.subject);
            }
            (RDFS_DOMAIN, Term::Iri(o)) => domains.entry(&t.subject).or_default().push(o),
            (RDFS_RANGE, Term::Iri(o)) => ranges.entry(&t.subject).or_default().push(o),
            (RDFS_SUBCLASS_OF, Term::Iri(o)) => edges.push((&t.subject, o)),
            _ => {}
        }
    }

    let base_iri = base
        .or_else(|| class_iris.iter().next().and_then(|c| Iri::new(c.namespace()).ok()))
        .unwrap_or_else(|| Iri::new(DEFAULT_BASE).expect("default base is valid"));
    let mut ontology = Ontology::new(base_iri);

    for iri in &class_iris {
        ontology.insert_class(OntologyClass {
            iri: (*iri).clone(),
            label: label_for(iri, &labels),
            description: comments.get(iri).and_then(|c| c.first()).map(|c| c.trim().to_string()).unwrap_or_default(),
            is_reified_datatype: datatypes.contains(iri),
        });
    }

    let mut unresolved = |ontology: &mut Ontology, iri: &Iri, context: String| -> Result<(), TurtleError> {
        if ontology.classes.contains_key(iri) {
            return Ok(());
        }
        if options.strict {
            return Err(TurtleError::UnresolvedReference(format!("{iri} ({context})")));
        }
        warnings.push(ParseWarning {
            code: "UNRESOLVED_REFERENCE",
            message: format!("{iri} is not declared as a class ({context}); added a placeholder class"),
        });
        ontology.insert_class(OntologyClass {
            iri: iri.clone(),
            label: label_for(iri, &labels),
            description: String::new(),
            is_reified_datatype: false,
        });
        Ok(())
    };

    for (sub, sup) in edges {
        unresolved(&mut ontology, sub, format!("subject of rdfs:subClassOf {sup}"))?;
        unresolved(&mut ontology, sup, format!("superclass of {sub}"))?;
        ontology.hierarchy.insert(SubclassEdge { sub: sub.clone(), sup: sup.clone() });
    }

    let mut property_warnings = Vec::new();
    for iri in &property_iris {
        let (Some(domain), Some(range)) = (
            domains.get(iri).and_then(|d| d.iter().min()),
            ranges.get(iri).and_then(|r| r.iter().min()),
        ) else {
            if options.strict {
                return Err(TurtleError::UnresolvedReference(format!("{iri} lacks rdfs:domain or rdfs:range")));
            }
            property_warnings.push(ParseWarning {
                code: "INCOMPLETE_PROPERTY",
                message: format!("{iri} lacks rdfs:domain or rdfs:range; property ignored"),
            });
            continue;
        };
        if domains[iri].len() > 1 || ranges[iri].len() > 1 {
            property_warnings.push(ParseWarning {
                code: "MULTIPLE_DOMAIN_OR_RANGE",
                message: format!("{iri} declares several domains or ranges; kept the first in IRI order"),
            });
        }
        unresolved(&mut ontology, domain, format!("domain of {iri}"))?;
        unresolved(&mut ontology, range, format!("range of {iri}"))?;
        ontology.insert_property(OntologyProperty {
            iri: (*iri).clone(),
            label: label_for(iri, &labels),
            description: comments.get(iri).and_then(|c| c.first()).map(|c| c.trim().to_string()).unwrap_or_default(),
            domain: (*domain).clone(),
            range: (*range).clone(),
        });
    }
    warnings.extend(property_warnings);

    Ok(ParsedTurtle { ontology, triples, warnings })
}
