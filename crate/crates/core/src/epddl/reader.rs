//! Tokenizer and s-expression reader. `[x]` belief annotations attach to the
//! element that follows them.

use super::ast::Pos;
use super::EpddlError;

#[derive(Debug, Clone)]
pub(crate) enum Sexp {
    Symbol { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
    Modal { agent: String, inner: Box<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol { pos, .. } | Sexp::List { pos, .. } | Sexp::Modal { pos, .. } => *pos,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Symbol { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn is_keyword(&self, keyword: &str) -> bool {
        self.symbol().is_some_and(|s| s.eq_ignore_ascii_case(keyword))
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }

    /// Head symbol of a list, lowercased for keyword matching.
    pub fn head(&self) -> Option<String> {
        self.list()?.first()?.symbol().map(str::to_ascii_lowercase)
    }
}

#[derive(Debug)]
enum Token {
    Open(Pos),
    Close(Pos),
    Modal(String, Pos),
    Symbol(String, Pos),
}

fn tokenize(text: &str) -> Result<Vec<Token>, EpddlError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let is_delim = |c: char| c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ';');

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                tokens.push(Token::Open(pos));
            }
            ')' => {
                chars.next();
                col += 1;
                tokens.push(Token::Close(pos));
            }
            '[' => {
                chars.next();
                col += 1;
                let mut agent = String::new();
                loop {
                    match chars.next() {
                        Some(']') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(EpddlError::Lexical {
                                pos,
                                message: "unterminated `[`".into(),
                            })
                        }
                        Some(c) => {
                            col += 1;
                            agent.push(c);
                        }
                    }
                }
                let agent = agent.trim();
                if agent.is_empty() || agent.chars().any(is_delim) {
                    return Err(EpddlError::Lexical {
                        pos,
                        message: format!("bad belief annotation `[{agent}]`"),
                    });
                }
                tokens.push(Token::Modal(agent.to_string(), pos));
            }
            ']' => {
                return Err(EpddlError::Lexical {
                    pos,
                    message: "unexpected `]`".into(),
                })
            }
            _ => {
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if is_delim(c) {
                        break;
                    }
                    sym.push(c);
                    chars.next();
                    col += 1;
                }
                tokens.push(Token::Symbol(sym, pos));
            }
        }
    }
    Ok(tokens)
}

/// Reads every top-level element of `text`.
pub(crate) fn read(text: &str) -> Result<Vec<Sexp>, EpddlError> {
    let tokens = tokenize(text)?;
    // open lists, plus the modal prefixes waiting for an operand at each nesting level
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
    let mut top: Vec<Sexp> = Vec::new();
    let mut pending: Vec<Vec<(String, Pos)>> = vec![Vec::new()];

    fn push(stack: &mut [(Pos, Vec<Sexp>)], top: &mut Vec<Sexp>, node: Sexp) {
        match stack.last_mut() {
            Some((_, items)) => items.push(node),
            None => top.push(node),
        }
    }

    for token in tokens {
        match token {
            Token::Open(pos) => {
                stack.push((pos, Vec::new()));
                pending.push(Vec::new());
            }
            Token::Close(pos) => {
                let (open, items) = stack.pop().ok_or(EpddlError::UnexpectedClose { pos })?;
                let dangling = pending.pop().unwrap_or_default();
                if let Some((agent, p)) = dangling.first() {
                    return Err(EpddlError::Syntax {
                        pos: *p,
                        message: format!("belief annotation `[{agent}]` is not followed by a formula"),
                    });
                }
                let node = wrap(Sexp::List { items, pos: open }, pending.last_mut().unwrap());
                push(&mut stack, &mut top, node);
            }
            Token::Modal(agent, pos) => pending.last_mut().unwrap().push((agent, pos)),
            Token::Symbol(text, pos) => {
                let node = wrap(Sexp::Symbol { text, pos }, pending.last_mut().unwrap());
                push(&mut stack, &mut top, node);
            }
        }
    }
    if let Some((open, _)) = stack.last() {
        return Err(EpddlError::Unclosed { open: *open });
    }
    if let Some((agent, p)) = pending.last().and_then(|p| p.first()) {
        return Err(EpddlError::Syntax {
            pos: *p,
            message: format!("belief annotation `[{agent}]` is not followed by a formula"),
        });
    }
    Ok(top)
}

/// Applies and clears the modal prefixes waiting in the current slot.
fn wrap(mut node: Sexp, pending: &mut Vec<(String, Pos)>) -> Sexp {
    while let Some((agent, pos)) = pending.pop() {
        node = Sexp::Modal {
            agent,
            inner: Box::new(node),
            pos,
        };
    }
    node
}
