use super::EsqlError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Identifier or keyword; identifiers may carry trailing primes (`V1'`).
    Word(String),
    Number(String),
    /// Double-quoted string with escapes resolved.
    DqString(String),
    /// Single-quoted string (`VE='⊇'`, `DATE '2020-01-01'`).
    SqString(String),
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, EsqlError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars[i];
            i += 1;
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            })
        };

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                word.push(bump!());
            }
            while i < chars.len() && chars[i] == '\'' {
                word.push(bump!());
            }
            push(&mut out, Tok::Word(word));
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut num = String::new();
            num.push(bump!());
            while i < chars.len() && chars[i].is_ascii_digit() {
                num.push(bump!());
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                num.push(bump!());
                while i < chars.len() && chars[i].is_ascii_digit() {
                    num.push(bump!());
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while i < j {
                        num.push(bump!());
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        num.push(bump!());
                    }
                }
            }
            push(&mut out, Tok::Number(num));
            continue;
        }
        match c {
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(EsqlError::syntax(tl, tc, "unterminated string literal"));
                    }
                    match bump!() {
                        '"' => break,
                        '\\' => {
                            if i >= chars.len() {
                                return Err(EsqlError::syntax(tl, tc, "unterminated string literal"));
                            }
                            let (el, ec) = (line, col);
                            match bump!() {
                                '"' => s.push('"'),
                                '\\' => s.push('\\'),
                                'n' => s.push('\n'),
                                't' => s.push('\t'),
                                'r' => s.push('\r'),
                                other => return Err(EsqlError::syntax(el, ec, format!("unknown escape `\\{other}`"))),
                            }
                        }
                        other => s.push(other),
                    }
                }
                push(&mut out, Tok::DqString(s));
            }
            '\'' => {
                bump!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(EsqlError::syntax(tl, tc, "unterminated quoted symbol"));
                    }
                    match bump!() {
                        '\'' => break,
                        other => s.push(other),
                    }
                }
                push(&mut out, Tok::SqString(s));
            }
            '.' => {
                bump!();
                push(&mut out, Tok::Dot);
            }
            ',' => {
                bump!();
                push(&mut out, Tok::Comma);
            }
            ';' => {
                bump!();
                push(&mut out, Tok::Semi);
            }
            '(' => {
                bump!();
                push(&mut out, Tok::LParen);
            }
            ')' => {
                bump!();
                push(&mut out, Tok::RParen);
            }
            '=' => {
                bump!();
                push(&mut out, Tok::Eq);
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                bump!();
                bump!();
                push(&mut out, Tok::Ne);
            }
            '<' => {
                bump!();
                let tok = match chars.get(i) {
                    Some('=') => {
                        bump!();
                        Tok::Le
                    }
                    Some('>') => {
                        bump!();
                        Tok::Ne
                    }
                    _ => Tok::Lt,
                };
                push(&mut out, tok);
            }
            '>' => {
                bump!();
                let tok = if chars.get(i) == Some(&'=') {
                    bump!();
                    Tok::Ge
                } else {
                    Tok::Gt
                };
                push(&mut out, tok);
            }
            other => return Err(EsqlError::syntax(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}
