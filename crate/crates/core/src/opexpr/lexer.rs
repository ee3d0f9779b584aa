use super::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// `numer[/denom][i]`, written without spaces.
    Num { numer: String, denom: Option<String>, imag: bool },
    Ident(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, col: &mut usize, n: usize| {
        *i += n;
        *col += n;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(&mut i, &mut col, 1);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let numer: String = chars[start..i].iter().collect();
            let mut denom = None;
            // an exponent is an integer: `X^2/3` is (X^2)/3
            let after_caret = matches!(
                out.as_slice(),
                [.., Token { tok: Tok::Sym('^'), .. }] | [.., Token { tok: Tok::Sym('^'), .. }, Token { tok: Tok::Sym('-'), .. }]
            );
            if !after_caret && i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                let s = i + 1;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                denom = Some(chars[s..i].iter().collect());
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(ExprError::at(
                    Pos { line, col: col + (i - start) },
                    "decimal literals are not supported; write a rational such as 1/2",
                ));
            }
            let mut imag = false;
            if i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).is_some_and(|n| n.is_alphanumeric() || *n == '_') {
                imag = true;
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Num { numer, denom, imag }, pos });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
            continue;
        }
        if "+-*/^()[]{},".contains(c) {
            advance(&mut i, &mut col, 1);
            out.push(Token { tok: Tok::Sym(c), pos });
            continue;
        }
        return Err(ExprError::at(pos, format!("unexpected character '{c}'")));
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
