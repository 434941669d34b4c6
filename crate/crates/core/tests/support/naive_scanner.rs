// Line-oriented reference scanner for `have` statements.
//
// Works on a "cleaned" copy of every line in which comment and string
// characters are overwritten with spaces (columns are preserved), then walks
// lines with a running delimiter depth. It shares no code with the library's
// token-based extractor.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveHave {
    pub name: String,
    pub statement: String,
    pub proof: Option<String>,
}

const OPENERS: &[char] = &['(', '[', '{', '⟨', '⦃', '⟦'];
const CLOSERS: &[char] = &[')', ']', '}', '⟩', '⦄', '⟧'];

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '!' || c == '?'
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

/// Replace comment and string characters by spaces, keeping each line's
/// character count intact.
fn clean_lines(raw: &[Vec<char>]) -> Vec<Vec<char>> {
    let mut out = Vec::new();
    let mut block_depth = 0usize;
    let mut in_string = false;
    for line in raw {
        let mut cleaned = line.clone();
        let mut i = 0;
        while i < line.len() {
            let c = line[i];
            let next = line.get(i + 1).copied();
            if block_depth > 0 {
                if c == '/' && next == Some('-') {
                    block_depth += 1;
                    cleaned[i] = ' ';
                    cleaned[i + 1] = ' ';
                    i += 2;
                } else if c == '-' && next == Some('/') {
                    block_depth -= 1;
                    cleaned[i] = ' ';
                    cleaned[i + 1] = ' ';
                    i += 2;
                } else {
                    cleaned[i] = ' ';
                    i += 1;
                }
                continue;
            }
            if in_string {
                cleaned[i] = ' ';
                if c == '\\' && next.is_some() {
                    cleaned[i + 1] = ' ';
                    i += 2;
                    continue;
                }
                if c == '"' {
                    in_string = false;
                }
                i += 1;
                continue;
            }
            if c == '-' && next == Some('-') {
                for slot in cleaned.iter_mut().skip(i) {
                    *slot = ' ';
                }
                break;
            }
            if c == '/' && next == Some('-') {
                block_depth = 1;
                cleaned[i] = ' ';
                cleaned[i + 1] = ' ';
                i += 2;
                continue;
            }
            if c == '"' {
                in_string = true;
                cleaned[i] = ' ';
            }
            i += 1;
        }
        out.push(cleaned);
    }
    out
}

fn indent_of(line: &[char]) -> Option<usize> {
    let n = line.iter().take_while(|c| c.is_whitespace()).count();
    if n == line.len() {
        None
    } else {
        Some(n)
    }
}

fn slice(raw: &[Vec<char>], from: (usize, usize), to: (usize, usize)) -> String {
    let mut s = String::new();
    let (mut l, mut c) = from;
    while (l, c) < to {
        if c >= raw[l].len() {
            l += 1;
            c = 0;
            if (l, c) <= to && l < raw.len() {
                s.push('\n');
            }
            continue;
        }
        s.push(raw[l][c]);
        c += 1;
    }
    s
}

fn dedent_region(first: &str, rest: &[String]) -> String {
    let min = rest
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.chars().take_while(|c| c.is_whitespace()).count())
        .min()
        .unwrap_or(0);
    let mut lines: Vec<String> = Vec::new();
    if !first.trim().is_empty() {
        lines.push(first.trim().to_string());
    }
    for l in rest {
        let t: String = l.chars().skip(min).collect();
        lines.push(t.trim_end().to_string());
    }
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    while lines.first().is_some_and(|l| l.is_empty()) {
        lines.remove(0);
    }
    lines.join("\n")
}

pub fn scan(text: &str) -> Vec<NaiveHave> {
    let raw: Vec<Vec<char>> = text.split('\n').map(|l| l.chars().collect()).collect();
    let clean = clean_lines(&raw);
    let mut found = Vec::new();
    let mut anon = 0usize;

    for (li, line) in clean.iter().enumerate() {
        let mut ci = 0;
        while ci + 4 <= line.len() {
            let word: String = line[ci..ci + 4].iter().collect();
            let before_ok = ci == 0 || !(is_ident_char(line[ci - 1]) || line[ci - 1] == '.');
            let after_ok = line.get(ci + 4).is_none_or(|c| !is_ident_char(*c));
            if word == "have" && before_ok && after_ok {
                if let Some(h) = parse_at(&raw, &clean, li, ci, &mut anon) {
                    found.push(h);
                }
            }
            ci += 1;
        }
    }
    found
}

fn parse_at(
    raw: &[Vec<char>],
    clean: &[Vec<char>],
    li: usize,
    col: usize,
    anon: &mut usize,
) -> Option<NaiveHave> {
    // cursor over the cleaned text
    let at = |l: usize, c: usize| -> Option<char> { clean.get(l).and_then(|x| x.get(c)).copied() };
    let mut l = li;
    let mut c = col + 4;
    let skip_ws = |l: &mut usize, c: &mut usize| loop {
        match at(*l, *c) {
            Some(ch) if ch.is_whitespace() => *c += 1,
            Some(_) => break,
            None => {
                if *l + 1 >= clean.len() {
                    break;
                }
                *l += 1;
                *c = 0;
            }
        }
    };
    skip_ws(&mut l, &mut c);
    let first = at(l, c)?;
    let name;
    if first == ':' && at(l, c + 1) != Some('=') {
        name = format!("anon_{}", *anon);
        *anon += 1;
    } else if first == '⟨' {
        let mut depth = 0i32;
        loop {
            let ch = at(l, c)?;
            if OPENERS.contains(&ch) {
                depth += 1;
            } else if CLOSERS.contains(&ch) {
                depth -= 1;
            }
            c += 1;
            if depth == 0 {
                break;
            }
        }
        skip_ws(&mut l, &mut c);
        if at(l, c) != Some(':') || at(l, c + 1) == Some('=') {
            return None;
        }
        name = format!("anon_{}", *anon);
        *anon += 1;
    } else if is_ident_start(first) {
        let start = c;
        while at(l, c).is_some_and(is_ident_char) {
            c += 1;
        }
        name = clean[l][start..c].iter().collect();
        skip_ws(&mut l, &mut c);
        if at(l, c) != Some(':') || at(l, c + 1) == Some('=') {
            return None;
        }
    } else {
        return None;
    }
    // at ':'
    c += 1;
    let stmt_start = (l, c);
    let mut depth = 0i32;
    let stmt_end;
    loop {
        match at(l, c) {
            None => {
                l += 1;
                c = 0;
                if l >= clean.len() {
                    return None;
                }
                if depth == 0 {
                    if let Some(ind) = indent_of(&clean[l]) {
                        if ind <= col {
                            return None;
                        }
                    }
                }
            }
            Some(ch) => {
                if OPENERS.contains(&ch) {
                    depth += 1;
                } else if CLOSERS.contains(&ch) {
                    depth -= 1;
                } else if ch == ':' && at(l, c + 1) == Some('=') && depth == 0 {
                    stmt_end = (l, c);
                    break;
                }
                c += 1;
            }
        }
    }
    let statement = slice(raw, stmt_start, stmt_end).trim().to_string();
    c += 2;
    // proof region
    let first_part: String = raw[l][c.min(raw[l].len())..].iter().collect();
    let mut depth = 0i32;
    for ch in &clean[l][c.min(clean[l].len())..] {
        if OPENERS.contains(ch) {
            depth += 1;
        } else if CLOSERS.contains(ch) {
            depth -= 1;
        }
    }
    let mut rest: Vec<String> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut k = l + 1;
    while k < clean.len() {
        let ind = indent_of(&clean[k]);
        let take = depth > 0 || matches!(ind, Some(i) if i > col);
        match ind {
            None if depth <= 0 => {
                pending.push(raw[k].iter().collect());
            }
            _ if take => {
                rest.append(&mut pending);
                rest.push(raw[k].iter().collect());
                for ch in &clean[k] {
                    if OPENERS.contains(ch) {
                        depth += 1;
                    } else if CLOSERS.contains(ch) {
                        depth -= 1;
                    }
                }
            }
            _ => break,
        }
        k += 1;
    }

    // strip a leading `by`
    let trimmed_first = first_part.trim_start();
    let clean_first: String = clean[l][c.min(clean[l].len())..].iter().collect();
    let clean_trim = clean_first.trim_start();
    let is_by_first = clean_trim.starts_with("by")
        && clean_trim[2..].chars().next().is_none_or(|ch| !is_ident_char(ch));
    let proof_text = if is_by_first {
        let lead = first_part.len() - trimmed_first.len();
        dedent_region(&first_part[lead + 2..], &rest)
    } else if clean_trim.is_empty() {
        // `:=` at end of line, region lives on following lines
        let joined = dedent_region("", &rest);
        let first_code_line = rest
            .iter()
            .position(|r| {
                let t = r.trim_start();
                !t.is_empty() && !t.starts_with("--")
            });
        match first_code_line {
            Some(p) => {
                let t = rest[p].trim_start();
                if t.starts_with("by") && t[2..].chars().next().is_none_or(|ch| !is_ident_char(ch)) {
                    // rewrite: drop the `by` token on that line and dedent again
                    let lead = rest[p].len() - t.len();
                    let mut r2 = rest.clone();
                    let first_rest = rest[p][lead + 2..].to_string();
                    r2.drain(..=p);
                    dedent_region(&first_rest, &r2)
                } else {
                    joined
                }
            }
            None => joined,
        }
    } else {
        dedent_region(&first_part, &rest)
    };
    Some(NaiveHave {
        name,
        statement,
        proof: if proof_text.trim().is_empty() { None } else { Some(proof_text) },
    })
}
