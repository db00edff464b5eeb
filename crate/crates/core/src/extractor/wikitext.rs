//! Pulls cited URLs out of raw wikitext.
//!
//! Three sources are recognised: URL-valued parameters of templates (plus
//! `doi=`, rewritten to a `doi.org` link), bracketed external links, and bare
//! `http(s)://` URLs. Text inside templates is only read through template
//! parameters, so archive links and similar bookkeeping URLs do not count.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

const URL_PARAMS: &[&str] =
    &["url", "chapter-url", "chapterurl", "contribution-url", "section-url", "entry-url"];

fn comment_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<!--.*?(-->|\z)").unwrap())
}

fn nowiki_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<nowiki\s*>.*?(</nowiki\s*>|\z)").unwrap())
}

fn bracket_link_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\[((?:https?:)?//[^\s\[\]<>]+)").unwrap())
}

fn bare_url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\bhttps?://[^\s<>\[\]{}|"]+"#).unwrap())
}

/// Body ranges of every `{{...}}` template, nested ones included, as
/// `(outer_start, body_start, body_end, outer_end)`. Unclosed templates
/// extend to the end of the text.
fn template_spans(text: &str) -> Vec<(usize, usize, usize, usize)> {
    let b = text.as_bytes();
    let mut stack = Vec::new();
    let mut spans = Vec::new();
    let mut i = 0;
    while i + 1 < b.len() {
        if b[i] == b'{' && b[i + 1] == b'{' {
            stack.push(i);
            i += 2;
        } else if b[i] == b'}' && b[i + 1] == b'}' {
            if let Some(start) = stack.pop() {
                spans.push((start, start + 2, i, i + 2));
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    spans.extend(stack.into_iter().map(|s| (s, s + 2, b.len(), b.len())));
    spans.sort_unstable();
    spans
}

/// Splits a template body (without the outer braces) at top-level pipes.
fn split_params(body: &str) -> Vec<&str> {
    let b = body.as_bytes();
    let mut parts = Vec::new();
    let (mut braces, mut links) = (0i32, 0i32);
    let mut start = 0;
    let mut i = 0;
    while i < b.len() {
        let pair = if i + 1 < b.len() { &b[i..i + 2] } else { &b[i..i + 1] };
        match pair {
            b"{{" => {
                braces += 1;
                i += 2;
                continue;
            }
            b"}}" => {
                braces -= 1;
                i += 2;
                continue;
            }
            b"[[" => {
                links += 1;
                i += 2;
                continue;
            }
            b"]]" => {
                links -= 1;
                i += 2;
                continue;
            }
            _ => {}
        }
        if b[i] == b'|' && braces <= 0 && links <= 0 {
            parts.push(&body[start..i]);
            start = i + 1;
        }
        i += 1;
    }
    parts.push(&body[start..]);
    parts
}

fn trim_trailing_punct(url: &str) -> &str {
    let mut u = url;
    loop {
        let Some(last) = u.chars().last() else { return u };
        let strip = match last {
            '.' | ',' | ';' | ':' | '!' | '?' | '\'' => true,
            ')' => u.matches('(').count() < u.matches(')').count(),
            _ => false,
        };
        if !strip {
            return u;
        }
        u = &u[..u.len() - last.len_utf8()];
    }
}

fn template_urls(body: &str, out: &mut BTreeSet<String>) {
    for part in split_params(body).into_iter().skip(1) {
        let Some((key, value)) = part.split_once('=') else { continue };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        if value.is_empty() {
            continue;
        }
        if key == "doi" {
            let doi = value.split_whitespace().next().unwrap_or("");
            if doi.starts_with("10.") {
                out.insert(format!("https://doi.org/{doi}"));
            }
        } else if URL_PARAMS.contains(&key.as_str()) {
            // a bracketed link inside a url= value still counts once
            let v = value.trim_start_matches('[');
            let v = v.split_whitespace().next().unwrap_or("");
            let v = v.trim_end_matches(']');
            if v.contains("//") {
                out.insert(v.to_string());
            }
        }
    }
}

/// Raw (not yet canonical) URLs cited in `wikitext`.
pub fn extract_urls(wikitext: &str) -> BTreeSet<String> {
    let text = comment_re().replace_all(wikitext, "");
    let text = nowiki_re().replace_all(&text, "");
    let mut out = BTreeSet::new();

    let spans = template_spans(&text);
    let mut masked = text.clone().into_owned().into_bytes();
    for &(s, body_start, body_end, e) in &spans {
        template_urls(&text[body_start..body_end], &mut out);
        masked[s..e].fill(b' ');
    }
    // spans start and end on ASCII braces, so the masked bytes are UTF-8
    let outside = String::from_utf8(masked).unwrap_or_default();

    for cap in bracket_link_re().captures_iter(&outside) {
        let url = trim_trailing_punct(&cap[1]);
        out.insert(url.to_string());
    }
    let without_brackets = bracket_link_re().replace_all(&outside, " ");
    for m in bare_url_re().find_iter(&without_brackets) {
        out.insert(trim_trailing_punct(m.as_str()).to_string());
    }
    out
}
