//! URL canonicalization and registrable-domain lookup.

use std::path::Path;
use std::sync::OnceLock;

use publicsuffix::{List, Psl};
use thiserror::Error;
use url::{Host, Url};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UrlRejection {
    #[error("unparseable URL")]
    Unparseable,
    #[error("unsupported scheme {0:?}")]
    Scheme(String),
    #[error("URL has no host")]
    NoHost,
}

/// Prefix rewrites applied to raw URLs before canonicalization.
///
/// Lookup picks the longest `from` that prefixes the input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RedirectMap {
    // sorted by descending key length, then key
    rules: Vec<(String, String)>,
}

#[derive(Debug, Error)]
pub enum RedirectMapError {
    #[error("line {0}: expected `from<TAB>to`")]
    Malformed(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RedirectMap {
    pub fn new<I, A, B>(rules: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut rules: Vec<(String, String)> =
            rules.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        rules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        rules.dedup_by(|a, b| a.0 == b.0);
        RedirectMap { rules }
    }

    /// Parses the TSV form. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, RedirectMapError> {
        let mut rules = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (from, to) = line.split_once('\t').ok_or(RedirectMapError::Malformed(i + 1))?;
            if from.is_empty() || to.is_empty() || to.contains('\t') {
                return Err(RedirectMapError::Malformed(i + 1));
            }
            rules.push((from.to_string(), to.to_string()));
        }
        Ok(RedirectMap::new(rules))
    }

    pub fn load(path: &Path) -> Result<Self, RedirectMapError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn apply<'a>(&self, raw: &'a str) -> std::borrow::Cow<'a, str> {
        for (from, to) in &self.rules {
            if let Some(rest) = raw.strip_prefix(from.as_str()) {
                return format!("{to}{rest}").into();
            }
        }
        raw.into()
    }
}

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

fn hex_val(b: u8) -> Option<u8> {
    (b as char).to_digit(16).map(|d| d as u8)
}

/// Decodes `%XX` escapes that encode unreserved characters; other escapes
/// are kept verbatim.
fn decode_unreserved(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let (Some(h), Some(l)) = (hex_val(bytes[i + 1]), hex_val(bytes[i + 2])) {
                let c = h * 16 + l;
                if is_unreserved(c) {
                    out.push(c as char);
                    i += 3;
                    continue;
                }
            }
        }
        let ch = s[i..].chars().next().expect("in bounds");
        out.push(ch);
        i += ch.len_utf8();
    }
    out
}

/// Canonical form of a raw URL: lowercase scheme and host, no fragment, no
/// default port, unreserved escapes decoded and one leading `www.` removed.
/// The redirect map, when given, rewrites the raw string first.
pub fn normalize_url(raw: &str, redirects: Option<&RedirectMap>) -> Result<String, UrlRejection> {
    let raw = raw.trim();
    let raw = match redirects {
        Some(map) => map.apply(raw),
        None => raw.into(),
    };
    let raw = match raw.strip_prefix("//") {
        Some(rest) => format!("https://{rest}").into(),
        None => raw,
    };
    let mut url = Url::parse(&raw).map_err(|_| UrlRejection::Unparseable)?;
    match url.scheme() {
        "http" | "https" => {}
        other => return Err(UrlRejection::Scheme(other.to_string())),
    }
    let host = match url.host_str() {
        Some(h) if !h.is_empty() => h.to_string(),
        _ => return Err(UrlRejection::NoHost),
    };
    url.set_fragment(None);
    if let Some(rest) = host.strip_prefix("www.") {
        if !rest.is_empty() && matches!(url.host(), Some(Host::Domain(_))) {
            url.set_host(Some(rest)).map_err(|_| UrlRejection::NoHost)?;
        }
    }
    let path = decode_unreserved(url.path());
    url.set_path(&path);
    if let Some(q) = url.query().map(decode_unreserved) {
        url.set_query(Some(&q));
    }
    Ok(url.into())
}

const BUNDLED_SUFFIXES: &str = include_str!("../../data/public_suffix_list.dat");

/// Public-suffix rules used to find registrable domains.
pub struct SuffixList {
    list: List,
    version: String,
}

impl std::fmt::Debug for SuffixList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SuffixList").field("version", &self.version).finish()
    }
}

impl SuffixList {
    pub fn parse(text: &str) -> Result<Self, publicsuffix::Error> {
        let version = text
            .lines()
            .find_map(|l| l.strip_prefix("// VERSION:"))
            .map(|v| v.trim().to_string())
            .unwrap_or_else(|| "unknown".to_string());
        Ok(SuffixList { list: text.parse()?, version })
    }

    /// The snapshot compiled into the crate.
    pub fn bundled() -> &'static SuffixList {
        static LIST: OnceLock<SuffixList> = OnceLock::new();
        LIST.get_or_init(|| SuffixList::parse(BUNDLED_SUFFIXES).expect("bundled suffix list parses"))
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Registrable domain of `host`, or the host itself when no listed
    /// suffix applies.
    pub fn registrable(&self, host: &str) -> String {
        let host = host.trim_end_matches('.').to_ascii_lowercase();
        match self.list.domain(host.as_bytes()) {
            Some(d) if d.suffix().is_known() => {
                String::from_utf8(d.as_bytes().to_vec()).unwrap_or(host)
            }
            _ => host,
        }
    }
}

/// Registrable domain of a canonical URL.
pub fn extract_domain(url: &str, suffixes: &SuffixList) -> String {
    let Ok(parsed) = Url::parse(url) else {
        return url.to_ascii_lowercase();
    };
    match parsed.host() {
        Some(Host::Domain(h)) => suffixes.registrable(h),
        Some(Host::Ipv4(ip)) => ip.to_string(),
        Some(Host::Ipv6(ip)) => format!("[{ip}]"),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_url("HTTPS://WWW.Ex.COM:443/a#frag", None).unwrap(), "https://ex.com/a");
        assert_eq!(normalize_url("http://ex.com:80/", None).unwrap(), "http://ex.com/");
        assert_eq!(normalize_url("http://ex.com:8080/", None).unwrap(), "http://ex.com:8080/");
        assert_eq!(
            normalize_url("http://ex.com/%41b%2Fc?q=%7e", None).unwrap(),
            "http://ex.com/Ab%2Fc?q=~"
        );
        assert_eq!(normalize_url("//www.ex.com/x", None).unwrap(), "https://ex.com/x");
        // only one leading www. goes
        assert_eq!(normalize_url("http://www.www.ex.com/", None).unwrap(), "http://www.ex.com/");
    }

    #[test]
    fn rejections() {
        assert_eq!(normalize_url("ftp://ex.com/a", None), Err(UrlRejection::Scheme("ftp".into())));
        assert_eq!(normalize_url("mailto:a@b.c", None), Err(UrlRejection::Scheme("mailto".into())));
        assert_eq!(normalize_url("not a url", None), Err(UrlRejection::Unparseable));
        assert!(normalize_url("https://", None).is_err());
    }

    #[test]
    fn redirect_longest_prefix() {
        let map = RedirectMap::new([
            ("https://doi.org/10.1/x", "https://pub.org/p"),
            ("https://doi.org/", "https://resolver.org/"),
        ]);
        assert_eq!(normalize_url("https://doi.org/10.1/x", Some(&map)).unwrap(), "https://pub.org/p");
        assert_eq!(
            normalize_url("https://doi.org/10.2/y", Some(&map)).unwrap(),
            "https://resolver.org/10.2/y"
        );
        assert!(RedirectMap::parse("a\tb\nbad line\n").is_err());
        let parsed = RedirectMap::parse("# comment\nhttps://a.com/\thttps://b.com/\n").unwrap();
        assert_eq!(parsed.apply("https://a.com/x"), "https://b.com/x");
    }

    #[test]
    fn domains() {
        let psl = SuffixList::bundled();
        assert_eq!(extract_domain("https://ex.com/a", psl), "ex.com");
        assert_eq!(extract_domain("https://news.bbc.co.uk/x", psl), "bbc.co.uk");
        assert_eq!(extract_domain("https://203.0.113.7/x", psl), "203.0.113.7");
        assert_eq!(extract_domain("https://a.b.example.com.au/", psl), "example.com.au");
        assert_eq!(extract_domain("https://intranet/", psl), "intranet");
        assert_eq!(extract_domain("https://co.uk/", psl), "co.uk");
        assert!(psl.version().starts_with("20"));
    }

    #[test]
    fn suffix_snapshot_agrees_on_known_rules() {
        // rules checked by hand against the bundled file
        let psl = SuffixList::bundled();
        assert_eq!(psl.registrable("www.gov.uk"), "www.gov.uk");
        assert_eq!(psl.registrable("a.b.city.kawasaki.jp"), "city.kawasaki.jp");
        assert_eq!(psl.registrable("x.y.kawasaki.jp"), "x.y.kawasaki.jp");
    }
}
