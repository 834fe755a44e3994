//! The `name(key=value, ...)` text form shared by distribution and policy specs.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Num(f64),
    Spec(Spec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub name: String,
    pub args: Vec<(String, Arg)>,
}

impl Spec {
    pub fn parse(input: &str) -> Result<Spec> {
        let mut p = Parser { src: input, pos: 0 };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != input.len() {
            return Err(p.fail("trailing input"));
        }
        Ok(spec)
    }

    fn get(&self, key: &str) -> Option<&Arg> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Arg::Num(x)) => Ok(Some(*x)),
            Some(Arg::Spec(_)) => Err(self.bad(key, "expected a number")),
        }
    }

    pub fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    pub fn req_num(&self, key: &str) -> Result<f64> {
        self.num(key)?.ok_or_else(|| self.bad(key, "missing"))
    }

    pub fn req_spec(&self, key: &str) -> Result<&Spec> {
        match self.get(key) {
            Some(Arg::Spec(s)) => Ok(s),
            Some(Arg::Num(_)) => Err(self.bad(key, "expected a nested spec")),
            None => Err(self.bad(key, "missing")),
        }
    }

    /// Rejects keys outside `allowed`.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !allowed.contains(&k.as_str()) {
                return Err(self.bad(k, "unknown key"));
            }
        }
        Ok(())
    }

    pub fn bad(&self, key: &str, reason: &str) -> Error {
        Error::Parse {
            input: self.to_string(),
            reason: format!("{key}: {reason}"),
        }
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (k, v)) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match v {
                Arg::Num(x) => write!(f, "{k}={x}")?,
                Arg::Spec(s) => write!(f, "{k}={s}")?,
            }
        }
        f.write_str(")")
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn fail(&self, reason: &str) -> Error {
        Error::Parse {
            input: self.src.to_string(),
            reason: format!("{reason} at byte {}", self.pos),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(rest.len());
        if len == 0 || !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(self.fail("expected a name"));
        }
        self.pos += len;
        Ok(rest[..len].to_ascii_lowercase())
    }

    fn spec(&mut self) -> Result<Spec> {
        let name = self.ident()?;
        let mut args = Vec::new();
        if !self.eat('(') {
            // bare names such as `optimal` are allowed
            return Ok(Spec { name, args });
        }
        if self.eat(')') {
            return Ok(Spec { name, args });
        }
        loop {
            let key = self.ident()?;
            if !self.eat('=') {
                return Err(self.fail("expected `=`"));
            }
            let value = self.value()?;
            if args.iter().any(|(k, _)| *k == key) {
                return Err(self.fail(&format!("duplicate key `{key}`")));
            }
            args.push((key, value));
            if self.eat(')') {
                return Ok(Spec { name, args });
            }
            if !self.eat(',') {
                return Err(self.fail("expected `,` or `)`"));
            }
        }
    }

    fn value(&mut self) -> Result<Arg> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find([',', ')', '(']).unwrap_or(rest.len());
        let token = rest[..len].trim();
        if let Ok(x) = token.parse::<f64>() {
            self.pos += len;
            return Ok(Arg::Num(x));
        }
        self.spec().map(Arg::Spec)
    }
}
