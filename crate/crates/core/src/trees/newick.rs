use super::{EdgeWeightedTree, Label, Topology, ROOT};
use crate::error::{Error, Result};

/// Newick text with branch lengths. The outermost group is `ROOT`, so the root edge is the
/// length written on its single child.
pub fn to_newick(tree: &EdgeWeightedTree) -> String {
    let topo = tree.topology();
    let mut out = String::from("(");
    write_node(tree, topo.top(), &mut out);
    out.push_str(");");
    out
}

fn write_node(tree: &EdgeWeightedTree, v: usize, out: &mut String) {
    let topo = tree.topology();
    if topo.is_leaf(v) {
        out.push_str(&topo.label(v).unwrap().to_string());
    } else {
        out.push('(');
        for (i, &c) in topo.children(v).iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_node(tree, c, out);
        }
        out.push(')');
    }
    out.push(':');
    out.push_str(&tree.length(v).to_string());
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn token(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && !b"(),:;".contains(&self.s[self.pos]) && !self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("")
    }

    fn length(&mut self) -> Result<f64> {
        if self.peek() != Some(b':') {
            return Ok(1.0);
        }
        self.pos += 1;
        let at = self.pos;
        let tok = self.token();
        match tok.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
            Ok(_) => Err(Error::Parse { pos: at, msg: format!("branch length {tok} is not positive") }),
            Err(_) => Err(Error::Parse { pos: at, msg: format!("bad branch length '{tok}'") }),
        }
    }

    fn subtree(&mut self, topo: &mut Topology, lengths: &mut Vec<f64>, parent: usize) -> Result<()> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let v = topo.add_child(parent, None);
            lengths.push(0.0);
            loop {
                self.subtree(topo, lengths, v)?;
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.err("expected ',' or ')'"),
                }
            }
            if !self.token().is_empty() {
                return self.err("internal node labels are not supported");
            }
            lengths[v] = self.length()?;
        } else {
            let at = self.pos;
            let tok = self.token();
            let label: Label = tok
                .parse()
                .ok()
                .filter(|&l: &Label| l > 0)
                .ok_or_else(|| Error::Parse { pos: at, msg: format!("leaf label '{tok}' is not a positive integer") })?;
            let v = topo.add_child(parent, Some(label));
            lengths.push(0.0);
            lengths[v] = self.length()?;
        }
        Ok(())
    }
}

/// Parse Newick text produced by [`to_newick`]; missing branch lengths default to 1.
pub fn parse_newick(text: &str) -> Result<EdgeWeightedTree> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let mut topo = Topology::new();
    let mut lengths = vec![0.0];
    p.expect(b'(')?;
    loop {
        p.subtree(&mut topo, &mut lengths, ROOT)?;
        match p.peek() {
            Some(b',') => p.pos += 1,
            Some(b')') => {
                p.pos += 1;
                break;
            }
            _ => return p.err("expected ',' or ')'"),
        }
    }
    if topo.children(ROOT).len() != 1 {
        return Err(Error::Parse { pos: p.pos, msg: "outer group must hold exactly one subtree".into() });
    }
    if p.peek() == Some(b':') {
        return p.err("ROOT carries no edge");
    }
    p.expect(b';')?;
    if p.peek().is_some() {
        return p.err("trailing characters");
    }
    EdgeWeightedTree::new(&topo, &lengths).map_err(|e| Error::Parse { pos: p.pos, msg: e.to_string() })
}
