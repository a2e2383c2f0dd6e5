//! Newick parsing and canonical serialization.
//!
//! Labels are `[A-Za-z0-9_]+`. Whitespace between tokens is tolerated.
//! Branch lengths (`:1.25`) are parsed and discarded; each discarded length
//! is reported on the warning channel. A rooted input with a degree-2 root is
//! accepted and the root suppressed; a trifurcating top level is read as the
//! unrooted central vertex.

use thiserror::Error;

use crate::taxa::Taxon;
use crate::tree::{TreeBuilder, UnrootedTree, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewickError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("vertex would have degree {degree} after root suppression")]
    Degree { degree: usize },
    #[error("duplicate label: {0}")]
    DuplicateLabel(String),
    #[error("line {line}: {source}")]
    InFile {
        line: usize,
        #[source]
        source: Box<NewickError>,
    },
    #[error("expected {expected} trees in file, found {found}")]
    WrongTreeCount { expected: usize, found: usize },
}

/// Parses a single Newick expression terminated by `;` into an unrooted tree.
pub fn parse(text: &str) -> Result<UnrootedTree, NewickError> {
    parse_with_warnings(text).map(|(t, _)| t)
}

/// As [`parse`], also returning one warning per discarded branch length.
pub fn parse_with_warnings(text: &str) -> Result<(UnrootedTree, Vec<String>), NewickError> {
    let mut p = Parser {
        chars: text.char_indices().peekable(),
        builder: TreeBuilder::new(),
        warnings: Vec::new(),
        end: text.len(),
    };
    let root_children = p.parse_node()?;
    p.skip_spaces();
    p.expect(';')?;
    p.skip_spaces();
    if let Some(&(pos, _)) = p.chars.peek() {
        return Err(NewickError::Syntax { pos, msg: "trailing input after ';'".into() });
    }

    let tree = match root_children {
        // "a;" — the one-taxon tree
        Parsed::Leaf(_) => p.builder.finish(),
        Parsed::Internal(_, arity) => {
            let mut tree = p.builder.finish();
            match arity {
                2 => tree.suppress_degree_two(),
                3 => {}
                d => return Err(NewickError::Degree { degree: d }),
            }
            tree
        }
    };
    {
        let mut seen = std::collections::BTreeSet::new();
        for v in tree.vertices() {
            if let Some(t) = tree.label(v) {
                if !seen.insert(t.clone()) {
                    return Err(NewickError::DuplicateLabel(t.as_str().to_string()));
                }
            }
        }
    }
    if let Err(v) = tree.validate() {
        return match v {
            crate::tree::Violation::InternalDegree(_, d) => Err(NewickError::Degree { degree: d }),
            other => Err(NewickError::Syntax { pos: 0, msg: other.to_string() }),
        };
    }
    Ok((tree, p.warnings))
}

enum Parsed {
    Leaf(VertexId),
    Internal(VertexId, usize),
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    builder: TreeBuilder,
    warnings: Vec<String>,
    end: usize,
}

impl<'a> Parser<'a> {
    fn pos(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.end)
    }

    fn skip_spaces(&mut self) {
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expect(&mut self, sym: char) -> Result<(), NewickError> {
        let pos = self.pos();
        match self.chars.next() {
            Some((_, c)) if c == sym => Ok(()),
            _ => Err(NewickError::Syntax { pos, msg: format!("expected '{sym}'") }),
        }
    }

    fn parse_node(&mut self) -> Result<Parsed, NewickError> {
        self.skip_spaces();
        match self.chars.peek() {
            Some(&(_, '(')) => {
                self.chars.next();
                let mut children = vec![self.parse_node()?];
                loop {
                    self.skip_spaces();
                    match self.chars.peek() {
                        Some(&(_, ',')) => {
                            self.chars.next();
                            children.push(self.parse_node()?);
                        }
                        Some(&(_, ')')) => {
                            self.chars.next();
                            break;
                        }
                        _ => {
                            let pos = self.pos();
                            return Err(NewickError::Syntax {
                                pos,
                                msg: "expected ',' or ')'".into(),
                            });
                        }
                    }
                }
                self.skip_branch_length()?;
                // internal vertices are unlabeled in this format
                let v = self.builder.add_internal();
                let arity = children.len();
                for child in children {
                    let c = match child {
                        Parsed::Leaf(c) | Parsed::Internal(c, _) => c,
                    };
                    self.builder.add_edge(v, c);
                }
                // a non-root internal vertex needs exactly 2 children
                Ok(Parsed::Internal(v, arity))
            }
            _ => {
                let label = self.parse_label()?;
                self.skip_branch_length()?;
                Ok(Parsed::Leaf(self.builder.add_leaf(Taxon::new(label))))
            }
        }
    }

    fn parse_label(&mut self) -> Result<String, NewickError> {
        self.skip_spaces();
        let pos = self.pos();
        let mut label = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                label.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(NewickError::Syntax { pos, msg: "expected a label".into() });
        }
        Ok(label)
    }

    fn skip_branch_length(&mut self) -> Result<(), NewickError> {
        self.skip_spaces();
        if !matches!(self.chars.peek(), Some(&(_, ':'))) {
            return Ok(());
        }
        let pos = self.pos();
        self.chars.next();
        let mut text = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E' {
                text.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        if text.is_empty() {
            return Err(NewickError::Syntax { pos, msg: "expected a branch length".into() });
        }
        self.warnings
            .push(format!("discarded branch length ':{text}' at position {pos}"));
        Ok(())
    }
}

/// Canonical Newick form. The tree is rooted at the internal vertex adjacent
/// to the smallest taxon, and children are ordered by their smallest
/// descendant label; `parse(serialize(t))` is isomorphic to `t` and
/// `serialize` is constant on isomorphism classes.
pub fn serialize(tree: &UnrootedTree) -> String {
    let taxa = tree.taxa();
    let mut it = taxa.iter();
    match taxa.len() {
        0 => ";".to_string(),
        1 => format!("{};", it.next().unwrap()),
        2 => {
            let a = it.next().unwrap();
            let b = it.next().unwrap();
            format!("({a},{b});")
        }
        _ => {
            let smallest = taxa.smallest().unwrap();
            let leaf = tree.leaf_vertex(smallest).unwrap();
            let root = tree.neighbors(leaf)[0];
            let mut parts: Vec<(String, String)> = tree
                .neighbors(root)
                .iter()
                .map(|&c| subtree_string(tree, c, root))
                .collect();
            parts.sort();
            let bodies: Vec<String> = parts.into_iter().map(|(_, s)| s).collect();
            format!("({});", bodies.join(","))
        }
    }
}

/// Returns `(smallest descendant label, newick fragment)` for the subtree at
/// `v` seen from `from`.
fn subtree_string(tree: &UnrootedTree, v: VertexId, from: VertexId) -> (String, String) {
    if let Some(t) = tree.label(v) {
        return (t.as_str().to_string(), t.as_str().to_string());
    }
    let mut parts: Vec<(String, String)> = tree
        .neighbors(v)
        .iter()
        .filter(|&&u| u != from)
        .map(|&u| subtree_string(tree, u, v))
        .collect();
    parts.sort();
    let min = parts[0].0.clone();
    let bodies: Vec<String> = parts.into_iter().map(|(_, s)| s).collect();
    (min, format!("({})", bodies.join(",")))
}

/// Reads a pair of trees from the line-oriented file format: one Newick
/// expression per line, `#` lines are comments, line 1 is the first tree and
/// line 2 the second.
pub fn parse_pair_file(text: &str) -> Result<(UnrootedTree, UnrootedTree), NewickError> {
    let mut trees = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t = parse(line).map_err(|e| NewickError::InFile {
            line: idx + 1,
            source: Box::new(e),
        })?;
        trees.push(t);
    }
    if trees.len() != 2 {
        return Err(NewickError::WrongTreeCount { expected: 2, found: trees.len() });
    }
    let mut it = trees.into_iter();
    Ok((it.next().unwrap(), it.next().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::enumerate_trees;

    #[test]
    fn parses_rooted_quartet() {
        let t = parse("((a,b),(c,d));").unwrap();
        assert_eq!(t.validate(), Ok(()));
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(serialize(&t), "(a,b,(c,d));");
    }

    #[test]
    fn trifurcating_center_is_same_tree() {
        let t1 = parse("((a,b),(c,d));").unwrap();
        let t2 = parse("(a,b,(c,d));").unwrap();
        assert!(t1.isomorphic(&t2));
    }

    #[test]
    fn parses_three_leaf_tree() {
        let t = parse("((a,b),c);").unwrap();
        assert_eq!(t.leaf_count(), 3);
        assert_eq!(serialize(&t), "(a,b,c);");
    }

    #[test]
    fn canonical_form_of_quartet() {
        let t = parse("((c,d),(b,a));").unwrap();
        assert_eq!(serialize(&t), "(a,b,(c,d));");
    }

    #[test]
    fn serialize_small_trees() {
        assert_eq!(serialize(&parse("a;").unwrap()), "a;");
        assert_eq!(serialize(&parse("(b,a);").unwrap()), "(a,b);");
    }

    #[test]
    fn serialize_is_a_fixed_point() {
        for n in 4..=6 {
            let ts: crate::taxa::TaxonSet =
                (0..n).map(|i| crate::taxa::Taxon::new(format!("t{i}"))).collect();
            for t in enumerate_trees(&ts).unwrap() {
                let s1 = serialize(&t);
                let s2 = serialize(&parse(&s1).unwrap());
                assert_eq!(s1, s2);
            }
        }
    }

    #[test]
    fn branch_lengths_discarded_with_warning() {
        let (t, warnings) = parse_with_warnings("((a:1.5,b:2),(c,d):0.3);").unwrap();
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(warnings.len(), 3);
    }

    #[test]
    fn syntax_error_is_position_annotated() {
        let err = parse("((a,b),(c,);").unwrap_err();
        match err {
            NewickError::Syntax { pos, .. } => assert_eq!(pos, 10),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_label_rejected() {
        assert!(matches!(
            parse("((a,b),(a,d));"),
            Err(NewickError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn nonbinary_rejected() {
        assert!(matches!(
            parse("((a,b,c,d),e);"),
            Err(NewickError::Degree { .. })
        ));
        assert!(matches!(
            parse("(a,b,c,d);"),
            Err(NewickError::Degree { degree: 4 })
        ));
    }

    #[test]
    fn pair_file_with_comments() {
        let text = "# a pair\n((a,b),(c,d));\n\n((a,c),(b,d));\n";
        let (t1, t2) = parse_pair_file(text).unwrap();
        assert!(!t1.isomorphic(&t2));
    }
}
