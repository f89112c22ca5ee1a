use super::{Counts, FeatureError, FeaturePts, Node};

/// Constituency tree: internal nodes carry labels, leaves carry words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    Node {
        label: String,
        children: Vec<ParseTree>,
    },
    Leaf(String),
}

impl ParseTree {
    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(word: impl Into<String>) -> Self {
        ParseTree::Leaf(word.into())
    }

    /// Parses one Penn-style bracketed tree such as
    /// `(S (NP (DT the) (NN dog)) (VP (VBZ runs)))`. An unlabelled outer
    /// wrapper around a single tree, `( (S …) )`, is removed.
    pub fn parse(text: &str) -> Result<Self, String> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err("empty tree".into());
        }
        let mut pos = 0;
        let tree = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err("trailing input after the tree".into());
        }
        let tree = match tree {
            ParseTree::Node {
                label,
                mut children,
            } if label.is_empty() && children.len() == 1 => children.pop().unwrap(),
            ParseTree::Node { label, .. } if label.is_empty() => {
                return Err("unlabelled root".into())
            }
            other => other,
        };
        match tree {
            ParseTree::Leaf(_) => Err("a tree must start with '('".into()),
            node => Ok(node),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        let delimiter = ch == '(' || ch == ')' || ch.is_whitespace();
        if delimiter {
            if let Some(s) = start.take() {
                tokens.push(Token::Atom(&text[s..i]));
            }
            match ch {
                '(' => tokens.push(Token::Open),
                ')' => tokens.push(Token::Close),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push(Token::Atom(&text[s..]));
    }
    tokens
}

fn parse_node(tokens: &[Token<'_>], pos: &mut usize) -> Result<ParseTree, String> {
    match tokens.get(*pos) {
        Some(Token::Atom(word)) => {
            *pos += 1;
            Ok(ParseTree::leaf(*word))
        }
        Some(Token::Open) => {
            *pos += 1;
            let label = match tokens.get(*pos) {
                Some(Token::Atom(l)) => {
                    *pos += 1;
                    l.to_string()
                }
                _ => String::new(),
            };
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(Token::Close) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_node(tokens, pos)?),
                    None => return Err("unbalanced brackets: missing ')'".into()),
                }
            }
            if children.is_empty() {
                return Err(format!("constituent ({label}) has no children"));
            }
            if label.is_empty() && *pos != tokens.len() {
                return Err("constituent without a label".into());
            }
            Ok(ParseTree::Node { label, children })
        }
        Some(Token::Close) => Err("unbalanced brackets: unexpected ')'".into()),
        None => Err("unexpected end of tree".into()),
    }
}

/// One tree per non-blank line.
pub fn parse_trees(text: &str) -> Result<Vec<ParseTree>, FeatureError> {
    let trees = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| ParseTree::parse(l).map_err(|m| FeatureError::parse(i + 1, m)))
        .collect::<Result<Vec<_>, _>>()?;
    if trees.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    Ok(trees)
}

/// Constituent system: start -> constituents directly under each root,
/// parent label -> child label for every deeper edge, and label -> end
/// wherever a constituent dominates a word. Sibling order is not used.
pub fn build_grammar_pts(trees: &[ParseTree]) -> Result<FeaturePts, FeatureError> {
    if trees.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut counts = Counts::default();
    for (i, tree) in trees.iter().enumerate() {
        let ParseTree::Node { children, .. } = tree else {
            return Err(FeatureError::EmptyRoot(i + 1));
        };
        if children.is_empty() {
            return Err(FeatureError::EmptyRoot(i + 1));
        }
        count_children(&mut counts, Node::Start, children);
    }
    counts.into_feature_pts()
}

fn count_children(counts: &mut Counts, parent: Node, children: &[ParseTree]) {
    for child in children {
        match child {
            ParseTree::Leaf(_) => counts.add(parent.clone(), Node::End),
            ParseTree::Node { label, children } => {
                let node = Node::Unit(label.clone());
                counts.add(parent.clone(), node.clone());
                count_children(counts, node, children);
            }
        }
    }
}
