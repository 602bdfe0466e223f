use std::fmt::Write as _;

use super::{
    AigerCircuit, AigerError, AigerErrorKind, AndGate, Input, Latch, Literal, Output, ParseMode,
};

pub(super) struct Header {
    pub max_var: u32,
    pub inputs: u32,
    pub latches: u32,
    pub outputs: u32,
    pub ands: u32,
}

pub(super) fn parse_header(line: &str, magic: &str) -> Result<Header, AigerError> {
    let bad = |msg: String| AigerError::at_line(1, AigerErrorKind::MalformedHeader(msg));
    let mut fields = line.split_ascii_whitespace();
    if fields.next() != Some(magic) {
        return Err(bad(format!("expected `{magic}`")));
    }
    let nums = fields
        .map(|f| {
            f.parse::<u32>()
                .map_err(|_| bad(format!("`{f}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if nums.len() < 5 {
        return Err(bad(format!("expected 5 counts, found {}", nums.len())));
    }
    if nums.len() > 9 {
        return Err(bad("too many counts".into()));
    }
    if nums[5..].iter().any(|&n| n != 0) {
        return Err(AigerError::at_line(
            1,
            AigerErrorKind::Unsupported("bad/constraint/justice/fairness sections".into()),
        ));
    }
    Ok(Header {
        max_var: nums[0],
        inputs: nums[1],
        latches: nums[2],
        outputs: nums[3],
        ands: nums[4],
    })
}

fn numbers(line: &str, lineno: usize) -> Result<Vec<u32>, AigerError> {
    line.split_ascii_whitespace()
        .map(|f| {
            f.parse::<u32>().map_err(|_| {
                AigerError::at_line(lineno, AigerErrorKind::MalformedLine(line.to_string()))
            })
        })
        .collect()
}

/// Tracks which variables are already defined so duplicate definitions are
/// reported on the line where they occur.
pub(super) struct DefinitionTracker {
    max_var: u32,
    defined: Vec<bool>,
}

impl DefinitionTracker {
    pub fn new(max_var: u32) -> Self {
        DefinitionTracker {
            max_var,
            defined: vec![false; max_var as usize + 1],
        }
    }

    pub fn check_lit(&self, lit: u32, lineno: usize) -> Result<Literal, AigerError> {
        if lit > 2 * self.max_var + 1 {
            return Err(AigerError::at_line(
                lineno,
                AigerErrorKind::LiteralOutOfRange(lit),
            ));
        }
        Ok(Literal::from_raw(lit))
    }

    pub fn define(&mut self, lit: u32, lineno: usize) -> Result<Literal, AigerError> {
        let l = self.check_lit(lit, lineno)?;
        if l.is_negated() || l.is_constant() {
            return Err(AigerError::at_line(
                lineno,
                AigerErrorKind::NotAVariable(lit),
            ));
        }
        let slot = &mut self.defined[l.var() as usize];
        if *slot {
            return Err(AigerError::at_line(
                lineno,
                AigerErrorKind::DuplicateDefinition(l.var()),
            ));
        }
        *slot = true;
        Ok(l)
    }
}

pub(super) fn check_reset(latch: Literal, fields: &[u32], lineno: usize) -> Result<(), AigerError> {
    match fields {
        [] | [0] => Ok(()),
        [reset] => Err(AigerError::at_line(
            lineno,
            AigerErrorKind::UnsupportedReset {
                latch: latch.raw(),
                reset: *reset,
            },
        )),
        _ => Err(AigerError::at_line(
            lineno,
            AigerErrorKind::MalformedLine("too many fields in latch".into()),
        )),
    }
}

/// Parses the ASCII (`aag`) encoding.
pub fn parse_ascii(text: &str, mode: ParseMode) -> Result<AigerCircuit, AigerError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header_line) = lines.next().ok_or_else(|| {
        AigerError::at_line(1, AigerErrorKind::MalformedHeader("empty input".into()))
    })?;
    let h = parse_header(header_line, "aag")?;
    if u64::from(h.inputs) + u64::from(h.latches) + u64::from(h.ands) > u64::from(h.max_var) {
        return Err(AigerError::at_line(
            1,
            AigerErrorKind::HeaderMismatch("I + L + A exceeds M".into()),
        ));
    }
    let mut defs = DefinitionTracker::new(h.max_var);
    let mut next_line = |what: &str| {
        lines.next().ok_or_else(|| {
            AigerError::circuit(AigerErrorKind::HeaderMismatch(format!(
                "file ends before all {what} are listed"
            )))
        })
    };

    let mut c = AigerCircuit {
        max_var: h.max_var,
        ..Default::default()
    };
    for _ in 0..h.inputs {
        let (n, line) = next_line("inputs")?;
        let nums = numbers(line, n)?;
        let [lit] = nums[..] else {
            return Err(AigerError::at_line(
                n,
                AigerErrorKind::MalformedLine(line.into()),
            ));
        };
        let lit = defs.define(lit, n)?;
        c.inputs.push(Input::new(lit, None));
    }
    for _ in 0..h.latches {
        let (n, line) = next_line("latches")?;
        let nums = numbers(line, n)?;
        if nums.len() < 2 {
            return Err(AigerError::at_line(
                n,
                AigerErrorKind::MalformedLine(line.into()),
            ));
        }
        let lit = defs.define(nums[0], n)?;
        let next = defs.check_lit(nums[1], n)?;
        check_reset(lit, &nums[2..], n)?;
        c.latches.push(Latch {
            lit,
            next,
            name: None,
        });
    }
    for _ in 0..h.outputs {
        let (n, line) = next_line("outputs")?;
        let nums = numbers(line, n)?;
        let [lit] = nums[..] else {
            return Err(AigerError::at_line(
                n,
                AigerErrorKind::MalformedLine(line.into()),
            ));
        };
        let lit = defs.check_lit(lit, n)?;
        c.outputs.push(Output { lit, name: None });
    }
    for _ in 0..h.ands {
        let (n, line) = next_line("AND gates")?;
        let nums = numbers(line, n)?;
        let [lhs, rhs0, rhs1] = nums[..] else {
            return Err(AigerError::at_line(
                n,
                AigerErrorKind::MalformedLine(line.into()),
            ));
        };
        let lhs = defs.define(lhs, n)?;
        let rhs0 = defs.check_lit(rhs0, n)?;
        let rhs1 = defs.check_lit(rhs1, n)?;
        if mode == ParseMode::Specification {
            for rhs in [rhs0, rhs1] {
                if rhs >= lhs {
                    return Err(AigerError::at_line(
                        n,
                        AigerErrorKind::OrderingViolation {
                            lhs: lhs.raw(),
                            rhs: rhs.raw(),
                        },
                    ));
                }
            }
        }
        c.ands.push(AndGate { lhs, rhs0, rhs1 });
    }
    parse_symbols_and_comments(&mut c, lines)?;
    c.validate(mode)?;
    Ok(c)
}

/// Reads the optional symbol table and comment section that follow the body.
pub(super) fn parse_symbols_and_comments<'a>(
    c: &mut AigerCircuit,
    lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<(), AigerError> {
    let mut in_comments = false;
    for (n, raw) in lines {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if in_comments {
            c.comments.push(line.trim_end().to_string());
            continue;
        }
        if line.trim_end() == "c" {
            in_comments = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let bad = || AigerError::at_line(n, AigerErrorKind::MalformedSymbol(line.to_string()));
        let (head, name) = line.split_once(' ').ok_or_else(bad)?;
        if name.is_empty() || head.len() < 2 {
            return Err(bad());
        }
        let idx: usize = head[1..].parse().map_err(|_| bad())?;
        match head.as_bytes()[0] {
            b'i' => {
                let inp = c.inputs.get_mut(idx).ok_or_else(bad)?;
                *inp = Input::new(inp.lit, Some(name.to_string()));
            }
            b'l' => c.latches.get_mut(idx).ok_or_else(bad)?.name = Some(name.to_string()),
            b'o' => c.outputs.get_mut(idx).ok_or_else(bad)?.name = Some(name.to_string()),
            b'b' | b'c' | b'j' | b'f' => {
                return Err(AigerError::at_line(
                    n,
                    AigerErrorKind::Unsupported(format!("symbol kind `{}`", &head[..1])),
                ))
            }
            _ => return Err(bad()),
        }
    }
    Ok(())
}

pub(super) fn write_symbols_and_comments(c: &AigerCircuit, out: &mut String) {
    for (i, inp) in c.inputs.iter().enumerate() {
        if let Some(name) = &inp.name {
            let _ = writeln!(out, "i{i} {name}");
        }
    }
    for (i, l) in c.latches.iter().enumerate() {
        if let Some(name) = &l.name {
            let _ = writeln!(out, "l{i} {name}");
        }
    }
    for (i, o) in c.outputs.iter().enumerate() {
        if let Some(name) = &o.name {
            let _ = writeln!(out, "o{i} {name}");
        }
    }
    if !c.comments.is_empty() {
        out.push_str("c\n");
        for line in &c.comments {
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
}

/// Writes the ASCII (`aag`) encoding. Latch resets are omitted (all are 0).
pub fn serialize_ascii(c: &AigerCircuit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "aag {} {} {} {} {}",
        c.max_var,
        c.inputs.len(),
        c.latches.len(),
        c.outputs.len(),
        c.ands.len()
    );
    for i in &c.inputs {
        let _ = writeln!(out, "{}", i.lit);
    }
    for l in &c.latches {
        let _ = writeln!(out, "{} {}", l.lit, l.next);
    }
    for o in &c.outputs {
        let _ = writeln!(out, "{}", o.lit);
    }
    for g in &c.ands {
        let _ = writeln!(out, "{} {} {}", g.lhs, g.rhs0, g.rhs1);
    }
    write_symbols_and_comments(c, &mut out);
    out
}
