use super::ascii::{check_reset, parse_header, parse_symbols_and_comments, DefinitionTracker};
use super::{
    AigerCircuit, AigerError, AigerErrorKind, AndGate, Input, Latch, Literal, Location, Output,
    ParseMode,
};

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Reader<'a> {
    fn text_line(&mut self) -> Result<(usize, &'a str), AigerError> {
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').ok_or(AigerError {
            location: Location::Byte(self.bytes.len()),
            kind: AigerErrorKind::Truncated,
        })?;
        let line = std::str::from_utf8(&rest[..end]).map_err(|_| {
            AigerError::at_line(self.line, AigerErrorKind::MalformedLine("not UTF-8".into()))
        })?;
        self.pos += end + 1;
        self.line += 1;
        Ok((self.line, line))
    }

    /// Decodes one 7-bit little-endian varint.
    fn delta(&mut self) -> Result<u32, AigerError> {
        let start = self.pos;
        let mut value: u64 = 0;
        let mut shift = 0;
        loop {
            let &byte = self.bytes.get(self.pos).ok_or(AigerError {
                location: Location::Byte(self.pos),
                kind: AigerErrorKind::Truncated,
            })?;
            self.pos += 1;
            value |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift > 35 {
                return Err(AigerError {
                    location: Location::Byte(start),
                    kind: AigerErrorKind::MalformedLine("delta does not fit in 32 bits".into()),
                });
            }
        }
        u32::try_from(value).map_err(|_| AigerError {
            location: Location::Byte(start),
            kind: AigerErrorKind::MalformedLine("delta does not fit in 32 bits".into()),
        })
    }
}

fn numbers(line: &str, n: usize) -> Result<Vec<u32>, AigerError> {
    line.split_ascii_whitespace()
        .map(|f| {
            f.parse()
                .map_err(|_| AigerError::at_line(n, AigerErrorKind::MalformedLine(line.into())))
        })
        .collect()
}

/// Parses the binary (`aig`) encoding: implicit inputs, latch and output
/// lines in ASCII, then delta-compressed AND gates.
pub fn parse_binary(bytes: &[u8], mode: ParseMode) -> Result<AigerCircuit, AigerError> {
    let mut r = Reader {
        bytes,
        pos: 0,
        line: 0,
    };
    let (_, header) = r.text_line().map_err(|e| match e.kind {
        AigerErrorKind::Truncated => AigerError::at_line(
            1,
            AigerErrorKind::MalformedHeader("missing header line".into()),
        ),
        _ => e,
    })?;
    let h = parse_header(header, "aig")?;
    if u64::from(h.inputs) + u64::from(h.latches) + u64::from(h.ands) != u64::from(h.max_var) {
        return Err(AigerError::at_line(
            1,
            AigerErrorKind::HeaderMismatch("binary format requires M = I + L + A".into()),
        ));
    }
    let mut defs = DefinitionTracker::new(h.max_var);
    let mut c = AigerCircuit {
        max_var: h.max_var,
        ..Default::default()
    };
    for i in 0..h.inputs {
        let lit = defs.define(2 * (i + 1), 1)?;
        c.inputs.push(Input::new(lit, None));
    }
    for j in 0..h.latches {
        let (n, line) = r.text_line()?;
        let nums = numbers(line, n)?;
        let Some((&next, reset)) = nums.split_first() else {
            return Err(AigerError::at_line(
                n,
                AigerErrorKind::MalformedLine(line.into()),
            ));
        };
        let lit = defs.define(2 * (h.inputs + j + 1), n)?;
        let next = defs.check_lit(next, n)?;
        check_reset(lit, reset, n)?;
        c.latches.push(Latch {
            lit,
            next,
            name: None,
        });
    }
    for _ in 0..h.outputs {
        let (n, line) = r.text_line()?;
        let nums = numbers(line, n)?;
        let [lit] = nums[..] else {
            return Err(AigerError::at_line(
                n,
                AigerErrorKind::MalformedLine(line.into()),
            ));
        };
        c.outputs.push(Output {
            lit: defs.check_lit(lit, n)?,
            name: None,
        });
    }
    for k in 0..h.ands {
        let at = r.pos;
        let lhs = 2 * (h.inputs + h.latches + k + 1);
        let d0 = r.delta()?;
        let d1 = r.delta()?;
        let non_monotone = || AigerError {
            location: Location::Byte(at),
            kind: AigerErrorKind::NonMonotoneDelta,
        };
        if d0 == 0 || d0 > lhs {
            return Err(non_monotone());
        }
        let rhs0 = lhs - d0;
        let rhs1 = rhs0.checked_sub(d1).ok_or_else(non_monotone)?;
        c.ands.push(AndGate {
            lhs: Literal::from_raw(lhs),
            rhs0: Literal::from_raw(rhs0),
            rhs1: Literal::from_raw(rhs1),
        });
    }
    let tail = std::str::from_utf8(&bytes[r.pos..]).map_err(|_| AigerError {
        location: Location::Byte(r.pos),
        kind: AigerErrorKind::MalformedSymbol("symbol table is not UTF-8".into()),
    })?;
    let first = r.line + 1;
    parse_symbols_and_comments(
        &mut c,
        tail.lines().enumerate().map(|(i, l)| (first + i, l)),
    )?;
    c.validate(mode)?;
    Ok(c)
}
