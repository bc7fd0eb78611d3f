use std::collections::BTreeMap;
use std::path::Path;

use super::types::{parse_method_descriptor, word_size};
use super::{
    ClassDef, ComponentKind, FieldDef, FieldRef, Instruction, InvokeKind, Literal, MethodDef, MethodRef, Op, Reg,
    SwitchPayload, TryBlock,
};
use crate::error::{Error, Result};

/// Parses one class file's text.
pub fn parse_class(text: &str) -> Result<ClassDef> {
    parse_class_at(text, None)
}

pub fn parse_class_at(text: &str, path: Option<&Path>) -> Result<ClassDef> {
    let file = path
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "<input>".to_string());
    let mut p = Parser { lines: text.lines().collect(), pos: 0, file };
    let mut class = p.parse_class_body()?;
    class.path = path.map(Path::to_path_buf);
    Ok(class)
}

struct Parser<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    file: String,
}

impl<'a> Parser<'a> {
    fn err(&self, line: u32, message: impl Into<String>) -> Error {
        Error::Syntax { file: self.file.clone(), line, message: message.into() }
    }

    /// Next non-empty line with comments stripped, plus its 1-based number.
    fn next_line(&mut self) -> Option<(u32, &'a str)> {
        while self.pos < self.lines.len() {
            let raw = self.lines[self.pos];
            self.pos += 1;
            let line = strip_comment(raw).trim();
            if !line.is_empty() {
                return Some((self.pos as u32, line));
            }
        }
        None
    }

    fn eof_line(&self) -> u32 {
        self.lines.len() as u32
    }

    fn skip_block(&mut self, start_line: u32, what: &str) -> Result<()> {
        let mut depth = 1;
        while let Some((_, line)) = self.next_line() {
            let (d, rest) = split_first(line);
            match d {
                ".annotation" | ".subannotation" => depth += 1,
                ".end" if rest == "annotation" || rest == "subannotation" => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        Err(self.err(start_line, format!("unexpected end of file inside {what}")))
    }

    fn parse_class_body(&mut self) -> Result<ClassDef> {
        let mut name: Option<String> = None;
        let mut flags = Vec::new();
        let mut superclass = None;
        let mut interfaces = Vec::new();
        let mut source_file = None;
        let mut fields = Vec::new();
        let mut methods: Vec<MethodDef> = Vec::new();

        while let Some((ln, line)) = self.next_line() {
            let (directive, rest) = split_first(line);
            match directive {
                ".class" => {
                    let mut toks: Vec<&str> = rest.split_whitespace().collect();
                    let n = toks.pop().ok_or_else(|| self.err(ln, ".class without a name"))?;
                    if !super::types::is_class_descriptor(n) {
                        return Err(self.err(ln, format!("invalid class descriptor `{n}`")));
                    }
                    name = Some(n.to_string());
                    flags = toks.into_iter().map(String::from).collect();
                }
                ".super" => superclass = Some(self.class_token(ln, rest)?),
                ".implements" => interfaces.push(self.class_token(ln, rest)?),
                ".source" => source_file = Some(unquote(rest).map_err(|m| self.err(ln, m))?),
                ".field" => fields.push(self.parse_field(ln, rest)?),
                ".end" if rest == "field" => {}
                ".annotation" => self.skip_block(ln, "annotation")?,
                ".method" => {
                    if name.is_none() {
                        return Err(self.err(ln, ".method before .class"));
                    }
                    let m = self.parse_method(ln, rest)?;
                    if methods.iter().any(|o| o.name == m.name && o.descriptor == m.descriptor) {
                        return Err(self.err(ln, format!("duplicate method {}{}", m.name, m.descriptor)));
                    }
                    methods.push(m);
                }
                d if d.starts_with('.') => {}
                _ => return Err(self.err(ln, format!("unexpected line `{line}`"))),
            }
        }

        let name = name.ok_or_else(|| self.err(1, "missing .class directive"))?;
        Ok(ClassDef {
            name,
            flags,
            superclass,
            interfaces,
            source_file,
            fields,
            methods,
            component: ComponentKind::None,
            path: None,
        })
    }

    fn class_token(&self, ln: u32, rest: &str) -> Result<String> {
        let t = rest.trim();
        if super::types::is_class_descriptor(t) {
            Ok(t.to_string())
        } else {
            Err(self.err(ln, format!("invalid class descriptor `{t}`")))
        }
    }

    fn parse_field(&self, ln: u32, rest: &str) -> Result<FieldDef> {
        let (decl, init) = match find_unquoted(rest, '=') {
            Some(i) => (&rest[..i], Some(rest[i + 1..].trim())),
            None => (rest, None),
        };
        let mut toks: Vec<&str> = decl.split_whitespace().collect();
        let nt = toks.pop().ok_or_else(|| self.err(ln, ".field without a name"))?;
        let (name, ty) = nt
            .split_once(':')
            .ok_or_else(|| self.err(ln, format!("malformed field `{nt}`")))?;
        if !super::types::is_valid_descriptor(ty) {
            return Err(self.err(ln, format!("invalid field type `{ty}`")));
        }
        let initial = match init {
            Some(v) => Some(parse_literal(v).map_err(|m| self.err(ln, m))?),
            None => None,
        };
        Ok(FieldDef {
            name: name.to_string(),
            ty: ty.to_string(),
            flags: toks.into_iter().map(String::from).collect(),
            initial,
        })
    }

    fn parse_method(&mut self, start: u32, header: &str) -> Result<MethodDef> {
        let mut toks: Vec<&str> = header.split_whitespace().collect();
        let sig = toks.pop().ok_or_else(|| self.err(start, ".method without a signature"))?;
        let paren = sig
            .find('(')
            .ok_or_else(|| self.err(start, format!("malformed method signature `{sig}`")))?;
        let name = &sig[..paren];
        let descriptor = &sig[paren..];
        let (parameters, return_type) = parse_method_descriptor(descriptor)
            .ok_or_else(|| self.err(start, format!("malformed method descriptor `{descriptor}`")))?;

        let mut method = MethodDef {
            name: name.to_string(),
            descriptor: descriptor.to_string(),
            flags: toks.into_iter().map(String::from).collect(),
            register_count: 0,
            parameters,
            return_type,
            instructions: Vec::new(),
            labels: BTreeMap::new(),
            try_blocks: Vec::new(),
            switch_payloads: BTreeMap::new(),
            array_payloads: BTreeMap::new(),
        };
        let param_words = method.param_words();
        let mut registers: Option<u16> = None;
        let mut pending_labels: Vec<String> = Vec::new();
        let mut java_line: Option<u32> = None;
        // label -> line where it was referenced, validated at .end method
        let mut referenced: Vec<(String, u32)> = Vec::new();

        loop {
            let Some((ln, line)) = self.next_line() else {
                return Err(self.err(self.eof_line(), format!("unexpected end of file inside method {name}")));
            };
            if let Some(label) = line.strip_prefix(':') {
                pending_labels.push(label.to_string());
                continue;
            }
            let (d, rest) = split_first(line);
            match d {
                ".end" if rest == "method" => break,
                ".registers" => registers = Some(self.parse_count(ln, rest)?),
                ".locals" => {
                    let locals = self.parse_count(ln, rest)?;
                    registers = Some(locals + param_words);
                }
                ".line" => {
                    java_line = Some(
                        parse_int(rest)
                            .ok_or_else(|| self.err(ln, format!("bad line number `{rest}`")))?
                            as u32,
                    )
                }
                ".annotation" => self.skip_block(ln, "annotation")?,
                ".catch" | ".catchall" => {
                    let tb = self.parse_catch(ln, d == ".catchall", rest)?;
                    for l in [&tb.start, &tb.end, &tb.handler] {
                        referenced.push((l.clone(), ln));
                    }
                    method.try_blocks.push(tb);
                }
                ".packed-switch" | ".sparse-switch" => {
                    let payload = self.parse_switch_payload(ln, d == ".packed-switch", rest)?;
                    for (_, l) in &payload.targets {
                        referenced.push((l.clone(), ln));
                    }
                    for l in pending_labels.drain(..) {
                        method.switch_payloads.insert(l, payload.clone());
                    }
                }
                ".array-data" => {
                    let values = self.parse_array_payload(ln)?;
                    for l in pending_labels.drain(..) {
                        method.array_payloads.insert(l, values.clone());
                    }
                }
                // debug info and parameter metadata carry no semantics here
                ".param" | ".parameter" | ".prologue" | ".epilogue" | ".local" | ".restart" | ".source" => {}
                ".end" => {}
                _ if d.starts_with('.') => {}
                _ => {
                    let total = registers.ok_or_else(|| self.err(ln, "instruction before .registers/.locals"))?;
                    let regs = RegResolver { total, params_base: total.saturating_sub(param_words) };
                    let op = self.parse_instruction(ln, line, &regs)?;
                    for l in op.branch_labels() {
                        referenced.push((l.to_string(), ln));
                    }
                    if let Op::Switch { payload, .. } | Op::FillArrayData { payload, .. } = &op {
                        referenced.push((payload.clone(), ln));
                    }
                    let idx = method.instructions.len();
                    for l in pending_labels.drain(..) {
                        method.labels.insert(l, idx);
                    }
                    method.instructions.push(Instruction { op, file_line: ln, java_line });
                }
            }
        }
        let end = method.instructions.len();
        for l in pending_labels.drain(..) {
            method.labels.insert(l, end);
        }
        method.register_count = registers.unwrap_or(param_words);
        if method.register_count < param_words {
            return Err(self.err(start, format!("method {name} declares fewer registers than its parameters need")));
        }

        for (label, ln) in referenced {
            let ok = method.labels.contains_key(&label)
                || method.switch_payloads.contains_key(&label)
                || method.array_payloads.contains_key(&label);
            if !ok {
                return Err(self.err(ln, format!("undefined label :{label}")));
            }
        }
        // branch targets must land on an instruction
        for ins in &method.instructions {
            for l in ins.op.branch_labels() {
                if method.labels[l] >= end {
                    return Err(self.err(ins.file_line, format!("branch target :{l} is past the last instruction")));
                }
            }
        }
        for p in method.switch_payloads.values() {
            for (_, l) in &p.targets {
                if method.labels.get(l).is_none_or(|&i| i >= end) {
                    return Err(self.err(start, format!("switch target :{l} does not resolve")));
                }
            }
        }
        Ok(method)
    }

    fn parse_count(&self, ln: u32, rest: &str) -> Result<u16> {
        parse_int(rest)
            .and_then(|v| u16::try_from(v).ok())
            .ok_or_else(|| self.err(ln, format!("bad register count `{rest}`")))
    }

    fn parse_catch(&self, ln: u32, catchall: bool, rest: &str) -> Result<TryBlock> {
        let open = rest.find('{').ok_or_else(|| self.err(ln, "malformed .catch"))?;
        let close = rest.find('}').ok_or_else(|| self.err(ln, "malformed .catch"))?;
        let exception = if catchall {
            None
        } else {
            Some(self.class_token(ln, rest[..open].trim())?)
        };
        let range = &rest[open + 1..close];
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| self.err(ln, "malformed .catch range"))?;
        let label = |s: &str| -> Result<String> {
            s.trim()
                .strip_prefix(':')
                .map(String::from)
                .ok_or_else(|| self.err(ln, format!("expected label, got `{}`", s.trim())))
        };
        Ok(TryBlock {
            start: label(a)?,
            end: label(b)?,
            exception,
            handler: label(&rest[close + 1..])?,
        })
    }

    fn parse_switch_payload(&mut self, start: u32, packed: bool, header: &str) -> Result<SwitchPayload> {
        let end = if packed { "packed-switch" } else { "sparse-switch" };
        let mut key = if packed {
            parse_int(header).ok_or_else(|| self.err(start, "bad packed-switch base"))?
        } else {
            0
        };
        let mut targets = Vec::new();
        loop {
            let Some((ln, line)) = self.next_line() else {
                return Err(self.err(start, format!("unexpected end of file inside .{end}")));
            };
            if line == format!(".end {end}") {
                break;
            }
            if packed {
                let l = line.strip_prefix(':').ok_or_else(|| self.err(ln, "expected switch label"))?;
                targets.push((key, l.to_string()));
                key += 1;
            } else {
                let (k, l) = line.split_once("->").ok_or_else(|| self.err(ln, "malformed sparse-switch entry"))?;
                let k = parse_int(k.trim()).ok_or_else(|| self.err(ln, "bad sparse-switch key"))?;
                let l = l.trim().strip_prefix(':').ok_or_else(|| self.err(ln, "expected switch label"))?;
                targets.push((k, l.to_string()));
            }
        }
        Ok(SwitchPayload { packed, targets })
    }

    fn parse_array_payload(&mut self, start: u32) -> Result<Vec<i64>> {
        let mut values = Vec::new();
        loop {
            let Some((ln, line)) = self.next_line() else {
                return Err(self.err(start, "unexpected end of file inside .array-data"));
            };
            if line == ".end array-data" {
                return Ok(values);
            }
            for tok in line.split_whitespace() {
                values.push(parse_int(tok).ok_or_else(|| self.err(ln, format!("bad array element `{tok}`")))?);
            }
        }
    }

    fn parse_instruction(&self, ln: u32, line: &str, regs: &RegResolver) -> Result<Op> {
        let (mnemonic, rest) = split_first(line);
        let ops = split_operands(rest);
        let e = |m: String| self.err(ln, m);
        let want = |n: usize| -> Result<()> {
            if ops.len() == n {
                Ok(())
            } else {
                Err(self.err(ln, format!("`{mnemonic}` expects {n} operands, found {}", ops.len())))
            }
        };
        let reg = |i: usize| -> Result<Reg> { regs.resolve(ops[i]).map_err(|m| self.err(ln, m)) };
        let label = |i: usize| -> Result<String> {
            ops[i]
                .strip_prefix(':')
                .map(String::from)
                .ok_or_else(|| self.err(ln, format!("expected label, got `{}`", ops[i])))
        };
        let lit = |i: usize| -> Result<i64> {
            parse_int(ops[i]).ok_or_else(|| self.err(ln, format!("bad literal `{}`", ops[i])))
        };
        let ty = |i: usize| -> Result<String> {
            if super::types::is_valid_descriptor(ops[i]) {
                Ok(ops[i].to_string())
            } else {
                Err(self.err(ln, format!("bad type `{}`", ops[i])))
            }
        };
        let field = |i: usize| -> Result<FieldRef> { parse_field_ref(ops[i]).map_err(e) };

        let base = mnemonic.split('/').next().unwrap_or(mnemonic);
        let op = match mnemonic {
            "nop" => {
                want(0)?;
                Op::Nop
            }
            "move" | "move/from16" | "move/16" | "move-object" | "move-object/from16" | "move-object/16" => {
                want(2)?;
                Op::Move { dst: reg(0)?, src: reg(1)?, wide: false }
            }
            "move-wide" | "move-wide/from16" | "move-wide/16" => {
                want(2)?;
                Op::Move { dst: reg(0)?, src: reg(1)?, wide: true }
            }
            "move-result" | "move-result-object" => {
                want(1)?;
                Op::MoveResult { dst: reg(0)?, wide: false }
            }
            "move-result-wide" => {
                want(1)?;
                Op::MoveResult { dst: reg(0)?, wide: true }
            }
            "move-exception" => {
                want(1)?;
                Op::MoveException { dst: reg(0)? }
            }
            "return-void" => {
                want(0)?;
                Op::Return { src: None }
            }
            "return" | "return-object" | "return-wide" => {
                want(1)?;
                Op::Return { src: Some(reg(0)?) }
            }
            "const/4" | "const/16" | "const" | "const/high16" => {
                want(2)?;
                Op::Const { dst: reg(0)?, value: lit(1)?, wide: false }
            }
            "const-wide/16" | "const-wide/32" | "const-wide" | "const-wide/high16" => {
                want(2)?;
                Op::Const { dst: reg(0)?, value: lit(1)?, wide: true }
            }
            "const-string" | "const-string/jumbo" => {
                want(2)?;
                Op::ConstString { dst: reg(0)?, value: unquote(ops[1]).map_err(e)? }
            }
            "const-class" => {
                want(2)?;
                Op::ConstClass { dst: reg(0)?, class: ty(1)? }
            }
            "check-cast" => {
                want(2)?;
                Op::CheckCast { reg: reg(0)?, ty: ty(1)? }
            }
            "instance-of" => {
                want(3)?;
                Op::InstanceOf { dst: reg(0)?, src: reg(1)?, ty: ty(2)? }
            }
            "array-length" => {
                want(2)?;
                Op::ArrayLength { dst: reg(0)?, array: reg(1)? }
            }
            "new-instance" => {
                want(2)?;
                Op::NewInstance { dst: reg(0)?, class: ty(1)? }
            }
            "new-array" => {
                want(3)?;
                Op::NewArray { dst: reg(0)?, size: reg(1)?, ty: ty(2)? }
            }
            "filled-new-array" | "filled-new-array/range" => {
                want(2)?;
                Op::FilledNewArray {
                    args: regs.resolve_list(ops[0]).map_err(e)?,
                    ty: ty(1)?,
                }
            }
            "fill-array-data" => {
                want(2)?;
                Op::FillArrayData { array: reg(0)?, payload: label(1)? }
            }
            "throw" => {
                want(1)?;
                Op::Throw { src: reg(0)? }
            }
            "goto" | "goto/16" | "goto/32" => {
                want(1)?;
                Op::Goto { target: label(0)? }
            }
            "packed-switch" | "sparse-switch" => {
                want(2)?;
                Op::Switch { src: reg(0)?, payload: label(1)? }
            }
            "if-eq" | "if-ne" | "if-lt" | "if-ge" | "if-gt" | "if-le" => {
                want(3)?;
                Op::If { cond: mnemonic[3..].to_string(), a: reg(0)?, b: Some(reg(1)?), target: label(2)? }
            }
            "if-eqz" | "if-nez" | "if-ltz" | "if-gez" | "if-gtz" | "if-lez" => {
                want(2)?;
                Op::If { cond: mnemonic[3..].to_string(), a: reg(0)?, b: None, target: label(1)? }
            }
            "cmpl-float" | "cmpg-float" | "cmpl-double" | "cmpg-double" | "cmp-long" => {
                want(3)?;
                Op::Binary { op: mnemonic.to_string(), dst: reg(0)?, a: reg(1)?, b: reg(2)? }
            }
            m if is_typed(m, "aget") => {
                want(3)?;
                Op::ArrayGet { dst: reg(0)?, array: reg(1)?, index: reg(2)? }
            }
            m if is_typed(m, "aput") => {
                want(3)?;
                Op::ArrayPut { src: reg(0)?, array: reg(1)?, index: reg(2)? }
            }
            m if is_typed(m, "iget") => {
                want(3)?;
                Op::InstanceGet { dst: reg(0)?, object: reg(1)?, field: field(2)? }
            }
            m if is_typed(m, "iput") => {
                want(3)?;
                Op::InstancePut { src: reg(0)?, object: reg(1)?, field: field(2)? }
            }
            m if is_typed(m, "sget") => {
                want(2)?;
                Op::StaticGet { dst: reg(0)?, field: field(1)? }
            }
            m if is_typed(m, "sput") => {
                want(2)?;
                Op::StaticPut { src: reg(0)?, field: field(1)? }
            }
            _ if invoke_kind(base).is_some() && (mnemonic == base || mnemonic.ends_with("/range")) => {
                want(2)?;
                let kind = invoke_kind(base).unwrap();
                let args = regs.resolve_list(ops[0]).map_err(e)?;
                let method = parse_method_ref(ops[1]).map_err(e)?;
                let words = usize::from(kind != InvokeKind::Static)
                    + method.parameters.iter().map(|p| word_size(p) as usize).sum::<usize>();
                if args.len() != words {
                    return Err(self.err(
                        ln,
                        format!("{mnemonic} passes {} registers but {} needs {words}", args.len(), method),
                    ));
                }
                Op::Invoke { kind, args, method }
            }
            m if UNARY.contains(&m) => {
                want(2)?;
                Op::Unary { op: m.to_string(), dst: reg(0)?, src: reg(1)? }
            }
            m if is_binop(base) && m == base => {
                want(3)?;
                Op::Binary { op: base.to_string(), dst: reg(0)?, a: reg(1)?, b: reg(2)? }
            }
            m if is_binop(base) && m.ends_with("/2addr") => {
                want(2)?;
                let d = reg(0)?;
                Op::Binary { op: base.to_string(), dst: d, a: d, b: reg(1)? }
            }
            m if (base.ends_with("-int") && is_binop(base) && (m.ends_with("/lit16") || m.ends_with("/lit8")))
                || base == "rsub-int" =>
            {
                want(3)?;
                Op::BinaryLit { op: base.to_string(), dst: reg(0)?, src: reg(1)?, lit: lit(2)? }
            }
            _ => Op::Opaque { opcode: mnemonic.to_string(), operands: rest.trim().to_string() },
        };
        Ok(op)
    }
}

const UNARY: &[&str] = &[
    "neg-int", "not-int", "neg-long", "not-long", "neg-float", "neg-double", "int-to-long", "int-to-float",
    "int-to-double", "long-to-int", "long-to-float", "long-to-double", "float-to-int", "float-to-long",
    "float-to-double", "double-to-int", "double-to-long", "double-to-float", "int-to-byte", "int-to-char",
    "int-to-short",
];

fn is_binop(base: &str) -> bool {
    let Some((op, ty)) = base.split_once('-') else {
        return false;
    };
    let int_only = matches!(op, "and" | "or" | "xor" | "shl" | "shr" | "ushr");
    let arith = matches!(op, "add" | "sub" | "mul" | "div" | "rem");
    match ty {
        "int" | "long" => arith || int_only,
        "float" | "double" => arith,
        _ => false,
    }
}

fn is_typed(m: &str, prefix: &str) -> bool {
    match m.strip_prefix(prefix) {
        Some("") => true,
        Some(s) => matches!(
            s,
            "-wide" | "-object" | "-boolean" | "-byte" | "-char" | "-short"
        ),
        None => false,
    }
}

fn invoke_kind(base: &str) -> Option<InvokeKind> {
    Some(match base {
        "invoke-virtual" => InvokeKind::Virtual,
        "invoke-super" => InvokeKind::Super,
        "invoke-direct" => InvokeKind::Direct,
        "invoke-static" => InvokeKind::Static,
        "invoke-interface" => InvokeKind::Interface,
        _ => return None,
    })
}

struct RegResolver {
    total: u16,
    params_base: u16,
}

impl RegResolver {
    fn resolve(&self, tok: &str) -> std::result::Result<Reg, String> {
        let tok = tok.trim();
        let (base, num) = match tok.as_bytes().first() {
            Some(b'v') => (0u32, &tok[1..]),
            Some(b'p') => (u32::from(self.params_base), &tok[1..]),
            _ => return Err(format!("expected register, got `{tok}`")),
        };
        let n: u32 = num.parse().map_err(|_| format!("expected register, got `{tok}`"))?;
        let r = base + n;
        if r >= u32::from(self.total) {
            return Err(format!("register {tok} out of range (method has {} registers)", self.total));
        }
        Ok(r as Reg)
    }

    fn resolve_list(&self, tok: &str) -> std::result::Result<Vec<Reg>, String> {
        let inner = tok
            .trim()
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| format!("expected register list, got `{tok}`"))?
            .trim();
        if inner.is_empty() {
            return Ok(Vec::new());
        }
        if let Some((a, b)) = inner.split_once("..") {
            let a = self.resolve(a)?;
            let b = self.resolve(b)?;
            if b < a {
                return Err(format!("empty register range `{tok}`"));
            }
            return Ok((a..=b).collect());
        }
        inner.split(',').map(|r| self.resolve(r)).collect()
    }
}

pub(crate) fn parse_field_ref(s: &str) -> std::result::Result<FieldRef, String> {
    let (class, rest) = s.split_once("->").ok_or_else(|| format!("malformed field reference `{s}`"))?;
    let (name, ty) = rest.split_once(':').ok_or_else(|| format!("malformed field reference `{s}`"))?;
    if !super::types::is_valid_descriptor(class) || !super::types::is_valid_descriptor(ty) {
        return Err(format!("malformed field reference `{s}`"));
    }
    Ok(FieldRef { class: class.to_string(), name: name.to_string(), ty: ty.to_string() })
}

pub(crate) fn parse_method_ref(s: &str) -> std::result::Result<MethodRef, String> {
    let (class, rest) = s.split_once("->").ok_or_else(|| format!("malformed method reference `{s}`"))?;
    let paren = rest.find('(').ok_or_else(|| format!("malformed method reference `{s}`"))?;
    let (parameters, return_type) =
        parse_method_descriptor(&rest[paren..]).ok_or_else(|| format!("malformed method descriptor in `{s}`"))?;
    if !super::types::is_valid_descriptor(class) {
        return Err(format!("malformed method reference `{s}`"));
    }
    Ok(MethodRef { class: class.to_string(), name: rest[..paren].to_string(), parameters, return_type })
}

fn split_first(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    }
}

/// Splits on top-level commas, respecting quotes and `{}` register lists.
fn split_operands(s: &str) -> Vec<&str> {
    let s = s.trim();
    if s.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut depth = 0;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => quote = Some(c),
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn find_unquoted(s: &str, target: char) -> Option<usize> {
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        if c == '"' || c == '\'' {
            quote = Some(c);
        } else if c == target {
            return Some(i);
        }
    }
    None
}

fn strip_comment(line: &str) -> &str {
    match find_unquoted(line, '#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Integer literal as baksmali prints it: `0x1f`, `-0x1`, `10`, `0x1234L`, `0x1t`.
pub(crate) fn parse_int(tok: &str) -> Option<i64> {
    let t = tok.trim();
    let t = t
        .strip_suffix(['L', 'l', 't', 'T', 's', 'S'])
        .unwrap_or(t);
    let (neg, t) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let v = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(h, 16).ok()? as i64
    } else if t.chars().all(|c| c.is_ascii_digit()) && !t.is_empty() {
        t.parse::<u64>().ok()? as i64
    } else if let Some(f) = t.strip_suffix(['f', 'F']) {
        f.parse::<f32>().ok()?.to_bits() as i64
    } else if t.contains('.') {
        t.parse::<f64>().ok()?.to_bits() as i64
    } else {
        return None;
    };
    Some(if neg { v.wrapping_neg() } else { v })
}

fn parse_literal(v: &str) -> std::result::Result<Literal, String> {
    let v = v.trim();
    if v.starts_with('"') {
        return unquote(v).map(Literal::Str);
    }
    Ok(match v {
        "true" => Literal::Bool(true),
        "false" => Literal::Bool(false),
        "null" => Literal::Null,
        _ => match parse_int(v) {
            Some(i) if !v.contains('.') && !v.ends_with(['f', 'F']) => Literal::Int(i),
            _ => Literal::Raw(v.to_string()),
        },
    })
}

/// Decodes a double-quoted smali string literal.
pub(crate) fn unquote(s: &str) -> std::result::Result<String, String> {
    let s = s.trim();
    let inner = s
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .ok_or_else(|| format!("expected string literal, got `{s}`"))?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{c}'),
            Some('0') => out.push('\0'),
            Some('"') => out.push('"'),
            Some('\'') => out.push('\''),
            Some('\\') => out.push('\\'),
            Some('u') => {
                let hex: String = chars.by_ref().take(4).collect();
                let cp = u32::from_str_radix(&hex, 16).map_err(|_| format!("bad unicode escape in {s}"))?;
                out.push(char::from_u32(cp).unwrap_or('\u{fffd}'));
            }
            other => return Err(format!("bad escape `\\{}` in {s}", other.unwrap_or(' '))),
        }
    }
    Ok(out)
}
